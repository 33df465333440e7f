"""Feature extractor registry: one entry point per feature family."""

from __future__ import annotations

from ..sequence import Inds
from . import frequency, spacetime, statistical, texture
from .frequency import WaveletConfig
from .registry import FeatureVector, concat, impute_invalid

MODULE_EXTRACTORS = {
    "spacetime": (
        spacetime.energy_features,
        spacetime.gradient_features,
        spacetime.correlation_features,
        spacetime.channel_interaction_features,
    ),
    "frequency": (
        frequency.temporal_spectrum_features,
        frequency.spatial_spectrum_features,
        frequency.spectral_consistency_features,
        frequency.wavelet_features,
    ),
    "statistical": (
        statistical.higher_moment_features,
        statistical.lmoment_features,
        statistical.local_variability_features,
        statistical.sobel_edge_features,
    ),
    "texture": (
        texture.glcm_features,
        texture.lbp_features,
        texture.pca_features,
        texture.keyframe_consistency_features,
    ),
}

ALL_MODULES = tuple(MODULE_EXTRACTORS)


def module_of(name: str) -> str:
    """Feature family owning a registry name, from its prefix."""
    head = name.split(".", 1)[0]
    return {
        "energy": "spacetime",
        "gradient": "spacetime",
        "correlation": "spacetime",
        "channel": "spacetime",
        "spectrum": "frequency",
        "wavelet": "frequency",
        "histat": "statistical",
        "localvar": "statistical",
        "edge": "statistical",
        "texture": "texture",
        "cross": "cross",
    }.get(head, "unknown")


def extract_features(
    inds: Inds,
    modules: tuple[str, ...] = ALL_MODULES,
    wavelet_cfg: WaveletConfig | None = None,
    impute: str = "median",
) -> FeatureVector:
    """Run the enabled feature families over one difference sequence."""
    parts = []
    for mod in modules:
        for fn in MODULE_EXTRACTORS[mod]:
            if fn is frequency.wavelet_features:
                parts.append(fn(inds, wavelet_cfg or WaveletConfig()))
            else:
                parts.append(fn(inds))
    return impute_invalid(concat(parts), policy=impute)
