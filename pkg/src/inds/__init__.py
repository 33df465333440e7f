"""Latent-space detection of AI-generated video.

Per-frame initial noise is recovered with a bidirectional explicit linear
multistep inversion scheme, differenced into a 7-element initial-noise
difference sequence, and analyzed with multi-domain feature extractors.
A staged selection pass and a cost-sensitive histogram gradient-boosted
classifier with TPE hyperparameter search sit on top.
"""

__version__ = "0.1.0"
