"""Budget-constrained test-set curation and model ranking in an
embedding space: clustering, per-cluster PPS sampling, and sample-quality
metrics (chi-square diversity, SRCC rank fidelity, DMOS difficulty)."""

__version__ = "0.1.0"
