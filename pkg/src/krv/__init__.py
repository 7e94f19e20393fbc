"""k-relevance-vector classification: kernel expansion, sparse Bayesian
pruning with a tunable stopping threshold, and a relevance-weighted
nearest-neighbor rule, plus baselines and rank-based comparison statistics."""

__version__ = "0.1.0"
