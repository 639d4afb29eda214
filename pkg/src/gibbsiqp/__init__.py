"""Gibbs states of IQP parent Hamiltonians, their Davies dynamics, and the
bit-flip distillation and repetition-code pipelines built on them."""

__version__ = "0.1.0"
