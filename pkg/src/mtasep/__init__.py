"""Integrable multi-species exclusion processes: interaction matrices, Yang-Baxter
classification, Bethe-ansatz kernels and a direct simulator."""

__version__ = "0.1.0"
