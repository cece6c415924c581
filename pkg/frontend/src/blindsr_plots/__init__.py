"""Figure rendering for experiment CSVs produced by the blindsr harness."""

from .plots import render_convergence, render_noise, render_phase

__version__ = "0.1.0"
