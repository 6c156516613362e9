"""Bohm potential lab: a numerical laboratory for the Bohm quantum potential.

Four directions through the same machinery:
- Forward: amplitude R -> quantum potential V_Q = -(hbar^2/2m) laplacian(R)/R
- Inverse: target V_Q -> normalizable amplitude (bound state of -V_Q) or,
  for continuum targets, the amplitude ODE integrated from a seed
- Identity: V_Q + V - E_n = 0 for eigenstates, checked on the grid
- Dynamics: Bohmian trajectories of analytic packets, continuity residuals

Outputs are data (CSV plus sidecar JSON); see README for plotting.
"""

__version__ = "0.1.0"
__author__ = "Brandon Behring"

from bohm_lab.config import get_config, load_fiducials

__all__ = ["get_config", "load_fiducials", "__version__"]
