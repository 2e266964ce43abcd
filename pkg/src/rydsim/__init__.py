"""Cold Rydberg-atom simulation toolkit.

Library modules: model (parameter registry and closed-form helpers), bloch
(multilevel optical Bloch dynamics and spectra), foerster (few-body Foerster
resonances, Stark and rf tuned), blockade (mesoscopic dipole-blockade
dynamics), gates (quantum-gate layer), cli (scan-driven command line), with
the hot integrator kernels in kernels (numba unless RYDSIM_NO_NUMBA is set).
"""

__version__ = "0.1.0"

from . import blockade, bloch, foerster, gates, kernels, model, traces  # noqa: F401
