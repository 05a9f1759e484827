"""Entanglement and nonclassicality witnesses for collective spins coupled to light.

Submodules
----------
hilbert
    Dicke, Fock and full qubit spaces, collective operators and states.
separable
    Numerical separable bound on ``Var(S_plus S_minus)`` and its oracles.
criteria
    Witness evaluators returning :class:`~dicke_witness.criteria.WitnessReport`.
models
    Dicke-model and condensate ground states, single-photon superradiance.
cli
    Reproducible experiments writing CSV files.
"""

__version__ = "0.1.0"
