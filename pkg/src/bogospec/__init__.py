"""Bogoliubov excitation spectra and ground-state energy corrections for
trapped Bose gases in the Gross-Pitaevskii regime.

Modules
-------
scattering   zero-energy and Neumann two-body problems
gp_solver    GP functional minimizer
operators    H_GP, the excitation operator E and excitation levels
kernels      correlation kernels and the conjugated quadratic forms
bogo_diag    diagonalization of finite quadratic bosonic Hamiltonians
fock_oracle  brute-force truncated Fock-space oracle
ebog         second-order energy E_Bog
validate     cross-module property suite
cli          configuration, pipeline and command line
"""

__version__ = "0.1.0"

from . import bogo_diag, ebog, fock_oracle, gp_solver, kernels, operators, scattering  # noqa: E402

__all__ = [
    "__version__",
    "scattering",
    "gp_solver",
    "operators",
    "kernels",
    "bogo_diag",
    "fock_oracle",
    "ebog",
]
