"""
Marginales de POVMs de espacio de fase, núcleos de Markov y suavizado.
"""

from .kernel import MarkovKernel
from .marginals import (
    KernelIdentityCheck,
    marginal_kernel_identity_check,
    marginal_p,
    marginal_q,
    wh_marginal_kernel,
)
from .smearing import (
    KernelExtraction,
    SmearedObservable,
    extract_kernel,
    fourier_basis,
    position_basis,
    smear_in_basis,
    smear_pvm,
)

__all__ = [
    "KernelExtraction",
    "KernelIdentityCheck",
    "MarkovKernel",
    "SmearedObservable",
    "extract_kernel",
    "fourier_basis",
    "marginal_kernel_identity_check",
    "marginal_p",
    "marginal_q",
    "position_basis",
    "smear_in_basis",
    "smear_pvm",
    "wh_marginal_kernel",
]
