"""Independent reference computations the tests freeze their expectations against.

Each oracle takes a different route than the implementation: detection
probabilities via explicit 2x2 density matrices instead of the scalar
cross-term formula, the splitter via a literal Hadamard matrix product,
and the false-anomaly rate via numerical quadrature of the Gaussian
density instead of erfc.
"""

import math

import numpy as np
from scipy import integrate

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)


def hadamard_apply(amp_a: complex, amp_b: complex) -> tuple[complex, complex]:
    """Splitter action as an explicit matrix product."""
    out = HADAMARD @ np.array([amp_a, amp_b], dtype=complex)
    return complex(out[0]), complex(out[1])


def born_probabilities(amp_a: complex, amp_b: complex, visibility: float) -> tuple[float, float]:
    """Detection probabilities from the dephasing-channel density matrix.

    The partially coherent state is  rho = V |psi><psi| + (1 - V) D(|psi><psi|),
    with D zeroing the off-diagonals; the splitter conjugates rho and the
    detectors read the output diagonal.
    """
    psi = np.array([amp_a, amp_b], dtype=complex)
    rho = np.outer(psi, psi.conjugate())
    dephased = np.diag(np.diag(rho))
    rho_v = visibility * rho + (1.0 - visibility) * dephased
    rho_out = HADAMARD @ rho_v @ HADAMARD.conjugate().T
    return float(rho_out[0, 0].real), float(rho_out[1, 1].real)


def gaussian_two_sided_tail(window: float, sigma: float) -> float:
    """P(|X| > window) for X ~ N(0, sigma), by quadrature of the density."""
    if sigma == 0:
        return 0.0

    def density(x):
        return math.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))

    tail, _ = integrate.quad(density, window, 20.0 * sigma)
    return 2.0 * tail


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1.0 - p) / n)
