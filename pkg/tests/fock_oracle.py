"""Truncated number-basis reference implementations.

Everything here is built directly from ladder operators on a truncated
Fock space and serves as an independent cross-check of the Gaussian
(covariance-matrix) code paths.  Nothing in this module imports the
package under test.

Conventions match the package: quadratures x = (a + a^dag)/sqrt(2),
p = (a - a^dag)/(i sqrt(2)), vacuum variance 1/2, displacement
D(alpha) = exp(alpha a^dag - alpha* a), squeeze operator
S(z) = exp((z* a^2 - z a^dag^2)/2).
"""

import numpy as np
from scipy.linalg import expm

DEFAULT_CUTOFF = 80


def destroy(cutoff=DEFAULT_CUTOFF):
    return np.diag(np.sqrt(np.arange(1.0, cutoff)), 1)


def vacuum(cutoff=DEFAULT_CUTOFF):
    psi = np.zeros(cutoff, dtype=complex)
    psi[0] = 1.0
    return psi


def displacement_op(alpha, cutoff=DEFAULT_CUTOFF):
    a = destroy(cutoff)
    return expm(alpha * a.conj().T - np.conj(alpha) * a)


def squeeze_op(z, cutoff=DEFAULT_CUTOFF):
    a = destroy(cutoff)
    ad = a.conj().T
    return expm(0.5 * (np.conj(z) * (a @ a) - z * (ad @ ad)))


def displaced_squeezed_psi(alpha, z, cutoff=DEFAULT_CUTOFF):
    """|alpha, z> = D(alpha) S(z) |0> on the truncated space."""
    return displacement_op(alpha, cutoff) @ (squeeze_op(z, cutoff) @ vacuum(cutoff))


def overlap_fidelity(psi1, psi2):
    """|<psi1|psi2>|^2 for pure states."""
    return abs(np.vdot(psi1, psi2)) ** 2


def quadrature_moments(psi):
    """Mean vector (x, p) and 2x2 symmetrized covariance of a pure state."""
    cutoff = len(psi)
    a = destroy(cutoff)
    ad = a.conj().T
    x = (a + ad) / np.sqrt(2.0)
    p = (a - ad) / (1j * np.sqrt(2.0))

    def ev(op):
        return np.vdot(psi, op @ psi)

    mx, mp = ev(x).real, ev(p).real
    vxx = ev(x @ x).real - mx * mx
    vpp = ev(p @ p).real - mp * mp
    vxp = ev(0.5 * (x @ p + p @ x)).real - mx * mp
    mean = np.array([mx, mp])
    cov = np.array([[vxx, vxp], [vxp, vpp]])
    return mean, cov


def ladder_moments(psi):
    """(<a^dag a>, <a a>) including the mean-field contribution."""
    cutoff = len(psi)
    a = destroy(cutoff)
    occ = np.vdot(psi, (a.conj().T @ a) @ psi)
    anom = np.vdot(psi, (a @ a) @ psi)
    return occ.real, anom
