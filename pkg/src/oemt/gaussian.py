"""Gaussian states over a labeled set of bosonic modes.

Quadratures follow ``x = (a + a^dag)/sqrt(2)``, ``p = -i (a - a^dag)/sqrt(2)``
with ``hbar = 1``, so the vacuum has variance 1/2 per quadrature.  State
vectors are ordered ``(x_1, p_1, x_2, p_2, ...)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PhysicsError

__all__ = [
    "GaussianState",
    "symplectic_form",
    "vacuum_state",
    "thermal_state",
    "coherent_state",
    "displaced_squeezed_state",
    "two_mode_squeezed_vacuum",
    "join_states",
]


def symplectic_form(n_modes):
    """Block-diagonal symplectic form, ``[[0, 1], [-1, 0]]`` per mode."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


@dataclass
class GaussianState:
    """First and second moments of a Gaussian state.

    Attributes
    ----------
    modes : tuple of str
        Mode labels, one per mode.
    mean : ndarray, shape (2N,)
        Quadrature expectation values.
    cov : ndarray, shape (2N, 2N)
        Symmetrized covariance matrix,
        ``cov_ij = <{dR_i, dR_j}>/2`` with ``dR = R - <R>``.
    """

    modes: tuple
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.modes = tuple(self.modes)
        self.mean = np.asarray(self.mean, dtype=float).copy()
        self.cov = np.asarray(self.cov, dtype=float).copy()
        n = len(self.modes)
        if self.mean.shape != (2 * n,) or self.cov.shape != (2 * n, 2 * n):
            raise PhysicsError(
                f"moment shapes {self.mean.shape}, {self.cov.shape} do not "
                f"match {n} modes")

    @property
    def n_modes(self):
        return len(self.modes)

    def copy(self):
        return GaussianState(self.modes, self.mean, self.cov)

    # -- physicality -------------------------------------------------------
    def physicality_margin(self):
        """Smallest eigenvalue of ``cov + i Omega / 2`` (Hermitian).

        Non-negative (up to numerical tolerance) for every physical state;
        zero eigenvalues mark pure squeezed directions.
        """
        omega = symplectic_form(self.n_modes)
        herm = self.cov + 0.5j * omega
        return float(np.linalg.eigvalsh(herm).min().real)

    def is_physical(self, tol=1e-9):
        if not np.allclose(self.cov, self.cov.T, atol=tol):
            return False
        return self.physicality_margin() >= -tol

    def require_physical(self, tol=1e-9, context=""):
        margin = self.physicality_margin()
        if margin < -tol:
            where = f" ({context})" if context else ""
            raise PhysicsError(
                f"covariance violates the uncertainty bound{where}: "
                f"min eig(V + i Omega/2) = {margin:.3e}")

    # -- structural operations ----------------------------------------------
    def mode_index(self, label):
        try:
            return self.modes.index(label)
        except ValueError:
            raise PhysicsError(f"no mode labeled {label!r}; have {self.modes}")

    def _block(self, idx):
        return slice(2 * idx, 2 * idx + 2)

    def reduced(self, labels):
        """Marginal state of the listed modes (partial trace over the rest)."""
        if isinstance(labels, str):
            labels = (labels,)
        idx = [self.mode_index(l) for l in labels]
        sel = np.concatenate([[2 * i, 2 * i + 1] for i in idx])
        return GaussianState(tuple(labels), self.mean[sel],
                             self.cov[np.ix_(sel, sel)])

    def replace_mode(self, label, single):
        """Return a copy with one mode freshly prepared in ``single``.

        Re-preparation discards all correlations between the replaced mode
        and the remainder, which models resetting that port with a new
        input state.
        """
        if single.n_modes != 1:
            raise PhysicsError("replacement state must be single-mode")
        idx = self.mode_index(label)
        out = self.copy()
        blk = self._block(idx)
        out.mean[blk] = single.mean
        out.cov[blk, :] = 0.0
        out.cov[:, blk] = 0.0
        out.cov[blk, blk] = single.cov
        return out

    def rotate_mode(self, label, phase):
        """Apply the phase-space rotation ``a -> exp(i phase) a`` to one mode."""
        idx = self.mode_index(label)
        c, s = math.cos(phase), math.sin(phase)
        rot = np.array([[c, -s], [s, c]])
        out = self.copy()
        blk = self._block(idx)
        out.mean[blk] = rot @ out.mean[blk]
        full = np.eye(2 * self.n_modes)
        full[blk, blk] = rot
        out.cov = full @ out.cov @ full.T
        return out

    # -- moment extraction ---------------------------------------------------
    def mode_amplitude(self, label):
        """Complex amplitude ``<a>`` of one mode."""
        blk = self._block(self.mode_index(label))
        mx, mp = self.mean[blk]
        return (mx + 1j * mp) / math.sqrt(2.0)

    def occupations(self):
        """Mean excitation number per mode, ``<a^dag a>``."""
        out = {}
        for k, label in enumerate(self.modes):
            blk = self._block(k)
            var = np.trace(self.cov[blk, blk])
            amp2 = float(self.mean[blk] @ self.mean[blk])
            out[label] = float(0.5 * (var + amp2) - 0.5)
        return out

    def ladder_moments(self):
        """Normal and anomalous second moments in the mode basis.

        Returns
        -------
        (occ, anom) : ndarray pairs, shape (N, N) complex
            ``occ[i, j] = <a_i^dag a_j>`` and ``anom[i, j] = <a_i a_j>``,
            both including the mean-field contribution.
        """
        n = self.n_modes
        amps = np.array([self.mode_amplitude(l) for l in self.modes])
        occ = np.zeros((n, n), dtype=complex)
        anom = np.zeros((n, n), dtype=complex)
        for i in range(n):
            bi = self._block(i)
            for j in range(n):
                bj = self._block(j)
                vxx = self.cov[bi, bj][0, 0]
                vxp = self.cov[bi, bj][0, 1]
                vpx = self.cov[bi, bj][1, 0]
                vpp = self.cov[bi, bj][1, 1]
                occ[i, j] = 0.5 * (vxx + vpp + 1j * vxp - 1j * vpx)
                anom[i, j] = 0.5 * (vxx - vpp + 1j * vxp + 1j * vpx)
                if i == j:
                    occ[i, j] -= 0.5
        occ += np.outer(amps.conj(), amps)
        anom += np.outer(amps, amps)
        return occ, anom


# -- constructors ------------------------------------------------------------

def vacuum_state(modes):
    modes = tuple(modes)
    n = len(modes)
    return GaussianState(modes, np.zeros(2 * n), 0.5 * np.eye(2 * n))


def thermal_state(modes, occupations):
    """Product of thermal states with quadrature variance ``n_th + 1/2``."""
    modes = tuple(modes)
    occupations = np.broadcast_to(np.asarray(occupations, dtype=float),
                                  (len(modes),))
    if np.any(occupations < 0.0):
        raise PhysicsError("thermal occupation must be non-negative")
    diag = np.repeat(occupations + 0.5, 2)
    return GaussianState(modes, np.zeros(2 * len(modes)), np.diag(diag))


def coherent_state(label, alpha):
    """Single-mode coherent state ``|alpha>``."""
    alpha = complex(alpha)
    mean = math.sqrt(2.0) * np.array([alpha.real, alpha.imag])
    return GaussianState((label,), mean, 0.5 * np.eye(2))


def displaced_squeezed_state(label, alpha, squeeze):
    """Single-mode displaced squeezed state.

    The state is squeezing followed by displacement, with squeeze operator
    ``exp((z* a^2 - z a^dag^2) / 2)``.  For real ``squeeze = r > 0`` the x
    quadrature variance is reduced to ``exp(-2r)/2``; a complex value
    ``r exp(i phi)`` rotates the squeezed axis by ``phi/2``.
    """
    alpha = complex(alpha)
    z = complex(squeeze)
    r, phi = abs(z), np.angle(z)
    base = np.diag([math.exp(-2.0 * r) / 2.0, math.exp(2.0 * r) / 2.0])
    c, s = math.cos(phi / 2.0), math.sin(phi / 2.0)
    rot = np.array([[c, -s], [s, c]])
    cov = rot @ base @ rot.T
    mean = math.sqrt(2.0) * np.array([alpha.real, alpha.imag])
    return GaussianState((label,), mean, cov)


def two_mode_squeezed_vacuum(labels, squeeze):
    """Two-mode squeezed vacuum with squeezing parameter ``squeeze`` > 0."""
    labels = tuple(labels)
    if len(labels) != 2:
        raise PhysicsError("two-mode squeezed vacuum needs two labels")
    s = float(squeeze)
    ch, sh = math.cosh(2.0 * s), math.sinh(2.0 * s)
    z = np.diag([1.0, -1.0])
    cov = 0.5 * np.block([[ch * np.eye(2), sh * z], [sh * z, ch * np.eye(2)]])
    return GaussianState(labels, np.zeros(4), cov)


def join_states(*states):
    """Tensor product of uncorrelated Gaussian states."""
    modes = tuple(l for s in states for l in s.modes)
    if len(set(modes)) != len(modes):
        raise PhysicsError(f"duplicate mode labels in join: {modes}")
    dim = 2 * len(modes)
    mean = np.concatenate([s.mean for s in states])
    cov = np.zeros((dim, dim))
    at = 0
    for s in states:
        d = 2 * s.n_modes
        cov[at:at + d, at:at + d] = s.cov
        at += d
    return GaussianState(modes, mean, cov)
