"""Figures of merit evaluated on Gaussian states and models.

All covariance conventions follow :mod:`oemt.gaussian` (vacuum variance
1/2).  Temperature conversions use the exact Bose relation; with
dimensionless models the returned temperature is in units of
``hbar * omega_m / k_B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .errors import PhysicsError

__all__ = [
    "gaussian_fidelity",
    "log_negativity",
    "effective_temperature",
    "bose_occupation",
    "conversion_gain",
    "single_photon_noise_bound",
    "MetricReport",
]


def gaussian_fidelity(state1, state2):
    """Uhlmann fidelity of two single-mode Gaussian states.

    Uses the closed form for one mode: with ``A_i`` the covariance
    matrices and ``dm`` the mean difference,

        F = exp(-dm^T (A1 + A2)^{-1} dm / 2) / (sqrt(D + L) - sqrt(L)),

    where ``D = det(A1 + A2)`` and ``L = (4 det A1 - 1)(4 det A2 - 1)/4``.
    Both pure and mixed inputs are supported; the result is symmetric and
    equals 1 only for identical states.
    """
    for s in (state1, state2):
        if s.n_modes != 1:
            raise PhysicsError(
                f"fidelity is defined here for single-mode states, got "
                f"{s.n_modes} modes")
    a1, a2 = state1.cov, state2.cov
    dm = state2.mean - state1.mean
    total = a1 + a2
    det_total = float(np.linalg.det(total))
    lam = (4.0 * float(np.linalg.det(a1)) - 1.0) * \
          (4.0 * float(np.linalg.det(a2)) - 1.0) / 4.0
    lam = max(lam, 0.0)  # clip tiny negative round-off for near-pure states
    denom = math.sqrt(det_total + lam) - math.sqrt(lam)
    gauss = math.exp(-0.5 * float(dm @ np.linalg.solve(total, dm)))
    return min(1.0, gauss / denom)


def log_negativity(state, pair=None):
    """Logarithmic negativity of a two-mode Gaussian state.

    ``E_N = max(0, -ln(2 nu_tilde_minus))`` with ``nu_tilde_minus`` the
    smaller symplectic eigenvalue of the partial transpose.  ``pair``
    selects two mode labels from a larger state.
    """
    if pair is not None:
        state = state.reduced(pair)
    if state.n_modes != 2:
        raise PhysicsError("log negativity needs exactly two modes")
    v = state.cov
    a = float(np.linalg.det(v[:2, :2]))
    b = float(np.linalg.det(v[2:, 2:]))
    c = float(np.linalg.det(v[:2, 2:]))
    det_v = float(np.linalg.det(v))
    sigma = a + b - 2.0 * c  # sign of c flips under partial transpose
    inner = sigma**2 - 4.0 * det_v
    if inner < 0.0:
        inner = 0.0
    nu_sq = 0.5 * (sigma - math.sqrt(inner))
    if nu_sq <= 0.0:
        raise PhysicsError(
            f"partial-transpose eigenvalue collapsed (nu^2 = {nu_sq:.3e}); "
            "covariance is unphysical")
    return max(0.0, -math.log(2.0 * math.sqrt(nu_sq)))


def effective_temperature(occupation, omega_m=1.0, units="dimensionless"):
    """Bath temperature whose Bose occupation at ``omega_m`` is ``occupation``.

    Inverse of :func:`bose_occupation`; returns 0 for zero occupation.
    Dimensionless models report temperature in units of
    ``hbar * omega_m / k_B``.
    """
    if occupation < 0.0:
        # occupations extracted from simulated covariances carry roundoff
        if occupation < -1e-9:
            raise PhysicsError("occupation must be non-negative")
        occupation = 0.0
    if occupation == 0.0:
        return 0.0
    scale = 1.0 if units == "dimensionless" else constants.hbar / constants.k
    return scale * omega_m / math.log1p(1.0 / occupation)


def bose_occupation(temperature, omega_m=1.0, units="dimensionless"):
    """Thermal occupation ``1 / (exp(hbar omega / k T) - 1)``."""
    if temperature < 0.0:
        raise PhysicsError("temperature must be non-negative")
    if temperature == 0.0:
        return 0.0
    scale = 1.0 if units == "dimensionless" else constants.hbar / constants.k
    return 1.0 / math.expm1(scale * omega_m / temperature)


def conversion_gain(model):
    """Counter-rotating sideband gain of each arm.

    Outside the resolved-sideband regime the retained counter-rotating
    sideband amplifies the converted field by ``A_i = 1 + (kappa_i /
    omega_m)^2`` per arm.  Returns ``(A_1, A_2, A_total, quantum_safe)``
    where ``quantum_safe`` flags ``A_total - 1 < 0.01`` (added noise well
    below one quantum).
    """
    if model.omega_m <= 0.0:
        raise PhysicsError("conversion gain needs omega_m > 0")
    a1 = 1.0 + (model.kappa1 / model.omega_m)**2
    a2 = 1.0 + (model.kappa2 / model.omega_m)**2
    total = a1 * a2
    return a1, a2, total, bool(total - 1.0 < 0.01)


def single_photon_noise_bound(model):
    """Largest mechanical bath occupation tolerating single-photon signals.

    Faithful conversion of a single-photon-level signal requires the
    thermal mechanical flux to stay below the induced coupling rates:
    ``n_th^m < min(Gamma1, Gamma2) / gamma_m``.  Returns ``(bound,
    satisfied)``.
    """
    if model.gamma_m <= 0.0:
        return math.inf, True
    bound = min(model.Gamma1, model.Gamma2) / model.gamma_m
    return bound, bool(model.n_th_m < bound)


@dataclass
class MetricReport:
    """Flat, unit-tagged collection of scalar metrics for export."""

    units: str
    values: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def add(self, name, value, note=None):
        self.values[name] = value
        if note:
            self.notes[name] = note

    def to_dict(self):
        def scrub(v):
            if isinstance(v, float):
                if math.isnan(v):
                    return "nan"
                if math.isinf(v):
                    return "inf" if v > 0 else "-inf"
            if isinstance(v, complex):
                return {"re": v.real, "im": v.imag}
            if isinstance(v, (np.floating, np.integer)):
                return scrub(float(v))
            if isinstance(v, (bool, np.bool_)):
                return bool(v)
            return v

        return {
            "units": self.units,
            "values": {k: scrub(v) for k, v in sorted(self.values.items())},
            "notes": dict(sorted(self.notes.items())),
        }
