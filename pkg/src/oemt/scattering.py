"""Frequency-domain input-output response of the transducer.

With every pump parked on its red sideband the steady three-mode chain
scatters the port inputs ``(a_in^1, b_in, a_out^2)`` elastically:

    T(omega) = I - i sqrt(K) (I omega - M_0)^{-1} sqrt(K),

where ``M_0`` is the constant coupling matrix and ``K = diag(kappa_1,
gamma_m, kappa_2)`` collects the *total* damping rates.  ``omega`` is
measured in the rotating frame, so ``omega = 0`` sits on each cavity's
pumped resonance.  Because ``M_0`` is complex symmetric and ``K`` carries
exactly its anti-Hermitian part, ``T`` is unitary and symmetric; the
physical splitting between measured and intrinsic channels enters only
through the extraction ratios ``nu_i = kappa_ext,i / kappa_i`` when the
output is decomposed (see :func:`noise_budget`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import coupling_matrix
from .errors import PhysicsError, PoleError, NumericalError

__all__ = [
    "ConversionMatrix",
    "conversion_matrix",
    "t31_closed_form",
    "HalfwidthResult",
    "halfwidth",
    "NoiseBudget",
    "noise_budget",
    "ProbeSpectrum",
    "probe_spectrum",
]


def _require_red(model):
    for idx, drive in ((1, model.drive1), (2, model.drive2)):
        if drive.sideband == "blue":
            raise PhysicsError(
                f"steady conversion requires red-sideband pumps; drive{idx} "
                "is blue")


def _require_damped(model):
    # zero damping puts resolvent poles on the real axis
    rates = {"kappa1": model.kappa1, "gamma_m": model.gamma_m,
             "kappa2": model.kappa2}
    dead = [name for name, rate in rates.items() if rate <= 0.0]
    if dead:
        raise PoleError(
            "response kernel has real-axis poles at zero damping: "
            + ", ".join(f"{name} = 0" for name in dead))


def _kernel_matrices(model):
    M0 = coupling_matrix(model.g1, model.g2, model.delta1, model.delta2,
                         model.kappa1, model.gamma_m, model.kappa2)
    sqrt_k = np.diag(np.sqrt([model.kappa1, model.gamma_m, model.kappa2]))
    return M0, sqrt_k


def _t_of(model, omega_grid):
    M0, sqrt_k = _kernel_matrices(model)
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    lhs = (omega_grid[:, None, None] * np.eye(3)[None] - M0[None])
    rhs = np.broadcast_to(sqrt_k, (omega_grid.size, 3, 3))
    try:
        resolvent = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"response solve failed: {exc}") from exc
    return np.eye(3)[None] - 1j * np.einsum("ij,njk->nik", sqrt_k, resolvent)


@dataclass
class ConversionMatrix:
    """Sampled scattering matrix with the model it came from."""

    model: object
    omega: np.ndarray
    matrices: np.ndarray          # (n, 3, 3) complex
    nu1: float
    nu2: float

    def entry(self, row, col):
        """One scattering amplitude on the grid (1-based port indices)."""
        return self.matrices[:, row - 1, col - 1]

    @property
    def signal_amplitude(self):
        """Measured-port conversion amplitude ``sqrt(nu1 nu2) T31``."""
        return math.sqrt(self.nu1 * self.nu2) * self.entry(3, 1)

    def unitarity_defects(self):
        """``max |T^dag T - I|`` at every grid frequency."""
        prod = np.einsum("nji,njk->nik", self.matrices.conj(), self.matrices)
        return np.abs(prod - np.eye(3)[None]).max(axis=(1, 2))

    def unitarity_defect(self):
        """``max |T^dag T - I|`` over the whole grid."""
        return float(self.unitarity_defects().max())

    def at(self, omega):
        """Single-frequency scattering matrix (fresh solve)."""
        return _t_of(self.model, [omega])[0]


def conversion_matrix(model, omega_grid):
    """Evaluate ``T(omega)`` on a frequency grid.

    Raises
    ------
    PoleError
        If any damping rate vanishes (real-axis poles).
    PhysicsError
        If a pump sits on the blue sideband.
    """
    _require_red(model)
    _require_damped(model)
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    return ConversionMatrix(model, omega_grid, _t_of(model, omega_grid),
                            model.nu1, model.nu2)


def t31_closed_form(model):
    """On-resonance conversion amplitude ``2 sqrt(G1 G2) / (G1 + G2 + gamma_m)``.

    Valid at zero residual detuning; the full matrix element reduces to
    this exactly, so the pair makes a dual-route consistency check.
    """
    if model.delta1 != 0.0 or model.delta2 != 0.0:
        raise PhysicsError("closed form assumes zero residual detunings")
    G1, G2 = model.Gamma1, model.Gamma2
    return 2.0 * math.sqrt(G1 * G2) / (G1 + G2 + model.gamma_m)


@dataclass
class HalfwidthResult:
    """Half-amplitude bandwidth of the conversion peak.

    ``delta_omega`` is the smallest positive frequency where ``|T31|``
    falls to half its ``omega = 0`` value; ``crossings`` lists every
    crossing found on the scanned grid.
    """

    delta_omega: float
    crossings: list = field(default_factory=list)


def halfwidth(model, omega_max, n_grid=2001, refine_tol=1e-6):
    """Scan ``|T31(omega)|`` for its half-amplitude crossings.

    The grid scan brackets each crossing of ``|T31| = |T31(0)|/2`` on
    ``(0, omega_max]``; each bracket is then bisected to a relative width
    of ``refine_tol``.

    Raises
    ------
    NumericalError
        If no crossing lies inside the scanned span (the message reports
        the span and the edge values).
    """
    cm = conversion_matrix(model, [0.0])
    t0 = abs(cm.matrices[0, 2, 0])
    half = 0.5 * t0
    grid = np.linspace(0.0, float(omega_max), int(n_grid))
    vals = np.abs(_t_of(model, grid)[:, 2, 0]) - half
    crossings = []
    sign = np.sign(vals)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in idx:
        lo, hi = grid[i], grid[i + 1]
        flo = vals[i]
        while hi - lo > refine_tol * max(hi, refine_tol):
            mid = 0.5 * (lo + hi)
            fm = float(np.abs(_t_of(model, [mid])[0, 2, 0]) - half)
            if flo * fm <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fm
        crossings.append(0.5 * (lo + hi))
    if not crossings:
        raise NumericalError(
            f"|T31| never crosses half its peak ({half:.3e}) on "
            f"(0, {omega_max}]; edge values {abs(vals[0] + half):.3e} .. "
            f"{abs(vals[-1] + half):.3e}")
    return HalfwidthResult(delta_omega=float(crossings[0]),
                           crossings=[float(c) for c in crossings])


@dataclass
class NoiseBudget:
    """Decomposition of the measured output of cavity 2 at one frequency.

    Coefficients multiply the independent input fields; ``*_approx``
    values drop the small direct-reflection term ``T33 - 1`` wherever the
    standard budget does.  Powers are vacuum-normalized second moments of
    each contribution (bath occupations included), so
    ``sum(powers) = n_signal-independent output power``.
    """

    omega: float
    signal: complex              # on a_p,in^(1)
    mechanical: complex          # on b_in
    intrinsic1: complex          # on cavity-1 intrinsic vacuum
    port2_exact: complex         # on a_p,in^(2)
    port2_approx: complex
    intrinsic2_exact: complex    # on cavity-2 intrinsic vacuum
    intrinsic2_approx: complex
    snr: float
    t32_over_t31: complex
    powers: dict

    def total_output_power(self):
        """Vacuum-input output power; exactly 1 by unitarity."""
        return (abs(self.signal)**2 + abs(self.mechanical)**2
                + abs(self.intrinsic1)**2 + abs(self.port2_exact)**2
                + abs(self.intrinsic2_exact)**2)


def noise_budget(model, omega=0.0):
    """Signal and noise weights on the measured output port of cavity 2.

    The scalar ``snr`` is the single-photon signal-to-mechanical-noise
    ratio ``nu1 sqrt(Gamma1 / (gamma_m n_th^m))`` (infinite for a zero
    temperature mechanical bath).
    """
    cm = conversion_matrix(model, [float(omega)])
    T = cm.matrices[0]
    nu1, nu2 = model.nu1, model.nu2
    s2 = math.sqrt(nu2)
    w = T[2, 2] - 1.0
    budget = NoiseBudget(
        omega=float(omega),
        signal=math.sqrt(nu1) * s2 * T[2, 0],
        mechanical=s2 * T[2, 1],
        intrinsic1=math.sqrt(1.0 - nu1) * s2 * T[2, 0],
        port2_exact=1.0 + nu2 * w,
        port2_approx=1.0 - nu2,
        intrinsic2_exact=math.sqrt((1.0 - nu2) * nu2) * w,
        intrinsic2_approx=-math.sqrt((1.0 - nu2) * nu2),
        snr=(nu1 * math.sqrt(model.Gamma1 / (model.gamma_m * model.n_th_m))
             if model.n_th_m > 0.0 and model.gamma_m > 0.0 else math.inf),
        t32_over_t31=T[2, 1] / T[2, 0] if T[2, 0] != 0.0 else complex("nan"),
        powers={},
    )
    n_m = model.mechanics.n_th
    n_c1 = model.cavity1.n_th
    n_c2 = model.cavity2.n_th
    budget.powers = {
        "signal_port": abs(budget.signal)**2 * (n_c1 + 0.5),
        "mechanical": abs(budget.mechanical)**2 * (n_m + 0.5),
        "intrinsic1": abs(budget.intrinsic1)**2 * (n_c1 + 0.5),
        "port2": abs(budget.port2_exact)**2 * (n_c2 + 0.5),
        "intrinsic2": abs(budget.intrinsic2_exact)**2 * (n_c2 + 0.5),
    }
    return budget


@dataclass
class ProbeSpectrum:
    """Measured-port probe response of the cavity-1/mechanics pair."""

    omega: np.ndarray
    amplitude: np.ndarray    # complex t(omega) on the measured port
    power: np.ndarray        # |t|^2

    def minima(self):
        """(omega, power) local minima, interior grid points only."""
        return self._extrema(np.less)

    def maxima(self):
        return self._extrema(np.greater)

    def _extrema(self, op):
        p = self.power
        mask = op(p[1:-1], p[:-2]) & op(p[1:-1], p[2:])
        idx = np.nonzero(mask)[0] + 1
        return [(float(self.omega[i]), float(p[i])) for i in idx]


def probe_spectrum(model, omega_grid):
    """Weak-probe response on the measured port of cavity 1.

    Only the cavity-1/mechanics block participates (the second pump is
    ignored).  The returned amplitude is

        t(omega) = 1 - i kappa_ext,1 G11(omega),

    with ``G`` the two-mode resolvent; at unit extraction this is a pure
    phase, while at critical coupling (``nu1 = 1/2``) the bare cavity
    shows a full absorption dip which the mechanical coupling carves into
    a transparency window of width ``Gamma1 + gamma_m``, or splits into
    two normal-mode dips separated by ``2 g1`` in the strong-coupling
    regime.
    """
    _require_red(model)
    if model.kappa1 <= 0.0 or model.gamma_m <= 0.0:
        raise PoleError("probe response has real-axis poles at zero damping")
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    M = np.array([[-model.delta1 - 0.5j * model.kappa1, model.g1],
                  [model.g1, -0.5j * model.gamma_m]], dtype=complex)
    lhs = omega_grid[:, None, None] * np.eye(2)[None] - M[None]
    g11 = np.linalg.inv(lhs)[:, 0, 0]
    amplitude = 1.0 - 1j * model.cavity1.kappa_ext * g11
    return ProbeSpectrum(omega_grid, amplitude, np.abs(amplitude)**2)
