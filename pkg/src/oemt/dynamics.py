"""Linear quantum dynamics of the transducer.

Two cooperating engines live here:

* a complex-amplitude engine for the sideband-resolved (rotating-wave)
  three-mode chain, ``dv/dt = -i M(t) v + sqrt(K) v_in`` with
  ``v = (a_1, b, a_2)`` and the symmetric coupling matrix ``M(t)`` holding
  detunings on the diagonal and the enhanced couplings off it;
* a real-quadrature engine for general quadratic dynamics
  ``da/dt = S a + P a^dag`` that also covers blue-sideband (pair-creation)
  couplings and the single-cavity model with counter-rotating terms kept.

Propagation is exact piecewise: on every (sub)step the drift ``A`` and
diffusion ``D`` are frozen and the updates ``m -> E m + Psi u`` and
``V -> E V E^T + Q`` use the matrix exponentials

    E = exp(A h),  Psi = int_0^h exp(A s) ds,  Q = int_0^h exp(A s) D exp(A^T s) ds,

so constant segments incur no time-discretization error at all.  Smooth
ramps are subdivided until the within-step control variation is below a
relative tolerance, with controls sampled at substep midpoints.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, solve_continuous_lyapunov

from .errors import PhysicsError, StabilityError
from .gaussian import GaussianState
from .schedule import CouplingSchedule, Segment

__all__ = [
    "DriftDiffusion",
    "coupling_matrix",
    "transducer_generator",
    "single_cavity_generator",
    "Propagator",
    "schedule_transfer",
    "StateTrajectory",
    "MeanTrajectory",
    "evolve_covariance",
    "evolve_mean",
    "evolve_generator",
    "steady_state",
    "ReducedMechanicalModel",
    "adiabatic_eliminate",
    "constant_schedule",
]

#: Relative control variation allowed within one frozen-coefficient substep.
VARIATION_RTOL = 1e-3

#: Stability margin demanded before a steady-state solve.
STABILITY_MARGIN = -1e-12


def _embed(S, P):
    """Real quadrature drift for ``da/dt = S a + P a^dag`` (xpxp order)."""
    n = S.shape[0]
    A = np.zeros((2 * n, 2 * n))
    A[0::2, 0::2] = S.real + P.real
    A[0::2, 1::2] = -S.imag + P.imag
    A[1::2, 0::2] = S.imag + P.imag
    A[1::2, 1::2] = S.real - P.real
    return A


@dataclass
class DriftDiffusion:
    """Constant-coefficient quadratic generator for a set of modes."""

    modes: tuple
    S: np.ndarray            # (N, N) complex, coefficient of a
    P: np.ndarray            # (N, N) complex, coefficient of a^dag
    diffusion: np.ndarray    # (2N, 2N) real
    drive_weights: np.ndarray  # (N,) sqrt(kappa_ext) per mode

    @property
    def n_modes(self):
        return len(self.modes)

    @property
    def drift(self):
        return _embed(self.S, self.P)

    def stability_margin(self):
        """Largest real part among the drift eigenvalues."""
        return float(np.linalg.eigvals(self.drift).real.max())


def coupling_matrix(g1, g2, delta1, delta2, kappa1, gamma_m, kappa2):
    """Symmetric rotating-frame coupling matrix of the three-mode chain."""
    return np.array([
        [-delta1 - 0.5j * kappa1, g1, 0.0],
        [g1, -0.5j * gamma_m, g2],
        [0.0, g2, -delta2 - 0.5j * kappa2],
    ], dtype=complex)


def _diffusion_for(model):
    rates = (model.kappa1, model.gamma_m, model.kappa2)
    occs = (model.cavity1.n_th, model.mechanics.n_th, model.cavity2.n_th)
    diag = np.repeat([r * (n + 0.5) for r, n in zip(rates, occs)], 2)
    return np.diag(diag)


def transducer_generator(model, g1=None, g2=None, delta1=None, delta2=None):
    """Three-mode generator with each pump on its configured sideband.

    A red (or far off-resonant red) pump contributes a beam-splitter
    coupling ``-i g`` between its cavity and the mechanics; a blue pump
    contributes the pair-creation coupling ``g`` through ``a^dag`` terms.
    """
    g1 = model.g1 if g1 is None else g1
    g2 = model.g2 if g2 is None else g2
    delta1 = model.delta1 if delta1 is None else delta1
    delta2 = model.delta2 if delta2 is None else delta2
    S = np.array([
        [1j * delta1 - 0.5 * model.kappa1, 0.0, 0.0],
        [0.0, -0.5 * model.gamma_m, 0.0],
        [0.0, 0.0, 1j * delta2 - 0.5 * model.kappa2],
    ], dtype=complex)
    P = np.zeros((3, 3), dtype=complex)
    for cav, g, drive in ((0, g1, model.drive1), (2, g2, model.drive2)):
        if drive.sideband == "blue":
            P[cav, 1] = P[1, cav] = g
        else:
            S[cav, 1] = S[1, cav] = -1j * g
    weights = np.array([math.sqrt(model.cavity1.kappa_ext), 0.0,
                        math.sqrt(model.cavity2.kappa_ext)])
    return DriftDiffusion(model.mode_labels(), S, P, _diffusion_for(model),
                          weights)


def single_cavity_generator(model, rotating_wave=False):
    """Cavity-1 plus mechanics with counter-rotating terms retained.

    The cavity amplitude lives in the drive frame (detuning ``Delta`` from
    the drive placement), the mechanical one in the lab frame at
    ``omega_m``; mode occupations are frame independent, so trajectories
    can be compared directly against the rotating-wave engine.  With
    ``rotating_wave=True`` the matched two-mode rotating-frame generator is
    returned instead (counter-rotating terms dropped).
    """
    g = model.g1
    kappa = model.kappa1
    gamma_m = model.gamma_m
    omega_m = model.omega_m
    modes = (model.cavity1.label, model.mechanics.label)
    if rotating_wave:
        S = np.array([[1j * model.delta1 - 0.5 * kappa, -1j * g],
                      [-1j * g, -0.5 * gamma_m]], dtype=complex)
        P = np.zeros((2, 2), dtype=complex)
    else:
        Delta = model.drive1.detuning(omega_m)
        S = np.array([[1j * Delta - 0.5 * kappa, -1j * g],
                      [-1j * g, -1j * omega_m - 0.5 * gamma_m]], dtype=complex)
        P = np.array([[0.0, -1j * g], [-1j * g, 0.0]], dtype=complex)
    diag = np.repeat([kappa * (model.cavity1.n_th + 0.5),
                      gamma_m * (model.mechanics.n_th + 0.5)], 2)
    weights = np.array([math.sqrt(model.cavity1.kappa_ext), 0.0])
    return DriftDiffusion(modes, S, P, np.diag(diag), weights)


# -- step matrices -------------------------------------------------------------

def _step_matrices(A, h, D=None, with_drive=False):
    """Exact one-step update matrices for frozen coefficients.

    Returns ``(E, Q, Psi)`` with ``E = exp(A h)``,
    ``Q = int_0^h exp(A s) D exp(A^T s) ds`` (``None`` when ``D`` is) and
    ``Psi = int_0^h exp(A s) ds`` (``None`` unless requested).
    """
    n = A.shape[0]
    E = expm(A * h)
    Q = None
    if D is not None:
        blk = np.zeros((2 * n, 2 * n))
        blk[:n, :n] = A * h
        blk[:n, n:] = D * h
        blk[n:, n:] = -A.T * h
        F = expm(blk)
        Q = F[:n, n:] @ E.T
        Q = 0.5 * (Q + Q.T)
    Psi = None
    if with_drive:
        blk = np.zeros((2 * n, 2 * n))
        blk[:n, :n] = A * h
        blk[:n, n:] = np.eye(n) * h
        Psi = expm(blk)[:n, n:]
    return E, Q, Psi


# -- trajectories ---------------------------------------------------------------

@dataclass
class StateTrajectory:
    """Recorded first and second moments along an evolution."""

    modes: tuple
    t: np.ndarray
    means: np.ndarray    # (nt, 2N)
    covs: np.ndarray     # (nt, 2N, 2N)
    controls: np.ndarray  # (4, nt): g1, g2, delta1, delta2

    def state_at(self, index):
        return GaussianState(self.modes, self.means[index], self.covs[index])

    @property
    def final_state(self):
        return self.state_at(-1)

    def occupations(self):
        """Mean excitation per mode along the trajectory."""
        out = {}
        for k, label in enumerate(self.modes):
            blk = slice(2 * k, 2 * k + 2)
            var = self.covs[:, blk, blk].trace(axis1=1, axis2=2)
            amp2 = (self.means[:, blk]**2).sum(axis=1)
            out[label] = 0.5 * (var + amp2) - 0.5
        return out

    def amplitudes(self, label):
        """Complex ``<a>`` trace of one mode."""
        k = self.modes.index(label)
        return (self.means[:, 2 * k] + 1j * self.means[:, 2 * k + 1]) / math.sqrt(2)


@dataclass
class MeanTrajectory:
    """Mean-field-only record, with input/output port fields."""

    modes: tuple
    t: np.ndarray
    amplitudes: np.ndarray   # (nt, N) complex intra-mode amplitudes
    inputs: dict             # label -> complex input mean field
    outputs: dict            # label -> complex output mean field

    def amplitude(self, label):
        return self.amplitudes[:, self.modes.index(label)]


def _drive_vector(gen, inputs, t):
    u = np.zeros(2 * gen.n_modes)
    for label, pulse in inputs.items():
        k = gen.modes.index(label)
        w = gen.drive_weights[k]
        val = complex(pulse(t))
        u[2 * k] = w * math.sqrt(2.0) * val.real
        u[2 * k + 1] = w * math.sqrt(2.0) * val.imag
    return u


def _segment_substeps(segment, t0, t1, scale):
    """Number of frozen-coefficient substeps for one record interval."""
    if segment.is_constant:
        return 1
    probes = np.linspace(t0, t1, 5)
    vals = np.stack(segment.values(probes))
    variation = float(np.max(vals.max(axis=1) - vals.min(axis=1)))
    return max(1, int(math.ceil(variation / (VARIATION_RTOL * scale))))


def _segment_scale(segment):
    probes = np.linspace(0.0, segment.duration, 33)
    g1, g2, d1, d2 = segment.values(probes)
    scale = float(np.max(np.abs(np.stack([g1, g2, d1, d2]))))
    return scale if scale > 0.0 else 1.0


def evolve_covariance(model, schedule, state, *, points_per_segment=160,
                      inputs=None, builder=None):
    """Propagate mean and covariance through a coupling schedule.

    Parameters
    ----------
    model : TransducerModel
    schedule : CouplingSchedule
        Fully determines ``g1(t), g2(t), delta1(t), delta2(t)``; the
        model supplies rates, bath occupations and sideband placements.
    state : GaussianState
        Initial three-mode state; labels must match the model's.
    points_per_segment : int
        Record-grid density (endpoints of every segment always included).
    inputs : dict, optional
        ``mode label -> PulseShape`` mean drives on external ports.
    builder : callable, optional
        ``(model, g1, g2, d1, d2) -> DriftDiffusion`` override; defaults to
        :func:`transducer_generator`.

    Returns
    -------
    StateTrajectory
    """
    builder = builder or transducer_generator
    gen0 = builder(model, 0.0, 0.0, 0.0, 0.0)
    if tuple(state.modes) != tuple(gen0.modes):
        raise PhysicsError(
            f"state modes {state.modes} do not match model modes {gen0.modes}")
    D = gen0.diffusion
    inputs = inputs or {}

    m = state.mean.copy()
    V = state.cov.copy()
    ts = [0.0]
    means = [m.copy()]
    covs = [V.copy()]

    t_edge = 0.0
    cache = {}
    for seg in schedule.segments:
        n_rec = max(2, int(points_per_segment))
        local = np.linspace(0.0, seg.duration, n_rec)
        scale = _segment_scale(seg)
        for a, b in zip(local[:-1], local[1:]):
            n_sub = _segment_substeps(seg, a, b, scale)
            h = (b - a) / n_sub
            for j in range(n_sub):
                t_mid = a + (j + 0.5) * h
                if seg.is_constant:
                    key = (id(seg), round(h, 15))
                    if key not in cache:
                        g1, g2, d1, d2 = (float(w) for w in seg.values(0.0))
                        A = builder(model, g1, g2, d1, d2).drift
                        cache[key] = _step_matrices(A, h, D,
                                                    with_drive=bool(inputs))
                    E, Q, Psi = cache[key]
                else:
                    g1, g2, d1, d2 = (float(w) for w in seg.values(t_mid))
                    A = builder(model, g1, g2, d1, d2).drift
                    E, Q, Psi = _step_matrices(A, h, D, with_drive=bool(inputs))
                V = E @ V @ E.T + Q
                V = 0.5 * (V + V.T)
                if inputs:
                    u = _drive_vector(gen0, inputs, t_edge + t_mid)
                    m = E @ m + Psi @ u
                else:
                    m = E @ m
            ts.append(t_edge + b)
            means.append(m.copy())
            covs.append(V.copy())
        t_edge += seg.duration

    t = np.array(ts)
    controls = schedule.values(np.minimum(t, schedule.duration))
    return StateTrajectory(tuple(gen0.modes), t, np.array(means),
                           np.array(covs), controls)


def evolve_generator(gen, duration, state, *, points=201, inputs=None,
                     t_start=0.0):
    """Propagate under a constant generator (covariances and means).

    The step matrices are computed once, so cost is linear in the record
    grid with no accuracy penalty for fine sampling.
    """
    if tuple(state.modes) != tuple(gen.modes):
        raise PhysicsError(
            f"state modes {state.modes} do not match generator modes {gen.modes}")
    t = np.linspace(0.0, float(duration), int(points))
    h = t[1] - t[0]
    E, Q, Psi = _step_matrices(gen.drift, h, gen.diffusion,
                               with_drive=bool(inputs))
    m = state.mean.copy()
    V = state.cov.copy()
    means = [m.copy()]
    covs = [V.copy()]
    for k in range(t.size - 1):
        if inputs:
            u = _drive_vector(gen, inputs, t_start + t[k] + 0.5 * h)
            m = E @ m + Psi @ u
        else:
            m = E @ m
        V = E @ V @ E.T + Q
        V = 0.5 * (V + V.T)
        means.append(m.copy())
        covs.append(V.copy())
    controls = np.zeros((4, t.size))
    return StateTrajectory(tuple(gen.modes), t + t_start, np.array(means),
                           np.array(covs), controls)


def evolve_mean(model, duration, inputs, *, dt, t_start=0.0, builder=None,
                m0=None):
    """Mean-field response to external pulses under constant couplings.

    Uses the model's own couplings/detunings.  Returns a
    :class:`MeanTrajectory` including the output fields
    ``a_out = a_in - sqrt(kappa_ext) <a>`` on both cavity ports.
    """
    builder = builder or transducer_generator
    gen = builder(model, model.g1, model.g2, model.delta1, model.delta2)
    n_steps = int(math.ceil(float(duration) / dt))
    t = t_start + dt * np.arange(n_steps + 1)
    E, _, Psi = _step_matrices(gen.drift, dt, None, with_drive=True)
    m = np.zeros(2 * gen.n_modes) if m0 is None else np.asarray(m0, float).copy()
    quad = np.empty((t.size, 2 * gen.n_modes))
    quad[0] = m
    for k in range(n_steps):
        u = _drive_vector(gen, inputs, t[k] + 0.5 * dt)
        m = E @ m + Psi @ u
        quad[k + 1] = m
    amps = (quad[:, 0::2] + 1j * quad[:, 1::2]) / math.sqrt(2.0)
    input_fields = {}
    output_fields = {}
    for k, label in enumerate(gen.modes):
        w = gen.drive_weights[k]
        if w == 0.0:
            continue
        f_in = (np.asarray(inputs[label](t), dtype=complex)
                if label in inputs else np.zeros(t.size, dtype=complex))
        input_fields[label] = f_in
        output_fields[label] = f_in - w * amps[:, k]
    return MeanTrajectory(tuple(gen.modes), t, amps, input_fields,
                          output_fields)


# -- eigendecomposition propagator ------------------------------------------------

class Propagator:
    """Eigendecomposition cache for a constant coupling matrix ``M``.

    The amplitude transfer over ``dt`` is ``U exp(-i Lambda dt) U^{-1}``
    with ``M = U Lambda U^{-1}``; it reproduces the direct matrix
    exponential to machine precision and makes dense time sampling cheap.
    """

    def __init__(self, M):
        self.M = np.asarray(M, dtype=complex)
        self.eigenvalues, self.eigenvectors = np.linalg.eig(self.M)
        self.inverse_vectors = np.linalg.inv(self.eigenvectors)

    def step(self, dt):
        phases = np.exp(-1j * self.eigenvalues * dt)
        return (self.eigenvectors * phases) @ self.inverse_vectors


def _schedule_snapshots(schedule):
    """(duration, M-arguments) pairs fine enough for frozen coefficients."""
    for seg in schedule.segments:
        if seg.is_constant:
            g1, g2, d1, d2 = (float(v) for v in seg.values(0.0))
            yield seg.duration, (g1, g2, d1, d2)
            continue
        scale = _segment_scale(seg)
        probes = np.linspace(0.0, seg.duration, 9)
        vals = np.stack(seg.values(probes))
        variation = float(np.max(vals.max(axis=1) - vals.min(axis=1)))
        n_sub = max(1, int(math.ceil(variation / (VARIATION_RTOL * scale))))
        h = seg.duration / n_sub
        for j in range(n_sub):
            g1, g2, d1, d2 = (float(v) for v in seg.values((j + 0.5) * h))
            yield h, (g1, g2, d1, d2)


def schedule_transfer(model, schedule, *, lossless=False):
    """Total amplitude transfer matrix of a schedule (homogeneous part).

    Only defined for beam-splitter (red-sideband) chains, where the
    complex amplitudes close on themselves.  With ``lossless=True`` the
    same schedule is evaluated at zero damping, which isolates the
    deterministic phases a protocol imprints.
    """
    if model.drive1.sideband == "blue" or model.drive2.sideband == "blue":
        raise PhysicsError("amplitude transfer matrix requires red-sideband "
                           "pumps on both cavities")
    kappa1 = 0.0 if lossless else model.kappa1
    kappa2 = 0.0 if lossless else model.kappa2
    gamma_m = 0.0 if lossless else model.gamma_m
    total = np.eye(3, dtype=complex)
    for h, (g1, g2, d1, d2) in _schedule_snapshots(schedule):
        M = coupling_matrix(g1, g2, d1, d2, kappa1, gamma_m, kappa2)
        total = Propagator(M).step(h) @ total
    return total


def constant_schedule(model, duration):
    """Single constant segment holding the model's couplings/detunings."""
    return CouplingSchedule([
        Segment(duration, g1=model.g1, g2=model.g2,
                delta1=model.delta1, delta2=model.delta2)])


# -- steady state ------------------------------------------------------------------

def steady_state(gen):
    """Zero-mean steady state of a stable constant generator.

    Solves ``A V + V A^T + D = 0`` directly.  Raises
    :class:`StabilityError` when the drift is not strictly stable.
    """
    A = gen.drift
    margin = float(np.linalg.eigvals(A).real.max())
    if margin >= STABILITY_MARGIN:
        raise StabilityError(
            f"drift is not strictly stable: max Re eigenvalue = {margin:.6e}")
    V = solve_continuous_lyapunov(A, -gen.diffusion)
    V = 0.5 * (V + V.T)
    return GaussianState(gen.modes, np.zeros(2 * gen.n_modes), V)


# -- adiabatic elimination of the cavity --------------------------------------------

@dataclass
class ReducedMechanicalModel:
    """Mechanics after adiabatic elimination of a far-faster cavity.

    The cavity imprints an extra relaxation channel of rate
    ``Gamma = 4 g^2 / kappa`` fed by the cavity bath; the reduced Langevin
    drift is ``-(Gamma + gamma_m)/2`` with input mixing ``i sqrt(Gamma)``
    on the cavity noise and ``sqrt(gamma_m)`` on the mechanical bath.
    """

    Gamma: float
    gamma_m: float
    n_cavity: float
    n_mech: float

    @property
    def total_rate(self):
        return self.Gamma + self.gamma_m

    @property
    def steady_occupation(self):
        return ((self.Gamma * self.n_cavity + self.gamma_m * self.n_mech)
                / self.total_rate)

    def occupation(self, t, n0):
        """Closed-form occupation relaxation from ``n0``."""
        t = np.asarray(t, dtype=float)
        n_inf = self.steady_occupation
        return n_inf + (n0 - n_inf) * np.exp(-self.total_rate * t)

    def generator(self):
        """Single-mode :class:`DriftDiffusion` for the reduced dynamics."""
        S = np.array([[-0.5 * self.total_rate]], dtype=complex)
        P = np.zeros((1, 1), dtype=complex)
        diff = (self.Gamma * (self.n_cavity + 0.5)
                + self.gamma_m * (self.n_mech + 0.5)) * np.eye(2)
        return DriftDiffusion(("mechanics",), S, P, diff, np.zeros(1))


def adiabatic_eliminate(model):
    """Reduced mechanical model for a red-pumped, overdamped cavity 1.

    Valid for ``g1 << kappa1``; a warning is emitted outside that regime.
    """
    if model.g1 > 0.1 * model.kappa1:
        warnings.warn(
            f"adiabatic elimination assumes g << kappa; g1/kappa1 = "
            f"{model.g1 / model.kappa1:.3f}", stacklevel=2)
    return ReducedMechanicalModel(
        Gamma=4.0 * model.g1**2 / model.kappa1,
        gamma_m=model.gamma_m,
        n_cavity=model.cavity1.n_th,
        n_mech=model.mechanics.n_th)
