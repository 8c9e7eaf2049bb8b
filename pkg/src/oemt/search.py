"""Parameter searches: impedance matching and derivative-free optimization.

The optimizer is a self-contained Nelder-Mead simplex working in
normalized box coordinates.  It is fully deterministic given the problem
and seed: fixed initial-simplex construction, stable ordering with
lexicographic tie-breaking on the parameter vector, and multi-start
points drawn from one seeded generator.  Objectives route through
``TransducerModel.with_params``, so every candidate is a validated model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, OEMTError, SearchError
from .gaussian import coherent_state, displaced_squeezed_state
from .metrics import gaussian_fidelity  # noqa: F401  (re-export convenience)
from .scattering import conversion_matrix
from .schedule import gaussian_pulse
from . import protocols

__all__ = [
    "SearchProblem",
    "SearchResult",
    "optimize",
    "match_impedance",
    "make_objective",
    "OBJECTIVES",
]

#: Penalty assigned to candidates whose evaluation raises a physics or
#: numerical error; the simplex contracts away from such regions.
_PENALTY = math.inf


# -- objectives -----------------------------------------------------------------

def _peak_conversion(model, *, omega=0.0):
    """Measured photon-number conversion amplitude at one frequency."""
    cm = conversion_matrix(model, float(omega))
    return float(abs(cm.signal_amplitude[0]))


def _impedance_residual(model):
    total = model.Gamma1 + model.Gamma2
    if total == 0.0:
        return 1.0
    return abs(model.Gamma1 - model.Gamma2) / total


def _protocol_fidelity(model, *, protocol="double_swap", alpha=1.0,
                       squeeze=0.0, duration=None, ramp="raised_cosine",
                       delay=0.0, delta_offset=None):
    if squeeze:
        signal = displaced_squeezed_state("signal", alpha, squeeze)
    else:
        signal = coherent_state("signal", alpha)
    if protocol == "double_swap":
        result = protocols.run_double_swap(model, signal)
    elif protocol == "precooled_double_swap":
        result = protocols.run_precooled_double_swap(model, signal, delay=delay)
    elif protocol == "adiabatic_dark_mode":
        if duration is None:
            raise ConfigError("protocol_fidelity objective for the adiabatic "
                              "passage needs a duration")
        result = protocols.run_adiabatic_dark_mode(model, signal, duration,
                                                   ramp=ramp)
    elif protocol == "raman":
        result = protocols.run_raman(model, signal, delta_offset=delta_offset)
    else:
        raise ConfigError(f"no fidelity objective for protocol {protocol!r}")
    return float(result.fidelity)


def _itinerant_efficiency(model, *, sigma=None, amplitude=1.0, window=None,
                          dt=None):
    if sigma is None:
        # quasi-static default: pulse much narrower than the conversion band
        sigma = 0.25 * (model.Gamma1 + model.Gamma2 + model.gamma_m)
    if window is None:
        settle = 10.0 / (model.Gamma1 + model.Gamma2 + model.gamma_m)
        window = (-6.0 / sigma, 6.0 / sigma + settle)
    pulse = gaussian_pulse(amplitude, sigma)
    result = protocols.run_itinerant(model, pulse, window=window, dt=dt)
    return float(result.metrics["eta_time"])


#: name -> (evaluator, maximize?)
OBJECTIVES = {
    "peak_conversion": (_peak_conversion, True),
    "itinerant_efficiency": (_itinerant_efficiency, True),
    "protocol_fidelity": (_protocol_fidelity, True),
    "impedance_residual": (_impedance_residual, False),
}


def make_objective(name, **options):
    """Resolve an objective name to ``(callable(model) -> float, maximize)``."""
    try:
        func, maximize = OBJECTIVES[name]
    except KeyError:
        raise ConfigError(f"unknown objective {name!r}; choose from "
                          f"{sorted(OBJECTIVES)}") from None
    if options:
        return (lambda model: func(model, **options)), maximize
    return func, maximize


# -- problem / result -----------------------------------------------------------

@dataclass
class SearchProblem:
    """Box-bounded search over named model parameters.

    ``objective`` is either a registry name or a callable taking the
    candidate model; ``parameters`` maps ``with_params`` names to
    ``(low, high)`` bounds in declaration order.
    """

    model: object
    objective: object
    parameters: dict
    maximize: bool = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.objective, str):
            func, default_max = make_objective(self.objective, **self.options)
            self._func = func
            if self.maximize is None:
                self.maximize = default_max
        else:
            self._func = self.objective
            if self.maximize is None:
                self.maximize = True
        self.names = list(self.parameters)
        lows, highs = [], []
        for name in self.names:
            lo, hi = self.parameters[name]
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(f"parameter {name!r} needs finite bounds "
                                  f"with low < high, got ({lo}, {hi})")
            lows.append(lo)
            highs.append(hi)
        self.lows = np.array(lows)
        self.highs = np.array(highs)
        if self.names:
            # fail fast on unknown parameter names
            self.model.with_params(**dict(zip(self.names,
                                              0.5 * (self.lows + self.highs))))

    def denormalize(self, x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return dict(zip(self.names, self.lows + x * (self.highs - self.lows)))

    def evaluate(self, x):
        """Objective at normalized coordinates; +inf-penalized on failure."""
        params = self.denormalize(x)
        try:
            value = float(self._func(self.model.with_params(**params)))
        except OEMTError:
            return _PENALTY, params, math.nan
        if math.isnan(value):
            return _PENALTY, params, math.nan
        cost = -value if self.maximize else value
        return cost, params, value


@dataclass
class SearchResult:
    best_params: dict
    best_value: float
    n_evaluations: int
    converged: bool
    trace: list              # (index, params dict, objective value) tuples
    start_values: list


def _ordered(simplex, costs):
    """Sort by cost with lexicographic parameter tie-breaking."""
    keys = [tuple([costs[i]] + list(simplex[i])) for i in range(len(costs))]
    order = sorted(range(len(costs)), key=lambda i: keys[i])
    return simplex[order], costs[order]


def _nelder_mead(eval_cost, x0, *, max_evals, xtol, ftol):
    """Minimal deterministic Nelder-Mead on the unit box."""
    d = x0.size
    step = 0.25
    points = [np.clip(x0, 0.0, 1.0)]
    for k in range(d):
        x = points[0].copy()
        x[k] = x[k] + step if x[k] + step <= 1.0 else x[k] - step
        points.append(x)
    simplex = np.array(points)
    costs = np.array([eval_cost(x) for x in simplex])
    evals = d + 1
    converged = False
    while evals < max_evals:
        simplex, costs = _ordered(simplex, costs)
        spread = float(np.max(np.abs(simplex[1:] - simplex[0])))
        fspread = costs[-1] - costs[0]
        if spread < xtol or (math.isfinite(fspread) and fspread < ftol):
            converged = True
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = np.clip(centroid + (centroid - simplex[-1]), 0.0, 1.0)
        fr = eval_cost(xr)
        evals += 1
        if fr < costs[0]:
            xe = np.clip(centroid + 2.0 * (centroid - simplex[-1]), 0.0, 1.0)
            fe = eval_cost(xe)
            evals += 1
            if fe < fr:
                simplex[-1], costs[-1] = xe, fe
            else:
                simplex[-1], costs[-1] = xr, fr
        elif fr < costs[-2]:
            simplex[-1], costs[-1] = xr, fr
        else:
            xc = np.clip(centroid + 0.5 * (simplex[-1] - centroid), 0.0, 1.0)
            fc = eval_cost(xc)
            evals += 1
            if fc < costs[-1]:
                simplex[-1], costs[-1] = xc, fc
            else:
                for i in range(1, d + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    costs[i] = eval_cost(simplex[i])
                    evals += 1
                    if evals >= max_evals:
                        break
    simplex, costs = _ordered(simplex, costs)
    return simplex[0], costs[0], evals, converged


def optimize(problem, *, n_starts=1, seed=0, max_evals=2000, xtol=1e-8,
             ftol=1e-12):
    """Run the simplex search, optionally from several seeded starts.

    The first start is always the box center; additional starts come from
    ``numpy.random.default_rng(seed)``.  The same problem and seed always
    produce the identical trace.
    """
    if not problem.names:
        cost, params, value = problem.evaluate(np.zeros(0))
        if not math.isfinite(cost):
            raise SearchError("objective evaluation failed at the baseline "
                              "model with no free parameters")
        return SearchResult({}, value, 1, True, [(0, params, value)], [value])

    d = len(problem.names)
    rng = np.random.default_rng(seed)
    starts = [np.full(d, 0.5)]
    for _ in range(int(n_starts) - 1):
        starts.append(rng.random(d))

    trace = []

    def eval_cost(x):
        cost, params, value = problem.evaluate(x)
        trace.append((len(trace), params, value))
        return cost

    first = problem.evaluate(starts[0])
    if not math.isfinite(first[0]):
        raise SearchError(
            f"objective evaluation failed at the start point {first[1]}")

    best = None
    start_values = []
    budget = max(int(max_evals) // len(starts), 2 * d + 2)
    all_converged = True
    for x0 in starts:
        x, cost, evals, converged = _nelder_mead(
            eval_cost, np.asarray(x0, dtype=float),
            max_evals=budget, xtol=xtol, ftol=ftol)
        all_converged = all_converged and converged
        _, params, value = problem.evaluate(x)
        start_values.append(value)
        key = (cost, tuple(x))
        if best is None or key < best[0]:
            best = (key, params, value)
    return SearchResult(best_params=best[1], best_value=best[2],
                        n_evaluations=len(trace), converged=all_converged,
                        trace=trace, start_values=start_values)


# -- impedance matching ----------------------------------------------------------

def _bisect(residual, lo, hi, *, iters=200):
    f_lo, f_hi = residual(lo), residual(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise SearchError(
            f"no sign change in [{lo:.6g}, {hi:.6g}]: residuals "
            f"({f_lo:.6g}, {f_hi:.6g})")
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = residual(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def match_impedance(model, adjust="g2", *, bounds=None, method="exact"):
    """Tune one parameter so the two conversion rates coincide.

    ``adjust`` picks the free parameter (``g1``, ``g2``, ``kappa1`` or
    ``kappa2``); ``method="exact"`` uses the closed form (e.g.
    ``g2 = sqrt(Gamma1 kappa2) / 2``), ``method="bisect"`` brackets the
    signed rate difference instead, which cross-checks the closed form.

    Returns ``(matched_model, report)`` where the report carries the
    adjusted value and before/after residuals.
    """
    before = _impedance_residual(model)

    def signed(value):
        m = model.with_params(**{adjust: value})
        return m.Gamma1 - m.Gamma2

    if adjust == "g2":
        if model.Gamma1 <= 0.0:
            raise SearchError("cannot match: Gamma1 = 0 with g2 free")
        target = 0.5 * math.sqrt(model.Gamma1 * model.kappa2)
    elif adjust == "g1":
        if model.Gamma2 <= 0.0:
            raise SearchError("cannot match: Gamma2 = 0 with g1 free")
        target = 0.5 * math.sqrt(model.Gamma2 * model.kappa1)
    elif adjust == "kappa2":
        if model.Gamma1 <= 0.0 or model.g2 <= 0.0:
            raise SearchError("cannot match: need Gamma1 > 0 and g2 > 0 "
                              "with kappa2 free")
        target = 4.0 * model.g2**2 / model.Gamma1
    elif adjust == "kappa1":
        if model.Gamma2 <= 0.0 or model.g1 <= 0.0:
            raise SearchError("cannot match: need Gamma2 > 0 and g1 > 0 "
                              "with kappa1 free")
        target = 4.0 * model.g1**2 / model.Gamma2
    else:
        raise ConfigError(f"cannot match impedance by adjusting {adjust!r}; "
                          "choose one of g1, g2, kappa1, kappa2")

    if bounds is not None:
        lo, hi = float(bounds[0]), float(bounds[1])
        if not lo <= target <= hi:
            raise SearchError(
                f"no matching point for {adjust} within [{lo:.6g}, {hi:.6g}]: "
                f"signed rate difference is {signed(lo):.6g} at the lower and "
                f"{signed(hi):.6g} at the upper bound")
    if method == "bisect":
        lo, hi = ((float(bounds[0]), float(bounds[1])) if bounds is not None
                  else (target / 8.0, target * 8.0))
        value = _bisect(signed, lo, hi)
    elif method == "exact":
        value = target
    else:
        raise ConfigError(f"unknown matching method {method!r}")

    matched = model.with_params(**{adjust: value})
    report = {
        "adjusted": adjust,
        "value": value,
        "method": method,
        "residual_before": before,
        "residual_after": _impedance_residual(matched),
    }
    return matched, report
