"""Parameter model for a three-mode electro-optomechanical transducer.

The device consists of an input-side cavity, a mechanical oscillator and
an output-side cavity.  Each cavity couples to the mechanical mode through
a drive-enhanced (linearized) radiation-pressure interaction of strength
``g = G * sqrt(n_ph)``, where ``G`` is the single-photon coupling rate and
``n_ph`` the mean intra-cavity photon number of the drive.

Conventions used throughout the package:

* ``hbar = 1``; every frequency and rate is angular.
* A model is tagged ``"si"`` (rad/s) or ``"dimensionless"`` (all rates in
  units of a reference frequency, conventionally the mechanical one).
* Each dissipative port splits its total linewidth into an external
  (measured/driven) part and an intrinsic part, ``kappa_ext + kappa_in ==
  damping``; the extraction ratio is ``nu = kappa_ext / damping``.
* Drive placement is tracked in the interaction picture: ``delta`` is the
  residual two-photon detuning after sitting on the chosen mechanical
  sideband (``delta = Delta + omega_m`` on the red side, ``delta = Delta -
  omega_m`` on the blue side, with ``Delta = omega_d - omega_c``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError, ModelValidationError

__all__ = [
    "ModeSpec",
    "LinearizationSpec",
    "DriveSpec",
    "TransducerModel",
    "ValidationReport",
    "validate_model",
]

#: Fractional tolerance used when checking exact rate bookkeeping.
_SUM_RULE_RTOL = 1e-12

_SIDEBANDS = ("red", "blue", "off_resonant")
_UNIT_TAGS = ("si", "dimensionless")


@dataclass(frozen=True)
class ModeSpec:
    """One harmonic mode and its dissipative environment.

    Parameters
    ----------
    label : str
        Human-readable mode name, e.g. ``"cavity1"``.
    omega : float
        Mode resonance frequency (angular).
    damping : float
        Total energy damping rate (``kappa_i`` for a cavity, ``gamma_m``
        for the mechanical mode).
    kappa_ext : float
        Externally coupled share of ``damping``.
    kappa_in : float
        Intrinsic share of ``damping``.  ``kappa_ext + kappa_in`` must
        equal ``damping``.
    n_th : float
        Thermal occupation of the bath attached to this mode.
    """

    label: str
    omega: float
    damping: float
    kappa_ext: float
    kappa_in: float
    n_th: float = 0.0

    @classmethod
    def cavity(cls, label, omega, damping, extraction=1.0, n_th=0.0):
        """Build a cavity mode from its total linewidth and extraction ratio."""
        kappa_ext = damping * extraction
        return cls(label, omega, damping, kappa_ext, damping - kappa_ext, n_th)

    @classmethod
    def mechanical(cls, label, omega, damping, n_th=0.0):
        """Build a mechanical mode; its entire linewidth is intrinsic."""
        return cls(label, omega, damping, 0.0, damping, n_th)

    @property
    def extraction_ratio(self):
        """``nu = kappa_ext / damping`` (0 for a lossless mode)."""
        if self.damping == 0.0:
            return 0.0
        return self.kappa_ext / self.damping


@dataclass(frozen=True)
class LinearizationSpec:
    """Drive-enhanced coupling ``g = single_photon_rate * sqrt(photon_number)``."""

    single_photon_rate: float
    photon_number: float

    @classmethod
    def from_g(cls, g):
        """Spec with the enhanced rate given directly (unit photon number)."""
        return cls(float(g), 1.0)

    @property
    def g(self):
        """Enhanced coupling rate; stored as a non-negative real number
        (any drive phase is absorbed into the mode definitions)."""
        return self.single_photon_rate * math.sqrt(self.photon_number)


@dataclass(frozen=True)
class DriveSpec:
    """Placement of one pump tone relative to the mechanical sidebands.

    ``delta`` is the residual interaction-picture detuning: zero means the
    drive sits exactly on the chosen sideband.  ``off_resonant`` marks a
    deliberately large offset on the red side (two-photon Raman regime).
    """

    sideband: str = "red"
    delta: float = 0.0

    def detuning(self, omega_m):
        """Pump detuning ``Delta = omega_d - omega_c`` implied by this placement."""
        if self.sideband == "blue":
            return self.delta + omega_m
        # red and off_resonant both live on the red branch
        return self.delta - omega_m

    def drive_frequency(self, omega_c, omega_m):
        """Absolute pump frequency for bookkeeping and export."""
        return omega_c + self.detuning(omega_m)


@dataclass(frozen=True)
class TransducerModel:
    """Full parameter set: three modes plus one coupling chain per cavity."""

    cavity1: ModeSpec
    mechanics: ModeSpec
    cavity2: ModeSpec
    coupling1: LinearizationSpec
    coupling2: LinearizationSpec
    drive1: DriveSpec = field(default_factory=DriveSpec)
    drive2: DriveSpec = field(default_factory=DriveSpec)
    units: str = "dimensionless"
    name: str = ""

    # -- convenient scalar accessors -------------------------------------
    @property
    def g1(self):
        return self.coupling1.g

    @property
    def g2(self):
        return self.coupling2.g

    @property
    def kappa1(self):
        return self.cavity1.damping

    @property
    def kappa2(self):
        return self.cavity2.damping

    @property
    def gamma_m(self):
        return self.mechanics.damping

    @property
    def omega_m(self):
        return self.mechanics.omega

    @property
    def delta1(self):
        return self.drive1.delta

    @property
    def delta2(self):
        return self.drive2.delta

    @property
    def nu1(self):
        return self.cavity1.extraction_ratio

    @property
    def nu2(self):
        return self.cavity2.extraction_ratio

    @property
    def Gamma1(self):
        """Cavity-1 induced mechanical relaxation rate (adiabatic limit)."""
        return 4.0 * self.g1**2 / self.kappa1

    @property
    def Gamma2(self):
        """Cavity-2 induced mechanical relaxation rate (adiabatic limit)."""
        return 4.0 * self.g2**2 / self.kappa2

    @property
    def n_th_m(self):
        return self.mechanics.n_th

    def mode_labels(self):
        return (self.cavity1.label, self.mechanics.label, self.cavity2.label)

    # -- derived edits ----------------------------------------------------
    def with_params(self, **params):
        """Return a copy with named scalar parameters replaced.

        Supported names: ``g1, g2, kappa1, kappa2, kappa1_ext, kappa2_ext,
        gamma_m, n_th_m, n_th_c1, n_th_c2, delta1, delta2``.  Setting a
        total linewidth ``kappa_i`` rescales its external/intrinsic split
        proportionally; setting ``kappa_i_ext`` keeps the total fixed.
        """
        model = self
        for name, value in params.items():
            value = float(value)
            if name == "g1":
                model = replace(model, coupling1=LinearizationSpec.from_g(value))
            elif name == "g2":
                model = replace(model, coupling2=LinearizationSpec.from_g(value))
            elif name in ("kappa1", "kappa2"):
                attr = "cavity1" if name == "kappa1" else "cavity2"
                mode = getattr(model, attr)
                nu = mode.extraction_ratio if mode.damping > 0 else 1.0
                new = replace(mode, damping=value, kappa_ext=nu * value,
                              kappa_in=(1.0 - nu) * value)
                model = replace(model, **{attr: new})
            elif name in ("kappa1_ext", "kappa2_ext"):
                attr = "cavity1" if name == "kappa1_ext" else "cavity2"
                mode = getattr(model, attr)
                new = replace(mode, kappa_ext=value, kappa_in=mode.damping - value)
                model = replace(model, **{attr: new})
            elif name == "gamma_m":
                mode = model.mechanics
                model = replace(model, mechanics=replace(
                    mode, damping=value, kappa_in=value - mode.kappa_ext))
            elif name == "n_th_m":
                model = replace(model, mechanics=replace(model.mechanics, n_th=value))
            elif name == "n_th_c1":
                model = replace(model, cavity1=replace(model.cavity1, n_th=value))
            elif name == "n_th_c2":
                model = replace(model, cavity2=replace(model.cavity2, n_th=value))
            elif name == "delta1":
                model = replace(model, drive1=replace(model.drive1, delta=value))
            elif name == "delta2":
                model = replace(model, drive2=replace(model.drive2, delta=value))
            else:
                raise ConfigError(
                    f"unknown model parameter {name!r}; valid names: g1, g2, "
                    "kappa1, kappa2, kappa1_ext, kappa2_ext, gamma_m, n_th_m, "
                    "n_th_c1, n_th_c2, delta1, delta2")
        return model

    # -- serialization ----------------------------------------------------
    def to_dict(self):
        def mode_dict(m):
            return {"omega": m.omega, "damping": m.damping,
                    "kappa_ext": m.kappa_ext, "kappa_in": m.kappa_in,
                    "n_th": m.n_th}

        def chain_dict(c, d):
            return {"single_photon_rate": c.single_photon_rate,
                    "photon_number": c.photon_number,
                    "sideband": d.sideband, "delta": d.delta}

        return {
            "units": self.units,
            "name": self.name,
            "modes": {
                "cavity1": mode_dict(self.cavity1),
                "mechanics": mode_dict(self.mechanics),
                "cavity2": mode_dict(self.cavity2),
            },
            "couplings": {
                "cavity1": chain_dict(self.coupling1, self.drive1),
                "cavity2": chain_dict(self.coupling2, self.drive2),
            },
        }

    @classmethod
    def from_dict(cls, data):
        try:
            units = data.get("units", "dimensionless")
            modes = data["modes"]
            chains = data["couplings"]

            def mode(label):
                m = modes[label]
                if "kappa_ext" in m or "kappa_in" in m:
                    ext = float(m.get("kappa_ext", 0.0))
                    damping = float(m["damping"])
                    kin = float(m.get("kappa_in", damping - ext))
                else:
                    ext, kin = 0.0, float(m["damping"])
                return ModeSpec(label, float(m["omega"]), float(m["damping"]),
                                ext, kin, float(m.get("n_th", 0.0)))

            def chain(label):
                c = chains[label]
                if "g" in c:
                    lin = LinearizationSpec.from_g(float(c["g"]))
                else:
                    lin = LinearizationSpec(float(c["single_photon_rate"]),
                                            float(c["photon_number"]))
                drv = DriveSpec(c.get("sideband", "red"), float(c.get("delta", 0.0)))
                return lin, drv

            lin1, drv1 = chain("cavity1")
            lin2, drv2 = chain("cavity2")
            return cls(mode("cavity1"), mode("mechanics"), mode("cavity2"),
                       lin1, lin2, drv1, drv2, units=units,
                       name=str(data.get("name", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed model description: {exc!r}") from exc


@dataclass
class ValidationReport:
    """Outcome of :func:`validate_model` with derived quantities attached."""

    ok: bool
    violations: list
    derived: dict

    def to_dict(self):
        return {"ok": self.ok, "violations": list(self.violations),
                "derived": dict(self.derived)}


def _check_mode(mode, violations):
    if mode.omega <= 0.0 and mode.label == "mechanics":
        violations.append(f"{mode.label}: omega must be positive, got {mode.omega}")
    if mode.omega < 0.0:
        violations.append(f"{mode.label}: omega must be non-negative, got {mode.omega}")
    for name in ("damping", "kappa_ext", "kappa_in", "n_th"):
        value = getattr(mode, name)
        if value < 0.0:
            violations.append(f"{mode.label}: {name} must be non-negative, got {value}")
    total = mode.kappa_ext + mode.kappa_in
    tol = _SUM_RULE_RTOL * max(1.0, abs(mode.damping))
    if abs(total - mode.damping) > tol:
        violations.append(
            f"{mode.label}: kappa_ext + kappa_in = {total!r} does not equal "
            f"damping = {mode.damping!r}")
    if mode.kappa_ext > mode.damping + tol:
        violations.append(
            f"{mode.label}: kappa_ext = {mode.kappa_ext!r} exceeds total "
            f"damping = {mode.damping!r}")


def validate_model(model, raise_on_error=False):
    """Check every declared invariant and compute the derived-rate report.

    Parameters
    ----------
    model : TransducerModel
    raise_on_error : bool
        If true, raise :class:`ModelValidationError` listing the violations
        instead of returning a failing report.

    Returns
    -------
    ValidationReport
        ``ok`` flag, the list of violations, and derived quantities
        (enhanced couplings, induced rates, extraction ratios,
        cooperativities, sideband-resolution flags).
    """
    violations = []
    if model.units not in _UNIT_TAGS:
        violations.append(f"units must be one of {_UNIT_TAGS}, got {model.units!r}")
    for mode in (model.cavity1, model.mechanics, model.cavity2):
        _check_mode(mode, violations)
    if model.mechanics.kappa_ext != 0.0:
        violations.append(
            "mechanics: kappa_ext must be 0 (mechanical port is bath-only), "
            f"got {model.mechanics.kappa_ext!r}")
    for idx, (lin, drv) in enumerate(
            ((model.coupling1, model.drive1), (model.coupling2, model.drive2)), 1):
        if lin.single_photon_rate < 0.0:
            violations.append(f"coupling{idx}: single_photon_rate must be >= 0")
        if lin.photon_number < 0.0:
            violations.append(f"coupling{idx}: photon_number must be >= 0")
        if drv.sideband not in _SIDEBANDS:
            violations.append(
                f"drive{idx}: sideband must be one of {_SIDEBANDS}, got "
                f"{drv.sideband!r}")

    derived = {}
    if not violations:
        g1, g2 = model.g1, model.g2
        kappa1, kappa2, gamma_m = model.kappa1, model.kappa2, model.gamma_m
        # Independent recomputation of the induced rates; must agree
        # bit-for-bit with the model properties.
        derived["g1"] = g1
        derived["g2"] = g2
        derived["Gamma1"] = 4.0 * g1**2 / kappa1 if kappa1 > 0 else math.inf
        derived["Gamma2"] = 4.0 * g2**2 / kappa2 if kappa2 > 0 else math.inf
        derived["nu1"] = model.nu1
        derived["nu2"] = model.nu2
        if gamma_m > 0:
            derived["cooperativity1"] = derived["Gamma1"] / gamma_m
            derived["cooperativity2"] = derived["Gamma2"] / gamma_m
        else:
            derived["cooperativity1"] = math.inf
            derived["cooperativity2"] = math.inf
        omega_m = model.omega_m
        derived["resolved_sideband_1"] = bool(omega_m > kappa1)
        derived["resolved_sideband_2"] = bool(omega_m > kappa2)
        derived["resolved_sideband"] = bool(omega_m > kappa1 and omega_m > kappa2)
        total = derived["Gamma1"] + derived["Gamma2"]
        derived["impedance_residual"] = (
            abs(derived["Gamma1"] - derived["Gamma2"]) / total if total > 0 else 0.0)

    report = ValidationReport(ok=not violations, violations=violations,
                              derived=derived)
    if raise_on_error and violations:
        raise ModelValidationError("; ".join(violations))
    return report
