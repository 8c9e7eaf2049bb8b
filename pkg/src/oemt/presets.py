"""Built-in transducer parameter sets.

Two kinds of entries live here:

* ``dimensionless-*`` presets pin the exact rate combinations used by the
  bundled reproduction configs (all rates in units of the mechanical
  frequency, cavities referenced to their rotating frames).
* The SI presets describe representative laboratory platforms.  Fields
  that are commonly quoted for the platform (mechanical frequency,
  linewidths, single-photon coupling, bath occupations) carry those
  quoted values; the remaining fields are filled with plausible defaults
  so that every preset validates as a complete model.
"""

from __future__ import annotations

import math

from .errors import PresetError
from .model import DriveSpec, LinearizationSpec, ModeSpec, TransducerModel

__all__ = ["load_preset", "preset_names", "PRESETS"]

_TWO_PI = 2.0 * math.pi


def _jila_microwave():
    """Microwave electromechanical platform: a 10 MHz drum coupled to a
    7.5 GHz cavity with a 170 kHz linewidth and a 400 Hz single-photon
    rate.  Both ports are modeled with identical cavity parameters; the
    drive photon number is set for weak coupling (g ~ kappa/4)."""
    omega_m = _TWO_PI * 10e6
    kappa = _TWO_PI * 170e3
    cav = lambda label: ModeSpec.cavity(label, _TWO_PI * 7.5e9, kappa,
                                        extraction=0.9)
    lin = LinearizationSpec(_TWO_PI * 400.0, 1.0e4)
    return TransducerModel(
        cavity1=cav("cavity1"),
        mechanics=ModeSpec.mechanical("mechanics", omega_m, _TWO_PI * 10.0,
                                      n_th=50.0),
        cavity2=cav("cavity2"),
        coupling1=lin, coupling2=lin,
        drive1=DriveSpec("red", 0.0), drive2=DriveSpec("red", 0.0),
        units="si", name="jila-microwave")


def _membrane_bidirectional():
    """Room-scale membrane converter between a 7 GHz circuit and a 282 THz
    optical cavity via a 560 kHz drum, operated at 4 K.  Cavity linewidths
    are chosen so each arm's sideband gain is exactly sqrt(1.4)."""
    omega_m = _TWO_PI * 560e3
    kappa = omega_m * math.sqrt(math.sqrt(1.4) - 1.0)
    lin = LinearizationSpec(_TWO_PI * 10.0, 1.0e6)
    return TransducerModel(
        cavity1=ModeSpec.cavity("cavity1", _TWO_PI * 7e9, kappa, extraction=0.8),
        mechanics=ModeSpec.mechanical("mechanics", omega_m, _TWO_PI * 0.5,
                                      n_th=1.5e5),
        cavity2=ModeSpec.cavity("cavity2", _TWO_PI * 282e12, kappa,
                                extraction=0.8),
        coupling1=lin, coupling2=lin,
        drive1=DriveSpec("red", 0.0), drive2=DriveSpec("red", 0.0),
        units="si", name="membrane-bidirectional")


def _piezo_crystal():
    """Piezo-optomechanical crystal: a 4 GHz bulk mode read out by a
    196 THz optical cavity of 2.5 GHz linewidth, with the electrical feed
    represented as a narrow port; room-temperature mechanical bath
    (n_th ~ 1500)."""
    omega_m = _TWO_PI * 4e9
    return TransducerModel(
        cavity1=ModeSpec.cavity("cavity1", _TWO_PI * 8e9, _TWO_PI * 2e6,
                                extraction=0.95),
        mechanics=ModeSpec.mechanical("mechanics", omega_m, _TWO_PI * 40e3,
                                      n_th=1500.0),
        cavity2=ModeSpec.cavity("cavity2", _TWO_PI * 196e12, _TWO_PI * 2.5e9,
                                extraction=0.7),
        coupling1=LinearizationSpec.from_g(_TWO_PI * 0.2e6),
        coupling2=LinearizationSpec.from_g(_TWO_PI * 1e6),
        drive1=DriveSpec("red", 0.0), drive2=DriveSpec("red", 0.0),
        units="si", name="piezo-crystal")


def _rf_membrane():
    """Room-temperature rf-to-light converter: a 0.72 MHz drum inside a
    resonant circuit of 5.5 kHz bandwidth, optically read out without a
    sideband-resolving cavity."""
    omega_m = _TWO_PI * 0.72e6
    return TransducerModel(
        cavity1=ModeSpec.cavity("cavity1", _TWO_PI * 0.72e6, _TWO_PI * 5.5e3,
                                extraction=0.85),
        mechanics=ModeSpec.mechanical("mechanics", omega_m, _TWO_PI * 0.5,
                                      n_th=8.7e6),
        cavity2=ModeSpec.cavity("cavity2", _TWO_PI * 282e12, _TWO_PI * 1e6,
                                extraction=0.9),
        coupling1=LinearizationSpec.from_g(_TWO_PI * 40e3),
        coupling2=LinearizationSpec.from_g(_TWO_PI * 1e3),
        drive1=DriveSpec("red", 0.0), drive2=DriveSpec("red", 0.0),
        units="si", name="rf-membrane")


def _dimensionless_fig3():
    """State-transfer working point: strong coupling g1/kappa = 10 with
    g1 = 0.1, g2 = 0.07, kappa = 0.01 and gamma_m = 1e-5 (units of the
    mechanical frequency); lossless extraction on both cavities."""
    return TransducerModel(
        cavity1=ModeSpec.cavity("cavity1", 0.0, 0.01, extraction=1.0),
        mechanics=ModeSpec.mechanical("mechanics", 1.0, 1e-5, n_th=0.0),
        cavity2=ModeSpec.cavity("cavity2", 0.0, 0.01, extraction=1.0),
        coupling1=LinearizationSpec.from_g(0.1),
        coupling2=LinearizationSpec.from_g(0.07),
        drive1=DriveSpec("red", 0.0), drive2=DriveSpec("red", 0.0),
        units="dimensionless", name="dimensionless-fig3")


def _dimensionless_fig4():
    """Itinerant-conversion working point: g1 = 0.8, g2 = 0.6 with
    kappa1 = 3.2, kappa2 = 1.8 and gamma_m = 1e-3, impedance matched
    (Gamma1 = Gamma2 = 0.8); no intrinsic cavity loss."""
    return TransducerModel(
        cavity1=ModeSpec.cavity("cavity1", 0.0, 3.2, extraction=1.0),
        mechanics=ModeSpec.mechanical("mechanics", 1.0, 1e-3, n_th=0.0),
        cavity2=ModeSpec.cavity("cavity2", 0.0, 1.8, extraction=1.0),
        coupling1=LinearizationSpec.from_g(0.8),
        coupling2=LinearizationSpec.from_g(0.6),
        drive1=DriveSpec("red", 0.0), drive2=DriveSpec("red", 0.0),
        units="dimensionless", name="dimensionless-fig4")


PRESETS = {
    "jila-microwave": _jila_microwave,
    "membrane-bidirectional": _membrane_bidirectional,
    "piezo-crystal": _piezo_crystal,
    "rf-membrane": _rf_membrane,
    "dimensionless-fig3": _dimensionless_fig3,
    "dimensionless-fig4": _dimensionless_fig4,
}


def preset_names():
    """Catalog names in stable (declaration) order."""
    return list(PRESETS)


def load_preset(name):
    """Instantiate a preset by name.

    Raises
    ------
    PresetError
        If the name is unknown; the message lists the full catalog.
    """
    try:
        builder = PRESETS[name]
    except KeyError:
        raise PresetError(
            f"unknown preset {name!r}; available presets: "
            + ", ".join(preset_names())) from None
    return builder()
