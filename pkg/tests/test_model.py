import math

import numpy as np
import pytest

from oemt import (ConfigError, DriveSpec, LinearizationSpec, ModeSpec,
                  PresetError, TransducerModel, load_preset, preset_names,
                  validate_model)
from helpers import make_model


def test_mode_spec_cavity_split():
    mode = ModeSpec.cavity("cavity1", 5.0, 2.0, extraction=0.75)
    assert mode.kappa_ext == pytest.approx(1.5)
    assert mode.kappa_in == pytest.approx(0.5)
    assert mode.extraction_ratio == pytest.approx(0.75)


def test_mechanical_mode_is_fully_intrinsic():
    mode = ModeSpec.mechanical("mechanics", 1.0, 1e-5, n_th=12.0)
    assert mode.kappa_ext == 0.0
    assert mode.kappa_in == pytest.approx(1e-5)
    assert mode.n_th == 12.0


def test_linearization_enhancement():
    lin = LinearizationSpec(2.0, 1e6)
    assert lin.g == pytest.approx(2000.0)
    assert LinearizationSpec.from_g(0.37).g == pytest.approx(0.37)


def test_drive_detuning_sidebands():
    assert DriveSpec("red", 0.0).detuning(3.0) == pytest.approx(-3.0)
    assert DriveSpec("blue", 0.0).detuning(3.0) == pytest.approx(3.0)
    assert DriveSpec("red", 0.2).detuning(3.0) == pytest.approx(-2.8)


def test_derived_rates():
    m = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    assert m.Gamma1 == pytest.approx(4 * 0.64 / 3.2)
    assert m.Gamma2 == pytest.approx(4 * 0.36 / 1.8)
    assert m.mode_labels() == ("cavity1", "mechanics", "cavity2")


def test_with_params_names_and_errors():
    m = make_model(0.1, 0.07, 0.01, 0.01, 1e-5)
    m2 = m.with_params(g1=0.2, kappa2=0.05, n_th_m=3.0, delta1=-0.4)
    assert m2.g1 == pytest.approx(0.2)
    assert m2.kappa2 == pytest.approx(0.05)
    assert m2.n_th_m == 3.0
    assert m2.delta1 == pytest.approx(-0.4)
    # total-linewidth edits preserve the extraction split
    assert m2.nu2 == pytest.approx(m.nu2)
    with pytest.raises(ConfigError):
        m.with_params(coupling_rate=1.0)


def test_with_params_external_split():
    m = make_model(0.1, 0.07, 2.0, 2.0, 1e-5, nu1=0.5)
    m2 = m.with_params(kappa1_ext=1.5)
    assert m2.kappa1 == pytest.approx(2.0)
    assert m2.nu1 == pytest.approx(0.75)


def test_serialization_roundtrip():
    m = make_model(0.8, 0.6, 3.2, 1.8, 1e-3, n_th=7.0, nu1=0.9, side2="blue",
                   delta2=0.3)
    again = TransducerModel.from_dict(m.to_dict())
    assert again.to_dict() == m.to_dict()
    assert again.g2 == pytest.approx(m.g2)
    assert again.drive2.sideband == "blue"


def test_from_dict_accepts_direct_g():
    data = make_model(0.1, 0.07, 0.01, 0.01, 1e-5).to_dict()
    data["couplings"]["cavity1"] = {"g": 0.25}
    m = TransducerModel.from_dict(data)
    assert m.g1 == pytest.approx(0.25)


def test_from_dict_malformed():
    with pytest.raises(ConfigError):
        TransducerModel.from_dict({"modes": {}})


def test_preset_catalog():
    names = preset_names()
    assert names == ["jila-microwave", "membrane-bidirectional",
                     "piezo-crystal", "rf-membrane", "dimensionless-fig3",
                     "dimensionless-fig4"]
    for name in names:
        model = load_preset(name)
        report = validate_model(model)
        assert report.ok, (name, report.violations)
    with pytest.raises(PresetError):
        load_preset("no-such-device")


def test_fig4_preset_is_impedance_matched():
    m = load_preset("dimensionless-fig4")
    assert m.Gamma1 == pytest.approx(m.Gamma2)
    assert (m.g1, m.g2, m.kappa1, m.kappa2) == (0.8, 0.6, 3.2, 1.8)
    assert m.gamma_m == 1e-3


def test_fig3_preset_rates():
    m = load_preset("dimensionless-fig3")
    assert (m.g1, m.g2) == (0.1, 0.07)
    assert m.kappa1 == m.kappa2 == 0.01
    assert m.gamma_m == 1e-5


def test_validation_report_derived():
    report = validate_model(load_preset("dimensionless-fig4"))
    d = report.derived
    assert d["Gamma1"] == pytest.approx(0.8)
    assert d["cooperativity1"] == pytest.approx(800.0)
    assert d["resolved_sideband"] is False  # kappa1 = 3.2 > omega_m = 1
    report2 = validate_model(load_preset("jila-microwave"))
    assert report2.derived["resolved_sideband"] is True


def test_validation_flags_negative_rate():
    bad = ModeSpec("cavity1", 0.0, -1.0, 0.0, -1.0, 0.0)
    m = make_model(0.1, 0.1, 1.0, 1.0, 1e-5)
    import dataclasses
    broken = dataclasses.replace(m, cavity1=bad)
    report = validate_model(broken)
    assert not report.ok
    assert any("damping" in v for v in report.violations)


def test_si_preset_membrane_gain():
    m = load_preset("membrane-bidirectional")
    # linewidths were chosen so each arm's sideband gain is sqrt(1.4)
    gain = 1.0 + (m.kappa1 / m.omega_m) ** 2
    assert gain == pytest.approx(math.sqrt(1.4), rel=1e-12)
