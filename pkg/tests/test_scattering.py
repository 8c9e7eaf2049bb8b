"""Frequency-domain response: conversion matrix, bandwidth, noise budget.

The closed-form on-resonance amplitude and the row-unitarity power sum
give two independent anchors; probe-spectrum features are checked against
their textbook widths and splittings.
"""

import math

import numpy as np
import pytest

from helpers import make_model
from oemt import NumericalError, PhysicsError, PoleError
from oemt.scattering import (conversion_matrix, halfwidth, noise_budget,
                             probe_spectrum, t31_closed_form)


def random_damped_model(rng, **kwargs):
    g1, g2 = rng.uniform(0.02, 0.3, size=2)
    k1, k2 = rng.uniform(0.2, 2.0, size=2)
    gamma = rng.uniform(1e-5, 1e-2)
    return make_model(g1, g2, k1, k2, gamma, **kwargs)


def test_resonant_conversion_matches_closed_form():
    rng = np.random.default_rng(21)
    for _ in range(20):
        model = random_damped_model(rng)
        cm = conversion_matrix(model, [0.0])
        assert abs(cm.entry(3, 1)[0]) == pytest.approx(
            t31_closed_form(model), abs=1e-12)


def test_rate_matched_chain_converts_fully():
    model = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    assert model.Gamma1 == pytest.approx(model.Gamma2)
    t0 = t31_closed_form(model)
    assert t0 == pytest.approx(2 * 0.8 / (1.6 + 1e-3), abs=1e-12)
    assert t0 > 0.999
    # breaking the rate match costs conversion
    swapped = make_model(0.8, 0.6, 1.8, 3.2, 1e-3)
    assert t31_closed_form(swapped) < t0


def test_scattering_is_unitary_and_symmetric():
    rng = np.random.default_rng(33)
    grid = np.linspace(-4.0, 4.0, 101)
    for _ in range(6):
        model = random_damped_model(
            rng, nu1=rng.uniform(0.3, 1.0), nu2=rng.uniform(0.3, 1.0),
            n_th=rng.uniform(0.0, 20.0))
        cm = conversion_matrix(model, grid)
        assert cm.unitarity_defect() < 1e-10
        assert np.max(np.abs(cm.matrices - np.transpose(
            cm.matrices, (0, 2, 1)))) < 1e-10
        # single-frequency solve agrees with the grid sweep
        assert np.allclose(cm.at(grid[7]), cm.matrices[7], atol=1e-12)


def test_signal_amplitude_scales_with_extraction():
    model = make_model(0.1, 0.07, 0.5, 0.4, 1e-4, nu1=0.8, nu2=0.5)
    cm = conversion_matrix(model, [0.0])
    assert cm.signal_amplitude[0] == pytest.approx(
        math.sqrt(0.8 * 0.5) * cm.entry(3, 1)[0])


def test_mechanical_noise_route_ratio():
    model = make_model(0.1, 0.07, 0.01, 0.01, 1e-5)
    budget = noise_budget(model)
    # T32 / T31 = i sqrt(gamma_m / Gamma1) on resonance
    expect = 1j * math.sqrt(model.gamma_m / model.Gamma1)
    assert budget.t32_over_t31 == pytest.approx(expect, abs=1e-12)


def test_noise_budget_power_conservation():
    rng = np.random.default_rng(55)
    for _ in range(8):
        model = random_damped_model(
            rng, nu1=rng.uniform(0.2, 1.0), nu2=rng.uniform(0.2, 1.0))
        budget = noise_budget(model, omega=rng.uniform(-1.0, 1.0))
        assert budget.total_output_power() == pytest.approx(1.0, abs=1e-12)
        # vacuum baths: powers are the same coefficients at half quantum
        assert sum(budget.powers.values()) == pytest.approx(0.5, abs=1e-12)


def test_noise_budget_snr():
    model = make_model(0.1, 0.07, 0.5, 0.4, 1e-4, n_th=100.0, nu1=0.8)
    budget = noise_budget(model)
    assert budget.snr == pytest.approx(
        0.8 * math.sqrt(model.Gamma1 / (1e-4 * 100.0)))
    cold = noise_budget(make_model(0.1, 0.07, 0.5, 0.4, 1e-4))
    assert math.isinf(cold.snr)


def test_halfwidth_weak_coupling_lorentzian():
    # adiabatic regime: |T31| is Lorentzian with pole width Gamma_tot / 2,
    # so the half-amplitude point sits at sqrt(3) Gamma_tot / 2
    model = make_model(0.01, 0.01, 1.0, 1.0, 1e-6)
    gamma_tot = model.Gamma1 + model.Gamma2 + model.gamma_m
    res = halfwidth(model, 6.0 * gamma_tot)
    assert res.delta_omega == pytest.approx(
        math.sqrt(3.0) * gamma_tot / 2.0, rel=0.1)


def test_halfwidth_strong_coupling_order_kappa():
    model = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    gamma_tot = model.Gamma1 + model.Gamma2 + model.gamma_m
    res = halfwidth(model, 8.0)
    assert gamma_tot / 2.0 < res.delta_omega < 2.0 * gamma_tot
    assert res.crossings[0] == res.delta_omega
    assert all(b > a for a, b in zip(res.crossings, res.crossings[1:]))


def test_halfwidth_without_crossing_raises():
    model = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    with pytest.raises(NumericalError, match="never crosses"):
        halfwidth(model, 1e-3)


def test_conversion_guards():
    with pytest.raises(PoleError, match="gamma_m"):
        conversion_matrix(make_model(0.1, 0.07, 0.01, 0.01, 0.0), [0.0])
    blue = make_model(0.1, 0.07, 0.01, 0.01, 1e-5, side1="blue")
    with pytest.raises(PhysicsError, match="red-sideband"):
        conversion_matrix(blue, [0.0])
    detuned = make_model(0.1, 0.07, 0.01, 0.01, 1e-5, delta1=0.3)
    with pytest.raises(PhysicsError, match="detuning"):
        t31_closed_form(detuned)


def test_probe_transparency_window_width():
    # critical coupling, weak mechanics: a dip carved into a dip, with the
    # inner transparency window of width Gamma1 + gamma_m
    model = make_model(0.02, 0.0, 1.0, 0.1, 1e-5, nu1=0.5)
    width = model.Gamma1 + model.gamma_m
    grid = np.linspace(-6.0 * width, 6.0 * width, 4001)
    spec = probe_spectrum(model, grid)
    p = spec.power
    assert p[2000] == pytest.approx(p.max(), rel=1e-6)  # peak at center
    above = p >= 0.5 * p.max()
    lo, hi = grid[above][0], grid[above][-1]
    assert (hi - lo) == pytest.approx(width, rel=0.3)
    assert p.min() < 0.05 * p.max()  # absorption floor around the window


def test_probe_normal_mode_splitting():
    model = make_model(1.0, 0.0, 0.1, 0.1, 1e-4, nu1=0.5)
    grid = np.arange(-1.6, 1.6 + 5e-4, 1e-3)
    spec = probe_spectrum(model, grid)
    dips = sorted(spec.minima(), key=lambda om_p: om_p[1])[:2]
    positions = sorted(om for om, _ in dips)
    assert positions[0] == pytest.approx(-1.0, abs=2e-3)
    assert positions[1] == pytest.approx(1.0, abs=2e-3)
    assert spec.maxima()  # a local maximum sits between the dips


def test_probe_guards():
    with pytest.raises(PoleError):
        probe_spectrum(make_model(0.1, 0.0, 0.0, 0.1, 1e-5), [0.0])
    blue = make_model(0.1, 0.0, 1.0, 0.1, 1e-5, side1="blue")
    with pytest.raises(PhysicsError):
        probe_spectrum(blue, [0.0])
