"""Protocol runners: swaps, dark-mode passage, Raman, itinerant, entangling.

Lossless runs anchor each protocol to its exact unitary limit; damped and
hot runs check the qualitative orderings the protocols exist to exploit
(precooling helps, slower passages are more adiabatic, virtual-phonon
transfer keeps the mechanics empty, matched rates beat mismatched ones).
"""

import math

import numpy as np
import pytest

from helpers import lossless_model, make_model
from oemt import PhysicsError, StabilityError
from oemt.dynamics import coupling_matrix
from oemt.gaussian import coherent_state, displaced_squeezed_state, vacuum_state
from oemt.protocols import (dark_mode_vector, run_adiabatic_dark_mode,
                            run_double_swap, run_entangle_red_blue,
                            run_itinerant, run_precooled_double_swap,
                            run_raman)
from oemt.schedule import gaussian_pulse

SIGNAL = coherent_state("signal", 1.0)


def test_dark_mode_vector_is_null_vector():
    g1, g2 = 0.1, 0.07
    v = dark_mode_vector(g1, g2)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    M = coupling_matrix(g1, g2, 0.0, 0.0, 0.0, 0.0, 0.0)
    assert np.allclose(M @ v, 0.0, atol=1e-15)
    with pytest.raises(PhysicsError):
        dark_mode_vector(0.0, 0.0)


def test_double_swap_lossless_is_perfect():
    model = lossless_model(0.1, 0.07)
    res = run_double_swap(model, SIGNAL)
    assert res.fidelity == pytest.approx(1.0, abs=1e-9)
    # two sequential swaps imprint (-i)^2 = -1 on the transferred mode
    assert res.metrics["ideal_transfer_re"] == pytest.approx(-1.0, abs=1e-9)
    assert res.metrics["ideal_transfer_im"] == pytest.approx(0.0, abs=1e-9)
    # the signal passes through the mechanics on the way
    assert res.metrics["peak_mech_occupation"] > 0.9
    assert res.output_state.mode_amplitude("cavity2") == pytest.approx(
        1.0, abs=1e-6)


def test_double_swap_squeezed_input():
    model = lossless_model(0.1, 0.07)
    res = run_double_swap(model, displaced_squeezed_state("s", 2.0, 0.4))
    assert res.fidelity == pytest.approx(1.0, abs=1e-8)


def test_precooling_matches_plain_protocol_cold():
    model = make_model(0.1, 0.07, 0.01, 0.01, 1e-5, n_th=0.0)
    plain = run_double_swap(model, SIGNAL)
    pre = run_precooled_double_swap(model, SIGNAL)
    assert pre.fidelity == pytest.approx(plain.fidelity, abs=1e-3)


def test_precooling_helps_hot_mechanics():
    model = make_model(0.1, 0.07, 0.01, 0.01, 1e-5, n_th=2.0)
    plain = run_double_swap(model, SIGNAL)
    pre = run_precooled_double_swap(model, SIGNAL)
    assert pre.fidelity > plain.fidelity
    assert pre.metrics["mech_occupation_after_precool"] < 0.1 * 2.0
    assert pre.metrics["initial_mech_occupation"] == pytest.approx(2.0)


def test_precooling_delay_lets_mechanics_reheat():
    model = make_model(0.1, 0.07, 0.01, 0.01, 1e-3, n_th=100.0)
    prompt = run_precooled_double_swap(model, SIGNAL, delay=0.0)
    delayed = run_precooled_double_swap(model, SIGNAL, delay=30.0)
    assert delayed.fidelity < prompt.fidelity
    assert delayed.metrics["delay"] == 30.0


def test_adiabatic_passage_improves_with_duration():
    model = lossless_model(0.1, 0.07)
    fids = [run_adiabatic_dark_mode(model, SIGNAL, T,
                                    points_per_segment=200).fidelity
            for T in (30.0, 120.0, 480.0)]
    assert fids[0] < fids[1] < fids[2]
    assert fids[2] > 0.99
    slow = run_adiabatic_dark_mode(model, SIGNAL, 480.0,
                                   points_per_segment=200)
    assert slow.metrics["min_dark_overlap"] > 0.9
    assert slow.metrics["peak_mech_occupation"] < 0.05
    assert slow.metrics["adiabaticity_ratio"] < 0.2


def test_adiabatic_suppression_vanishes_at_equal_kappas():
    model = make_model(0.1, 0.07, 0.01, 0.01, 1e-5)
    res = run_adiabatic_dark_mode(model, SIGNAL, 120.0,
                                  points_per_segment=120)
    assert res.metrics["mech_noise_suppression"] == 0.0
    lopsided = make_model(0.1, 0.07, 0.02, 0.01, 1e-5)
    res2 = run_adiabatic_dark_mode(lopsided, SIGNAL, 120.0,
                                   points_per_segment=120)
    assert res2.metrics["mech_noise_suppression"] > 0.0
    with pytest.raises(PhysicsError, match="ramp"):
        run_adiabatic_dark_mode(model, SIGNAL, 120.0, ramp="bogus")


def test_raman_transfer_keeps_mechanics_virtual():
    model = lossless_model(0.1, 0.1)
    res = run_raman(model, SIGNAL, delta_offset=1.0)
    assert res.fidelity > 0.98
    assert res.metrics["peak_mech_occupation"] < 0.05
    assert res.metrics["rabi_frequency"] == pytest.approx(0.01)
    assert res.metrics["duration"] == pytest.approx(
        res.metrics["nominal_duration"], rel=0.2)


def test_raman_mech_occupation_scales_inverse_square_detuning():
    model = lossless_model(0.1, 0.1)
    near = run_raman(model, SIGNAL, delta_offset=1.0)
    far = run_raman(model, SIGNAL, delta_offset=2.0)
    ratio = (near.metrics["peak_mech_occupation"]
             / far.metrics["peak_mech_occupation"])
    assert 3.2 < ratio < 4.8


def test_raman_guards():
    model = lossless_model(0.1, 0.1)
    with pytest.raises(PhysicsError, match="detuning"):
        run_raman(model, SIGNAL, delta_offset=0.0)
    with pytest.raises(PhysicsError, match="ratio"):
        run_raman(model, SIGNAL, delta_offset=0.2)
    with pytest.warns(UserWarning, match="rough"):
        run_raman(model, SIGNAL, delta_offset=0.5)


def test_itinerant_dual_route_consistency():
    model = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    pulse = gaussian_pulse(1.0, 0.4, center=12.0)
    res = run_itinerant(model, pulse, window=(0.0, 40.0))
    assert res.metrics["eta_time"] == pytest.approx(
        res.metrics["eta_freq"], abs=1e-3)
    assert not res.notes
    assert res.metrics["delay"] > 0.0  # causal transit delay
    mismatched = make_model(0.8, 0.6, 1.8, 3.2, 1e-3)
    res_mis = run_itinerant(mismatched, pulse, window=(0.0, 40.0))
    assert res_mis.metrics["eta_time"] < res.metrics["eta_time"]


def test_itinerant_flags_truncated_pulse():
    model = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    pulse = gaussian_pulse(1.0, 0.4, center=0.5)  # rides the window edge
    res = run_itinerant(model, pulse, window=(0.0, 6.0))
    assert any("truncated" in n for n in res.notes)


def test_itinerant_guards():
    model = make_model(0.8, 0.6, 3.2, 1.8, 1e-3)
    pulse = gaussian_pulse(1.0, 0.4, center=12.0)
    with pytest.raises(PhysicsError, match="window"):
        run_itinerant(model, pulse, window=(5.0, 5.0))
    closed = make_model(0.8, 0.6, 3.2, 1.8, 1e-3, nu1=0.0)
    with pytest.raises(PhysicsError, match="kappa_ext"):
        run_itinerant(closed, pulse, window=(0.0, 40.0))


def test_entangle_steady_state_and_bogoliubov():
    en_by_nth = []
    for n_th in (0.0, 50.0):
        model = make_model(0.2, 0.1, 0.1, 0.1, 1e-4, n_th=n_th)
        res = run_entangle_red_blue(model, steady=True)
        assert res.metrics["stable"]
        en_by_nth.append(res.metrics["log_negativity_cavities"])
        # the Bogoliubov dark mode holds sinh^2(r) quanta regardless of bath
        r = math.atanh(0.5)
        assert res.metrics["bogoliubov_r"] == pytest.approx(r)
        assert res.metrics["bogoliubov_occupation"] == pytest.approx(
            math.sinh(r) ** 2, abs=1e-3)
    assert en_by_nth[0] > 0.4
    assert en_by_nth[1] < en_by_nth[0]


def test_entangle_transient_approaches_steady():
    model = make_model(0.2, 0.1, 0.1, 0.1, 1e-4)
    steady = run_entangle_red_blue(model, steady=True)
    trans = run_entangle_red_blue(model, duration=600.0, points=241)
    assert trans.metrics["log_negativity_cavities"] == pytest.approx(
        steady.metrics["log_negativity_cavities"], rel=5e-3)
    series = trans.series["log_negativity_cavities"]
    assert series[0] == 0.0 and series[-1] > 0.4


def test_entangle_instability_guard():
    model = make_model(0.1, 0.2, 0.1, 0.1, 1e-4)  # g2 > g1: unstable
    with pytest.raises(StabilityError):
        run_entangle_red_blue(model, steady=True)
    short = run_entangle_red_blue(model, duration=5.0, points=41)
    assert not short.metrics["stable"]
    with pytest.raises(PhysicsError, match="duration"):
        run_entangle_red_blue(make_model(0.2, 0.1, 0.1, 0.1, 1e-4))


def test_protocol_input_must_be_single_mode():
    model = lossless_model(0.1, 0.07)
    with pytest.raises(PhysicsError, match="single-mode"):
        run_double_swap(model, vacuum_state(["a", "b"]))
    with pytest.raises(PhysicsError, match="g1 > 0"):
        run_double_swap(lossless_model(0.0, 0.07), SIGNAL)
