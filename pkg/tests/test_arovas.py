import math

import numpy as np
import pytest

from scartower.arovas import (
    arovas_oracle,
    oracle_diagnostics,
    pi_component,
    prepare_arovas,
    repeat_until_success_ensemble,
    round_success_probability,
    staggered_creation_terms,
    trotter_plan,
    trotter_u,
)
from scartower.models import base_state, charge_expectation, get_model
from scartower.statevector import apply_terms, inner, make_rng
from scartower.translate import translate_state

from conftest import random_state


def test_oracle_diagnostics():
    diag = oracle_diagnostics(6)
    assert diag["residual"] <= 1e-8
    assert diag["translation_expectation"].real == pytest.approx(-1.0, abs=1e-10)
    assert abs(diag["translation_expectation"].imag) <= 1e-10
    assert diag["charge"] == pytest.approx(0.0, abs=1e-10)


def test_oracle_requires_even_length():
    with pytest.raises(ValueError):
        arovas_oracle(5)


def test_trotter_alpha_zero_is_identity():
    base = base_state(get_model("aklt"), 4)
    out = trotter_u(trotter_plan(4, 0.0), base)
    np.testing.assert_allclose(out.amplitudes, base.amplitudes, atol=1e-15)


def test_trotter_preserves_norm(rng):
    plan = trotter_plan(4, 0.31)
    for _ in range(100):
        state = random_state(rng, (3,) * 4)
        out = trotter_u(plan, state)
        assert abs(out.norm() - 1.0) <= 1e-12


def test_trotter_pi_component_is_linear_pump():
    # the momentum-pi part of the pumped ground state equals i alpha times
    # the raw staggered excitation, with a second-order relative deviation;
    # the constant is measured, not assumed
    base = base_state(get_model("aklt"), 6)
    raw = apply_terms(base, staggered_creation_terms(6))
    consts = []
    for alpha in (0.02, 0.04):
        pumped = trotter_u(trotter_plan(6, alpha), base)
        weight, comp = pi_component(pumped)
        reference = 1j * alpha * raw
        dev = np.linalg.norm(
            comp.amplitudes * math.sqrt(weight) - reference
        ) / np.linalg.norm(reference)
        consts.append(dev / alpha**2)
    assert consts[0] == pytest.approx(consts[1], rel=0.05)
    assert max(consts) < 50.0


def test_prepare_alpha_zero_never_succeeds():
    report = prepare_arovas(6, 0.0, 25, make_rng(0))
    assert not report.succeeded
    assert report.rounds_used == 25
    assert report.error is None


def test_prepare_success_reports_fidelity():
    report = prepare_arovas(6, 0.1, 4000, make_rng(3))
    assert report.succeeded
    assert 0.0 <= report.error == pytest.approx(1.0 - report.fidelity_to_oracle)
    assert report.fidelity_to_oracle > 0.9


def test_failure_branch_stays_near_ground_state():
    # one failed round returns the state to the base with a tiny error
    base = base_state(get_model("aklt"), 6)
    for alpha in (0.05, 0.1):
        pumped = trotter_u(trotter_plan(6, alpha), base)
        shifted = translate_state(pumped)
        plus = 0.5 * (pumped.amplitudes + shifted.amplitudes)
        plus /= np.linalg.norm(plus)
        fid = abs(np.vdot(base.amplitudes, plus))
        assert fid >= 1.0 - 10.0 * alpha**3


def test_ensemble_matches_direct_runs():
    ens = repeat_until_success_ensemble(6, 0.1, 4, max_rounds=300, seed=11)
    for i in range(4):
        direct = prepare_arovas(6, 0.1, 300, make_rng(11 + i))
        assert ens.rounds[i] == direct.rounds_used
        if direct.succeeded:
            assert ens.errors[i] == pytest.approx(direct.error, abs=1e-12)
        else:
            assert math.isnan(ens.errors[i])


def test_round_probability_scales_quadratically():
    p1 = round_success_probability(6, 0.025)
    p2 = round_success_probability(6, 0.05)
    p3 = round_success_probability(6, 0.1)
    assert p2 / p1 == pytest.approx(4.0, rel=0.05)
    assert p3 / p2 == pytest.approx(4.0, rel=0.15)


def test_ensemble_bookkeeping():
    ens = repeat_until_success_ensemble(6, 0.08, 50, max_rounds=120, seed=0)
    assert ens.n_seeds == 50
    assert len(ens.rounds) == 50
    succ = [e for e in ens.errors if not math.isnan(e)]
    assert ens.success_fraction == pytest.approx(len(succ) / 50)
    assert ens.measured_round_probability == pytest.approx(
        len(succ) / sum(ens.rounds)
    )
