import numpy as np
import pytest

from scartower.chargemeasure import (
    PEAConfig,
    default_offset,
    phase_estimate,
    phase_estimate_branches,
    project_charge,
    recommended_ancillas,
    sector_decompose,
)
from scartower.models import (
    base_state,
    charge_sector_weights,
    get_model,
    hamiltonian_residual,
)
from scartower.statevector import basis_state, fidelity, make_rng
from scartower.tensornet import build_resource_mps, contract_to_statevector

from conftest import random_state


def aklt_resource(L=4, w=0.5):
    model = get_model("aklt")
    return model, contract_to_statevector(build_resource_mps(model, L, w)).normalize()


def test_project_onto_own_sector_is_identity():
    model = get_model("dicke")
    state = base_state(model, 4)
    p, post = project_charge(model, state, -2.0)
    assert p == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(post.amplitudes, state.amplitudes, atol=1e-12)


def test_project_onto_other_sector_is_empty():
    model = get_model("dicke")
    state = base_state(model, 4)
    p, post = project_charge(model, state, 0.0)
    assert p == 0.0 and post is None


def test_project_off_lattice_raises():
    model = get_model("dicke")
    state = base_state(model, 4)
    with pytest.raises(ValueError):
        project_charge(model, state, 0.3)


def test_aklt_resource_projection_weight_and_residual():
    # dual-path check: projector weight equals the sector-weight oracle, and
    # the projected state is the first tower member (energy 2 eigenstate)
    model, res = aklt_resource()
    p, post = project_charge(model, res, 2.0)
    oracle = dict(charge_sector_weights(model, res))[2.0]
    assert p == pytest.approx(oracle, abs=1e-12)
    assert p == pytest.approx(24.0 / 61.0, abs=1e-10)
    energy, residual = hamiltonian_residual(model, post)
    assert energy == pytest.approx(2.0, abs=1e-8)
    assert residual <= 1e-8


def test_pea_eigenstate_bits_deterministic():
    # five up spins on six sites: shifted charge 5 reads out as bits (1, 0, 1)
    model = get_model("xx_spin_half")
    state = basis_state([2] * 6, [1, 1, 1, 1, 1, 0])
    cfg = PEAConfig(m=3, charge_offset=default_offset(model, 6))
    for seed in range(4):
        out = phase_estimate(model, state, cfg, make_rng(seed))
        assert out.bits == (1, 0, 1)
        assert out.charge_mod == 5
        assert out.probability == pytest.approx(1.0, abs=1e-12)
        assert fidelity(out.post_state, state) == pytest.approx(1.0, abs=1e-12)


def test_pea_modulo_readout_when_register_small():
    model = get_model("xx_spin_half")
    state = basis_state([2] * 6, [1, 1, 1, 1, 1, 0])
    cfg = PEAConfig(m=2, charge_offset=default_offset(model, 6))
    with pytest.warns(RuntimeWarning, match="aliased"):
        out = phase_estimate(model, state, cfg, make_rng(0))
    assert out.charge_mod == 5 % 4


def test_pea_branches_match_projector_oracle():
    model, res = aklt_resource()
    offset = default_offset(model, 4, res)
    cfg = PEAConfig(m=3, charge_offset=offset)
    branches = phase_estimate_branches(model, res, cfg)
    assert len(branches) == 3
    total = 0.0
    for b in branches:
        q = b.charge_mod - offset
        p_ref, post_ref = project_charge(model, res, q)
        assert b.probability == pytest.approx(p_ref, abs=1e-10)
        assert fidelity(b.post_state, post_ref) >= 1.0 - 1e-10
        total += b.probability
    assert total == pytest.approx(1.0, abs=1e-10)


def test_pea_random_superposition_equivalence(rng):
    model = get_model("dicke")
    L = 5
    state = random_state(rng, (2,) * L)
    offset = default_offset(model, L, state)
    cfg = PEAConfig(m=recommended_ancillas(model, L, state), charge_offset=offset)
    for b in phase_estimate_branches(model, state, cfg):
        q = b.charge_mod - offset
        p_ref, post_ref = project_charge(model, state, q)
        assert b.probability == pytest.approx(p_ref, abs=1e-10)
        assert fidelity(b.post_state, post_ref) >= 1.0 - 1e-10


def test_pea_empirical_frequencies():
    model, res = aklt_resource()
    cfg = PEAConfig(m=3, charge_offset=default_offset(model, 4, res))
    weights = {q: p for q, p in charge_sector_weights(model, res) if p > 1e-12}
    rng = make_rng(2024)
    counts: dict[float, int] = {}
    shots = 4000
    for _ in range(shots):
        out = phase_estimate(model, res, cfg, rng)
        q = out.charge_mod - cfg.charge_offset
        counts[q] = counts.get(q, 0) + 1
    tv = 0.5 * sum(abs(counts.get(q, 0) / shots - p) for q, p in weights.items())
    assert tv < 0.02


def test_pea_projective_repetition():
    model, res = aklt_resource()
    cfg = PEAConfig(m=3, charge_offset=default_offset(model, 4, res))
    rng = make_rng(11)
    first = phase_estimate(model, res, cfg, rng)
    again = phase_estimate(model, first.post_state, cfg, rng)
    assert again.bits == first.bits
    assert again.probability == pytest.approx(1.0, abs=1e-10)


def test_controlled_charge_factors_commute(rng):
    # all local factors of the diagonal unitary commute, so any site order
    # gives identical joint amplitudes; exercised via two equivalent offsets
    model = get_model("xx_spin1")
    state = random_state(rng, (3,) * 4)
    cfg = PEAConfig(m=4, charge_offset=4.0)
    branches_a = phase_estimate_branches(model, state, cfg)
    branches_b = phase_estimate_branches(model, state, cfg)
    for a, b in zip(branches_a, branches_b):
        assert a.bits == b.bits
        assert np.array_equal(a.post_state.amplitudes, b.post_state.amplitudes)


def test_sector_decompose_product_state_single_sector():
    model = get_model("dicke")
    comps = sector_decompose(model, base_state(model, 5))
    assert len(comps) == 1
    assert comps[0].probability == pytest.approx(1.0, abs=1e-12)


def test_sector_decompose_support_and_resum(rng):
    model = get_model("xx_spin_half")
    L = 6
    res = contract_to_statevector(build_resource_mps(model, L, 0.7 * 0.5)).normalize()
    comps = sector_decompose(model, res)
    q0 = model.charge_origin(L)
    for c in comps:
        n = (c.charge - q0) / model.q
        assert abs(n - round(n)) < 1e-9
    total = sum(c.probability for c in comps)
    assert total == pytest.approx(1.0, abs=1e-10)
    rebuilt = sum(
        np.sqrt(c.probability) * c.post_state.amplitudes for c in comps
    )
    assert np.vdot(rebuilt, res.amplitudes).real ** 2 >= 1.0 - 1e-12
