"""Preparation of the staggered two-site excitation of the AKLT chain.

The target is the normalized momentum-pi state J |AKLT> with
J = sum_j (-1)^j S_j . S_{j+1} on the periodic chain.  A weak Trotterized
unitary pumps a small amplitude of that state on top of the ground state;
repeat-until-success momentum-parity readout projects it out.

The even/odd bond split assigns + S.S to bonds starting at even sites and
- S.S to bonds starting at odd sites (1-based); the periodic wrap bond takes
the parity of its left site.  Both halves are sums over disjoint bonds, so
each exponential factors exactly into dense two-site exponentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .models import SS_BOND, get_model, base_state, hamiltonian_residual
from .statevector import LocalOperator, StateVector, apply_local, apply_terms, inner
from .translate import momentum_parity_measure, momentum_project, translate_state


@dataclass(frozen=True)
class TrotterPlan:
    alpha: float
    even_bonds: tuple[tuple[int, int], ...]
    odd_bonds: tuple[tuple[int, int], ...]
    order: int = 2


@dataclass(frozen=True)
class RepeatReport:
    rounds_used: int
    succeeded: bool
    final_state: StateVector | None
    fidelity_to_oracle: float | None
    error: float | None


def staggered_creation_terms(L: int) -> list[LocalOperator]:
    """(-1)^j S_j . S_{j+1} bond terms on the periodic chain (j is 1-based)."""
    if L % 2:
        raise ValueError("even L required for the staggered bond operator")
    terms = []
    for i in range(L):
        sign = -1.0 if (i + 1) % 2 else 1.0
        terms.append(LocalOperator((i, (i + 1) % L), sign * SS_BOND))
    return terms


def arovas_oracle(L: int) -> StateVector:
    """Exact target state: normalized staggered bond excitation of the base."""
    if L % 2:
        raise ValueError("even L required")
    base = base_state(get_model("aklt"), L)
    raw = apply_terms(base, staggered_creation_terms(L))
    norm = np.linalg.norm(raw)
    if norm < 1e-14:
        raise RuntimeError("staggered excitation annihilated the base state")
    return base.with_amplitudes(raw / norm)


def trotter_plan(L: int, alpha: float) -> TrotterPlan:
    if L % 2:
        raise ValueError("even L required")
    even = []
    odd = []
    for i in range(L):
        j = i + 1  # 1-based left site of the bond
        bond = (i, (i + 1) % L)
        (even if j % 2 == 0 else odd).append(bond)
    return TrotterPlan(alpha, tuple(even), tuple(odd))


@lru_cache(maxsize=64)
def _bond_exponential(coeff: float) -> np.ndarray:
    return expm(1j * coeff * SS_BOND)


def _apply_bond_layer(state: StateVector, bonds, coeff: float) -> StateVector:
    mat = _bond_exponential(coeff)
    for bond in bonds:
        state = apply_local(state, LocalOperator(bond, mat))
    return state


def trotter_u(plan: TrotterPlan, state: StateVector) -> StateVector:
    """Symmetric second-order split of exp(i alpha J); exactly unitary."""
    a = plan.alpha
    state = _apply_bond_layer(state, plan.even_bonds, a / 2.0)
    state = _apply_bond_layer(state, plan.odd_bonds, -a)
    state = _apply_bond_layer(state, plan.even_bonds, a / 2.0)
    return state


def pi_component(state: StateVector) -> tuple[float, StateVector | None]:
    """Weight and normalized state of the momentum-pi sector."""
    return momentum_project(state, state.n_wires // 2)


def round_success_probability(L: int, alpha: float) -> float:
    """Born weight of the momentum-pi branch after one pump on the base."""
    plan = trotter_plan(L, alpha)
    psi = trotter_u(plan, base_state(get_model("aklt"), L))
    w, _ = pi_component(psi)
    return w


def prepare_arovas(L: int, alpha: float, max_rounds: int,
                   rng: np.random.Generator) -> RepeatReport:
    """Repeat-until-success loop: pump, measure parity, stop on outcome 1."""
    if alpha < 0.0:
        raise ValueError("alpha must be non-negative")
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    plan = trotter_plan(L, alpha)
    target = arovas_oracle(L)
    state = base_state(get_model("aklt"), L)
    for round_index in range(1, max_rounds + 1):
        state = trotter_u(plan, state)
        bit, state = momentum_parity_measure(state, rng)
        if bit == 1:
            fid = abs(inner(target, state))
            return RepeatReport(round_index, True, state, fid, 1.0 - fid)
    return RepeatReport(max_rounds, False, state, None, None)


@dataclass(frozen=True)
class EnsembleReport:
    L: int
    alpha: float
    n_seeds: int
    max_rounds: int
    first_round_probability: float
    success_fraction: float
    mean_rounds_success: float | None
    mean_rounds_all: float
    measured_round_probability: float
    mean_error: float | None
    rounds: tuple[int, ...]
    errors: tuple[float, ...]


def _failure_trajectory(L: int, alpha: float, k_max: int):
    """Per-round success probabilities and success-state errors.

    Conditioned on failures the walk is deterministic, so the whole
    repeat-until-success ensemble is a function of this one trajectory.
    """
    plan = trotter_plan(L, alpha)
    target = arovas_oracle(L)
    psi = base_state(get_model("aklt"), L)
    probs = np.empty(k_max)
    plus_probs = np.empty(k_max)
    errs = np.empty(k_max)
    for k in range(k_max):
        pumped = trotter_u(plan, psi)
        shifted = translate_state(pumped)
        minus = 0.5 * (pumped.amplitudes - shifted.amplitudes)
        plus = 0.5 * (pumped.amplitudes + shifted.amplitudes)
        p1 = float(np.vdot(minus, minus).real)
        probs[k] = p1
        plus_probs[k] = float(np.vdot(plus, plus).real)
        if p1 > 0:
            errs[k] = 1.0 - abs(np.vdot(target.amplitudes, minus / math.sqrt(p1)))
        else:
            errs[k] = np.nan
        psi = pumped.with_amplitudes(plus / np.linalg.norm(plus))
    return probs, plus_probs, errs


def repeat_until_success_ensemble(L: int, alpha: float, n_seeds: int,
                                  max_rounds: int, seed: int = 0) -> EnsembleReport:
    """Seed sweep of :func:`prepare_arovas`, sampled from the exact trajectory.

    Per-seed generators are ``make_rng(seed + i)`` and consume one uniform per
    round exactly like the direct simulation, so individual members agree
    with ``prepare_arovas`` run at the same seed.
    """
    probs, plus_probs, errs = _failure_trajectory(L, alpha, max_rounds)
    from .statevector import make_rng

    rounds: list[int] = []
    errors: list[float] = []
    successes = 0
    total_rounds = 0
    for i in range(n_seeds):
        rng = make_rng(seed + i)
        took = max_rounds
        err = None
        for k in range(max_rounds):
            # same draw and comparison as momentum_parity_measure
            u = rng.random() * (plus_probs[k] + probs[k])
            if u >= plus_probs[k]:
                took = k + 1
                err = errs[k]
                successes += 1
                break
        total_rounds += took
        rounds.append(took)
        errors.append(err if err is not None else math.nan)
    succ_rounds = [r for r, e in zip(rounds, errors) if not math.isnan(e)]
    succ_errors = [e for e in errors if not math.isnan(e)]
    return EnsembleReport(
        L=L,
        alpha=alpha,
        n_seeds=n_seeds,
        max_rounds=max_rounds,
        first_round_probability=float(probs[0]),
        success_fraction=successes / n_seeds,
        mean_rounds_success=(sum(succ_rounds) / len(succ_rounds)) if succ_rounds else None,
        mean_rounds_all=total_rounds / n_seeds,
        measured_round_probability=successes / total_rounds if total_rounds else 0.0,
        mean_error=(sum(succ_errors) / len(succ_errors)) if succ_errors else None,
        rounds=tuple(rounds),
        errors=tuple(errors),
    )


def oracle_diagnostics(L: int) -> dict:
    """Residual, translation eigenvalue, and charge of the oracle state."""
    model = get_model("aklt")
    state = arovas_oracle(L)
    energy, residual = hamiltonian_residual(model, state)
    t_expect = inner(state, translate_state(state))
    from .models import charge_expectation

    return {
        "L": L,
        "energy": energy,
        "residual": residual,
        "translation_expectation": complex(t_expect),
        "charge": charge_expectation(model, state),
    }
