"""Controlled translation, Bell-pair measurement feedback, and momentum readout.

Translation convention: wire j of the output reads the input content of wire
j+1 (cyclic), i.e. T |s1 s2 ... sL> = |s2 ... sL s1>.  The control wire is
the last wire of the state and must be a qubit.

Protocol mode implements the teleportation ladder: one Bell pair per site
except the last two, controlled swaps hooking each pair's first half to the
site two places right, a controlled swap of the first two sites, Bell
measurements on the pairs (second half, next site), and a controlled Pauli
feedback.  Every Bell outcome reproduces the direct gate exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .pauli import bell_basis, pauli_matrix
from .statevector import StateVector, check_size, make_rng

MOMENTUM_MIX_TOL = 1e-10


def _split_control(state: StateVector) -> int:
    if state.site_dims[-1] != 2:
        raise ValueError("expected a qubit control as the last wire")
    return state.n_wires - 1


def translation_axes(L: int) -> tuple[int, ...]:
    # output axis j holds input axis j+1; the last output axis holds input 0
    return tuple(list(range(1, L)) + [0])


def apply_translation(tensor: np.ndarray, power: int = 1) -> np.ndarray:
    L = tensor.ndim
    axes = list(range(L))
    for _ in range(power % L):
        axes = [axes[(k + 1) % L] for k in range(L)]
    # tensor indexed by output configuration: out[y] = in[y_{k+1}] pattern
    return np.transpose(tensor, axes=tuple(axes))


def translate_state(state: StateVector, power: int = 1) -> StateVector:
    out = apply_translation(state.tensor(), power)
    return state.with_amplitudes(out.reshape(-1))


def controlled_translate_direct(state: StateVector) -> StateVector:
    ctrl = _split_control(state)
    dims = state.site_dims
    if len(set(dims[:ctrl])) != 1:
        raise ValueError("system wires must share one qudit dimension")
    arr = np.moveaxis(state.tensor(), ctrl, 0).copy()
    arr[1] = apply_translation(arr[1])
    out = np.moveaxis(arr, 0, ctrl)
    return state.with_amplitudes(out.reshape(-1))


@dataclass(frozen=True)
class ProtocolBranch:
    outcomes: tuple[tuple[int, int], ...]
    probability: float
    post_state: StateVector


def _protocol_run(state: StateVector, rng=None, forced=None):
    """Shared engine for sampled / enumerated protocol translation.

    Returns a single ProtocolBranch when sampling, else a list of branches.
    """
    ctrl = _split_control(state)
    L = ctrl
    dims = state.site_dims
    d = dims[0]
    if len(set(dims[:ctrl])) != 1:
        raise ValueError("system wires must share one qudit dimension")
    if L < 3:
        raise ValueError("the protocol needs at least three system wires")
    n_pairs = L - 2
    check_size(state.dim * d ** (2 * n_pairs))

    # wire layout: [x_1..x_L, control, a_1, b_1, ..., a_P, b_P]
    bell = np.zeros(d * d, dtype=complex)
    bell[:: d + 1] = 1.0 / math.sqrt(d)
    ext = state.amplitudes
    for _ in range(n_pairs):
        ext = np.kron(ext, bell)
    dims_ext = dims + (d, d) * n_pairs
    tensor = ext.reshape(dims_ext)

    a_wire = [L + 1 + 2 * j for j in range(n_pairs)]
    b_wire = [L + 2 + 2 * j for j in range(n_pairs)]

    # controlled swaps: a_j <-> x_{j+2} for every pair, then x_1 <-> x_2;
    # the swapped pairs are mutually disjoint, so one transpose suffices
    tensor = np.moveaxis(tensor, L, 0)  # control to the front
    wires = [w for w in range(len(dims_ext)) if w != L]
    order = {w: k for k, w in enumerate(wires)}
    axes = list(range(len(wires)))
    for j in range(n_pairs):
        u, v = order[a_wire[j]], order[j + 2]
        axes[u], axes[v] = axes[v], axes[u]
    axes[order[0]], axes[order[1]] = axes[order[1]], axes[order[0]]
    slice1 = np.transpose(tensor[1], axes=tuple(axes))
    tensor = np.stack([tensor[0], slice1], axis=0)
    tensor = np.moveaxis(tensor, 0, L)

    # Bell measurements on (b_j, x_{j+1}), consuming those wires in order.
    basis = bell_basis(d)
    live = list(range(len(dims_ext)))  # original wire ids, in tensor axis order

    def measure_pair(tens, live, w1, w2, pick):
        ax1, ax2 = live.index(w1), live.index(w2)
        branches = []
        for (lab, vec) in basis:
            mat = vec.conj().reshape(d, d)
            red = np.tensordot(tens, mat, axes=([ax1, ax2], [0, 1]))
            p = float(np.vdot(red, red).real)
            branches.append((lab, p, red))
        total = sum(p for _, p, _ in branches)
        new_live = [w for w in live if w not in (w1, w2)]
        if pick is None:
            return branches, new_live, total
        lab, p, red = branches[pick]
        return [(lab, p, red)], new_live, total

    def finish(tens, live, outcomes, prob):
        # feedback: control 0 -> P_j on a_j; control 1 -> P_1...P_P on x_L
        ctrl_ax = live.index(L)
        arr = np.moveaxis(tens, ctrl_ax, 0).copy()
        rest = [w for w in live if w != L]
        pos = {w: k for k, w in enumerate(rest)}
        s0, s1 = arr[0], arr[1]
        for j, (a, b) in enumerate(outcomes):
            pmat = pauli_matrix(a, b, d)
            s0 = np.moveaxis(
                np.tensordot(pmat, np.moveaxis(s0, pos[a_wire[j]], 0), axes=(1, 0)),
                0, pos[a_wire[j]],
            )
        ptilde = np.eye(d, dtype=complex)
        for a, b in outcomes:
            ptilde = ptilde @ pauli_matrix(a, b, d)
        s1 = np.moveaxis(
            np.tensordot(ptilde, np.moveaxis(s1, pos[L - 1], 0), axes=(1, 0)),
            0, pos[L - 1],
        )
        arr = np.stack([s0, s1], axis=0)
        arr = np.moveaxis(arr, 0, ctrl_ax)
        # reorder the survivors to [x_1, a_1..a_P, x_L, control]
        target = [0] + a_wire + [L - 1, L]
        axes = [live.index(w) for w in target]
        out = np.transpose(arr, axes=tuple(axes)).reshape(-1)
        out = out / np.linalg.norm(out)
        return ProtocolBranch(tuple(outcomes), prob, state.with_amplitudes(out))

    if rng is not None:
        tens, live = tensor, list(range(len(dims_ext)))
        outcomes = []
        prob = 1.0
        for j in range(n_pairs):
            branches, live_next, total = measure_pair(tens, live, b_wire[j], j + 1, None)
            probs = np.array([p for _, p, _ in branches]) / total
            pick = int(rng.choice(len(branches), p=probs))
            lab, p, red = branches[pick]
            outcomes.append(lab)
            prob *= p / total
            tens, live = red / math.sqrt(p), live_next
        return finish(tens, live, outcomes, prob)

    # exhaustive enumeration
    results = []

    def recurse(tens, live, j, outcomes, prob):
        if j == n_pairs:
            results.append(finish(tens, live, outcomes, prob))
            return
        branches, live_next, total = measure_pair(tens, live, b_wire[j], j + 1, None)
        for lab, p, red in branches:
            if p <= 1e-30:
                continue
            recurse(red / math.sqrt(p), live_next, j + 1, outcomes + [lab], prob * p)

    recurse(tensor, list(range(len(dims_ext))), 0, [], 1.0)
    return results


def controlled_translate(state: StateVector, mode: str = "direct",
                         rng: np.random.Generator | None = None) -> StateVector:
    """Controlled one-site translation; last wire is the control qubit."""
    if mode == "direct":
        return controlled_translate_direct(state)
    if mode == "protocol":
        if rng is None:
            rng = make_rng(0)
        branch = _protocol_run(state, rng=rng)
        return branch.post_state
    raise ValueError(f"unknown mode {mode!r}")


def protocol_branches(state: StateVector) -> list[ProtocolBranch]:
    """All Bell-outcome branches of the protocol, with feedback applied."""
    return _protocol_run(state, rng=None)


# ---------------------------------------------------------------------------
# Momentum readout


def momentum_sector_weights(state: StateVector) -> np.ndarray:
    """Weight in each lattice-momentum sector p = 0..L-1."""
    L = state.n_wires
    tens = state.tensor()
    stack = np.empty((L, state.dim), dtype=complex)
    cur = tens
    for k in range(L):
        stack[k] = cur.reshape(-1)
        cur = apply_translation(cur)
    comps = np.fft.fft(stack, axis=0) / L
    return np.array([float(np.vdot(c, c).real) for c in comps])


def momentum_project(state: StateVector, p: int) -> tuple[float, StateVector | None]:
    L = state.n_wires
    tens = state.tensor()
    acc = np.zeros_like(state.amplitudes)
    cur = tens
    for k in range(L):
        acc = acc + np.exp(-2j * np.pi * p * k / L) * cur.reshape(-1)
        cur = apply_translation(cur)
    acc = acc / L
    w = float(np.vdot(acc, acc).real)
    if w < 1e-14:
        return 0.0, None
    return w, state.with_amplitudes(acc / math.sqrt(w))


def momentum_parity_measure(state: StateVector,
                            rng: np.random.Generator) -> tuple[int, StateVector]:
    """Ancilla-parity readout of the translation: outcome 0 keeps (I+T)/2 psi.

    Exact momentum readout for states supported on the +-1 eigenvalues; a
    warning fires when other momentum sectors carry weight, since the two
    branches then mix them.
    """
    L = state.n_wires
    weights = momentum_sector_weights(state)
    mixed = weights.sum() - weights[0] - (weights[L // 2] if L % 2 == 0 else 0.0)
    if mixed > MOMENTUM_MIX_TOL:
        warnings.warn(
            f"state has weight {mixed:.2e} on complex translation eigenvalues; "
            "parity readout mixes sectors",
            RuntimeWarning,
        )
    shifted = translate_state(state)
    plus = 0.5 * (state.amplitudes + shifted.amplitudes)
    minus = 0.5 * (state.amplitudes - shifted.amplitudes)
    p_plus = float(np.vdot(plus, plus).real)
    p_minus = float(np.vdot(minus, minus).real)
    u = rng.random() * (p_plus + p_minus)
    if u < p_plus:
        return 0, state.with_amplitudes(plus / math.sqrt(p_plus))
    return 1, state.with_amplitudes(minus / math.sqrt(p_minus))


def momentum_pea(state: StateVector, m: int, rng: np.random.Generator):
    """Phase estimation of the translation eigenphase; needs L = 2^m.

    Returns a chargemeasure.PEAOutcome whose ``charge_mod`` is the lattice
    momentum p (eigenphase 2 pi p / L).
    """
    from .chargemeasure import PEAOutcome  # local import avoids a cycle

    L = state.n_wires
    if 2**m != L:
        raise ValueError("momentum estimation requires L = 2^m")
    check_size(state.dim * 2**m)
    anc_dim = 2**m
    # after the Hadamards and the controlled powers the ancilla column k
    # holds T^k |psi> / sqrt(2^m)
    ext = np.empty((state.dim, anc_dim), dtype=complex)
    tens = state.tensor()
    for k in range(anc_dim):
        ext[:, k] = apply_translation(tens, power=k).reshape(-1)
    ext /= math.sqrt(anc_dim)
    grid = np.arange(anc_dim)
    qft_inv = np.exp(-2j * np.pi * np.outer(grid, grid) / anc_dim) / math.sqrt(anc_dim)
    ext = ext @ qft_inv.T
    probs = np.linalg.norm(ext, axis=0) ** 2
    total = probs.sum()
    pick = int(rng.choice(anc_dim, p=probs / total))
    post = ext[:, pick] / np.linalg.norm(ext[:, pick])
    bits = tuple((pick >> l) & 1 for l in range(m))
    return PEAOutcome(
        bits=bits,
        charge_mod=pick,
        post_state=state.with_amplitudes(post),
        probability=float(probs[pick] / total),
    )
