"""Global-charge measurement: exact projectors and phase estimation.

The phase-estimation register holds m ancilla qubits appended after the
system wires.  Bit s_l is the coefficient of 2^l in the decoded value, so
s_0 is the least significant bit.  Charges are shifted by a recorded integer
offset so the modulo-2^m encoding is non-negative.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .models import ModelSpec, charge_diagonal, round_to_charge_lattice
from .statevector import StateVector, check_size

EMPTY_SECTOR_TOL = 1e-14


@dataclass(frozen=True)
class PEAConfig:
    m: int
    charge_offset: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("at least one ancilla qubit is required")


@dataclass(frozen=True)
class PEAOutcome:
    bits: tuple[int, ...]
    charge_mod: int
    post_state: StateVector
    probability: float


@dataclass(frozen=True)
class SectorComponent:
    charge: float
    probability: float
    post_state: StateVector


def _occupied_charges(model: ModelSpec, L: int,
                      state: StateVector | None) -> np.ndarray:
    diag = round_to_charge_lattice(charge_diagonal(model, L))
    if state is None:
        return diag
    probs = np.abs(state.amplitudes) ** 2
    return diag[probs > EMPTY_SECTOR_TOL]


def default_offset(model: ModelSpec, L: int,
                   state: StateVector | None = None) -> float:
    """Integer shift making every (occupied) sector charge non-negative."""
    charges = _occupied_charges(model, L, state)
    return float(-min(charges.min(), 0.0))


def recommended_ancillas(model: ModelSpec, L: int,
                         state: StateVector | None = None) -> int:
    """Smallest m with 2^m strictly above the charge range (no aliasing)."""
    charges = _occupied_charges(model, L, state)
    span = int(round(charges.max() - charges.min() + default_offset(model, L, state)))
    m = 1
    while 2**m <= span:
        m += 1
    return m


def project_charge(model: ModelSpec, state: StateVector,
                   q_value: float) -> tuple[float, StateVector | None]:
    """Born weight and normalized projection onto one charge sector.

    Returns (0.0, None) for an empty sector; raises if ``q_value`` is not on
    the model's charge lattice at all.
    """
    diag = round_to_charge_lattice(charge_diagonal(model, state.n_wires))
    values = np.unique(diag)
    snapped = round(q_value * 2.0) / 2.0
    if abs(snapped - q_value) > 1e-8 or snapped not in values:
        raise ValueError(f"charge {q_value} is not on the model's lattice")
    mask = diag == snapped
    projected = state.amplitudes * mask
    p = float(np.vdot(projected, projected).real)
    if p < EMPTY_SECTOR_TOL:
        return 0.0, None
    return p, state.with_amplitudes(projected / math.sqrt(p))


def sector_decompose(model: ModelSpec, state: StateVector) -> list[SectorComponent]:
    """Full charge decomposition without sampling."""
    diag = round_to_charge_lattice(charge_diagonal(model, state.n_wires))
    out = []
    for q in np.unique(diag):
        mask = diag == q
        projected = state.amplitudes * mask
        p = float(np.vdot(projected, projected).real)
        if p < EMPTY_SECTOR_TOL:
            continue
        out.append(
            SectorComponent(float(q), p,
                            state.with_amplitudes(projected / math.sqrt(p)))
        )
    return out


def _pea_columns(model: ModelSpec, state: StateVector,
                 config: PEAConfig) -> tuple[np.ndarray, np.ndarray]:
    """Joint system (x) ancilla amplitudes after the inverse Fourier transform.

    Returns (columns, shifted integer charges); column k is the system
    amplitude vector paired with ancilla register value k.
    """
    L = state.n_wires
    m = config.m
    anc_dim = 2**m
    check_size(state.dim * anc_dim)
    diag = round_to_charge_lattice(charge_diagonal(model, L))
    shifted = diag + config.charge_offset
    ints = np.round(shifted).astype(int)
    occupied = np.abs(state.amplitudes) ** 2 > EMPTY_SECTOR_TOL
    if np.any(occupied):
        occ = shifted[occupied]
        if occ.min() < -1e-9:
            raise ValueError("charge offset leaves negative occupied sector charges")
        if np.max(np.abs(occ - np.round(occ))) > 1e-8:
            raise ValueError(
                "shifted charges are not integers; pick a half-integer-aware offset"
            )
        span = int(round(occ.max()))
        if span >= anc_dim:
            warnings.warn(
                f"2^m = {anc_dim} does not exceed the occupied charge range {span}; "
                "readout is aliased modulo 2^m",
                RuntimeWarning,
            )
    # Hadamards put the register in a uniform superposition; the controlled
    # powers of the diagonal unitary U = exp(i 2 pi Q / 2^m) attach the phase
    # exp(i 2 pi k Q / 2^m) to register value k.
    ks = np.arange(anc_dim)
    phases = np.exp(2j * np.pi * np.outer(ints, ks) / anc_dim) / math.sqrt(anc_dim)
    joint = state.amplitudes[:, None] * phases
    qft_inv = np.exp(-2j * np.pi * np.outer(ks, ks) / anc_dim) / math.sqrt(anc_dim)
    joint = joint @ qft_inv.T
    return joint, ints


def phase_estimate(model: ModelSpec, state: StateVector, config: PEAConfig,
                   rng: np.random.Generator) -> PEAOutcome:
    """One full phase-estimation run: circuit, ancilla readout, collapse."""
    joint, _ = _pea_columns(model, state, config)
    probs = np.linalg.norm(joint, axis=0) ** 2
    total = probs.sum()
    pick = int(rng.choice(len(probs), p=probs / total))
    p = float(probs[pick])
    post = joint[:, pick] / math.sqrt(p)
    bits = tuple((pick >> l) & 1 for l in range(config.m))
    return PEAOutcome(bits, pick, state.with_amplitudes(post), p)


def phase_estimate_branches(model: ModelSpec, state: StateVector,
                            config: PEAConfig) -> list[PEAOutcome]:
    """Deterministic list of all readout branches with positive weight."""
    joint, _ = _pea_columns(model, state, config)
    out = []
    for k in range(joint.shape[1]):
        p = float(np.vdot(joint[:, k], joint[:, k]).real)
        if p < EMPTY_SECTOR_TOL:
            continue
        bits = tuple((k >> l) & 1 for l in range(config.m))
        out.append(PEAOutcome(bits, k, state.with_amplitudes(joint[:, k] / math.sqrt(p)), p))
    return out
