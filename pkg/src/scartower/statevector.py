"""Dense qudit statevector engine for small spin chains.

Amplitudes are stored flat in C order over ``site_dims``: wire 0 is the most
significant mixed-radix digit, so ``state.tensor()[s0, s1, ...]`` is the
amplitude of the basis configuration ``(s0, s1, ...)``.  All operations are
pure and return new :class:`StateVector` instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

# Desk-scale safety: refuse dense allocations above this many amplitudes.
AMPLITUDE_CAP = 2**27

NORM_TOL = 1e-12
FLAG_CHECK_TOL = 1e-10
RESOLUTION_TOL = 1e-10
SECTOR_FLOOR = 1e-14


class SizeGuardError(RuntimeError):
    """A dense allocation would exceed the configured amplitude cap."""


class ShapeError(ValueError):
    """Wire or dimension bookkeeping mismatch."""


class MeasurementFloorError(RuntimeError):
    """Sampled a measurement sector with probability below the numeric floor."""


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based random stream (Philox) keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(seed))


def check_size(n_amplitudes: int, cap: int | None = None) -> None:
    limit = AMPLITUDE_CAP if cap is None else cap
    if n_amplitudes > limit:
        raise SizeGuardError(
            f"refusing to allocate {n_amplitudes} amplitudes (cap {limit})"
        )


@dataclass(frozen=True)
class StateVector:
    """Dense state over a list of qudit wires.

    ``labels`` optionally tags each wire with a role such as ``system``,
    ``control``, ``ancilla`` or ``bell-half``; it is carried along unchanged
    by the engine.
    """

    site_dims: tuple[int, ...]
    amplitudes: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        dims = tuple(int(d) for d in self.site_dims)
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if any(d < 1 for d in dims):
            raise ShapeError(f"invalid site dims {dims}")
        if amps.size != math.prod(dims):
            raise ShapeError(
                f"{amps.size} amplitudes but prod(site_dims) = {math.prod(dims)}"
            )
        if self.labels is not None and len(self.labels) != len(dims):
            raise ShapeError("one label per wire required")
        object.__setattr__(self, "site_dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_wires(self) -> int:
        return len(self.site_dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.site_dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return StateVector(self.site_dims, self.amplitudes / n, self.labels)

    def with_amplitudes(self, amps: np.ndarray) -> "StateVector":
        return StateVector(self.site_dims, amps, self.labels)

    def to_json_dict(self) -> dict:
        out = {
            "site_dims": list(self.site_dims),
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }
        if self.labels is not None:
            out["labels"] = list(self.labels)
        return out

    @staticmethod
    def from_json_dict(payload: dict) -> "StateVector":
        amps = np.array(
            [complex(re, im) for re, im in payload["amplitudes"]], dtype=np.complex128
        )
        labels = tuple(payload["labels"]) if "labels" in payload else None
        return StateVector(tuple(payload["site_dims"]), amps, labels)


def basis_state(site_dims: Sequence[int], digits: Sequence[int],
                labels: Sequence[str] | None = None) -> StateVector:
    dims = tuple(site_dims)
    check_size(math.prod(dims))
    if len(digits) != len(dims):
        raise ShapeError("one digit per wire required")
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    amps[int(np.ravel_multi_index(tuple(digits), dims))] = 1.0
    return StateVector(dims, amps, tuple(labels) if labels else None)


def product_state(local_vectors: Sequence[np.ndarray],
                  labels: Sequence[str] | None = None) -> StateVector:
    dims = tuple(len(v) for v in local_vectors)
    check_size(math.prod(dims))
    amps = np.array([1.0], dtype=np.complex128)
    for v in local_vectors:
        amps = np.kron(amps, np.asarray(v, dtype=np.complex128))
    return StateVector(dims, amps, tuple(labels) if labels else None)


@dataclass(frozen=True)
class LocalOperator:
    """Operator acting on an ordered subset of wires.

    The matrix is indexed in mixed radix over the support dims with the
    first listed wire most significant, matching the statevector layout.
    """

    support: tuple[int, ...]
    matrix: np.ndarray
    unitary: bool = False
    hermitian: bool = False

    def __post_init__(self):
        sup = tuple(int(w) for w in self.support)
        mat = np.asarray(self.matrix, dtype=np.complex128)
        if len(set(sup)) != len(sup):
            raise ShapeError(f"repeated wires in support {sup}")
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ShapeError("operator matrix must be square")
        if self.unitary:
            dev = np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0])))
            if dev > FLAG_CHECK_TOL:
                raise ValueError(f"declared unitary but deviates by {dev:.2e}")
        if self.hermitian:
            dev = np.max(np.abs(mat - mat.conj().T))
            if dev > FLAG_CHECK_TOL:
                raise ValueError(f"declared hermitian but deviates by {dev:.2e}")
        object.__setattr__(self, "support", sup)
        object.__setattr__(self, "matrix", mat)

    def scaled(self, factor: complex) -> "LocalOperator":
        return LocalOperator(self.support, factor * self.matrix)


OperatorSum = Sequence[LocalOperator]


def _check_support(state: StateVector, op: LocalOperator) -> None:
    for w in op.support:
        if not 0 <= w < state.n_wires:
            raise ShapeError(f"support wire {w} out of range")
    d_op = math.prod(state.site_dims[w] for w in op.support)
    if op.matrix.shape[0] != d_op:
        raise ShapeError(
            f"operator dim {op.matrix.shape[0]} but support dims give {d_op}"
        )


def _apply_matrix(tensor: np.ndarray, support: tuple[int, ...],
                  matrix: np.ndarray) -> np.ndarray:
    k = len(support)
    moved = np.moveaxis(tensor, support, range(k))
    head = moved.reshape(matrix.shape[0], -1)
    out = (matrix @ head).reshape(moved.shape)
    return np.moveaxis(out, range(k), support)


def apply_local(state: StateVector, op: LocalOperator) -> StateVector:
    """Contract ``op`` into its support wires; all other wires untouched."""
    _check_support(state, op)
    out = _apply_matrix(state.tensor(), op.support, op.matrix)
    return state.with_amplitudes(out.reshape(-1))


def apply_terms(state: StateVector, terms: OperatorSum) -> np.ndarray:
    """Raw amplitudes of ``sum(terms) @ state`` (no normalization)."""
    acc = np.zeros_like(state.amplitudes)
    tens = state.tensor()
    for term in terms:
        _check_support(state, term)
        acc += _apply_matrix(tens, term.support, term.matrix).reshape(-1)
    return acc


def controlled_apply(state: StateVector, control: int,
                     ops: Sequence[LocalOperator]) -> StateVector:
    """Apply the ordered product of ``ops`` on the control-1 slice.

    The slice becomes ``ops[0] @ ops[1] @ ... @ state_slice``, i.e. the last
    listed operator acts first, matching operator-product notation.
    """
    if state.site_dims[control] != 2:
        raise ShapeError("control wire must be a qubit")
    for op in ops:
        if control in op.support:
            raise ShapeError("control wire inside an op support")
        _check_support(state, op)
    arr = np.moveaxis(state.tensor(), control, 0).copy()
    remap = lambda w: w if w < control else w - 1
    slice1 = arr[1]
    for op in reversed(ops):
        sup = tuple(remap(w) for w in op.support)
        slice1 = _apply_matrix(slice1, sup, op.matrix)
    arr[1] = slice1
    out = np.moveaxis(arr, 0, control)
    return state.with_amplitudes(out.reshape(-1))


@dataclass(frozen=True)
class DiagonalProjector:
    """Projector diagonal in the computational basis (boolean mask)."""

    label: int
    mask: np.ndarray

    def project(self, state: StateVector) -> np.ndarray:
        return state.amplitudes * self.mask


@dataclass(frozen=True)
class SupportProjector:
    """Dense projector on a subset of wires."""

    label: int
    op: LocalOperator

    def project(self, state: StateVector) -> np.ndarray:
        return apply_local(state, self.op).amplitudes


Projector = Union[DiagonalProjector, SupportProjector]


@dataclass(frozen=True)
class MeasurementOutcome:
    outcome_index: int
    probability: float
    post_state: StateVector


def _verify_resolution(state: StateVector, projectors: Sequence[Projector]) -> None:
    if all(isinstance(p, DiagonalProjector) for p in projectors):
        total = sum(p.mask.astype(float) for p in projectors)
        if np.max(np.abs(total - 1.0)) > RESOLUTION_TOL:
            raise ValueError("projectors are not a resolution of identity")
        return
    if all(isinstance(p, SupportProjector) for p in projectors):
        supports = {p.op.support for p in projectors}
        if len(supports) == 1:
            total = sum(p.op.matrix for p in projectors)
            dev = np.max(np.abs(total - np.eye(total.shape[0])))
            if dev > RESOLUTION_TOL:
                raise ValueError("projectors are not a resolution of identity")
            return
    # Mixed families: fall back to checking completeness on the given state.
    total = sum(np.linalg.norm(p.project(state)) ** 2 for p in projectors)
    if abs(total - 1.0) > RESOLUTION_TOL:
        raise ValueError("projectors are not a resolution of identity on this state")


def born_measure(state: StateVector, projectors: Sequence[Projector],
                 rng: np.random.Generator) -> MeasurementOutcome:
    """Sample one projective outcome with Born probabilities.

    Deterministic given the rng stream.  The post state is the normalized
    projection.  Raises :class:`MeasurementFloorError` if the sampled sector
    has probability below ``SECTOR_FLOOR``.
    """
    _verify_resolution(state, projectors)
    branches = [p.project(state) for p in projectors]
    probs = np.array([float(np.vdot(b, b).real) for b in branches])
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"branch probabilities sum to {total}, state not normalized?")
    u = rng.random() * total
    acc = 0.0
    idx = len(probs) - 1
    for i, p in enumerate(probs):
        acc += p
        if u < acc:
            idx = i
            break
    p = probs[idx]
    if p < SECTOR_FLOOR:
        raise MeasurementFloorError(f"sampled sector with probability {p:.3e}")
    post = state.with_amplitudes(branches[idx] / math.sqrt(p))
    label = getattr(projectors[idx], "label", idx)
    return MeasurementOutcome(label, float(p), post)


def inner(a: StateVector, b: StateVector) -> complex:
    """Inner product, conjugate-linear in ``a``."""
    if a.site_dims != b.site_dims:
        raise ShapeError(f"site dims differ: {a.site_dims} vs {b.site_dims}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for normalized inputs."""
    return abs(inner(a, b)) ** 2


def schmidt_entropy(state: StateVector, cut: int) -> float:
    """Von Neumann entropy (nats) across the contiguous cut ``[0, cut)``."""
    if not 0 < cut < state.n_wires:
        raise ShapeError("cut must leave both sides nonempty")
    d_left = math.prod(state.site_dims[:cut])
    mat = state.amplitudes.reshape(d_left, -1)
    s = np.linalg.svd(mat, compute_uv=False)
    p = s**2
    p = p / p.sum()
    p = p[p > 1e-16]
    return float(-np.sum(p * np.log(p)))


def reduced_density_matrix(state: StateVector, cut: int) -> np.ndarray:
    """Left-block reduced density matrix, the independent oracle path."""
    d_left = math.prod(state.site_dims[:cut])
    mat = state.amplitudes.reshape(d_left, -1)
    rho = mat @ mat.conj().T
    return rho / np.trace(rho).real


def qfi(state: StateVector, generator: OperatorSum | LocalOperator) -> float:
    """Pure-state quantum Fisher information: 4 * Var(generator)."""
    terms = [generator] if isinstance(generator, LocalOperator) else list(generator)
    for t in terms:
        dev = np.max(np.abs(t.matrix - t.matrix.conj().T))
        if dev > FLAG_CHECK_TOL:
            raise ValueError(f"generator term not hermitian (deviation {dev:.2e})")
    g_psi = apply_terms(state, terms)
    mean = float(np.vdot(state.amplitudes, g_psi).real)
    second = float(np.vdot(g_psi, g_psi).real)
    return 4.0 * (second - mean**2)
