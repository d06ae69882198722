"""Matrix product unitaries, operator pushing, and the gluing check.

An MPU site tensor has legs ``data[l, r, i, o]`` (left bond, right bond,
physical in, physical out); the chain closes periodically by a trace.

Correctability: a bond Pauli error P left behind by a Bell measurement is
correctable if it can be pushed through a site tensor into a unitary
correction U_P on the physical output leg plus a residual bond Pauli.  The
solver tries both pushing directions and all bond-Pauli candidates for the
residual, solving U_P by least squares; phases are absorbed into U_P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import match_pauli_phase, pauli_labels, pauli_matrix, pauli_name
from .statevector import check_size

PUSH_TOL = 1e-8
GLUE_TOL = 1e-8
UNITARY_TOL = 1e-8


@dataclass(frozen=True)
class PauliLabel:
    a: int
    b: int

    def matrix(self, d: int) -> np.ndarray:
        return pauli_matrix(self.a, self.b, d)

    @property
    def name(self) -> str:
        return pauli_name(self.a, self.b)

    def is_identity(self) -> bool:
        return (self.a, self.b) == (0, 0)


@dataclass(frozen=True)
class MPU:
    name: str
    tensor: np.ndarray  # [l, r, i, o], same tensor on every site

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=np.complex128)
        if t.ndim != 4 or t.shape[0] != t.shape[1] or t.shape[2] != t.shape[3]:
            raise ValueError("MPU tensor must have square bond and physical legs")
        object.__setattr__(self, "tensor", t)

    @property
    def bond_dim(self) -> int:
        return self.tensor.shape[0]

    @property
    def phys_dim(self) -> int:
        return self.tensor.shape[2]


@dataclass(frozen=True)
class CorrectionEntry:
    error: PauliLabel
    correctable: bool
    phys_correction: np.ndarray | None
    phys_correction_label: str | None
    pushed_pauli: PauliLabel | None
    residual: float
    direction: str | None  # "left-to-right" | "right-to-left"


@dataclass(frozen=True)
class CorrectionTable:
    mpu_name: str
    d: int
    entries: dict[tuple[int, int], CorrectionEntry]

    def all_correctable(self) -> bool:
        return all(e.correctable for e in self.entries.values())

    def entry(self, a: int, b: int) -> CorrectionEntry:
        return self.entries[(a % self.d, b % self.d)]


def mpu_to_dense(mpu: MPU, L: int) -> np.ndarray:
    """Full operator of the closed chain (rows = out, cols = in)."""
    d = mpu.phys_dim
    check_size((d**L) ** 2 * mpu.bond_dim**2)
    # acc[(in prefix), (out prefix), l0, r]
    chi = mpu.bond_dim
    acc = np.eye(chi, dtype=np.complex128).reshape(1, 1, chi, chi)
    for _ in range(L):
        acc = np.tensordot(acc, mpu.tensor, axes=([3], [0]))
        # acc[in prefix, out prefix, l0, r, i, o] -> merge i into rows, o into cols
        acc = np.moveaxis(acc, (4, 5), (1, 3))
        p, i, q, o, l0, r = acc.shape
        acc = acc.reshape(p * i, q * o, l0, r)
    mat = np.trace(acc, axis1=2, axis2=3)
    return mat.T  # rows indexed by output configuration


def mpu_is_unitary(mpu: MPU, L: int, tol: float = 1e-10) -> bool:
    mat = mpu_to_dense(mpu, L)
    dev = np.max(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0])))
    return bool(dev <= tol)


def builtin_mpus(d: int = 2) -> dict[str, MPU]:
    """Identity, one-site translation, and (for qubits) the X-CZ circuit MPU."""
    ident = np.zeros((1, 1, d, d), dtype=np.complex128)
    ident[0, 0] = np.eye(d)

    # bond carries the input; site k outputs what site k+1 received
    trans = np.zeros((d, d, d, d), dtype=np.complex128)
    for i in range(d):
        for o in range(d):
            trans[i, o, i, o] = 1.0

    out = {"identity": MPU("identity", ident), "translation": MPU("translation", trans)}
    if d == 2:
        # product of a CZ layer then an X layer; the bond carries the input
        # value so each site can attach the phase (-1)^{l * i} with its left
        # neighbor before flipping
        czx = np.zeros((2, 2, 2, 2), dtype=np.complex128)
        for l in range(2):
            for i in range(2):
                czx[l, i, i, 1 - i] = (-1.0) ** (l * i)
        out["czx"] = MPU("czx", czx)
    return out


def _push_residual(tensor: np.ndarray, error: np.ndarray, pushed: np.ndarray,
                   direction: str) -> tuple[np.ndarray, float]:
    """Solve for the physical-leg correction in one pushing direction.

    left-to-right:  (P on left) T  ==  U_P (T with residual on right)
    right-to-left:  T (P on right)  ==  U_P (residual on left) T
    The returned residual is relative to the Frobenius norm of the left side.
    """
    if direction == "left-to-right":
        lhs = np.einsum("lm,mrio->lrio", error, tensor)
        rhs = np.einsum("lmio,mr->lrio", tensor, pushed)
    else:
        lhs = np.einsum("lmio,mr->lrio", tensor, error)
        rhs = np.einsum("lm,mrio->lrio", pushed, tensor)
    d = tensor.shape[2]
    # flatten everything but the physical output leg
    a = np.moveaxis(lhs, 3, 0).reshape(d, -1)
    k = np.moveaxis(rhs, 3, 0).reshape(d, -1)
    u, res, _, _ = np.linalg.lstsq(k.conj().T, a.conj().T, rcond=None)
    u_p = u.conj().T
    scale = np.linalg.norm(a)
    misfit = np.linalg.norm(u_p @ k - a) / (scale if scale > 0 else 1.0)
    return u_p, float(misfit)


def mpu_correctable(mpu: MPU) -> CorrectionTable:
    """Pushing table for every bond Pauli error.

    Residual-Pauli candidates are tried in lexicographic order; the first
    candidate whose least-squares correction is unitary and fits within
    ``PUSH_TOL`` wins.  Directions are tried left-to-right first.
    """
    d = mpu.phys_dim
    chi = mpu.bond_dim
    entries: dict[tuple[int, int], CorrectionEntry] = {}
    for a, b in pauli_labels(chi):
        err_label = PauliLabel(a, b)
        if err_label.is_identity():
            entries[(a, b)] = CorrectionEntry(
                err_label, True, np.eye(d, dtype=complex), "I",
                PauliLabel(0, 0), 0.0, None,
            )
            continue
        err = pauli_matrix(a, b, chi)
        candidates: list[tuple[int, int, CorrectionEntry]] = []
        for dir_rank, direction in enumerate(("left-to-right", "right-to-left")):
            for pa, pb in pauli_labels(chi):
                pushed = pauli_matrix(pa, pb, chi)
                u_p, misfit = _push_residual(mpu.tensor, err, pushed, direction)
                if misfit > PUSH_TOL:
                    continue
                uni_dev = np.max(np.abs(u_p @ u_p.conj().T - np.eye(d)))
                if uni_dev > UNITARY_TOL:
                    continue
                label = match_pauli_phase(u_p)
                trivial = 0 if label == (0, 0) else 1
                entry = CorrectionEntry(
                    err_label, True, u_p,
                    pauli_name(*label) if label else None,
                    PauliLabel(pa, pb), misfit, direction,
                )
                candidates.append((trivial, dir_rank, entry))
        # prefer a trivial physical correction (only the pushed Pauli moves
        # on), then pushing direction, then lexicographic residual Pauli
        best = min(candidates, key=lambda c: c[:2])[2] if candidates else None
        if best is None:
            entries[(a, b)] = CorrectionEntry(
                err_label, False, None, None, None, float("inf"), None
            )
        else:
            entries[(a, b)] = best
    return CorrectionTable(mpu.name, chi, entries)


def _sandwich(tensor: np.ndarray, left: np.ndarray | None,
              right: np.ndarray | None) -> np.ndarray:
    """Two-layer transfer object with bond insertions on both layers.

    The same bond operators dress the tensor and its conjugate, mirroring
    the diagrammatic identity with the operator row and its dagger row.
    """
    t = tensor
    if left is not None:
        t = np.einsum("lm,mrio->lrio", left, t)
    if right is not None:
        t = np.einsum("lmio,mr->lrio", t, right)
    e = np.einsum("lrio,LRio->lLrR", t, t.conj())
    chi = tensor.shape[0]
    return e.reshape(chi * chi, chi * chi)


def mpu_glueable(mpu: MPU) -> tuple[bool, dict[tuple[int, int], float]]:
    """Gluing identity: for each bond Pauli error there must exist a residual
    Pauli such that sandwiching both between the tensor and its conjugate
    leaves the two-layer transfer object unchanged."""
    chi = mpu.bond_dim
    base = _sandwich(mpu.tensor, None, None)
    scale = np.linalg.norm(base)
    results: dict[tuple[int, int], float] = {}
    ok = True
    for a, b in pauli_labels(chi):
        if (a, b) == (0, 0):
            results[(a, b)] = 0.0
            continue
        err = pauli_matrix(a, b, chi)
        best = float("inf")
        for pa, pb in pauli_labels(chi):
            pushed = pauli_matrix(pa, pb, chi)
            for left, right in ((pushed, err), (err, pushed)):
                dev = np.linalg.norm(_sandwich(mpu.tensor, left, right) - base)
                best = min(best, dev / scale)
        results[(a, b)] = best
        if best > GLUE_TOL:
            ok = False
    return ok, results


def mpu_from_json_dict(payload: dict) -> MPU:
    arr = np.asarray(payload["tensor_re"], dtype=float) + 1j * np.asarray(
        payload.get("tensor_im", np.zeros_like(np.asarray(payload["tensor_re"]))),
        dtype=float,
    )
    return MPU(payload.get("name", "custom"), arr)


def correction_table_to_json(table: CorrectionTable) -> dict:
    rows = []
    for (a, b), e in sorted(table.entries.items()):
        rows.append(
            {
                "error": pauli_name(a, b),
                "correctable": e.correctable,
                "phys_correction": e.phys_correction_label,
                "pushed": e.pushed_pauli.name if e.pushed_pauli else None,
                "residual": None if math.isinf(e.residual) else e.residual,
                "direction": e.direction,
            }
        )
    return {"mpu": table.mpu_name, "bond_dim": table.d, "entries": rows}
