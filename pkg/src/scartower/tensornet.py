"""MPS / MPO chains and exact dense contraction.

Tensors follow the layout ``MPSTensor.data[phys][left][right]`` and
``MPOTensor.data[out][in][left][right]``.  Contraction is a left-to-right
accumulation of the boundary slice, which keeps memory at
O(amplitudes * bond^2) and is deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .statevector import StateVector, check_size


@dataclass(frozen=True)
class MPSTensor:
    site: int
    data: np.ndarray  # [phys][left][right]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 3:
            raise ValueError("MPS tensor must have shape [phys][left][right]")
        object.__setattr__(self, "data", data)

    @property
    def phys_dim(self) -> int:
        return self.data.shape[0]

    @property
    def left_dim(self) -> int:
        return self.data.shape[1]

    @property
    def right_dim(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class MPS:
    tensors: tuple[MPSTensor, ...]
    boundary: str  # "periodic" | "open"
    left_vector: np.ndarray | None = None
    right_vector: np.ndarray | None = None

    def __post_init__(self):
        tensors = tuple(self.tensors)
        if not tensors:
            raise ValueError("empty MPS")
        for a, b in zip(tensors, tensors[1:]):
            if a.right_dim != b.left_dim:
                raise ValueError(f"bond mismatch between sites {a.site} and {b.site}")
        if self.boundary == "periodic":
            if tensors[0].left_dim != tensors[-1].right_dim:
                raise ValueError("periodic MPS needs matching outer bonds")
        elif self.boundary == "open":
            lv = np.asarray(self.left_vector, dtype=np.complex128)
            rv = np.asarray(self.right_vector, dtype=np.complex128)
            if lv.shape != (tensors[0].left_dim,):
                raise ValueError("left boundary vector has wrong length")
            if rv.shape != (tensors[-1].right_dim,):
                raise ValueError("right boundary vector has wrong length")
            object.__setattr__(self, "left_vector", lv)
            object.__setattr__(self, "right_vector", rv)
        else:
            raise ValueError(f"unknown boundary kind {self.boundary!r}")
        object.__setattr__(self, "tensors", tensors)

    @property
    def length(self) -> int:
        return len(self.tensors)

    @property
    def site_dims(self) -> tuple[int, ...]:
        return tuple(t.phys_dim for t in self.tensors)

    def max_bond(self) -> int:
        return max(t.right_dim for t in self.tensors)


@dataclass(frozen=True)
class MPOTensor:
    site: int
    data: np.ndarray  # [out][in][left][right]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        if data.ndim != 4:
            raise ValueError("MPO tensor must have shape [out][in][left][right]")
        object.__setattr__(self, "data", data)


@dataclass(frozen=True)
class MPO:
    tensors: tuple[MPOTensor, ...]
    boundary: str = "open"
    left_vector: np.ndarray | None = None
    right_vector: np.ndarray | None = None

    def __post_init__(self):
        tensors = tuple(self.tensors)
        for a, b in zip(tensors, tensors[1:]):
            if a.data.shape[3] != b.data.shape[2]:
                raise ValueError(f"MPO bond mismatch at site {a.site}")
        if self.boundary == "open":
            lv = np.asarray(self.left_vector, dtype=np.complex128)
            rv = np.asarray(self.right_vector, dtype=np.complex128)
            object.__setattr__(self, "left_vector", lv)
            object.__setattr__(self, "right_vector", rv)
        elif self.boundary != "periodic":
            raise ValueError(f"unknown boundary kind {self.boundary!r}")
        object.__setattr__(self, "tensors", tensors)

    @property
    def length(self) -> int:
        return len(self.tensors)


def contract_to_statevector(mps: MPS) -> StateVector:
    """Dense amplitudes of the chain contraction (not normalized)."""
    dims = mps.site_dims
    total = math.prod(dims)
    chi0 = mps.tensors[0].left_dim
    check_size(total)
    check_size(total * chi0 * mps.max_bond())
    if mps.boundary == "open":
        acc = mps.left_vector.reshape(1, -1)  # [config][bond]
        for t in mps.tensors:
            acc = np.einsum("cl,plr->cpr", acc, t.data).reshape(-1, t.right_dim)
        amps = acc @ mps.right_vector
    else:
        eye = np.eye(chi0, dtype=np.complex128)
        acc = eye.reshape(1, chi0, chi0)  # [config][first bond][running bond]
        for t in mps.tensors:
            acc = np.einsum("car,prs->cpas", acc, t.data)
            acc = acc.reshape(-1, chi0, t.right_dim)
        amps = np.trace(acc, axis1=1, axis2=2)
    return StateVector(dims, amps)


def apply_mpo_to_state(mpo: MPO, state: StateVector) -> StateVector:
    """Exact action of the MPO on a dense state, site by site."""
    if mpo.length != state.n_wires:
        raise ValueError("MPO length does not match the state")
    dims = state.site_dims
    if mpo.boundary != "open":
        raise NotImplementedError("dense MPO application implemented for open chains")
    # acc[(out prefix), bond, (in suffix)]
    acc = state.amplitudes.reshape(1, 1, -1) * mpo.left_vector.reshape(1, -1, 1)
    for j, t in enumerate(mpo.tensors):
        d_in = dims[j]
        suffix = acc.shape[2] // d_in
        acc = acc.reshape(acc.shape[0], acc.shape[1], d_in, suffix)
        acc = np.einsum("pwds,mdwv->pmvs", acc, t.data)
        acc = acc.reshape(acc.shape[0] * acc.shape[1], acc.shape[2], suffix)
    amps = np.einsum("pw,w->p", acc[:, :, 0], mpo.right_vector)
    return StateVector(dims, amps, state.labels)


def apply_mpo_to_mps(mpo: MPO, mps: MPS) -> MPS:
    """MPO times MPS; bond dimensions multiply."""
    if mpo.length != mps.length:
        raise ValueError("length mismatch")
    if mpo.boundary != mps.boundary:
        raise ValueError("boundary kinds must match")
    tensors = []
    for w, t in zip(mpo.tensors, mps.tensors):
        data = np.einsum("mdwv,dlr->mwlvr", w.data, t.data)
        m, wl, l, wr, r = data.shape
        tensors.append(MPSTensor(t.site, data.reshape(m, wl * l, wr * r)))
    if mps.boundary == "open":
        lv = np.kron(mpo.left_vector, mps.left_vector)
        rv = np.kron(mpo.right_vector, mps.right_vector)
        return MPS(tuple(tensors), "open", lv, rv)
    return MPS(tuple(tensors), "periodic")


def build_resource_mps(model, L: int, w: float) -> MPS:
    """Resource chain for a registered model family at weight ``w``.

    ``w = 0`` is accepted as the degenerate no-excitation input.
    """
    if not 0.0 <= w < 1.0:
        raise ValueError(f"weight w must lie in [0, 1), got {w}")
    builder = getattr(model, "resource_mps", None)
    if builder is None:
        raise ValueError(f"model {model!r} lacks a registered resource construction")
    return builder(L, w)


def mpo_from_product(model, L: int, w: float) -> MPO:
    """MPO equal to the ordered product of the model's excitation factors."""
    if not 0.0 <= w < 1.0:
        raise ValueError(f"weight w must lie in [0, 1), got {w}")
    builder = getattr(model, "product_mpo", None)
    if builder is None:
        raise ValueError(f"model {model!r} lacks a registered product MPO")
    return builder(L, w)


def _complex_to_json(arr: np.ndarray):
    stacked = np.stack([arr.real, arr.imag], axis=-1)
    return stacked.tolist()


def _complex_from_json(payload) -> np.ndarray:
    arr = np.asarray(payload, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def mps_to_json_dict(mps: MPS) -> dict:
    out = {
        "boundary": mps.boundary,
        "tensors": [
            {"site": t.site, "data": _complex_to_json(t.data)} for t in mps.tensors
        ],
    }
    if mps.boundary == "open":
        out["left_vector"] = _complex_to_json(mps.left_vector)
        out["right_vector"] = _complex_to_json(mps.right_vector)
    return out


def mps_from_json_dict(payload: dict) -> MPS:
    tensors = tuple(
        MPSTensor(entry["site"], _complex_from_json(entry["data"]))
        for entry in payload["tensors"]
    )
    if payload["boundary"] == "open":
        return MPS(
            tensors,
            "open",
            _complex_from_json(payload["left_vector"]),
            _complex_from_json(payload["right_vector"]),
        )
    return MPS(tensors, "periodic")
