"""Registry of the supported spin-chain families.

Each family bundles its Hamiltonian, global charge, excitation creation
operator, base state and resource-chain constructions.  Conventions:

* local basis index 0 is the lowest Sz level (|0> is spin-down / Sz = -1),
* site indices in phase factors are 1-based, so a momentum-pi family weights
  site j (1-based) with (-1)^j,
* charge increments q are the exact commutator charges [Q, J+] = q J+.

The domain-wall family is open-boundary with excitations restricted to
interior sites 2..L-1 (1-based); that is the counting under which its
closed-form outcome distribution is exact.  The Hamiltonian's edge terms use
fixed virtual spin-down neighbors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .statevector import (
    LocalOperator,
    StateVector,
    apply_terms,
    basis_state,
    check_size,
    inner,
    product_state,
)
from .tensornet import MPO, MPS, MPOTensor, MPSTensor, contract_to_statevector

# Qubit operators in the |0> = down convention.
SZ2 = np.diag([-1.0, 1.0]).astype(complex)
SP2 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
SM2 = SP2.T.conj()
SX2 = SP2 + SM2
SY2 = -1j * (SP2 - SM2)
P_DOWN = np.diag([1.0, 0.0]).astype(complex)
I2 = np.eye(2, dtype=complex)

# Spin-1 operators, basis |0>,|1>,|2> = Sz -1,0,+1.
SZ3 = np.diag([-1.0, 0.0, 1.0]).astype(complex)
SP3 = np.zeros((3, 3), dtype=complex)
SP3[1, 0] = math.sqrt(2.0)
SP3[2, 1] = math.sqrt(2.0)
SM3 = SP3.T.conj()
SX3 = (SP3 + SM3) / 2.0
SY3 = (SP3 - SM3) / 2.0j
I3 = np.eye(3, dtype=complex)

SS_BOND = np.kron(SX3, SX3) + np.kron(SY3, SY3) + np.kron(SZ3, SZ3)
# Projector onto total spin 2 of a spin-1 pair; the AKLT bond term.
AKLT_BOND = np.eye(9, dtype=complex) / 3.0 + SS_BOND / 2.0 + (SS_BOND @ SS_BOND) / 6.0

TOWER_ZERO_TOL = 1e-24


def _kron(*mats: np.ndarray) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


@dataclass(frozen=True)
class ModelSpec:
    """A model family; the L-dependent pieces are builder callables."""

    name: str
    d: int
    k: float  # excitation momentum (pi or 0)
    q: int  # charge increment per excitation
    boundary: str
    couplings: dict
    tower_spacing: float | None
    charge_origin: Callable[[int], float]
    tower_max: Callable[[int], int]
    hamiltonian: Callable[[int], list[LocalOperator]]
    charge: Callable[[int], list[LocalOperator]]
    creation: Callable[[int], list[LocalOperator]]
    base: Callable[[int], StateVector]
    resource_mps: Callable[[int, float], MPS]
    product_mpo: Callable[[int, float], MPO]
    even_length_only: bool = False

    def check_length(self, L: int) -> None:
        if L < 2:
            raise ValueError("chain length must be at least 2")
        if self.even_length_only and L % 2:
            raise ValueError(f"model {self.name} requires even L, got {L}")


@dataclass(frozen=True)
class TowerState:
    n: int
    energy: float | None
    state: StateVector | None
    norm_sq_raw: float
    residual: float | None
    annihilated: bool = False


def _phase_pi(site_one_based: int) -> float:
    return -1.0 if site_one_based % 2 else 1.0


# ---------------------------------------------------------------------------
# AKLT chain (spin 1, periodic)

AKLT_A = np.zeros((3, 2, 2), dtype=complex)
AKLT_A[0] = -math.sqrt(2.0 / 3.0) * np.array([[0, 0], [1, 0]])  # sigma-
AKLT_A[1] = -math.sqrt(1.0 / 3.0) * np.array([[1, 0], [0, -1]])  # sigma z
AKLT_A[2] = math.sqrt(2.0 / 3.0) * np.array([[0, 1], [0, 0]])  # sigma+

AKLT_CREATE = np.zeros((3, 3), dtype=complex)
AKLT_CREATE[2, 0] = 1.0  # (S+)^2 / 2 = |2><0|

# Modified tensor of the resource chain: B[s] = sum_t <s|O|t> A[t].
AKLT_B = np.zeros((3, 2, 2), dtype=complex)
AKLT_B[2] = AKLT_A[0]


def aklt_ground_mps(L: int) -> MPS:
    return MPS(tuple(MPSTensor(i, AKLT_A) for i in range(L)), "periodic")


def _aklt_base(L: int) -> StateVector:
    return contract_to_statevector(aklt_ground_mps(L)).normalize()


def _aklt_hamiltonian(L: int) -> list[LocalOperator]:
    return [
        LocalOperator((i, (i + 1) % L), AKLT_BOND, hermitian=True) for i in range(L)
    ]


def _onsite_charge(op: np.ndarray) -> Callable[[int], list[LocalOperator]]:
    def build(L: int) -> list[LocalOperator]:
        return [LocalOperator((i,), op, hermitian=True) for i in range(L)]

    return build


def _aklt_creation(L: int) -> list[LocalOperator]:
    return [
        LocalOperator((i,), _phase_pi(i + 1) * AKLT_CREATE) for i in range(L)
    ]


def _aklt_resource(L: int, w: float) -> MPS:
    tensors = []
    for i in range(L):
        data = math.sqrt(1.0 - w) * AKLT_A + _phase_pi(i + 1) * math.sqrt(w) * AKLT_B
        tensors.append(MPSTensor(i, data))
    return MPS(tuple(tensors), "periodic")


def _single_site_mpo(L: int, w: float, create: np.ndarray, d: int,
                     staggered: bool) -> MPO:
    tensors = []
    for i in range(L):
        phase = _phase_pi(i + 1) if staggered else 1.0
        mat = math.sqrt(1.0 - w) * np.eye(d) + phase * math.sqrt(w) * create
        tensors.append(MPOTensor(i, mat.reshape(d, d, 1, 1)))
    one = np.ones(1)
    return MPO(tuple(tensors), "open", one, one)


def _aklt_mpo(L: int, w: float) -> MPO:
    return _single_site_mpo(L, w, AKLT_CREATE, 3, staggered=True)


# ---------------------------------------------------------------------------
# Spin-1/2 XX chain (Onsager tower, open boundary)


def _xx_hamiltonian(L: int) -> list[LocalOperator]:
    J = 1.0
    bond = J * (np.kron(SX2, SX2) + np.kron(SY2, SY2))
    return [LocalOperator((i, i + 1), bond, hermitian=True) for i in range(L - 1)]


def _xx_creation(L: int) -> list[LocalOperator]:
    return [
        LocalOperator((i, i + 1), _phase_pi(i + 1) * np.kron(SP2, SP2))
        for i in range(L - 1)
    ]


def _down_product(L: int, d: int) -> StateVector:
    return basis_state([d] * L, [0] * L)


def _xx_resource(L: int, w: float) -> MPS:
    """The paper-form chi = 2 tensors, boundary vectors pinning bond state 0."""
    tensors = []
    for i in range(L):
        data = np.zeros((2, 2, 2), dtype=complex)
        data[0, 0, 0] = math.sqrt(1.0 - w)
        data[1, 1, 0] = math.sqrt(1.0 - w)
        data[1, 0, 1] = _phase_pi(i + 1) * math.sqrt(w)
        tensors.append(MPSTensor(i, data))
    e0 = np.array([1.0, 0.0])
    return MPS(tuple(tensors), "open", e0, e0)


def _xx_mpo(L: int, w: float) -> MPO:
    """Staircase MPO for the product of L-1 commuting two-site factors.

    Bond state 1 means "a pair was opened here, close it on the next site".
    The idle weight sqrt(1-w) of factor j is emitted at site j, so the
    contraction reproduces the operator product exactly, not just up to
    normalization.
    """
    root_w = math.sqrt(w)
    root_1w = math.sqrt(1.0 - w)
    tensors = []
    for i in range(L):
        has_factor = i < L - 1  # factor j = i+1 pairs sites (i, i+1)
        a = root_1w if has_factor else 1.0
        data = np.zeros((2, 2, 2, 2), dtype=complex)
        data[:, :, 0, 0] = a * I2
        data[:, :, 1, 0] = a * SP2
        if has_factor:
            data[:, :, 0, 1] = _phase_pi(i + 1) * root_w * SP2
        tensors.append(MPOTensor(i, data))
    e0 = np.array([1.0, 0.0])
    return MPO(tuple(tensors), "open", e0, e0)


# ---------------------------------------------------------------------------
# Constrained domain-wall chain (open boundary, interior excitations)


def _dw_couplings() -> dict:
    return {"lam": 1.0, "h": 1.0, "J": 1.0}


def _dw_hamiltonian(L: int) -> list[LocalOperator]:
    """Open chain with interior flip terms and virtual spin-down edges.

    The constrained flips sigma^x_j (1 - sz_{j-1} sz_{j+1}) act on interior
    sites only: an edge flip has no mirror partner on the open chain, and
    keeping it would spoil the staggered cancellation that makes the
    excitation tower exact.  Diagonal terms keep the fixed virtual
    spin-down neighbors (they shift tower energies by a constant).
    """
    c = _dw_couplings()
    lam, h, J = c["lam"], c["h"], c["J"]
    terms: list[LocalOperator] = []
    for i in range(1, L - 1):
        terms.append(LocalOperator((i,), lam * SX2, hermitian=True))
        terms.append(
            LocalOperator((i - 1, i, i + 1), -lam * _kron(SZ2, SX2, SZ2),
                          hermitian=True)
        )
    for i in range(L):
        terms.append(LocalOperator((i,), h * SZ2, hermitian=True))
    for i in range(L - 1):
        terms.append(LocalOperator((i, i + 1), J * np.kron(SZ2, SZ2), hermitian=True))
    # virtual edge bonds J sz_0 sz_1 and J sz_L sz_{L+1}
    terms.append(LocalOperator((0,), -J * SZ2, hermitian=True))
    terms.append(LocalOperator((L - 1,), -J * SZ2, hermitian=True))
    return terms


def _dw_charge(L: int) -> list[LocalOperator]:
    wall = (np.eye(4, dtype=complex) - np.kron(SZ2, SZ2)) / 2.0
    return [LocalOperator((i, i + 1), wall, hermitian=True) for i in range(L - 1)]


def _dw_creation(L: int) -> list[LocalOperator]:
    return [
        LocalOperator((i - 1, i, i + 1), _phase_pi(i + 1) * _kron(P_DOWN, SP2, P_DOWN))
        for i in range(1, L - 1)
    ]


def _dw_resource(L: int, w: float) -> MPS:
    """Flip-committing chain; bond 1 means "emit the up spin next".

    The commit entry lives one site before the excitation, so its phase is
    (-1)^i at 0-based site i, which matches the (-1)^j factor of the j-indexed
    excitation product.  Commits are disabled on the last two sites to keep
    excitations interior.
    """
    tensors = []
    for i in range(L):
        data = np.zeros((2, 2, 2), dtype=complex)
        data[0, 0, 0] = math.sqrt(1.0 - w)
        data[1, 1, 0] = math.sqrt(1.0 - w)
        if i <= L - 3:
            data[0, 0, 1] = (1.0 if i % 2 == 0 else -1.0) * math.sqrt(w)
        tensors.append(MPSTensor(i, data))
    e0 = np.array([1.0, 0.0])
    return MPS(tuple(tensors), "open", e0, e0)


def _dw_mpo(L: int, w: float) -> MPO:
    """Bond-3 staircase for the product of projector-sandwiched flips.

    States: 0 free, 1 "emit the flip now", 2 "emit the trailing projector".
    Factors overlap benignly on shared projectors (2 -> 1 transition).
    """
    root_w = math.sqrt(w)
    root_1w = math.sqrt(1.0 - w)
    tensors = []
    for i in range(L):
        has_factor = 1 <= i <= L - 2  # excitation allowed at this site
        can_commit = i <= L - 3  # next site may host an excitation
        a = root_1w if has_factor else 1.0
        c = _phase_pi(i + 1) * root_w
        data = np.zeros((2, 2, 3, 3), dtype=complex)
        data[:, :, 0, 0] = a * I2
        data[:, :, 1, 2] = c * SP2 if has_factor else 0.0
        data[:, :, 2, 0] = a * P_DOWN
        if can_commit:
            data[:, :, 0, 1] = a * P_DOWN
            data[:, :, 2, 1] = a * P_DOWN
        tensors.append(MPOTensor(i, data))
    e0 = np.array([1.0, 0.0, 0.0])
    return MPO(tuple(tensors), "open", e0, e0)


# ---------------------------------------------------------------------------
# Dicke ladder (spin 1/2, k = 0) and spin-1 XX chain (k = pi)


def _heisenberg_hamiltonian(L: int) -> list[LocalOperator]:
    bond = 0.25 * (np.kron(SX2, SX2) + np.kron(SY2, SY2) + np.kron(SZ2, SZ2))
    return [LocalOperator((i, (i + 1) % L), bond, hermitian=True) for i in range(L)]


def _dicke_creation(L: int) -> list[LocalOperator]:
    return [LocalOperator((i,), SP2) for i in range(L)]


def _dicke_resource(L: int, w: float) -> MPS:
    vec = np.array([math.sqrt(1.0 - w), math.sqrt(w)], dtype=complex)
    tensors = tuple(MPSTensor(i, vec.reshape(2, 1, 1)) for i in range(L))
    one = np.ones(1)
    return MPS(tensors, "open", one, one)


def _dicke_mpo(L: int, w: float) -> MPO:
    return _single_site_mpo(L, w, SP2, 2, staggered=False)


XX1_COUPLINGS = {"J": 1.0, "h": 10.0}
XX1_CREATE = np.zeros((3, 3), dtype=complex)
XX1_CREATE[2, 0] = 1.0  # (S+)^2 / 2


def _xx1_hamiltonian(L: int) -> list[LocalOperator]:
    J, h = XX1_COUPLINGS["J"], XX1_COUPLINGS["h"]
    bond = J * (np.kron(SX3, SX3) + np.kron(SY3, SY3))
    terms = [LocalOperator((i, (i + 1) % L), bond, hermitian=True) for i in range(L)]
    terms += [LocalOperator((i,), h * SZ3, hermitian=True) for i in range(L)]
    return terms


def _xx1_creation(L: int) -> list[LocalOperator]:
    return [LocalOperator((i,), _phase_pi(i + 1) * XX1_CREATE) for i in range(L)]


def _xx1_resource(L: int, w: float) -> MPS:
    tensors = []
    for i in range(L):
        vec = np.zeros(3, dtype=complex)
        vec[0] = math.sqrt(1.0 - w)
        vec[2] = _phase_pi(i + 1) * math.sqrt(w)
        tensors.append(MPSTensor(i, vec.reshape(3, 1, 1)))
    one = np.ones(1)
    return MPS(tuple(tensors), "open", one, one)


def _xx1_mpo(L: int, w: float) -> MPO:
    return _single_site_mpo(L, w, XX1_CREATE, 3, staggered=True)


# ---------------------------------------------------------------------------
# Registry

MODELS: dict[str, ModelSpec] = {
    "aklt": ModelSpec(
        name="aklt",
        d=3,
        k=math.pi,
        q=2,
        boundary="periodic",
        couplings={},
        tower_spacing=2.0,
        charge_origin=lambda L: 0.0,
        tower_max=lambda L: L // 2,
        hamiltonian=_aklt_hamiltonian,
        charge=_onsite_charge(SZ3),
        creation=_aklt_creation,
        base=_aklt_base,
        resource_mps=_aklt_resource,
        product_mpo=_aklt_mpo,
        even_length_only=True,
    ),
    "xx_spin_half": ModelSpec(
        name="xx_spin_half",
        d=2,
        k=math.pi,
        q=2,
        boundary="open",
        couplings={"J": 1.0},
        tower_spacing=0.0,
        charge_origin=lambda L: -L / 2.0,
        tower_max=lambda L: L // 2,
        hamiltonian=_xx_hamiltonian,
        charge=_onsite_charge(SZ2 / 2.0),
        creation=_xx_creation,
        base=lambda L: _down_product(L, 2),
        resource_mps=_xx_resource,
        product_mpo=_xx_mpo,
    ),
    "domain_wall": ModelSpec(
        name="domain_wall",
        d=2,
        k=math.pi,
        q=2,
        boundary="open",
        couplings=_dw_couplings(),
        tower_spacing=2.0 * _dw_couplings()["h"] - 4.0 * _dw_couplings()["J"],
        charge_origin=lambda L: 0.0,
        tower_max=lambda L: (L - 1) // 2,
        hamiltonian=_dw_hamiltonian,
        charge=_dw_charge,
        creation=_dw_creation,
        base=lambda L: _down_product(L, 2),
        resource_mps=_dw_resource,
        product_mpo=_dw_mpo,
    ),
    "dicke": ModelSpec(
        name="dicke",
        d=2,
        k=0.0,
        q=1,
        boundary="periodic",
        couplings={"J": 1.0},
        tower_spacing=0.0,
        charge_origin=lambda L: -L / 2.0,
        tower_max=lambda L: L,
        hamiltonian=_heisenberg_hamiltonian,
        charge=_onsite_charge(SZ2 / 2.0),
        creation=_dicke_creation,
        base=lambda L: _down_product(L, 2),
        resource_mps=_dicke_resource,
        product_mpo=_dicke_mpo,
    ),
    "xx_spin1": ModelSpec(
        name="xx_spin1",
        d=3,
        k=math.pi,
        q=2,
        boundary="periodic",
        couplings=dict(XX1_COUPLINGS),
        tower_spacing=2.0 * XX1_COUPLINGS["h"],
        charge_origin=lambda L: -float(L),
        tower_max=lambda L: L,
        hamiltonian=_xx1_hamiltonian,
        charge=_onsite_charge(SZ3),
        creation=_xx1_creation,
        base=lambda L: _down_product(L, 3),
        resource_mps=_xx1_resource,
        product_mpo=_xx1_mpo,
        even_length_only=True,
    ),
}


def model_names() -> list[str]:
    return sorted(MODELS)


def get_model(name: str) -> ModelSpec:
    try:
        return MODELS[name]
    except KeyError:
        raise ValueError(
            f"unknown model {name!r}; valid models: {', '.join(model_names())}"
        ) from None


# ---------------------------------------------------------------------------
# Operations


def base_state(model: ModelSpec, L: int) -> StateVector:
    model.check_length(L)
    check_size(model.d**L)
    return model.base(L).normalize()


def charge_diagonal(model: ModelSpec, L: int) -> np.ndarray:
    """Diagonal of the charge observable over the full basis.

    All registered charges are diagonal in the computational basis; this is
    the fast path used for sector projection and binning.
    """
    dims = (model.d,) * L
    out = np.zeros(dims)
    for term in model.charge(L):
        mat = term.matrix
        off = mat - np.diag(np.diag(mat))
        if np.max(np.abs(off)) > 1e-12:
            raise ValueError("charge term is not diagonal")
        if tuple(sorted(term.support)) != term.support:
            raise ValueError("charge supports must be listed ascending")
        shape = [1] * L
        for wire in term.support:
            shape[wire] = dims[wire]
        out = out + np.real(np.diag(mat)).reshape(shape)
    return out.reshape(-1)


def round_to_charge_lattice(values: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Snap floating charges to the half-integer lattice."""
    snapped = np.round(values * 2.0) / 2.0
    if np.max(np.abs(values - snapped)) > tol:
        raise ValueError("charge values are farther than tol from the lattice")
    return snapped


def charge_sector_weights(model: ModelSpec, state: StateVector) -> list[tuple[float, float]]:
    """Weights ||Pi_Q psi||^2 per charge sector, over the full spectrum."""
    L = state.n_wires
    diag = round_to_charge_lattice(charge_diagonal(model, L))
    probs = np.abs(state.amplitudes) ** 2
    values, inverse = np.unique(diag, return_inverse=True)
    weights = np.bincount(inverse, weights=probs, minlength=len(values))
    return [(float(q), float(p)) for q, p in zip(values, weights)]


def hamiltonian_residual(model: ModelSpec, state: StateVector) -> tuple[float, float]:
    """(<H>, ||(H - <H>) psi||); a near-zero residual certifies an eigenstate."""
    terms = model.hamiltonian(state.n_wires)
    h_psi = apply_terms(state, terms)
    energy = float(np.vdot(state.amplitudes, h_psi).real)
    residual = float(np.linalg.norm(h_psi - energy * state.amplitudes))
    return energy, residual


def exact_tower(model: ModelSpec, L: int, n: int) -> TowerState:
    """Normalized n-fold excitation of the base state, built by brute force."""
    model.check_length(L)
    if n < 0:
        raise ValueError("n must be non-negative")
    psi = base_state(model, L)
    terms = model.creation(L)
    raw = psi.amplitudes
    for _ in range(n):
        raw = apply_terms(psi.with_amplitudes(raw), terms)
    norm_sq = float(np.vdot(raw, raw).real)
    if norm_sq <= TOWER_ZERO_TOL:
        return TowerState(n, None, None, 0.0, None, annihilated=True)
    state = psi.with_amplitudes(raw / math.sqrt(norm_sq))
    energy, residual = hamiltonian_residual(model, state)
    return TowerState(n, energy, state, norm_sq, residual)


def charge_expectation(model: ModelSpec, state: StateVector) -> float:
    diag = charge_diagonal(model, state.n_wires)
    return float(np.sum(diag * np.abs(state.amplitudes) ** 2))
