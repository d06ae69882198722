"""Generalized qudit Pauli operators and Bell pairs.

Conventions: X|m> = |m+1 mod d>, Z|m> = w^m |m> with w = exp(2 pi i / d).
A Pauli label (a, b) denotes X^a Z^b; labels are enumerated lexicographically.
The Bell state |P_ab> on a wire pair is (I (x) X^a Z^b) sum_i |ii> / sqrt(d),
with the Pauli acting on the second listed wire.
"""

from __future__ import annotations

import numpy as np


def shift_matrix(d: int) -> np.ndarray:
    x = np.zeros((d, d), dtype=np.complex128)
    for m in range(d):
        x[(m + 1) % d, m] = 1.0
    return x


def clock_matrix(d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    return np.diag(w ** np.arange(d))


def pauli_matrix(a: int, b: int, d: int) -> np.ndarray:
    return np.linalg.matrix_power(shift_matrix(d), a % d) @ np.linalg.matrix_power(
        clock_matrix(d), b % d
    )


def pauli_labels(d: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(d) for b in range(d)]


def bell_vector(d: int, a: int, b: int) -> np.ndarray:
    """Flat d^2 vector of |P_ab| on wire pair (first wire most significant)."""
    p = pauli_matrix(a, b, d)
    vec = np.zeros(d * d, dtype=np.complex128)
    for i in range(d):
        vec[i * d : (i + 1) * d] += p[:, i]
    return vec / np.sqrt(d)


def bell_basis(d: int) -> list[tuple[tuple[int, int], np.ndarray]]:
    return [((a, b), bell_vector(d, a, b)) for a, b in pauli_labels(d)]


def match_pauli_phase(mat: np.ndarray, tol: float = 1e-8) -> tuple[int, int] | None:
    """Return (a, b) if ``mat`` is proportional to X^a Z^b by a unit phase."""
    d = mat.shape[0]
    for a, b in pauli_labels(d):
        p = pauli_matrix(a, b, d)
        ov = np.trace(p.conj().T @ mat) / d
        if abs(abs(ov) - 1.0) < tol and np.max(np.abs(mat - ov * p)) < tol:
            return (a, b)
    return None


def pauli_name(a: int, b: int) -> str:
    if (a, b) == (0, 0):
        return "I"
    parts = []
    if a:
        parts.append("X" if a == 1 else f"X^{a}")
    if b:
        parts.append("Z" if b == 1 else f"Z^{b}")
    return "".join(parts)
