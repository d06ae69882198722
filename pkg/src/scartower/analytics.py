"""Closed-form outcome distributions, Gaussian summaries, and failure rates.

All factorials go through log-gamma and normalization through log-sum-exp,
so the distributions stay finite well past L = 1000.

The analytic weight of the n-excitation sector is

    p_n  proportional to  N_n w^n (1-w)^(L-n) / (n!)^2

with the per-family counting factor N_n registered below.  For the AKLT
family the registered N_n is the ladder approximation (L/2+n)!/(L/2-n)!;
the exact finite-size norms of that tower carry additional structure (the
tower is not an exact ladder of a closed algebra), and the models module's
brute-force sector weights are the ground truth at small L.  See
``pn_exact_smallL`` for the oracle route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .models import ModelSpec, charge_sector_weights, exact_tower, get_model
from .tensornet import build_resource_mps, contract_to_statevector


@dataclass(frozen=True)
class DistributionSpec:
    model: str
    L: int
    w: float
    ns: np.ndarray
    p: np.ndarray
    log_weights: np.ndarray

    def as_rows(self) -> list[tuple[int, float, float]]:
        return [
            (int(n), float(p), float(lp))
            for n, p, lp in zip(self.ns, self.p, self.log_weights)
        ]


@dataclass(frozen=True)
class GaussianFit:
    n0: float
    delta: float
    method: str  # "analytic" | "least-squares-fit"
    goodness: float = 0.0


@dataclass(frozen=True)
class ToleranceReport:
    n0: float
    delta_rel: float
    p_within: float
    epsilon: float


def _log_counting(model_name: str, L: int) -> tuple[np.ndarray, np.ndarray]:
    """(n values, log N_n) for the registered counting factor."""
    if model_name == "aklt":
        ns = np.arange(L // 2 + 1)
        logn = gammaln(L / 2 + ns + 1) - gammaln(L / 2 - ns + 1)
    elif model_name == "xx_spin_half":
        ns = np.arange(L // 2 + 1)
        logn = gammaln(ns + 1) + gammaln(L - ns + 1) - gammaln(L - 2 * ns + 1)
    elif model_name == "domain_wall":
        ns = np.arange((L - 1) // 2 + 1)
        logn = gammaln(L - ns) + gammaln(ns + 1) - gammaln(L - 2 * ns)
    elif model_name in ("dicke", "xx_spin1"):
        ns = np.arange(L + 1)
        logn = gammaln(ns + 1) + gammaln(L + 1) - gammaln(L - ns + 1)
    else:
        raise ValueError(f"no registered distribution for model {model_name!r}")
    return ns, logn


def pn_analytic(model: ModelSpec | str, L: int, w: float) -> DistributionSpec:
    """Closed-form outcome distribution, evaluated in log space."""
    name = model if isinstance(model, str) else model.name
    if not 0.0 <= w <= 1.0:
        raise ValueError("w must lie in [0, 1]")
    ns, logn = _log_counting(name, L)
    if w == 0.0 or w == 1.0:
        # degenerate point mass at the edge of the support
        p = np.zeros(len(ns))
        idx = 0 if w == 0.0 else len(ns) - 1
        p[idx] = 1.0
        lw = np.full(len(ns), -np.inf)
        lw[idx] = 0.0
        return DistributionSpec(name, L, w, ns, p, lw)
    lw = logn + ns * math.log(w) + (L - ns) * math.log1p(-w) - 2 * gammaln(ns + 1)
    lw = lw - logsumexp(lw)
    return DistributionSpec(name, L, w, ns, np.exp(lw), lw)


def pn_exact_smallL(model: ModelSpec | str, L: int, w: float) -> DistributionSpec:
    """Oracle route: excitation-sector weights of the contracted resource chain."""
    spec = get_model(model) if isinstance(model, str) else model
    state = contract_to_statevector(build_resource_mps(spec, L, w)).normalize()
    weights = dict(charge_sector_weights(spec, state))
    q0 = spec.charge_origin(L)
    ns, _ = _log_counting(spec.name, L)
    p = np.array([weights.get(q0 + spec.q * int(n), 0.0) for n in ns])
    p = p / p.sum()
    with np.errstate(divide="ignore"):
        lw = np.log(p)
    return DistributionSpec(spec.name, L, w, ns, p, lw)


def tower_norm_sq(model: ModelSpec | str, L: int, n: int) -> float:
    """Raw norm of the n-fold excitation of the base state (brute force)."""
    spec = get_model(model) if isinstance(model, str) else model
    return exact_tower(spec, L, n).norm_sq_raw


def gaussian_params_analytic(model: ModelSpec | str, L: int, w: float) -> GaussianFit:
    """Registered closed-form center and width of the outcome distribution."""
    name = model if isinstance(model, str) else model.name
    if name == "aklt":
        n0 = math.sqrt(w) / 2.0 * L
        delta = math.sqrt(n0 * (1.0 - w) / (2.0 * (2.0 - w)))
    elif name in ("xx_spin_half", "domain_wall"):
        q = (1.0 - math.sqrt((1.0 - w) / (1.0 + 3.0 * w))) / 2.0
        n0 = q * L
        delta = math.sqrt(n0 * (1.0 - q) * (1.0 - 2.0 * q))
    elif name in ("dicke", "xx_spin1"):
        n0 = w * L
        delta = math.sqrt(n0 * (1.0 - w))
    else:
        raise ValueError(f"no registered Gaussian closed form for {name!r}")
    return GaussianFit(n0=n0, delta=delta, method="analytic")


FIT_WINDOW_RATIO = 1e-3


def fit_gaussian(dist: DistributionSpec) -> GaussianFit:
    """Quadratic fit to log p over the region p >= 1e-3 * max(p)."""
    alive = dist.p > 1e-300
    if int(alive.sum()) < 5:
        raise ValueError("insufficient support for a Gaussian fit")
    cutoff = FIT_WINDOW_RATIO * dist.p.max()
    sel = dist.p >= cutoff
    ns = dist.ns[sel].astype(float)
    logs = np.log(dist.p[sel])
    if len(ns) < 3:
        raise ValueError("insufficient support for a Gaussian fit")
    coeffs, diag = np.polynomial.polynomial.polyfit(ns, logs, 2, full=True)
    c0, c1, c2 = coeffs
    if c2 >= 0:
        raise ValueError("log-distribution is not concave on the fit window")
    n0 = -c1 / (2.0 * c2)
    delta = math.sqrt(-1.0 / (2.0 * c2))
    resid = float(diag[0][0]) if len(diag[0]) else 0.0
    return GaussianFit(n0=float(n0), delta=float(delta),
                       method="least-squares-fit", goodness=resid)


def tolerance_probability(dist: DistributionSpec, n0: float,
                          delta_rel: float) -> ToleranceReport:
    """Probability of landing strictly inside ((1-d) n0, (1+d) n0)."""
    if not 0.0 < delta_rel < 1.0:
        raise ValueError("relative tolerance must lie in (0, 1)")
    lo = (1.0 - delta_rel) * n0
    hi = (1.0 + delta_rel) * n0
    sel = (dist.ns > lo) & (dist.ns < hi)
    if not np.any(sel):
        raise ValueError("tolerance window contains no integer outcomes")
    p_within = float(dist.p[sel].sum())
    return ToleranceReport(n0=n0, delta_rel=delta_rel,
                           p_within=p_within, epsilon=1.0 - p_within)


def failure_rate_scan(model: ModelSpec | str, w: float, delta_rel: float,
                      lengths: list[int]) -> list[tuple[int, float]]:
    """(L, epsilon) pairs for the exponential-suppression check."""
    out = []
    for L in lengths:
        dist = pn_analytic(model, L, w)
        n0 = gaussian_params_analytic(model, L, w).n0
        rep = tolerance_probability(dist, n0, delta_rel)
        out.append((L, rep.epsilon))
    return out


def loglinear_r_squared(xs: np.ndarray, log_ys: np.ndarray) -> float:
    """R^2 of a straight-line fit, used on (L, log eps) scans."""
    coeffs = np.polyfit(xs, log_ys, 1)
    pred = np.polyval(coeffs, xs)
    ss_res = float(np.sum((log_ys - pred) ** 2))
    ss_tot = float(np.sum((log_ys - log_ys.mean()) ** 2))
    return 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
