"""Rate fitting and numerical checks of the L^p inequalities behind the rate proofs."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .errors import InputError

VERDICT_RTOL = 1e-12


@dataclass(frozen=True)
class RateFit:
    """OLS fit log(error) = intercept + slope * log(n)."""

    slope: float
    intercept: float
    r_squared: float
    n_values: tuple[float, ...]
    errors: tuple[float, ...]

    def to_dict(self) -> dict:
        return asdict(self)


def fit_rate(n_values: Sequence[float], errors: Sequence[float], drop_nonpositive: bool = False) -> RateFit:
    """Least-squares power law through (n, error) pairs.

    Pairs with error <= 0 raise unless ``drop_nonpositive`` is set, in which
    case they are discarded (exact recovery steps of a greedy trace, say).
    At least three usable pairs are required.
    """
    n = np.asarray(n_values, dtype=float).reshape(-1)
    e = np.asarray(errors, dtype=float).reshape(-1)
    if n.size != e.size:
        raise InputError("n_values and errors must have equal length")
    if np.any(n <= 0):
        raise InputError("n values must be positive")
    bad = ~(e > 0)
    if np.any(bad):
        if not drop_nonpositive:
            raise InputError("errors must be positive; pass drop_nonpositive=True to discard the rest")
        n, e = n[~bad], e[~bad]
    if n.size < 3:
        raise InputError("need at least three positive (n, error) pairs")
    x, y = np.log(n), np.log(e)
    A = np.stack([np.ones_like(x), x], axis=1)
    (intercept, slope), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (intercept + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), r2, tuple(n.tolist()), tuple(e.tolist()))


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    holds: bool

    def to_dict(self) -> dict:
        return asdict(self)


def _verdict(name: str, lhs: float, rhs: float) -> InequalityReport:
    holds = bool(lhs <= rhs + VERDICT_RTOL * (abs(lhs) + abs(rhs) + 1.0))
    return InequalityReport(name, float(lhs), float(rhs), holds)


def _weights(weights, size: int) -> np.ndarray:
    if weights is None:
        return np.ones(size)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.size != size:
        raise InputError(f"expected {size} weights, got {w.size}")
    return w


def _norm(u: np.ndarray, w: np.ndarray, p: float) -> float:
    # weights are used as given; invalid weights surface as a failed verdict
    with np.errstate(invalid="ignore"):
        a = np.abs(u)
        top = float(np.max(a, initial=0.0))
        if math.isinf(p) or top == 0.0:
            return top
        # scale by the max entry so large p cannot overflow
        return top * float(np.sum(w * (a / top) ** p) ** (1.0 / p))


def _pair(f, g):
    f = np.asarray(f, dtype=float).reshape(-1)
    g = np.asarray(g, dtype=float).reshape(-1)
    if f.size != g.size:
        raise InputError("f and g must live on the same grid")
    return f, g


def check_clarkson(f, g, p: float, weights=None) -> InequalityReport:
    """|f+g|^a + |f-g|^a <= 2(|f|^a + |g|^a) in L^p, a = min(p, p/(p-1))."""
    if not 1 < p < math.inf:
        raise InputError(f"Clarkson's inequality needs p in (1, inf), got {p}")
    f, g = _pair(f, g)
    w = _weights(weights, f.size)
    a = min(p, p / (p - 1.0))
    lhs = _norm(f + g, w, p) ** a + _norm(f - g, w, p) ** a
    rhs = 2.0 * (_norm(f, w, p) ** a + _norm(g, w, p) ** a)
    return _verdict("clarkson", lhs, rhs)


def check_holder(f, g, p: float, weights=None) -> InequalityReport:
    """|fg|_1 <= |f|_p |g|_q with 1/p + 1/q = 1 (p = 1 pairs with q = inf)."""
    if p < 1:
        raise InputError(f"Hoelder's inequality needs p >= 1, got {p}")
    f, g = _pair(f, g)
    w = _weights(weights, f.size)
    q = math.inf if p == 1 else (1.0 if math.isinf(p) else p / (p - 1.0))
    lhs = _norm(f * g, w, 1.0)
    rhs = _norm(f, w, p) * _norm(g, w, q)
    return _verdict("holder", lhs, rhs)


def check_minkowski_integral(F, p: float, wx=None, wy=None) -> InequalityReport:
    """(int_X (int_Y |F| dy)^p dx)^(1/p) <= int_Y (int_X |F|^p dx)^(1/p) dy.

    ``F`` has shape (len(X), len(Y)); ``wx`` and ``wy`` are the quadrature
    weights of the two axes.
    """
    if p < 1:
        raise InputError(f"Minkowski's integral inequality needs p >= 1, got {p}")
    F = np.abs(np.asarray(F, dtype=float))
    if F.ndim != 2:
        raise InputError("F must be a two-variable grid")
    wx = _weights(wx, F.shape[0])
    wy = _weights(wy, F.shape[1])
    with np.errstate(invalid="ignore"):
        inner_y = F @ wy
        lhs = _norm(inner_y, wx, p)
        cols = np.array([_norm(F[:, j], wx, p) for j in range(F.shape[1])])
        rhs = float(np.sum(wy * cols))
    return _verdict("minkowski", lhs, rhs)


def random_inequality_instance(kind: str, rng: np.random.Generator, size: int = 32) -> InequalityReport:
    """One seeded random instance of the named inequality on a probability grid."""
    w = rng.uniform(0.1, 1.0, size)
    w /= w.sum()
    if kind == "clarkson":
        p = float(rng.uniform(1.05, 6.0))
        return check_clarkson(rng.standard_normal(size), rng.standard_normal(size), p, w)
    if kind == "holder":
        p = float(rng.uniform(1.0, 6.0))
        return check_holder(rng.standard_normal(size), rng.standard_normal(size), p, w)
    if kind == "minkowski":
        p = float(rng.uniform(1.0, 6.0))
        wy = rng.uniform(0.1, 1.0, size)
        return check_minkowski_integral(rng.standard_normal((size, size)), p, w, wy / wy.sum())
    raise InputError(f"unknown inequality {kind!r}")
