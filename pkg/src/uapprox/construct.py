"""Explicit network constructions.

Every builder here follows a closed-form recipe: staircase approximants of a
squashing target, the cosine network assembled from shifted staircases,
monomial and polynomial nets from centered finite differences, the
Vandermonde system behind ridge representations of monomials, bivariate
ridge decompositions, and exact interpolation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (ConstructionError, InputError, PreconditionError,
                     RankDeficiencyError)
from .netcore import Activation, ShallowNet, make_term

LEVEL_TOL = 1e-12
DERIVATIVE_FLOOR = 1e-6
PINKUS_WEIGHT_RANGE = 5.0
PINKUS_MAX_ATTEMPTS = 100
PINKUS_COND_LIMIT = 1e12
PINKUS_RESIDUAL_TOL = 1e-8
DIRECTION_MAX_ATTEMPTS = 100
VANDERMONDE_COND_WARN = 1e10


def _scalar(f: Callable) -> Callable[[float], float]:
    return lambda t: float(np.asarray(f(np.asarray([t], dtype=float)))[0])


# ---------------------------------------------------------------------------
# staircase approximation of a squashing target


@dataclass(frozen=True)
class StepApproxPlan:
    Q: int
    M: float
    levels: tuple[float, ...]   # r_0 .. r_Q

    @property
    def beta(self) -> float:
        return 1.0 / self.Q


def levels_count(eps: float) -> int:
    """Smallest Q with 1/Q < eps/2."""
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    return math.floor(2.0 / eps) + 1


def level_abscissa(F: Callable[[float], float], level: float, start: float = 0.0,
                   max_expand: int = 200) -> float:
    """Largest x with F(x) <= level for a monotone nondecreasing F."""
    lo, hi = start - 1.0, start + 1.0
    step = 1.0
    for _ in range(max_expand):
        if F(lo) <= level:
            break
        step *= 2.0
        lo = start - step
    else:
        raise ConstructionError(f"target never drops to level {level!r} in the search range")
    step = 1.0
    for _ in range(max_expand):
        if F(hi) > level:
            break
        step *= 2.0
        hi = start + step
    else:
        raise ConstructionError(f"target never exceeds level {level!r} in the search range")
    while hi - lo > LEVEL_TOL * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if F(mid) <= level:
            lo = mid
        else:
            hi = mid
    return lo


def saturation_threshold(psi: Activation, gap: float, max_doublings: int = 200) -> float:
    """M > 0 with psi(-M) < gap and psi(M) > 1 - gap, found by doubling."""
    psi_s = _scalar(psi)
    M = 1.0
    for _ in range(max_doublings):
        if psi_s(-M) < gap and psi_s(M) > 1.0 - gap:
            return M
        M *= 2.0
    raise ConstructionError(f"activation does not saturate to within {gap!r}")


def plan_squashing_step(psi: Activation, target: Callable, eps: float) -> StepApproxPlan:
    if not psi.squashing:
        raise InputError(f"activation {psi.kind!r} is not a squashing function")
    Q = levels_count(eps)
    F = _scalar(target)
    r = [level_abscissa(F, j / Q) for j in range(1, Q)]
    r.append(level_abscissa(F, 1.0 - 1.0 / (2 * Q)))
    r.insert(0, r[0] - (r[1] - r[0]))
    if any(b <= a for a, b in zip(r, r[1:])):
        raise ConstructionError("level abscissae are not strictly increasing; target is not continuous")
    M = saturation_threshold(psi, 1.0 / Q)
    return StepApproxPlan(Q, M, tuple(r))


def approximate_squashing_step(psi: Activation, target: Callable, eps: float) -> ShallowNet:
    """Staircase net H with sup |target - H| < eps on the whole line.

    H uses Q terms of height 1/Q. Term j sends the level abscissae
    (r_j, r_{j+1}) of the target to (-M, M), where psi is saturated.
    """
    plan = plan_squashing_step(psi, target, eps)
    r, M = plan.levels, plan.M
    terms = []
    for j in range(plan.Q):
        w = 2.0 * M / (r[j + 1] - r[j])
        terms.append(make_term(plan.beta, w, -M - w * r[j], psi))
    return ShallowNet(1, tuple(terms))


# ---------------------------------------------------------------------------
# cosine network


def cos_piece_g(x):
    """0 below -pi/2, cos on [-pi/2, 0], 1 above 0."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= -np.pi / 2, 0.0, np.where(x >= 0.0, 1.0, np.cos(np.clip(x, -np.pi / 2, 0.0))))


def cos_piece_h(x):
    """0 below -pi, 1 + cos on [-pi, -pi/2], 1 above -pi/2."""
    x = np.asarray(x, dtype=float)
    return np.where(x <= -np.pi, 0.0,
                    np.where(x >= -np.pi / 2, 1.0, 1.0 + np.cos(np.clip(x, -np.pi, -np.pi / 2))))


def cosine_half_periods(M: float) -> int:
    """Smallest n >= 1 with M <= (2n - 1/2) pi."""
    if M <= 0:
        raise InputError("M must be positive")
    return max(1, math.ceil((M / math.pi + 0.5) / 2.0))


def cosine_identity(x, n: int):
    """Evaluate the exact piecewise sum of shifted g and h pieces that equals cos on
    [-(2n - 1/2) pi, (2n - 1/2) pi]. Used as a reference for the network."""
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for j in range(4 * n):
        sg = 1.0 if j % 2 == 0 else -1.0
        total += sg * cos_piece_g(x - (-2 * n + j) * np.pi)
        total -= sg * (cos_piece_h(x - (-2 * n + 1 + j) * np.pi) - 1.0)
    return total


def _shift(net: ShallowNet, alpha: float) -> ShallowNet:
    """x -> net(x - alpha)."""
    return net.compose_affine([[1.0]], [-alpha])


def build_cosine_net(psi: Activation, M: float, eps: float) -> ShallowNet:
    """Squashing net within eps of cos on [-M, M].

    cos is written as an alternating sum of 4n shifted copies of the
    squashing pieces g and h; each copy and each constant is replaced by a
    psi-net accurate to eps / (12 n).
    """
    if not 0 < eps < 1:
        raise InputError(f"eps must lie in (0, 1), got {eps}")
    n = cosine_half_periods(M)
    tol = eps / (12 * n)
    G = approximate_squashing_step(psi, cos_piece_g, tol)
    H = approximate_squashing_step(psi, cos_piece_h, tol)
    K = saturation_threshold(psi, tol)
    one = ShallowNet(1, (make_term(1.0, 0.0, K, psi),))
    net = ShallowNet(1, ())
    for j in range(4 * n):
        sg = 1.0 if j % 2 == 0 else -1.0
        net = net + _shift(G, (-2 * n + j) * math.pi).scaled(sg)
        net = net + (_shift(H, (-2 * n + 1 + j) * math.pi) + one.scaled(-1.0)).scaled(-sg)
    return net


# ---------------------------------------------------------------------------
# monomial and polynomial nets


def derivative_estimate(f: Callable, n: int, b: float, h0: float = 0.4,
                        levels: int = 10) -> tuple[float, float]:
    """n-th derivative of f at b by centered differences with Richardson extrapolation.

    Returns ``(value, error_estimate)``. The tableau halves the step each row
    and eliminates h^2, h^4, ... terms; the entry with the smallest estimated
    error is reported.
    """
    F = _scalar(f)
    if n == 0:
        return F(b), 0.0
    binom = [(-1) ** i * math.comb(n, i) for i in range(n + 1)]

    def central(h):
        return sum(c * F(b + (n / 2 - i) * h) for i, c in enumerate(binom)) / h ** n

    table = [[central(h0)]]
    best, err = table[0][0], math.inf
    for i in range(1, levels):
        row = [central(h0 / 2 ** i)]
        fac = 1.0
        for k in range(1, i + 1):
            fac *= 4.0
            row.append(row[k - 1] + (row[k - 1] - table[i - 1][k - 1]) / (fac - 1.0))
            e = max(abs(row[k] - row[k - 1]), abs(row[k] - table[i - 1][k - 1]))
            if e < err:
                best, err = row[k], e
        if abs(row[i] - table[i - 1][i - 1]) >= 2.0 * err:
            break
        table.append(row)
    return best, err


def choose_bias(psi: Activation, n: int, candidates=None) -> float:
    """Bias maximizing min_{j<=n} |psi^(j)(b)| over a candidate grid."""
    if candidates is None:
        candidates = np.linspace(-3.0, 3.0, 121)
    best_b, best_val = None, -1.0
    for b in candidates:
        val = min(abs(derivative_estimate(psi, j, float(b))[0]) for j in range(n + 1))
        if val > best_val:
            best_b, best_val = float(b), val
    return best_b


def _checked_derivative(psi: Activation, j: int, b: float) -> float:
    d, _ = derivative_estimate(psi, j, b)
    if abs(d) < DERIVATIVE_FLOOR:
        raise PreconditionError(
            f"|psi^({j})({b})| = {abs(d):.3g} is below {DERIVATIVE_FLOOR:g}; pick a different bias b")
    return d


def default_step(domain: Sequence[float]) -> float:
    half = 0.5 * (float(domain[1]) - float(domain[0]))
    if half <= 0:
        raise InputError("domain must satisfy lo < hi")
    return 1e-3 / half


def _check_smooth(psi: Activation):
    if not psi.smooth:
        raise InputError(f"activation {psi.kind!r} is not smooth")


def build_monomial_net(psi: Activation, n: int, b: float | None = None, h: float | None = None,
                       domain: Sequence[float] = (-1.0, 1.0)) -> ShallowNet:
    """n+1 term net approximating x^n through a centered n-th difference of psi."""
    _check_smooth(psi)
    if n < 0:
        raise InputError("monomial degree must be nonnegative")
    if b is None:
        b = choose_bias(psi, n)
    if h is None:
        h = default_step(domain)
    if h <= 0:
        raise InputError("step h must be positive")
    scale = 1.0 / ((2.0 * h) ** n * _checked_derivative(psi, n, b))
    terms = tuple(make_term((-1) ** i * math.comb(n, i) * scale, (n - 2 * i) * h, b, psi)
                  for i in range(n + 1))
    return ShallowNet(1, terms)


def build_polynomial_net(psi: Activation, coeffs: Sequence[float], b: float | None = None,
                         h: float | None = None, domain: Sequence[float] = (-1.0, 1.0)) -> ShallowNet:
    """Net for sum_j a_j x^j on the 2n+1 weights {-n, ..., n} * h with a shared bias.

    All 2n+1 units are emitted, including those whose merged coefficient is 0,
    so the unit count is always 2n+1.
    """
    _check_smooth(psi)
    coeffs = [float(a) for a in coeffs]
    if not coeffs:
        raise InputError("polynomial needs at least one coefficient")
    n = len(coeffs) - 1
    if b is None:
        b = choose_bias(psi, n)
    if h is None:
        h = default_step(domain)
    if h <= 0:
        raise InputError("step h must be positive")
    merged = {k: 0.0 for k in range(-n, n + 1)}
    for j, a in enumerate(coeffs):
        if a == 0.0:
            continue
        scale = a / ((2.0 * h) ** j * _checked_derivative(psi, j, b))
        for i in range(j + 1):
            merged[j - 2 * i] += (-1) ** i * math.comb(j, i) * scale
    terms = tuple(make_term(merged[k], k * h, b, psi) for k in range(-n, n + 1))
    return ShallowNet(1, terms)


# ---------------------------------------------------------------------------
# ridge identities


def vandermonde_ridge_coeffs(r: int, s: int, betas: Sequence[float]) -> np.ndarray:
    """Coefficients with sum_j c_j (x1 + beta_j x2)^(r+s) = x1^r x2^s."""
    if r < 0 or s < 0:
        raise InputError("r and s must be nonnegative")
    betas = np.asarray(betas, dtype=float)
    m = r + s
    if betas.shape != (m + 1,):
        raise InputError(f"need exactly r+s+1 = {m + 1} betas, got {betas.size}")
    if np.any(betas == 0):
        raise InputError("betas must be nonzero")
    if len(np.unique(betas)) != betas.size:
        raise InputError("betas must be distinct")
    k = np.arange(m + 1)
    binoms = np.array([math.comb(m, int(i)) for i in k], dtype=float)
    A = binoms[:, None] * betas[None, :] ** k[:, None]
    rhs = (k == s).astype(float)
    cond = np.linalg.cond(A)
    if cond > VANDERMONDE_COND_WARN:
        warnings.warn(f"Vandermonde system is ill-conditioned (cond ~ {cond:.3g})", RuntimeWarning)
    return np.linalg.solve(A, rhs)


@dataclass(frozen=True)
class RidgeDecomposition:
    degree: int
    directions: np.ndarray    # (L, 2)
    polys: np.ndarray         # (L, degree + 1), ascending powers of t

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        T = X @ self.directions.T
        return np.sum(np.polynomial.polynomial.polyval(T, self.polys.T, tensor=False), axis=1) \
            if len(self.directions) else np.zeros(X.shape[0])


def default_directions(k: int) -> np.ndarray:
    theta = np.arange(k + 1) * np.pi / (k + 1)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def eval_bivariate(coeffs, X) -> np.ndarray:
    """sum_{i,j} coeffs[i, j] x1^i x2^j."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.polynomial.polynomial.polyval2d(X[:, 0], X[:, 1], np.asarray(coeffs, dtype=float))


def decompose_polynomial_ridge(coeffs, k: int | None = None, directions=None) -> RidgeDecomposition:
    """Write a bivariate polynomial as sum_i g_i(a_i . x).

    ``coeffs[i, j]`` multiplies x1^i x2^j. Each homogeneous part of degree s
    is matched against the expansions of (a_i . x)^s; k+1 distinct
    directions make every such system solvable.
    """
    C = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if C.ndim != 2:
        raise InputError("bivariate coefficients must form a 2-D array")
    nz = np.argwhere(C != 0)
    total = int((nz[:, 0] + nz[:, 1]).max()) if len(nz) else 0
    if k is None:
        k = total
    if total > k:
        raise InputError(f"polynomial has degree {total} > k = {k}")
    A = default_directions(k) if directions is None else np.atleast_2d(np.asarray(directions, dtype=float))
    if A.ndim != 2 or A.shape[1] != 2:
        raise InputError("ridge decomposition supports input dimension 2 only")
    L = A.shape[0]
    G = np.zeros((L, k + 1))
    for s in range(k + 1):
        B = np.array([[math.comb(s, m) * a[0] ** (s - m) * a[1] ** m for a in A] for m in range(s + 1)])
        rank = np.linalg.matrix_rank(B)
        if rank < s + 1:
            raise RankDeficiencyError(
                f"directions determine only a rank-{rank} subspace of degree-{s} homogeneous polynomials")
        target = np.array([C[s - m, m] if s - m < C.shape[0] and m < C.shape[1] else 0.0
                           for m in range(s + 1)])
        if np.any(target):
            G[:, s] = np.linalg.lstsq(B, target, rcond=None)[0]
    return RidgeDecomposition(k, A, G)


# ---------------------------------------------------------------------------
# exact interpolation


def _as_points(points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[0] == 0:
        raise InputError("points must be a nonempty (n, d) array")
    if len(np.unique(X, axis=0)) != X.shape[0]:
        raise InputError("interpolation nodes must be pairwise distinct")
    return X


def _exact_saturation(psi: Activation) -> float:
    psi_s = _scalar(psi)
    M = 1.0
    for _ in range(200):
        if psi_s(-M) == 0.0 and psi_s(M) == 1.0:
            return M
        M *= 2.0
    raise InputError(f"activation {psi.kind!r} does not attain 0 and 1")


def _distinct_direction(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    d = X.shape[1]
    if d == 1:
        return np.ones(1)
    scale = max(1.0, float(np.max(np.abs(X))))
    for _ in range(DIRECTION_MAX_ATTEMPTS):
        p = rng.standard_normal(d)
        p /= np.linalg.norm(p)
        t = np.sort(X @ p)
        if np.all(np.diff(t) > 1e-9 * scale):
            return p
    raise ConstructionError("no direction with distinct projections found")


def interpolate_exact_squashing(psi: Activation, points, values, seed: int = 0) -> ShallowNet:
    """Staircase net through the given nodes.

    Nodes are ordered along a direction p with distinct projections. The
    first unit carries y_1 as a constant; unit j switches on between nodes
    j-1 and j and adds y_j - y_{j-1}.
    """
    if not psi.squashing:
        raise InputError(f"activation {psi.kind!r} is not a squashing function")
    X = _as_points(points)
    y = np.asarray(values, dtype=float).reshape(-1)
    if y.size != X.shape[0]:
        raise InputError("need one value per node")
    M = _exact_saturation(psi)
    p = _distinct_direction(X, np.random.default_rng(seed))
    t = X @ p
    order = np.argsort(t, kind="stable")
    t, y = t[order], y[order]
    terms = [make_term(y[0], np.zeros(X.shape[1]), M, psi)]
    for j in range(1, len(t)):
        w = 2.0 * M / (t[j] - t[j - 1])
        terms.append(make_term(y[j] - y[j - 1], w * p, -M - w * t[j - 1], psi))
    return ShallowNet(X.shape[1], tuple(terms))


def interpolate_pinkus(psi: Activation, points, alphas, seed: int = 0) -> ShallowNet:
    """k-unit net through k nodes with random inner weights and solved outer ones."""
    X = _as_points(points)
    a = np.asarray(alphas, dtype=float).reshape(-1)
    k, d = X.shape
    if a.size != k:
        raise InputError("need one alpha per node")
    rng = np.random.default_rng(seed)
    for _ in range(PINKUS_MAX_ATTEMPTS):
        W = rng.uniform(-PINKUS_WEIGHT_RANGE, PINKUS_WEIGHT_RANGE, size=(k, d))
        b = rng.uniform(-PINKUS_WEIGHT_RANGE, PINKUS_WEIGHT_RANGE, size=k)
        A = psi(X @ W.T + b[None, :])
        if not np.all(np.isfinite(A)) or np.linalg.cond(A) >= PINKUS_COND_LIMIT:
            continue
        c = np.linalg.solve(A, a)
        if np.max(np.abs(A @ c - a), initial=0.0) > PINKUS_RESIDUAL_TOL:
            continue
        net = ShallowNet(d, tuple(make_term(c[j], W[j], b[j], psi) for j in range(k)))
        if np.max(np.abs(net(X) - a)) <= PINKUS_RESIDUAL_TOL:
            return net
    raise ConstructionError(f"no nonsingular draw in {PINKUS_MAX_ATTEMPTS} attempts")
