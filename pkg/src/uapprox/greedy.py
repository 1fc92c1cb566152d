"""Incremental approximation of convex combinations from a finite dictionary.

Three algorithms share one data model. The dictionary is a stack of atoms
sampled on a common grid with quadrature weights; the target is an explicit
convex combination of some of those atoms.

* ``maurey_greedy``: equal-weight averages f_k = (g_1 + ... + g_k)/k in the
  inner-product norm, certified by sqrt((s_G^2 - |f|^2)/k).
* ``ks_greedy``: convex updates f_n = a f_{n-1} + (1-a) g with the optimal
  step, certified by a geometric envelope.
* ``ddgs_greedy``: equal-weight averages in L^p, with atoms chosen through
  the norming functional of the current residual.

Every step is checked against its bound as it is produced; a breach raises
:class:`~uapprox.errors.CertificateViolation`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CertificateViolation, InputError, NumericalError
from .netcore import Activation, ShallowNet, Term, lp_norm, make_term

EXACT_TOL = 1e-13
SUM_TOL = 1e-12
MATCH_TOL = 1e-12
# relative and absolute slack on certificates; absorbs roundoff only
BOUND_RTOL = 1e-9
BOUND_ATOL = 1e-12


@dataclass(frozen=True)
class Unit:
    """Inner parameters ``(w, b, activation)`` realizing one atom as a network unit."""

    w: tuple[float, ...]
    b: float
    activation: Activation


@dataclass(frozen=True)
class Dictionary:
    """Finite atom set G sampled on one grid.

    ``atoms`` has shape (m, N) and ``weights`` holds the N quadrature
    weights. ``units`` optionally ties each atom to a network unit so that
    greedy combinations can be exported as a :class:`ShallowNet`.
    """

    atoms: np.ndarray
    weights: np.ndarray
    units: tuple[Unit, ...] | None = None
    input_dim: int = 1

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if A.shape[0] == 0:
            raise InputError("dictionary needs at least one atom")
        if A.shape[1] != w.size:
            raise InputError(f"atoms have {A.shape[1]} samples but {w.size} weights were given")
        if np.any(w < 0):
            raise InputError("quadrature weights must be nonnegative")
        if self.units is not None and len(self.units) != A.shape[0]:
            raise InputError("need one unit per atom")
        A.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", A)
        object.__setattr__(self, "weights", w)
        if self.units is not None:
            object.__setattr__(self, "units", tuple(self.units))

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def grid_size(self) -> int:
        return self.atoms.shape[1]

    def norms(self, p: float = 2.0) -> np.ndarray:
        if p == 2.0:
            return np.sqrt(self.atoms ** 2 @ self.weights)
        return np.array([lp_norm(a, self.weights, p) for a in self.atoms])

    def s_G(self, p: float = 2.0) -> float:
        """Largest atom norm, recomputed on each call."""
        return float(self.norms(p).max())

    def inner(self, u, v) -> float:
        return float(np.sum(self.weights * np.asarray(u) * np.asarray(v)))

    def norm(self, u, p: float = 2.0) -> float:
        return lp_norm(u, self.weights, p)


@dataclass(frozen=True)
class ConvexTarget:
    """f = sum_j a_j atom_{i_j} with a_j >= 0 summing to 1."""

    coefficients: np.ndarray
    indices: np.ndarray
    values: np.ndarray

    @classmethod
    def assemble(cls, dictionary: Dictionary, coefficients, indices=None) -> "ConvexTarget":
        a = np.asarray(coefficients, dtype=float).reshape(-1)
        idx = np.arange(a.size) if indices is None else np.asarray(indices, dtype=int).reshape(-1)
        if a.size != idx.size or a.size == 0:
            raise InputError("need one nonnegative coefficient per atom index")
        if np.any(a < 0):
            raise InputError("convex coefficients must be nonnegative")
        if abs(a.sum() - 1.0) > SUM_TOL:
            raise InputError(f"convex coefficients sum to {a.sum()!r}, not 1")
        if np.any(idx < 0) or np.any(idx >= dictionary.size) or len(np.unique(idx)) != idx.size:
            raise InputError("atom indices must be distinct and within the dictionary")
        values = a @ dictionary.atoms[idx]
        return cls(a, idx, values)

    @property
    def support(self) -> np.ndarray:
        """Indices of atoms carrying positive weight."""
        return self.indices[self.coefficients > 0]


@dataclass
class StepRecord:
    step: int
    atom: int
    alpha: float
    error: float
    bound: float
    extras: dict = field(default_factory=dict)


@dataclass
class GreedyTrace:
    algorithm: str
    steps: list[StepRecord] = field(default_factory=list)
    tau: float | None = None
    exact: bool = False
    extra_columns: tuple[str, ...] = ()

    @property
    def errors(self) -> np.ndarray:
        return np.array([s.error for s in self.steps])

    @property
    def bounds(self) -> np.ndarray:
        return np.array([s.bound for s in self.steps])

    @property
    def atoms(self) -> list[int]:
        return [s.atom for s in self.steps]

    def rows(self) -> list[list]:
        out = []
        for s in self.steps:
            out.append([s.step, s.atom, s.alpha, s.error, s.bound]
                       + [s.extras.get(c, float("nan")) for c in self.extra_columns])
        return out

    @property
    def header(self) -> list[str]:
        return ["step", "atom", "alpha", "error", "bound", *self.extra_columns]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.header)
        for row in self.rows():
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def format_float(v: float) -> str:
    return "%.17g" % v


@dataclass(frozen=True)
class Combination:
    """Greedy output: coefficients over the whole dictionary and the assembled values."""

    coefficients: np.ndarray
    values: np.ndarray

    def to_net(self, dictionary: Dictionary) -> ShallowNet:
        if dictionary.units is None:
            raise InputError("dictionary carries no units to build a network from")
        terms = tuple(make_term(c, u.w, u.b, u.activation)
                      for c, u in zip(self.coefficients, dictionary.units) if c != 0.0)
        return ShallowNet(dictionary.input_dim, terms)


# ---------------------------------------------------------------------------
# closed-form bounds


def maurey_bound(sG: float, f_norm: float, n: int) -> float:
    if f_norm < 0 or sG < f_norm:
        raise InputError(f"need s_G >= |f| >= 0, got s_G={sG}, |f|={f_norm}")
    if n < 1:
        raise InputError("n must be a positive integer")
    return math.sqrt((sG * sG - f_norm * f_norm) / n)


def _conjugate_exponents(p: float) -> tuple[float, float]:
    if not 1 < p < math.inf:
        raise InputError(f"p must lie in (1, inf), got {p}")
    q = p / (p - 1.0)
    return min(p, q), max(p, q)


def ddgs_bound(r: float, p: float, n: int) -> float:
    a, b = _conjugate_exponents(p)
    if n < 1:
        raise InputError("n must be a positive integer")
    return 2.0 ** (1.0 / a) * r / n ** (1.0 / b)


def ks_bound(tau: float, sG: float, f_norm: float, n: int) -> float:
    if not 0 <= tau < 1:
        raise InputError(f"tau must lie in [0, 1), got {tau}")
    if f_norm < 0 or sG < f_norm:
        raise InputError(f"need s_G >= |f| >= 0, got s_G={sG}, |f|={f_norm}")
    if n < 1:
        raise InputError("n must be a positive integer")
    return math.sqrt(tau ** (n - 1) * (sG * sG - f_norm * f_norm))


def ks_line_search(e2: float, q: float, r2: float) -> tuple[float, float]:
    """Optimal step and resulting squared error for one convex update.

    ``e2`` is |f - f_{n-1}|^2, ``q`` is -<f - f_{n-1}, f - g> and ``r2`` is
    |f - g|^2. Returns ``(alpha, e_n^2)``.
    """
    den = e2 + 2.0 * q + r2
    if den <= 0:
        raise InputError("degenerate line search: e^2 + 2q + r^2 must be positive")
    return (q + r2) / den, (e2 * r2 - q * q) / den


def _certify(algorithm: str, step: int, error: float, bound: float):
    if not error <= bound * (1.0 + BOUND_RTOL) + BOUND_ATOL:
        raise CertificateViolation(
            f"{algorithm}: step {step} error {error!r} exceeds bound {bound!r}",
            step=step, error=error, bound=bound)


def _check_target(target: ConvexTarget, dictionary: Dictionary):
    if target.values.size != dictionary.grid_size:
        raise InputError(f"target has {target.values.size} samples, dictionary grid has {dictionary.grid_size}")
    if np.any(target.indices >= dictionary.size):
        raise InputError("target references atoms outside the dictionary")
    if target.values.size and not np.allclose(
            target.coefficients @ dictionary.atoms[target.indices], target.values, rtol=1e-12, atol=1e-12):
        raise InputError("target values are not the stated combination of dictionary atoms")


def _check_steps(steps: int):
    if int(steps) != steps or steps < 1:
        raise InputError("steps must be a positive integer")


# ---------------------------------------------------------------------------
# algorithms


def maurey_greedy(target: ConvexTarget, dictionary: Dictionary, steps: int):
    """Equal-weight greedy averages in the weighted L^2 norm.

    At step k every support atom h is tried in f_k = ((k-1) f_{k-1} + h)/k
    and the one giving the smallest error is kept; ties go to the lowest
    index. The averaging argument guarantees some atom meets the bound, so
    the best one does as well.
    """
    _check_target(target, dictionary)
    _check_steps(steps)
    f = target.values
    w = dictionary.weights
    sG = dictionary.s_G()
    fn = math.sqrt(float(w @ f ** 2))
    support = np.sort(target.support)
    H = dictionary.atoms[support]
    counts = np.zeros(dictionary.size)
    fk = np.zeros_like(f)
    trace = GreedyTrace("maurey")
    for k in range(1, steps + 1):
        cand = ((k - 1) * fk[None, :] + H) / k
        err2 = ((f[None, :] - cand) ** 2) @ w
        j = int(np.argmin(err2))
        fk = cand[j]
        counts[support[j]] += 1
        e = math.sqrt(max(float(err2[j]), 0.0))
        bound = maurey_bound(sG, min(fn, sG), k)
        _certify("maurey", k, e, bound)
        trace.steps.append(StepRecord(k, int(support[j]), 1.0 / k, e, bound))
        if e < EXACT_TOL:
            trace.exact = True
            break
    n = len(trace.steps)
    return Combination(counts / n, fk), trace


def ks_greedy(target: ConvexTarget, dictionary: Dictionary, steps: int):
    """Convex greedy with optimal step size and a geometric certificate.

    Step 1 takes the support atom nearest to f. Afterwards only atoms with
    q = -<f - f_{n-1}, f - g> > 0 are admissible; among them the one with the
    smallest post-update error is chosen. rho_n is the running minimum of
    q / (e_{n-1} r) from step 2 on, and the bound at step n is
    sqrt((1 - rho_n^2)^(n-1) (s_G^2 - |f|^2)).
    """
    _check_target(target, dictionary)
    _check_steps(steps)
    f = target.values
    w = dictionary.weights
    sG = dictionary.s_G()
    fn = min(math.sqrt(float(w @ f ** 2)), sG)
    c = sG * sG - fn * fn
    support = np.sort(target.support)
    D = f[None, :] - dictionary.atoms[support]      # f - g for each support atom
    r2_all = (D ** 2) @ w
    trace = GreedyTrace("ks", extra_columns=("rho", "q", "r"))

    j = int(np.argmin(r2_all))
    coeffs = np.zeros(dictionary.size)
    coeffs[support[j]] = 1.0
    resid = D[j].copy()                              # f - f_1
    e = math.sqrt(float(r2_all[j]))
    bound = math.sqrt(c)
    _certify("ks", 1, e, bound)
    trace.steps.append(StepRecord(1, int(support[j]), 0.0, e, bound))
    rho = None
    for n in range(2, steps + 1):
        if e < EXACT_TOL:
            trace.exact = True
            break
        e2 = e * e
        q = -(D @ (w * resid))
        admissible = q > 0
        if not np.any(admissible):
            raise NumericalError(
                f"ks: no atom with positive correlation at step {n} while residual is {e!r}", estimate=e)
        den = e2 + 2.0 * q + r2_all
        new_e2 = np.where(admissible, (e2 * r2_all - q * q) / np.where(den > 0, den, 1.0), np.inf)
        j = int(np.argmin(new_e2))
        alpha, _ = ks_line_search(e2, float(q[j]), float(r2_all[j]))
        resid = alpha * resid + (1.0 - alpha) * D[j]
        coeffs *= alpha
        coeffs[support[j]] += 1.0 - alpha
        e_new = math.sqrt(max(float(resid ** 2 @ w), 0.0))
        r = math.sqrt(float(r2_all[j]))
        ratio = float(q[j]) / (e * r)
        rho = ratio if rho is None else min(rho, ratio)
        tau_n = max(0.0, 1.0 - rho * rho)
        if e_new * e_new > tau_n * e2 + BOUND_ATOL:
            raise CertificateViolation(
                f"ks: step {n} breaks e_n^2 <= (1 - rho_n^2) e_(n-1)^2",
                step=n, error=e_new, bound=math.sqrt(tau_n * e2))
        bound = math.sqrt(tau_n ** (n - 1) * c)
        _certify("ks", n, e_new, bound)
        trace.steps.append(StepRecord(n, int(support[j]), alpha, e_new, bound,
                                      {"rho": rho, "q": float(q[j]), "r": r}))
        e = e_new
    else:
        if e < EXACT_TOL:
            trace.exact = True
    trace.tau = None if rho is None else max(0.0, 1.0 - rho * rho)
    return Combination(coeffs, f - resid), trace


def norming_functional(u, weights, p: float) -> np.ndarray:
    """Density phi with Pi(g) = sum(weights * phi * g), |Pi| = 1 and Pi(u) = |u|_p."""
    u = np.asarray(u, dtype=float)
    nu = lp_norm(u, weights, p)
    if nu == 0:
        raise InputError("norming functional of the zero vector is undefined")
    return np.sign(u) * (np.abs(u) / nu) ** (p - 1.0)


def ddgs_greedy(target: ConvexTarget, dictionary: Dictionary, p: float, steps: int):
    """Equal-weight greedy averages in L^p.

    With Pi the norming functional of f - f_n, an atom h is admissible when
    Pi(f - h) <= 0 (one always exists because the weighted sum of these
    values is zero). Among admissible atoms the one giving the smallest next
    error is taken; if roundoff leaves none, the atom minimizing Pi(f - h) is
    used instead.
    """
    _conjugate_exponents(p)
    _check_target(target, dictionary)
    _check_steps(steps)
    f = target.values
    w = dictionary.weights
    support = np.sort(target.support)
    H = dictionary.atoms[support]
    D = f[None, :] - H
    dist = np.array([lp_norm(d, w, p) for d in D])
    r = float(dist.max())
    counts = np.zeros(dictionary.size)
    trace = GreedyTrace("ddgs", extra_columns=("r",))

    j = int(np.argmin(dist))
    fk = H[j].copy()
    counts[support[j]] += 1
    e = float(dist[j])
    bound = ddgs_bound(r, p, 1)
    _certify("ddgs", 1, e, bound)
    trace.steps.append(StepRecord(1, int(support[j]), 1.0, e, bound, {"r": r}))
    for n in range(1, steps):
        if e < EXACT_TOL:
            trace.exact = True
            break
        phi = norming_functional(f - fk, w, p)
        pi = D @ (w * phi)
        cand = (n * fk[None, :] + H) / (n + 1)
        errs = np.array([lp_norm(f - c_, w, p) for c_ in cand])
        admissible = pi <= 0
        if np.any(admissible):
            j = int(np.argmin(np.where(admissible, errs, np.inf)))
        else:
            j = int(np.argmin(pi))
        fk = cand[j]
        counts[support[j]] += 1
        e = float(errs[j])
        bound = ddgs_bound(r, p, n + 1)
        _certify("ddgs", n + 1, e, bound)
        trace.steps.append(StepRecord(n + 1, int(support[j]), 1.0 / (n + 1), e, bound, {"r": r}))
    else:
        if e < EXACT_TOL:
            trace.exact = True
    return Combination(counts / len(trace.steps), fk), trace


# ---------------------------------------------------------------------------
# G-variation


def _matches(term: Term, unit: Unit) -> bool:
    return (term.activation == unit.activation
            and len(term.w) == len(unit.w)
            and all(abs(a - b) <= MATCH_TOL * max(1.0, abs(b)) for a, b in zip(term.w, unit.w))
            and abs(term.b - unit.b) <= MATCH_TOL * max(1.0, abs(unit.b)))


def g_variation_upper_bound(net: ShallowNet, dictionary: Dictionary) -> float:
    """sum |c_j|, valid once every unit of ``net`` is a dictionary unit (sign folded into c_j)."""
    if not net.terms:
        return 0.0
    if dictionary.units is None:
        raise InputError("dictionary carries no units to match network terms against")
    for t in net.terms:
        if not any(_matches(t, u) for u in dictionary.units):
            raise InputError(f"term (w={t.w}, b={t.b}, {t.activation.kind}) is not in the dictionary")
    return float(sum(abs(t.c) for t in net.terms))


# ---------------------------------------------------------------------------
# test fixtures that are also useful from the CLI


def orthonormal_atoms(m: int, weights, seed: int = 0) -> np.ndarray:
    """m atoms orthonormal for the weighted inner product sum(weights * u * v)."""
    w = np.asarray(weights, dtype=float)
    if m > w.size:
        raise InputError(f"cannot fit {m} orthonormal atoms on {w.size} nodes")
    if np.any(w <= 0):
        raise InputError("orthonormal atoms need strictly positive weights")
    Z = np.random.default_rng(seed).standard_normal((w.size, m))
    Qm, _ = np.linalg.qr(np.sqrt(w)[:, None] * Z)
    return (Qm / np.sqrt(w)[:, None]).T


def random_convex_target(dictionary: Dictionary, rng: np.random.Generator,
                         support_size: int | None = None) -> ConvexTarget:
    m = dictionary.size
    k = m if support_size is None else min(support_size, m)
    idx = np.sort(rng.choice(m, size=k, replace=False))
    a = rng.dirichlet(np.ones(k))
    a = a / a.sum()
    return ConvexTarget.assemble(dictionary, a, idx)


def dictionary_from_net_units(units: Sequence[Unit], lo: float, hi: float, resolution: int,
                              input_dim: int = 1) -> Dictionary:
    """Atoms sampled from network units on a 1-D trapezoid grid."""
    from .netcore import trapezoid_weights
    if input_dim != 1:
        raise InputError("grid dictionaries from units are built on 1-D grids only")
    x = np.linspace(lo, hi, resolution)
    atoms = np.stack([u.activation(x * u.w[0] + u.b) for u in units])
    return Dictionary(atoms, trapezoid_weights(resolution, lo, hi), tuple(units), input_dim)
