"""One-dimensional trigonometric approximation machinery.

Finite differences and moduli of smoothness of 2pi-periodic functions, the
Dirichlet, Fejer and generalized Jackson kernels, and the smoothing
operator S_{n,r} that turns a periodic function into a trigonometric
polynomial of degree at most n whose error is controlled by omega_r(f)(1/n).

The operator is taken in the form

    S_{n,r} f(x) = (1/2pi) int_{-pi}^{pi} [(-1)^(r+1) Delta_t^r f(x) + f(x)] K_{n,r}(t) dt

with K_{n,r} = J_{m,r}, m = floor(n/r) + 1. Expanding the difference gives
sum_{k=1..r} (-1)^(k+1) C(r,k) f(x + k t), so the f(x) terms cancel and what
remains is a trigonometric polynomial of degree r(m-1) <= n.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, NumericalError

SERIES_SWITCH = 1e-6
SIMPSON_RTOL = 1e-10
DEGREE_TOL = 1e-8
OMEGA_H_POINTS = 64
OMEGA_X_POINTS = 1024
CONVERGENCE_RTOL = 1e-9
MIN_QUAD_POINTS = 2 ** 12
MAX_QUAD_POINTS = 2 ** 22
ERROR_GRID = 4096


# ---------------------------------------------------------------------------
# differences and moduli


def difference(f: Callable, r: int, h: float, x):
    """r-th forward difference sum_k C(r,k) (-1)^(r-k) f(x + k h)."""
    if r < 0:
        raise InputError("difference order must be nonnegative")
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for k in range(r + 1):
        total = total + math.comb(r, k) * (-1) ** (r - k) * np.asarray(f(x + k * h), dtype=float)
    return total


def _periodic_norm(values: np.ndarray, p) -> float:
    if p in ("sup", math.inf):
        return float(np.max(np.abs(values)))
    p = float(p)
    if p < 1:
        raise InputError(f"L^p exponent must be >= 1, got {p}")
    step = 2.0 * math.pi / values.size
    return float((step * np.sum(np.abs(values) ** p)) ** (1.0 / p))


def periodic_grid(n: int) -> np.ndarray:
    return -math.pi + 2.0 * math.pi * np.arange(n) / n


def modulus_of_smoothness(f: Callable, r: int, p, t: float) -> float:
    """omega_r(f)_p(t) on (-pi, pi), maximized over a log-spaced h grid in (0, t].

    This is a lower approximation of the supremum over all 0 < h <= t.
    """
    if not 0 < t <= 2 * math.pi:
        raise InputError(f"t must lie in (0, 2pi], got {t}")
    if r < 1:
        raise InputError("order r must be positive")
    x = periodic_grid(OMEGA_X_POINTS)
    best = 0.0
    for h in np.geomspace(t * 1e-3, t, OMEGA_H_POINTS):
        best = max(best, _periodic_norm(difference(f, r, float(h), x), p))
    return best


# ---------------------------------------------------------------------------
# kernels


def sine_ratio(m: int, x):
    """sin(m x / 2) / sin(x / 2), continuous at multiples of 2pi.

    After reducing x to y in [-pi, pi] the ratio is the sum of cos(nu y) over
    nu = -(m-1)/2, ..., (m-1)/2, whose Taylor series is used near y = 0.
    """
    if m < 1:
        raise InputError("sine ratio order must be positive")
    x = np.asarray(x, dtype=float)
    k = np.round(x / (2.0 * math.pi))
    y = x - 2.0 * math.pi * k
    sign = np.where((k.astype(np.int64) * (m - 1)) % 2 == 0, 1.0, -1.0)
    s = np.sin(0.5 * y)
    near = np.abs(s) < SERIES_SWITCH
    # power sums of nu over the symmetric range
    q = m * m
    S2 = m * (q - 1) / 12.0
    S4 = m * (q - 1) * (3 * q - 7) / 240.0
    S6 = m * (q - 1) * (3 * q * q - 18 * q + 31) / 1344.0
    y2 = y * y
    series = m - y2 / 2.0 * S2 + y2 * y2 / 24.0 * S4 - y2 ** 3 / 720.0 * S6
    safe = np.where(near, 1.0, s)
    ratio = np.where(near, series, np.sin(0.5 * m * y) / safe)
    return sign * ratio


def dirichlet(N: int, x):
    """D_N(x) = 1 + 2 sum_{k=1..N} cos(kx) = sin((N + 1/2) x) / sin(x / 2)."""
    if N < 0:
        raise InputError("N must be nonnegative")
    return sine_ratio(2 * N + 1, x)


def fejer(N: int, x):
    """F_N(x) = (1/(N+1)) [sin((N+1) x / 2) / sin(x / 2)]^2."""
    if N < 0:
        raise InputError("N must be nonnegative")
    return sine_ratio(N + 1, x) ** 2 / (N + 1)


def _simpson_adaptive(g: Callable, a: float, b: float, panels: int, rtol: float) -> float:
    """Adaptive Simpson quadrature of a vectorized g on [a, b].

    Panels are refined level by level: every unconverged panel of the
    current level is halved and all new nodes are evaluated in one call.
    """
    edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    flo, fmid, fhi = g(lo), g(0.5 * (lo + hi)), g(hi)
    whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi)
    scale = abs(float(np.sum(whole))) or 1.0
    tol = rtol * scale * (hi - lo) / (b - a)
    total = 0.0
    while lo.size:
        mid = 0.5 * (lo + hi)
        ql, qr = g(0.5 * (lo + mid)), g(0.5 * (mid + hi))
        left = (mid - lo) / 6.0 * (flo + 4 * ql + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * qr + fhi)
        delta = left + right - whole
        done = (np.abs(delta) <= 15.0 * tol) | (hi - lo < 1e-12)
        total += float(np.sum((left + right + delta / 15.0)[done]))
        keep = ~done
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        flo, fmid, fhi, ql, qr = flo[keep], fmid[keep], fhi[keep], ql[keep], qr[keep]
        left, right, tol = left[keep], right[keep], tol[keep] / 2
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        flo, fmid, fhi = np.concatenate([flo, fmid]), np.concatenate([ql, qr]), np.concatenate([fmid, fhi])
        whole, tol = np.concatenate([left, right]), np.concatenate([tol, tol])
    return total


@functools.lru_cache(maxsize=256)
def jackson_constant(N: int, r: int) -> float:
    """c_{N,r} = (1/pi) int_0^pi [sin(N x / 2) / sin(x / 2)]^(2r) dx."""
    if N < 1:
        raise InputError("N must be positive")
    if r < 1:
        raise InputError("r must be positive")
    g = lambda x: sine_ratio(N, x) ** (2 * r)
    return _simpson_adaptive(g, 0.0, math.pi, max(8, 4 * N), SIMPSON_RTOL) / math.pi


def jackson_constant_bounds(N: int, r: int) -> tuple[float, float]:
    lower = (2.0 / math.pi) ** (2 * r) * N ** (2 * r - 1)
    upper = math.pi ** (2 * r - 1) * (2.0 ** (-2 * r) + 1.0 / (2 * r - 1)) * N ** (2 * r - 1)
    return lower, upper


@dataclass(frozen=True)
class JacksonKernelSpec:
    N: int
    r: int
    c_N_r: float

    @property
    def pointwise_bound(self) -> float:
        return (math.pi / 2) ** (4 * self.r) * self.N


def make_kernel(N: int, r: int) -> JacksonKernelSpec:
    if r < 2:
        raise InputError(f"Jackson kernels need r >= 2, got {r}")
    return JacksonKernelSpec(int(N), int(r), jackson_constant(N, r))


def jackson_kernel(spec: JacksonKernelSpec, x):
    """J_{N,r}(x) = [sin(N x / 2) / sin(x / 2)]^(2r) / c_{N,r}."""
    return sine_ratio(spec.N, x) ** (2 * spec.r) / spec.c_N_r


# ---------------------------------------------------------------------------
# trigonometric polynomials


@dataclass(frozen=True)
class TrigPoly:
    """a_0 + sum_{k=1..N} (a_k cos kx + b_k sin kx).

    ``a`` has N+1 entries and ``b`` has N (b_1..b_N). ``tail`` records the
    largest coefficient magnitude discarded when the polynomial was read
    off a sampled function.
    """

    a: np.ndarray
    b: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.size == 0 or b.size != a.size - 1:
            raise InputError("need a_0..a_N and b_1..b_N")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def N(self) -> int:
        return self.a.size - 1

    @property
    def degree(self) -> int:
        mag = np.abs(self.a.copy())
        mag[1:] += np.abs(self.b)
        nz = np.nonzero(mag > 1e-12)[0]
        return int(nz[-1]) if nz.size else 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        k = np.arange(1, self.N + 1)
        kx = np.multiply.outer(x, k)
        return self.a[0] + np.cos(kx) @ self.a[1:] + np.sin(kx) @ self.b

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        n = max(self.N, other.N)
        a = np.zeros(n + 1)
        b = np.zeros(n)
        for t in (self, other):
            a[: t.N + 1] += t.a
            b[: t.N] += t.b
        return TrigPoly(a, b, max(self.tail, other.tail))

    def scaled(self, factor: float) -> "TrigPoly":
        return TrigPoly(factor * self.a, factor * self.b, abs(factor) * self.tail)

    def to_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        return cls(np.asarray(d["a"], dtype=float), np.asarray(d["b"], dtype=float))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_samples(cls, values, degree: int) -> "TrigPoly":
        """Coefficients up to ``degree`` of samples on the grid 2pi j / len(values), j = 0..len-1."""
        v = np.asarray(values, dtype=float)
        L = v.size
        if degree >= L / 2:
            raise InputError("sample grid too coarse for the requested degree")
        c = np.fft.rfft(v) / L
        a = 2.0 * c.real
        a[0] = c[0].real
        b = -2.0 * c.imag
        if L % 2 == 0:
            a[-1] = c[-1].real
        tail_a = np.abs(a[degree + 1:])
        tail_b = np.abs(b[degree + 1:])
        tail = float(max(tail_a.max(initial=0.0), tail_b.max(initial=0.0)))
        return cls(a[: degree + 1], b[1: degree + 1], tail)


def chebyshev_transfer(tp: TrigPoly, tol: float = 1e-10) -> np.polynomial.Chebyshev:
    """Algebraic polynomial P on [-2, 2] with P(2 cos x) = tp(x).

    Uses cos(kx) = T_k(t/2) at t = 2 cos x, so only cosine polynomials transfer.
    """
    if np.any(np.abs(tp.b) > tol * max(1.0, float(np.max(np.abs(tp.a))))):
        raise InputError("only even (cosine) trigonometric polynomials transfer to algebraic ones")
    return np.polynomial.Chebyshev(tp.a.copy(), domain=[-2.0, 2.0])


# ---------------------------------------------------------------------------
# smoothing operator


def smoothing_order(n: int, r: int) -> int:
    """m(n, r) = floor(n / r) + 1."""
    return n // r + 1


def _folded_kernel(spec: JacksonKernelSpec, v: np.ndarray) -> np.ndarray:
    """sum_{k=1..r} (-1)^(k+1) C(r,k) (1/k) sum_{j<k} K((v + 2pi j)/k)."""
    total = np.zeros_like(v)
    for k in range(1, spec.r + 1):
        part = np.zeros_like(v)
        for j in range(k):
            part += jackson_kernel(spec, (v + 2.0 * math.pi * j) / k)
        total += (-1) ** (k + 1) * math.comb(spec.r, k) * part / k
    return total


def _smooth_on_grid(f: Callable, kernel_hat: np.ndarray, nx: int, M: int) -> np.ndarray:
    """S f on the grid 2pi j / nx, with f's Fourier coefficients from an M-point trapezoid rule.

    S f(x) = (1/2pi) int f(x + v) K(v) dv has coefficients f_k conj(K_k).
    """
    v = 2.0 * math.pi * np.arange(M) / M
    f_hat = np.fft.rfft(np.asarray(f(v), dtype=float))[: nx // 2 + 1] / M
    return np.fft.irfft(f_hat * np.conj(kernel_hat) * nx, n=nx)


def apply_smoothing_operator(f: Callable, n: int, r: int, return_estimate: bool = False):
    """S_{n,r} f as a trigonometric polynomial of degree n.

    The folded kernel is sampled on the 4(n+1)-point grid x_j = 2pi j / (4(n+1))
    and f's Fourier coefficients come from the periodic trapezoid rule on a
    fine grid, doubled until two successive refinements agree. S f is
    evaluated on the coarse grid and read back by FFT; coefficients above n
    must vanish to 1e-8.
    """
    if n < 1:
        raise InputError("n must be a positive integer")
    if r < 2:
        raise InputError(f"the smoothing operator needs r >= 2, got {r}")
    spec = make_kernel(smoothing_order(n, r), r)
    nx = 4 * (n + 1)
    kernel_hat = np.fft.rfft(_folded_kernel(spec, 2.0 * math.pi * np.arange(nx) / nx)) / nx
    M = MIN_QUAD_POINTS
    while M < nx:
        M *= 2
    prev = _smooth_on_grid(f, kernel_hat, nx, M)
    while True:
        M *= 2
        cur = _smooth_on_grid(f, kernel_hat, nx, M)
        est = float(np.max(np.abs(cur - prev)))
        if est <= CONVERGENCE_RTOL * max(1.0, float(np.max(np.abs(cur)))):
            break
        if 2 * M > MAX_QUAD_POINTS:
            raise NumericalError(f"smoothing quadrature did not settle; last change {est:.3g}", estimate=est)
        prev = cur
    tp = TrigPoly.from_samples(cur, n)
    if tp.tail > DEGREE_TOL:
        raise NumericalError(f"degree certificate failed: coefficient {tp.tail:.3g} above degree {n}",
                             estimate=tp.tail)
    return (tp, est) if return_estimate else tp


@dataclass
class JacksonRateRow:
    n: int
    error: float
    omega: float
    tail: float

    @property
    def ratio(self) -> float:
        return self.error / self.omega if self.omega > 0 else math.inf


def approximation_error(f: Callable, tp: TrigPoly, p="sup", points: int = ERROR_GRID) -> float:
    x = periodic_grid(points)
    return _periodic_norm(tp(x) - np.asarray(f(x), dtype=float), p)


def jackson_rate_experiment(f: Callable, r: int, n_list: Sequence[int], p="sup") -> list[JacksonRateRow]:
    """Rows (n, |S_{n,r} f - f|_p, omega_r(f)_p(1/n), discarded tail)."""
    rows = []
    for n in n_list:
        tp = apply_smoothing_operator(f, int(n), r)
        rows.append(JacksonRateRow(int(n), approximation_error(f, tp, p),
                                   modulus_of_smoothness(f, r, p, 1.0 / n), tp.tail))
    return rows


def ratio_spread(rows: Sequence[JacksonRateRow]) -> float:
    """max / min of error / omega over the rows (the empirical constant's variation)."""
    ratios = [row.ratio for row in rows if row.omega > 0]
    if not ratios:
        return 1.0
    return max(ratios) / min(ratios)
