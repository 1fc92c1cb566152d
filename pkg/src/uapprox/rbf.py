"""Radial basis networks obtained by discretizing a mollification.

For a kernel K with nonzero integral, phi = K / int K is a mollifier and
phi_sigma * f_c is close to f_c for small sigma. Replacing the convolution
integral by a midpoint Riemann sum over an n^r equipartition of [-T, T]^r
yields a finite network

    q(x) = sum_i w_i K((x - z_i) / sigma)

with centers z_i at the cell midpoints and weights
w_i = sigma^-r * f_c(z_i) * (2T/n)^r / int K.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HypothesisViolation, InputError
from .netcore import GriddedFunction, lp_norm, trapezoid_weights

KERNEL_KINDS = ("gaussian", "triangular", "custom-table-radial")
TRUNCATION_REL = 1e-12
GAUSSIAN_RADIUS_CAP = 40.0
INTEGRAL_FLOOR = 1e-8
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class RbfKernel:
    """Radial kernel K(x) = k(|x|).

    ``custom-table-radial`` interpolates the profile linearly between the
    given radii (first half of ``params``) and values (second half); the
    last value must be 0 and the profile is 0 beyond the table.
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InputError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.kind == "custom-table-radial":
            n = len(self.params)
            if n < 4 or n % 2:
                raise InputError("custom-table-radial needs radii then values, at least two of each")
            rho = np.asarray(self.params[: n // 2])
            if rho[0] != 0.0 or np.any(np.diff(rho) <= 0):
                raise InputError("table radii must start at 0 and increase strictly")
            if self.params[-1] != 0.0:
                raise InputError("table profile must end at 0 for compact support")

    def profile(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-rho * rho)
        if self.kind == "triangular":
            return np.maximum(0.0, 1.0 - rho)
        n = len(self.params) // 2
        return np.interp(rho, self.params[:n], self.params[n:], right=0.0)

    def __call__(self, X) -> np.ndarray:
        """K at points of shape (N, r); a 1-D array is read as N scalar points."""
        X = np.asarray(X, dtype=float)
        rho = np.abs(X) if X.ndim == 1 else np.linalg.norm(X, axis=-1)
        return self.profile(rho)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        if self.kind == "triangular":
            return (1.0,)
        if self.kind == "custom-table-radial":
            return tuple(self.params[: len(self.params) // 2][1:])
        return ()

    @property
    def bound(self) -> float:
        """sup |K|."""
        if self.kind == "custom-table-radial":
            return float(np.max(np.abs(self.params[len(self.params) // 2:])))
        return 1.0

    def support_radius(self) -> float:
        """Radius beyond which |K| < 1e-12 sup |K| (exact support for compact kernels)."""
        if self.kind == "triangular":
            return 1.0
        if self.kind == "custom-table-radial":
            return float(self.params[len(self.params) // 2 - 1])
        R = 1.0
        while R < GAUSSIAN_RADIUS_CAP and abs(float(self.profile(R))) >= TRUNCATION_REL * self.bound:
            R *= 1.25
        return min(R, GAUSSIAN_RADIUS_CAP)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "RbfKernel":
        return cls(d["kind"], tuple(d.get("params", ())))


def sphere_area(dim: int) -> float:
    """Surface measure of the unit sphere in R^dim (2 for dim = 1)."""
    return 2.0 * math.pi ** (dim / 2) / math.gamma(dim / 2)


def _radial_quad(kernel: RbfKernel, dim: int, a: float, b: float, panels: int = 64) -> float:
    cuts = [a] + [p for p in kernel.breakpoints if a < p < b] + [b]
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        edges = np.linspace(lo, hi, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        rho = (mid[:, None] + half[:, None] * _GL_NODES[None, :])
        vals = kernel.profile(rho) * rho ** (dim - 1)
        total += float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * vals))
    return total


def kernel_integral(kernel: RbfKernel, dim: int, return_estimate: bool = False):
    """Integral of K over R^dim via its radial profile.

    The radial integral is truncated at :meth:`RbfKernel.support_radius`;
    the truncation estimate is the mass on the next shell [R, 2R].
    """
    if dim < 1:
        raise InputError("dimension must be positive")
    R = kernel.support_radius()
    area = sphere_area(dim)
    value = area * _radial_quad(kernel, dim, 0.0, R)
    estimate = 0.0 if kernel.kind != "gaussian" else abs(area * _radial_quad(kernel, dim, R, 2 * R))
    if abs(value) < INTEGRAL_FLOOR:
        raise HypothesisViolation(f"kernel integral {value!r} is too close to 0")
    return (value, estimate) if return_estimate else value


@dataclass(frozen=True)
class RbfNet:
    centers: np.ndarray      # (M, r)
    weights: np.ndarray      # (M,)
    sigma: float
    kernel: RbfKernel

    @property
    def input_dim(self) -> int:
        return self.centers.shape[1]

    def __len__(self) -> int:
        return self.centers.shape[0]

    def __call__(self, X, chunk: int = 4096) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim <= 1:
            X = X.reshape(-1, 1) if self.input_dim == 1 else X.reshape(1, -1)
        if X.shape[1] != self.input_dim:
            raise InputError(f"points have dimension {X.shape[1]}, net expects {self.input_dim}")
        out = np.empty(X.shape[0])
        for s in range(0, X.shape[0], chunk):
            diff = (X[s:s + chunk, None, :] - self.centers[None, :, :]) / self.sigma
            out[s:s + chunk] = self.kernel(diff.reshape(-1, self.input_dim)).reshape(diff.shape[:2]) @ self.weights
        return out

    def to_dict(self) -> dict:
        return {"centers": self.centers.tolist(), "weights": self.weights.tolist(),
                "sigma": self.sigma, "kernel": self.kernel.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "RbfNet":
        C = np.asarray(d["centers"], dtype=float)
        return cls(C.reshape(len(C), -1), np.asarray(d["weights"], dtype=float),
                   float(d["sigma"]), RbfKernel.from_dict(d["kernel"]))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _half_width(f_c: GriddedFunction) -> float:
    lo, hi = np.asarray(f_c.lo), np.asarray(f_c.hi)
    T = float(hi[0])
    if not (np.allclose(lo, -T, rtol=0, atol=1e-12 * T) and np.allclose(hi, T, rtol=0, atol=1e-12 * T)):
        raise InputError("target box must be the cube [-T, T]^r")
    return T


def _boundary_values(f_c: GriddedFunction) -> np.ndarray:
    S = f_c.samples.reshape(f_c.resolution)
    faces = []
    for ax in range(f_c.dim):
        faces.append(np.take(S, 0, axis=ax).ravel())
        faces.append(np.take(S, -1, axis=ax).ravel())
    return np.concatenate(faces)


def cell_midpoints(T: float, n: int, dim: int) -> np.ndarray:
    pitch = 2.0 * T / n
    ax = -T + (np.arange(n) + 0.5) * pitch
    mesh = np.meshgrid(*([ax] * dim), indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def default_sigma(T: float, n: int) -> float:
    return 2.0 * (2.0 * T / n)


def build_rbf_net(kernel: RbfKernel, f_c: GriddedFunction, n: int, sigma: float | None = None) -> RbfNet:
    """Midpoint discretization of phi_sigma * f_c on n points per axis."""
    if n < 1:
        raise InputError("n must be a positive integer")
    T = _half_width(f_c)
    if sigma is None:
        sigma = default_sigma(T, n)
    if not sigma > 0:
        raise InputError("sigma must be positive")
    edge = np.max(np.abs(_boundary_values(f_c)))
    if edge > 1e-9 * max(1.0, float(np.max(np.abs(f_c.samples)))):
        raise InputError(f"target must vanish on the boundary of its box (max |f| there is {edge:.3g})")
    r = f_c.dim
    integral = kernel_integral(kernel, r)
    Z = cell_midpoints(T, n, r)
    fvals = f_c.evaluate(Z)
    weights = (1.0 / sigma ** r) * fvals * (2.0 * T / n) ** r / integral
    return RbfNet(Z, weights, float(sigma), kernel)


def mollified_value(kernel: RbfKernel, f_c: GriddedFunction, sigma: float, points,
                    resolution: int = 20001) -> np.ndarray:
    """Reference (phi_sigma * f_c)(x) by dense trapezoid quadrature over the target box.

    1-D targets use ``resolution`` nodes; higher dimensions use the target's own grid.
    """
    P = np.asarray(points, dtype=float)
    r = f_c.dim
    P = P.reshape(-1, 1) if (P.ndim <= 1 and r == 1) else np.atleast_2d(P)
    integral = kernel_integral(kernel, r)
    if r == 1:
        y = np.linspace(f_c.lo[0], f_c.hi[0], resolution)
        fy = f_c.evaluate(y.reshape(-1, 1))
        wy = trapezoid_weights(resolution, f_c.lo[0], f_c.hi[0])
        Y = y.reshape(-1, 1)
    else:
        Y, fy, wy = f_c.points, f_c.samples, f_c.weights
    out = np.empty(P.shape[0])
    for i, x in enumerate(P):
        k = kernel((x[None, :] - Y) / sigma) / (integral * sigma ** r)
        out[i] = float(np.sum(wy * k * fy))
    return out


def _extended_grid(f_c: GriddedFunction, kernel: RbfKernel, sigma: float, resolution: int | None):
    T = _half_width(f_c)
    L = T + kernel.support_radius() * sigma
    r = f_c.dim
    if resolution is None:
        resolution = 4097 if r == 1 else 129
    ax = np.linspace(-L, L, resolution)
    mesh = np.meshgrid(*([ax] * r), indexing="ij")
    X = np.stack([m.reshape(-1) for m in mesh], axis=1)
    w = np.ones(1)
    for _ in range(r):
        w = np.multiply.outer(w, trapezoid_weights(resolution, -L, L)).reshape(-1)
    inside = np.all(np.abs(X) <= T, axis=1)
    fx = np.zeros(X.shape[0])
    fx[inside] = f_c.evaluate(X[inside])
    return X, w, fx


def rbf_error(net: RbfNet, f_c: GriddedFunction, p: float = 1.0, resolution: int | None = None) -> float:
    """L^p distance between the network and f_c (extended by 0) over a box covering the kernel tails."""
    if p < 1:
        raise InputError(f"L^p exponent must be >= 1, got {p}")
    X, w, fx = _extended_grid(f_c, net.kernel, net.sigma, resolution)
    return lp_norm(net(X) - fx, w, p)


def rbf_error_sweep(kernel: RbfKernel, f_c: GriddedFunction, sigma: float | None,
                    n_list: Sequence[int], p: float = 1.0,
                    resolution: int | None = None) -> list[tuple[int, float]]:
    """Table of (n, |q_n - f_c|_p) for the networks built at each n."""
    table = []
    for n in n_list:
        net = build_rbf_net(kernel, f_c, int(n), sigma)
        table.append((int(n), rbf_error(net, f_c, p, resolution)))
    return table
