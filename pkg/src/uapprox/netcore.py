"""Activations, shallow networks, sampled targets and grid error metrics.

A shallow network is the finite sum ``sum_j c_j * psi_j(w_j . x + b_j)``.
Every construction in the package returns one, so this module also owns the
JSON form of a network::

    {"input_dim": d,
     "terms": [{"c": ..., "w": [...], "b": ..., "activation": {"kind": ..., "params": [...]}}]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InputError

ACTIVATION_KINDS = (
    "heaviside",
    "logistic",
    "piecewise-cosine-squashing",
    "exponential",
    "custom-table",
)

# Default grid resolutions: 1-D experiments and boxes of dimension <= 3.
DEFAULT_RESOLUTION_1D = 1025
DEFAULT_RESOLUTION_ND = 65


def _cos_squash(t: np.ndarray) -> np.ndarray:
    return np.where(t <= -np.pi / 2, 0.0, np.where(t >= 0.0, 1.0, np.cos(np.clip(t, -np.pi / 2, 0.0))))


@dataclass(frozen=True)
class Activation:
    """Scalar activation with a tagged regularity class.

    ``kind`` selects the formula. Only ``custom-table`` uses ``params``: the
    first half are strictly increasing abscissae, the second half the values.
    Beyond the table the activation is held constant.
    """

    kind: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise InputError(f"unknown activation kind {self.kind!r}; expected one of {ACTIVATION_KINDS}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.kind == "custom-table":
            if len(self.params) < 4 or len(self.params) % 2:
                raise InputError("custom-table needs an even number (>= 4) of params: xs then ys")
            xs = np.asarray(self.params[: len(self.params) // 2])
            if np.any(np.diff(xs) <= 0):
                raise InputError("custom-table abscissae must be strictly increasing")

    @classmethod
    def table(cls, xs: Sequence[float], ys: Sequence[float]) -> "Activation":
        if len(xs) != len(ys):
            raise InputError("table abscissae and values differ in length")
        return cls("custom-table", tuple(xs) + tuple(ys))

    @property
    def table_xs(self) -> np.ndarray:
        return np.asarray(self.params[: len(self.params) // 2])

    @property
    def table_ys(self) -> np.ndarray:
        return np.asarray(self.params[len(self.params) // 2:])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "heaviside":
            return (t >= 0.0).astype(float)
        if self.kind == "logistic":
            # tanh form is overflow-free and gives exactly 0.5 at 0
            return 0.5 * (1.0 + np.tanh(0.5 * t))
        if self.kind == "piecewise-cosine-squashing":
            return _cos_squash(t)
        if self.kind == "exponential":
            return np.exp(t)
        return np.interp(t, self.table_xs, self.table_ys)

    @property
    def squashing(self) -> bool:
        """Monotone nondecreasing with limits 0 and 1."""
        if self.kind in ("heaviside", "logistic", "piecewise-cosine-squashing"):
            return True
        if self.kind == "custom-table":
            ys = self.table_ys
            return bool(np.all(np.diff(ys) >= 0) and ys[0] == 0.0 and ys[-1] == 1.0)
        return False

    @property
    def smooth(self) -> bool:
        return self.kind in ("logistic", "exponential")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "Activation":
        return cls(d["kind"], tuple(d.get("params", ())))


HEAVISIDE = Activation("heaviside")
LOGISTIC = Activation("logistic")
COSINE_SQUASHER = Activation("piecewise-cosine-squashing")
EXPONENTIAL = Activation("exponential")


@dataclass(frozen=True)
class Term:
    c: float
    w: tuple[float, ...]
    b: float
    activation: Activation

    def to_dict(self) -> dict:
        return {"c": self.c, "w": list(self.w), "b": self.b, "activation": self.activation.to_dict()}


def make_term(c: float, w, b: float, activation: Activation) -> Term:
    return Term(float(c), tuple(float(v) for v in np.atleast_1d(w)), float(b), activation)


@dataclass(frozen=True)
class ShallowNet:
    """Finite sum ``sum_j c_j * psi_j(w_j . x + b_j)`` on R^input_dim."""

    input_dim: int
    terms: tuple[Term, ...] = ()

    def __post_init__(self):
        if self.input_dim < 1:
            raise InputError("input_dim must be positive")
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            if len(t.w) != self.input_dim:
                raise InputError(f"term weight has dimension {len(t.w)}, net input_dim is {self.input_dim}")

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "ShallowNet") -> "ShallowNet":
        if other.input_dim != self.input_dim:
            raise InputError("cannot add nets of different input dimension")
        return ShallowNet(self.input_dim, self.terms + other.terms)

    def scaled(self, factor: float) -> "ShallowNet":
        return ShallowNet(self.input_dim, tuple(
            Term(factor * t.c, t.w, t.b, t.activation) for t in self.terms))

    def compose_affine(self, matrix, shift) -> "ShallowNet":
        """The net ``x -> self(matrix @ x + shift)``; matrix has shape (input_dim, new_dim)."""
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        s = np.atleast_1d(np.asarray(shift, dtype=float))
        if A.shape[0] != self.input_dim:
            raise InputError("affine map output dimension must equal input_dim")
        terms = []
        for t in self.terms:
            w = np.asarray(t.w)
            terms.append(make_term(t.c, w @ A, t.b + float(w @ s), t.activation))
        return ShallowNet(A.shape[1], tuple(terms))

    def _as_points(self, x) -> np.ndarray:
        X = np.asarray(x, dtype=float)
        if X.ndim == 0:
            X = X.reshape(1, 1)
        elif X.ndim == 1:
            X = X.reshape(-1, 1) if self.input_dim == 1 else X.reshape(1, -1)
        if X.shape[1] != self.input_dim:
            raise InputError(f"points have dimension {X.shape[1]}, net expects {self.input_dim}")
        return X

    def __call__(self, x) -> np.ndarray:
        """Evaluate at a batch of points, shape (N, d) or (N,) when d == 1."""
        X = self._as_points(x)
        out = np.zeros(X.shape[0])
        # index-order accumulation keeps results bit-reproducible
        for t in self.terms:
            out += t.c * t.activation(X @ np.asarray(t.w) + t.b)
        return out

    def to_dict(self) -> dict:
        return {"input_dim": self.input_dim, "terms": [t.to_dict() for t in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "ShallowNet":
        terms = tuple(
            make_term(t["c"], t["w"], t["b"], Activation.from_dict(t["activation"]))
            for t in d.get("terms", ())
        )
        return cls(int(d["input_dim"]), terms)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> "ShallowNet":
        return cls.from_dict(json.loads(s))


def eval_net(net: ShallowNet, x) -> float:
    """Value of ``net`` at a single point ``x`` of dimension ``net.input_dim``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise InputError(f"point has dimension {x.shape}, net expects {net.input_dim}")
    return float(net(x.reshape(1, -1))[0])


def trapezoid_weights(n: int, lo: float, hi: float) -> np.ndarray:
    if n < 2:
        raise InputError("trapezoid rule needs at least 2 nodes per axis")
    h = (hi - lo) / (n - 1)
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


@dataclass(frozen=True)
class GriddedFunction:
    """A target sampled on a tensor grid over an axis-aligned box.

    ``norm`` is ``"sup"`` or ``"lp"`` (with exponent ``p``); it picks what
    :func:`norm_error` measures. Composite trapezoid weights are always
    available so both metrics can be computed on any instance.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    resolution: tuple[int, ...]
    samples: np.ndarray
    norm: str = "sup"
    p: float | None = None
    source: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        res = np.atleast_1d(self.resolution).astype(int)
        if len(res) == 1 and len(lo) > 1:
            res = np.repeat(res, len(lo))
        res = tuple(int(v) for v in res)
        if not (len(lo) == len(hi) == len(res)):
            raise InputError("lo, hi and resolution must have one entry per axis")
        if any(h <= l for l, h in zip(lo, hi)):
            raise InputError("box must satisfy lo < hi on every axis")
        if any(r < 2 for r in res):
            raise InputError("resolution must be at least 2 per axis")
        samples = np.asarray(self.samples, dtype=float).reshape(-1)
        if samples.size != math.prod(res):
            raise InputError(f"expected {math.prod(res)} samples, got {samples.size}")
        if self.norm not in ("sup", "lp"):
            raise InputError("norm must be 'sup' or 'lp'")
        if self.norm == "lp" and (self.p is None or not 1 <= self.p < math.inf):
            raise InputError("lp norm needs an exponent p in [1, inf)")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "resolution", res)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_callable(cls, f: Callable, lo, hi, resolution=None, norm: str = "sup",
                      p: float | None = None) -> "GriddedFunction":
        """Sample a vectorized ``f`` (points of shape (N, d) -> (N,)) on the grid."""
        lo = tuple(np.atleast_1d(lo).astype(float))
        if resolution is None:
            resolution = DEFAULT_RESOLUTION_1D if len(lo) == 1 else DEFAULT_RESOLUTION_ND
        proto = cls(lo, hi, resolution, np.zeros(_grid_size(resolution, len(lo))), norm, p)
        X = proto.points
        vals = np.asarray(f(X[:, 0] if proto.dim == 1 else X), dtype=float)
        return cls(proto.lo, proto.hi, proto.resolution, vals, norm, p, source=f)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def axes(self) -> list[np.ndarray]:
        return [np.linspace(l, h, n) for l, h, n in zip(self.lo, self.hi, self.resolution)]

    @property
    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    @property
    def weights(self) -> np.ndarray:
        w = np.ones(1)
        for l, h, n in zip(self.lo, self.hi, self.resolution):
            w = np.multiply.outer(w, trapezoid_weights(n, l, h)).reshape(-1)
        return w

    @property
    def volume(self) -> float:
        return math.prod(h - l for l, h in zip(self.lo, self.hi))

    def evaluate(self, x) -> np.ndarray:
        """Exact values via the source callable, else multilinear interpolation."""
        X = np.atleast_2d(np.asarray(x, dtype=float))
        if self.dim == 1 and X.shape[0] == 1 and X.shape[1] != 1:
            X = X.T
        if self.source is not None:
            return np.asarray(self.source(X[:, 0] if self.dim == 1 else X), dtype=float)
        from scipy.interpolate import RegularGridInterpolator
        interp = RegularGridInterpolator(self.axes, self.samples.reshape(self.resolution),
                                         bounds_error=False, fill_value=0.0)
        return interp(X)

    def with_samples(self, samples) -> "GriddedFunction":
        return GriddedFunction(self.lo, self.hi, self.resolution, samples, self.norm, self.p)


def _grid_size(resolution, dim: int) -> int:
    res = np.atleast_1d(resolution).astype(int)
    if len(res) == 1:
        return int(res[0]) ** dim
    return int(np.prod(res))


def _net_on_grid(f: GriddedFunction, net: ShallowNet) -> np.ndarray:
    if net.input_dim != f.dim:
        raise InputError(f"net input_dim {net.input_dim} does not match grid dimension {f.dim}")
    return net(f.points)


def sup_error(f: GriddedFunction, net: ShallowNet) -> float:
    """Max over grid nodes of ``|f - net|``."""
    return float(np.max(np.abs(f.samples - _net_on_grid(f, net))))


def lp_norm(values, weights, p: float) -> float:
    if p < 1:
        raise InputError(f"L^p exponent must be >= 1, got {p}")
    v = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(v.max())
    return float(np.sum(weights * v ** p) ** (1.0 / p))


def lp_error(f: GriddedFunction, net: ShallowNet, p: float) -> float:
    """Trapezoid approximation of ``(int |f - net|^p)^(1/p)`` over the box."""
    if p < 1:
        raise InputError(f"L^p exponent must be >= 1, got {p}")
    return lp_norm(f.samples - _net_on_grid(f, net), f.weights, p)


def norm_error(f: GriddedFunction, net: ShallowNet) -> float:
    """Error in the norm the target is configured with."""
    if f.norm == "sup":
        return sup_error(f, net)
    return lp_error(f, net, f.p)


def load_net(path) -> ShallowNet:
    with open(path) as fh:
        return ShallowNet.from_dict(json.load(fh))


def net_from_terms(input_dim: int, rows: Iterable[tuple]) -> ShallowNet:
    """Build a net from ``(c, w, b, activation)`` rows."""
    return ShallowNet(input_dim, tuple(make_term(*row) for row in rows))
