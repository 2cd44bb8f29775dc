"""T-periodic forcing terms and their mean-zero decomposition.

Two representations are supported:

``PiecewiseConstant``
    breakpoints ``0 = b_0 < b_1 < ... < b_{n-1} < T`` and one value per piece
    ``[b_k, b_{k+1})``.
``Sampled``
    values on the uniform periodic grid ``t_k = k T / N`` (``k = 0..N-1``),
    linearly interpolated in between.

``decompose`` splits a weight into its mean and a :class:`MeanZeroWeight`
carrying the primitive ``sigma(t) = int_0^t h~``, its mean ``sigma_bar``,
``H~ = int h~^+`` and the variance ``alpha = (1/T) int (sigma - sigma_bar)^2``.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import BadParameter, ConfigError, OutOfDomain, TrivialWeight

__all__ = [
    "Weight",
    "PiecewiseConstant",
    "Sampled",
    "MeanZeroWeight",
    "decompose",
    "mean_zero",
    "sigma_eval",
    "l1_norm",
    "square_wave",
    "two_value",
    "equal_pieces",
    "default_anchor",
    "load_weight",
    "parse_weight",
]


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class Weight:
    """Common interface of the two weight kinds."""

    period: float

    def __call__(self, t):
        raise NotImplementedError

    @property
    def discontinuities(self) -> np.ndarray:
        """Interior points of ``(0, T)`` where ``h`` jumps."""
        raise NotImplementedError

    @property
    def nodes(self) -> np.ndarray:
        """Points of ``[0, T)`` that collocation grids must contain."""
        raise NotImplementedError

    def segments(self):
        """List of ``(t0, t1, c0, c1)`` with ``h(t) = c0 + c1 (t - t0)`` on ``[t0, t1]``."""
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def shifted(self, c: float) -> "Weight":
        raise NotImplementedError

    def scaled(self, c: float) -> "Weight":
        raise NotImplementedError

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class PiecewiseConstant(Weight):
    period: float
    breakpoints: np.ndarray
    values: np.ndarray
    # exact (period, breakpoints, values) as Fractions when built from decimal input
    exact: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        T = float(self.period)
        b = _frozen(self.breakpoints)
        v = _frozen(self.values)
        if not (np.isfinite(T) and T > 0):
            raise BadParameter(f"period must be positive and finite, got {self.period!r}")
        if b.ndim != 1 or v.ndim != 1 or len(b) == 0 or len(b) != len(v):
            raise BadParameter("need one value per piece and at least one piece")
        if not (np.all(np.isfinite(b)) and np.all(np.isfinite(v))):
            raise BadParameter("breakpoints and values must be finite")
        if b[0] != 0.0:
            raise BadParameter("breakpoints must start at 0")
        if np.any(np.diff(b) <= 0) or b[-1] >= T:
            raise BadParameter("breakpoints must be strictly increasing inside [0, T)")
        object.__setattr__(self, "period", T)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)

    @property
    def n_pieces(self) -> int:
        return len(self.values)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(np.append(self.breakpoints, self.period))

    @property
    def discontinuities(self):
        jumps = self.values[1:] != self.values[:-1]
        return self.breakpoints[1:][jumps]

    @property
    def nodes(self):
        return self.breakpoints

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right") - 1
        return self.values[np.clip(idx, 0, self.n_pieces - 1)]

    def segments(self):
        ends = np.append(self.breakpoints, self.period)
        return [(ends[k], ends[k + 1], self.values[k], 0.0) for k in range(self.n_pieces)]

    def mean(self):
        return math.fsum(self.widths * self.values) / self.period

    def shifted(self, c):
        ex = None
        if self.exact is not None and isinstance(c, (int, Fraction)):
            P, B, V = self.exact
            ex = (P, B, tuple(x + c for x in V))
        return PiecewiseConstant(self.period, self.breakpoints, self.values + float(c), ex)

    def scaled(self, c):
        ex = None
        if self.exact is not None and isinstance(c, (int, Fraction)):
            P, B, V = self.exact
            ex = (P, B, tuple(x * c for x in V))
        return PiecewiseConstant(self.period, self.breakpoints, self.values * float(c), ex)

    def merged(self) -> "PiecewiseConstant":
        """Drop breakpoints between equal adjacent values."""
        keep = np.ones(self.n_pieces, dtype=bool)
        keep[1:] = self.values[1:] != self.values[:-1]
        ex = None
        if self.exact is not None:
            P, B, V = self.exact
            ex = (P, tuple(x for x, k in zip(B, keep) if k), tuple(x for x, k in zip(V, keep) if k))
        return PiecewiseConstant(self.period, self.breakpoints[keep], self.values[keep], ex)

    def to_config(self):
        if self.exact is not None:
            P, B, V = self.exact
            return {"period": _num_out(P), "breakpoints": [_num_out(x) for x in B],
                    "values": [_num_out(x) for x in V]}
        return {"period": self.period, "breakpoints": self.breakpoints.tolist(),
                "values": self.values.tolist()}


@dataclass(frozen=True, eq=False)
class Sampled(Weight):
    period: float
    values: np.ndarray

    def __post_init__(self):
        T = float(self.period)
        v = _frozen(self.values)
        if not (np.isfinite(T) and T > 0):
            raise BadParameter(f"period must be positive and finite, got {self.period!r}")
        if v.ndim != 1 or len(v) < 8:
            raise BadParameter("a sampled weight needs at least 8 nodes")
        if not np.all(np.isfinite(v)):
            raise BadParameter("values must be finite")
        object.__setattr__(self, "period", T)
        object.__setattr__(self, "values", v)

    @property
    def grid_n(self) -> int:
        return len(self.values)

    @property
    def grid(self) -> np.ndarray:
        """Nodes ``k T / N`` for ``k = 0..N`` (closing node included)."""
        return np.arange(self.grid_n + 1) * (self.period / self.grid_n)

    @property
    def closed_values(self) -> np.ndarray:
        return np.append(self.values, self.values[0])

    @property
    def discontinuities(self):
        return np.empty(0)

    @property
    def nodes(self):
        return self.grid[:-1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.grid, self.closed_values)

    def segments(self):
        g, v = self.grid, self.closed_values
        dt = self.period / self.grid_n
        return [(g[k], g[k + 1], v[k], (v[k + 1] - v[k]) / dt) for k in range(self.grid_n)]

    def mean(self):
        # periodic trapezoid; exact for the piecewise-linear interpolant
        return math.fsum(self.values) / self.grid_n

    def shifted(self, c):
        return Sampled(self.period, self.values + float(c))

    def scaled(self, c):
        return Sampled(self.period, self.values * float(c))

    def to_config(self):
        return {"period": self.period, "grid_n": self.grid_n, "values": self.values.tolist()}


def l1_norm(w: Weight) -> float:
    """``int_0^T |h|``: exact per piece, trapezoid for sampled tables."""
    if isinstance(w, PiecewiseConstant):
        return math.fsum(w.widths * np.abs(w.values))
    if isinstance(w, Sampled):
        return math.fsum(np.abs(w.values)) * (w.period / w.grid_n)
    raise TypeError(f"unsupported weight type {type(w).__name__}")


@dataclass(frozen=True, eq=False)
class MeanZeroWeight:
    """A non-trivial mean-zero weight with its cached functionals.

    ``sigma`` is stored as a table ``(sigma_knots, sigma_values)``; it is the
    exact piecewise-linear primitive for piecewise-constant weights and the
    cumulative trapezoid table for sampled ones.
    """

    base: Weight
    mean_removed: float
    sigma_knots: np.ndarray
    sigma_values: np.ndarray
    sigma_bar: float
    H_tilde: float
    alpha: float
    l1: float

    @property
    def period(self) -> float:
        return self.base.period

    @property
    def sigma_sup(self) -> float:
        return float(np.max(np.abs(self.sigma_values)))

    def __call__(self, t):
        return self.base(t)

    def sigma(self, t):
        t = np.asarray(t, dtype=float)
        T = self.period
        if np.any((t < 0) | (t > T)) or np.any(np.isnan(t)):
            raise OutOfDomain(f"sigma is defined on [0, {T}]")
        return np.interp(t, self.sigma_knots, self.sigma_values)

    def scaled(self, c: float) -> "MeanZeroWeight":
        if c <= 0:
            raise BadParameter("scale factor must be positive")
        return mean_zero(self.base.scaled(c))


def sigma_eval(w: MeanZeroWeight, t):
    """Evaluate ``sigma(t) = int_0^t h~`` for ``t`` in ``[0, T]``."""
    return w.sigma(t)


def _build(base: Weight, mean_removed: float) -> MeanZeroWeight:
    T = base.period
    l1 = l1_norm(base)
    if isinstance(base, PiecewiseConstant):
        widths, vals = base.widths, base.values
        knots = np.append(base.breakpoints, T)
        sig = np.concatenate([[0.0], np.cumsum(widths * vals)])
        if abs(sig[-1]) > 1e-12 * max(l1, 1e-300):
            raise BadParameter("weight is not mean-zero")
        sig[-1] = 0.0
        sbar = math.fsum(widths * (sig[:-1] + sig[1:]) / 2) / T
        s = sig - sbar
        alpha = math.fsum(widths * (s[:-1] ** 2 + s[:-1] * s[1:] + s[1:] ** 2) / 3) / T
        H = math.fsum(widths * np.maximum(vals, 0.0))
    else:
        N = base.grid_n
        dt = T / N
        hv = base.closed_values
        knots = base.grid
        sig = np.concatenate([[0.0], np.cumsum(dt * (hv[:-1] + hv[1:]) / 2)])
        if abs(sig[-1]) > 1e-12 * max(l1, 1e-300):
            raise BadParameter("weight is not mean-zero")
        sig[-1] = 0.0
        sbar = math.fsum(sig[:-1]) / N
        alpha = math.fsum((sig[:-1] - sbar) ** 2) / N
        H = math.fsum(np.maximum(base.values, 0.0)) * dt
    if not (l1 > 0 and alpha > 0):
        raise TrivialWeight("mean-zero part of the weight vanishes identically")
    return MeanZeroWeight(base, mean_removed, _frozen(knots), _frozen(sig),
                          float(sbar), float(H), float(alpha), float(l1))


def decompose(h: Weight):
    """Split ``h = mean + h~``.

    Returns ``(mean, MeanZeroWeight)``. Raises :class:`TrivialWeight` when
    ``h`` is constant.
    """
    if isinstance(h, PiecewiseConstant):
        if h.exact is not None:
            P, B, V = h.exact
            widths = [b1 - b0 for b0, b1 in zip(B, list(B[1:]) + [P])]
            mean_ex = sum(w * v for w, v in zip(widths, V)) / P
            if all(v == V[0] for v in V):
                raise TrivialWeight("constant weight has a trivial mean-zero part")
            tilde = h.shifted(-mean_ex)
            return float(mean_ex), _build(tilde, float(mean_ex))
        if np.all(h.values == h.values[0]):
            raise TrivialWeight("constant weight has a trivial mean-zero part")
    elif isinstance(h, Sampled):
        if np.all(h.values == h.values[0]):
            raise TrivialWeight("constant weight has a trivial mean-zero part")
    mean = h.mean()
    return mean, _build(h.shifted(-mean), mean)


def mean_zero(ht: Weight) -> MeanZeroWeight:
    """Wrap a weight that already has mean zero (``mean_removed = 0``)."""
    if abs(ht.mean()) * ht.period > 1e-12 * max(l1_norm(ht), 1e-300):
        raise BadParameter("weight is not mean-zero; use decompose()")
    return _build(ht, 0.0)


def default_anchor(lam: float, w: MeanZeroWeight) -> float:
    """Anchor ``a = 2 sqrt(lambda alpha)``."""
    return 2.0 * math.sqrt(float(lam) * w.alpha)


def square_wave(h_star: float, T: float = 1) -> MeanZeroWeight:
    """``h~ = +h_star`` on ``[0, T/2)`` and ``-h_star`` on ``[T/2, T)``."""
    ex = None
    if all(isinstance(x, (int, Fraction)) for x in (h_star, T)):
        P = Fraction(T)
        ex = (P, (Fraction(0), P / 2), (Fraction(h_star), -Fraction(h_star)))
    return mean_zero(PiecewiseConstant(T, [0.0, T / 2], [h_star, -h_star], ex))


def two_value(h1, h2, eta=None, T=1) -> PiecewiseConstant:
    """``h = h1`` on ``[0, eta)`` and ``-h2`` on ``[eta, T)`` (default ``eta = T/2``)."""
    if eta is None:
        eta = Fraction(T) / 2 if isinstance(T, (int, Fraction)) else T / 2
    ex = None
    if all(isinstance(x, (int, Fraction)) for x in (h1, h2, eta, T)):
        ex = (Fraction(T), (Fraction(0), Fraction(eta)), (Fraction(h1), -Fraction(h2)))
    return PiecewiseConstant(float(T), [0.0, float(eta)], [float(h1), -float(h2)], ex)


def equal_pieces(values: Sequence, T=1.0) -> PiecewiseConstant:
    """``h = values[i]`` on ``[i T/n, (i+1) T/n)``."""
    n = len(values)
    ex = None
    if all(isinstance(x, (int, Fraction)) for x in list(values) + [T]):
        P = Fraction(T)
        ex = (P, tuple(P * i / n for i in range(n)), tuple(Fraction(v) for v in values))
    return PiecewiseConstant(float(T), np.arange(n) * (float(T) / n), [float(v) for v in values], ex)


# ---------------------------------------------------------------- config I/O

def _num_out(x):
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    return x


def _reject_constant(name):
    raise ConfigError(f"non-finite number {name!r} in weight config")


def _to_fraction(x, key):
    if isinstance(x, bool) or not isinstance(x, (int, float, Decimal, str)):
        raise ConfigError(f"{key}: expected a number, got {x!r}")
    try:
        if isinstance(x, float) and not math.isfinite(x):
            raise ConfigError(f"{key}: non-finite number {x!r}")
        if isinstance(x, Decimal) and not x.is_finite():
            raise ConfigError(f"{key}: non-finite number {x!r}")
        return Fraction(x.strip()) if isinstance(x, str) else Fraction(x)
    except (ArithmeticError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {x!r}") from exc


def parse_weight(cfg: dict) -> Weight:
    """Build a weight from a config mapping.

    Piecewise: ``{"period", "breakpoints": [...], "values": [...]}``.
    Sampled: ``{"period", "grid_n", "values": [...]}``.
    Numbers may be JSON numbers or decimal strings; both are read exactly.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("weight config must be a mapping")
    if "period" not in cfg or "values" not in cfg:
        raise ConfigError("weight config needs 'period' and 'values'")
    if not isinstance(cfg["values"], list) or not cfg["values"]:
        raise ConfigError("'values' must be a non-empty list")
    P = _to_fraction(cfg["period"], "period")
    V = [_to_fraction(v, "values") for v in cfg["values"]]
    try:
        if "breakpoints" in cfg:
            if "grid_n" in cfg:
                raise ConfigError("give either 'breakpoints' or 'grid_n', not both")
            if not isinstance(cfg["breakpoints"], list):
                raise ConfigError("'breakpoints' must be a list")
            B = [_to_fraction(b, "breakpoints") for b in cfg["breakpoints"]]
            return PiecewiseConstant(float(P), [float(b) for b in B], [float(v) for v in V],
                                     (P, tuple(B), tuple(V)))
        if "grid_n" in cfg:
            n = cfg["grid_n"]
            if isinstance(n, bool) or not isinstance(n, int) or n != len(V):
                raise ConfigError("'grid_n' must be an integer equal to len(values)")
            return Sampled(float(P), [float(v) for v in V])
    except BadParameter as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("weight config needs 'breakpoints' (piecewise) or 'grid_n' (sampled)")


def _loads(text: str):
    try:
        return json.loads(text, parse_float=Decimal, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def load_weight(source) -> Weight:
    """Load a weight from a mapping, a JSON file path or an inline JSON string.

    A ``"weight"`` sub-key is honoured so full run configs can be passed too.
    """
    if isinstance(source, Weight):
        return source
    if isinstance(source, dict):
        cfg = source
    else:
        text = str(source)
        if os.path.isfile(text):
            with open(text, encoding="utf-8") as fh:
                text = fh.read()
        cfg = _loads(text)
    if isinstance(cfg, dict) and "weight" in cfg and "values" not in cfg:
        cfg = cfg["weight"]
    return parse_weight(cfg)
