"""Weight diagrams of 2-variable weighted shifts on the lattice Z_+^2.

A diagram is a pair of weight functions alpha (rightward steps, the action
of T1) and beta (upward steps, T2) together with a ``Tail`` that records
what is known about the weights outside any finite window. Weights are
produced on demand by generator functions and memoized.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator

import numpy as np

from .errors import InvalidWeightError, OutOfTableError
from .measures import AtomicMeasure2D

Point = tuple[int, int]
E1: Point = (1, 0)
E2: Point = (0, 1)

LOG_SPACE_DEGREE = 60
DEFAULT_REL_TOL = 1e-12
APPROX_NORM_WINDOW = 64


def add(k: Point, v: Point) -> Point:
    return (k[0] + v[0], k[1] + v[1])


@dataclass(frozen=True)
class LatticeWindow:
    """The finite rectangle {0..k1_max} x {0..k2_max}."""

    k1_max: int
    k2_max: int

    def __post_init__(self):
        for name in ("k1_max", "k2_max"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @classmethod
    def parse(cls, text: str) -> "LatticeWindow":
        """Parse ``"AxB"`` as k1_max=A, k2_max=B (both inclusive)."""
        m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
        if not m:
            raise ValueError(f"window must look like 6x6, got {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    @classmethod
    def square(cls, n: int) -> "LatticeWindow":
        return cls(n, n)

    def __str__(self):
        return f"{self.k1_max}x{self.k2_max}"

    def __iter__(self) -> Iterator[Point]:
        for k2 in range(self.k2_max + 1):
            for k1 in range(self.k1_max + 1):
                yield (k1, k2)

    def __len__(self):
        return (self.k1_max + 1) * (self.k2_max + 1)

    def __contains__(self, k) -> bool:
        return 0 <= k[0] <= self.k1_max and 0 <= k[1] <= self.k2_max

    @property
    def shape(self) -> tuple[int, int]:
        return (self.k1_max + 1, self.k2_max + 1)

    def shrink(self, n: int = 1) -> "LatticeWindow":
        if self.k1_max < n or self.k2_max < n:
            raise ValueError(f"cannot shrink window {self} by {n}")
        return LatticeWindow(self.k1_max - n, self.k2_max - n)

    def grow(self, n: int = 1) -> "LatticeWindow":
        return LatticeWindow(self.k1_max + n, self.k2_max + n)

    def union(self, other: "LatticeWindow") -> "LatticeWindow":
        return LatticeWindow(max(self.k1_max, other.k1_max), max(self.k2_max, other.k2_max))

    def intersect(self, other: "LatticeWindow | None") -> "LatticeWindow":
        if other is None:
            return self
        return LatticeWindow(min(self.k1_max, other.k1_max), min(self.k2_max, other.k2_max))


@dataclass(frozen=True)
class Tail:
    """What is known about a diagram outside any finite window.

    Attributes
    ----------
    start, period
        Per-direction stationarity: for direction i with ``start[i] = N``
        (not None), both weight families satisfy w(k + P e_i) = w(k) whenever
        k_i >= N, where P = ``period[i]``. Period 1 means eventually constant.
    core
        Lattice point (n1, n2) beyond which alpha depends only on k1 and beta
        only on k2 (tensor-form core).
    core_sups, core_monotone, core_constant
        Exact sup, monotonicity and constancy of the two core factor shifts,
        for cores that are not covered by stationarity.
    sup
        Closed-form (sup alpha, sup beta) over the whole lattice.
    berger
        Berger measure of the shift, when the shift is known to be subnormal.
    """

    start: tuple[int | None, int | None] = (None, None)
    period: tuple[int, int] = (1, 1)
    core: Point | None = None
    core_sups: tuple[float, float] | None = None
    core_monotone: tuple[bool, bool] = (False, False)
    core_constant: tuple[bool, bool] = (False, False)
    sup: tuple[float, float] | None = None
    berger: AtomicMeasure2D | None = field(default=None, compare=False)

    def __post_init__(self):
        if any(p < 1 for p in self.period):
            raise ValueError("periods must be positive")

    @property
    def stationary(self) -> bool:
        return self.start[0] is not None and self.start[1] is not None

    @property
    def kind(self) -> str:
        if self.stationary:
            if self.period == (1, 1):
                return "flat"
            return "periodic"
        if self.core is not None:
            return "tensor"
        if self.sup is not None:
            return "formula"
        if self.berger is not None:
            return "measure"
        return "none"

    def reduce(self, k: Point) -> Point:
        """Representative of k under the declared stationarity."""
        out = list(k)
        for i in (0, 1):
            n = self.start[i]
            if n is not None and out[i] >= n:
                out[i] = n + (out[i] - n) % self.period[i]
        return (out[0], out[1])

    def representative_box(self) -> LatticeWindow | None:
        """Smallest window containing reduce(k) for every k."""
        if not self.stationary:
            return None
        return LatticeWindow(self.start[0] + self.period[0] - 1, self.start[1] + self.period[1] - 1)

    def certifies(self, w: LatticeWindow) -> bool:
        box = self.representative_box()
        return box is not None and w.k1_max >= box.k1_max and w.k2_max >= box.k2_max

    def shifted(self, i: int, j: int) -> "Tail":
        """Tail of the restriction starting at (j, i)."""
        def sub(n, by):
            return None if n is None else max(n - by, 0)

        core = None if self.core is None else (max(self.core[0] - j, 0), max(self.core[1] - i, 0))
        keep_sups = self.core_sups if all(self.core_monotone) else None
        berger = None
        if self.berger is not None:
            berger = self.berger.tilt(j, i)
        return Tail(
            start=(sub(self.start[0], j), sub(self.start[1], i)),
            period=self.period,
            core=core,
            core_sups=keep_sups,
            core_monotone=self.core_monotone if keep_sups else (False, False),
            core_constant=self.core_constant,
            sup=None,
            berger=berger,
        )

    def to_json(self) -> dict:
        out: dict = {"start": list(self.start), "period": list(self.period)}
        if self.core is not None:
            out["core"] = list(self.core)
        if self.core_sups is not None:
            out["core_sups"] = list(self.core_sups)
            out["core_monotone"] = list(self.core_monotone)
        if any(self.core_constant):
            out["core_constant"] = list(self.core_constant)
        if self.sup is not None:
            out["sup"] = list(self.sup)
        if self.berger is not None:
            out["berger"] = self.berger.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Tail":
        def pt(v):
            return None if v is None else (int(v[0]), int(v[1]))

        start = data.get("start", [None, None])
        return cls(
            start=(None if start[0] is None else int(start[0]), None if start[1] is None else int(start[1])),
            period=tuple(int(p) for p in data.get("period", (1, 1))),
            core=pt(data.get("core")),
            core_sups=None if data.get("core_sups") is None else tuple(map(float, data["core_sups"])),
            core_monotone=tuple(bool(b) for b in data.get("core_monotone", (False, False))),
            core_constant=tuple(bool(b) for b in data.get("core_constant", (False, False))),
            sup=None if data.get("sup") is None else tuple(map(float, data["sup"])),
            berger=None if data.get("berger") is None else AtomicMeasure2D.from_json(data["berger"]),
        )


WeightFn = Callable[[int, int], float]


def _as_point(k) -> Point:
    if len(k) == 1:
        k = k[0]
    k1, k2 = k
    if k1 < 0 or k2 < 0:
        raise IndexError(f"lattice point {(k1, k2)} has a negative coordinate")
    return (int(k1), int(k2))


class WeightDiagram:
    """A 2-variable weighted shift described by its weights.

    Parameters
    ----------
    alpha, beta : callable (k1, k2) -> float
        Weight generators. Values are validated (positive, finite) and
        memoized on first use.
    tail : Tail
        Global knowledge used for exact norms and certifying windows.
    extent : LatticeWindow, optional
        Finite domain for table-backed diagrams; access outside raises
        ``OutOfTableError``.
    source : dict, optional
        ``{"kind": ..., "params": ...}`` describing how a builder produced the
        diagram, used for JSON serialization.
    """

    def __init__(self, alpha: WeightFn, beta: WeightFn, tail: Tail | None = None, *,
                 extent: LatticeWindow | None = None, source: dict | None = None,
                 label: str = "", check: bool = True):
        self._alpha_fn = alpha
        self._beta_fn = beta
        self.tail = tail if tail is not None else Tail()
        self.extent = extent
        self.source = source
        self.label = label
        self._memo_alpha: dict[Point, float] = {}
        self._memo_beta: dict[Point, float] = {}
        if check:
            probe = LatticeWindow(3, 3).intersect(extent)
            for k in probe:
                self.alpha(k)
                self.beta(k)

    def __repr__(self):
        name = self.label or (self.source or {}).get("kind", "diagram")
        return f"<WeightDiagram {name} tail={self.tail.kind}>"

    def _lookup(self, memo, fn, which, k):
        v = memo.get(k)
        if v is None:
            if self.extent is not None and k not in self.extent:
                raise OutOfTableError(f"{which}{k} lies outside the table extent {self.extent}")
            v = float(fn(*k))
            if not (math.isfinite(v) and v > 0):
                raise InvalidWeightError(which, k, v)
            memo[k] = v
        return v

    def alpha(self, *k) -> float:
        return self._lookup(self._memo_alpha, self._alpha_fn, "alpha", _as_point(k))

    def beta(self, *k) -> float:
        return self._lookup(self._memo_beta, self._beta_fn, "beta", _as_point(k))

    def weights(self, w: LatticeWindow) -> tuple[np.ndarray, np.ndarray]:
        """Arrays A, B of shape w.shape with A[k1, k2] = alpha(k1, k2)."""
        a = np.empty(w.shape)
        b = np.empty(w.shape)
        for k in w:
            a[k] = self.alpha(k)
            b[k] = self.beta(k)
        return a, b

    def fits(self, w: LatticeWindow, margin: int = 0) -> bool:
        """True when w grown by ``margin`` lies inside the extent."""
        if self.extent is None:
            return True
        return w.k1_max + margin <= self.extent.k1_max and w.k2_max + margin <= self.extent.k2_max

    def usable(self, w: LatticeWindow, margin: int = 0) -> LatticeWindow:
        """w clipped so that every point plus ``margin`` steps stays in the extent."""
        if self.extent is None:
            return w
        k1 = min(w.k1_max, self.extent.k1_max - margin)
        k2 = min(w.k2_max, self.extent.k2_max - margin)
        if k1 < 0 or k2 < 0:
            raise OutOfTableError(f"table extent {self.extent} is too small for margin {margin}")
        return LatticeWindow(k1, k2)

    def moment(self, k) -> float:
        return moment(self, k)

    @property
    def norm_bound(self) -> float | None:
        """max(||T1||, ||T2||) when known exactly, else None."""
        n = operator_norms(self)
        return max(n.t1, n.t2) if n.exact else None

    def with_tail(self, tail: Tail) -> "WeightDiagram":
        return WeightDiagram(self._alpha_fn, self._beta_fn, tail, extent=self.extent,
                             source=self.source, label=self.label, check=False)


def table_diagram(alpha_rows, beta_rows, tail: Tail | None = None, *, label: str = "") -> WeightDiagram:
    """Diagram from finite tables indexed ``[k2][k1]`` (one list per row).

    When the tail declares stationarity, lookups beyond the table are folded
    back with ``Tail.reduce``; the table must then cover the representative box.
    """
    a = np.asarray(alpha_rows, dtype=float).T
    b = np.asarray(beta_rows, dtype=float).T
    if a.ndim != 2 or a.shape != b.shape or a.size == 0:
        raise ValueError("alpha and beta tables must be nonempty rectangles of equal shape")
    tail = tail or Tail()
    n1, n2 = a.shape
    extent_1 = None if tail.start[0] is not None else n1 - 1
    extent_2 = None if tail.start[1] is not None else n2 - 1
    if tail.start[0] is not None and tail.start[0] + tail.period[0] > n1:
        raise ValueError("table does not cover one full period in the k1 direction")
    if tail.start[1] is not None and tail.start[1] + tail.period[1] > n2:
        raise ValueError("table does not cover one full period in the k2 direction")

    def lookup(arr):
        def f(k1, k2):
            r1, r2 = tail.reduce((k1, k2))
            return arr[r1, r2]
        return f

    extent = None
    if extent_1 is not None or extent_2 is not None:
        big = 2**62
        extent = LatticeWindow(big if extent_1 is None else extent_1, big if extent_2 is None else extent_2)
    return WeightDiagram(lookup(a), lookup(b), tail, extent=extent, label=label)


# ---------------------------------------------------------------- moments

def moment(d: WeightDiagram, k, path: str = "right-up") -> float:
    """gamma_k: product of squared weights along a monotone path from (0,0).

    ``path="right-up"`` walks along row 0 then up column k1; ``"up-right"``
    goes up column 0 first. Log-space summation is used past degree 60.
    """
    k1, k2 = _as_point((k,))
    if path == "right-up":
        factors = [d.alpha(i, 0) for i in range(k1)] + [d.beta(k1, j) for j in range(k2)]
    elif path == "up-right":
        factors = [d.beta(0, j) for j in range(k2)] + [d.alpha(i, k2) for i in range(k1)]
    else:
        raise ValueError(f"unknown path {path!r}")
    if k1 + k2 > LOG_SPACE_DEGREE:
        return math.exp(2.0 * math.fsum(math.log(f) for f in factors))
    out = 1.0
    for f in factors:
        out *= f * f
    return out


def log_moment(d: WeightDiagram, k) -> float:
    k1, k2 = _as_point((k,))
    return 2.0 * math.fsum([math.log(d.alpha(i, 0)) for i in range(k1)]
                           + [math.log(d.beta(k1, j)) for j in range(k2)])


@dataclass(frozen=True)
class MomentTable:
    """Moments gamma_k over a window, indexed ``values[k1, k2]``."""

    window: LatticeWindow
    values: np.ndarray
    log_values: np.ndarray

    def __getitem__(self, k) -> float:
        return float(self.values[k[0], k[1]])


def moment_table(d: WeightDiagram, w: LatticeWindow) -> MomentTable:
    """All gamma_k for k in w via gamma_{k+e1} = alpha_k^2 gamma_k along row 0
    and gamma_{k+e2} = beta_k^2 gamma_k up each column."""
    logs = np.zeros(w.shape)
    for k1 in range(1, w.k1_max + 1):
        logs[k1, 0] = logs[k1 - 1, 0] + 2.0 * math.log(d.alpha(k1 - 1, 0))
    for k1 in range(w.k1_max + 1):
        for k2 in range(1, w.k2_max + 1):
            logs[k1, k2] = logs[k1, k2 - 1] + 2.0 * math.log(d.beta(k1, k2 - 1))
    if w.k1_max + w.k2_max > LOG_SPACE_DEGREE:
        values = np.exp(logs)
    else:
        values = np.ones(w.shape)
        for k1 in range(1, w.k1_max + 1):
            values[k1, 0] = values[k1 - 1, 0] * d.alpha(k1 - 1, 0) ** 2
        for k1 in range(w.k1_max + 1):
            for k2 in range(1, w.k2_max + 1):
                values[k1, k2] = values[k1, k2 - 1] * d.beta(k1, k2 - 1) ** 2
    return MomentTable(w, values, logs)


def moment_ratios(d: WeightDiagram, u: Point, m: int) -> np.ndarray:
    """R[v1, v2] = gamma_{u+v} / gamma_u for 0 <= v1, v2 <= m.

    Computed as the weight product along the right-then-up path from u, so
    no moment of u itself is needed.
    """
    logs = np.zeros((m + 1, m + 1))
    u1, u2 = u
    for v1 in range(1, m + 1):
        logs[v1, 0] = logs[v1 - 1, 0] + 2.0 * math.log(d.alpha(u1 + v1 - 1, u2))
    for v1 in range(m + 1):
        for v2 in range(1, m + 1 - v1):
            logs[v1, v2] = logs[v1, v2 - 1] + 2.0 * math.log(d.beta(u1 + v1, u2 + v2 - 1))
    if m > LOG_SPACE_DEGREE:
        return np.exp(logs)
    out = np.ones((m + 1, m + 1))
    for v1 in range(1, m + 1):
        out[v1, 0] = out[v1 - 1, 0] * d.alpha(u1 + v1 - 1, u2) ** 2
    for v1 in range(m + 1):
        for v2 in range(1, m + 1 - v1):
            out[v1, v2] = out[v1, v2 - 1] * d.beta(u1 + v1, u2 + v2 - 1) ** 2
    # entries with v1 + v2 > m are never used
    return out


# ---------------------------------------------------------- commutativity

@dataclass(frozen=True)
class ViolationReport:
    """Largest failure of a pointwise identity over a window."""

    max_violation: float
    max_relative: float
    at: Point | None
    window: LatticeWindow
    tol: float = DEFAULT_REL_TOL

    @property
    def ok(self) -> bool:
        return self.max_relative <= self.tol

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"max_violation": self.max_violation, "max_relative": self.max_relative,
                "at": None if self.at is None else list(self.at), "window": str(self.window),
                "tol": self.tol, "ok": self.ok}


def worst_violation(pairs, w: LatticeWindow, tol: float = DEFAULT_REL_TOL) -> ViolationReport:
    """Fold ``(k, lhs, rhs)`` triples into a ViolationReport."""
    worst_abs, worst_rel, at = 0.0, 0.0, None
    for k, lhs, rhs in pairs:
        diff = abs(lhs - rhs)
        scale = max(abs(lhs), abs(rhs))
        rel = diff / scale if scale > 0 else 0.0
        if rel > worst_rel:
            worst_rel, at = rel, k
        worst_abs = max(worst_abs, diff)
    return ViolationReport(worst_abs, worst_rel, at, w, tol)


def check_commutativity(d: WeightDiagram, w: LatticeWindow, tol: float = DEFAULT_REL_TOL) -> ViolationReport:
    """Check alpha_{k+e2} beta_k = beta_{k+e1} alpha_k for every k in w."""
    w = d.usable(w, 1)

    def pairs():
        for k in w:
            yield k, d.alpha(add(k, E2)) * d.beta(k), d.beta(add(k, E1)) * d.alpha(k)

    return worst_violation(pairs(), w, tol)


# ------------------------------------------------------------------ norms

@dataclass(frozen=True)
class NormReport:
    t1: float
    t2: float
    exact: bool
    method: str

    def __iter__(self):
        return iter((self.t1, self.t2))

    def to_json(self):
        return {"t1": self.t1, "t2": self.t2, "exact": self.exact, "method": self.method}


def operator_norms(d: WeightDiagram, window: LatticeWindow | None = None) -> NormReport:
    """(||T1||, ||T2||) as the sups of alpha and beta.

    Exact when the tail is stationary (a finite scan suffices), declares a
    closed-form sup, or carries a Berger measure. Otherwise the sup over
    ``window`` (default 64x64) is returned with ``exact=False``.
    """
    tail = d.tail
    box = tail.representative_box()
    if box is not None and d.fits(box):
        a, b = d.weights(box)
        return NormReport(float(a.max()), float(b.max()), True, "stationary-scan")
    if tail.sup is not None:
        return NormReport(tail.sup[0], tail.sup[1], True, "declared")
    if tail.berger is not None:
        mu = tail.berger
        return NormReport(math.sqrt(mu.max_s), math.sqrt(mu.max_t), True, "berger-support")
    w = d.usable(window or LatticeWindow.square(APPROX_NORM_WINDOW))
    a, b = d.weights(w)
    return NormReport(float(a.max()), float(b.max()), False, f"window-sup {w}")


# ------------------------------------------------------------ restriction

def restrict(d: WeightDiagram, i: int, j: int) -> WeightDiagram:
    """Restriction to the invariant subspace spanned by e_k with k2 >= i and
    k1 >= j, re-indexed to start at (0,0)."""
    if i < 0 or j < 0:
        raise ValueError("restriction offsets must be nonnegative")
    if i == 0 and j == 0:
        return d

    def alpha(k1, k2):
        return d.alpha(k1 + j, k2 + i)

    def beta(k1, k2):
        return d.beta(k1 + j, k2 + i)

    extent = None
    if d.extent is not None:
        extent = LatticeWindow(d.extent.k1_max - j, d.extent.k2_max - i)
    return WeightDiagram(alpha, beta, d.tail.shifted(i, j), extent=extent,
                         label=f"restrict({d.label or 'd'},{i},{j})", check=False)


def core(d: WeightDiagram) -> WeightDiagram:
    """Restriction to k1, k2 >= 1."""
    return restrict(d, 1, 1)


def max_weight_gap(d1: WeightDiagram, d2: WeightDiagram, w: LatticeWindow) -> float:
    """max over w of |alpha1 - alpha2| and |beta1 - beta2|."""
    a1, b1 = d1.weights(w)
    a2, b2 = d2.weights(w)
    return float(max(np.abs(a1 - a2).max(), np.abs(b1 - b2).max()))


def replace_tail(tail: Tail, **changes) -> Tail:
    return replace(tail, **changes)
