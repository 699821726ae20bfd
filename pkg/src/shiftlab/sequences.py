"""One-variable weight sequences used as rows, columns and diagonals of diagrams.

Two concrete kinds exist:

* ``WeightSequence``: eventually periodic, ``head`` followed by ``period``
  repeated forever. Sup-norms and monotonicity are exact.
* ``MeasureSequence``: weights of the subnormal shift with a given finitely
  atomic Berger measure. Always nondecreasing, sup = sqrt(max atom).
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Sequence

from .errors import MeasureError
from .measures import AtomicMeasure1D, rho


def _positive(values, what):
    out = tuple(float(v) for v in values)
    for i, v in enumerate(out):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{what}[{i}] = {v!r} is not a positive finite weight")
    return out


@dataclass(frozen=True)
class WeightSequence:
    head: tuple[float, ...] = ()
    period: tuple[float, ...] = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "head", _positive(self.head, "head"))
        object.__setattr__(self, "period", _positive(self.period, "period"))
        if not self.period:
            raise ValueError("period must contain at least one weight")

    @classmethod
    def constant(cls, c: float) -> "WeightSequence":
        return cls((), (c,))

    @classmethod
    def flat_tail(cls, values: Sequence[float]) -> "WeightSequence":
        """``values`` followed by its last entry repeated forever."""
        values = list(values)
        if not values:
            raise ValueError("need at least one weight")
        return cls(tuple(values[:-1]), (values[-1],))

    @classmethod
    def parse(cls, text: str) -> "WeightSequence":
        """Parse ``"h0,h1,...;p0,p1,..."``. Without ``;`` the last value repeats."""
        def nums(s):
            return [float(x) for x in s.split(",") if x.strip()]
        if ";" in text:
            head, per = text.split(";", 1)
            return cls(tuple(nums(head)), tuple(nums(per)))
        return cls.flat_tail(nums(text))

    def __call__(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        if n < len(self.head):
            return self.head[n]
        return self.period[(n - len(self.head)) % len(self.period)]

    def take(self, n: int) -> list[float]:
        return [self(i) for i in range(n)]

    @property
    def start(self) -> int:
        return len(self.head)

    @property
    def period_length(self) -> int:
        return len(self.period)

    @property
    def sup(self) -> float:
        return max(self.head + self.period)

    @property
    def is_constant(self) -> bool:
        vals = self.head + self.period
        return all(v == vals[0] for v in vals)

    @property
    def monotone(self) -> bool:
        """Nondecreasing for all n (exact: checks head, one period and the wrap)."""
        vals = self.take(self.start + 2 * self.period_length)
        return all(a <= b for a, b in zip(vals, vals[1:]))

    def shifted(self, m: int) -> "WeightSequence":
        """The tail (w_m, w_{m+1}, ...)."""
        if m <= len(self.head):
            return WeightSequence(self.head[m:], self.period)
        r = (m - len(self.head)) % len(self.period)
        return WeightSequence((), self.period[r:] + self.period[:r])

    def berger_measure(self) -> AtomicMeasure1D | None:
        """Berger measure when the shift is subnormal with a flat tail.

        Flat-tail subnormal shifts are exactly (a, c, c, ...) with a <= c;
        their measure is (1 - a^2/c^2) delta_0 + (a^2/c^2) delta_{c^2}.
        Returns None for every other sequence.
        """
        if len(self.period) != 1 or not all(p == self.period[0] for p in self.period):
            return None
        c = self.period[0]
        head = [h for h in self.head]
        while head and head[-1] == c:
            head.pop()
        if not head:
            return AtomicMeasure1D.dirac(c * c)
        if len(head) == 1 and head[0] <= c:
            m = head[0] ** 2 / c**2
            atoms = [(c * c, m)]
            if 1 - m > 0:
                atoms.append((0.0, 1 - m))
            return AtomicMeasure1D(atoms)
        return None

    def to_json(self):
        return {"head": list(self.head), "period": list(self.period)}


@dataclass(frozen=True)
class MeasureSequence:
    """Weights of the subnormal shift whose Berger measure is ``measure``."""

    measure: AtomicMeasure1D
    _cache: list = field(default_factory=list, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.measure.max_position == 0.0:
            raise MeasureError("all mass sits at 0; no weighted shift has this Berger measure")
        if not self.measure.is_probability():
            raise MeasureError(f"expected a probability measure, total mass is {self.measure.total!r}")

    def __call__(self, n: int) -> float:
        if n < 0:
            raise IndexError(n)
        cache = self._cache
        if n >= len(cache):
            with self._lock:
                self._extend(n + 1)
        return cache[n]

    def _extend(self, length):
        # ratio of consecutive moments, computed stably by normalizing powers
        # against the largest atom so that large n neither underflows nor overflows
        cache = self._cache
        pmax = self.measure.max_position
        atoms = [(p / pmax, r) for p, r in self.measure.atoms]
        while len(cache) < length:
            j = len(cache)
            g0 = math.fsum(r * q**j for q, r in atoms)
            g1 = math.fsum(r * q ** (j + 1) for q, r in atoms)
            cache.append(math.sqrt(pmax * g1 / g0))

    def take(self, n: int) -> list[float]:
        return [self(i) for i in range(n)]

    @property
    def start(self):
        return 0 if self.is_constant else None

    @property
    def period_length(self):
        return 1

    @property
    def sup(self) -> float:
        return math.sqrt(self.measure.max_position)

    @property
    def is_constant(self) -> bool:
        return len(self.measure.atoms) == 1

    @property
    def monotone(self) -> bool:
        return True

    @property
    def rho(self) -> float:
        return rho(self.measure)

    def shifted(self, m: int):
        if self.is_constant:
            return self
        return _ShiftedSequence(self, m)

    def berger_measure(self) -> AtomicMeasure1D:
        return self.measure

    def to_json(self):
        return {"measure": self.measure.to_json()}


@dataclass(frozen=True)
class _ShiftedSequence:
    base: MeasureSequence
    offset: int

    def __call__(self, n):
        return self.base(n + self.offset)

    def take(self, n):
        return [self(i) for i in range(n)]

    start = None
    period_length = 1
    monotone = True
    is_constant = False

    @property
    def sup(self):
        return self.base.sup

    def shifted(self, m):
        return _ShiftedSequence(self.base, self.offset + m)

    def berger_measure(self):
        return None


def as_sequence(obj) -> WeightSequence | MeasureSequence:
    """Coerce user input into a weight sequence.

    Accepts an existing sequence, an ``AtomicMeasure1D`` (its Berger weights),
    a positive number (constant sequence) or a list of weights (the last one
    repeats forever).
    """
    if isinstance(obj, (WeightSequence, MeasureSequence, _ShiftedSequence)):
        return obj
    if isinstance(obj, AtomicMeasure1D):
        return MeasureSequence(obj)
    if isinstance(obj, (int, float)):
        return WeightSequence.constant(float(obj))
    return WeightSequence.flat_tail(obj)


def sequence_from_json(data):
    if isinstance(data, (int, float)):
        return WeightSequence.constant(float(data))
    if isinstance(data, list):
        return WeightSequence.flat_tail(data)
    if "measure" in data:
        return MeasureSequence(AtomicMeasure1D.from_json(data["measure"]))
    return WeightSequence(tuple(data.get("head", ())), tuple(data["period"]))
