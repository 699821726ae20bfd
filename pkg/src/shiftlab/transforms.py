"""Toral and spherical Aluthge transforms of weight diagrams.

Both transforms are computed from closed weight formulas:

* toral:     alpha'(k) = sqrt(alpha(k) alpha(k+e1)),  beta'(k) = sqrt(beta(k) beta(k+e2))
* spherical: alpha'(k) = alpha(k) * (|w(k+e1)|^2 / |w(k)|^2)^(1/4), likewise beta' with e2,
  where |w(k)|^2 = alpha(k)^2 + beta(k)^2.

Evaluating a transform at k reads the input one step to the right and one
step up, so checks on a transformed diagram over window w consume the
input on w grown by one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    DEFAULT_REL_TOL,
    E1,
    E2,
    LatticeWindow,
    Tail,
    ViolationReport,
    WeightDiagram,
    add,
    worst_violation,
)


def _shrunk_extent(d: WeightDiagram):
    if d.extent is None:
        return None
    return LatticeWindow(max(d.extent.k1_max - 1, 0), max(d.extent.k2_max - 1, 0))


def _factor_profile(d: WeightDiagram, tail: Tail):
    """Constancy of the two core factors, read exactly from a stationary tail
    or taken from the declared flags."""
    box = tail.representative_box()
    if box is None or tail.core is None:
        return tail.core_constant
    n1, n2 = tail.core
    top1 = max(box.k1_max, n1) + 1
    top2 = max(box.k2_max, n2) + 1
    row = [d.alpha(k1, n2) for k1 in range(n1, top1)]
    col = [d.beta(n1, k2) for k2 in range(n2, top2)]
    return (all(v == row[0] for v in row), all(v == col[0] for v in col))


def _toral_tail(d: WeightDiagram) -> Tail:
    t = d.tail
    mono = t.core_monotone
    sups = t.core_sups if (t.core_sups is not None and all(mono)) else None
    return Tail(start=t.start, period=t.period, core=t.core, core_sups=sups,
                core_monotone=mono if sups else (False, False), core_constant=t.core_constant)


def _spherical_tail(d: WeightDiagram) -> Tail:
    t = d.tail
    core = None
    sups = None
    mono = (False, False)
    constant = (False, False)
    if t.core is not None:
        constant = _factor_profile(d, t)
        # the spherical core keeps tensor form when one core factor is constant
        if any(constant):
            core = t.core
            if t.core_sups is not None and all(t.core_monotone):
                sups, mono = t.core_sups, t.core_monotone
        else:
            constant = (False, False)
    return Tail(start=t.start, period=t.period, core=core, core_sups=sups,
                core_monotone=mono, core_constant=constant)


def toral(d: WeightDiagram) -> WeightDiagram:
    """Toral Aluthge transform (componentwise Aluthge transform of T1, T2)."""
    def alpha(k1, k2):
        return math.sqrt(d.alpha(k1, k2) * d.alpha(k1 + 1, k2))

    def beta(k1, k2):
        return math.sqrt(d.beta(k1, k2) * d.beta(k1, k2 + 1))

    return WeightDiagram(alpha, beta, _toral_tail(d), extent=_shrunk_extent(d),
                         label=f"toral({d.label or 'd'})", check=False)


def spherical(d: WeightDiagram) -> WeightDiagram:
    """Spherical Aluthge transform, built on P = sqrt(T1*T1 + T2*T2)."""
    def q(k1, k2):
        return d.alpha(k1, k2) ** 2 + d.beta(k1, k2) ** 2

    def alpha(k1, k2):
        return d.alpha(k1, k2) * (q(k1 + 1, k2) / q(k1, k2)) ** 0.25

    def beta(k1, k2):
        return d.beta(k1, k2) * (q(k1, k2 + 1) / q(k1, k2)) ** 0.25

    return WeightDiagram(alpha, beta, _spherical_tail(d), extent=_shrunk_extent(d),
                         label=f"spherical({d.label or 'd'})", check=False)


@dataclass(frozen=True)
class ToralCommutingReport:
    """Both equivalent forms of the toral commutativity condition."""

    alpha_form: ViolationReport
    beta_form: ViolationReport

    @property
    def ok(self) -> bool:
        return self.alpha_form.ok

    @property
    def forms_disagree(self) -> bool:
        """True when one form holds and the other fails, which only happens
        for a non-commuting input."""
        return self.alpha_form.ok != self.beta_form.ok

    def __bool__(self):
        return self.ok

    def to_json(self):
        return {"alpha_form": self.alpha_form.to_json(), "beta_form": self.beta_form.to_json(),
                "forms_disagree": self.forms_disagree}


def toral_commutes(d: WeightDiagram, w: LatticeWindow, tol: float = DEFAULT_REL_TOL) -> ToralCommutingReport:
    """Check whether toral(d) commutes at every point of w.

    alpha form: alpha_{k+e2} alpha_{k+e1+e2} = alpha_{k+e1} alpha_{k+2e2}
    beta form:  beta_{k+e1} beta_{k+e1+e2} = beta_{k+e2} beta_{k+2e1}
    """
    w = d.usable(w, 2)

    def alpha_pairs():
        for k in w:
            yield (k, d.alpha(add(k, E2)) * d.alpha(add(k, (1, 1))),
                   d.alpha(add(k, E1)) * d.alpha(add(k, (0, 2))))

    def beta_pairs():
        for k in w:
            yield (k, d.beta(add(k, E1)) * d.beta(add(k, (1, 1))),
                   d.beta(add(k, E2)) * d.beta(add(k, (2, 0))))

    return ToralCommutingReport(worst_violation(alpha_pairs(), w, tol), worst_violation(beta_pairs(), w, tol))


def ats_identities(d: WeightDiagram, w: LatticeWindow, tol: float = DEFAULT_REL_TOL) -> ViolationReport:
    """Worst failure of alpha_{k+e1} = alpha_{k+e2} and beta_{k+e2} = beta_{k+e1} on w."""
    w = d.usable(w, 1)

    def pairs():
        for k in w:
            yield k, d.alpha(add(k, E1)), d.alpha(add(k, E2))
            yield k, d.beta(add(k, E2)), d.beta(add(k, E1))

    return worst_violation(pairs(), w, tol)


def ats_member(d: WeightDiagram, w: LatticeWindow, tol: float = DEFAULT_REL_TOL) -> bool:
    """True iff d satisfies the identities that make its toral and spherical
    transforms coincide, checked on w."""
    return ats_identities(d, w, tol).ok


def transform_gap(d: WeightDiagram, w: LatticeWindow) -> float:
    """max over w of |toral(d) - spherical(d)| across both weight families."""
    t, s = toral(d), spherical(d)
    w = t.usable(w)
    at, bt = t.weights(w)
    as_, bs = s.weights(w)
    return float(max(np.abs(at - as_).max(), np.abs(bt - bs).max()))


def scale(d: WeightDiagram, a: float, b: float) -> WeightDiagram:
    """The pair (a T1, b T2) for positive reals a, b."""
    a, b = float(a), float(b)
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"scale factors must be positive reals, got a={a!r}, b={b!r}")
    if a == 1.0 and b == 1.0:
        return d
    t = d.tail
    tail = Tail(
        start=t.start,
        period=t.period,
        core=t.core,
        core_sups=None if t.core_sups is None else (a * t.core_sups[0], b * t.core_sups[1]),
        core_monotone=t.core_monotone,
        core_constant=t.core_constant,
        sup=None if t.sup is None else (a * t.sup[0], b * t.sup[1]),
        berger=None if t.berger is None else t.berger.scaled(a, b),
    )
    return WeightDiagram(lambda k1, k2: a * d.alpha(k1, k2), lambda k1, k2: b * d.beta(k1, k2), tail,
                         extent=d.extent, label=f"scale({d.label or 'd'},{a:g},{b:g})", check=False)


@dataclass(frozen=True)
class FixedPointReport:
    is_fixed: bool
    gap: float
    c_squared: float
    c_squared_deviation: float
    window: LatticeWindow

    def __bool__(self):
        return self.is_fixed

    @property
    def c(self) -> float:
        return math.sqrt(self.c_squared)

    def to_json(self):
        return {"is_fixed": self.is_fixed, "gap": self.gap, "C": self.c, "C_squared": self.c_squared,
                "C_squared_deviation": self.c_squared_deviation, "window": str(self.window)}


def is_spherical_fixed_point(d: WeightDiagram, w: LatticeWindow, tol: float = 1e-10) -> FixedPointReport:
    """Compare spherical(d) with d on w and report alpha^2 + beta^2 there.

    For a fixed point alpha^2 + beta^2 equals a constant C^2 on the whole
    lattice; ``c_squared`` is its value at (0,0) and ``c_squared_deviation``
    the largest departure across w.
    """
    s = spherical(d)
    w = s.usable(w)
    a, b = d.weights(w)
    sa, sb = s.weights(w)
    gap = float(max(np.abs(a - sa).max(), np.abs(b - sb).max()))
    q = a * a + b * b
    c2 = float(q[0, 0])
    return FixedPointReport(gap <= tol, gap, c2, float(np.abs(q - c2).max()), w)
