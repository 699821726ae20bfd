"""Builders for the named shift families, closed-form region tests and the
spherically quasinormal constructor.

Every builder returns a ``WeightDiagram`` whose ``source`` records the
parameters, so it can be serialized and rebuilt exactly.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import ConstructionError, HypothesisError, MeasureError
from .lattice import Tail, WeightDiagram
from .measures import AtomicMeasure1D, AtomicMeasure2D, ExtensionResult, backward_extension_1d, backward_extension_2d, rho
from .positivity import hankel_sweep
from .sequences import MeasureSequence, WeightSequence, as_sequence


def _seq_json(seq):
    return seq.to_json() if hasattr(seq, "to_json") else None


def _core_fields(sigma, tau):
    return dict(
        core_sups=(sigma.sup, tau.sup),
        core_monotone=(sigma.monotone, tau.monotone),
        core_constant=(sigma.is_constant, tau.is_constant),
    )


# ------------------------------------------------------------ basic shapes

def build_tensor(sigma, tau) -> WeightDiagram:
    """(I (x) W_sigma, W_tau (x) I): alpha depends on k1 only, beta on k2 only."""
    sigma, tau = as_sequence(sigma), as_sequence(tau)
    start = (sigma.start, tau.start)
    period = (sigma.period_length if sigma.start is not None else 1,
              tau.period_length if tau.start is not None else 1)
    berger = None
    m1, m2 = sigma.berger_measure(), tau.berger_measure()
    if m1 is not None and m2 is not None:
        berger = AtomicMeasure2D.product(m1, m2)
    tail = Tail(start=start, period=period, core=(0, 0), sup=(sigma.sup, tau.sup), berger=berger,
                **_core_fields(sigma, tau))
    return WeightDiagram(lambda k1, k2: sigma(k1), lambda k1, k2: tau(k2), tail,
                         source={"kind": "tensor", "params": {"sigma": _seq_json(sigma), "tau": _seq_json(tau)}},
                         label="tensor")


def build_flat(c1: float, c2: float | None = None) -> WeightDiagram:
    """alpha = c1 and beta = c2 everywhere (c2 defaults to c1)."""
    return build_tensor(WeightSequence.constant(c1), WeightSequence.constant(c1 if c2 is None else c2))


def build_diagonal_core(omega) -> WeightDiagram:
    """Theta(W_omega): alpha = beta = omega_{k1+k2}."""
    omega = as_sequence(omega)
    if omega.start is not None:
        tail = Tail(start=(omega.start, omega.start), period=(omega.period_length, omega.period_length),
                    sup=(omega.sup, omega.sup))
    else:
        tail = Tail(sup=(omega.sup, omega.sup))
    return WeightDiagram(lambda k1, k2: omega(k1 + k2), lambda k1, k2: omega(k1 + k2), tail,
                         source={"kind": "diagonal_core", "params": {"omega": _seq_json(omega)}},
                         label="diagonal_core")


def build_drury_arveson() -> WeightDiagram:
    """alpha = sqrt((k1+1)/(k1+k2+1)), beta(k1,k2) = alpha(k2,k1)."""
    def alpha(k1, k2):
        return math.sqrt((k1 + 1) / (k1 + k2 + 1))

    def beta(k1, k2):
        return math.sqrt((k2 + 1) / (k1 + k2 + 1))

    return WeightDiagram(alpha, beta, Tail(sup=(1.0, 1.0)),
                         source={"kind": "drury_arveson", "params": {}}, label="drury_arveson")


# ----------------------------------------------------- backward-extension family

def _positive_params(**kw):
    for name, v in kw.items():
        if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be a positive real, got {v!r}")


def build_fig2_general(x0, x1, y0, y1, a, omega, tau, rel_tol: float = 1e-12) -> WeightDiagram:
    """Family whose core is the tensor (W_omega, W_tau) with a free first row
    (x0, x1, omega_1, ...), first column (y0, y1, tau_1, ...) and corner weight a.

    The remaining weights are forced by commutativity; the one free relation
    tau_0 x1 = omega_0 y1 is validated.
    """
    _positive_params(x0=x0, x1=x1, y0=y0, y1=y1, a=a)
    omega, tau = as_sequence(omega), as_sequence(tau)
    w0, t0 = omega(0), tau(0)
    if abs(t0 * x1 - w0 * y1) > rel_tol * max(t0 * x1, w0 * y1):
        raise ValueError(f"constraint tau_0*x1 = omega_0*y1 fails: {t0 * x1!r} != {w0 * y1!r}")
    alpha_col0_high = a * w0 / x1
    beta_col1_row0 = a * y0 / x0
    beta_high_row0 = a * y0 * w0 / (x0 * x1)

    def alpha(k1, k2):
        if k2 == 0:
            return x0 if k1 == 0 else x1 if k1 == 1 else omega(k1 - 1)
        if k1 == 0:
            return a if k2 == 1 else alpha_col0_high
        return omega(k1 - 1)

    def beta(k1, k2):
        if k1 == 0:
            return y0 if k2 == 0 else y1 if k2 == 1 else tau(k2 - 1)
        if k2 == 0:
            return beta_col1_row0 if k1 == 1 else beta_high_row0
        return tau(k2 - 1)

    start = (None if omega.start is None else max(2, omega.start + 1),
             None if tau.start is None else max(2, tau.start + 1))
    period = (omega.period_length if omega.start is not None else 1,
              tau.period_length if tau.start is not None else 1)
    sup = (max(x0, x1, a, alpha_col0_high, omega.sup), max(y0, y1, beta_col1_row0, beta_high_row0, tau.sup))
    tail = Tail(start=start, period=period, core=(1, 1), sup=sup, **_core_fields(omega, tau))
    params = {"x0": x0, "x1": x1, "y0": y0, "y1": y1, "a": a, "omega": _seq_json(omega), "tau": _seq_json(tau)}
    return WeightDiagram(alpha, beta, tail, source={"kind": "fig2", "params": params}, label="fig2_general")


def _xi_and_omega(xi=None, omega=None):
    if xi is None and omega is None:
        raise ValueError("give either a Berger measure xi or a weight sequence omega")
    if xi is not None:
        if not isinstance(xi, AtomicMeasure1D):
            raise TypeError("xi must be an AtomicMeasure1D")
        return xi, MeasureSequence(xi)
    seq = as_sequence(omega)
    return seq.berger_measure(), seq


def build_fig2_family(x0: float, a: float, xi: AtomicMeasure1D | None = None, *, omega=None) -> WeightDiagram:
    """Zeroth row (x0, omega_0, omega_1, ...), every other row (a, omega_0, ...),
    zeroth column (x0, omega_0, ...), every other column (a, omega_0, ...).

    ``omega`` is the weight sequence of the subnormal shift with Berger
    measure ``xi``; alternatively pass ``omega`` directly.
    When the closed-form test says the pair is subnormal, its Berger measure
    is attached to the tail.
    """
    _positive_params(x0=x0, a=a)
    xi, seq = _xi_and_omega(xi, omega)
    if seq.is_constant:
        seq = WeightSequence.constant(seq(0))
    w0 = seq(0)
    d = build_fig2_general(x0, w0, x0, w0, a, seq, seq)
    params = {"x0": x0, "a": a}
    if omega is None:
        params["xi"] = xi.to_json()
    else:
        params["omega"] = _seq_json(seq)
    tail = d.tail
    if xi is not None:
        ext = fig2_berger_measure(x0, a, xi)
        if ext.subnormal:
            tail = Tail(start=tail.start, period=tail.period, core=tail.core, core_sups=tail.core_sups,
                        core_monotone=tail.core_monotone, core_constant=tail.core_constant,
                        sup=tail.sup, berger=ext.measure)
    out = d.with_tail(tail)
    out.source = {"kind": "fig2", "params": params}
    out.label = "fig2"
    return out


@dataclass(frozen=True)
class Fig2Subnormality:
    subnormal: bool
    value: float
    rho: float

    def __bool__(self):
        return self.subnormal


def fig2_subnormal(x0: float, a: float, xi: AtomicMeasure1D) -> Fig2Subnormality:
    """Closed-form subnormality test x0^2 rho (2 - a^2 rho) <= 1.

    Raises ``HypothesisError`` when x0^2 rho > 1 or a^2 rho > 1, where the
    test does not apply.
    """
    _positive_params(x0=x0, a=a)
    r = rho(xi)
    if x0 * x0 * r > 1 + 1e-14:
        raise HypothesisError(f"x0^2 rho = {x0 * x0 * r!r} > 1")
    if a * a * r > 1 + 1e-14:
        raise HypothesisError(f"a^2 rho = {a * a * r!r} > 1")
    value = x0 * x0 * r * (2 - a * a * r)
    return Fig2Subnormality(value <= 1 + 1e-14, value, r)


def fig2_berger_measure(x0: float, a: float, xi: AtomicMeasure1D) -> ExtensionResult:
    """Berger measure of the family assembled from the upper half-lattice
    (a product measure) and the zeroth row."""
    try:
        r = rho(xi)
    except MeasureError as exc:
        return ExtensionResult(False, None, str(exc))
    if a * a * r > 1 + 1e-14 or x0 * x0 * r > 1 + 1e-14:
        return ExtensionResult(False, None, "hypotheses violated")
    xi_a = backward_extension_1d(xi, a).measure
    xi_0 = backward_extension_1d(xi, x0).measure
    return backward_extension_2d(AtomicMeasure2D.product(xi_a, xi), x0, xi_0)


def fig2_toral_hyponormal(x0: float, a: float, xi: AtomicMeasure1D) -> bool:
    """|a - x0| <= omega_1 - x0."""
    omega1 = MeasureSequence(xi)(1)
    return abs(a - x0) <= omega1 - x0 + 1e-14


Q_TILDE = 0.5 + math.sqrt(2) + 0.5 * math.sqrt(5 + 4 * math.sqrt(2))


@dataclass(frozen=True)
class ToralGapCheck:
    value: float
    holds: bool
    two_atomic_expression: float | None = None
    q: float | None = None
    q_within_threshold: bool | None = None


def thm311_check(xi: AtomicMeasure1D) -> ToralGapCheck:
    """omega_1^2 rho < 2, the condition under which the family contains
    subnormal members whose toral transform is not hyponormal.

    For xi = r delta_1 + s delta_q the value is also computed from its
    closed form (r + s q^2)/(r + s q) * (r + s/q) and q is compared with Q_TILDE.
    """
    seq = MeasureSequence(xi)
    value = seq(1) ** 2 * rho(xi)
    expr = q = within = None
    if len(xi.atoms) == 2 and any(p == 1.0 for p, _ in xi.atoms):
        (p1, m1), (p2, m2) = xi.atoms
        if p1 == 1.0:
            r, s, q = m1, m2, p2
        else:
            r, s, q = m2, m1, p1
        expr = (r + s * q * q) / (r + s * q) * (r + s / q)
        within = q <= Q_TILDE
    return ToralGapCheck(value, value < 2, expr, q, within)


def thm311_witness(xi: AtomicMeasure1D) -> tuple[float, float]:
    """(x0, a) with omega_1^2/4 < x0^2 <= 1/(2 rho) and 0 < a < 2 x0 - omega_1.

    Takes x0^2 = 1/(2 rho) and a halfway into its interval.
    """
    seq = MeasureSequence(xi)
    w1, r = seq(1), rho(xi)
    if w1 * w1 * r >= 2:
        raise HypothesisError(f"omega_1^2 rho = {w1 * w1 * r!r} >= 2; no witness exists")
    x0 = math.sqrt(1 / (2 * r))
    a = (2 * x0 - w1) / 2
    return x0, a


# --------------------------------------------------- one-parameter region plot

def _check_unit(name, v, closed=True):
    lo_ok = v >= 0 if closed else v > 0
    hi_ok = v <= 1 if closed else v < 1
    if not (lo_ok and hi_ok):
        raise ValueError(f"{name} = {v!r} is outside {'[0, 1]' if closed else '(0, 1)'}")


@dataclass(frozen=True)
class RegionCurves:
    y: float
    s: float
    h: float
    ca: float
    pa: float


def example46(y: float) -> RegionCurves:
    """Boundary curves of the (x, y) region plot for the family with omega = 1.

    s: subnormal, h: hyponormal, CA: toral transform hyponormal,
    PA: the reference spherical-transform curve (see spherical_six_point_boundary
    for the boundary that matches the Six-Point Test). Defined on [0, 1].
    """
    _check_unit("y", y)
    y2 = y * y
    s = math.sqrt(1 / (2 - y2))
    h = math.sqrt((1 + y2) / 2)
    ca = (1 + y) / 2
    pa = 2 * (1 + y2 - y2 * y2) / ((1 + math.sqrt(2)) * (1 + y2) * (math.sqrt(1 + y2) - y2))
    return RegionCurves(y, s, h, ca, pa)


def spherical_six_point_boundary(y: float) -> float:
    """Largest x for which the spherical transform of the omega = 1 family
    passes the Six-Point Test at (0,0), derived from its 3x3 moment matrix.

    (sqrt(1+y^2) + sqrt(2) y^2) / (sqrt(2) (1+y^2)).
    """
    _check_unit("y", y)
    y2 = y * y
    return (math.sqrt(1 + y2) + math.sqrt(2) * y2) / (math.sqrt(2) * (1 + y2))


@dataclass(frozen=True)
class RegionVerdicts:
    subnormal: bool
    hyponormal: bool
    toral_hyponormal: bool
    spherical_hyponormal: bool

    def as_tuple(self):
        return (self.subnormal, self.hyponormal, self.toral_hyponormal, self.spherical_hyponormal)


def example46_verdicts(x: float, y: float) -> RegionVerdicts:
    _check_unit("x", x, closed=False)
    _check_unit("y", y, closed=False)
    c = example46(y)
    return RegionVerdicts(x <= c.s, x <= c.h, x <= c.ca, x <= c.pa)


def example46_crossing(tol: float = 1e-8) -> float:
    """The y in (0, 1) where CA(y) = s(y), by bisection."""
    def f(y):
        c = example46(y)
        return c.ca - c.s

    return float(bisect(f, 1e-9, 1 - 1e-9, xtol=tol))


def build_example46(x: float, y: float) -> WeightDiagram:
    """Family member with omega identically 1, x0 = x and a = y."""
    d = build_fig2_family(x, y, AtomicMeasure1D.dirac(1.0))
    d.label = "example46"
    return d


# ------------------------------------------------------- quasinormal diagrams

class _QuasinormalRows:
    """Row-by-row construction alpha(k, j+1) = alpha(k, j) beta(k+1, j) / beta(k, j)
    with beta = sqrt(C^2 - alpha^2). Row j at column k needs row 0 up to k + j."""

    def __init__(self, row, c):
        self.row = row
        self.c2 = c * c
        self.rows: list[list[float]] = [[]]
        self.lock = threading.Lock()

    def _beta(self, a):
        return math.sqrt(self.c2 - a * a)

    def _ensure(self, j, length):
        with self.lock:
            while len(self.rows) <= j:
                self.rows.append([])
            for i in range(j + 1):
                need = length + (j - i)
                cur = self.rows[i]
                while len(cur) < need:
                    k = len(cur)
                    if i == 0:
                        v = float(self.row(k))
                    else:
                        prev = self.rows[i - 1]
                        v = prev[k] * self._beta(prev[k + 1]) / self._beta(prev[k])
                    if not v * v < self.c2:
                        raise ConstructionError("alpha reached C during construction", (k, i))
                    cur.append(v)

    def alpha(self, k1, k2):
        rows = self.rows
        if k2 >= len(rows) or k1 >= len(rows[k2]):
            self._ensure(k2, k1 + 1)
        return self.rows[k2][k1]

    def beta(self, k1, k2):
        return self._beta(self.alpha(k1, k2))


def build_quasinormal_from_row(row, c: float = 1.0, check_level: int = 0, check_span: int = 40) -> WeightDiagram:
    """Spherically quasinormal diagram (alpha^2 + beta^2 = C^2) with the given zeroth row.

    ``row`` is a weight sequence or a Berger measure. The construction only
    succeeds for rows of subnormal shifts; ``check_level`` > 0 first runs a
    Hankel sweep of that level over ``check_span`` indices.
    """
    _positive_params(C=c)
    seq = as_sequence(row)
    if seq.sup >= c:
        raise ValueError(f"sup of the zeroth row ({seq.sup!r}) must be < C = {c!r}")
    if check_level > 0:
        sweep = hankel_sweep(seq.take(check_span + 2 * check_level), check_level, check_span)
        if not sweep:
            raise ValueError(f"zeroth row fails the level-{check_level} Hankel test at u={sweep.failing_u}")
    rows = _QuasinormalRows(seq, c)
    xi = seq.berger_measure()
    berger = None
    if xi is not None:
        berger = AtomicMeasure2D(((p, c * c - p), m) for p, m in xi.atoms)
    start = (seq.start, None) if seq.start is not None else (None, None)
    period = (seq.period_length if seq.start is not None else 1, 1)
    tail = Tail(start=start, period=period, berger=berger)
    params = {"row": _seq_json(seq), "C": c}
    return WeightDiagram(rows.alpha, rows.beta, tail, source={"kind": "quasinormal", "params": params},
                         label="quasinormal")


# -------------------------------------------- 2-hyponormality of 1-D transforms

def toral_weights(weights) -> list[float]:
    """Aluthge transform of a 1-variable shift: sqrt(w_n w_{n+1})."""
    w = list(weights)
    return [math.sqrt(w[i] * w[i + 1]) for i in range(len(w) - 1)]


@dataclass(frozen=True)
class TransformLossWitness:
    head: tuple[float, ...]
    tail_measure: AtomicMeasure1D
    weights: tuple[float, ...]
    shift_min_eigenvalue: float
    transform_min_eigenvalue: float
    transform_failing_u: int
    trials: int


def search_toral_loss(k: int = 2, trials: int = 20000, seed: int = 0, u_max: int = 40,
                      n_weights: int = 90, margin: float = 1e-8) -> TransformLossWitness | None:
    """Random search for a k-hyponormal shift whose Aluthge transform is not.

    Candidates are a random head of one or two weights followed by the
    weights of a random 2-atomic subnormal shift. A candidate is accepted
    when every H(k; u), u <= u_max, of the shift is PSD while the transform
    has a Hankel matrix with relative minimum eigenvalue below -margin.
    Verdicts are window-limited: only u <= u_max is examined.
    """
    rng = np.random.default_rng(seed)
    for t in range(1, trials + 1):
        p = np.sort(rng.uniform(0.1, 1.0, 2))
        r = rng.uniform(0.05, 0.95)
        xi = AtomicMeasure1D([(p[0], r), (p[1], 1 - r)])
        head = tuple(float(v) for v in rng.uniform(0.05, 1.0, rng.integers(1, 3)))
        w = list(head) + list(MeasureSequence(xi).take(n_weights))
        base = hankel_sweep(w, k, u_max)
        if not base:
            continue
        tw = toral_weights(w)
        worst, fail_u = 0.0, None
        for u in range(u_max + 1):
            sweep = hankel_sweep(tw[u:], k, 0)
            if sweep.min_eigenvalue < worst:
                worst, fail_u = sweep.min_eigenvalue, u
        if fail_u is not None and worst < -margin:
            return TransformLossWitness(head, xi, tuple(w), base.min_eigenvalue, worst, fail_u, t)
    return None
