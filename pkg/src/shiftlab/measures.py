"""Finitely atomic measures on [0, inf) and [0, inf)^2.

These are the Berger measures of the subnormal shifts handled by the
package. Only finitely many atoms are supported; every operation here is an
exact finite sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import MeasureError

POSITION_TOL = 1e-12
RESIDUAL_DROP = 1e-14


def _same_position(p, q, tol=POSITION_TOL):
    return abs(p - q) <= tol * max(1.0, abs(p), abs(q))


def _merge_1d(pairs):
    merged: list[list[float]] = []
    for p, r in sorted(pairs):
        if merged and _same_position(merged[-1][0], p):
            merged[-1][1] += r
        else:
            merged.append([p, r])
    return tuple((float(p), float(r)) for p, r in merged)


@dataclass(frozen=True)
class AtomicMeasure1D:
    """Positive measure sum_i r_i delta_{p_i} on [0, inf).

    Atoms are stored sorted by position. Coincident positions (within
    ``POSITION_TOL``) are merged on construction.
    """

    atoms: tuple[tuple[float, float], ...]

    def __init__(self, atoms: Iterable[tuple[float, float]]):
        pairs = []
        for p, r in atoms:
            p, r = float(p), float(r)
            if not (math.isfinite(p) and p >= 0):
                raise MeasureError(f"atom position {p!r} must be a finite nonnegative real")
            if not (math.isfinite(r) and r > 0):
                raise MeasureError(f"atom mass {r!r} must be a finite positive real")
            pairs.append((p, r))
        if not pairs:
            raise MeasureError("a measure needs at least one atom")
        object.__setattr__(self, "atoms", _merge_1d(pairs))

    @classmethod
    def dirac(cls, p: float) -> "AtomicMeasure1D":
        return cls([(p, 1.0)])

    @classmethod
    def parse(cls, text: str) -> "AtomicMeasure1D":
        """Parse ``"mass@pos,mass@pos,..."``, e.g. ``"0.5@1,0.5@2"``."""
        pairs = []
        for chunk in text.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "@" not in chunk:
                raise MeasureError(f"cannot parse atom {chunk!r}; expected mass@position")
            r, p = chunk.split("@", 1)
            pairs.append((float(p), float(r)))
        return cls(pairs)

    def format(self) -> str:
        return ",".join(f"{r!r}@{p!r}" for p, r in self.atoms)

    @property
    def positions(self) -> np.ndarray:
        return np.array([p for p, _ in self.atoms])

    @property
    def masses(self) -> np.ndarray:
        return np.array([r for _, r in self.atoms])

    @property
    def total(self) -> float:
        return math.fsum(r for _, r in self.atoms)

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total - 1.0) <= tol

    def mass_at(self, p: float) -> float:
        for q, r in self.atoms:
            if _same_position(p, q):
                return r
        return 0.0

    @property
    def max_position(self) -> float:
        return self.atoms[-1][0]

    def moments(self, n: int) -> np.ndarray:
        """gamma_0, ..., gamma_n with gamma_j = sum r_i p_i**j."""
        return measure_moments(self, n)

    def weights(self, n: int) -> np.ndarray:
        return weights_from_measure(self, n)

    def to_json(self):
        return [[p, r] for p, r in self.atoms]

    @classmethod
    def from_json(cls, data) -> "AtomicMeasure1D":
        return cls((p, r) for p, r in data)


def measure_moments(xi: AtomicMeasure1D, n: int) -> np.ndarray:
    if n < 0:
        raise ValueError("n must be nonnegative")
    j = np.arange(n + 1)
    return np.array([math.fsum(r * p**int(i) for p, r in xi.atoms) for i in j])


def weights_from_measure(xi: AtomicMeasure1D, n: int) -> np.ndarray:
    """The first ``n`` weights omega_j = sqrt(gamma_{j+1} / gamma_j)."""
    gamma = measure_moments(xi, n)
    if n > 0 and gamma[1] == 0.0:
        raise MeasureError("all mass sits at 0; no weighted shift has this Berger measure")
    return np.sqrt(gamma[1:] / gamma[:-1])


def rho(xi: AtomicMeasure1D) -> float:
    """Integral of 1/s against xi."""
    if any(p == 0.0 for p, _ in xi.atoms):
        raise MeasureError("1/s is not integrable: the measure has an atom at 0")
    return math.fsum(r / p for p, r in xi.atoms)


@dataclass(frozen=True)
class ExtensionResult:
    subnormal: bool
    measure: "AtomicMeasure1D | AtomicMeasure2D | None"
    reason: str = ""
    witness: object = None

    def __bool__(self):
        return self.subnormal


def backward_extension_1d(xi: AtomicMeasure1D, alpha0: float) -> ExtensionResult:
    """Decide whether prepending ``alpha0`` to the shift with Berger measure xi
    stays subnormal, and return the extended Berger measure if so."""
    if not xi.is_probability():
        raise MeasureError(f"expected a probability measure, total mass is {xi.total!r}")
    r = rho(xi)
    c = alpha0 * alpha0
    if c * r > 1.0 + 1e-14:
        return ExtensionResult(False, None, f"alpha0^2 * rho = {c * r!r} exceeds 1")
    atoms = [(p, c * m / p) for p, m in xi.atoms]
    residual = 1.0 - c * r
    if residual >= RESIDUAL_DROP:
        atoms.append((0.0, residual))
    return ExtensionResult(True, AtomicMeasure1D(atoms))


def dominated_by(small: AtomicMeasure1D, big: AtomicMeasure1D, tol: float = 1e-12):
    """Atomwise test of small <= big.

    Returns ``(ok, witness)`` where witness is the offending ``(position,
    small_mass, big_mass)`` or None. Atoms of ``small`` lighter than
    ``RESIDUAL_DROP`` are treated as zero.
    """
    for p, r in small.atoms:
        if r < RESIDUAL_DROP:
            continue
        q = big.mass_at(p)
        if r > q + tol * max(1.0, q):
            return False, (p, r, q)
    return True, None


def _merge_2d(pairs):
    merged: list[list] = []
    for (s, t), m in sorted(pairs):
        for entry in merged:
            if _same_position(entry[0], s) and _same_position(entry[1], t):
                entry[2] += m
                break
        else:
            merged.append([s, t, m])
    return tuple(((float(s), float(t)), float(m)) for s, t, m in merged)


@dataclass(frozen=True)
class AtomicMeasure2D:
    """Positive measure sum_i m_i delta_{(s_i, t_i)} on [0, inf)^2."""

    atoms: tuple[tuple[tuple[float, float], float], ...]

    def __init__(self, atoms: Iterable[tuple[Sequence[float], float]]):
        pairs = []
        for (s, t), m in atoms:
            s, t, m = float(s), float(t), float(m)
            if not (math.isfinite(s) and math.isfinite(t) and s >= 0 and t >= 0):
                raise MeasureError(f"atom position {(s, t)!r} must be finite and nonnegative")
            if not (math.isfinite(m) and m > 0):
                raise MeasureError(f"atom mass {m!r} must be a finite positive real")
            pairs.append(((s, t), m))
        if not pairs:
            raise MeasureError("a measure needs at least one atom")
        object.__setattr__(self, "atoms", _merge_2d(pairs))

    @classmethod
    def product(cls, xi1: AtomicMeasure1D, xi2: AtomicMeasure1D) -> "AtomicMeasure2D":
        return cls(((s, t), r1 * r2) for s, r1 in xi1.atoms for t, r2 in xi2.atoms)

    @property
    def total(self) -> float:
        return math.fsum(m for _, m in self.atoms)

    @property
    def max_s(self) -> float:
        return max(s for (s, _), _ in self.atoms)

    @property
    def max_t(self) -> float:
        return max(t for (_, t), _ in self.atoms)

    def moment(self, k1: int, k2: int) -> float:
        return math.fsum(m * s**k1 * t**k2 for (s, t), m in self.atoms)

    def marginal_x(self) -> AtomicMeasure1D:
        return AtomicMeasure1D((s, m) for (s, _), m in self.atoms)

    def marginal_y(self) -> AtomicMeasure1D:
        return AtomicMeasure1D((t, m) for (_, t), m in self.atoms)

    def inverse_t_norm(self) -> float:
        """L1 norm of 1/t; infinite if any atom lies on t = 0."""
        if any(t == 0.0 for (_, t), _ in self.atoms):
            return math.inf
        return math.fsum(m / t for (_, t), m in self.atoms)

    def extremal(self) -> "AtomicMeasure2D":
        """Reweight by 1/(t * ||1/t||_1), which gives a probability measure."""
        norm = self.inverse_t_norm()
        if not math.isfinite(norm):
            raise MeasureError("1/t is not integrable: some atom lies on t = 0")
        return AtomicMeasure2D(((s, t), m / (t * norm)) for (s, t), m in self.atoms)

    def tilt(self, j: int, i: int) -> "AtomicMeasure2D":
        """Normalized s^j t^i mu, the Berger measure of the restriction that
        starts at lattice point (j, i)."""
        g = self.moment(j, i)
        if g <= 0:
            raise MeasureError(f"moment ({j}, {i}) vanishes; the restriction has no Berger measure")
        atoms = [((s, t), m * s**j * t**i / g) for (s, t), m in self.atoms]
        return AtomicMeasure2D(a for a in atoms if a[1] > 0)

    def scaled(self, a: float, b: float) -> "AtomicMeasure2D":
        """Push forward under (s, t) -> (a^2 s, b^2 t); Berger measure of (aT1, bT2)."""
        return AtomicMeasure2D(((a * a * s, b * b * t), m) for (s, t), m in self.atoms)

    def to_json(self):
        return [[s, t, m] for (s, t), m in self.atoms]

    @classmethod
    def from_json(cls, data) -> "AtomicMeasure2D":
        return cls(((s, t), m) for s, t, m in data)


def extremal_and_marginal(mu: AtomicMeasure2D) -> tuple[AtomicMeasure2D, AtomicMeasure1D]:
    return mu.extremal(), mu.marginal_x()


def backward_extension_2d(mu_m: AtomicMeasure2D, beta00: float, xi0: AtomicMeasure1D) -> ExtensionResult:
    """Extend a subnormal restriction to the upper half-lattice down to row 0.

    ``mu_m`` is the Berger measure of the restriction to k2 >= 1, ``beta00``
    the weight joining (0,0) to (0,1) and ``xi0`` the Berger measure of the
    zeroth row. The caller is responsible for the shift being commuting with
    hyponormal components.
    """
    norm = mu_m.inverse_t_norm()
    if not math.isfinite(norm):
        return ExtensionResult(False, None, "1/t is not integrable against the restricted measure")
    c = beta00 * beta00 * norm
    if c > 1.0 + 1e-14:
        return ExtensionResult(False, None, f"beta00^2 * ||1/t|| = {c!r} exceeds 1")
    ext = mu_m.extremal()
    scaled_marginal = AtomicMeasure1D((s, c * m) for s, m in ext.marginal_x().atoms)
    ok, witness = dominated_by(scaled_marginal, xi0)
    if not ok:
        return ExtensionResult(False, None, "zeroth-row measure does not dominate the extremal marginal", witness)
    atoms = [((s, t), c * m) for (s, t), m in ext.atoms]
    for s, m in xi0.atoms:
        slab = m - scaled_marginal.mass_at(s)
        if slab >= RESIDUAL_DROP:
            atoms.append(((s, 0.0), slab))
    return ExtensionResult(True, AtomicMeasure2D(atoms))
