"""Moment-matrix positivity: Hankel matrices, M_u(k), PSD verdicts and
windowed k-hyponormality.

A commuting pair is k-hyponormal iff every moment matrix M_u(k) is positive
semidefinite. Only finitely many u can be checked, so each verdict says
whether its window is *certifying*:

* ``certifying``: the tail is stationary and the window covers one full
  period past the thresholds, so every M_u(k) equals one already checked
  (up to the positive factor gamma_u);
* ``berger-measure``: the diagram carries a Berger measure whose moments
  match the window, so it is subnormal and every M_u(k) is PSD;
* ``window-limited``: neither applies; the verdict covers w only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InsufficientMomentsError, NotSymmetricError
from .lattice import LatticeWindow, Point, WeightDiagram, moment, moment_ratios

PSD_TOL = 1e-10
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    min_eigenvalue: float
    matrix_order: int
    scale: float = 1.0
    failing_u: Point | None = None

    def __bool__(self):
        return self.is_psd

    def to_json(self):
        return {"is_psd": self.is_psd, "min_eigenvalue": self.min_eigenvalue, "matrix_order": self.matrix_order,
                "scale": self.scale, "failing_u": None if self.failing_u is None else list(self.failing_u)}


def is_psd(m, tol: float = PSD_TOL) -> PsdVerdict:
    """PSD test by symmetric eigendecomposition.

    The threshold is relative: min eigenvalue >= -tol * (largest diagonal
    entry). Boundary cases therefore count as PSD.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetricError(f"expected a square matrix, got shape {m.shape}")
    size = np.abs(m).max() if m.size else 0.0
    if size > 0 and np.abs(m - m.T).max() > SYMMETRY_TOL * size:
        raise NotSymmetricError("matrix is not symmetric within 1e-12 relative")
    eig = np.linalg.eigvalsh(m)
    lo = float(eig[0])
    scale = float(np.max(np.diag(m))) if m.size else 0.0
    return PsdVerdict(lo >= -tol * max(scale, 0.0), lo, m.shape[0], scale)


def hankel_matrix(gamma: Sequence[float], k: int, u: int) -> np.ndarray:
    """(k+1) x (k+1) Hankel matrix with entries gamma[u + i + j] (0-based i, j)."""
    gamma = np.asarray(gamma, dtype=float)
    if u < 0 or k < 0:
        raise ValueError("k and u must be nonnegative")
    if len(gamma) < u + 2 * k + 1:
        raise InsufficientMomentsError(f"need moments up to index {u + 2 * k}, have {len(gamma) - 1}")
    i = np.arange(k + 1)
    return gamma[u + i[:, None] + i[None, :]]


@lru_cache(maxsize=None)
def multi_indices(k: int) -> tuple[Point, ...]:
    """Graded order (0,0),(1,0),(0,1),(2,0),(1,1),(0,2),... up to degree k."""
    return tuple((d - j, j) for d in range(k + 1) for j in range(d + 1))


def _index_sums(k: int):
    idx = np.array(multi_indices(k))
    return idx[:, None, 0] + idx[None, :, 0], idx[:, None, 1] + idx[None, :, 1]


def moment_matrix(d: WeightDiagram, k: int, u: Point = (0, 0), normalized: bool = False) -> np.ndarray:
    """M_u(k): entries gamma_{u + a + b} for multi-indices a, b of degree <= k.

    With ``normalized=True`` every entry is divided by gamma_u, which leaves
    the PSD verdict unchanged and avoids extreme magnitudes.
    """
    s1, s2 = _index_sums(k)
    ratios = moment_ratios(d, tuple(u), 2 * k)
    m = ratios[s1, s2]
    if not normalized:
        m = m * moment(d, u)
    return m


def six_point_test(d: WeightDiagram, u: Point = (0, 0), tol: float = PSD_TOL) -> PsdVerdict:
    """PSD verdict for the 3x3 matrix M_u(1)."""
    v = is_psd(moment_matrix(d, 1, u), tol)
    if not v.is_psd:
        return PsdVerdict(False, v.min_eigenvalue, v.matrix_order, v.scale, tuple(u))
    return v


def _berger_matches(d: WeightDiagram, w: LatticeWindow, rel: float = 1e-10) -> bool:
    mu = d.tail.berger
    if mu is None:
        return False
    for k in w:
        g = moment(d, k)
        if abs(mu.moment(*k) - g) > rel * max(g, 1e-300):
            return False
    return True


def certificate(d: WeightDiagram, w: LatticeWindow, k: int = 1) -> str:
    """How far a verdict on w extends to the whole lattice."""
    if d.tail.certifies(w):
        return "certifying"
    if d.tail.berger is not None and _berger_matches(d, w.grow(2 * k).intersect(d.extent)):
        return "berger-measure"
    return "window-limited"


@dataclass(frozen=True)
class HyponormalityReport:
    k: int
    window: LatticeWindow
    verdict: bool
    failing_u: Point | None
    min_eigenvalue: float
    certificate: str
    per_u: dict = field(default_factory=dict, repr=False)

    def __bool__(self):
        return self.verdict

    @property
    def certifying(self) -> bool:
        return self.certificate != "window-limited"

    def to_json(self):
        return {
            "k": self.k,
            "window": str(self.window),
            "verdict": self.verdict,
            "failing_u": None if self.failing_u is None else list(self.failing_u),
            "min_eigenvalue": self.min_eigenvalue,
            "certificate": self.certificate,
            "per_u_min_eigenvalue": {f"{u[0]},{u[1]}": v for u, v in self.per_u.items()},
        }


def k_hyponormal(d: WeightDiagram, k: int, w: LatticeWindow, tol: float = PSD_TOL,
                 stop_at_first: bool = False) -> HyponormalityReport:
    """Check M_u(k) >= 0 for every u in w.

    Matrices are normalized by gamma_u (entries gamma_{u+v}/gamma_u), so the
    recorded eigenvalues are relative to a unit (0,0) entry. Table-backed
    diagrams are checked on the part of w whose matrices fit in the table.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    w = d.usable(w, 2 * k)
    s1, s2 = _index_sums(k)
    per_u = {}
    failing = None
    worst = np.inf
    for u in w:
        m = moment_ratios(d, u, 2 * k)[s1, s2]
        v = is_psd(m, tol)
        per_u[u] = v.min_eigenvalue
        worst = min(worst, v.min_eigenvalue)
        if not v.is_psd and failing is None:
            failing = u
            if stop_at_first:
                break
    return HyponormalityReport(k, w, failing is None, failing, float(worst), certificate(d, w, k), per_u)


def componentwise_hyponormal(d: WeightDiagram, w: LatticeWindow, rel_tol: float = 1e-12) -> bool:
    """alpha nondecreasing along every row and beta along every column of w
    (each compared with its successor one step further)."""
    w = d.usable(w, 1)
    for k1, k2 in w:
        a0, a1 = d.alpha(k1, k2), d.alpha(k1 + 1, k2)
        b0, b1 = d.beta(k1, k2), d.beta(k1, k2 + 1)
        if a0 > a1 * (1 + rel_tol) or b0 > b1 * (1 + rel_tol):
            return False
    return True


@dataclass(frozen=True)
class HankelSweep:
    k: int
    verdict: bool
    failing_u: int | None
    min_eigenvalue: float

    def __bool__(self):
        return self.verdict


def moments_from_weights(weights: Sequence[float]) -> np.ndarray:
    """gamma_0 = 1, gamma_{j+1} = gamma_j * w_j^2."""
    w = np.asarray(weights, dtype=float)
    return np.concatenate([[1.0], np.cumprod(w * w)])


def hankel_sweep(weights: Sequence[float], k: int, u_max: int, tol: float = PSD_TOL) -> HankelSweep:
    """k-hyponormality test of a 1-variable shift via H(k; u) >= 0 for u = 0..u_max.

    Each Hankel matrix is normalized by gamma_u, i.e. built from the weights
    starting at index u.
    """
    w = np.asarray(weights, dtype=float)
    if len(w) < u_max + 2 * k:
        raise InsufficientMomentsError(f"need {u_max + 2 * k} weights, have {len(w)}")
    worst = np.inf
    for u in range(u_max + 1):
        gamma = moments_from_weights(w[u:u + 2 * k])
        v = is_psd(hankel_matrix(gamma, k, 0), tol)
        worst = min(worst, v.min_eigenvalue)
        if not v.is_psd:
            return HankelSweep(k, False, u, float(worst))
    return HankelSweep(k, True, None, float(worst))
