"""Closed-form spectra of tensor-core shifts, norm-identity checks,
Drury-Arveson commutator asymptotics and continuity probes.

For a shift whose core is the tensor product (W_sigma, W_tau) and whose
components are hyponormal, the Taylor spectrum is the closed bidisk with
radii (||W_sigma||, ||W_tau||) and the essential spectrum is its
distinguished boundary pieces. Both are stored symbolically as the radii.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedDiagramError
from .lattice import LatticeWindow, Tail, WeightDiagram, check_commutativity, max_weight_gap, table_diagram
from .positivity import componentwise_hyponormal
from .transforms import spherical, toral, toral_commutes

DEFAULT_WINDOW = LatticeWindow(12, 12)


@dataclass(frozen=True)
class SpectrumDescriptor:
    r1: float
    r2: float

    def contains_taylor(self, z1: complex, z2: complex, tol: float = 1e-12) -> bool:
        return abs(z1) <= self.r1 + tol and abs(z2) <= self.r2 + tol

    def contains_essential(self, z1: complex, z2: complex, tol: float = 1e-12) -> bool:
        if not self.contains_taylor(z1, z2, tol):
            return False
        return abs(abs(z1) - self.r1) <= tol or abs(abs(z2) - self.r2) <= tol

    def close_to(self, other: "SpectrumDescriptor", tol: float = 1e-10) -> bool:
        return abs(self.r1 - other.r1) <= tol and abs(self.r2 - other.r2) <= tol

    def to_json(self):
        return {"r1": self.r1, "r2": self.r2}


def _scan_window(d: WeightDiagram, window: LatticeWindow | None) -> tuple[LatticeWindow, bool]:
    """Window on which a scan decides global questions, and whether it does."""
    box = d.tail.representative_box()
    if box is not None:
        w = box.grow(1)
        if d.tail.core is not None:
            w = w.union(LatticeWindow(*d.tail.core).grow(1))
        return w, True
    return (window or DEFAULT_WINDOW), False


def core_factor_sups(d: WeightDiagram) -> tuple[float, float]:
    """Exact norms of the two 1-variable shifts forming the tensor core."""
    tail = d.tail
    if tail.core is None:
        raise UnsupportedDiagramError("diagram has no tensor-form core")
    n1, n2 = tail.core
    box = tail.representative_box()
    if box is not None:
        top1 = max(box.k1_max, n1)
        top2 = max(box.k2_max, n2)
        row = [d.alpha(k1, n2) for k1 in range(n1, top1 + 1)]
        col = [d.beta(n1, k2) for k2 in range(n2, top2 + 1)]
        return max(row), max(col)
    if tail.core_sups is not None:
        return tail.core_sups
    raise UnsupportedDiagramError("norms of the core factors are not known exactly")


def predicted_spectrum(d: WeightDiagram, window: LatticeWindow | None = None) -> SpectrumDescriptor:
    """Taylor spectrum radii of a tensor-core shift with hyponormal components."""
    if d.tail.core is None:
        raise UnsupportedDiagramError("predicted spectra need a tensor-form core")
    w, _ = _scan_window(d, window)
    if not componentwise_hyponormal(d, w):
        raise UnsupportedDiagramError("components are not hyponormal (weights decrease somewhere)")
    return SpectrumDescriptor(*core_factor_sups(d))


def edge_sups(d: WeightDiagram, window: LatticeWindow | None = None) -> tuple[float, float, bool]:
    """(sup of row 0 of alpha, sup of column 0 of beta, exact?)."""
    tail = d.tail
    box = tail.representative_box()
    if box is not None:
        row = [d.alpha(k1, 0) for k1 in range(box.k1_max + 1)]
        col = [d.beta(0, k2) for k2 in range(box.k2_max + 1)]
        return max(row), max(col), True
    w = window or DEFAULT_WINDOW
    w = d.usable(w)
    row = [d.alpha(k1, 0) for k1 in range(w.k1_max + 1)]
    col = [d.beta(0, k2) for k2 in range(w.k2_max + 1)]
    if tail.core_sups is not None and all(tail.core_monotone):
        # monotone rows: the sup is the limit, which is the core factor norm
        return max(max(row), tail.core_sups[0]), max(max(col), tail.core_sups[1]), True
    return max(row), max(col), False


@dataclass
class SpectralInvarianceReport:
    radii: dict
    agree: bool
    edge_identities: dict
    edge_identities_hold: bool
    diagnostics: list = field(default_factory=list)

    def __bool__(self):
        return self.agree and self.edge_identities_hold

    def to_json(self):
        return {
            "radii": {k: (None if v is None else v.to_json()) for k, v in self.radii.items()},
            "agree": self.agree,
            "edge_identities": self.edge_identities,
            "edge_identities_hold": self.edge_identities_hold,
            "diagnostics": self.diagnostics,
        }


def spectral_invariance_check(d: WeightDiagram, tol: float = 1e-10,
                              window: LatticeWindow | None = None) -> SpectralInvarianceReport:
    """Compare predicted spectra of d, toral(d) and spherical(d), and check
    that both transforms keep the sup of row 0 of alpha and column 0 of beta."""
    diagnostics = []
    base = predicted_spectrum(d, window)
    radii = {"original": base, "toral": None, "spherical": None}
    w, exact = _scan_window(d, window)
    agree = True

    t = toral(d)
    if toral_commutes(d, w).ok:
        radii["toral"] = predicted_spectrum(t, window)
        agree &= radii["toral"].close_to(base, tol)
    else:
        diagnostics.append("toral transform is not commuting on the scan window; skipped")

    s = spherical(d)
    if s.tail.core is not None:
        radii["spherical"] = predicted_spectrum(s, window)
        agree &= radii["spherical"].close_to(base, tol)
    else:
        diagnostics.append("spherical core is not of tensor form (no constant core factor); skipped")

    r0, c0, e0 = edge_sups(d, window)
    edges = {"original": [r0, c0]}
    hold = True
    for name, td in (("toral", t), ("spherical", s)):
        r, c, e = edge_sups(td, window)
        edges[name] = [r, c]
        hold &= abs(r - r0) <= tol and abs(c - c0) <= tol
        if not (e and e0):
            diagnostics.append(f"{name} edge sups are window-limited")
    if not exact:
        diagnostics.append("no stationary tail: scans use a finite window")
    return SpectralInvarianceReport(radii, agree, edges, hold, diagnostics)


# ------------------------------------------------------------ Drury-Arveson

def da_alpha(k1: int, k2: int) -> float:
    return math.sqrt((k1 + 1) / (k1 + k2 + 1))


def da_beta(k1: int, k2: int) -> float:
    return math.sqrt((k2 + 1) / (k1 + k2 + 1))


def _degree_basis(lo: int, hi: int):
    basis = [(k1, n - k1) for n in range(max(lo, 0), hi + 1) for k1 in range(n + 1)]
    return basis, {k: i for i, k in enumerate(basis)}


def da_shift_matrices(lo: int, hi: int):
    """Dense T1, T2 acting on span{e_k : lo <= |k| <= hi}, truncated at degree hi."""
    basis, index = _degree_basis(lo, hi)
    n = len(basis)
    t1 = np.zeros((n, n))
    t2 = np.zeros((n, n))
    for (k1, k2), i in index.items():
        j = index.get((k1 + 1, k2))
        if j is not None:
            t1[j, i] = da_alpha(k1, k2)
        j = index.get((k1, k2 + 1))
        if j is not None:
            t2[j, i] = da_beta(k1, k2)
    return basis, index, t1, t2


@dataclass(frozen=True)
class DACommutatorReport:
    n: int
    self_coefficients: tuple[float, ...]
    cross_coefficients: tuple[float, ...]
    self_norm: float
    cross_norm: float
    self_bound: float
    cross_bound: float
    max_deviation: float

    @property
    def bounds_hold(self) -> bool:
        return self.self_norm <= self.self_bound * (1 + 1e-12) and self.cross_norm <= self.cross_bound * (1 + 1e-12)

    def to_json(self):
        return {"n": self.n, "self_norm": self.self_norm, "self_bound": self.self_bound,
                "cross_norm": self.cross_norm, "cross_bound": self.cross_bound,
                "bounds_hold": self.bounds_hold, "max_deviation": self.max_deviation}


def da_self_commutator_coefficient(k1: int, k2: int) -> float:
    """[T1*, T1] e_k = k2 / ((k1+k2)(k1+k2+1)) e_k on the degree-n piece, n >= 1."""
    n = k1 + k2
    return k2 / (n * (n + 1))


def da_cross_commutator_coefficient(n: int, k1: int) -> float:
    """[T2*, T1] e_(k1, n-k1) = c e_(k1+1, n-k1-1); returns c."""
    if k1 == n:
        return 0.0
    return -math.sqrt((k1 + 1) * (n - k1)) / (n * (n + 1))


def da_commutators(n: int) -> DACommutatorReport:
    """Closed-form commutator coefficients on the degree-n piece, checked
    against dense commutators built from the weight matrices."""
    if n < 1:
        raise ValueError("n must be at least 1")
    self_c = [da_self_commutator_coefficient(k1, n - k1) for k1 in range(n + 1)]
    cross_c = [da_cross_commutator_coefficient(n, k1) for k1 in range(n + 1)]

    basis, index, t1, t2 = da_shift_matrices(n - 1, n + 1)
    c11 = t1.T @ t1 - t1 @ t1.T
    c21 = t2.T @ t1 - t1 @ t2.T
    dev = 0.0
    for k1 in range(n + 1):
        i = index[(k1, n - k1)]
        dev = max(dev, abs(c11[i, i] - self_c[k1]))
        if k1 < n:
            j = index[(k1 + 1, n - k1 - 1)]
            dev = max(dev, abs(c21[j, i] - cross_c[k1]))
        else:
            dev = max(dev, float(np.abs(c21[:, i]).max()))
    rows = [index[(k1, n - k1)] for k1 in range(n + 1)]
    block11 = c11[np.ix_(rows, rows)]
    block21 = c21[np.ix_(rows, rows)]
    dev = max(dev, float(np.abs(block11 - np.diag(self_c)).max()))
    self_norm = float(np.linalg.norm(block11, 2))
    cross_norm = float(np.linalg.norm(block21, 2))
    return DACommutatorReport(n, tuple(self_c), tuple(cross_c), self_norm, cross_norm,
                              1 / (n + 1), 1 / (2 * n), dev)


def da_toral_gap_formula(n: int, k1: int) -> float:
    return (k1 + 1) * (n - k1) / ((n + 1) ** 2 * (n + 2))


def da_spherical_gap_formula(n: int, k1: int) -> float:
    """Reference closed form for the spherical gap. It does not match the
    direct evaluation; see ``da_spherical_gap_exact``."""
    return (k1 + 1) * (n - k1) * (2 * n + 1) / (n**2 * (n + 1) ** 2)


def da_spherical_gap_exact(n: int, k1: int) -> float:
    """|alpha_hat^4 - alpha^4| at (k1, n-k1), simplified by hand:
    alpha^4 * (1 - (n+3)(n+1)/(n+2)^2) = (k1+1)^2 / ((n+1)^2 (n+2)^2)."""
    return (k1 + 1) ** 2 / ((n + 1) ** 2 * (n + 2) ** 2)


@dataclass(frozen=True)
class GapReport:
    n: int
    k1: int
    kind: str
    closed_form: float
    direct: float
    bound: float

    @property
    def agrees(self) -> bool:
        return abs(self.closed_form - self.direct) < 1e-10

    @property
    def bound_holds(self) -> bool:
        return self.direct <= self.bound * (1 + 1e-12)

    @property
    def closed_form_bound_holds(self) -> bool:
        return self.closed_form <= self.bound * (1 + 1e-12)

    def to_json(self):
        return {"n": self.n, "k1": self.k1, "kind": self.kind, "closed_form": self.closed_form,
                "direct": self.direct, "agrees": self.agrees, "bound": self.bound,
                "bound_holds": self.bound_holds, "closed_form_bound_holds": self.closed_form_bound_holds}


_DA_TRANSFORMS: dict = {}


def _da_transform(kind):
    if kind not in _DA_TRANSFORMS:
        from .families import build_drury_arveson
        da = build_drury_arveson()
        _DA_TRANSFORMS[kind] = (da, toral(da) if kind == "toral" else spherical(da))
    return _DA_TRANSFORMS[kind]


def da_aluthge_gap(n: int, k1: int, kind: str) -> GapReport:
    """Gap |alpha'^4 - alpha^4| at (k1, n-k1) between the Drury-Arveson shift
    and its toral or spherical transform: closed form, direct value, bound."""
    if not 0 <= k1 <= n:
        raise ValueError("need 0 <= k1 <= n")
    if kind not in ("toral", "spherical"):
        raise ValueError(f"kind must be toral or spherical, got {kind!r}")
    da, tr = _da_transform(kind)
    k = (k1, n - k1)
    direct = abs(tr.alpha(k) ** 4 - da.alpha(k) ** 4)
    if kind == "toral":
        return GapReport(n, k1, kind, da_toral_gap_formula(n, k1), direct, 1 / (4 * (n + 2)))
    if n < 1:
        raise ValueError("the spherical bound needs n >= 1")
    return GapReport(n, k1, kind, da_spherical_gap_formula(n, k1), direct, (2 * n + 1) / (4 * n * n))


# -------------------------------------------------------- continuity probes

@dataclass(frozen=True)
class ProbeReport:
    eps: float
    seed: int
    window: LatticeWindow
    input_gap: float
    toral_gap: float
    spherical_gap: float
    commutativity_violation: float

    def to_json(self):
        return {"eps": self.eps, "seed": self.seed, "window": str(self.window), "input_gap": self.input_gap,
                "toral_gap": self.toral_gap, "spherical_gap": self.spherical_gap,
                "commutativity_violation": self.commutativity_violation}


def perturb(d: WeightDiagram, eps: float, w: LatticeWindow, seed: int = 0) -> WeightDiagram:
    """Random commuting perturbation of d, valid on w grown by two.

    Every alpha and every beta on column 0 is multiplied by an independent
    factor 1 + eps*U(-1, 1). The remaining betas get the factor forced by
    commutativity, g_{k+e1} = g_k f_{k+e2} / f_k, so a commuting input stays
    commuting and eps = 0 returns d unchanged. The same seed draws the same
    U values for every eps.
    """
    if not (0 <= eps < 1):
        raise ValueError("eps must lie in [0, 1) so that weights stay positive")
    big = w.grow(3)
    rng = np.random.default_rng(seed)
    fa = 1 + eps * rng.uniform(-1, 1, big.shape)
    g = np.ones(big.shape)
    g[0, :] = 1 + eps * rng.uniform(-1, 1, big.k2_max + 1)
    for k1 in range(big.k1_max):
        g[k1 + 1, :-1] = g[k1, :-1] * fa[k1, 1:] / fa[k1, :-1]
    a, b = d.weights(big)
    a = a * fa
    b = b * g
    ext = w.grow(2)
    a_rows = a[: ext.k1_max + 1, : ext.k2_max + 1].T
    b_rows = b[: ext.k1_max + 1, : ext.k2_max + 1].T
    return table_diagram(a_rows, b_rows, Tail(), label=f"perturb({d.label or 'd'},{eps:g})")


def continuity_probe(d: WeightDiagram, eps: float, w: LatticeWindow, seed: int = 0) -> ProbeReport:
    """Sup-gaps on w between d and a random eps-perturbation, before and after
    each transform. Empirical evidence only."""
    p = perturb(d, eps, w, seed)
    return ProbeReport(
        eps, seed, w,
        input_gap=max_weight_gap(d, p, w.grow(1)),
        toral_gap=max_weight_gap(toral(d), toral(p), w),
        spherical_gap=max_weight_gap(spherical(d), spherical(p), w),
        commutativity_violation=check_commutativity(p, w.grow(1)).max_relative,
    )
