"""Tangent orbibundle fibers, orbisections, and curves.

Orbisections are stored as one globally equivariant vector field on the
model; chart lifts are restrictions, which keeps them consistent on every
overlap by construction.  Tangent data on the sphere lives in the ambient
embedding with tangency enforced by projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NotDifferentiable
from .groups import EPS_GRP, FiniteActionGroup, fixed_subspace, stabilizer
from .maps import _lift_jet
from .model import (FLAT, SPHERE, DerivedChart, GoodOrbifold, QuotientPoint,
                    _snap_key)

CURVE_FD_STEP = 1e-4       # one-sided differencing step for lift classification
CURVE_FD_TOL = 1e-6        # derivative agreement tolerance
MAX_CURVE_ORDER = 2        # FD above order 2 cannot hold the tolerance


@dataclass(frozen=True)
class TangentVectorAt:
    """A tangent vector class at a quotient point.

    ``vector`` is the representative aligned with base.representative;
    ``orbit_class`` collects its images under the isotropy action.
    """

    base: QuotientPoint
    vector: np.ndarray
    orbit_class: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        oc = np.asarray(self.orbit_class, dtype=float)
        oc.setflags(write=False)
        object.__setattr__(self, "orbit_class", oc)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))

    def same_class(self, other: "TangentVectorAt", tol: float = 1e-8) -> bool:
        if self.base != other.base:
            return False
        return bool(np.linalg.norm(self.orbit_class - other.vector,
                                   axis=1).min() < tol)


def tangent_vector(orbifold: GoodOrbifold, base: QuotientPoint,
                   vector: np.ndarray) -> TangentVectorAt:
    v = np.asarray(vector, dtype=float)
    if orbifold.model.kind == SPHERE:
        v = v - np.dot(v, base.representative) * base.representative
    stab = stabilizer(orbifold.group, base.representative)
    return TangentVectorAt(base, v, stab.matrices @ v)


def admissible_space(orbifold: GoodOrbifold, p: QuotientPoint) -> np.ndarray:
    """Orthonormal basis (rows) of the admissible vectors at p.

    This is the fixed subspace of the isotropy action, intersected with the
    tangent plane on sphere models; it is exactly where orbisections can
    take values.
    """
    stab = stabilizer(orbifold.group, p.representative)
    basis = fixed_subspace(stab)
    if orbifold.model.kind == FLAT:
        return basis
    x = p.representative
    rows = [b - np.dot(b, x) * x for b in basis]
    out = []
    for r in rows:
        for o in out:
            r = r - np.dot(r, o) * o
        nr = float(np.linalg.norm(r))
        if nr > 1e-9:
            out.append(r / nr)
    return np.stack(out) if out else np.zeros((0, orbifold.model.ambient_dim))


def project_equivariant(group: FiniteActionGroup, field: Callable,
                        model=None) -> Callable[[np.ndarray], np.ndarray]:
    """Group-average a raw vector field into an equivariant one.

    s_bar(y) = (1/|G|) sum_g g^-1 s(g y); idempotent on equivariant input.
    With a sphere model the input is first projected to the tangent plane,
    which the averaging preserves.
    """
    def tangentialize(y: np.ndarray, v: np.ndarray) -> np.ndarray:
        if model is not None and model.kind == SPHERE:
            return v - np.dot(v, y) * y
        return v

    def averaged(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        acc = None
        for lab in range(group.order):
            g = group.matrix(lab)
            gy = g @ y
            val = tangentialize(gy, np.asarray(field(gy), dtype=float))
            term = g.T @ val
            acc = term if acc is None else acc + term
        return acc / group.order

    return averaged


class Orbisection:
    """Section of the tangent orbibundle over a good orbifold."""

    def __init__(self, orbifold: GoodOrbifold, atlas: Sequence[DerivedChart],
                 field: Callable[[np.ndarray], np.ndarray], name: str = ""):
        self.orbifold = orbifold
        self.atlas = tuple(atlas)
        self.field = field
        self.name = name
        self._grid_cache: dict[tuple, np.ndarray] = {}

    def value(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.field(np.asarray(y, dtype=float)), dtype=float)

    def at(self, p: QuotientPoint) -> TangentVectorAt:
        return tangent_vector(self.orbifold, p, self.value(p.representative))

    def chart_values(self, chart: DerivedChart,
                     per_axis: int = 5) -> tuple[np.ndarray, np.ndarray]:
        key = (_snap_key(chart.center), chart.radius, per_axis)
        if key not in self._grid_cache:
            pts = chart.sample_points(per_axis=per_axis)
            vals = np.stack([self.value(p) for p in pts])
            self._grid_cache[key] = (pts, vals)
        return self._grid_cache[key]

    def equivariance_residual(self, per_axis: int = 5) -> float:
        """max |s(g y) - g s(y)| over charts, group elements, and samples."""
        grp = self.orbifold.group
        worst = 0.0
        for chart in self.atlas:
            pts, vals = self.chart_values(chart, per_axis)
            for lab in range(grp.order):
                g = grp.matrix(lab)
                moved = np.stack([self.value(g @ p) for p in pts])
                worst = max(worst, float(np.abs(moved - vals @ g.T).max()))
        return worst

    def center_fixed_residual(self) -> float:
        """Distance of each chart-center value from its fixed subspace."""
        worst = 0.0
        for chart in self.atlas:
            v = self.value(chart.center)
            for a in range(chart.isotropy.order):
                worst = max(worst, float(
                    np.abs(chart.isotropy.matrix(a) @ v - v).max()))
        return worst

    def __add__(self, other: "Orbisection") -> "Orbisection":
        return linear_combination(self, other, 1.0, 1.0)

    def __sub__(self, other: "Orbisection") -> "Orbisection":
        return linear_combination(self, other, 1.0, -1.0)

    def __rmul__(self, t: float) -> "Orbisection":
        return scale(self, float(t))

    def __repr__(self) -> str:
        return f"Orbisection({self.name or 'section'} on {self.orbifold.name})"


def zero_orbisection(orbifold: GoodOrbifold,
                     atlas: Sequence[DerivedChart]) -> Orbisection:
    dim = orbifold.model.ambient_dim
    return Orbisection(orbifold, atlas, lambda y: np.zeros(dim), name="zero")


def linear_combination(sigma: Orbisection, tau: Orbisection,
                       a: float, b: float) -> Orbisection:
    """Pointwise a*sigma + b*tau; equivariance is preserved."""
    if sigma.orbifold is not tau.orbifold:
        raise ValueError("sections live on different orbifolds")
    return Orbisection(
        sigma.orbifold, sigma.atlas,
        lambda y, f=sigma.field, g=tau.field, a=a, b=b:
            a * np.asarray(f(y), dtype=float) + b * np.asarray(g(y), dtype=float),
        name=f"{a}*{sigma.name}+{b}*{tau.name}")


def scale(sigma: Orbisection, t: float) -> Orbisection:
    return Orbisection(sigma.orbifold, sigma.atlas,
                       lambda y, f=sigma.field: t * np.asarray(f(y), dtype=float),
                       name=f"{t}*{sigma.name}")


def seminorm(sigma: Orbisection, order: int = 0, per_axis: int = 5,
             step: float = 1e-5) -> float:
    """Chartwise sup of |s| and, at order 1, FD first derivatives."""
    if order not in (0, 1):
        raise ValueError("seminorm order must be 0 or 1")
    model = sigma.orbifold.model
    worst = 0.0
    for chart in sigma.atlas:
        pts, vals = sigma.chart_values(chart, per_axis)
        worst = max(worst, float(np.abs(vals).max(initial=0.0)))
        if order >= 1:
            dpts = chart.sample_points(per_axis=3)
            jets = _lift_jet(model, sigma.field, dpts, 1, step)
            worst = max(worst, float(np.abs(jets[1]).max(initial=0.0)))
    return worst


def random_orbisection(orbifold: GoodOrbifold, atlas: Sequence[DerivedChart],
                       rng: np.random.Generator, c1_bound: float = 0.05,
                       name: str = "") -> Orbisection:
    """Seeded random orbisection with C^1 seminorm strictly below the bound.

    A random low-order polynomial field is projected to the tangent plane
    (sphere models), group-averaged, then rescaled.
    """
    dim = orbifold.model.ambient_dim
    coeff = rng.normal(size=(dim, 1 + dim + dim * dim))

    def raw(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        feats = np.concatenate([[1.0], y, np.outer(y, y).ravel()])
        return coeff @ feats

    field = project_equivariant(orbifold.group, raw, model=orbifold.model)
    section = Orbisection(orbifold, atlas, field, name=name or "random")
    size = seminorm(section, order=1)
    if size < 1e-12:
        return section
    target = c1_bound * rng.uniform(0.4, 0.9)
    return scale(section, target / size)


# -- curves ---------------------------------------------------------------------

@dataclass(frozen=True)
class CurveSegment:
    """One smooth piece of a curve, lifted to the model."""

    t0: float
    t1: float
    lift: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return np.asarray(self.lift(float(t)), dtype=float)


class CurveInOrbifold:
    """Piecewise-lifted curve with declared singular crossing times."""

    def __init__(self, orbifold: GoodOrbifold, segments: Sequence[CurveSegment]):
        self.orbifold = orbifold
        self.segments = tuple(segments)
        if not self.segments:
            raise ValueError("a curve needs at least one segment")
        for a, b in zip(self.segments, self.segments[1:]):
            if abs(a.t1 - b.t0) > 1e-12:
                raise ValueError("segments must abut")
            gap = float(np.abs(a(a.t1) - b(b.t0)).max())
            if gap > EPS_GRP:
                raise ValueError(
                    f"segment lifts disagree at t={a.t1}: gap {gap:.3e}; "
                    "normalize the right lift by a deck element first")

    @property
    def crossings(self) -> tuple[float, ...]:
        return tuple(a.t1 for a in self.segments[:-1])

    @property
    def t_range(self) -> tuple[float, float]:
        return self.segments[0].t0, self.segments[-1].t1

    def segment_at(self, t: float, side: int = 0) -> CurveSegment:
        """Segment containing t; side < 0 prefers the left one at a boundary."""
        for k, seg in enumerate(self.segments):
            if seg.t0 <= t < seg.t1 or (k == len(self.segments) - 1 and t <= seg.t1):
                if side < 0 and k > 0 and abs(t - seg.t0) < 1e-12:
                    return self.segments[k - 1]
                return seg
        raise ValueError(f"t={t} outside the curve interval")

    def point(self, t: float) -> QuotientPoint:
        return self.orbifold.point(self.segment_at(t)(t))


@dataclass(frozen=True)
class CurveLift:
    """One concatenated lift with its smoothness class at the crossing."""

    gamma_left: int               # local label in the crossing stabilizer
    gamma_right: int
    smooth_order: int             # largest j <= k with C^j agreement
    lift: Callable[[float], np.ndarray]


def _one_sided_d1(f: Callable[[float], np.ndarray], t0: float, h: float) -> np.ndarray:
    c = [-25.0, 48.0, -36.0, 16.0, -3.0]
    return sum(ci * np.asarray(f(t0 + k * h), dtype=float)
               for k, ci in enumerate(c)) / (12.0 * h)


def _one_sided_d2(f: Callable[[float], np.ndarray], t0: float, h: float) -> np.ndarray:
    c = [2.0, -5.0, 4.0, -1.0]
    return sum(ci * np.asarray(f(t0 + k * h), dtype=float)
               for k, ci in enumerate(c)) / (h * h)


def enumerate_curve_lifts(curve: CurveInOrbifold, t0: float,
                          k: int = 2) -> list[CurveLift]:
    """All concatenations g_l . left | g_r . right at a crossing time.

    Concatenations run over the crossing point's isotropy, deduplicated as
    curves, and each is classified by one-sided FD derivatives up to order
    min(k, 2) with step 1e-4 and tolerance 1e-6.
    """
    if k > MAX_CURVE_ORDER:
        raise ValueError(f"classification supports orders up to {MAX_CURVE_ORDER}")
    left = curve.segment_at(t0, side=-1)
    right = curve.segment_at(t0, side=+1)
    if left is right:
        raise ValueError(f"t={t0} is not a crossing time")
    x = left(t0)
    stab = stabilizer(curve.orbifold.group, x)
    h = CURVE_FD_STEP

    probe_ts = np.linspace(left.t0, t0, 5)[:-1]
    probe_rs = np.linspace(t0, right.t1, 5)[1:]
    seen: set[tuple] = set()
    out: list[CurveLift] = []
    for a in range(stab.order):
        ga = stab.matrix(a)
        for b in range(stab.order):
            gb = stab.matrix(b)
            sig = (tuple(_snap_key(ga @ left(t)) for t in probe_ts)
                   + tuple(_snap_key(gb @ right(t)) for t in probe_rs))
            if sig in seen:
                continue
            seen.add(sig)

            def lifted(t: float, ga=ga, gb=gb) -> np.ndarray:
                seg = left if t <= t0 else right
                g = ga if t <= t0 else gb
                return g @ seg(t)

            order = 0
            dl1 = ga @ _one_sided_d1(left, t0, -h)
            dr1 = gb @ _one_sided_d1(right, t0, h)
            if float(np.abs(dl1 - dr1).max()) < CURVE_FD_TOL:
                order = 1
                if k >= 2:
                    dl2 = ga @ _one_sided_d2(left, t0, -h)
                    dr2 = gb @ _one_sided_d2(right, t0, h)
                    if float(np.abs(dl2 - dr2).max()) < CURVE_FD_TOL:
                        order = 2
            out.append(CurveLift(a, b, order, lifted))
    return out


def curve_tangent(curve: CurveInOrbifold, t: float) -> TangentVectorAt:
    """Tangent vector class of a curve at time t.

    At regular times this is the lift derivative.  At an interior singular
    crossing a tangent is assigned only when some C^1 concatenation has a
    derivative fixed by the whole crossing isotropy; otherwise
    NotDifferentiable is raised.  At interval endpoints the one-sided
    derivative class is returned.
    """
    orbifold = curve.orbifold
    lo, hi = curve.t_range
    h = CURVE_FD_STEP
    if abs(t - lo) < 1e-12:
        seg = curve.segment_at(t)
        return tangent_vector(orbifold, curve.point(t), _one_sided_d1(seg, t, h))
    if abs(t - hi) < 1e-12:
        seg = curve.segment_at(t)
        return tangent_vector(orbifold, curve.point(t), _one_sided_d1(seg, t, -h))
    if t not in curve.crossings:
        seg = curve.segment_at(t)
        d = (seg(t + h) - seg(t - h)) / (2.0 * h)
        return tangent_vector(orbifold, curve.point(t), d)

    x = curve.segment_at(t, side=-1)(t)
    stab = stabilizer(orbifold.group, x)
    base = curve.point(t)
    fixed: list[np.ndarray] = []
    for lift in enumerate_curve_lifts(curve, t, k=1):
        if lift.smooth_order < 1:
            continue
        d = stab.matrix(lift.gamma_right) @ _one_sided_d1(
            curve.segment_at(t, side=+1), t, h)
        moved = np.abs(stab.matrices @ d - d).max()
        if float(moved) < CURVE_FD_TOL:
            fixed.append(d)
    if not fixed:
        raise NotDifferentiable(
            f"no C^1 concatenation at t={t} has an isotropy-fixed derivative; "
            "the lift derivatives form a non-trivial orbit")
    rep = fixed[0]
    for other in fixed[1:]:
        if float(np.linalg.norm(stab.matrices @ rep - other, axis=1).min()) > \
                CURVE_FD_TOL:
            raise NotDifferentiable("C^1 concatenations disagree beyond tolerance")
    return tangent_vector(orbifold, base, rep)
