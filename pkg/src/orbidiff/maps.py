"""Orbifold maps: chartwise equivariant lifts with their homomorphisms.

A map is stored as (chart, lift, homomorphism) triples over a source atlas.
Lifts evaluate on model points; homomorphisms are label tables from chart
isotropy into the target group.  Maps built from a single equivariant model
map also carry that global lift, which keeps composition exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (AtlasNotCovering, BranchAmbiguity, ChartMismatch,
                     EquivarianceViolation, ImageEscapesChart)
from .groups import (FD_STEP, FiniteActionGroup, GroupHom, _snap_key,
                     center, inner_automorphisms, stabilizer)
from .model import (FLAT, DerivedChart, GoodOrbifold, QuotientPoint,
                    build_atlas)

LIFT_TOL = 1e-9          # equivariance tolerance on validated lifts
COMPOSE_TOL = 1e-8       # equivariance tolerance after composition


@dataclass(frozen=True)
class ChartLift:
    """One chart of a map: evaluable lift plus its homomorphism."""

    chart: DerivedChart
    func: Callable[[np.ndarray], np.ndarray]
    theta: GroupHom           # chart.isotropy -> target group

    def sample_values(self, per_axis: int = 5) -> tuple[np.ndarray, np.ndarray]:
        pts = self.chart.sample_points(per_axis=per_axis)
        return pts, np.stack([np.asarray(self.func(p), dtype=float) for p in pts])


def derive_theta(chart: DerivedChart, func: Callable, target_group: FiniteActionGroup,
                 per_axis: int = 5, tol: float = LIFT_TOL) -> GroupHom:
    """Match the homomorphism table of an equivariant lift numerically.

    For every isotropy element g the target element T(g) is the unique group
    element with func(g y) == T(g) func(y) on chart samples.
    """
    pts = chart.sample_points(per_axis=per_axis)
    vals = np.stack([np.asarray(func(p), dtype=float) for p in pts])
    table = []
    for a in range(chart.isotropy.order):
        g = chart.isotropy.matrix(a)
        moved = np.stack([np.asarray(func(g @ p), dtype=float) for p in pts])
        residuals = np.abs(
            vals[None, :, :] @ np.swapaxes(target_group.matrices, 1, 2)
            - moved[None, :, :]).max(axis=(1, 2))
        best = int(np.argmin(residuals))
        if residuals[best] > tol:
            raise EquivarianceViolation(
                f"no target element matches the lift under isotropy element {a}: "
                f"best residual {residuals[best]:.3e}")
        table.append(best)
    try:
        return GroupHom(chart.isotropy, target_group, tuple(table))
    except ValueError as exc:
        raise EquivarianceViolation(str(exc)) from exc


def compatible_thetas(chart: DerivedChart, func: Callable,
                      target_group: FiniteActionGroup, per_axis: int = 5,
                      tol: float = LIFT_TOL) -> tuple[GroupHom, ...]:
    """Every homomorphism consistent with the lift (may be more than one).

    Constant lifts into fixed points admit several; none of them is preferred.
    """
    pts = chart.sample_points(per_axis=per_axis)
    vals = np.stack([np.asarray(func(p), dtype=float) for p in pts])
    options: list[list[int]] = []
    for a in range(chart.isotropy.order):
        g = chart.isotropy.matrix(a)
        moved = np.stack([np.asarray(func(g @ p), dtype=float) for p in pts])
        residuals = np.abs(
            vals[None, :, :] @ np.swapaxes(target_group.matrices, 1, 2)
            - moved[None, :, :]).max(axis=(1, 2))
        options.append([int(m) for m in np.nonzero(residuals <= tol)[0]])
    out = []
    for combo in itertools.product(*options):
        try:
            out.append(GroupHom(chart.isotropy, target_group, tuple(combo)))
        except ValueError:
            continue
    return tuple(out)


class OrbifoldMapData:
    """A map between good orbifolds with per-chart equivariant lifts."""

    def __init__(self, source: GoodOrbifold, target: GoodOrbifold,
                 lifts: Sequence[ChartLift], degree: int = 2, name: str = "",
                 global_lift: Callable | None = None,
                 global_theta: GroupHom | None = None,
                 inverse_lift: Callable | None = None,
                 validate: bool = True, per_axis: int = 4):
        self.source = source
        self.target = target
        self.lifts = tuple(lifts)
        self.degree = int(degree)
        self.name = name
        self.global_lift = global_lift
        self.global_theta = global_theta
        self.inverse_lift = inverse_lift
        if validate:
            report = check_equivariance(self, per_axis=per_axis)
            if report.max_residual > LIFT_TOL:
                raise EquivarianceViolation(
                    f"map {name or '<anon>'} violates equivariance: "
                    f"residual {report.max_residual:.3e} > {LIFT_TOL:.1e}")

    @property
    def atlas(self) -> tuple[DerivedChart, ...]:
        return tuple(entry.chart for entry in self.lifts)

    def lift_at(self, chart: DerivedChart) -> ChartLift:
        for entry in self.lifts:
            if entry.chart is chart or (
                    _snap_key(entry.chart.center) == _snap_key(chart.center)
                    and abs(entry.chart.radius - chart.radius) < 1e-12):
                return entry
        raise ChartMismatch("map has no lift on the requested chart")

    def underlying(self, q: QuotientPoint) -> QuotientPoint:
        """Induced map of underlying spaces, evaluated through any chart."""
        try:
            if self.global_lift is not None:
                return self.target.point(self.global_lift(q.representative))
            grp = self.source.group
            for entry in self.lifts:
                for lab in range(grp.order):
                    rep = grp.act(lab, q.canonical)
                    if entry.chart.contains(rep, slack=0.0):
                        return self.target.point(np.asarray(entry.func(rep)))
        except ValueError as exc:
            raise ImageEscapesChart(str(exc)) from exc
        raise ChartMismatch(f"no chart of the atlas covers {q}")

    def __repr__(self) -> str:
        return (f"OrbifoldMapData({self.name or 'map'}: {self.source.name} -> "
                f"{self.target.name}, charts={len(self.lifts)})")


@dataclass(frozen=True)
class EquivarianceReport:
    """Worst-case equivariance and chart-consistency residuals."""

    per_chart: tuple[float, ...]
    commutation: float
    per_axis: int

    @property
    def max_residual(self) -> float:
        worst = max(self.per_chart) if self.per_chart else 0.0
        return max(worst, self.commutation)


def check_equivariance(f: OrbifoldMapData, per_axis: int = 5) -> EquivarianceReport:
    """Residuals of the defining relations of an orbifold map.

    Per chart: max |lift(g y) - theta(g) lift(y)| over isotropy elements and
    samples.  Across charts: the projections of overlapping lifts must give
    the same quotient point (commutation with the quotient maps).
    """
    per_chart = []
    for entry in f.lifts:
        pts = entry.chart.sample_points(per_axis=per_axis)
        vals = np.stack([np.asarray(entry.func(p), dtype=float) for p in pts])
        worst = 0.0
        for a in range(entry.chart.isotropy.order):
            g = entry.chart.isotropy.matrix(a)
            tg = entry.theta.matrix(a)
            moved = np.stack([np.asarray(entry.func(g @ p), dtype=float)
                              for p in pts])
            worst = max(worst, float(np.abs(moved - vals @ tg.T).max()))
        per_chart.append(worst)

    commutation = 0.0
    grp = f.source.group
    for i, ei in enumerate(f.lifts):
        for j in range(i + 1, len(f.lifts)):
            ej = f.lifts[j]
            for lab in range(grp.order):
                moved_center = grp.act(lab, ei.chart.center)
                if f.source.model.distance(moved_center, ej.chart.center) >= \
                        ei.chart.radius + ej.chart.radius:
                    continue
                pts = ei.chart.sample_points(per_axis=per_axis)
                moved = grp.act(lab, pts)
                inside = [k for k, p in enumerate(moved)
                          if ej.chart.contains(p, slack=0.0)]
                for k in inside[:8]:
                    try:
                        qa = f.target.point(np.asarray(ei.func(pts[k])))
                        qb = f.target.point(np.asarray(ej.func(moved[k])))
                    except ValueError as exc:
                        raise ImageEscapesChart(str(exc)) from exc
                    commutation = max(commutation,
                                      f.target.quotient_distance(qa, qb))
    return EquivarianceReport(tuple(per_chart), commutation, per_axis)


# -- constructors ---------------------------------------------------------------

def map_from_global(source: GoodOrbifold, target: GoodOrbifold, func: Callable,
                    atlas: Sequence[DerivedChart] | None = None, degree: int = 2,
                    name: str = "", inverse: Callable | None = None,
                    validate: bool = True) -> OrbifoldMapData:
    """Map induced by one globally equivariant model map."""
    charts = tuple(atlas) if atlas is not None else build_atlas(source)
    lifts = [ChartLift(ch, func, derive_theta(ch, func, target.group))
             for ch in charts]
    return OrbifoldMapData(source, target, lifts, degree=degree, name=name,
                           global_lift=func, inverse_lift=inverse,
                           validate=validate)


def identity_map(orbifold: GoodOrbifold,
                 atlas: Sequence[DerivedChart] | None = None,
                 assignments: Sequence[int] | None = None,
                 name: str = "identity") -> OrbifoldMapData:
    """A lift of the identity: on chart i the map y -> g_i y, g_i in Gamma_i.

    ``assignments`` are local isotropy labels per chart (default all 0);
    theta on chart i is conjugation by g_i.
    """
    charts = tuple(atlas) if atlas is not None else build_atlas(orbifold)
    if assignments is None:
        assignments = [0] * len(charts)
    grp = orbifold.group
    lifts = []
    for ch, loc in zip(charts, assignments):
        glob = ch.isotropy.parent_labels[loc]
        mat = grp.matrix(glob)
        table = tuple(grp.conjugate(glob, ch.isotropy.parent_labels[a])
                      for a in range(ch.isotropy.order))
        theta = GroupHom(ch.isotropy, grp, table)
        lifts.append(ChartLift(ch, _linear_map(mat), theta))
    trivial = all(loc == 0 for loc in assignments)
    return OrbifoldMapData(
        orbifold, orbifold, lifts, degree=99, name=name,
        global_lift=(lambda y: np.asarray(y, dtype=float).copy()) if trivial else None,
        inverse_lift=(lambda y: np.asarray(y, dtype=float).copy()) if trivial else None)


def _linear_map(mat: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    m = np.array(mat, dtype=float)
    return lambda y: m @ np.asarray(y, dtype=float)


def constant_map(source: GoodOrbifold, target: GoodOrbifold,
                 value: np.ndarray, atlas: Sequence[DerivedChart] | None = None,
                 name: str = "constant") -> OrbifoldMapData:
    """Constant map; theta is the trivial homomorphism on every chart."""
    charts = tuple(atlas) if atlas is not None else build_atlas(source)
    val = np.asarray(value, dtype=float)
    lifts = []
    for ch in charts:
        theta = GroupHom(ch.isotropy, target.group, (0,) * ch.isotropy.order)
        lifts.append(ChartLift(ch, lambda y, v=val: v.copy(), theta))
    return OrbifoldMapData(source, target, lifts, degree=99, name=name,
                           global_lift=lambda y: val.copy())


# -- composition -----------------------------------------------------------------

def compose(f: OrbifoldMapData, g: OrbifoldMapData,
            name: str = "") -> OrbifoldMapData:
    """The composite (g after f); the target of f must be the source of g.

    Lifts compose chartwise.  When g has no global lift, a single g-chart and
    deck transport must accommodate each f-chart image, else ChartMismatch.
    """
    if f.target is not g.source and f.target.name != g.source.name:
        raise ChartMismatch("target of f must be the source of g")
    lifts = []
    for entry in f.lifts:
        if g.global_lift is not None:
            gfunc = g.global_lift
            func = (lambda y, ff=entry.func, gg=gfunc:
                    np.asarray(gg(np.asarray(ff(y), dtype=float)), dtype=float))
        else:
            func = _compose_through_chart(entry, g)
        theta = derive_theta(entry.chart, func, g.target.group,
                             tol=COMPOSE_TOL)
        lifts.append(ChartLift(entry.chart, func, theta))
    composite_global = None
    if f.global_lift is not None and g.global_lift is not None:
        composite_global = (lambda y, ff=f.global_lift, gg=g.global_lift:
                            np.asarray(gg(np.asarray(ff(y), dtype=float))))
    inverse = None
    if f.inverse_lift is not None and g.inverse_lift is not None:
        inverse = (lambda y, fi=f.inverse_lift, gi=g.inverse_lift:
                   np.asarray(fi(np.asarray(gi(y), dtype=float))))
    out = OrbifoldMapData(f.source, g.target, lifts,
                          degree=min(f.degree, g.degree),
                          name=name or f"{g.name}*{f.name}",
                          global_lift=composite_global, inverse_lift=inverse,
                          validate=False)
    report = check_equivariance(out, per_axis=4)
    if report.max_residual > COMPOSE_TOL:
        raise EquivarianceViolation(
            f"composite violates equivariance: {report.max_residual:.3e}")
    return out


def _compose_through_chart(entry: ChartLift, g: OrbifoldMapData) -> Callable:
    mid = g.source
    pts = entry.chart.sample_points(per_axis=4)
    images = np.stack([np.asarray(entry.func(p), dtype=float) for p in pts])
    for gentry in g.lifts:
        for lab in range(mid.group.order):
            moved = mid.group.act(lab, images)
            dists = mid.model.distances(moved, gentry.chart.center)
            if float(dists.max()) <= gentry.chart.radius:
                eta = mid.group.matrix(lab)
                return (lambda y, ff=entry.func, gg=gentry.func, m=eta:
                        np.asarray(gg(m @ np.asarray(ff(y), dtype=float))))
    raise ChartMismatch(
        "no chart of g contains the image of an f-chart under any deck "
        "transport; refine the atlases")


def inverse_map(f: OrbifoldMapData, atlas: Sequence[DerivedChart] | None = None,
                name: str = "") -> OrbifoldMapData:
    """Inverse of a map carrying a global inverse lift."""
    if f.inverse_lift is None:
        raise ChartMismatch("map carries no inverse lift")
    return map_from_global(f.target, f.source, f.inverse_lift,
                           atlas=atlas, degree=f.degree,
                           name=name or f"{f.name}^-1", inverse=f.global_lift)


# -- lift extension ---------------------------------------------------------------

def extend_lift(underlying: Callable[[QuotientPoint], QuotientPoint],
                small: DerivedChart, small_lift: Callable,
                big: DerivedChart, target: GoodOrbifold,
                steps: int = 64, branch_tol: float = 1e-6) -> ChartLift:
    """Equivariant continuation of a lift from a sub-chart to a concentric chart.

    Walk outward along radial geodesics; at every step take the orbit
    representative of the underlying image nearest to the previous value.
    The branch is forced by continuity; BranchAmbiguity signals that two
    candidates came within branch_tol and the step size must shrink.
    """
    model = small.orbifold.model
    if _snap_key(small.center) != _snap_key(big.center):
        raise ChartMismatch("extension requires concentric charts")
    if small.radius >= big.radius:
        raise ChartMismatch("the source chart must be the smaller one")
    tgt_grp = target.group
    cache: dict[tuple, np.ndarray] = {}

    def candidates(point: np.ndarray) -> np.ndarray:
        q = underlying(small.orbifold.point(point))
        if not target.model.contains(q.representative):
            raise ImageEscapesChart("underlying image leaves the target model")
        return tgt_grp.matrices @ q.canonical

    def continue_to(point: np.ndarray) -> np.ndarray:
        key = _snap_key(point)
        if key in cache:
            return cache[key]
        dist = model.distance(big.center, point)
        start_r = min(small.radius * 0.9, dist)
        if dist < 1e-12:
            val = np.asarray(small_lift(point), dtype=float)
            cache[key] = val
            return val
        if model.kind == FLAT:
            direction = (point - big.center) / dist
            path = [big.center + r * direction
                    for r in np.linspace(start_r, dist, steps)]
        else:
            v = model.geo_log(big.center, point)
            v = v / np.linalg.norm(v)
            path = [model.geo_exp(big.center, r * v)
                    for r in np.linspace(start_r, dist, steps)]
        prev = np.asarray(small_lift(path[0]), dtype=float)
        for p in path[1:]:
            cand = candidates(p)
            dists = np.linalg.norm(cand - prev, axis=1)
            order = np.argsort(dists)
            best = cand[order[0]]
            for k in order[1:]:
                if np.linalg.norm(cand[k] - best) < 1e-9:
                    continue  # same branch, different deck element
                if dists[k] < dists[order[0]] + branch_tol:
                    raise BranchAmbiguity(
                        f"two continuation branches within {branch_tol:.1e} "
                        f"at radius {model.distance(big.center, p):.4f}")
                break
            prev = best
        cache[key] = prev
        return prev

    def extension(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if model.distance(big.center, y) <= small.radius * 0.9:
            return np.asarray(small_lift(y), dtype=float)
        return continue_to(y)

    for p in small.sample_points(per_axis=4):
        if float(np.abs(extension(p) - np.asarray(small_lift(p))).max()) > LIFT_TOL:
            raise EquivarianceViolation(
                "extension does not restrict to the given lift")
    theta = derive_theta(big, extension, tgt_grp, per_axis=4, tol=COMPOSE_TOL)
    return ChartLift(big, extension, theta)


# -- sampled C^s distances ---------------------------------------------------------

@dataclass(frozen=True)
class MapDistanceReport:
    """Sampled distance between two maps up to derivative order s."""

    s: int
    value: float
    per_chart: tuple[float, ...]
    per_axis: int
    step: float


def _lift_jet(model, func, pts: np.ndarray, s: int,
              step: float) -> list[np.ndarray]:
    """Values and directional FD derivatives up to order s along a frame."""
    vals = np.stack([np.asarray(func(p), dtype=float) for p in pts])
    jets = [vals]
    if s == 0:
        return jets

    def shift(p, i, t):
        if model.kind == FLAT:
            e = np.zeros(model.dimension)
            e[i] = t
            return p + e
        frame = model.tangent_basis(p)
        return model.geo_exp(p, t * frame[i])

    dim = model.dimension
    first = np.stack([
        np.stack([(np.asarray(func(shift(p, i, step)), dtype=float)
                   - np.asarray(func(shift(p, i, -step)), dtype=float))
                  / (2 * step) for i in range(dim)])
        for p in pts])
    jets.append(first)
    if s >= 2:
        second = []
        for p in pts:
            f0 = np.asarray(func(p), dtype=float)
            rows = []
            for i in range(dim):
                for j in range(i, dim):
                    if i == j:
                        fp = np.asarray(func(shift(p, i, step)), dtype=float)
                        fm = np.asarray(func(shift(p, i, -step)), dtype=float)
                        rows.append((fp - 2 * f0 + fm) / step ** 2)
                    else:
                        fpp = np.asarray(func(shift(shift(p, i, step), j, step)))
                        fpm = np.asarray(func(shift(shift(p, i, step), j, -step)))
                        fmp = np.asarray(func(shift(shift(p, i, -step), j, step)))
                        fmm = np.asarray(func(shift(shift(p, i, -step), j, -step)))
                        rows.append((fpp - fpm - fmp + fmm) / (4 * step ** 2))
            second.append(np.stack(rows))
        jets.append(np.stack(second))
    return jets


def cs_distance(f: OrbifoldMapData, g: OrbifoldMapData, s: int = 0,
                per_axis: int = 5, step: float = FD_STEP) -> MapDistanceReport:
    """Chartwise lift distance up to order s in {0, 1, 2}.

    Per chart: minimum over target group elements of the sup over the chart
    grid of lift and FD-derivative differences; the report takes the max over
    charts.  Orders above 2 are rejected: finite differences there cannot
    support the library's tolerances in double precision.
    """
    if s not in (0, 1, 2):
        raise ValueError("s must be 0, 1, or 2")
    if s > min(f.degree, g.degree):
        raise ValueError(f"s={s} exceeds the claimed differentiability order")
    if f.source is not g.source or f.target is not g.target:
        raise ChartMismatch("maps must share source and target")
    tgt = f.target.group

    def one_sided(a: OrbifoldMapData, b: OrbifoldMapData) -> list[float]:
        out = []
        for ea in a.lifts:
            eb = b.lift_at(ea.chart)
            pts = ea.chart.sample_points(per_axis=per_axis)
            # derivatives are sampled on a coarser subgrid to bound cost
            dpts = ea.chart.sample_points(per_axis=3)
            ja = _lift_jet(a.source.model, ea.func, pts, 0, step)
            jb = _lift_jet(b.source.model, eb.func, pts, 0, step)
            if s:
                ja += _lift_jet(a.source.model, ea.func, dpts, s, step)[1:]
                jb += _lift_jet(b.source.model, eb.func, dpts, s, step)[1:]
            best = np.inf
            for lab in range(tgt.order):
                m = tgt.matrix(lab)
                worst = 0.0
                for ka, kb in zip(ja, jb):
                    # Euclidean norm over vector components, sup over the rest
                    gaps = np.linalg.norm(ka - kb @ m.T, axis=-1)
                    worst = max(worst, float(gaps.max()))
                best = min(best, worst)
            out.append(best)
        return out

    fw = one_sided(f, g)
    bw = one_sided(g, f)
    per_chart = tuple(max(x, y) for x, y in zip(fw, bw))
    value = max(per_chart) if per_chart else 0.0
    return MapDistanceReport(s, value, per_chart, per_axis, step)


# -- lifts of the identity ----------------------------------------------------------

@dataclass(frozen=True)
class OverlapEdge:
    """Charts i and j overlap through deck element eta (a global label)."""

    i: int
    j: int
    eta: int
    singular_points: tuple[np.ndarray, ...]   # overlap points with isotropy


def overlap_graph(orbifold: GoodOrbifold,
                  atlas: Sequence[DerivedChart]) -> tuple[OverlapEdge, ...]:
    """All chart overlaps with their realizing deck elements.

    Each edge carries the singular points of the overlap region; those are
    where identity-lift germs are actually constrained.
    """
    grp = orbifold.group
    model = orbifold.model
    singular = orbifold.singular_points(48)
    edges = []
    for i, ci in enumerate(atlas):
        for j, cj in enumerate(atlas):
            if j <= i:
                continue
            for lab in range(grp.order):
                if model.distance(grp.act(lab, ci.center), cj.center) >= \
                        ci.radius + cj.radius:
                    continue
                sing = []
                for s in singular:
                    for mu in range(grp.order):
                        w = grp.act(mu, np.asarray(s))
                        if ci.contains(w, slack=0.0) and \
                                cj.contains(grp.act(lab, w), slack=0.0):
                            sing.append(w)
                edges.append(OverlapEdge(i, j, lab, tuple(sing)))
    return tuple(edges)


@dataclass(frozen=True)
class IdentityLiftGroup:
    """All lifts of the identity over a fixed atlas, as a finite group.

    Elements are assignment tuples of local isotropy labels, one per chart;
    composition and inverse act chartwise through the isotropy Cayley tables.
    """

    orbifold: GoodOrbifold
    atlas: tuple[DerivedChart, ...]
    assignments: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.assignments)

    def compose(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(ch.isotropy.multiply(x, y)
                     for ch, x, y in zip(self.atlas, a, b))

    def inverse(self, a: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(ch.isotropy.inverse(x) for ch, x in zip(self.atlas, a))

    def contains(self, a: tuple[int, ...]) -> bool:
        return tuple(a) in set(self.assignments)

    def element_order(self, a: tuple[int, ...]) -> int:
        k, acc = 1, a
        identity = tuple(0 for _ in self.atlas)
        while acc != identity:
            acc = self.compose(acc, a)
            k += 1
        return k

    @property
    def exponent(self) -> int:
        out = 1
        for a in self.assignments:
            out = int(np.lcm(out, self.element_order(a)))
        return out

    @property
    def is_abelian(self) -> bool:
        return all(self.compose(a, b) == self.compose(b, a)
                   for a in self.assignments for b in self.assignments)

    def is_group(self) -> bool:
        elems = set(self.assignments)
        return all(self.compose(a, b) in elems
                   for a in self.assignments for b in self.assignments) and \
            all(self.inverse(a) in elems for a in self.assignments)

    def to_map(self, assignment: tuple[int, ...]) -> OrbifoldMapData:
        return identity_map(self.orbifold, self.atlas, assignment,
                            name=f"id_lift{assignment}")

    def assignment_from_map(self, f: OrbifoldMapData,
                            tol: float = 1e-8) -> tuple[int, ...] | None:
        """Recover the assignment tuple of a map that covers the identity."""
        out = []
        for ch in self.atlas:
            entry = f.lift_at(ch)
            pts = ch.sample_points(per_axis=4)
            vals = np.stack([np.asarray(entry.func(p), dtype=float) for p in pts])
            found = None
            for loc in range(ch.isotropy.order):
                m = ch.isotropy.matrix(loc)
                if float(np.abs(vals - pts @ m.T).max()) <= tol:
                    found = loc
                    break
            if found is None:
                return None
            out.append(found)
        return tuple(out)


def enumerate_identity_lifts(orbifold: GoodOrbifold,
                             atlas: Sequence[DerivedChart] | None = None,
                             edges: Sequence[OverlapEdge] | None = None,
                             coverage_resolution: int = 16) -> IdentityLiftGroup:
    """Enumerate identity lifts as overlap-consistent isotropy assignments.

    Consistency on an overlap (i, j, eta): at every singular point of the
    overlap region the transported assignments must be conjugate within that
    point's stabilizer.  Regular overlap points impose nothing (their germ
    data is absorbed by chart injections), which is what makes the two
    singular charts of a football independent.
    """
    charts = tuple(atlas) if atlas is not None else build_atlas(orbifold)
    _require_covering(orbifold, charts, coverage_resolution)
    if edges is None:
        edges = overlap_graph(orbifold, charts)
    grp = orbifold.group

    allowed_sets: dict[tuple[int, int], set[tuple[int, int]]] = {}
    for edge in edges:
        ci, cj = charts[edge.i], charts[edge.j]
        pairs: set[tuple[int, int]] | None = None
        for w in edge.singular_points:
            stab = stabilizer(grp, w)
            if stab.order <= 1:
                continue
            slabs = stab.parent_labels
            allowed = set()
            for a in range(ci.isotropy.order):
                ga = ci.isotropy.parent_labels[a]
                t = grp.multiply(grp.multiply(edge.eta, ga),
                                 grp.inverse(edge.eta))
                for b in range(cj.isotropy.order):
                    gb = cj.isotropy.parent_labels[b]
                    if any(grp.conjugate(s, gb) == t for s in slabs):
                        allowed.add((a, b))
            pairs = allowed if pairs is None else pairs & allowed
        if pairs is not None:
            key = (edge.i, edge.j)
            allowed_sets[key] = allowed_sets.get(
                key, {(a, b) for a in range(ci.isotropy.order)
                      for b in range(cj.isotropy.order)}) & pairs
    sizes = [ch.isotropy.order for ch in charts]
    assignments = []
    for combo in itertools.product(*[range(k) for k in sizes]):
        ok = True
        for (i, j), pairs in allowed_sets.items():
            if (combo[i], combo[j]) not in pairs:
                ok = False
                break
        if ok:
            assignments.append(tuple(combo))
    group = IdentityLiftGroup(orbifold, charts, tuple(assignments))
    if not group.is_group():
        raise EquivarianceViolation(
            "consistent assignments failed to close under composition")
    return group


def _require_covering(orbifold: GoodOrbifold, charts: Sequence[DerivedChart],
                      resolution: int):
    model = orbifold.model
    grid = model.grid(resolution)
    if model.kind == FLAT:
        grid = grid[np.linalg.norm(grid, axis=1) <= model.radius * 0.75 + 1e-12]
    for s in grid:
        pts = orbifold.group.matrices @ s
        if not any(float(model.distances(pts, ch.center).min())
                   <= ch.radius * (1.0 + 1e-9) for ch in charts):
            raise AtlasNotCovering(
                f"atlas leaves {np.round(s, 4)} uncovered at resolution "
                f"{resolution}")


def count_theta_choices(group: FiniteActionGroup) -> int:
    """Number of distinct identity-map homomorphism choices, |G|/|Z(G)|."""
    autos = inner_automorphisms(group)
    assert len(autos) * center(group).order == group.order
    return len(autos)


# -- equivariant polynomial approximation -------------------------------------------

@dataclass(frozen=True)
class VectorPolynomial:
    """Vector-valued polynomial: sum_a coeffs[a] * prod_i z_i^exps[a][i]."""

    exps: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray                  # (terms, out_dim)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return len(self.exps[0])

    def __call__(self, z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        mono = np.stack([np.prod(z ** np.asarray(e), axis=1)
                         for e in self.exps], axis=1)
        out = mono @ self.coeffs
        return out[0] if out.shape[0] == 1 else out

    def compose_linear(self, a: np.ndarray) -> "VectorPolynomial":
        """Coefficients of p(A z), exactly, on the same monomial basis."""
        index = {e: k for k, e in enumerate(self.exps)}
        n = self.dim
        new = np.zeros_like(self.coeffs)
        rows = [tuple(int(v) for v in np.eye(n, dtype=int)[i]) for i in range(n)]
        for k, e in enumerate(self.exps):
            # expand prod_i (sum_j a_ij z_j)^(e_i) by repeated convolution
            acc = {tuple([0] * n): 1.0}
            for i, power in enumerate(e):
                lin = {rows[j]: a[i, j] for j in range(n) if a[i, j] != 0.0}
                for _ in range(power):
                    nxt: dict[tuple[int, ...], float] = {}
                    for e1, c1 in acc.items():
                        for e2, c2 in lin.items():
                            key = tuple(x + y for x, y in zip(e1, e2))
                            nxt[key] = nxt.get(key, 0.0) + c1 * c2
                    acc = nxt
            for mono, w in acc.items():
                new[index[mono]] += w * self.coeffs[k]
        return VectorPolynomial(self.exps, new)

    def transform_values(self, m: np.ndarray) -> "VectorPolynomial":
        return VectorPolynomial(self.exps, self.coeffs @ np.asarray(m).T)

    def add(self, other: "VectorPolynomial") -> "VectorPolynomial":
        return VectorPolynomial(self.exps, self.coeffs + other.coeffs)

    def scale(self, t: float) -> "VectorPolynomial":
        return VectorPolynomial(self.exps, self.coeffs * t)


def monomial_exponents(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    out = [e for e in itertools.product(range(degree + 1), repeat=dim)
           if sum(e) <= degree]
    out.sort(key=lambda e: (sum(e), e))
    return tuple(out)


def average_polynomial(poly: VectorPolynomial,
                       pairs: Sequence[tuple[np.ndarray, np.ndarray]]
                       ) -> VectorPolynomial:
    """Group average (1/|G|) sum_g theta(g) . p(g^-1 z) on coefficients.

    ``pairs`` holds (g_matrix, theta_matrix) per element.  The output
    satisfies theta(g) p(z) = p(g z) exactly at the coefficient level.
    """
    acc = None
    for gmat, tmat in pairs:
        ginv = np.asarray(gmat, dtype=float).T  # orthogonal inverse
        term = poly.compose_linear(ginv).transform_values(tmat)
        acc = term if acc is None else acc.add(term)
    return acc.scale(1.0 / len(pairs))


@dataclass(frozen=True)
class PolynomialLiftResult:
    polynomial: VectorPolynomial
    degree: int
    sup_error: float
    equivariance_residual: float


def equivariant_polynomial_approx(entry: ChartLift, degree: int,
                                  per_axis: int = 9) -> PolynomialLiftResult:
    """Equivariant polynomial approximation of a chart lift.

    Least-squares fit on the chart grid in centered coordinates, then the
    group-averaging step; the result obeys the same equivariance relation as
    the input, and the fit error is non-increasing in the degree.
    """
    chart = entry.chart
    if chart.orbifold.model.kind != FLAT:
        raise ChartMismatch("polynomial lifts are fit on flat charts")
    pts = chart.sample_points(per_axis=per_axis)
    local = pts - chart.center
    vals = np.stack([np.asarray(entry.func(p), dtype=float) for p in pts])
    exps = monomial_exponents(chart.orbifold.dimension, degree)
    vander = np.stack([np.prod(local ** np.asarray(e), axis=1) for e in exps],
                      axis=1)
    coeffs, *_ = np.linalg.lstsq(vander, vals, rcond=None)
    fit = VectorPolynomial(exps, coeffs)
    pairs = [(chart.isotropy.matrix(a), entry.theta.matrix(a))
             for a in range(chart.isotropy.order)]
    averaged = average_polynomial(fit, pairs)

    approx_vals = averaged(local)
    sup_err = float(np.abs(approx_vals - vals).max())
    res = 0.0
    for gmat, tmat in pairs:
        lhs = averaged(local @ gmat.T)
        rhs = averaged(local) @ tmat.T
        res = max(res, float(np.abs(lhs - rhs).max()))
    return PolynomialLiftResult(averaged, degree, sup_err, res)
