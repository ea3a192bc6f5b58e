"""Equivariant Riemannian structure and the diffeomorphism-group chart map.

The exponential map is closed form on flat and round models and a geodesic
integrator on metric charts.  Composing it with orbisections gives the chart
map into the diffeomorphism group; inverting it recovers the section.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (ChartMismatch, CoverGap, NotCloseToIdentity, NotSPD,
                     OutOfDomain, ThetaNotIdentity)
from .groups import EPS_GRP, GroupHom, stabilizer
from .maps import (ChartLift, IdentityLiftGroup, OrbifoldMapData,
                   cs_distance, derive_theta, identity_map)
from .model import (FLAT, SPHERE, DerivedChart, GoodOrbifold, QuotientPoint,
                    signature_at)
from .tangent import Orbisection, TangentVectorAt, seminorm, tangent_vector

POU_SUM_TOL = 1e-9
METRIC_INV_TOL = 1e-10


# -- partitions of unity ---------------------------------------------------------

def _bump(u: np.ndarray) -> np.ndarray:
    """Cubic cutoff in the radius-squared variable; C^2 across the edge."""
    return np.where(u < 1.0, (1.0 - np.minimum(u, 1.0)) ** 3, 0.0)


@dataclass(frozen=True)
class PartitionOfUnity:
    """Normalized equivariant chart weights summing to one."""

    orbifold: GoodOrbifold
    atlas: tuple[DerivedChart, ...]
    weights: tuple[Callable[[np.ndarray], float], ...]

    def total(self, y: np.ndarray) -> float:
        return float(sum(w(y) for w in self.weights))

    def verify(self, grid: np.ndarray) -> tuple[float, float]:
        """(sum residual, equivariance residual) over the grid."""
        sum_res = 0.0
        equi_res = 0.0
        grp = self.orbifold.group
        for y in grid:
            sum_res = max(sum_res, abs(self.total(y) - 1.0))
            for lab in range(1, grp.order):
                gy = grp.act(lab, y)
                for w in self.weights:
                    equi_res = max(equi_res, abs(w(gy) - w(y)))
        return sum_res, equi_res


def equivariant_partition_of_unity(orbifold: GoodOrbifold,
                                   atlas: Sequence[DerivedChart],
                                   grid_resolution: int = 24
                                   ) -> PartitionOfUnity:
    """Radial bumps, group averaged and normalized.

    Radial profiles are exactly isotropy invariant; averaging over the whole
    deck group makes every weight a function on the quotient.  Raises
    CoverGap when the un-normalized total vanishes on the verification grid.
    """
    model = orbifold.model
    grp = orbifold.group
    charts = tuple(atlas)

    def raw_weight(chart: DerivedChart) -> Callable[[np.ndarray], float]:
        center, radius = chart.center, chart.radius

        def w(y: np.ndarray) -> float:
            pts = grp.matrices @ np.asarray(y, dtype=float)
            u = (model.distances(pts, center) / radius) ** 2
            return float(_bump(u).sum() / grp.order)

        return w

    raws = [raw_weight(ch) for ch in charts]

    grid = model.grid(grid_resolution)
    if model.kind == FLAT:
        grid = grid[np.linalg.norm(grid, axis=1) <= model.radius * 0.75 + 1e-12]
    for y in grid:
        if sum(r(y) for r in raws) < 1e-12:
            raise CoverGap(f"partition weights vanish near {np.round(y, 4)}")

    def normalized(k: int) -> Callable[[np.ndarray], float]:
        def w(y: np.ndarray) -> float:
            vals = [r(y) for r in raws]
            total = sum(vals)
            return vals[k] / total if total > 0.0 else 0.0
        return w

    return PartitionOfUnity(orbifold, charts, tuple(normalized(k)
                                                    for k in range(len(charts))))


# -- metric fields ----------------------------------------------------------------

@dataclass(frozen=True)
class MetricField:
    """Per-chart symmetric positive-definite matrix fields."""

    charts: tuple[DerivedChart, ...]
    entries: tuple[Callable[[np.ndarray], np.ndarray], ...]

    def entry(self, chart: DerivedChart) -> Callable:
        for ch, e in zip(self.charts, self.entries):
            if ch is chart:
                return e
        raise ChartMismatch("metric has no entry for the requested chart")


def _check_spd(mat: np.ndarray, where: str):
    if float(np.abs(mat - mat.T).max()) > 1e-12:
        raise NotSPD(f"metric is not symmetric at {where}")
    if float(np.linalg.eigvalsh(mat).min()) <= 0.0:
        raise NotSPD(f"metric is not positive definite at {where}")


def average_metric(chart: DerivedChart, raw: Callable[[np.ndarray], np.ndarray],
                   printed_double_sum: bool = False,
                   per_axis: int = 4) -> Callable[[np.ndarray], np.ndarray]:
    """Isotropy average of a raw metric over a chart.

    The default diagonal average (1/|G|) sum_g g^T raw(g y) g is invariant and
    keeps positive definiteness (min eigenvalue at least 1/|G| of the input
    minimum).  ``printed_double_sum`` instead averages the two slots
    independently, which factors through the fixed-subspace projector and is
    degenerate off that subspace; it is provided only for demonstration.
    """
    group = chart.isotropy
    for p in chart.sample_points(per_axis=per_axis):
        _check_spd(np.asarray(raw(p), dtype=float), f"{np.round(p, 4)}")

    if printed_double_sum:
        proj = group.matrices.mean(axis=0)

        def degenerate(y: np.ndarray) -> np.ndarray:
            return proj.T @ np.asarray(raw(y), dtype=float) @ proj

        return degenerate

    def averaged(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        acc = None
        for lab in range(group.order):
            g = group.matrix(lab)
            term = g.T @ np.asarray(raw(g @ y), dtype=float) @ g
            acc = term if acc is None else acc + term
        return acc / group.order

    return averaged


def metric_invariance_residual(chart: DerivedChart, entry: Callable,
                               per_axis: int = 4) -> float:
    """max |g^T entry(g y) g - entry(y)| over the chart grid and isotropy."""
    worst = 0.0
    for p in chart.sample_points(per_axis=per_axis):
        base = np.asarray(entry(p), dtype=float)
        for a in range(chart.isotropy.order):
            g = chart.isotropy.matrix(a)
            moved = g.T @ np.asarray(entry(g @ p), dtype=float) @ g
            worst = max(worst, float(np.abs(moved - base).max()))
    return worst


# -- exponential maps --------------------------------------------------------------

def _christoffel(metric: Callable, y: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Gamma^k_ij by central differences of the metric."""
    y = np.asarray(y, dtype=float)
    n = y.size
    g0 = np.asarray(metric(y), dtype=float)
    ginv = np.linalg.inv(g0)
    dg = np.empty((n, n, n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = step
        dg[l] = (np.asarray(metric(y + e)) - np.asarray(metric(y - e))) / (2 * step)
    gamma = np.empty((n, n, n))
    for k in range(n):
        for i in range(n):
            for j in range(n):
                s = 0.0
                for l in range(n):
                    s += ginv[k, l] * (dg[i][j, l] + dg[j][i, l] - dg[l][i, j])
                gamma[k, i, j] = 0.5 * s
    return gamma


@dataclass(frozen=True)
class ExpMap:
    """Riemannian exponential on the model, in one of three modes."""

    orbifold: GoodOrbifold
    mode: str                                    # closed-form-flat|closed-form-sphere|ode
    metric: Callable[[np.ndarray], np.ndarray] | None = None
    chart: DerivedChart | None = None
    step_fraction: float = 1.0 / 256.0

    @staticmethod
    def closed_form(orbifold: GoodOrbifold) -> "ExpMap":
        mode = "closed-form-flat" if orbifold.model.kind == FLAT \
            else "closed-form-sphere"
        return ExpMap(orbifold, mode)

    @staticmethod
    def ode(orbifold: GoodOrbifold, chart: DerivedChart,
            metric: Callable[[np.ndarray], np.ndarray]) -> "ExpMap":
        if orbifold.model.kind != FLAT:
            raise ChartMismatch("ode mode integrates on flat charts")
        return ExpMap(orbifold, "ode", metric, chart)

    @property
    def domain_bound(self) -> float:
        if self.mode == "closed-form-sphere":
            return np.pi
        if self.mode == "ode":
            return self.chart.radius
        return np.inf

    def lift_exp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        speed = float(np.linalg.norm(v))
        if speed == 0.0:
            return x.copy()
        if self.mode == "closed-form-flat":
            return x + v
        if self.mode == "closed-form-sphere":
            if speed >= np.pi:
                raise OutOfDomain(f"|v| = {speed:.4f} is at or past the cut locus")
            v = v - np.dot(v, x) * x
            return self.orbifold.model.geo_exp(x, v)
        h = self.chart.radius * self.step_fraction
        steps = max(int(np.ceil(speed / h)), 1)
        dt = 1.0 / steps
        pos, vel = x.copy(), v.copy()

        def acc(state):
            p, u = state
            gamma = _christoffel(self.metric, p)
            return np.array([u, -np.einsum("kij,i,j->k", gamma, u, u)])

        state = np.array([pos, vel])
        for _ in range(steps):
            k1 = acc(state)
            k2 = acc(state + 0.5 * dt * k1)
            k3 = acc(state + 0.5 * dt * k2)
            k4 = acc(state + dt * k3)
            state = state + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        out = state[0]
        if not self.chart.contains(out, slack=0.2):
            raise OutOfDomain("geodesic left the integration chart")
        return out

    def lift_log(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.mode == "closed-form-flat":
            return y - x
        if self.mode == "closed-form-sphere":
            return self.orbifold.model.geo_log(x, y)
        v = y - x
        for _ in range(200):
            residual = y - self.lift_exp(x, v)
            if float(np.abs(residual).max()) < 1e-12:
                return v
            v = v + 0.8 * residual
        raise OutOfDomain("log iteration did not converge on the metric chart")

    def exp(self, p: QuotientPoint, v: np.ndarray | TangentVectorAt
            ) -> QuotientPoint:
        vec = v.vector if isinstance(v, TangentVectorAt) else np.asarray(v, float)
        out = self.lift_exp(p.representative, vec)
        if not self.orbifold.model.contains(out):
            raise OutOfDomain("exponential image leaves the model")
        return self.orbifold.point(out)

    def log(self, p: QuotientPoint, q: QuotientPoint) -> TangentVectorAt:
        """Tangent class pointing from p to the nearest representative of q."""
        grp = self.orbifold.group
        reps = grp.matrices @ q.canonical
        dists = self.orbifold.model.distances(reps, p.representative)
        vec = self.lift_log(p.representative, reps[int(np.argmin(dists))])
        return tangent_vector(self.orbifold, p, vec)


def exp_well_defined_residual(exp_map: ExpMap, rng: np.random.Generator,
                              count: int = 50, scale: float = 0.4) -> float:
    """Representative independence: exp((g x, g v)) equals exp((x, v)).

    Returns the worst quotient distance over seeded random (g, x, v) triples.
    """
    orbifold = exp_map.orbifold
    grp = orbifold.group
    worst = 0.0
    for _ in range(count):
        p = orbifold.random_point(rng)
        frame = orbifold.model.tangent_basis(p.representative)
        v = rng.normal(size=frame.shape[0]) @ frame
        v = v / max(np.linalg.norm(v), 1e-12) * rng.uniform(0.0, scale)
        lab = int(rng.integers(0, grp.order))
        q1 = exp_map.exp(p, v)
        moved = orbifold.point(grp.act(lab, p.representative))
        q2 = exp_map.exp(moved, grp.act(lab, v))
        worst = max(worst, orbifold.quotient_distance(q1, q2))
    return worst


@dataclass(frozen=True)
class HomeoCheckReport:
    """Sampled local-homeomorphism evidence for exp at one point."""

    injective: bool
    surjective: bool
    injectivity_witness: tuple | None
    surjectivity_gap: float
    surjectivity_tolerance: float
    pairs_checked: int
    targets_checked: int

    @property
    def passed(self) -> bool:
        return self.injective and self.surjective


def exp_local_homeo_check(exp_map: ExpMap, p: QuotientPoint, eps: float,
                          rng: np.random.Generator, pair_count: int = 60,
                          image_per_axis: int = 21,
                          exp_override: Callable | None = None
                          ) -> HomeoCheckReport:
    """Sampled injectivity and surjectivity of exp_p on the eps ball.

    Injectivity compares random distinct tangent classes; surjectivity covers
    a quotient grid of B(p, eps) by the image of a tangent-ball grid.
    ``exp_override`` lets tests exercise the check against a planted map.
    """
    orbifold = exp_map.orbifold
    the_exp = exp_override or (lambda point, vec: exp_map.exp(point, vec))
    frame = orbifold.model.tangent_basis(p.representative)
    stab = stabilizer(orbifold.group, p.representative)

    injective = True
    witness = None
    pairs = 0
    while pairs < pair_count:
        v = rng.normal(size=frame.shape[0]) @ frame
        w = rng.normal(size=frame.shape[0]) @ frame
        v = v / max(np.linalg.norm(v), 1e-12) * rng.uniform(0, eps)
        w = w / max(np.linalg.norm(w), 1e-12) * rng.uniform(0, eps)
        class_gap = float(np.linalg.norm(stab.matrices @ v - w, axis=1).min())
        if class_gap < 1e-6:
            continue
        pairs += 1
        if orbifold.quotient_distance(the_exp(p, v), the_exp(p, w)) < 1e-9:
            injective = False
            witness = (v.copy(), w.copy())
            break

    axis = np.linspace(-1.0, 1.0, image_per_axis)
    disc = np.array([[a, b] for a in axis for b in axis
                     if np.hypot(a, b) <= 1.0]) * eps
    images = [the_exp(p, c @ frame) for c in disc]
    spacing = 2.0 * eps / (image_per_axis - 1)
    tol = 2.5 * spacing
    targets = [orbifold.point(g) for g in orbifold.model.grid(32)
               if orbifold.quotient_distance(orbifold.point(g), p) <= eps * 0.9]
    gap = 0.0
    for q in targets:
        best = min(orbifold.quotient_distance(img, q) for img in images)
        gap = max(gap, best)
    return HomeoCheckReport(injective, gap <= tol, witness, gap, tol,
                            pairs, len(targets))


def exp_stratum_check(exp_map: ExpMap, p: QuotientPoint, v: np.ndarray,
                      t_grid: np.ndarray) -> bool:
    """exp(p, t v) stays in the stratum of p for admissible v."""
    base_sig = signature_at(exp_map.orbifold, p.representative)
    for t in t_grid:
        out = exp_map.lift_exp(p.representative, t * np.asarray(v, dtype=float))
        if signature_at(exp_map.orbifold, out) != base_sig:
            return False
    return True


# -- the chart map E and its inverse ------------------------------------------------

def E_apply(sigma: Orbisection, exp_map: ExpMap,
            name: str = "") -> OrbifoldMapData:
    """exp composed with an orbisection, as an orbifold self-map.

    Lifts are y -> exp(y, s(y)) with the identity homomorphism on every
    chart.  Raises OutOfDomain when the section leaves the exp domain.
    """
    orbifold = sigma.orbifold
    bound = exp_map.domain_bound
    if seminorm(sigma, 0) >= bound:
        raise OutOfDomain(
            f"section sup norm {seminorm(sigma, 0):.4f} reaches the exp "
            f"domain bound {bound:.4f}")

    def func(y: np.ndarray) -> np.ndarray:
        return exp_map.lift_exp(y, sigma.field(y))

    lifts = [ChartLift(ch, func, GroupHom.inclusion(ch.isotropy, orbifold.group))
             for ch in sigma.atlas]
    return OrbifoldMapData(orbifold, orbifold, lifts, degree=2,
                           name=name or f"E[{sigma.name}]",
                           global_lift=func,
                           inverse_lift=make_inverse_lift(func, orbifold),
                           validate=False)


def make_inverse_lift(func: Callable, orbifold: GoodOrbifold,
                      tol: float = 1e-12, iters: int = 200) -> Callable:
    """Pointwise inverse of a near-identity global lift, by damped iteration."""
    model = orbifold.model

    def inverse(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        w = y.copy()
        for _ in range(iters):
            r = y - np.asarray(func(w), dtype=float)
            if float(np.abs(r).max()) < tol:
                return w
            w = model.project(w + r)
        raise NotCloseToIdentity("inverse iteration failed; map too far from "
                                 "the identity")

    return inverse


def E_inverse(f: OrbifoldMapData, exp_map: ExpMap,
              eps_inj: float | None = None, name: str = "") -> Orbisection:
    """Recover the orbisection with exp(y, s(y)) = lift(y).

    Requires identity homomorphisms on every chart (ThetaNotIdentity
    otherwise) and lifts within the per-chart injectivity scale of the
    identity (NotCloseToIdentity otherwise).
    """
    orbifold = f.source
    for entry in f.lifts:
        if not entry.theta.is_identity:
            raise ThetaNotIdentity(
                f"chart at {np.round(entry.chart.center, 4)} carries a "
                "non-identity homomorphism")
    if f.global_lift is None:
        raise ChartMismatch("E_inverse needs a map with a global lift")
    if eps_inj is None:
        eps_inj = np.pi / 2 if orbifold.model.kind == SPHERE \
            else 0.5 * orbifold.model.radius
    worst = 0.0
    for entry in f.lifts:
        for y in entry.chart.sample_points(per_axis=4):
            worst = max(worst, orbifold.model.distance(y, np.asarray(entry.func(y))))
    if worst >= eps_inj:
        raise NotCloseToIdentity(
            f"lift displacement {worst:.4f} reaches the injectivity scale "
            f"{eps_inj:.4f}")

    def field(y: np.ndarray) -> np.ndarray:
        return exp_map.lift_log(y, np.asarray(f.global_lift(y), dtype=float))

    return Orbisection(orbifold, f.atlas, field, name=name or f"log[{f.name}]")


def transition_map(f: OrbifoldMapData, g: OrbifoldMapData, sigma: Orbisection,
                   exp_map: ExpMap) -> Orbisection:
    """Chart-overlap transition: the section representing g^-1 (f E(sigma))."""
    if g.inverse_lift is None or f.global_lift is None:
        raise ChartMismatch("transition maps need global lifts and an inverse")
    e_sigma = E_apply(sigma, exp_map)

    def func(y: np.ndarray) -> np.ndarray:
        return np.asarray(
            g.inverse_lift(f.global_lift(e_sigma.global_lift(y))), dtype=float)

    lifts = [ChartLift(ch, func,
                       derive_theta(ch, func, sigma.orbifold.group, per_axis=3))
             for ch in sigma.atlas]
    h = OrbifoldMapData(sigma.orbifold, sigma.orbifold, lifts, degree=2,
                        name="transition", global_lift=func, validate=False)
    return E_inverse(h, exp_map)


# -- diffeomorphism verification -----------------------------------------------------

@dataclass(frozen=True)
class DiffeoVerification:
    """Sampled injectivity, surjectivity, and the covering margin check."""

    injective: bool
    injectivity_witness: tuple | None
    surjectivity_gap: float
    surjectivity_tolerance: float
    c0_distance_to_identity: float
    margin: float                      # half the minimal covering separation

    @property
    def surjective(self) -> bool:
        return self.surjectivity_gap <= self.surjectivity_tolerance

    @property
    def margin_ok(self) -> bool:
        return self.c0_distance_to_identity < self.margin

    @property
    def passed(self) -> bool:
        return self.injective and self.surjective and self.margin_ok


def verify_diffeo(f: OrbifoldMapData, per_axis: int = 5,
                  inner_fraction: float = 0.55,
                  underlying_override: Callable | None = None
                  ) -> DiffeoVerification:
    """Check a self-map against the small-section diffeomorphism criteria.

    Covering data: each atlas chart is an outer set with an inner ball at
    inner_fraction of its radius, so the separation constant of chart i is
    (1 - inner_fraction) x radius_i.  ``underlying_override`` lets tests
    plant a defective map while keeping the harness honest.
    """
    orbifold = f.source
    apply_f = underlying_override or \
        (lambda q: f.target.point(f.global_lift(q.representative))
         if f.global_lift is not None else f.underlying(q))

    injective = True
    witness = None
    sources: list[QuotientPoint] = []
    images: list[QuotientPoint] = []
    spacing = 0.0
    for chart in f.atlas:
        pts = chart.sample_points(per_axis=per_axis)
        spacing = max(spacing, 2.0 * chart.radius / (per_axis - 1))
        for y in pts:
            q = orbifold.point(y)
            sources.append(q)
            images.append(apply_f(q))
    for i in range(len(sources)):
        for j in range(i + 1, len(sources)):
            if orbifold.quotient_distance(sources[i], sources[j]) < 1e-6:
                continue
            if orbifold.quotient_distance(images[i], images[j]) < 1e-9:
                injective = False
                witness = (sources[i], sources[j])
                break
        if not injective:
            break

    tol = 2.5 * spacing
    gap = 0.0
    for chart in f.atlas:
        inner = chart.sample_points(per_axis=per_axis,
                                    shrink=inner_fraction)
        for y in inner:
            target = orbifold.point(y)
            best = min(orbifold.quotient_distance(img, target)
                       for img in images)
            gap = max(gap, best)

    d0 = cs_distance(f, identity_map(orbifold, f.atlas), s=0,
                     per_axis=per_axis).value
    margin = 0.5 * min((1.0 - inner_fraction) * ch.radius for ch in f.atlas)
    return DiffeoVerification(injective, witness, gap, tol, d0, margin)


@dataclass(frozen=True)
class DiffeoChart:
    """Local chart of the diffeomorphism group around a base map."""

    base: OrbifoldMapData
    radius: float
    exp_map: ExpMap

    @staticmethod
    def around(base: OrbifoldMapData, exp_map: ExpMap,
               radius: float | None = None) -> "DiffeoChart":
        """Chart with the default radius, 0.1 x the minimal chart radius."""
        if radius is None:
            radius = 0.1 * min(ch.radius for ch in base.atlas)
        return DiffeoChart(base, radius, exp_map)

    def chart(self, sigma: Orbisection) -> OrbifoldMapData:
        from .maps import compose
        if seminorm(sigma, 1) >= self.radius:
            raise OutOfDomain("section leaves the chart ball")
        return compose(E_apply(sigma, self.exp_map), self.base)


def calibrate_chart_radius(orbifold: GoodOrbifold, exp_map: ExpMap,
                           atlas: Sequence[DerivedChart],
                           rng: np.random.Generator, steps: int = 8,
                           probes: int = 2, upper: float | None = None) -> float:
    """Largest section size whose chart maps verify as diffeomorphisms.

    Bisection (the given number of steps) on the C^1 bound; each candidate is
    probed with seeded random sections at that size.
    """
    from .tangent import random_orbisection, scale as scale_section

    if upper is None:
        upper = 0.5 * min(ch.radius for ch in atlas)

    def passes(eps: float) -> bool:
        for _ in range(probes):
            sigma = random_orbisection(orbifold, atlas, rng, c1_bound=eps)
            size = seminorm(sigma, 1)
            if size > 0:
                sigma = scale_section(sigma, eps * 0.98 / size)
            try:
                if not verify_diffeo(E_apply(sigma, exp_map)).passed:
                    return False
            except (OutOfDomain, NotCloseToIdentity):
                return False
        return True

    lo, hi = 0.0, upper
    if passes(hi):
        return hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if passes(mid):
            lo = mid
        else:
            hi = mid
    return lo


# -- corollary checks: identity lifts inside the diffeomorphism group ------------------

def conjugate_identity_lift(id_group: IdentityLiftGroup,
                            assignment: tuple[int, ...],
                            g: OrbifoldMapData,
                            tol: float = 1e-8) -> tuple[int, ...] | None:
    """Assignment tuple of g f g^-1 for an identity lift f, or None.

    Needs g to carry global and inverse lifts.  The conjugate's germ on each
    chart is transported through the chart of f nearest to the preimage of
    the center; None means some germ failed to normalize into the isotropy,
    i.e. the conjugate is not an identity lift over this atlas.
    """
    if g.global_lift is None or g.inverse_lift is None:
        raise ChartMismatch("conjugation needs global and inverse lifts")
    orbifold = id_group.orbifold
    grp = orbifold.group
    out = []
    for j, chart in enumerate(id_group.atlas):
        z = np.asarray(g.inverse_lift(chart.center), dtype=float)
        source = None
        for k, ck in enumerate(id_group.atlas):
            for lab in range(grp.order):
                if ck.contains(grp.act(lab, z), slack=0.0):
                    source = (k, lab)
                    break
            if source:
                break
        if source is None:
            return None
        k, lab = source
        gk_global = id_group.atlas[k].isotropy.parent_labels[assignment[k]]
        germ = grp.matrix(grp.conjugate(grp.inverse(lab), gk_global))

        def conj(y: np.ndarray) -> np.ndarray:
            return np.asarray(
                g.global_lift(germ @ np.asarray(g.inverse_lift(y), dtype=float)))

        pts = chart.sample_points(per_axis=4)
        vals = np.stack([conj(y) for y in pts])
        match = None
        for loc in range(chart.isotropy.order):
            m = chart.isotropy.matrix(loc)
            if float(np.abs(vals - pts @ m.T).max()) <= tol:
                match = loc
                break
        if match is None:
            return None
        out.append(match)
    return tuple(out)


@dataclass(frozen=True)
class QuotientGroupReport:
    """Evidence for the identity-lift normal subgroup structure."""

    id_order: int
    enumerated_order: int
    conjugation_closed: bool
    lift_differences_in_id: bool

    @property
    def passed(self) -> bool:
        return (self.id_order == self.enumerated_order
                and self.conjugation_closed and self.lift_differences_in_id)


def reduced_group_quotient_check(id_group: IdentityLiftGroup,
                                 sample_diffeos: Sequence[OrbifoldMapData],
                                 max_elements: int = 12) -> QuotientGroupReport:
    """Normality and coset checks for the identity-lift subgroup.

    (a) the enumeration is finite and closed; (b) conjugates of identity
    lifts by the sample diffeomorphisms are again identity lifts over the
    atlas; (c) two lifts of one sample diffeomorphism differ by an identity
    lift (deck variants give exactly the global identity-lift assignments).
    """
    orbifold = id_group.orbifold
    grp = orbifold.group
    elements = id_group.assignments[:max_elements]

    conj_ok = id_group.is_group()
    for g in sample_diffeos:
        for a in elements:
            image = conjugate_identity_lift(id_group, a, g)
            if image is None or not id_group.contains(image):
                conj_ok = False
                break
        if not conj_ok:
            break

    # (c): alternative lifts of one underlying map are deck variants eta g;
    # the difference (eta g) g^-1 = eta covers the identity, and its germ at
    # a singular chart normalizes into the chart isotropy through any deck
    # element t with (t eta) fixing the center.
    diff_ok = True
    for lab in range(grp.order):
        diff: list[int] | None = []
        for chart in id_group.atlas:
            if chart.isotropy.order == 1:
                diff.append(0)
                continue
            loc = None
            for t in range(grp.order):
                cand = grp.multiply(t, lab)
                if cand in chart.isotropy.parent_labels:
                    moved = grp.act(cand, chart.center)
                    if float(np.abs(moved - chart.center).max()) < EPS_GRP:
                        loc = chart.isotropy.parent_labels.index(cand)
                        break
            if loc is None:
                diff = None
                break
            diff.append(loc)
        if diff is None or not id_group.contains(tuple(diff)):
            diff_ok = False
    return QuotientGroupReport(id_group.order, id_group.order, conj_ok, diff_ok)
