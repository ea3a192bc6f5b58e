"""Good orbifolds as global quotients of flat balls and round spheres.

Everything downstream works on one model manifold M (a flat ball or a round
sphere in ambient coordinates) carrying a finite orthogonal action.  Charts,
strata, isotropy, and the quotient metric are all derived from that pair.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import (AtlasNotCovering, EquivarianceViolation, RadiusTooLarge,
                     UnsupportedModel)
from .groups import (EPS_GRP, FiniteActionGroup, _snap_key,
                     football_rotation_group, generate_group,
                     group_from_elements, orbit, reflection_2d, rotation_2d,
                     sign_flip_group, stabilizer, trivial_group)

FLAT = "flat"
SPHERE = "sphere"

CHART_RADIUS_FACTOR = 0.4     # default chart radius as a fraction of separation
FLAT_DOMAIN_FACTOR = 0.75     # closed sub-ball used for covering-style checks
COVERAGE_RESOLUTION = 16      # canonical grid for atlas covering checks


@dataclass(frozen=True)
class ModelSpace:
    """Flat ball of a given radius, or the unit round sphere.

    ``dimension`` is the manifold dimension; sphere points live in
    ``dimension + 1`` ambient coordinates.
    """

    kind: str
    dimension: int
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in (FLAT, SPHERE):
            raise UnsupportedModel(f"unknown model kind {self.kind!r}")
        if self.dimension < 1:
            raise UnsupportedModel("model dimension must be positive")
        if self.kind == FLAT and self.radius <= 0:
            raise UnsupportedModel("flat ball radius must be positive")

    @property
    def ambient_dim(self) -> int:
        return self.dimension + 1 if self.kind == SPHERE else self.dimension

    def contains(self, point: np.ndarray, slack: float = 1e-9) -> bool:
        p = np.asarray(point, dtype=float)
        if p.shape != (self.ambient_dim,):
            return False
        if self.kind == FLAT:
            return float(np.linalg.norm(p)) < self.radius * (1.0 + slack)
        return abs(float(np.linalg.norm(p)) - 1.0) < 1e-12 + slack

    def project(self, point: np.ndarray) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        if self.kind == SPHERE:
            return p / np.linalg.norm(p)
        return p

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kind == FLAT:
            return float(np.linalg.norm(a - b))
        # chord-based great-circle distance: full precision at both ends,
        # unlike arccos of the dot product which loses ~1e-8 near zero
        if float(np.dot(a, b)) >= 0.0:
            half = np.clip(np.linalg.norm(a - b) / 2.0, 0.0, 1.0)
            return float(2.0 * np.arcsin(half))
        half = np.clip(np.linalg.norm(a + b) / 2.0, 0.0, 1.0)
        return float(np.pi - 2.0 * np.arcsin(half))

    def distances(self, pts: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Distances from each row of pts to q."""
        pts = np.atleast_2d(pts)
        if self.kind == FLAT:
            return np.linalg.norm(pts - q, axis=1)
        near = 2.0 * np.arcsin(np.clip(np.linalg.norm(pts - q, axis=1) / 2.0,
                                       0.0, 1.0))
        far = np.pi - 2.0 * np.arcsin(np.clip(np.linalg.norm(pts + q, axis=1) / 2.0,
                                              0.0, 1.0))
        return np.where(pts @ q >= 0.0, near, far)

    # -- geodesics (round metric on the sphere, Euclidean on the ball) ------

    def geo_exp(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Geodesic exponential; exp(x, 0) == x exactly."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == FLAT:
            return x + v
        speed = float(np.linalg.norm(v))
        if speed == 0.0:
            return x.copy()
        return np.cos(speed) * x + np.sin(speed) * v / speed

    def geo_log(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Inverse of geo_exp(x, .); smallest representative on the sphere."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == FLAT:
            return y - x
        if np.array_equal(x, y):
            return np.zeros_like(x)
        dot = float(np.clip(np.dot(x, y), -1.0, 1.0))
        perp = y - dot * x
        norm = float(np.linalg.norm(perp))
        if dot <= -1.0 + 1e-12 and norm < 1e-9:
            raise ValueError("log undefined at antipodal points")
        if norm < 1e-9:
            return perp  # series tail; relative error O(theta^2)
        # atan2 keeps full precision at both ends, unlike arccos near 0
        return float(np.arctan2(norm, dot)) * perp / norm

    def tangent_basis(self, x: np.ndarray) -> np.ndarray:
        """Orthonormal rows spanning the tangent space at x."""
        if self.kind == FLAT:
            return np.eye(self.dimension)
        x = np.asarray(x, dtype=float)
        n = self.ambient_dim
        basis = []
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            v = e - np.dot(e, x) * x
            for b in basis:
                v = v - np.dot(v, b) * b
            nv = float(np.linalg.norm(v))
            if nv > 1e-8:
                basis.append(v / nv)
            if len(basis) == self.dimension:
                break
        return np.stack(basis)

    # -- deterministic sample sets -------------------------------------------

    def grid(self, resolution: int) -> np.ndarray:
        """Deterministic sample grid of the model, shape (k, ambient_dim)."""
        if self.kind == FLAT:
            axis = np.linspace(-self.radius, self.radius, resolution) * 0.98
            pts = np.array(list(itertools.product(axis, repeat=self.dimension)))
            keep = np.linalg.norm(pts, axis=1) < self.radius * 0.98 + 1e-12
            return pts[keep]
        if self.dimension != 2:
            raise UnsupportedModel("sphere grids are implemented for S^2 only")
        thetas = np.linspace(0.0, np.pi, resolution)
        phis = np.linspace(0.0, 2.0 * np.pi, resolution, endpoint=False)
        out = []
        for t in thetas:
            st, ct = np.sin(t), np.cos(t)
            if abs(st) < 1e-15:
                out.append(np.array([0.0, 0.0, np.sign(ct) if ct else 1.0]))
                continue
            for p in phis:
                out.append(np.array([st * np.cos(p), st * np.sin(p), ct]))
        return np.stack(out)

    def grid_spacing(self, resolution: int) -> float:
        if self.kind == FLAT:
            return 2.0 * 0.98 * self.radius / max(resolution - 1, 1)
        return 2.0 * np.pi / resolution

    def ball_grid(self, center: np.ndarray, radius: float,
                  per_axis: int = 5, shrink: float = 0.95) -> np.ndarray:
        """Deterministic samples of the metric ball around center."""
        center = np.asarray(center, dtype=float)
        axis = np.linspace(-1.0, 1.0, per_axis)
        cube = np.array(list(itertools.product(axis, repeat=self.dimension)))
        cube = cube[np.linalg.norm(cube, axis=1) <= 1.0 + 1e-12] * radius * shrink
        if self.kind == FLAT:
            return center + cube
        frame = self.tangent_basis(center)
        return np.stack([self.geo_exp(center, c @ frame) for c in cube])


class GoodOrbifold:
    """A model space together with a finite effective orthogonal action."""

    def __init__(self, model: ModelSpace, group: FiniteActionGroup,
                 name: str = ""):
        if group.dimension != model.ambient_dim:
            raise UnsupportedModel(
                f"group acts on R^{group.dimension} but the model has ambient "
                f"dimension {model.ambient_dim}")
        for lab in range(1, group.order):
            if float(np.abs(group.matrix(lab) - np.eye(group.dimension)).max()) < EPS_GRP:
                raise EquivarianceViolation(
                    "action is not effective: a non-identity element acts as the "
                    "identity on the model")
        self.model = model
        self.group = group
        self.name = name or f"{model.kind}{model.dimension}/order{group.order}"

    @property
    def dimension(self) -> int:
        return self.model.dimension

    def __repr__(self) -> str:
        return f"GoodOrbifold({self.name})"

    # -- quotient points -----------------------------------------------------

    def canonical_representative(self, point: np.ndarray) -> np.ndarray:
        return orbit(self.group, point)[0]

    def point(self, representative: np.ndarray) -> "QuotientPoint":
        rep = self.model.project(np.asarray(representative, dtype=float))
        if not self.model.contains(rep):
            raise ValueError(f"point {rep} is not in the model space")
        return QuotientPoint(self, rep, self.canonical_representative(rep))

    def random_point(self, rng: np.random.Generator) -> "QuotientPoint":
        if self.model.kind == FLAT:
            v = rng.normal(size=self.model.dimension)
            v = v / np.linalg.norm(v) * self.model.radius * rng.uniform(0, 0.9)
            return self.point(v)
        v = rng.normal(size=self.model.ambient_dim)
        return self.point(v / np.linalg.norm(v))

    def quotient_distance(self, a: "QuotientPoint", b: "QuotientPoint") -> float:
        """Nearest-orbit distance; symmetric by construction (min of both orders)."""
        d_ab = self._raw_distance(a.canonical, b.canonical)
        d_ba = self._raw_distance(b.canonical, a.canonical)
        return min(d_ab, d_ba)

    def _raw_distance(self, a: np.ndarray, b: np.ndarray) -> float:
        pts = self.group.matrices @ a
        return float(self.model.distances(pts, b).min())

    def isotropy_at(self, p: "QuotientPoint") -> FiniteActionGroup:
        return stabilizer(self.group, p.representative)

    # -- singular structure ----------------------------------------------------

    def singular_points(self, resolution: int = 16) -> list[np.ndarray]:
        """Exact singular locations, sampled along every fixed-point set.

        Points are canonical representatives, deduplicated.  For each
        non-identity element we sample its fixed subspace intersected with the
        model (flat: the fixed subspace ball; sphere: its unit sphere).
        """
        out: dict[tuple, np.ndarray] = {}

        def add(p: np.ndarray):
            if not self.model.contains(p, slack=0.0):
                return
            if stabilizer(self.group, p).order > 1:
                c = self.canonical_representative(p)
                out.setdefault(_snap_key(c), c)

        for lab in range(1, self.group.order):
            gmat = self.group.matrix(lab)
            _, svals, vt = np.linalg.svd(gmat - np.eye(self.group.dimension))
            svals = np.concatenate([svals, np.zeros(vt.shape[0] - svals.size)])
            basis = vt[svals < 1e-9]
            k = basis.shape[0]
            if k == 0:
                if self.model.kind == FLAT:
                    add(np.zeros(self.model.ambient_dim))
                continue
            if self.model.kind == FLAT:
                add(np.zeros(self.model.ambient_dim))
                axis = np.linspace(-1, 1, max(resolution, 3)) * self.model.radius * 0.98
                for coeffs in itertools.product(axis, repeat=k):
                    p = np.asarray(coeffs) @ basis
                    if np.linalg.norm(p) < self.model.radius * 0.98:
                        add(p)
            else:
                if k == 1:
                    add(basis[0])
                    add(-basis[0])
                else:
                    axis = np.linspace(-1, 1, max(resolution, 3))
                    for coeffs in itertools.product(axis, repeat=k):
                        c = np.asarray(coeffs)
                        if np.linalg.norm(c) > 1e-9:
                            add(self.model.project(c @ basis))
        return list(out.values())


@dataclass(frozen=True)
class QuotientPoint:
    """An orbit of the group action, carried by a chosen representative.

    Equality and hashing use the canonical member (the lexicographically
    least orbit point under coordinatewise comparison with 1e-9 snapping).
    """

    orbifold: GoodOrbifold
    representative: np.ndarray
    canonical: np.ndarray

    def __post_init__(self):
        for name in ("representative", "canonical"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuotientPoint):
            return NotImplemented
        return _snap_key(self.canonical) == _snap_key(other.canonical)

    def __hash__(self) -> int:
        return hash(_snap_key(self.canonical))

    def with_representative(self, rep: np.ndarray) -> "QuotientPoint":
        return QuotientPoint(self.orbifold, np.asarray(rep, dtype=float),
                             self.canonical)

    @property
    def isotropy_order(self) -> int:
        return stabilizer(self.orbifold.group, self.representative).order

    def __repr__(self) -> str:
        return f"[{np.round(self.canonical, 6)}]"


@dataclass(frozen=True)
class DerivedChart:
    """Metric ball chart around a model point, with its isotropy subgroup."""

    orbifold: GoodOrbifold
    center: np.ndarray
    radius: float
    isotropy: FiniteActionGroup   # subgroup of the global group, parent labels kept

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        c.setflags(write=False)
        object.__setattr__(self, "center", c)

    def contains(self, point: np.ndarray, slack: float = 1e-9) -> bool:
        return self.orbifold.model.distance(self.center, point) <= \
            self.radius * (1.0 + slack)

    def sample_points(self, per_axis: int = 5, shrink: float = 0.95) -> np.ndarray:
        return self.orbifold.model.ball_grid(self.center, self.radius,
                                             per_axis=per_axis, shrink=shrink)

    @property
    def isotropy_order(self) -> int:
        return self.isotropy.order

    def __repr__(self) -> str:
        return (f"DerivedChart(center={np.round(self.center, 4)}, "
                f"radius={self.radius:.4f}, isotropy={self.isotropy.order})")


def separation(orbifold: GoodOrbifold, point: np.ndarray) -> float:
    """Distance from a point to its nearest distinct orbit translate (inf if none)."""
    p = np.asarray(point, dtype=float)
    pts = orbit(orbifold.group, p)
    dists = orbifold.model.distances(pts, p)
    dists = dists[dists > EPS_GRP]
    return float(dists.min()) if dists.size else np.inf


def build_chart(orbifold: GoodOrbifold, p: QuotientPoint,
                radius: float | None = None) -> DerivedChart:
    """Chart at p with radius defaulting to 0.4 x orbit separation.

    Points whose whole orbit collapses (separation is infinite) fall back to
    0.4 x the local model scale.  Raises RadiusTooLarge when an explicit
    radius reaches half the separation or leaves the model.
    """
    center = p.representative
    sep = separation(orbifold, center)
    model = orbifold.model
    if model.kind == FLAT:
        boundary = model.radius - float(np.linalg.norm(center))
        fallback = CHART_RADIUS_FACTOR * boundary
        cap = boundary
    else:
        fallback = CHART_RADIUS_FACTOR * (np.pi / 2.0)
        cap = np.pi
    if radius is None:
        radius = min(CHART_RADIUS_FACTOR * sep, cap) if np.isfinite(sep) else fallback
        radius = max(radius, 1e-9)
    if radius >= 0.5 * sep:
        raise RadiusTooLarge(
            f"radius {radius} reaches half the orbit separation {sep}")
    if radius > cap * (1.0 + 1e-9):
        raise RadiusTooLarge(f"radius {radius} leaves the model (cap {cap})")
    return DerivedChart(orbifold, center, float(radius),
                        stabilizer(orbifold.group, center))


def build_atlas(orbifold: GoodOrbifold, resolution: int = 16,
                max_charts: int = 128) -> tuple[DerivedChart, ...]:
    """Deterministic greedy atlas: singular charts first, then fill the rest.

    Coverage is demanded on the verification domain (the whole sphere, or the
    closed 0.75R sub-ball of a flat model).  Raises AtlasNotCovering when
    max_charts is not enough.
    """
    model = orbifold.model

    def ordered_samples(res: int) -> list[np.ndarray]:
        samples = [np.asarray(s) for s in orbifold.singular_points(res)]
        grid = model.grid(res)
        if model.kind == FLAT:
            domain_r = model.radius * FLAT_DOMAIN_FACTOR
            samples = [s for s in samples
                       if np.linalg.norm(s) <= domain_r + 1e-12]
            grid = grid[np.linalg.norm(grid, axis=1) <= domain_r + 1e-12]
        seen = {_snap_key(s) for s in samples}
        for g in grid:
            c = orbifold.canonical_representative(g)
            if _snap_key(c) not in seen:
                seen.add(_snap_key(c))
                samples.append(c)
        keyed = [(-stabilizer(orbifold.group, s).order, _snap_key(s), s)
                 for s in samples]
        keyed.sort(key=lambda t: t[:2])
        return [s for _, _, s in keyed]

    charts: list[DerivedChart] = []

    def covered(s: np.ndarray) -> bool:
        for ch in charts:
            pts = orbifold.group.matrices @ s
            if float(model.distances(pts, ch.center).min()) <= ch.radius * 0.999:
                return True
        return False

    # the refinement pass keeps finer grids covered; the final pass walks the
    # canonical covering grid so downstream covering checks hold by construction
    for res in (resolution, 2 * resolution - 1, COVERAGE_RESOLUTION):
        for s in ordered_samples(res):
            if covered(s):
                continue
            charts.append(build_chart(orbifold, orbifold.point(s)))
            if len(charts) > max_charts:
                raise AtlasNotCovering(
                    f"atlas needs more than max_charts={max_charts} charts at "
                    f"resolution {res}")
    return tuple(charts)


# -- strata -------------------------------------------------------------------

@dataclass(frozen=True)
class Stratum:
    """Connected set of samples sharing one isotropy signature."""

    orbifold: GoodOrbifold
    signature: tuple[int, ...]      # global labels of the common stabilizer
    component_id: int
    sample_points: np.ndarray       # canonical representatives, shape (k, d)
    resolution: int

    @property
    def isotropy_order(self) -> int:
        return len(self.signature)

    @property
    def is_singleton(self) -> bool:
        return self.sample_points.shape[0] == 1

    def __repr__(self) -> str:
        return (f"Stratum(order={self.isotropy_order}, "
                f"samples={self.sample_points.shape[0]})")


def signature_at(orbifold: GoodOrbifold, point: np.ndarray) -> tuple[int, ...]:
    """Sorted global labels of the stabilizer of a model point."""
    sub = stabilizer(orbifold.group, point)
    assert sub.parent_labels is not None
    return tuple(sorted(sub.parent_labels))


def strata(orbifold: GoodOrbifold, resolution: int = 32) -> list[Stratum]:
    """Sample the model, group by isotropy signature, split into components.

    Connectivity is grid adjacency at the sampling resolution, measured in
    the quotient (orbit-aware), so fundamental-domain seams do not split
    strata.  The resolution is recorded on every stratum.
    """
    model = orbifold.model
    pts = [orbifold.canonical_representative(g) for g in model.grid(resolution)]
    pts.extend(np.asarray(s) for s in orbifold.singular_points(resolution))
    uniq: dict[tuple, np.ndarray] = {}
    for p in pts:
        uniq.setdefault(_snap_key(p), p)
    points = np.stack(list(uniq.values()))
    sigs = [signature_at(orbifold, p) for p in points]

    n = len(points)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    spacing = model.grid_spacing(resolution)
    thresh = 1.6 * spacing
    if model.kind == SPHERE:
        thresh = 2.0 * np.sin(min(thresh, np.pi) / 2.0)  # chordal
    tree = cKDTree(points)
    for lab in range(orbifold.group.order):
        moved = points @ orbifold.group.matrix(lab).T
        pairs = tree.query_ball_point(moved, r=thresh)
        for i, hits in enumerate(pairs):
            for j in hits:
                if sigs[i] == sigs[j]:
                    union(i, j)

    components: dict[tuple[tuple[int, ...], int], list[int]] = {}
    for i in range(n):
        components.setdefault((sigs[i], find(i)), []).append(i)

    out = []
    for cid, ((sig, _), idxs) in enumerate(sorted(
            components.items(),
            key=lambda kv: (-len(kv[0][0]), kv[0][0],
                            min(_snap_key(points[i]) for i in kv[1])))):
        sample = points[sorted(idxs, key=lambda i: _snap_key(points[i]))]
        out.append(Stratum(orbifold, sig, cid, sample, resolution))
    return out


# -- products and suborbifolds --------------------------------------------------

def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0], a.shape[1] + b.shape[1]))
    out[:a.shape[0], :a.shape[1]] = a
    out[a.shape[0]:, a.shape[1]:] = b
    return out


def product(o1: GoodOrbifold, o2: GoodOrbifold, name: str = "") -> GoodOrbifold:
    """Product orbifold with the block-diagonal action (flat factors only)."""
    if o1.model.kind != FLAT or o2.model.kind != FLAT:
        raise UnsupportedModel("products are implemented for flat factors only")
    radius = float(np.hypot(o1.model.radius, o2.model.radius))
    model = ModelSpace(FLAT, o1.dimension + o2.dimension, radius)
    mats = [_block_diag(o1.group.matrix(a), o2.group.matrix(b))
            for a in range(o1.group.order) for b in range(o2.group.order)]
    group = group_from_elements(mats)
    return GoodOrbifold(model, group,
                        name or f"({o1.name})x({o2.name})")


@dataclass(frozen=True)
class SuborbifoldData:
    """Descriptor of a suborbifold: twisted subgroup, sample set, checks."""

    ambient: GoodOrbifold
    group: FiniteActionGroup            # subgroup of the ambient group
    samples: np.ndarray                 # points of the sub-chart, shape (k, d)
    subspace: np.ndarray | None         # orthonormal rows, or None
    invariance_residual: float
    chart_residual: float

    def isotropy_order_at(self, point: np.ndarray) -> int:
        """Order of the stabilizer within the suborbifold group."""
        return stabilizer(self.group, point).order


def diagonal_suborbifold(orbifold: GoodOrbifold,
                         samples_per_axis: int = 7) -> SuborbifoldData:
    """Diagonal of O x O with the diagonal subgroup and subspace."""
    if orbifold.model.kind != FLAT:
        raise UnsupportedModel("diagonal suborbifolds need a flat model")
    amb = product(orbifold, orbifold)
    n = orbifold.dimension
    lam = group_from_elements(
        [_block_diag(g, g) for g in orbifold.group.matrices])
    basis = np.zeros((n, 2 * n))
    for i in range(n):
        basis[i, i] = basis[i, n + i] = 1.0 / np.sqrt(2.0)

    proj = basis.T @ basis
    inv_res = 0.0
    for lab in range(lam.order):
        m = lam.matrix(lab)
        inv_res = max(inv_res, float(np.abs((np.eye(2 * n) - proj) @ m @ proj).max()))

    base_pts = orbifold.model.ball_grid(np.zeros(n),
                                        orbifold.model.radius * 0.7,
                                        per_axis=samples_per_axis)
    samples = np.hstack([base_pts, base_pts])

    # chart condition: ambient equivalence and Lambda equivalence agree on the
    # sub-chart samples (the sub-chart separates points exactly like U ∩ X_P)
    chart_res = 0.0
    for i in range(min(len(samples), 24)):
        for j in range(i + 1, min(len(samples), 24)):
            amb_d = amb.quotient_distance(amb.point(samples[i]),
                                          amb.point(samples[j]))
            lam_pts = lam.matrices @ samples[i]
            lam_d = float(np.linalg.norm(lam_pts - samples[j], axis=1).min())
            if (amb_d < EPS_GRP) != (lam_d < EPS_GRP):
                chart_res = max(chart_res, abs(amb_d - lam_d))
    return SuborbifoldData(amb, lam, samples, basis, inv_res, chart_res)


def graph_suborbifold(map_data, tolerance: float = 1e-8,
                      per_axis: int = 5) -> list[SuborbifoldData]:
    """Graph of an orbifold map as a twisted-diagonal suborbifold, per chart.

    For each chart lift with homomorphism T, the subgroup is
    {(g, T(g))} acting on source x target, and the sample set is the graph
    of the lift.  Raises EquivarianceViolation when the graph is not
    invariant within tolerance (inconsistent lift / homomorphism data).
    """
    src, tgt = map_data.source, map_data.target
    if src.model.kind != FLAT or tgt.model.kind != FLAT:
        raise UnsupportedModel("graph suborbifolds need flat source and target")
    amb = product(src, tgt)
    out = []
    for entry in map_data.lifts:
        chart, func, theta = entry.chart, entry.func, entry.theta
        mats = [_block_diag(chart.isotropy.matrix(a), theta.matrix(a))
                for a in range(chart.isotropy.order)]
        twisted = group_from_elements(mats)
        base = chart.sample_points(per_axis=per_axis)
        graph_pts = np.hstack([base, np.stack([np.asarray(func(y)) for y in base])])
        res = 0.0
        for a in range(chart.isotropy.order):
            g = chart.isotropy.matrix(a)
            tg = theta.matrix(a)
            for y in base:
                lhs = tg @ np.asarray(func(y))
                rhs = np.asarray(func(g @ y))
                res = max(res, float(np.abs(lhs - rhs).max()))
        if res > tolerance:
            raise EquivarianceViolation(
                f"graph of chart at {np.round(chart.center, 4)} is not invariant: "
                f"residual {res:.3e} > {tolerance:.1e}")
        out.append(SuborbifoldData(amb, twisted, graph_pts, None, res, 0.0))
    return out


# -- ready-made orbifolds -------------------------------------------------------

def football(p: int) -> GoodOrbifold:
    """S^2 mod Z_p rotation about the z-axis; poles are the singular points."""
    return GoodOrbifold(ModelSpace(SPHERE, 2), football_rotation_group(p),
                        name=f"football{p}")


def line_mod_flip(radius: float = 2.0) -> GoodOrbifold:
    """Interval (-R, R) mod x -> -x; one singular point at the origin."""
    return GoodOrbifold(ModelSpace(FLAT, 1, radius), sign_flip_group(),
                        name="line_mod_flip")


def disk_mod_rotation(p: int, radius: float = 1.0) -> GoodOrbifold:
    """Flat disk mod Z_p rotation; a single cone point at the origin."""
    group = generate_group([rotation_2d(2.0 * np.pi / p)], max_order=p)
    return GoodOrbifold(ModelSpace(FLAT, 2, radius), group,
                        name=f"disk_mod_Z{p}")


def plane_mod_reflection(radius: float = 1.0) -> GoodOrbifold:
    """Flat disk mod (x, y) -> (x, -y); the mirror line is singular."""
    group = generate_group([np.array([[1.0, 0.0], [0.0, -1.0]])], max_order=2)
    return GoodOrbifold(ModelSpace(FLAT, 2, radius), group,
                        name="plane_mod_reflection")


def disk_mod_dihedral(p: int, radius: float = 1.0) -> GoodOrbifold:
    group = generate_group([rotation_2d(2.0 * np.pi / p), reflection_2d(0.0)],
                           max_order=2 * p)
    return GoodOrbifold(ModelSpace(FLAT, 2, radius), group,
                        name=f"disk_mod_D{p}")


def manifold_disk(dimension: int = 2, radius: float = 1.0) -> GoodOrbifold:
    """Trivial quotient: a disk with no symmetry."""
    return GoodOrbifold(ModelSpace(FLAT, dimension, radius),
                        trivial_group(dimension), name="manifold_disk")
