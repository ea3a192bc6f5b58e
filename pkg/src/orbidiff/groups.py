"""Finite subgroups of the orthogonal group: enumeration and structure.

Groups are stored as explicit element lists with a Cayley table over small
integer labels.  Label 0 is always the identity; labels are assigned
breadth-first from the identity with a lexicographic tie-break on matrix
entries, so tables are reproducible bit for bit across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ClosureExceeded, NotOrthogonal, SampleOutOfChart

EPS_GRP = 1e-9        # element and point equality tolerance
ORTHO_TOL = 1e-12     # orthogonality tolerance on inputs
FD_STEP = 1e-5        # central finite-difference step, chart units
FD_TOL = 1e-6         # tolerance when comparing FD Jacobians
MAX_ORDER_DEFAULT = 4096


def polar_orthonormalize(m: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix (polar factor); keeps long products stable."""
    u, _, vt = np.linalg.svd(m)
    return u @ vt


def is_orthogonal(m: np.ndarray, tol: float = ORTHO_TOL) -> bool:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return float(np.abs(m.T @ m - np.eye(m.shape[0])).max()) < tol


def _snap_key(m: np.ndarray) -> tuple:
    # +0.0 normalizes away -0.0 so sort keys are stable
    return tuple((np.round(np.asarray(m, dtype=float).ravel(), 9) + 0.0).tolist())


def fd_jacobian(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                step: float = FD_STEP) -> np.ndarray:
    """Jacobian of f at x by central differences."""
    x = np.asarray(x, dtype=float)
    fx = np.asarray(f(x), dtype=float)
    jac = np.empty((fx.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        jac[:, j] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * step)
    return jac


@dataclass(frozen=True)
class OrthogonalElement:
    """One orthogonal matrix with its label inside a group."""

    matrix: np.ndarray
    label: int

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def approx_equal(self, other: "OrthogonalElement | np.ndarray",
                     tol: float = EPS_GRP) -> bool:
        other_m = other.matrix if isinstance(other, OrthogonalElement) else other
        return float(np.abs(self.matrix - other_m).max()) < tol


class FiniteActionGroup:
    """A finite subgroup of O(n) closed under product and inverse.

    ``parent_labels`` is set on subgroups and maps each local label to the
    label of the same matrix in the parent group.
    """

    def __init__(self, elements: Sequence[OrthogonalElement], cayley: np.ndarray,
                 parent_labels: tuple[int, ...] | None = None):
        self.elements = tuple(elements)
        self.dimension = int(self.elements[0].matrix.shape[0])
        self.cayley = np.asarray(cayley, dtype=int)
        self.cayley.setflags(write=False)
        self.parent_labels = parent_labels
        self._stack = np.stack([e.matrix for e in self.elements])
        self._stack.setflags(write=False)
        inv = np.full(self.order, -1, dtype=int)
        for a in range(self.order):
            hits = np.nonzero(self.cayley[a] == 0)[0]
            if hits.size != 1:
                raise ClosureExceeded(f"element {a} lacks a unique inverse")
            inv[a] = hits[0]
        self._inverses = inv
        self._inverses.setflags(write=False)

    # -- basic structure ---------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def matrices(self) -> np.ndarray:
        """Stacked element matrices, shape (order, n, n)."""
        return self._stack

    def matrix(self, label: int) -> np.ndarray:
        return self.elements[label].matrix

    def multiply(self, a: int, b: int) -> int:
        return int(self.cayley[a, b])

    def inverse(self, label: int) -> int:
        return int(self._inverses[label])

    def conjugate(self, g: int, h: int) -> int:
        """Label of g h g^-1."""
        return self.multiply(self.multiply(g, h), self.inverse(g))

    def find(self, m: np.ndarray, tol: float = EPS_GRP) -> int | None:
        """Label of the element equal to m within tol, or None."""
        diffs = np.abs(self._stack - np.asarray(m, dtype=float)).max(axis=(1, 2))
        best = int(np.argmin(diffs))
        return best if diffs[best] < tol else None

    def element_order(self, label: int) -> int:
        k, acc = 1, label
        while acc != 0:
            acc = self.multiply(acc, label)
            k += 1
        return k

    @property
    def exponent(self) -> int:
        out = 1
        for lab in range(self.order):
            out = int(np.lcm(out, self.element_order(lab)))
        return out

    @property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.cayley, self.cayley.T))

    def subgroup(self, labels: Iterable[int]) -> "FiniteActionGroup":
        """Subgroup on the given labels; label 0 stays the identity."""
        labs = sorted(set(int(l) for l in labels))
        if 0 not in labs:
            raise ClosureExceeded("subgroup must contain the identity")
        labs = [0] + [l for l in labs if l != 0]
        pos = {l: i for i, l in enumerate(labs)}
        cay = np.empty((len(labs), len(labs)), dtype=int)
        for i, a in enumerate(labs):
            for j, b in enumerate(labs):
                prod = self.multiply(a, b)
                if prod not in pos:
                    raise ClosureExceeded("labels are not closed under product")
                cay[i, j] = pos[prod]
        elems = [OrthogonalElement(self.matrix(l), i) for i, l in enumerate(labs)]
        return FiniteActionGroup(elems, cay, parent_labels=tuple(labs))

    def act(self, label: int, points: np.ndarray) -> np.ndarray:
        """Apply element to one point (n,) or a batch (k, n)."""
        return np.asarray(points, dtype=float) @ self.matrix(label).T

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"FiniteActionGroup(order={self.order}, dim={self.dimension})"


def generate_group(generators: Sequence[np.ndarray],
                   max_order: int = MAX_ORDER_DEFAULT) -> FiniteActionGroup:
    """Close a generator set under multiplication.

    Breadth-first from the identity; products are re-orthonormalized by a
    polar decomposition each step so numerically drifting inputs do not
    masquerade as new elements.  Raises ClosureExceeded past max_order and
    NotOrthogonal on bad generators.
    """
    if max_order < 1:
        raise ClosureExceeded("max_order must be at least 1")
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        raise NotOrthogonal("at least one generator matrix is required")
    n = gens[0].shape[0]
    for i, g in enumerate(gens):
        if g.shape != (n, n):
            raise NotOrthogonal(f"generator {i} has shape {g.shape}, expected {(n, n)}")
        if not is_orthogonal(g):
            raise NotOrthogonal(f"generator {i} is not orthogonal within {ORTHO_TOL}")
    gens = [polar_orthonormalize(g) for g in gens]

    found: list[np.ndarray] = [np.eye(n)]

    def lookup(m: np.ndarray) -> int | None:
        diffs = np.abs(np.stack(found) - m).max(axis=(1, 2))
        best = int(np.argmin(diffs))
        return best if diffs[best] < EPS_GRP else None

    frontier = [np.eye(n)]
    while frontier:
        products = []
        for m in frontier:
            for g in gens:
                products.append(polar_orthonormalize(m @ g))
        products.sort(key=_snap_key)
        next_frontier = []
        for p in products:
            if lookup(p) is None:
                found.append(p)
                next_frontier.append(p)
                if len(found) > max_order:
                    raise ClosureExceeded(
                        f"group order exceeds max_order={max_order}; generators may "
                        "not generate a finite group or are drifting numerically")
        frontier = next_frontier

    elems = [OrthogonalElement(m, i) for i, m in enumerate(found)]
    stack = np.stack(found)
    order = len(found)
    cay = np.empty((order, order), dtype=int)
    for a in range(order):
        prods = stack[a] @ stack  # (order, n, n) products a*b
        diffs = np.abs(prods[:, None, :, :] - stack[None, :, :, :]).max(axis=(2, 3))
        labels = np.argmin(diffs, axis=1)
        if float(diffs[np.arange(order), labels].max()) > EPS_GRP:
            raise ClosureExceeded("closure lookup failed; numerical drift too large")
        cay[a] = labels
    return FiniteActionGroup(elems, cay)


def group_from_elements(matrices: Sequence[np.ndarray]) -> FiniteActionGroup:
    """Group from a complete element set (must already be closed)."""
    return generate_group(matrices, max_order=len(matrices))


def trivial_group(dimension: int) -> FiniteActionGroup:
    return generate_group([np.eye(dimension)], max_order=1)


def center(group: FiniteActionGroup) -> FiniteActionGroup:
    """Subgroup of elements commuting with everything (exhaustive check)."""
    labs = [a for a in range(group.order)
            if all(group.multiply(a, b) == group.multiply(b, a)
                   for b in range(group.order))]
    return group.subgroup(labs)


@dataclass(frozen=True)
class GroupHom:
    """Homomorphism between two finite action groups, stored as a label table."""

    source: FiniteActionGroup
    target: FiniteActionGroup
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.source.order:
            raise ValueError("table length must equal the source order")
        if self.table[0] != 0:
            raise ValueError("homomorphism must map identity to identity")
        for a in range(self.source.order):
            for b in range(self.source.order):
                lhs = self.table[self.source.multiply(a, b)]
                rhs = self.target.multiply(self.table[a], self.table[b])
                if lhs != rhs:
                    raise ValueError(
                        f"not a homomorphism: table(a*b) != table(a)*table(b) "
                        f"at a={a}, b={b}")

    def __call__(self, label: int) -> int:
        return self.table[label]

    def matrix(self, label: int) -> np.ndarray:
        return self.target.matrix(self.table[label])

    @property
    def is_identity(self) -> bool:
        """True when every source element maps to the same matrix in the target."""
        return all(
            float(np.abs(self.source.matrix(a) - self.matrix(a)).max()) < EPS_GRP
            for a in range(self.source.order))

    def compose(self, inner: "GroupHom") -> "GroupHom":
        """self o inner."""
        return GroupHom(inner.source, self.target,
                        tuple(self.table[inner.table[a]]
                              for a in range(inner.source.order)))

    @staticmethod
    def identity(group: FiniteActionGroup) -> "GroupHom":
        return GroupHom(group, group, tuple(range(group.order)))

    @staticmethod
    def inclusion(sub: FiniteActionGroup, ambient: FiniteActionGroup) -> "GroupHom":
        """Inclusion of a subgroup carrying parent labels into its parent."""
        if sub.parent_labels is None:
            labels = []
            for a in range(sub.order):
                lab = ambient.find(sub.matrix(a))
                if lab is None:
                    raise ValueError("subgroup element not found in ambient group")
                labels.append(lab)
            return GroupHom(sub, ambient, tuple(labels))
        return GroupHom(sub, ambient, tuple(sub.parent_labels))


def inner_automorphisms(group: FiniteActionGroup) -> tuple[GroupHom, ...]:
    """All distinct conjugation maps d -> g d g^-1.

    The count always equals |G| / |center(G)|.
    """
    seen: dict[tuple[int, ...], GroupHom] = {}
    for g in range(group.order):
        table = tuple(group.conjugate(g, d) for d in range(group.order))
        if table not in seen:
            seen[table] = GroupHom(group, group, table)
    autos = tuple(seen.values())
    expected = group.order // center(group).order
    if len(autos) != expected:
        raise AssertionError(
            f"inner automorphism count {len(autos)} != |G|/|Z(G)| = {expected}")
    return autos


def fixed_subspace(group: FiniteActionGroup, tol: float = EPS_GRP) -> np.ndarray:
    """Orthonormal basis (rows) of the joint fixed subspace of all elements.

    Computed as the numerical nullspace of the stacked (g - I) blocks;
    singular values below tol count as zero.  Shape (k, n) with k possibly 0.
    """
    n = group.dimension
    blocks = np.concatenate([group.matrix(a) - np.eye(n)
                             for a in range(group.order)], axis=0)
    _, svals, vt = np.linalg.svd(blocks)
    svals = np.concatenate([svals, np.zeros(n - svals.size)])
    return vt[svals < tol]


def stabilizer(group: FiniteActionGroup, point: np.ndarray,
               tol: float = EPS_GRP) -> FiniteActionGroup:
    """Isotropy subgroup of a point: elements moving it less than tol."""
    x = np.asarray(point, dtype=float)
    moved = np.abs(group.matrices @ x - x).max(axis=1)
    return group.subgroup(np.nonzero(moved < tol)[0])


def orbit(group: FiniteActionGroup, point: np.ndarray,
          tol: float = EPS_GRP) -> np.ndarray:
    """Deduplicated orbit of a point, rows sorted lexicographically."""
    pts = group.matrices @ np.asarray(point, dtype=float)
    keep: list[np.ndarray] = []
    for p in pts:
        if not any(np.abs(p - q).max() < tol for q in keep):
            keep.append(p)
    keep.sort(key=_snap_key)
    return np.stack(keep)


def canonical_orbit_representative(group: FiniteActionGroup,
                                   point: np.ndarray) -> np.ndarray:
    """Lexicographically least orbit member under coordinatewise comparison."""
    return orbit(group, point)[0]


# -- linearization of nonlinear actions -------------------------------------

@dataclass(frozen=True)
class NonlinearActionSample:
    """A smooth finite action on a chart ball, given per-label.

    ``group`` supplies the abstract structure (labels, Cayley table); ``maps``
    are the nonlinear chart maps fixing the origin and ``linearizations`` their
    Jacobians at 0.
    """

    group: FiniteActionGroup
    maps: tuple[Callable[[np.ndarray], np.ndarray], ...]
    linearizations: tuple[np.ndarray, ...]
    radius: float = 1.0

    def __post_init__(self):
        if len(self.maps) != self.group.order or \
                len(self.linearizations) != self.group.order:
            raise ValueError("maps and linearizations must cover every label")
        origin = np.zeros(self.group.dimension)
        for lab in range(self.group.order):
            val = np.asarray(self.maps[lab](origin), dtype=float)
            if float(np.abs(val).max(initial=0.0)) > 1e-12:
                raise ValueError(f"map for label {lab} does not fix the origin")
            jac = fd_jacobian(self.maps[lab], origin)
            if float(np.abs(jac - self.linearizations[lab]).max()) > FD_TOL:
                raise ValueError(
                    f"linearization for label {lab} does not match the FD Jacobian")


@dataclass(frozen=True)
class LinearizationResult:
    """Averaged chart map together with its verification residuals."""

    chart_map: Callable[[np.ndarray], np.ndarray]
    conjugacy_residual: float
    differential_residual: float
    sample_count: int


def linearize_action(action: NonlinearActionSample,
                     sample_points: np.ndarray) -> LinearizationResult:
    """Averaging construction conjugating a smooth action to its linear part.

    F(y) = (1/|G|) sum_g L_g (g^-1 . y).  The report carries the worst
    conjugacy defect max |F(g.y) - L_g F(y)| over samples and elements, and
    the FD distance of dF(0) from the identity.
    """
    samples = np.atleast_2d(np.asarray(sample_points, dtype=float))
    if float(np.linalg.norm(samples, axis=1).max()) >= action.radius:
        raise SampleOutOfChart("sample points must lie inside the chart ball")
    group = action.group

    def chart_map(y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        acc = np.zeros_like(y)
        for lab in range(group.order):
            inv = group.inverse(lab)
            acc = acc + action.linearizations[lab] @ np.asarray(action.maps[inv](y))
        return acc / group.order

    conj = 0.0
    for lab in range(group.order):
        lin = action.linearizations[lab]
        for y in samples:
            lhs = chart_map(np.asarray(action.maps[lab](y), dtype=float))
            rhs = lin @ chart_map(y)
            conj = max(conj, float(np.abs(lhs - rhs).max()))
    dres = float(np.abs(fd_jacobian(chart_map, np.zeros(group.dimension))
                        - np.eye(group.dimension)).max())
    return LinearizationResult(chart_map, conj, dres, len(samples))


# -- common construction helpers ---------------------------------------------

def rotation_2d(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def reflection_2d(axis_angle: float = 0.0) -> np.ndarray:
    """Reflection across the line at the given angle to the x-axis."""
    c, s = np.cos(2 * axis_angle), np.sin(2 * axis_angle)
    return np.array([[c, s], [s, -c]])


def rotation_about_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def cyclic_rotation_group(p: int) -> FiniteActionGroup:
    """Z_p acting on the plane by rotation through 2 pi / p."""
    return generate_group([rotation_2d(2.0 * np.pi / p)], max_order=p)


def dihedral_group(p: int) -> FiniteActionGroup:
    """Dihedral group of order 2p in O(2)."""
    return generate_group([rotation_2d(2.0 * np.pi / p), reflection_2d(0.0)],
                          max_order=2 * p)


def sign_flip_group() -> FiniteActionGroup:
    """Z_2 acting on the line by x -> -x."""
    return generate_group([np.array([[-1.0]])], max_order=2)


def football_rotation_group(p: int) -> FiniteActionGroup:
    """Z_p acting on the 2-sphere by rotation about the z-axis."""
    return generate_group([rotation_about_z(2.0 * np.pi / p)], max_order=p)
