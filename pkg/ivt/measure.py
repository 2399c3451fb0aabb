"""
Discretized probability measures: piecewise-uniform masses on grid bins plus
explicit point masses, the sets they are evaluated on, and the distances,
quantiles and equal-measure splits every other module is built on.

All objects are immutable after construction; arrays are stored read-only.
"""

import logging
import math

import numpy as np

from . import errors as e
from .u import INPUT_TOL, INTERNAL_TOL

log = logging.getLogger(__name__)


def _frozen(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _check_edges(key, edges):
    if edges.ndim != 1 or len(edges) < 2:
        raise e.ValidationError(key, edges.tolist(), None,
                                message="need at least two edges")
    if not np.all(np.isfinite(edges)):
        raise e.ValidationError(key, edges.tolist(), None,
                                message="edges must be finite")
    if np.any(np.diff(edges) <= 0):
        raise e.ValidationError(key, edges.tolist(), None,
                                message="edges must be strictly increasing")


class GridDistribution(object):
    """
    A probability measure on [edges[0], edges[-1]]: `masses[i]` is spread
    uniformly over the bin [edges[i], edges[i+1]) and every atom puts its
    mass on a single location.

    :usage:
        dist = GridDistribution([0.0, 1.0, 3.0], [0.5, 0.5])
        quantile(dist, 0.75)  # 2.0
    """

    def __init__(self, edges, masses, atoms=()):
        self.edges = _frozen(edges)
        self.masses = _frozen(masses)
        _check_edges("edges", self.edges)
        if self.masses.shape != (len(self.edges) - 1,):
            raise e.ValidationError(
                "masses", self.masses.tolist(), None,
                message="expected %d masses" % (len(self.edges) - 1))
        if np.any(~np.isfinite(self.masses)) or np.any(self.masses < 0):
            raise e.NormalizationError("masses", float(np.min(self.masses)),
                                       message="negative mass")

        atoms = sorted((float(loc), float(mass)) for loc, mass in atoms)
        locs = [loc for loc, _ in atoms]
        if len(set(locs)) != len(locs):
            raise e.ValidationError("atoms", atoms, None,
                                    message="duplicate atom location")
        for loc, mass in atoms:
            if not self.edges[0] <= loc <= self.edges[-1]:
                raise e.ValidationError("atoms", loc, None,
                                        message="atom outside the edges")
            if not math.isfinite(mass) or mass < 0:
                raise e.NormalizationError("atoms", mass,
                                           message="negative mass")
        self.atom_locs = _frozen(locs)
        self.atom_masses = _frozen([mass for _, mass in atoms])

        self._cum = np.concatenate(([0.0], np.cumsum(self.masses)))
        self.total = float(self._cum[-1] + self.atom_masses.sum())
        if abs(self.total - 1.0) > INPUT_TOL:
            raise e.NormalizationError("masses", self.total)

    # Constructors

    @classmethod
    def uniform(cls, lo=0.0, hi=1.0, bins=1):
        edges = np.linspace(lo, hi, bins + 1)
        return cls(edges, np.full(bins, 1.0 / bins))

    @classmethod
    def point_mass(cls, loc):
        return cls([loc, loc + 1.0], [0.0], atoms=[(loc, 1.0)])

    @classmethod
    def from_weights(cls, edges, weights):
        """Normalize non-negative `weights` (e.g. counts) into masses."""
        weights = np.asarray(weights, dtype=float)
        return cls(edges, weights / weights.sum())

    @classmethod
    def discrete(cls, probs, locs=None):
        """A purely atomic law putting `probs[i]` on `locs[i]` (default i)."""
        probs = np.asarray(probs, dtype=float)
        if locs is None:
            locs = np.arange(len(probs), dtype=float)
        locs = np.asarray(locs, dtype=float)
        lo, hi = float(locs.min()), float(locs.max())
        if hi == lo:
            hi = lo + 1.0
        return cls([lo, hi], [0.0], atoms=zip(locs, probs))

    # Properties

    @property
    def atoms(self):
        return list(zip(self.atom_locs.tolist(), self.atom_masses.tolist()))

    @property
    def is_atomic(self):
        return bool(np.any(self.atom_masses > 0))

    @property
    def is_purely_atomic(self):
        return not np.any(self.masses > 0)

    @property
    def weights(self):
        """Atom masses for a purely atomic law, bin masses otherwise."""
        if len(self.atom_locs) and self.is_purely_atomic:
            return self.atom_masses
        return self.masses

    def positive_bins(self):
        return int(np.count_nonzero(self.masses > 0))

    # Distribution function

    def cdf(self, x):
        """P(X <= x), vectorized."""
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.edges, self._cum)
        if len(self.atom_locs):
            out = out + np.sum(
                np.where(self.atom_locs <= x[..., None], self.atom_masses, 0),
                axis=-1)
        return np.minimum(out / self.total, 1.0)

    def cdf_left(self, x):
        """P(X < x), vectorized."""
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.edges, self._cum)
        if len(self.atom_locs):
            out = out + np.sum(
                np.where(self.atom_locs < x[..., None], self.atom_masses, 0),
                axis=-1)
        return np.minimum(out / self.total, 1.0)

    def knots(self):
        """
        Sorted breakpoints of the distribution function with its left and
        right values there. Between consecutive knots the function is linear.
        """
        xs = np.union1d(self.edges, self.atom_locs)
        return xs, self.cdf_left(xs), self.cdf(xs)

    def measure(self, mset):
        """Mass of a MeasurableSet of half-open intervals."""
        total = 0.0
        for lo, hi in mset:
            total += float(self.cdf_left(hi) - self.cdf_left(lo))
        return total

    # Support

    def support(self):
        """Closed intervals (and degenerate atom intervals) carrying mass."""
        pieces = []
        for i in np.flatnonzero(self.masses > 0):
            lo, hi = float(self.edges[i]), float(self.edges[i + 1])
            if pieces and pieces[-1][1] == lo:
                pieces[-1] = (pieces[-1][0], hi)
            else:
                pieces.append((lo, hi))
        for loc, mass in self.atoms:
            if mass > 0:
                pieces.append((loc, loc))
        pieces.sort()
        merged = []
        for lo, hi in pieces:
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        return merged

    def support_bounds(self):
        support = self.support()
        return support[0][0], support[-1][1]

    def support_set(self):
        """The positive-mass bins as a MeasurableSet (atoms excluded)."""
        return MeasurableSet(
            (float(self.edges[i]), float(self.edges[i + 1]))
            for i in np.flatnonzero(self.masses > 0))

    def refine(self, points):
        """
        Insert extra edges, splitting bins in proportion to length. The
        measure is unchanged; only its grid gets finer.
        """
        points = np.asarray(points, dtype=float)
        inner = points[(points > self.edges[0]) & (points < self.edges[-1])]
        edges = np.union1d(self.edges, inner)
        masses = np.diff(np.interp(edges, self.edges, self._cum))
        return GridDistribution(edges, masses, self.atoms)

    def __eq__(self, other):
        if not isinstance(other, GridDistribution):
            return NotImplemented
        return (np.array_equal(self.edges, other.edges)
                and np.array_equal(self.masses, other.masses)
                and np.array_equal(self.atom_locs, other.atom_locs)
                and np.array_equal(self.atom_masses, other.atom_masses))

    def __repr__(self):
        return "GridDistribution(edges=%r, masses=%r, atoms=%r)" % (
            self.edges.tolist(), self.masses.tolist(), self.atoms)


def total_variation(a, b):
    """Total variation between two laws on the same grid and atoms."""
    if not (np.array_equal(a.edges, b.edges)
            and np.array_equal(a.atom_locs, b.atom_locs)):
        raise ValueError("total variation needs identical grids")
    return 0.5 * float(np.abs(a.masses - b.masses).sum()
                       + np.abs(a.atom_masses - b.atom_masses).sum())


class MeasurableSet(object):
    """
    A finite disjoint union of half-open intervals [lo, hi). Touching
    intervals are merged, so equal sets have equal representations.
    """

    def __init__(self, intervals=()):
        pieces = sorted((float(lo), float(hi)) for lo, hi in intervals
                        if hi > lo)
        merged = []
        for lo, hi in pieces:
            if merged and lo < merged[-1][1]:
                raise ValueError("intervals overlap at %r" % lo)
            if merged and lo == merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
            else:
                merged.append((lo, hi))
        self.intervals = tuple(merged)

    @classmethod
    def interval(cls, lo, hi):
        return cls([(lo, hi)])

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __bool__(self):
        return bool(self.intervals)

    def __eq__(self, other):
        if not isinstance(other, MeasurableSet):
            return NotImplemented
        return self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return "MeasurableSet(%r)" % (list(self.intervals),)

    @property
    def bounds(self):
        return self.intervals[0][0], self.intervals[-1][1]

    def contains(self, x):
        return any(lo <= x < hi for lo, hi in self.intervals)

    def below(self, t):
        """The part of the set strictly left of t."""
        return MeasurableSet((lo, min(hi, t)) for lo, hi in self.intervals
                             if lo < t)

    def above(self, t):
        """The part of the set at or right of t."""
        return MeasurableSet((max(lo, t), hi) for lo, hi in self.intervals
                             if hi > t)

    def intersect(self, other):
        out = []
        for lo, hi in self.intervals:
            for olo, ohi in other.intervals:
                a, b = max(lo, olo), min(hi, ohi)
                if b > a:
                    out.append((a, b))
        return MeasurableSet(out)

    def union(self, other):
        return MeasurableSet(self.intervals + other.intervals)

    def to_list(self):
        return [list(pair) for pair in self.intervals]


class CouplingMatrix(object):
    """
    A transport plan between two laws. Row and column sums must reproduce
    the marginals' weights (atom masses for discrete laws).
    """

    def __init__(self, row, column, plan):
        self.row = row
        self.column = column
        self.plan = _frozen(plan)
        if self.plan.shape != (len(row.weights), len(column.weights)):
            raise ValueError("plan shape %r does not fit the marginals"
                             % (self.plan.shape,))
        if np.any(self.plan < -INPUT_TOL):
            raise e.NormalizationError("plan", float(self.plan.min()),
                                       message="negative mass")
        if np.max(np.abs(self.plan.sum(axis=1) - row.weights)) > INPUT_TOL:
            raise e.ValidationError("plan", "rows", None,
                                    message="row sums differ from marginal")
        if np.max(np.abs(self.plan.sum(axis=0) - column.weights)) > INPUT_TOL:
            raise e.ValidationError("plan", "columns", None,
                                    message="column sums differ from marginal")

    @property
    def diagonal_mass(self):
        """Mass on pairs with equal index, i.e. g(z1,u) == g(z2,u)."""
        return float(np.trace(self.plan))

    def to_list(self):
        return self.plan.tolist()


class BivariateGrid(object):
    """
    A 2-D grid measure over (Y, X): `mass[i, j]` sits uniformly on the cell
    [y_edges[i], y_edges[i+1]) x [x_edges[j], x_edges[j+1]).
    """

    def __init__(self, y_edges, x_edges, mass):
        self.y_edges = _frozen(y_edges)
        self.x_edges = _frozen(x_edges)
        self.mass = _frozen(mass)
        _check_edges("y_edges", self.y_edges)
        _check_edges("x_edges", self.x_edges)
        shape = (len(self.y_edges) - 1, len(self.x_edges) - 1)
        if self.mass.shape != shape:
            raise e.ValidationError("mass", list(self.mass.shape), None,
                                    message="expected shape %r" % (shape,))
        if np.any(~np.isfinite(self.mass)) or np.any(self.mass < 0):
            raise e.NormalizationError("mass", float(np.min(self.mass)),
                                       message="negative mass")
        total = math.fsum(self.mass.ravel())
        if abs(total - 1.0) > INPUT_TOL:
            raise e.NormalizationError("mass", total)

    @staticmethod
    def _centres(edges):
        return 0.5 * (edges[:-1] + edges[1:])

    def x_marginal(self, discrete=False):
        masses = self.mass.sum(axis=0)
        if discrete:
            return GridDistribution.discrete(masses,
                                             self._centres(self.x_edges))
        return GridDistribution(self.x_edges, masses)

    def y_marginal(self, discrete=False):
        masses = self.mass.sum(axis=1)
        if discrete:
            return GridDistribution.discrete(masses,
                                             self._centres(self.y_edges))
        return GridDistribution(self.y_edges, masses)

    def y_given_x(self, j):
        """Law of Y on the x-bin j; the y-marginal where that bin is empty."""
        column = self.mass[:, j]
        weight = column.sum()
        if weight <= 0:
            return self.y_marginal()
        return GridDistribution(self.y_edges, column / weight)

    def same_grid(self, other):
        return (np.array_equal(self.y_edges, other.y_edges)
                and np.array_equal(self.x_edges, other.x_edges))

    def tv(self, other):
        if not self.same_grid(other):
            raise ValueError("total variation needs identical grids")
        return 0.5 * float(np.abs(self.mass - other.mass).sum())

    def __eq__(self, other):
        if not isinstance(other, BivariateGrid):
            return NotImplemented
        return self.same_grid(other) and np.array_equal(self.mass, other.mass)

    def __repr__(self):
        return "BivariateGrid(%d x %d)" % self.mass.shape


def check_z_grid(z_grid):
    z_grid = _frozen(z_grid)
    if z_grid.ndim != 1 or len(z_grid) == 0:
        raise e.ValidationError("z_grid", z_grid.tolist(), None,
                                message="need at least one z value")
    if np.any(np.diff(z_grid) <= 0):
        raise e.ValidationError("z_grid", z_grid.tolist(), None,
                                message="must be strictly increasing")
    return z_grid


def assign_z_cells(z_grid, pz):
    """
    Name the pz cell of every z-grid point as (kind, lo, hi, mass): the atom
    at that location if there is one, otherwise the bin containing it. Every
    cell of `pz` with positive mass must be named exactly once.
    """
    atoms = dict(pz.atoms)
    seen = set()
    cells = []
    for index, z in enumerate(np.asarray(z_grid, dtype=float).tolist()):
        if z in atoms:
            key = ("atom", z)
            cell = ("atom", z, z, atoms[z] / pz.total)
        else:
            if not pz.edges[0] <= z <= pz.edges[-1]:
                raise e.ValidationError(
                    "z_grid[%d]" % index, z, None,
                    message="outside the support of pz")
            j = min(int(np.searchsorted(pz.edges, z, side="right")) - 1,
                    len(pz.masses) - 1)
            key = ("bin", j)
            cell = ("bin", float(pz.edges[j]), float(pz.edges[j + 1]),
                    float(pz.masses[j]) / pz.total)
        if key in seen:
            raise e.ValidationError(
                "z_grid[%d]" % index, z, None,
                message="two z-grid points share one pz cell")
        seen.add(key)
        cells.append(cell)
    for j in np.flatnonzero(pz.masses > 0):
        if ("bin", int(j)) not in seen:
            raise e.ValidationError(
                "pz.masses[%d]" % j, float(pz.masses[j]), None,
                message="bin with mass has no z-grid point")
    for loc, mass in atoms.items():
        if mass > 0 and ("atom", loc) not in seen:
            raise e.ValidationError(
                "pz.atoms", loc, None,
                message="atom with mass has no z-grid point")
    return tuple(cells)


def point_pz(z_grid, weights=None):
    """
    Non-atomic P_Z with one bin around each z value; bin edges sit half way
    between neighbours.
    """
    z = np.asarray(z_grid, dtype=float)
    if len(z) == 1:
        edges = np.array([z[0] - 0.5, z[0] + 0.5])
    else:
        mids = 0.5 * (z[:-1] + z[1:])
        edges = np.concatenate(([z[0] - (mids[0] - z[0])], mids,
                                [z[-1] + (z[-1] - mids[-1])]))
    if weights is None:
        weights = np.ones(len(z))
    return GridDistribution.from_weights(edges, weights)


def atom_pz(z_grid, weights=None):
    """Purely atomic P_Z on the z values."""
    z = np.asarray(z_grid, dtype=float)
    if weights is None:
        weights = np.ones(len(z))
    weights = np.asarray(weights, dtype=float)
    return GridDistribution.discrete(weights / weights.sum(), z)


class JointLaw(object):
    """
    The observed P_{Y,X|Z} on a z-grid together with P_Z.

    Every z-grid point names one cell of `pz` (see `assign_z_cells`). When
    `discrete` is set the bins of each conditional are categories, and
    x-marginals are returned as atoms on the bin centres.
    """

    def __init__(self, z_grid, pz, conditionals, discrete=False):
        self.z_grid = check_z_grid(z_grid)
        self.pz = pz
        self.conditionals = tuple(conditionals)
        self.discrete = bool(discrete)
        if len(self.conditionals) != len(self.z_grid):
            raise e.ValidationError(
                "conditionals", len(self.conditionals), None,
                message="expected one per z-grid point (%d)"
                % len(self.z_grid))
        self.cells = assign_z_cells(self.z_grid, pz)

    # Constructors

    @classmethod
    def from_points(cls, z_grid, conditionals, weights=None, discrete=False):
        return cls(z_grid, point_pz(z_grid, weights), conditionals,
                   discrete=discrete)

    @classmethod
    def from_atoms(cls, z_grid, conditionals, weights=None, discrete=False):
        return cls(z_grid, atom_pz(z_grid, weights), conditionals,
                   discrete=discrete)

    # Views

    def __len__(self):
        return len(self.z_grid)

    def x_marginals(self):
        return [c.x_marginal(self.discrete) for c in self.conditionals]

    def y_marginals(self):
        return [c.y_marginal(self.discrete) for c in self.conditionals]

    def z_masses(self):
        return np.array([cell[3] for cell in self.cells])

    def is_atom(self, index):
        return self.cells[index][0] == "atom"

    def z_set(self, index):
        """The pz bin of a non-atomic z-grid point as a MeasurableSet."""
        kind, lo, hi, _ = self.cells[index]
        if kind == "atom":
            return None
        return MeasurableSet.interval(lo, hi)

    def atom_indices(self):
        return [i for i in range(len(self)) if self.is_atom(i)]

    def nonatomic_indices(self):
        return [i for i in range(len(self)) if not self.is_atom(i)]

    def locate(self, z):
        """Index of the z-grid point whose pz cell holds z."""
        for index, (kind, lo, hi, _) in enumerate(self.cells):
            if kind == "atom" and z == lo:
                return index
        for index, (kind, lo, hi, _) in enumerate(self.cells):
            last = hi == self.pz.edges[-1]
            if kind == "bin" and (lo <= z < hi or (last and z == hi)):
                return index
        raise ValueError("z=%r lies in no cell of the law" % z)

    def __eq__(self, other):
        if not isinstance(other, JointLaw):
            return NotImplemented
        return (np.array_equal(self.z_grid, other.z_grid)
                and self.pz == other.pz
                and self.discrete == other.discrete
                and self.conditionals == other.conditionals)

    def __repr__(self):
        return "JointLaw(z_grid=%r, discrete=%r)" % (
            self.z_grid.tolist(), self.discrete)


# Operations


def _invert(dist, p, strict):
    xs, f_left, f_right = dist.knots()
    p = np.asarray(p, dtype=float)
    k = np.searchsorted(f_right, p, side="right" if strict else "left")
    k = np.clip(k, 0, len(xs) - 1)
    prev = np.maximum(k - 1, 0)
    lo_f, hi_f = f_right[prev], f_left[k]
    if strict:
        inside = (k > 0) & (hi_f > p)
    else:
        inside = (k > 0) & (hi_f >= p)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(inside, (p - lo_f) / np.where(inside, hi_f - lo_f, 1),
                        0.0)
    out = np.where(inside, xs[prev] + frac * (xs[k] - xs[prev]), xs[k])
    return out


def quantile(dist, p):
    """
    Generalized inverse inf{x : F(x) >= p}; linear within a bin since bins
    spread their mass uniformly. Accepts scalars or arrays.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise ValueError("quantile level outside [0, 1]: %r" % (p,))
    out = _invert(dist, arr, strict=False)
    return float(out) if out.ndim == 0 else out


def quantile_right(dist, p):
    """Right-continuous inverse inf{x : F(x) > p}."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0) & (arr <= 1))):
        raise ValueError("quantile level outside [0, 1]: %r" % (p,))
    out = _invert(dist, arr, strict=True)
    return float(out) if out.ndim == 0 else out


def split_equal_measure(dist, mset):
    """
    Split `mset` at the smallest point t for which the part left of t
    carries exactly half of the set's mass. A cut inside a bin refines the
    grid there; no mass is approximated.
    """
    for loc, mass in dist.atoms:
        if mass > 0 and mset.contains(loc):
            raise e.AtomicityError("equal-measure split", location=loc)

    measures = [float(dist.cdf_left(hi) - dist.cdf_left(lo))
                for lo, hi in mset]
    total = math.fsum(measures)
    if total <= INTERNAL_TOL:
        raise ValueError("cannot split a set of measure %r" % total)
    half = total / 2.0

    cut = mset.bounds[1]
    before = 0.0
    for (lo, hi), mass in zip(mset, measures):
        if mass > 0 and before + mass >= half:
            target = min(float(dist.cdf_left(lo)) + (half - before), 1.0)
            cut = min(max(quantile(dist, target), lo), hi)
            break
        before += mass

    log.debug("split %r at %r (half measure %r)", mset, cut, half)
    return mset.below(cut), mset.above(cut)


def _shared_knots(a, b):
    return np.union1d(a.knots()[0], b.knots()[0])


def cdf_distance_sup(a, b):
    """Kolmogorov-Smirnov distance sup |F_a - F_b| over the refined edges."""
    xs = _shared_knots(a, b)
    right = np.abs(a.cdf(xs) - b.cdf(xs))
    left = np.abs(a.cdf_left(xs) - b.cdf_left(xs))
    return float(max(right.max(), left.max()))


def _distance_to(x, intervals):
    lo = np.array([i[0] for i in intervals])
    hi = np.array([i[1] for i in intervals])
    gaps = np.maximum(np.maximum(lo[None, :] - x[:, None],
                                 x[:, None] - hi[None, :]), 0.0)
    return gaps.min(axis=1)


def _directed_hausdorff(source, target):
    candidates = [pt for lo, hi in source for pt in (lo, hi)]
    # the distance to the target peaks at the middle of its gaps
    for (_, gap_lo), (gap_hi, _) in zip(target[:-1], target[1:]):
        mid = 0.5 * (gap_lo + gap_hi)
        if any(lo <= mid <= hi for lo, hi in source):
            candidates.append(mid)
    return float(_distance_to(np.array(candidates), target).max())


def hausdorff_support_distance(a, b):
    """Hausdorff distance between the positive-mass supports of a and b."""
    sa, sb = a.support(), b.support()
    if not sa or not sb:
        raise ValueError("Hausdorff distance needs non-empty supports")
    return max(_directed_hausdorff(sa, sb), _directed_hausdorff(sb, sa))


def probability_knots(*dists):
    """Every value the distribution functions of `dists` take at a knot."""
    levels = [np.array([0.0, 1.0])]
    for dist in dists:
        _, f_left, f_right = dist.knots()
        levels += [f_left, f_right]
    return np.unique(np.clip(np.concatenate(levels), 0.0, 1.0))


def winf_distance(a, b):
    """
    sup over p in (0, 1) of |Q_a(p) - Q_b(p)|: the smallest almost-sure bound
    on |X_a - X_b| over all couplings, attained by the quantile coupling.
    Both quantile functions are linear between the merged probability
    knots, so the supremum is read off the one-sided limits there.
    """
    ps = probability_knots(a, b)
    right_ends = ps[1:]
    left_ends = ps[:-1]
    gap_left = np.abs(quantile_right(a, left_ends)
                      - quantile_right(b, left_ends))
    gap_right = np.abs(quantile(a, right_ends) - quantile(b, right_ends))
    return float(max(gap_left.max(), gap_right.max()))


def fosd_violation(lower, upper):
    """
    Largest amount by which F_upper exceeds F_lower; zero when `upper`
    first-order stochastically dominates `lower`.
    """
    xs = _shared_knots(lower, upper)
    right = upper.cdf(xs) - lower.cdf(xs)
    left = upper.cdf_left(xs) - lower.cdf_left(xs)
    return float(max(right.max(), left.max(), 0.0))


def fosd_check(lower, upper, tol=0.0):
    """True iff F_upper(x) <= F_lower(x) + tol at every refined edge."""
    return fosd_violation(lower, upper) <= tol
