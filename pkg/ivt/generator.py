"""
One-to-one generators g(z, u) for a family of conditional x-laws.

A generator starts from the base quantile map u -> Q_{X|Z=z}(u) and cuts the
unit interval of u into `arity ** depth` equal cells. Every z-cell of the
partition tree carries a permutation of those cells; because all cells have
equal mass, relabelling them never changes the law of g(z, U), only which u
lands where. The tree is built breadth first by splitting every z-set into
two halves of equal P_Z mass and relabelling the first half, so that z's in
different halves stop sharing values.

:usage:
    family = MarginalFamily.from_joint(joint)
    gen = build_generator(family, depth=6)
    model = compose_structural_model(joint, gen)
    verify_replication(model, joint)  # 0.0
"""

import logging
from collections import namedtuple

import numpy as np

from . import errors as e
from . import measure as m
from .u import INPUT_TOL, snap

log = logging.getLogger(__name__)

ZCell = namedtuple("ZCell", "address index")


class MarginalFamily(object):
    """
    The x-marginals P_{X|Z=z} on a z-grid together with P_Z: everything a
    generator needs from the observed law.
    """

    def __init__(self, z_grid, pz, marginals):
        self.z_grid = m.check_z_grid(z_grid)
        self.pz = pz
        self.marginals = tuple(marginals)
        if len(self.marginals) != len(self.z_grid):
            raise e.ValidationError(
                "marginals", len(self.marginals), None,
                message="expected one per z-grid point (%d)"
                % len(self.z_grid))
        self.cells = m.assign_z_cells(self.z_grid, pz)

    @classmethod
    def from_joint(cls, joint):
        return cls(joint.z_grid, joint.pz, joint.x_marginals())

    @classmethod
    def from_points(cls, z_grid, marginals, weights=None):
        return cls(z_grid, m.point_pz(z_grid, weights), marginals)

    def __len__(self):
        return len(self.z_grid)

    def atom_cells(self):
        """(index, location, mass) of every z-grid point sitting on an atom."""
        return [(i, lo, mass) for i, (kind, lo, _, mass) in
                enumerate(self.cells) if kind == "atom"]

    def bin_cells(self):
        return [(i, lo, hi, mass) for i, (kind, lo, hi, mass) in
                enumerate(self.cells) if kind == "bin"]

    def bin_set(self):
        return m.MeasurableSet((lo, hi) for _, lo, hi, _ in self.bin_cells())

    def continuous_pz(self):
        """
        The non-atomic part of P_Z, renormalized, and its total mass. None
        when P_Z is purely atomic.
        """
        bin_mass = float(self.pz.masses.sum()) / self.pz.total
        if bin_mass <= 0:
            return None, 0.0
        return m.GridDistribution.from_weights(self.pz.edges,
                                               self.pz.masses), bin_mass


def _as_family(obj):
    if isinstance(obj, MarginalFamily):
        return obj
    if isinstance(obj, m.JointLaw):
        return MarginalFamily.from_joint(obj)
    raise TypeError("expected a JointLaw or MarginalFamily, got %r"
                    % type(obj).__name__)


def _shift_digit(perm, arity, depth, level, shift):
    """
    Relabel the u-cells of `perm` by adding `shift` (mod arity) to their
    base-`arity` digit at `level`. Level 1 is the most significant digit.
    """
    if shift % arity == 0:
        return perm
    index = np.arange(len(perm))
    weight = arity ** (depth - level)
    digit = (index // weight) % arity
    return perm[index + ((digit + shift) % arity - digit) * weight]


class PartitionNode(object):
    """
    One z-set of the partition tree. `perm` sends u-cell j to quantile cell
    perm[j] for every z in `z_set` (or at `atom`).
    """

    def __init__(self, address, level, z_set, perm, arity, depth, atom=None):
        self.address = address
        self.level = level
        self.z_set = z_set
        self.perm = np.asarray(perm, dtype=int)
        self.perm.setflags(write=False)
        self.arity = arity
        self.depth = depth
        self.atom = atom

    @property
    def is_atom(self):
        return self.atom is not None

    @property
    def is_leaf(self):
        return self.is_atom or self.level == self.depth

    @property
    def group(self):
        """Top-level group: an atom, or one of the two first halves."""
        return self.symbols[0] if self.address else ""

    @property
    def symbols(self):
        """Child symbols from the root down, one per level."""
        if self.arity > 9:
            return self.address.split(".")
        return list(self.address)

    def u_cells(self):
        count = self.arity ** self.level
        return [m.MeasurableSet.interval(i / count, (i + 1) / count)
                for i in range(count)]

    def x_cells(self, marginal):
        """
        Images of the node's u-cells in x under `marginal`: cell i goes to
        the quantile range of the level cell it is relabelled to.
        """
        count = self.arity ** self.level
        block = len(self.perm) // count
        out = []
        for i in range(count):
            k = int(self.perm[i * block]) // block
            lo = m.quantile(marginal, k / count)
            hi = m.quantile(marginal, (k + 1) / count)
            out.append(m.MeasurableSet.interval(lo, hi))
        return out

    def child(self, digit, z_set, shift):
        perm = _shift_digit(self.perm, self.arity, self.depth, self.level + 1,
                            shift)
        # past nine symbols a level, addresses are dot-joined
        sep = "." if self.arity > 9 and self.address else ""
        return PartitionNode(self.address + sep + digit, self.level + 1,
                             z_set, perm, self.arity, self.depth)

    def __repr__(self):
        where = self.atom if self.is_atom else self.z_set
        return "PartitionNode(%r, level=%d, %r)" % (
            self.address or "root", self.level, where)


Piece = namedtuple("Piece", "node index weight z_set")


class GeneratorMap(object):
    """
    The constructed g(z, u): the full partition tree plus, for evaluation,
    the pieces (leaf z-set intersected with one z-grid cell) on which g has
    a single permutation and a single conditional.
    """

    def __init__(self, family, depth, arity, nodes):
        self.family = family
        self.depth = depth
        self.arity = arity
        self.size = arity ** depth
        self.nodes = tuple(nodes)
        self.leaves = tuple(node for node in self.nodes if node.is_leaf)
        identity = np.arange(self.size)
        for node in self.leaves:
            if not np.array_equal(np.sort(node.perm), identity):
                raise e.ValidationError(
                    "perm", node.address, None,
                    message="not a permutation of %d cells" % self.size)
        self.pieces = tuple(self._cut_pieces())
        self._index_pieces()

    def _cut_pieces(self):
        family = self.family
        cont, cont_mass = family.continuous_pz()
        atoms = {loc: (i, mass) for i, loc, mass in family.atom_cells()}
        bins = family.bin_cells()
        for node in self.leaves:
            if node.is_atom:
                index, mass = atoms[node.atom]
                yield Piece(node, index, mass, None)
                continue
            for index, lo, hi, _ in bins:
                part = node.z_set.intersect(m.MeasurableSet.interval(lo, hi))
                if part:
                    weight = cont.measure(part) * cont_mass if cont else 0.0
                    yield Piece(node, index, weight, part)

    def _index_pieces(self):
        self.weights = np.array([p.weight for p in self.pieces])
        groups = sorted(set(p.node.group for p in self.pieces))
        self.group_ids = np.array([groups.index(p.node.group)
                                   for p in self.pieces])
        self.atom_mask = np.array([p.node.is_atom for p in self.pieces])
        self._atoms = {p.node.atom: k for k, p in enumerate(self.pieces)
                       if p.node.is_atom}
        spans = sorted((lo, hi, k) for k, p in enumerate(self.pieces)
                       if not p.node.is_atom for lo, hi in p.z_set)
        self._span_lo = np.array([s[0] for s in spans])
        self._span_hi = np.array([s[1] for s in spans])
        self._span_piece = np.array([s[2] for s in spans], dtype=int)

    @property
    def permutations(self):
        return {node.address: node.perm for node in self.leaves}

    def with_permutations(self, perms):
        """A copy whose leaves carry the given permutations instead."""
        nodes = []
        for node in self.nodes:
            perm = perms.get(node.address, node.perm) if node.is_leaf \
                else node.perm
            nodes.append(PartitionNode(node.address, node.level, node.z_set,
                                       perm, node.arity, node.depth,
                                       atom=node.atom))
        return GeneratorMap(self.family, self.depth, self.arity, nodes)

    def cell_of(self, u):
        u = np.asarray(u, dtype=float)
        return np.minimum((u * self.size).astype(int), self.size - 1)

    def levels(self, piece, u):
        """Quantile levels g uses at u for the z's of `piece`."""
        u = np.asarray(u, dtype=float)
        cell = self.cell_of(u)
        frac = np.clip(u * self.size - cell, 0.0, 1.0)
        return (piece.node.perm[cell] + frac) / self.size

    def piece_values(self, piece, u):
        marginal = self.family.marginals[piece.index]
        return m.quantile(marginal, self.levels(piece, u))

    def locate(self, z):
        """Index into `pieces` of the piece holding each z."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        out = np.empty(len(z), dtype=int)
        for k, value in enumerate(z.tolist()):
            if value in self._atoms:
                out[k] = self._atoms[value]
                continue
            pos = int(np.searchsorted(self._span_lo, value, side="right")) - 1
            if pos < 0 or not (value < self._span_hi[pos] or (
                    value == self._span_hi[pos] == self._span_hi.max())):
                raise ValueError("z=%r lies in no cell of the generator"
                                 % value)
            out[k] = self._span_piece[pos]
        return out

    def __call__(self, z, u):
        z = np.asarray(z, dtype=float)
        u = np.broadcast_to(np.asarray(u, dtype=float), z.shape)
        where = self.locate(z.ravel())
        flat_u = u.ravel()
        out = np.empty(len(where))
        for k in np.unique(where):
            mask = where == k
            out[mask] = self.piece_values(self.pieces[k], flat_u[mask])
        return out.reshape(z.shape) if z.ndim else float(out[0])

    def pushforward(self, piece):
        """
        Exact x-bin masses of g(z, U) for z in `piece`: each u-cell carries
        1/size of mass onto its quantile range.
        """
        marginal = self.family.marginals[piece.index]
        levels = marginal.cdf(marginal.edges)
        lo = piece.node.perm / self.size
        hi = (piece.node.perm + 1) / self.size
        overlap = (np.minimum(hi[:, None], levels[None, 1:])
                   - np.maximum(lo[:, None], levels[None, :-1]))
        return np.maximum(overlap, 0.0).sum(axis=0)

    def __repr__(self):
        return "GeneratorMap(depth=%d, arity=%d, leaves=%d)" % (
            self.depth, self.arity, len(self.leaves))


# Construction


def _require_nonatomic(family):
    for index, marginal in enumerate(family.marginals):
        if marginal.is_atomic:
            raise e.AtomicityError("x-marginal %d" % index,
                                   location=marginal.atoms[0][0])


def _grow(root, cont, depth, first, second):
    """Breadth-first equal-measure splitting of every node at every level."""
    nodes, frontier = [root], [root]
    for level in range(1, depth + 1):
        grown = []
        for node in frontier:
            low, high = m.split_equal_measure(cont, node.z_set)
            grown.append(node.child(first[0], low, first[1]))
            grown.append(node.child(second[0], high, second[1]))
        log.debug("level %d: %d z-cells", level, len(grown))
        nodes += grown
        frontier = grown
    return nodes


def _already_injective(family, arity, atoms):
    base = _assemble(family, 0, arity, atoms, relabel=False)
    return collision_fraction(base) == 0.0


def _assemble(family, depth, arity, atoms, relabel):
    size = arity ** depth
    identity = np.arange(size)
    nodes = []
    for j, (_, loc, _) in enumerate(atoms, start=1):
        perm = identity
        if relabel:
            for level in range(1, depth + 1):
                perm = _shift_digit(perm, arity, depth, level, j - 1)
        nodes.append(PartitionNode(str(j), min(depth, 1), None, perm,
                                   arity, depth, atom=loc))

    cont, _ = family.continuous_pz()
    if cont is not None:
        k = len(atoms)
        if atoms:
            shifts = (k, k + 1)
            digits = (str(k + 1), str(k + 2))
        else:
            shifts = (1, 0)
            digits = ("1", "2")
        if not relabel:
            shifts = (0, 0)
        root = PartitionNode("", 0, family.bin_set(), identity, arity, depth)
        nodes += _grow(root, cont, depth, (digits[0], shifts[0]),
                       (digits[1], shifts[1]))
    return GeneratorMap(family, depth, arity, nodes)


def build_generator(family, depth):
    """
    Build the dyadic generator for a family with non-atomic P_Z. At every
    level each z-cell is halved by P_Z mass and the first half swaps the two
    halves of every u-cell, so identical conditionals leave a collision
    fraction of exactly 2**-depth.
    """
    family = _as_family(family)
    if depth < 0:
        raise ValueError("depth must be non-negative, got %r" % depth)
    _require_nonatomic(family)
    atoms = family.atom_cells()
    if atoms:
        raise e.AtomicityError("P_Z (use build_generator_with_atoms)",
                               location=atoms[0][1])
    relabel = not _already_injective(family, 2, [])
    if not relabel:
        log.debug("base quantile map is already one-to-one")
    gen = _assemble(family, depth, 2, [], relabel)
    log.info("built generator: depth %d, %d z-cells", depth, len(gen.leaves))
    return gen


def build_generator_with_atoms(family, depth):
    """
    Build a generator for P_Z with k finitely many atoms. The u-cells are
    cut (k+2)-ways per level; atom j shifts every digit by j-1 and the two
    non-atomic halves shift by k and k+1, so no two of these groups ever
    share a value.
    """
    family = _as_family(family)
    if depth < 0:
        raise ValueError("depth must be non-negative, got %r" % depth)
    atoms = family.atom_cells()
    if not atoms:
        return build_generator(family, depth)
    _require_nonatomic(family)
    arity = len(atoms) + 2
    relabel = not _already_injective(family, arity, atoms)
    if not relabel:
        log.debug("base quantile map is already one-to-one")
    gen = _assemble(family, depth, arity, atoms, relabel)
    log.info("built generator with %d atoms: depth %d, %d z-cells",
             len(atoms), depth, len(gen.leaves))
    return gen


# Collisions


def collision_fraction(gen, z_pairs=None, u_resolution=None, seed=0,
                       cross_group=False):
    """
    Probability that two independent draws z1, z2 from P_Z and one u give
    g(z1, u) == g(z2, u), with u on a midpoint grid of `u_resolution` cells
    (default: the generator's own cells). Pairs drawing the same atom are the
    same z and never count. With `z_pairs` the z-pairs are sampled (seeded);
    otherwise every pair of pieces is enumerated exactly. `cross_group`
    counts only pairs from different top-level groups.
    """
    res = u_resolution or gen.size
    u = (np.arange(res) + 0.5) / res
    weights = gen.weights

    if z_pairs is not None:
        return _sampled_collisions(gen, z_pairs, u, seed, cross_group)

    values = np.vstack([gen.piece_values(p, u) for p in gen.pieces])
    n_groups = int(gen.group_ids.max()) + 1
    atom_self = float((weights[gen.atom_mask] ** 2).sum())
    total = 0.0
    for column in values.T:
        _, classes = np.unique(column, return_inverse=True)
        hit = float((np.bincount(classes, weights=weights) ** 2).sum())
        if cross_group:
            within = np.bincount(classes * n_groups + gen.group_ids,
                                 weights=weights)
            hit -= float((within ** 2).sum())
        else:
            hit -= atom_self
        total += hit
    return snap(total / res)


def _sampled_collisions(gen, z_pairs, grid, seed, cross_group):
    rng = np.random.default_rng(seed)
    probs = gen.weights / gen.weights.sum()
    first = rng.choice(len(gen.pieces), size=z_pairs, p=probs)
    second = rng.choice(len(gen.pieces), size=z_pairs, p=probs)
    u = rng.choice(grid, size=z_pairs)

    def values(which):
        out = np.empty(z_pairs)
        for k in np.unique(which):
            mask = which == k
            out[mask] = gen.piece_values(gen.pieces[k], u[mask])
        return out

    same = values(first) == values(second)
    same &= ~((first == second) & gen.atom_mask[first])
    if cross_group:
        same &= gen.group_ids[first] != gen.group_ids[second]
    return float(same.mean())


# Structural model


class StructuralModel(object):
    """
    X = g(Z, U) and Y = h'(X, Z, V') with (U, V') independent uniforms and
    Z drawn from P_Z on its own stream. `outcome` evaluates Y without z by
    recovering the z-cell from (x, u).
    """

    def __init__(self, generator, joint):
        self.generator = generator
        self.joint = joint
        self.u_law = m.GridDistribution.uniform()
        self.v_law = m.GridDistribution.uniform()
        self.independent = True
        self.outcome_maps = {
            (j, i): cond.y_given_x(j)
            for i, cond in enumerate(joint.conditionals)
            for j in range(len(cond.x_edges) - 1)}

    def x_bin(self, index, x):
        edges = self.joint.conditionals[index].x_edges
        j = np.searchsorted(edges, x, side="right") - 1
        return np.clip(j, 0, len(edges) - 2)

    def outcome_given_z(self, x, index, v):
        """h'(x, z, v'): the quantile of Y given the x-bin and the z-cell."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        v = np.broadcast_to(np.asarray(v, dtype=float), x.shape)
        bins = self.x_bin(index, x)
        out = np.empty(len(x))
        for j in np.unique(bins):
            mask = bins == j
            out[mask] = m.quantile(self.outcome_maps[(int(j), index)],
                                   v[mask])
        return out

    def outcome(self, x, u, v):
        """h(x, u, v') = h'(x, g^-1(x, u), v'); z never enters."""
        cell = invert_generator(self.generator, x, u)
        return float(self.outcome_given_z(x, cell.index, v)[0])

    def draw(self, z, u, v):
        """(y, x) for given z, u and v' arrays."""
        gen = self.generator
        z = np.asarray(z, dtype=float)
        x = gen(z, u)
        y = np.empty(len(z))
        indices = np.array([gen.pieces[k].index for k in gen.locate(z)])
        for i in np.unique(indices):
            mask = indices == i
            y[mask] = self.outcome_given_z(x[mask], int(i),
                                           np.asarray(v)[mask])
        return y, x

    def sample(self, n, seed):
        """
        n rows (y, x, z). (u, v') come off the generator before z is drawn
        and are never conditioned on it.
        """
        rng = np.random.default_rng(seed)
        u = rng.uniform(size=n)
        v = rng.uniform(size=n)
        z = m.quantile(self.joint.pz, rng.uniform(size=n))
        y, x = self.draw(z, u, v)
        return np.column_stack([y, x, z])

    def piece_law(self, piece):
        """Exact law of (Y, X) on a piece, pushed from the (u, v') square."""
        cond = self.joint.conditionals[piece.index]
        px = self.generator.pushforward(piece)
        columns = [px[j] * self.outcome_maps[(j, piece.index)].masses
                   for j in range(len(px))]
        return m.BivariateGrid(cond.y_edges, cond.x_edges,
                               np.column_stack(columns))

    def induced_law(self):
        """The JointLaw this model generates."""
        joint = self.joint
        pieces = {}
        for piece in self.generator.pieces:
            pieces.setdefault(piece.index, []).append(piece)
        conditionals = []
        for i, cond in enumerate(joint.conditionals):
            parts = pieces[i]
            weights = np.array([p.weight for p in parts])
            if weights.sum() <= 0:
                weights = np.ones(len(parts))
            weights = weights / weights.sum()
            mass = sum(w * self.piece_law(p).mass
                       for w, p in zip(weights, parts))
            conditionals.append(m.BivariateGrid(cond.y_edges, cond.x_edges,
                                                mass))
        return m.JointLaw(joint.z_grid, joint.pz, conditionals,
                          discrete=joint.discrete)


def compose_structural_model(joint, gen):
    """Pair a generator with the outcome quantile maps of `joint`."""
    family = gen.family
    if not np.array_equal(family.z_grid, joint.z_grid):
        raise e.ValidationError("z_grid", joint.z_grid.tolist(), None,
                                message="differs from the generator's")
    for index, (built, given) in enumerate(
            zip(family.marginals, joint.x_marginals())):
        distance = m.cdf_distance_sup(built, given)
        if distance > INPUT_TOL:
            raise e.MarginalMismatchError(index, distance)
    return StructuralModel(gen, joint)


def verify_replication(model, joint):
    """
    Largest total variation, over the pieces of every z-cell, between the
    law the model induces and the conditional in `joint`. No sampling.
    """
    worst = 0.0
    for piece in model.generator.pieces:
        induced = model.piece_law(piece)
        worst = max(worst, induced.tv(joint.conditionals[piece.index]))
    return snap(worst)


def _in_support(dist, x):
    return any(lo <= x <= hi for lo, hi in dist.support())


def invert_generator(gen, x, u):
    """
    The unique z-cell whose map sends u's cell to x's quantile cell. Raises
    NonInvertibleError when none or several pieces qualify.
    """
    cell = int(gen.cell_of(u))
    matches = []
    for piece in gen.pieces:
        marginal = gen.family.marginals[piece.index]
        if not _in_support(marginal, x):
            continue
        level = min(int(np.floor(float(marginal.cdf(x)) * gen.size)),
                    gen.size - 1)
        if piece.node.perm[cell] == level:
            matches.append(piece)
    if len(matches) != 1:
        raise e.NonInvertibleError(
            x, u, ["%s/%d" % (p.node.address or "root", p.index)
                   for p in matches])
    return ZCell(matches[0].node.address, matches[0].index)
