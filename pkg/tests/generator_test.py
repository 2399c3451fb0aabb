# pylint: disable-all
import numpy as np
import pytest

import ivt
from ivt import generator as g
from ivt import measure as m

from conftest import uniform_cell


def uniform(lo, hi):
    return m.GridDistribution([lo, hi], [1.0])


def identical_family():
    """One z-bin on [0, 1] carrying X ~ U[0,1]."""
    return g.MarginalFamily.from_points([0.5], [uniform(0, 1)])


def atomic_family(k):
    """k atoms at 2..k+1 next to a non-atomic bin on [0, 1]."""
    atoms = [(float(j), 0.6 / k) for j in range(2, k + 2)]
    pz = m.GridDistribution([0.0, 1.0, k + 1.0], [0.4, 0.0], atoms=atoms)
    z_grid = [0.5] + [loc for loc, _ in atoms]
    return g.MarginalFamily(z_grid, pz, [uniform(0, 1)] * len(z_grid))


@pytest.mark.parametrize("depth", range(0, 11))
def test_collision_fraction_halves_per_level(depth):
    gen = g.build_generator(identical_family(), depth)
    assert gen.size == 2 ** depth
    assert len(gen.leaves) == 2 ** depth
    assert g.collision_fraction(gen) == 2.0 ** -depth


def test_depth_one_table():
    gen = g.build_generator(identical_family(), 1)
    perms = {k: p.tolist() for k, p in gen.permutations.items()}
    assert perms == {"1": [1, 0], "2": [0, 1]}
    low, high = (node.z_set for node in gen.leaves)
    assert low == m.MeasurableSet.interval(0, 0.5)
    assert high == m.MeasurableSet.interval(0.5, 1)


def test_sampled_collisions_are_seeded():
    gen = g.build_generator(identical_family(), 3)
    first = g.collision_fraction(gen, z_pairs=20000, seed=3)
    assert first == g.collision_fraction(gen, z_pairs=20000, seed=3)
    assert first == pytest.approx(1 / 8, abs=0.01)


def test_sampled_collisions_stay_on_the_u_grid():
    # the marginals agree below u = 1/2 and part above it
    family = g.MarginalFamily.from_points(
        [0.25, 0.75],
        [uniform(0, 1), m.GridDistribution([0, 0.5, 2], [0.5, 0.5])])
    gen = g.build_generator(family, 0)
    assert g.collision_fraction(gen, u_resolution=1) == 1.0
    assert g.collision_fraction(gen, z_pairs=2000, u_resolution=1,
                                seed=4) == 1.0
    assert g.collision_fraction(gen, u_resolution=2) == 0.75
    assert g.collision_fraction(gen, z_pairs=20000, u_resolution=2,
                                seed=4) == pytest.approx(0.75, abs=0.02)


def test_partition_node_cells():
    gen = g.build_generator(identical_family(), 2)
    node = [n for n in gen.nodes if n.address == "1"][0]
    assert node.level == 1 and not node.is_leaf
    assert node.u_cells()[1] == m.MeasurableSet.interval(0.5, 1.0)
    # the first half sends the upper u-cell to the lower x-cell
    assert node.x_cells(uniform(0, 1))[1] == \
        m.MeasurableSet.interval(0.0, 0.5)


@pytest.mark.parametrize("k", [1, 2, 3, 9])
def test_atoms_never_collide_across_groups(k):
    gen = g.build_generator_with_atoms(atomic_family(k), 2)
    assert gen.arity == k + 2
    assert g.collision_fraction(gen, cross_group=True) == 0.0
    # within a non-atomic half, pairs still share values
    assert g.collision_fraction(gen) > 0.0


def test_one_atom_depth_one_table():
    gen = g.build_generator_with_atoms(atomic_family(1), 1)
    perms = {k: p.tolist() for k, p in gen.permutations.items()}
    assert perms["1"] == [0, 1, 2]
    assert len(set(map(tuple, perms.values()))) == len(perms)
    assert sorted(set(gen.group_ids.tolist())) == [0, 1, 2]


def test_many_atoms_use_dotted_addresses():
    gen = g.build_generator_with_atoms(atomic_family(9), 2)
    assert gen.arity == 11
    leaves = {node.address: node for node in gen.leaves}
    assert "9" in leaves and leaves["9"].is_atom
    assert {"10.10", "10.11", "11.10", "11.11"} <= set(leaves)
    assert leaves["10.11"].symbols == ["10", "11"]
    assert leaves["10.11"].group == "10"
    assert sorted(set(gen.group_ids.tolist())) == list(range(11))


def test_no_atoms_delegates():
    family = identical_family()
    built = g.build_generator_with_atoms(family, 3)
    plain = g.build_generator(family, 3)
    assert built.arity == 2
    for a, b in zip(built.leaves, plain.leaves):
        assert a.address == b.address
        assert np.array_equal(a.perm, b.perm)


def test_build_generator_refuses_atoms():
    with pytest.raises(ivt.e.AtomicityError):
        g.build_generator(atomic_family(1), 2)

    atomic_x = g.MarginalFamily.from_points(
        [0.5], [m.GridDistribution.point_mass(1.0)])
    with pytest.raises(ivt.e.AtomicityError):
        g.build_generator(atomic_x, 2)


def test_disjoint_supports_only_collide_within_cells():
    family = g.MarginalFamily.from_points([0.25, 0.75],
                                          [uniform(0, 1), uniform(2, 3)])
    gen = g.build_generator(family, 3)
    # z's from different bins never meet, z's from one leaf always do
    assert g.collision_fraction(gen) == 1 / 8


def test_injective_atoms_keep_identity():
    family = g.MarginalFamily([0.0, 1.0], m.atom_pz([0.0, 1.0]),
                              [uniform(0, 1), uniform(2, 3)])
    gen = g.build_generator_with_atoms(family, 2)
    for node in gen.leaves:
        assert node.perm.tolist() == list(range(16))
    assert g.collision_fraction(gen) == 0.0


def test_identity_collides_everywhere():
    gen = g.build_generator(identical_family(), 0)
    assert g.collision_fraction(gen) == 1.0


def test_generator_evaluation():
    family = g.MarginalFamily.from_points([0.25, 0.75],
                                          [uniform(0, 1), uniform(0, 1)])
    gen = g.build_generator(family, 1)
    assert gen(0.25, 0.2) == pytest.approx(0.7)
    assert gen(0.75, 0.2) == pytest.approx(0.2)
    values = gen(np.array([0.25, 0.75]), 0.2)
    assert values.tolist() == pytest.approx([0.7, 0.2])


def test_replication_is_exact(two_bin_joint):
    gen = g.build_generator(two_bin_joint, 6)
    model = g.compose_structural_model(two_bin_joint, gen)
    assert model.independent
    assert g.verify_replication(model, two_bin_joint) == 0.0

    law = model.induced_law()
    for built, given in zip(law.conditionals, two_bin_joint.conditionals):
        assert built.tv(given) == pytest.approx(0.0, abs=1e-12)


def test_replication_at_depth_zero():
    joint = m.JointLaw.from_points(
        [0.25, 0.75], [uniform_cell(0.0, 1.0), uniform_cell(0.0, 1.0)])
    gen = g.build_generator(joint, 0)
    model = g.compose_structural_model(joint, gen)
    assert g.verify_replication(model, joint) == 0.0


def test_replication_sees_perturbations(two_bin_joint):
    gen = g.build_generator(two_bin_joint, 4)
    model = g.compose_structural_model(two_bin_joint, gen)
    eps = 0.05
    first, second = two_bin_joint.conditionals
    moved = second.mass.copy()
    moved[0, 1] -= eps
    moved[1, 1] += eps
    perturbed = m.JointLaw(two_bin_joint.z_grid, two_bin_joint.pz,
                           [first, m.BivariateGrid(second.y_edges,
                                                   second.x_edges, moved)])
    assert g.verify_replication(model, perturbed) >= eps / 2


def test_compose_checks_marginals(two_bin_joint):
    gen = g.build_generator(two_bin_joint, 2)
    first, second = two_bin_joint.conditionals
    other = m.JointLaw(two_bin_joint.z_grid, two_bin_joint.pz,
                       [first, first])
    with pytest.raises(ivt.e.MarginalMismatchError) as err:
        g.compose_structural_model(other, gen)
    assert err.value.index == 1


def test_outcome_map():
    # Y = X: the outcome map is the identity in x
    joint = m.JointLaw.from_points(
        [0.25, 0.75],
        [m.BivariateGrid([0, 0.5, 1], [0, 0.5, 1], [[0.5, 0], [0, 0.5]]),
         m.BivariateGrid([0, 0.5, 1], [0, 0.5, 1], [[0.3, 0], [0, 0.7]])])
    gen = g.build_generator(joint, 3)
    model = g.compose_structural_model(joint, gen)
    assert g.verify_replication(model, joint) == 0.0
    y = model.outcome_given_z([0.1, 0.9], 0, 0.5)
    assert y.tolist() == pytest.approx([0.25, 0.75])


def test_sample_is_seeded(two_bin_joint):
    gen = g.build_generator(two_bin_joint, 3)
    model = g.compose_structural_model(two_bin_joint, gen)
    rows = model.sample(50, seed=5)
    assert rows.shape == (50, 3)
    assert np.array_equal(rows, model.sample(50, seed=5))
    assert np.all((rows[:, 2] >= 0) & (rows[:, 2] <= 1))


def test_invert_generator():
    family = g.MarginalFamily.from_points([0.25, 0.75],
                                          [uniform(0, 1), uniform(0, 1)])
    gen = g.build_generator(family, 1)
    # u in the lower u-cell, x in the upper x-cell
    assert g.invert_generator(gen, 0.7, 0.2) == g.ZCell("1", 0)
    assert g.invert_generator(gen, 0.2, 0.2) == g.ZCell("2", 1)
    x = gen(0.75, 0.6)
    assert g.invert_generator(gen, x, 0.6) == g.ZCell("2", 1)

    flat = g.build_generator(family, 0)
    with pytest.raises(ivt.e.NonInvertibleError) as err:
        g.invert_generator(flat, 0.5, 0.3)
    assert len(err.value.candidates) == 2

    with pytest.raises(ivt.e.NonInvertibleError) as err:
        g.invert_generator(gen, 5.0, 0.3)
    assert err.value.candidates == []


def test_invert_from_support():
    family = g.MarginalFamily.from_points([0.25, 0.75],
                                          [uniform(0, 1), uniform(2, 3)])
    gen = g.build_generator(family, 2)
    assert g.invert_generator(gen, gen(0.8, 0.1), 0.1).index == 1
    assert g.invert_generator(gen, gen(0.2, 0.9), 0.9).index == 0


def test_outcome_never_needs_z(two_bin_joint):
    gen = g.build_generator(two_bin_joint, 2)
    model = g.compose_structural_model(two_bin_joint, gen)
    z, u, v = np.array([0.3]), np.array([0.4]), np.array([0.6])
    y, x = model.draw(z, u, v)
    assert model.outcome(float(x[0]), 0.4, 0.6) == pytest.approx(y[0])


def test_with_permutations():
    gen = g.build_generator(identical_family(), 1)
    swapped = gen.with_permutations({"1": [0, 1]})
    assert swapped.permutations["1"].tolist() == [0, 1]
    assert g.collision_fraction(swapped) == 1.0

    with pytest.raises(ivt.e.ValidationError):
        gen.with_permutations({"1": [0, 0]})


@pytest.mark.parametrize("depth", [1, 3, 5])
def test_every_piece_preserves_its_marginal(two_bin_joint, depth):
    gen = g.build_generator(two_bin_joint, depth)
    for piece in gen.pieces:
        marginal = gen.family.marginals[piece.index]
        pushed = gen.pushforward(piece)
        assert pushed.tolist() == pytest.approx(marginal.masses.tolist(),
                                                abs=1e-12)
