# pylint: disable-all
import itertools

import numpy as np
import pytest

import ivt
from ivt import generator as g
from ivt import measure as m
from ivt import validity as t

from conftest import uniform_cell


def test_report():
    report = t.TestReport("jump", 3.0, 1.0, {"z_star": 1.0})
    assert report.decision == "reject" and report.rejected
    assert t.TestReport("jump", 1.0, 1.0).decision == "consistent"
    assert report.to_dict() == {"test": "jump", "statistic": 3.0,
                                "threshold": 1.0, "decision": "reject",
                                "diagnostics": {"z_star": 1.0}}
    assert report.csv_row() == ["jump", "3.0", "1.0", "reject"]


def test_continuity_params():
    params = t.ContinuityParams()
    assert params.exponents() == (4.0, 3.0)
    assert params.c_bound == 2.0
    assert t.ContinuityParams(beta=3.0).exponents() == (2.0, 3.0)
    assert t.ContinuityParams(ky=2.0, kx=4.0).c_bound == 16.0

    with pytest.raises(ivt.e.ValidationError) as err:
        t.ContinuityParams(alpha=0)
    assert err.value.key == "alpha"

    with pytest.raises(ivt.e.ValidationError) as err:
        t.ContinuityParams(d=2)
    assert err.value.key == "d"


# Discrete treatments


def test_infeasible_pair():
    feasible, certificate = t.discrete_generator_feasible(
        [[0.7, 0.3], [0.5, 0.5]])
    assert not feasible
    assert certificate.x == 0
    assert certificate.excess == pytest.approx(0.2)


def test_feasible_pair_has_a_swap_coupling():
    feasible, witness = t.discrete_generator_feasible(
        [[0.5, 0.5], [0.5, 0.5]])
    assert feasible
    assert witness.diagonal_mass == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(witness.plan, [[0.0, 0.5], [0.5, 0.0]])


@pytest.mark.parametrize("p, q", [
    ([0.7, 0.3], [0.5, 0.5]),
    ([0.5, 0.5], [0.5, 0.5]),
    ([0.2, 0.3, 0.5], [0.6, 0.3, 0.1]),
    ([0.1, 0.9, 0.0], [0.0, 0.2, 0.8]),
    ([1.0], [1.0]),
])
def test_feasibility_matches_collision_mass(p, q):
    feasible, _ = t.discrete_generator_feasible([p, q])
    assert feasible == (t.minimal_collision_mass(p, q) == 0)


def test_minimal_collision_mass():
    assert t.minimal_collision_mass([0.7, 0.3], [0.5, 0.5]) == \
        pytest.approx(0.2)
    assert t.minimal_collision_mass([0.5, 0.5], [0.5, 0.5]) == 0
    assert t.minimal_collision_mass([1.0], [1.0]) == 1


def test_three_laws_on_tuples():
    laws = [[0.5, 0.5, 0.0, 0.0],
            [0.0, 0.5, 0.5, 0.0],
            [0.25, 0.0, 0.25, 0.5]]
    feasible, witness = t.discrete_generator_feasible(laws)
    assert feasible
    for i, law in enumerate(laws):
        assert witness.marginal(i).tolist() == pytest.approx(law, abs=1e-7)
    for values in witness.tuples:
        assert len(set(values)) == len(values)

    laws[2] = [0.6, 0.0, 0.0, 0.4]
    feasible, certificate = t.discrete_generator_feasible(laws)
    assert not feasible
    assert certificate.x == 0
    assert certificate.excess == pytest.approx(0.1)


def test_tuple_coupling_matches_column_sums():
    # with no more laws than values, feasibility is exactly "every column
    # of the law matrix sums to at most one"
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(40):
        laws = rng.dirichlet(np.ones(4) * 0.7, size=3)
        worst = laws.sum(axis=0).max()
        if abs(worst - 1.0) < 1e-4:
            continue
        feasible, _ = t.discrete_generator_feasible(laws.tolist())
        assert feasible == (worst < 1.0)
        checked += 1
    assert checked > 30


def distinct_coupling_exists(laws):
    """Exhaustive check: is there a law on value tuples with no repeats?"""
    from scipy.optimize import linprog

    count, support = laws.shape
    tuples = [values for values in itertools.product(range(support),
                                                     repeat=count)
              if len(set(values)) == count]
    a_eq = np.array([[float(values[i] == x) for values in tuples]
                     for i in range(count) for x in range(support)])
    result = linprog(np.zeros(len(tuples)), A_eq=a_eq, b_eq=laws.ravel(),
                     bounds=(0, None), method="highs")
    return result.status == 0


@pytest.mark.parametrize("count, instances", [(2, 200), (3, 50)])
def test_feasibility_matches_an_exhaustive_oracle(count, instances):
    rng = np.random.default_rng(17 + count)
    outcomes = []
    while len(outcomes) < instances:
        support = int(rng.integers(count, 5))
        laws = rng.dirichlet(np.ones(support) * 0.6, size=count)
        if abs(laws.sum(axis=0).max() - 1.0) < 1e-4:
            continue
        feasible, _ = t.discrete_generator_feasible(laws.tolist())
        assert feasible == distinct_coupling_exists(laws)
        outcomes.append(feasible)
    assert any(outcomes) and not all(outcomes)


def test_feasibility_input_errors():
    with pytest.raises(ivt.e.NormalizationError):
        t.discrete_generator_feasible([[0.7, 0.7], [0.5, 0.5]])

    with pytest.raises(ivt.e.ValidationError):
        t.discrete_generator_feasible([[0.5, 0.5], [1.0, 0.0, 0.0]])

    with pytest.raises(ivt.e.DegenerateGridError):
        t.discrete_generator_feasible([[0.5, 0.5]])

    with pytest.raises(ivt.e.ValidationError) as err:
        t.discrete_generator_feasible([[0.5, 0.5], [0.5, 0.5]],
                                      pz=[0.5, 0.25, 0.25])
    assert err.value.key == "pz"

    with pytest.raises(ValueError):
        t.discrete_generator_feasible([[1.0 / 7] * 7] * 3)


def test_feasibility_report():
    report = t.feasibility_report([[0.7, 0.3], [0.5, 0.5]])
    assert report.statistic == pytest.approx(1.2)
    assert report.decision == "reject"
    assert report.diagnostics["x"] == 0.0


def test_instrumental_inequality():
    mass = [[[0.9, 0.05], [0.025, 0.025]],
            [[0.025, 0.025], [0.9, 0.05]]]
    report = t.instrumental_inequality(mass)
    assert report.test == "pearl"
    assert report.statistic == pytest.approx(1.8)
    assert report.decision == "reject"


def test_instrumental_inequality_valid_model():
    # X = Z xor U, Y = X xor V with U ~ Bernoulli(1/2), V ~ Bernoulli(0.3)
    mass = np.zeros((2, 2, 2))
    for z in range(2):
        for u in range(2):
            x = z ^ u
            for v, pv in ((0, 0.7), (1, 0.3)):
                mass[z, x ^ v, x] += 0.5 * pv
    report = t.instrumental_inequality(mass)
    assert report.statistic == pytest.approx(0.5)
    assert report.decision == "consistent"


def test_instrumental_inequality_constant_in_z():
    table = [[0.1, 0.2], [0.3, 0.4]]
    report = t.instrumental_inequality([table, table, table])
    assert report.statistic == pytest.approx(0.6)
    assert not report.rejected


def test_instrumental_inequality_ignores_labels():
    rng = np.random.default_rng(8)
    for _ in range(20):
        mass = rng.dirichlet(np.ones(6), size=3).reshape(3, 3, 2)
        base = t.instrumental_inequality(mass).statistic
        shuffled = mass[rng.permutation(3)]
        shuffled = shuffled[:, rng.permutation(3)]
        shuffled = shuffled[:, :, rng.permutation(2)]
        assert t.instrumental_inequality(shuffled).statistic == \
            pytest.approx(base)


# Continuity


def test_moment_statistic_smooth(location_joint):
    report = t.continuity_moment_statistic(location_joint,
                                           t.ContinuityParams())
    # E|[Y,X]_z1 - [Y,X]_z2|^4 = 4 gap^4 over gap^3
    assert report.statistic == pytest.approx(0.8)
    assert report.threshold == 2.0
    assert report.decision == "consistent"
    assert report.diagnostics["gap"] == pytest.approx(0.2)
    assert report.diagnostics["diverging"] == 0.0


def test_moment_statistic_constant():
    joint = m.JointLaw.from_points([0.0, 0.5, 1.0],
                                   [uniform_cell(0.0, 1.0)] * 3)
    report = t.continuity_moment_statistic(joint, t.ContinuityParams())
    assert report.statistic == 0.0


def test_moment_statistic_jump():
    z = [0.0, 0.25, 0.49, 0.51, 1.0]
    cells = [uniform_cell(0.0, 1.0) if value < 0.5 else uniform_cell(3.0, 4.0)
             for value in z]
    joint = m.JointLaw.from_points(z, cells)
    report = t.continuity_moment_statistic(joint, t.ContinuityParams())
    assert report.decision == "reject"
    assert report.diagnostics["z1"] == 0.49
    assert report.diagnostics["z2"] == 0.51


def test_moment_statistic_needs_three_points(bernoulli_joint):
    with pytest.raises(ivt.e.DegenerateGridError):
        t.continuity_moment_statistic(bernoulli_joint, t.ContinuityParams())


def test_jump_test_bernoulli(bernoulli_joint):
    report = t.jump_test(bernoulli_joint, 1.0, z_star=1.0)
    assert report.statistic == pytest.approx(3.0, abs=1e-9)
    assert report.decision == "reject"
    assert report.diagnostics["z_1"] == 0.0

    # without z_star every point is tried
    assert t.jump_test(bernoulli_joint, 1.0).statistic == \
        pytest.approx(3.0, abs=1e-9)


def test_jump_test_continuous():
    z = [0.0, 0.05, 0.1]
    joint = m.JointLaw.from_points(
        z, [uniform_cell(value, value + 1.0) for value in z])
    report = t.jump_test(joint, 1.0)
    assert report.statistic == pytest.approx(0.05)
    assert report.decision == "consistent"

    constant = m.JointLaw.from_points(z, [uniform_cell(0.0, 1.0)] * 3)
    assert t.jump_test(constant, 1.0).statistic == 0.0

    with pytest.raises(ValueError):
        t.jump_test(joint, 1.0, z_star=0.07)


def test_jump_test_one_sided():
    # the support moves by 3 at z = 0.5 and is constant on either side
    z = [0.0, 0.25, 0.5, 0.75]
    cells = [uniform_cell(0.0, 1.0)] * 2 + [uniform_cell(3.0, 4.0)] * 2
    joint = m.JointLaw.from_points(z, cells)
    report = t.jump_test(joint, 1.0, z_star=0.5)
    assert report.statistic == pytest.approx(3.0)
    assert report.rejected


@pytest.mark.parametrize("slope", [0.5, 1.0, 2.0])
def test_jump_test_bounded_on_lipschitz_families(slope):
    # X = slope * z + U moves by at most slope * gap between grid points
    rng = np.random.default_rng(int(10 * slope))
    z = np.sort(rng.uniform(0.0, 1.0, size=8))
    joint = m.JointLaw.from_points(
        z.tolist(), [uniform_cell(slope * value, slope * value + 1.0)
                     for value in z])
    bound = slope * float(np.diff(z).max())
    report = t.jump_test(joint, bound)
    assert report.statistic <= bound + 1e-9


# Monotonicity


def test_monotonicity_location_family():
    z = [0.0, 0.5, 1.0]
    joint = m.JointLaw.from_points(
        z, [uniform_cell(value, value + 1.0) for value in z])
    report = t.monotonicity_test(joint)
    assert report.statistic == 0.0
    assert report.decision == "consistent"


def test_monotonicity_sign_flip():
    z = [0.0, 0.5, 1.0]
    joint = m.JointLaw.from_points(
        z, [uniform_cell(-value, 1.0 - value) for value in z])
    report = t.monotonicity_test(joint)
    assert report.statistic == pytest.approx(0.5)
    assert report.decision == "reject"
    assert report.diagnostics["coordinate"] == t.COORDINATES["x"] == 1.0


def test_monotonicity_single_point():
    joint = m.JointLaw.from_points([0.0], [uniform_cell(0.0, 1.0)])
    report = t.monotonicity_test(joint)
    assert report.statistic == 0.0
    assert not report.rejected


def test_monotonicity_holds_on_a_replicated_monotone_law():
    weights = [[0.4, 0.3, 0.2, 0.1], [0.3, 0.3, 0.2, 0.2],
               [0.2, 0.3, 0.3, 0.2], [0.1, 0.2, 0.3, 0.4]]
    edges = [0.0, 1.0, 2.0, 3.0, 4.0]
    joint = m.JointLaw.from_points(
        [0.0, 0.25, 0.5, 0.75],
        [m.BivariateGrid(edges, edges, np.diag(w)) for w in weights])
    assert t.monotonicity_test(joint, tol=0.0).statistic == 0.0

    gen = g.build_generator(joint, 4)
    model = g.compose_structural_model(joint, gen)
    report = t.monotonicity_test(model.induced_law(), tol=0.0)
    assert report.statistic == 0.0
    assert not report.rejected


def test_sure_decrease():
    joint = m.JointLaw.from_points(
        [0.0, 1.0], [uniform_cell(5.0, 6.0), uniform_cell(0.0, 1.0)])
    report = t.monotonicity_sure_decrease_test(joint, 3.0)
    assert report.statistic == pytest.approx(4.0, abs=1e-9)
    assert report.decision == "reject"

    overlapping = m.JointLaw.from_points(
        [0.0, 1.0], [uniform_cell(0.0, 2.0), uniform_cell(1.0, 1.5)])
    report = t.monotonicity_sure_decrease_test(overlapping, 3.0)
    assert report.decision == "consistent"


# Checks


def test_make_check():
    check = t.make_check("jump", K=2.0, tol=0.1, z_star=None)
    assert isinstance(check, t.JumpCheck)
    assert check.K == 2.0
    assert sorted(t.CHECKS) == ["feasibility", "fosd", "jump", "moment",
                                "pearl", "sure-decrease"]
    with pytest.raises(ValueError):
        t.make_check("bogus")


def test_checks_run_on_a_law(bernoulli_joint):
    assert t.make_check("jump").run(bernoulli_joint).rejected
    assert t.make_check("fosd").run(bernoulli_joint).statistic == 0.0
    report = t.make_check("feasibility").run(bernoulli_joint)
    assert report.test == "feasibility"


def test_collision_mass_matches_brute_force():
    from scipy.optimize import linprog

    rng = np.random.default_rng(3)
    for _ in range(200):
        p, q = rng.dirichlet(np.ones(4), size=2)
        # couplings of p and q as a flat 4x4 plan, cost on the diagonal
        a_eq = np.vstack([np.kron(np.eye(4), np.ones(4)),
                          np.kron(np.ones(4), np.eye(4))])
        cost = np.eye(4).ravel()
        best = linprog(cost, A_eq=a_eq, b_eq=np.concatenate([p, q]),
                       bounds=(0, None), method="highs")
        assert t.minimal_collision_mass(p.tolist(), q.tolist()) == \
            pytest.approx(best.fun, abs=1e-6)
