"""
Testable implications of instrument validity, evaluated on the observed law.

Each test returns a TestReport whose decision is "reject" exactly when the
statistic exceeds the threshold. Tests on the process [Y, X]_z use the
comonotone (quantile) coupling across z, which bounds every coupling
consistent with the data from below, so a rejection holds for all of them.
"""

import itertools
import logging
from collections import namedtuple

import numpy as np
from scipy.optimize import linprog

from . import errors as e
from . import measure as m
from . import validators as v
from .u import INPUT_TOL, snap, validate_item

log = logging.getLogger(__name__)

NODES, NODE_WEIGHTS = np.polynomial.legendre.leggauss(8)

# Exhaustive tuple enumeration stays within these sizes.
MAX_SUPPORT = 6
MAX_Z_POINTS = 4

Certificate = namedtuple("Certificate", "x excess")


class TestReport(object):
    """
    The outcome of one validity test.

    :usage:
        report = monotonicity_test(joint, tol=0.0)
        report.decision  # "consistent" or "reject"
    """
    __test__ = False

    FIELDS = ("test", "statistic", "threshold", "decision")

    def __init__(self, test, statistic, threshold, diagnostics=None):
        self.test = test
        self.statistic = float(statistic)
        self.threshold = float(threshold)
        self.diagnostics = dict(diagnostics or {})

    @property
    def decision(self):
        return "reject" if self.statistic > self.threshold else "consistent"

    @property
    def rejected(self):
        return self.decision == "reject"

    def to_dict(self):
        return {"test": self.test, "statistic": self.statistic,
                "threshold": self.threshold, "decision": self.decision,
                "diagnostics": dict(self.diagnostics)}

    def csv_row(self):
        return [self.test, repr(self.statistic), repr(self.threshold),
                self.decision]

    def __repr__(self):
        return "TestReport(%s: %r vs %r, %s)" % (
            self.test, self.statistic, self.threshold, self.decision)


class ContinuityParams(object):
    """
    Hölder constants of the counterfactual processes: the outcome process
    has moment order alpha and excess exponent beta with constant ky, the
    treatment process gamma, delta and kx. K is the jump threshold and
    c_bound the constant the moment ratio must stay under.
    """

    positive = v.Number(min=0, strict=True)
    fields = {
        "alpha": positive, "beta": positive, "gamma": positive,
        "delta": positive, "ky": positive, "kx": positive, "K": positive,
        "d": v.Number(min=1, max=1, integer=True),
    }

    def __init__(self, alpha=2.0, beta=1.0, gamma=2.0, delta=1.0, d=1,
                 ky=1.0, kx=1.0, K=1.0, c_bound=None):
        values = dict(alpha=alpha, beta=beta, gamma=gamma, delta=delta, d=d,
                      ky=ky, kx=kx, K=K)
        for key, validator in self.fields.items():
            setattr(self, key, validate_item(validator, key, values[key]))
        if c_bound is None:
            c_bound = self.default_bound()
        self.c_bound = validate_item(self.positive, "c_bound", c_bound)

    def default_bound(self):
        return 2.0 * max(self.ky * self.kx ** (self.beta / self.alpha),
                         self.ky * self.kx)

    def exponents(self):
        """
        (moment order, gap order) of the moment restriction. When beta does
        not exceed alpha the outcome process drives the bound through the
        composite exponent; otherwise the treatment process alone does.
        """
        if self.beta <= self.alpha:
            return (2.0 * self.alpha * self.delta,
                    self.d + self.beta * self.gamma)
        return 2.0 * self.delta, self.d + self.gamma

    def to_dict(self):
        out = {key: getattr(self, key) for key in self.fields}
        out["c_bound"] = self.c_bound
        return out


# Discrete treatments


def _check_laws(key, laws):
    laws = [list(law) for law in laws]
    validate_item(v.Length(min=1), key, laws)
    for index, law in enumerate(laws):
        validate_item([v.List(v.Number(min=0)), v.Length(min=1),
                       v.Normalized(INPUT_TOL)],
                      "%s[%d]" % (key, index), law)
    if len(set(len(law) for law in laws)) != 1:
        raise e.ValidationError(key, [len(law) for law in laws], None,
                                message="laws need a common support")
    return np.array(laws, dtype=float)


def _certificate(laws):
    excess = laws.sum(axis=0) - 1.0
    x = int(np.argmax(excess))
    return Certificate(x, float(excess[x]))


def minimal_collision_mass(p, q):
    """
    The least probability of g(z1, U) == g(z2, U) over every coupling of p
    and q: sum over x of max(0, p(x) + q(x) - 1).
    """
    laws = _check_laws("laws", [p, q])
    return float(np.maximum(laws[0] + laws[1] - 1.0, 0.0).sum())


class TupleCoupling(object):
    """A law on tuples of pairwise-distinct x-values (one per z-point)."""

    def __init__(self, marginals, tuples, masses):
        self.marginals = marginals
        self.tuples = [tuple(t) for t in tuples]
        self.masses = np.asarray(masses, dtype=float)

    def marginal(self, i):
        out = np.zeros(self.marginals.shape[1])
        for t, mass in zip(self.tuples, self.masses):
            out[t[i]] += mass
        return out

    def to_dict(self):
        return {"tuples": [list(t) for t in self.tuples],
                "masses": self.masses.tolist()}


def _zero_diagonal_coupling(p, q):
    s = len(p)
    cost = np.eye(s).ravel()
    rows = np.kron(np.eye(s), np.ones(s))
    cols = np.kron(np.ones(s), np.eye(s))
    result = linprog(c=cost, A_eq=np.vstack([rows, cols]),
                     b_eq=np.concatenate([p, q]), bounds=(0, None),
                     method="highs")
    plan = np.maximum(result.x.reshape(s, s), 0.0)
    return m.CouplingMatrix(m.GridDistribution.discrete(p),
                            m.GridDistribution.discrete(q), plan)


def _tuple_coupling(laws):
    count, support = laws.shape
    if support > MAX_SUPPORT or count > MAX_Z_POINTS:
        raise ValueError(
            "exhaustive feasibility is limited to %d z-points on %d values"
            % (MAX_Z_POINTS, MAX_SUPPORT))
    tuples = list(itertools.permutations(range(support), count))
    if not tuples:
        return None
    a_eq = np.zeros((count * support, len(tuples)))
    for col, t in enumerate(tuples):
        for i, x in enumerate(t):
            a_eq[i * support + x, col] = 1.0
    result = linprog(c=np.zeros(len(tuples)), A_eq=a_eq, b_eq=laws.ravel(),
                     bounds=(0, None), method="highs")
    if result.status != 0:
        return None
    keep = result.x > 0
    return TupleCoupling(laws, [t for t, k in zip(tuples, keep) if k],
                         result.x[keep])


def discrete_generator_feasible(conditionals, pz=None):
    """
    Whether a generator one-to-one in z exists for discrete conditionals.
    Two laws admit one iff p(x) + q(x) <= 1 everywhere; the witness is then
    a coupling with no mass on the diagonal. Three or more laws are decided
    by a transport problem over tuples of distinct values.

    Returns (True, witness) or (False, Certificate(x, excess)).
    """
    laws = _check_laws("conditionals", conditionals)
    if pz is not None:
        validate_item([v.List(v.Number(min=0)),
                       v.Length(min=len(laws), max=len(laws)),
                       v.Normalized(INPUT_TOL)], "pz", list(pz))
    if len(laws) < 2:
        raise e.DegenerateGridError(2, len(laws))

    certificate = _certificate(laws)
    if len(laws) == 2:
        if certificate.excess > 0:
            log.debug("infeasible at x=%d, excess %r", *certificate)
            return False, certificate
        return True, _zero_diagonal_coupling(laws[0], laws[1])

    plan = _tuple_coupling(laws)
    if plan is None:
        log.debug("infeasible at x=%d, excess %r", *certificate)
        return False, certificate
    return True, plan


def feasibility_report(conditionals, pz=None):
    """
    The feasibility condition as a TestReport: the largest total mass the
    conditionals put on one value, against 1. A column total above 1
    forces a set of u's that every generator maps to the same x.
    """
    laws = _check_laws("conditionals", conditionals)
    if len(laws) < 2:
        raise e.DegenerateGridError(2, len(laws))
    certificate = _certificate(laws)
    return TestReport("feasibility", certificate.excess + 1.0, 1.0,
                      {"x": float(certificate.x),
                       "excess": certificate.excess})


def instrumental_inequality(joint):
    """
    max over x of sum over y of max over z of P(y, x | z); any valid
    instrument keeps it at or below 1. Accepts a [z, y, x] mass array or a
    JointLaw whose bins are read as categories.
    """
    if isinstance(joint, m.JointLaw):
        mass = np.array([c.mass for c in joint.conditionals])
    else:
        mass = np.asarray(joint, dtype=float)
    if mass.ndim != 3:
        raise e.ValidationError("joint", list(mass.shape), None,
                                message="expected a [z, y, x] array")
    for index, table in enumerate(mass):
        validate_item(v.Normalized(INPUT_TOL), "joint[%d]" % index,
                      table.tolist())
    per_x = mass.max(axis=0).sum(axis=0)
    x = int(np.argmax(per_x))
    return TestReport("pearl", per_x[x], 1.0, {"x": float(x)})


# Continuity


def comonotone_moment(first, second, power):
    """
    E ||(Y1 - Y2, X1 - X2)||^power when both coordinates are coupled by the
    same quantile level. Quantile differences are linear between the merged
    knots, so each segment is integrated by Gauss-Legendre.
    """
    laws = (first.y_marginal(), second.y_marginal(),
            first.x_marginal(), second.x_marginal())
    ps = m.probability_knots(*laws)
    lo, hi = ps[:-1], ps[1:]
    half = 0.5 * (hi - lo)
    p = (0.5 * (hi + lo))[:, None] + half[:, None] * NODES[None, :]
    dy = m.quantile(laws[0], p) - m.quantile(laws[1], p)
    dx = m.quantile(laws[2], p) - m.quantile(laws[3], p)
    integrand = (dy ** 2 + dx ** 2) ** (power / 2.0)
    return float((integrand * NODE_WEIGHTS[None, :] * half[:, None]).sum())


def continuity_moment_statistic(joint, params):
    """
    Moment ratio E||[Y,X]_z1 - [Y,X]_z2||^a / |z1 - z2|^b on adjacent
    non-atomic z-grid points. The statistic is the largest ratio over the
    three finest gaps; a ratio that grows as the gap shrinks is flagged as
    diverging in the diagnostics.
    """
    points = joint.nonatomic_indices()
    if len(points) < 3:
        raise e.DegenerateGridError(3, len(points))
    power, order = params.exponents()

    pairs = []
    for i, j in zip(points[:-1], points[1:]):
        gap = float(joint.z_grid[j] - joint.z_grid[i])
        moment = comonotone_moment(joint.conditionals[i],
                                   joint.conditionals[j], power)
        pairs.append((gap, moment / gap ** order, i, j))
    finest = sorted(pairs)[:3]
    gap, ratio, i, j = max(finest, key=lambda pair: pair[1])
    trend = [pair[1] for pair in sorted(finest, reverse=True)]
    diverging = all(b > a for a, b in zip(trend[:-1], trend[1:]))
    log.debug("moment ratios by shrinking gap: %r", trend)
    return TestReport("moment", ratio, params.c_bound, {
        "z1": float(joint.z_grid[i]), "z2": float(joint.z_grid[j]),
        "gap": gap, "power": power, "order": order,
        "diverging": float(diverging)})


def _coupling_bound(joint, i, j):
    xs, ys = joint.x_marginals(), joint.y_marginals()
    return max(m.winf_distance(xs[i], xs[j]), m.winf_distance(ys[i], ys[j]))


def _jump_at(joint, star):
    """
    Coupling bounds along the sequences approaching z_star from below and
    from above (up to three nearest points each). A sequence counts as
    jumping by the smallest bound along it.
    """
    z = joint.z_grid
    below = [k for k in range(star - 1, -1, -1)][:3]
    above = [k for k in range(star + 1, len(z))][:3]
    best = (-np.inf, [], [])
    for side in (below, above):
        if not side:
            continue
        bounds = [_coupling_bound(joint, star, k) for k in side]
        if min(bounds) > best[0]:
            best = (min(bounds), bounds, side)
    return best


def jump_test(joint, K, z_star=None):
    """
    Smallest almost-sure distance between [Y,X] at z_star and its grid
    neighbours under the best coupling, along the sequence from below or
    from above (up to three points each). Rejects when it stays above K
    along one of them. Without z_star each grid point is tried and the
    largest statistic kept.
    """
    if len(joint.z_grid) < 2:
        raise e.DegenerateGridError(2, len(joint.z_grid))
    if z_star is None:
        stars = range(len(joint.z_grid))
    else:
        hits = np.flatnonzero(joint.z_grid == z_star)
        if not len(hits):
            raise ValueError("z_star=%r is not on the z-grid" % z_star)
        stars = [int(hits[0])]

    best = None
    for star in stars:
        stat, bounds, neighbours = _jump_at(joint, star)
        if best is None or stat > best[0]:
            best = (stat, star, bounds, neighbours)
    stat, star, bounds, neighbours = best
    diagnostics = {"z_star": float(joint.z_grid[star])}
    for rank, (bound, k) in enumerate(zip(bounds, neighbours), start=1):
        diagnostics["z_%d" % rank] = float(joint.z_grid[k])
        diagnostics["bound_%d" % rank] = bound
    return TestReport("jump", stat, K, diagnostics)


# Monotonicity

COORDINATES = {"y": 0.0, "x": 1.0}


def monotonicity_test(joint, tol=0.0):
    """
    Largest failure of first-order dominance between adjacent z-grid
    points, on either coordinate: max of F_z2 - F_z1 with z1 < z2. The
    diagnostics code the coordinate as 0 for y and 1 for x.
    """
    worst, where = 0.0, None
    laws = {"x": joint.x_marginals(), "y": joint.y_marginals()}
    for coord, family in sorted(laws.items()):
        for i in range(len(family) - 1):
            gap = snap(m.fosd_violation(family[i], family[i + 1]))
            if gap > worst:
                worst, where = gap, (coord, i)
    diagnostics = {}
    if where is not None:
        diagnostics = {"coordinate": COORDINATES[where[0]],
                       "z1": float(joint.z_grid[where[1]]),
                       "z2": float(joint.z_grid[where[1] + 1])}
    return TestReport("fosd", worst, tol, diagnostics)


def monotonicity_sure_decrease_test(joint, K):
    """
    Largest sure decrease inf supp(z1) - sup supp(z2) over z1 < z2 and both
    coordinates. Above K, the decrease happens under every coupling.
    """
    if len(joint.z_grid) < 2:
        raise e.DegenerateGridError(2, len(joint.z_grid))
    worst, where = -np.inf, None
    laws = {"x": joint.x_marginals(), "y": joint.y_marginals()}
    for coord, family in sorted(laws.items()):
        bounds = [law.support_bounds() for law in family]
        for i, j in itertools.combinations(range(len(family)), 2):
            drop = bounds[i][0] - bounds[j][1]
            if drop > worst:
                worst, where = drop, (coord, i, j)
    coord, i, j = where
    return TestReport("sure-decrease", worst, K, {
        "coordinate": COORDINATES[coord], "z1": float(joint.z_grid[i]),
        "z2": float(joint.z_grid[j])})


# Checks


class Check(object):
    """
    A validity test bound to its settings, so that a list of checks can be
    run against many laws. Subclasses set `name` and implement `run`.
    """
    name = None

    def run(self, joint):  # pylint: disable=C0111
        raise NotImplementedError()

    def __repr__(self):
        return "%s()" % type(self).__name__


class MomentCheck(Check):
    name = "moment"

    def __init__(self, params=None, **_):
        self.params = params or ContinuityParams()

    def run(self, joint):
        return continuity_moment_statistic(joint, self.params)


class JumpCheck(Check):
    name = "jump"

    def __init__(self, K=1.0, z_star=None, **_):
        self.K = K
        self.z_star = z_star

    def run(self, joint):
        return jump_test(joint, self.K, self.z_star)


class FosdCheck(Check):
    name = "fosd"

    def __init__(self, tol=0.0, **_):
        self.tol = tol

    def run(self, joint):
        return monotonicity_test(joint, self.tol)


class SureDecreaseCheck(Check):
    name = "sure-decrease"

    def __init__(self, K=1.0, **_):
        self.K = K

    def run(self, joint):
        return monotonicity_sure_decrease_test(joint, self.K)


class PearlCheck(Check):
    name = "pearl"

    def __init__(self, **_):
        pass

    def run(self, joint):
        return instrumental_inequality(joint)


class FeasibilityCheck(Check):
    name = "feasibility"

    def __init__(self, **_):
        pass

    def run(self, joint):
        return feasibility_report([law.weights for law in joint.x_marginals()])


CHECKS = {cls.name: cls for cls in (MomentCheck, JumpCheck, FosdCheck,
                                    SureDecreaseCheck, PearlCheck,
                                    FeasibilityCheck)}


def make_check(name, **settings):
    """
    Build a check by its command line name; settings a check does not use
    are ignored.

    :usage:
        make_check("jump", K=1.0, tol=0.05)
    """
    try:
        cls = CHECKS[name]
    except KeyError:
        raise ValueError("unknown test %r (expected one of %s)"
                         % (name, ", ".join(sorted(CHECKS))))
    return cls(**settings)
