"""
Data-generating processes for Model (1), their discretization into observed
laws, and the size/power and non-testability experiments run on them.

    X = first_stage(Z, U)        Y = outcome(X, V)

With a valid instrument Z is drawn on its own; otherwise it is mixed with a
quantile transform of U, so that w = 1 makes Z a function of U.
"""

import logging

import numpy as np

from . import errors as e
from . import generator as g
from . import measure as m
from . import validity as t
from . import validators as v
from .u import derive_seed, validate_item

log = logging.getLogger(__name__)

# Desk-scale defaults, shared with the command line.
DEFAULTS = {
    "bins": (6, 6, 8),
    "n": 10000,
    "reps": 200,
    "depth": 6,
    "seed": 7,
    "K": 1.0,
    "tol": 0.05,
    "tests": ("jump", "fosd", "sure-decrease"),
}

FIRST_STAGES = ("location", "scale", "support-jump", "sign-flip", "table")
OUTCOMES = ("location", "jump", "table")
COPULAS = ("comonotone", "countermonotone")


def _table_lengths(table):
    bins = len(table["shift"])
    return (len(table["edges"]) == bins
            and len(table.get("scale", [None] * bins)) == bins)


def _table_schema():
    return [v.Dict(edges=v.List(v.Number()),
                   shift=[v.List(v.Number()), v.Length(min=1)],
                   scale=v.Optional(v.List(v.Number())),
                   slope=v.Optional(v.Number())),
            v.LambdaFilter(_table_lengths, message=(
                "edges, shift and scale need one entry per table bin"))]


class DGPSpec(object):
    """
    One data-generating process.

    `restricted` records whether the process also meets the shape
    restrictions (monotone and continuous first stage) that give the
    monotonicity and continuity tests their power.

    :usage:
        DGPSpec("flip", first_stage="sign-flip", restricted=False)
    """

    def __init__(self, name, first_stage="location", outcome="location",
                 slope=1.0, scale=1.0, jump=3.0, z_star=0.5, table=None,
                 outcome_jump=3.0, outcome_star=1.0, outcome_table=None,
                 u_law=None, v_law=None, z_law=None, instrument_valid=True,
                 copula_weight=0.0, copula="comonotone", restricted=True):
        named = v.LambdaFilter(lambda s: isinstance(s, str) and s,
                               message="name must be a non-empty string")
        validate_item(named, "name", name)
        self.name = name
        validate_item(v.Select(FIRST_STAGES), "first_stage", first_stage)
        validate_item(v.Select(OUTCOMES), "outcome", outcome)
        validate_item(v.Select(COPULAS), "copula", copula)
        self.first_stage = first_stage
        self.outcome = outcome
        self.slope = validate_item(v.Number(), "slope", slope)
        self.scale = validate_item(v.Number(), "scale", scale)
        self.jump = validate_item(v.Number(), "jump", jump)
        self.z_star = validate_item(v.Number(), "z_star", z_star)
        self.outcome_jump = validate_item(v.Number(), "outcome_jump",
                                          outcome_jump)
        self.outcome_star = validate_item(v.Number(), "outcome_star",
                                          outcome_star)
        if first_stage == "table" or table is not None:
            validate_item(_table_schema(), "table", table)
        if outcome == "table" or outcome_table is not None:
            validate_item(_table_schema(), "outcome_table",
                          outcome_table)
        self.table = table
        self.outcome_table = outcome_table
        self.u_law = u_law or m.GridDistribution.uniform()
        self.v_law = v_law or m.GridDistribution.uniform()
        self.z_law = z_law or m.GridDistribution.uniform()
        flag = v.LambdaFilter(lambda b: isinstance(b, bool),
                              message="expected true or false")
        validate_item(flag, "instrument_valid", instrument_valid)
        validate_item(flag, "restricted", restricted)
        self.instrument_valid = instrument_valid
        self.copula_weight = validate_item(v.Number(min=0, max=1),
                                           "copula_weight", copula_weight)
        if self.instrument_valid and self.copula_weight != 0:
            raise e.ValidationError(
                "copula_weight", copula_weight, None,
                message="a valid instrument has copula weight 0")
        self.copula = copula
        self.restricted = restricted

    @property
    def in_null(self):
        """Valid instrument and shape restrictions both hold."""
        return self.instrument_valid and self.restricted

    def first_stage_map(self, z, u):
        kind = self.first_stage
        if kind == "location":
            return self.slope * z + u
        if kind == "scale":
            return (1.0 + self.scale * z) * u
        if kind == "support-jump":
            return u + self.jump * (z >= self.z_star)
        if kind == "sign-flip":
            return -self.slope * z + u
        return _apply_table(self.table, z, u)

    def outcome_map(self, x, noise):
        kind = self.outcome
        if kind == "location":
            return x + noise
        if kind == "jump":
            return x + noise + self.outcome_jump * (x >= self.outcome_star)
        return _apply_table(self.outcome_table, x, noise)

    def __repr__(self):
        return "DGPSpec(%r, %s/%s, valid=%r, w=%r)" % (
            self.name, self.first_stage, self.outcome, self.instrument_valid,
            self.copula_weight)


def _apply_table(table, key, noise):
    """shift[k] + scale[k] * noise + slope * key, k the table bin of key."""
    edges = np.asarray(table["edges"], dtype=float)
    shift = np.asarray(table["shift"], dtype=float)
    scale = np.asarray(table.get("scale", np.ones(len(shift))), dtype=float)
    k = np.clip(np.searchsorted(edges, key, side="right") - 1, 0,
                len(shift) - 1)
    return table.get("slope", 0.0) * key + shift[k] + scale[k] * noise


class Dataset(object):
    """Rows of (y, x, z) drawn from a spec with a given seed."""

    def __init__(self, rows, seed=None, spec_name=""):
        self.rows = np.asarray(rows, dtype=float)
        self.rows.setflags(write=False)
        self.seed = seed
        self.spec_name = spec_name
        if self.rows.ndim != 2 or self.rows.shape[1] != 3:
            raise e.ValidationError("rows", list(self.rows.shape), None,
                                    message="expected columns y, x, z")
        if not len(self.rows):
            raise e.ValidationError("rows", 0, None,
                                    message="dataset has no rows")
        if not np.all(np.isfinite(self.rows)):
            raise e.ValidationError("rows", "nan/inf", None,
                                    message="values must be finite")

    def __len__(self):
        return len(self.rows)

    @property
    def y(self):
        return self.rows[:, 0]

    @property
    def x(self):
        return self.rows[:, 1]

    @property
    def z(self):
        return self.rows[:, 2]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return np.array_equal(self.rows, other.rows)


def sample(spec, n, seed):
    """
    Draw n rows from `spec`. The errors (u, v) come first off the stream and
    an independent z after them; only the copula mix lets z see u.
    """
    if n < 1:
        raise ValueError("n must be positive, got %r" % n)
    rng = np.random.default_rng(seed)
    u = m.quantile(spec.u_law, rng.uniform(size=n))
    noise = m.quantile(spec.v_law, rng.uniform(size=n))
    z = m.quantile(spec.z_law, rng.uniform(size=n))
    if spec.copula_weight > 0:
        rank = spec.u_law.cdf(u)
        if spec.copula == "countermonotone":
            rank = 1.0 - rank
        linked = m.quantile(spec.z_law, np.clip(rank, 0.0, 1.0))
        z = (1.0 - spec.copula_weight) * z + spec.copula_weight * linked
    x = spec.first_stage_map(z, u)
    y = spec.outcome_map(x, noise)
    return Dataset(np.column_stack([y, x, z]), seed=seed,
                   spec_name=spec.name)


def _edges(values, bins):
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, bins + 1)


def discretize(data, y_bins, x_bins, z_bins):
    """
    Empirical conditional frequencies of (y, x) within equal-width z-bins,
    on equal-width y and x grids shared by every z-bin.
    """
    for key, bins in (("y_bins", y_bins), ("x_bins", x_bins),
                      ("z_bins", z_bins)):
        validate_item(v.Number(min=1, integer=True), key, bins)
    y_edges = _edges(data.y, y_bins)
    x_edges = _edges(data.x, x_bins)
    z_edges = _edges(data.z, z_bins)
    where = np.clip(np.searchsorted(z_edges, data.z, side="right") - 1,
                    0, z_bins - 1)
    counts = np.bincount(where, minlength=z_bins)
    empty = np.flatnonzero(counts == 0)
    if len(empty):
        index = int(empty[0])
        raise e.EmptyBinError(index, (float(z_edges[index]),
                                      float(z_edges[index + 1])))

    conditionals = []
    for index in range(z_bins):
        mask = where == index
        hist, _, _ = np.histogram2d(data.y[mask], data.x[mask],
                                    bins=[y_edges, x_edges])
        conditionals.append(m.BivariateGrid(y_edges, x_edges,
                                            hist / counts[index]))
    pz = m.GridDistribution.from_weights(z_edges, counts)
    centres = 0.5 * (z_edges[:-1] + z_edges[1:])
    return m.JointLaw(centres, pz, conditionals)


def nontestability_demo(joint, depth):
    """
    Build a valid-instrument model that reproduces `joint` and report the
    replication error. Refuses laws whose x-marginals carry atoms or fewer
    than two positive bins.
    """
    for index, marginal in enumerate(joint.x_marginals()):
        if marginal.is_atomic or marginal.positive_bins() < 2:
            certificate = None
            if joint.discrete and len(joint) >= 2:
                report = t.feasibility_report(
                    [law.weights for law in joint.x_marginals()])
                certificate = "x=%d excess %r" % (
                    report.diagnostics["x"], report.diagnostics["excess"])
            log.debug("refusing law: x-marginal %d is atomic", index)
            raise e.AtomicityError("x-marginal %d" % index,
                                   certificate=certificate)
    if joint.pz.is_atomic:
        gen = g.build_generator_with_atoms(joint, depth)
    else:
        gen = g.build_generator(joint, depth)
    model = g.compose_structural_model(joint, gen)
    error = g.verify_replication(model, joint)
    log.info("replicated law at depth %d, error %r", depth, error)
    return model, error


class ExperimentResult(object):
    """
    Rejection counts per (spec, test). Rates are exact ratios of counts.
    """

    FIELDS = ("spec", "test", "rejection_rate", "reps", "mean_statistic")

    def __init__(self):
        self.cells = {}
        self.null = {}
        self.skipped = {}

    def add(self, spec_name, report, in_null):
        cell = self.cells.setdefault((spec_name, report.test),
                                     {"rejections": 0, "reps": 0,
                                      "statistics": []})
        cell["rejections"] += int(report.rejected)
        cell["reps"] += 1
        cell["statistics"].append(report.statistic)
        self.null[spec_name] = in_null

    def rate(self, spec_name, test):
        cell = self.cells[(spec_name, test)]
        return cell["rejections"] / cell["reps"]

    def mean_statistic(self, spec_name, test):
        return float(np.mean(self.cells[(spec_name, test)]["statistics"]))

    def rows(self):
        return [(spec, test, self.rate(spec, test),
                 self.cells[(spec, test)]["reps"],
                 self.mean_statistic(spec, test))
                for spec, test in sorted(self.cells)]

    def power_gaps(self):
        """Rejection rate on each spec minus the rate on its replica."""
        out = {}
        for spec, test in self.cells:
            replica = spec + ":replica"
            if (replica, test) in self.cells:
                out[(spec, test)] = (self.rate(spec, test)
                                     - self.rate(replica, test))
        return out

    def __len__(self):
        return len(self.cells)


def run_experiment(specs, tests, n, reps, seed, bins=None, replicate=False,
                   depth=None):
    """
    Sample every spec `reps` times, discretize, and run every test. With
    `replicate`, laws of specs outside the null are also passed through
    `nontestability_demo` and tested again under "<name>:replica"; the
    replica comes from a valid-instrument model.
    """
    if reps < 1:
        raise ValueError("reps must be positive, got %r" % reps)
    bins = bins or DEFAULTS["bins"]
    depth = DEFAULTS["depth"] if depth is None else depth
    checks = [t.make_check(c) if isinstance(c, str) else c for c in tests]
    result = ExperimentResult()
    if not checks:
        return result

    for spec in specs:
        log.info("running %s: %d reps of n=%d", spec.name, reps, n)
        for rep in range(reps):
            data = sample(spec, n, derive_seed(seed, spec.name, rep))
            joint = discretize(data, *bins)
            _run_checks(result, spec.name, spec.in_null, checks, joint)
            if replicate and not spec.in_null:
                _run_replica(result, spec.name + ":replica", checks, joint,
                             depth)
    return result


def _run_checks(result, name, in_null, checks, joint):
    for check in checks:
        try:
            report = check.run(joint)
        except Exception as exc:
            raise e.ExperimentError(name, check.name, exc)
        result.add(name, report, in_null)


def _run_replica(result, name, checks, joint, depth):
    try:
        model, _ = nontestability_demo(joint, depth)
    except e.DomainError as exc:
        # too coarse a sample for this rep, e.g. one x-bin in a z-bin
        log.warning("no replica for %s: %s", name, exc)
        result.skipped[name] = result.skipped.get(name, 0) + 1
        return
    _run_checks(result, name, True, checks, model.induced_law())


# Named specs


def location_spec():
    return DGPSpec("location")


def sign_flip_spec():
    return DGPSpec("sign-flip", first_stage="sign-flip", restricted=False)


def support_jump_spec():
    """
    First stage u + 3 [z >= 0.5]: a valid instrument whose production
    function cannot be continuous and injective in z.
    """
    return DGPSpec("support-jump", first_stage="support-jump", jump=3.0,
                   z_star=0.5, restricted=False)


def comonotone_spec():
    return DGPSpec("comonotone", instrument_valid=False, copula_weight=1.0)


def countermonotone_spec():
    return DGPSpec("countermonotone", slope=0.5, instrument_valid=False,
                   copula_weight=0.8, copula="countermonotone")


def default_suite():
    return [location_spec(), sign_flip_spec(), support_jump_spec(),
            comonotone_spec(), countermonotone_spec()]
