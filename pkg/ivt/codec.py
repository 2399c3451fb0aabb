"""
File formats. Every document is checked against a validator schema before
anything is built from it, and problems are reported with the dotted path
of the offending value (e.g. "joint.conditionals[2].mass").
"""

import csv
import json
import logging

from . import errors as e
from . import generator as g
from . import measure as m
from . import simulation as s
from . import validity as t
from . import validators as v
from .u import validate_item

log = logging.getLogger(__name__)

REAL_LIST = v.List(v.Number())
MASS_LIST = v.List(v.Number(min=0))
BOOL = v.LambdaFilter(lambda b: isinstance(b, bool),
                      message="expected true or false")
# digit strings, or dot-joined symbols past nine per level
ADDRESS = r"^([1-9]*|[1-9][0-9]*(\.[1-9][0-9]*)*)$"

GRID = v.Dict(
    edges=[REAL_LIST, v.Length(min=2)],
    masses=MASS_LIST,
    atoms=v.Optional(v.List([REAL_LIST, v.Length(min=2, max=2)]),
                     default=[]),
)

BIVARIATE = v.Dict(
    y_edges=[REAL_LIST, v.Length(min=2)],
    x_edges=[REAL_LIST, v.Length(min=2)],
    mass=v.List(MASS_LIST),
)

JOINT = v.Dict(
    z_grid=[REAL_LIST, v.Length(min=1)],
    pz=GRID,
    conditionals=[v.List(BIVARIATE), v.Length(min=1)],
    discrete=v.Optional(BOOL, default=False),
)

GENERATOR = v.Dict(
    depth=v.Number(min=0, integer=True),
    arity=v.Optional(v.Number(min=2, integer=True)),
    cells=v.List(v.Dict(z_addr=v.Regex(ADDRESS),
                        perm=v.List(v.Number(min=0, integer=True)))),
)

FEASIBILITY = v.Dict(
    conditionals=[v.List(MASS_LIST), v.Length(min=1)],
    pz=v.Optional(MASS_LIST),
    joint=v.Optional(v.List(v.List(MASS_LIST))),
)

SPEC = v.Dict(
    name=v.LambdaFilter(lambda x: isinstance(x, str) and x,
                        message="expected a non-empty string"),
    first_stage=v.Optional(v.Select(s.FIRST_STAGES)),
    outcome=v.Optional(v.Select(s.OUTCOMES)),
    instrument_valid=v.Optional(BOOL),
    restricted=v.Optional(BOOL),
    copula=v.Optional(v.Select(s.COPULAS)),
    copula_weight=v.Optional(v.Number(min=0, max=1)),
    u_law=v.Optional(GRID),
    v_law=v.Optional(GRID),
    z_law=v.Optional(GRID),
)

SPEC_NUMBERS = ("slope", "scale", "jump", "z_star", "outcome_jump",
                "outcome_star")
SPEC_KEYS = set(SPEC.fields) | set(SPEC_NUMBERS) | {"table", "outcome_table"}

EXPERIMENT = v.Dict(
    specs=v.Optional(v.List(SPEC)),
    tests=v.Optional(v.List(v.Select(t.CHECKS))),
    n=v.Optional(v.Number(min=1, integer=True)),
    reps=v.Optional(v.Number(min=1, integer=True)),
    seed=v.Optional(v.Number(integer=True)),
    bins=v.Optional([v.List(v.Number(min=1, integer=True)),
                     v.Length(min=3, max=3)]),
    depth=v.Optional(v.Number(min=0, integer=True)),
    replicate=v.Optional(BOOL),
    K=v.Optional(v.Number(min=0, strict=True)),
    tol=v.Optional(v.Number(min=0)),
)


def _build(key, factory, *args, **kwargs):
    """Call a constructor, prefixing validation errors with `key`."""
    try:
        return factory(*args, **kwargs)
    except e.ValidationError as exc:
        exc.key = "%s.%s" % (key, exc.key)
        raise


# Grid measures


def grid_to_dict(dist):
    return {"edges": dist.edges.tolist(), "masses": dist.masses.tolist(),
            "atoms": [list(atom) for atom in dist.atoms]}


def grid_from_dict(doc, key="grid"):
    validate_item(GRID, key, doc)
    return _build(key, m.GridDistribution, doc["edges"], doc["masses"],
                  [tuple(atom) for atom in doc["atoms"]])


def joint_to_dict(joint):
    return {
        "z_grid": joint.z_grid.tolist(),
        "pz": grid_to_dict(joint.pz),
        "conditionals": [{"y_edges": c.y_edges.tolist(),
                          "x_edges": c.x_edges.tolist(),
                          "mass": c.mass.tolist()}
                         for c in joint.conditionals],
        "discrete": joint.discrete,
    }


def joint_from_dict(doc, key="joint"):
    validate_item(JOINT, key, doc)
    pz = grid_from_dict(doc["pz"], key + ".pz")
    conditionals = [
        _build("%s.conditionals[%d]" % (key, i), m.BivariateGrid,
               c["y_edges"], c["x_edges"], c["mass"])
        for i, c in enumerate(doc["conditionals"])]
    return _build(key, m.JointLaw, doc["z_grid"], pz, conditionals,
                  discrete=doc["discrete"])


# Generators and models


def generator_to_dict(gen):
    return {"depth": gen.depth, "arity": gen.arity,
            "cells": [{"z_addr": node.address, "perm": node.perm.tolist()}
                      for node in gen.leaves]}


def generator_from_dict(doc, joint, key="generator"):
    """
    Rebuild the partition tree from `joint` and attach the stored
    permutations to its leaves.
    """
    validate_item(GENERATOR, key, doc)
    if joint.pz.is_atomic:
        gen = g.build_generator_with_atoms(joint, doc["depth"])
    else:
        gen = g.build_generator(joint, doc["depth"])
    addresses = set(node.address for node in gen.leaves)
    perms = {}
    for index, cell in enumerate(doc["cells"]):
        if cell["z_addr"] not in addresses:
            raise e.ValidationError("%s.cells[%d].z_addr" % (key, index),
                                    cell["z_addr"], None,
                                    message="no such z-cell")
        perms[cell["z_addr"]] = cell["perm"]
    return _build(key, gen.with_permutations, perms)


def model_to_dict(model, joint_ref, error=None):
    out = {"joint": joint_ref, "independent": model.independent,
           "generator": generator_to_dict(model.generator)}
    if error is not None:
        out["replication_error"] = error
    return out


# Reports and experiments


def report_to_dict(report):
    return report.to_dict()


def report_from_dict(doc):
    return t.TestReport(doc["test"], doc["statistic"], doc["threshold"],
                        doc.get("diagnostics"))


def write_reports_csv(reports, handle):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(t.TestReport.FIELDS)
    for report in reports:
        writer.writerow(report.csv_row())


def write_result_csv(result, handle):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(s.ExperimentResult.FIELDS)
    for spec, test, rate, reps, mean in result.rows():
        writer.writerow([spec, test, repr(rate), reps, repr(mean)])


def result_to_dict(result):
    return {"rows": [dict(zip(s.ExperimentResult.FIELDS, row))
                     for row in result.rows()],
            "power_gaps": [{"spec": spec, "test": test, "gap": gap}
                           for (spec, test), gap in
                           sorted(result.power_gaps().items())],
            "skipped": dict(result.skipped)}


def spec_from_dict(doc, key="spec"):
    validate_item(SPEC, key, doc)
    unknown = set(doc) - SPEC_KEYS
    if unknown:
        raise e.ValidationError(key, sorted(unknown), None,
                                message="unknown spec fields")
    kwargs = dict(doc)
    for name in SPEC_NUMBERS:
        if name in kwargs:
            kwargs[name] = validate_item(v.Number(), "%s.%s" % (key, name),
                                         kwargs[name])
    for law in ("u_law", "v_law", "z_law"):
        if law in kwargs:
            kwargs[law] = grid_from_dict(kwargs[law], "%s.%s" % (key, law))
    return _build(key, s.DGPSpec, **kwargs)


def spec_to_dict(spec):
    out = {"name": spec.name, "first_stage": spec.first_stage,
           "outcome": spec.outcome, "instrument_valid": spec.instrument_valid,
           "copula": spec.copula, "copula_weight": spec.copula_weight,
           "restricted": spec.restricted,
           "u_law": grid_to_dict(spec.u_law),
           "v_law": grid_to_dict(spec.v_law),
           "z_law": grid_to_dict(spec.z_law)}
    for name in SPEC_NUMBERS:
        out[name] = getattr(spec, name)
    if spec.table is not None:
        out["table"] = spec.table
    if spec.outcome_table is not None:
        out["outcome_table"] = spec.outcome_table
    return out


def experiment_from_dict(doc, key="experiment"):
    """Experiment settings with the simulation defaults filled in."""
    validate_item(EXPERIMENT, key, doc)
    config = dict(s.DEFAULTS)
    config["replicate"] = False
    config.update(doc)
    if "specs" in doc:
        config["specs"] = [spec_from_dict(spec, "%s.specs[%d]" % (key, i))
                           for i, spec in enumerate(doc["specs"])]
    else:
        config["specs"] = s.default_suite()
    config["bins"] = tuple(config["bins"])
    return config


# Datasets


def write_dataset_csv(data, handle):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["y", "x", "z"])
    for row in data.rows.tolist():
        writer.writerow([repr(value) for value in row])


def read_dataset_csv(handle, name="dataset"):
    reader = csv.DictReader(handle)
    if reader.fieldnames is None or not {"y", "x", "z"} <= set(
            reader.fieldnames):
        raise e.SchemaKeyError("%s.y,x,z" % name)
    rows = []
    number = v.LambdaMap(float)
    for index, record in enumerate(reader):
        rows.append([validate_item(number, "%s[%d].%s" % (name, index, col),
                                   record[col]) for col in ("y", "x", "z")])
    return _build(name, s.Dataset, rows, spec_name=name)


# Files


def load_json(path):
    with open(path) as handle:
        return json.load(handle)


def dump_json(doc, handle):
    """Fields keep the order the documents build them in."""
    json.dump(doc, handle, indent=2)
    handle.write("\n")
