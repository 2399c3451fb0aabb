"""
The `ivt` command.

    ivt replicate   --input joint.json --depth 6 --output model.json
    ivt feasibility --input laws.json
    ivt test        --input joint.json --test jump --K 1
    ivt simulate    --input experiment.json --seed 7 --output result.csv

Exit codes: 0 on a clean run (test decisions are data, not failures), 1 on
malformed input or I/O errors, 2 when the data itself is refused (atoms,
infeasible discrete laws).
"""

import argparse
import contextlib
import logging
import os
import sys

from . import codec
from . import errors as e
from . import simulation as s
from . import validity as t
from . import validators as v
from .u import validate_item

log = logging.getLogger(__name__)

SEED_VARIABLE = "IVT_SEED"


class Parser(argparse.ArgumentParser):
    """An ArgumentParser that raises instead of exiting on bad usage."""

    def error(self, message):
        raise e.UsageError(message)


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as handle:
            yield handle


def _seed(args):
    raw = os.environ.get(SEED_VARIABLE)
    if raw is not None:
        return validate_item(v.LambdaMap(int), SEED_VARIABLE, raw)
    return args.seed


def _bins(raw):
    parts = raw.split(",")
    validate_item(v.Length(min=3, max=3), "--bins", parts)
    count = [v.LambdaMap(int), v.Number(min=1, integer=True)]
    return tuple(validate_item(count, "--bins[%d]" % i, part)
                 for i, part in enumerate(parts))


def _params(args):
    return t.ContinuityParams(alpha=args.alpha, beta=args.beta,
                              gamma=args.gamma, delta=args.delta, K=args.K)


def _load_joint(args):
    if args.input.endswith(".csv"):
        with open(args.input, newline="") as handle:
            data = codec.read_dataset_csv(handle, name=args.input)
        return s.discretize(data, *_bins(args.bins))
    return codec.joint_from_dict(codec.load_json(args.input))


# Commands


def cmd_replicate(args):
    joint = codec.joint_from_dict(codec.load_json(args.input))
    model, error = s.nontestability_demo(joint, args.depth)
    with _output(args.output) as handle:
        codec.dump_json(codec.model_to_dict(model, args.input, error), handle)
    if args.output not in (None, "-"):
        codec.dump_json({"replication_error": error}, sys.stdout)
    return 0


def cmd_feasibility(args):
    doc = codec.load_json(args.input)
    validate_item(codec.FEASIBILITY, "input", doc)
    laws, pz = doc["conditionals"], doc.get("pz")
    feasible, witness = t.discrete_generator_feasible(laws, pz)
    out = {"decision": "feasible" if feasible else "infeasible",
           "report": t.feasibility_report(laws, pz).to_dict()}
    if feasible:
        out["witness"] = witness.to_list() if hasattr(witness, "to_list") \
            else witness.to_dict()
    else:
        out["certificate"] = {"x": witness.x, "excess": witness.excess}
    if len(laws) == 2:
        out["minimal_collision_mass"] = t.minimal_collision_mass(*laws)
    if "joint" in doc:
        out["pearl"] = t.instrumental_inequality(doc["joint"]).to_dict()
    with _output(args.output) as handle:
        codec.dump_json(out, handle)
    return 0


def cmd_test(args):
    joint = _load_joint(args)
    settings = dict(params=_params(args), K=args.K, tol=args.tol,
                    z_star=args.z_star)
    names = args.test or list(s.DEFAULTS["tests"]) + ["moment"]
    reports = []
    for name in names:
        check = t.make_check(name, **settings)
        try:
            reports.append(check.run(joint))
        except e.DegenerateGridError as exc:
            if args.test:
                raise
            log.warning("skipping %s: %s", name, exc)
    with _output(args.output) as handle:
        if args.format == "csv":
            codec.write_reports_csv(reports, handle)
        else:
            codec.dump_json([r.to_dict() for r in reports], handle)
    return 0


def cmd_simulate(args):
    doc = codec.load_json(args.input) if args.input else {}
    for key in ("n", "reps", "depth", "K", "tol"):
        if getattr(args, key) is not None:
            doc[key] = getattr(args, key)
    if args.bins is not None:
        doc["bins"] = list(_bins(args.bins))
    if args.test:
        doc["tests"] = args.test
    if args.replicate:
        doc["replicate"] = True
    seed = _seed(args)
    if seed is not None:
        doc["seed"] = seed
    config = codec.experiment_from_dict(doc)

    settings = dict(params=t.ContinuityParams(K=config["K"]),
                    K=config["K"], tol=config["tol"])
    checks = [t.make_check(name, **settings) for name in config["tests"]]
    result = s.run_experiment(config["specs"], checks, config["n"],
                              config["reps"], config["seed"],
                              bins=config["bins"],
                              replicate=config["replicate"],
                              depth=config["depth"])
    with _output(args.output) as handle:
        if args.format == "json":
            codec.dump_json(codec.result_to_dict(result), handle)
        else:
            codec.write_result_csv(result, handle)
    return 0


# Parser


def build_parser():
    parser = Parser(prog="ivt", description=(
        "Replicate observed laws with valid-instrument models and test the "
        "implications of instrument validity."))
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log construction steps")
    commands = parser.add_subparsers(dest="command", parser_class=Parser)
    commands.required = True
    defaults = s.DEFAULTS
    bins_help = "bins per axis as Y,X,Z (default: %s)" % ",".join(
        map(str, defaults["bins"]))

    rep = commands.add_parser("replicate", help="build a replicating model")
    rep.add_argument("--input", required=True, help="JointLaw JSON")
    rep.add_argument("--output", help="model JSON (default: stdout)")
    rep.add_argument("--depth", type=int, default=defaults["depth"],
                     help="dyadic depth (default: %(default)s)")
    rep.set_defaults(func=cmd_replicate)

    feas = commands.add_parser("feasibility",
                               help="discrete generator feasibility")
    feas.add_argument("--input", required=True, help="laws JSON")
    feas.add_argument("--output", help="report JSON (default: stdout)")
    feas.set_defaults(func=cmd_feasibility)

    test = commands.add_parser("test", help="run validity tests on a law")
    test.add_argument("--input", required=True,
                      help="JointLaw JSON or y,x,z dataset CSV")
    test.add_argument("--output", help="reports (default: stdout)")
    test.add_argument("--bins", default=",".join(map(str, defaults["bins"])),
                      help=bins_help)
    test.add_argument("--test", action="append", choices=sorted(t.CHECKS),
                      help="test to run, repeatable (default: all "
                      "continuous tests)")
    test.add_argument("--K", type=float, default=defaults["K"],
                      help="jump threshold (default: %(default)s)")
    test.add_argument("--tol", type=float, default=0.0,
                      help="dominance tolerance (default: %(default)s)")
    test.add_argument("--z-star", type=float, dest="z_star",
                      help="grid point for the jump test (default: all)")
    for name, value in (("alpha", 2.0), ("beta", 1.0), ("gamma", 2.0),
                        ("delta", 1.0)):
        test.add_argument("--" + name, type=float, default=value,
                          help="Hölder exponent (default: %(default)s)")
    test.add_argument("--format", choices=("json", "csv"), default="json")
    test.set_defaults(func=cmd_test)

    sim = commands.add_parser("simulate", help="run a size/power experiment")
    sim.add_argument("--input", help="experiment JSON (default: the "
                     "default suite)")
    sim.add_argument("--output", help="result (default: stdout)")
    sim.add_argument("--n", type=int,
                     help="rows per sample (default: %d)" % defaults["n"])
    sim.add_argument("--reps", type=int, help="replications (default: %d)"
                     % defaults["reps"])
    sim.add_argument("--seed", type=int, help="master seed (default: %d, "
                     "%s overrides)" % (defaults["seed"], SEED_VARIABLE))
    sim.add_argument("--bins", help=bins_help)
    sim.add_argument("--depth", type=int, help="dyadic depth for replicas "
                     "(default: %d)" % defaults["depth"])
    sim.add_argument("--test", action="append", choices=sorted(t.CHECKS),
                     help="test to run, repeatable (default: %s)"
                     % ", ".join(defaults["tests"]))
    sim.add_argument("--K", type=float, help="jump and sure-decrease "
                     "threshold (default: %s)" % defaults["K"])
    sim.add_argument("--tol", type=float, help="dominance tolerance "
                     "(default: %s)" % defaults["tol"])
    sim.add_argument("--replicate", action="store_true",
                     help="also test the valid-instrument replica of every "
                     "spec outside the null")
    sim.add_argument("--format", choices=("json", "csv"), default="csv")
    sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except e.UsageError as exc:
        sys.stderr.write("ivt: %s\n" % exc)
        return 1

    logging.basicConfig(
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
        level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except e.DomainError as exc:
        sys.stderr.write("ivt: refused: %s\n" % exc)
        return 2
    except (e.IVTError, OSError, ValueError) as exc:
        # json decode errors are ValueErrors
        sys.stderr.write("ivt: %s\n" % exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
