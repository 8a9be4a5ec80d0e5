"""Command-line surface: codelength, density, indep, forest, simulate.

Every subcommand is a pure function of the input file bytes, the flags, and
the seed; reports are JSON with sorted keys, and file output goes through a
temp-file rename, so repeated runs produce byte-identical results.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .data import ColumnSchema, DatasetError, build_schema, parse_dataset
from .estimator import MixtureEstimator
from .joint import DEFAULT_JOINT_LEVEL, analyze_pair, build_forest
from .measure import OutOfSupportError
from .partition import DEFAULT_MAX_LEVEL, CustomPartition, HistogramSequence

__all__ = ["RunConfig", "main"]

SIMULATE_KINDS = ("gaussian", "uniform", "bernoulli", "mixed")


@dataclass
class RunConfig:
    """Resolved flags shared by the analysis subcommands."""

    levels: int = DEFAULT_MAX_LEVEL
    joint_levels: int = DEFAULT_JOINT_LEVEL
    prior_p: float = 0.5
    mu: dict = field(default_factory=dict)
    sigma: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None
    schema_path: str | None = None
    partition_paths: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.levels < 0 or self.joint_levels < 0:
            raise ValueError("level counts must be nonnegative")
        if not 0 < self.prior_p < 1:
            raise ValueError("prior-p must lie strictly between 0 and 1")
        for name, value in self.sigma.items():
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"sigma override for column {name!r} must be positive")

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            levels=getattr(args, "levels", DEFAULT_MAX_LEVEL),
            joint_levels=getattr(args, "joint_levels", DEFAULT_JOINT_LEVEL),
            prior_p=getattr(args, "prior_p", 0.5),
            mu=_parse_assignments(getattr(args, "mu", []), float, "--mu"),
            sigma=_parse_assignments(getattr(args, "sigma", []), float, "--sigma"),
            seed=getattr(args, "seed", 0),
            output=getattr(args, "output", None),
            schema_path=getattr(args, "schema", None),
            partition_paths=_parse_assignments(getattr(args, "partition", []), str, "--partition"),
        )


def _parse_assignments(pairs, cast, flag):
    out = {}
    for item in pairs:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ValueError(f"{flag} expects COL=VALUE, got {item!r}")
        try:
            out[name] = cast(value)
        except ValueError:
            raise ValueError(f"{flag} value {value!r} for column {name!r} is invalid") from None
    return out


def _emit(report: dict, output: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if output is None:
        sys.stdout.write(text)
    else:
        _atomic_write(output, text)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ktmix-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_schemas(names, columns, config: RunConfig) -> list:
    overrides = {}
    if config.schema_path:
        with open(config.schema_path, "r", encoding="utf-8") as fh:
            loaded = json.load(fh)
        entries = loaded["columns"] if isinstance(loaded, dict) else loaded
        for entry in entries:
            overrides[entry["name"]] = ColumnSchema.from_config(entry)
    for flag, mapping in (("--mu", config.mu), ("--sigma", config.sigma),
                          ("--schema", overrides), ("--partition", config.partition_paths)):
        for name in mapping:
            if name not in names:
                raise DatasetError(f"{flag} names unknown column {name!r}")
    schemas = []
    for name, column in zip(names, columns):
        schema = overrides.get(name) or build_schema(name, column)
        if name in config.mu:
            schema.center = config.mu[name]
        if name in config.sigma:
            schema.scale = config.sigma[name]
        schemas.append(schema)
    return schemas


def _column_estimator(schema: ColumnSchema, config: RunConfig) -> MixtureEstimator:
    path = config.partition_paths.get(schema.name)
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            cut_levels = json.load(fh)
        partition = CustomPartition(cut_levels, support=schema.measure)
        if not partition.verify_refinement():
            raise DatasetError(f"custom partition for {schema.name!r} is not a refinement sequence")
    else:
        partition = HistogramSequence(
            schema.center, schema.scale, support=schema.measure, max_level=config.levels
        )
    return MixtureEstimator(partition, schema.measure)


def _base_report(command: str, args, names, columns, schemas) -> dict:
    return {
        "command": command,
        "input": args.data,
        "n_rows": int(columns[0].size),
        "schema": [s.to_config() for s in schemas],
    }


def _cmd_codelength(args):
    config = RunConfig.from_args(args)
    names, columns = parse_dataset(args.data)
    schemas = _resolve_schemas(names, columns, config)
    report = _base_report("codelength", args, names, columns, schemas)
    report["levels"] = config.levels
    report["columns"] = {}
    for name, column, schema in zip(names, columns, schemas):
        est = _column_estimator(schema, config)
        est.observe_many(column)
        bits = est.codelength_bits()
        report["columns"][name] = {
            "codelength_bits": bits,
            "bits_per_sample": bits / column.size,
        }
    _emit(report, config.output)


def _cmd_density(args):
    config = RunConfig.from_args(args)
    names, columns = parse_dataset(args.data)
    schemas = _resolve_schemas(names, columns, config)
    if args.column not in names:
        raise DatasetError(f"unknown column {args.column!r}")
    idx = names.index(args.column)
    column, schema = columns[idx], schemas[idx]
    est = _column_estimator(schema, config)
    est.observe_many(column)
    lo = float(column.min()) if args.grid_min is None else args.grid_min
    hi = float(column.max()) if args.grid_max is None else args.grid_max
    grid = np.linspace(lo, hi, args.grid_points)
    density = []
    for point in grid:
        try:
            density.append(est.density_at(float(point)))
        except OutOfSupportError:
            density.append(None)
    report = _base_report("density", args, names, columns, schemas)
    report["column"] = args.column
    report["levels"] = config.levels
    report["grid"] = [float(g) for g in grid]
    report["density"] = density
    report["state"] = est.export_state()
    _emit(report, config.output)


def _analyze_named_pair(names, columns, schemas, name_x, name_y, config: RunConfig):
    ix, iy = names.index(name_x), names.index(name_y)
    sx, sy = schemas[ix], schemas[iy]
    return analyze_pair(
        columns[ix], columns[iy],
        measure_x=sx.measure, measure_y=sy.measure,
        center_x=sx.center, scale_x=sx.scale,
        center_y=sy.center, scale_y=sy.scale,
        levels=config.levels, joint_levels=config.joint_levels,
        prior_p=config.prior_p,
    )


def _cmd_indep(args):
    config = RunConfig.from_args(args)
    names, columns = parse_dataset(args.data)
    schemas = _resolve_schemas(names, columns, config)
    for col in (args.col_x, args.col_y):
        if col not in names:
            raise DatasetError(f"unknown column {col!r}")
    pair = _analyze_named_pair(names, columns, schemas, args.col_x, args.col_y, config)
    report = _base_report("indep", args, names, columns, schemas)
    report["columns"] = [args.col_x, args.col_y]
    report["report"] = pair.to_dict()
    _emit(report, config.output)


def _cmd_forest(args):
    config = RunConfig.from_args(args)
    names, columns = parse_dataset(args.data)
    schemas = _resolve_schemas(names, columns, config)
    pair_table = {}
    pairs_out = []
    for name_x, name_y in combinations(names, 2):
        pair = _analyze_named_pair(names, columns, schemas, name_x, name_y, config)
        pair_table[(name_x, name_y)] = pair
        pairs_out.append({"columns": sorted((name_x, name_y)), **pair.to_dict()})
    pairs_out.sort(key=lambda entry: entry["columns"])
    edges = build_forest(pair_table)
    report = _base_report("forest", args, names, columns, schemas)
    report["pairs"] = pairs_out
    report["edges"] = [{"columns": [e.u, e.v], "weight": e.weight} for e in edges]
    _emit(report, config.output)


def _parse_column_specs(text: str) -> list:
    specs = []
    seen = set()
    for item in text.split(","):
        name, sep, kind = item.partition("=")
        name, kind = name.strip(), kind.strip()
        if not sep or not name or not kind:
            raise ValueError(f"--columns expects NAME=KIND entries, got {item!r}")
        if name in seen:
            raise ValueError(f"duplicate simulated column {name!r}")
        if kind.startswith("copy:"):
            source = kind[len("copy:"):]
            if source not in seen:
                raise ValueError(f"copy source {source!r} must be declared earlier")
        elif kind not in SIMULATE_KINDS:
            raise ValueError(f"unknown generator {kind!r} for column {name!r}")
        seen.add(name)
        specs.append((name, kind))
    return specs


def _cmd_simulate(args):
    specs = _parse_column_specs(args.columns)
    if args.rows < 1:
        raise ValueError("--rows must be at least 1")
    rng = np.random.default_rng(args.seed)
    data: dict[str, np.ndarray] = {}
    for name, kind in specs:
        if kind == "gaussian":
            data[name] = rng.standard_normal(args.rows)
        elif kind == "uniform":
            data[name] = rng.random(args.rows)
        elif kind == "bernoulli":
            data[name] = rng.integers(0, 2, args.rows).astype(float)
        elif kind == "mixed":
            spike = rng.random(args.rows) < 0.5
            body = rng.random(args.rows)
            data[name] = np.where(spike, 1.0, body)
        else:
            data[name] = data[kind[len("copy:"):]].copy()
    lines = [",".join(name for name, _ in specs)]
    for i in range(args.rows):
        lines.append(",".join(repr(float(data[name][i])) for name, _ in specs))
    _atomic_write(args.output, "\n".join(lines) + "\n")
    summary = {
        "command": "simulate",
        "columns": [name for name, _ in specs],
        "rows": args.rows,
        "seed": args.seed,
        "output": args.output,
    }
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _add_common_flags(sub, joint=False):
    sub.add_argument("data", help="comma-delimited input file with a header row")
    sub.add_argument("--levels", type=int, default=DEFAULT_MAX_LEVEL,
                     help="partition depth per column (default %(default)s)")
    if joint:
        sub.add_argument("--joint-levels", type=int, default=DEFAULT_JOINT_LEVEL,
                         dest="joint_levels",
                         help="partition depth per axis of the joint grid (default %(default)s)")
        sub.add_argument("--prior-p", type=float, default=0.5, dest="prior_p",
                         help="prior probability of independence (default %(default)s)")
    sub.add_argument("--mu", action="append", default=[], metavar="COL=VALUE",
                     help="histogram center override, repeatable")
    sub.add_argument("--sigma", action="append", default=[], metavar="COL=VALUE",
                     help="histogram scale override, repeatable")
    sub.add_argument("--schema", metavar="PATH", help="JSON schema overrides")
    sub.add_argument("--partition", action="append", default=[], metavar="COL=PATH",
                     help="custom partition (JSON cut-point arrays per level), repeatable")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--output", metavar="PATH", help="write the JSON report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktmix",
        description="Universal codelengths, densities, and dependence tests "
                    "for discrete, continuous, and mixed numeric columns.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("codelength", help="per-column codelength in bits")
    _add_common_flags(p)
    p.set_defaults(func=_cmd_codelength)

    p = sub.add_parser("density", help="predictive density of one column on a grid")
    _add_common_flags(p)
    p.add_argument("column")
    p.add_argument("--grid-min", type=float, default=None, dest="grid_min")
    p.add_argument("--grid-max", type=float, default=None, dest="grid_max")
    p.add_argument("--grid-points", type=int, default=201, dest="grid_points")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("indep", help="independence decision for two columns")
    _add_common_flags(p, joint=True)
    p.add_argument("col_x")
    p.add_argument("col_y")
    p.set_defaults(func=_cmd_indep)

    p = sub.add_parser("forest", help="dependency forest over all columns")
    _add_common_flags(p, joint=True)
    p.set_defaults(func=_cmd_forest)

    p = sub.add_parser("simulate", help="write a seeded synthetic dataset")
    p.add_argument("--columns", required=True,
                   help="NAME=KIND[,NAME=KIND...]; kinds: gaussian, uniform, "
                        "bernoulli, mixed, copy:COL")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (DatasetError, OutOfSupportError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
