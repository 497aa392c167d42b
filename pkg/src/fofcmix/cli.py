"""Command-line front end: simulate, cluster, evaluate, study.

Every subcommand accepts ``--config FILE`` holding a JSON object whose keys
are flag names (dashes or underscores); flags given on the command line win.
Exit codes: 0 success, 1 runtime or estimation failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .correlation import mixed_matrix
from .data import SCHEMA_VERSION, CorrelationMatrix, read_dataset, read_matrix, write_dataset, write_matrix
from .errors import FofcError
from .evaluation import Condition, batch_score, final_precision, final_recall, write_score_csv
from .fofc import fofc_from_corr
from .simulate import (
    DATA_TYPE_CODES,
    MeasurementModelSpec,
    discretize,
    implied_covariance,
    make_plan,
    random_model,
    simulate_gaussian,
)
from .studies import CATEGORY_FIELDS, TETRAD_FIELDS, category_ratio_sweep, tetrad_ratio_sweep, write_records
from .tetrad import TESTS, TetradConfig

ESTIMATORS = {"pearson": "pearson", "rank": "rank", "tetrachoric": "polychoric", "polychoric": "polychoric"}
STUDY_MODES = ("tetrad-ratio", "category-ratio")


class UsageError(Exception):
    """Bad flags or unreadable inputs; mapped to exit code 2."""


def _int_list(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x.strip()]


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in str(text).split(",") if x.strip()]


def _add_tetrad_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=TetradConfig.alpha, help="tetrad test level")
    p.add_argument("--zero-corr-alpha", type=float, default=TetradConfig.zero_corr_alpha,
                   help="level of the screen that drops uncorrelated pairs")
    p.add_argument("--test", choices=TESTS, default=TetradConfig.test)


def build_parser():
    """Returns the top-level parser and its subparser action."""
    parser = argparse.ArgumentParser(prog="fofcmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a measurement model and write a dataset")
    sim.add_argument("--config")
    sim.add_argument("--latents", type=int, default=5)
    sim.add_argument("--children", type=int, default=4)
    sim.add_argument("--latent-edges", type=int, default=3)
    sim.add_argument("--impurities", type=int, default=0)
    sim.add_argument("--n", type=int, default=2000)
    sim.add_argument("--categories", default="0",
                     help="0 continuous, 2 median binary, 2_ non-median binary, 3..8 k-ary")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", help="dataset CSV path; metadata goes next to it as .json")
    sim.add_argument("--implied-out", help="also write the population correlation matrix here")

    clu = sub.add_parser("cluster", help="run FOFC on a dataset or a correlation matrix")
    clu.add_argument("--config")
    clu.add_argument("--in", dest="input", help="dataset CSV")
    clu.add_argument("--matrix", help="correlation matrix CSV instead of a dataset")
    clu.add_argument("--n", type=int, help="sample size behind --matrix")
    clu.add_argument("--population", action="store_true", default=False,
                     help="treat --matrix as exact: tetrads vanish only numerically")
    clu.add_argument("--estimator", choices=sorted(ESTIMATORS), default="pearson")
    _add_tetrad_flags(clu)
    clu.add_argument("--out", help="clustering JSON path (stdout when omitted)")

    ev = sub.add_parser("evaluate", help="score clusterings against the simulated truth")
    ev.add_argument("--config")
    ev.add_argument("--clustering", help="clustering JSON from 'cluster' (single-run mode)")
    ev.add_argument("--in", dest="input", help="dataset CSV whose metadata holds the true model")
    ev.add_argument("--batch", action="store_true", default=False, help="run the simulation protocol")
    ev.add_argument("--latents", type=int, default=5)
    ev.add_argument("--children", type=int, default=4)
    ev.add_argument("--latent-edges", default="0,1,3,6,7,9", help="comma-separated list")
    ev.add_argument("--impurities", type=int, default=0)
    ev.add_argument("--categories", default="0,2,2_,3,4,5,6,7,8", help="comma-separated codes")
    ev.add_argument("--n", default="2000", help="comma-separated sample sizes")
    ev.add_argument("--estimator", default="pearson", help="comma-separated estimators")
    _add_tetrad_flags(ev)
    ev.add_argument("--reps", type=int, default=40)
    ev.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--out", help="score CSV path")

    st = sub.add_parser("study", help="discretization sweeps behind the ratio figures")
    st.add_argument("--config")
    st.add_argument("--mode", choices=STUDY_MODES)
    st.add_argument("--reps", type=int, default=50,
                    help="tetrad-ratio: draws per grid point; category-ratio: number of seeds")
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--out", help="records CSV path")
    return parser, sub


def parse_args(argv=None) -> argparse.Namespace:
    parser, sub = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    ns = parser.parse_args(argv)
    if ns.config:
        path = Path(ns.config)
        if not path.is_file():
            parser.error(f"config file not found: {path}")
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            parser.error(f"config file {path} is not valid JSON: {exc}")
        if not isinstance(cfg, dict):
            parser.error("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        cfg = {("input" if k == "in" else k): v for k, v in cfg.items()}
        unknown = sorted(set(cfg) - set(vars(ns)) - {"command"})
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        sub.choices[ns.command].set_defaults(**cfg)
        ns = parser.parse_args(argv)
    ns._parser = parser
    return ns


def _tetrad_cfg(ns, population: bool = False) -> TetradConfig:
    try:
        return TetradConfig(alpha=ns.alpha, zero_corr_alpha=ns.zero_corr_alpha, test=ns.test,
                            population=population)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _require(ns, *names):
    missing = [n for n in names if getattr(ns, n) in (None, "")]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _existing(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    return path


def _emit_json(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
    else:
        print(text)


# --- subcommands -----------------------------------------------------------


def cmd_simulate(ns) -> int:
    _require(ns, "out")
    code = str(ns.categories)
    if code not in DATA_TYPE_CODES:
        raise UsageError(f"--categories must be one of {', '.join(DATA_TYPE_CODES)}")
    if ns.latents < 1 or ns.children < 1:
        raise UsageError("--latents and --children must be positive")
    max_edges = ns.latents * (ns.latents - 1) // 2
    if not 0 <= ns.latent_edges <= max_edges:
        raise UsageError(f"--latent-edges must be in [0, {max_edges}] for {ns.latents} latents")
    if ns.n < 4:
        raise UsageError("--n must be at least 4")
    graph_ss, data_ss, cut_ss = np.random.SeedSequence(ns.seed).spawn(3)
    graph_seed, data_seed, cut_seed = (int(s.generate_state(1)[0]) for s in (graph_ss, data_ss, cut_ss))
    try:
        spec = random_model(ns.latents, ns.children, ns.latent_edges, ns.impurities, seed=graph_seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data = simulate_gaussian(spec, ns.n, seed=data_seed)
    if code != "0":
        data = discretize(data, make_plan(data.p, code, cut_seed))
    command = {
        "latents": ns.latents, "children": ns.children, "latent_edges": ns.latent_edges,
        "impurities": ns.impurities, "n": ns.n, "categories": code, "seed": ns.seed,
    }
    write_dataset(data, ns.out, {"command": command, "cutoff_seed": cut_seed if code != "0" else None})
    if ns.implied_out:
        implied = implied_covariance(spec)
        write_matrix(implied.values, implied.names, ns.implied_out)
    print(f"wrote {data.n} x {data.p} dataset to {ns.out}", file=sys.stderr)
    return 0


def _load_corr(ns) -> CorrelationMatrix:
    if ns.estimator not in ESTIMATORS:
        raise UsageError(f"--estimator must be one of {', '.join(sorted(ESTIMATORS))}")
    if bool(ns.input) == bool(ns.matrix):
        raise UsageError("give exactly one of --in and --matrix")
    if ns.matrix:
        m, names = read_matrix(_existing(ns.matrix))
        if ns.population:
            n = ns.n if ns.n is not None else 10**6
        else:
            _require(ns, "n")
            n = ns.n
        return CorrelationMatrix(m, "given", n, names, population=ns.population)
    data = read_dataset(_existing(ns.input))
    return mixed_matrix(data, ESTIMATORS[ns.estimator])


def cmd_cluster(ns) -> int:
    config = {
        "estimator": ns.estimator, "alpha": ns.alpha, "zero_corr_alpha": ns.zero_corr_alpha,
        "test": ns.test, "population": ns.population, "input": ns.input, "matrix": ns.matrix,
        "n": ns.n,
    }
    try:
        corr = _load_corr(ns)
        cfg = _tetrad_cfg(ns, population=corr.population)
        clustering = fofc_from_corr(corr, cfg)
    except FofcError as exc:
        _emit_json({
            "schema_version": SCHEMA_VERSION, "status": "error",
            "error": {"type": type(exc).__name__, "message": str(exc)}, "config": config,
        }, ns.out)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    config["n"] = corr.n
    _emit_json({
        "schema_version": SCHEMA_VERSION, "status": "ok", "config": config,
        "p": corr.p, "names": corr.names, **clustering.to_dict(),
    }, ns.out)
    return 0


def _score_single(ns) -> int:
    _require(ns, "clustering", "input", "out")
    result = json.loads(_existing(ns.clustering).read_text())
    data = read_dataset(_existing(ns.input))
    if result.get("status") != "ok":
        print("error: clustering file records a failed run", file=sys.stderr)
        return 1
    if "spec" not in data.metadata:
        print(f"error: {ns.input} carries no simulated model in its metadata", file=sys.stderr)
        return 1
    spec = MeasurementModelSpec.from_dict(data.metadata["spec"])
    if result.get("names") != spec.measured_names():
        print("error: clustering variables do not match the dataset's model", file=sys.stderr)
        return 1
    clusters = [c["indices"] for c in result["clusters"]]
    truth = spec.true_clusters()
    precision = final_precision(clusters, truth)
    row = {
        "source": ns.clustering,
        "precision": "NA" if precision is None else precision,
        "recall": final_recall(clusters, truth),
        "clusters": len(clusters),
        "coverage": 0.0 if precision is None else 1.0,
    }
    Path(ns.out).parent.mkdir(parents=True, exist_ok=True)
    with Path(ns.out).open("w") as fh:
        fh.write(",".join(row) + "\n")
        fh.write(",".join(str(v) for v in row.values()) + "\n")
    return 0


def _score_batch(ns) -> int:
    _require(ns, "out")
    try:
        edges = _int_list(ns.latent_edges)
        sizes = _int_list(ns.n)
    except ValueError as exc:
        raise UsageError(f"bad integer list: {exc}") from exc
    codes = _str_list(ns.categories)
    estimators = _str_list(ns.estimator)
    bad = [c for c in codes if c not in DATA_TYPE_CODES]
    if bad:
        raise UsageError(f"unknown data-type codes: {bad}")
    bad = [e for e in estimators if e not in ESTIMATORS]
    if bad:
        raise UsageError(f"unknown estimators: {bad}")
    max_edges = ns.latents * (ns.latents - 1) // 2
    if any(not 0 <= e <= max_edges for e in edges):
        raise UsageError(f"latent edge counts must lie in [0, {max_edges}]")
    if ns.reps < 1 or ns.jobs < 1:
        raise UsageError("--reps and --jobs must be positive")
    conditions = [
        Condition(ns.latents, ns.children, e, ns.impurities, c, n, ESTIMATORS[est])
        for e in edges for c in codes for n in sizes for est in estimators
    ]
    rows = batch_score(conditions, ns.reps, ns.seed, _tetrad_cfg(ns), jobs=ns.jobs)
    write_score_csv(rows, ns.out)
    echo = {
        "schema_version": SCHEMA_VERSION, "master_seed": ns.seed, "reps": ns.reps,
        "conditions": [c.key for c in conditions],
        "tetrad": {"alpha": ns.alpha, "zero_corr_alpha": ns.zero_corr_alpha, "test": ns.test},
        "runs": [
            {"condition": r.condition, "rep": r.rep, "precision": r.precision,
             "recall": r.recall, "clusters": r.clusters}
            for row in rows for r in row.runs
        ],
    }
    Path(ns.out).with_suffix(".json").write_text(json.dumps(echo, indent=2))
    return 0


def cmd_evaluate(ns) -> int:
    return _score_batch(ns) if ns.batch else _score_single(ns)


def cmd_study(ns) -> int:
    _require(ns, "mode", "out")
    if ns.mode not in STUDY_MODES:
        raise UsageError(f"--mode must be one of {', '.join(STUDY_MODES)}")
    if ns.reps < 1:
        raise UsageError("--reps must be positive")
    if ns.mode == "tetrad-ratio":
        records = tetrad_ratio_sweep(reps=ns.reps, seed=ns.seed)
        write_records(records, ns.out, TETRAD_FIELDS)
        skipped = sum(r["skipped"] for r in records)
        print(f"{len(records)} records, {skipped} skipped for a zero denominator", file=sys.stderr)
    else:
        records = [r for s in range(ns.seed, ns.seed + ns.reps) for r in category_ratio_sweep(seed=s)]
        write_records(records, ns.out, CATEGORY_FIELDS)
    return 0


COMMANDS = {"simulate": cmd_simulate, "cluster": cmd_cluster, "evaluate": cmd_evaluate, "study": cmd_study}


def main(argv=None) -> int:
    ns = parse_args(argv)
    try:
        return COMMANDS[ns.command](ns)
    except UsageError as exc:
        ns._parser.error(str(exc))
    except FofcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
