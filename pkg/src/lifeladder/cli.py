"""Command-line pipeline over the happiness panel.

Four stages, each consuming the previous stage's files from the output
directory:

``prepare``
    load, filter, impute; write the continuous and discretized tables.
``predict``
    train GRNN (cross-validated bandwidth), OLS and ridge on 2016-2018,
    score the 2019 hold-out; write predictions, metrics and the
    predicted-vs-actual figure.
``learn``
    bootstrap hill-climb replicates, arc strengths, consensus DAG with
    smoothed CPTs; write tables, graph files and the network figure.
``query``
    conditional-probability queries on the consensus network, with
    ``--sweep`` emitting the per-level posterior table and bar figure.

One master seed derives every subordinate stream, so identical
configuration yields byte-identical delimited outputs. Exit statuses:
0 success, 1 usage or configuration, 2 data or schema, 3 numerical.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import variables as V
from .bayesnet import fit_cpts, read_net_text, write_dag_text, write_net_text
from .discretize import (
    Level,
    default_scheme,
    discretize,
    read_discrete_csv,
    write_discrete_csv,
    write_scheme,
)
from .errors import DataError, NumericalError, ParameterError, SingularSystemError
from .figures import plot_network, plot_predicted_vs_actual, plot_sweep
from .grnn import DEFAULT_FOLDS, DEFAULT_SIGMA_GRID, fit, predict_batch, save_model, select_sigma
from .inference import query, query_sweep, write_sweep_csv
from .linear import DEFAULT_LAMBDA_GRID, fit_linear, select_ridge_lambda
from .metrics import score, write_metrics_csv
from .pipeline import (
    SplitSpec,
    filter_countries,
    impute,
    load_raw,
    read_feature_csv,
    split,
    write_feature_csv,
)
from .structure import bootstrap_learn, consensus, write_arc_strengths_csv, write_dot

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

_FOLD_STREAM = 1
_BOOTSTRAP_STREAM = 2


def _derive_seed(master: int, stream: int) -> int:
    """Deterministic subordinate seed for one named stream."""
    return int(np.random.SeedSequence([master, stream]).generate_state(1)[0])


def _config_hash(config: dict) -> str:
    text = json.dumps(config, sort_keys=True, default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def _parse_grid(text: str) -> tuple[float, ...]:
    """Grid syntax: 'lo:hi:n' for n log-spaced points, or a comma list."""
    if ":" in text:
        lo, hi, n = text.split(":")
        return tuple(np.logspace(np.log10(float(lo)), np.log10(float(hi)), int(n)))
    return tuple(float(p) for p in text.split(","))


def _load_config_file(path):
    parser = configparser.ConfigParser(delimiters=("=",))
    parser.optionxform = str
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    aliases = {}
    if parser.has_section("columns"):
        known = set(V.ALL_VARIABLES) | {"country", "year"}
        for key, value in parser.items("columns"):
            if key not in known:
                raise ParameterError(f"unknown canonical column in config: {key!r}")
            aliases[key] = value
    run = dict(parser.items("run")) if parser.has_section("run") else {}
    allowed = {
        "sigma", "sigma_grid", "lambda_grid", "folds", "replicates",
        "threshold", "alpha", "seed",
    }
    for key in run:
        if key not in allowed:
            raise ParameterError(f"unknown [run] option in config: {key!r}")
    return aliases, run


def _resolve(args, run_options, name, cast, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in run_options:
        return cast(run_options[name])
    return default


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage problems, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lifeladder", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"lifeladder {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--config", default=None, help="INI config with [columns] aliases and [run] defaults")
    common.add_argument("--seed", type=int, default=None, help="master seed (default: 0)")

    p = sub.add_parser("prepare", parents=[common], help="filter, impute and discretize the raw panel")
    p.add_argument("--input", required=True, help="raw panel CSV")

    p = sub.add_parser("predict", parents=[common], help="train predictors on 2016-18, score the 2019 hold-out")
    p.add_argument("--sigma", type=float, default=None, help="fixed smoothing factor (skips cross-validation)")
    p.add_argument("--sigma-grid", dest="sigma_grid", type=_parse_grid, default=None,
                   help="bandwidth grid, 'lo:hi:n' log-spaced or comma list")
    p.add_argument("--lambda-grid", dest="lambda_grid", type=_parse_grid, default=None,
                   help="ridge penalty grid, same syntax")
    p.add_argument("--folds", type=int, default=None, help="cross-validation folds (default: 5)")

    p = sub.add_parser("learn", parents=[common], help="bootstrap structure learning and consensus network")
    p.add_argument("--replicates", type=int, default=None, help="bootstrap replicates (default: 10000)")
    p.add_argument("--threshold", type=float, default=None, help="consensus support threshold (default: 0.5)")
    p.add_argument("--alpha", type=float, default=None, help="CPT smoothing pseudo-count (default: 1.0)")

    p = sub.add_parser("query", parents=[common], help="conditional-probability query on the consensus network")
    p.add_argument("q", metavar="VARIABLE", help="query variable")
    p.add_argument("--evidence", action="append", default=[], metavar="VAR=LEVEL",
                   help="evidence assignment, repeatable")
    p.add_argument("--sweep", default=None, metavar="VAR",
                   help="sweep this variable over Low/Medium/High as sole evidence")
    return parser


def _slug(name: str) -> str:
    return name.lower().replace(" ", "_")


# -- commands -------------------------------------------------------------------

def cmd_prepare(args) -> int:
    aliases, run_options = _load_config_file(args.config) if args.config else ({}, {})
    seed = _resolve(args, run_options, "seed", int, 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    config = {
        "command": "prepare",
        "input": str(args.input),
        "aliases": aliases,
        "seed": seed,
    }
    h = _config_hash(config)

    raw = load_raw(args.input, aliases=aliases)
    filtered = filter_countries(raw)
    table = impute(filtered)
    scheme = default_scheme()
    discrete = discretize(table, scheme)

    write_feature_csv(table, out / "features.csv", provenance=f"config={h}")
    write_discrete_csv(discrete, out / "discrete.csv", provenance=f"config={h}")
    write_scheme(scheme, out / "scheme.ini", provenance=f"config={h}")
    provenance = {
        "config": h,
        "rows_loaded": len(raw),
        "rows_filtered": len(filtered),
        "rows_imputed": len(table),
        "countries": table.country_count,
        "years": list(table.years),
    }
    (out / "prepare.json").write_text(json.dumps(provenance, indent=2, sort_keys=True) + "\n")
    print(f"prepared {len(table)} rows, {table.country_count} countries -> {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    _, run_options = _load_config_file(args.config) if args.config else ({}, {})
    seed = _resolve(args, run_options, "seed", int, 0)
    folds = _resolve(args, run_options, "folds", int, DEFAULT_FOLDS)
    sigma_fixed = _resolve(args, run_options, "sigma", float, None)
    sigma_grid = _resolve(args, run_options, "sigma_grid", _parse_grid, DEFAULT_SIGMA_GRID)
    lambda_grid = _resolve(args, run_options, "lambda_grid", _parse_grid, DEFAULT_LAMBDA_GRID)
    out = Path(args.out)

    features_path = out / "features.csv"
    if not features_path.exists():
        raise FileNotFoundError(f"{features_path} (run 'lifeladder prepare' first)")

    config = {
        "command": "predict",
        "folds": folds,
        "sigma": sigma_fixed,
        "sigma_grid": [float(s) for s in sigma_grid],
        "lambda_grid": [float(g) for g in lambda_grid],
        "seed": seed,
    }
    h = _config_hash(config)

    table = read_feature_csv(features_path)
    train, test = split(table, SplitSpec())
    x_test = test.matrix(V.PREDICTORS)
    y_test = test.target()
    fold_seed = _derive_seed(seed, _FOLD_STREAM)

    if sigma_fixed is not None:
        sigma, cv_scores = float(sigma_fixed), []
    else:
        sigma, cv_scores = select_sigma(train, sigma_grid, k=folds, seed=fold_seed)
    model = fit(train, sigma)
    grnn_pred = predict_batch(model, x_test)
    reports = [score(grnn_pred, y_test, model_name="GRNN")]
    predictions = {"GRNN": grnn_pred}

    try:
        ols = fit_linear(train, ridge_lambda=0.0)
        predictions["OLS"] = ols.predict(x_test)
        reports.append(score(predictions["OLS"], y_test, model_name="OLS"))
    except SingularSystemError as exc:
        print(f"warning: OLS skipped ({exc})", file=sys.stderr)

    ridge_lambda, _ = select_ridge_lambda(train, lambda_grid, k=folds, seed=fold_seed)
    ridge = fit_linear(train, ridge_lambda=ridge_lambda)
    predictions["Ridge"] = ridge.predict(x_test)
    reports.append(score(predictions["Ridge"], y_test, model_name="Ridge"))

    write_metrics_csv(reports, out / "metrics.csv", provenance=f"config={h}")
    _write_predictions_csv(test, predictions, out / "predictions.csv", f"config={h}")
    if cv_scores:
        _write_cv_csv(sigma_grid, cv_scores, out / "sigma_cv.csv", f"config={h}")
    save_model(model, out / "grnn_model.json")
    plot_predicted_vs_actual(y_test, grnn_pred, out / "predicted_vs_actual.png", config_hash=h)

    for r in reports:
        print(f"{r.model_name}: r2={r.r2:.4f} mae={r.mae:.4f} mse={r.mse:.4f}")
    print(f"sigma={sigma:.6g} ridge_lambda={ridge_lambda:.6g} -> {out}")
    return EXIT_OK


def _write_predictions_csv(test, predictions, path, provenance):
    import csv

    names = list(predictions)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "year", "actual", *[n.lower() for n in names]])
        order = sorted(
            range(len(test.rows)),
            key=lambda i: (test.rows[i].country, test.rows[i].year),
        )
        for i in order:
            row = test.rows[i]
            cells = [row.country, str(row.year), f"{row.values[V.LIFE_LADDER]:.6f}"]
            cells += [f"{predictions[n][i]:.6f}" for n in names]
            writer.writerow(cells)


def _write_cv_csv(grid, scores, path, provenance):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {provenance}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sigma", "cv_mse"])
        for s, e in zip(grid, scores):
            writer.writerow([f"{s:.6f}", f"{e:.6f}"])


def cmd_learn(args) -> int:
    _, run_options = _load_config_file(args.config) if args.config else ({}, {})
    seed = _resolve(args, run_options, "seed", int, 0)
    replicates = _resolve(args, run_options, "replicates", int, 10000)
    threshold = _resolve(args, run_options, "threshold", float, 0.5)
    alpha = _resolve(args, run_options, "alpha", float, 1.0)
    out = Path(args.out)

    if not 0.0 < threshold <= 1.0:
        raise ParameterError(f"threshold must be in (0, 1], got {threshold}")
    if replicates < 1:
        raise ParameterError(f"replicates must be at least 1, got {replicates}")
    if alpha < 0:
        raise ParameterError(f"alpha must be nonnegative, got {alpha}")

    discrete_path = out / "discrete.csv"
    if not discrete_path.exists():
        raise FileNotFoundError(f"{discrete_path} (run 'lifeladder prepare' first)")

    config = {
        "command": "learn",
        "replicates": replicates,
        "threshold": threshold,
        "alpha": alpha,
        "seed": seed,
    }
    h = _config_hash(config)

    data = read_discrete_csv(discrete_path)
    boot_seed = _derive_seed(seed, _BOOTSTRAP_STREAM)
    strengths = bootstrap_learn(data, replicates=replicates, seed=boot_seed)
    dag = consensus(strengths, threshold=threshold)
    net = fit_cpts(dag, data, alpha=alpha)

    write_arc_strengths_csv(strengths, out / "arc_strengths.csv", provenance=f"config={h}")
    write_dag_text(dag, out / "consensus.dag", provenance=f"config={h}")
    write_net_text(net, out / "consensus.net", provenance=f"config={h}")
    write_dot(dag, out / "consensus.dot", ast=strengths, provenance=f"config={h}")
    plot_network(dag, out / "network.png", ast=strengths, config_hash=h)
    print(
        f"learned {replicates} replicates, consensus has {len(dag.edges)} arcs -> {out}"
    )
    return EXIT_OK


def _parse_evidence(net, pairs) -> dict[str, Level]:
    nodes = set(net.dag.nodes)
    evidence: dict[str, Level] = {}
    for pair in pairs:
        var, sep, level_text = pair.partition("=")
        var = var.strip()
        if not sep:
            raise ParameterError(f"evidence must look like VAR=LEVEL, got {pair!r}")
        if var not in nodes:
            raise ParameterError(
                f"unknown evidence variable {var!r}; valid: {', '.join(sorted(nodes))}"
            )
        if var in evidence:
            raise ParameterError(f"evidence assigns {var!r} twice")
        evidence[var] = Level.from_label(level_text)
    return evidence


def cmd_query(args) -> int:
    _, run_options = _load_config_file(args.config) if args.config else ({}, {})
    seed = _resolve(args, run_options, "seed", int, 0)
    out = Path(args.out)
    net_path = out / "consensus.net"
    if not net_path.exists():
        raise FileNotFoundError(f"{net_path} (run 'lifeladder learn' first)")
    net = read_net_text(net_path)
    nodes = set(net.dag.nodes)

    if args.q not in nodes:
        raise ParameterError(
            f"unknown query variable {args.q!r}; valid: {', '.join(sorted(nodes))}"
        )
    evidence = _parse_evidence(net, args.evidence)
    if args.q in evidence:
        raise ParameterError(f"query variable {args.q!r} cannot also be evidence")

    config = {
        "command": "query",
        "q": args.q,
        "evidence": {k: v.label for k, v in evidence.items()},
        "sweep": args.sweep,
        "seed": seed,
    }
    h = _config_hash(config)

    if args.sweep is not None:
        if args.sweep not in nodes:
            raise ParameterError(
                f"unknown sweep variable {args.sweep!r}; valid: {', '.join(sorted(nodes))}"
            )
        if evidence:
            raise ParameterError("--sweep uses the swept variable as sole evidence")
        sweep = query_sweep(net, args.q, args.sweep)
        stem = f"sweep_{_slug(args.q)}_by_{_slug(args.sweep)}"
        write_sweep_csv(sweep, args.q, args.sweep, out / f"{stem}.csv", provenance=f"config={h}")
        plot_sweep(sweep, args.q, args.sweep, out / f"{stem}.png", config_hash=h)
        for level, posterior in sweep:
            _print_posterior(posterior, {args.sweep: level})
        print(f"sweep table -> {out / (stem + '.csv')}")
    else:
        _print_posterior(query(net, args.q, evidence), evidence)
    return EXIT_OK


def _print_posterior(posterior, evidence):
    given = ", ".join(f"{k}={v.label}" for k, v in evidence.items())
    head = f"P({posterior.query_variable}" + (f" | {given})" if given else ")")
    print(head)
    for level in Level:
        print(f"  {level.label:<7} {posterior.probability(level):.6f}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    commands = {
        "prepare": cmd_prepare,
        "predict": cmd_predict,
        "learn": cmd_learn,
        "query": cmd_query,
    }
    try:
        return commands[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
