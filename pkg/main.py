"""Command-line front end.

Usage examples::

    python main.py group build --kind heisenberg --param 5 --out h5.json
    python main.py angle report --group heisenberg --q 3 --r 2
    python main.py iterate --family family.json --max-n 60
    python main.py criterion --steinberg 3 1 1031
    python main.py expander --n 3 --q 2 --k 1 --format dot

Exit status: 0 on success, 2 when a verdict or certificate hypothesis
fails, 1 on any other error. Errors are printed to stderr as
``{code, message, context}`` JSON.
"""
import argparse
import json
import logging
import math
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.sparse.linalg import ArpackNoConvergence

import coset_spectra
import expander_forge
import finite_group
import projection_lab
import robust_t_criterion
from atomic_io import write_atomic
from constants import (
    DEFAULT_POINCARE_P,
    DEFAULT_R_GRID,
    FLOAT_SIGNIFICANT_DIGITS,
    ITERATION_TOL,
    POINCARE_RESTARTS,
    POINCARE_STEPS,
)
from errors import ConfigError, HypothesisError, RobustTError
from pydantic_models import RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_HYPOTHESIS = 2

GLOBAL_KEYS = ("seed", "output", "format")


def _encode(value: Any) -> str:
    """JSON text with floats at FLOAT_SIGNIFICANT_DIGITS; non-finite floats become strings."""
    if isinstance(value, dict):
        items = sorted(value.items(), key=lambda kv: str(kv[0]))
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    if isinstance(value, np.ndarray):
        return _encode(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            return json.dumps(str(number))
        return format(number, f".{FLOAT_SIGNIFICANT_DIGITS}g")
    if value is None:
        return "null"
    return json.dumps(str(value))


def dumps_report(report: Mapping[str, Any]) -> str:
    return _encode(report) + "\n"


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not read {path}: {e}", {"path": path}) from e


def _load_toml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "rb") as handle:
            return tomllib.load(handle)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"Could not read config {path}: {e}", {"path": path}) from e


# --- Subcommands ---------------------------------------------------------

class Outcome:
    """A report plus the exit status it implies."""

    def __init__(self, report: Dict[str, Any], status: int = EXIT_OK, text: Optional[str] = None):
        self.report = report
        self.status = status
        self.text = text


def _group_from_options(options: Mapping[str, Any]) -> finite_group.GroupTable:
    kind = options.get("group", options.get("kind", "heisenberg"))
    if kind == "custom":
        if "file" not in options:
            raise ConfigError("--group custom needs --file")
        return finite_group.group_from_json(_load_json(options["file"]))
    parameter = options.get("q", options.get("param"))
    if parameter is None:
        raise ConfigError(f"--group {kind} needs --q or --param")
    return finite_group.build_named(kind, int(parameter))


def run_group(config: RunConfig) -> Outcome:
    options = config.options
    table = _group_from_options(options)
    finite_group.validate_table(table, seed=config.seed)
    data = finite_group.group_to_json(table)
    if "out" in options:
        write_atomic(str(options["out"]), json.dumps(data, sort_keys=True) + "\n")
        logger.info("Wrote %s (order %d) to %s", table.name, table.order, options["out"])
    return Outcome(data)


def run_angle(config: RunConfig) -> Outcome:
    options = config.options
    table = _group_from_options(options)
    names = (str(options.get("k1", "K1")), str(options.get("k2", "K2")))
    k1, k2 = finite_group.pair_handles(table, names)
    r_values = [float(r) for r in options.get("r", DEFAULT_R_GRID)]
    report = coset_spectra.angle_report(k1, k2, r_values, cap=config.caps.dense_order)
    data = coset_spectra.angle_report_to_json(report)
    data["group"] = table.name
    data["order"] = table.order
    bounds = coset_spectra.corollary_bounds(report)
    data["bounds"] = {"hilbert": bounds["hilbert"],
                      "schatten": {coset_spectra.exponent_key(r): v for r, v in bounds["schatten"].items()}}
    return Outcome(data)


def run_iterate(config: RunConfig) -> Outcome:
    options = config.options
    if "family" in options:
        family = projection_lab.family_from_json(_load_json(str(options["family"])), seed=config.seed)
    elif "random" in options:
        dim, n = (int(v) for v in options["random"])
        family = projection_lab.random_family(dim, n, seed=config.seed, angle=float(options.get("angle", 0.01)),
                                              skew=float(options.get("skew", 0.0)))
    else:
        raise ConfigError("iterate needs --family FILE or --random DIM N")
    certificate = projection_lab.iterate_averaged(family, max_n=int(options.get("max_n", 60)),
                                                  tol=float(options.get("tol", ITERATION_TOL)))
    data = projection_lab.certificate_to_json(certificate, family)
    status = EXIT_OK if certificate.mode == "certified" else EXIT_HYPOTHESIS
    return Outcome(data, status)


def _scheme_from_options(options: Mapping[str, Any]) -> robust_t_criterion.GeneratorScheme:
    if "steinberg" in options:
        n, m, q = (int(v) for v in options["steinberg"])
        return robust_t_criterion.steinberg_scheme(n, m, q)
    if "kms" in options:
        path, q = options["kms"]
        graph = _load_json(str(path))
        try:
            return robust_t_criterion.kms_scheme(int(graph["n_vertices"]), graph.get("edges", []), int(q))
        except (KeyError, TypeError, AttributeError) as e:
            raise ConfigError(f"Graph file {path} needs n_vertices and edges", {"path": path}) from e
    if "links" in options:
        if "rank" not in options:
            raise ConfigError("--links needs --rank n")
        table = coset_spectra.link_ingest(str(options["links"]))
        return robust_t_criterion.link_scheme(table, int(options["rank"]))
    if "scheme" in options:
        path = str(options["scheme"])
        return robust_t_criterion.scheme_from_json(_load_json(path), name=os.path.basename(path))
    raise ConfigError("criterion needs --scheme, --steinberg, --kms or --links")


def run_criterion(config: RunConfig) -> Outcome:
    options = config.options
    scheme = _scheme_from_options(options)
    criterion_options = robust_t_criterion.CriterionOptions(
        epsilon=options.get("epsilon"),
        c_prime=options.get("c_prime"),
        r_grid=tuple(float(r) for r in options.get("r", DEFAULT_R_GRID)),
        type_constant=float(options.get("type_constant", 1.0)),
        cotype_constant=float(options.get("cotype_constant", 1.0)),
    )
    report = robust_t_criterion.evaluate(scheme, criterion_options)
    status = EXIT_OK if report.verdict == "certified" else EXIT_HYPOTHESIS
    return Outcome(robust_t_criterion.report_to_json(report), status,
                   text=robust_t_criterion.render_report(report) + "\n")


def run_expander(config: RunConfig) -> Outcome:
    options = config.options
    try:
        n, q, k = int(options["n"]), int(options["q"]), int(options["k"])
    except KeyError as e:
        raise ConfigError(f"expander needs --n, --q and --k (missing {e.args[0]})") from e
    quotient = expander_forge.build_quotient(n, q, k, cap=config.caps.cayley_vertices)
    graph = expander_forge.cayley_graph(quotient)
    if "export" in options:
        export_format = str(options.get("export_format", "json"))
        expander_forge.export(graph, export_format, str(options["export"]))  # type: ignore[arg-type]
    if config.format in ("dot", "csv_edges"):
        return Outcome({}, text=expander_forge.render_graph(graph, config.format))
    report = expander_forge.poincare_constants(
        graph, [float(p) for p in options.get("p", DEFAULT_POINCARE_P)], seed=config.seed,
        restarts=int(options.get("restarts", POINCARE_RESTARTS)),
        steps=int(options.get("steps", POINCARE_STEPS)))
    data = expander_forge.poincare_to_json(report)
    data.update({
        "n": n, "q": q, "k": k,
        "sl_order": expander_forge.sl_order(n, q, k),
        "generators": list(graph.generator_labels),
        "degenerate": [g.label for g in expander_forge.steinberg_generators(n, q, k) if g.degenerate],
    })
    return Outcome(data)


COMMANDS: Dict[str, Callable[[RunConfig], Outcome]] = {
    "group": run_group,
    "angle": run_angle,
    "iterate": run_iterate,
    "criterion": run_criterion,
    "expander": run_expander,
}


def run(config: RunConfig) -> Tuple[int, str]:
    """Execute one validated configuration; returns ``(status, rendered output)``."""
    outcome = COMMANDS[config.command](config)
    if outcome.text is not None and config.format != "json":
        rendered = outcome.text
    elif config.format == "text":
        rendered = "".join(f"{key}: {_encode(value)}\n" for key, value in sorted(outcome.report.items()))
    else:
        rendered = dumps_report(outcome.report)
    if config.output:
        write_atomic(config.output, rendered)
    return outcome.status, rendered


# --- Argument parsing ----------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robust-t", description="Robust Banach property (T) toolkit",
                                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--config", help="TOML file mirroring the flags")
    parser.add_argument("--verbose", action="store_true", help="Debug logging on stderr")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output", help="Write the report here instead of stdout")
    parser.add_argument("--format", choices=["json", "text", "dot", "csv_edges"])
    parser.add_argument("--dense-cap", dest="dense_order", type=int)
    parser.add_argument("--cayley-cap", dest="cayley_vertices", type=int)
    sub = parser.add_subparsers(dest="command", required=True)

    group = sub.add_parser("group", argument_default=argparse.SUPPRESS)
    group.add_argument("action", choices=["build"])
    group.add_argument("--kind", choices=["heisenberg", "product", "sym", "dihedral"])
    group.add_argument("--param", type=int)
    group.add_argument("--q", type=int)
    group.add_argument("--out")

    angle = sub.add_parser("angle", argument_default=argparse.SUPPRESS)
    angle.add_argument("action", choices=["report"])
    angle.add_argument("--group", choices=["heisenberg", "product", "sym", "dihedral", "custom"])
    angle.add_argument("--q", type=int)
    angle.add_argument("--param", type=int)
    angle.add_argument("--file")
    angle.add_argument("--k1")
    angle.add_argument("--k2")
    angle.add_argument("--r", type=float, nargs="+")

    iterate = sub.add_parser("iterate", argument_default=argparse.SUPPRESS)
    iterate.add_argument("--family")
    iterate.add_argument("--random", type=int, nargs=2, metavar=("DIM", "N"))
    iterate.add_argument("--angle", type=float)
    iterate.add_argument("--skew", type=float)
    iterate.add_argument("--max-n", dest="max_n", type=int)
    iterate.add_argument("--tol", type=float)

    criterion = sub.add_parser("criterion", argument_default=argparse.SUPPRESS)
    source = criterion.add_mutually_exclusive_group()
    source.add_argument("--scheme")
    source.add_argument("--steinberg", type=int, nargs=3, metavar=("N", "M", "Q"))
    source.add_argument("--kms", nargs=2, metavar=("GRAPH", "Q"))
    source.add_argument("--links")
    criterion.add_argument("--rank", type=int)
    criterion.add_argument("--epsilon", type=float)
    criterion.add_argument("--c-prime", dest="c_prime", type=float)
    criterion.add_argument("--r", type=float, nargs="+")
    criterion.add_argument("--type-constant", dest="type_constant", type=float)
    criterion.add_argument("--cotype-constant", dest="cotype_constant", type=float)

    expander = sub.add_parser("expander", argument_default=argparse.SUPPRESS)
    expander.add_argument("--n", type=int)
    expander.add_argument("--q", type=int)
    expander.add_argument("--k", type=int)
    expander.add_argument("--p", type=float, nargs="*")
    expander.add_argument("--restarts", type=int)
    expander.add_argument("--steps", type=int)
    expander.add_argument("--export")
    expander.add_argument("--export-format", dest="export_format", choices=["dot", "csv_edges", "json"])
    return parser


def merge_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the TOML file; the merged mapping is validated as RunConfig."""
    given = vars(args).copy()
    merged: Dict[str, Any] = _load_toml(given.pop("config")) if "config" in given else {}
    merged.pop("verbose", None)
    given.pop("verbose", None)
    merged["command"] = given.pop("command")
    caps = dict(merged.get("caps", {}))
    for key in ("dense_order", "cayley_vertices"):
        if key in given:
            caps[key] = given.pop(key)
    merged["caps"] = caps
    for key in GLOBAL_KEYS:
        if key in given:
            merged[key] = given.pop(key)
    options = dict(merged.get("options", {}))
    options.update(given)
    merged["options"] = options
    try:
        return RunConfig.model_validate(merged)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e.errors()[0]['msg']}",
                          {"errors": [str(err["loc"]) for err in e.errors()]}) from e


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(getattr(args, "verbose", False))
    try:
        config = merge_config(args)
        status, rendered = run(config)
    except HypothesisError as e:
        sys.stderr.write(json.dumps(e.to_diagnostic(), sort_keys=True, default=str) + "\n")
        return EXIT_HYPOTHESIS
    except RobustTError as e:
        sys.stderr.write(json.dumps(e.to_diagnostic(), sort_keys=True, default=str) + "\n")
        return EXIT_ERROR
    except (np.linalg.LinAlgError, ArpackNoConvergence) as e:
        diagnostic = {"code": "numerical_failure", "message": str(e), "context": {"error": type(e).__name__}}
        sys.stderr.write(json.dumps(diagnostic, sort_keys=True) + "\n")
        return EXIT_ERROR
    except OSError as e:
        diagnostic = {"code": "io_error", "message": str(e), "context": {"path": getattr(e, "filename", None)}}
        sys.stderr.write(json.dumps(diagnostic, sort_keys=True) + "\n")
        return EXIT_ERROR
    if not config.output:
        sys.stdout.write(rendered)
    return status


if __name__ == "__main__":
    sys.exit(main())
