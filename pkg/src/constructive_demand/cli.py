"""Command-line front end: scenario in, JSON envelope (and CSV) out.

Every run writes ``{command, params, seed, result, timings}``; failures
write the same envelope with ``error`` in place of ``result``. Exit status
is 0 on success, 1 on domain errors (empty budget set, oracle not strictly
convex), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Optional

import jsonschema
import numpy as np

from . import equilibrium as eq
from . import foundations as fd
from .demand import BudgetSpec, budget_body, verify_gamma_uniform_continuity
from .errors import DomainError, ValidationError
from .geometry import BallHalfspace, BoxHalfspace, body_from_json, hausdorff_bound
from .maximizer import check_dominance, maximize_body
from .preference import NegQuadratic, neg_quadratic_concavity, parse_utility, uniform_modulus

# -- schemas ----------------------------------------------------------------

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_BODY = {
    "type": "object",
    "required": ["shape"],
    "properties": {
        "shape": {"enum": ["interval", "box", "ball"]},
        "bounds": {"type": "array"},
        "center": {"type": "array", "items": _NUM},
        "radius": {"type": "number", "minimum": 0},
        "p": {"type": "array", "items": _NUM},
        "w": _NUM,
    },
}
_VECTOR = {"type": "array", "items": _NUM, "minItems": 1}


def _schema(required: list[str], **props) -> dict:
    return {"type": "object", "required": required, "properties": props, "additionalProperties": False}


SCHEMAS: dict[str, dict] = {
    "maximize": _schema(
        ["body", "utility"],
        body=_BODY,
        utility={"type": "string"},
        tol=_POS,
        dominanceSamples={"type": "integer", "minimum": 0},
        dominanceEps=_POS,
    ),
    "demand": _schema(["utility", "ambient", "p", "w"], utility={"type": "string"}, ambient=_BODY, p=_VECTOR, w=_NUM, tol=_POS),
    "verify-gamma": _schema(
        ["eps", "trials"],
        utility={"type": "string"},
        ambient=_BODY,
        eps=_POS,
        trials={"type": "integer", "minimum": 0},
        tol=_POS,
        delta=_POS,
        sampler={"enum": ["halfspace", "flip"]},
    ),
    "equilibrium": _schema(
        ["economy"],
        economy={"oneOf": [{"const": "labor"}, {"type": "object", "required": ["consumers"]}]},
        eps=_POS,
        gridDepth={"type": "integer", "minimum": 1, "maximum": 16},
        tol=_POS,
    ),
    "counterexample": _schema(
        [], sweep={"type": "string", "pattern": r"^[0-9.eE+-]+:[0-9.eE+-]+$"}, tol=_POS, paperLiteral={"type": "boolean"}
    ),
    "fan": _schema(
        ["bar"],
        bar={"enum": sorted(fd.BARS)},
        limit={"type": "integer", "minimum": 1, "maximum": 40},
        cantorDepth={"type": "integer", "minimum": 0, "maximum": 16},
    ),
    "predicate": _schema(
        ["name"],
        name={"enum": sorted(fd.PREDICATES)},
        eps=_POS,
        grid=_POS,
        deltaStep=_POS,
        auditTrials={"type": "integer", "minimum": 0},
    ),
    "hausdorff": _schema(["a", "b"], a=_BODY, b=_BODY, eps=_POS),
}

STOCHASTIC = {"verify-gamma"}


def validate(command: str, params: dict) -> None:
    if command not in SCHEMAS:
        raise ValidationError(f"unknown command {command!r}")
    try:
        jsonschema.validate(params, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        path = "/".join(map(str, exc.absolute_path)) or "<params>"
        raise ValidationError(f"{path}: {exc.message}") from exc


# -- commands ---------------------------------------------------------------


class Run:
    """Mutable context handed to a command: seed, workers and CSV sink."""

    def __init__(self, seed: Optional[int], workers: int):
        self.seed = seed
        self.workers = workers
        self.csv: dict[str, str] = {}


def cmd_maximize(params: dict, run: Run) -> dict:
    body = body_from_json(params["body"])
    pref = parse_utility(params["utility"])
    res = maximize_body(pref, body, params.get("tol", 1e-6))
    out = res.to_json()
    samples = params.get("dominanceSamples", 0)
    if samples:
        rep = check_dominance(pref, body, res.xi, samples, params.get("dominanceEps", 1e-2), np.random.default_rng(run.seed))
        out["dominance"] = rep.to_json()
    return out


def cmd_demand(params: dict, run: Run) -> dict:
    spec = BudgetSpec(tuple(params["p"]), params["w"], body_from_json(params["ambient"]))
    res = maximize_body(parse_utility(params["utility"]), budget_body(spec), params.get("tol", 1e-6))
    return {"xi": list(res.xi), "bracketWidth": res.bracket_width, "comparisons": res.comparisons}


def cmd_verify_gamma(params: dict, run: Run) -> dict:
    eps, trials, tol = params["eps"], params["trials"], params.get("tol", 1e-4)
    if params.get("sampler") == "flip":
        if "delta" not in params:
            raise ValidationError("the flip sampler needs an explicit delta")
        pref = parse_utility(params.get("utility", "linear(0,1)"))
        ambient = BoxHalfspace.box([(0.0, 1.0), (-1.0, 1.0)])
        report = verify_gamma_uniform_continuity(
            pref, ambient, eps, trials, tol, run.seed, params["delta"], fd.flip_pair, run.workers
        )
        modulus = None
    else:
        pref = parse_utility(params.get("utility", "neg-quadratic(0.3,0)"))
        ambient = body_from_json(params.get("ambient", BallHalfspace.ball((0.0,) * pref.dimension, 1.0).to_json()))
        modulus = None
        if isinstance(pref.utility, NegQuadratic):
            data = neg_quadratic_concavity(pref.utility, ambient)
            pref = pref.with_rotundity(uniform_modulus(data))
            modulus = {"alpha": data.alpha, "lipschitz": data.lipschitz}
        elif "delta" not in params:
            raise ValidationError("no certified modulus for this utility; pass delta")
        report = verify_gamma_uniform_continuity(
            pref, ambient, eps, trials, tol, run.seed, params.get("delta"), None, run.workers
        )
    run.csv["verify-gamma.csv"] = report.rows_csv()
    return {"report": report.to_json(), "strongConcavity": modulus}


def cmd_equilibrium(params: dict, run: Run) -> dict:
    econ = eq.labor_economy() if params["economy"] == "labor" else eq.economy_from_json(params["economy"])
    outcome = eq.search_equilibrium(econ, params.get("eps", 1e-2), params.get("gridDepth", 7), params.get("tol", 1e-6))
    return {"cone": eq.audit_cone(econ).to_json(), **outcome.to_json()}


def cmd_counterexample(params: dict, run: Run) -> dict:
    hi, lo = (float(v) for v in params.get("sweep", "1e-1:1e-12").split(":"))
    tol = params.get("tol", 1e-6)
    rows = [fd.demonstrate_instability(d, tol) for d in fd.decade_sweep(hi, lo)]
    lines = ["delta_x,argmax_plus,argmax_minus,jump,contrast_jump"]
    lines += [f"{r.delta_x!r},{r.argmax_plus!r},{r.argmax_minus!r},{r.jump!r},{r.contrast_jump!r}" for r in rows]
    run.csv["counterexample.csv"] = "\n".join(lines) + "\n"
    out: dict[str, Any] = {"sweep": [r.to_json() for r in rows]}
    if params.get("paperLiteral"):
        f = fd.counterexample_utility(hi if hi < 0.25 else 0.1, paper_literal=True)
        out["paperLiteralSamples"] = {str(t): f(t) for t in (0.0, 0.25, 0.5, 0.75, 1.0)}
    return out


def cmd_fan(params: dict, run: Run) -> dict:
    bar = fd.BARS[params["bar"]]
    depth = params.get("cantorDepth", 10)
    intervals = [fd.cantor_encode(w) for w in fd.words(depth)]
    return {
        "bound": fd.find_uniform_bound(bar, params.get("limit", 20)).to_json(),
        "cantorDepth": depth,
        "cantorCovers": fd.covers_unit_interval(intervals),
    }


def cmd_predicate(params: dict, run: Run) -> dict:
    pred = fd.PREDICATES[params["name"]]
    step = params.get("deltaStep", 0.002)
    eps = params.get("eps", 0.1)
    delta = fd.predicate_uniform_delta(pred, eps, params.get("grid", 1e-3 if pred.dimension == 1 else 1e-2), fd.default_delta_grid(step))
    out: dict[str, Any] = {"delta": delta, "deltaStep": step}
    trials = params.get("auditTrials", 0)
    if trials:
        out["conditionII"] = fd.audit_condition_ii(pred, trials, np.random.default_rng(run.seed)).to_json()
    return out


def cmd_hausdorff(params: dict, run: Run) -> dict:
    a, b = body_from_json(params["a"]), body_from_json(params["b"])
    est, upper = hausdorff_bound(a, b, params.get("eps", 1e-3))
    return {"estimate": est, "upper": upper}


COMMANDS: dict[str, Callable[[dict, Run], dict]] = {
    "maximize": cmd_maximize,
    "demand": cmd_demand,
    "verify-gamma": cmd_verify_gamma,
    "equilibrium": cmd_equilibrium,
    "counterexample": cmd_counterexample,
    "fan": cmd_fan,
    "predicate": cmd_predicate,
    "hausdorff": cmd_hausdorff,
}


def _needs_seed(command: str, params: dict) -> bool:
    return (
        command in STOCHASTIC
        or (command == "maximize" and params.get("dominanceSamples", 0) > 0)
        or (command == "predicate" and params.get("auditTrials", 0) > 0)
    )


# -- envelope ---------------------------------------------------------------


def _finite(obj: Any) -> Any:
    """Replace non-finite floats by None so the output stays strict JSON."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def dumps(envelope: dict) -> str:
    return json.dumps(_finite(envelope), sort_keys=True, indent=2, allow_nan=False) + "\n"


def execute(command: str, params: dict, seed: Optional[int] = None, workers: int = 1) -> tuple[int, dict, dict]:
    """Validate and run one scenario. Returns (exit status, envelope, csv files)."""
    envelope: dict[str, Any] = {"command": command, "params": params, "seed": seed}
    run = Run(seed, workers)
    start = time.perf_counter()
    try:
        validate(command, params)
        if _needs_seed(command, params) and seed is None:
            raise ValidationError(f"{command} is stochastic here and needs --seed")
        if workers < 1:
            raise ValidationError("--workers must be >= 1")
        envelope["result"] = COMMANDS[command](params, run)
        status = 0
    except DomainError as exc:
        envelope["error"] = {"type": type(exc).__name__, "message": str(exc)}
        status = 1
    except ValidationError as exc:
        envelope["error"] = {"type": "ValidationError", "message": str(exc)}
        status = 2
    except Exception as exc:  # still report through the envelope
        envelope["error"] = {"type": type(exc).__name__, "message": str(exc), "internal": True}
        status = 1
    envelope["timings"] = {"seconds": time.perf_counter() - start}
    return status, envelope, run.csv


# -- argument parsing -------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ValidationError(message)


def _json_arg(text: str) -> Any:
    """Inline JSON, or the path of a JSON file."""
    try:
        if text.lstrip().startswith(("{", "[")):
            return json.loads(text)
        return json.loads(Path(text).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read JSON from {text!r}: {exc}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad number list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="constructive-demand", description=__doc__.splitlines()[0])
    parser.add_argument("--scenario", help="JSON file {command, params, seed, outputPath}")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", help="directory for the JSON envelope and CSV files")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("maximize")
    p.add_argument("--body", required=True)
    p.add_argument("--utility", required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--dominance-samples", type=int)
    p.add_argument("--dominance-eps", type=float)

    p = sub.add_parser("demand")
    p.add_argument("--utility", required=True)
    p.add_argument("--ambient", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("verify-gamma")
    p.add_argument("--utility")
    p.add_argument("--ambient")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--tol", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--sampler", choices=["halfspace", "flip"])

    p = sub.add_parser("equilibrium")
    p.add_argument("--economy", default="labor", help="'labor' or an economy JSON file")
    p.add_argument("--eps", type=float)
    p.add_argument("--grid-depth", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("counterexample")
    p.add_argument("--sweep")
    p.add_argument("--tol", type=float)
    p.add_argument("--paper-literal", action="store_true", default=None)

    p = sub.add_parser("fan")
    p.add_argument("--bar", required=True)
    p.add_argument("--limit", type=int)
    p.add_argument("--cantor-depth", type=int)

    p = sub.add_parser("predicate")
    p.add_argument("--name", required=True)
    p.add_argument("--eps", type=float)
    p.add_argument("--grid", type=float)
    p.add_argument("--delta-step", type=float)
    p.add_argument("--audit-trials", type=int)

    p = sub.add_parser("hausdorff")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--eps", type=float)
    return parser


_GLOBAL = {"scenario", "seed", "workers", "out", "command"}
_JSON_FLAGS = {"body", "ambient", "a", "b"}


def _camel(name: str) -> str:
    head, *rest = name.split("_")
    return head + "".join(w.capitalize() for w in rest)


def params_from_args(args: argparse.Namespace) -> dict:
    params = {}
    for key, value in vars(args).items():
        if key in _GLOBAL or value is None:
            continue
        if key in _JSON_FLAGS:
            value = _json_arg(value)
        elif key == "p":
            value = _floats(value)
        elif key == "economy" and value != "labor":
            value = _json_arg(value)
        params[_camel(key)] = value
    return params


def main(argv: Optional[list[str]] = None) -> int:
    command, params, seed, out = None, {}, None, None
    try:
        args = build_parser().parse_args(argv)
        seed, out, workers = args.seed, args.out, args.workers
        if args.scenario:
            scenario = _json_arg(args.scenario)
            if not isinstance(scenario, dict) or "command" not in scenario:
                raise ValidationError("a scenario is an object with a 'command' field")
            command = scenario["command"]
            params = scenario.get("params", {})
            seed = scenario.get("seed", seed)
            out = out or scenario.get("outputPath")
        elif args.command:
            command = args.command
            params = params_from_args(args)
        else:
            raise ValidationError("give a subcommand or --scenario")
    except ValidationError as exc:
        envelope = {"command": command, "params": params, "seed": seed, "error": {"type": "ValidationError", "message": str(exc)}, "timings": {}}
        sys.stdout.write(dumps(envelope))
        return 2

    status, envelope, csv_files = execute(command, params, seed, workers)
    text = dumps(envelope)
    sys.stdout.write(text)
    if out:
        folder = Path(out)
        folder.mkdir(parents=True, exist_ok=True)
        (folder / f"{command}.json").write_text(text)
        for name, body in csv_files.items():
            (folder / name).write_text(body)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
