"""``dspec`` command line front end.

Data goes to stdout (JSON or CSV); diagnostics go to stderr as JSON lines.
Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 undecidable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .config import config_hash, load_spec, read_config, spec_from_dict, spec_to_dict
from .criteria import DEFAULT_EPSILONS, theorem_verdicts
from .eigensolver.compare import compare_engines, resolution_step, spectral_bracket
from .eigensolver.galerkin import galerkin_spectrum
from .eigensolver.oracle import dense_oracle
from .eigensolver.problem import DIRICHLET, NEUMANN, SpectralResult, TruncatedProblem
from .eigensolver.shooting import eigenvalues_shooting
from .errors import DspecError, InvalidInput
from .forms import form_energy, l2_norm_sq, make_test_function
from .model import OperatorSpec, truncate
from .neumann import direct_sum_spectrum, ess_spectrum_N
from .scenarios import SCENARIOS

SPECTRUM_COLUMNS = ("index", "lambda", "multiplicity", "engine", "err_est")


@dataclass
class RunManifest:
    command: str
    config_hash: Optional[str]
    parameters: dict
    tool_version: str = __version__
    started: str = ""
    finished: str = ""
    outputs: List[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Outcome:
    """Primary stdout payload plus named files written under ``--out``."""

    stdout: str
    files: Dict[str, str] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _finite(v: float):
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "+inf" if v > 0 else "-inf"
    return v


def with_errors(obj, err: float = 0.0):
    """Replace every bare float by ``{"value", "err_est"}``; existing pairs are kept."""
    if isinstance(obj, dict):
        if "value" in obj and "err_est" in obj:
            return {k: (_finite(float(v)) if isinstance(v, float) else with_errors(v, err))
                    for k, v in obj.items()}
        return {str(k): with_errors(v, err) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [with_errors(v, err) for v in obj]
    if isinstance(obj, (bool, int, np.integer)) and not isinstance(obj, np.floating):
        return int(obj) if not isinstance(obj, bool) else obj
    if isinstance(obj, (float, np.floating)):
        return {"value": _finite(float(obj)), "err_est": err}
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return with_errors(obj.tolist(), err)
    return obj


def dump_json(obj) -> str:
    return json.dumps(with_errors(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def diagnostic(level: str, event: str, **fields) -> None:
    rec = {"level": level, "event": event, **fields}
    sys.stderr.write(json.dumps(rec, sort_keys=True, default=str) + "\n")


def spectrum_csv(results: Sequence[SpectralResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SPECTRUM_COLUMNS)
    for res in results:
        for row in res.rows():
            w.writerow([row["index"], repr(row["lambda"]), row["multiplicity"], row["engine"],
                        repr(row["err_est"])])
    return buf.getvalue()


def _pair(text: str, what: str) -> tuple:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise InvalidInput(f"{what} must be 'lo,hi'", value=text) from None
    if not lo < hi:
        raise InvalidInput(f"{what} needs lo < hi", value=text)
    return lo, hi


def _param_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        pass
    if "," in text:
        return [_param_value(t) for t in text.split(",")]
    return text


def _jobs(value: Optional[int]) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("DSPEC_JOBS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        raise InvalidInput("DSPEC_JOBS must be an integer", value=env) from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(args, spec: OperatorSpec) -> Outcome:
    eps = DEFAULT_EPSILONS if not args.epsilons else tuple(Fraction(e) for e in args.epsilons.split(","))
    report = theorem_verdicts(spec, C=args.C, epsilons=eps)
    data = report.as_dict()
    if args.json:
        text = dump_json(data)
    else:
        lines = []
        for group, label in (("conditions", "condition"), ("theorems", "theorem"), ("auxiliary", "auxiliary")):
            for name, v in data[group].items():
                src = f" [{v['source']}]" if v.get("source") else ""
                lines.append(f"{label} {name}: {v['status']}{src}")
        text = "\n".join(lines) + "\n"
    return Outcome(text, {"report.json": dump_json(data)})


def cmd_form(args, spec: OperatorSpec) -> Outcome:
    params: dict = {"spec": spec}
    if args.k is not None:
        params["k"] = args.k
    for key in ("width", "height", "i", "j"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    f = make_test_function(args.test_fn, params)
    fb = form_energy(spec, f)
    n2 = l2_norm_sq(f)
    out = {"test_fn": args.test_fn, "params": {k: v for k, v in params.items() if k != "spec"},
           "form": fb.as_dict(), "l2_norm_sq": n2, "quotient": fb.total / n2 if n2 > 0 else None}
    text = dump_json(out)
    return Outcome(text, {"form.json": text})


def _problem(args, spec: OperatorSpec) -> TruncatedProblem:
    if args.xmax is not None:
        spec = truncate(spec, xmax=args.xmax)
    return TruncatedProblem(spec, args.bc)


def cmd_spectrum(args, spec: OperatorSpec) -> Outcome:
    problem = _problem(args, spec)
    window = _pair(args.window, "--window") if args.window else (spectral_bracket(problem, 1)[0],
                                                                 spectral_bracket(problem, 10)[1])
    q_abs = max(max(abs(b.q_min), abs(b.q_max)) for b in problem.blocks)
    h = args.h if args.h else resolution_step(*window, q_abs)
    results: Dict[str, SpectralResult] = {}
    engines = ("shooting", "galerkin", "oracle") if args.engine == "all" else (args.engine,)
    for name in engines:
        if name == "shooting":
            results[name] = eigenvalues_shooting(problem, window, args.tol)
        elif name == "galerkin":
            results[name] = galerkin_spectrum(problem, h, window, args.tol, extrapolate=True)
        else:
            results[name] = dense_oracle(problem, h, window)
    for res in results.values():
        for note in res.notes:
            diagnostic("info", "engine_note", engine=res.method, note=note)
    text = spectrum_csv(list(results.values()))
    files = {"spectrum.csv": text}
    if args.engine == "all":
        files["crossval.json"] = dump_json(_crossval(results, window, h))
    return Outcome(text, files)


def _crossval(results: Dict[str, SpectralResult], window: tuple, h: float) -> dict:
    vals = {k: r.eigenvalues for k, r in results.items()}
    errs = {k: np.repeat(r.err_est, r.multiplicities) for k, r in results.items()}
    n = min(v.size for v in vals.values())
    rows, worst = [], 0.0
    names = sorted(vals)
    for i in range(n):
        row = {k: {"value": float(vals[k][i]), "err_est": float(errs[k][i])} for k in names}
        rel = max(abs(vals[a][i] - vals[b][i]) / max(1.0, abs(vals[a][i]))
                  for a in names for b in names if a < b)
        worst = max(worst, rel)
        rows.append(row)
    counts = {k: int(v.size) for k, v in vals.items()}
    return {"window": list(window), "h": h, "counts": counts, "counts_agree": len(set(counts.values())) == 1,
            "eigenvalues": rows, "worst_relative": worst}


def cmd_neumann(args, spec: OperatorSpec) -> Outcome:
    entries = direct_sum_spectrum(spec, args.lambda_max, jobs=args.jobs)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("lambda", "multiplicity", "cells"))
    for e in entries:
        w.writerow([repr(e.value), e.multiplicity, ";".join(str(c) for c in e.cells)])
    return Outcome(buf.getvalue(), {"neumann.csv": buf.getvalue()})


def cmd_ess(args, spec: OperatorSpec) -> Outcome:
    text = dump_json(ess_spectrum_N(spec, args.lambda_max).as_dict())
    return Outcome(text, {"ess.json": text})


def cmd_oracle_compare(args, spec: OperatorSpec) -> Outcome:
    problem = _problem(args, spec)
    cmp = compare_engines(problem, n=args.n, h=args.h, tol=args.tol)
    data = cmp.as_dict()
    data["counts_agree"] = len(set(cmp.counts.values())) == 1
    text = dump_json(data)
    return Outcome(text, {"oracle_compare.json": text})


def cmd_scenario(args) -> Outcome:
    if args.name not in SCENARIOS:
        raise InvalidInput(f"unknown scenario {args.name!r}", known=sorted(SCENARIOS))
    params = {}
    for item in args.param or ():
        if "=" not in item:
            raise InvalidInput("--param expects key=value", value=item)
        key, value = item.split("=", 1)
        params[key.strip()] = _param_value(value.strip())
    if "spec" in params:
        params["spec"] = load_spec(params["spec"])
    try:
        report = SCENARIOS[args.name](**params)
    except TypeError as exc:
        raise InvalidInput(f"bad parameters for {args.name}: {exc}") from None
    data = report.as_dict()
    text = dump_json(data)
    files = {"scenario.json": text,
             "spec.json": json.dumps(spec_to_dict(report.spec), indent=2, allow_nan=False) + "\n"}
    for i, rung in enumerate(report.rungs):
        if rung.spectrum is not None:
            files[f"rung_{i:02d}_K{rung.K}.csv"] = spectrum_csv([rung.spectrum])
    if not report.passed:
        diagnostic("warning", "scenario_failed", scenario=args.name,
                   failed=[k for k, v in report.checks.items() if not v])
    return Outcome(text, files)


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors become JSON diagnostics with exit code 2."""

    def error(self, message):
        raise InvalidInput(message, usage=self.format_usage().strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dspec {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--jobs", type=int, default=None, help="worker threads (default: $DSPEC_JOBS or 1)")
    common.add_argument("--out", default=None, help="directory for output files and the run manifest")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="criteria and theorem verdicts")
    c.add_argument("config")
    c.add_argument("--C", type=float, default=1.0)
    c.add_argument("--epsilons", default=None, help="comma separated window widths, e.g. 1,1/2")
    c.add_argument("--json", action="store_true")

    f = sub.add_parser("form", parents=[common], help="quadratic form on a named test function")
    f.add_argument("config")
    f.add_argument("--test-fn", required=True, choices=("indicator", "tent", "step"))
    f.add_argument("--k", type=int, default=None)
    f.add_argument("--i", type=int, default=None)
    f.add_argument("--j", type=int, default=None)
    f.add_argument("--width", type=float, default=None)
    f.add_argument("--height", type=float, default=None)

    def solver_args(sp, engine: bool):
        sp.add_argument("config")
        sp.add_argument("--xmax", type=float, default=None)
        sp.add_argument("--bc", choices=(NEUMANN, DIRICHLET), default=NEUMANN)
        sp.add_argument("--tol", type=float, default=1e-12)
        sp.add_argument("--h", type=float, default=None, help="mesh width for galerkin/oracle")
        if engine:
            sp.add_argument("--window", default=None, help="lo,hi")
            sp.add_argument("--engine", choices=("shooting", "galerkin", "oracle", "all"), default="shooting")

    s = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a truncation (CSV)")
    solver_args(s, True)
    o = sub.add_parser("oracle-compare", parents=[common], help="three-engine comparison of the lowest eigenvalues")
    solver_args(o, False)
    o.add_argument("--n", type=int, default=8)

    for name, helptext in (("neumann", "decoupled cell spectra (CSV)"), ("ess", "predicted essential spectrum")):
        e = sub.add_parser(name, parents=[common], help=helptext)
        e.add_argument("config")
        e.add_argument("--lambda-max", type=float, required=True)

    sc = sub.add_parser("scenario", parents=[common], help="named end-to-end run")
    sc.add_argument("name", choices=sorted(SCENARIOS))
    sc.add_argument("--param", action="append", metavar="KEY=VALUE")
    return p


HANDLERS = {"check": cmd_check, "form": cmd_form, "spectrum": cmd_spectrum, "neumann": cmd_neumann,
            "ess": cmd_ess, "oracle-compare": cmd_oracle_compare}


def _stamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def run(args) -> Outcome:
    args.jobs = _jobs(args.jobs)
    if args.command == "scenario":
        return cmd_scenario(args)
    spec = spec_from_dict(read_config(args.config))
    return HANDLERS[args.command](args, spec)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # "--window -1,5" would otherwise read as an option
    for i in range(len(argv) - 1):
        if argv[i] == "--window":
            argv[i:i + 2] = [f"--window={argv[i + 1]}", ""]
    argv = [a for a in argv if a != ""]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except InvalidInput as exc:
        diagnostic("error", "usage", **exc.as_record())
        return exc.exit_code
    started = _stamp()
    try:
        outcome = run(args)
    except DspecError as exc:
        diagnostic("error", "failed", command=args.command, **exc.as_record())
        return exc.exit_code
    except (ValueError, KeyError) as exc:
        diagnostic("error", "failed", command=args.command, error=type(exc).__name__, message=str(exc))
        return 2
    sys.stdout.write(outcome.stdout)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(outcome.files.items()):
            (out / name).write_text(text, encoding="utf-8")
        cfg_hash = None
        if getattr(args, "config", None):
            cfg_hash = config_hash(read_config(args.config))
        params = {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}
        manifest = RunManifest(args.command, cfg_hash, params, started=started, finished=_stamp(),
                               outputs=sorted(outcome.files) + ["manifest.json"])
        (out / "manifest.json").write_text(json.dumps(manifest.as_dict(), indent=2, sort_keys=True,
                                                      default=str) + "\n", encoding="utf-8")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
