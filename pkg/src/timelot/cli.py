"""Command-line front end.

Exit codes: 0 when every check holds, 1 when a run completes with a violated
check, 2 on input or usage errors (one-line diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .axioms import AXIOMS, REQUIRED, audit
from .core import Domain, Lottery, Tolerances, make_lottery
from .errors import HypothesisFailed, ParseError, TimelotError
from .experiments import (
    DEFAULT_PI_GRID,
    EXAMPLE_DOMAIN,
    GLBU_DOMAIN,
    broken_transform,
    demo_local_rstl,
    glbu_tradeoff_demo,
    invariance_suite,
    scan_example_region,
)
from .models import BoundedRatio, Exponential, IdentityValue, Model, MultiplicativeEU, model_from_dict
from .solvers import find_indifferent_prize, risk_attitude_instance, settings_for

CONFIG_KEYS = {
    "model", "lottery", "out", "format", "seed", "grid_n", "sample_n", "eq_tol", "strict_margin",
    "fd_step_frac", "bisect_tol", "threads", "require",
}
_TOL_KEYS = ("grid_n", "sample_n", "eq_tol", "strict_margin", "fd_step_frac", "bisect_tol")


def _read_json(path: str | os.PathLike, what: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {what} file {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed {what} file {path}: {exc.msg} at line {exc.lineno}") from None


def parse_model_file(path) -> Model:
    d = _read_json(path, "model")
    if not isinstance(d, dict):
        raise ParseError(f"model file {path} must hold a JSON object")
    return model_from_dict(d)


def parse_lottery_file(path, domain: Domain | None = None) -> Lottery:
    d = _read_json(path, "lottery")
    if not isinstance(d, dict) or set(d) != {"atoms"} or not isinstance(d["atoms"], list):
        raise ParseError(f"lottery file {path} must be an object with a single 'atoms' list")
    entries = []
    for a in d["atoms"]:
        if not isinstance(a, dict) or set(a) != {"x", "t", "p"}:
            raise ParseError(f"each atom needs exactly the keys x, t, p; got {a!r}")
        try:
            entries.append((float(a["x"]), float(a["t"]), float(a["p"])))
        except (TypeError, ValueError):
            raise ParseError(f"non-numeric atom {a!r}") from None
    return make_lottery(entries, domain)


def _floats(text: str, n: int | None = None) -> tuple[float, ...]:
    try:
        vals = tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {text!r}")
    return vals


def _pair(text: str) -> tuple[float, ...]:
    return _floats(text, 2)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with defaults for any option below")
    common.add_argument("--model", help="model JSON file")
    common.add_argument("--lottery", help="lottery JSON file")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--seed", type=int, help="RNG seed (falls back to $TIMELOT_SEED, then 0)")
    common.add_argument("--grid-n", dest="grid_n", type=int)
    common.add_argument("--sample-n", dest="sample_n", type=int)
    common.add_argument("--eq-tol", dest="eq_tol", type=float)
    common.add_argument("--strict-margin", dest="strict_margin", type=float)
    common.add_argument("--fd-step-frac", dest="fd_step_frac", type=float)
    common.add_argument("--bisect-tol", dest="bisect_tol", type=float)
    common.add_argument("--threads", type=int)
    common.add_argument("--require", help="comma-separated axioms whose violation gives exit 1, or 'all'")

    p = argparse.ArgumentParser(prog="timelot", description="Audit intertemporal choice models over time lotteries.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="value of a lottery")
    sub.add_parser("audit", parents=[common], help="full axiom audit")
    sp = sub.add_parser("indiff", parents=[common], help="prize y with (y, t - tau) ~ (x, t)")
    for name in ("--x", "--t", "--tau"):
        sp.add_argument(name, type=float, required=True)
    sub.add_parser("ce", parents=[common], help="time certainty equivalent of a time lottery")
    sp = sub.add_parser("demo-incompat", parents=[common], help="local weak-RSTL chain at (x, t)")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--ntau", type=int, default=20)
    sp = sub.add_parser("scan-example", parents=[common], help="(a, b) region scan")
    sp.add_argument("--a-range", dest="a_range", type=_pair, default=(1.0, 3.0))
    sp.add_argument("--b-range", dest="b_range", type=_pair, default=(0.0, 1.0))
    sp.add_argument("--d", type=float, default=0.9)
    sp.add_argument("--cells", type=int, default=20)
    sp = sub.add_parser("glbu-demo", parents=[common], help="SI vs weak RATL across GLBU weights")
    sp.add_argument("--pi-grid", dest="pi_grid", type=_floats, default=DEFAULT_PI_GRID)
    sp = sub.add_parser("invariance", parents=[common], help="ranking invariance under a representation transform")
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--b1", type=float, required=True)
    sp.add_argument("--b2", type=float, required=True)
    sp.add_argument("--pairs", type=int, default=1000)
    sp.add_argument("--broken", action="store_true", help="leave phi unadjusted (negative control)")
    return p


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge config file, environment and flags (flags win)."""
    opts: dict = {}
    if args.config:
        cfg = _read_json(args.config, "config")
        if not isinstance(cfg, dict):
            raise ParseError("config file must hold a JSON object")
        unknown = set(cfg) - CONFIG_KEYS
        if unknown:
            raise ParseError(f"unknown config key(s): {sorted(unknown)}")
        opts.update(cfg)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            opts[k] = v
    if "seed" not in opts:
        env = os.environ.get("TIMELOT_SEED")
        if env is not None:
            try:
                opts["seed"] = int(env)
            except ValueError:
                raise ParseError(f"TIMELOT_SEED must be an integer, got {env!r}") from None
    opts.setdefault("seed", 0)
    opts.setdefault("format", "json")
    if opts["format"] not in ("json", "csv"):
        raise ParseError(f"format must be json or csv, got {opts['format']!r}")
    return opts


def _tolerances(opts: dict, **defaults) -> Tolerances:
    kw = {**defaults, **{k: opts[k] for k in _TOL_KEYS if k in opts}}
    return Tolerances(seed=int(opts["seed"]), **kw)


def _required(opts: dict) -> tuple[str, ...]:
    req = opts.get("require")
    if req is None:
        return REQUIRED
    names = tuple(AXIOMS) if req == "all" else tuple(s.strip() for s in str(req).split(",") if s.strip())
    bad = [n for n in names if n not in AXIOMS]
    if bad:
        raise ParseError(f"unknown axiom(s) in --require: {bad}")
    return names


def _need_model(opts: dict) -> Model:
    if "model" not in opts:
        raise ParseError("this command needs --model")
    return parse_model_file(opts["model"])


def _need_lottery(opts: dict, m: Model) -> Lottery:
    if "lottery" not in opts:
        raise ParseError("this command needs --lottery")
    return parse_lottery_file(opts["lottery"], m.domain)


def _row_csv(row: dict) -> str:
    keys = list(row)
    return ",".join(keys) + "\n" + ",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k])
                                            for k in keys) + "\n"


def run(args: argparse.Namespace) -> tuple[int, str]:
    """Execute a parsed command; returns (exit code, rendered output)."""
    opts = resolve_options(args)
    cmd = args.command
    threads = opts.get("threads")
    code = 0
    csv_text = None
    settings: dict = {"seed": int(opts["seed"])}

    if cmd == "eval":
        m = _need_model(opts)
        p = _need_lottery(opts, m)
        result = {"value": m.eval_lottery(p)}
    elif cmd == "audit":
        m = _need_model(opts)
        tol = _tolerances(opts)
        rep = audit(m, tol)
        req = _required(opts)
        fails = rep.failures(req)
        code = 1 if fails else 0
        settings.update(rep.settings, required=list(req))
        result = {"report": rep.to_dict(), "violated_required": fails}
        csv_text = rep.to_csv()
    elif cmd == "indiff":
        m = _need_model(opts)
        tol = _tolerances(opts)
        s = settings_for(m, tol, "x")
        y = find_indifferent_prize(m, args.x, args.t, args.tau, s)
        residual = m.eval_outcome((y, args.t - args.tau)) - m.eval_outcome((args.x, args.t))
        settings.update(tolerances=tol.to_dict(), eq_tol=s.eq_tol, bisect_tol=s.bisect_tol)
        result = {"x": args.x, "t": args.t, "tau": args.tau, "y": y, "residual": residual}
    elif cmd == "ce":
        m = _need_model(opts)
        p = _need_lottery(opts, m)
        tol = _tolerances(opts)
        s = settings_for(m, tol, "t")
        t_star, t_bar, label = risk_attitude_instance(m, p, s)
        settings.update(tolerances=tol.to_dict(), eq_tol=s.eq_tol, bisect_tol=s.bisect_tol)
        result = {"t_star": t_star, "mean_time": t_bar, "premium": t_star - t_bar, "attitude": label}
    elif cmd == "demo-incompat":
        m = _need_model(opts)
        tol = _tolerances(opts)
        settings.update(tolerances=tol.to_dict())
        try:
            tr = demo_local_rstl(m, args.x, args.t, args.ntau, tol)
        except HypothesisFailed as exc:
            result = {"hypothesis_failed": exc.which, "detail": str(exc)}
            code = 1
        else:
            result = tr.to_dict()
            csv_text = tr.to_csv()
            code = 0 if tr.all_hold else 1
    elif cmd == "scan-example":
        value, domain = BoundedRatio(1.0), EXAMPLE_DOMAIN
        if "model" in opts:
            base = _need_model(opts)
            value, domain = base.value, base.domain
        tol = _tolerances(opts, grid_n=21)
        rm = scan_example_region(args.a_range, args.b_range, args.d, value, domain, args.cells, tol, threads)
        settings.update(rm.settings)
        result = rm.to_dict()
        csv_text = rm.to_csv()
        code = 0 if rm.guarantee_holds else 1
    elif cmd == "glbu-demo":
        discount, value, domain = Exponential(0.9), IdentityValue(), GLBU_DOMAIN
        if "model" in opts:
            base = _need_model(opts)
            discount, value, domain = base.discount, base.value, base.domain
        tol = _tolerances(opts)
        tab = glbu_tradeoff_demo(args.pi_grid, discount, value, domain, tol)
        settings.update(tab.settings)
        result = tab.to_dict()
        csv_text = tab.to_csv()
        code = 0 if tab.consistent else 1
    elif cmd == "invariance":
        m = _need_model(opts)
        if not isinstance(m, MultiplicativeEU):
            raise ParseError("invariance needs a multiplicative_eu model")
        tol = _tolerances(opts)
        other = broken_transform(m, args.a, args.b1, args.b2) if args.broken else None
        res = invariance_suite(m, args.a, args.b1, args.b2, args.pairs, tol, transformed=other)
        settings.update(tolerances=tol.to_dict(), a=args.a, b1=args.b1, b2=args.b2, pairs=args.pairs,
                        broken=args.broken)
        result = res.to_dict()
        code = 0 if res.agree else 1
    else:  # pragma: no cover - argparse restricts the choices
        raise ParseError(f"unknown command {cmd!r}")

    if opts["format"] == "csv":
        text = csv_text if csv_text is not None else _row_csv({k: v for k, v in result.items()
                                                               if not isinstance(v, (dict, list))})
    else:
        text = json.dumps({"command": cmd, "settings": settings, "result": result}, indent=2) + "\n"
    if "out" in opts:
        Path(opts["out"]).write_text(text)
        return code, ""
    return code, text


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, text = run(args)
    except (TimelotError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"timelot: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
