"""Command-line client.

Every subcommand builds a request model from its flags and input files, then
either calls the handler in process or, with --server, posts it to a running
service. Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from pydantic import BaseModel, ValidationError

from . import acceptance, api, parallel
from .ratmod import is_prime
from .tables import cell, emit_table

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# config ----------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    seed: int = acceptance.DEFAULT_SEED
    N: int | None = None
    d: int | None = None
    delta: float | None = None
    output_dir: str | None = None
    thresholds: dict[str, float] = field(default_factory=dict)


def load_config(path: str | None) -> ExperimentConfig:
    """key = value lines; '#' starts a comment. Module constants use dotted keys, e.g. rbpl.small_n."""
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from exc
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key in seen:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            if key in ("seed", "N", "d"):
                setattr(cfg, key, int(val))
            elif key == "delta":
                cfg.delta = float(val)
            elif key == "output_dir":
                cfg.output_dir = val
            elif key in api.SETTINGS:
                cfg.thresholds[key] = api.SETTINGS[key](float(val))
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {val!r}") from exc
    if cfg.N is not None and not is_prime(cfg.N):
        raise UsageError(f"{path}: N = {cfg.N} is not prime")
    if cfg.d is not None and cfg.d < 1:
        raise UsageError(f"{path}: d must be positive")
    if cfg.delta is not None and not 0 < cfg.delta <= 1:
        raise UsageError(f"{path}: delta must lie in (0, 1]")
    return cfg


# plumbing ------------------------------------------------------------------------------

def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def _call(name: str, payload: dict, server: str | None) -> BaseModel:
    path, model, handler = api.ROUTES[name]
    try:
        req = model.model_validate(payload)
    except ValidationError as exc:
        raise UsageError(f"invalid {name} request: {exc.errors()[0]['msg']} at {exc.errors()[0]['loc']}") from exc
    if server is None:
        return handler(req)
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=req.model_dump(mode="json"), timeout=600)
    if resp.status_code == 422:
        raise UsageError(f"server rejected request: {resp.json().get('detail')}")
    resp.raise_for_status()
    return api.response_model(name).model_validate(resp.json())


def _output(args, rows, columns, response: BaseModel | None = None) -> None:
    """csv: the table; json: the whole response when there is one, else the table."""
    out = args.out
    if args.format == "json" and response is not None:
        text = json.dumps(_jsonable(response.model_dump()), indent=1) + "\n"
        if out:
            _write(out, text)
        else:
            sys.stdout.write(text)
        return
    try:
        text = emit_table(rows, columns, args.format, out)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc.strerror}") from exc
    if not out:
        sys.stdout.write(text)


def _write(path: str, text: str) -> None:
    try:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return cell(x)


def _split(text: str) -> list[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


# subcommands -------------------------------------------------------------------------------

def cmd_gowers(args, cfg) -> int:
    data = _read_json(args.input)
    values = data["values"] if isinstance(data, dict) else data
    res = _call("gowers.norm", {"values": values, "s": args.s}, args.server)
    _output(args, [res.model_dump()], ["N", "s", "norm"], res)
    return EXIT_OK


def cmd_count(args, cfg) -> int:
    data = _read_json(args.input)
    if not isinstance(data, dict):
        raise UsageError("count input is a JSON object with keys f, g, k[, p, P, Q]")
    res = _call("count", {**data, "kind": args.kind}, args.server)
    if res.kind == "dual":
        rows = [{"x": x, "re": z[0], "im": z[1]} for x, z in enumerate(res.dual)]
        cols = ["x", "re", "im"]
    else:
        rows = []
        if res.value is not None:
            rows.append({"average": "lambda", "re": res.value[0], "im": res.value[1]})
        if res.lambda1 is not None:
            rows.append({"average": "lambda1", "re": res.lambda1[0], "im": res.lambda1[1]})
        cols = ["average", "re", "im"]
    _output(args, rows, cols, res)
    return EXIT_OK


def _cert_rows(res) -> list[dict]:
    rows = []
    if res.certificate is not None:
        rows += [{"role": "w", "index": i, "vector": " ".join(map(str, v))} for i, v in enumerate(res.certificate.w)]
        rows += [{"role": "eta", "index": i, "vector": " ".join(map(str, v))} for i, v in enumerate(res.certificate.eta)]
    return rows


def cmd_rbpl(args, cfg) -> int:
    payload = {"instance": _read_json(args.instance), "settings": cfg.thresholds}
    if args.cert:
        payload["certificate"] = _read_json(args.cert)
    if args.height is not None:
        payload["height"] = args.height
    res = _call(f"rbpl.{args.action}", payload, args.server)
    _output(args, _cert_rows(res), ["role", "index", "vector"], res)
    print(f"branch={res.branch} verified={res.verified}" + (f" {res.detail}" if res.detail else ""), file=sys.stderr)
    for v in res.violations:
        print(f"violation: {v}", file=sys.stderr)
    return EXIT_FAIL if res.verified is False else EXIT_OK


def cmd_equidist(args, cfg) -> int:
    data = _read_json(args.instance)
    payload = {**data, "settings": {**cfg.thresholds, **data.get("settings", {})}}
    if args.delta is not None:
        payload["delta"] = args.delta
    elif "delta" not in data and cfg.delta is not None:
        payload["delta"] = cfg.delta
    res = _call("equidist.run", payload, args.server)
    if args.per_h:
        emit_table([{"h": h, "correlation": c, "good": g} for h, c, g in res.per_h], ["h", "correlation", "good"],
                   "csv", args.per_h)
    rows = [{"role": "w", "index": i, "vector": " ".join(map(str, v))} for i, v in enumerate(res.w)]
    rows += [{"role": "eta", "index": i, "vector": " ".join(map(str, v))} for i, v in enumerate(res.eta)]
    _output(args, rows, ["role", "index", "vector"], res)
    print(f"branch={res.branch} mean={cell(res.mean)} verified={res.verified}", file=sys.stderr)
    return EXIT_FAIL if res.verified is False else EXIT_OK


def cmd_fourier(args, cfg) -> int:
    data = _read_json(args.instance)
    payload = {**data, "settings": {**cfg.thresholds, **data.get("settings", {})}}
    if args.delta is not None:
        payload["delta"] = args.delta
    elif "delta" not in data and cfg.delta is not None:
        payload["delta"] = cfg.delta
    res = _call("fourier.expand", payload, args.server)
    rows = [t.model_dump() for t in res.terms]
    _output(args, rows, ["freq_n", "freq_h", "re", "im"], res)
    print(f"terms={len(res.terms)} l1_error={cell(res.l1_error)} l1_bound={cell(res.l1_bound)}", file=sys.stderr)
    return EXIT_OK


def _modulus(args, cfg) -> int:
    N = args.N if args.N is not None else cfg.N
    if N is None:
        raise UsageError("N is required (flag --N or config key N)")
    return N


def cmd_bohr(args, cfg) -> int:
    payload = {"S": _split(args.S), "rho": args.rho, "N": _modulus(args, cfg), "settings": cfg.thresholds}
    res = _call(f"bohr.{args.action}", payload, args.server)
    if args.action == "regular" and res.radius is None:
        print(f"no regular radius found; best candidate fails {res.grid_failures} grid checks", file=sys.stderr)
        return EXIT_FAIL
    _output(args, [{"x": x} for x in res.members], ["x"], res)
    extra = f" radius={res.radius}" if res.radius else ""
    print(f"size={res.size}{extra}", file=sys.stderr)
    return EXIT_OK


def cmd_energy(args, cfg) -> int:
    sets = [[int(x) for x in _split(part)] for part in args.sets.split(";")]
    res = _call("energy", {"N": _modulus(args, cfg), "sets": sets}, args.server)
    rows = [{"quantity": "energy", "value": res.energy}]
    rows += [{"quantity": f"energy_{i + 1}", "value": e} for i, e in enumerate(res.energies)]
    if res.cauchy_schwarz is not None:
        rows.append({"quantity": "cauchy_schwarz", "value": res.cauchy_schwarz})
    _output(args, rows, ["quantity", "value"], res)
    return EXIT_FAIL if res.cauchy_schwarz is False else EXIT_OK


def cmd_quadruples(args, cfg) -> int:
    payload = {"N": _modulus(args, cfg), "seed": cfg.seed if args.seed is None else args.seed,
               "density": args.density, "delta": args.delta, "rows": args.rows}
    res = _call("quadruples", payload, args.server)
    if args.rows:
        rows = [dict(zip(("h1", "h2", "h3", "h4", "correlation"), q)) for q in res.quadruples]
        _output(args, rows, ["h1", "h2", "h3", "h4", "correlation"], res)
    else:
        row = {k: getattr(res, k) for k in ("N", "count", "total", "bound", "inner_threshold", "hypothesis_ok",
                                            "threshold_pass")}
        row["H"] = len(res.H)
        _output(args, [row], ["N", "H", "count", "total", "bound", "inner_threshold", "hypothesis_ok",
                              "threshold_pass"], res)
    return EXIT_OK if res.threshold_pass else EXIT_FAIL


def cmd_selftest(args, cfg) -> int:
    seed = cfg.seed if args.seed is None else args.seed
    out = Path(args.out or cfg.output_dir or "selftest-output")
    numbers = [int(x) for x in _split(args.only)] if args.only else None
    if numbers and any(n not in acceptance.CHECKS for n in numbers):
        raise UsageError(f"--only takes numbers from 1 to {max(acceptance.CHECKS)}")
    if args.format not in ("csv", "json"):
        raise UsageError("format must be csv or json")

    def show(res):
        print(f"{res.line()} ({res.seconds:.1f}s)", flush=True)

    t0 = time.perf_counter()
    results = acceptance.run_checks(seed, numbers, out, args.format, show)
    if not args.no_determinism:
        det = acceptance.criterion_13(seed, out, numbers, args.format)
        show(det)
        results.append(det)
        acceptance.write_tree(results[:-1], out, args.format)
        with open(out / "summary.txt", "a", encoding="utf-8") as fh:
            fh.write(det.line() + "\n")
    failed = [r for r in results if not r.passed and not r.known_failure]
    known = [r for r in results if not r.passed and r.known_failure]
    for r in known:
        print(f"  expected failure [{r.number:02d}]: {r.known_failure}")
    print(f"{len(results) - len(failed) - len(known)} passed, {len(known)} expected failures, "
          f"{len(failed)} failed in {time.perf_counter() - t0:.1f}s; tree in {out}")
    return EXIT_FAIL if failed else EXIT_OK


# parser -------------------------------------------------------------------------------------------

COMMON_DEFAULTS = {"config": None, "out": None, "format": "csv", "threads": None, "server": None}


def _add_common(p: argparse.ArgumentParser) -> None:
    # SUPPRESS lets the flags go before or after the subcommand without one copy resetting the other
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="key = value configuration file")
    p.add_argument("--out", default=S, help="output file (selftest: output directory)")
    p.add_argument("--format", choices=("csv", "json"), default=S, help="output format (default csv)")
    p.add_argument("--threads", type=int, default=S, help="worker cap; falls back to HOFA_THREADS")
    p.add_argument("--server", default=S, help="base URL of a running hofa service; default runs in process")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    _add_common(p)
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = _Parser(prog="hofa", description="Exact experiments with bracket quadratics and nilsequences.")
    _add_common(p)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gowers", parents=[common], help="Gowers norms")
    g.add_argument("action", choices=("norm",))
    g.add_argument("--input", required=True, help="JSON list of values or {\"values\": [...]}")
    g.add_argument("--s", type=int, default=2, choices=(1, 2, 3, 4))
    g.set_defaults(func=cmd_gowers)

    c = sub.add_parser("count", parents=[common], help="counting averages and the dual function")
    c.add_argument("kind", choices=("lambda", "lambda1", "dual", "compare"))
    c.add_argument("--input", required=True, help="JSON object with f, g, k, p and coefficient lists P, Q")
    c.set_defaults(func=cmd_count)

    r = sub.add_parser("rbpl", parents=[common], help="bracket-linear solver")
    r.add_argument("action", choices=("solve", "verify", "oracle"))
    r.add_argument("--instance", required=True)
    r.add_argument("--cert", help="certificate JSON (verify)")
    r.add_argument("--height", type=int, help="entry bound for the brute-force oracle")
    r.set_defaults(func=cmd_rbpl)

    e = sub.add_parser("equidist", parents=[common], help="equidistribution dichotomy")
    e.add_argument("action", choices=("run",))
    e.add_argument("--instance", required=True, help="JSON {N, sequence: {alpha, beta, P}, delta, k}")
    e.add_argument("--delta", type=float)
    e.add_argument("--per-h", help="write per-h correlations as CSV")
    e.set_defaults(func=cmd_equidist)

    f = sub.add_parser("fourier", parents=[common], help="Fourier expansions of bracket phases")
    f.add_argument("action", choices=("expand",))
    f.add_argument("--instance", required=True)
    f.add_argument("--delta", type=float)
    f.set_defaults(func=cmd_fourier)

    b = sub.add_parser("bohr", parents=[common], help="Bohr sets")
    b.add_argument("action", choices=("build", "regular"))
    b.add_argument("--S", required=True, help="comma-separated frequencies p/q")
    b.add_argument("--rho", required=True)
    b.add_argument("--N", type=int)
    b.set_defaults(func=cmd_bohr)

    en = sub.add_parser("energy", parents=[common], help="additive energies")
    en.add_argument("--sets", required=True, help="sets separated by ';', elements by ','")
    en.add_argument("--N", type=int)
    en.set_defaults(func=cmd_energy)

    q = sub.add_parser("quadruples", parents=[common], help="additive quadruples for a planted family")
    q.add_argument("--N", type=int)
    q.add_argument("--seed", type=int)
    q.add_argument("--density", type=float, default=0.5)
    q.add_argument("--delta", default="1/2")
    q.add_argument("--rows", action="store_true", help="emit per-quadruple correlations")
    q.set_defaults(func=cmd_quadruples)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    s.add_argument("--seed", type=int)
    s.add_argument("--only", help="comma-separated check numbers")
    s.add_argument("--no-determinism", action="store_true", help="skip the second run")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for key, val in COMMON_DEFAULTS.items():
            if not hasattr(args, key):
                setattr(args, key, val)
        cfg = load_config(args.config)
        if args.threads is not None:
            if args.threads < 1:
                raise UsageError("--threads must be at least 1")
            parallel.set_threads(args.threads)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"hofa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except api.InputError as exc:
        print(f"hofa: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        parallel.set_threads(None)


if __name__ == "__main__":
    sys.exit(main())
