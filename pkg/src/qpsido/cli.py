"""Command-line harness: suite execution and report emission.

Subcommands: mu-binomial, verify-hopf, spectrum, expansion-check,
regularity-check, zeta, all.  A flat key=value config file may supply
defaults; command-line flags override it.  Exit codes: 0 when no check
fails (flagged entries are informational), 1 on check failures, 2 on
invalid configuration, 3 on an internal numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .suites import (DEFAULT_TOLS, RunConfig, SUITES, SuiteExecutionError,
                     SuiteReport, run_suite)

_SUBCOMMANDS = {
    "mu-binomial": ("mucalc",),
    "verify-hopf": ("hopf",),
    "spectrum": ("spectrum",),
    "expansion-check": ("expansion",),
    "regularity-check": ("regularity",),
    "zeta": ("zeta",),
    "all": SUITES,
}

_CONFIG_KEYS = {"q", "cutoff", "buffer", "depth", "jmax", "rho_exp", "seed",
                "format", "out", "parallel", "strip_timings"} | {
                    f"tol_{k}" for k in DEFAULT_TOLS}


def _parse_q(text: str) -> tuple[float, str]:
    text = text.strip()
    try:
        if "/" in text:
            fr = Fraction(text)
            return float(fr), str(fr)
        return float(text), text
    except (ValueError, ZeroDivisionError) as ex:
        raise ValueError(f"bad q value {text!r}") from ex


def _parse_half(text: str) -> Fraction:
    fr = Fraction(text) if "/" in str(text) else Fraction(str(text))
    if (2 * fr).denominator != 1:
        raise ValueError(f"{text} is not a half-integer")
    return fr


def load_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment; unknown keys rejected."""
    vals = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        vals[key] = val
    return vals


def build_config(subcommand: str, args: argparse.Namespace) -> RunConfig:
    file_vals = load_config_file(args.config) if args.config else {}

    def pick(key, flag_val):
        return flag_val if flag_val is not None else file_vals.get(key)

    cfg = RunConfig()
    cfg.suites = _SUBCOMMANDS[subcommand]
    qv = pick("q", args.q)
    if qv is not None:
        cfg.q, cfg.q_str = _parse_q(str(qv))
    cut = pick("cutoff", args.cutoff)
    if cut is not None:
        cfg.cutoff = _parse_half(cut)
    buf = pick("buffer", args.buffer)
    if buf is not None:
        cfg.buffer = int(buf)
    dep = pick("depth", args.depth)
    if dep is not None:
        cfg.depth = int(dep)
    jm = pick("jmax", args.jmax)
    if jm is not None:
        cfg.jmax = _parse_half(jm)
    rp = pick("rho_exp", args.rho_exp)
    if rp is not None:
        cfg.rho_exp = int(rp)
    sd = pick("seed", args.seed)
    if sd is not None:
        cfg.seed = int(sd)
    fmt = pick("format", args.format)
    if fmt is not None:
        cfg.format = str(fmt)
    out = pick("out", args.out)
    if out is not None:
        cfg.out = str(out)
    par = pick("parallel", "true" if args.parallel else None)
    cfg.parallel = str(par).lower() in ("1", "true", "yes") if par else False
    st = pick("strip_timings", "true" if args.strip_timings else None)
    cfg.strip_timings = str(st).lower() in ("1", "true", "yes") if st else False
    for name in DEFAULT_TOLS:
        flag_val = getattr(args, f"tol_{name}", None)
        v = flag_val if flag_val is not None else file_vals.get(f"tol_{name}")
        if v is not None:
            cfg.tols[name] = float(v)
    cfg.validate()
    return cfg


def _write_csv(path: Path, rows):
    text = "\n".join(",".join(str(x) for x in row) for row in rows) + "\n"
    path.write_text(text, encoding="utf-8", newline="\n")


def emit(report: SuiteReport, fmt: str, outdir: str | None,
         strip_timings: bool = False) -> dict:
    """Emit the report (and suite artifacts); returns {filename: path}."""
    payload = report.to_dict(strip_timings=strip_timings)
    written = {}
    if outdir is None:
        return written
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        p = out / "report.json"
        p.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                     encoding="utf-8", newline="\n")
        written["report.json"] = str(p)
    else:
        rows = [("suite_check", "status", "measured", "tolerance",
                 "provenance")]
        for c in payload["checks"]:
            rows.append((c["name"], c["status"], c["measured"],
                         c["tolerance"], c["provenance"]))
        p = out / "report.csv"
        _write_csv(p, rows)
        written["report.csv"] = str(p)
    if "spectrum_rows" in report.artifacts:
        rows = [("l", "m", "w", "eigenvalue")]
        rows += [(f"{l}", f"{m}", f"{w}", repr(ev))
                 for (l, m, w, ev) in report.artifacts["spectrum_rows"]]
        p = out / "spectrum.csv"
        _write_csv(p, rows)
        written["spectrum.csv"] = str(p)
    if "zeta_grids" in report.artifacts:
        p = out / "zeta.csv"
        _write_csv(p, report.artifacts["zeta_grids"])
        written["zeta.csv"] = str(p)
    return written


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qpsido",
        description="verification suites for the twisted pseudodifferential "
                    "calculus on the quantum sphere")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--q", help="deformation parameter (float or p/r)")
        p.add_argument("--cutoff", help="spin cutoff L (half-integer)")
        p.add_argument("--buffer", type=int, help="interior buffer shells")
        p.add_argument("--depth", type=int, help="expansion depth n_max")
        p.add_argument("--jmax", help="column window (half-integer)")
        p.add_argument("--rho-exp", dest="rho_exp", type=int,
                       help="modular weight exponent p")
        p.add_argument("--seed", type=int, help="RNG seed")
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--parallel", action="store_true", default=False)
        p.add_argument("--strip-timings", dest="strip_timings",
                       action="store_true", default=False)
        for tname in DEFAULT_TOLS:
            p.add_argument(f"--tol-{tname.replace('_', '-')}",
                           dest=f"tol_{tname}", type=float)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args.command, args)
    except (ValueError, OSError) as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return 2
    try:
        report = run_suite(cfg)
    except SuiteExecutionError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 3
    emit(report, cfg.format, cfg.out, cfg.strip_timings)
    for c in report.checks:
        print(f"[{c.status:>4}] {c.name}: measured={c.measured} "
              f"tol={c.tolerance}")
    nfail = len(report.failures)
    nflag = len(report.flagged)
    print(f"{len(report.checks)} checks, {nfail} failed, {nflag} flagged")
    return 0 if nfail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
