"""Command-line frontend.

    noetherlab verify [--gamma G] [--entropy E] [--suite S ...] [--format F]
    noetherlab show ID
    noetherlab map ID [--gamma G] [--entropy E]
    noetherlab check-identity [--count N]
    noetherlab oracle ID [--trials N] [--tol TOL]

Exit codes: 0 all checks pass, 1 a verification failed, 2 usage or config error.
A config file (``--config PATH``) holds flat ``key = value`` lines with the same
keys as the long flags (gamma, entropy, suite, tol, seed, trials, format,
workers); ``#`` starts a comment and flags override the file.  The seed falls
back to the NOETHERLAB_SEED environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Dict, List, Optional, Sequence

from . import oracle
from .catalog import CatalogError, applies, entry
from .euler_map import NoEulerianRepresentation, to_eulerian
from .expr import ExprError, LedgerViolation
from .model import ConfigError, ModelConfig
from .noether import ConservedVector
from .report import CheckRecord, emit
from .suite import (
    SUITES,
    Options,
    default_configs,
    identity_checks,
    identity_pairs,
    manufactured_solutions,
    on_shell_divergence,
    run,
    _covers,
    _numeric_config,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CONFIG_KEYS = ("gamma", "entropy", "suite", "tol", "seed", "trials", "format", "workers")


class UsageError(Exception):
    pass


def read_config_file(path: str) -> Dict[str, str]:
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", help="'symbolic' or a rational p/q > 1")
    common.add_argument("--entropy", choices=("isentropic", "general"))
    common.add_argument("--suite", action="append", help=f"one of {', '.join(SUITES)}; repeat or comma-separate")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--format", choices=("text", "json-lines"))
    common.add_argument("--workers", type=int)
    common.add_argument("--config", metavar="PATH", help="flat key = value file")

    p = argparse.ArgumentParser(prog="noetherlab", description="Noether analysis checks for 2D gas dynamics")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run verification suites over the catalog")
    s = sub.add_parser("show", parents=[common], help="print a catalog entry")
    s.add_argument("id")
    m = sub.add_parser("map", parents=[common], help="Eulerian image of a conserved vector")
    m.add_argument("id")
    c = sub.add_parser("check-identity", parents=[common], help="Noether identities on random and catalog inputs")
    c.add_argument("--count", type=int, default=20)
    o = sub.add_parser("oracle", parents=[common], help="numeric checks for one conserved vector")
    o.add_argument("id")
    return p


def _settings(args: argparse.Namespace) -> Dict[str, object]:
    s: Dict[str, object] = read_config_file(args.config) if args.config else {}
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            s[k] = ",".join(v) if k == "suite" else v
    if "seed" not in s and os.environ.get("NOETHERLAB_SEED"):
        s["seed"] = os.environ["NOETHERLAB_SEED"]
    try:
        s["tol"] = float(s.get("tol", 1e-9))
        s["seed"] = int(s.get("seed", oracle.DEFAULT_SEED))
        s["trials"] = int(s.get("trials", 100))
        s["workers"] = int(s.get("workers", 0))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad numeric setting: {exc}") from None
    if s["trials"] < 1:
        raise UsageError("trials must be at least 1")
    if s.get("format", "text") not in ("text", "json-lines"):
        raise UsageError(f"unknown format {s['format']!r}")
    if s.get("entropy") not in (None, "isentropic", "general"):
        raise UsageError(f"unknown entropy mode {s['entropy']!r}")
    suites = [x.strip() for x in str(s.get("suite", ",".join(SUITES))).split(",") if x.strip()]
    bad = [x for x in suites if x not in SUITES]
    if bad:
        raise UsageError(f"unknown suite {', '.join(bad)}; choose from {', '.join(SUITES)}")
    s["suite"] = suites
    return s


def _configs(s: Dict[str, object]) -> List[ModelConfig]:
    if s.get("gamma") is None and s.get("entropy") is None:
        return default_configs()
    gammas = [s["gamma"]] if s.get("gamma") is not None else ["symbolic", "2"]
    modes = [s["entropy"]] if s.get("entropy") is not None else ["general", "isentropic"]
    return [ModelConfig(g, m) for g in gammas for m in modes]


def _config_for(id: str, s: Dict[str, object]) -> ModelConfig:
    """First configuration (flags first, then the defaults) in which the entry applies."""
    e = entry(id)
    for cfg in _configs(s):
        if applies(e.applicability, cfg):
            return cfg
    raise UsageError(f"{id} does not apply to gamma={s.get('gamma')}, entropy={s.get('entropy')}")


def _options(s) -> Options:
    return Options(tol=s["tol"], trials=s["trials"], seed=s["seed"])


def _print_records(records: Sequence[CheckRecord], fmt: str, out) -> int:
    for line in emit(records, fmt):
        print(line, file=out)
    failed = sum(1 for r in records if not r.passed)
    if fmt == "text":
        print(f"{len(records)} checks, {failed} failed", file=out)
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_verify(s, out) -> int:
    records = run(_configs(s), s["suite"], _options(s), workers=s["workers"] or None)
    return _print_records(records, s.get("format", "text"), out)


def cmd_show(id: str, s, out) -> int:
    e = entry(id)
    print(f"{e.id}  ({e.kind})", file=out)
    app = e.applicability
    if app:
        print("  applies: " + ", ".join(f"{k}={v}" for k, v in app.items()), file=out)
    if e.note:
        print(f"  note: {e.note}", file=out)
    for key in ("source", "relations", "noether_scale", "divergence_symmetry"):
        if key in e.data:
            print(f"  {key}: {e.data[key]}", file=out)
    for key in ("coeffs", "combination"):
        if key in e.data:
            for var, text in e.data[key].items():
                print(f"  {key[:-1] if key == 'coeffs' else 'term'} {var}: {text}", file=out)
    if "components" in e.data:
        for lab, text in zip(("t", "xi", "eta"), e.data["components"]):
            print(f"  T^{lab} = {text}", file=out)
    if "certificate" in e.data:
        print(f"  certificate b: {e.data['certificate']}", file=out)
    for key in ("expected", "classifying", "obstruction"):
        if key in e.data:
            print(f"  {key}: {e.data[key]}", file=out)
    return EXIT_OK


def cmd_map(id: str, s, out) -> int:
    e = entry(id)
    if "components" not in e.data:
        raise UsageError(f"{id} is not a conserved vector")
    cfg = _config_for(id, s)
    T = ConservedVector(e.components(cfg), cfg.frame(), id)
    try:
        img = to_eulerian(T, cfg)
    except NoEulerianRepresentation as exc:
        print(f"{id} [{cfg.label()}]: no Eulerian representation", file=out)
        print("  surviving Lagrangian atoms: " + ", ".join(exc.survivors), file=out)
        return EXIT_OK
    print("(" + ", ".join(img.text()) + ")", file=out)
    return EXIT_OK


def cmd_check_identity(count: int, s, out) -> int:
    if count < 1:
        raise UsageError("--count must be at least 1")
    records = identity_pairs(count, s["seed"])
    for cfg in _configs(s):
        recs = identity_checks(cfg)
        for r in recs:
            r.details["config"] = cfg.label()
        records.extend(recs)
    return _print_records(records, s.get("format", "text"), out)


def cmd_oracle(id: str, s, out) -> int:
    e = entry(id)
    if "components" not in e.data:
        raise UsageError(f"{id} is not a conserved vector")
    cfg = _config_for(id, s)
    records = [oracle.point_record(id, "random-point", on_shell_divergence(e, cfg), s["trials"], s["tol"], s["seed"])]
    ncfg = _numeric_config(cfg)
    comps = e.components(ncfg)
    for sol in manufactured_solutions(cfg):
        if not _covers(sol, comps):
            continue
        for order in (2, 4):
            res = oracle.manufactured_check(comps, sol, oracle.GridSpec(order=order), f"{id}@{sol.name}")
            records.append(oracle.manufactured_record(res))
    for r in records:
        r.details["config"] = cfg.label()
    return _print_records(records, s.get("format", "text"), out)


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        s = _settings(args)
        if args.command == "verify":
            return cmd_verify(s, out)
        if args.command == "show":
            return cmd_show(args.id, s, out)
        if args.command == "map":
            return cmd_map(args.id, s, out)
        if args.command == "check-identity":
            return cmd_check_identity(args.count, s, out)
        return cmd_oracle(args.id, s, out)
    except CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ConfigError, LedgerViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ExprError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
