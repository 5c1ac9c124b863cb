"""Command-line driver for verification campaigns.

Subcommands: ``verify`` (inequality campaigns), ``eigen`` (eigenvalue runs),
``constants`` (constant tables) and ``young-check`` (growth certification).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from . import corpus as corpus_mod
from .hardy import (
    CSV_COLUMNS,
    InequalityReport,
    NoLimitError,
    OutOfRegimeError,
    check_classical_hardy,
    check_local_lemma,
    check_modular_hardy,
    check_norm_hardy,
    check_palmieri,
    compute_constants,
    not_applicable,
)
from .modular import IntegrabilityError
from .young import YoungFunction, certify_growth

SCHEMA_VERSION = 1
HARDY_CHECKS = ("classical", "palmieri", "local_lemma", "modular_hardy", "norm_hardy_cor",
                "norm_hardy_thm")
EIGEN_CHECKS = ("eigen_dirichlet", "eigen_weighted")
ALL_CHECKS = HARDY_CHECKS + EIGEN_CHECKS
ENV_JOBS = "ORLICZ_HARDY_JOBS"
ENV_TOL = "ORLICZ_HARDY_TOL"
EIGEN_COLUMNS = ("check", "g_kind", "s", "interval", "n", "alpha", "Lambda_alpha", "lambda_alpha",
                 "iterations", "restarts", "converged")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class EigenSettings:
    interval: tuple[float, float] = (1.0, 2.0)
    n: int = 128
    alpha: list = field(default_factory=lambda: [1.0])
    restarts: int = 5
    s: list | None = None


@dataclass
class CampaignConfig:
    young: list
    s: list | None = None
    sp_targets: list | None = None
    corpus: list = field(default_factory=list)
    resolution: int = 200
    checks: list = field(default_factory=list)
    tol: float = 1e-6
    ell: float = math.inf
    eigen: EigenSettings = field(default_factory=EigenSettings)
    out_dir: str = "out"
    csv_name: str = "report.csv"
    summary_name: str = "summary.txt"

    def s_values(self, F: YoungFunction) -> list[float]:
        if self.s is not None:
            return list(self.s)
        return [t / F.p_minus for t in self.sp_targets]


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"missing field '{where}{key}'")
    return d[key]


def parse_young(d, where: str) -> YoungFunction:
    if not isinstance(d, dict):
        raise ConfigError(f"field '{where}': expected an object")
    try:
        return YoungFunction.from_dict(d)
    except KeyError as exc:
        raise ConfigError(f"field '{where}': missing parameter {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"field '{where}': {exc}") from None


def parse_config(text: str) -> CampaignConfig:
    """Parse and validate a JSON campaign config; errors name the line or field."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigError("top level must be an object")
    version = _need(d, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema_version': unsupported version {version!r}")
    young_raw = _need(d, "young", "")
    if not isinstance(young_raw, list) or not young_raw:
        raise ConfigError("field 'young': expected a nonempty list")
    young = [parse_young(y, f"young[{i}]") for i, y in enumerate(young_raw)]
    s, targets = d.get("s"), d.get("sp_targets")
    if (s is None) == (targets is None):
        raise ConfigError("exactly one of fields 's' and 'sp_targets' is required")
    for name, lst in (("s", s), ("sp_targets", targets)):
        if lst is not None and (not isinstance(lst, list)
                                or not all(isinstance(v, (int, float)) for v in lst)):
            raise ConfigError(f"field '{name}': expected a list of numbers")
    checks = d.get("checks", [])
    if not isinstance(checks, list):
        raise ConfigError("field 'checks': expected a list")
    for i, c in enumerate(checks):
        if c not in ALL_CHECKS:
            raise ConfigError(f"field 'checks[{i}]': unknown check {c!r}; choose from {ALL_CHECKS}")
    resolution = int(d.get("resolution", 200))
    corpus_raw = d.get("corpus", "default")
    if corpus_raw == "default":
        corpus_raw = [{"family": e.family, **e.params} for e in corpus_mod.default_corpus(8)]
    if not isinstance(corpus_raw, list):
        raise ConfigError("field 'corpus': expected a list or \"default\"")
    for i, c in enumerate(corpus_raw):
        try:
            corpus_mod.from_dict(c, 8)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"field 'corpus[{i}]': {exc}") from None
    tols = d.get("tolerances", {})
    tol = float(tols.get("tol", 1e-6))
    ell = d.get("palmieri", {}).get("ell")
    ell = math.inf if ell is None else float(ell)
    e = d.get("eigen", {})
    try:
        eig = EigenSettings(tuple(float(v) for v in e.get("interval", (1.0, 2.0))),
                            int(e.get("n", 128)), [float(a) for a in e.get("alpha", [1.0])],
                            int(e.get("restarts", 5)),
                            None if e.get("s") is None else [float(v) for v in e["s"]])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'eigen': {exc}") from None
    if len(eig.interval) != 2 or not 0 < eig.interval[0] < eig.interval[1]:
        raise ConfigError("field 'eigen.interval': need [a, b] with 0 < a < b")
    out = d.get("outputs", {})
    return CampaignConfig(young, s, targets, corpus_raw, resolution, checks, tol, ell, eig,
                          out.get("dir", "out"), out.get("csv", "report.csv"),
                          out.get("summary", "summary.txt"))


# ---------------------------------------------------------------------------
# work items


@lru_cache(maxsize=64)
def _entry(spec_json: str, resolution: int):
    return corpus_mod.from_dict(json.loads(spec_json), resolution)


def _meta(F: YoungFunction, s, item: str) -> dict:
    return {"g_kind": F.label, "p_minus": F.p_minus, "p_plus": F.p_plus, "s": s, "item": item}


def _skip(name: str, F, s, item, reason) -> InequalityReport:
    return not_applicable(name, reason, meta=_meta(F, s, item), status="skipped")


def run_item(task: tuple) -> list[dict]:
    """Run one (check, F, s, corpus entry) task and return CSV rows."""
    check, young_d, s, spec_json, resolution, tol, ell = task
    F = YoungFunction.from_dict(young_d)
    entry = _entry(spec_json, resolution)
    u, item = entry.function, entry.id
    reports: list[InequalityReport] = []
    try:
        if check == "classical":
            reports.append(check_classical_hardy(u, F.p_minus, item=item))
        elif check == "palmieri":
            for theta, tag in ((1.0 - s, "1-s"), (-s, "-s")):
                r = check_palmieri(u, F, theta, ell, item=item)
                r = _renamed(r, f"palmieri[theta={tag}]", s)
                reports.append(r)
        elif check == "local_lemma":
            reports.append(check_local_lemma(u, F, s, item=item))
        elif check == "modular_hardy":
            reports.append(check_modular_hardy(u, F, s, tol, item=item))
        elif check == "norm_hardy_cor":
            reports.append(check_norm_hardy(u, F, s, "corollary", tol, item=item))
        elif check == "norm_hardy_thm":
            reports.append(check_norm_hardy(u, F, s, "theorem", tol, item=item))
        else:
            raise ValueError(f"unknown check {check}")
    except (NoLimitError, IntegrabilityError) as exc:
        reports = [not_applicable(check, str(exc), meta=_meta(F, s, item))]
    except Exception as exc:  # reported as a failed row, never dropped
        r = not_applicable(check, f"{type(exc).__name__}: {exc}", meta=_meta(F, s, item),
                           status="error")
        reports = [InequalityReport(r.name, r.lhs, r.rhs, r.constant, r.ratio, False, r.budget,
                                    "error", r.note, r.meta)]
    return [r.to_row() for r in reports]


def _renamed(r: InequalityReport, name: str, s) -> InequalityReport:
    meta = dict(r.meta)
    meta["s"] = s
    return InequalityReport(name, r.lhs, r.rhs, r.constant, r.ratio, r.passed, r.budget,
                            r.status, r.note, meta)


def build_tasks(cfg: CampaignConfig) -> list:
    """Ordered task list; out-of-regime combinations become skipped rows."""
    out = []
    for F in cfg.young:
        yd = F.to_dict()
        for spec in cfg.corpus:
            spec_json = json.dumps(spec, sort_keys=True)
            for check in cfg.checks:
                if check in EIGEN_CHECKS:
                    continue
                if check == "classical":
                    if F.kind == "power":
                        out.append(("run", (check, yd, None, spec_json, cfg.resolution, cfg.tol,
                                            cfg.ell)))
                    continue
                for s in cfg.s_values(F):
                    item = _entry(spec_json, 8).id
                    if not 0 < s < 1:
                        out.append(("skip", (check, F, s, item, f"s = {s:g} outside (0, 1)")))
                    elif not s * F.p_minus > 1:
                        out.append(("skip", (check, F, s, item, "sp⁻ ≤ 1")))
                    else:
                        out.append(("run", (check, yd, s, spec_json, cfg.resolution, cfg.tol,
                                            cfg.ell)))
    return out


def _eigen_rows(cfg: CampaignConfig, jobs: int) -> tuple[list[dict], list[dict]]:
    from .eigen import DiscreteSpace, check_lower_bounds, minimize_quotient

    rows, sol_rows = [], []
    checks = [c for c in cfg.checks if c in EIGEN_CHECKS]
    if not checks:
        return rows, sol_rows
    a, b = cfg.eigen.interval
    space = DiscreteSpace(a, b, cfg.eigen.n)
    item = f"Omega=({a:g},{b:g}),n={cfg.eigen.n}"
    for F in cfg.young:
        s_list = cfg.eigen.s if cfg.eigen.s is not None else cfg.s_values(F)
        for s in s_list:
            for check in checks:
                if not (0 < s < 1 and s * F.p_minus > 1):
                    rows.append(_skip(check, F, s, item, "sp⁻ ≤ 1").to_row())
                    continue
                for alpha in cfg.eigen.alpha:
                    sol = minimize_quotient(space, F, s, alpha, cfg.eigen.restarts,
                                            weighted=(check == "eigen_weighted"), jobs=jobs)
                    sol_rows.append({"check": check, "g_kind": F.label, "s": _f(s),
                                     "interval": f"({a:g},{b:g})", "n": str(space.n),
                                     "alpha": _f(alpha), "Lambda_alpha": _f(sol.Lambda_alpha),
                                     "lambda_alpha": _f(sol.lambda_alpha),
                                     "iterations": str(sol.diagnostics["iterations"]),
                                     "restarts": str(cfg.eigen.restarts),
                                     "converged": str(sol.converged).lower()})
                    for bc in check_lower_bounds(sol, F, s):
                        ratio = bc.lhs / bc.rhs if bc.rhs else math.inf
                        rows.append({
                            "name": f"{check}/{bc.name}", "g_kind": F.label,
                            "p_minus": _f(F.p_minus), "p_plus": _f(F.p_plus), "s": _f(s),
                            "item": f"{item},alpha={alpha:g}", "constant": _f(1.0),
                            "lhs": _f(bc.lhs), "rhs": _f(bc.rhs), "ratio": _f(ratio),
                            "budget": _f(0.0), "pass": "true" if bc.passed else "false",
                            "status": "ok" if sol.converged else "not_converged", "note": ""})
    return rows, sol_rows


def _f(x) -> str:
    return format(float(x), ".12g")


def run_campaign(cfg: CampaignConfig, jobs: int = 1, eigen_only: bool = False
                 ) -> tuple[list[dict], list[dict]]:
    """All CSV rows in config order (deterministic for any ``jobs``)."""
    rows: list[dict] = []
    if not eigen_only:
        tasks = build_tasks(cfg)
        runs = [t for kind, t in tasks if kind == "run"]
        if jobs > 1 and len(runs) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                results = iter(list(ex.map(run_item, runs)))
        else:
            results = iter([run_item(t) for t in runs])
        for kind, t in tasks:
            if kind == "run":
                rows.extend(next(results))
            else:
                rows.append(_skip(*t).to_row())
    erows, sol_rows = _eigen_rows(cfg, jobs)
    rows.extend(erows)
    return rows, sol_rows


def rows_to_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def summarize(rows: list[dict]) -> str:
    counts: dict[str, int] = {}
    worst: dict[str, tuple[float, str]] = {}
    failed = []
    for r in rows:
        key = r["status"] if r["status"] != "ok" else ("pass" if r["pass"] == "true" else "fail")
        counts[key] = counts.get(key, 0) + 1
        if r["status"] == "ok":
            base = r["name"].split("[")[0]
            ratio = float(r["ratio"])
            if base not in worst or ratio > worst[base][0]:
                worst[base] = (ratio, f"{r['g_kind']} s={r['s']} {r['item']}")
        if r["pass"] == "false":
            failed.append(r)
    lines = [f"rows: {len(rows)}"]
    lines += [f"  {k}: {v}" for k, v in sorted(counts.items())]
    skips = sorted({r["note"] for r in rows if r["status"] == "skipped"})
    if skips:
        lines.append("skipped (out of regime): " + "; ".join(skips))
    if worst:
        lines.append("worst ratio per check:")
        for k in sorted(worst):
            lines.append(f"  {k}: {worst[k][0]:.6g}  ({worst[k][1]})")
    for r in failed:
        lines.append(f"FAILED {r['name']} {r['g_kind']} s={r['s']} {r['item']}: {r['note']}")
    return "\n".join(lines) + "\n"


def any_failed(rows: list[dict]) -> bool:
    return any(r["pass"] == "false" for r in rows)


# ---------------------------------------------------------------------------
# entry point


def _resolve(flag, env_name: str, default, cast):
    if flag is not None:
        return cast(flag)
    if os.environ.get(env_name):
        return cast(os.environ[env_name])
    return default


def _load(path: str) -> CampaignConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def parse_young_flag(text: str) -> YoungFunction:
    """``power:p=2`` or ``log_perturbed:a=1,b=2,c=1``."""
    kind, _, rest = text.partition(":")
    params = {}
    for part in filter(None, rest.split(",")):
        k, _, v = part.partition("=")
        params[k.strip()] = float(v)
    return parse_young({"kind": kind.strip(), **params}, text)


def _write_outputs(cfg, out_dir, rows, sol_rows, stem=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_name = cfg.csv_name if stem is None else f"{stem}.csv"
    (out / csv_name).write_text(rows_to_csv(rows))
    summary = summarize(rows)
    (out / cfg.summary_name).write_text(summary)
    if sol_rows:
        (out / "eigen_solutions.csv").write_text(rows_to_csv(sol_rows, EIGEN_COLUMNS))
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="orlicz-hardy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)
    for name in ("verify", "eigen"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--jobs", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--out")
    pc = sub.add_parser("constants")
    pc.add_argument("--config")
    pc.add_argument("--young", action="append", default=[])
    pc.add_argument("--s", type=float, action="append", default=[])
    py = sub.add_parser("young-check")
    py.add_argument("--config")
    py.add_argument("--young", action="append", default=[])
    args = parser.parse_args(argv)

    try:
        if args.cmd in ("verify", "eigen"):
            cfg = _load(args.config)
            cfg.tol = _resolve(args.tol, ENV_TOL, cfg.tol, float)
            jobs = max(1, _resolve(args.jobs, ENV_JOBS, 1, int))
            out_dir = args.out or cfg.out_dir
            if args.cmd == "eigen":
                cfg.checks = [c for c in cfg.checks if c in EIGEN_CHECKS] or ["eigen_dirichlet"]
            rows, sol_rows = run_campaign(cfg, jobs, eigen_only=args.cmd == "eigen")
            summary = _write_outputs(cfg, out_dir, rows, sol_rows)
            sys.stdout.write(summary)
            return 1 if any_failed(rows) else 0
        young, s_list = [], []
        if args.config:
            cfg = _load(args.config)
            young = list(cfg.young)
            if args.cmd == "constants":
                s_list = [None]
                young_s = [(F, s) for F in young for s in cfg.s_values(F)]
        young += [parse_young_flag(y) for y in args.young]
        if not young:
            raise ConfigError("no Young functions given (use --config or --young)")
        if args.cmd == "young-check":
            ok = True
            print("young,p_minus,p_plus,min_ratio,max_ratio,passed")
            for F in young:
                c = certify_growth(F)
                ok &= c.passed
                print(f"{F.label},{_f(F.p_minus)},{_f(F.p_plus)},{_f(c.min_ratio)},"
                      f"{_f(c.max_ratio)},{str(c.passed).lower()}")
            return 0 if ok else 1
        pairs = [(F, s) for F in young for s in args.s]
        if args.config and s_list:
            pairs = young_s + pairs
        if not pairs:
            raise ConfigError("no s values given (use --s or a config)")
        print("young,s,c_H,C_doubling,C_H,norm_const_thm,norm_const_cor,thm_below_cor")
        for F, s in pairs:
            try:
                k = compute_constants(F, s)
            except OutOfRegimeError as exc:
                print(f"{F.label},{_f(s)},skipped: {exc}")
                continue
            print(f"{F.label},{_f(s)},{_f(k.c_H)},{_f(k.C_doubling)},{_f(k.C_H)},"
                  f"{_f(k.norm_const_thm)},{_f(k.norm_const_cor)},"
                  f"{str(k.norm_const_thm < k.norm_const_cor).lower()}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
