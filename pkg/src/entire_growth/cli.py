"""
Command-line front end: ``entire-growth {analyze,hypothesis,sequences,render,verify-all}``.

Exit codes: 0 success, 1 configuration error, 2 partial output (some radii
failed to evaluate), 3 sequence seed below the growth fixed point, 4 an
acceptance criterion failed (verify-all only). Mathematical verdicts are data
and never change the exit code of the analysis commands.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import __version__
from .errors import FitRejected, GrowthError, NotSatisfiedOnGrid, SeedTooSmall
from .serialize import config_hash, dumps

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL, EXIT_SEED, EXIT_ACCEPTANCE = 0, 1, 2, 3, 4
THREADS_ENV = "ENTIRE_GROWTH_THREADS"
_UNHASHED = ("out", "workers")


@dataclass
class RunConfig:
    """Every knob of a run; serialised as ``key = value`` lines."""

    function: str = "exp"
    grid: str = "0.0:5.0:32"
    epsilon: float = 0.1
    alpha: float = 2.0
    log_R1: float = 256.0
    log_S1: float = 2.0
    n_max: int = 6
    variant: str = "half-alpha"
    curve: str = "fit"
    b_target: float = 100.0
    m: float = 2.0
    window: str = "-2.0:2.0:-2.0:2.0"
    resolution: str = "256x256"
    max_iter: int = 200
    escape_log: float = 50.0
    bounded_radius: float = 100.0
    selector: str = "bounded"
    angular_samples: int = 1024
    exact_log_r_max: float = 12.0
    corpus: str = "exp;cos_sqrt;gap_squares;baker(a=10);monomial(c=3,n=2);constant(c=5)"
    tolerance_scale: float = 1.0
    criteria: str = "all"
    out: str = "out"
    workers: int = 1

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> RunConfig:
        types = {f.name: f.type for f in fields(cls)}
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, val = (p.strip() for p in line.split("=", 1))
            if key not in types:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            kw[key] = _coerce(types[key], val, key)
        return cls(**kw)

    def hash(self) -> str:
        """Hash of the settings that can change results (not ``out`` or ``workers``)."""
        keep = [ln for ln in self.to_text().splitlines() if ln.split(" = ")[0] not in _UNHASHED]
        return config_hash("\n".join(keep))

    def corpus_list(self) -> list[str]:
        return [s.strip() for s in self.corpus.split(";") if s.strip()]

    def criteria_list(self) -> list[int] | None:
        if self.criteria.strip() == "all":
            return None
        return [int(c) for c in self.criteria.split(",") if c.strip()]

    def resolution_pair(self) -> tuple[int, int]:
        w, h = self.resolution.lower().split("x")
        return int(w), int(h)

    def thread_count(self) -> int:
        env = os.environ.get(THREADS_ENV)
        return max(1, int(env)) if env else max(1, self.workers)


def _coerce(typ: str, val: str, key: str):
    try:
        if typ == "int":
            return int(val)
        if typ == "float":
            return float(val)
    except ValueError:
        raise ValueError(f"{key}: cannot parse {val!r} as {typ}") from None
    return val


def _envelope(cfg: RunConfig, command: str, payload) -> dict:
    return {"artifact_version": __version__, "config_hash": cfg.hash(), "command": command, "result": payload}


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ----------------------------------------------------------------------------
# commands


def cmd_analyze(cfg: RunConfig) -> int:
    from .gaps import gap_report
    from .invariants import Grid, classify_corollary, growth_exponents, growth_profile
    from .series import parse_function

    f = parse_function(cfg.function)
    grid = Grid.parse(cfg.grid)
    out = Path(cfg.out)
    prof = growth_profile(f, grid, angular_samples=cfg.angular_samples, workers=cfg.thread_count())
    out.mkdir(parents=True, exist_ok=True)
    prof.to_csv(out / "profile.csv")
    payload = {"function": f.identifier, "grid": str(grid), "invalid_samples": len(prof.samples) - len(prof.valid_samples)}
    try:
        ex = growth_exponents(prof, transcendental=f.transcendental)
        verdict = classify_corollary(ex)
        payload.update(exponents=ex.to_dict(), corollary={"qualifies": verdict.qualifies, "clause": verdict.clause,
                                                          "report": verdict.report})
    except GrowthError as exc:
        payload["exponents_error"] = f"{type(exc).__name__}: {exc}"
    payload["gaps"] = gap_report(f).to_dict()
    _write(out / "exponents.json", dumps(_envelope(cfg, "analyze", payload)))
    rho = payload.get("exponents", {}).get("rho")
    print(f"{f.identifier}: rho = {rho}, written to {out}")
    return EXIT_PARTIAL if payload["invalid_samples"] else EXIT_OK


def cmd_hypothesis(cfg: RunConfig) -> int:
    from .gaps import gap_report, hypothesis_check
    from .invariants import Grid
    from .series import parse_function

    f = parse_function(cfg.function)
    rep = hypothesis_check(f, cfg.epsilon, Grid.parse(cfg.grid), angular_samples=cfg.angular_samples,
                           workers=cfg.thread_count())
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rep.to_csv(out / "hypothesis.csv")
    payload = {"function": f.identifier, "hypothesis": rep.to_dict(), "gaps": gap_report(f).to_dict()}
    _write(out / "hypothesis.json", dumps(_envelope(cfg, "hypothesis", payload)))
    print(f"{f.identifier}: density {rep.final_density:.6g}, verdict {rep.verdict}")
    return EXIT_PARTIAL if any("failed to evaluate" in n for n in rep.notes) else EXIT_OK


def _checked(fn, *args):
    """Run a verification and turn NotSatisfiedOnGrid into data."""
    try:
        return {"status": "holds", **_plain(fn(*args))}
    except NotSatisfiedOnGrid as exc:
        return {"status": "not-satisfied-on-grid", "message": str(exc), "witness": exc.witness, "table": exc.table}
    except GrowthError as exc:
        return {"status": "error", "message": f"{type(exc).__name__}: {exc}"}


def _on_clipped(check, grid, hi, f):
    from .invariants import Grid

    top = min(grid.log_r_max, hi)
    if top <= grid.log_r_min:
        return {"status": "skipped", "message": f"grid lies above the exact-evaluation cap {hi}"}
    out = _checked(check, f, Grid(grid.log_r_min, top, grid.points))
    out["grid"] = f"{grid.log_r_min!r}:{top!r}:{grid.points}"
    return out


def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return obj.to_dict()
    return obj


def cmd_sequences(cfg: RunConfig) -> int:
    from .invariants import Grid, growth_exponents, growth_profile
    from .sequences import (QUARTER, GrowthCurve, build_sequences, circle_triple, fit_growth_curve,
                            lemma1_construct, special_case_seeds, verify_conclusion_ineq, verify_lemma2,
                            verify_step2ii, verify_wiman_valiron)
    from .series import parse_function

    f = parse_function(cfg.function)
    grid = Grid.parse(cfg.grid)
    prof = growth_profile(f, grid, with_min=False, angular_samples=cfg.angular_samples, workers=cfg.thread_count())
    if cfg.curve == "fit":
        curve = fit_growth_curve(f, prof)
    elif cfg.curve == "exact":
        curve = GrowthCurve.exact(f)
    else:
        log_sigma, rho = (float(v) for v in cfg.curve.split(":"))
        curve = GrowthCurve.model(log_sigma, rho)
    pair = build_sequences(curve, cfg.alpha, cfg.log_R1, cfg.log_S1, cfg.n_max, cfg.variant)

    # radius checks run on the part of the grid where every radius involved
    # stays cheap to evaluate exactly
    cap = cfg.exact_log_r_max
    checks = {
        "wiman_valiron": _on_clipped(verify_wiman_valiron, grid, cap / 2, f),
        "u_log_u_inequality": _on_clipped(lambda f_, g_: verify_lemma2(f_, cfg.m, g_), grid, 2 * cfg.m * cap, f),
        "power_inequality": _on_clipped(lambda f_, g_: verify_step2ii(f_, cfg.alpha, g_), grid,
                                        cap / (2 * cfg.alpha), f),
    }
    triples = []
    for n in range(1, len(pair.log_R) + 1):
        try:
            triples.append(circle_triple(pair, curve, n, cfg.alpha, f, exact_cap=cap).to_dict())
        except GrowthError as exc:
            triples.append({"n": n, "error": f"{type(exc).__name__}: {exc}"})
    payload = {"function": f.identifier, "curve": curve.to_dict(), "pair": pair.to_dict(),
               "checks": checks, "circles": triples}
    if cfg.variant == QUARTER:
        try:
            records, notes = lemma1_construct(f, pair, cfg.b_target)
            payload["l_k_construction"] = {"records": [r.to_dict() for r in records], "notes": notes}
            payload["concluding_inequality"] = _checked(verify_conclusion_ineq, f, records, cfg.alpha)
        except (GrowthError, ValueError) as exc:
            payload["l_k_construction"] = {"error": f"{type(exc).__name__}: {exc}"}
    try:
        ex = growth_exponents(prof)
        payload["special_case"] = special_case_seeds(ex, cfg.alpha, curve, cfg.log_R1, cfg.log_S1, cfg.n_max)
    except (GrowthError, ValueError) as exc:
        payload["special_case"] = {"error": f"{type(exc).__name__}: {exc}"}

    summary = [("S_n <= R_n^(1/(2 alpha))", _first_index(pair.property2)),
               ("2 S_n <= R_n^(1/(4 alpha))", _first_index(pair.general))]
    for name, res in checks.items():
        if res["status"] != "holds":
            summary.append((name, res["status"]))
        elif name == "wiman_valiron":
            summary.append(("maximum-term bound (log s0)", res["log_s0"]))
            summary.append(("squared-radius bound (log s1)", res["log_s1"]))
        else:
            summary.append((name, res["first_log_r"]))
    payload["summary"] = [{"inequality": k, "first_holding": v} for k, v in summary]
    out = Path(cfg.out)
    _write(out / "sequences.json", dumps(_envelope(cfg, "sequences", payload)))
    for k, v in summary:
        print(f"{k:32s} first holding at {v}")
    return EXIT_OK


def _first_index(flags):
    from .sequences import _first_holding

    i = _first_holding(flags)
    return None if i is None else i + 1


def cmd_render(cfg: RunConfig) -> int:
    from .dynamics import Window, component_probe, escape_field
    from .series import parse_function

    f = parse_function(cfg.function)
    fld = escape_field(f, Window.parse(cfg.window), cfg.resolution_pair(), cfg.max_iter, cfg.escape_log,
                       cfg.bounded_radius, workers=cfg.thread_count())
    rep = component_probe(fld, cfg.selector)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    fld.to_pgm(out / "field.pgm")
    fld.to_csv(out / "field.csv")
    _write(out / "components.json", dumps(_envelope(cfg, "render", {"field": fld.to_dict(), "components": rep.to_dict()})))
    print(f"{f.identifier}: {fld.counts()}, {len(rep.components)} {cfg.selector} components")
    return EXIT_OK


def cmd_verify_all(cfg: RunConfig) -> int:
    from . import evaluation
    from .acceptance import run_all

    corpus = cfg.corpus_list()
    if not corpus:
        raise ValueError("empty corpus")
    numbers = cfg.criteria_list()
    results = run_all(cfg.tolerance_scale, tuple(corpus), numbers)
    for r in results:
        print(r.line())
    body = [r.to_dict() for r in results]
    first = dumps(body)
    # determinism: recompute everything from cold caches and compare the bytes
    evaluation.clear_caches()
    again = run_all(cfg.tolerance_scale, tuple(corpus), numbers)
    same = dumps([r.to_dict() for r in again]) == first
    det = {"number": 12, "name": "byte-identical repeat run", "passed": same, "detail": {}}
    print(f"[{'PASS' if same else 'FAIL'}] criterion 12: byte-identical repeat run")
    body.append(det)
    failed = [b for b in body if not b["passed"]]
    summary = _envelope(cfg, "verify-all", {"criteria": body, "all_passed": not failed,
                                            "first_failure": failed[0]["number"] if failed else None})
    _write(Path(cfg.out) / "summary.json", dumps(summary))
    if failed:
        print(f"first failing criterion: {failed[0]['number']} ({failed[0]['name']})", file=sys.stderr)
        return EXIT_ACCEPTANCE
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "hypothesis": cmd_hypothesis, "sequences": cmd_sequences,
            "render": cmd_render, "verify-all": cmd_verify_all}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="entire-growth", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key = value file; flags override it")
        for f in fields(RunConfig):
            flag = "--" + f.name.replace("_", "-")
            sp.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())
    return p


def make_config(args) -> RunConfig:
    cfg = RunConfig.from_text(Path(args.config).read_text()) if args.config else RunConfig()
    types = {f.name: f.type for f in fields(RunConfig)}
    updates = {k: _coerce(types[k], v, k) for k, v in vars(args).items() if k in types and v is not None}
    return dataclasses.replace(cfg, **updates)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](cfg)
    except SeedTooSmall as exc:
        print(f"error: {exc}\nhint: raise log_R1 so that log M(R_1^(1/c)) > log R_1", file=sys.stderr)
        return EXIT_SEED
    except (ValueError, OSError, FitRejected) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
