"""Command line front end.

    surfrev profile-info --config run.json
    surfrev run --config run.json --out results/ --threads 4

Exit codes: 0 success, 1 validation failure, 2 numerical failure (including
failed tolerance checks in ``run``).
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis as an
from . import bscurve as bc
from . import counting as ct
from . import geodesics as geo
from .profiles import ProfileError, make_profile, volume

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2
OFF_MODE_GAP = 0.5


class StageError(Exception):
    def __init__(self, stage: str, code: int, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.code = code


@dataclass
class Tolerances:
    mode_rel: float = 0.10
    random_sigma: float = 3.0
    tv: float = 0.10
    variance_rel: float = 0.15


@dataclass
class RunConfig:
    profile: dict = field(default_factory=lambda: {"kind": "ellipsoid", "a": 1.0, "b": 2.0})
    grid_size: int = 129
    R_min: float = 50.0
    R_max: float = 2050.0
    samples: int = 400_000
    length_cutoff: float = 40.0
    parseval_cutoff: float = 160.0
    check_modes: int = 5
    random_frequencies: int = 5
    seed: int = 0
    bins: int = 50
    phi_terms: int = 8
    q_max: int = geo.Q_MAX
    subtract_phi: str = "auto"
    omega_samples: int = 101
    tolerances: Tolerances = field(default_factory=Tolerances)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        tol = Tolerances(**data.pop("tolerances", {}))
        cfg = cls(**data, tolerances=tol)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.grid_size < bc.MIN_GRID:
            raise ValueError(f"grid_size must be >= {bc.MIN_GRID}")
        if not (0 < self.R_min < self.R_max):
            raise ValueError("need 0 < R_min < R_max")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if self.length_cutoff <= 0 or self.parseval_cutoff <= 0:
            raise ValueError("cutoffs must be positive")
        if self.bins < 10:
            raise ValueError("bins must be >= 10")
        if self.phi_terms < 1 or self.q_max < 1 or self.omega_samples < 2:
            raise ValueError("phi_terms, q_max must be >= 1 and omega_samples >= 2")
        if self.subtract_phi not in ("auto", "yes", "no"):
            raise ValueError("subtract_phi must be auto, yes or no")


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        return RunConfig.from_dict(json.load(fh))


class Pipeline:
    """Lazily built stages shared by the subcommands."""

    def __init__(self, cfg: RunConfig, out: Path, threads: int, use_cache: bool):
        self.cfg, self.out, self.threads, self.use_cache = cfg, out, threads, use_cache
        self._profile = self._curve = self._crit = None
        self.log: list[str] = []

    def say(self, msg: str) -> None:
        self.log.append(msg)
        print(msg)

    @property
    def profile(self):
        if self._profile is None:
            try:
                self._profile = make_profile(self.cfg.profile)
            except (ProfileError, ValueError, KeyError, TypeError) as exc:
                raise StageError("profile", EXIT_VALIDATION, str(exc)) from exc
        return self._profile

    @property
    def critical(self):
        if self._crit is None:
            try:
                self._crit = geo.critical_points(self.profile, q_max=self.cfg.q_max)
            except geo.DegenerateSurfaceError as exc:
                raise StageError("geodesics", EXIT_VALIDATION, str(exc)) from exc
        return self._crit

    @property
    def curve(self):
        if self._curve is None:
            try:
                crit = self._crit
                if crit is None:
                    try:
                        crit = self.critical
                    except StageError:
                        crit = []
                self._curve = bc.build_curve(self.profile, self.cfg.grid_size, crit=crit)
            except (FloatingPointError, ArithmeticError, RuntimeError) as exc:
                raise StageError("curve", EXIT_NUMERICAL, str(exc)) from exc
        return self._curve

    def series(self):
        cfg = self.cfg
        rational = [c for c in self.curve.critical if c.rational_flag]
        sub = cfg.subtract_phi == "yes" or (cfg.subtract_phi == "auto" and bool(rational))
        cache = self.out / "cache" if self.use_cache else None
        key = ct.cache_key(self.curve, cfg.R_min, cfg.R_max, cfg.samples)
        hit = cache is not None and (cache / f"counts-{key}.npz").exists()
        try:
            s = ct.error_series(self.curve, cfg.R_min, cfg.R_max, cfg.samples, sub,
                                phi_terms=cfg.phi_terms, threads=self.threads, cache_dir=cache)
        except ValueError as exc:
            raise StageError("counting", EXIT_VALIDATION, str(exc)) from exc
        except FloatingPointError as exc:
            raise StageError("counting", EXIT_NUMERICAL, str(exc)) from exc
        self.say(f"counting: {'cache hit, counting skipped' if hit else 'counted'} (key {key})")
        for d in s.diagnostics:
            self.say(f"counting: warning: {d}")
        return s


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_profile_info(pipe: Pipeline) -> int:
    p = pipe.profile
    vol = float(volume(p))
    info = geo.classify(p, q_max=pipe.cfg.q_max)
    pipe.say(f"kind: {p.kind}")
    pipe.say(f"L = {p.L!r}")
    pipe.say(f"s_max = {p.s_max!r}")
    pipe.say(f"Vol M = {vol!r}")
    pipe.say(f"Vol M / 4pi = {vol / (4 * math.pi)!r}")
    pipe.say(info["message"])
    crit = []
    for c in info["critical"]:
        pq = f"{c.rational_pq[0]}/{c.rational_pq[1]}" if c.rational_pq else "not detected"
        pipe.say(f"  I_k = {c.I_k!r}, omega = {c.omega_value!r}, omega'' = {c.omega_second!r}, "
                 f"rational: {c.rational_flag} ({pq})")
        crit.append({"I_k": c.I_k, "omega": c.omega_value, "omega_second": c.omega_second,
                     "rational": c.rational_flag, "pq": list(c.rational_pq) if c.rational_pq else None})
    for note in info.get("notes", []):
        pipe.say(f"  note: {note}")
    _write_json(pipe.out / "profile_info.json", {
        "kind": p.kind, "L": p.L, "s_max": p.s_max, "volume": vol, "volume_over_4pi": vol / (4 * math.pi),
        "status": info["status"], "message": info["message"], "critical": crit})
    return EXIT_OK


def cmd_omega_curve(pipe: Pipeline) -> int:
    p = pipe.profile
    rows, failed = [], 0
    for I in np.linspace(0.0, 1.0, pipe.cfg.omega_samples):
        I = float(I)
        try:
            t, w, _ = geo.phase_integrals(p, I)
            wp = geo.omega_prime(p, I)
            rows.append((I, w, wp, t))
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            failed += 1
            print(f"omega-curve: row I={I!r} failed: {exc}", file=sys.stderr)
            rows.append((I, math.nan, math.nan, math.nan))
    path = pipe.out / "omega_curve.csv"
    with path.open("w") as fh:
        fh.write("I,omega,omega_prime,tau\n")
        for r in rows:
            fh.write(",".join(repr(float(v)) for v in r) + "\n")
    pipe.say(f"omega-curve: wrote {path}")
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_geodesics(pipe: Pipeline) -> int:
    classes = geo.enumerate_closed_geodesics(pipe.profile, pipe.cfg.length_cutoff, crit=pipe.critical)
    path = pipe.out / "geodesics.csv"
    geo.write_geodesics_csv(classes, path)
    pipe.say(f"geodesics: {len(classes)} classes with length <= {pipe.cfg.length_cutoff!r}; wrote {path}")
    return EXIT_OK


def cmd_count(pipe: Pipeline) -> int:
    s = pipe.series()
    path = ct.write_series_csv(s, pipe.out / "series.csv")
    bc.write_curve_csv(pipe.curve, pipe.out / "curve.csv")
    pipe.say(f"count: N_BS({float(s.R_grid[-1])!r}) = {int(s.N_vals[-1])}; wrote {path}")
    return EXIT_OK


def cmd_distribution(pipe: Pipeline) -> int:
    s = pipe.series()
    summ = an.distribution(s, pipe.cfg.bins)
    an.write_histogram_csv(summ, pipe.out / "histogram.csv")
    (pipe.out / "distribution.json").write_text(an.summary_json(summ) + "\n")
    m = summ.moments
    pipe.say(f"distribution: mean {m['mean']:.6g}, variance {m['variance']:.6g}, "
             f"skewness {m['skewness']:.6g}, kurtosis {m['kurtosis']:.6g}")
    return EXIT_OK


def _random_frequencies(rng, n, lo, hi, avoid, gap):
    out = []
    while len(out) < n:
        f = float(rng.uniform(lo, hi))
        if all(abs(f - a) > gap for a in avoid):
            out.append(f)
    return out


def cmd_run(pipe: Pipeline) -> int:
    cfg, tol = pipe.cfg, pipe.cfg.tolerances
    curve = pipe.curve
    if curve.degenerate:
        raise StageError("modes", EXIT_VALIDATION, "degenerate surface: omega is constant, no TH/DH")
    crit = pipe.critical
    bc.write_curve_csv(curve, pipe.out / "curve.csv")
    s = pipe.series()
    ct.write_series_csv(s, pipe.out / "series.csv")

    classes = geo.enumerate_closed_geodesics(pipe.profile, max(cfg.length_cutoff, cfg.parseval_cutoff), crit=crit)
    geo.write_geodesics_csv([c for c in classes if c.length <= cfg.length_cutoff], pipe.out / "geodesics.csv")
    modes = an.predicted_modes(pipe.profile, curve, cfg.length_cutoff, classes=classes)
    checks: list[dict] = []

    def check(name, ok, detail):
        checks.append({"check": name, "pass": bool(ok), "detail": detail})
        pipe.say(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    rows = []
    usable = []
    for md in modes:
        try:
            an._check_window(s, md.frequency)
            usable.append(md)
        except an.ProjectionError as exc:
            pipe.say(f"projection: warning: {exc}")
    for md in usable[:cfg.check_modes]:
        emp, se = an.project_mode(s, md.frequency, md.phase, with_error=True)
        pred = md.effective_amplitude
        rel = abs(emp - pred) / abs(pred)
        rows.append((md.frequency, pred, emp, se, rel))
        check(f"mode {md.frequency:.6f}", rel <= tol.mode_rel,
              f"predicted {pred:+.6f}, empirical {emp:+.6f} +- {se:.2g}, rel {rel:.3%}")
    an.write_modes_csv(rows, pipe.out / "modes.csv")

    if usable:
        rng = np.random.default_rng(cfg.seed)
        hi = usable[min(cfg.check_modes, len(usable)) - 1].frequency
        lo = 2.0 * math.pi * an.MIN_PERIODS / s.window
        avoid = [c.length for c in classes]
        rand_rows = []
        # keep away from every class length so sidelobe leakage stays below the noise
        for f in _random_frequencies(rng, cfg.random_frequencies, lo, hi, avoid, OFF_MODE_GAP):
            emp, se = an.project_mode(s, f, 0.0, with_error=True)
            rand_rows.append((f, 0.0, emp, se, abs(emp) / se if se > 0 else math.inf))
            check(f"off-mode {f:.6f}", abs(emp) <= tol.random_sigma * se, f"coefficient {emp:+.2e}, {abs(emp) / se:.2f} stderr")
        an.write_modes_csv(rand_rows, pipe.out / "offmodes.csv")

        b2 = [an.b2_distance(s, [m for m in modes if m.frequency <= cut]) for cut in (15.0, 25.0, 40.0)]
        check("b2 trend", b2[0] > b2[1] > b2[2], "distances " + ", ".join(f"{v:.5f}" for v in b2))

        pmodes = an.predicted_modes(pipe.profile, curve, cfg.parseval_cutoff, classes=classes)
        pv = an.parseval_variance(pmodes)
        var = float(np.var(s.F_vals))
        check("parseval variance", abs(var - pv) / pv <= tol.variance_rel,
              f"empirical {var:.5f}, modes up to {cfg.parseval_cutoff:g}: {pv:.5f}")
    else:
        pipe.say("projection: warning: window too short, no projections")

    summ = an.distribution(s, cfg.bins)
    an.write_histogram_csv(summ, pipe.out / "histogram.csv")
    if len(s) >= 20:
        h1, h2 = an.split_halves(s)
        tv = an.tv_distance(an.distribution(h1, edges=summ.bin_edges), an.distribution(h2, edges=summ.bin_edges))
        if usable:
            check("half-window TV", tv <= tol.tv, f"{tv:.4f}")

    ok = all(c["pass"] for c in checks)
    _write_json(pipe.out / "summary.json", {"checks": checks, "passed": ok,
                                            "moments": summ.moments, "log": pipe.log})
    return EXIT_OK if ok else EXIT_NUMERICAL


COMMANDS = {
    "profile-info": cmd_profile_info,
    "omega-curve": cmd_omega_curve,
    "geodesics": cmd_geodesics,
    "count": cmd_count,
    "run": cmd_run,
    "distribution": cmd_distribution,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surfrev", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", metavar="PATH", help="JSON run configuration")
        sp.add_argument("--out", metavar="DIR", default=".", help="output directory")
        sp.add_argument("--threads", metavar="N", type=int, default=1)
        sp.add_argument("--no-cache", action="store_true", help="always recount")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, TypeError) as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.threads < 1:
        print("[config] --threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pipe = Pipeline(cfg, out, args.threads, not args.no_cache)
    try:
        return COMMANDS[args.command](pipe)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except geo.DegenerateSurfaceError as exc:
        print(f"[{args.command}] {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (FloatingPointError, ArithmeticError, RuntimeError) as exc:
        print(f"[{args.command}] numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
