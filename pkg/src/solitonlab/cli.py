"""Command-line scenario runner.

    solitonlab soliton  --config fig1.json --out out/
    solitonlab verify   --config fig1.json --only pde_residual,zero_curvature
    solitonlab scatter  --config fig1.json --tol-scale 2
    solitonlab simulate --config fig1.json

Exit status is 0 iff every enabled check passed, 1 if any failed and 2 for
an invalid configuration.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, load_config
from .errors import ConfigInvalid, NoConvergence, SingularPoint, SolitonLabError
from .numkit import Grid1D
from .scattering import compute_S, find_zero_r11, scattering_time_evolution_check
from .soliton import (SolitonData, eval_grid, one_soliton_closed, two_soliton_closed)
from .splitstep import compare, decay_half_width, evolve, init_state, write_snapshot
from .verify import masses, pde_residual, sample_stack, zero_curvature_residual

log = logging.getLogger("solitonlab")

CHECKS = {
    "soliton": ("field_grid",),
    "verify": ("pde_residual", "residual_order", "zero_curvature", "mass_conservation", "closed_form"),
    "scatter": ("det_S", "symmetry_S", "reflectionless", "eigenvalue_recovery", "scattering_drift"),
    "simulate": ("splitstep_linf", "splitstep_mass", "splitstep_order"),
}

EPS = np.finfo(float).eps


@dataclass
class CheckResult:
    name: str
    status: str                 # "pass", "fail" or "skipped"
    value: float | None
    tolerance: float | list | None
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "status": self.status, "value": self.value,
                "tolerance": self.tolerance, "detail": self.detail}


@dataclass
class RunReport:
    subcommand: str
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def exit_code(self) -> int:
        return 1 if self.failed else 0

    def to_dict(self):
        return {"subcommand": self.subcommand,
                "checks": [c.to_dict() for c in self.checks],
                "artifacts": sorted(self.artifacts),
                "passed": not self.failed,
                "metadata": self.metadata}


def _fmt(v) -> str:
    return f"{v:.17g}"


def _upper(name, value, tol, detail=""):
    ok = bool(np.isfinite(value) and value < tol)
    return CheckResult(name, "pass" if ok else "fail", float(value), tol, detail)


# ---------------------------------------------------------------- soliton

def write_field_csv(path: Path, grid):
    xs, ts = grid.xgrid.values, grid.tgrid.values
    with open(path, "w") as fh:
        fh.write("x,t,re_q1,im_q1,re_q2,im_q2,abs_q1,abs_q2,singular\n")
        for i, t in enumerate(ts):
            a, b, s = grid.q1[i], grid.q2[i], grid.singular[i]
            for j, x in enumerate(xs):
                qa, qb = a[j], b[j]
                fh.write(",".join((_fmt(x), _fmt(t), _fmt(qa.real), _fmt(qa.imag), _fmt(qb.real),
                                   _fmt(qb.imag), _fmt(abs(qa)), _fmt(abs(qb)),
                                   "1" if s[j] else "0")) + "\n")


def write_surface(path: Path, grid):
    """gnuplot splot blocks: one block per t, rows "x t |q1| |q2|"."""
    xs, ts = grid.xgrid.values, grid.tgrid.values
    with open(path, "w") as fh:
        fh.write("# x t |q1| |q2|  (singular points written as NaN)\n")
        for i, t in enumerate(ts):
            m1, m2 = np.abs(grid.q1[i]), np.abs(grid.q2[i])
            for j, x in enumerate(xs):
                fh.write(f"{_fmt(x)} {_fmt(t)} {_fmt(m1[j])} {_fmt(m2[j])}\n")
            fh.write("\n")


def write_slice(path: Path, xs, mags, label):
    with open(path, "w") as fh:
        fh.write(f"# x {label}\n")
        for x, m in zip(xs, mags):
            fh.write(f"{_fmt(x)} {_fmt(m)}\n")


def run_soliton(cfg: ScenarioConfig, out: Path, report: RunReport, enabled, scale):
    grid = eval_grid(cfg.data, cfg.xgrid, cfg.tgrid)
    write_field_csv(out / "fields.csv", grid)
    write_surface(out / "surface.dat", grid)
    report.artifacts += ["fields.csv", "surface.dat"]
    ts = cfg.tgrid.values
    slice_times = cfg.slice_times if cfg.slice_times is not None else (ts[0], ts[len(ts) // 2], ts[-1])
    for n, t in enumerate(slice_times):
        i = int(np.argmin(np.abs(ts - t)))
        for comp, arr in (("q1", grid.q1), ("q2", grid.q2)):
            name = f"slice_{comp}_{n}.dat"
            write_slice(out / name, cfg.xgrid.values, np.abs(arr[i]), f"|{comp}| at t={_fmt(ts[i])}")
            report.artifacts.append(name)
    if "field_grid" in enabled:
        n_sing = int(grid.singular.sum())
        ok_vals = np.concatenate([np.abs(grid.q1[~grid.singular]), np.abs(grid.q2[~grid.singular])])
        finite = bool(np.all(np.isfinite(ok_vals)))
        peak = float(np.abs(grid.q1[~grid.singular]).max()) if ok_vals.size else 0.0
        report.checks.append(CheckResult(
            "field_grid", "pass" if finite else "fail", peak, None,
            f"max |q1| over the grid; {n_sing} singular point(s); nonsingular values finite: {finite}"))


# ---------------------------------------------------------------- verify

def support_windows(sampler, t: float, half: float, lo=-3000.0, hi=3000.0):
    """Windows of +-half around every intensity peak above 10% of the largest."""
    x = np.linspace(lo, hi, 120001)
    q, sing = sample_stack(sampler, x, t)
    inten = np.where(sing, np.nan, (np.abs(q) ** 2).sum(axis=0))
    if not np.any(inten > 0):
        return [(-half, half)]
    top = np.nanmax(inten)
    inner = inten[1:-1]
    peaks = np.flatnonzero((inner >= inten[:-2]) & (inner >= inten[2:]) & (inner >= 0.1 * top)) + 1
    spans = sorted((x[p] - half, x[p] + half) for p in peaks)
    merged = [list(spans[0])]
    for a, b in spans[1:]:
        if a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(m) for m in merged]


def max_residual(sampler, t_samples, half, points, h):
    worst = 0.0
    for t in t_samples:
        for a, b in support_windows(sampler, t, half):
            n = max(points, int(points * (b - a) / (2 * half)))
            r = pde_residual(sampler, np.linspace(a, b, n), t, h, h)
            worst = max(worst, float(np.abs(r).max()))
    return worst


def residual_order(sampler, t_samples, half, points, h, amplitude):
    """max residual at h over max residual at h/2, starting from the smallest h
    whose residual clears the roundoff floor by 1e3 (at most 10 doublings)."""
    for _ in range(11):
        floor = 10.0 * EPS * max(amplitude, 1e-300) * (1.0 / h ** 2 + 1.0 / h)
        r_h = max_residual(sampler, t_samples, half, points, h)
        if r_h > 1e3 * floor:
            r_half = max_residual(sampler, t_samples, half, points, h / 2)
            return r_h / r_half, h
        h *= 2
    return float("nan"), h


def _amplitude(sampler, t_samples, half):
    amp = 0.0
    for t in t_samples:
        for a, b in support_windows(sampler, t, half):
            q, sing = sample_stack(sampler, np.linspace(a, b, 2001), t)
            amp = max(amp, float(np.nanmax(np.where(sing, np.nan, np.abs(q)))))
    return amp


def closed_form_gap(data: SolitonData, n_points: int, seed: int, t_samples, half):
    rng = np.random.default_rng(seed)
    centres = [w for t in t_samples for w in support_windows(data, t, half)]
    tmin, tmax = min(t_samples), max(t_samples)
    tmin, tmax = (tmin - 1.0, tmax + 1.0) if tmin == tmax else (tmin, tmax)
    lo = min(a for a, _ in centres)
    hi = max(b for _, b in centres)
    worst, taken, tries = 0.0, 0, 0
    while taken < n_points and tries < 20 * n_points:
        tries += 1
        x, t = rng.uniform(lo, hi), rng.uniform(tmin, tmax)
        q1, q2, sing = data(x, t)
        if sing:
            continue
        try:
            ref = one_soliton_closed(data[0], x, t) if len(data) == 1 else two_soliton_closed(data, x, t)
        except SingularPoint:
            continue
        worst = max(worst, abs(complex(ref[0]) - complex(q1)), abs(complex(ref[1]) - complex(q2)))
        taken += 1
    return worst, taken


def run_verify(cfg: ScenarioConfig, out: Path, report: RunReport, enabled, scale):
    data, vp = cfg.data, cfg.verify
    half, pts = vp.window_half_width, vp.window_points
    details = {}

    def guarded(name, fn):
        if name not in enabled:
            return
        t0 = time.perf_counter()
        try:
            res = fn()
        except SolitonLabError as exc:
            res = CheckResult(name, "fail", None, None, f"{type(exc).__name__}: {exc}")
        report.metadata.setdefault("timings_s", {})[name] = time.perf_counter() - t0
        report.checks.append(res)

    def pde():
        v = max_residual(data, vp.t_samples, half, pts, vp.h)
        details["pde_residual"] = v
        return _upper("pde_residual", v, cfg.tol("pde_residual", scale),
                      f"max |residual| over +-{half:g} windows at t in {list(vp.t_samples)}, h={vp.h:g}")

    def order():
        tol = cfg.tol("residual_order")
        if len(data) == 0:
            return CheckResult("residual_order", "pass", None, tol, "vacuum: residual identically zero")
        ratio, h = residual_order(data, vp.t_samples, half, pts, vp.h, _amplitude(data, vp.t_samples, half))
        ok = bool(np.isfinite(ratio) and ratio >= tol)
        return CheckResult("residual_order", "pass" if ok else "fail", float(ratio), tol,
                           f"residual(h)/residual(h/2) at h={h:g}")

    def lax():
        worst = 0.0
        for t in vp.t_samples:
            for a, b in support_windows(data, t, half):
                x0 = 0.5 * (a + b)
                for k in vp.lax_k:
                    worst = max(worst, zero_curvature_residual(data, x0, t, k, vp.h))
        return _upper("zero_curvature", worst, cfg.tol("zero_curvature", scale),
                      f"Frobenius norm at window centres for k in {[str(k) for k in vp.lax_k]}")

    def mass():
        if len(data) == 0:
            return _upper("mass_conservation", 0.0, cfg.tol("mass_conservation", scale), "vacuum")
        L = decay_half_width(data, vp.t_samples, gate=1e-8)
        xs = Grid1D(-L, L, int(2 * L / 0.05) | 1)
        ms = []
        for t in vp.t_samples:
            q1, q2, _ = data(xs.values, t)
            ms.append(masses(q1, q2, xs))
        ms = np.array(ms)
        ref = ms[list(vp.t_samples).index(0.0)] if 0.0 in vp.t_samples else ms[0]
        rel = max(float(np.max(np.abs(ms[:, i] - ref[i]) / ref[i])) for i in (0, 1) if ref[i] > 0)
        return _upper("mass_conservation", rel, cfg.tol("mass_conservation", scale),
                      f"max relative change of (m1, m2) across t in {list(vp.t_samples)}; "
                      f"m(t_ref) = {ref.tolist()}")

    def closed():
        tol = cfg.tol("closed_form", scale)
        if len(data) == 0:
            v = float(np.abs(np.array(data(np.linspace(-10, 10, 21), 0.0)[:2])).max())
            return _upper("closed_form", v, tol, "vacuum: fields must vanish")
        if len(data) > 2:
            return CheckResult("closed_form", "skipped", None, tol,
                               f"closed forms exist for N=1,2 only (N={len(data)})")
        gap, taken = closed_form_gap(data, vp.closed_form_points, vp.seed, vp.t_samples, half)
        res = _upper("closed_form", gap, tol, f"max |closed - general| over {taken} random points")
        if taken < vp.closed_form_points:
            res.status, res.detail = "fail", res.detail + " (too few nonsingular points)"
        return res

    guarded("pde_residual", pde)
    guarded("residual_order", order)
    guarded("zero_curvature", lax)
    guarded("mass_conservation", mass)
    guarded("closed_form", closed)


# ---------------------------------------------------------------- scatter

def run_scatter(cfg: ScenarioConfig, out: Path, report: RunReport, enabled, scale):
    from .scattering import PotentialSampler

    data, sp = cfg.data, cfg.scatter
    timings = report.metadata.setdefault("timings_s", {})
    payload = {}

    t0 = time.perf_counter()
    pot = (PotentialSampler.auto(data, 0.0) if sp.L is None else PotentialSampler(data, sp.L, 0.0))
    payload["L"] = pot.L
    need_S = {"det_S", "symmetry_S", "reflectionless"} & set(enabled)
    if need_S:
        try:
            Ss = compute_S(pot, np.array(sp.k_samples, dtype=float), n_steps=sp.n_steps)
            payload["S"] = [s.to_dict() for s in Ss]
            vals = {"det_S": max(s.det_error for s in Ss),
                    "symmetry_S": max(s.symmetry_error for s in Ss),
                    "reflectionless": max(s.off_diagonal for s in Ss)}
            notes = {"det_S": "max |det S - 1|", "symmetry_S": "max ||S sigma S^+ sigma - I||_inf",
                     "reflectionless": "max(|s12|,|s13|,|s21|,|s31|)"}
            for name in CHECKS["scatter"][:3]:
                if name in enabled:
                    report.checks.append(_upper(name, vals[name], cfg.tol(name, scale),
                                                f"{notes[name]} over k in {list(sp.k_samples)}, L={pot.L:g}"))
        except SolitonLabError as exc:
            for name in CHECKS["scatter"][:3]:
                if name in enabled:
                    report.checks.append(CheckResult(name, "fail", None, cfg.tol(name, scale),
                                                     f"{type(exc).__name__}: {exc}"))
        timings["S_sweep"] = time.perf_counter() - t0

    if "eigenvalue_recovery" in enabled:
        t0 = time.perf_counter()
        tol = cfg.tol("eigenvalue_recovery", scale)
        if len(data) == 0:
            try:
                find_zero_r11(pot, 0.5 + 0.5j)
                res = CheckResult("eigenvalue_recovery", "fail", None, tol, "vacuum produced a zero")
            except NoConvergence:
                res = CheckResult("eigenvalue_recovery", "pass", 0.0, tol,
                                  "vacuum: Newton reports no zero, as expected")
        else:
            guesses = sp.zero_guesses or tuple(k + 0.05 for k in data.k)
            found, worst = [], 0.0
            try:
                for k, g in zip(data.k, guesses):
                    z = find_zero_r11(pot, g, n_steps=sp.n_steps)
                    found.append(z)
                    worst = max(worst, abs(z - k))
                res = _upper("eigenvalue_recovery", worst, tol,
                             f"max |k_found - k_planted| from guesses {[str(g) for g in guesses]}")
            except SolitonLabError as exc:
                res = CheckResult("eigenvalue_recovery", "fail", None, tol, f"{type(exc).__name__}: {exc}")
            payload["eigenvalues"] = [{"planted": [k.real, k.imag], "found": [z.real, z.imag]}
                                      for k, z in zip(data.k, found)]
        report.checks.append(res)
        timings["eigenvalue_recovery"] = time.perf_counter() - t0

    if "scattering_drift" in enabled:
        t0 = time.perf_counter()
        t1, t2 = sp.evolution_times
        tol = cfg.tol("scattering_drift", scale)
        try:
            ev = scattering_time_evolution_check(data, sp.evolution_k, t1, t2, sp.L, sp.n_steps)
            payload["time_evolution"] = ev
            drift = max(ev[f"drift_{s}"] for s in ("s11", "s22", "s23", "s32", "s33"))
            res = _upper("scattering_drift", drift, tol,
                         f"max drift of s11,s22,s23,s32,s33 between t={t1:g} and t={t2:g} at k={sp.evolution_k:g}")
        except SolitonLabError as exc:
            res = CheckResult("scattering_drift", "fail", None, tol, f"{type(exc).__name__}: {exc}")
        report.checks.append(res)
        timings["scattering_drift"] = time.perf_counter() - t0

    (out / "scattering.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    report.artifacts.append("scattering.json")


# ---------------------------------------------------------------- simulate

def run_simulate(cfg: ScenarioConfig, out: Path, report: RunReport, enabled, scale):
    data, sp = cfg.data, cfg.splitstep
    timings = report.metadata.setdefault("timings_s", {})
    L = sp.L if sp.L is not None else decay_half_width(data, [0.0, sp.T], gate=1e-10)
    t0 = time.perf_counter()
    try:
        s0 = init_state(data, L, sp.n, 0.0)
    except SolitonLabError as exc:
        for name in enabled:
            report.checks.append(CheckResult(name, "fail", None, None, f"{type(exc).__name__}: {exc}"))
        return

    if {"splitstep_linf", "splitstep_mass"} & set(enabled) or sp.snapshot_times:
        state, elapsed = s0, 0.0
        for ts in sorted(t for t in sp.snapshot_times if 0 < t < sp.T):
            state = evolve(state, ts - elapsed, sp.dt)
            elapsed = ts
            name = f"snapshot_t{_fmt(ts)}.csv"
            write_snapshot(out / name, state)
            report.artifacts.append(name)
        final = evolve(state, sp.T - elapsed, sp.dt) if sp.T > elapsed else state
        name = f"snapshot_t{_fmt(sp.T)}.csv"
        write_snapshot(out / name, final)
        report.artifacts.append(name)
        if "splitstep_linf" in enabled:
            linf, l2 = compare(final, data)
            report.checks.append(_upper("splitstep_linf", linf, cfg.tol("splitstep_linf", scale),
                                        f"L=inf error vs analytic at T={sp.T:g}; L={L:g}, n={sp.n}, "
                                        f"dt={sp.dt:g}; grid L2 = {l2:.3g}"))
        if "splitstep_mass" in enabled:
            m0, m1 = np.array(s0.masses()), np.array(final.masses())
            drift = max((abs(m1[i] - m0[i]) / m0[i] for i in (0, 1) if m0[i] > 0), default=0.0)
            report.checks.append(_upper("splitstep_mass", float(drift), cfg.tol("splitstep_mass", scale),
                                        "max relative drift of discrete masses"))
        timings["splitstep_run"] = time.perf_counter() - t0

    if "splitstep_order" in enabled:
        t0 = time.perf_counter()
        lo, hi = cfg.tol("splitstep_order_low"), cfg.tol("splitstep_order_high", scale)
        if len(data) == 0:
            res = CheckResult("splitstep_order", "pass", None, [lo, hi], "vacuum: no splitting error")
        else:
            runs = [evolve(s0, sp.T, dt) for dt in sp.order_dts]
            e1 = max(np.abs(runs[0].q1 - runs[1].q1).max(), np.abs(runs[0].q2 - runs[1].q2).max())
            e2 = max(np.abs(runs[1].q1 - runs[2].q1).max(), np.abs(runs[1].q2 - runs[2].q2).max())
            ratio = float(e1 / e2) if e2 > 0 else float("nan")
            ok = bool(lo <= ratio <= hi)
            res = CheckResult("splitstep_order", "pass" if ok else "fail", ratio, [lo, hi],
                              f"self-convergence |u(dt)-u(dt/2)| / |u(dt/2)-u(dt/4)| for dt in "
                              f"{list(sp.order_dts)}, L={L:g}")
        report.checks.append(res)
        timings["splitstep_order"] = time.perf_counter() - t0


RUNNERS = {"soliton": run_soliton, "verify": run_verify, "scatter": run_scatter, "simulate": run_simulate}


def run_scenario(cfg: ScenarioConfig, subcommand: str, out_dir=None, only=None,
                 tol_scale: float = 1.0) -> RunReport:
    """Run one subcommand, write its artifacts plus ``report.json``, return the report."""
    if subcommand not in RUNNERS:
        raise ConfigInvalid("subcommand", f"unknown subcommand {subcommand!r}")
    if not tol_scale > 0:
        raise ConfigInvalid("--tol-scale", "must be > 0")
    available = CHECKS[subcommand]
    selected = only if only is not None else cfg.checks
    if selected is None:
        enabled = list(available)
    else:
        bad = [c for c in selected if c not in available]
        if bad:
            raise ConfigInvalid("--only", f"unknown check(s) for {subcommand}: {bad}; "
                                          f"choose from {list(available)}")
        enabled = [c for c in available if c in selected]

    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(subcommand)
    started = time.perf_counter()
    report.metadata["started_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    report.metadata["version"] = __version__
    RUNNERS[subcommand](cfg, out, report, enabled, tol_scale)
    order = {name: i for i, name in enumerate(available)}
    report.checks.sort(key=lambda c: order[c.name])
    report.metadata["total_wall_s"] = time.perf_counter() - started
    report.artifacts.append("report.json")
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return report


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="solitonlab", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True)
    helps = {"soliton": "evaluate fields on the grid and export CSV/gnuplot tables",
             "verify": "PDE residual, zero-curvature, mass and closed-form checks",
             "scatter": "scattering-matrix laws and eigenvalue round trip",
             "simulate": "split-step Fourier cross-check"}
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", default=None, help="output directory (overrides output_dir)")
        sp.add_argument("--only", default=None, help="comma-separated check names")
        sp.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiply every upper-bound tolerance by this factor")
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        only = [s.strip() for s in args.only.split(",") if s.strip()] if args.only else None
        report = run_scenario(cfg, args.subcommand, args.out, only, args.tol_scale)
    except ConfigInvalid as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2
    for c in report.checks:
        val = "-" if c.value is None else f"{c.value:.3e}"
        print(f"{c.status.upper():7s} {c.name:22s} value={val:>11s} tol={c.tolerance}  {c.detail}")
    print(f"{len(report.checks) - len(report.failed)}/{len(report.checks)} checks not failed; "
          f"report: {Path(args.out or cfg.output_dir) / 'report.json'}")
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
