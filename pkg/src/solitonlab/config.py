"""Scenario configuration: strict JSON, complex numbers as {"re": .., "im": ..}."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigInvalid, InvalidInput
from .numkit import Grid1D
from .soliton import SolitonData, SpectralDatum

DEFAULT_TOLERANCES = {
    "pde_residual": 1e-6,
    "residual_order": 12.0,
    "zero_curvature": 1e-6,
    "mass_conservation": 1e-8,
    "closed_form": 1e-12,
    "splitstep_linf": 1e-4,
    "splitstep_mass": 1e-12,
    "splitstep_order_low": 3.5,
    "splitstep_order_high": 4.5,
    "det_S": 1e-8,
    "symmetry_S": 1e-8,
    "reflectionless": 1e-6,
    "eigenvalue_recovery": 1e-6,
    "scattering_drift": 1e-7,
}

# lower-bound tolerances are not scaled by --tol-scale
LOWER_BOUNDS = {"residual_order", "splitstep_order_low"}


def _complex(obj, where: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        z = complex(obj)
    elif isinstance(obj, dict) and set(obj) <= {"re", "im"} and "re" in obj:
        try:
            z = complex(float(obj["re"]), float(obj.get("im", 0.0)))
        except (TypeError, ValueError):
            raise ConfigInvalid(where, "re/im must be numbers") from None
    else:
        raise ConfigInvalid(where, 'expected {"re": number, "im": number}')
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigInvalid(where, "must be finite")
    return z


def _number(obj, where: str, *, positive=False, integer=False):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ConfigInvalid(where, "expected a number")
    if integer and int(obj) != obj:
        raise ConfigInvalid(where, "expected an integer")
    if not math.isfinite(obj):
        raise ConfigInvalid(where, "must be finite")
    if positive and not obj > 0:
        raise ConfigInvalid(where, "must be > 0")
    return int(obj) if integer else float(obj)


def _datum(raw, where: str) -> SpectralDatum:
    if not isinstance(raw, dict):
        raise ConfigInvalid(where, "expected an object")
    if "k" in raw:
        k = _complex(raw["k"], f"{where}.k")
        c = _complex(raw.get("c", 0.0), f"{where}.c")
        d = _complex(raw.get("d", 0.0), f"{where}.d")
    else:
        flat = {}
        for key in ("k_re", "k_im", "c_re", "c_im", "d_re", "d_im"):
            flat[key] = _number(raw.get(key, 0.0), f"{where}.{key}")
        k = complex(flat["k_re"], flat["k_im"])
        c = complex(flat["c_re"], flat["c_im"])
        d = complex(flat["d_re"], flat["d_im"])
    if not k.imag > 0:
        raise ConfigInvalid(f"{where}.k", "Im k must be > 0")
    if c == 0 and d == 0:
        raise ConfigInvalid(where, "c and d must not both be zero")
    return SpectralDatum(k, c, d)


def _grid(raw, where: str, default: Grid1D) -> Grid1D:
    if raw is None:
        return default
    if not isinstance(raw, dict):
        raise ConfigInvalid(where, "expected {start, stop, n}")
    start = _number(raw.get("start"), f"{where}.start")
    stop = _number(raw.get("stop"), f"{where}.stop")
    n = _number(raw.get("n"), f"{where}.n", integer=True)
    if n < 2:
        raise ConfigInvalid(f"{where}.n", "must be >= 2")
    if not stop > start:
        raise ConfigInvalid(f"{where}.stop", "must exceed start")
    return Grid1D(start, stop, n)


@dataclass
class SplitStepParams:
    L: float | None = 100.0          # None = choose from the decay gate
    n: int = 4096
    dt: float = 1e-3
    T: float = 5.0
    order_dts: tuple = (0.1, 0.05, 0.025)
    snapshot_times: tuple = ()


@dataclass
class ScatterParams:
    L: float | None = None
    n_steps: int | None = None
    k_samples: tuple = (0.3, 0.7, 1.5)
    zero_guesses: tuple | None = None   # None: each planted k displaced by 0.05
    evolution_k: float = 0.7
    evolution_times: tuple = (0.0, 1.0)


@dataclass
class VerifyParams:
    h: float = 1e-2
    t_samples: tuple = (-5.0, 0.0, 5.0)
    window_half_width: float = 30.0
    window_points: int = 241
    lax_k: tuple = (1 + 0.5j, -0.7 + 0.3j, 0.4 + 1.2j, 1.5, -0.2 + 0.05j)
    closed_form_points: int = 1000
    seed: int = 0


@dataclass
class ScenarioConfig:
    data: SolitonData
    xgrid: Grid1D = field(default_factory=lambda: Grid1D(-100.0, 100.0, 2001))
    tgrid: Grid1D = field(default_factory=lambda: Grid1D(-50.0, 50.0, 101))
    slice_times: tuple | None = None
    verify: VerifyParams = field(default_factory=VerifyParams)
    splitstep: SplitStepParams = field(default_factory=SplitStepParams)
    scatter: ScatterParams = field(default_factory=ScatterParams)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: tuple | None = None
    output_dir: str = "out"

    def tol(self, name: str, scale: float = 1.0) -> float:
        base = self.tolerances[name]
        return base if name in LOWER_BOUNDS else base * scale


def _name(obj, where: str) -> str:
    if not isinstance(obj, str):
        raise ConfigInvalid(where, "expected a check name")
    return obj


def _tuple_of(raw, where, conv):
    if not isinstance(raw, list):
        raise ConfigInvalid(where, "expected a list")
    return tuple(conv(v, f"{where}[{i}]") for i, v in enumerate(raw))


_TOP_KEYS = {"spectral_data", "grid", "verify", "splitstep", "scatter", "tolerances",
             "checks", "output_dir", "slice_times", "description"}


def parse_config(raw: dict) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigInvalid("<root>", "expected a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(sorted(unknown)[0], "unknown key")
    sd = raw.get("spectral_data", [])
    if not isinstance(sd, list):
        raise ConfigInvalid("spectral_data", "expected a list")
    data = [_datum(r, f"spectral_data[{i}]") for i, r in enumerate(sd)]
    try:
        sdata = SolitonData(data)
    except InvalidInput as exc:
        raise ConfigInvalid("spectral_data", str(exc)) from None

    cfg = ScenarioConfig(sdata)
    grid = raw.get("grid", {}) or {}
    if not isinstance(grid, dict):
        raise ConfigInvalid("grid", "expected an object")
    cfg.xgrid = _grid(grid.get("x"), "grid.x", cfg.xgrid)
    cfg.tgrid = _grid(grid.get("t"), "grid.t", cfg.tgrid)
    if raw.get("slice_times") is not None:
        cfg.slice_times = _tuple_of(raw["slice_times"], "slice_times", _number)

    v = raw.get("verify", {}) or {}
    vp = cfg.verify
    if "h" in v:
        vp.h = _number(v["h"], "verify.h", positive=True)
    if "t_samples" in v:
        vp.t_samples = _tuple_of(v["t_samples"], "verify.t_samples", _number)
    if "window_half_width" in v:
        vp.window_half_width = _number(v["window_half_width"], "verify.window_half_width", positive=True)
    if "window_points" in v:
        vp.window_points = _number(v["window_points"], "verify.window_points", integer=True, positive=True)
    if "lax_k" in v:
        vp.lax_k = _tuple_of(v["lax_k"], "verify.lax_k", _complex)
    if "closed_form_points" in v:
        vp.closed_form_points = _number(v["closed_form_points"], "verify.closed_form_points",
                                        integer=True, positive=True)
    if "seed" in v:
        vp.seed = _number(v["seed"], "verify.seed", integer=True)

    s = raw.get("splitstep", {}) or {}
    sp = cfg.splitstep
    if "L" in s:
        sp.L = None if s["L"] in (None, "auto") else _number(s["L"], "splitstep.L", positive=True)
    if "n" in s:
        sp.n = _number(s["n"], "splitstep.n", integer=True, positive=True)
        if sp.n & (sp.n - 1):
            raise ConfigInvalid("splitstep.n", "must be a power of two")
    for key in ("dt", "T"):
        if key in s:
            setattr(sp, key, _number(s[key], f"splitstep.{key}", positive=True))
    if "order_dts" in s:
        sp.order_dts = _tuple_of(s["order_dts"], "splitstep.order_dts", _number)
        if len(sp.order_dts) != 3:
            raise ConfigInvalid("splitstep.order_dts", "need exactly three step sizes")
    if "snapshot_times" in s:
        sp.snapshot_times = _tuple_of(s["snapshot_times"], "splitstep.snapshot_times", _number)

    c = raw.get("scatter", {}) or {}
    cp = cfg.scatter
    if "L" in c:
        cp.L = None if c["L"] in (None, "auto") else _number(c["L"], "scatter.L", positive=True)
    if "n_steps" in c:
        cp.n_steps = None if c["n_steps"] is None else _number(c["n_steps"], "scatter.n_steps",
                                                                integer=True, positive=True)
    if "k_samples" in c:
        cp.k_samples = _tuple_of(c["k_samples"], "scatter.k_samples", _number)
    if "zero_guesses" in c:
        cp.zero_guesses = _tuple_of(c["zero_guesses"], "scatter.zero_guesses", _complex)
        if len(cp.zero_guesses) != len(sdata):
            raise ConfigInvalid("scatter.zero_guesses", "need one guess per eigenvalue")
        for i, g in enumerate(cp.zero_guesses):
            if not g.imag > 0:
                raise ConfigInvalid(f"scatter.zero_guesses[{i}]", "Im must be > 0")
    if "evolution_k" in c:
        cp.evolution_k = _number(c["evolution_k"], "scatter.evolution_k")
    if "evolution_times" in c:
        cp.evolution_times = _tuple_of(c["evolution_times"], "scatter.evolution_times", _number)
        if len(cp.evolution_times) != 2:
            raise ConfigInvalid("scatter.evolution_times", "need [t1, t2]")

    tol = raw.get("tolerances", {}) or {}
    if not isinstance(tol, dict):
        raise ConfigInvalid("tolerances", "expected an object")
    for name, val in tol.items():
        if name not in DEFAULT_TOLERANCES:
            raise ConfigInvalid(f"tolerances.{name}", "unknown tolerance")
        cfg.tolerances[name] = _number(val, f"tolerances.{name}", positive=True)

    if raw.get("checks") is not None:
        cfg.checks = _tuple_of(raw["checks"], "checks", _name)
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str):
            raise ConfigInvalid("output_dir", "expected a string")
        cfg.output_dir = raw["output_dir"]
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("<file>", f"invalid JSON: {exc}") from None
    except OSError as exc:
        raise ConfigInvalid("<file>", str(exc)) from None
    return parse_config(raw)
