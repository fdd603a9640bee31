"""Job configuration, grid sweeps, per-point cache and output writers."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .lattice import CONFIG_KEYS, ModelConfig

AXIS_NAMES = ("m0", "A_over_omega", "omega", "gamma", "tau")
QUANTITIES = ("gamma_c", "winding", "gamma_total", "sigma_z_max")
SUBCOMMANDS = ("spectrum", "threshold", "threshold-map", "winding-scan", "chiral-scan",
               "edge-trace", "effective-compare")

ENGINE_DEFAULTS = {
    "qe_tol": 1e-10,
    "cutoff": 1e-7,
    "coarse_step": 0.02,
    "refine_tol": 1e-3,
    "gamma_max": 2.0,
    "n_k": None,          # 128 for chiral scans, 512 for windings
    "max_steps": 2048,    # step cap inside threshold scans
    "spectrum_max_steps": 2 ** 20,
    "scheme": "yoshida6",
    "tau": 0.0,           # in units of the period
    "taus": [0.0, 0.25, 0.5, 0.75],
    "n_samples": 65,
    "steps_per_period": 2048,
}
_TOP_KEYS = set(CONFIG_KEYS) | {"A_over_omega", "sweep", "engine", "full", "description"}


class ConfigError(ValueError):
    """Schema violation in a job configuration (exit code 2)."""


class PointFailure(RuntimeError):
    """One or more grid points raised a numerical error (exit code 3)."""


def fmt(value) -> str:
    """17-significant-digit float text; integers stay integers."""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    @classmethod
    def parse(cls, spec, label: str) -> "Axis":
        if not isinstance(spec, dict) or "name" not in spec:
            raise ConfigError(f"{label}: axis must be an object with a 'name'")
        name = spec["name"]
        if name not in AXIS_NAMES:
            raise ConfigError(f"{label}: axis name {name!r} not in {AXIS_NAMES}")
        if "values" in spec:
            vals = spec["values"]
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"{label}: 'values' must be a non-empty list")
        else:
            try:
                lo, hi, count = float(spec["min"]), float(spec["max"]), int(spec["count"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"{label}: need 'values' or numeric 'min', 'max', 'count'") from exc
            if count < 1:
                raise ConfigError(f"{label}: count must be >= 1")
            vals = [lo] if count == 1 else list(np.linspace(lo, hi, count))
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
                   for v in vals):
            raise ConfigError(f"{label}: axis values must be finite numbers")
        if name == "m0":
            if any(float(v) != int(round(float(v))) for v in vals):
                raise ConfigError(f"{label}: m0 values must be integers")
            vals = [int(round(float(v))) for v in vals]
        else:
            vals = [float(v) for v in vals]
        return cls(name, tuple(vals))


@dataclass
class Job:
    subcommand: str
    base: dict
    engine: dict
    x_axis: Axis | None = None
    y_axis: Axis | None = None
    quantity: str = "gamma_c"
    full: bool = False
    raw: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        out = {"subcommand": self.subcommand, "model": self.base, "engine": self.engine,
               "full": self.full}
        if self.x_axis:
            out["x_axis"] = {"name": self.x_axis.name, "values": list(self.x_axis.values)}
        if self.y_axis:
            out["y_axis"] = {"name": self.y_axis.name, "values": list(self.y_axis.values)}
        if self.subcommand == "threshold-map":
            out["quantity"] = self.quantity
        return out

    def config_hash(self) -> str:
        text = json.dumps(self.resolved(), sort_keys=True, default=float)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def points(self):
        """(iy, ix, overrides) in row-major order: y outer, x inner."""
        ys = self.y_axis.values if self.y_axis else (None,)
        xs = self.x_axis.values if self.x_axis else (None,)
        for iy, yv in enumerate(ys):
            for ix, xv in enumerate(xs):
                over = {}
                if self.y_axis:
                    over[self.y_axis.name] = yv
                if self.x_axis:
                    over[self.x_axis.name] = xv
                yield iy, ix, over


def _merge(dst: dict, src: dict) -> dict:
    for key, val in src.items():
        if isinstance(val, dict) and isinstance(dst.get(key), dict):
            _merge(dst[key], val)
        else:
            dst[key] = copy.deepcopy(val)
    return dst


def parse_job(raw: dict, subcommand: str, full: bool = False) -> Job:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    cfg = copy.deepcopy(raw)
    if full and isinstance(cfg.get("full"), dict):
        _merge(cfg, cfg["full"])
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    if "amplitude" in cfg and "A_over_omega" in cfg:
        raise ConfigError("give either 'amplitude' or 'A_over_omega', not both")
    base = {k: cfg[k] for k in CONFIG_KEYS if k in cfg}
    if "A_over_omega" in cfg:
        base["A_over_omega"] = cfg["A_over_omega"]
    for key in ("n_sites", "omega"):
        if key not in base:
            raise ConfigError(f"missing required model key {key!r}")
    for key, val in base.items():
        if key == "co_driven":
            if not isinstance(val, bool):
                raise ConfigError("co_driven must be a boolean")
        elif not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(f"model key {key!r} must be a number")

    engine = dict(ENGINE_DEFAULTS)
    eng_raw = cfg.get("engine", {})
    if not isinstance(eng_raw, dict):
        raise ConfigError("'engine' must be an object")
    bad = set(eng_raw) - set(ENGINE_DEFAULTS)
    if bad:
        raise ConfigError(f"unknown engine keys {sorted(bad)}")
    engine.update(eng_raw)
    for key in ("qe_tol", "cutoff", "coarse_step", "refine_tol", "gamma_max"):
        if not isinstance(engine[key], (int, float)) or not engine[key] > 0:
            raise ConfigError(f"engine.{key} must be a positive number")
    if not engine["coarse_step"] > engine["refine_tol"]:
        raise ConfigError("engine.coarse_step must exceed engine.refine_tol")

    job = Job(subcommand, base, engine, full=full, raw=raw)
    sweep = cfg.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("'sweep' must be an object")
    if "x_axis" in sweep:
        job.x_axis = Axis.parse(sweep["x_axis"], "sweep.x_axis")
    if "y_axis" in sweep:
        job.y_axis = Axis.parse(sweep["y_axis"], "sweep.y_axis")
    if job.x_axis and job.y_axis and job.x_axis.name == job.y_axis.name:
        raise ConfigError("sweep axes must have distinct names")
    job.quantity = sweep.get("quantity", "gamma_c")
    if job.quantity not in QUANTITIES:
        raise ConfigError(f"sweep.quantity must be one of {QUANTITIES}")
    if subcommand == "threshold-map" and not (job.x_axis and job.y_axis):
        raise ConfigError("threshold-map needs sweep.x_axis and sweep.y_axis")
    if subcommand == "winding-scan" and not job.x_axis:
        raise ConfigError("winding-scan needs sweep.x_axis")
    # every grid point must describe a valid model
    for _, _, over in job.points():
        try:
            point_model(job.base, over)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"invalid model at grid point {over}: {exc}") from exc
    return job


def point_model(base: dict, over: dict) -> ModelConfig:
    d = dict(base)
    for key in ("omega", "m0", "gamma"):
        if key in over:
            d[key] = over[key]
    if "A_over_omega" in over:
        d["A_over_omega"] = over["A_over_omega"]
        d.pop("amplitude", None)
    if "A_over_omega" in d:
        d["amplitude"] = float(d.pop("A_over_omega")) * float(d["omega"])
    return ModelConfig.from_dict(d)


def point_tau(engine: dict, over: dict, model: ModelConfig) -> float:
    return float(over.get("tau", engine["tau"])) * model.period


# ---------------------------------------------------------------- evaluation

def evaluate_map_point(job: Job, over: dict) -> float:
    from .analysis import find_threshold, floquet_gamma_total
    from .topology import chiral_expectation_scan, floquet_windings

    eng = job.engine
    model = point_model(job.base, over)
    q = job.quantity
    if q == "gamma_c":
        res = find_threshold(model, eng["gamma_max"], eng["coarse_step"], eng["refine_tol"],
                             eng["cutoff"], qe_tol=eng["qe_tol"], max_steps=eng["max_steps"])
        return res.map_value
    if q == "gamma_total":
        return floquet_gamma_total(model, eng["qe_tol"], eng["max_steps"])[0]
    if q == "winding":
        return float(floquet_windings(model, eng["n_k"] or 512).nu0)
    return chiral_expectation_scan(model, point_tau(eng, over, model), eng["n_k"] or 128).max_abs


def _map_worker(args):
    job, iy, ix, over = args
    try:
        return iy, ix, evaluate_map_point(job, over), None
    except (ArithmeticError, ValueError) as exc:
        return iy, ix, None, f"{type(exc).__name__}: {exc}"


def run_grid(job: Job, out_dir: str, jobs: int = 1):
    """Evaluate every grid point (cached points are reused).

    Returns (values[ny, nx], failures, n_cached).  Cache files live in
    out_dir/cache/<config hash>/<iy>_<ix>.json and are written atomically.
    """
    ny = len(job.y_axis.values) if job.y_axis else 1
    nx = len(job.x_axis.values) if job.x_axis else 1
    values = np.full((ny, nx), np.nan)
    cache_dir = os.path.join(out_dir, "cache", job.config_hash())
    os.makedirs(cache_dir, exist_ok=True)
    todo = []
    n_cached = 0
    for iy, ix, over in job.points():
        path = os.path.join(cache_dir, f"{iy}_{ix}.json")
        if os.path.exists(path):
            with open(path) as fh:
                values[iy, ix] = json.load(fh)["value"]
            n_cached += 1
        else:
            todo.append((job, iy, ix, over))
    failures = []

    def store(res):
        iy, ix, val, err = res
        if err is not None:
            failures.append({"iy": iy, "ix": ix, "error": err})
            return
        values[iy, ix] = val
        path = os.path.join(cache_dir, f"{iy}_{ix}.json")
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump({"value": float(val)}, fh)
        os.replace(tmp, path)

    if jobs <= 1 or len(todo) <= 1:
        for item in todo:
            store(_map_worker(item))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for res in pool.map(_map_worker, todo):
                store(res)
    return values, failures, n_cached


# ---------------------------------------------------------------- writers

def write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _ramp(frac: float) -> str:
    # dark blue -> yellow, linear in each channel
    lo, hi = (30, 40, 110), (250, 225, 60)
    rgb = [int(round(a + (b - a) * frac)) for a, b in zip(lo, hi)]
    return "#%02x%02x%02x" % tuple(rgb)


def write_svg(path: str, values: np.ndarray, x_axis: Axis, y_axis: Axis, quantity: str,
              sentinel: float | None = None) -> None:
    """Heatmap with one rect per cell; sentinel cells are grey."""
    ny, nx = values.shape
    cell = max(6, min(24, 600 // max(nx, ny)))
    left, top = 70, 30
    width = left + nx * cell + 180
    height = top + ny * cell + 60
    mask = np.isfinite(values)
    if sentinel is not None:
        mask &= values != sentinel
    vmin = float(values[mask].min()) if mask.any() else 0.0
    vmax = float(values[mask].max()) if mask.any() else 1.0
    span = vmax - vmin if vmax > vmin else 1.0
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<text x="{left}" y="18" font-size="13">{quantity}</text>']
    for iy in range(ny):
        # first y value at the bottom
        ypix = top + (ny - 1 - iy) * cell
        for ix in range(nx):
            v = values[iy, ix]
            colour = _ramp((v - vmin) / span) if mask[iy, ix] else "#9a9a9a"
            out.append(f'<rect x="{left + ix * cell}" y="{ypix}" width="{cell}" height="{cell}" '
                       f'fill="{colour}"><title>{x_axis.name}={fmt(x_axis.values[ix])} '
                       f'{y_axis.name}={fmt(y_axis.values[iy])} value={fmt(v)}</title></rect>')
    base_y = top + ny * cell
    out.append(f'<text x="{left}" y="{base_y + 18}" font-size="11">{x_axis.name}: '
               f'{fmt(x_axis.values[0])} .. {fmt(x_axis.values[-1])}</text>')
    out.append(f'<text x="4" y="{top + 12}" font-size="11">{y_axis.name}</text>')
    out.append(f'<text x="4" y="{top + 26}" font-size="10">{fmt(y_axis.values[-1])}</text>')
    out.append(f'<text x="4" y="{base_y}" font-size="10">{fmt(y_axis.values[0])}</text>')
    lx = left + nx * cell + 20
    out.append(f'<g id="legend"><text x="{lx}" y="{top + 10}" font-size="11">max {fmt(vmax)}</text>')
    for i in range(20):
        out.append(f'<rect x="{lx}" y="{top + 16 + i * 6}" width="16" height="6" '
                   f'fill="{_ramp(1 - i / 19)}"/>')
    out.append(f'<text x="{lx}" y="{top + 148}" font-size="11">min {fmt(vmin)}</text>')
    if sentinel is not None:
        out.append(f'<rect x="{lx}" y="{top + 158}" width="16" height="8" fill="#9a9a9a"/>'
                   f'<text x="{lx + 20}" y="{top + 166}" font-size="10">{fmt(sentinel)}: unbroken to max</text>')
    out.append("</g></svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out) + "\n")


def write_manifest(path: str, job: Job, status: str, timings: dict, extra: dict | None = None) -> None:
    from . import _kernels

    doc = {
        "version": __version__,
        "status": status,
        "config_hash": job.config_hash(),
        "resolved": job.resolved(),
        "desk_scale": not job.full,
        "kernel_backend": _kernels.BACKEND,
        "timings": timings,
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
