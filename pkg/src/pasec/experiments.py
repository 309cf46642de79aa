"""Baselines, Monte Carlo harness and plot-ready output files."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import Position, SystemParams, dbm_to_linear, make_params
from .multi import MultiResult, MultiSolveConfig, Scenario, solve_multi
from .single import ScalarScenario, SingleResult, solve_single

log = logging.getLogger(__name__)

SCHEMES = ("pas-an", "pas-no-an", "cas-an")


@dataclass(frozen=True)
class ExperimentConfig:
    carrier_frequency: float = 28e9
    n_eff: float = 1.4
    height: float = 3.0
    region_side: float = 30.0
    noise_bob_dbm: float = -90.0
    noise_eve_dbm: float = -90.0
    power_sweep: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    fixed_power: float = 10.0
    num_drops: int = 200
    rng_seed: int = 2025
    schemes: tuple[str, ...] = SCHEMES
    waveguides: tuple[int, ...] = (1, 2)
    solver: MultiSolveConfig = field(default_factory=MultiSolveConfig)
    workers: int = 1
    output_path: str = "results"

    def __post_init__(self) -> None:
        if self.num_drops < 1:
            raise ValueError("num_drops must be >= 1")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")
        for n in self.waveguides:
            if int(n) != n or n < 1:
                raise ValueError(f"invalid waveguide count {n}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def params(self, N: int = 1) -> SystemParams:
        return make_params(self.carrier_frequency, self.n_eff, self.height, self.region_side,
                           N, self.noise_bob_dbm, self.noise_eve_dbm)

    @property
    def combos(self) -> list[tuple[str, int]]:
        return [(s, n) for s in self.schemes for n in self.waveguides]


@dataclass(frozen=True)
class ScenarioSample:
    bob: Position
    eve: Position
    drop_index: int
    stream: tuple[int, int]


@dataclass(frozen=True)
class ResultRecord:
    drop_index: int
    scheme: str
    N: int
    power_dbm: float
    secrecy_rate: float
    converged: bool
    iterations: int
    wall_time: float = 0.0
    error: str = ""


def sample_scenario(seed: int, drop_index: int, D: float) -> ScenarioSample:
    """Bob and Eve uniform on the square; a pure function of ``(seed, drop_index)``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(drop_index,))
    u = np.random.default_rng(ss).uniform(0.0, D, 4)
    return ScenarioSample(Position(u[0], u[1]), Position(u[2], u[3]), drop_index, (seed, drop_index))


def cas_positions(params: SystemParams) -> np.ndarray:
    """Half-wavelength ULA along x centred on ``D / 2``."""
    N = params.num_waveguides
    spacing = params.wavelength / 2
    return params.region_side / 2 + (np.arange(N) - (N - 1) / 2) * spacing


def _record(scheme, N, p_dbm, drop, sr, converged, iters, t0) -> ResultRecord:
    return ResultRecord(drop, scheme, N, p_dbm, max(0.0, float(sr)), bool(converged), int(iters),
                        time.perf_counter() - t0)


def solve_scheme(scheme: str, sample: ScenarioSample, params: SystemParams, p_dbm: float,
                 config: MultiSolveConfig | None = None,
                 no_an: MultiResult | None = None) -> tuple[ResultRecord, MultiResult | SingleResult]:
    """Solve one drop with one scheme.

    ``no_an`` may carry an already computed AN-free PAS solution for the
    same drop, which then seeds the AN-aided run. The second return value is
    the raw solver result.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    config = config or MultiSolveConfig()
    t0 = time.perf_counter()
    P = dbm_to_linear(p_dbm)
    N = params.num_waveguides
    if scheme == "cas-an":
        scen = Scenario(sample.bob, sample.eve, params, guided=False)
        res = solve_multi(scen, P, replace(config, no_an_warm_start=False),
                          allow_an=True, optimize_positions=False, pa_x=cas_positions(params))
        return _record(scheme, N, p_dbm, sample.drop_index, res.rates.secrecy_rate,
                       res.converged, res.iterations, t0), res
    if N == 1:
        res1 = solve_single(ScalarScenario(sample.bob, sample.eve, params, P), allow_an=scheme == "pas-an")
        return _record(scheme, N, p_dbm, sample.drop_index, res1.rates.secrecy_rate,
                       res1.converged, res1.iterations, t0), res1
    scen = Scenario(sample.bob, sample.eve, params)
    if scheme == "pas-no-an":
        res = solve_multi(scen, P, config, allow_an=False)
    else:
        res = solve_multi(scen, P, config, allow_an=True, base=no_an)
    return _record(scheme, N, p_dbm, sample.drop_index, res.rates.secrecy_rate,
                   res.converged, res.iterations, t0), res


def _failed(scheme, N, p_dbm, drop, exc) -> ResultRecord:
    return ResultRecord(drop, scheme, N, p_dbm, math.nan, False, 0, 0.0, f"{type(exc).__name__}: {exc}")


def _run_unit(args) -> list[ResultRecord]:
    """All requested schemes for one (drop, N, power); shares the AN-free PAS solve."""
    cfg, drop, N, p_dbm, schemes = args
    params = cfg.params(N)
    sample = sample_scenario(cfg.rng_seed, drop, cfg.region_side)
    out: dict[str, ResultRecord] = {}
    base = None
    order = sorted(schemes, key=lambda s: {"pas-no-an": 0, "pas-an": 1, "cas-an": 2}[s])
    for scheme in order:
        try:
            rec, res = solve_scheme(scheme, sample, params, p_dbm, cfg.solver, no_an=base)
            if scheme == "pas-no-an" and N > 1:
                base = res
        except Exception as exc:  # a failed drop never aborts the run
            log.warning("drop %d %s N=%d P=%g failed: %s", drop, scheme, N, p_dbm, exc)
            rec = _failed(scheme, N, p_dbm, drop, exc)
        out[scheme] = rec
    return [out[s] for s in schemes]


def run_records(cfg: ExperimentConfig, powers: Sequence[float]) -> list[ResultRecord]:
    units = []
    for drop in range(cfg.num_drops):
        for N in cfg.waveguides:
            schemes = [s for s in cfg.schemes]
            for p in powers:
                units.append((cfg, drop, N, float(p), schemes))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            chunks = list(ex.map(_run_unit, units, chunksize=max(1, len(units) // (4 * cfg.workers))))
    else:
        chunks = [_run_unit(u) for u in units]
    records = [r for chunk in chunks for r in chunk]
    scheme_rank = {s: i for i, s in enumerate(cfg.schemes)}
    n_rank = {n: i for i, n in enumerate(cfg.waveguides)}
    records.sort(key=lambda r: (r.drop_index, scheme_rank[r.scheme], n_rank[r.N], r.power_dbm))
    return records


@dataclass
class SweepResult:
    records: list[ResultRecord]
    powers: list[float]
    means: dict[tuple[str, int], list[float]]


def aggregate_means(records: Iterable[ResultRecord], combos, powers) -> dict[tuple[str, int], list[float]]:
    acc: dict[tuple[str, int, float], list[float]] = {}
    for r in sorted(records, key=lambda r: r.drop_index):
        if math.isnan(r.secrecy_rate):
            continue
        acc.setdefault((r.scheme, r.N, r.power_dbm), []).append(r.secrecy_rate)
    means = {}
    for s, n in combos:
        means[(s, n)] = [float(np.mean(acc[(s, n, p)])) if acc.get((s, n, p)) else math.nan for p in powers]
    return means


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Mean secrecy rate per (scheme, N, power) over a common set of drops."""
    if not cfg.power_sweep:
        raise ValueError("power_sweep is empty")
    powers = [float(p) for p in cfg.power_sweep]
    records = run_records(cfg, powers)
    return SweepResult(records, powers, aggregate_means(records, cfg.combos, powers))


def empirical_cdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Right-continuous empirical CDF as ``(value, level)`` rows; ties collapse to the top level."""
    v = np.sort(np.asarray([x for x in values if not math.isnan(x)], dtype=float))
    m = v.size
    rows: list[tuple[float, float]] = []
    for k, x in enumerate(v, start=1):
        if rows and rows[-1][0] == x:
            rows[-1] = (x, k / m)
        else:
            rows.append((float(x), k / m))
    return rows


@dataclass
class CdfResult:
    records: list[ResultRecord]
    power_dbm: float
    tables: dict[tuple[str, int], list[tuple[float, float]]]

    def zero_mass(self, scheme: str, N: int) -> float:
        rs = [r.secrecy_rate for r in self.records if r.scheme == scheme and r.N == N and not math.isnan(r.secrecy_rate)]
        return sum(1 for x in rs if x <= 0.0) / len(rs)


def run_cdf(cfg: ExperimentConfig, power_dbm: float | None = None) -> CdfResult:
    if cfg.num_drops < 2:
        raise ValueError("a CDF needs at least 2 drops")
    p = cfg.fixed_power if power_dbm is None else float(power_dbm)
    records = run_records(cfg, [p])
    tables = {}
    for s, n in cfg.combos:
        tables[(s, n)] = empirical_cdf([r.secrecy_rate for r in records if r.scheme == s and r.N == n])
    return CdfResult(records, p, tables)


# -- output ------------------------------------------------------------------

def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return format(v, ".12g")


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_dat(columns: Sequence[str], rows: Iterable[Sequence[float]], path) -> None:
    """Space-separated numeric table with a ``#`` header naming the columns."""
    lines = ["# " + " ".join(columns)]
    lines += [" ".join(_fmt(float(v)) for v in row) for row in rows]
    _write(Path(path), "\n".join(lines) + "\n")


CSV_FIELDS = ("drop_index", "scheme", "N", "power_dbm", "secrecy_rate", "converged", "iterations", "error")


def emit_csv(records: Iterable[ResultRecord], path, with_timing: bool = False) -> None:
    """One record per line. Wall time is left out unless asked for, so output is reproducible."""
    cols = list(CSV_FIELDS) + (["wall_time"] if with_timing else [])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in records:
        row = []
        for c in cols:
            v = getattr(r, c)
            if isinstance(v, bool):
                v = int(v)
            elif isinstance(v, float):
                v = repr(v) if c in ("secrecy_rate", "wall_time") else _fmt(v)
            row.append(v)
        w.writerow(row)
    _write(Path(path), buf.getvalue())


def _p_tag(p: float) -> str:
    return _fmt(p)


def write_sweep(result: SweepResult, cfg: ExperimentConfig, out_dir) -> list[Path]:
    out = Path(out_dir)
    written = []
    for (s, n), means in result.means.items():
        path = out / f"mean_sr_{s}_N{n}.dat"
        emit_dat(["power_dbm", "mean_sr"], zip(result.powers, means), path)
        written.append(path)
    combo_cols = [f"{s}_N{n}" for s, n in cfg.combos]
    rows = [[p] + [result.means[c][i] for c in cfg.combos] for i, p in enumerate(result.powers)]
    path = out / "mean_sr.dat"
    emit_dat(["power_dbm"] + combo_cols, rows, path)
    written.append(path)
    path = out / "records.csv"
    emit_csv(result.records, path)
    written.append(path)
    return written


def write_cdf(result: CdfResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    written = []
    for (s, n), rows in result.tables.items():
        path = out / f"cdf_{s}_N{n}_P{_p_tag(result.power_dbm)}.dat"
        emit_dat(["secrecy_rate", "cdf"], rows, path)
        written.append(path)
    path = out / "records.csv"
    emit_csv(result.records, path)
    written.append(path)
    return written


# -- config file -------------------------------------------------------------

_TUPLE_KEYS = {"power_sweep": float, "schemes": str, "waveguides": int}


def _convert(raw: str, target):
    if target is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return target(raw.strip())


def parse_config_text(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` comments) into an :class:`ExperimentConfig`.

    List-valued keys take comma-separated values. Solver knobs
    (``grid_step``, ``outer_tol``, ...) go to the nested solver config.
    ``overrides`` (already typed) win over file values.
    """
    top = {f.name for f in fields(ExperimentConfig)}
    base_types = {"carrier_frequency": float, "n_eff": float, "height": float, "region_side": float,
                  "noise_bob_dbm": float, "noise_eve_dbm": float, "fixed_power": float,
                  "num_drops": int, "rng_seed": int, "workers": int, "output_path": str}
    solver_conv = {"grid_step": float, "outer_tol": float, "inner_tol": float, "max_outer_iters": int,
                   "max_inner_iters": int, "position_init_mode": str, "seed": int, "joint_grid": bool,
                   "no_an_warm_start": bool}
    kw: dict = {}
    skw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        try:
            if key in _TUPLE_KEYS:
                kw[key] = tuple(_TUPLE_KEYS[key](v.strip()) for v in raw.split(",") if v.strip())
            elif key in base_types:
                kw[key] = _convert(raw, base_types[key])
            elif key in solver_conv:
                skw[key] = _convert(raw, solver_conv[key])
            else:
                raise KeyError(key)
        except KeyError:
            raise ValueError(f"line {lineno}: unknown key {key!r}") from None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key in solver_conv:
            skw[key] = val
        elif key in top:
            kw[key] = val
        else:
            raise ValueError(f"unknown override {key!r}")
    kw["solver"] = MultiSolveConfig(**skw)
    return ExperimentConfig(**kw)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides)
