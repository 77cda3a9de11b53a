"""Parameter sweeps over (N, T/Tc): ensemble comparison tables and fits.

One SweepRow per grid point carries the canonical observables, their
grand-canonical counterparts at the same mean number, the limiting
estimates, and engine diagnostics, with temperatures in both T/Tc and
trap units and occupations both absolute and N-normalised. Rows that fail
to converge become error records instead of crashing the sweep.

Rows are independent work items; each is computed sequentially inside
one worker, so results are bit-identical for any worker count. Presets
pin the particle-number sets of the reference figures with a uniform
temperature grid of step 0.05 refined to 0.01 across the transition,
where the curves move fastest.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from ._kernels import USING_NUMBA
from .asymptotics import (
    condensate_fraction_limit,
    correlation_limit,
    delta_n0_fraction_limit,
)
from .canonical import ConvergenceError, QuadratureConfig, canonical_observables
from .grand_canonical import occupation_fluctuation, solve_fugacity
from .spectrum import DomainError, TrapSpectrum, critical_temperature

__all__ = [
    "SweepRow",
    "SweepResult",
    "Preset",
    "PRESETS",
    "ScalingFit",
    "compute_row",
    "run_sweep",
    "fit_scaling",
    "temperature_grid",
    "write_csv",
    "write_json",
    "FIELD_ORDER",
]

FIELD_ORDER = (
    "n",
    "t_over_tc",
    "t_over_spacing",
    "n0_mean",
    "n0_over_n",
    "delta_n0",
    "normalized_delta_n0",
    "n1_mean",
    "corr_01_normalized",
    "ne_mean",
    "delta_ne",
    "log_z",
    "gc_n0_mean",
    "gc_n0_over_n",
    "gc_delta_n0",
    "fraction_limit",
    "eq10_value",
    "eq12_value",
    "m_max",
    "intervals_evaluated",
    "intervals_total",
    "imag_residual",
    "sum_rule_residual",
    "ground_offset",
    "converged",
    "error",
)


@dataclass(frozen=True)
class SweepRow:
    """One (N, T/Tc) grid point; float fields are NaN when unpopulated."""

    n: int
    t_over_tc: float
    t_over_spacing: float = math.nan
    n0_mean: float = math.nan
    n0_over_n: float = math.nan
    delta_n0: float = math.nan
    normalized_delta_n0: float = math.nan
    n1_mean: float = math.nan
    corr_01_normalized: float = math.nan
    ne_mean: float = math.nan
    delta_ne: float = math.nan
    log_z: float = math.nan
    gc_n0_mean: float = math.nan
    gc_n0_over_n: float = math.nan
    gc_delta_n0: float = math.nan
    fraction_limit: float = math.nan
    eq10_value: float = math.nan
    eq12_value: float = math.nan
    m_max: int = 0
    intervals_evaluated: int = 0
    intervals_total: int = 0
    imag_residual: float = math.nan
    sum_rule_residual: float = math.nan
    ground_offset: float = math.nan
    converged: int = 0
    error: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in FIELD_ORDER}


@dataclass(frozen=True)
class SweepResult:
    rows: list
    meta: dict

    @property
    def failed_rows(self) -> list:
        return [r for r in self.rows if r.error]


def compute_row(
    spectrum: TrapSpectrum,
    n: int,
    t_over_tc: float,
    config: QuadratureConfig | None = None,
) -> SweepRow:
    """Evaluate one grid point; convergence failures become error records."""
    tc = critical_temperature(spectrum, n)
    t = t_over_tc * tc
    try:
        r = canonical_observables(spectrum, t, n, config)
        gc = solve_fugacity(spectrum, t, n, m_max=r.m_max)
    except (ConvergenceError, DomainError, OverflowError) as err:
        return SweepRow(n=n, t_over_tc=t_over_tc,
                        t_over_spacing=t / spectrum.level_spacing,
                        error=f"{type(err).__name__}: {err}")
    below = 0.0 < t_over_tc < 1.0
    return SweepRow(
        n=n,
        t_over_tc=t_over_tc,
        t_over_spacing=t / spectrum.level_spacing,
        n0_mean=r.n0_mean,
        n0_over_n=r.n0_mean / n,
        delta_n0=r.delta_n0,
        normalized_delta_n0=r.delta_n0
        / math.sqrt(r.n0_mean * (r.n0_mean + 1.0)),
        n1_mean=r.n1_mean,
        corr_01_normalized=r.covariance_n0_n1 / (r.n0_mean * r.n1_mean),
        ne_mean=r.ne_mean,
        delta_ne=r.delta_ne,
        log_z=r.log_z,
        gc_n0_mean=gc.n0,
        gc_n0_over_n=gc.n0 / n,
        gc_delta_n0=occupation_fluctuation(gc.n0),
        fraction_limit=condensate_fraction_limit(t_over_tc),
        eq10_value=delta_n0_fraction_limit(n, t_over_tc) if below else math.nan,
        eq12_value=correlation_limit(n, t_over_tc) if below else math.nan,
        m_max=r.m_max,
        intervals_evaluated=r.intervals_evaluated,
        intervals_total=r.intervals_total,
        imag_residual=r.imag_residual,
        sum_rule_residual=r.sum_rule_residual,
        ground_offset=r.ground_offset,
        converged=int(r.converged),
    )


def temperature_grid(start: float, stop: float, step: float,
                     refinements=()) -> list:
    """Uniform grid plus optional finer patches, deduplicated and sorted."""
    if not (step > 0 and stop >= start > 0):
        raise DomainError(f"bad grid {start}:{stop}:{step}")
    pts = list(np.arange(start, stop + 0.5 * step, step))
    for a, b, s in refinements:
        pts.extend(np.arange(a, b + 0.5 * s, s))
    return sorted({round(float(p), 10) for p in pts})


@dataclass(frozen=True)
class Preset:
    particles: tuple
    t_start: float
    t_stop: float
    t_step: float
    refinements: tuple = ((0.9, 1.1, 0.01),)

    def grid(self) -> list:
        return temperature_grid(self.t_start, self.t_stop, self.t_step,
                                self.refinements)


# The reference figures all use the same three particle-number decades;
# the transition region gets the finer step.
_STANDARD = Preset((100, 1000, 10_000), 0.1, 1.4, 0.05)
PRESETS = {
    "fig1": _STANDARD,
    "fig2": _STANDARD,
    "fig3": _STANDARD,
    "fig4": _STANDARD,
}


def run_sweep(
    particles,
    t_grid,
    config: QuadratureConfig | None = None,
    spectrum: TrapSpectrum | None = None,
    threads: int | None = None,
) -> SweepResult:
    """Evaluate the full (N, T/Tc) grid, rows in deterministic order."""
    spectrum = spectrum or TrapSpectrum()
    points = [(int(n), float(t)) for n in particles for t in t_grid]
    workers = threads if threads and threads > 0 else (os.cpu_count() or 1)
    started = time.time()
    if workers == 1:
        rows = [compute_row(spectrum, n, t, config) for n, t in points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(compute_row, spectrum, n, t, config)
                       for n, t in points]
            rows = [f.result() for f in futures]
    meta = {
        "version": __version__,
        "compiled_kernels": USING_NUMBA,
        "workers": workers,
        "particles": list(particles),
        "t_grid": [float(t) for t in t_grid],
        "level_spacing": spectrum.level_spacing,
        "elapsed_seconds": round(time.time() - started, 3),
        "failed_rows": sum(1 for r in rows if r.error),
    }
    if config is not None:
        meta["config"] = {
            "m_max": config.m_max,
            "intervals_per_oscillation": config.intervals_per_oscillation,
            "points_per_interval": config.points_per_interval,
            "convergence_rel_tol": config.convergence_rel_tol,
            "tail_mode": config.tail_mode,
            "ground_offset": config.ground_offset,
        }
    return SweepResult(rows=rows, meta=meta)


# Named discrepancy channels for the scaling fits: each maps a row to the
# fractional gap whose decay with N is being measured.
def _gap_to_limit(row: SweepRow) -> float:
    return abs(row.fraction_limit - row.n0_over_n) / row.fraction_limit


def _gap_gc(row: SweepRow) -> float:
    return abs(row.gc_n0_over_n - row.n0_over_n) / row.gc_n0_over_n


def _gap_eq10(row: SweepRow) -> float:
    return abs(row.delta_n0 / row.n0_mean - row.eq10_value) / row.eq10_value


def _gap_eq12(row: SweepRow) -> float:
    return abs(row.corr_01_normalized - row.eq12_value) / abs(row.eq12_value)


DISCREPANCY_CHANNELS = {
    "n0_limit_gap": _gap_to_limit,
    "gc_discrepancy": _gap_gc,
    "delta_n0_eq10_gap": _gap_eq10,
    "corr_eq12_gap": _gap_eq12,
}


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    stderr: float
    points: int


def fit_scaling(rows, observable: str, t_over_tc: float) -> ScalingFit:
    """Least-squares slope of log(discrepancy) against log(N) at fixed T/Tc."""
    try:
        channel = DISCREPANCY_CHANNELS[observable]
    except KeyError:
        raise DomainError(
            f"unknown observable {observable!r}; "
            f"choose from {sorted(DISCREPANCY_CHANNELS)}"
        ) from None
    selected = {}
    for row in rows:
        if row.error or abs(row.t_over_tc - t_over_tc) > 1e-9:
            continue
        value = channel(row)
        if math.isfinite(value) and value > 0:
            selected[row.n] = value
    if len(selected) < 3:
        raise DomainError(
            f"need at least 3 particle numbers at t_over_tc={t_over_tc}, "
            f"have {len(selected)}"
        )
    x = np.log([float(n) for n in sorted(selected)])
    y = np.log([selected[n] for n in sorted(selected)])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = max(len(x) - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof / float(((x - x.mean()) ** 2).sum()))
    return ScalingFit(exponent=float(slope), stderr=se, points=len(x))


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(rows, path) -> None:
    """One row per grid point, every field, 17-significant-digit floats."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(FIELD_ORDER)
        for row in rows:
            d = row.to_dict()
            writer.writerow([_fmt(d[k]) for k in FIELD_ORDER])


def write_json(result: SweepResult, path) -> None:
    """Rows plus meta; NaN fields become null (the CSV spells them 'nan')."""
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v

    payload = {
        "meta": result.meta,
        "rows": [{k: clean(v) for k, v in r.to_dict().items()}
                 for r in result.rows],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
