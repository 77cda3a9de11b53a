"""Self-check suites: the engine against its independent references.

Five suites, each reporting its worst relative deviation against a
tolerance:

  oracle_equivalence   partition ratios and occupations vs the recursion
  offset_invariance    observables under a rigid spectrum shift
  m_max_doubling       stability under doubling the level truncation
  grid_refinement      stability under a denser, higher-order z-grid
  worker_independence  sweep rows vs worker count (must be exact)

The probe sets are small fixed grids chosen to straddle the transition;
tolerances come from the caller so a deliberate misconfiguration can be
demonstrated to fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .canonical import (
    QuadratureConfig,
    canonical_observables,
    saddle_ground_offset,
    shift_invariance_check,
)
from .grand_canonical import solve_fugacity
from .oracle import ORACLE_MAX_N, recursion_table
from .spectrum import DomainError, TrapSpectrum, critical_temperature
from .sweep import FIELD_ORDER, run_sweep

__all__ = ["SuiteResult", "ValidationReport", "run_validation"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_deviation: float
    tolerance: float
    probes: int

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.name:<22s} {status}  max_dev={self.max_deviation:.3e} "
                f"tol={self.tolerance:.1e} probes={self.probes}")


@dataclass(frozen=True)
class ValidationReport:
    suites: list

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def lines(self) -> list:
        out = [s.line() for s in self.suites]
        out.append("validation: " + ("PASS" if self.passed else "FAIL"))
        return out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _oracle_equivalence(spectrum, max_n, tolerance) -> SuiteResult:
    worst = 0.0
    probes = 0
    particles = sorted({1, 2, 7, 25, max_n})
    for m_max in (20, 40):
        cfg = QuadratureConfig(m_max=m_max)
        for t in (0.5, 2.0, 5.0, 10.0):
            t_abs = t * spectrum.level_spacing
            table = recursion_table(
                spectrum.with_ground_offset(0.0), t_abs, max(particles),
                m_max=m_max, tail_closure=True,
            )
            for n in particles:
                r = canonical_observables(spectrum, t_abs, n, cfg)
                if n >= 2:
                    prev = canonical_observables(spectrum, t_abs, n - 1, cfg)
                    ratio_engine = math.exp(r.log_z_zero_offset
                                            - prev.log_z_zero_offset)
                else:
                    ratio_engine = math.exp(r.log_z_zero_offset)
                ratio_oracle = math.exp(table.log_z[n] - table.log_z[n - 1])
                dev = _rel(ratio_engine, ratio_oracle)
                dev = max(dev, _rel(r.n0_mean, _occupation_at(table, 0.0, n)))
                dev = max(dev, _rel(r.n1_mean,
                                    _occupation_at(table,
                                                   spectrum.level_spacing, n)))
                worst = max(worst, dev)
                probes += 1
    return SuiteResult("oracle_equivalence", worst, tolerance, probes)


def _occupation_at(table, energy, n):
    """Occupation for n <= table.n; the recursion prefix is a valid table."""
    if n == table.n:
        return table.occupation(energy)
    sub = type(table)(table.spectrum, table.t, n, table.m_max,
                      table.tail_closure, table.log_z[: n + 1])
    return sub.occupation(energy)


def _offset_probes(spectrum, max_n):
    tc100 = critical_temperature(spectrum, min(100, max_n))
    tc50 = critical_temperature(spectrum, min(50, max_n))
    return [
        (min(50, max_n), 0.5 * tc50),
        (min(100, max_n), 0.7 * tc100),
        (min(100, max_n), 1.2 * tc100),
    ]


def _offset_invariance(spectrum, max_n, tolerance) -> SuiteResult:
    worst = 0.0
    probes = 0
    for n, t in _offset_probes(spectrum, max_n):
        base = saddle_ground_offset(spectrum, t, n)
        state = solve_fugacity(spectrum.with_ground_offset(0.0), t, n)
        shift = 2.0 * t / math.sqrt(state.number_variance)
        report = shift_invariance_check(
            spectrum.with_ground_offset(base),
            spectrum.with_ground_offset(base + shift),
            t, n,
        )
        worst = max(worst, report.max_relative_deviation,
                    report.log_z_shift_residual)
        probes += 1
    return SuiteResult("offset_invariance", worst, tolerance, probes)


def _m_max_doubling(spectrum, max_n, tolerance, base_m_max=None) -> SuiteResult:
    worst = 0.0
    probes = 0
    for n, t in _offset_probes(spectrum, max_n):
        m1 = base_m_max if base_m_max is not None else (
            QuadratureConfig().resolve_m_max(spectrum, t))
        a = canonical_observables(spectrum, t, n, QuadratureConfig(m_max=m1))
        b = canonical_observables(spectrum, t, n, QuadratureConfig(m_max=2 * m1))
        for name, va in a.observables().items():
            worst = max(worst, _rel(va, getattr(b, name)))
        probes += 1
    return SuiteResult("m_max_doubling", worst, tolerance, probes)


def _grid_refinement(spectrum, max_n, tolerance) -> SuiteResult:
    worst = 0.0
    probes = 0
    for n, t in _offset_probes(spectrum, max_n):
        a = canonical_observables(spectrum, t, n, QuadratureConfig())
        fine = QuadratureConfig(intervals_per_oscillation=2,
                                points_per_interval=6)
        b = canonical_observables(spectrum, t, n, fine)
        for name, va in a.observables().items():
            worst = max(worst, _rel(va, getattr(b, name)))
        worst = max(worst, abs(a.log_z_zero_offset - b.log_z_zero_offset)
                    / abs(b.log_z_zero_offset))
        probes += 1
    return SuiteResult("grid_refinement", worst, tolerance, probes)


def _worker_independence(spectrum, max_n, tolerance) -> SuiteResult:
    n = min(40, max_n)
    grid = [0.5, 0.9, 1.2]
    serial = run_sweep([n], grid, spectrum=spectrum, threads=1)
    parallel = run_sweep([n], grid, spectrum=spectrum, threads=4)
    worst = 0.0
    for ra, rb in zip(serial.rows, parallel.rows):
        da, db = ra.to_dict(), rb.to_dict()
        for key in FIELD_ORDER:
            va, vb = da[key], db[key]
            if isinstance(va, float) and math.isfinite(va):
                worst = max(worst, _rel(va, vb))
    return SuiteResult("worker_independence", worst, tolerance,
                       len(serial.rows))


def run_validation(
    max_n: int = 100,
    tolerance: float = 1e-8,
    spectrum: TrapSpectrum | None = None,
) -> ValidationReport:
    """Run every suite; any deviation above tolerance fails the report."""
    if max_n > ORACLE_MAX_N:
        raise DomainError(
            f"validation is scoped to the oracle's range N <= {ORACLE_MAX_N}"
        )
    if max_n < 2 or tolerance < 0:
        raise DomainError("need max_n >= 2 and tolerance >= 0")
    spectrum = spectrum or TrapSpectrum()
    suites = [
        _oracle_equivalence(spectrum, max_n, tolerance),
        _offset_invariance(spectrum, max_n, tolerance),
        _m_max_doubling(spectrum, max_n, tolerance),
        _grid_refinement(spectrum, max_n, tolerance),
        _worker_independence(spectrum, max_n, min(tolerance, 1e-12)),
    ]
    return ValidationReport(suites=suites)
