"""Fixed-N partition function and occupation moments by contour quadrature.

The canonical partition function of N bosons on the trap spectrum is the
N-th power-series coefficient of the grand generating function, extracted
as a contour integral over the unit circle:

    Z(N) = (1/2pi) int_{-pi}^{pi} dz e^{iNz}
           prod_m (1 - e^{-E_m/T} e^{-iz})^{-g_m} * C(z)

where C(z) = exp(s_mb e^{-iz}) closes the levels above the truncation in
Boltzmann order (tail_mode) or is 1 (truncate). The integrand at -z is the
conjugate of the integrand at +z, so the code integrates [0, pi] only and
keeps twice the real part; the assembled integral is exactly real.

Occupation moments ride along as cheap pointwise weight factors on the
same grid (one designated ground state, one designated state of the
first excited level, the excited-state total, and their squares and
cross product), so every observable is a ratio of two integrals sharing
one quadrature pass and one normalisation. See _kernels for the seven
accumulators.

Conditioning. The raw integrand oscillates with phase ~ N z while its
modulus peaks at z = 0; for a poorly balanced ground offset the integral
is exponentially smaller than the integrand's peak and double precision
runs out of digits (errors grow like exp of the Legendre gap between the
requested N and the offset's natural particle number). The engine
therefore evaluates at the offset that makes z = 0 a true saddle,
eps0* = -T log(fugacity(N, T)), where the integrand is a positive, nearly
Gaussian peak. Observables do not depend on the offset at all, and log Z
at any other offset follows from the exact identity
log Z(eps0) = log Z(eps0') - N (eps0 - eps0')/T, so nothing is lost.
A fixed override remains available for invariance studies.

Grid density. A uniform M-point rule on the full period sums coefficient
aliases Z(N + k M) exactly, so the step must make the first alias
negligible. At the saddle offset the coefficient sequence decays past N
on the scale of the ground occupation plus the number spread, hence the
density floor below keyed to n0 + sqrt(var). The pi/(4N) baseline is kept
as a second floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import N_ACCUMULATORS, projection_chunk
from .grand_canonical import auto_m_max, solve_fugacity
from .logcomplex import LogComplex, LogComplexAccumulator
from .spectrum import DomainError, TrapSpectrum, weighted_geometric_tail

__all__ = [
    "QuadratureConfig",
    "CanonicalResult",
    "ConvergenceError",
    "ShiftInvarianceReport",
    "canonical_observables",
    "partition_integrand",
    "mb_tail_factor",
    "saddle_ground_offset",
    "shift_invariance_check",
    "TAIL_MODES",
]

TAIL_MODES = ("truncate", "maxwell_boltzmann_closure")

# Early-exit hysteresis: this many consecutive negligible intervals, plus a
# rigorous bound on everything beyond them, before stopping.
EXIT_STREAK = 32
CHUNK_INTERVALS = 512

# Alias suppression: full-period point count must clear N by this many
# decay lengths of the coefficient tail.
TAIL_DECAY_LENGTHS = 36.0
GRID_MARGIN = 0.55
MIN_HALF_INTERVALS = 256

# Above this N a single midpoint per interval is already accurate; below,
# a 4-point Gauss rule costs little and buys headroom.
MIDPOINT_N = 10_000


class ConvergenceError(RuntimeError):
    """Quadrature failed to produce a trustworthy result; carries diagnostics."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class QuadratureConfig:
    """Knobs for the contour quadrature.

    m_max: highest Bose-treated level; None derives one from T.
    intervals_per_oscillation: multiplies the grid density floor.
    points_per_interval: Gauss order per interval; None picks 1 for
        N >= 10^4 and 4 below.
    convergence_rel_tol: early-exit threshold on per-interval contributions.
    tail_mode: 'maxwell_boltzmann_closure' or 'truncate'.
    ground_offset: None evaluates at the saddle offset; a positive float
        forces that offset (invariance studies; poorly balanced values
        lose digits to cancellation and may fail outright).
    """

    m_max: int | None = None
    intervals_per_oscillation: int = 1
    points_per_interval: int | None = None
    convergence_rel_tol: float = 1e-12
    tail_mode: str = "maxwell_boltzmann_closure"
    ground_offset: float | None = None

    def __post_init__(self):
        if self.m_max is not None and self.m_max < 1:
            raise DomainError(f"m_max must be >= 1, got {self.m_max}")
        if self.intervals_per_oscillation < 1:
            raise DomainError("intervals_per_oscillation must be >= 1")
        if self.points_per_interval is not None and self.points_per_interval < 1:
            raise DomainError("points_per_interval must be >= 1")
        if not self.convergence_rel_tol > 0:
            raise DomainError("convergence_rel_tol must be positive")
        if self.tail_mode not in TAIL_MODES:
            raise DomainError(
                f"tail_mode must be one of {TAIL_MODES}, got {self.tail_mode!r}"
            )
        if self.ground_offset is not None and not self.ground_offset > 0:
            raise DomainError("forced ground_offset must be positive")

    def resolve_m_max(self, spectrum: TrapSpectrum, t: float) -> int:
        mm = self.m_max if self.m_max is not None else auto_m_max(spectrum, t)
        if spectrum.max_level is not None:
            mm = min(mm, spectrum.max_level)
        return mm

    def resolve_points(self, n: int) -> int:
        if self.points_per_interval is not None:
            return self.points_per_interval
        return 1 if n >= MIDPOINT_N else 4


@dataclass(frozen=True)
class CanonicalResult:
    """Observables and diagnostics of one fixed-(N, T) evaluation.

    log_z is normalised to the evaluation offset recorded in ground_offset;
    log_z_zero_offset = log_z + N*ground_offset/T removes it entirely and is
    what any two runs of the same physical system must agree on.

    imag_residual is identically zero here: the two half-contours are
    assembled as value + conjugate, so every integral is real by
    construction rather than by cancellation.
    """

    n: int
    t: float
    log_z: float
    log_z_zero_offset: float
    n0_mean: float
    n0_second_moment: float
    n1_mean: float
    n0_n1_mean: float
    ne_mean: float
    ne_second_moment: float
    imag_residual: float
    intervals_evaluated: int
    intervals_total: int
    tail_share: float
    sum_rule_residual: float
    m_max: int
    ground_offset: float
    converged: bool

    @property
    def n0_variance(self) -> float:
        return max(self.n0_second_moment - self.n0_mean**2, 0.0)

    @property
    def delta_n0(self) -> float:
        return math.sqrt(self.n0_variance)

    @property
    def ne_variance(self) -> float:
        return max(self.ne_second_moment - self.ne_mean**2, 0.0)

    @property
    def delta_ne(self) -> float:
        return math.sqrt(self.ne_variance)

    @property
    def covariance_n0_n1(self) -> float:
        """<dn0 dn1>, negative below the transition."""
        return self.n0_n1_mean - self.n0_mean * self.n1_mean

    @property
    def condensate_fraction(self) -> float:
        return self.n0_mean / self.n

    OBSERVABLE_NAMES = (
        "n0_mean",
        "n0_second_moment",
        "n1_mean",
        "n0_n1_mean",
        "ne_mean",
        "ne_second_moment",
    )

    def observables(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.OBSERVABLE_NAMES}


def _level_weights(spectrum: TrapSpectrum, t: float, m_max: int,
                   ground_offset: float):
    """Per-level Boltzmann factors at the given evaluation offset."""
    m = np.arange(m_max + 1, dtype=np.float64)
    q = np.exp(-(ground_offset + m * spectrum.level_spacing) / t)
    g = (m + 1.0) * (m + 2.0) / 2.0
    return q, g


def _tail_strength(spectrum: TrapSpectrum, t: float, m_max: int,
                   ground_offset: float, tail_mode: str) -> float:
    if tail_mode == "truncate" or spectrum.max_level is not None:
        return 0.0  # finite spectra end; there is no tail to close over
    q = math.exp(-spectrum.level_spacing / t)
    return math.exp(-ground_offset / t) * weighted_geometric_tail(q, m_max)


def mb_tail_factor(spectrum: TrapSpectrum, t: float, z: float,
                   m_max: int) -> LogComplex:
    """Boltzmann-order closure of all levels above m_max, as a log-complex.

    Equals exp(s e^{-iz}) with s the summed Boltzmann weight of the tail
    levels; an empty tail gives exactly 1.
    """
    s = _tail_strength(spectrum, t, m_max, spectrum.ground_offset,
                       "maxwell_boltzmann_closure")
    return LogComplex(s * math.cos(z), -s * math.sin(z))


def partition_integrand(
    spectrum: TrapSpectrum,
    t: float,
    n: int,
    z: float,
    config: QuadratureConfig | None = None,
) -> LogComplex:
    """Reference (scalar, log-domain) evaluation of the contour integrand.

    The hot path in _kernels computes the same quantity; this form exists
    for the z=0 normalisation, for tests, and for overflow reporting with
    the offending level named.
    """
    config = config or QuadratureConfig()
    if not -math.pi <= z <= math.pi:
        raise DomainError(f"z must lie in [-pi, pi], got {z}")
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t}")
    m_max = config.resolve_m_max(spectrum, t)
    eps0 = (config.ground_offset if config.ground_offset is not None
            else spectrum.ground_offset)
    if eps0 == 0.0 and z == 0.0:
        raise DomainError(
            "integrand diverges at z=0 for zero ground offset; "
            "use a positive offset"
        )
    q, g = _level_weights(spectrum, t, m_max, eps0)
    acc = LogComplexAccumulator()
    acc.add(0.0, n * z)
    c, s = math.cos(z), math.sin(z)
    for m in range(m_max + 1):
        t1 = 1.0 - q[m] * c
        t2 = q[m] * s
        try:
            acc.add(-g[m] * 0.5 * math.log(t1 * t1 + t2 * t2),
                    -g[m] * math.atan2(t2, t1))
        except OverflowError as err:
            raise OverflowError(f"integrand factor overflowed at level {m}") from err
    s_mb = _tail_strength(spectrum, t, m_max, eps0, config.tail_mode)
    if s_mb:
        acc.add(s_mb * c, -s_mb * s)
    return acc.value()


def saddle_ground_offset(spectrum: TrapSpectrum, t: float, n: int,
                         m_max: int | None = None) -> float:
    """Offset making z=0 a stationary point of the integrand's phase.

    This is -T log(fugacity) of the offset-free ladder at mean number N;
    always positive for finite systems, so the z=0 singularity of a bare
    offset never arises.
    """
    ladder = spectrum.with_ground_offset(0.0)
    state = solve_fugacity(ladder, t, n, m_max=m_max)
    return -t * math.log(state.fugacity)


def _weight_peaks(q: np.ndarray, g: np.ndarray, s_mb: float) -> np.ndarray:
    """Max modulus of each accumulator's weight factor, attained at z=0."""
    w = q / (1.0 - q)
    w0 = w[0]
    w0sq = q[0] * (1.0 + q[0]) / (1.0 - q[0]) ** 2
    w1 = w[1] if q.size > 1 else 0.0
    we = float((g[1:] * w[1:]).sum()) + s_mb
    wev = float((g[1:] * w[1:] / (1.0 - q[1:])).sum()) + s_mb
    return np.array([1.0, w0, w0sq, w1, w0 * w1, we, we * we + wev])


def _quadrature_nodes(points: int):
    """Gauss-Legendre nodes and weights mapped to the unit interval."""
    x, w = np.polynomial.legendre.leggauss(points)
    return (x + 1.0) / 2.0, w / 2.0


def _half_interval_count(n: int, ipo: int, tail_scale: float) -> int:
    alias_floor = GRID_MARGIN * (n + TAIL_DECAY_LENGTHS * tail_scale)
    return ipo * int(max(4 * n, math.ceil(alias_floor), MIN_HALF_INTERVALS))


def canonical_observables(
    spectrum: TrapSpectrum,
    t: float,
    n: int,
    config: QuadratureConfig | None = None,
) -> CanonicalResult:
    """Evaluate Z(N, T) and the occupation moments in one quadrature pass."""
    config = config or QuadratureConfig()
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t}")
    if n < 1:
        raise DomainError(f"particle number must be >= 1, got {n}")

    m_max = config.resolve_m_max(spectrum, t)
    if config.ground_offset is not None:
        eps0 = config.ground_offset
    else:
        # The offset must balance the same model the quadrature sees: with a
        # truncated tail the fugacity solve has to run on the capped ladder,
        # or the residual N mismatch leaves an oscillation that cancels away
        # significant digits at large N.
        tilt_spectrum = spectrum
        if config.tail_mode == "truncate" and spectrum.max_level is None:
            tilt_spectrum = TrapSpectrum(
                spectrum.level_spacing, spectrum.ground_offset, m_max
            )
        eps0 = saddle_ground_offset(tilt_spectrum, t, n, m_max)

    q, g = _level_weights(spectrum, t, m_max, eps0)
    s_mb = _tail_strength(spectrum, t, m_max, eps0, config.tail_mode)
    w_peak = _weight_peaks(q, g, s_mb)

    # Coefficient tail decay scale at this offset: ground occupation plus
    # the number spread, padded for small systems.
    var0 = float((g * q / (1.0 - q) ** 2).sum()) + s_mb
    tail_scale = w_peak[1] + math.sqrt(var0) + 20.0

    ppi = config.resolve_points(n)
    nodes, wts = _quadrature_nodes(ppi)
    n_half = _half_interval_count(n, config.intervals_per_oscillation, tail_scale)
    h = math.pi / n_half

    # Rescale so the z=0 peak exponentiates to exactly 1.
    offset = float(s_mb - (g * np.log1p(-q)).sum())

    rel_tol = config.convergence_rel_tol
    acc = np.zeros(N_ACCUMULATORS, dtype=np.complex128)
    streak = 0
    done = 0
    converged = False
    i0 = 0
    while i0 < n_half:
        i1 = min(i0 + CHUNK_INTERVALS, n_half)
        out, peak = projection_chunk(q, g, float(n), s_mb, h, i0, i1,
                                     nodes, wts, offset)
        stop = False
        for ii in range(i1 - i0):
            acc += out[ii]
            done += 1
            scale = np.abs(acc)
            if not np.isfinite(scale).all():
                raise ConvergenceError(
                    "accumulator left the representable range",
                    {"interval": done, "offset": offset, "n_half": n_half},
                )
            live = scale > 0.0
            rel = float((np.abs(out[ii])[live] / scale[live]).max())
            streak = streak + 1 if rel < rel_tol else 0
            if streak >= EXIT_STREAK:
                z_edge = done * h
                mass = math.exp(peak[ii]) * (math.pi - z_edge)
                if np.all(mass * w_peak[live] <= rel_tol * scale[live]):
                    converged = True
                    stop = True
                    break
        if stop:
            break
        i0 = i1
    else:
        converged = True  # full half-period summed; nothing remains

    z_re = float(acc[0].real)
    if not z_re > 0.0:
        raise ConvergenceError(
            "partition integral lost all significant digits "
            f"(Re = {z_re:.3e} after {done} intervals); the evaluation "
            "offset is too far from the saddle for double precision",
            {"offset": eps0, "intervals": done, "accumulator": acc[0]},
        )

    obs = acc.real / z_re
    log_z = offset + math.log(z_re / math.pi)
    log_z_zero = log_z + n * eps0 / t
    sum_rule = abs(obs[1] + obs[5] - n) / n
    return CanonicalResult(
        n=n,
        t=t,
        log_z=log_z,
        log_z_zero_offset=log_z_zero,
        n0_mean=obs[1],
        n0_second_moment=obs[2],
        n1_mean=obs[3],
        n0_n1_mean=obs[4],
        ne_mean=obs[5],
        ne_second_moment=obs[6],
        imag_residual=0.0,
        intervals_evaluated=done,
        intervals_total=n_half,
        tail_share=s_mb / n,
        sum_rule_residual=sum_rule,
        m_max=m_max,
        ground_offset=eps0,
        converged=converged,
    )


@dataclass(frozen=True)
class ShiftInvarianceReport:
    """Outcome of evaluating one system at two different ground offsets."""

    offsets: tuple[float, float]
    deviations: dict[str, float]
    log_z_shift_residual: float
    bound: float

    @property
    def max_relative_deviation(self) -> float:
        return max(self.deviations.values())

    @property
    def passed(self) -> bool:
        return self.max_relative_deviation <= self.bound


def shift_invariance_check(
    spectrum_a: TrapSpectrum,
    spectrum_b: TrapSpectrum,
    t: float,
    n: int,
    config: QuadratureConfig | None = None,
) -> ShiftInvarianceReport:
    """Verify that observables ignore a rigid shift of the whole spectrum.

    The two spectra must differ only in ground_offset (both positive).
    Observables must agree within 10x the convergence tolerance; log_z must
    differ by exactly -N*(eps0_a - eps0_b)/T, checked via the
    offset-independent normalisation. Offsets far from the saddle lose
    digits to cancellation before any engine defect would show; keep probes
    within a few T/sqrt(var) of the saddle.
    """
    config = config or QuadratureConfig()
    if config.ground_offset is not None:
        raise DomainError(
            "config.ground_offset would override both spectra; leave it unset"
        )
    if (spectrum_a.level_spacing != spectrum_b.level_spacing
            or spectrum_a.max_level != spectrum_b.max_level):
        raise DomainError("spectra must differ only in ground_offset")
    if not (spectrum_a.ground_offset > 0 and spectrum_b.ground_offset > 0):
        raise DomainError("both ground offsets must be positive")

    results = []
    for spec in (spectrum_a, spectrum_b):
        forced = QuadratureConfig(
            m_max=config.m_max,
            intervals_per_oscillation=config.intervals_per_oscillation,
            points_per_interval=config.points_per_interval,
            convergence_rel_tol=config.convergence_rel_tol,
            tail_mode=config.tail_mode,
            ground_offset=spec.ground_offset,
        )
        results.append(canonical_observables(spec, t, n, forced))
    ra, rb = results

    deviations = {}
    for name, va in ra.observables().items():
        vb = rb.observables()[name]
        ref = max(abs(va), abs(vb), 1e-300)
        deviations[name] = abs(va - vb) / ref
    shift_resid = abs(ra.log_z_zero_offset - rb.log_z_zero_offset) / max(
        abs(ra.log_z_zero_offset), 1.0
    )
    return ShiftInvarianceReport(
        offsets=(spectrum_a.ground_offset, spectrum_b.ground_offset),
        deviations=deviations,
        log_z_shift_residual=shift_resid,
        bound=10.0 * config.convergence_rel_tol,
    )
