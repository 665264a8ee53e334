"""Estimators that turn raw correlations into coherence quantities.

The pipeline mirrors the measurement logic: interference fringes in the
cross-correlation are fitted for visibility and phase, visibility is
inverted to |gamma| through the correlation-to-visibility law, fitted
phases referenced to zero delay give the phase of gamma, and an
independent route (|gamma| from the local-oscillator-blocked intensity
correlation) cross-checks the fringe route.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .detection import CorrelationEstimate
from .errors import AnalysisError, GridError, ParamError

MIN_FRINGE_POINTS = 8
# Ideal-case ceiling of the visibility law: 2|gamma|/(4+|gamma|^2) at
# |gamma| = 1. Calibration of the mismatch factor xi divides by this.
V_MAX_IDEAL = 0.4


@dataclass
class FringeScan:
    """Correlation values versus swept local-oscillator phase at one delay."""

    phase: np.ndarray
    value: np.ndarray
    stderr: np.ndarray | None = None
    tau: float = 0.0

    def __post_init__(self):
        self.phase = np.asarray(self.phase, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.phase.shape != self.value.shape or self.phase.ndim != 1:
            raise ParamError("phase and value must be 1-d arrays of equal length")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.phase.shape:
                raise ParamError("stderr must match phase in shape")
            if np.any(self.stderr < 0):
                raise ParamError("stderr must be >= 0")


@dataclass(frozen=True)
class FringeFit:
    """Result of fitting value = mean_level * (1 + visibility cos(phase + phase_offset))."""

    mean_level: float
    visibility: float
    phase_offset: float
    residual_rms: float
    visibility_err: float = 0.0
    phase_err: float = 0.0
    n_points: int = 0


@dataclass
class CoherenceFunction:
    """|gamma| and unwrapped phase on a delay axis, plus the xi used."""

    tau: np.ndarray
    gamma_abs: np.ndarray
    gamma_phase: np.ndarray
    xi: float = 1.0
    gamma_abs_err: np.ndarray | None = None
    gamma_phase_err: np.ndarray | None = None
    clamped: np.ndarray | None = None

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.gamma_abs = np.asarray(self.gamma_abs, dtype=float)
        self.gamma_phase = np.asarray(self.gamma_phase, dtype=float)
        if not (self.tau.shape == self.gamma_abs.shape == self.gamma_phase.shape):
            raise ParamError("tau, gamma_abs, gamma_phase must share one shape")
        if self.tau.size > 1 and not np.all(np.diff(self.tau) > 0):
            raise ParamError("tau must be strictly ascending")
        if np.any(self.gamma_abs < 0) or np.any(self.gamma_abs > 1.0 + 1e-12):
            raise ParamError("gamma_abs must lie in [0, 1]")
        if not 0.0 < self.xi <= 1.0:
            raise ParamError("xi must lie in (0, 1]")


class GammaInversion(NamedTuple):
    gamma_abs: float
    clamped: bool


@dataclass(frozen=True)
class DopplerEstimate:
    """Angular frequency difference recovered from the phase slope."""

    value: float
    stderr: float
    n_points: int


@dataclass(frozen=True)
class CrosscheckReport:
    """Agreement between two |gamma(tau)| routes on a common delay axis."""

    rms: float
    max_abs: float
    bias: float
    n_points: int
    tolerance: float
    passed: bool


def _wrap_phase(x: float) -> float:
    w = (x + np.pi) % (2.0 * np.pi) - np.pi
    if w <= -np.pi:
        w = np.pi
    return float(w)


def fit_fringe(scan: FringeScan) -> FringeFit:
    """Least-squares fringe fit, linear in (mean, cos, sin) amplitudes.

    The model is value = m * (1 + V cos(phase + phi0)) with V >= 0; any
    sign is absorbed into phi0. Points are inverse-variance weighted when
    the scan carries standard errors; each stated error is floored at half
    the median so that a noisy error estimate cannot make one point
    dominate the fit. Raises AnalysisError (category "fit-degenerate")
    for under-sampled scans: fewer than 8 points, phase span below 2 pi,
    a singular design, or a non-positive mean level.
    """
    phi = scan.phase
    y = scan.value
    n = phi.size
    if n < MIN_FRINGE_POINTS:
        raise AnalysisError(
            f"fringe scan has {n} points; need >= {MIN_FRINGE_POINTS}",
            category="fit-degenerate",
        )
    span = float(phi.max() - phi.min())
    if span < 2.0 * np.pi - 1e-9:
        raise AnalysisError(
            f"fringe scan spans {span:g} rad; need a full 2 pi turn",
            category="fit-degenerate",
        )
    design = np.column_stack([np.ones(n), np.cos(phi), np.sin(phi)])
    if scan.stderr is not None and np.all(scan.stderr >= 0) and np.median(scan.stderr) > 0:
        sigma = np.maximum(scan.stderr, 0.5 * np.median(scan.stderr))
        w = 1.0 / sigma
        known_sigma = True
    else:
        w = np.ones(n)
        known_sigma = False
    xw = design * w[:, None]
    yw = y * w
    coef, _, rank, _ = np.linalg.lstsq(xw, yw, rcond=None)
    if rank < 3:
        raise AnalysisError("fringe design matrix is singular", category="fit-degenerate")
    m, a, b = coef
    if m <= 0.0:
        raise AnalysisError(
            f"fitted mean level {m:g} is not positive", category="fit-degenerate"
        )
    amp = float(np.hypot(a, b))
    vis = amp / m
    phi0 = float(np.arctan2(-b, a)) if amp > 0 else 0.0

    resid = y - design @ coef
    residual_rms = float(np.sqrt(np.mean(resid**2)))
    cov = np.linalg.inv(xw.T @ xw)
    dof = max(n - 3, 1)
    chi2 = float(np.sum((w * resid) ** 2))
    if known_sigma:
        # Stated errors are themselves estimates; never report a smaller
        # uncertainty than the residual scatter supports.
        cov = cov * max(1.0, chi2 / dof)
    else:
        cov = cov * chi2 / dof
    if amp > 0:
        jac_v = np.array([-amp / m**2, a / (amp * m), b / (amp * m)])
        jac_p = np.array([0.0, b / amp**2, -a / amp**2])
        vis_err = float(np.sqrt(jac_v @ cov @ jac_v))
        phase_err = float(np.sqrt(jac_p @ cov @ jac_p))
    else:
        vis_err = float(np.sqrt(cov[1, 1] + cov[2, 2])) / m
        phase_err = np.pi
    return FringeFit(
        mean_level=float(m),
        visibility=float(vis),
        phase_offset=_wrap_phase(phi0),
        residual_rms=residual_rms,
        visibility_err=vis_err,
        phase_err=phase_err,
        n_points=n,
    )


def visibility_to_gamma(visibility: float, xi: float = 1.0, policy: str = "clamp") -> GammaInversion:
    """Invert the visibility law V = 2 xi |gamma| / (4 + |gamma|^2).

    Returns the physical (smaller) root. Visibilities above the attainable
    maximum 0.4 xi have no root in [0, 1]; depending on policy they either
    clamp to 1 with the clamped flag set ("clamp", default) or raise an
    AnalysisError with category "visibility-out-of-range" ("raise").
    """
    if policy not in ("clamp", "raise"):
        raise ParamError(f"policy must be 'clamp' or 'raise', got {policy!r}")
    if visibility < 0.0:
        raise ParamError("visibility must be >= 0")
    if not 0.0 < xi <= 1.0:
        raise ParamError(f"xi must lie in (0, 1], got {xi:g}")
    if visibility == 0.0:
        return GammaInversion(0.0, False)
    disc = xi * xi - 4.0 * visibility * visibility
    gamma = (xi - np.sqrt(disc)) / visibility if disc >= 0.0 else np.inf
    if gamma > 1.0:
        if policy == "raise":
            raise AnalysisError(
                f"visibility {visibility:g} exceeds the maximum 0.4 xi = "
                f"{V_MAX_IDEAL * xi:g} attainable for xi = {xi:g}",
                category="visibility-out-of-range",
            )
        return GammaInversion(1.0, True)
    return GammaInversion(float(gamma), False)


def extract_phase_curve(
    taus: Sequence[float],
    fits: Sequence[FringeFit],
    xi: float = 1.0,
    policy: str = "clamp",
) -> CoherenceFunction:
    """Assemble gamma(tau) from per-delay fringe fits.

    The fitted phase offsets contain an arbitrary instrumental constant;
    it is removed by referencing everything to the tau = 0 fit, where the
    phase of gamma vanishes by definition. Phases are then unwrapped
    walking outward from that reference, taking the 2 pi branch nearest
    the neighbor. A tau = 0 entry must be present (category
    "missing-reference-delay" otherwise).
    """
    taus = np.asarray(list(taus), dtype=float)
    fits = list(fits)
    if taus.ndim != 1 or taus.size != len(fits):
        raise ParamError("taus and fits must have equal length")
    if taus.size == 0:
        raise ParamError("no fits given")
    order = np.argsort(taus)
    taus = taus[order]
    fits = [fits[i] for i in order]
    if np.any(np.diff(taus) <= 0):
        raise ParamError("delays must be distinct")
    i0 = int(np.argmin(np.abs(taus)))
    if abs(taus[i0]) > 1e-12:
        raise AnalysisError(
            "no tau = 0 reference delay in the scan set",
            category="missing-reference-delay",
        )
    gam = np.empty(taus.size)
    gam_err = np.empty(taus.size)
    clamped = np.zeros(taus.size, dtype=bool)
    raw = np.empty(taus.size)
    raw_err = np.empty(taus.size)
    for i, f in enumerate(fits):
        g, c = visibility_to_gamma(f.visibility, xi, policy)
        gam[i] = g
        clamped[i] = c
        # Linearized propagation through the inversion; the Jacobian
        # d|gamma|/dV = (4 + g^2) / (2 xi - 2 g V ... ) simplifies via the
        # implicit derivative of V (4 + g^2) = 2 xi g.
        denom = 2.0 * xi - 2.0 * f.visibility * g
        gam_err[i] = (4.0 + g * g) * f.visibility_err / denom if denom > 1e-12 else np.inf
        raw[i] = f.phase_offset
        raw_err[i] = f.phase_err
    # Reference and unwrap outward from tau = 0.
    d = raw - raw[i0]
    d = (d + np.pi) % (2.0 * np.pi) - np.pi
    phase = np.empty_like(d)
    phase[i0:] = np.unwrap(d[i0:])
    phase[: i0 + 1] = np.unwrap(d[: i0 + 1][::-1])[::-1]
    phase -= phase[i0]
    return CoherenceFunction(
        tau=taus,
        gamma_abs=gam,
        gamma_phase=phase,
        xi=xi,
        gamma_abs_err=gam_err,
        gamma_phase_err=raw_err,
        clamped=clamped,
    )


def fit_doppler(cf: CoherenceFunction, min_gamma: float = 0.1) -> DopplerEstimate:
    """Recover the frequency offset from the linear phase of gamma.

    gamma_phase = -doppler * tau, so a weighted straight-line fit (free
    intercept, weights from the per-point phase errors when available)
    gives the offset as minus the slope. Only delays with
    gamma_abs > min_gamma carry usable phase; fewer than three of them is
    an error (category "insufficient-bins").
    """
    mask = cf.gamma_abs > min_gamma
    n = int(np.count_nonzero(mask))
    if n < 3:
        raise AnalysisError(
            f"only {n} delays have |gamma| > {min_gamma:g}; need >= 3",
            category="insufficient-bins",
        )
    t = cf.tau[mask]
    p = cf.gamma_phase[mask]
    if cf.gamma_phase_err is not None and np.all(cf.gamma_phase_err[mask] > 0):
        w = 1.0 / cf.gamma_phase_err[mask]
    else:
        w = np.ones(n)
    design = np.column_stack([t, np.ones(n)]) * w[:, None]
    coef, _, rank, _ = np.linalg.lstsq(design, p * w, rcond=None)
    if rank < 2:
        raise AnalysisError("phase fit design is singular", category="insufficient-bins")
    cov = np.linalg.inv(design.T @ design)
    resid = p * w - design @ coef
    dof = max(n - 2, 1)
    scale = float(resid @ resid) / dof
    # With supplied weights keep the larger of the formal and scaled error.
    slope_err = float(np.sqrt(cov[0, 0] * max(1.0, scale)))
    return DopplerEstimate(value=float(-coef[0]), stderr=slope_err, n_points=n)


def gamma_from_g2(est: CorrelationEstimate) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """|gamma| from a thermal intensity correlation, g2 = 1 + |gamma|^2.

    Returns (gamma_abs, gamma_err, clamped) on est.tau. Bins with
    g2 < 1 (possible through noise) clamp to zero and are flagged; when
    clearly more bins sit three standard errors below 1 than chance
    allows, and by more than the few-percent normalization bias a
    finite-window correlator can produce on its own, the thermal
    assumption itself is suspect and a warning is issued.
    """
    excess = est.g2 - 1.0
    clamped = excess < 0.0
    low = (excess < -3.0 * est.stderr) & (excess < -0.05)
    n_low = int(np.count_nonzero(low))
    if n_low >= max(3, 0.01 * excess.size):
        warnings.warn(
            f"g2 is significantly below 1 in {n_low} bins; input does not "
            "look thermal and the inferred |gamma| there is clamped to 0"
        )
    gamma = np.sqrt(np.clip(excess, 0.0, None))
    # d|gamma|/dg2 = 1/(2 |gamma|); floor the denominator at the noise
    # scale so clamped bins report a finite, honest uncertainty.
    floor = np.sqrt(np.maximum(est.stderr, 1e-300))
    err = 0.5 * est.stderr / np.maximum(gamma, floor)
    return gamma, err, clamped


def crosscheck(
    cf: CoherenceFunction,
    tau_b: np.ndarray,
    gamma_b: np.ndarray,
    tolerance: float = 0.05,
) -> CrosscheckReport:
    """Compare the fringe-derived |gamma| with an independent route.

    The second route (tau_b, gamma_b) is linearly resampled onto cf.tau;
    delays outside its span are dropped. The report carries the rms and
    maximum absolute difference, plus the signed mean bias (fringe minus
    reference), which grows with a miscalibrated xi.
    """
    tau_b = np.asarray(tau_b, dtype=float)
    gamma_b = np.asarray(gamma_b, dtype=float)
    if tau_b.shape != gamma_b.shape or tau_b.ndim != 1 or tau_b.size < 2:
        raise ParamError("reference route needs matching 1-d arrays, >= 2 points")
    inside = (cf.tau >= tau_b.min()) & (cf.tau <= tau_b.max())
    n = int(np.count_nonzero(inside))
    if n == 0:
        raise GridError(
            "delay axes of the two routes do not overlap", category="empty-overlap"
        )
    ref = np.interp(cf.tau[inside], tau_b, gamma_b)
    diff = cf.gamma_abs[inside] - ref
    rms = float(np.sqrt(np.mean(diff**2)))
    return CrosscheckReport(
        rms=rms,
        max_abs=float(np.max(np.abs(diff))),
        bias=float(np.mean(diff)),
        n_points=n,
        tolerance=tolerance,
        passed=bool(rms <= tolerance),
    )
