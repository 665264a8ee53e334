"""Closed-form predictions the Monte Carlo results are checked against.

These formulas are the analytic coincidence/correlation laws of the
interferometer: a thermal (or otherwise classified) source split to two
detectors, each mixed with a weak coherent local oscillator of matched
frequency. Everything here is exact algebra on scenario parameters; no
random numbers are involved.

Conventions: intensities are photon rates (cw) or photons per pulse
(gated); a1_sq / a2_sq are the local oscillator fluxes |alpha_1|^2 and
|alpha_2|^2 at the two mixers; lambda_tau is the normalized excess
intensity correlation of the source at the probed delay (|gamma|^2 for
single mode thermal light, 0 for coherent-statistics light, -1 for an
ideal single photon stream).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParamError

PULSED_WEIGHTS = ("consistent", "printed")


@dataclass(frozen=True)
class CwScenarioParams:
    """Inputs of the cw correlation law at one delay."""

    i1: float = 1.0
    i2: float = 1.0
    a1_sq: float = 1.0
    a2_sq: float = 1.0
    gamma_abs: float = 1.0
    gamma_phase: float = 0.0
    dphi_alpha: float = 0.0
    lambda_tau: float = 1.0
    mode_overlap: float = 1.0

    def __post_init__(self):
        if self.i1 < 0 or self.i2 < 0 or self.a1_sq < 0 or self.a2_sq < 0:
            raise ParamError("intensities and LO fluxes must be >= 0")
        if not 0.0 <= self.gamma_abs <= 1.0:
            raise ParamError("gamma_abs must lie in [0, 1]")
        if self.lambda_tau < -1.0:
            raise ParamError("lambda_tau cannot be below -1")
        if not 0.0 <= self.mode_overlap <= 1.0:
            raise ParamError("mode_overlap must lie in [0, 1]")


@dataclass(frozen=True)
class PulsedScenarioParams:
    """Inputs of the gated coincidence law."""

    nbar: float = 0.15
    alpha_sq: float = 0.15
    g2_in: float = 2.0
    beta1: float = 1.0
    beta2: float = 1.0
    gamma_abs: float = 1.0
    gamma_phase: float = 0.0
    dphi_alpha: float = 0.0
    rep_rate: float = 50e6
    dn: int = 0

    def __post_init__(self):
        if self.nbar < 0 or self.alpha_sq < 0:
            raise ParamError("photon numbers must be >= 0")
        if self.g2_in < 0:
            raise ParamError("g2_in must be >= 0")
        if not (0.0 <= self.beta1 <= 1.0 and 0.0 <= self.beta2 <= 1.0):
            raise ParamError("mode overlaps beta must lie in [0, 1]")
        if not 0.0 <= self.gamma_abs <= 1.0:
            raise ParamError("gamma_abs must lie in [0, 1]")
        if self.rep_rate <= 0:
            raise ParamError("rep_rate must be positive")
        if int(self.dn) != self.dn:
            raise ParamError("dn must be a whole pulse offset")


@dataclass(frozen=True)
class AntibunchedLOParams:
    """Parameters of the variant with a sub-Poissonian local oscillator."""

    lambda_lo: float = -1.0
    i_lo: float = 1e6
    t_lo: float = 1e-6
    t_r: float = 1e-9
    t_c: float = 7e-6
    tau_e: float = 0.0
    tau_o: float = 0.0

    def __post_init__(self):
        if self.lambda_lo < -1.0:
            raise ParamError("lambda_lo cannot be below -1")
        if self.i_lo < 0:
            raise ParamError("i_lo must be >= 0")
        if self.t_lo <= 0 or self.t_r <= 0 or self.t_c <= 0:
            raise ParamError("coherence and resolution times must be positive")


@dataclass(frozen=True)
class ZetaReport:
    """Signal rate of the antibunched-LO scheme plus feasibility advisories."""

    zeta: float
    tr_over_tlo: float
    resolves_lo_coherence: bool
    resolves_source_coherence: bool
    delays_matched: bool


def xi_factor(p: CwScenarioParams) -> float:
    """Interference weight xi = 2 |a1 a2| sqrt(i1 i2) / (i1 a2^2 + i2 a1^2).

    By the AM-GM inequality xi <= 1, with equality when the LO flux
    matches the thermal flux arm by arm. Any spatial/polarization mode
    overlap below unity multiplies in.
    """
    denom = p.i1 * p.a2_sq + p.i2 * p.a1_sq
    if denom == 0.0:
        return 0.0
    num = 2.0 * np.sqrt(p.a1_sq * p.a2_sq * p.i1 * p.i2)
    return float(num / denom) * p.mode_overlap


def _cw_terms(p: CwScenarioParams) -> tuple[float, float, float]:
    t_src = p.i1 * p.i2 * (1.0 + p.lambda_tau)
    t_lo = p.a1_sq * p.a2_sq
    t_cross = (p.i1 * p.a2_sq + p.i2 * p.a1_sq) * (
        1.0 + xi_factor(p) * p.gamma_abs * np.cos(p.gamma_phase + p.dphi_alpha)
    )
    return t_src, t_lo, t_cross


def gamma22_cw(p: CwScenarioParams) -> float:
    """Unnormalized cw coincidence rate (source-source + LO-LO + cross)."""
    t_src, t_lo, t_cross = _cw_terms(p)
    return t_src + t_lo + t_cross


def gamma22_antibunched(p: CwScenarioParams, lo: AntibunchedLOParams) -> float:
    """cw coincidence law with a statistically tagged local oscillator.

    The LO-LO background acquires the LO's own excess correlation:
    |a1 a2|^2 (1 + lambda_lo). An ideal antibunched LO (lambda_lo = -1)
    removes that term entirely; lambda_lo = 0 reduces bit-for-bit to
    gamma22_cw.
    """
    t_src, t_lo, t_cross = _cw_terms(p)
    return t_src + t_lo * (1.0 + lo.lambda_lo) + t_cross


def visibility_cw(p: CwScenarioParams) -> float:
    """Fringe visibility of the cw coincidence rate under a phase sweep.

    The only phase-dependent piece is the cross term, so
    V = xi |gamma| (i1 a2^2 + i2 a1^2) / (constant background). For
    matched fluxes and single mode thermal light (lambda = |gamma|^2)
    this is 2|gamma| / (4 + |gamma|^2), peaking at 0.4; for
    coherent-statistics input (lambda = 0) it reaches 0.5; with
    lambda = -1 and a weak LO it approaches 1.
    """
    t_src, t_lo, _ = _cw_terms(p)
    cross_dc = p.i1 * p.a2_sq + p.i2 * p.a1_sq
    denom = t_src + t_lo + cross_dc
    if denom <= 0.0:
        raise ParamError("mean coincidence rate is not positive")
    return float(cross_dc * xi_factor(p) * p.gamma_abs / denom)


def _pulsed_terms(p: PulsedScenarioParams, weight: str) -> tuple[float, float, float]:
    if weight not in PULSED_WEIGHTS:
        raise ParamError(f"weight must be one of {PULSED_WEIGHTS}, got {weight!r}")
    # Off-pulse bins pair independent pulses: the source correlation drops
    # to Poisson level and the field coherence vanishes identically.
    same_pulse = p.dn == 0
    g2_eff = p.g2_in if same_pulse else 1.0
    gamma_eff = p.gamma_abs if same_pulse else 0.0
    t_src = p.nbar**2 * g2_eff
    t_lo = p.alpha_sq**2
    if weight == "consistent":
        w = 2.0 * p.nbar * p.alpha_sq
    else:
        w = 2.0 * p.nbar**2 * p.alpha_sq
    t_cross = w * (
        1.0
        + p.beta1 * p.beta2 * gamma_eff * np.cos(p.gamma_phase + p.dphi_alpha)
    )
    return t_src, t_lo, t_cross


def rate_pulsed(p: PulsedScenarioParams, weight: str = "consistent") -> float:
    """Coincidence rate (per second) of the gated scheme at pulse offset dn.

    R = (1/4) rep_rate [nbar^2 g2 + alpha^4 + w (1 + b1 b2 |gamma| cos)].

    The cross-term weight w admits two published readings that coincide at
    nbar = alpha_sq = 1: "consistent" uses 2 nbar alpha_sq, which follows
    from the cw law and keeps the visibility at matched fluxes independent
    of the absolute photon number; "printed" uses 2 nbar^2 alpha_sq as the
    formula appears typeset. Both are kept selectable on purpose.
    """
    t_src, t_lo, t_cross = _pulsed_terms(p, weight)
    return 0.25 * p.rep_rate * (t_src + t_lo + t_cross)


def visibility_pulsed(p: PulsedScenarioParams, weight: str = "consistent") -> float:
    """Fringe visibility of the gated coincidence rate at pulse offset dn."""
    if weight not in PULSED_WEIGHTS:
        raise ParamError(f"weight must be one of {PULSED_WEIGHTS}, got {weight!r}")
    same_pulse = p.dn == 0
    g2_eff = p.g2_in if same_pulse else 1.0
    gamma_eff = p.gamma_abs if same_pulse else 0.0
    if weight == "consistent":
        w = 2.0 * p.nbar * p.alpha_sq
    else:
        w = 2.0 * p.nbar**2 * p.alpha_sq
    denom = p.nbar**2 * g2_eff + p.alpha_sq**2 + w
    if denom <= 0.0:
        raise ParamError("mean coincidence rate is not positive")
    return float(w * p.beta1 * p.beta2 * gamma_eff / denom)


def signal_rate_zeta(p: AntibunchedLOParams) -> ZetaReport:
    """Useful signal rate zeta = i_lo * t_r of the antibunched-LO scheme.

    A saturated antibunched emitter delivers about one photon per
    coherence time (i_lo ~ 1/t_lo), for which zeta ~ t_r / t_lo. The
    advisory flags report whether the detector resolution actually
    resolves both coherence times (factor of ten margin) and whether the
    electronic and optical delays agree to within that resolution.
    """
    zeta = p.i_lo * p.t_r
    return ZetaReport(
        zeta=float(zeta),
        tr_over_tlo=float(p.t_r / p.t_lo),
        resolves_lo_coherence=bool(p.t_r <= p.t_lo / 10.0),
        resolves_source_coherence=bool(p.t_r <= p.t_c / 10.0),
        delays_matched=bool(abs(p.tau_e - p.tau_o) <= p.t_r),
    )
