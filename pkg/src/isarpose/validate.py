"""Self-validation of the motion solution against unused data channels.

The acceleration covariances are never used by the angle estimator, so they
make an independent check twice over: once purely from data (the rigid-body
chain rule links cov_ra and cov_fa to time derivatives of cov_rf and
cov_ff), and once against the converged model (BadFit). Frames where either
disagrees carry targets that do not move with the ship.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import FrameMoments, time_derivative

MAD_TO_SIGMA = 1.4826


@dataclass(frozen=True)
class ConsistencyRecord:
    """Measured vs synthesized acceleration covariances for one frame."""

    t: float
    valid: bool
    cov_ra_meas: float = 0.0
    cov_fa_meas: float = 0.0
    cov_ra_synth: float = 0.0
    cov_fa_synth: float = 0.0


@dataclass(frozen=True)
class BadFitSeries:
    """Per-frame fit-quality score; flagged where score > threshold."""

    t: np.ndarray
    score: np.ndarray
    n_accel: np.ndarray
    n_spread: np.ndarray
    flagged: np.ndarray
    valid: np.ndarray
    threshold: float


@dataclass(frozen=True)
class FocusCheck:
    """Data-side vs model-side focus coefficients.

    rms_r/rms_f are relative RMS disagreements over frames away from the
    collinear (pearls) regime, where the coefficients are well conditioned.
    """

    t: np.ndarray
    a_r_data: np.ndarray
    a_f_data: np.ndarray
    a_r_out: np.ndarray
    a_f_out: np.ndarray
    conditioned: np.ndarray
    rms_r: float
    rms_f: float


def consistency_synth(mom_series: list[FrameMoments]) -> list[ConsistencyRecord]:
    """Acceleration covariances predicted from the range/rate covariances.

    For rigid motion the scaled covariances obey
        cov_ra = d/dt(cov_rf) - cov_ff + 2 cov_rf^2
        cov_fa = d/dt(cov_ff)/2 + cov_ff cov_rf
    so both come from the measured series alone, no model fit involved.
    The derivatives are gap-aware and skip invalid frames.
    """
    t = np.array([m.t for m in mom_series], dtype=float)
    valid = np.array([m.valid for m in mom_series], dtype=bool)
    cov_rf = np.array([m.cov_rf for m in mom_series], dtype=float)
    cov_ff = np.array([m.cov_ff for m in mom_series], dtype=float)
    rf_dot = time_derivative(t, cov_rf, valid)
    ff_dot = time_derivative(t, cov_ff, valid)
    out = []
    for k, m in enumerate(mom_series):
        ok = bool(valid[k] and np.isfinite(rf_dot[k]) and np.isfinite(ff_dot[k]))
        if not ok:
            out.append(ConsistencyRecord(t=m.t, valid=False))
            continue
        ra = rf_dot[k] - cov_ff[k] + 2.0 * cov_rf[k] ** 2
        fa = 0.5 * ff_dot[k] + cov_ff[k] * cov_rf[k]
        out.append(ConsistencyRecord(
            t=m.t, valid=True, cov_ra_meas=m.cov_ra, cov_fa_meas=m.cov_fa,
            cov_ra_synth=float(ra), cov_fa_synth=float(fa)))
    return out


def _mad_normalize(delta: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Robust z-scores of a residual channel over its valid frames."""
    z = np.zeros_like(delta)
    dv = delta[valid]
    med = np.median(dv)
    scale = MAD_TO_SIGMA * np.median(np.abs(dv - med))
    scale = max(scale, 1e-12, 1e-6 * float(np.max(np.abs(dv)) if dv.size else 0.0))
    z[valid] = (delta[valid] - med) / scale
    return z


def badfit(mom_series: list[FrameMoments],
           records: list[ConsistencyRecord],
           d_out: np.ndarray,
           threshold: float = 3.0) -> BadFitSeries:
    """Per-frame score 0.7 * n_accel + 0.3 * n_spread.

    n_accel is the magnitude of the robustly normalized disagreement between
    measured and synthesized acceleration covariances; n_spread is the
    normalized disagreement between the measured intrinsic spread d and the
    converged model's d_out. Normalization is median/MAD over valid frames,
    so a handful of contaminated frames cannot drag the scale. When no frame
    is valid every frame is flagged.
    """
    t = np.array([m.t for m in mom_series], dtype=float)
    n = len(mom_series)
    if len(records) != n or len(d_out) != n:
        raise ValueError("series lengths disagree")
    valid = np.array([m.valid and r.valid for m, r in zip(mom_series, records)],
                     dtype=bool)
    if not valid.any():
        ones = np.ones(n)
        return BadFitSeries(t=t, score=np.full(n, np.inf), n_accel=ones * np.inf,
                            n_spread=ones * np.inf,
                            flagged=np.ones(n, dtype=bool),
                            valid=np.zeros(n, dtype=bool), threshold=threshold)
    d_ra = np.array([r.cov_ra_meas - r.cov_ra_synth for r in records])
    d_fa = np.array([r.cov_fa_meas - r.cov_fa_synth for r in records])
    d_d = np.array([m.d_intrinsic for m in mom_series]) - np.asarray(d_out)
    z_ra = _mad_normalize(d_ra, valid)
    z_fa = _mad_normalize(d_fa, valid)
    z_d = _mad_normalize(d_d, valid)
    n_accel = np.hypot(z_ra, z_fa)
    n_spread = np.abs(z_d)
    score = 0.7 * n_accel + 0.3 * n_spread
    flagged = np.where(valid, score > threshold, True)
    score = np.where(valid, score, np.inf)
    return BadFitSeries(t=t, score=score, n_accel=n_accel, n_spread=n_spread,
                        flagged=flagged, valid=valid, threshold=threshold)


def crosscheck_focus(mom_series: list[FrameMoments],
                     model_cov_rf: np.ndarray, model_cov_ff: np.ndarray,
                     model_cov_ra: np.ndarray, model_cov_fa: np.ndarray,
                     pearls_limit: float = 0.9) -> FocusCheck:
    """Focus coefficients from data regression vs from model covariances.

    The model-side coefficients solve the same normal equations,
        a_r = (cov_ra cov_ff - cov_fa cov_rf) / D
        a_f = (cov_fa - cov_ra cov_rf) / D,   D = cov_ff - cov_rf^2,
    with D floored at 0.02 cov_ff so both sides stay finite as the frame
    approaches a perfect range/rate line. Frames with crf^2 above
    pearls_limit are excluded from the summary statistics.
    """
    t = np.array([m.t for m in mom_series], dtype=float)
    valid = np.array([m.valid for m in mom_series], dtype=bool)
    a_r_data = np.array([m.a_r for m in mom_series], dtype=float)
    a_f_data = np.array([m.a_f for m in mom_series], dtype=float)
    rf = np.asarray(model_cov_rf, dtype=float)
    ff = np.asarray(model_cov_ff, dtype=float)
    ra = np.asarray(model_cov_ra, dtype=float)
    fa = np.asarray(model_cov_fa, dtype=float)
    d_eff = np.maximum(ff - rf ** 2, 0.02 * ff)
    a_r_out = (ra * ff - fa * rf) / d_eff
    a_f_out = (fa - ra * rf) / d_eff
    crf2 = np.array([m.crf ** 2 for m in mom_series])
    conditioned = valid & (crf2 < pearls_limit)
    if conditioned.any():
        def rel_rms(data, out):
            scale = max(float(np.sqrt(np.mean(out[conditioned] ** 2))), 1e-12)
            return float(np.sqrt(np.mean((data[conditioned] - out[conditioned]) ** 2))
                         / scale)
        rms_r = rel_rms(a_r_data, a_r_out)
        rms_f = rel_rms(a_f_data, a_f_out)
    else:
        rms_r = rms_f = float("inf")
    return FocusCheck(t=t, a_r_data=a_r_data, a_f_data=a_f_data,
                      a_r_out=a_r_out, a_f_out=a_f_out,
                      conditioned=conditioned, rms_r=rms_r, rms_f=rms_f)
