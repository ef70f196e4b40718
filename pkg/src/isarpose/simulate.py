"""Forward model: perfect and degraded target-report dwells from a ship and
an angle track, plus confuser/interference injectors for robustness tests.

Reports are sampled at frame-center times; integration-time smearing is not
modeled because target reports are per-frame point estimates. Degraded
simulation is bit-reproducible for a fixed seed: every frame draws from its
own child generator keyed by (seed, frame index), so frame order and frame
parallelism never change the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .length import beam_rule
from .motion import motion_rows, track_rows
from .ship import (AngleSample, AngleTrack, Dwell, Frame, Scatterer,
                   ShipModel, TargetReport)

BASE_SNR_DB = 20.0  # reference SNR of a unit-rcs scatterer


@dataclass(frozen=True)
class DegradationSpec:
    """One injected degradation.

    kind: 'bogey' sweeps extra reports rapidly through range with a small,
    inconsistent range-rate (a confuser at aliased Doppler). 'narrowband_interference'
    adds a persistent narrow band of reports whose Doppler center migrates
    across the scene. 'broadband_interference' adds episodic bursts spanning
    a wide Doppler extent.
    """

    kind: str
    t_start: float
    t_stop: float
    rate: float = 15.0          # bogey range sweep (m/s)
    # crossing targets report a range-rate far from the ship's own Doppler
    # spread yet small next to their range migration rate
    doppler_offset: float = 2.0
    doppler_width: float = 1.0   # interference band width (m/s)
    density: int = 6             # injected reports per affected frame

    def __post_init__(self):
        if self.kind not in ("bogey", "narrowband_interference",
                             "broadband_interference"):
            raise ValueError(f"unknown degradation kind: {self.kind}")
        if not self.t_stop > self.t_start:
            raise ValueError("degradation window must have t_stop > t_start")


@dataclass(frozen=True)
class ScenarioConfig:
    """Simulation scenario: geometry means, motion content, noise, dropouts.

    Angles in radians, times in seconds. aspect_osc and tilt_osc are
    (amplitude rad, period s) pairs; noise is (sigma_r m, sigma_f m/s,
    sigma_a m/s^2).
    """

    duration: float
    frame_interval: float
    integration_time: float
    phi0: float
    theta0: float
    steady_aspect_rate: float = 0.0
    aspect_osc: tuple[float, float] = (0.0, 12.0)
    tilt_osc: tuple[float, float] = (0.0, 10.0)
    noise: tuple[float, float, float] = (0.3, 0.05, 0.05)
    snr_floor: float = -20.0
    fade_sigma: float = 0.0
    seed: int = 0
    injectors: tuple[DegradationSpec, ...] = ()
    range_resolution: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "injectors", tuple(self.injectors))
        if self.duration <= 0 or self.frame_interval <= 0 or self.integration_time <= 0:
            raise ValueError("duration, frame_interval, integration_time must be positive")
        for amp, period in (self.aspect_osc, self.tilt_osc):
            if amp != 0.0 and period <= 2 * self.frame_interval:
                raise ValueError("oscillation period must exceed 2x frame interval")
        for spec in self.injectors:
            if spec.t_start < 0 or spec.t_stop > self.duration:
                raise ValueError("degradation window outside dwell")

    @property
    def n_frames(self) -> int:
        return int(math.floor(self.duration / self.frame_interval))


def make_ship(loa: float, beam: float | None = None, height: float = 12.0,
              n_scatterers: int = 24, seed: int = 0,
              symmetric: bool = True) -> ShipModel:
    """Deterministic parametric ship.

    Places the four deck corners at (+-loa/2, +-beam/2, height), a keel line,
    a mast, and pseudo-random deck scatterers. beam defaults to the naval
    rule-of-thumb for the given length. With symmetric=True extra scatterers
    are added in (+-x, +-y) quads so all drydock cross-moments vanish
    exactly, which keeps the covariance closure exact for tests.
    """
    if beam is None:
        beam = beam_rule(loa)
    sc: list[Scatterer] = []
    hl, hb = loa / 2.0, beam / 2.0
    for sx in (+1, -1):
        for sy in (+1, -1):
            sc.append(Scatterer(sx * hl, sy * hb, height, rcs=2.0))
    # keel line and mast: on the centerline so they add no cross-moment
    sc.append(Scatterer(0.0, 0.0, 0.0, rcs=1.5))
    sc.append(Scatterer(0.0, 0.0, height * 1.8, rcs=1.0))
    rng = np.random.default_rng(seed)
    while len(sc) < n_scatterers:
        # keep deck clutter inboard of the hull ends so the bow and stern
        # corners stay the extreme-range points at working aspect angles
        x = float(rng.uniform(0.15, 0.75) * hl)
        y = float(rng.uniform(0.2, 0.9) * hb)
        z = float(rng.uniform(0.2, 1.0) * height)
        rcs = float(rng.lognormal(0.0, 0.4))
        if symmetric:
            for sx in (+1, -1):
                for sy in (+1, -1):
                    sc.append(Scatterer(sx * x, sy * y, z, rcs=rcs))
        else:
            sc.append(Scatterer(x * rng.choice((-1, 1)), y * rng.choice((-1, 1)),
                                z, rcs=rcs))
    return ShipModel(tuple(sc), loa_true=loa)


def range_of(s: Scatterer, ang: AngleSample) -> float:
    """Range offset (m) of a scatterer at one angle state."""
    m = motion_rows(ang.phi, ang.theta, ang.phi_dot, ang.theta_dot,
                    ang.phi_ddot, ang.theta_ddot)
    return float(m[0] @ (s.x0, s.y0, s.z0))


def rate_of(s: Scatterer, ang: AngleSample) -> float:
    """Range-rate (m/s): exact time derivative of range_of."""
    m = motion_rows(ang.phi, ang.theta, ang.phi_dot, ang.theta_dot,
                    ang.phi_ddot, ang.theta_ddot)
    return float(m[1] @ (s.x0, s.y0, s.z0))


def accel_of(s: Scatterer, ang: AngleSample) -> float:
    """Range-acceleration (m/s^2): exact second time derivative of range_of."""
    m = motion_rows(ang.phi, ang.theta, ang.phi_dot, ang.theta_dot,
                    ang.phi_ddot, ang.theta_ddot)
    return float(m[2] @ (s.x0, s.y0, s.z0))


def angle_sample_at(cfg: ScenarioConfig, t: float) -> AngleSample:
    """Continuous-time angle state of the scenario.

    phi(t) = phi0 + rate*(t - tbar) + A_phi*sin(2 pi t / P_phi)
    theta(t) = theta0 + A_theta*sin(2 pi t / P_theta)
    with all derivative fields filled analytically; tbar is mid-dwell.
    """
    tbar = 0.5 * cfg.n_frames * cfg.frame_interval
    a_amp, a_per = cfg.aspect_osc
    t_amp, t_per = cfg.tilt_osc
    wa = 2 * math.pi / a_per
    wt = 2 * math.pi / t_per
    return AngleSample(
        t=t,
        phi=cfg.phi0 + cfg.steady_aspect_rate * (t - tbar)
            + a_amp * math.sin(wa * t),
        theta=cfg.theta0 + t_amp * math.sin(wt * t),
        phi_dot=cfg.steady_aspect_rate + a_amp * wa * math.cos(wa * t),
        theta_dot=t_amp * wt * math.cos(wt * t),
        phi_ddot=-a_amp * wa * wa * math.sin(wa * t),
        theta_ddot=-t_amp * wt * wt * math.sin(wt * t),
    )


def build_angle_track(cfg: ScenarioConfig) -> AngleTrack:
    """Angle history of the scenario sampled at frame centers."""
    n = cfg.n_frames
    dt = cfg.frame_interval
    samples = tuple(angle_sample_at(cfg, (k + 0.5) * dt) for k in range(n))
    return AngleTrack(samples, dt=dt)


def _exact_rfa(model: ShipModel, track: AngleTrack) -> np.ndarray:
    """(n_frames, n_scatterers, 3) exact range/rate/acceleration values."""
    rows = track_rows(track)                       # (n, 3, 3)
    coords = np.array([(s.x0, s.y0, s.z0) for s in model.scatterers])
    return np.einsum("nij,sj->nsi", rows, coords)


def simulate_perfect(model: ShipModel, track: AngleTrack,
                     cfg: ScenarioConfig) -> Dwell:
    """Every scatterer reported in every frame with exact (r, f, a)."""
    vals = _exact_rfa(model, track)
    frames = []
    for k, samp in enumerate(track.samples):
        reports = tuple(
            TargetReport(frame_index=k, t=samp.t, snr=BASE_SNR_DB,
                         r=float(vals[k, i, 0]), f=float(vals[k, i, 1]),
                         a=float(vals[k, i, 2]), truth_id=i)
            for i in range(len(model.scatterers)))
        frames.append(Frame(index=k, t=samp.t,
                            integration_time=cfg.integration_time,
                            reports=reports))
    return Dwell(tuple(frames), phi0=cfg.phi0, theta0=cfg.theta0,
                 range_resolution=cfg.range_resolution,
                 frame_interval=cfg.frame_interval)


def _inject(spec: DegradationSpec, k: int, tk: float, rng,
            r_span: tuple[float, float], f_span: tuple[float, float]) -> list[TargetReport]:
    if not (spec.t_start <= tk < spec.t_stop):
        return []
    r_lo, r_hi = r_span
    f_lo, f_hi = f_span
    out = []
    if spec.kind == "bogey":
        # rapid monotone range migration; reported range-rate stays small and
        # does not match the migration (aliased velocity signature)
        r = r_lo + spec.rate * (tk - spec.t_start)
        for j in range(spec.density):
            out.append(TargetReport(
                frame_index=k, t=tk, snr=25.0 + float(rng.normal(0, 1)),
                r=float(r + rng.normal(0, 0.5)),
                f=float(spec.doppler_offset + rng.normal(0, 0.05)),
                a=float(rng.normal(0, 0.05))))
    elif spec.kind == "narrowband_interference":
        # persistent narrow Doppler band whose center migrates across the scene
        frac = (tk - spec.t_start) / (spec.t_stop - spec.t_start)
        center = f_lo + frac * (f_hi - f_lo)
        for j in range(spec.density):
            out.append(TargetReport(
                frame_index=k, t=tk, snr=22.0 + float(rng.normal(0, 1)),
                r=float(rng.uniform(r_lo, r_hi)),
                f=float(center + rng.uniform(-0.5, 0.5) * spec.doppler_width),
                a=float(rng.normal(0, 0.2))))
    else:  # broadband_interference: episodic wide-band bursts
        if rng.uniform() < 0.5:
            return []
        for j in range(spec.density):
            out.append(TargetReport(
                frame_index=k, t=tk, snr=22.0 + float(rng.normal(0, 1)),
                r=float(rng.uniform(r_lo, r_hi)),
                f=float(rng.uniform(3 * f_lo, 3 * f_hi)),
                a=float(rng.normal(0, 0.5))))
    return out


def simulate_degraded(model: ShipModel, track: AngleTrack,
                      cfg: ScenarioConfig) -> Dwell:
    """Perfect reports perturbed by noise, fading dropouts, and injectors."""
    vals = _exact_rfa(model, track)
    sig_r, sig_f, sig_a = cfg.noise
    rcs_db = np.array([10 * math.log10(s.rcs) for s in model.scatterers])
    r_span = (float(vals[:, :, 0].min()), float(vals[:, :, 0].max()))
    f_span = (float(vals[:, :, 1].min()), float(vals[:, :, 1].max()))
    frames = []
    for k, samp in enumerate(track.samples):
        rng = np.random.default_rng([cfg.seed, k])
        n_s = len(model.scatterers)
        snr = BASE_SNR_DB + rcs_db
        if cfg.fade_sigma > 0:
            snr = snr + rng.normal(0.0, cfg.fade_sigma, size=n_s)
        dr = rng.normal(0.0, sig_r, size=n_s) if sig_r > 0 else np.zeros(n_s)
        df = rng.normal(0.0, sig_f, size=n_s) if sig_f > 0 else np.zeros(n_s)
        da = rng.normal(0.0, sig_a, size=n_s) if sig_a > 0 else np.zeros(n_s)
        reports = [
            TargetReport(frame_index=k, t=samp.t, snr=float(snr[i]),
                         r=float(vals[k, i, 0] + dr[i]),
                         f=float(vals[k, i, 1] + df[i]),
                         a=float(vals[k, i, 2] + da[i]), truth_id=i)
            for i in range(n_s) if snr[i] >= cfg.snr_floor
        ]
        for spec in cfg.injectors:
            reports.extend(_inject(spec, k, samp.t, rng, r_span, f_span))
        frames.append(Frame(index=k, t=samp.t,
                            integration_time=cfg.integration_time,
                            reports=tuple(reports)))
    return Dwell(tuple(frames), phi0=cfg.phi0, theta0=cfg.theta0,
                 range_resolution=cfg.range_resolution,
                 frame_interval=cfg.frame_interval)
