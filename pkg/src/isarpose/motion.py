"""Motion-matrix coefficient rows shared by the simulator, the angle
estimator, and the pose inverter.

The range of a scatterer at drydock position (x0, y0, z0) under aspect phi
and tilt theta is

    r = x0 cos(theta) cos(phi) - y0 cos(theta) sin(phi) - z0 sin(theta)

and the three rows returned here are the coefficient triples of (x0, y0, z0)
in r, dr/dt, and d2r/dt2. They are exact time derivatives of the range
expression, so M @ (x0, y0, z0) reproduces range/rate/acceleration to
machine precision for any angle state.
"""

from __future__ import annotations

import numpy as np


def motion_rows(phi, theta, phi_dot, theta_dot, phi_ddot, theta_ddot):
    """Coefficient rows as an array of shape (..., 3, 3).

    Inputs broadcast; scalars give a single 3x3 matrix. Row order is
    (range, rate, acceleration); column order is (x0, y0, z0).
    """
    phi = np.asarray(phi, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    one = np.ones_like(ct * cp)

    r_row = np.stack([ct * cp, -ct * sp, -st * one], axis=-1)
    f_row = np.stack([
        -st * cp * theta_dot - ct * sp * phi_dot,
        st * sp * theta_dot - ct * cp * phi_dot,
        -ct * theta_dot * one,
    ], axis=-1)
    sq = theta_dot ** 2 + phi_dot ** 2
    a_row = np.stack([
        -sq * ct * cp + 2 * st * sp * theta_dot * phi_dot
        - st * cp * theta_ddot - ct * sp * phi_ddot,
        sq * ct * sp + 2 * st * cp * theta_dot * phi_dot
        + st * sp * theta_ddot - ct * cp * phi_ddot,
        (st * theta_dot ** 2 - ct * theta_ddot) * one,
    ], axis=-1)
    return np.stack([r_row, f_row, a_row], axis=-2)


def track_rows(track) -> np.ndarray:
    """motion_rows evaluated at every sample of an AngleTrack, shape (n, 3, 3)."""
    s = track.samples
    return motion_rows(
        np.array([a.phi for a in s]),
        np.array([a.theta for a in s]),
        np.array([a.phi_dot for a in s]),
        np.array([a.theta_dot for a in s]),
        np.array([a.phi_ddot for a in s]),
        np.array([a.theta_ddot for a in s]),
    )
