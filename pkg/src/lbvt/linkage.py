"""Closed-form four-bar closure, actuator kinematics and the knee torque map.

Frame: upper-leg coordinates with the knee joint at the origin and the x axis
pointing from the knee toward the hip. The input-bar ground pivot sits at
(l1, 0); the output lever is a ray fixed in the lower leg at the bearing of
the closed chain tip, rotated by the knee angle, with variable length l4.
The coupler joint is the intersection of the circles (ground pivot, l2) and
(lever tip, l3); the assembly branch is picked by the configured sign and
never changes within a sweep.

The scalar jacobian is d(actuator length)/d(theta) at fixed l4, derived
through the closure: with e2 the input bar and e3 the coupler vector, the
coupler joint velocity is cross(C, e3)/cross(e2, e3) * perp(e2) per unit
knee rate, which degenerates when input bar and coupler are collinear.
"""

from __future__ import annotations

import math

from . import chain
from .model import GeometryError, LinkageState, MechanismConfig, SingularityError

SINGULARITY_SIN = 1e-8  # |sin(input-coupler angle)| below this raises


def _closure_kernel(config: MechanismConfig, theta: float, l4: float, bearing: float):
    """Pivot positions and jacobian for a lever of length l4 at the given bearing.

    Returns (A, B, C, actuator_length, jacobian). Raises GeometryError when the
    coupler circles do not intersect and SingularityError at the fold line.
    """
    if not (l4 > 0.0):
        raise GeometryError(f"lever length must be positive, got {l4}")
    l1, l2, l3 = config.l1, config.l2, config.l3
    ax_, ay_ = config.l1, 0.0
    cx = l4 * math.cos(theta + bearing)
    cy = l4 * math.sin(theta + bearing)

    dx, dy = cx - ax_, cy - ay_
    g = math.hypot(dx, dy)
    if g > l2 + l3 + 1e-12:
        raise GeometryError(
            f"closure infeasible at theta={math.degrees(theta):.3f} deg, l4={l4:.5f} m: "
            f"pivot span {g:.5f} m exceeds l2 + l3 = {l2 + l3:.5f} m"
        )
    if g < abs(l2 - l3) - 1e-12:
        raise GeometryError(
            f"closure infeasible at theta={math.degrees(theta):.3f} deg, l4={l4:.5f} m: "
            f"pivot span {g:.5f} m is below |l2 - l3| = {abs(l2 - l3):.5f} m"
        )
    if g == 0.0:
        raise GeometryError("ground pivot and lever tip coincide; closure undefined")

    ux, uy = dx / g, dy / g
    a = (l2 * l2 - l3 * l3 + g * g) / (2.0 * g)
    h_sq = l2 * l2 - a * a
    h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
    s = float(config.branch_sign)
    bx = ax_ + a * ux - s * h * uy
    by = ay_ + a * uy + s * h * ux

    e2x, e2y = bx - ax_, by - ay_
    e3x, e3y = cx - bx, cy - by
    cross_e2e3 = e2x * e3y - e2y * e3x
    sin_mu = cross_e2e3 / (l2 * l3)
    if abs(sin_mu) < SINGULARITY_SIN:
        raise SingularityError(
            f"transmission singularity at theta={math.degrees(theta):.3f} deg, "
            f"l4={l4:.5f} m: input bar and coupler are collinear"
        )

    r = config.actuator_attach_ratio
    px = ax_ + r * e2x
    py = ay_ + r * e2y
    qx, qy = config.actuator_base
    ex, ey = px - qx, py - qy
    d = math.hypot(ex, ey)
    if not (d > 0.0):
        raise GeometryError("actuator attachment coincides with the actuator base")

    cross_c_e3 = cx * e3y - cy * e3x
    lam = cross_c_e3 / cross_e2e3
    # dP/dtheta = r * lam * perp(e2); J = unit(P - base) . dP/dtheta
    jac = r * lam * (ex * (-e2y) + ey * e2x) / d

    return (ax_, ay_), (bx, by), (cx, cy), d, jac


def solve_closure(config: MechanismConfig, theta: float, l4: float) -> LinkageState:
    """Assemble the four-bar at one knee angle and lever length.

    All four link-length constraints hold to better than 1e-10 m in the
    returned state; the branch flag is the configured assembly side.
    """
    bearing = chain.tip_bearing(config, (0.0,) * config.n_joints)
    a, b, c, d, jac = _closure_kernel(config, theta, l4, bearing)
    return LinkageState(
        theta=theta,
        joints=((0.0, 0.0), a, b, c),
        actuator_length=d,
        jacobian=jac,
        branch=config.branch_sign,
    )


def actuator_length(config: MechanismConfig, theta: float, l4: float) -> float:
    """Distance from the actuator base to its attachment point on the input bar."""
    return solve_closure(config, theta, l4).actuator_length


def jacobian(config: MechanismConfig, theta: float, l4: float) -> float:
    """Actuator extension per unit knee rotation at fixed lever length (m/rad)."""
    return solve_closure(config, theta, l4).jacobian


def kfe_torque(config: MechanismConfig, theta: float, l4: float, f_cyl: float) -> float:
    """Knee torque produced by the actuator force: jacobian times force."""
    return jacobian(config, theta, l4) * f_cyl
