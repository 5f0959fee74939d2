"""Quasi-static chain equilibrium under a locked knee and a constant actuator force.

The load path is: actuator force -> knee torque through the four-bar jacobian
-> tangential tip force (torque over lever length) -> per-joint chain torques
through the moment geometry. Each joint then obeys one of three regimes:

  closed    deflection 0, applied torque at most the preload holding torque
  active    torque balance, spring torque k * (preload + deflection)
  end stop  deflection at the travel limit, applied torque at least the
            spring torque there

solve_equilibrium runs an active-set scheme over those regimes: for a fixed
regime assignment the active torque balances are solved by damped Newton
iterations with finite-difference jacobians, then the worst violated regime
condition (one joint per outer pass, largest violation first, lowest index on
ties) is flipped. Torque exactly at the holding threshold keeps a joint
closed. The scheme is deterministic: identical inputs give identical results.

brute_force_equilibrium is the independent check: it minimizes elastic energy
minus the work fed into the chain over an exhaustive deflection grid, with
the work path-integrated along the uniform-opening ray to each grid node
(all joints scaled together). It never iterates and shares nothing with the
active-set scheme beyond the load map itself.
"""

from __future__ import annotations

import math

import numpy as np

from . import chain, linkage
from .model import (
    EquilibriumResult,
    GeometryError,
    GridSizeError,
    MechanismConfig,
    NoTriggerError,
    Regime,
    SingularityError,
    per_joint_stiffness,
)

MAX_OUTER = 200
MAX_INNER = 50
DAMPING_FLOOR = 1e-6
RESIDUAL_TOL = 1e-9
_INNER_TOL = 1e-12
_FD_STEP = 1e-7


class _LoadMap:
    """Applied chain-joint torques as a function of the deflections.

    Precomputes the closed-chain tip bearing so repeated evaluations skip it.
    """

    def __init__(self, config: MechanismConfig, theta: float, f_cyl: float):
        self.config = config
        self.theta = theta
        self.f_cyl = f_cyl
        self.bearing = chain.tip_bearing(config, (0.0,) * config.n_joints)

    def torques(self, d) -> tuple[tuple[float, ...], float, float]:
        """Per-joint applied torques, lever length and jacobian at deflections d."""
        cfg = self.config
        pivots, (tx, ty), _ = chain._geometry(cfg, d)
        l4 = math.hypot(tx, ty)
        if not (l4 > 0.0):
            raise GeometryError("chain tip reached the knee joint during the solve")
        _, _, _, _, jac = linkage._closure_kernel(cfg, self.theta, l4, self.bearing)
        c = jac * self.f_cyl / (l4 * l4)
        torques = tuple(
            c * ((tx - px) * tx + (ty - py) * ty) for px, py in pivots[:-1]
        )
        return torques, l4, jac


def tip_force(kfe_torque: float, l4: float) -> float:
    """Tangential force at the lever tip that carries the given knee torque."""
    if not (l4 > 0.0):
        raise ValueError(f"lever length must be positive, got {l4}")
    return kfe_torque / l4


def potential_energy(config: MechanismConfig, deflection) -> float:
    """Elastic energy stored by opening the chain, zero at the closed state."""
    d = chain._check_deflection(config, deflection)
    k = per_joint_stiffness(config)
    a0 = config.alpha_preload
    return sum(0.5 * k * ((a0 + dk) ** 2 - a0 * a0) for dk in d)


def triggering_force(config: MechanismConfig, theta: float) -> float:
    """Smallest actuator force at which any chain joint can start to open.

    The joint torques are proportional to the actuator force while the chain
    is closed, so each joint has a single critical force; the chain moves as
    soon as the most-loaded joint exceeds its holding torque, hence the
    minimum is returned. (A convention waiting for the least-loaded joint
    would return the maximum instead; the two coincide for uniform thresholds
    with proportional loading.)
    """
    per_unit, _, _ = _LoadMap(config, theta, 1.0).torques((0.0,) * config.n_joints)
    threshold = per_joint_stiffness(config) * config.alpha_preload
    critical = [threshold / a for a in per_unit if a > 1e-12]
    if not critical:
        raise NoTriggerError(
            "no chain joint is loaded toward opening at this knee angle; "
            "the mechanism cannot trigger"
        )
    return min(critical)


def _complementarity_residual(d, regimes, torques, k, a0, limits) -> float:
    res = 0.0
    for dk, reg, a, lim in zip(d, regimes, torques, limits):
        if reg is Regime.CLOSED:
            res = max(res, a - k * a0)
        elif reg is Regime.END_STOP:
            res = max(res, k * (a0 + lim) - a)
        else:
            res = max(res, abs(a - k * (a0 + dk)))
    return res


def _solve_small(jac, r, k):
    """Newton step -jac\\r with closed forms for the 1x1 and 2x2 cases."""
    m = len(r)
    if m == 1:
        a = jac[0, 0]
        return [-r[0] / a if a != 0.0 else -r[0] / k]
    if m == 2:
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        if det != 0.0:
            return [
                (-r[0] * jac[1, 1] + r[1] * jac[0, 1]) / det,
                (-r[1] * jac[0, 0] + r[0] * jac[1, 0]) / det,
            ]
        return [-x / k for x in r]
    try:
        return list(np.linalg.solve(jac, [-x for x in r]))
    except np.linalg.LinAlgError:
        return [-x / k for x in r]  # spring-dominated fallback


def _newton_active(load, d, active, k, a0, limits):
    """Damped Newton on the torque balances of the active joints, in place.

    Backtracking halves the step while the residual grows, floored per the
    solver contract. When even the floored step cannot reduce the residual
    the balance has no interior root on this side (the opening torque beats
    the spring), so the full clamped step is taken once to reach the bound
    and hand the joint back to the regime logic.
    """
    if not active:
        return load.torques(d)

    def residual(vec):
        torqs, _, _ = load.torques(vec)
        return [torqs[i] - k * (a0 + vec[i]) for i in active]

    r = residual(d)
    norm = max(abs(x) for x in r)
    bold_used = False
    for _ in range(MAX_INNER):
        if norm < _INNER_TOL:
            break
        m = len(active)
        jac = np.empty((m, m))
        for col, j in enumerate(active):
            # one-sided difference, probing whichever side has room
            up = min(d[j] + _FD_STEP, limits[j])
            dn = max(d[j] - _FD_STEP, 0.0)
            probe_val = up if up - d[j] >= d[j] - dn else dn
            span = probe_val - d[j]
            if span == 0.0:
                jac[:, col] = [-k if i == j else 0.0 for i in active]
                continue
            probe = list(d)
            probe[j] = probe_val
            rp = residual(probe)
            jac[:, col] = [(a - b) / span for a, b in zip(rp, r)]
        step = _solve_small(jac, r, k)

        def clamped(lam: float) -> list[float]:
            trial = list(d)
            for idx, j in enumerate(active):
                trial[j] = min(max(d[j] + lam * float(step[idx]), 0.0), limits[j])
            return trial

        lam = 1.0
        accepted = False
        while lam > DAMPING_FLOOR:
            trial = clamped(lam)
            r_trial = residual(trial)
            norm_trial = max(abs(x) for x in r_trial)
            if norm_trial <= norm:
                d[:] = trial
                r = r_trial
                norm = norm_trial
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            if bold_used:
                break
            bold_used = True
            d[:] = clamped(1.0)
            r = residual(d)
            norm = max(abs(x) for x in r)
    return load.torques(d)


def _active_set(load, d, regimes, k, a0, limits):
    """Active-set iteration from the given state, in place; returns (torques, outers)."""
    n = len(d)
    torques, _, _ = load.torques(d)
    outer = 0
    for outer in range(1, MAX_OUTER + 1):
        active = [i for i in range(n) if regimes[i] is Regime.ACTIVE]
        for i in range(n):
            if regimes[i] is Regime.CLOSED:
                d[i] = 0.0
            elif regimes[i] is Regime.END_STOP:
                d[i] = limits[i]
        torques, _, _ = _newton_active(load, d, active, k, a0, limits)

        # Worst regime violation; strict exceedance, threshold ties stay put.
        worst = 0.0
        flip: tuple[int, Regime] | None = None
        for i in range(n):
            a = torques[i]
            if regimes[i] is Regime.CLOSED:
                e = a - k * a0
                if e > worst and limits[i] > 0.0:
                    worst, flip = e, (i, Regime.ACTIVE)
            elif regimes[i] is Regime.END_STOP:
                e = k * (a0 + limits[i]) - a
                if e > worst:
                    worst, flip = e, (i, Regime.ACTIVE)
            else:
                r = a - k * (a0 + d[i])
                if d[i] <= 0.0 and r < 0.0 and -r > worst:
                    worst, flip = -r, (i, Regime.CLOSED)
                elif d[i] >= limits[i] and r > 0.0 and r > worst:
                    worst, flip = r, (i, Regime.END_STOP)
        if flip is None:
            break
        regimes[flip[0]] = flip[1]
    return torques, outer


_CONTINUATION_RUNGS = 8


def solve_equilibrium(config: MechanismConfig, theta: float, f_cyl: float) -> EquilibriumResult:
    """Deflections and regimes balancing the chain at one knee angle and force.

    Solves directly from the closed state; if that stalls (the opening torque
    can outgrow the spring, so the chain snaps through toward the stops), the
    force is ramped over a fixed ladder with the state carried between rungs,
    which follows the physical loading branch. Returns a non-converged result
    with the best residual if both attempts exhaust their iteration budgets;
    geometric infeasibility raises. Identical inputs give identical results.
    """
    if f_cyl < 0.0:
        raise ValueError(f"f_cyl must be non-negative, got {f_cyl}")
    if not (config.theta_min - 1e-9 <= theta <= config.theta_max + 1e-9):
        raise ValueError(
            f"theta={theta} outside the configured range "
            f"[{config.theta_min}, {config.theta_max}]"
        )

    n = config.n_joints
    k = per_joint_stiffness(config)
    a0 = config.alpha_preload
    limits = config.joint_open_limit

    load = _LoadMap(config, theta, f_cyl)
    d = [0.0] * n
    regimes = [Regime.CLOSED] * n
    torques, outer = _active_set(load, d, regimes, k, a0, limits)
    residual = _complementarity_residual(d, regimes, torques, k, a0, limits)
    iterations = outer

    if residual >= RESIDUAL_TOL and f_cyl > 0.0:
        d = [0.0] * n
        regimes = [Regime.CLOSED] * n
        for rung in range(1, _CONTINUATION_RUNGS + 1):
            f_rung = f_cyl * rung / _CONTINUATION_RUNGS
            rung_load = load if rung == _CONTINUATION_RUNGS else _LoadMap(config, theta, f_rung)
            torques, outer = _active_set(rung_load, d, regimes, k, a0, limits)
            iterations += outer
        residual = _complementarity_residual(d, regimes, torques, k, a0, limits)

    converged = residual < RESIDUAL_TOL
    # Regimes are rederived from the deflections inside make_chain_state;
    # closed joints hold exact zeros and stopped joints the exact limits, so
    # the rederivation reproduces the solver's assignment.
    state = chain.make_chain_state(config, d)
    _, l4, jac = load.torques(d)
    torque = jac * f_cyl
    f_end = torque / l4
    return EquilibriumResult(
        chain=state,
        kfe_torque=torque,
        tip_force=f_end,
        transmission_ratio=jac,
        input_force=f_cyl,
        converged=converged,
        residual=residual,
        iterations=iterations,
    )


def brute_force_equilibrium(
    config: MechanismConfig, theta: float, f_cyl: float, grid_step: float
) -> EquilibriumResult:
    """Grid-search oracle: minimize elastic energy minus fed-in work.

    Only reduced chains of up to 3 joints are accepted; the deflection box is
    enumerated exhaustively at grid_step resolution (travel limits included as
    exact nodes). The work at each node integrates the applied joint torques
    along the uniform-opening ray from the closed state to the node, with
    fixed Gauss-Legendre quadrature.
    """
    if config.n_joints > 3:
        raise ValueError("grid oracle supports at most 3 chain joints")
    if not (grid_step > 0.0):
        raise ValueError(f"grid_step must be positive, got {grid_step}")
    if f_cyl < 0.0:
        raise ValueError(f"f_cyl must be non-negative, got {f_cyl}")

    axes = []
    for lim in config.joint_open_limit:
        m = int(math.floor(lim / grid_step + 1e-9))
        nodes = np.arange(m + 1) * grid_step
        if nodes[-1] < lim - 1e-15:
            nodes = np.append(nodes, lim)
        axes.append(nodes)
    total = 1
    for ax in axes:
        total *= len(ax)
    if total > 1e8:
        raise GridSizeError(
            f"deflection grid would hold {total} nodes (limit 1e8); "
            "coarsen grid_step or reduce the travel limits"
        )

    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)  # (N, n)

    k = per_joint_stiffness(config)
    a0 = config.alpha_preload
    energy = 0.5 * k * ((a0 + grid) ** 2 - a0 * a0).sum(axis=1)

    bearing = chain.tip_bearing(config, (0.0,) * config.n_joints)
    gl_x, gl_w = np.polynomial.legendre.leggauss(16)
    s_nodes = 0.5 * (gl_x + 1.0)
    s_weights = 0.5 * gl_w
    work = np.zeros(len(grid))
    for s, w in zip(s_nodes, s_weights):
        a_q = _torques_matrix(config, theta, f_cyl, s * grid, bearing)
        work += w * (a_q * grid).sum(axis=1)

    best = int(np.argmin(energy - work))
    d_star = [float(v) for v in grid[best]]

    load = _LoadMap(config, theta, f_cyl)
    torques, l4, jac = load.torques(d_star)
    state = chain.make_chain_state(config, d_star)
    residual = _complementarity_residual(
        d_star, state.regime, torques, k, a0, config.joint_open_limit
    )
    torque = jac * f_cyl
    return EquilibriumResult(
        chain=state,
        kfe_torque=torque,
        tip_force=torque / l4,
        transmission_ratio=jac,
        input_force=f_cyl,
        converged=True,
        residual=residual,
        iterations=total,
    )


def _torques_matrix(config, theta, f_cyl, d_matrix, bearing) -> np.ndarray:
    """Vectorized applied joint torques for a (N, n) deflection matrix."""
    seg = np.asarray(config.segments)
    phi = np.asarray(config.phi)
    ang = config.beta + np.cumsum(phi[None, :] + d_matrix, axis=1)
    seg_x = seg * np.cos(ang)
    seg_y = seg * np.sin(ang)
    cum_x = np.cumsum(seg_x, axis=1)
    cum_y = np.cumsum(seg_y, axis=1)
    ax = config.l_offset * math.cos(config.beta)
    ay = config.l_offset * math.sin(config.beta)
    tip_x = ax + cum_x[:, -1]
    tip_y = ay + cum_y[:, -1]
    zeros = np.zeros((d_matrix.shape[0], 1))
    piv_x = ax + np.concatenate([zeros, cum_x[:, :-1]], axis=1)
    piv_y = ay + np.concatenate([zeros, cum_y[:, :-1]], axis=1)
    l4 = np.hypot(tip_x, tip_y)
    if np.any(l4 <= 0.0):
        raise GeometryError("chain tip reached the knee joint on the oracle grid")
    jac = _jacobian_array(config, theta, l4, bearing)
    c = jac * f_cyl / (l4 * l4)
    return c[:, None] * (
        (tip_x[:, None] - piv_x) * tip_x[:, None]
        + (tip_y[:, None] - piv_y) * tip_y[:, None]
    )


def _jacobian_array(config, theta, l4, bearing) -> np.ndarray:
    """Vectorized closure jacobian over an array of lever lengths."""
    l1, l2, l3 = config.l1, config.l2, config.l3
    cx = l4 * math.cos(theta + bearing)
    cy = l4 * math.sin(theta + bearing)
    dx = cx - l1
    dy = cy
    g = np.hypot(dx, dy)
    if np.any(g > l2 + l3 + 1e-12) or np.any(g < abs(l2 - l3) - 1e-12):
        bad = float(g[np.argmax(np.abs(g - 0.5 * (l2 + l3 + abs(l2 - l3))))])
        raise GeometryError(
            f"closure infeasible on the oracle grid: pivot span {bad:.5f} m "
            f"outside [{abs(l2 - l3):.5f}, {l2 + l3:.5f}] m"
        )
    ux, uy = dx / g, dy / g
    a = (l2 * l2 - l3 * l3 + g * g) / (2.0 * g)
    h = np.sqrt(np.clip(l2 * l2 - a * a, 0.0, None))
    s = float(config.branch_sign)
    bx = l1 + a * ux - s * h * uy
    by = a * uy + s * h * ux
    e2x, e2y = bx - l1, by
    e3x, e3y = cx - bx, cy - by
    cross23 = e2x * e3y - e2y * e3x
    if np.any(np.abs(cross23 / (l2 * l3)) < linkage.SINGULARITY_SIN):
        raise SingularityError("transmission singularity on the oracle grid")
    r = config.actuator_attach_ratio
    px = l1 + r * e2x
    py = r * e2y
    qx, qy = config.actuator_base
    ex, ey = px - qx, py - qy
    d = np.hypot(ex, ey)
    lam = (cx * e3y - cy * e3x) / cross23
    return r * lam * (ex * (-e2y) + ey * e2x) / d
