"""
Position/velocity/time estimation.

* :func:`solve_ls` - iterated (weighted) Gauss-Newton on pseudoranges.
* :func:`solve_doppler_ls` - Gauss-Newton on single-epoch Doppler shifts for a
  static receiver, jointly estimating the receiver frequency offset.
* :func:`ekf_step` - constant-velocity extended Kalman filter baseline with an
  8-element state [x, y, z, vx, vy, vz, clock bias (m), clock drift (m/s)].

The ranging core :func:`solve_ranges` is shared with the indoor RIS anchor
solver, which works in a local Cartesian frame instead of ECEF.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import SPEED_OF_LIGHT, WGS84_A
from .errors import (DegenerateInput, InsufficientSats, NonConvergence,
                     SingularGeometry)
from .geometry import SINGULAR_COND, DopFamily
from .orbit import ecef_to_geodetic, enu_basis

MAX_ITER = 20
TOLERANCE = 1e-4  # m
# Levenberg-Marquardt damping; lambda = 0 is a plain Gauss-Newton step
MAX_REJECTIONS = 30
LAMBDA_START = 1e-3
LAMBDA_UP = 10.0
LAMBDA_DOWN = 10.0
LAMBDA_FLOOR = 1e-7


@dataclass(frozen=True, eq=False)
class PvtSolution:
    position_ecef: np.ndarray
    clock_bias_m: float
    dops: DopFamily | None
    iterations: int
    residual_rms: float
    converged: bool
    covariance: np.ndarray  # 4x4 over (x, y, z, bias)
    velocity_ecef: np.ndarray | None = None
    freq_bias_hz: float | None = None
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _weights(sigmas) -> tuple[np.ndarray, float]:
    """Inverse-variance weights, or unit weights when any sigma is zero.

    The second value scales the unweighted covariance (largest sigma^2).
    """
    s = np.asarray(sigmas, dtype=float)
    if s.size and np.all(s > 0):
        return 1.0 / s ** 2, 1.0
    return np.ones_like(s), float(np.max(s) ** 2) if s.size else 0.0


def _check_conditioning(G, w):
    scale = np.linalg.norm(G, axis=0)
    if np.any(scale == 0):
        raise SingularGeometry("a state is unobservable")
    Gn = G / scale
    if np.linalg.cond(Gn.T @ (w[:, None] * Gn)) > SINGULAR_COND:
        raise SingularGeometry("normal matrix condition number exceeds 1e12")


def point_dops(position, anchors, local_frame=False, with_bias=True, dims=3):
    """DOPs at ``position``, or None when the geometry gives no finite DOP.

    States that are not estimated (clock without a bias term, height in 2D)
    get a zero DOP component.
    """
    los = anchors - position
    u = los / np.linalg.norm(los, axis=1)[:, None]
    if not local_frame:
        try:
            u = u @ enu_basis(ecef_to_geodetic(position)).T
        except DegenerateInput:
            return None
    G = np.column_stack([-u, np.ones(len(u))])
    keep = list(range(dims)) + ([3] if with_bias else [])
    sub = G[:, keep]
    if len(sub) < len(keep):
        return None
    normal = sub.T @ sub
    if np.linalg.cond(normal) > SINGULAR_COND:
        return None
    Q = np.zeros((4, 4))
    Q[np.ix_(keep, keep)] = np.linalg.inv(normal)
    d = np.diag(Q)
    return DopFamily(math.sqrt(d.sum()), math.sqrt(d[:3].sum()),
                     math.sqrt(d[0] + d[1]), math.sqrt(d[2]), math.sqrt(d[3]))


def solve_ranges(anchors, measured, sigmas, initial=None, *, estimate_bias=True,
                 dims=3, local_frame=False, weighted=True, min_obs=4,
                 max_iter=MAX_ITER, tol=TOLERANCE,
                 insufficient=InsufficientSats) -> PvtSolution:
    """Gauss-Newton fit of a point (plus optional common range bias) to ranges.

    ``anchors`` is (N, 3); ``measured`` holds N ranges in meters. With
    ``dims=2`` the third coordinate stays at its initial value. The normal
    matrix includes the residual-weighted range curvature whenever that keeps
    it positive definite (a full Newton step); for satellite ranges the term is
    negligible, but short-baseline indoor fits with meter-level residuals
    otherwise converge only linearly. Levenberg-Marquardt damping kicks in
    when a step would raise the weighted residual cost.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    z = np.asarray(measured, dtype=float)
    n = len(z)
    if n < min_obs:
        raise insufficient(f"need at least {min_obs} observations, got {n}")
    if anchors.shape != (n, 3):
        raise ValueError("anchors must be (N, 3) matching the observations")
    w, cov_scale = _weights(sigmas)
    if not weighted:
        w, cov_scale = np.ones(n), float(np.max(np.asarray(sigmas, float)) ** 2)

    x0 = np.zeros(4) if initial is None else np.asarray(initial, dtype=float).ravel()
    pos = np.array(x0[:3], dtype=float)
    bias = float(x0[3]) if (estimate_bias and x0.size > 3) else 0.0

    def model(p, b):
        los = anchors - p
        rho = np.linalg.norm(los, axis=1)
        if np.any(rho == 0):
            raise SingularGeometry("estimate coincides with an anchor")
        return rho + b, los / rho[:, None], rho

    def design(u):
        cols = [-u[:, :dims]]
        if estimate_bias:
            cols.append(np.ones((n, 1)))
        return np.hstack(cols)

    predicted, u, rho = model(pos, bias)
    cost = float(np.sum(w * (z - predicted) ** 2))
    converged = False
    lam = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        G = design(u)
        _check_conditioning(G, w)
        resid = z - predicted
        normal = G.T @ (w[:, None] * G)
        grad = G.T @ (w * resid)
        # second-order range term: Hessian of |a - x| is (I - u u^T) / rho
        ud = u[:, :dims]
        curv = np.einsum("i,ij,ik->jk", w * resid / rho, ud, ud) - np.eye(dims) * np.sum(w * resid / rho)
        newton = normal.copy()
        newton[:dims, :dims] += curv
        try:
            np.linalg.cholesky(newton)
            normal = newton
        except np.linalg.LinAlgError:
            pass  # indefinite away from the minimum: keep Gauss-Newton
        diag = np.diag(np.diag(normal))
        for _ in range(MAX_REJECTIONS):
            step = np.linalg.solve(normal + lam * diag, grad)
            trial_pos = pos.copy()
            trial_pos[:dims] += step[:dims]
            trial_bias = bias + (step[dims] if estimate_bias else 0.0)
            trial_pred, trial_u, trial_rho = model(trial_pos, trial_bias)
            trial_cost = float(np.sum(w * (z - trial_pred) ** 2))
            if trial_cost <= cost * (1.0 + 1e-12):
                lam = lam / LAMBDA_DOWN if lam > LAMBDA_FLOOR else 0.0
                break
            lam = max(lam * LAMBDA_UP, LAMBDA_START)
        else:
            # no descent along any damped step: a stationary point to precision
            converged = True
            break
        pos, bias, predicted, u, rho, cost = (trial_pos, trial_bias, trial_pred,
                                              trial_u, trial_rho, trial_cost)
        if np.linalg.norm(step) < tol:
            converged = True
            break

    G = design(u)
    normal = G.T @ (w[:, None] * G)
    try:
        inv = np.linalg.inv(normal) * cov_scale
    except np.linalg.LinAlgError:
        raise SingularGeometry("normal matrix is singular at the solution") from None
    cov = np.zeros((4, 4))
    idx = list(range(dims)) + ([3] if estimate_bias else [])
    cov[np.ix_(idx, idx)] = 0.5 * (inv + inv.T)
    resid = z - predicted
    sol = PvtSolution(
        position_ecef=pos,
        clock_bias_m=bias,
        dops=point_dops(pos, anchors, local_frame, estimate_bias, dims),
        iterations=it,
        residual_rms=float(math.sqrt(np.mean(resid ** 2))),
        converged=converged,
        covariance=cov,
        residuals=resid,
    )
    if not converged:
        raise NonConvergence(f"no convergence after {max_iter} iterations", sol)
    return sol


def _lorentz(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2] - a[..., 3] * b[..., 3]


def bancroft(sat_positions, pseudoranges) -> list[np.ndarray]:
    """Closed-form (x, y, z, bias) candidates from >= 4 pseudoranges.

    Returns the (up to two) real roots of Bancroft's quadratic; with more
    than four satellites the linear step is a least-squares fit.
    """
    B = np.column_stack([np.asarray(sat_positions, float), np.asarray(pseudoranges, float)])
    alpha = 0.5 * _lorentz(B, B)
    pinv = np.linalg.pinv(B)
    u = pinv @ np.ones(len(B))
    v = pinv @ alpha
    a, b, c = _lorentz(u, u), 2.0 * (_lorentz(u, v) - 1.0), _lorentz(v, v)
    if a == 0.0:
        roots = [-c / b] if b else []
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0:
            disc = 0.0
        q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        roots = [q / a] + ([c / q] if q else [])
    out = []
    for lam in roots:
        y = v + lam * u
        y[3] = -y[3]
        out.append(y)
    return out


def _surface_start(sat_positions, pseudoranges):
    """Bancroft root closest to the Earth's surface, else the Earth's center."""
    try:
        cands = bancroft(sat_positions, pseudoranges)
    except np.linalg.LinAlgError:
        cands = []
    cands = [c for c in cands if np.all(np.isfinite(c))]
    if not cands:
        return np.zeros(4)
    return min(cands, key=lambda y: abs(np.linalg.norm(y[:3]) - WGS84_A))


def solve_ls(obs, sat_positions, initial=None, weighted=True) -> PvtSolution:
    """Pseudorange point solution: ECEF position and clock bias (m).

    ``initial`` is an ECEF position, optionally with a 4th bias element.
    Without one, the Bancroft root nearest the Earth's surface seeds the
    iteration; from the Earth's center a single-cap LEO geometry can
    converge to the mirror root.
    """
    obs = list(obs)
    if len(obs) < 4:
        raise InsufficientSats(f"need at least 4 pseudoranges, got {len(obs)}")
    rho = [o.pseudorange for o in obs]
    if initial is None:
        initial = _surface_start(sat_positions, rho)
    return solve_ranges(
        sat_positions,
        rho,
        [o.sigma for o in obs],
        initial,
        weighted=weighted,
    )


# --- Doppler positioning -----------------------------------------------------

def solve_doppler_ls(obs, sat_states, initial=None, freq_bias_hz=None,
                     max_iter=MAX_ITER, tol=TOLERANCE) -> PvtSolution:
    """Static-receiver position from single-epoch Doppler shifts.

    Model: f_i = -(f_c / c) v_i . u_i + b, with u_i the unit vector from the
    receiver to satellite i (ECEF states) and b the receiver frequency offset.
    The offset is estimated unless ``freq_bias_hz`` pins it. Without an
    ``initial`` guess the iteration starts on the surface beneath the mean
    satellite direction; an Earth-center start tends to find the mirror root. The returned
    covariance is over (x, y, z, b) with b in Hz, and ``residual_rms`` is in Hz.
    """
    obs = list(obs)
    n = len(obs)
    if n < 4:
        raise InsufficientSats(f"need at least 4 Doppler observations, got {n}")
    r = np.array([s.position for s in sat_states], dtype=float)
    v = np.array([s.velocity for s in sat_states], dtype=float)
    if r.shape != (n, 3):
        raise ValueError("one satellite state per observation is required")
    z = np.array([o.doppler_shift for o in obs])
    k = np.array([o.carrier_freq for o in obs]) / SPEED_OF_LIGHT
    w, cov_scale = _weights([o.sigma for o in obs])
    estimate_bias = freq_bias_hz is None

    if initial is None:
        # surface point beneath the mean satellite direction
        mean_dir = np.sum(r / np.linalg.norm(r, axis=1)[:, None], axis=0)
        x = WGS84_A * mean_dir / np.linalg.norm(mean_dir)
    else:
        x = np.array(initial, dtype=float).ravel()[:3]
    b = 0.0 if estimate_bias else float(freq_bias_hz)

    def evaluate(p, bias):
        los = r - p
        rho = np.linalg.norm(los, axis=1)
        u = los / rho[:, None]
        radial = np.einsum("ij,ij->i", v, u)
        pred = -k * radial + bias
        # d(pred)/dp = k (v - (v.u) u) / rho
        J = k[:, None] * (v - radial[:, None] * u) / rho[:, None]
        if estimate_bias:
            J = np.column_stack([J, np.ones(n)])
        return pred, J

    pred, J = evaluate(x, b)
    cost = float(np.sum(w * (z - pred) ** 2))
    converged = False
    it = 0
    lam = 0.0
    for it in range(1, max_iter + 1):
        _check_conditioning(J, w)
        normal = J.T @ (w[:, None] * J)
        grad = J.T @ (w * (z - pred))
        diag = np.diag(np.diag(normal))
        for _ in range(MAX_REJECTIONS):
            step = np.linalg.solve(normal + lam * diag, grad)
            tx = x + step[:3]
            tb = b + step[3] if estimate_bias else b
            tpred, tJ = evaluate(tx, tb)
            tcost = float(np.sum(w * (z - tpred) ** 2))
            if tcost <= cost * (1.0 + 1e-12):
                lam = lam / LAMBDA_DOWN if lam > LAMBDA_FLOOR else 0.0
                break
            lam = max(lam * LAMBDA_UP, LAMBDA_START)
        else:
            converged = True
            break
        x, b, pred, J, cost = tx, tb, tpred, tJ, tcost
        if np.linalg.norm(step[:3]) < tol:
            converged = True
            break

    inv = np.linalg.inv(J.T @ (w[:, None] * J)) * cov_scale
    cov = np.zeros((4, 4))
    idx = [0, 1, 2, 3] if estimate_bias else [0, 1, 2]
    cov[np.ix_(idx, idx)] = 0.5 * (inv + inv.T)
    resid = z - pred
    sol = PvtSolution(
        position_ecef=x,
        clock_bias_m=float("nan"),
        dops=point_dops(x, r, False, True),
        iterations=it,
        residual_rms=float(math.sqrt(np.mean(resid ** 2))),
        converged=converged,
        covariance=cov,
        velocity_ecef=np.zeros(3),
        freq_bias_hz=b,
        residuals=resid,
    )
    if not converged:
        raise NonConvergence(f"Doppler solution did not converge in {max_iter} iterations", sol)
    return sol


# --- extended Kalman filter --------------------------------------------------

@dataclass(frozen=True)
class EkfConfig:
    """Process-noise settings of the constant-velocity baseline filter.

    ``q_pos`` (m^2/s) and ``q_vel`` (m^2/s^3) are white-noise spectral
    densities on position and acceleration. The clock uses the two-state
    model driven by Allan-variance coefficients h0 and h_-2 (TCXO-class
    defaults). ``gate`` is the normalized-innovation-squared rejection bound.
    """
    q_pos: float = 0.0
    q_vel: float = 0.1
    clock_h0: float = 2e-19
    clock_h_2: float = 2e-20
    gate: float = 25.0


@dataclass(frozen=True, eq=False)
class EkfState:
    x: np.ndarray  # (8,)
    P: np.ndarray  # (8, 8)
    rejected: tuple = ()

    def solution(self) -> PvtSolution:
        idx = [0, 1, 2, 6]
        return PvtSolution(
            position_ecef=self.x[:3].copy(),
            clock_bias_m=float(self.x[6]),
            dops=None,
            iterations=1,
            residual_rms=0.0,
            converged=True,
            covariance=self.P[np.ix_(idx, idx)].copy(),
            velocity_ecef=self.x[3:6].copy(),
        )


def ekf_init(position, clock_bias_m=0.0, pos_var=100.0, vel_var=1.0,
             bias_var=100.0, drift_var=1.0, velocity=None) -> EkfState:
    x = np.zeros(8)
    x[:3] = np.asarray(position, dtype=float)
    if velocity is not None:
        x[3:6] = velocity
    x[6] = clock_bias_m
    P = np.diag([pos_var] * 3 + [vel_var] * 3 + [bias_var, drift_var]).astype(float)
    return EkfState(x, P)


def transition(dt: float) -> np.ndarray:
    F = np.eye(8)
    F[0:3, 3:6] = dt * np.eye(3)
    F[6, 7] = dt
    return F


def process_noise(dt: float, cfg: EkfConfig) -> np.ndarray:
    Q = np.zeros((8, 8))
    for axis in range(3):
        p, vel = axis, axis + 3
        Q[p, p] = cfg.q_pos * dt + cfg.q_vel * dt ** 3 / 3.0
        Q[p, vel] = Q[vel, p] = cfg.q_vel * dt ** 2 / 2.0
        Q[vel, vel] = cfg.q_vel * dt
    s_f = SPEED_OF_LIGHT ** 2 * cfg.clock_h0 / 2.0
    s_g = SPEED_OF_LIGHT ** 2 * 2.0 * math.pi ** 2 * cfg.clock_h_2
    Q[6, 6] = s_f * dt + s_g * dt ** 3 / 3.0
    Q[6, 7] = Q[7, 6] = s_g * dt ** 2 / 2.0
    Q[7, 7] = s_g * dt
    return Q


def ekf_step(state: EkfState, obs, sat_positions, dt: float,
             cfg: EkfConfig = EkfConfig()) -> EkfState:
    """Predict over ``dt`` seconds, then apply pseudorange updates one by one.

    Each update uses the Joseph form. A measurement whose normalized
    innovation squared exceeds ``cfg.gate`` is skipped and its ``sat_id``
    listed in ``rejected``; the state is left as predicted for it.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    F = transition(dt)
    x = F @ state.x
    P = F @ state.P @ F.T + process_noise(dt, cfg)
    P = 0.5 * (P + P.T)
    rejected = []
    eye = np.eye(8)
    for o, sat in zip(obs, np.atleast_2d(np.asarray(sat_positions, dtype=float))):
        los = sat - x[:3]
        rho = float(np.linalg.norm(los))
        H = np.zeros(8)
        H[:3] = -los / rho
        H[6] = 1.0
        R = o.sigma ** 2
        innov = o.pseudorange - (rho + x[6])
        S = float(H @ P @ H) + R
        if S <= 0 or innov * innov / S > cfg.gate:
            rejected.append(o.sat_id)
            continue
        K = P @ H / S
        x = x + K * innov
        A = eye - np.outer(K, H)
        P = A @ P @ A.T + R * np.outer(K, K)
        P = 0.5 * (P + P.T)
    return replace(state, x=x, P=P, rejected=tuple(rejected))
