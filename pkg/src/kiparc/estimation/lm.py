"""Damped Gauss-Newton (Levenberg-Marquardt) least squares.

Minimizes ``0.5 * ||r(p)||^2`` with a forward-difference Jacobian. A step
is accepted only if it lowers the cost and passes the caller's ``admissible``
predicate, so the recorded cost history is non-increasing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConvergenceError


@dataclass(frozen=True)
class LeastSquaresResult:
    x: np.ndarray
    residuals: np.ndarray
    jacobian: np.ndarray
    cost: float
    iterations: int
    converged: bool
    gradient_norm: float
    history: tuple
    message: str


def jacobian_fd(fun, x, r0, rel_step=1e-6):
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), 1.0)
        xp = x.copy()
        xp[j] += h
        jac[:, j] = (fun(xp) - r0) / h
    return jac


def _gradient_measure(jac, r):
    """Largest cosine between the residual and any Jacobian column (MINPACK gtol)."""
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(jac, axis=0)
    cn[cn == 0] = np.inf
    return float(np.max(np.abs(jac.T @ r) / (cn * rn)))


def levenberg_marquardt(
    fun,
    x0,
    *,
    admissible=None,
    max_iter=200,
    gtol=1e-5,
    ftol=1e-15,
    xtol=1e-12,
    atol=1e-20,
    rel_step=1e-6,
    lam0=1e-3,
    raise_on_failure=True,
):
    """Minimize the squared norm of ``fun(x)``.

    Parameters
    ----------
    fun : callable
        Maps a parameter vector to a residual vector.
    admissible : callable, optional
        ``admissible(x) -> bool``; trial steps failing it are rejected and
        the damping increased.
    gtol : float
        Convergence when every Jacobian column is within this cosine of
        orthogonality to the residual.
    ftol, xtol : float
        Convergence when an accepted step changes both the cost and the
        parameters by less than these relative amounts.
    atol : float
        Convergence when the cost falls below ``atol * len(r)``.

    Raises
    ------
    ConvergenceError
        If ``raise_on_failure`` and no convergence test is met.
    """
    x = np.asarray(x0, dtype=float).copy()
    if admissible is not None and not admissible(x):
        raise ConvergenceError("initial point is not admissible")
    r = np.asarray(fun(x), dtype=float)
    if not np.all(np.isfinite(r)):
        raise ConvergenceError("residuals are not finite at the initial point")
    cost = 0.5 * float(r @ r)
    history = [cost]
    lam = lam0
    jac = jacobian_fd(fun, x, r, rel_step)
    message = "maximum iterations reached"
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        gmeas = _gradient_measure(jac, r)
        if cost <= atol * r.size or gmeas <= gtol:
            converged = True
            message = "gradient below tolerance"
            break
        a = jac.T @ jac
        g = jac.T @ r
        diag = np.maximum(np.diag(a), 1e-30 * max(np.max(np.diag(a)), 1e-300))
        accepted = False
        while lam < 1e20:
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            x_new = x + step
            if admissible is not None and not admissible(x_new):
                lam *= 10.0
                continue
            r_new = np.asarray(fun(x_new), dtype=float)
            cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
            if cost_new < cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            message = "no cost-reducing step found"
            break
        small_step = np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol)
        small_drop = (cost - cost_new) <= ftol * cost
        x, r, cost = x_new, r_new, cost_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        jac = jacobian_fd(fun, x, r, rel_step)
        if small_step and small_drop:
            # numerically stationary: MINPACK also reports this as success
            converged = True
            message = "step and cost change below tolerance"
            break
    gmeas = _gradient_measure(jac, r)
    if not converged and (cost <= atol * r.size or gmeas <= gtol):
        converged = True
    if not converged and raise_on_failure:
        raise ConvergenceError(f"{message} after {it} iterations (gradient measure {gmeas:.3g})")
    return LeastSquaresResult(x, r, jac, cost, it, converged, gmeas, tuple(history), message)


def covariance(jac, residuals, n_params=None):
    """Parameter covariance ``s^2 (J^T J)^-1`` and the condition number of ``J^T J``."""
    a = jac.T @ jac
    cond = float(np.linalg.cond(a))
    n, p = jac.shape
    dof = max(n - (n_params or p), 1)
    s2 = float(residuals @ residuals) / dof
    try:
        cov = s2 * np.linalg.inv(a)
    except np.linalg.LinAlgError:
        cov = np.full((p, p), np.inf)
    return cov, cond
