"""Levenberg-Marquardt nonlinear least squares with finite-difference Jacobians."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import NumericalError


@dataclass(frozen=True)
class LMOptions:
    max_iter: int = 100
    lambda_init: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 10.0
    lambda_max: float = 1e16
    step_tol: float = 1e-9
    cost_tol: float = 1e-12
    fd_step: float = 1e-6
    # keeps the Marquardt scaling positive on columns with zero curvature
    diag_floor: float = 1e-12


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    reason: str
    costs: list[float] = field(default_factory=list)


def _check(r: np.ndarray, x: np.ndarray, trace: list) -> np.ndarray:
    if not np.all(np.isfinite(r)):
        raise NumericalError(f"non-finite residuals at x={x.tolist()}", trace)
    return r


def fd_jacobian(fun: Callable, x: np.ndarray, r0: np.ndarray | None = None,
                rel_step: float = 1e-6, vectorized: bool = False) -> np.ndarray:
    """Forward-difference Jacobian with per-coordinate step ``rel_step * max(|x|, 1)``.

    With ``vectorized`` the function must map an ``(k, n)`` batch of points
    to a ``(k, m)`` batch of residuals, and all probes are evaluated in one call.
    """
    x = np.asarray(x, dtype=float)
    h = rel_step * np.maximum(np.abs(x), 1.0)
    probes = x[None, :] + np.diag(h)
    # the difference actually represented in floating point
    h = np.diagonal(probes) - x
    if vectorized:
        if r0 is None:
            batch = fun(np.vstack([x[None, :], probes]))
            r0, rows = batch[0], batch[1:]
        else:
            rows = fun(probes)
    else:
        if r0 is None:
            r0 = np.asarray(fun(x), dtype=float)
        rows = np.array([fun(p) for p in probes], dtype=float)
    return ((rows - r0[None, :]) / h[:, None]).T


def central_jacobian(fun: Callable, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1.0)
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * h))
    return np.array(cols).T


def lm_minimize(fun: Callable, x0, opts: LMOptions | None = None,
                vectorized: bool = False) -> LMResult:
    """Minimise ``0.5 * ||fun(x)||^2`` starting at ``x0``.

    The damped normal equations ``(J^T J + lam * D) dx = -J^T r`` use the
    Marquardt scaling ``D = diag(J^T J)``. Accepted steps divide ``lam`` by
    ``lambda_down``; rejected ones multiply it by ``lambda_up``.

    Stops when the proposed step is shorter than ``step_tol``, an accepted
    step lowers the cost by less than ``cost_tol`` relative, or after
    ``max_iter`` iterations (reported as not converged).

    Raises:
        NumericalError: the residual function returned a non-finite value;
            ``trace`` holds the iterates visited so far.
    """
    opts = opts or LMOptions()
    x = np.array(x0, dtype=float).ravel()
    trace: list = [x.copy()]

    def evaluate(p: np.ndarray) -> np.ndarray:
        r = fun(p[None, :])[0] if vectorized else fun(p)
        return _check(np.asarray(r, dtype=float).ravel(), p, trace)

    r = evaluate(x)
    cost = 0.5 * float(r @ r)
    costs = [cost]
    lam = opts.lambda_init
    if cost == 0.0:
        return LMResult(x, cost, 0, True, "zero residual", costs)

    it = 0
    jac = None
    while it < opts.max_iter:
        if jac is None:
            jac = fd_jacobian(fun, x, r, opts.fd_step, vectorized)
            if not np.all(np.isfinite(jac)):
                raise NumericalError("non-finite Jacobian", trace)
            jtj = jac.T @ jac
            grad = jac.T @ r
            diag = np.maximum(np.diag(jtj), opts.diag_floor)
        try:
            step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jtj + lam * np.diag(diag), -grad, rcond=None)[0]
        if np.linalg.norm(step) < opts.step_tol:
            return LMResult(x, cost, it, True, "step tolerance", costs)
        it += 1
        x_new = x + step
        trace.append(x_new.copy())
        r_new = evaluate(x_new)
        cost_new = 0.5 * float(r_new @ r_new)
        if cost_new < cost:
            decrease = (cost - cost_new) / cost
            x, r, cost = x_new, r_new, cost_new
            costs.append(cost)
            lam = max(lam / opts.lambda_down, 1e-300)
            jac = None
            if cost == 0.0 or decrease < opts.cost_tol:
                return LMResult(x, cost, it, True, "cost tolerance", costs)
        else:
            lam *= opts.lambda_up
            if lam > opts.lambda_max:
                return LMResult(x, cost, it, True, "damping limit", costs)
    return LMResult(x, cost, it, False, "max iterations", costs)
