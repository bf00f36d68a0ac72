"""Limited-memory BFGS with a strong-Wolfe line search.

Self-contained so the optimizer hyperparameters (history length, Wolfe
constants, termination rule) are fixed and identical on every platform.
The implementation follows the standard two-loop recursion with an
initial Hessian scaling gamma = s.y / y.y, and a bracket/zoom line search
enforcing the strong Wolfe conditions.

Near a minimum of a smooth function, true function differences fall below
double-precision resolution while the gradient is still above tight
tolerances, so the sufficient-decrease test carries a small absolute noise
allowance and a collapsed zoom interval yields the best point seen rather
than an error.  Runs that stop making measurable progress terminate with
``status="stalled"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

FunAndGrad = Callable[[np.ndarray], tuple[float, np.ndarray]]

_F_NOISE = 1e-14  # relative allowance on sufficient decrease


@dataclass
class LbfgsResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    grad_norm: float
    iterations: int
    n_evals: int
    converged: bool
    status: str


class _LineSearchFailure(Exception):
    pass


def _interpolate(a_lo: float, f_lo: float, df_lo: float, a_hi: float, f_hi: float) -> float:
    """Minimizer of the quadratic through (a_lo, f_lo, df_lo) and (a_hi, f_hi),
    safeguarded to the interior of the interval; bisection on degeneracy."""
    denom = 2.0 * (f_hi - f_lo - df_lo * (a_hi - a_lo))
    if denom != 0.0 and np.isfinite(denom):
        a = a_lo - df_lo * (a_hi - a_lo) ** 2 / denom
        lo, hi = (a_lo, a_hi) if a_lo < a_hi else (a_hi, a_lo)
        margin = 0.1 * (hi - lo)
        if lo + margin <= a <= hi - margin:
            return a
    return 0.5 * (a_lo + a_hi)


def _zoom(fg_1d, a_lo, a_hi, f_lo, df_lo, f_hi, f0, df0, c1, c2, f_eps, max_iter=40):
    """Search inside [a_lo, a_hi]; returns (alpha, f, df, wolfe_satisfied)."""
    for _ in range(max_iter):
        if abs(a_hi - a_lo) < 1e-14 * max(1.0, abs(a_lo)):
            break
        a = _interpolate(a_lo, f_lo, df_lo, a_hi, f_hi)
        f_a, df_a = fg_1d(a)
        if f_a > f0 + c1 * a * df0 + f_eps or f_a >= f_lo + f_eps:
            a_hi, f_hi = a, f_a
        else:
            if abs(df_a) <= -c2 * df0:
                return a, f_a, df_a, True
            if df_a * (a_hi - a_lo) >= 0:
                a_hi, f_hi = a_lo, f_lo
            a_lo, f_lo, df_lo = a, f_a, df_a
    if a_lo > 0.0 and f_lo <= f0 + f_eps:
        return a_lo, f_lo, df_lo, False  # best point seen; Wolfe unverifiable
    raise _LineSearchFailure("zoom could not find an acceptable step")


def _wolfe_line_search(fg_1d, f0, df0, c1, c2, f_eps, a_init=1.0, a_max=1e8, max_iter=30):
    """Return (alpha, f, df, wolfe_satisfied) with f <= f0 + noise."""
    if df0 >= 0:
        raise _LineSearchFailure("search direction is not a descent direction")
    a_prev, f_prev, df_prev = 0.0, f0, df0
    a = a_init
    for i in range(max_iter):
        f_a, df_a = fg_1d(a)
        if f_a > f0 + c1 * a * df0 + f_eps or (i > 0 and f_a >= f_prev + f_eps):
            return _zoom(fg_1d, a_prev, a, f_prev, df_prev, f_a, f0, df0, c1, c2, f_eps)
        if abs(df_a) <= -c2 * df0:
            return a, f_a, df_a, True
        if df_a >= 0:
            return _zoom(fg_1d, a, a_prev, f_a, df_a, f_prev, f0, df0, c1, c2, f_eps)
        a_prev, f_prev, df_prev = a, f_a, df_a
        a = min(2.0 * a, a_max)
        if a >= a_max:
            raise _LineSearchFailure("step size exceeded maximum")
    raise _LineSearchFailure("bracketing exceeded iteration budget")


def minimize_lbfgs(
    fun_and_grad: FunAndGrad,
    x0: np.ndarray,
    max_iters: int = 5000,
    grad_tol: float = 1e-8,
    history: int = 10,
    c1: float = 1e-4,
    c2: float = 0.9,
    callback: Callable[[int, np.ndarray, float, float], None] | None = None,
) -> LbfgsResult:
    """Minimize a smooth function given a combined value/gradient callable.

    Terminates successfully when the gradient 2-norm drops below
    ``grad_tol``; line-search breakdown or repeated sub-epsilon steps end
    the run with ``converged=False`` at the best accepted point.
    """
    x = np.array(x0, dtype=float)
    evals = 0

    def fg(z: np.ndarray) -> tuple[float, np.ndarray]:
        nonlocal evals
        evals += 1
        f, g = fun_and_grad(z)
        return float(f), np.asarray(g, dtype=float)

    f, g = fg(x)
    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    rho_hist: list[float] = []
    status = "max_iterations"
    converged = False
    weak_streak = 0
    it = 0

    for it in range(max_iters):
        gnorm = float(np.linalg.norm(g))
        if gnorm < grad_tol:
            converged = True
            status = "gradient_tolerance"
            break

        # two-loop recursion
        q = g.copy()
        alphas = []
        for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if y_hist:
            gamma = (s_hist[-1] @ y_hist[-1]) / (y_hist[-1] @ y_hist[-1])
        else:
            gamma = 1.0 / max(gnorm, 1.0)
        r = gamma * q
        for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
            b = rho * (y @ r)
            r += (a - b) * s
        d = -r

        df0 = float(g @ d)
        if df0 >= 0:  # numerical breakdown: fall back to steepest descent
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()
            d = -g
            df0 = float(g @ d)

        cache: dict[float, tuple[float, np.ndarray]] = {}

        def fg_1d(a: float):
            if a not in cache:
                cache[a] = fg(x + a * d)
            fa, ga = cache[a]
            return fa, float(ga @ d)

        f_eps = _F_NOISE * max(1.0, abs(f))
        try:
            alpha, f_new, _, wolfe_ok = _wolfe_line_search(fg_1d, f, df0, c1, c2, f_eps)
        except _LineSearchFailure as exc:
            status = f"line_search_failed: {exc}"
            break

        weak_streak = 0 if wolfe_ok else weak_streak + 1
        x_new = x + alpha * d
        _, g_new = cache[alpha]
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-14 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > history:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)
        x, f, g = x_new, f_new, g_new
        if callback is not None:
            callback(it, x, f, float(np.linalg.norm(g)))
        if weak_streak >= 3:
            status = "stalled"
            break
    else:
        it = max_iters

    gnorm = float(np.linalg.norm(g))
    if not converged and gnorm < grad_tol:
        converged = True
        status = "gradient_tolerance"
    return LbfgsResult(
        x=x,
        fun=f,
        grad=g,
        grad_norm=gnorm,
        iterations=it,
        n_evals=evals,
        converged=converged,
        status=status,
    )
