"""Compiled hot loops.

The composite extragradient inner solver dominates runtime at large round
budgets, so the entropy-geometry/bilinear-operator case is fused into a
single jitted kernel working in log-coordinates.  The generic Python path
in :mod:`visim.inner` stays the reference implementation; tests assert the
two agree.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap if not (args and callable(args[0])) else args[0]


@njit(cache=True)
def _log_softmax(e):
    m = e.max()
    s = 0.0
    for i in range(e.size):
        s += np.exp(e[i] - m)
    return e - m - np.log(s)


@njit(cache=True)
def composite_mp_entropy_bilinear(
    M1, off_x, off_y, la_x, la_y, lv_x, lv_y, gamma, eta, max_iters, movement_tol
):
    """Composite extragradient in log-space for F1(x, y) = (M1 y, -M1^T x).

    ``la_*`` are log-anchor blocks, ``lv_*`` log starting blocks,
    ``off_*`` the constant dual offset added to F1.  Returns the final
    log-coordinates and the iteration count.  Stops early when the KL
    movement between successive iterates drops to ``movement_tol``.
    """
    wa = eta / (1.0 + eta)
    wc = 1.0 / (1.0 + eta)
    s = gamma * eta * wc
    iters = 0
    for t in range(max_iters):
        vx = np.exp(lv_x)
        vy = np.exp(lv_y)
        gx = M1 @ vy + off_x
        gy = -(M1.T @ vx) + off_y
        lh_x = _log_softmax(wa * la_x + wc * lv_x - s * gx)
        lh_y = _log_softmax(wa * la_y + wc * lv_y - s * gy)
        hx = np.exp(lh_x)
        hy = np.exp(lh_y)
        gx = M1 @ hy + off_x
        gy = -(M1.T @ hx) + off_y
        ln_x = _log_softmax(wa * la_x + wc * lv_x - s * gx)
        ln_y = _log_softmax(wa * la_y + wc * lv_y - s * gy)
        lv_x_old = lv_x
        lv_y_old = lv_y
        lv_x = ln_x
        lv_y = ln_y
        iters = t + 1
        # a zero tolerance disables the early stop: the computed KL movement
        # cancels to exactly 0 once coordinates move less than ~sqrt(eps)
        if movement_tol > 0.0:
            move = 0.0
            for i in range(ln_x.size):
                move += np.exp(ln_x[i]) * (ln_x[i] - lv_x_old[i])
            for i in range(ln_y.size):
                move += np.exp(ln_y[i]) * (ln_y[i] - lv_y_old[i])
            if move <= movement_tol:
                break
    return lv_x, lv_y, iters
