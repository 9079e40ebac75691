"""Pure-Python/numpy implementation of the PGD kernels.

Same contract as the compiled ``_kernels`` extension; used when the extension
is not built or when ``ALTNASH_PURE_PYTHON`` is set.

Each regret is a max of pieces, one per pure best response. The descent
direction is the steepest feasible direction for the max over all pieces
within ``active_tol`` of their maximum: it minimizes the norm of the
tangent-cone projection of the negated hull point. With a single active
piece this is the projected negative gradient.
"""

import math

import numpy as np

BACKEND_NAME = "python"

MAX_REGRET = 0
SUM_REGRET = 1
CONSTANT = 0
DIMINISHING = 1

ARMIJO_SIGMA = 1e-4
DIR_ITERS = 200
DIR_TOL = 1e-12
DIR_EPS = 1e-24
# coordinates at or below this count as on the simplex boundary; projection
# leaves rounding residue such as 1e-17 where an exact zero is meant
BOUNDARY_TOL = 1e-9


def project_simplex(v):
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, n + 1)
    thresh = (css - 1.0) / k
    rho = int(np.nonzero(u - thresh > 0)[0][-1])
    tau = thresh[rho]
    return np.maximum(v - tau, 0.0)


def _regrets(R, C, x, y):
    u = R @ y
    w = x @ C
    return u.max() - x @ u, w.max() - w @ y, u, w


def _combine(fr, fc, objective):
    return max(fr, fc) if objective == MAX_REGRET else fr + fc


def _pieces(R, C, x, y, u, w, idx_r, idx_c):
    """Gradients (stacked ``[gx, gy]``) of the selected row and column pieces."""
    xR = x @ R
    Cy = C @ y
    m, n = R.shape
    VR = np.empty((len(idx_r), m + n))
    for k, i in enumerate(idx_r):
        VR[k, :m] = -u
        VR[k, m:] = R[i] - xR
    VC = np.empty((len(idx_c), m + n))
    for k, j in enumerate(idx_c):
        VC[k, :m] = C[:, j] - Cy
        VC[k, m:] = -w
    return VR, VC


def subgradient(R, C, x, y, objective):
    """Subgradient with lowest-index tie-breaking for branch and best responses."""
    fr, fc, u, w = _regrets(R, C, x, y)
    VR, VC = _pieces(R, C, x, y, u, w, [int(np.argmax(u))], [int(np.argmax(w))])
    if objective == SUM_REGRET:
        g = VR[0] + VC[0]
    else:
        g = VR[0] if fr >= fc else VC[0]
    return _combine(fr, fc, objective), g


def tangent_project(v, z):
    """Project ``v`` onto the tangent cone of the simplex at ``z``.

    The cone is ``{d : sum(d) = 0, d_k >= 0 where z_k = 0}``, with
    ``z_k <= BOUNDARY_TOL`` treated as zero.
    """
    zero = z <= BOUNDARY_TOL
    free = ~zero
    s = float(v[free].sum())
    cnt = int(free.sum())
    tau = s / cnt
    for val in np.sort(v[zero])[::-1]:
        if val <= tau:
            break
        s += val
        cnt += 1
        tau = s / cnt
    d = v - tau
    d[zero] = np.maximum(d[zero], 0.0)
    return d


def _feasible_direction(g, x, y, m):
    return np.concatenate((tangent_project(-g[:m], x), tangent_project(-g[m:], y)))


def _project_groups(w, groups):
    out = np.empty_like(w)
    for lo, hi in groups:
        out[lo:hi] = project_simplex(w[lo:hi])
    return out


def _steepest_direction(V, groups, x, y, m):
    """Steepest feasible descent direction for the max of the pieces in ``V``.

    Minimizes ``|P_T(-V^T w)|^2`` over weights ``w`` (one simplex per group)
    by projected gradient; the returned direction is ``P_T(-V^T w)``.
    """
    w = np.zeros(V.shape[0])
    for lo, hi in groups:
        w[lo:hi] = 1.0 / (hi - lo)
    d = _feasible_direction(V.T @ w, x, y, m)
    if all(hi - lo == 1 for lo, hi in groups):
        return d
    step = 0.5 / float((V * V).sum())
    for _ in range(DIR_ITERS):
        wn = _project_groups(w + 2.0 * step * (V @ d), groups)
        delta = float(np.abs(wn - w).max())
        w = wn
        d = _feasible_direction(V.T @ w, x, y, m)
        if delta <= DIR_TOL:
            break
    return d


def descent_direction(R, C, x, y, objective, active_tol):
    """Objective value and feasible descent direction ``(dx, dy)`` at ``(x, y)``."""
    m = R.shape[0]
    fr, fc, u, w = _regrets(R, C, x, y)
    f = _combine(fr, fc, objective)
    idx_r = np.nonzero(u >= u.max() - active_tol)[0]
    idx_c = np.nonzero(w >= w.max() - active_tol)[0]
    if objective == MAX_REGRET:
        if fr < f - active_tol:
            idx_r = idx_r[:0]
        if fc < f - active_tol:
            idx_c = idx_c[:0]
    VR, VC = _pieces(R, C, x, y, u, w, idx_r, idx_c)
    kr, kc = len(idx_r), len(idx_c)
    if objective == SUM_REGRET:
        groups = [(0, kr), (kr, kr + kc)]
    else:
        groups = [(0, kr + kc)]
    d = _steepest_direction(np.vstack((VR, VC)), groups, x, y, m)
    return f, d[:m].copy(), d[m:].copy()


def objective_and_gradient(R, C, x, y, objective, active_tol=-1.0):
    """Objective and subgradient ``(gx, gy)``.

    A non-negative ``active_tol`` returns the feasible descent direction
    ``(dx, dy)`` used by ``pgd_run`` instead (note the sign: it points downhill).
    """
    R = np.ascontiguousarray(R, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m = R.shape[0]
    if active_tol < 0:
        f, g = subgradient(R, C, x, y, objective)
        return f, g[:m].copy(), g[m:].copy()
    return descent_direction(R, C, x, y, objective, active_tol)


def _model(R, C, x, y, u, w, fr, fc, dx, dy, objective):
    """First-order model of the objective at ``(x + dx, y + dy)``."""
    xRy = x @ u
    xCy = w @ y
    mr = (u + R @ dy).max() - xRy - dx @ u - x @ (R @ dy)
    mc = (w + dx @ C).max() - xCy - (dx @ C) @ y - w @ dy
    return _combine(mr, mc, objective)


def pgd_run(R, C, x0, y0, objective, step_rule, eta, max_iters, tol, window,
            active_tol, max_backtracks):
    """Projected descent with Armijo backtracking on the first-order model.

    Returns ``(x, y, value, iterations, converged, history)`` where ``history``
    holds the objective after every iteration (index 0 is the start).
    """
    R = np.ascontiguousarray(R, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    x = np.array(x0, dtype=np.float64)
    y = np.array(y0, dtype=np.float64)
    fr, fc, u, w = _regrets(R, C, x, y)
    f = _combine(fr, fc, objective)
    hist = [f]
    converged = False
    it = 0
    while it < max_iters:
        if f <= 0.0:
            converged = True
            break
        it += 1
        _, px, py = descent_direction(R, C, x, y, objective, active_tol)
        dn = px @ px + py @ py
        if dn > DIR_EPS:
            # the trial step has length eta (or eta / sqrt(it)) whatever the gradient scale
            step = eta if step_rule == CONSTANT else eta / math.sqrt(it)
            step /= math.sqrt(dn)
            for _ in range(max_backtracks):
                xn = project_simplex(x + step * px)
                yn = project_simplex(y + step * py)
                dx = xn - x
                dy = yn - y
                if not (dx.any() or dy.any()):
                    break
                pred = _model(R, C, x, y, u, w, fr, fc, dx, dy, objective) - f
                if pred < 0.0:
                    nfr, nfc, nu, nw = _regrets(R, C, xn, yn)
                    fn = _combine(nfr, nfc, objective)
                    if fn <= f + ARMIJO_SIGMA * pred:
                        x, y, f = xn, yn, fn
                        fr, fc, u, w = nfr, nfc, nu, nw
                        break
                step *= 0.5
        hist.append(f)
        if it >= window and hist[it - window] - f < tol:
            converged = True
            break
    return x, y, f, it, converged, np.array(hist)
