# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled PGD kernels. Mirrors ``_kernels_py`` step for step."""

import numpy as np

from libc.math cimport sqrt, fabs
from libc.stdlib cimport qsort

BACKEND_NAME = "cython"

cdef enum:
    C_MAX_REGRET = 0
    C_SUM_REGRET = 1
    C_CONSTANT = 0

MAX_REGRET = C_MAX_REGRET
SUM_REGRET = C_SUM_REGRET
CONSTANT = C_CONSTANT
DIMINISHING = 1

cdef double ARMIJO_SIGMA = 1e-4
cdef int DIR_ITERS = 200
cdef double DIR_TOL = 1e-12
cdef double DIR_EPS = 1e-24
cdef double BOUNDARY_TOL = 1e-9


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double da = (<const double*>a)[0]
    cdef double db = (<const double*>b)[0]
    if da < db:
        return 1
    if da > db:
        return -1
    return 0


cdef void _project(const double* v, double* out, double* buf, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double css = 0.0
    cdef double tau = 0.0
    cdef double t
    for k in range(n):
        buf[k] = v[k]
    qsort(buf, n, sizeof(double), _cmp_desc)
    for k in range(n):
        css = css + buf[k]
        t = (css - 1.0) / (k + 1)
        if buf[k] - t > 0:
            tau = t
    for k in range(n):
        t = v[k] - tau
        out[k] = t if t > 0.0 else 0.0


cdef void _tangent(const double* v, const double* z, double* out, double* buf,
                   Py_ssize_t n) noexcept nogil:
    # projection onto {d : sum d = 0, d_k >= 0 where z_k <= BOUNDARY_TOL}
    cdef Py_ssize_t k, nz = 0
    cdef double s = 0.0
    cdef double tau
    cdef int cnt = 0
    for k in range(n):
        if z[k] <= BOUNDARY_TOL:
            buf[nz] = v[k]
            nz += 1
        else:
            s = s + v[k]
            cnt += 1
    tau = s / cnt
    if nz > 0:
        qsort(buf, nz, sizeof(double), _cmp_desc)
        for k in range(nz):
            if buf[k] <= tau:
                break
            s = s + buf[k]
            cnt += 1
            tau = s / cnt
    for k in range(n):
        out[k] = v[k] - tau
        if z[k] <= BOUNDARY_TOL and out[k] < 0.0:
            out[k] = 0.0


def project_simplex(v):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    buf = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] b = buf
    _project(&vv[0], &o[0], &b[0], n)
    return out


def tangent_project(v, z):
    cdef const double[::1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef const double[::1] zz = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t n = vv.shape[0]
    out = np.empty(n)
    buf = np.empty(n)
    cdef double[::1] o = out
    cdef double[::1] b = buf
    _tangent(&vv[0], &zz[0], &o[0], &b[0], n)
    return out


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    cdef double s = 0.0
    for k in range(n):
        s = s + a[k] * b[k]
    return s


cdef inline double _combine(double fr, double fc, int objective) noexcept nogil:
    if objective == C_MAX_REGRET:
        return fr if fr >= fc else fc
    return fr + fc


cdef struct Work:
    # all buffers sized max(m, n) or m + n; see _alloc
    double* u      # R y
    double* w      # x C
    double* xR     # x R
    double* Cy     # C y
    double* g      # hull point, length m + n
    double* d      # direction, length m + n
    double* wt     # piece weights, length m + n
    double* wt2
    double* vd     # V d, length m + n
    double* buf
    double* tmp
    Py_ssize_t* idx   # active pieces: rows then columns


cdef void _regrets(const double[:, ::1] R, const double[:, ::1] C,
                   const double* x, const double* y, double* u, double* w,
                   Py_ssize_t m, Py_ssize_t n, double* fr, double* fc) noexcept nogil:
    cdef Py_ssize_t a, b
    cdef double s, umax, wmax
    cdef double xu = 0.0
    cdef double wy = 0.0
    for a in range(m):
        s = 0.0
        for b in range(n):
            s = s + R[a, b] * y[b]
        u[a] = s
    for b in range(n):
        w[b] = 0.0
    for a in range(m):
        for b in range(n):
            w[b] = w[b] + x[a] * C[a, b]
    umax = u[0]
    for a in range(m):
        if u[a] > umax:
            umax = u[a]
        xu = xu + x[a] * u[a]
    wmax = w[0]
    for b in range(n):
        if w[b] > wmax:
            wmax = w[b]
        wy = wy + w[b] * y[b]
    fr[0] = umax - xu
    fc[0] = wmax - wy


cdef void _hull_point(const double[:, ::1] R, const double[:, ::1] C, Work* ws,
                      Py_ssize_t kr, Py_ssize_t kc, Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    # g = V^T wt for row pieces (-u, R_i - xR) and column pieces (C_j - Cy, -w)
    cdef Py_ssize_t a, b, k
    cdef double sr = 0.0
    cdef double sc = 0.0
    for k in range(kr):
        sr = sr + ws.wt[k]
    for k in range(kc):
        sc = sc + ws.wt[kr + k]
    for a in range(m):
        ws.g[a] = -sr * ws.u[a] - sc * ws.Cy[a]
    for b in range(n):
        ws.g[m + b] = -sr * ws.xR[b] - sc * ws.w[b]
    for k in range(kr):
        for b in range(n):
            ws.g[m + b] = ws.g[m + b] + ws.wt[k] * R[ws.idx[k], b]
    for k in range(kc):
        for a in range(m):
            ws.g[a] = ws.g[a] + ws.wt[kr + k] * C[a, ws.idx[kr + k]]


cdef void _feasible(Work* ws, const double* x, const double* y,
                    Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(m + n):
        ws.tmp[k] = -ws.g[k]
    _tangent(&ws.tmp[0], x, &ws.d[0], ws.buf, m)
    _tangent(&ws.tmp[m], y, &ws.d[m], ws.buf, n)


cdef void _steepest(const double[:, ::1] R, const double[:, ::1] C, Work* ws,
                    const double* x, const double* y, int objective,
                    Py_ssize_t kr, Py_ssize_t kc, Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t a, b, k, i, j, ktot = kr + kc
    cdef double s, norm2, step, delta, t, xr_d, w_d, u_d, cy_d
    if objective == C_SUM_REGRET:
        for k in range(kr):
            ws.wt[k] = 1.0 / kr
        for k in range(kc):
            ws.wt[kr + k] = 1.0 / kc
    else:
        for k in range(ktot):
            ws.wt[k] = 1.0 / ktot
    _hull_point(R, C, ws, kr, kc, m, n)
    _feasible(ws, x, y, m, n)
    if objective == C_SUM_REGRET:
        if kr == 1 and kc == 1:
            return
    elif ktot == 1:
        return
    # squared Frobenius norm of V
    norm2 = 0.0
    u_d = _dot(ws.u, ws.u, m)
    cy_d = _dot(ws.w, ws.w, n)
    for k in range(kr):
        i = ws.idx[k]
        s = u_d
        for b in range(n):
            t = R[i, b] - ws.xR[b]
            s = s + t * t
        norm2 = norm2 + s
    for k in range(kc):
        j = ws.idx[kr + k]
        s = cy_d
        for a in range(m):
            t = C[a, j] - ws.Cy[a]
            s = s + t * t
        norm2 = norm2 + s
    step = 0.5 / norm2
    for _ in range(DIR_ITERS):
        u_d = _dot(ws.u, ws.d, m)
        xr_d = _dot(ws.xR, &ws.d[m], n)
        cy_d = _dot(ws.Cy, ws.d, m)
        w_d = _dot(ws.w, &ws.d[m], n)
        for k in range(kr):
            i = ws.idx[k]
            s = -u_d - xr_d
            for b in range(n):
                s = s + R[i, b] * ws.d[m + b]
            ws.vd[k] = s
        for k in range(kc):
            j = ws.idx[kr + k]
            s = -cy_d - w_d
            for a in range(m):
                s = s + C[a, j] * ws.d[a]
            ws.vd[kr + k] = s
        for k in range(ktot):
            ws.tmp[k] = ws.wt[k] + 2.0 * step * ws.vd[k]
        if objective == C_SUM_REGRET:
            _project(ws.tmp, ws.wt2, ws.buf, kr)
            _project(&ws.tmp[kr], &ws.wt2[kr], ws.buf, kc)
        else:
            _project(ws.tmp, ws.wt2, ws.buf, ktot)
        delta = 0.0
        for k in range(ktot):
            t = fabs(ws.wt2[k] - ws.wt[k])
            if t > delta:
                delta = t
            ws.wt[k] = ws.wt2[k]
        _hull_point(R, C, ws, kr, kc, m, n)
        _feasible(ws, x, y, m, n)
        if delta <= DIR_TOL:
            break


cdef double _direction(const double[:, ::1] R, const double[:, ::1] C, Work* ws,
                       const double* x, const double* y, int objective, double active_tol,
                       Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    # fills ws.d with the steepest feasible direction; returns the objective
    cdef double fr, fc, f, umax, wmax, s
    cdef Py_ssize_t a, b, kr = 0, kc = 0
    cdef bint use_r = True
    cdef bint use_c = True
    _regrets(R, C, x, y, ws.u, ws.w, m, n, &fr, &fc)
    f = _combine(fr, fc, objective)
    for b in range(n):
        ws.xR[b] = 0.0
    for a in range(m):
        s = 0.0
        for b in range(n):
            s = s + C[a, b] * y[b]
            ws.xR[b] = ws.xR[b] + x[a] * R[a, b]
        ws.Cy[a] = s
    if objective == C_MAX_REGRET:
        use_r = fr >= f - active_tol
        use_c = fc >= f - active_tol
    umax = ws.u[0]
    for a in range(m):
        if ws.u[a] > umax:
            umax = ws.u[a]
    wmax = ws.w[0]
    for b in range(n):
        if ws.w[b] > wmax:
            wmax = ws.w[b]
    if use_r:
        for a in range(m):
            if ws.u[a] >= umax - active_tol:
                ws.idx[kr] = a
                kr += 1
    if use_c:
        for b in range(n):
            if ws.w[b] >= wmax - active_tol:
                ws.idx[kr + kc] = b
                kc += 1
    _steepest(R, C, ws, x, y, objective, kr, kc, m, n)
    return f


cdef double _model(const double[:, ::1] R, const double[:, ::1] C, Work* ws,
                   const double* x, const double* y, const double* dx, const double* dy,
                   int objective, Py_ssize_t m, Py_ssize_t n) noexcept nogil:
    # first-order model of the objective at (x + dx, y + dy); uses ws.u, ws.w
    cdef Py_ssize_t a, b
    cdef double s, best, mr, mc
    cdef double xRy = _dot(x, ws.u, m)
    cdef double xCy = _dot(ws.w, y, n)
    cdef double x_Rdy = 0.0
    cdef double dxCy = 0.0
    best = -1e300
    for a in range(m):
        s = 0.0
        for b in range(n):
            s = s + R[a, b] * dy[b]
        x_Rdy = x_Rdy + x[a] * s
        s = ws.u[a] + s
        if s > best:
            best = s
    mr = best - xRy - _dot(dx, ws.u, m) - x_Rdy
    best = -1e300
    for b in range(n):
        s = 0.0
        for a in range(m):
            s = s + dx[a] * C[a, b]
        dxCy = dxCy + s * y[b]
        s = ws.w[b] + s
        if s > best:
            best = s
    mc = best - xCy - dxCy - _dot(ws.w, dy, n)
    return _combine(mr, mc, objective)


cdef class _Workspace:
    cdef object arrays
    cdef Work ws

    def __cinit__(self, Py_ssize_t m, Py_ssize_t n):
        cdef Py_ssize_t big = m + n
        cdef double[::1] v
        cdef Py_ssize_t[::1] iv
        names = ["u", "w", "xR", "Cy", "g", "d", "wt", "wt2", "vd", "buf", "tmp"]
        self.arrays = {nm: np.zeros(big) for nm in names}
        self.arrays["idx"] = np.zeros(big, dtype=np.intp)
        v = self.arrays["u"]; self.ws.u = &v[0]
        v = self.arrays["w"]; self.ws.w = &v[0]
        v = self.arrays["xR"]; self.ws.xR = &v[0]
        v = self.arrays["Cy"]; self.ws.Cy = &v[0]
        v = self.arrays["g"]; self.ws.g = &v[0]
        v = self.arrays["d"]; self.ws.d = &v[0]
        v = self.arrays["wt"]; self.ws.wt = &v[0]
        v = self.arrays["wt2"]; self.ws.wt2 = &v[0]
        v = self.arrays["vd"]; self.ws.vd = &v[0]
        v = self.arrays["buf"]; self.ws.buf = &v[0]
        v = self.arrays["tmp"]; self.ws.tmp = &v[0]
        iv = self.arrays["idx"]; self.ws.idx = &iv[0]


def objective_and_gradient(R, C, x, y, int objective, double active_tol=-1.0):
    """Objective and subgradient; a non-negative ``active_tol`` gives the descent direction."""
    cdef const double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef const double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = Rv.shape[0]
    cdef Py_ssize_t n = Rv.shape[1]
    cdef _Workspace work = _Workspace(m, n)
    cdef Work* ws = &work.ws
    cdef double f, fr, fc
    cdef Py_ssize_t a, b, i = 0, j = 0
    if active_tol >= 0:
        f = _direction(Rv, Cv, ws, &xv[0], &yv[0], objective, active_tol, m, n)
        d = np.array(work.arrays["d"][:m + n])
        return f, d[:m].copy(), d[m:].copy()
    _regrets(Rv, Cv, &xv[0], &yv[0], ws.u, ws.w, m, n, &fr, &fc)
    for a in range(m):
        if ws.u[a] > ws.u[i]:
            i = a
    for b in range(n):
        if ws.w[b] > ws.w[j]:
            j = b
    gx = np.zeros(m)
    gy = np.zeros(n)
    xa = np.asarray(xv)
    ya = np.asarray(yv)
    Ra = np.asarray(Rv)
    Ca = np.asarray(Cv)
    u = np.array(work.arrays["u"][:m])
    w = np.array(work.arrays["w"][:n])
    if objective == C_SUM_REGRET or fr >= fc:
        gx += -u
        gy += Ra[i] - xa @ Ra
    if objective == C_SUM_REGRET or fc > fr:
        gx += Ca[:, j] - Ca @ ya
        gy += -w
    return _combine(fr, fc, objective), gx, gy


def pgd_run(R, C, x0, y0, int objective, int step_rule, double eta, int max_iters,
            double tol, int window, double active_tol, int max_backtracks):
    cdef const double[:, ::1] Rv = np.ascontiguousarray(R, dtype=np.float64)
    cdef const double[:, ::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t m = Rv.shape[0]
    cdef Py_ssize_t n = Rv.shape[1]
    xa = np.array(x0, dtype=np.float64)
    ya = np.array(y0, dtype=np.float64)
    hist_a = np.empty(max_iters + 1)
    cdef double[::1] x = xa
    cdef double[::1] y = ya
    cdef double[::1] hist = hist_a
    cdef double[::1] xn = np.empty(m)
    cdef double[::1] yn = np.empty(n)
    cdef double[::1] tx = np.empty(m)
    cdef double[::1] ty = np.empty(n)
    cdef double[::1] dx = np.empty(m)
    cdef double[::1] dy = np.empty(n)
    cdef double[::1] nu = np.empty(m)
    cdef double[::1] nw = np.empty(n)
    cdef _Workspace work = _Workspace(m, n)
    cdef Work* ws = &work.ws
    cdef double f, fn, fr, fc, step, pred, dn
    cdef bint moved, converged = False
    cdef int it = 0
    cdef int k
    cdef Py_ssize_t a

    with nogil:
        _regrets(Rv, Cv, &x[0], &y[0], ws.u, ws.w, m, n, &fr, &fc)
        f = _combine(fr, fc, objective)
        hist[0] = f
        while it < max_iters:
            if f <= 0.0:
                converged = True
                break
            it += 1
            _direction(Rv, Cv, ws, &x[0], &y[0], objective, active_tol, m, n)
            dn = _dot(ws.d, ws.d, m + n)
            if dn > DIR_EPS:
                if step_rule == C_CONSTANT:
                    step = eta
                else:
                    step = eta / sqrt(<double>it)
                # trial step length is eta (or eta / sqrt(it)) whatever the gradient scale
                step = step / sqrt(dn)
                for k in range(max_backtracks):
                    for a in range(m):
                        tx[a] = x[a] + step * ws.d[a]
                    for a in range(n):
                        ty[a] = y[a] + step * ws.d[m + a]
                    _project(&tx[0], &xn[0], ws.buf, m)
                    _project(&ty[0], &yn[0], ws.buf, n)
                    moved = False
                    for a in range(m):
                        dx[a] = xn[a] - x[a]
                        if dx[a] != 0.0:
                            moved = True
                    for a in range(n):
                        dy[a] = yn[a] - y[a]
                        if dy[a] != 0.0:
                            moved = True
                    if not moved:
                        break
                    pred = _model(Rv, Cv, ws, &x[0], &y[0], &dx[0], &dy[0], objective, m, n) - f
                    if pred < 0.0:
                        _regrets(Rv, Cv, &xn[0], &yn[0], &nu[0], &nw[0], m, n, &fr, &fc)
                        fn = _combine(fr, fc, objective)
                        if fn <= f + ARMIJO_SIGMA * pred:
                            for a in range(m):
                                x[a] = xn[a]
                            for a in range(n):
                                y[a] = yn[a]
                            f = fn
                            break
                    step = step * 0.5
            hist[it] = f
            if it >= window and hist[it - window] - f < tol:
                converged = True
                break
    return xa, ya, f, it, bool(converged), hist_a[:it + 1].copy()
