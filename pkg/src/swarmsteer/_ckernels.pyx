# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled numerical kernels.

Same functions and the same floating-point operation order as
``_kernels_py``; the import-time selector in ``_backend`` prefers this module.
"""
import numpy as np

from libc.math cimport sqrt, exp, log, sin, cos, floor, fabs, INFINITY, NAN, M_PI

from .errors import CollocationError, DomainExitError, FrameDegeneracyError, ProjectionError

cdef double TWO_PI = 2.0 * M_PI
cdef double DEGENERATE_NORM = 1e-12
cdef int PROJECTION_MAXITER = 50


cpdef double wrap_angle(double a):
    cdef double w = a - TWO_PI * floor((a + M_PI) / TWO_PI)
    if w <= -M_PI:
        w += TWO_PI
    return w


# -- frames ------------------------------------------------------------------

cdef inline int _renorm2(double* x) except -1:
    cdef double n = sqrt(x[0] * x[0] + x[1] * x[1])
    if n < DEGENERATE_NORM:
        raise FrameDegeneracyError("tangent vector has near-zero norm")
    x[0] = x[0] / n
    x[1] = x[1] / n
    return 0


def renorm2(double xx, double xy):
    cdef double x[2]
    x[0] = xx
    x[1] = xy
    _renorm2(x)
    return x[0], x[1], -x[1], x[0]


cdef int _renorm3(double* f) except -1:
    # f = x0 x1 x2 y0 y1 y2 z0 z1 z2
    cdef double n = sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2])
    cdef double d, m
    if n < DEGENERATE_NORM:
        raise FrameDegeneracyError("tangent vector has near-zero norm")
    f[0] = f[0] / n
    f[1] = f[1] / n
    f[2] = f[2] / n
    d = f[3] * f[0] + f[4] * f[1] + f[5] * f[2]
    f[3] = f[3] - d * f[0]
    f[4] = f[4] - d * f[1]
    f[5] = f[5] - d * f[2]
    m = sqrt(f[3] * f[3] + f[4] * f[4] + f[5] * f[5])
    if m < DEGENERATE_NORM:
        raise FrameDegeneracyError("normal vector collapsed onto the tangent")
    f[3] = f[3] / m
    f[4] = f[4] / m
    f[5] = f[5] / m
    f[6] = f[1] * f[5] - f[2] * f[4]
    f[7] = f[2] * f[3] - f[0] * f[5]
    f[8] = f[0] * f[4] - f[1] * f[3]
    return 0


def renorm3(double x0, double x1, double x2, double y0, double y1, double y2):
    cdef double f[9]
    f[0] = x0; f[1] = x1; f[2] = x2
    f[3] = y0; f[4] = y1; f[5] = y2
    _renorm3(f)
    return f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8]


def frame2_rk4(double rx, double ry, double xx, double xy, double yx, double yy,
               double nu, double u, double dt):
    cdef double w = nu * u
    cdef double h2 = 0.5 * dt
    cdef double h6
    cdef double ax, ay, bx, by
    cdef double k1rx, k1ry, k1xx, k1xy, k1yx, k1yy
    cdef double k2rx, k2ry, k2xx, k2xy, k2yx, k2yy
    cdef double k3rx, k3ry, k3xx, k3xy, k3yx, k3yy
    cdef double k4rx, k4ry, k4xx, k4xy
    cdef double x[2]

    k1rx = nu * xx
    k1ry = nu * xy
    k1xx = w * yx
    k1xy = w * yy
    k1yx = -w * xx
    k1yy = -w * xy

    ax = xx + h2 * k1xx
    ay = xy + h2 * k1xy
    bx = yx + h2 * k1yx
    by = yy + h2 * k1yy
    k2rx = nu * ax
    k2ry = nu * ay
    k2xx = w * bx
    k2xy = w * by
    k2yx = -w * ax
    k2yy = -w * ay

    ax = xx + h2 * k2xx
    ay = xy + h2 * k2xy
    bx = yx + h2 * k2yx
    by = yy + h2 * k2yy
    k3rx = nu * ax
    k3ry = nu * ay
    k3xx = w * bx
    k3xy = w * by
    k3yx = -w * ax
    k3yy = -w * ay

    ax = xx + dt * k3xx
    ay = xy + dt * k3xy
    bx = yx + dt * k3yx
    by = yy + dt * k3yy
    k4rx = nu * ax
    k4ry = nu * ay
    k4xx = w * bx
    k4xy = w * by

    h6 = dt / 6.0
    rx = rx + h6 * (k1rx + 2.0 * k2rx + 2.0 * k3rx + k4rx)
    ry = ry + h6 * (k1ry + 2.0 * k2ry + 2.0 * k3ry + k4ry)
    x[0] = xx + h6 * (k1xx + 2.0 * k2xx + 2.0 * k3xx + k4xx)
    x[1] = xy + h6 * (k1xy + 2.0 * k2xy + 2.0 * k3xy + k4xy)
    _renorm2(x)
    return rx, ry, x[0], x[1], -x[1], x[0]


cdef inline void _deriv3(const double* f, double nu, double wu, double wv, double* k):
    # f, k: x0..2 y0..2 z0..2 ; k also gets dr in slots 9..11
    cdef int c
    for c in range(3):
        k[9 + c] = nu * f[c]
        k[c] = wu * f[3 + c] + wv * f[6 + c]
        k[3 + c] = -wu * f[c]
        k[6 + c] = -wv * f[c]


def frame3_rk4(s, double nu, double u, double v, double dt):
    cdef double r[3]
    cdef double f[9]
    cdef double t[9]
    cdef double k1[12]
    cdef double k2[12]
    cdef double k3[12]
    cdef double k4[12]
    cdef double wu = nu * u
    cdef double wv = nu * v
    cdef double h2 = 0.5 * dt
    cdef double h6
    cdef int c
    for c in range(3):
        r[c] = s[c]
    for c in range(9):
        f[c] = s[3 + c]

    _deriv3(f, nu, wu, wv, k1)
    for c in range(9):
        t[c] = f[c] + h2 * k1[c]
    _deriv3(t, nu, wu, wv, k2)
    for c in range(9):
        t[c] = f[c] + h2 * k2[c]
    _deriv3(t, nu, wu, wv, k3)
    for c in range(9):
        t[c] = f[c] + dt * k3[c]
    _deriv3(t, nu, wu, wv, k4)

    h6 = dt / 6.0
    for c in range(3):
        r[c] = r[c] + h6 * (k1[9 + c] + 2.0 * k2[9 + c] + 2.0 * k3[9 + c] + k4[9 + c])
    for c in range(6):
        f[c] = f[c] + h6 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
    _renorm3(f)
    return (r[0], r[1], r[2], f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8])


# -- mutual motion camouflage -----------------------------------------------

cpdef double mmc_energy(double rho, double gamma, double delta, double mu):
    return rho * rho * (delta * delta - gamma * gamma) * exp(-2.0 * mu * rho)


cdef inline double _gdot(double rho, double gamma, double delta, double mu):
    return (1.0 / rho - mu) * (delta * delta - gamma * gamma)


cdef int _reduced_rk4(double* st, double delta, double mu, double dt) except -1:
    cdef double rho = st[0]
    cdef double gamma = st[1]
    cdef double h2 = 0.5 * dt
    cdef double a1, b1, a2, b2, a3, b3, a4, b4, r, h6
    if rho <= 0.0:
        raise DomainExitError(f"rho = {rho!r} left the domain rho > 0")
    a1 = gamma
    b1 = _gdot(rho, gamma, delta, mu)
    r = rho + h2 * a1
    if r <= 0.0:
        raise DomainExitError("rho left the domain rho > 0 inside a step")
    a2 = gamma + h2 * b1
    b2 = _gdot(r, a2, delta, mu)
    r = rho + h2 * a2
    if r <= 0.0:
        raise DomainExitError("rho left the domain rho > 0 inside a step")
    a3 = gamma + h2 * b2
    b3 = _gdot(r, a3, delta, mu)
    r = rho + dt * a3
    if r <= 0.0:
        raise DomainExitError("rho left the domain rho > 0 inside a step")
    a4 = gamma + dt * b3
    b4 = _gdot(r, a4, delta, mu)
    h6 = dt / 6.0
    rho = rho + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    gamma = gamma + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    if rho <= 0.0:
        raise DomainExitError(f"rho = {rho!r} left the domain rho > 0")
    st[0] = rho
    st[1] = gamma
    return 0


def mmc_reduced_rk4(double rho, double gamma, double delta, double mu, double dt):
    cdef double st[2]
    st[0] = rho
    st[1] = gamma
    _reduced_rk4(st, delta, mu, dt)
    return st[0], st[1]


cdef int _project(double* st, double delta, double mu, double e0) except -1:
    cdef double rho = st[0]
    cdef double gamma = st[1]
    cdef double e = mmc_energy(rho, gamma, delta, mu)
    cdef double d2, target, ag, g, rest, ridge, c, lo, hi, r, f, fp, step
    cdef bint below
    cdef int it
    if e0 == 0.0 or fabs(e - e0) <= 1e-15 * fabs(e0):
        return 0
    d2 = delta * delta
    target = d2 - e0 * exp(2.0 * mu * rho) / (rho * rho)
    ag = fabs(gamma)
    if target > 0.0 and ag > 1e-6 * delta and fabs(ag - delta) > 1e-6 * delta:
        g = sqrt(target)
        st[1] = g if gamma >= 0.0 else -g
        return 0

    rest = d2 - gamma * gamma
    if rest <= 0.0 or e0 < 0.0:
        raise ProjectionError("energy level unreachable by correcting rho")
    ridge = 1.0 / mu
    c = log(rest) - log(e0)
    if 2.0 * log(ridge) - 2.0 + c < 0.0:
        raise ProjectionError("energy level exceeds the ridge value at this gamma")
    below = rho < ridge
    if below:
        lo = 0.0
        hi = ridge
    else:
        lo = ridge
        hi = INFINITY
    r = rho
    for it in range(PROJECTION_MAXITER):
        f = 2.0 * log(r) - 2.0 * mu * r + c
        if fabs(f) < 1e-14:
            st[0] = r
            return 0
        if (f > 0.0) == below:
            hi = r
        else:
            lo = r
        fp = 2.0 / r - 2.0 * mu
        if fp != 0.0:
            step = r - f / fp
        else:
            step = NAN
        if not (lo < step < hi) or step != step:
            if hi == INFINITY:
                step = 2.0 * r
            else:
                step = 0.5 * (lo + hi)
        if step == r:
            st[0] = r
            return 0
        r = step
    raise ProjectionError(f"projection did not converge in {PROJECTION_MAXITER} iterations")


def mmc_project(double rho, double gamma, double delta, double mu, double e0):
    cdef double st[2]
    st[0] = rho
    st[1] = gamma
    _project(st, delta, mu, e0)
    return st[0], st[1]


def mmc_reduced_integrate(double rho, double gamma, double delta, double mu,
                          double dt, Py_ssize_t n, bint conserve):
    out_arr = np.empty((n + 1, 2))
    cdef double[:, ::1] out = out_arr
    cdef double st[2]
    cdef double e0 = mmc_energy(rho, gamma, delta, mu)
    cdef Py_ssize_t k
    st[0] = rho
    st[1] = gamma
    out[0, 0] = rho
    out[0, 1] = gamma
    for k in range(n):
        _reduced_rk4(st, delta, mu, dt)
        if conserve:
            _project(st, delta, mu, e0)
        out[k + 1, 0] = st[0]
        out[k + 1, 1] = st[1]
    return out_arr


cdef double _mmc_u(const double* s, double nu1, double nu2, double mu,
                   double kd, double ed) except? -1e300:
    cdef double rx = s[0] - s[4]
    cdef double ry = s[1] - s[5]
    cdef double gx = nu1 * s[2] - nu2 * s[6]
    cdef double gy = nu1 * s[3] - nu2 * s[7]
    cdef double rho = sqrt(rx * rx + ry * ry)
    cdef double gamma, lam, u, d2, e
    if rho < 1e-9:
        raise CollocationError("agents are collocated")
    gamma = (rx * gx + ry * gy) / rho
    lam = (rx * -gy + ry * gx) / rho
    u = -mu * lam
    if kd != 0.0:
        d2 = gx * gx + gy * gy
        e = rho * rho * (d2 - gamma * gamma) * exp(-2.0 * mu * rho)
        u = u + kd * lam * gamma * (e - ed)
    return u


def mmc_pair_control(double r1x, double r1y, double x1x, double x1y,
                     double r2x, double r2y, double x2x, double x2y,
                     double nu1, double nu2, double mu, double kd, double ed):
    cdef double s[8]
    s[0] = r1x; s[1] = r1y; s[2] = x1x; s[3] = x1y
    s[4] = r2x; s[5] = r2y; s[6] = x2x; s[7] = x2y
    return _mmc_u(s, nu1, nu2, mu, kd, ed)


cdef int _mmc_rhs(const double* s, double nu1, double nu2, double mu,
                  double kd, double ed, double* k) except -1:
    cdef double u = _mmc_u(s, nu1, nu2, mu, kd, ed)
    k[0] = nu1 * s[2]
    k[1] = nu1 * s[3]
    k[2] = -u * s[3]
    k[3] = u * s[2]
    k[4] = nu2 * s[6]
    k[5] = nu2 * s[7]
    k[6] = -u * s[7]
    k[7] = u * s[6]
    return 0


cdef int _tva_rhs(const double* s, double nu1, double nu2, double mu,
                  double kd, double ed, double* k) except -1:
    cdef double w1 = mu * (s[6] * -s[3] + s[7] * s[2])
    cdef double w2 = mu * (s[2] * -s[7] + s[3] * s[6])
    k[0] = nu1 * s[2]
    k[1] = nu1 * s[3]
    k[2] = -w1 * s[3]
    k[3] = w1 * s[2]
    k[4] = nu2 * s[6]
    k[5] = nu2 * s[7]
    k[6] = -w2 * s[7]
    k[7] = w2 * s[6]
    return 0


ctypedef int (*pair_rhs_t)(const double*, double, double, double, double, double, double*) except -1


cdef int _rk4_8(double* s, double h, pair_rhs_t rhs, double nu1, double nu2,
                double mu, double kd, double ed) except -1:
    cdef double k1[8]
    cdef double k2[8]
    cdef double k3[8]
    cdef double k4[8]
    cdef double t[8]
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    cdef int i
    rhs(s, nu1, nu2, mu, kd, ed, k1)
    for i in range(8):
        t[i] = s[i] + h2 * k1[i]
    rhs(t, nu1, nu2, mu, kd, ed, k2)
    for i in range(8):
        t[i] = s[i] + h2 * k2[i]
    rhs(t, nu1, nu2, mu, kd, ed, k3)
    for i in range(8):
        t[i] = s[i] + h * k3[i]
    rhs(t, nu1, nu2, mu, kd, ed, k4)
    for i in range(8):
        s[i] = s[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    _renorm2(&s[2])
    _renorm2(&s[6])
    return 0


cdef object _pair_integrate(s0, pair_rhs_t rhs, double nu1, double nu2, double mu,
                            double kd, double ed, double dt, Py_ssize_t nsub,
                            Py_ssize_t nout):
    out_arr = np.empty((nout + 1, 8))
    cdef double[:, ::1] out = out_arr
    cdef double s[8]
    cdef double h = dt / nsub
    cdef Py_ssize_t k, j
    cdef int i
    for i in range(8):
        s[i] = s0[i]
        out[0, i] = s[i]
    for k in range(nout):
        for j in range(nsub):
            _rk4_8(s, h, rhs, nu1, nu2, mu, kd, ed)
        for i in range(8):
            out[k + 1, i] = s[i]
    return out_arr


def mmc_pair_integrate(s0, double nu1, double nu2, double mu, double kd, double ed,
                       double dt, Py_ssize_t nsub, Py_ssize_t nout):
    return _pair_integrate(s0, _mmc_rhs, nu1, nu2, mu, kd, ed, dt, nsub, nout)


def tva_pair_integrate(s0, double nu1, double nu2, double mu, double dt,
                       Py_ssize_t nsub, Py_ssize_t nout):
    return _pair_integrate(s0, _tva_rhs, nu1, nu2, mu, 0.0, 0.0, dt, nsub, nout)


# -- two-agent alignment shape system ---------------------------------------

cdef inline void _tva_shape_rhs(double rho, double psi, double phi, double nu1,
                                double nu2, double mu, double* d):
    cdef double sphi = sin(phi)
    d[0] = nu1 * cos(psi) - nu2 * cos(psi - phi)
    d[1] = -mu * sphi - (nu1 * sin(psi) - nu2 * sin(psi - phi)) / rho
    d[2] = -2.0 * mu * sphi


cdef int _tva_shape_rk4(double* st, double nu1, double nu2, double mu, double dt) except -1:
    cdef double rho = st[0]
    cdef double psi = st[1]
    cdef double phi = st[2]
    cdef double h2 = 0.5 * dt
    cdef double h6, r
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    if rho <= 0.0:
        raise CollocationError(f"rho = {rho!r}: agents collocated")
    _tva_shape_rhs(rho, psi, phi, nu1, nu2, mu, k1)
    r = rho + h2 * k1[0]
    if r <= 0.0:
        raise CollocationError("rho crossed zero inside a step")
    _tva_shape_rhs(r, psi + h2 * k1[1], phi + h2 * k1[2], nu1, nu2, mu, k2)
    r = rho + h2 * k2[0]
    if r <= 0.0:
        raise CollocationError("rho crossed zero inside a step")
    _tva_shape_rhs(r, psi + h2 * k2[1], phi + h2 * k2[2], nu1, nu2, mu, k3)
    r = rho + dt * k3[0]
    if r <= 0.0:
        raise CollocationError("rho crossed zero inside a step")
    _tva_shape_rhs(r, psi + dt * k3[1], phi + dt * k3[2], nu1, nu2, mu, k4)
    h6 = dt / 6.0
    rho = rho + h6 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
    psi = psi + h6 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
    phi = phi + h6 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    if rho <= 0.0:
        raise CollocationError(f"rho = {rho!r}: agents collocated")
    st[0] = rho
    st[1] = wrap_angle(psi)
    st[2] = wrap_angle(phi)
    return 0


def tva_shape_rk4(double rho, double psi, double phi, double nu1, double nu2,
                  double mu, double dt):
    cdef double st[3]
    st[0] = rho; st[1] = psi; st[2] = phi
    _tva_shape_rk4(st, nu1, nu2, mu, dt)
    return st[0], st[1], st[2]


def tva_shape_integrate(double rho, double psi, double phi, double nu1, double nu2,
                        double mu, double dt, Py_ssize_t n):
    out_arr = np.empty((n + 1, 3))
    cdef double[:, ::1] out = out_arr
    cdef double st[3]
    cdef Py_ssize_t k
    st[0] = rho; st[1] = psi; st[2] = phi
    out[0, 0] = rho; out[0, 1] = psi; out[0, 2] = phi
    for k in range(n):
        _tva_shape_rk4(st, nu1, nu2, mu, dt)
        out[k + 1, 0] = st[0]
        out[k + 1, 1] = st[1]
        out[k + 1, 2] = st[2]
    return out_arr
