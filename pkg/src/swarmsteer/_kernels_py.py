"""Pure-Python numerical kernels.

Reference implementation of every hot loop. ``_ckernels.pyx`` mirrors these
functions operation for operation so both backends agree to rounding.
All vectors are passed as scalar components to keep the inner loops free
of array allocation.
"""
import math

import numpy as np

from .errors import CollocationError, DomainExitError, FrameDegeneracyError, ProjectionError

TWO_PI = 2.0 * math.pi
DEGENERATE_NORM = 1e-12
PROJECTION_MAXITER = 50


def wrap_angle(a):
    """Wrap an angle to (-pi, pi]."""
    w = a - TWO_PI * math.floor((a + math.pi) / TWO_PI)
    if w <= -math.pi:
        w += TWO_PI
    return w


# ---------------------------------------------------------------------------
# Natural Frenet frames
# ---------------------------------------------------------------------------

def renorm2(xx, xy):
    n = math.sqrt(xx * xx + xy * xy)
    if n < DEGENERATE_NORM:
        raise FrameDegeneracyError("tangent vector has near-zero norm")
    xx = xx / n
    xy = xy / n
    return xx, xy, -xy, xx


def renorm3(x0, x1, x2, y0, y1, y2):
    n = math.sqrt(x0 * x0 + x1 * x1 + x2 * x2)
    if n < DEGENERATE_NORM:
        raise FrameDegeneracyError("tangent vector has near-zero norm")
    x0 = x0 / n
    x1 = x1 / n
    x2 = x2 / n
    d = y0 * x0 + y1 * x1 + y2 * x2
    y0 = y0 - d * x0
    y1 = y1 - d * x1
    y2 = y2 - d * x2
    m = math.sqrt(y0 * y0 + y1 * y1 + y2 * y2)
    if m < DEGENERATE_NORM:
        raise FrameDegeneracyError("normal vector collapsed onto the tangent")
    y0 = y0 / m
    y1 = y1 / m
    y2 = y2 / m
    z0 = x1 * y2 - x2 * y1
    z1 = x2 * y0 - x0 * y2
    z2 = x0 * y1 - x1 * y0
    return x0, x1, x2, y0, y1, y2, z0, z1, z2


def frame2_rk4(rx, ry, xx, xy, yx, yy, nu, u, dt):
    """One RK4 step of r' = nu x, x' = nu u y, y' = -nu u x, then renormalize."""
    w = nu * u
    h2 = 0.5 * dt

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
    xx = xx + h6 * (k1xx + 2.0 * k2xx + 2.0 * k3xx + k4xx)
    xy = xy + h6 * (k1xy + 2.0 * k2xy + 2.0 * k3xy + k4xy)
    xx, xy, yx, yy = renorm2(xx, xy)
    return rx, ry, xx, xy, yx, yy


def frame3_rk4(s, nu, u, v, dt):
    """RK4 step of the 3D natural Frenet equations.

    ``s`` is (r, x, y, z) flattened to 12 floats; returns the same layout.
    """
    r = [s[0], s[1], s[2]]
    x = [s[3], s[4], s[5]]
    y = [s[6], s[7], s[8]]
    z = [s[9], s[10], s[11]]
    wu = nu * u
    wv = nu * v

    def deriv(x, y, z):
        dr = [nu * x[0], nu * x[1], nu * x[2]]
        dx = [wu * y[0] + wv * z[0], wu * y[1] + wv * z[1], wu * y[2] + wv * z[2]]
        dy = [-wu * x[0], -wu * x[1], -wu * x[2]]
        dz = [-wv * x[0], -wv * x[1], -wv * x[2]]
        return dr, dx, dy, dz

    def shift(a, da, h):
        return [a[0] + h * da[0], a[1] + h * da[1], a[2] + h * da[2]]

    h2 = 0.5 * dt
    k1 = deriv(x, y, z)
    k2 = deriv(shift(x, k1[1], h2), shift(y, k1[2], h2), shift(z, k1[3], h2))
    k3 = deriv(shift(x, k2[1], h2), shift(y, k2[2], h2), shift(z, k2[3], h2))
    k4 = deriv(shift(x, k3[1], dt), shift(y, k3[2], dt), shift(z, k3[3], dt))

    h6 = dt / 6.0
    out = []
    for idx, a in enumerate((r, x, y, z)):
        out.append([a[c] + h6 * (k1[idx][c] + 2.0 * k2[idx][c] + 2.0 * k3[idx][c] + k4[idx][c])
                    for c in range(3)])
    r, x, y = out[0], out[1], out[2]
    f = renorm3(x[0], x[1], x[2], y[0], y[1], y[2])
    return (r[0], r[1], r[2]) + f


# ---------------------------------------------------------------------------
# Mutual motion camouflage
# ---------------------------------------------------------------------------

def mmc_energy(rho, gamma, delta, mu):
    return rho * rho * (delta * delta - gamma * gamma) * math.exp(-2.0 * mu * rho)


def _mmc_reduced_rhs(rho, gamma, delta, mu):
    return gamma, (1.0 / rho - mu) * (delta * delta - gamma * gamma)


def mmc_reduced_rk4(rho, gamma, delta, mu, dt):
    if rho <= 0.0:
        raise DomainExitError(f"rho = {rho!r} left the domain rho > 0")
    h2 = 0.5 * dt
    a1, b1 = _mmc_reduced_rhs(rho, gamma, delta, mu)
    r = rho + h2 * a1
    if r <= 0.0:
        raise DomainExitError("rho left the domain rho > 0 inside a step")
    a2, b2 = _mmc_reduced_rhs(r, gamma + h2 * b1, delta, mu)
    r = rho + h2 * a2
    if r <= 0.0:
        raise DomainExitError("rho left the domain rho > 0 inside a step")
    a3, b3 = _mmc_reduced_rhs(r, gamma + h2 * b2, delta, mu)
    r = rho + dt * a3
    if r <= 0.0:
        raise DomainExitError("rho left the domain rho > 0 inside a step")
    a4, b4 = _mmc_reduced_rhs(r, gamma + dt * b3, delta, mu)
    h6 = dt / 6.0
    rho = rho + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    gamma = gamma + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    if rho <= 0.0:
        raise DomainExitError(f"rho = {rho!r} left the domain rho > 0")
    return rho, gamma


def mmc_project(rho, gamma, delta, mu, e0):
    """Restore E(rho, gamma) = e0 by a one-dimensional correction.

    Rescales gamma at fixed rho when that is well posed; otherwise solves
    for rho at fixed gamma with a safeguarded Newton iteration on
    log E, staying on the current side of the ridge rho = 1/mu.
    """
    e = mmc_energy(rho, gamma, delta, mu)
    if e0 == 0.0 or abs(e - e0) <= 1e-15 * abs(e0):
        return rho, gamma
    d2 = delta * delta
    target = d2 - e0 * math.exp(2.0 * mu * rho) / (rho * rho)
    ag = abs(gamma)
    if target > 0.0 and ag > 1e-6 * delta and abs(ag - delta) > 1e-6 * delta:
        g = math.sqrt(target)
        return rho, (g if gamma >= 0.0 else -g)

    rest = d2 - gamma * gamma
    if rest <= 0.0 or e0 < 0.0:
        raise ProjectionError("energy level unreachable by correcting rho")
    ridge = 1.0 / mu
    c = math.log(rest) - math.log(e0)
    # F(r) = 2 ln r - 2 mu r + c, increasing below the ridge, decreasing above.
    if 2.0 * math.log(ridge) - 2.0 + c < 0.0:
        raise ProjectionError("energy level exceeds the ridge value at this gamma")
    below = rho < ridge
    if below:
        lo, hi = 0.0, ridge
    else:
        lo, hi = ridge, math.inf
    r = rho
    for _ in range(PROJECTION_MAXITER):
        f = 2.0 * math.log(r) - 2.0 * mu * r + c
        if abs(f) < 1e-14:
            return r, gamma
        # shrink the bracket around the root
        if (f > 0.0) == below:
            hi = r
        else:
            lo = r
        fp = 2.0 / r - 2.0 * mu
        step = r - f / fp if fp != 0.0 else math.nan
        if not (lo < step < hi) or step != step:
            if math.isinf(hi):
                step = 2.0 * r
            else:
                step = 0.5 * (lo + hi)
        if step == r:
            return r, gamma
        r = step
    raise ProjectionError(f"projection did not converge in {PROJECTION_MAXITER} iterations")


def mmc_reduced_integrate(rho, gamma, delta, mu, dt, n, conserve):
    out = np.empty((n + 1, 2))
    out[0, 0] = rho
    out[0, 1] = gamma
    e0 = mmc_energy(rho, gamma, delta, mu)
    for k in range(n):
        rho, gamma = mmc_reduced_rk4(rho, gamma, delta, mu, dt)
        if conserve:
            rho, gamma = mmc_project(rho, gamma, delta, mu, e0)
        out[k + 1, 0] = rho
        out[k + 1, 1] = gamma
    return out


def mmc_pair_control(r1x, r1y, x1x, x1y, r2x, r2y, x2x, x2y, nu1, nu2, mu, kd, ed):
    """Common steering u (1/s) of the pair, dissipation included."""
    rx = r1x - r2x
    ry = r1y - r2y
    gx = nu1 * x1x - nu2 * x2x
    gy = nu1 * x1y - nu2 * x2y
    rho = math.sqrt(rx * rx + ry * ry)
    if rho < 1e-9:
        raise CollocationError("agents are collocated")
    gamma = (rx * gx + ry * gy) / rho
    lam = (rx * -gy + ry * gx) / rho
    u = -mu * lam
    if kd != 0.0:
        d2 = gx * gx + gy * gy
        e = rho * rho * (d2 - gamma * gamma) * math.exp(-2.0 * mu * rho)
        u = u + kd * lam * gamma * (e - ed)
    return u


def _mmc_pair_rhs(s, nu1, nu2, mu, kd, ed):
    u = mmc_pair_control(s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], nu1, nu2, mu, kd, ed)
    return (nu1 * s[2], nu1 * s[3], -u * s[3], u * s[2],
            nu2 * s[6], nu2 * s[7], -u * s[7], u * s[6])


def _rk4_8(s, h, rhs, args):
    h2 = 0.5 * h
    k1 = rhs(s, *args)
    k2 = rhs([s[i] + h2 * k1[i] for i in range(8)], *args)
    k3 = rhs([s[i] + h2 * k2[i] for i in range(8)], *args)
    k4 = rhs([s[i] + h * k3[i] for i in range(8)], *args)
    h6 = h / 6.0
    s = [s[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(8)]
    a = renorm2(s[2], s[3])
    b = renorm2(s[6], s[7])
    s[2], s[3] = a[0], a[1]
    s[6], s[7] = b[0], b[1]
    return s


def mmc_pair_integrate(s0, nu1, nu2, mu, kd, ed, dt, nsub, nout):
    """Integrate the full MMC pair with the law evaluated inside every stage.

    ``s0`` is (r1, x1, r2, x2) flattened; output row k is the state at
    time k * dt, each coarse step split into ``nsub`` RK4 substeps.
    """
    out = np.empty((nout + 1, 8))
    s = [float(v) for v in s0]
    out[0] = s
    h = dt / nsub
    args = (nu1, nu2, mu, kd, ed)
    for k in range(nout):
        for _ in range(nsub):
            s = _rk4_8(s, h, _mmc_pair_rhs, args)
        out[k + 1] = s
    return out


# ---------------------------------------------------------------------------
# Topological velocity alignment, two-agent shape system
# ---------------------------------------------------------------------------

def _tva_shape_rhs(rho, psi, phi, nu1, nu2, mu):
    sphi = math.sin(phi)
    d_rho = nu1 * math.cos(psi) - nu2 * math.cos(psi - phi)
    d_psi = -mu * sphi - (nu1 * math.sin(psi) - nu2 * math.sin(psi - phi)) / rho
    d_phi = -2.0 * mu * sphi
    return d_rho, d_psi, d_phi


def tva_shape_rk4(rho, psi, phi, nu1, nu2, mu, dt):
    if rho <= 0.0:
        raise CollocationError(f"rho = {rho!r}: agents collocated")
    h2 = 0.5 * dt
    a1, b1, c1 = _tva_shape_rhs(rho, psi, phi, nu1, nu2, mu)
    r = rho + h2 * a1
    if r <= 0.0:
        raise CollocationError("rho crossed zero inside a step")
    a2, b2, c2 = _tva_shape_rhs(r, psi + h2 * b1, phi + h2 * c1, nu1, nu2, mu)
    r = rho + h2 * a2
    if r <= 0.0:
        raise CollocationError("rho crossed zero inside a step")
    a3, b3, c3 = _tva_shape_rhs(r, psi + h2 * b2, phi + h2 * c2, nu1, nu2, mu)
    r = rho + dt * a3
    if r <= 0.0:
        raise CollocationError("rho crossed zero inside a step")
    a4, b4, c4 = _tva_shape_rhs(r, psi + dt * b3, phi + dt * c3, nu1, nu2, mu)
    h6 = dt / 6.0
    rho = rho + h6 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    psi = psi + h6 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    phi = phi + h6 * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
    if rho <= 0.0:
        raise CollocationError(f"rho = {rho!r}: agents collocated")
    return rho, wrap_angle(psi), wrap_angle(phi)


def tva_shape_integrate(rho, psi, phi, nu1, nu2, mu, dt, n):
    out = np.empty((n + 1, 3))
    out[0, 0] = rho
    out[0, 1] = psi
    out[0, 2] = phi
    for k in range(n):
        rho, psi, phi = tva_shape_rk4(rho, psi, phi, nu1, nu2, mu, dt)
        out[k + 1, 0] = rho
        out[k + 1, 1] = psi
        out[k + 1, 2] = phi
    return out


def _tva_pair_rhs(s, nu1, nu2, mu):
    # u_i nu_i = mu (x_other . y_i); y_i = perp(x_i)
    w1 = mu * (s[6] * -s[3] + s[7] * s[2])
    w2 = mu * (s[2] * -s[7] + s[3] * s[6])
    return (nu1 * s[2], nu1 * s[3], -w1 * s[3], w1 * s[2],
            nu2 * s[6], nu2 * s[7], -w2 * s[7], w2 * s[6])


def tva_pair_integrate(s0, nu1, nu2, mu, dt, nsub, nout):
    out = np.empty((nout + 1, 8))
    s = [float(v) for v in s0]
    out[0] = s
    h = dt / nsub
    args = (nu1, nu2, mu)
    for k in range(nout):
        for _ in range(nsub):
            s = _rk4_8(s, h, _tva_pair_rhs, args)
        out[k + 1] = s
    return out
