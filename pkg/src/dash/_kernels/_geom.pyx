# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled primitive distance kernels.

Twin of geom_py.py; semantics must stay in lockstep (see
tests/test_kernels.py for the parity suite).
"""

from libc.math cimport sqrt, fabs


cdef double _EPS = 1e-12


cdef inline double _clamp01(double v) nogil:
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


cdef double _point_seg(double px, double py, double pz,
                       double ax, double ay, double az,
                       double bx, double by, double bz) nogil:
    cdef double abx = bx - ax, aby = by - ay, abz = bz - az
    cdef double apx = px - ax, apy = py - ay, apz = pz - az
    cdef double denom = abx * abx + aby * aby + abz * abz
    cdef double t
    if denom < _EPS:
        t = 0.0
    else:
        t = _clamp01((apx * abx + apy * aby + apz * abz) / denom)
    cdef double dx = apx - t * abx
    cdef double dy = apy - t * aby
    cdef double dz = apz - t * abz
    return sqrt(dx * dx + dy * dy + dz * dz)


def point_seg_dist(double px, double py, double pz,
                   double ax, double ay, double az,
                   double bx, double by, double bz):
    """Distance from point p to segment ab."""
    return _point_seg(px, py, pz, ax, ay, az, bx, by, bz)


def seg_seg_dist(double p1x, double p1y, double p1z,
                 double q1x, double q1y, double q1z,
                 double p2x, double p2y, double p2z,
                 double q2x, double q2y, double q2z):
    """Distance between segments p1q1 and p2q2."""
    cdef double d1x = q1x - p1x, d1y = q1y - p1y, d1z = q1z - p1z
    cdef double d2x = q2x - p2x, d2y = q2y - p2y, d2z = q2z - p2z
    cdef double rx = p1x - p2x, ry = p1y - p2y, rz = p1z - p2z
    cdef double a = d1x * d1x + d1y * d1y + d1z * d1z
    cdef double e = d2x * d2x + d2y * d2y + d2z * d2z
    cdef double f = d2x * rx + d2y * ry + d2z * rz
    cdef double s, t, c, b, denom
    if a < _EPS and e < _EPS:
        s = 0.0
        t = 0.0
    elif a < _EPS:
        s = 0.0
        t = _clamp01(f / e)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e < _EPS:
            t = 0.0
            s = _clamp01(-c / a)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom > _EPS:
                s = _clamp01((b * f - c * e) / denom)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = _clamp01(-c / a)
            elif t > 1.0:
                t = 1.0
                s = _clamp01((b - c) / a)
    cdef double c1x = p1x + s * d1x - (p2x + t * d2x)
    cdef double c1y = p1y + s * d1y - (p2y + t * d2y)
    cdef double c1z = p1z + s * d1z - (p2z + t * d2z)
    return sqrt(c1x * c1x + c1y * c1y + c1z * c1z)


cdef double _point_box(double px, double py, double pz,
                       double hx, double hy, double hz) nogil:
    cdef double dx = fabs(px) - hx
    cdef double dy = fabs(py) - hy
    cdef double dz = fabs(pz) - hz
    if dx < 0.0:
        dx = 0.0
    if dy < 0.0:
        dy = 0.0
    if dz < 0.0:
        dz = 0.0
    return sqrt(dx * dx + dy * dy + dz * dz)


def point_box_dist(double px, double py, double pz,
                   double hx, double hy, double hz):
    """Distance from a box-local point to a centered box; 0 inside."""
    return _point_box(px, py, pz, hx, hy, hz)


def seg_box_dist(double ax, double ay, double az,
                 double bx, double by, double bz,
                 double hx, double hy, double hz):
    """Distance from a box-local segment to a centered box (ternary search)."""
    cdef double lo = 0.0, hi = 1.0
    cdef double dx = bx - ax, dy = by - ay, dz = bz - az
    cdef double m1, m2, f1, f2, t
    cdef int i
    for i in range(64):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1 = _point_box(ax + m1 * dx, ay + m1 * dy, az + m1 * dz, hx, hy, hz)
        f2 = _point_box(ax + m2 * dx, ay + m2 * dy, az + m2 * dz, hx, hy, hz)
        if f1 <= f2:
            hi = m2
        else:
            lo = m1
        if f1 < 1e-15 or f2 < 1e-15:
            return 0.0
    t = 0.5 * (lo + hi)
    return _point_box(ax + t * dx, ay + t * dy, az + t * dz, hx, hy, hz)


def box_box_gap(r, t, ha, hb):
    """Separating-axis gap between two boxes; positive means disjoint."""
    cdef double r00 = r[0], r01 = r[1], r02 = r[2]
    cdef double r10 = r[3], r11 = r[4], r12 = r[5]
    cdef double r20 = r[6], r21 = r[7], r22 = r[8]
    cdef double t0 = t[0], t1 = t[1], t2 = t[2]
    cdef double a0 = ha[0], a1 = ha[1], a2 = ha[2]
    cdef double b0 = hb[0], b1 = hb[1], b2 = hb[2]
    cdef double rm[3][3]
    cdef double am[3][3]
    rm[0][0] = r00; rm[0][1] = r01; rm[0][2] = r02
    rm[1][0] = r10; rm[1][1] = r11; rm[1][2] = r12
    rm[2][0] = r20; rm[2][1] = r21; rm[2][2] = r22
    cdef int i, j, i1, i2, j1, j2
    for i in range(3):
        for j in range(3):
            am[i][j] = fabs(rm[i][j])
    cdef double best = -1e30
    cdef double gap, sep, ra, rb, length
    cdef double tv[3]
    tv[0] = t0; tv[1] = t1; tv[2] = t2
    cdef double hav[3]
    hav[0] = a0; hav[1] = a1; hav[2] = a2
    cdef double hbv[3]
    hbv[0] = b0; hbv[1] = b1; hbv[2] = b2

    for i in range(3):
        gap = fabs(tv[i]) - (hav[i] + b0 * am[i][0] + b1 * am[i][1] + b2 * am[i][2])
        if gap > best:
            best = gap
    cdef double tb
    for j in range(3):
        tb = t0 * rm[0][j] + t1 * rm[1][j] + t2 * rm[2][j]
        gap = fabs(tb) - (hbv[j] + a0 * am[0][j] + a1 * am[1][j] + a2 * am[2][j])
        if gap > best:
            best = gap
    for i in range(3):
        i1 = (i + 1) % 3
        i2 = (i + 2) % 3
        for j in range(3):
            j1 = (j + 1) % 3
            j2 = (j + 2) % 3
            sep = fabs(tv[i2] * rm[i1][j] - tv[i1] * rm[i2][j])
            ra = hav[i1] * am[i2][j] + hav[i2] * am[i1][j]
            rb = hbv[j1] * am[i][j2] + hbv[j2] * am[i][j1]
            length = sqrt(max(1.0 - rm[i][j] * rm[i][j], 0.0))
            if length < 1e-6:
                continue
            gap = (sep - (ra + rb)) / length
            if gap > best:
                best = gap
    return best
