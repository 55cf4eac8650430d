"""Pure-Python primitive distance kernels.

Twin of the compiled module in ``_geom.pyx``; keep signatures and
semantics in lockstep (parity is enforced by tests/test_kernels.py).
All inputs are plain sequences of floats, all outputs plain floats,
so the compiled twin can avoid numpy entirely.
"""

import math

_EPS = 1e-12


def point_seg_dist(px, py, pz, ax, ay, az, bx, by, bz):
    """Distance from point p to segment ab."""
    abx, aby, abz = bx - ax, by - ay, bz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    denom = abx * abx + aby * aby + abz * abz
    if denom < _EPS:
        t = 0.0
    else:
        t = (apx * abx + apy * aby + apz * abz) / denom
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    dx = apx - t * abx
    dy = apy - t * aby
    dz = apz - t * abz
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def seg_seg_dist(p1x, p1y, p1z, q1x, q1y, q1z, p2x, p2y, p2z, q2x, q2y, q2z):
    """Distance between segments p1q1 and p2q2 (Ericson, RTCD 5.1.9)."""
    d1x, d1y, d1z = q1x - p1x, q1y - p1y, q1z - p1z
    d2x, d2y, d2z = q2x - p2x, q2y - p2y, q2z - p2z
    rx, ry, rz = p1x - p2x, p1y - p2y, p1z - p2z
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    if a < _EPS and e < _EPS:
        s = t = 0.0
    elif a < _EPS:
        s = 0.0
        t = min(max(f / e, 0.0), 1.0)
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e < _EPS:
            t = 0.0
            s = min(max(-c / a, 0.0), 1.0)
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            if denom > _EPS:
                s = min(max((b * f - c * e) / denom, 0.0), 1.0)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t = 1.0
                s = min(max((b - c) / a, 0.0), 1.0)
    c1x = p1x + s * d1x - (p2x + t * d2x)
    c1y = p1y + s * d1y - (p2y + t * d2y)
    c1z = p1z + s * d1z - (p2z + t * d2z)
    return math.sqrt(c1x * c1x + c1y * c1y + c1z * c1z)


def point_box_dist(px, py, pz, hx, hy, hz):
    """Distance from a point (box-local frame) to a centered box; 0 inside."""
    dx = abs(px) - hx
    dy = abs(py) - hy
    dz = abs(pz) - hz
    if dx < 0.0:
        dx = 0.0
    if dy < 0.0:
        dy = 0.0
    if dz < 0.0:
        dz = 0.0
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def seg_box_dist(ax, ay, az, bx, by, bz, hx, hy, hz):
    """Distance from segment ab (box-local frame) to a centered box.

    dist(p(t), box) is convex in t, so a ternary search over [0, 1]
    converges to the global minimum.
    """
    lo, hi = 0.0, 1.0
    dx, dy, dz = bx - ax, by - ay, bz - az
    for _ in range(64):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1 = point_box_dist(ax + m1 * dx, ay + m1 * dy, az + m1 * dz, hx, hy, hz)
        f2 = point_box_dist(ax + m2 * dx, ay + m2 * dy, az + m2 * dz, hx, hy, hz)
        if f1 <= f2:
            hi = m2
        else:
            lo = m1
        if f1 < 1e-15 or f2 < 1e-15:
            return 0.0
    t = 0.5 * (lo + hi)
    return point_box_dist(ax + t * dx, ay + t * dy, az + t * dz, hx, hy, hz)


def box_box_gap(r, t, ha, hb):
    """Separating-axis gap between two boxes.

    ``r`` is the 9-element row-major rotation of box B in box A's frame,
    ``t`` the 3-element center of B in A's frame, ``ha``/``hb`` the half
    extents. Returns the largest separation over the 15 SAT axes:
    positive means disjoint (a lower bound on the true distance),
    non-positive means overlap.
    """
    r00, r01, r02, r10, r11, r12, r20, r21, r22 = r
    a0, a1, a2 = ha
    b0, b1, b2 = hb
    t0, t1, t2 = t
    best = -1e30

    # A's face axes
    faces_a = (
        (abs(t0), a0, b0 * abs(r00) + b1 * abs(r01) + b2 * abs(r02)),
        (abs(t1), a1, b0 * abs(r10) + b1 * abs(r11) + b2 * abs(r12)),
        (abs(t2), a2, b0 * abs(r20) + b1 * abs(r21) + b2 * abs(r22)),
    )
    for sep, ra, rb in faces_a:
        gap = sep - (ra + rb)
        if gap > best:
            best = gap
    # B's face axes
    tb0 = t0 * r00 + t1 * r10 + t2 * r20
    tb1 = t0 * r01 + t1 * r11 + t2 * r21
    tb2 = t0 * r02 + t1 * r12 + t2 * r22
    faces_b = (
        (abs(tb0), a0 * abs(r00) + a1 * abs(r10) + a2 * abs(r20), b0),
        (abs(tb1), a0 * abs(r01) + a1 * abs(r11) + a2 * abs(r21), b1),
        (abs(tb2), a0 * abs(r02) + a1 * abs(r12) + a2 * abs(r22), b2),
    )
    for sep, ra, rb in faces_b:
        gap = sep - (ra + rb)
        if gap > best:
            best = gap
    # cross-product axes A_i x B_j; gaps normalized by axis length;
    # near-parallel axis pairs are skipped (covered by the face axes)
    rm = ((r00, r01, r02), (r10, r11, r12), (r20, r21, r22))
    am = ((abs(r00), abs(r01), abs(r02)),
          (abs(r10), abs(r11), abs(r12)),
          (abs(r20), abs(r21), abs(r22)))
    tv = (t0, t1, t2)
    hav = (a0, a1, a2)
    hbv = (b0, b1, b2)
    for i in range(3):
        i1 = (i + 1) % 3
        i2 = (i + 2) % 3
        for j in range(3):
            j1 = (j + 1) % 3
            j2 = (j + 2) % 3
            # axis = A_i x B_j expressed via rotation entries
            sep = abs(tv[i2] * rm[i1][j] - tv[i1] * rm[i2][j])
            ra = hav[i1] * am[i2][j] + hav[i2] * am[i1][j]
            rb = hbv[j1] * am[i][j2] + hbv[j2] * am[i][j1]
            # axis length for normalization
            length = math.sqrt(max(1.0 - rm[i][j] * rm[i][j], 0.0))
            if length < 1e-6:
                continue
            gap = (sep - (ra + rb)) / length
            if gap > best:
                best = gap
    return best
