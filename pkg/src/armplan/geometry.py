"""Scalar geometry kernels: quaternions and segment distance queries.

Everything here works on plain float tuples.  These functions sit in the
innermost loops of collision checking and forward kinematics, where tuple
arithmetic is measurably faster than small numpy arrays.  Quaternions are
(x, y, z, w) with w the scalar part; (0, 0, 0, 1) is the identity.
"""

from __future__ import annotations

import math

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]

IDENTITY_QUAT: Quat = (0.0, 0.0, 0.0, 1.0)


def quat_norm(q: Quat) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def quat_normalize(q: Quat) -> Quat:
    n = quat_norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize zero quaternion")
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def quat_mul(a: Quat, b: Quat) -> Quat:
    """Hamilton product a*b (apply b first, then a)."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def quat_conjugate(q: Quat) -> Quat:
    return (-q[0], -q[1], -q[2], q[3])


def quat_rotate(q: Quat, v: Vec3) -> Vec3:
    """Rotate vector v by unit quaternion q."""
    qx, qy, qz, qw = q
    vx, vy, vz = v
    # t = 2 * cross(q.xyz, v)
    tx = 2.0 * (qy * vz - qz * vy)
    ty = 2.0 * (qz * vx - qx * vz)
    tz = 2.0 * (qx * vy - qy * vx)
    # v' = v + w*t + cross(q.xyz, t)
    return (
        vx + qw * tx + qy * tz - qz * ty,
        vy + qw * ty + qz * tx - qx * tz,
        vz + qw * tz + qx * ty - qy * tx,
    )


def quat_from_axis_angle(axis: Vec3, angle: float) -> Quat:
    half = 0.5 * angle
    s = math.sin(half)
    return (axis[0] * s, axis[1] * s, axis[2] * s, math.cos(half))


def quat_angle(a: Quat, b: Quat) -> float:
    """Geodesic angle between two unit quaternions, in [0, pi].

    Uses the relative quaternion's atan2 form, which stays accurate for
    tiny angles where acos of the dot product loses half the precision.
    """
    r = quat_mul(quat_conjugate(a), b)
    s = math.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    return 2.0 * math.atan2(s, abs(r[3]))


def transform_point(p: Vec3, q: Quat, v: Vec3) -> Vec3:
    """Apply the rigid transform (translation p, rotation q) to point v."""
    r = quat_rotate(q, v)
    return (p[0] + r[0], p[1] + r[1], p[2] + r[2])


def compose_transforms(p1: Vec3, q1: Quat, p2: Vec3, q2: Quat) -> tuple[Vec3, Quat]:
    """Compose rigid transforms: result maps x -> T1(T2(x))."""
    return transform_point(p1, q1, p2), quat_mul(q1, q2)


def vec_dist(a: Vec3, b: Vec3) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    dz = a[2] - b[2]
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def seg_point_dist(a: Vec3, b: Vec3, p: Vec3) -> float:
    """Distance from point p to segment [a, b]."""
    abx = b[0] - a[0]
    aby = b[1] - a[1]
    abz = b[2] - a[2]
    apx = p[0] - a[0]
    apy = p[1] - a[1]
    apz = p[2] - a[2]
    denom = abx * abx + aby * aby + abz * abz
    if denom <= 0.0:
        return math.sqrt(apx * apx + apy * apy + apz * apz)
    t = (apx * abx + apy * aby + apz * abz) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    dx = apx - t * abx
    dy = apy - t * aby
    dz = apz - t * abz
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def seg_seg_dist(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> float:
    """Distance between segments [p1, q1] and [p2, q2].

    Closed-form clamped solution (Ericson, Real-Time Collision Detection,
    sec. 5.1.9); handles degenerate and parallel segments.
    """
    d1 = (q1[0] - p1[0], q1[1] - p1[1], q1[2] - p1[2])
    d2 = (q2[0] - p2[0], q2[1] - p2[1], q2[2] - p2[2])
    r = (p1[0] - p2[0], p1[1] - p2[1], p1[2] - p2[2])
    a = d1[0] * d1[0] + d1[1] * d1[1] + d1[2] * d1[2]
    e = d2[0] * d2[0] + d2[1] * d2[1] + d2[2] * d2[2]
    f = d2[0] * r[0] + d2[1] * r[1] + d2[2] * r[2]

    if a <= 1e-18 and e <= 1e-18:
        return math.sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
    if a <= 1e-18:
        s = 0.0
        t = min(1.0, max(0.0, f / e))
    else:
        c = d1[0] * r[0] + d1[1] * r[1] + d1[2] * r[2]
        if e <= 1e-18:
            t = 0.0
            s = min(1.0, max(0.0, -c / a))
        else:
            b = d1[0] * d2[0] + d1[1] * d2[1] + d1[2] * d2[2]
            denom = a * e - b * b
            if denom > 1e-18:
                s = min(1.0, max(0.0, (b * f - c * e) / denom))
            else:
                s = 0.0
            t = b * s + f
            if t < 0.0:
                t = 0.0
                s = min(1.0, max(0.0, -c / a))
            elif t > e:
                t = 1.0
                s = min(1.0, max(0.0, (b - c) / a))
            else:
                t = t / e
    cx = p1[0] + s * d1[0] - p2[0] - t * d2[0]
    cy = p1[1] + s * d1[1] - p2[1] - t * d2[1]
    cz = p1[2] + s * d1[2] - p2[2] - t * d2[2]
    return math.sqrt(cx * cx + cy * cy + cz * cz)


def point_aabb_dist(p: Vec3, half: Vec3) -> float:
    """Distance from p to the origin-centered box with half-extents ``half``."""
    dx = abs(p[0]) - half[0]
    dy = abs(p[1]) - half[1]
    dz = abs(p[2]) - half[2]
    if dx < 0.0:
        dx = 0.0
    if dy < 0.0:
        dy = 0.0
    if dz < 0.0:
        dz = 0.0
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def _aabb_sqdist_at(a: Vec3, d: Vec3, half: Vec3, t: float) -> float:
    sq = 0.0
    for i in range(3):
        v = abs(a[i] + t * d[i]) - half[i]
        if v > 0.0:
            sq += v * v
    return sq


def seg_aabb_dist(a: Vec3, b: Vec3, half: Vec3) -> float:
    """Distance from segment [a, b] to the origin-centered AABB.

    The squared distance along the segment is piecewise quadratic and convex
    with breakpoints where a coordinate crosses a box face plane, so the
    exact minimum is found by checking each piece's vertex plus all
    breakpoints.  Exact to floating-point precision.
    """
    d = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
    ts = [0.0, 1.0]
    for i in range(3):
        if d[i] != 0.0:
            for face in (half[i], -half[i]):
                t = (face - a[i]) / d[i]
                if 0.0 < t < 1.0:
                    ts.append(t)
    ts.sort()

    best = min(_aabb_sqdist_at(a, d, half, t) for t in ts)
    if best == 0.0:
        return 0.0

    for k in range(len(ts) - 1):
        t0, t1 = ts[k], ts[k + 1]
        if t1 - t0 <= 0.0:
            continue
        tm = 0.5 * (t0 + t1)
        # Active axes on this piece, with the sign of the violated face.
        num = 0.0
        den = 0.0
        for i in range(3):
            pi = a[i] + tm * d[i]
            if pi > half[i]:
                num += d[i] * (a[i] - half[i])
                den += d[i] * d[i]
            elif pi < -half[i]:
                num += d[i] * (a[i] + half[i])
                den += d[i] * d[i]
        if den > 0.0:
            t_star = -num / den
            if t0 < t_star < t1:
                sq = _aabb_sqdist_at(a, d, half, t_star)
                if sq < best:
                    best = sq
    return math.sqrt(best)
