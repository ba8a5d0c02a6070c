//! Minkowski-space linear algebra for the hyperboloid model.
//!
//! Points of hyperbolic space are unit timelike vectors `(x, y, z, t)` with
//! `x² + y² + z² − t² = −1` and `t > 0`. Planar tilings live in the
//! `z = 0` slice, so the same 4×4 machinery serves both dimensions.

use libm::{cosh, fabs, sinh, sqrt};

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const ORIGIN: Vec4 = [0.0, 0.0, 0.0, 1.0];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

const SIGNATURE: [f64; 4] = [1.0, 1.0, 1.0, -1.0];

/// Minkowski inner product with signature (+, +, +, −).
#[inline]
pub fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] - a[3] * b[3]
}

#[inline]
pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

#[inline]
pub fn apply(m: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| m[i][k] * v[k]).sum();
    }
    out
}

/// Image of the origin, i.e. the last column.
#[inline]
pub fn center_of(m: &Mat4) -> Vec4 {
    [m[0][3], m[1][3], m[2][3], m[3][3]]
}

/// Maximum absolute coordinate difference.
#[inline]
pub fn sup_distance(a: &Vec4, b: &Vec4) -> f64 {
    (0..4).map(|i| fabs(a[i] - b[i])).fold(0.0, f64::max)
}

#[inline]
pub fn sup_norm(a: &Vec4) -> f64 {
    a.iter().map(|x| fabs(*x)).fold(0.0, f64::max)
}

/// Reflection in the plane orthogonal to the unit spacelike vector `n`:
/// `x ↦ x − 2⟨x, n⟩ n`.
pub fn reflection(n: &Vec4) -> Mat4 {
    let mut m = IDENTITY;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell -= 2.0 * n[i] * n[j] * SIGNATURE[j];
        }
    }
    m
}

/// Euclidean reflection of the spatial part through the plane with unit
/// normal `w`; fixes the time axis.
pub fn spatial_reflection(w: [f64; 3]) -> Mat4 {
    let mut m = IDENTITY;
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] -= 2.0 * w[i] * w[j];
        }
    }
    m
}

/// Boost along the z axis by hyperbolic distance `s`.
pub fn boost_z(s: f64) -> Mat4 {
    let (c, sh) = (cosh(s), sinh(s));
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, c, sh],
        [0.0, 0.0, sh, c],
    ]
}

/// Outward unit normal of the plane at distance `r` from the origin in the
/// Euclidean direction `u`.
pub fn plane_normal(u: [f64; 3], r: f64) -> Vec4 {
    let c = cosh(r);
    [u[0] * c, u[1] * c, u[2] * c, sinh(r)]
}

/// Point at distance `r` from the origin in direction `u`.
pub fn point_at(u: [f64; 3], r: f64) -> Vec4 {
    let s = sinh(r);
    [u[0] * s, u[1] * s, u[2] * s, cosh(r)]
}

/// A vector Minkowski-orthogonal to `a`, `b` and `c` (not normalised).
pub fn complement(a: &Vec4, b: &Vec4, c: &Vec4) -> Vec4 {
    // Euclidean generalised cross product, then flip the time sign so the
    // result is Minkowski-orthogonal rather than Euclidean-orthogonal.
    let minor = |r: [usize; 3]| {
        let m = |i: usize, j: usize| [a, b, c][i][r[j]];
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
            - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    };
    [minor([1, 2, 3]), -minor([0, 2, 3]), minor([0, 1, 3]), minor([0, 1, 2])]
}

/// Intersection point of three planes given by their normals, on the upper
/// sheet. `None` when the planes do not meet inside hyperbolic space.
pub fn common_point(a: &Vec4, b: &Vec4, c: &Vec4) -> Option<Vec4> {
    let mut p = complement(a, b, c);
    let norm = -dot(&p, &p);
    if norm <= 0.0 {
        return None;
    }
    let sign = if p[3] < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / sqrt(norm);
    for x in p.iter_mut() {
        *x *= scale;
    }
    Some(p)
}

/// Unit spacelike normal orthogonal to `a`, `b` and `c`.
pub fn common_normal(a: &Vec4, b: &Vec4, c: &Vec4) -> Option<Vec4> {
    let mut n = complement(a, b, c);
    let norm = dot(&n, &n);
    if norm <= 0.0 {
        return None;
    }
    let scale = 1.0 / sqrt(norm);
    for x in n.iter_mut() {
        *x *= scale;
    }
    Some(n)
}

/// Poincaré-disk coordinates of a point of the `z = 0` slice.
#[inline]
pub fn to_disk(p: &Vec4) -> [f64; 2] {
    let d = 1.0 + p[3];
    [p[0] / d, p[1] / d]
}
