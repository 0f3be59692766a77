//! Fixed-size 3-vector arithmetic.

pub type Vec3 = [f64; 3];

#[inline]
pub fn cross(u: Vec3, w: Vec3) -> Vec3 {
    [
        u[1] * w[2] - u[2] * w[1],
        u[2] * w[0] - u[0] * w[2],
        u[0] * w[1] - u[1] * w[0],
    ]
}

#[inline]
pub fn dot(u: Vec3, w: Vec3) -> f64 {
    u[0] * w[0] + u[1] * w[1] + u[2] * w[2]
}

#[inline]
pub fn norm(u: Vec3) -> f64 {
    dot(u, u).sqrt()
}

#[inline]
pub fn add(u: Vec3, w: Vec3) -> Vec3 {
    [u[0] + w[0], u[1] + w[1], u[2] + w[2]]
}

#[inline]
pub fn sub(u: Vec3, w: Vec3) -> Vec3 {
    [u[0] - w[0], u[1] - w[1], u[2] - w[2]]
}

#[inline]
pub fn scale(s: f64, u: Vec3) -> Vec3 {
    [s * u[0], s * u[1], s * u[2]]
}

/// `u + s·w`
#[inline]
pub fn axpy(u: Vec3, s: f64, w: Vec3) -> Vec3 {
    [u[0] + s * w[0], u[1] + s * w[1], u[2] + s * w[2]]
}
