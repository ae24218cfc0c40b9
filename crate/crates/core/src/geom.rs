//! 2D geometry primitives for UV-space work.

use crate::error::{Error, Result};

/// Triangles with |signed area| below this are treated as degenerate.
pub const DEGENERATE_AREA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// A triangle in UV space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle2D {
    pub a: Vec2,
    pub b: Vec2,
    pub c: Vec2,
}

impl Triangle2D {
    pub const fn new(a: Vec2, b: Vec2, c: Vec2) -> Self {
        Triangle2D { a, b, c }
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * cross(self.b - self.a, self.c - self.a)
    }

    pub fn is_degenerate(&self) -> bool {
        self.signed_area().abs() < DEGENERATE_AREA_EPS
    }
}

/// Barycentric weights relative to a triangle; sums to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaryCoords {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BaryCoords {
    /// All weights at least `-eps`, i.e. the point lies inside the
    /// triangle under an inclusive edge rule.
    pub fn is_inside(&self, eps: f64) -> bool {
        self.alpha >= -eps && self.beta >= -eps && self.gamma >= -eps
    }
}

/// Barycentric coordinates of `p` with respect to `tri`.
///
/// Errors on degenerate triangles; callers that rasterize are expected
/// to have filtered those already.
pub fn barycentric(p: Vec2, tri: &Triangle2D) -> Result<BaryCoords> {
    let area2 = cross(tri.b - tri.a, tri.c - tri.a);
    if (0.5 * area2).abs() < DEGENERATE_AREA_EPS {
        return Err(Error::DegenerateTriangle { area: 0.5 * area2 });
    }
    let inv = 1.0 / area2;
    let alpha = cross(tri.b - p, tri.c - p) * inv;
    let beta = cross(tri.c - p, tri.a - p) * inv;
    let gamma = 1.0 - alpha - beta;
    Ok(BaryCoords { alpha, beta, gamma })
}

/// Affine combination of `src_tri`'s vertices with weights `bc`.
pub fn map_source_point(bc: BaryCoords, src_tri: &Triangle2D) -> Vec2 {
    Vec2::new(
        bc.alpha * src_tri.a.x + bc.beta * src_tri.b.x + bc.gamma * src_tri.c.x,
        bc.alpha * src_tri.a.y + bc.beta * src_tri.b.y + bc.gamma * src_tri.c.y,
    )
}
