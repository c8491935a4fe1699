//! Sphere mapping: cell classification, link intersections, volume fractions
//! and lattice-aligned normals.

use std::ops::Range;

use crate::error::GeometryError;
use crate::lattice::{D3Q19, Q};
use crate::Vec3;

/// Default recursion depth of [`solid_fraction`].
pub const SUPERSAMPLING_DEPTH: u32 = 4;

/// Lower clamp applied to link fractions before they enter interpolation coefficients.
pub const DELTA_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub diameter: f64,
}

impl Sphere {
    pub fn new(center: Vec3, diameter: f64) -> Self {
        assert!(diameter > 0.0, "sphere diameter must be positive");
        Self { center, diameter }
    }

    #[inline]
    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn volume(&self) -> f64 {
        std::f64::consts::PI / 6.0 * self.diameter.powi(3)
    }

    /// Strict interior test; points on the surface are outside.
    #[inline]
    pub fn contains(&self, p: &Vec3) -> bool {
        let r = self.radius();
        (p - self.center).norm_squared() < r * r
    }

    /// Cell index ranges (clamped to the grid) covering the sphere plus `pad` cells.
    pub fn cell_range(&self, dims: [usize; 3], pad: usize) -> [Range<usize>; 3] {
        let r = self.radius();
        std::array::from_fn(|a| {
            let lo = (self.center[a] - r - 0.5).floor() as i64 - pad as i64;
            let hi = (self.center[a] + r - 0.5).ceil() as i64 + 1 + pad as i64;
            let lo = lo.clamp(0, dims[a] as i64) as usize;
            let hi = hi.clamp(0, dims[a] as i64) as usize;
            lo..hi
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Fluid,
    /// Fluid with at least one link ending in a solid cell.
    FluidBoundary,
    Solid,
}

/// Center of cell `(i, j, k)`.
#[inline]
pub fn cell_center(i: usize, j: usize, k: usize) -> Vec3 {
    Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5)
}

/// Classifies every cell of a non-periodic grid of `dims` cells.
pub fn classify_cells(sphere: &Sphere, dims: [usize; 3]) -> Vec<CellClass> {
    let [nx, ny, nz] = dims;
    let idx = |i: usize, j: usize, k: usize| i + nx * (j + ny * k);
    let mut out = vec![CellClass::Fluid; nx * ny * nz];
    let [rx, ry, rz] = sphere.cell_range(dims, 0);
    for k in rz {
        for j in ry.clone() {
            for i in rx.clone() {
                if sphere.contains(&cell_center(i, j, k)) {
                    out[idx(i, j, k)] = CellClass::Solid;
                }
            }
        }
    }
    let [rx, ry, rz] = sphere.cell_range(dims, 1);
    for k in rz {
        for j in ry.clone() {
            for i in rx.clone() {
                if out[idx(i, j, k)] == CellClass::Solid {
                    continue;
                }
                let touches = (1..Q).any(|q| {
                    let c = D3Q19::C[q];
                    let (x, y, z) = (i as i64 + c[0] as i64, j as i64 + c[1] as i64, k as i64 + c[2] as i64);
                    x >= 0
                        && y >= 0
                        && z >= 0
                        && (x as usize) < nx
                        && (y as usize) < ny
                        && (z as usize) < nz
                        && out[idx(x as usize, y as usize, z as usize)] == CellClass::Solid
                });
                if touches {
                    out[idx(i, j, k)] = CellClass::FluidBoundary;
                }
            }
        }
    }
    out
}

/// Fraction `delta` of the link `x -> x + c_q` at which it crosses the sphere surface.
///
/// Uses the smaller root of the ray-sphere quadratic, computed in the
/// cancellation-free form.
pub fn ray_sphere_delta(x: &Vec3, q: usize, sphere: &Sphere) -> Result<f64, GeometryError> {
    let no_hit = || GeometryError::NoIntersection {
        origin: [x.x, x.y, x.z],
        direction: D3Q19::C[q],
    };
    let c = D3Q19::c(q);
    let d = x - sphere.center;
    let r = sphere.radius();
    let a = c.norm_squared();
    if a == 0.0 {
        return Err(no_hit());
    }
    let b = 2.0 * c.dot(&d);
    let cc = d.norm_squared() - r * r;
    if cc < 0.0 {
        return Err(no_hit());
    }
    let disc = b * b - 4.0 * a * cc;
    if disc < 0.0 || b >= 0.0 {
        return Err(no_hit());
    }
    let s = -0.5 * (b - disc.sqrt());
    let t1 = s / a;
    let t2 = if s != 0.0 { cc / s } else { t1 };
    let t = t1.min(t2);
    const ROUND_OFF: f64 = 1e-12;
    if !(t >= 0.0 && t <= 1.0 + ROUND_OFF) {
        return Err(no_hit());
    }
    Ok(t.min(1.0))
}

/// Solid volume fraction of the unit cell centered at `center`, by recursive
/// octree supersampling to `max_depth` levels.
pub fn solid_fraction(center: &Vec3, sphere: &Sphere, max_depth: u32) -> f64 {
    let lo = center - Vec3::repeat(0.5);
    cube_fraction(&lo, 1.0, sphere, max_depth)
}

fn cube_fraction(lo: &Vec3, size: f64, sphere: &Sphere, depth: u32) -> f64 {
    let r2 = sphere.radius() * sphere.radius();
    let hi = lo + Vec3::repeat(size);
    let mut gap2 = 0.0;
    for a in 0..3 {
        let p = sphere.center[a];
        let g = if p < lo[a] {
            lo[a] - p
        } else if p > hi[a] {
            p - hi[a]
        } else {
            0.0
        };
        gap2 += g * g;
    }
    if gap2 >= r2 {
        return 0.0;
    }
    let mut inside = 0u32;
    for corner in 0..8 {
        let p = Vec3::new(
            if corner & 1 == 0 { lo.x } else { hi.x },
            if corner & 2 == 0 { lo.y } else { hi.y },
            if corner & 4 == 0 { lo.z } else { hi.z },
        );
        if sphere.contains(&p) {
            inside += 1;
        }
    }
    if inside == 8 {
        return 1.0;
    }
    if depth == 0 {
        let mid = lo + Vec3::repeat(0.5 * size);
        let centre_in = u32::from(sphere.contains(&mid));
        return f64::from(inside + centre_in) / 9.0;
    }
    let h = 0.5 * size;
    let mut sum = 0.0;
    for octant in 0..8 {
        let sub = lo + Vec3::new(
            if octant & 1 == 0 { 0.0 } else { h },
            if octant & 2 == 0 { 0.0 } else { h },
            if octant & 4 == 0 { 0.0 } else { h },
        );
        sum += cube_fraction(&sub, h, sphere, depth - 1);
    }
    sum / 8.0
}

/// Outward unit normal at `x` and the lattice direction maximizing `n . c_q`.
///
/// The maximization uses the raw (unnormalized) lattice vectors, which
/// favors diagonals off the coordinate planes; ties go to the lowest index.
pub fn surface_normal_and_qn(x: &Vec3, sphere: &Sphere) -> Result<(Vec3, usize), GeometryError> {
    let d = x - sphere.center;
    let len = d.norm();
    if !(len > 0.0) {
        return Err(GeometryError::DegenerateNormal);
    }
    let n = d / len;
    let mut best = 1;
    let mut best_dot = f64::NEG_INFINITY;
    for q in 1..Q {
        let v = n.dot(&D3Q19::c(q));
        if v > best_dot + 1e-14 {
            best = q;
            best_dot = v;
        }
    }
    Ok((n, best))
}
