//! Link-wise boundary closures.
//!
//! Closures run after [`FluidField::stream`] and before the buffer swap. They
//! read post-collision values from the current buffer and overwrite the
//! slots of the next buffer that streaming filled from solid or out-of-domain
//! sources. Because streaming never touches the current buffer this is the
//! same update as applying the closures before streaming.

pub mod coefficients;

use crate::field::FluidField;
use crate::lattice::{self, D3Q19, Q};
use crate::Vec3;

pub use coefficients::LinkCoefficients;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoSlipScheme {
    BounceBack,
    Cli,
    MultiReflection,
}

/// A cut link from fluid cell `cell` along `q` into a wall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLink {
    pub cell: usize,
    pub q: usize,
    /// Fluid-side fraction of the link, in `(0, 1]`.
    pub delta: f64,
    /// Wall point at which the velocity is evaluated and the force applied.
    pub point: Vec3,
    pub velocity: Vec3,
}

/// Bounce-back value for a wall moving at `v`.
#[inline]
pub fn bounce_back_value(q: usize, post_q: f64, v: &Vec3) -> f64 {
    post_q - 6.0 * D3Q19::W[q] * v.dot(&D3Q19::c(q))
}

/// Momentum exchanged over one link, with the wall velocity removed from the
/// lattice velocities.
#[inline]
pub fn link_force(q: usize, post_q: f64, new_qbar: f64, v: &Vec3) -> Vec3 {
    let c = D3Q19::c(q);
    c * (post_q + new_qbar) - v * (post_q - new_qbar)
}

/// Inputs of a single link closure.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinkStencil {
    /// `f~_q(x)`
    pub post_q: f64,
    /// `f~_q(x - c_q)`
    pub post_q_up: f64,
    /// `f~_q(x - 2 c_q)`
    pub post_q_up2: f64,
    /// `f~_qbar(x)`
    pub post_qbar: f64,
    /// `f~_qbar(x - c_q)`
    pub post_qbar_up: f64,
    /// Antisymmetric non-equilibrium part at `x` before collision.
    pub noneq_minus: f64,
}

#[inline]
pub fn closure_value(k: &LinkCoefficients, q: usize, s: &LinkStencil, v: &Vec3) -> f64 {
    k.k1 * s.post_q + k.k0 * s.post_q_up + k.km1 * s.post_q_up2 + k.kb1 * s.post_qbar + k.kb2 * s.post_qbar_up
        - k.alpha * 3.0 * D3Q19::W[q] * v.dot(&D3Q19::c(q))
        + k.pc * s.noneq_minus
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ResolvedLink {
    link: BoundaryLink,
    coeffs: LinkCoefficients,
    up: Option<usize>,
    up2: Option<usize>,
}

/// Number of links whose closure was downgraded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FallbackCounts {
    pub mr_to_cli: usize,
    pub to_bounce_back: usize,
}

/// A set of cut links closed with one scheme.
#[derive(Debug, Clone)]
pub struct LinkSet {
    scheme: NoSlipScheme,
    lambda_minus: f64,
    links: Vec<ResolvedLink>,
    noneq: Vec<f64>,
    fallbacks: FallbackCounts,
}

impl LinkSet {
    pub fn new(scheme: NoSlipScheme, lambda_minus: f64) -> Self {
        Self {
            scheme,
            lambda_minus,
            links: Vec::new(),
            noneq: Vec::new(),
            fallbacks: FallbackCounts::default(),
        }
    }

    pub fn scheme(&self) -> NoSlipScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn fallbacks(&self) -> FallbackCounts {
        self.fallbacks
    }

    pub fn links(&self) -> impl Iterator<Item = &BoundaryLink> {
        self.links.iter().map(|l| &l.link)
    }

    /// Replaces the link list, selecting per-link coefficients from the
    /// availability of upstream fluid cells (MR -> CLI -> BB).
    pub fn set_links(&mut self, field: &FluidField, links: impl IntoIterator<Item = BoundaryLink>) {
        self.links.clear();
        self.fallbacks = FallbackCounts::default();
        for link in links {
            let qbar = D3Q19::opposite(link.q);
            let fluid = |c: Option<usize>| c.filter(|&c| field.is_fluid(c));
            let up = fluid(field.neighbor(link.cell, qbar, 1));
            let up2 = fluid(field.neighbor(link.cell, qbar, 2));
            let delta = link.delta.clamp(crate::geometry::DELTA_MIN, 1.0);
            let mut scheme = self.scheme;
            if scheme == NoSlipScheme::MultiReflection && (up.is_none() || up2.is_none()) {
                self.fallbacks.mr_to_cli += 1;
                scheme = NoSlipScheme::Cli;
            }
            if scheme == NoSlipScheme::Cli && up.is_none() {
                self.fallbacks.to_bounce_back += 1;
                scheme = NoSlipScheme::BounceBack;
            }
            let coeffs = match scheme {
                NoSlipScheme::BounceBack => coefficients::BOUNCE_BACK,
                NoSlipScheme::Cli => coefficients::cli(delta),
                NoSlipScheme::MultiReflection => coefficients::mr(delta, self.lambda_minus),
            };
            self.links.push(ResolvedLink { link, coeffs, up, up2 });
        }
        if self.fallbacks != FallbackCounts::default() {
            log::debug!(
                "{:?} closure fallbacks: {} MR->CLI, {} to bounce-back",
                self.scheme,
                self.fallbacks.mr_to_cli,
                self.fallbacks.to_bounce_back
            );
        }
    }

    /// Updates the wall velocity of every link from a velocity field.
    pub fn update_velocities(&mut self, velocity: impl Fn(&Vec3) -> Vec3) {
        for l in &mut self.links {
            l.link.velocity = velocity(&l.link.point);
        }
    }

    /// Records the pre-collision antisymmetric non-equilibrium parts needed by
    /// the MR correction. Call before collision.
    pub fn record_pre_collision(&mut self, field: &FluidField) {
        self.noneq.clear();
        if self.scheme != NoSlipScheme::MultiReflection {
            return;
        }
        for l in &self.links {
            let value = if l.coeffs.pc != 0.0 {
                let (cell, q) = (l.link.cell, l.link.q);
                let qbar = D3Q19::opposite(q);
                let m = field.moments(cell);
                0.5 * (field.pdf(cell, q) - field.pdf(cell, qbar)) - lattice::equilibrium_antisym(q, &m.velocity)
            } else {
                0.0
            };
            self.noneq.push(value);
        }
    }

    /// Applies the closures and returns the total force and the torque about
    /// `origin`, summed in link order.
    pub fn apply(&self, field: &mut FluidField, origin: &Vec3) -> (Vec3, Vec3) {
        let mut force = Vec3::zeros();
        let mut torque = Vec3::zeros();
        for (i, l) in self.links.iter().enumerate() {
            let BoundaryLink { cell, q, point, velocity, .. } = l.link;
            let qbar = D3Q19::opposite(q);
            let mut s = LinkStencil {
                post_q: field.pdf(cell, q),
                post_qbar: field.pdf(cell, qbar),
                ..Default::default()
            };
            if let Some(up) = l.up {
                s.post_q_up = field.pdf(up, q);
                s.post_qbar_up = field.pdf(up, qbar);
            }
            if let Some(up2) = l.up2 {
                s.post_q_up2 = field.pdf(up2, q);
            }
            if let Some(&n) = self.noneq.get(i) {
                s.noneq_minus = n;
            }
            let value = closure_value(&l.coeffs, q, &s, &velocity);
            field.set_next_pdf(cell, qbar, value);
            let f = link_force(q, s.post_q, value, &velocity);
            force += f;
            torque += (point - origin).cross(&f);
        }
        (force, torque)
    }
}

/// Closure of a non-periodic domain face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaceCondition {
    /// Bounce-back from a wall moving tangentially or a velocity inlet.
    Velocity(Vec3),
    /// Pressure outlet at unit density.
    Outflow,
}

/// Conditions on the six faces, indexed `[axis][0 = low, 1 = high]`.
/// Faces of periodic axes are ignored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DomainBoundaries {
    pub faces: [[Option<FaceCondition>; 2]; 3],
}

/// Density of the outflow face.
pub const RHO_OUT: f64 = 1.0;

impl DomainBoundaries {
    pub fn with_face(mut self, axis: usize, high: bool, cond: FaceCondition) -> Self {
        self.faces[axis][usize::from(high)] = Some(cond);
        self
    }

    /// Axes that carry at least one face condition.
    pub fn periodicity(&self) -> [bool; 3] {
        std::array::from_fn(|a| self.faces[a].iter().all(Option::is_none))
    }

    /// Applies all face closures. `force` is the body force density used to
    /// recover the macroscopic velocity from post-collision moments.
    pub fn apply(&self, field: &mut FluidField, force: &Vec3) {
        let dims = field.dims();
        let periodic = field.periodic();
        for axis in 0..3 {
            if periodic[axis] {
                continue;
            }
            for side in 0..2 {
                let Some(cond) = self.faces[axis][side] else { continue };
                let layer = if side == 0 { 0 } else { dims[axis] - 1 };
                let out = if side == 0 { -1 } else { 1 };
                let dirs: Vec<usize> = (1..Q).filter(|&q| D3Q19::C[q][axis] == out).collect();
                let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
                for j in 0..dims[a2] {
                    for i in 0..dims[a1] {
                        let mut c = [0usize; 3];
                        c[axis] = layer;
                        c[a1] = i;
                        c[a2] = j;
                        let cell = field.index(c[0], c[1], c[2]);
                        if !field.is_fluid(cell) {
                            continue;
                        }
                        let u = match cond {
                            FaceCondition::Outflow => post_collision_velocity(field, cell, force),
                            FaceCondition::Velocity(_) => Vec3::zeros(),
                        };
                        for &q in &dirs {
                            if !owns_link(dims, periodic, c, q, axis) {
                                continue;
                            }
                            let post = field.pdf(cell, q);
                            let value = match cond {
                                FaceCondition::Velocity(v) => bounce_back_value(q, post, &v),
                                FaceCondition::Outflow => -post + 2.0 * lattice::equilibrium_sym(q, RHO_OUT, &u),
                            };
                            field.set_next_pdf(cell, D3Q19::opposite(q), value);
                        }
                    }
                }
            }
        }
    }
}

/// `u = sum f~ c - f/2`: collision adds the full force to the momentum.
fn post_collision_velocity(field: &FluidField, cell: usize, force: &Vec3) -> Vec3 {
    field.moments(cell).velocity - force * (0.5 / lattice::RHO0)
}

/// A link leaving through several non-periodic faces belongs to the first such axis.
fn owns_link(dims: [usize; 3], periodic: [bool; 3], c: [usize; 3], q: usize, axis: usize) -> bool {
    for a in 0..axis {
        if periodic[a] {
            continue;
        }
        let t = c[a] as i64 + D3Q19::C[q][a] as i64;
        if t < 0 || t >= dims[a] as i64 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CellFlag;
    use crate::lattice::{CollisionConfig, CollisionOperator, MAGIC_DEFAULT};
    use approx::assert_relative_eq;

    #[test]
    fn bounce_back_examples() {
        assert_eq!(bounce_back_value(1, 0.3, &Vec3::zeros()), 0.3);
        let v = bounce_back_value(1, 1.0 / 18.0, &Vec3::new(0.01, 0.0, 0.0));
        assert_relative_eq!(v, 1.0 / 18.0 - 2.0 * (1.0 / 18.0) * 3.0 * 0.01, epsilon = 1e-16);
        assert_relative_eq!(v, 0.052_222_222_222_222_22, epsilon = 1e-15);
    }

    #[test]
    fn cli_examples() {
        let s = LinkStencil {
            post_q: 0.1,
            ..Default::default()
        };
        assert_eq!(closure_value(&coefficients::cli(0.5), 1, &s, &Vec3::zeros()), 0.1);
        let s = LinkStencil {
            post_q: 0.10,
            post_q_up: 0.12,
            post_qbar: 0.08,
            ..Default::default()
        };
        let v = closure_value(&coefficients::cli(0.25), 1, &s, &Vec3::zeros());
        assert_relative_eq!(v, 0.10 + 0.12 / 3.0 - 0.08 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn cli_equals_bounce_back_bitwise_at_half() {
        let v = Vec3::new(0.013, -0.02, 0.007);
        for q in 1..Q {
            let s = LinkStencil {
                post_q: 0.05 + 0.001 * q as f64,
                post_q_up: 0.3,
                post_qbar: 0.7,
                ..Default::default()
            };
            let a = closure_value(&coefficients::cli(0.5), q, &s, &v);
            assert_eq!(a.to_bits(), bounce_back_value(q, s.post_q, &v).to_bits());
        }
    }

    #[test]
    fn link_force_examples() {
        let w = 1.0 / 18.0;
        let f = link_force(1, w, w, &Vec3::zeros());
        assert_relative_eq!(f.x, 1.0 / 9.0, epsilon = 1e-16);
        assert_eq!((f.y, f.z), (0.0, 0.0));
        let phi = 0.07;
        let f = link_force(1, phi, phi, &D3Q19::c(1));
        assert_relative_eq!(f.x, 2.0 * phi, epsilon = 1e-16);
    }

    fn trt(nu: f64) -> CollisionConfig {
        CollisionConfig::from_viscosity(nu, MAGIC_DEFAULT, CollisionOperator::Trt).unwrap()
    }

    #[test]
    fn resting_wall_keeps_resting_equilibrium() {
        for scheme in [NoSlipScheme::BounceBack, NoSlipScheme::Cli, NoSlipScheme::MultiReflection] {
            let cfg = trt(0.1);
            let mut field = FluidField::new([6, 6, 6], [true; 3]);
            let wall = field.index(3, 3, 3);
            field.set_flag(wall, CellFlag::Solid);
            let mut links = Vec::new();
            for q in 1..Q {
                let cell = field.neighbor(wall, D3Q19::opposite(q), 1).unwrap();
                links.push(BoundaryLink {
                    cell,
                    q,
                    delta: 0.3,
                    point: field.center(cell) + D3Q19::c(q) * 0.3,
                    velocity: Vec3::zeros(),
                });
            }
            let mut set = LinkSet::new(scheme, cfg.lambda_minus);
            set.set_links(&field, links);
            let before = field.clone();
            set.record_pre_collision(&field);
            field.collide(&cfg);
            field.stream();
            let origin = field.center(wall);
            let (force, torque) = set.apply(&mut field, &origin);
            field.swap();
            for cell in 0..field.n_cells() {
                if cell == wall {
                    continue;
                }
                for q in 0..Q {
                    assert!((field.pdf(cell, q) - before.pdf(cell, q)).abs() < 1e-16);
                }
            }
            assert!(force.norm() < 1e-15 && torque.norm() < 1e-15);
        }
    }

    #[test]
    fn velocity_face_with_matching_flow_is_steady() {
        let u = Vec3::new(0.0, 0.0, 0.04);
        let cfg = trt(0.05);
        let bc = DomainBoundaries::default()
            .with_face(2, false, FaceCondition::Velocity(u))
            .with_face(2, true, FaceCondition::Outflow);
        let mut field = FluidField::new([3, 3, 8], bc.periodicity());
        field.fill_equilibrium(1.0, &u);
        let before = field.clone();
        for _ in 0..3 {
            field.collide(&cfg);
            field.stream();
            bc.apply(&mut field, &Vec3::zeros());
            field.swap();
        }
        for (a, b) in field.current_buffer().iter().zip(before.current_buffer()) {
            assert!((a - b).abs() < 1e-14);
        }
        let m = field.moments(field.index(1, 1, 7));
        assert!((m.velocity - u).norm() < 1e-14);
    }

    #[test]
    fn zero_velocity_face_is_resting_wall() {
        let cfg = trt(0.1);
        let bc = DomainBoundaries::default()
            .with_face(1, false, FaceCondition::Velocity(Vec3::zeros()))
            .with_face(1, true, FaceCondition::Velocity(Vec3::zeros()));
        let mut field = FluidField::new([2, 5, 2], bc.periodicity());
        let before = field.clone();
        field.collide(&cfg);
        field.stream();
        bc.apply(&mut field, &Vec3::zeros());
        field.swap();
        for (a, b) in field.current_buffer().iter().zip(before.current_buffer()) {
            assert!((a - b).abs() < 1e-16);
        }
    }

    #[test]
    fn outflow_preserves_resting_and_uniform_flow() {
        let cfg = trt(0.1);
        let bc = DomainBoundaries::default().with_face(2, true, FaceCondition::Outflow).with_face(
            2,
            false,
            FaceCondition::Outflow,
        );
        let mut field = FluidField::new([2, 2, 4], bc.periodicity());
        let before = field.clone();
        field.collide(&cfg);
        field.stream();
        bc.apply(&mut field, &Vec3::zeros());
        field.swap();
        for (a, b) in field.current_buffer().iter().zip(before.current_buffer()) {
            assert!((a - b).abs() < 1e-16);
        }

        // Uniform flow through the top outflow face.
        let u = Vec3::new(0.0, 0.0, 0.05);
        let bc = DomainBoundaries::default()
            .with_face(2, true, FaceCondition::Outflow)
            .with_face(2, false, FaceCondition::Velocity(u));
        let mut field = FluidField::new([2, 2, 6], bc.periodicity());
        field.fill_equilibrium(1.0, &u);
        let top = field.index(0, 0, 5);
        let before = field.cell_pdfs(top);
        field.collide(&cfg);
        field.stream();
        bc.apply(&mut field, &Vec3::zeros());
        field.swap();
        let after = field.cell_pdfs(top);
        for q in 0..Q {
            assert!((after[q] - before[q]).abs() < 1e-10, "q={q}");
        }
    }
}
