//! Partially saturated cells coupling.
//!
//! Each cell blends the BGK operator with a solid collision operator using a
//! weight `B` derived from its solid volume fraction. The solid increments
//! also give the hydrodynamic force.

use crate::boundaries::DomainBoundaries;
use crate::error::SimError;
use crate::field::FluidField;
use crate::geometry::{self, SUPERSAMPLING_DEPTH};
use crate::lattice::{self, CollisionConfig, CollisionOperator, Pdfs, D3Q19, Q};
use crate::mem::Loads;
use crate::rigidbody::BodyState;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolidOperator {
    M1,
    M2,
    M3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weighting {
    B1,
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PsmVariant {
    pub solid_op: SolidOperator,
    pub weight: Weighting,
}

impl PsmVariant {
    pub const M1B1: Self = Self::new(SolidOperator::M1, Weighting::B1);
    pub const M2B2: Self = Self::new(SolidOperator::M2, Weighting::B2);
    pub const M3B2: Self = Self::new(SolidOperator::M3, Weighting::B2);

    pub const fn new(solid_op: SolidOperator, weight: Weighting) -> Self {
        Self { solid_op, weight }
    }

    /// Whether this is one of the three established combinations.
    pub fn is_standard(&self) -> bool {
        [Self::M1B1, Self::M2B2, Self::M3B2].contains(self)
    }
}

/// Collision weight of a cell with solid fraction `eps`.
pub fn weight_b(eps: f64, tau: f64, weight: Weighting) -> f64 {
    match weight {
        Weighting::B1 => eps,
        Weighting::B2 => {
            let t = tau - 0.5;
            eps * t / ((1.0 - eps) + t)
        }
    }
}

/// Solid collision increments `C_q^solid` of one cell.
pub fn solid_collision(f: &Pdfs, rho: f64, u: &Vec3, v_s: &Vec3, tau: f64, op: SolidOperator) -> Pdfs {
    let eq_s = lattice::equilibrium(rho, v_s);
    let mut c = [0.0; Q];
    match op {
        SolidOperator::M1 => {
            let eq_u = lattice::equilibrium(rho, u);
            for q in 0..Q {
                let qb = D3Q19::opposite(q);
                c[q] = (f[qb] - eq_u[qb]) - (f[q] - eq_s[q]);
            }
        }
        SolidOperator::M2 => {
            let eq_u = lattice::equilibrium(rho, u);
            let r = 1.0 - 1.0 / tau;
            for q in 0..Q {
                c[q] = (eq_s[q] - f[q]) + r * (f[q] - eq_u[q]);
            }
        }
        SolidOperator::M3 => {
            for q in 0..Q {
                let qb = D3Q19::opposite(q);
                c[q] = (f[qb] - eq_s[qb]) - (f[q] - eq_s[q]);
            }
        }
    }
    c
}

/// Weighted collision of one cell. Returns the solid increments.
#[inline]
pub fn psm_collide_cell(f: &mut Pdfs, cfg: &CollisionConfig, b: f64, v_s: &Vec3, op: SolidOperator) -> Pdfs {
    let m = lattice::moments(f);
    let feq = lattice::equilibrium(m.rho, &m.velocity);
    let frc = lattice::forcing(&m.velocity, &cfg.force);
    let solid = solid_collision(f, m.rho, &m.velocity, v_s, cfg.tau, op);
    let omega = 1.0 / cfg.tau;
    let fluid = 1.0 - b;
    for q in 0..Q {
        f[q] += fluid * (omega * (feq[q] - f[q])) + b * solid[q] + fluid * frc[q];
    }
    solid
}

/// Macroscopic velocity of a partially covered cell.
pub fn psm_velocity(b: f64, u_pre: &Vec3, force: &Vec3, v_s: &Vec3) -> Vec3 {
    lattice::macroscopic_velocity(u_pre, force) * (1.0 - b) + v_s * b
}

/// A cell touched by the particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveredCell {
    pub cell: usize,
    pub eps: f64,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct PsmCoupling {
    variant: PsmVariant,
    depth: u32,
    cells: Vec<CoveredCell>,
    weight: Vec<f64>,
    previous: Option<(Vec3, Vec3)>,
}

impl PsmCoupling {
    pub fn new(variant: PsmVariant) -> Self {
        if !variant.is_standard() {
            log::warn!("experimental PSM combination {variant:?}");
        }
        Self {
            variant,
            depth: SUPERSAMPLING_DEPTH,
            cells: Vec::new(),
            weight: Vec::new(),
            previous: None,
        }
    }

    pub fn variant(&self) -> PsmVariant {
        self.variant
    }

    /// Cells with a nonzero solid fraction, ascending.
    pub fn covered(&self) -> &[CoveredCell] {
        &self.cells
    }

    /// Collision weight of `cell` (zero away from the particle).
    pub fn weight(&self, cell: usize) -> f64 {
        self.weight.get(cell).copied().unwrap_or(0.0)
    }

    /// Recomputes solid fractions and weights in the sphere's bounding box
    /// inflated by two cells; everything outside is zero.
    pub fn update_fractions(&mut self, field: &FluidField, body: &BodyState, tau: f64) {
        if self.weight.len() != field.n_cells() {
            self.weight = vec![0.0; field.n_cells()];
        }
        for c in &self.cells {
            self.weight[c.cell] = 0.0;
        }
        self.cells.clear();
        let sphere = body.sphere();
        let [rx, ry, rz] = sphere.cell_range(field.dims(), 2);
        for k in rz {
            for j in ry.clone() {
                for i in rx.clone() {
                    let eps = geometry::solid_fraction(&geometry::cell_center(i, j, k), &sphere, self.depth);
                    if eps > 0.0 {
                        let cell = field.index(i, j, k);
                        let b = weight_b(eps, tau, self.variant.weight);
                        self.weight[cell] = b;
                        self.cells.push(CoveredCell { cell, eps, b });
                    }
                }
            }
        }
        self.cells.sort_unstable_by_key(|c| c.cell);
    }

    /// Weighted collision over the whole field. Cells without particle
    /// contribution take the plain BGK path. Returns the force and torque
    /// on the body, summed in cell order.
    pub fn collide(&self, field: &mut FluidField, cfg: &CollisionConfig, body: &BodyState) -> Result<(Vec3, Vec3), usize> {
        debug_assert_eq!(cfg.operator, CollisionOperator::Bgk);
        let op = self.variant.solid_op;
        let mut force = Vec3::zeros();
        let mut torque = Vec3::zeros();
        let weight = &self.weight;
        let dims = field.dims();
        let bad = field.update_cells(|cell, f| {
            let b = weight.get(cell).copied().unwrap_or(0.0);
            if b == 0.0 {
                lattice::collide_bgk(f, cfg);
                return;
            }
            let x = geometry::cell_center(cell % dims[0], (cell / dims[0]) % dims[1], cell / (dims[0] * dims[1]));
            let v_s = body.surface_velocity(&x);
            let solid = psm_collide_cell(f, cfg, b, &v_s, op);
            let mut m = Vec3::zeros();
            for q in 0..Q {
                m -= D3Q19::c(q) * solid[q];
            }
            let fc = m * b;
            force += fc;
            torque += (x - body.position).cross(&fc);
        });
        match bad {
            Some(cell) => Err(cell),
            None => Ok((force, torque)),
        }
    }

    /// One coupled step without subcycling.
    pub fn step(
        &mut self,
        field: &mut FluidField,
        cfg: &CollisionConfig,
        domain: &DomainBoundaries,
        body: &mut BodyState,
        step: u64,
    ) -> Result<Loads, SimError> {
        self.update_fractions(field, body, cfg.tau);
        let (force, torque) = self.collide(field, cfg, body).map_err(|cell| SimError::Instability {
            step,
            cell: field.coords(cell),
        })?;
        field.stream();
        domain.apply(field, &cfg.force);
        field.swap();
        // The body sees the mean load of this and the previous LBM step. With
        // M3 the fluid inside the particle reverses its momentum every step,
        // and the undamped load drives the explicit update unstable.
        let window: Vec<_> = self.previous.into_iter().chain([(force, torque)]).collect();
        self.previous = Some((force, torque));
        let loads = Loads::from_subcycles(window);
        body.integrate(&loads.force, &loads.torque, 1.0)?;
        Ok(loads)
    }

    /// Macroscopic velocity of `cell`.
    pub fn cell_velocity(&self, field: &FluidField, body: &BodyState, cell: usize, force: &Vec3) -> Vec3 {
        let b = self.weight(cell);
        let u = field.moments(cell).velocity;
        if b == 0.0 {
            return lattice::macroscopic_velocity(&u, force);
        }
        psm_velocity(b, &u, force, &body.surface_velocity(&field.center(cell)))
    }
}
