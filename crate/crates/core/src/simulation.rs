//! A fluid field, one sphere and one coupling scheme advanced together.

use std::fmt;
use std::str::FromStr;

use crate::boundaries::{DomainBoundaries, NoSlipScheme};
use crate::error::{ConfigError, SimError};
use crate::field::FluidField;
use crate::lattice::{self, CollisionConfig, CollisionOperator};
use crate::mem::{self, Loads, MemCoupling};
use crate::psm::{PsmCoupling, PsmVariant};
use crate::rigidbody::BodyState;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CouplingKind {
    BB,
    CLI,
    MR,
    M1B1,
    M2B2,
    M3B2,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 6] = [Self::BB, Self::CLI, Self::MR, Self::M1B1, Self::M2B2, Self::M3B2];

    pub fn is_mem(self) -> bool {
        matches!(self, Self::BB | Self::CLI | Self::MR)
    }

    /// MEM runs on TRT, PSM on BGK.
    pub fn operator(self) -> CollisionOperator {
        if self.is_mem() {
            CollisionOperator::Trt
        } else {
            CollisionOperator::Bgk
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::BB => "BB",
            Self::CLI => "CLI",
            Self::MR => "MR",
            Self::M1B1 => "M1B1",
            Self::M2B2 => "M2B2",
            Self::M3B2 => "M3B2",
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CouplingKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| ConfigError::invalid("coupling", format!("unknown coupling `{s}` (expected BB, CLI, MR, M1B1, M2B2 or M3B2)")))
    }
}

#[derive(Debug, Clone)]
pub enum Coupling {
    Mem(MemCoupling),
    Psm(PsmCoupling),
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub field: FluidField,
    pub cfg: CollisionConfig,
    pub domain: DomainBoundaries,
    pub body: BodyState,
    pub coupling: Coupling,
    kind: CouplingKind,
    steps: u64,
    lbm_steps: u64,
    loads: Loads,
}

impl Simulation {
    /// Sets up a resting field at unit density with the body mapped in.
    pub fn new(
        dims: [usize; 3],
        domain: DomainBoundaries,
        nu: f64,
        force: Vec3,
        body: BodyState,
        kind: CouplingKind,
        subcycles: usize,
    ) -> Result<Self, SimError> {
        let cfg = CollisionConfig::from_viscosity(nu, lattice::MAGIC_DEFAULT, kind.operator())?.with_force(force);
        let mut field = FluidField::new(dims, domain.periodicity());
        let coupling = match kind {
            CouplingKind::BB | CouplingKind::CLI | CouplingKind::MR => {
                let scheme = match kind {
                    CouplingKind::BB => NoSlipScheme::BounceBack,
                    CouplingKind::CLI => NoSlipScheme::Cli,
                    _ => NoSlipScheme::MultiReflection,
                };
                let mut m = MemCoupling::new(scheme, &cfg, subcycles);
                m.remap(&mut field, &body)?;
                Coupling::Mem(m)
            }
            _ => {
                let variant = match kind {
                    CouplingKind::M1B1 => PsmVariant::M1B1,
                    CouplingKind::M2B2 => PsmVariant::M2B2,
                    _ => PsmVariant::M3B2,
                };
                let mut p = PsmCoupling::new(variant);
                p.update_fractions(&field, &body, cfg.tau);
                Coupling::Psm(p)
            }
        };
        let sim = Self {
            field,
            cfg,
            domain,
            body,
            coupling,
            kind,
            steps: 0,
            lbm_steps: 0,
            loads: Loads::default(),
        };
        sim.check_body()?;
        Ok(sim)
    }

    pub fn kind(&self) -> CouplingKind {
        self.kind
    }

    /// Completed coupling steps.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Completed LBM time steps (subcycles count individually).
    pub fn lbm_steps(&self) -> u64 {
        self.lbm_steps
    }

    /// LBM time steps per coupling step.
    pub fn subcycles(&self) -> usize {
        match &self.coupling {
            Coupling::Mem(m) => m.subcycles(),
            Coupling::Psm(_) => 1,
        }
    }

    /// Load of the last step (subcycle-averaged for MEM).
    pub fn loads(&self) -> &Loads {
        &self.loads
    }

    /// Fills the whole field with the equilibrium at `(rho, u)`.
    pub fn fill_equilibrium(&mut self, rho: f64, u: &Vec3) {
        self.field.fill_equilibrium(rho, u);
    }

    /// Changes the viscosity, keeping the magic parameter and force.
    pub fn set_viscosity(&mut self, nu: f64) -> Result<(), SimError> {
        let cfg = CollisionConfig::from_viscosity(nu, self.cfg.magic, self.cfg.operator)?.with_force(self.cfg.force);
        self.cfg = cfg;
        match &mut self.coupling {
            Coupling::Mem(m) => {
                let mut fresh = MemCoupling::new(m.scheme(), &cfg, m.subcycles());
                fresh.remap(&mut self.field, &self.body)?;
                *m = fresh;
            }
            Coupling::Psm(p) => p.update_fractions(&self.field, &self.body, cfg.tau),
        }
        Ok(())
    }

    /// Replaces the body state and remaps it onto the grid. Cells the body
    /// leaves are refilled as in a regular step.
    pub fn set_body(&mut self, body: BodyState) -> Result<(), SimError> {
        self.body = body;
        match &mut self.coupling {
            Coupling::Mem(m) => {
                let t = m.remap(&mut self.field, &self.body)?;
                if !t.uncovered.is_empty() {
                    m.reconstruct(&mut self.field, &self.body, &t.uncovered, &self.cfg.force);
                }
            }
            Coupling::Psm(p) => p.update_fractions(&self.field, &self.body, self.cfg.tau),
        }
        self.check_body()
    }

    pub fn step(&mut self) -> Result<&Loads, SimError> {
        let loads = match &mut self.coupling {
            Coupling::Mem(m) => m.step(&mut self.field, &self.cfg, &self.domain, &mut self.body, self.steps)?,
            Coupling::Psm(p) => p.step(&mut self.field, &self.cfg, &self.domain, &mut self.body, self.steps)?,
        };
        self.steps += 1;
        self.lbm_steps += self.subcycles() as u64;
        self.loads = loads;
        self.check_body()?;
        Ok(&self.loads)
    }

    /// The sphere must keep one cell of clearance from every face; the
    /// mapping does not wrap across periodic boundaries.
    fn check_body(&self) -> Result<(), SimError> {
        let dims = self.field.dims();
        let r = 0.5 * self.body.diameter();
        let p = self.body.position;
        let inside = (0..3).all(|a| p[a] - r >= 1.0 && p[a] + r <= dims[a] as f64 - 1.0);
        if inside && p.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SimError::BodyOutOfDomain {
                step: self.steps,
                center: [p.x, p.y, p.z],
            })
        }
    }

    /// Macroscopic velocity of `cell` according to the coupling.
    pub fn cell_velocity(&self, cell: usize) -> Vec3 {
        match &self.coupling {
            Coupling::Mem(_) => mem::cell_velocity(&self.field, &self.body, cell, &self.cfg.force),
            Coupling::Psm(p) => p.cell_velocity(&self.field, &self.body, cell, &self.cfg.force),
        }
    }

    /// Density of `cell`; covered MEM cells report the reference density.
    pub fn cell_density(&self, cell: usize) -> f64 {
        if self.field.is_fluid(cell) {
            self.field.moments(cell).rho
        } else {
            lattice::RHO0
        }
    }

    /// Volume average of the macroscopic velocity over all cells.
    pub fn mean_velocity(&self) -> Vec3 {
        let n = self.field.n_cells();
        let sum = (0..n).fold(Vec3::zeros(), |acc, c| acc + self.cell_velocity(c));
        sum / n as f64
    }

    /// Solid volume fraction per cell: 0/1 flags for MEM, supersampled for PSM.
    pub fn solid_fraction_field(&self) -> Vec<f64> {
        let mut eps = vec![0.0; self.field.n_cells()];
        match &self.coupling {
            Coupling::Mem(m) => {
                for &c in m.solid_cells() {
                    eps[c] = 1.0;
                }
            }
            Coupling::Psm(p) => {
                for c in p.covered() {
                    eps[c.cell] = c.eps;
                }
            }
        }
        eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundaries::FaceCondition;

    #[test]
    fn coupling_labels_round_trip() {
        for k in CouplingKind::ALL {
            assert_eq!(k.label().parse::<CouplingKind>().unwrap(), k);
        }
        assert_eq!("m2b2".parse::<CouplingKind>().unwrap(), CouplingKind::M2B2);
        assert!("XYZ".parse::<CouplingKind>().is_err());
    }

    #[test]
    fn body_leaving_domain_is_reported() {
        let mut body = BodyState::fixed(Vec3::new(5.0, 5.0, 5.0), 4.0);
        body.velocity = Vec3::new(0.0, 0.0, -0.6);
        let domain = DomainBoundaries::default().with_face(2, false, FaceCondition::Velocity(Vec3::zeros()));
        let mut sim = Simulation::new([10, 10, 10], domain, 0.1, Vec3::zeros(), body, CouplingKind::BB, 1).unwrap();
        let err = (0..10).find_map(|_| sim.step().err());
        assert!(matches!(err, Some(SimError::BodyOutOfDomain { .. })));
    }

    #[test]
    fn instability_is_reported() {
        let body = BodyState::fixed(Vec3::new(5.0, 5.0, 5.0), 3.0);
        let mut sim = Simulation::new([10, 10, 10], DomainBoundaries::default(), 0.1, Vec3::zeros(), body, CouplingKind::CLI, 2).unwrap();
        let cell = sim.field.index(0, 0, 0);
        sim.field.set_pdf(cell, 4, f64::INFINITY);
        assert!(matches!(sim.step(), Err(SimError::Instability { cell: [0, 0, 0], .. })));
    }
}
