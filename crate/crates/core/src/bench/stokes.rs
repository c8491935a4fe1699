//! Drag on a periodic simple-cubic array of fixed spheres in creeping flow.

use std::f64::consts::PI;

use crate::boundaries::DomainBoundaries;
use crate::error::SimError;
use crate::lattice::RHO0;
use crate::rigidbody::BodyState;
use crate::simulation::{CouplingKind, Simulation};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct StokesCase {
    /// Edge length of the cubic box in cells.
    pub length: usize,
    /// Magnitude of the driving force density along x.
    pub forcing: f64,
    pub nu: f64,
    pub coupling: CouplingKind,
    /// Steps between convergence checks.
    pub window: u64,
    pub tolerance: f64,
    pub max_steps: u64,
}

impl StokesCase {
    pub fn new(coupling: CouplingKind, nu: f64) -> Self {
        Self {
            length: 32,
            forcing: 1e-5,
            nu,
            coupling,
            window: 1000,
            tolerance: 1e-7,
            max_steps: 2_000_000,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.length as f64 / 2.0
    }

    pub fn simulation(&self) -> Result<Simulation, SimError> {
        let l = self.length as f64;
        let body = BodyState::fixed(Vec3::repeat(0.5 * l), self.diameter());
        Simulation::new(
            [self.length; 3],
            DomainBoundaries::default(),
            self.nu,
            Vec3::new(self.forcing, 0.0, 0.0),
            body,
            self.coupling,
            1,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StokesResult {
    /// Dimensionless force.
    pub c: f64,
    /// Drag along the forcing direction.
    pub drag: f64,
    /// Domain average of the velocity along the forcing direction.
    pub mean_velocity: f64,
    pub steps: u64,
}

/// Dimensionless force of the current state of `sim`.
pub fn dimensionless_force(sim: &Simulation, forcing: f64, nu: f64) -> (f64, f64, f64) {
    let d = sim.body.diameter();
    let drag = sim.loads().force.x;
    let buoyancy = PI / 6.0 * d.powi(3) * forcing;
    let u = sim.mean_velocity().x;
    ((drag + buoyancy) / (3.0 * PI * RHO0 * nu * d * u), drag, u)
}

/// Runs until `C` changes by less than the tolerance over one window.
pub fn stokes_drag(case: &StokesCase) -> Result<StokesResult, SimError> {
    let mut sim = case.simulation()?;
    converge(case, &mut sim)
}

/// Advances a simulation built by [`StokesCase::simulation`] to convergence.
pub fn converge(case: &StokesCase, sim: &mut Simulation) -> Result<StokesResult, SimError> {
    let mut previous = f64::NAN;
    while sim.steps() < case.max_steps {
        for _ in 0..case.window {
            sim.step()?;
        }
        let (c, drag, u) = dimensionless_force(sim, case.forcing, case.nu);
        log::debug!("{} nu={} step {}: C = {c:.10}", case.coupling, case.nu, sim.steps());
        if ((c - previous) / c).abs() < case.tolerance {
            return Ok(StokesResult {
                c,
                drag,
                mean_velocity: u,
                steps: sim.steps(),
            });
        }
        previous = c;
    }
    Err(SimError::NonConvergence {
        what: format!("dimensionless force for {} at nu = {}", case.coupling, case.nu),
        steps: sim.steps(),
    })
}
