//! A heavy sphere held in place by an upward stream: Galileo-number
//! calibration with the sphere fixed, then free motion.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::diagnostics::Components;
use crate::boundaries::{DomainBoundaries, FaceCondition};
use crate::error::{ConfigError, SimError};
use crate::lattice::RHO0;
use crate::mem::DEFAULT_SUBCYCLES;
use crate::rigidbody::{BodyState, DENSITY_RATIO};
use crate::simulation::{CouplingKind, Simulation};
use crate::Vec3;

/// Resolutions with reference data.
pub const RESOLUTIONS: [usize; 4] = [18, 24, 36, 48];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    A,
    B,
    C,
    D,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::A, Regime::B, Regime::C, Regime::D];

    pub fn galileo(self) -> f64 {
        match self {
            Regime::A => 144.0,
            Regime::B => 178.46,
            Regime::C => 190.0,
            Regime::D => 250.0,
        }
    }

    /// Particle Reynolds number of the reference runs, used for the inflow.
    pub fn reynolds(self) -> f64 {
        match self {
            Regime::A => 185.04,
            Regime::B => 243.0,
            Regime::C => 262.7,
            Regime::D => 365.1,
        }
    }

    /// Regimes with an oblique path start from a perturbed position.
    pub fn perturbed(self) -> bool {
        self != Regime::A
    }

    pub fn samples(self) -> usize {
        if self == Regime::D {
            7
        } else {
            1
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Regime {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Regime::A),
            "B" => Ok(Regime::B),
            "C" => Ok(Regime::C),
            "D" => Ok(Regime::D),
            _ => Err(ConfigError::invalid("regime", format!("unknown regime `{s}` (expected A, B, C or D)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettlingCase {
    pub regime: Regime,
    /// Cells per diameter.
    pub resolution: usize,
    pub coupling: CouplingKind,
    pub galileo: f64,
    pub reynolds: f64,
    pub density_ratio: f64,
    /// Viscosity at the start of the calibration.
    pub nu0: f64,
    /// Largest horizontal offset of the initial position, in cells.
    pub perturbation: f64,
    pub seed: u64,
    /// Length of the free-motion phase in gravitational time units.
    pub duration: f64,
    /// Leading fraction of the series dropped from statistics.
    pub transient: f64,
    pub subcycles: usize,
    /// Steps between drag convergence checks.
    pub drag_window: u64,
    pub drag_tolerance: f64,
    pub galileo_tolerance: f64,
    pub max_calibration_iterations: usize,
    /// Step budget of one calibration iteration.
    pub max_calibration_steps: u64,
    /// Truncated calibration for quick and reproducibility runs: the drag
    /// is averaged over this many steps at `nu0` and the gravity taken from
    /// it, without iterating toward the target Galileo number.
    pub calibration_steps: Option<u64>,
    /// Caps the free-motion phase.
    pub max_steps: Option<u64>,
}

impl SettlingCase {
    pub fn new(regime: Regime, resolution: usize, coupling: CouplingKind) -> Self {
        Self {
            regime,
            resolution,
            coupling,
            galileo: regime.galileo(),
            reynolds: regime.reynolds(),
            density_ratio: DENSITY_RATIO,
            nu0: 0.01,
            perturbation: 0.1,
            seed: 1,
            duration: 250.0,
            transient: 0.2,
            subcycles: DEFAULT_SUBCYCLES,
            drag_window: 1000,
            drag_tolerance: 1e-6,
            galileo_tolerance: 1e-4,
            max_calibration_iterations: 20,
            max_calibration_steps: 500_000,
            calibration_steps: None,
            max_steps: None,
        }
    }

    pub fn diameter(&self) -> f64 {
        self.resolution as f64
    }

    pub fn dims(&self) -> [usize; 3] {
        let d = self.diameter();
        let h = (5.34 * d).round() as usize;
        [h, h, 16 * self.resolution]
    }

    pub fn initial_position(&self) -> Vec3 {
        let d = self.diameter();
        Vec3::new(2.67 * d, 2.67 * d, 5.34 * d)
    }

    /// Inflow velocity; it stays fixed while the viscosity is calibrated.
    pub fn inflow(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.reynolds * self.nu0 / self.diameter())
    }

    pub fn domain(&self) -> DomainBoundaries {
        DomainBoundaries::default()
            .with_face(2, false, FaceCondition::Velocity(self.inflow()))
            .with_face(2, true, FaceCondition::Outflow)
    }

    /// Horizontal offset of the released sphere for this seed.
    pub fn offset(&self) -> Vec3 {
        if !self.regime.perturbed() || self.perturbation == 0.0 {
            return Vec3::zeros();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let p = self.perturbation;
        Vec3::new(rng.gen_range(-p..=p), rng.gen_range(-p..=p), 0.0)
    }

    /// Sets up the fixed sphere in a uniform stream.
    pub fn simulation(&self, nu: f64) -> Result<Simulation, SimError> {
        let mut body = BodyState::new(self.initial_position(), self.diameter(), self.density_ratio);
        body.mobile = false;
        let mut sim = Simulation::new(self.dims(), self.domain(), nu, Vec3::zeros(), body, self.coupling, self.subcycles)?;
        sim.fill_equilibrium(RHO0, &self.inflow());
        Ok(sim)
    }
}

/// Gravity magnitude balancing `drag` on a sphere of diameter `d`.
pub fn gravity_for_drag(drag: f64, d: f64, density_ratio: f64) -> f64 {
    drag / (PI / 6.0 * d.powi(3) * (density_ratio - 1.0).abs())
}

pub fn galileo_number(g: f64, d: f64, density_ratio: f64, nu: f64) -> f64 {
    ((density_ratio - 1.0).abs() * g * d.powi(3)).sqrt() / nu
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub nu: f64,
    /// Gravitational acceleration, pointing down.
    pub gravity: Vec3,
    pub galileo: f64,
    pub drag: f64,
    pub iterations: usize,
}

impl Calibration {
    /// Gravitational velocity scale.
    pub fn velocity_scale(&self, d: f64, density_ratio: f64) -> f64 {
        ((density_ratio - 1.0).abs() * self.gravity.norm() * d).sqrt()
    }
}

/// The Galileo fixed-point loop. `drag` returns the converged drag for a
/// viscosity; the viscosity is rescaled by `Ga / Ga_target` until the two
/// agree to `tolerance`.
pub fn calibrate_with(
    galileo: f64,
    d: f64,
    density_ratio: f64,
    nu0: f64,
    tolerance: f64,
    max_iterations: usize,
    mut drag: impl FnMut(f64) -> Result<f64, SimError>,
) -> Result<Calibration, SimError> {
    let mut nu = nu0;
    for iteration in 1..=max_iterations {
        let f = drag(nu)?;
        let g = gravity_for_drag(f, d, density_ratio);
        let ga = galileo_number(g, d, density_ratio, nu);
        log::info!("calibration {iteration}: nu = {nu:.8e}, drag = {f:.8e}, Ga = {ga:.6}");
        if !ga.is_finite() || ga <= 0.0 {
            return Err(SimError::Diagnostics(format!("calibration produced Ga = {ga} from drag {f}")));
        }
        if ((ga - galileo) / galileo).abs() < tolerance {
            return Ok(Calibration {
                nu,
                gravity: Vec3::new(0.0, 0.0, -g),
                galileo: ga,
                drag: f,
                iterations: iteration,
            });
        }
        nu *= ga / galileo;
    }
    Err(SimError::NonConvergence {
        what: format!("Galileo number calibration toward {galileo}"),
        steps: max_iterations as u64,
    })
}

/// Advances `sim` until the window-mean vertical drag settles, returning it.
pub fn converge_drag(sim: &mut Simulation, case: &SettlingCase) -> Result<f64, SimError> {
    let window = case.drag_window.max(1);
    let mean = |sim: &mut Simulation, n: u64| -> Result<f64, SimError> {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sim.step()?.force.z;
        }
        Ok(sum / n as f64)
    };
    if let Some(n) = case.calibration_steps {
        return mean(sim, n.max(1));
    }
    let start = sim.steps();
    let mut previous = f64::NAN;
    while sim.steps() - start < case.max_calibration_steps {
        let f = mean(sim, window)?;
        if ((f - previous) / f).abs() < case.drag_tolerance {
            return Ok(f);
        }
        previous = f;
    }
    Err(SimError::NonConvergence {
        what: format!("drag on the fixed sphere at nu = {}", sim.cfg.viscosity()),
        steps: sim.steps() - start,
    })
}

/// Calibrates the viscosity and gravity with the sphere held fixed. The
/// returned simulation carries the developed flow.
pub fn calibrate(case: &SettlingCase) -> Result<(Simulation, Calibration), SimError> {
    let mut sim = case.simulation(case.nu0)?;
    if case.calibration_steps.is_some() {
        let (d, ratio) = (case.diameter(), case.density_ratio);
        let f = converge_drag(&mut sim, case)?;
        let g = gravity_for_drag(f, d, ratio);
        let ga = galileo_number(g, d, ratio, case.nu0);
        log::warn!("truncated calibration: Ga = {ga:.6} instead of {}", case.galileo);
        let cal = Calibration {
            nu: case.nu0,
            gravity: Vec3::new(0.0, 0.0, -g),
            galileo: ga,
            drag: f,
            iterations: 1,
        };
        return Ok((sim, cal));
    }
    let cal = calibrate_with(
        case.galileo,
        case.diameter(),
        case.density_ratio,
        case.nu0,
        case.galileo_tolerance,
        case.max_calibration_iterations,
        |nu| {
            if nu != sim.cfg.viscosity() {
                sim.set_viscosity(nu)?;
            }
            converge_drag(&mut sim, case)
        },
    )?;
    Ok((sim, cal))
}

/// One sample of the free motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsRecord {
    pub t_lattice: f64,
    pub t_ref: f64,
    pub velocity: Vec3,
    pub u_pv: f64,
    pub u_ph: f64,
    pub angular_velocity: Vec3,
    pub force: Vec3,
    pub torque: Vec3,
    pub position: Vec3,
    /// Dimensionless rotation rates: vertical, horizontal magnitude, x.
    pub omega_pv: f64,
    pub omega_ph: f64,
    pub omega_px: f64,
}

#[derive(Debug)]
pub struct KinematicsSeries {
    pub case: SettlingCase,
    pub calibration: Calibration,
    /// Time unit `D / u_ref` in lattice steps.
    pub t_ref: f64,
    pub u_ref: f64,
    pub records: Vec<KinematicsRecord>,
    /// Set when the run stopped early.
    pub failure: Option<SimError>,
}

impl KinematicsSeries {
    pub fn components(&self) -> Components {
        let pick = |f: fn(&KinematicsRecord) -> f64| self.records.iter().map(f).collect();
        Components {
            u_pv: pick(|r| r.u_pv),
            u_ph: pick(|r| r.u_ph),
            omega_pv: pick(|r| r.omega_pv),
            omega_ph: pick(|r| r.omega_ph),
            omega_px: pick(|r| r.omega_px),
        }
    }

    /// Sampling interval in time units.
    pub fn dt(&self) -> f64 {
        match self.records.as_slice() {
            [a, b, ..] => b.t_ref - a.t_ref,
            _ => f64::NAN,
        }
    }
}

fn record(sim: &Simulation, case: &SettlingCase, u_ref: f64, t_ref: f64) -> KinematicsRecord {
    let b = &sim.body;
    let rel = (b.velocity - case.inflow()) / u_ref;
    let om = b.angular_velocity * (case.diameter() / u_ref);
    let t = sim.lbm_steps() as f64;
    let l = sim.loads();
    KinematicsRecord {
        t_lattice: t,
        t_ref: t / t_ref,
        velocity: b.velocity,
        u_pv: rel.z,
        u_ph: rel.x.hypot(rel.y),
        angular_velocity: b.angular_velocity,
        force: l.force,
        torque: l.torque,
        position: b.position,
        omega_pv: om.z,
        omega_ph: om.x.hypot(om.y),
        omega_px: om.x,
    }
}

/// Releases the calibrated sphere and records its motion every step.
/// Numerical failures end the series and are kept in `failure`.
pub fn settle(case: &SettlingCase, sim: Simulation, calibration: &Calibration) -> Result<KinematicsSeries, SimError> {
    settle_with(case, sim, calibration, |_, _| Ok(())).map(|(series, _)| series)
}

/// Like [`settle`], calling `observe` after every step and returning the
/// final state. An observer error aborts the run.
pub fn settle_with(
    case: &SettlingCase,
    mut sim: Simulation,
    calibration: &Calibration,
    mut observe: impl FnMut(&Simulation, &KinematicsRecord) -> Result<(), SimError>,
) -> Result<(KinematicsSeries, Simulation), SimError> {
    let d = case.diameter();
    let u_ref = calibration.velocity_scale(d, case.density_ratio);
    let t_ref = d / u_ref;
    let mut body = sim.body;
    body.mobile = true;
    body.gravity = calibration.gravity;
    body.velocity = Vec3::zeros();
    body.angular_velocity = Vec3::zeros();
    body.position += case.offset();
    sim.set_body(body)?;
    let lbm_per_step = sim.subcycles() as f64;
    let mut steps = (case.duration * t_ref / lbm_per_step).ceil() as u64;
    if let Some(cap) = case.max_steps {
        steps = steps.min(cap);
    }
    let mut series = KinematicsSeries {
        case: case.clone(),
        calibration: *calibration,
        t_ref,
        u_ref,
        records: Vec::with_capacity(steps as usize),
        failure: None,
    };
    let t0 = sim.lbm_steps();
    for _ in 0..steps {
        match sim.step() {
            Ok(_) => {
                let mut r = record(&sim, case, u_ref, t_ref);
                r.t_lattice -= t0 as f64;
                r.t_ref = r.t_lattice / t_ref;
                observe(&sim, &r)?;
                series.records.push(r);
            }
            Err(e) => {
                log::warn!("{} {}-{} seed {}: {e}", case.regime, case.coupling, case.resolution, case.seed);
                series.failure = Some(e);
                break;
            }
        }
    }
    Ok((series, sim))
}

/// Calibrates once and runs every sample of the regime with consecutive seeds.
pub fn run_samples(case: &SettlingCase) -> Result<Vec<KinematicsSeries>, SimError> {
    let (sim, cal) = calibrate(case)?;
    (0..case.regime.samples() as u64)
        .map(|i| {
            let c = SettlingCase {
                seed: case.seed + i,
                ..case.clone()
            };
            settle(&c, sim.clone(), &cal)
        })
        .collect()
}
