//! D3Q19 velocity set, equilibria, moments and the BGK/TRT collision kernels.
//!
//! Everything is in lattice units: `dx = dt = rho0 = 1`, `c_s^2 = 1/3`.
//!
//! Direction table (the only place where positions are spelled out):
//!
//! | q     | c_q                                       |
//! |-------|-------------------------------------------|
//! | 0     | rest                                      |
//! | 1..=6 | ±x, ±y, ±z (opposites adjacent)           |
//! | 7..=18| xy, xz, yz diagonals (opposites adjacent) |

use crate::error::ConfigError;
use crate::Vec3;

/// Number of discrete velocities.
pub const Q: usize = 19;

/// Squared lattice speed of sound.
pub const CS2: f64 = 1.0 / 3.0;

/// Reference density.
pub const RHO0: f64 = 1.0;

/// The D3Q19 stencil.
#[derive(Debug, Clone, Copy)]
pub struct D3Q19;

impl D3Q19 {
    pub const C: [[i32; 3]; Q] = [
        [0, 0, 0],
        [1, 0, 0],
        [-1, 0, 0],
        [0, 1, 0],
        [0, -1, 0],
        [0, 0, 1],
        [0, 0, -1],
        [1, 1, 0],
        [-1, -1, 0],
        [1, -1, 0],
        [-1, 1, 0],
        [1, 0, 1],
        [-1, 0, -1],
        [1, 0, -1],
        [-1, 0, 1],
        [0, 1, 1],
        [0, -1, -1],
        [0, 1, -1],
        [0, -1, 1],
    ];

    pub const W: [f64; Q] = [
        1.0 / 3.0,
        1.0 / 18.0,
        1.0 / 18.0,
        1.0 / 18.0,
        1.0 / 18.0,
        1.0 / 18.0,
        1.0 / 18.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
        1.0 / 36.0,
    ];

    pub const OPPOSITE: [usize; Q] = [0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11, 14, 13, 16, 15, 18, 17];

    #[inline(always)]
    pub fn c(q: usize) -> Vec3 {
        let c = Self::C[q];
        Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64)
    }

    #[inline(always)]
    pub fn opposite(q: usize) -> usize {
        Self::OPPOSITE[q]
    }

    /// Index of the direction with the given integer velocity.
    pub fn index_of(c: [i32; 3]) -> Option<usize> {
        Self::C.iter().position(|&cq| cq == c)
    }

    /// Half of the directions, one per opposite pair (excluding rest).
    pub fn half() -> impl Iterator<Item = usize> {
        (1..Q).step_by(2)
    }
}

/// Population vector of a single cell.
pub type Pdfs = [f64; Q];

#[inline(always)]
fn dot_c(q: usize, v: &Vec3) -> f64 {
    let c = D3Q19::C[q];
    c[0] as f64 * v.x + c[1] as f64 * v.y + c[2] as f64 * v.z
}

/// Incompressible equilibrium, linear in the density fluctuation.
pub fn equilibrium(rho: f64, u: &Vec3) -> Pdfs {
    let usq = 1.5 * u.norm_squared();
    let mut feq = [0.0; Q];
    for (q, f) in feq.iter_mut().enumerate() {
        let cu = dot_c(q, u);
        *f = D3Q19::W[q] * (rho + RHO0 * (3.0 * cu + 4.5 * cu * cu - usq));
    }
    feq
}

/// Symmetric part of the equilibrium for direction `q`.
#[inline]
pub fn equilibrium_sym(q: usize, rho: f64, u: &Vec3) -> f64 {
    let cu = dot_c(q, u);
    D3Q19::W[q] * (rho + RHO0 * (4.5 * cu * cu - 1.5 * u.norm_squared()))
}

/// Antisymmetric part of the equilibrium for direction `q`.
#[inline]
pub fn equilibrium_antisym(q: usize, u: &Vec3) -> f64 {
    D3Q19::W[q] * RHO0 * 3.0 * dot_c(q, u)
}

/// Density and pre-shift velocity `U = (1/rho0) sum f_q c_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroState {
    pub rho: f64,
    pub velocity: Vec3,
}

pub fn moments(f: &Pdfs) -> MacroState {
    let mut rho = 0.0;
    let mut j = [0.0f64; 3];
    for q in 0..Q {
        rho += f[q];
        let c = D3Q19::C[q];
        j[0] += f[q] * c[0] as f64;
        j[1] += f[q] * c[1] as f64;
        j[2] += f[q] * c[2] as f64;
    }
    MacroState {
        rho,
        velocity: Vec3::new(j[0], j[1], j[2]) / RHO0,
    }
}

/// Shift from the equilibrium velocity `U` to the macroscopic velocity `u`.
#[inline]
pub fn macroscopic_velocity(velocity: &Vec3, force: &Vec3) -> Vec3 {
    velocity + force * (0.5 / RHO0)
}

/// Forcing term for a constant force density.
pub fn forcing(u: &Vec3, force: &Vec3) -> Pdfs {
    let mut out = [0.0; Q];
    if force.x == 0.0 && force.y == 0.0 && force.z == 0.0 {
        return out;
    }
    let uf = u.dot(force);
    for (q, fq) in out.iter_mut().enumerate() {
        let cf = dot_c(q, force);
        let cu = dot_c(q, u);
        *fq = D3Q19::W[q] * (3.0 * (cf - uf) + 9.0 * cu * cf);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionOperator {
    Bgk,
    Trt,
}

/// Relaxation data of a collision operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionConfig {
    pub tau: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub magic: f64,
    pub force: Vec3,
    pub operator: CollisionOperator,
}

/// Default magic parameter of the TRT operator.
pub const MAGIC_DEFAULT: f64 = 3.0 / 16.0;

impl CollisionConfig {
    /// Builds the relaxation rates for viscosity `nu` and magic parameter `magic`.
    pub fn from_viscosity(nu: f64, magic: f64, operator: CollisionOperator) -> Result<Self, ConfigError> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(ConfigError::invalid("nu", format!("viscosity must be positive, got {nu}")));
        }
        let tau = nu / CS2 + 0.5;
        let lambda_plus = -1.0 / tau;
        let lambda_minus = lambda_minus_for(lambda_plus, magic)?;
        Ok(Self {
            tau,
            lambda_plus,
            lambda_minus,
            magic,
            force: Vec3::zeros(),
            operator,
        })
    }

    pub fn with_force(mut self, force: Vec3) -> Self {
        self.force = force;
        self
    }

    pub fn viscosity(&self) -> f64 {
        (self.tau - 0.5) * CS2
    }

    /// `(1/2 + 1/lambda_+)(1/2 + 1/lambda_-)`.
    pub fn magic_product(&self) -> f64 {
        (0.5 + 1.0 / self.lambda_plus) * (0.5 + 1.0 / self.lambda_minus)
    }

    /// Collide a single cell according to the configured operator.
    #[inline]
    pub fn collide(&self, f: &mut Pdfs) {
        match self.operator {
            CollisionOperator::Bgk => collide_bgk(f, self),
            CollisionOperator::Trt => collide_trt(f, self),
        }
    }
}

/// Solves the magic relation for the antisymmetric rate.
pub fn lambda_minus_for(lambda_plus: f64, magic: f64) -> Result<f64, ConfigError> {
    let a = 0.5 + 1.0 / lambda_plus;
    let inv = magic / a - 0.5;
    let lambda_minus = 1.0 / inv;
    if !(lambda_minus > -2.0 && lambda_minus < 0.0) {
        return Err(ConfigError::invalid(
            "magic",
            format!("magic parameter {magic} with lambda+ = {lambda_plus} gives lambda- = {lambda_minus} outside (-2, 0)"),
        ));
    }
    Ok(lambda_minus)
}

/// BGK collision with forcing, in place.
#[inline]
pub fn collide_bgk(f: &mut Pdfs, cfg: &CollisionConfig) {
    let m = moments(f);
    let feq = equilibrium(m.rho, &m.velocity);
    let omega = 1.0 / cfg.tau;
    let frc = forcing(&m.velocity, &cfg.force);
    for q in 0..Q {
        f[q] += omega * (feq[q] - f[q]) + frc[q];
    }
}

/// TRT collision with forcing, in place.
#[inline]
pub fn collide_trt(f: &mut Pdfs, cfg: &CollisionConfig) {
    let m = moments(f);
    let u = m.velocity;
    let frc = forcing(&u, &cfg.force);
    let usq = 1.5 * u.norm_squared();
    let (lp, lm) = (cfg.lambda_plus, cfg.lambda_minus);

    let e0 = D3Q19::W[0] * (m.rho - RHO0 * usq);
    f[0] += lp * (f[0] - e0) + frc[0];
    for q in D3Q19::half() {
        let qb = q + 1;
        let cu = dot_c(q, &u);
        let w = D3Q19::W[q];
        let e_plus = w * (m.rho + RHO0 * (4.5 * cu * cu - usq));
        let e_minus = w * RHO0 * 3.0 * cu;
        let f_plus = 0.5 * (f[q] + f[qb]);
        let f_minus = 0.5 * (f[q] - f[qb]);
        let d_plus = lp * (f_plus - e_plus);
        let d_minus = lm * (f_minus - e_minus);
        f[q] += d_plus + d_minus + frc[q];
        f[qb] += d_plus - d_minus + frc[qb];
    }
}
