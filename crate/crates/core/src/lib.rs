//! Lattice Boltzmann (D3Q19) simulation of resolved rigid spheres with
//! momentum exchange (BB, CLI, MR) and partially saturated cells (M1B1, M2B2,
//! M3B2) coupling, plus the Stokes-array and settling-sphere benchmarks.

pub mod bench;
pub mod boundaries;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod lattice;
pub mod mem;
pub mod output;
pub mod psm;
pub mod rigidbody;
pub mod run;
pub mod simulation;

pub type Vec3 = nalgebra::Vector3<f64>;

pub use error::{ConfigError, GeometryError, SimError};
