//! Rigid sphere state and its time integration.

use std::f64::consts::PI;

use crate::error::SimError;
use crate::geometry::Sphere;
use crate::lattice::RHO0;
use crate::Vec3;

/// Density ratio used by all settling cases.
pub const DENSITY_RATIO: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub angular_velocity: Vec3,
    diameter: f64,
    density_ratio: f64,
    pub gravity: Vec3,
    /// Immobile bodies still move kinematically with their prescribed velocity.
    pub mobile: bool,
}

impl BodyState {
    pub fn new(position: Vec3, diameter: f64, density_ratio: f64) -> Self {
        assert!(diameter > 0.0 && density_ratio > 0.0);
        Self {
            position,
            velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            diameter,
            density_ratio,
            gravity: Vec3::zeros(),
            mobile: true,
        }
    }

    /// A body held in place.
    pub fn fixed(position: Vec3, diameter: f64) -> Self {
        Self {
            mobile: false,
            ..Self::new(position, diameter, 1.0)
        }
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn density_ratio(&self) -> f64 {
        self.density_ratio
    }

    pub fn sphere(&self) -> Sphere {
        Sphere::new(self.position, self.diameter)
    }

    pub fn volume(&self) -> f64 {
        PI / 6.0 * self.diameter.powi(3)
    }

    pub fn mass(&self) -> f64 {
        self.density_ratio * RHO0 * self.volume()
    }

    pub fn moment_of_inertia(&self) -> f64 {
        self.mass() * self.diameter * self.diameter / 10.0
    }

    /// Rigid-body velocity at `x`.
    #[inline]
    pub fn surface_velocity(&self, x: &Vec3) -> Vec3 {
        self.velocity + self.angular_velocity.cross(&(x - self.position))
    }

    /// Gravity minus buoyancy.
    pub fn net_weight(&self) -> Vec3 {
        self.gravity * ((self.density_ratio - 1.0) * RHO0 * self.volume())
    }

    /// Symplectic Euler step: velocities first, then the position with the
    /// updated velocity.
    pub fn integrate(&mut self, force: &Vec3, torque: &Vec3, dt: f64) -> Result<(), SimError> {
        if !(force.iter().all(|v| v.is_finite()) && torque.iter().all(|v| v.is_finite())) {
            return Err(SimError::Diagnostics(format!(
                "non-finite hydrodynamic load on body: force {force:?}, torque {torque:?}"
            )));
        }
        if self.mobile {
            let total = force + self.net_weight();
            self.velocity += total * (dt / self.mass());
            self.angular_velocity += torque * (dt / self.moment_of_inertia());
        }
        self.position += self.velocity * dt;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn surface_velocity_examples() {
        let mut b = BodyState::new(Vec3::new(1.0, 2.0, 3.0), 4.0, 1.5);
        b.velocity = Vec3::new(0.1, 0.0, -0.2);
        assert_eq!(b.surface_velocity(&Vec3::new(7.0, -3.0, 2.0)), b.velocity);
        b.angular_velocity = Vec3::new(0.3, -0.1, 0.5);
        assert_eq!(b.surface_velocity(&b.position), b.velocity);
        b.velocity = Vec3::zeros();
        b.angular_velocity = Vec3::new(0.0, 0.0, 0.02);
        let v = b.surface_velocity(&(b.position + Vec3::new(3.0, 0.0, 0.0)));
        assert_relative_eq!(v.y, 0.06, epsilon = 1e-16);
        assert_eq!((v.x, v.z), (0.0, 0.0));
    }

    #[test]
    fn mass_and_inertia() {
        let b = BodyState::new(Vec3::zeros(), 2.0, 1.5);
        assert_relative_eq!(b.mass(), 1.5 * PI / 6.0 * 8.0, epsilon = 1e-14);
        assert_relative_eq!(b.moment_of_inertia(), b.mass() * 0.4, epsilon = 1e-14);
    }

    #[test]
    fn balanced_load_keeps_velocity() {
        let mut b = BodyState::new(Vec3::zeros(), 6.0, 1.5);
        b.gravity = Vec3::new(0.0, 0.0, -1e-4);
        b.velocity = Vec3::new(0.0, 0.0, -0.01);
        let drag = -b.net_weight();
        b.integrate(&drag, &Vec3::zeros(), 1.0).unwrap();
        assert!((b.velocity - Vec3::new(0.0, 0.0, -0.01)).norm() < 1e-18);
    }

    #[test]
    fn free_drift_and_one_step_regression() {
        let mut b = BodyState::new(Vec3::new(5.0, 5.0, 5.0), 2.0, 1.5);
        b.velocity = Vec3::new(0.0, 0.0, -0.01);
        b.integrate(&Vec3::zeros(), &Vec3::zeros(), 1.0).unwrap();
        assert_relative_eq!(b.position.z, 4.99, epsilon = 1e-15);

        let mut b = BodyState::new(Vec3::zeros(), 2.0, 1.5);
        let f = Vec3::new(0.3, 0.0, 0.0);
        b.integrate(&f, &Vec3::zeros(), 2.0).unwrap();
        let v = 0.3 * 2.0 / b.mass();
        assert_relative_eq!(b.velocity.x, v, epsilon = 1e-16);
        // position advanced with the new velocity
        assert_relative_eq!(b.position.x, 2.0 * v, epsilon = 1e-16);
    }

    #[test]
    fn constant_force_closed_form() {
        let mut b = BodyState::new(Vec3::zeros(), 3.0, 1.5);
        let f = Vec3::new(0.0, 2e-3, 0.0);
        let n = 250;
        for _ in 0..n {
            b.integrate(&f, &Vec3::zeros(), 1.0).unwrap();
        }
        assert_relative_eq!(b.velocity.y, n as f64 * 2e-3 / b.mass(), max_relative = 1e-13);
    }

    #[test]
    fn unloaded_body_is_constant() {
        let mut b = BodyState::new(Vec3::new(1.0, 1.0, 1.0), 3.0, 1.5);
        b.angular_velocity = Vec3::new(0.01, 0.0, 0.0);
        let before = b;
        for _ in 0..10 {
            b.integrate(&Vec3::zeros(), &Vec3::zeros(), 1.0).unwrap();
        }
        assert_eq!(b, before);
    }

    #[test]
    fn rejects_non_finite_load() {
        let mut b = BodyState::new(Vec3::zeros(), 3.0, 1.5);
        assert!(b.integrate(&Vec3::new(f64::NAN, 0.0, 0.0), &Vec3::zeros(), 1.0).is_err());
    }

    #[test]
    fn fixed_body_moves_only_kinematically() {
        let mut b = BodyState::fixed(Vec3::zeros(), 3.0);
        b.integrate(&Vec3::new(1.0, 0.0, 0.0), &Vec3::zeros(), 1.0).unwrap();
        assert_eq!(b.position, Vec3::zeros());
        b.velocity = Vec3::new(0.05, 0.0, 0.0);
        b.integrate(&Vec3::new(1.0, 0.0, 0.0), &Vec3::zeros(), 2.0).unwrap();
        assert_eq!(b.velocity, Vec3::new(0.05, 0.0, 0.0));
        assert_relative_eq!(b.position.x, 0.1, epsilon = 1e-16);
    }
}
