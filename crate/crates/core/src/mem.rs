//! Momentum exchange coupling: explicit mapping of the sphere, link closures
//! and forces, refilling of uncovered cells and the subcycled step driver.

use crate::boundaries::{BoundaryLink, DomainBoundaries, LinkSet, NoSlipScheme};
use crate::error::SimError;
use crate::field::{CellFlag, FluidField};
use crate::geometry;
use crate::lattice::{self, CollisionConfig, Pdfs, D3Q19, Q};
use crate::rigidbody::BodyState;
use crate::Vec3;

/// Default number of LBM subcycles per body update.
pub const DEFAULT_SUBCYCLES: usize = 2;

/// Cells that changed state in a remap, in ascending index order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transitions {
    /// Solid to fluid; need refilling.
    pub uncovered: Vec<usize>,
    /// Fluid to solid; populations retired.
    pub covered: Vec<usize>,
}

/// Hydrodynamic load of one coupling step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Loads {
    pub force: Vec3,
    pub torque: Vec3,
    /// Totals of each LBM subcycle.
    pub subcycles: Vec<(Vec3, Vec3)>,
}

impl Loads {
    pub fn from_subcycles(subcycles: Vec<(Vec3, Vec3)>) -> Self {
        let n = subcycles.len().max(1) as f64;
        let (f, t) = subcycles
            .iter()
            .fold((Vec3::zeros(), Vec3::zeros()), |(f, t), (a, b)| (f + a, t + b));
        Self {
            force: f / n,
            torque: t / n,
            subcycles,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MemCoupling {
    links: LinkSet,
    subcycles: usize,
    solid: Vec<usize>,
}

impl MemCoupling {
    pub fn new(scheme: NoSlipScheme, cfg: &CollisionConfig, subcycles: usize) -> Self {
        assert!(subcycles > 0);
        Self {
            links: LinkSet::new(scheme, cfg.lambda_minus),
            subcycles,
            solid: Vec::new(),
        }
    }

    pub fn scheme(&self) -> NoSlipScheme {
        self.links.scheme()
    }

    pub fn subcycles(&self) -> usize {
        self.subcycles
    }

    pub fn links(&self) -> &LinkSet {
        &self.links
    }

    /// Cells currently covered by the sphere, ascending.
    pub fn solid_cells(&self) -> &[usize] {
        &self.solid
    }

    /// Maps the sphere onto the grid from scratch or incrementally, updates
    /// flags and rebuilds the link list. Returns the cells that changed state.
    pub fn remap(&mut self, field: &mut FluidField, body: &BodyState) -> Result<Transitions, SimError> {
        let sphere = body.sphere();
        let dims = field.dims();
        let [rx, ry, rz] = sphere.cell_range(dims, 0);
        let mut solid = Vec::new();
        for k in rz {
            for j in ry.clone() {
                for i in rx.clone() {
                    if sphere.contains(&geometry::cell_center(i, j, k)) {
                        solid.push(field.index(i, j, k));
                    }
                }
            }
        }
        solid.sort_unstable();
        let mut t = Transitions::default();
        let (mut a, mut b) = (0, 0);
        while a < self.solid.len() || b < solid.len() {
            match (self.solid.get(a), solid.get(b)) {
                (Some(&o), Some(&n)) if o == n => {
                    a += 1;
                    b += 1;
                }
                (Some(&o), Some(&n)) if o < n => {
                    t.uncovered.push(o);
                    a += 1;
                }
                (Some(_), Some(&n)) => {
                    t.covered.push(n);
                    b += 1;
                }
                (Some(&o), None) => {
                    t.uncovered.push(o);
                    a += 1;
                }
                (None, Some(&n)) => {
                    t.covered.push(n);
                    b += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        for &c in &t.uncovered {
            field.set_flag(c, CellFlag::Fluid);
        }
        for &c in &t.covered {
            field.set_flag(c, CellFlag::Solid);
        }
        self.solid = solid;
        self.rebuild_links(field, body)?;
        Ok(t)
    }

    fn rebuild_links(&mut self, field: &FluidField, body: &BodyState) -> Result<(), SimError> {
        let sphere = body.sphere();
        let bb = self.links.scheme() == NoSlipScheme::BounceBack;
        let [rx, ry, rz] = sphere.cell_range(field.dims(), 1);
        let mut links = Vec::new();
        for k in rz {
            for j in ry.clone() {
                for i in rx.clone() {
                    let cell = field.index(i, j, k);
                    if !field.is_fluid(cell) {
                        continue;
                    }
                    let x = field.center(cell);
                    for q in 1..Q {
                        let Some(nb) = field.neighbor(cell, q, 1) else { continue };
                        if field.is_fluid(nb) {
                            continue;
                        }
                        let delta = geometry::ray_sphere_delta(&x, q, &sphere)?;
                        let point = x + D3Q19::c(q) * if bb { 0.5 } else { delta };
                        links.push(BoundaryLink {
                            cell,
                            q,
                            delta,
                            point,
                            velocity: body.surface_velocity(&point),
                        });
                    }
                }
            }
        }
        self.links.set_links(field, links);
        Ok(())
    }

    /// Refills `cells` (newly uncovered) by normal extrapolation followed by
    /// the velocity-moment fix.
    pub fn reconstruct(&self, field: &mut FluidField, body: &BodyState, cells: &[usize], force: &Vec3) {
        let sphere = body.sphere();
        let pending = |c: usize| cells.binary_search(&c).is_ok();
        let mut refilled = Vec::with_capacity(cells.len());
        for &cell in cells {
            let x = field.center(cell);
            let v = body.surface_velocity(&x);
            let available = |c: Option<usize>| c.filter(|&c| field.is_fluid(c) && !pending(c));
            let f = match geometry::surface_normal_and_qn(&x, &sphere) {
                Ok((_, qn)) => {
                    let mut nbs = Vec::with_capacity(3);
                    for k in 1..=3 {
                        match available(field.neighbor(cell, qn, k)) {
                            Some(c) => nbs.push(field.cell_pdfs(c)),
                            None => break,
                        }
                    }
                    extrapolate(&nbs)
                }
                Err(_) => None,
            };
            let f = f.unwrap_or_else(|| {
                let mut sum = 0.0;
                let mut n = 0usize;
                for q in 1..Q {
                    if let Some(c) = available(field.neighbor(cell, q, 1)) {
                        sum += field.moments(c).rho;
                        n += 1;
                    }
                }
                let rho = if n > 0 { sum / n as f64 } else { lattice::RHO0 };
                lattice::equilibrium(rho, &v)
            });
            refilled.push(impose_velocity(&f, &(v - force * (0.5 / lattice::RHO0))));
        }
        for (&cell, f) in cells.iter().zip(&refilled) {
            field.set_cell_pdfs(cell, f);
        }
    }

    /// One coupled step: subcycled collide, stream and closures with force
    /// averaging, body update over the subcycled time, then remap and refill.
    pub fn step(
        &mut self,
        field: &mut FluidField,
        cfg: &CollisionConfig,
        domain: &DomainBoundaries,
        body: &mut BodyState,
        step: u64,
    ) -> Result<Loads, SimError> {
        self.links.update_velocities(|x| body.surface_velocity(x));
        let mut totals = Vec::with_capacity(self.subcycles);
        for _ in 0..self.subcycles {
            self.links.record_pre_collision(field);
            if let Some(cell) = field.collide(cfg) {
                return Err(SimError::Instability {
                    step,
                    cell: field.coords(cell),
                });
            }
            field.stream();
            totals.push(self.links.apply(field, &body.position));
            domain.apply(field, &cfg.force);
            field.swap();
        }
        let loads = Loads::from_subcycles(totals);
        body.integrate(&loads.force, &loads.torque, self.subcycles as f64)?;
        let t = self.remap(field, body)?;
        if !t.uncovered.is_empty() {
            self.reconstruct(field, body, &t.uncovered, &cfg.force);
        }
        Ok(loads)
    }
}

/// Extrapolation along the normal from 1 to 3 neighbors.
pub fn extrapolate(nbs: &[Pdfs]) -> Option<Pdfs> {
    let mut f = [0.0; Q];
    match nbs {
        [a, b, c, ..] => {
            for q in 0..Q {
                f[q] = 3.0 * a[q] - 3.0 * b[q] + c[q];
            }
        }
        [a, b] => {
            for q in 0..Q {
                f[q] = 2.0 * a[q] - b[q];
            }
        }
        [a] => f = *a,
        [] => return None,
    }
    Some(f)
}

/// Replaces the momentum of `f` by `velocity` (times `rho0`) along the
/// momentum rows of the orthogonal D3Q19 moment basis, leaving all other
/// moments, including density, untouched.
pub fn impose_velocity(f: &Pdfs, velocity: &Vec3) -> Pdfs {
    // |c_x|^2 summed over the stencil
    const NORM: f64 = 10.0;
    let dj = velocity * lattice::RHO0 - lattice::moments(f).velocity * lattice::RHO0;
    let mut out = *f;
    for (q, v) in out.iter_mut().enumerate() {
        *v += D3Q19::c(q).dot(&dj) / NORM;
    }
    out
}

/// Macroscopic velocity of a cell: the body velocity in covered cells,
/// otherwise `U + f/2`.
pub fn cell_velocity(field: &FluidField, body: &BodyState, cell: usize, force: &Vec3) -> Vec3 {
    if field.flag(cell) == CellFlag::Solid {
        body.surface_velocity(&field.center(cell))
    } else {
        lattice::macroscopic_velocity(&field.moments(cell).velocity, force)
    }
}

/// Number of cells flagged solid.
pub fn solid_count(field: &FluidField) -> usize {
    field.flags().iter().filter(|&&f| f == CellFlag::Solid).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_cells, CellClass};
    use crate::lattice::{CollisionOperator, MAGIC_DEFAULT};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn trt(nu: f64) -> CollisionConfig {
        CollisionConfig::from_viscosity(nu, MAGIC_DEFAULT, CollisionOperator::Trt).unwrap()
    }

    #[test]
    fn subcycle_average_is_the_mean() {
        let l = Loads::from_subcycles(vec![
            (Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.5, 0.0, 0.0)),
            (Vec3::new(3.0, 2.0, -1.0), Vec3::new(-0.5, 1.0, 0.0)),
        ]);
        assert_eq!(l.force, Vec3::new(2.0, 2.0, 1.0));
        assert_eq!(l.torque, Vec3::new(0.0, 0.5, 0.0));
    }

    #[test]
    fn extrapolation_ladder() {
        let c = [0.7; Q];
        assert_eq!(extrapolate(&[c, c, c]).unwrap(), c);
        let lin = |s: f64| -> Pdfs { std::array::from_fn(|q| 0.1 + 0.01 * q as f64 * s) };
        let e3 = extrapolate(&[lin(1.0), lin(2.0), lin(3.0)]).unwrap();
        let e2 = extrapolate(&[lin(1.0), lin(2.0)]).unwrap();
        for q in 0..Q {
            assert_relative_eq!(e3[q], lin(0.0)[q], epsilon = 1e-15);
            assert_relative_eq!(e2[q], lin(0.0)[q], epsilon = 1e-15);
        }
        let quad = |s: f64| -> Pdfs { std::array::from_fn(|q| 0.05 + 0.01 * q as f64 * s * s - 0.002 * s) };
        let e = extrapolate(&[quad(1.0), quad(2.0), quad(3.0)]).unwrap();
        for q in 0..Q {
            assert_relative_eq!(e[q], quad(0.0)[q], epsilon = 1e-14);
        }
        assert_eq!(extrapolate(&[c]).unwrap(), c);
        assert!(extrapolate(&[]).is_none());
    }

    #[test]
    fn velocity_fix_preserves_other_moments() {
        let mut f = lattice::equilibrium(1.02, &Vec3::new(0.01, -0.02, 0.03));
        f[4] += 1e-3;
        f[11] -= 2e-3;
        let target = Vec3::new(0.05, 0.0, -0.01);
        let g = impose_velocity(&f, &target);
        let m = lattice::moments(&g);
        assert!((m.velocity - target).norm() < 1e-15);
        assert_relative_eq!(m.rho, lattice::moments(&f).rho, epsilon = 1e-15);
        // stress moments unchanged
        for (a, b) in [(0, 0), (0, 1), (1, 2), (2, 2)] {
            let p = |h: &Pdfs| -> f64 { (0..Q).map(|q| h[q] * (D3Q19::C[q][a] * D3Q19::C[q][b]) as f64).sum() };
            assert_relative_eq!(p(&g), p(&f), epsilon = 1e-15);
        }
    }

    #[test]
    fn remap_matches_classification_and_translates() {
        let mut field = FluidField::new([20, 20, 20], [true; 3]);
        let cfg = trt(0.1);
        let mut mem = MemCoupling::new(NoSlipScheme::Cli, &cfg, 2);
        let mut body = BodyState::fixed(Vec3::new(9.7, 10.2, 9.9), 7.0);
        let t = mem.remap(&mut field, &body).unwrap();
        assert!(t.uncovered.is_empty());
        let classes = classify_cells(&body.sphere(), field.dims());
        for cell in 0..field.n_cells() {
            assert_eq!(classes[cell] == CellClass::Solid, field.flag(cell) == CellFlag::Solid);
        }
        assert_eq!(t.covered.len(), solid_count(&field));
        // Links are exactly the fluid-boundary cells' solid links.
        let boundary: std::collections::BTreeSet<usize> = mem.links().links().map(|l| l.cell).collect();
        let expected: std::collections::BTreeSet<usize> =
            (0..field.n_cells()).filter(|&c| classes[c] == CellClass::FluidBoundary).collect();
        assert_eq!(boundary, expected);

        // a sub-cell move that crosses no center
        body.position += Vec3::new(1e-3, 0.0, 0.0);
        let t = mem.remap(&mut field, &body).unwrap();
        assert_eq!(t, Transitions::default());

        body.position += Vec3::new(1.0, 0.0, 0.0);
        let t = mem.remap(&mut field, &body).unwrap();
        assert_eq!(t.covered.len(), t.uncovered.len());
        assert!(!t.covered.is_empty());
    }

    #[test]
    fn reconstruction_of_constant_field_and_velocity_constraint() {
        let mut field = FluidField::new([16, 16, 16], [true; 3]);
        let cfg = trt(0.1);
        let mut mem = MemCoupling::new(NoSlipScheme::Cli, &cfg, 2);
        let mut body = BodyState::fixed(Vec3::new(8.0, 8.0, 8.0), 6.0);
        body.velocity = Vec3::new(0.02, 0.0, 0.0);
        body.angular_velocity = Vec3::new(0.0, 0.0, 0.003);
        mem.remap(&mut field, &body).unwrap();
        let c = 0.04;
        for cell in 0..field.n_cells() {
            for q in 0..Q {
                field.set_pdf(cell, q, c);
            }
        }
        body.position += Vec3::new(0.8, 0.0, 0.0);
        let t = mem.remap(&mut field, &body).unwrap();
        assert!(!t.uncovered.is_empty());
        mem.reconstruct(&mut field, &body, &t.uncovered, &Vec3::zeros());
        for &cell in &t.uncovered {
            let m = field.moments(cell);
            assert_relative_eq!(m.rho, 19.0 * c, epsilon = 1e-14);
            let v = body.surface_velocity(&field.center(cell));
            assert!((m.velocity - v).norm() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_reproduces_linear_fields_before_fix() {
        // linear in position and already carrying the body velocity
        let mut field = FluidField::new([24, 24, 24], [true; 3]);
        let cfg = trt(0.1);
        let mut mem = MemCoupling::new(NoSlipScheme::Cli, &cfg, 2);
        let mut body = BodyState::fixed(Vec3::new(12.0, 12.0, 12.0), 6.0);
        mem.remap(&mut field, &body).unwrap();
        let gradient = Vec3::new(1e-3, -2e-3, 5e-4);
        let base = lattice::equilibrium(1.0, &Vec3::zeros());
        let profile = |x: &Vec3| -> Pdfs {
            // a density gradient: zero momentum everywhere, linear in x
            std::array::from_fn(|q| base[q] * (1.0 + gradient.dot(x)))
        };
        for cell in 0..field.n_cells() {
            let p = profile(&field.center(cell));
            field.set_cell_pdfs(cell, &p);
        }
        body.position += Vec3::new(0.0, 0.9, 0.0);
        let t = mem.remap(&mut field, &body).unwrap();
        mem.reconstruct(&mut field, &body, &t.uncovered, &Vec3::zeros());
        for &cell in &t.uncovered {
            let expected = profile(&field.center(cell));
            for q in 0..Q {
                assert!((field.pdf(cell, q) - expected[q]).abs() < 1e-14, "cell {cell} q {q}");
            }
        }
    }

    #[test]
    fn equilibrium_fallback_without_neighbors() {
        let mut field = FluidField::new([5, 5, 5], [true; 3]);
        for c in 0..field.n_cells() {
            field.set_flag(c, CellFlag::Solid);
        }
        let cell = field.index(2, 2, 2);
        field.set_flag(cell, CellFlag::Fluid);
        let mut body = BodyState::fixed(Vec3::new(0.5, 2.5, 2.5), 1.0);
        body.velocity = Vec3::new(0.02, 0.0, 0.0);
        let cfg = trt(0.1);
        let mem = MemCoupling::new(NoSlipScheme::BounceBack, &cfg, 2);
        mem.reconstruct(&mut field, &body, &[cell], &Vec3::zeros());
        let expected = lattice::equilibrium(1.0, &Vec3::new(0.02, 0.0, 0.0));
        for q in 0..Q {
            assert!((field.pdf(cell, q) - expected[q]).abs() < 1e-16);
        }
    }

    #[test]
    fn resting_sphere_in_resting_fluid_has_no_load() {
        for scheme in [NoSlipScheme::BounceBack, NoSlipScheme::Cli, NoSlipScheme::MultiReflection] {
            let cfg = trt(0.1);
            let mut field = FluidField::new([16, 16, 16], [true; 3]);
            let mut mem = MemCoupling::new(scheme, &cfg, 2);
            let mut body = BodyState::new(Vec3::new(8.1, 7.8, 8.3), 6.0, 1.0);
            mem.remap(&mut field, &body).unwrap();
            for step in 0..100 {
                let l = mem.step(&mut field, &cfg, &DomainBoundaries::default(), &mut body, step).unwrap();
                assert!(l.force.norm() < 1e-10 && l.torque.norm() < 1e-10);
            }
            assert!(body.velocity.norm() < 1e-10);
        }
    }

    #[test]
    fn co_moving_sphere_feels_no_force() {
        let d = 6.0;
        let v = Vec3::new(0.03, -0.01, 0.02);
        for scheme in [NoSlipScheme::BounceBack, NoSlipScheme::Cli, NoSlipScheme::MultiReflection] {
            let cfg = trt(0.05);
            let mut field = FluidField::new([20, 20, 20], [true; 3]);
            field.fill_equilibrium(1.0, &v);
            let mut mem = MemCoupling::new(scheme, &cfg, 2);
            let mut body = BodyState::fixed(Vec3::new(10.0, 10.0, 10.0), d);
            body.velocity = v;
            mem.remap(&mut field, &body).unwrap();
            for step in 0..40 {
                let l = mem.step(&mut field, &cfg, &DomainBoundaries::default(), &mut body, step).unwrap();
                assert!(l.force.norm() < 1e-3 * d * d * v.norm_squared(), "{scheme:?}: {:?}", l.force);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn remap_from_scratch_equals_incremental(dx in -1.5f64..1.5, dy in -1.5f64..1.5, dz in -1.5f64..1.5) {
            let mut field = FluidField::new([18, 18, 18], [true; 3]);
            let cfg = trt(0.1);
            let mut mem = MemCoupling::new(NoSlipScheme::Cli, &cfg, 2);
            let mut body = BodyState::fixed(Vec3::new(9.0, 9.0, 9.0), 7.0);
            mem.remap(&mut field, &body).unwrap();
            body.position += Vec3::new(dx, dy, dz);
            mem.remap(&mut field, &body).unwrap();
            let classes = classify_cells(&body.sphere(), field.dims());
            for cell in 0..field.n_cells() {
                prop_assert_eq!(classes[cell] == CellClass::Solid, field.flag(cell) == CellFlag::Solid);
            }
        }
    }
}
