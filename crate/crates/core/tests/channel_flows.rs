use particle_lbm::bench::diagnostics::rms_error;
use particle_lbm::boundaries::{BoundaryLink, DomainBoundaries, FaceCondition, LinkSet, NoSlipScheme};
use particle_lbm::field::{CellFlag, FluidField};
use particle_lbm::lattice::{macroscopic_velocity, CollisionConfig, CollisionOperator, D3Q19, MAGIC_DEFAULT, Q};
use particle_lbm::Vec3;

fn channel(height: usize) -> FluidField {
    let mut field = FluidField::new([1, height, 1], [true, false, true]);
    field.fill_equilibrium(1.0, &Vec3::zeros());
    field
}

fn velocity_profile(field: &FluidField, force: &Vec3) -> Vec<f64> {
    (0..field.dims()[1])
        .map(|j| {
            let m = field.moments(field.index(0, j, 0));
            macroscopic_velocity(&m.velocity, force).x
        })
        .collect()
}

#[test]
fn force_driven_poiseuille_flow_matches_parabola() {
    let h = 32;
    let nu = 0.1;
    let a = 1e-6;
    let force = Vec3::new(a, 0.0, 0.0);
    let cfg = CollisionConfig::from_viscosity(nu, MAGIC_DEFAULT, CollisionOperator::Trt)
        .unwrap()
        .with_force(force);
    let walls = DomainBoundaries::default()
        .with_face(1, false, FaceCondition::Velocity(Vec3::zeros()))
        .with_face(1, true, FaceCondition::Velocity(Vec3::zeros()));
    let mut field = channel(h);
    for _ in 0..60_000 {
        field.collide(&cfg);
        field.stream();
        walls.apply(&mut field, &force);
        field.swap();
    }
    let u = velocity_profile(&field, &force);
    // half-way walls at y = 0 and y = h
    let exact: Vec<f64> = (0..h)
        .map(|j| {
            let y = j as f64 + 0.5;
            a / (2.0 * nu) * y * (h as f64 - y)
        })
        .collect();
    let mid = h / 2;
    let midchannel = ((u[mid] - exact[mid]) / exact[mid]).abs();
    let worst = u.iter().zip(&exact).map(|(u, e)| ((u - e) / e).abs()).fold(0.0, f64::max);
    let rms = rms_error(&u, &exact).unwrap();
    println!("Poiseuille: midchannel {midchannel:.3e}, worst cell {worst:.3e}, rms {rms:.3e}");
    assert!(midchannel < 1e-3);
    assert!(worst < 1e-3);
}

#[test]
fn multi_reflection_reproduces_linear_shear_past_off_lattice_wall() {
    // Cells 0 and 1 are solid; the wall crosses the links of cell 2 at delta.
    let h = 16;
    let delta = 0.3;
    let u_top = 0.01;
    let cfg = CollisionConfig::from_viscosity(1.0 / 6.0, MAGIC_DEFAULT, CollisionOperator::Trt).unwrap();
    let top = DomainBoundaries::default().with_face(1, true, FaceCondition::Velocity(Vec3::new(u_top, 0.0, 0.0)));
    let mut field = channel(h);
    for j in 0..2 {
        field.set_flag(field.index(0, j, 0), CellFlag::Solid);
    }
    let cell = field.index(0, 2, 0);
    let wall_y = 2.5 - delta;
    let links: Vec<BoundaryLink> = (1..Q)
        .filter(|&q| D3Q19::C[q][1] == -1)
        .map(|q| BoundaryLink {
            cell,
            q,
            delta,
            point: field.center(cell) + D3Q19::c(q) * delta,
            velocity: Vec3::zeros(),
        })
        .collect();
    assert_eq!(links.len(), 5);
    let mut set = LinkSet::new(NoSlipScheme::MultiReflection, cfg.lambda_minus);
    set.set_links(&field, links);
    assert_eq!(set.fallbacks().mr_to_cli + set.fallbacks().to_bounce_back, 0);
    for _ in 0..20_000 {
        set.record_pre_collision(&field);
        field.collide(&cfg);
        field.stream();
        set.apply(&mut field, &Vec3::zeros());
        top.apply(&mut field, &Vec3::zeros());
        field.swap();
    }
    let u = velocity_profile(&field, &Vec3::zeros());
    let worst = (2..h)
        .map(|j| {
            let exact = u_top * (j as f64 + 0.5 - wall_y) / (h as f64 - wall_y);
            (u[j] - exact).abs() / u_top
        })
        .fold(0.0, f64::max);
    println!("MR linear shear, delta = {delta}: worst error {worst:.3e} of the wall speed");
    assert!(worst < 1e-8);
}

fn wall_links(field: &FluidField, cell: usize, cy: i32, delta: f64) -> Vec<BoundaryLink> {
    (1..Q)
        .filter(|&q| D3Q19::C[q][1] == cy)
        .map(|q| BoundaryLink {
            cell,
            q,
            delta,
            point: field.center(cell) + D3Q19::c(q) * delta,
            velocity: Vec3::zeros(),
        })
        .collect()
}

fn off_lattice_poiseuille(scheme: NoSlipScheme, nu: f64, delta: f64) -> f64 {
    // Two solid cells on each side; both walls cut the first fluid links at delta.
    let h = 20;
    let a = 1e-6;
    let force = Vec3::new(a, 0.0, 0.0);
    let cfg = CollisionConfig::from_viscosity(nu, MAGIC_DEFAULT, CollisionOperator::Trt)
        .unwrap()
        .with_force(force);
    let mut field = channel(h);
    for j in [0, 1, h - 2, h - 1] {
        field.set_flag(field.index(0, j, 0), CellFlag::Solid);
    }
    let mut links = wall_links(&field, field.index(0, 2, 0), -1, delta);
    links.extend(wall_links(&field, field.index(0, h - 3, 0), 1, delta));
    let mut set = LinkSet::new(scheme, cfg.lambda_minus);
    set.set_links(&field, links);
    assert_eq!(set.fallbacks().mr_to_cli + set.fallbacks().to_bounce_back, 0);
    let steps = (15.0 * (h * h) as f64 / nu) as usize;
    for _ in 0..steps {
        set.record_pre_collision(&field);
        field.collide(&cfg);
        field.stream();
        set.apply(&mut field, &force);
        field.swap();
    }
    let u = velocity_profile(&field, &force);
    let (y0, y1) = (2.5 - delta, (h - 3) as f64 + 0.5 + delta);
    let peak = a / (8.0 * nu) * (y1 - y0) * (y1 - y0);
    (2..h - 2)
        .map(|j| {
            let y = j as f64 + 0.5;
            (u[j] - a / (2.0 * nu) * (y - y0) * (y1 - y)).abs() / peak
        })
        .fold(0.0, f64::max)
}

/// The MR closure is exact for the parabolic profile at any wall position and
/// viscosity; CLI is not.
#[test]
fn multi_reflection_reproduces_poiseuille_past_off_lattice_walls() {
    for nu in [0.01, 0.1, 0.5] {
        let mr = off_lattice_poiseuille(NoSlipScheme::MultiReflection, nu, 0.3);
        let cli = off_lattice_poiseuille(NoSlipScheme::Cli, nu, 0.3);
        println!("off-lattice Poiseuille, nu = {nu}: MR {mr:.3e}, CLI {cli:.3e} of the peak");
        assert!(mr < 1e-8, "nu = {nu}");
    }
}
