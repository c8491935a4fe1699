//! Output writers: kinematics time series, key/value summaries and legacy
//! VTK volume dumps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::bench::settling::KinematicsRecord;
use crate::error::SimError;
use crate::field::CellFlag;
use crate::simulation::{Coupling, Simulation};
use crate::Vec3;

pub const TIMESERIES_HEADER: [&str; 19] = [
    "t_lattice", "t_ref", "upx", "upy", "upz", "u_pV", "u_pH", "omx", "omy", "omz", "Fx", "Fy", "Fz", "Tx", "Ty", "Tz",
    "Xx", "Xy", "Xz",
];

/// 17 significant digits, enough to read back every double exactly.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_error(path: &Path, e: csv::Error) -> SimError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => SimError::io(path, source),
        other => SimError::Diagnostics(format!("{}: {other:?}", path.display())),
    }
}

fn row(r: &KinematicsRecord) -> [f64; 19] {
    [
        r.t_lattice,
        r.t_ref,
        r.velocity.x,
        r.velocity.y,
        r.velocity.z,
        r.u_pv,
        r.u_ph,
        r.angular_velocity.x,
        r.angular_velocity.y,
        r.angular_velocity.z,
        r.force.x,
        r.force.y,
        r.force.z,
        r.torque.x,
        r.torque.y,
        r.torque.z,
        r.position.x,
        r.position.y,
        r.position.z,
    ]
}

/// Writes one CSV row per record. Velocities, rotation rates, loads and
/// positions are in lattice units; `u_pV` and `u_pH` are dimensionless.
pub fn write_timeseries(records: &[KinematicsRecord], path: &Path) -> Result<(), SimError> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(TIMESERIES_HEADER).map_err(|e| csv_error(path, e))?;
    for r in records {
        w.write_record(row(r).map(num)).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// Reads a file written by [`write_timeseries`].
pub fn read_timeseries(path: &Path) -> Result<Vec<[f64; 19]>, SimError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(TIMESERIES_HEADER) {
        return Err(SimError::Diagnostics(format!("{}: unexpected header", path.display())));
    }
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let mut values = [0.0; 19];
        for (v, s) in values.iter_mut().zip(record.iter()) {
            *v = s
                .parse()
                .map_err(|e| SimError::Diagnostics(format!("{}: bad number `{s}`: {e}", path.display())))?;
        }
        out.push(values);
    }
    Ok(out)
}

/// Two-column `key,value` CSV.
pub fn write_summary(rows: &[(String, String)], path: &Path) -> Result<(), SimError> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["key", "value"]).map_err(|e| csv_error(path, e))?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn summary_number(key: &str, v: f64) -> (String, String) {
    (key.to_owned(), num(v))
}

/// Point data of a volume dump.
pub struct FieldData<'a> {
    pub dims: [usize; 3],
    pub velocity: &'a [Vec3],
    pub density: &'a [f64],
    pub flags: &'a [CellFlag],
    pub epsilon: Option<&'a [f64]>,
}

/// Legacy ASCII VTK structured-points file with the macroscopic velocity,
/// density, cell flags (1 = solid) and, if given, the solid volume fraction.
pub fn write_vtk(title: &str, data: &FieldData, path: &Path) -> Result<(), SimError> {
    let io = |e| SimError::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    let [nx, ny, nz] = data.dims;
    let n = nx * ny * nz;
    writeln!(w, "# vtk DataFile Version 3.0").map_err(io)?;
    writeln!(w, "{title}").map_err(io)?;
    writeln!(w, "ASCII").map_err(io)?;
    writeln!(w, "DATASET STRUCTURED_POINTS").map_err(io)?;
    writeln!(w, "DIMENSIONS {nx} {ny} {nz}").map_err(io)?;
    writeln!(w, "ORIGIN 0.5 0.5 0.5").map_err(io)?;
    writeln!(w, "SPACING 1 1 1").map_err(io)?;
    writeln!(w, "POINT_DATA {n}").map_err(io)?;
    writeln!(w, "VECTORS velocity double").map_err(io)?;
    for u in &data.velocity[..n] {
        writeln!(w, "{} {} {}", num(u.x), num(u.y), num(u.z)).map_err(io)?;
    }
    writeln!(w, "SCALARS density double 1\nLOOKUP_TABLE default").map_err(io)?;
    for &r in &data.density[..n] {
        writeln!(w, "{}", num(r)).map_err(io)?;
    }
    writeln!(w, "SCALARS flags int 1\nLOOKUP_TABLE default").map_err(io)?;
    for &f in &data.flags[..n] {
        writeln!(w, "{}", u8::from(f == CellFlag::Solid)).map_err(io)?;
    }
    if let Some(eps) = data.epsilon {
        writeln!(w, "SCALARS epsilon double 1\nLOOKUP_TABLE default").map_err(io)?;
        for &e in &eps[..n] {
            writeln!(w, "{}", num(e)).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Volume dump of a simulation; the solid fraction is included for
/// partially saturated cells coupling.
pub fn write_field(sim: &Simulation, path: &Path) -> Result<(), SimError> {
    let n = sim.field.n_cells();
    let velocity: Vec<Vec3> = (0..n).map(|c| sim.cell_velocity(c)).collect();
    let density: Vec<f64> = (0..n).map(|c| sim.cell_density(c)).collect();
    let epsilon = matches!(sim.coupling, Coupling::Psm(_)).then(|| sim.solid_fraction_field());
    let data = FieldData {
        dims: sim.field.dims(),
        velocity: &velocity,
        density: &density,
        flags: sim.field.flags(),
        epsilon: epsilon.as_deref(),
    };
    write_vtk(&format!("{} step {}", sim.kind(), sim.lbm_steps()), &data, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundaries::DomainBoundaries;
    use crate::field::FluidField;
    use crate::rigidbody::BodyState;
    use crate::simulation::CouplingKind;

    fn record(k: f64) -> KinematicsRecord {
        KinematicsRecord {
            t_lattice: 2.0 * k,
            t_ref: 0.1 / 3.0 * k,
            velocity: Vec3::new(1e-3, -2.0 / 7.0, 1e-300),
            u_pv: -1.2345678901234567,
            u_ph: 0.0,
            angular_velocity: Vec3::new(f64::MIN_POSITIVE, 3.0, -0.0),
            force: Vec3::new(k, k * k, 1.0 / 3.0),
            torque: Vec3::zeros(),
            position: Vec3::new(48.06, 48.06, 96.12),
            omega_pv: 0.0,
            omega_ph: 0.0,
            omega_px: 0.0,
        }
    }

    #[test]
    fn empty_series_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        write_timeseries(&[], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, TIMESERIES_HEADER.join(",") + "\n");
    }

    #[test]
    fn one_record_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k.csv");
        let r = record(3.0);
        write_timeseries(&[r], &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 19);
        let back = read_timeseries(&p).unwrap();
        let expected = row(&r);
        for (a, b) in back[0].iter().zip(expected.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let rs: Vec<_> = (0..5).map(|k| record(k as f64)).collect();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        write_timeseries(&rs, &a).unwrap();
        write_timeseries(&rs, &b).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }

    fn vtk_section(text: &str, name: &str, width: usize) -> Vec<f64> {
        let mut lines = text.lines().skip_while(|l| !l.contains(name));
        let head = lines.next().unwrap();
        if head.starts_with("SCALARS") {
            lines.next();
        }
        lines
            .take_while(|l| !l.starts_with("SCALARS") && !l.starts_with("VECTORS"))
            .flat_map(|l| l.split_whitespace().map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .chunks(width)
            .map(|c| c.iter().map(|v| v.abs()).sum())
            .collect()
    }

    #[test]
    fn resting_field_dump() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.vtk");
        let field = FluidField::new([2, 2, 2], [true; 3]);
        let velocity: Vec<Vec3> = (0..8).map(|c| field.moments(c).velocity).collect();
        let density: Vec<f64> = (0..8).map(|c| field.moments(c).rho).collect();
        let data = FieldData {
            dims: field.dims(),
            velocity: &velocity,
            density: &density,
            flags: field.flags(),
            epsilon: None,
        };
        write_vtk("rest", &data, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("DIMENSIONS 2 2 2"));
        assert!(text.contains("POINT_DATA 8"));
        let v = vtk_section(&text, "VECTORS velocity", 3);
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|&s| s == 0.0));
        assert!(!text.contains("epsilon"));
    }

    #[test]
    fn psm_dump_carries_sphere_volume() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.vtk");
        let body = BodyState::fixed(Vec3::new(10.3, 9.8, 10.1), 10.0);
        let sim = Simulation::new([20, 20, 20], DomainBoundaries::default(), 0.1, Vec3::zeros(), body, CouplingKind::M2B2, 1)
            .unwrap();
        write_field(&sim, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let eps: f64 = vtk_section(&text, "SCALARS epsilon", 1).iter().sum();
        assert!((eps - body.volume()).abs() / body.volume() < 5e-3);
    }
}
