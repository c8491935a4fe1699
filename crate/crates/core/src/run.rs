//! Executes one configured run and writes its artifacts into the run
//! directory: the echoed `config.toml` plus command-specific CSV files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::diagnostics::{recirculation_length, velocity_statistics};
use crate::bench::settling::{calibrate, settle_with, Calibration, KinematicsSeries, SettlingCase};
use crate::bench::stokes;
use crate::config::{Command, RunConfig};
use crate::error::SimError;
use crate::output::{summary_number, write_field, write_summary, write_timeseries};
use crate::simulation::Simulation;

/// Creates the run directory, echoes the configuration and runs the command.
/// Returns the directory. Sweeps are expanded by the caller.
pub fn execute(cfg: &RunConfig) -> Result<PathBuf, SimError> {
    let dir = cfg.run_directory();
    fs::create_dir_all(&dir).map_err(|e| SimError::io(&dir, e))?;
    let echo = dir.join("config.toml");
    fs::write(&echo, cfg.to_toml()).map_err(|e| SimError::io(&echo, e))?;
    log::info!("{} -> {}", cfg.run_name(), dir.display());
    match cfg.command {
        Command::Stokes => run_stokes(cfg, &dir)?,
        Command::Calibrate => run_calibrate(cfg, &dir)?,
        Command::Settle => run_settle(cfg, &dir)?,
        Command::Sweep => {
            return Err(SimError::Diagnostics("a sweep must be expanded into its runs".into()));
        }
    }
    Ok(dir)
}

fn text(key: &str, v: impl ToString) -> (String, String) {
    (key.to_owned(), v.to_string())
}

fn run_stokes(cfg: &RunConfig, dir: &Path) -> Result<(), SimError> {
    let case = cfg.stokes_case();
    let mut sim = case.simulation()?;
    let result = stokes::converge(&case, &mut sim);
    if cfg.output.dump_every > 0 {
        write_field(&sim, &dir.join("field.vtk"))?;
    }
    let r = result?;
    log::info!("{} nu={}: C = {:.6} after {} steps", case.coupling, case.nu, r.c, r.steps);
    let rows = vec![
        text("coupling", case.coupling),
        summary_number("nu", case.nu),
        text("length", case.length),
        summary_number("forcing", case.forcing),
        summary_number("C", r.c),
        summary_number("drag", r.drag),
        summary_number("mean_velocity", r.mean_velocity),
        text("steps", r.steps),
    ];
    write_summary(&rows, &dir.join("stokes.csv"))
}

fn calibration_rows(case: &SettlingCase, cal: &Calibration) -> Vec<(String, String)> {
    let d = case.diameter();
    let u_ref = cal.velocity_scale(d, case.density_ratio);
    vec![
        text("regime", case.regime),
        text("coupling", case.coupling),
        text("resolution", case.resolution),
        summary_number("galileo_target", case.galileo),
        summary_number("galileo", cal.galileo),
        summary_number("nu", cal.nu),
        summary_number("gravity", cal.gravity.z),
        summary_number("drag", cal.drag),
        text("iterations", cal.iterations),
        summary_number("u_ref", u_ref),
        summary_number("t_ref", d / u_ref),
    ]
}

fn run_calibrate(cfg: &RunConfig, dir: &Path) -> Result<(), SimError> {
    let case = cfg.settling_case();
    let (sim, cal) = calibrate(&case)?;
    log::info!("Ga = {:.8} at nu = {:.8} after {} iterations", cal.galileo, cal.nu, cal.iterations);
    if cfg.output.dump_every > 0 {
        write_field(&sim, &dir.join("field.vtk"))?;
    }
    let mut rows = calibration_rows(&case, &cal);
    rows.push(text("lbm_steps", sim.lbm_steps()));
    write_summary(&rows, &dir.join("calibration.csv"))
}

fn run_settle(cfg: &RunConfig, dir: &Path) -> Result<(), SimError> {
    let base = cfg.settling_case();
    let (sim, cal) = calibrate(&base)?;
    write_summary(&calibration_rows(&base, &cal), &dir.join("calibration.csv"))?;
    let dump_every = cfg.output.dump_every;
    let mut series: Vec<KinematicsSeries> = Vec::new();
    let mut recirculation = Vec::new();
    for i in 0..cfg.samples() as u64 {
        let case = SettlingCase {
            seed: base.seed + i,
            ..base.clone()
        };
        let seed = case.seed;
        let mut step = 0u64;
        let dump = |sim: &Simulation, _: &_| -> Result<(), SimError> {
            step += 1;
            if dump_every > 0 && step % dump_every == 0 {
                write_field(sim, &dir.join(format!("field-s{seed}-{step:08}.vtk")))?;
            }
            Ok(())
        };
        let (s, last) = settle_with(&case, sim.clone(), &cal, dump)?;
        write_timeseries(&s.records, &dir.join(format!("kinematics-s{seed}.csv")))?;
        recirculation.push(recirculation_length(&last, &case.inflow()));
        series.push(s);
    }
    write_statistics(&base, &series, &recirculation, dir)?;
    match series.into_iter().find_map(|s| s.failure) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_statistics(
    case: &SettlingCase,
    series: &[KinematicsSeries],
    recirculation: &[Result<f64, SimError>],
    dir: &Path,
) -> Result<(), SimError> {
    let samples: Vec<_> = series.iter().map(KinematicsSeries::components).collect();
    let dt = series.first().map_or(f64::NAN, KinematicsSeries::dt);
    let stats = velocity_statistics(&samples, dt, case.transient);
    let mut rows = vec![
        text("regime", case.regime),
        text("coupling", case.coupling),
        text("resolution", case.resolution),
        text("samples", series.len()),
        text("records", series.iter().map(|s| s.records.len()).sum::<usize>()),
    ];
    for (name, s) in &stats.stats {
        rows.push(summary_number(&format!("{name}_mean"), s.mean));
        rows.push(summary_number(&format!("{name}_rms"), s.rms));
    }
    match &stats.frequency {
        Ok(f) => rows.push(summary_number("frequency", *f)),
        Err(e) => rows.push(text("frequency", format!("n/a ({e})"))),
    }
    for (s, l) in series.iter().zip(recirculation) {
        let key = format!("recirculation_length_s{}", s.case.seed);
        match l {
            Ok(v) => rows.push(summary_number(&key, *v)),
            Err(e) => rows.push(text(&key, format!("n/a ({e})"))),
        }
    }
    for s in series {
        if let Some(e) = &s.failure {
            rows.push(text(&format!("failure_s{}", s.case.seed), e));
        }
    }
    write_summary(&rows, &dir.join("statistics.csv"))?;

    let path = dir.join("pdf.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| SimError::Diagnostics(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| SimError::Diagnostics(format!("{}: {e}", path.display()));
    w.write_record(["quantity", "center", "density"]).map_err(io)?;
    for (name, h) in &stats.pdfs {
        for (c, d) in h.centers().zip(&h.density) {
            w.write_record([name.to_string(), format!("{c:.16e}"), format!("{d:.16e}")]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| SimError::io(&path, e))
}
