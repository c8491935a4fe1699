//! Post-processing of settling runs: profile errors, wake length and
//! statistics of kinematic time series.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::SimError;
use crate::simulation::Simulation;
use crate::Vec3;

/// Root mean square difference of two profiles sampled at the same points.
pub fn rms_error(profile: &[f64], reference: &[f64]) -> Result<f64, SimError> {
    if profile.len() != reference.len() {
        return Err(SimError::Diagnostics(format!(
            "profile has {} samples but the reference has {}",
            profile.len(),
            reference.len()
        )));
    }
    if profile.is_empty() {
        return Err(SimError::Diagnostics("empty profile".into()));
    }
    let sum: f64 = profile.iter().zip(reference).map(|(p, r)| (r - p).powi(2)).sum();
    Ok((sum / profile.len() as f64).sqrt())
}

/// Trilinear interpolation of cell-centered values at `x`. Coordinates are
/// clamped to the outermost cell centers.
pub fn trilinear(dims: [usize; 3], value: impl Fn(usize) -> Vec3, x: &Vec3) -> Vec3 {
    let mut lo = [0usize; 3];
    let mut w = [0.0; 3];
    for a in 0..3 {
        let s = (x[a] - 0.5).clamp(0.0, (dims[a] - 1) as f64);
        let i = (s.floor() as usize).min(dims[a].saturating_sub(2));
        lo[a] = i;
        w[a] = if dims[a] > 1 { s - i as f64 } else { 0.0 };
    }
    let mut out = Vec3::zeros();
    for corner in 0..8 {
        let mut weight = 1.0;
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let hi = corner >> a & 1 == 1;
            idx[a] = (lo[a] + usize::from(hi)).min(dims[a] - 1);
            weight *= if hi { w[a] } else { 1.0 - w[a] };
        }
        if weight != 0.0 {
            out += value(idx[0] + dims[0] * (idx[1] + dims[1] * idx[2])) * weight;
        }
    }
    out
}

/// Samples `n >= 2` equidistant points on the segment `from..=to`.
pub fn line_probe(sim: &Simulation, from: &Vec3, to: &Vec3, n: usize) -> Vec<(Vec3, Vec3)> {
    let dims = sim.field.dims();
    (0..n)
        .map(|i| {
            let x = from + (to - from) * (i as f64 / (n - 1).max(1) as f64);
            (x, trilinear(dims, |c| sim.cell_velocity(c), &x))
        })
        .collect()
}

/// Recirculation length in diameters behind a sphere.
///
/// `relative` gives the fluid velocity relative to the sphere at a point;
/// the wake axis starts at the sphere center and points along `direction`
/// (the direction of the relative flow far from the sphere). The scan walks
/// outward from the surface in steps of `step` and bisects the first change
/// from backflow to forward flow.
pub fn recirculation_length_along(
    relative: impl Fn(&Vec3) -> Vec3,
    center: &Vec3,
    direction: &Vec3,
    diameter: f64,
    max_distance: f64,
    step: f64,
) -> Result<f64, SimError> {
    let d = direction.normalize();
    let r = 0.5 * diameter;
    let axial = |s: f64| relative(&(center + d * s)).dot(&d);
    let none = || SimError::Diagnostics("no recirculation behind the sphere".into());
    let mut s = r;
    let mut prev = axial(s);
    let mut seen_backflow = prev < 0.0;
    while s < max_distance {
        let next = (s + step).min(max_distance);
        let v = axial(next);
        if v < 0.0 {
            seen_backflow = true;
        } else if seen_backflow && prev < 0.0 {
            let (mut a, mut b) = (s, next);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if axial(m) < 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok((0.5 * (a + b) - r) / diameter);
        }
        prev = v;
        s = next;
    }
    Err(none())
}

/// Recirculation length of the current flow field, with the relative flow
/// far from the sphere given by `free_stream` minus the body velocity.
pub fn recirculation_length(sim: &Simulation, free_stream: &Vec3) -> Result<f64, SimError> {
    let dims = sim.field.dims();
    let body = &sim.body;
    let direction = free_stream - body.velocity;
    if direction.norm() == 0.0 {
        return Err(SimError::Diagnostics("no relative flow past the sphere".into()));
    }
    let d = direction.normalize();
    // distance to the domain exit along the axis, minus one cell
    let mut max_distance = f64::INFINITY;
    for a in 0..3 {
        if d[a] > 1e-12 {
            max_distance = max_distance.min((dims[a] as f64 - 1.0 - body.position[a]) / d[a]);
        } else if d[a] < -1e-12 {
            max_distance = max_distance.min((body.position[a] - 1.0) / -d[a]);
        }
    }
    recirculation_length_along(
        |x| trilinear(dims, |c| sim.cell_velocity(c), x) - body.velocity,
        &body.position,
        &d,
        body.diameter(),
        max_distance,
        0.25,
    )
}

/// Mean and RMS fluctuation of a signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStats {
    pub mean: f64,
    pub rms: f64,
}

pub fn signal_stats(x: &[f64]) -> SignalStats {
    pooled_stats(&[x])
}

/// Statistics over several samples pooled together: the mean of all values
/// and the RMS deviation from that common mean.
pub fn pooled_stats(samples: &[&[f64]]) -> SignalStats {
    let n: usize = samples.iter().map(|s| s.len()).sum();
    if n == 0 {
        return SignalStats { mean: f64::NAN, rms: f64::NAN };
    }
    // shifted by the first value, which keeps constant signals exact
    let values = || samples.iter().flat_map(|s| s.iter());
    let shift = *values().next().unwrap();
    let offset = values().map(|v| v - shift).sum::<f64>() / n as f64;
    let var = values().map(|v| (v - shift - offset).powi(2)).sum::<f64>() / n as f64;
    SignalStats {
        mean: shift + offset,
        rms: var.sqrt(),
    }
}

/// Frequency of the largest DFT peak of the linearly detrended signal,
/// sampled every `dt`. At least two periods must fit into the window.
pub fn dominant_frequency(x: &[f64], dt: f64) -> Result<f64, SimError> {
    let n = x.len();
    if n < 4 {
        return Err(SimError::Diagnostics(format!("{n} samples are too few for a spectrum")));
    }
    // least squares line through (i, x_i)
    let nf = n as f64;
    let im = (nf - 1.0) / 2.0;
    let xm = x.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let di = i as f64 - im;
        sxy += di * (v - xm);
        sxx += di * di;
    }
    let slope = sxy / sxx;
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, v)| Complex::new(v - xm - slope * (i as f64 - im), 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (k, _) = buf[1..=n / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c.norm_sqr()))
        .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if k < 2 {
        return Err(SimError::Diagnostics(format!(
            "window of {:.3} time units holds fewer than two oscillation periods",
            nf * dt
        )));
    }
    Ok(k as f64 / (nf * dt))
}

/// Histogram normalized to unit area.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }
}

/// Histogram of `x` on `bins` equal bins spanning `lo..hi`; values outside
/// are dropped.
pub fn histogram(x: &[f64], bins: usize, lo: f64, hi: f64) -> Histogram {
    assert!(bins > 0 && hi > lo);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        if v >= lo && v <= hi {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
    }
    let total = counts.iter().sum::<usize>().max(1) as f64;
    Histogram {
        edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
    }
}

/// Histogram of the standardized signal `(x - mean) / rms` on `-4..4`.
/// A constant signal puts all its mass in the central bin.
pub fn standardized_pdf(x: &[f64], bins: usize) -> Histogram {
    let s = signal_stats(x);
    let z: Vec<f64> = if s.rms > 0.0 {
        x.iter().map(|v| (v - s.mean) / s.rms).collect()
    } else {
        vec![0.0; x.len()]
    };
    histogram(&z, bins, -4.0, 4.0)
}

/// Normalized autocorrelation for lags `0..=max_lag`. A constant signal
/// correlates perfectly with itself.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let s = signal_stats(x);
    let d: Vec<f64> = x.iter().map(|v| v - s.mean).collect();
    let var: f64 = d.iter().map(|v| v * v).sum();
    (0..=max_lag.min(x.len().saturating_sub(1)))
        .map(|k| {
            if var == 0.0 {
                1.0
            } else {
                d.iter().zip(&d[k..]).map(|(a, b)| a * b).sum::<f64>() / var
            }
        })
        .collect()
}

/// Dimensionless sphere kinematics in the form they are compared.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Components {
    pub u_pv: Vec<f64>,
    pub u_ph: Vec<f64>,
    pub omega_pv: Vec<f64>,
    pub omega_ph: Vec<f64>,
    pub omega_px: Vec<f64>,
}

impl Components {
    pub fn len(&self) -> usize {
        self.u_pv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_pv.is_empty()
    }

    pub fn named(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("u_pV", &self.u_pv),
            ("u_pH", &self.u_ph),
            ("omega_pV", &self.omega_pv),
            ("omega_pH", &self.omega_ph),
            ("omega_px", &self.omega_px),
        ]
    }

    /// Drops the leading `fraction` of every signal.
    pub fn discard_transient(&self, fraction: f64) -> Self {
        let skip = ((self.len() as f64) * fraction.clamp(0.0, 1.0)).floor() as usize;
        let cut = |v: &Vec<f64>| v[skip.min(v.len())..].to_vec();
        Self {
            u_pv: cut(&self.u_pv),
            u_ph: cut(&self.u_ph),
            omega_pv: cut(&self.omega_pv),
            omega_ph: cut(&self.omega_ph),
            omega_px: cut(&self.omega_px),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityStatistics {
    pub stats: Vec<(&'static str, SignalStats)>,
    /// Dominant frequency of `u_pH`, if the window resolves one.
    pub frequency: Result<f64, String>,
    pub pdfs: Vec<(&'static str, Histogram)>,
    pub autocorrelations: Vec<(&'static str, Vec<f64>)>,
}

impl VelocityStatistics {
    pub fn get(&self, name: &str) -> Option<SignalStats> {
        self.stats.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
    }
}

/// Means, fluctuations, spectrum peak, PDFs and autocorrelations of one or
/// several samples after dropping the leading `transient` fraction of each.
/// Samples share one time step `dt`; the frequency comes from the first.
pub fn velocity_statistics(samples: &[Components], dt: f64, transient: f64) -> VelocityStatistics {
    let kept: Vec<Components> = samples.iter().map(|s| s.discard_transient(transient)).collect();
    let empty = Components::default();
    let first = kept.first().unwrap_or(&empty);
    let names = first.named().map(|(n, _)| n);
    let series = |i: usize| kept.iter().map(|k| k.named()[i].1).collect::<Vec<_>>();
    let stats = names.iter().enumerate().map(|(i, n)| (*n, pooled_stats(&series(i)))).collect();
    let frequency = dominant_frequency(&first.u_ph, dt).map_err(|e| e.to_string());
    let pdfs = names
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, standardized_pdf(&series(i).concat(), 40)))
        .collect();
    let max_lag = first.len() / 2;
    let autocorrelations = names
        .iter()
        .enumerate()
        .map(|(i, n)| (*n, autocorrelation(first.named()[i].1, max_lag)))
        .collect();
    VelocityStatistics {
        stats,
        frequency,
        pdfs,
        autocorrelations,
    }
}
