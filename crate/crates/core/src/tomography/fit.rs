//! Sinusoidal fits of outcome fractions along τ₂.
//!
//! The model is `y(τ) = c + A·cos(ωτ − φ)`. With this sign convention φ is
//! the azimuth of the teleported input on the equator, so inputs D and R
//! differ by +π/2.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix3, Vector3};

use crate::coincidence::fidelity::{window_counts, Window};
use crate::coincidence::map::OutcomeMap;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FreqMode {
    /// Use the given angular frequency (rad/ps).
    Fixed(f64),
    /// Search for the frequency, starting from the given guess (rad/ps).
    Free(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub amplitude: f64,
    /// Radians in (−π, π].
    pub phase: f64,
    pub offset: f64,
    pub angular_freq: f64,
    /// Weighted root-mean-square residual.
    pub residual_rms: f64,
}

impl SinusoidFit {
    pub fn eval(&self, tau: f64) -> f64 {
        self.offset + self.amplitude * (self.angular_freq * tau - self.phase).cos()
    }

    pub fn period_ps(&self) -> f64 {
        2.0 * PI / self.angular_freq
    }
}

fn wrap_phase(p: f64) -> f64 {
    let mut x = (p + PI).rem_euclid(2.0 * PI) - PI;
    if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

/// Weighted linear least squares at fixed ω. Returns the fit and the
/// weighted sum of squared residuals.
fn solve_fixed(t: &[f64], y: &[f64], w: &[f64], omega: f64) -> Result<(SinusoidFit, f64)> {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for ((&ti, &yi), &wi) in t.iter().zip(y).zip(w) {
        let row = Vector3::new(1.0, (omega * ti).cos(), (omega * ti).sin());
        ata += wi * row * row.transpose();
        aty += wi * yi * row;
    }
    let sol = ata
        .lu()
        .solve(&aty)
        .ok_or_else(|| Error::InsufficientData("sinusoid design matrix is singular".into()))?;
    let (c, p, q) = (sol[0], sol[1], sol[2]);
    let fit = SinusoidFit {
        amplitude: p.hypot(q),
        phase: wrap_phase(q.atan2(p)),
        offset: c,
        angular_freq: omega,
        residual_rms: 0.0,
    };
    let sse: f64 = t.iter().zip(y).zip(w).map(|((&ti, &yi), &wi)| wi * (yi - fit.eval(ti)).powi(2)).sum();
    let wsum: f64 = w.iter().sum();
    Ok((SinusoidFit { residual_rms: (sse / wsum).sqrt(), ..fit }, sse))
}

/// Fits `y ≈ c + A cos(ωτ − φ)` to samples `(taus, values)` with optional
/// non-negative weights.
pub fn fit_oscillation(taus: &[f64], values: &[f64], weights: Option<&[f64]>, mode: FreqMode) -> Result<SinusoidFit> {
    if taus.len() != values.len() || weights.is_some_and(|w| w.len() != taus.len()) {
        return Err(Error::Precondition("series lengths differ".into()));
    }
    if taus.len() < 8 {
        return Err(Error::InsufficientData(format!("{} points, need at least 8", taus.len())));
    }
    let omega0 = match mode {
        FreqMode::Fixed(w) | FreqMode::Free(w) => w,
    };
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::Domain(format!("angular frequency {omega0} must be > 0")));
    }
    let (lo, hi) = taus.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    if hi - lo < 2.0 * PI / omega0 {
        return Err(Error::InsufficientData(format!("span {:.1} ps is shorter than one period", hi - lo)));
    }
    let ones = vec![1.0; taus.len()];
    let w = weights.unwrap_or(&ones);
    if w.iter().any(|&x| x.is_nan() || x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Precondition("weights must be non-negative and not all zero".into()));
    }
    let wsum: f64 = w.iter().sum();
    let mean = values.iter().zip(w).map(|(y, wi)| y * wi).sum::<f64>() / wsum;
    let var = values.iter().zip(w).map(|(y, wi)| wi * (y - mean).powi(2)).sum::<f64>() / wsum;
    if var.is_nan() || var <= 0.0 {
        return Err(Error::InsufficientData("series has zero variance".into()));
    }

    match mode {
        FreqMode::Fixed(om) => Ok(solve_fixed(taus, values, w, om)?.0),
        FreqMode::Free(seed) => {
            // Coarse scan of ±30 % around the seed, then golden-section
            // refinement inside the best cell.
            let n = 241;
            let (a, b) = (0.7 * seed, 1.3 * seed);
            let step = (b - a) / (n - 1) as f64;
            let sse = |om: f64| solve_fixed(taus, values, w, om).map(|r| r.1).unwrap_or(f64::INFINITY);
            let best = (0..n).map(|i| a + i as f64 * step).min_by(|x, y| sse(*x).total_cmp(&sse(*y))).expect("non-empty scan");
            let (mut l, mut r) = ((best - step).max(a), (best + step).min(b));
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut x1 = r - g * (r - l);
            let mut x2 = l + g * (r - l);
            let (mut f1, mut f2) = (sse(x1), sse(x2));
            for _ in 0..100 {
                if f1 < f2 {
                    r = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = r - g * (r - l);
                    f1 = sse(x1);
                } else {
                    l = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = l + g * (r - l);
                    f2 = sse(x2);
                }
                if r - l < 1e-12 * seed {
                    break;
                }
            }
            Ok(solve_fixed(taus, values, w, 0.5 * (l + r))?.0)
        }
    }
}

/// Counts of one τ₂ slice of a map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub tau2_ps: f64,
    pub n3: f64,
    pub n4: f64,
}

impl SeriesPoint {
    pub fn fraction_d3(&self) -> f64 {
        self.n3 / (self.n3 + self.n4)
    }

    pub fn total(&self) -> f64 {
        self.n3 + self.n4
    }
}

/// Sums a map over a τ₁ window of width `dt1_ps` around `center_t1_ps` and
/// over consecutive τ₂ slices of `group_ps` starting at `t2_from_ps`.
pub fn oscillation_series<M: OutcomeMap + ?Sized>(
    map: &M,
    dt1_ps: i64,
    center_t1_ps: i64,
    t2_from_ps: i64,
    t2_to_ps: i64,
    group_ps: i64,
) -> Result<Vec<SeriesPoint>> {
    let bin = map.bin_ps();
    if group_ps <= 0 || group_ps % bin != 0 || (t2_to_ps - t2_from_ps) % group_ps != 0 {
        return Err(Error::Precondition("τ₂ slices must tile the range in whole bins".into()));
    }
    let n = (t2_to_ps - t2_from_ps) / group_ps;
    (0..n)
        .map(|g| {
            let lo = t2_from_ps + g * group_ps;
            // Window centres are integers, so the group is centred on its
            // half-width; bins inside are those with centres in [lo, lo + group).
            let win = Window::new(dt1_ps, group_ps, center_t1_ps, lo + group_ps / 2);
            let [n3, n4] = window_counts(map, &win)?;
            Ok(SeriesPoint { tau2_ps: lo as f64 + (group_ps - bin) as f64 / 2.0, n3, n4 })
        })
        .collect()
}

/// Fits the D3 fraction of a series, weighting each slice by its counts.
pub fn fit_series(series: &[SeriesPoint], mode: FreqMode) -> Result<SinusoidFit> {
    let pts: Vec<&SeriesPoint> = series.iter().filter(|p| p.total() > 0.0).collect();
    let t: Vec<f64> = pts.iter().map(|p| p.tau2_ps).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.fraction_d3()).collect();
    let w: Vec<f64> = pts.iter().map(|p| p.total()).collect();
    fit_oscillation(&t, &y, Some(&w), mode)
}

/// CSV with columns `basis, amplitude, phase_rad, offset, omega_rad_per_ps, residual_rms`.
pub fn write_fit_csv<W: Write>(writer: W, rows: &[(String, SinusoidFit)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["label", "amplitude", "phase_rad", "offset", "omega_rad_per_ps", "residual_rms"])?;
    for (label, f) in rows {
        w.write_record([
            label.clone(),
            format!("{:.6}", f.amplitude),
            format!("{:.6}", f.phase),
            format!("{:.6}", f.offset),
            format!("{:.8}", f.angular_freq),
            format!("{:.6}", f.residual_rms),
        ])?;
    }
    w.flush()?;
    Ok(())
}
