//! Fidelity of the emitted photon pairs to Bell states as a function of the
//! measured 2X–X delay.
//!
//! Two-photon correlations are computed analytically: a pair recorded at
//! delay τ was emitted with a true delay t drawn from the X decay, smeared
//! by the cross-channel jitter, so every correlation is an average of the
//! pure-state correlation over `a e^{−at} · G(τ − t)`.
//!
//! For the time-evolving target the correlations are rotated back by ωτ.
//! The in-plane part is then divided by the transfer factor `e^{−ω²σ²/2}`
//! of the Gaussian instrument response, which restores the contrast that
//! timing jitter removes from a rotating state.

use std::f64::consts::PI;
use std::io::Write;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::polarization::{entanglement_fidelity_from_correlations, precession_rate};
use crate::source::{DetectorParams, QdSourceParams};

/// Polarization correlations `⟨σᵢ ⊗ σⱼ⟩` of recorded pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCorrelations {
    pub c_hv: f64,
    pub c_da: f64,
    pub c_rl: f64,
    /// ⟨σx ⊗ σy⟩, equal to ⟨σy ⊗ σx⟩ for the cascade state.
    pub c_dr: f64,
}

/// Correlations of pairs recorded at delay `tau` (ps).
pub fn pair_correlations(tau: f64, src: &QdSourceParams, det: &DetectorParams) -> PairCorrelations {
    let w = precession_rate(src.fss_uev);
    let a = 1.0 / src.x_lifetime_ps;
    let lam = src.depolarization;
    let sigma = det.cross_sigma_ps();
    let (cos_m, sin_m) = if sigma <= 0.0 {
        if tau < 0.0 {
            (0.0, 0.0)
        } else {
            ((w * tau).cos(), (w * tau).sin())
        }
    } else {
        let lo = (tau - 6.0 * sigma).max(0.0);
        let hi = tau + 6.0 * sigma;
        if hi <= lo {
            (0.0, 0.0)
        } else {
            let n = 600;
            let h = (hi - lo) / n as f64;
            let (mut s0, mut sc, mut ss) = (0.0, 0.0, 0.0);
            for i in 0..=n {
                let t = lo + i as f64 * h;
                let simpson = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                let wt = simpson * (-a * t).exp() * (-0.5 * ((tau - t) / sigma).powi(2)).exp();
                s0 += wt;
                sc += wt * (w * t).cos();
                ss += wt * (w * t).sin();
            }
            if s0 > 0.0 {
                (sc / s0, ss / s0)
            } else {
                (0.0, 0.0)
            }
        }
    };
    let vis = 1.0 - lam;
    PairCorrelations { c_hv: vis, c_da: vis * cos_m, c_rl: -vis * cos_m, c_dr: vis * sin_m }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementPoint {
    pub tau_ps: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    /// Fidelity to `(HH + e^{iωτ}VV)/√2` after removing the jitter blur.
    pub evolving: f64,
}

/// Bell-state fidelities of the recorded pairs on the delay grid `taus`.
pub fn entanglement_fidelity_curve(taus: &[f64], src: &QdSourceParams, det: &DetectorParams) -> Vec<EntanglementPoint> {
    let w = precession_rate(src.fss_uev);
    let sigma = det.cross_sigma_ps();
    let transfer = (-0.5 * (w * sigma).powi(2)).exp();
    taus.iter()
        .map(|&tau| {
            let c = pair_correlations(tau, src, det);
            let phi_plus = entanglement_fidelity_from_correlations(c.c_hv, c.c_da, c.c_rl).value;
            let phi_minus = entanglement_fidelity_from_correlations(c.c_hv, -c.c_da, -c.c_rl).value;
            let (cw, sw) = ((w * tau).cos(), (w * tau).sin());
            let da = (c.c_da * cw + c.c_dr * sw) / transfer;
            let rl = (c.c_rl * cw - c.c_dr * sw) / transfer;
            let evolving = entanglement_fidelity_from_correlations(c.c_hv, da, rl).value;
            EntanglementPoint { tau_ps: tau, phi_plus, phi_minus, evolving }
        })
        .collect()
}

/// Dominant period (ps) of a uniformly sampled series, from the peak of its
/// zero-padded spectrum refined by parabolic interpolation.
pub fn oscillation_period_fft(samples: &[f64], step_ps: f64) -> Result<f64> {
    if samples.len() < 16 || step_ps.is_nan() || step_ps <= 0.0 {
        return Err(Error::InsufficientData("need at least 16 samples and a positive step".into()));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let n = (samples.len() * 4).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    buf.resize(n, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|z| z.norm()).collect();
    let (k, _) = mag
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InsufficientData("empty spectrum".into()))?;
    if k + 1 >= mag.len() || mag[k] == 0.0 {
        return Err(Error::InsufficientData("no oscillation found".into()));
    }
    let (l, c, r) = (mag[k - 1], mag[k], mag[k + 1]);
    let denom = l - 2.0 * c + r;
    let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
    let freq = (k as f64 + shift) / (n as f64 * step_ps);
    Ok(1.0 / freq)
}

/// Convenience: period of the Φ⁺ fidelity over `[0, span_ps)` sampled every
/// `step_ps`.
pub fn entanglement_period(src: &QdSourceParams, det: &DetectorParams, span_ps: f64, step_ps: f64) -> Result<f64> {
    let n = (span_ps / step_ps) as usize;
    let taus: Vec<f64> = (0..n).map(|i| i as f64 * step_ps).collect();
    let curve = entanglement_fidelity_curve(&taus, src, det);
    let series: Vec<f64> = curve.iter().map(|p| p.phi_plus).collect();
    oscillation_period_fft(&series, step_ps)
}

/// CSV with columns `tau_ps, f_phi_plus, f_phi_minus, f_evolving`.
pub fn write_entanglement_csv<W: Write>(writer: W, points: &[EntanglementPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["tau_ps", "f_phi_plus", "f_phi_minus", "f_evolving"])?;
    for p in points {
        w.write_record([
            format!("{:.1}", p.tau_ps),
            format!("{:.6}", p.phi_plus),
            format!("{:.6}", p.phi_minus),
            format!("{:.6}", p.evolving),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Period expected from the splitting alone, 2πħ/S.
pub fn nominal_period_ps(src: &QdSourceParams) -> f64 {
    2.0 * PI / precession_rate(src.fss_uev)
}
