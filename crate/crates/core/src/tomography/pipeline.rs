//! End-to-end process reconstruction of the relay from simulated maps.
//!
//! Each of the inputs H, V, D and R is sent through the relay twice, once
//! analysed in HV and once in DA. The HV map gives the H population of the
//! output. The DA map is sliced along τ₂ and the D fraction is fitted with a
//! sinusoid at the precession frequency, which fixes the equatorial part of
//! the output Bloch vector at the phase origin.
//!
//! Without fine-structure splitting the output does not rotate, so the DA
//! and RL fractions are read directly from window totals instead.

use crate::coincidence::acquire::{analytic_map, derive_seed, montecarlo_map, ranges_for_window, Acquisition, Backend};
use crate::coincidence::fidelity::{window_counts, Window};
use crate::coincidence::map::OutcomeMap;
use crate::error::{Error, Result};
use crate::polarization::{DensityMatrix1Q, PolarizationState};
use crate::relay::scenario::{BobBasis, RelayScenario};
use crate::tomography::fit::{fit_series, oscillation_series, FreqMode, SeriesPoint, SinusoidFit};
use crate::tomography::process::{average_gate_fidelity, process_fidelity, process_tomography, sigma_x, ProcessMatrix};
use crate::tomography::state::{state_tomography_oscillation, state_tomography_static};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographySettings {
    /// Width of the τ₁ window around zero delay.
    pub dt1_ps: i64,
    pub t2_from_ps: i64,
    pub t2_to_ps: i64,
    /// τ₂ slice width for the sinusoid fit.
    pub group_ps: i64,
    /// Fit the frequency instead of fixing it at S/ħ.
    pub free_frequency: bool,
}

impl Default for TomographySettings {
    fn default() -> Self {
        Self { dt1_ps: 120, t2_from_ps: 0, t2_to_ps: 1008, group_ps: 56, free_frequency: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputReconstruction {
    pub label: &'static str,
    pub p_h: f64,
    /// Absent when the splitting is zero and no fit was made.
    pub fit: Option<SinusoidFit>,
    pub series: Vec<SeriesPoint>,
    pub output: DensityMatrix1Q,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessReconstruction {
    pub inputs: Vec<InputReconstruction>,
    pub chi: ProcessMatrix,
    pub process_fidelity: f64,
    pub average_fidelity: f64,
}

fn flat_fit(series: &[SeriesPoint], omega: f64) -> SinusoidFit {
    let (n3, n): (f64, f64) = series.iter().fold((0.0, 0.0), |(a, b), p| (a + p.n3, b + p.total()));
    SinusoidFit { amplitude: 0.0, phase: 0.0, offset: if n > 0.0 { n3 / n } else { 0.5 }, angular_freq: omega, residual_rms: 0.0 }
}

fn tomography_window(set: &TomographySettings) -> Window {
    let span = set.t2_to_ps - set.t2_from_ps;
    Window::new(set.dt1_ps, span, 0, set.t2_from_ps + span / 2)
}

fn first_fraction<M: OutcomeMap>(map: &M, set: &TomographySettings, label: &str) -> Result<f64> {
    let [a, b] = window_counts(map, &tomography_window(set))?;
    if a + b <= 0.0 {
        return Err(Error::InsufficientData(format!("no coincidences for input {label}")));
    }
    Ok(a / (a + b))
}

/// `maps` holds the HV, DA and (for zero splitting) RL maps of one input.
fn reconstruct_one<M: OutcomeMap>(
    label: &'static str,
    maps: &[M],
    set: &TomographySettings,
    scn: &RelayScenario,
) -> Result<InputReconstruction> {
    let p_h = first_fraction(&maps[0], set, label)?;
    let omega = scn.omega();
    if omega <= 0.0 {
        let p_d = first_fraction(&maps[1], set, label)?;
        let p_r = first_fraction(&maps[2], set, label)?;
        let output = state_tomography_static(p_h, p_d, p_r)?;
        return Ok(InputReconstruction { label, p_h, fit: None, series: Vec::new(), output });
    }
    let series = oscillation_series(&maps[1], set.dt1_ps, 0, set.t2_from_ps, set.t2_to_ps, set.group_ps)?;
    let mode = if set.free_frequency { FreqMode::Free(omega) } else { FreqMode::Fixed(omega) };
    let fit = match fit_series(&series, mode) {
        Ok(f) => f,
        // a perfectly flat D fraction (polar inputs on the analytic backend)
        Err(Error::InsufficientData(msg)) if msg.contains("zero variance") => flat_fit(&series, omega),
        Err(e) => return Err(e),
    };
    let output = state_tomography_oscillation(&fit, p_h, scn.phase_offset_rad)?;
    Ok(InputReconstruction { label, p_h, fit: Some(fit), series, output })
}

/// Runs the relay for the four tomography inputs and reconstructs χ.
/// Only the input state and analysis basis of `base` are overridden.
pub fn reconstruct_process(base: &RelayScenario, set: &TomographySettings, acq: &Acquisition) -> Result<ProcessReconstruction> {
    let span = set.t2_to_ps - set.t2_from_ps;
    if span <= 0 || set.dt1_ps <= 0 {
        return Err(Error::Precondition("empty tomography window".into()));
    }
    let ranges = ranges_for_window(&tomography_window(set), acq.bin_ps);
    let bases: &[BobBasis] =
        if base.omega() > 0.0 { &[BobBasis::HV, BobBasis::DA] } else { &[BobBasis::HV, BobBasis::DA, BobBasis::RL] };
    let inputs = [
        ("H", PolarizationState::h()),
        ("V", PolarizationState::v()),
        ("D", PolarizationState::d()),
        ("R", PolarizationState::r()),
    ];
    let mut recon = Vec::with_capacity(4);
    for (i, (label, state)) in inputs.iter().enumerate() {
        let scn_for = |basis| RelayScenario { input_state: *state, bob_basis: basis, ..*base };
        let r = match acq.backend {
            Backend::Analytic => {
                let maps = bases
                    .iter()
                    .map(|&b| analytic_map(&scn_for(b), acq.bin_ps, ranges, acq.duration_s))
                    .collect::<Result<Vec<_>>>()?;
                reconstruct_one(label, &maps, set, base)?
            }
            Backend::Montecarlo => {
                let maps = bases
                    .iter()
                    .enumerate()
                    .map(|(k, &b)| {
                        let seed = derive_seed(acq.seed, (4 * i + k) as u64);
                        montecarlo_map(&scn_for(b), acq.bin_ps, ranges, seed, acq.duration_s)
                    })
                    .collect::<Result<Vec<_>>>()?;
                reconstruct_one(label, &maps, set, base)?
            }
        };
        recon.push(r);
    }
    let pairs: Vec<(DensityMatrix1Q, DensityMatrix1Q)> =
        inputs.iter().zip(&recon).map(|((_, s), r)| (s.density(), r.output)).collect();
    let chi = process_tomography(&pairs)?;
    let fp = process_fidelity(&chi, &sigma_x());
    Ok(ProcessReconstruction { inputs: recon, chi, process_fidelity: fp, average_fidelity: average_gate_fidelity(fp) })
}
