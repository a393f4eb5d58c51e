//! Physical parameters of the dot, the laser input, the coupler and the
//! detectors, plus the sampling distributions derived from them.
//!
//! The dot is modelled as a renewal process. After each cascade (2X photon,
//! then the X photon after an exponential delay) the dot is re-excited by a
//! two-step process whose step rate is chosen so that the mean cycle length
//! is `1 / pair_rate`. Consecutive cascades therefore never overlap and two
//! 2X photons from the dot are antibunched on the X-lifetime scale.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Matrix4;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarization::{cascade_vector, TwoQubitState, C64};
use crate::relay::tags::{Channel, TimeTag};

/// FWHM of a Gaussian divided by its standard deviation.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

/// Intrinsic visibilities below this value are treated as zero, which bounds
/// the τ₁ range over which laser and 2X photons can interfere.
pub const VISIBILITY_FLOOR: f64 = 1e-3;

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(what.to_string()))
    }
}

fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QdSourceParams {
    /// Fine-structure splitting S in µeV.
    pub fss_uev: f64,
    /// First-order coherence time of the 2X photon in ps.
    pub coh2x_ps: f64,
    pub x_lifetime_ps: f64,
    /// Mean number of cascades emitted per second.
    pub pair_rate_cps: f64,
    /// Weight λ of the white-noise admixture in the pair state.
    pub depolarization: f64,
    pub linewidth_ghz: f64,
}

impl Default for QdSourceParams {
    fn default() -> Self {
        Self {
            fss_uev: 9.05,
            coh2x_ps: 95.0,
            x_lifetime_ps: 1000.0,
            pair_rate_cps: 2.0e7,
            depolarization: 0.0493,
            linewidth_ghz: 3.35,
        }
    }
}

impl QdSourceParams {
    pub fn validate(&self) -> Result<()> {
        check(finite_nonneg(self.fss_uev), "fss_uev must be finite and >= 0")?;
        check(self.coh2x_ps.is_finite() && self.coh2x_ps > 0.0, "coh2x_ps must be > 0")?;
        check(self.x_lifetime_ps.is_finite() && self.x_lifetime_ps > 0.0, "x_lifetime_ps must be > 0")?;
        check(finite_nonneg(self.pair_rate_cps), "pair_rate_cps must be finite and >= 0")?;
        check(
            self.pair_rate_cps * self.x_lifetime_ps * 1e-12 < 1.0,
            "pair_rate_cps * x_lifetime must be below one (cascades cannot overlap)",
        )?;
        check((0.0..=1.0).contains(&self.depolarization), "depolarization must lie in [0, 1]")?;
        check(finite_nonneg(self.linewidth_ghz), "linewidth_ghz must be finite and >= 0")
    }

    /// Rate (1/ps) of each of the two re-excitation steps.
    pub fn reexcitation_step_rate(&self) -> f64 {
        let cycle = 1e12 / self.pair_rate_cps;
        2.0 / (cycle - self.x_lifetime_ps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserParams {
    /// Laser frequency minus 2X centre frequency.
    pub detuning_ghz: f64,
    pub linewidth_khz: f64,
    /// Detected laser rate divided by detected 2X rate.
    pub intensity_ratio: f64,
}

impl Default for LaserParams {
    fn default() -> Self {
        Self { detuning_ghz: 0.0, linewidth_khz: 400.0, intensity_ratio: 0.9 }
    }
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        check(self.detuning_ghz.is_finite(), "detuning_ghz must be finite")?;
        check(finite_nonneg(self.linewidth_khz), "linewidth_khz must be >= 0")?;
        check(finite_nonneg(self.intensity_ratio), "intensity_ratio must be >= 0")
    }

    /// Peak two-photon visibility 2g/(1+g²).
    ///
    /// This is the standard two-source interference visibility for
    /// independent inputs whose detected rates differ by the factor g: the
    /// non-interfering laser–laser and dot–dot coincidences dilute the
    /// laser–dot ones.
    pub fn peak_visibility(&self) -> f64 {
        let g = self.intensity_ratio;
        2.0 * g / (1.0 + g * g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorParams {
    /// Cross-channel timing jitter (FWHM of the difference of two detectors).
    pub jitter_fwhm_ps: f64,
    pub dark_cps: f64,
    pub efficiency: f64,
    pub extinction_ratio_db: f64,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self { jitter_fwhm_ps: 70.0, dark_cps: 100.0, efficiency: 1.0, extinction_ratio_db: 30.0 }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        check(finite_nonneg(self.jitter_fwhm_ps), "jitter_fwhm_ps must be >= 0")?;
        check(finite_nonneg(self.dark_cps), "dark_cps must be >= 0")?;
        check((0.0..=1.0).contains(&self.efficiency), "efficiency must lie in [0, 1]")?;
        check(self.extinction_ratio_db >= 0.0, "extinction_ratio_db must be >= 0 (inf allowed)")
    }

    /// Standard deviation of the time difference between two detectors.
    pub fn cross_sigma_ps(&self) -> f64 {
        self.jitter_fwhm_ps / FWHM_PER_SIGMA
    }

    /// Standard deviation of a single detector's timing error.
    pub fn single_sigma_ps(&self) -> f64 {
        self.cross_sigma_ps() / SQRT_2
    }

    /// Probability that a polarizing element sends a photon to the wrong port.
    pub fn leakage(&self) -> f64 {
        if self.extinction_ratio_db.is_infinite() {
            0.0
        } else {
            10f64.powf(-self.extinction_ratio_db / 10.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplerParams {
    /// Fraction of the dot arm sent to the Bell-state measurement.
    pub split_ratio: f64,
}

impl Default for CouplerParams {
    fn default() -> Self {
        Self { split_ratio: 0.5 }
    }
}

impl CouplerParams {
    pub fn validate(&self) -> Result<()> {
        check(self.split_ratio > 0.0 && self.split_ratio < 1.0, "split_ratio must lie in (0, 1)")
    }
}

/// `(1−λ)|Φ(τ)⟩⟨Φ(τ)| + λ·𝟙/4`.
pub fn mixed_pair_state(tau: f64, src: &QdSourceParams) -> TwoQubitState {
    let v = cascade_vector(tau, src.fss_uev);
    let lam = src.depolarization;
    let m = v * v.adjoint() * C64::new(1.0 - lam, 0.0) + Matrix4::identity() * C64::new(lam / 4.0, 0.0);
    TwoQubitState::from_matrix_unchecked(m)
}

/// Emission times of one cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEmission {
    pub t2x_ps: f64,
    pub tx_ps: f64,
}

/// Lazily generates cascades of the renewal process on `[t_start, t_end)`.
///
/// The process is started well before `t_start` so that the emitted
/// sequence is stationary.
pub struct PairEmitter<'r, R: Rng> {
    rng: &'r mut R,
    x_delay: Exp<f64>,
    reexcite: Option<Exp<f64>>,
    next_2x: f64,
    t_start: f64,
    t_end: f64,
}

impl<'r, R: Rng> PairEmitter<'r, R> {
    pub fn new(rng: &'r mut R, src: &QdSourceParams, t_start: f64, t_end: f64) -> Self {
        let x_delay = Exp::new(1.0 / src.x_lifetime_ps).expect("positive lifetime");
        let reexcite = (src.pair_rate_cps > 0.0)
            .then(|| Exp::new(src.reexcitation_step_rate()).expect("positive step rate"));
        let mut em = Self { rng, x_delay, reexcite, next_2x: f64::INFINITY, t_start, t_end };
        if let Some(step) = em.reexcite {
            // The cycle-length distribution mixes within a few cycles.
            let burn_in = 5.0 * 1e12 / src.pair_rate_cps;
            let mut t = t_start - burn_in;
            while t < t_start {
                let tx = t + em.x_delay.sample(em.rng);
                t = tx + step.sample(em.rng) + step.sample(em.rng);
            }
            em.next_2x = t;
        }
        em
    }
}

impl<R: Rng> Iterator for PairEmitter<'_, R> {
    type Item = PairEmission;

    fn next(&mut self) -> Option<PairEmission> {
        let step = self.reexcite?;
        let t2x = self.next_2x;
        if t2x >= self.t_end {
            return None;
        }
        debug_assert!(t2x >= self.t_start);
        let tx = t2x + self.x_delay.sample(self.rng);
        // Re-excitation takes two independent exponential capture steps.
        self.next_2x = tx + step.sample(self.rng) + step.sample(self.rng);
        Some(PairEmission { t2x_ps: t2x, tx_ps: tx })
    }
}

/// All cascades emitted during `[0, duration_s)`, ascending in 2X time.
pub fn sample_pair_emissions<R: Rng>(rng: &mut R, src: &QdSourceParams, duration_s: f64) -> Vec<PairEmission> {
    PairEmitter::new(rng, src, 0.0, duration_s * 1e12).collect()
}

/// Probability density (1/ps) that the dot emits a 2X photon at time `t`
/// after a previous 2X emission, summed over all later cascades.
///
/// Convolving the X delay `a e^{−at}` with the two-step re-excitation
/// `c² t e^{−ct}` gives the next-cascade density; beyond a few cycles the
/// sum is the flat pair rate, which is never reached on nanosecond scales,
/// so only the first term is kept.
pub fn renewal_density(t: f64, src: &QdSourceParams) -> f64 {
    if t <= 0.0 || src.pair_rate_cps <= 0.0 {
        return 0.0;
    }
    let a = 1.0 / src.x_lifetime_ps;
    let c = src.reexcitation_step_rate();
    let d = c - a;
    if d.abs() < 1e-12 * a {
        return a * c * c * t * t * (-a * t).exp() / 2.0;
    }
    a * c * c * ((-a * t).exp() - (-c * t).exp() * (1.0 + d * t)) / (d * d)
}

/// Signed visibility of laser–2X interference at detection delay `tau1`
/// without timing jitter: `V₀ e^{−|τ₁|/τ_c} cos(2πδτ₁)`.
pub fn intrinsic_visibility(tau1: f64, laser: &LaserParams, src: &QdSourceParams) -> f64 {
    let env = laser.peak_visibility() * (-tau1.abs() / src.coh2x_ps).exp();
    if env < VISIBILITY_FLOOR {
        return 0.0;
    }
    env * (2.0 * PI * laser.detuning_ghz * 1e-3 * tau1).cos()
}

/// |τ₁| beyond which [`intrinsic_visibility`] is identically zero.
pub fn visibility_cutoff_ps(laser: &LaserParams, src: &QdSourceParams) -> f64 {
    let v0 = laser.peak_visibility();
    if v0 <= VISIBILITY_FLOOR {
        0.0
    } else {
        src.coh2x_ps * (v0 / VISIBILITY_FLOOR).ln()
    }
}

/// Effective visibility at measured delay `tau1`: the intrinsic visibility
/// convolved with the Gaussian cross-channel jitter.
pub fn hom_visibility(tau1: f64, laser: &LaserParams, src: &QdSourceParams, det: &DetectorParams) -> f64 {
    let sigma = det.cross_sigma_ps();
    if sigma <= 0.0 {
        return intrinsic_visibility(tau1, laser, src);
    }
    // Composite Simpson over ±6σ.
    let n = 480;
    let h = 12.0 * sigma / n as f64;
    let mut acc = 0.0;
    let mut norm = 0.0;
    for i in 0..=n {
        let u = -6.0 * sigma + i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let g = w * (-0.5 * (u / sigma).powi(2)).exp();
        acc += g * intrinsic_visibility(tau1 - u, laser, src);
        norm += g;
    }
    acc / norm
}

/// Homogeneous Poisson dark counts on all four channels during
/// `[0, duration_s)`, sorted.
pub fn dark_count_stream<R: Rng>(rng: &mut R, det: &DetectorParams, duration_s: f64) -> Vec<TimeTag> {
    let t_end = duration_s * 1e12;
    let mut tags = Vec::new();
    if det.dark_cps > 0.0 {
        let gap = Exp::new(det.dark_cps * 1e-12).expect("positive rate");
        for ch in Channel::ALL {
            let mut t = gap.sample(rng);
            while t < t_end {
                tags.push(TimeTag::new(ch, t.floor() as i64));
                t += gap.sample(rng);
            }
        }
    }
    tags.sort_unstable();
    tags
}

/// Gaussian timing error of one detector, truncated at ±6σ.
#[derive(Debug, Clone, Copy)]
pub struct JitterModel {
    normal: Option<Normal<f64>>,
    limit: f64,
}

impl JitterModel {
    pub fn new(det: &DetectorParams) -> Self {
        let s = det.single_sigma_ps();
        Self { normal: (s > 0.0).then(|| Normal::new(0.0, s).expect("finite sigma")), limit: 6.0 * s }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self.normal {
            None => 0.0,
            Some(n) => loop {
                let x = n.sample(rng);
                if x.abs() <= self.limit {
                    break x;
                }
            },
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.limit
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::{bell_psi_plus_projector, phi_minus, phi_plus, psi_minus, psi_plus};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn src() -> QdSourceParams {
        QdSourceParams::default()
    }

    #[test]
    fn defaults_validate() {
        src().validate().unwrap();
        LaserParams::default().validate().unwrap();
        DetectorParams::default().validate().unwrap();
        CouplerParams::default().validate().unwrap();
        let bad = QdSourceParams { depolarization: 1.5, ..src() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = QdSourceParams { pair_rate_cps: 2e9, ..src() };
        assert!(bad.validate().is_err());
        assert!(CouplerParams { split_ratio: 1.0 }.validate().is_err());
    }

    #[test]
    fn mixed_state_examples() {
        let pure = QdSourceParams { depolarization: 0.0, ..src() };
        assert!((mixed_pair_state(0.0, &pure).fidelity_to_pure(&phi_plus()) - 1.0).abs() < 1e-12);
        let f = mixed_pair_state(0.0, &src()).fidelity_to_pure(&phi_plus());
        assert!((f - 0.963).abs() < 5e-4, "{f}");
        let white = QdSourceParams { depolarization: 1.0, ..src() };
        let rho = mixed_pair_state(123.0, &white);
        for b in [phi_plus(), phi_minus(), psi_plus(), psi_minus()] {
            assert!((rho.fidelity_to_pure(&b) - 0.25).abs() < 1e-12);
        }
        let _ = bell_psi_plus_projector();
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn mixed_state_is_physical(tau in -5000.0..5000.0f64, lam in 0.0..=1.0f64) {
            let s = QdSourceParams { depolarization: lam, ..src() };
            let rho = mixed_pair_state(tau, &s);
            prop_assert!(TwoQubitState::new(*rho.matrix()).is_ok());
            for e in rho.eigenvalues() {
                prop_assert!((-1e-12..=1.0 + 1e-12).contains(&e));
            }
        }
    }

    #[test]
    fn zero_rate_emits_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = QdSourceParams { pair_rate_cps: 0.0, ..src() };
        assert!(sample_pair_emissions(&mut rng, &s, 1.0).is_empty());
    }

    #[test]
    fn emission_count_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = QdSourceParams { pair_rate_cps: 150_000.0, ..src() };
        let em = sample_pair_emissions(&mut rng, &s, 1.0);
        let n = em.len() as f64;
        assert!((n - 150_000.0).abs() < 3.0 * 150_000f64.sqrt(), "{n}");
        assert!(em.windows(2).all(|w| w[0].t2x_ps < w[1].t2x_ps && w[0].tx_ps < w[1].t2x_ps));
        assert!(em.iter().all(|e| e.tx_ps > e.t2x_ps && e.t2x_ps >= 0.0 && e.t2x_ps < 1e12));
    }

    #[test]
    fn mean_x_delay_matches_lifetime() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = QdSourceParams { pair_rate_cps: 1.0e8, ..src() };
        let em = sample_pair_emissions(&mut rng, &s, 0.01);
        assert!(em.len() >= 1_000_000 - 5_000, "{}", em.len());
        let d: Vec<f64> = em.iter().take(1_000_000).map(|e| e.tx_ps - e.t2x_ps).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let sem = s.x_lifetime_ps / n.sqrt();
        assert!((mean - s.x_lifetime_ps).abs() < 3.0 * sem, "{mean}");
    }

    #[test]
    fn x_delays_pass_kolmogorov_smirnov() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = src();
        let mut d: Vec<f64> = PairEmitter::new(&mut rng, &s, 0.0, f64::INFINITY)
            .take(100_000)
            .map(|e| e.tx_ps - e.t2x_ps)
            .collect();
        d.sort_by(f64::total_cmp);
        let n = d.len() as f64;
        let stat = d
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = 1.0 - (-x / s.x_lifetime_ps).exp();
                (cdf - i as f64 / n).abs().max(((i + 1) as f64 / n - cdf).abs())
            })
            .fold(0.0, f64::max);
        // Asymptotic critical value at α = 0.01.
        assert!(stat < 1.628 / n.sqrt(), "D = {stat}");
    }

    #[test]
    fn renewal_density_matches_simulated_spacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = QdSourceParams { pair_rate_cps: 2e8, ..src() };
        let em = sample_pair_emissions(&mut rng, &s, 0.02);
        // fraction of next-cascade gaps shorter than 3 ns
        let short = em.windows(2).filter(|w| w[1].t2x_ps - w[0].t2x_ps < 3000.0).count() as f64;
        let frac = short / (em.len() - 1) as f64;
        let mut integral = 0.0;
        let h = 1.0;
        let mut t = 0.5;
        while t < 3000.0 {
            integral += renewal_density(t, &s) * h;
            t += h;
        }
        let sig = (integral / (em.len() as f64)).sqrt();
        assert!((frac - integral).abs() < 4.0 * sig + 1e-4, "{frac} vs {integral}");
        // integrates to one over all times
        let mut total = 0.0;
        let mut t = 0.5;
        while t < 200_000.0 {
            total += renewal_density(t, &s);
            t += 1.0;
        }
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn visibility_examples() {
        let ideal = LaserParams { intensity_ratio: 1.0, ..Default::default() };
        let no_jitter = DetectorParams { jitter_fwhm_ps: 0.0, ..Default::default() };
        assert!((hom_visibility(0.0, &ideal, &src(), &no_jitter) - 1.0).abs() < 1e-12);
        let far = LaserParams { detuning_ghz: 25.0, ..Default::default() };
        assert!(hom_visibility(0.0, &far, &src(), &DetectorParams::default()).abs() < 0.02);
        let v0 = LaserParams::default().peak_visibility();
        assert!((v0 - 1.8 / 1.81).abs() < 1e-12);
        let cut = visibility_cutoff_ps(&LaserParams::default(), &src());
        assert_eq!(intrinsic_visibility(cut + 1.0, &LaserParams::default(), &src()), 0.0);
        assert!(intrinsic_visibility(cut - 1.0, &LaserParams::default(), &src()) > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn visibility_even_bounded_finite(tau in -2000.0..2000.0f64, delta in 0.0..50.0f64) {
            let det = DetectorParams::default();
            let res = LaserParams::default();
            let v = hom_visibility(tau, &res, &src(), &det);
            let w = hom_visibility(-tau, &res, &src(), &det);
            prop_assert!((v - w).abs() < 1e-12);
            let v0 = res.peak_visibility();
            let tuned = LaserParams { detuning_ghz: delta, ..res };
            let x = hom_visibility(tau, &tuned, &src(), &det);
            prop_assert!(x.is_finite() && x.abs() <= v0 + 1e-12);
            prop_assert!((0.0..=v0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn dark_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let none = DetectorParams { dark_cps: 0.0, ..Default::default() };
        assert!(dark_count_stream(&mut rng, &none, 1.0).is_empty());
        let det = DetectorParams { dark_cps: 1000.0, ..Default::default() };
        let tags = dark_count_stream(&mut rng, &det, 1.0);
        for ch in Channel::ALL {
            let n = tags.iter().filter(|t| t.channel == ch).count() as f64;
            assert!((n - 1000.0).abs() < 3.0 * 1000f64.sqrt(), "{n}");
        }
        assert!(crate::relay::tags::is_sorted(&tags));
    }

    #[test]
    fn jitter_width_and_clamp() {
        let det = DetectorParams::default();
        let j = JitterModel::new(&det);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..200_000).map(|_| j.sample(&mut rng) - j.sample(&mut rng)).collect();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((var.sqrt() - det.cross_sigma_ps()).abs() < 0.2, "{}", var.sqrt());
        assert!(xs.iter().all(|x| x.abs() <= 2.0 * j.max_abs()));
    }
}
