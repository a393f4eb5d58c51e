//! Expected three-fold detection rates over the (τ₁, τ₂) plane.
//!
//! τ₁ = t_D2 − t_D1 and τ₂ = t_Bob − t_D1. A herald is any D1∧D2 pair, so
//! the density is a sum over the physical origin of the two Bell-measurement
//! clicks:
//!
//! * dot–laser: one 2X photon and one laser photon in opposite ports. The X
//!   photon of the same cascade is correlated with the herald and carries
//!   the teleported state with weight |V(τ₁)|, or the which-path state
//!   otherwise. This is the `signal` part.
//! * laser–laser, dark-count heralds: Bob clicks are uncorrelated.
//! * dot–dot: two consecutive cascades; both of their X photons are
//!   correlated with the herald but carry no information about the input.
//!
//! The point density is evaluated on a fine grid, convolved with the three
//! independent detector jitters (one each along τ₁, τ₂ and the diagonal,
//! the last one being the shared D1 error) and integrated into output bins.
//! Fine cells are laid out so that a bin `[t, t + step)` of integer tag
//! differences corresponds to the continuous interval `[t − ½, t + step − ½)`.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::relay::scenario::RelayScenario;
use crate::source::{intrinsic_visibility, renewal_density};

/// Rectangular grid of `n1 × n2` square bins of `step_ps`, the first bin
/// starting at `(t1_min_ps, t2_min_ps)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensityGrid {
    pub t1_min_ps: i64,
    pub t2_min_ps: i64,
    pub n1: usize,
    pub n2: usize,
    pub step_ps: i64,
}

impl DensityGrid {
    pub const MAX_STEP_PS: i64 = 8;

    pub fn validate(&self) -> Result<()> {
        if !(1..=Self::MAX_STEP_PS).contains(&self.step_ps) {
            return domain(format!("grid step {} ps outside 1..=8", self.step_ps));
        }
        if self.n1 == 0 || self.n2 == 0 {
            return domain("empty grid");
        }
        Ok(())
    }

    /// Centre of bin `i1` along τ₁ in the continuous picture.
    pub fn center1(&self, i1: usize) -> f64 {
        self.t1_min_ps as f64 + (i1 as i64 * self.step_ps) as f64 + 0.5 * self.step_ps as f64 - 0.5
    }

    pub fn center2(&self, i2: usize) -> f64 {
        self.t2_min_ps as f64 + (i2 as i64 * self.step_ps) as f64 + 0.5 * self.step_ps as f64 - 0.5
    }
}

/// Rate densities in counts·s⁻¹·ps⁻², averaged over each bin, stored
/// row-major as `[i1 * n2 + i2]`. Index 0 is D3, index 1 is D4.
#[derive(Debug, Clone, PartialEq)]
pub struct RateDensity3F {
    pub grid: DensityGrid,
    pub total: [Vec<f64>; 2],
    /// Everything except dot–laser heralds with their own X photon.
    pub background: [Vec<f64>; 2],
}

impl RateDensity3F {
    pub fn at(&self, outcome: usize, i1: usize, i2: usize) -> f64 {
        self.total[outcome][i1 * self.grid.n2 + i2]
    }

    /// Expected number of three-fold coincidences per bin for an acquisition
    /// of `duration_s`.
    pub fn expected_counts(&self, duration_s: f64) -> [Vec<f64>; 2] {
        let area = (self.grid.step_ps * self.grid.step_ps) as f64 * duration_s;
        self.total.clone().map(|v| v.into_iter().map(|x| x * area).collect())
    }
}

/// Integral over one cell of width `dt` centred at `c` of the X emission
/// delay density `a e^{−ax}` (x ≥ 0), divided by `dt`.
fn exp_cell(c: f64, a: f64, dt: f64) -> f64 {
    let f = |x: f64| if x > 0.0 { 1.0 - (-a * x).exp() } else { 0.0 };
    (f(c + 0.5 * dt) - f(c - 0.5 * dt)) / dt
}

/// Average of `a e^{−a(x₂−x₁)}` over a `dt × dt` cell whose centre has
/// `x₂ − x₁ = c`: a triangular smear of width `2dt`.
fn exp_tri(c: f64, a: f64, dt: f64) -> f64 {
    if c >= dt {
        let y = a * dt;
        return a * (-a * c).exp() * (2.0 * y.cosh() - 2.0) / (y * y);
    }
    let g = |x: f64| if x > 0.0 { x - (1.0 - (-a * x).exp()) / a } else { 0.0 };
    (g(c + dt) - 2.0 * g(c) + g(c - dt)) / (dt * dt)
}

/// Density (1/ps) of X photons from neighbouring cascades at delay `t`
/// relative to a 2X emission: the previous X precedes the 2X by the
/// re-excitation time, the next X follows one full cycle plus an X delay.
fn neighbour_x_density(t: f64, a: f64, c: f64) -> f64 {
    if t < 0.0 {
        let u = -t;
        c * c * u * (-c * u).exp()
    } else if t > 0.0 {
        let d = c - a;
        if d.abs() < 1e-12 {
            return 0.0;
        }
        let inner = t - (2.0 * (1.0 - (-d * t).exp()) - d * t * (-d * t).exp()) / d;
        (a * c * c / (d * d)) * a * (-a * t).exp() * inner
    } else {
        0.0
    }
}

struct FineLayout {
    dt: f64,
    sub: usize,
    pad: usize,
    n1: usize,
    n2: usize,
    t1_lo: f64,
    t2_lo: f64,
}

impl FineLayout {
    fn new(grid: &DensityGrid, sigma: f64) -> Self {
        let dt = [4, 2, 1].into_iter().find(|d| grid.step_ps % d == 0).unwrap_or(1) as f64;
        let sub = (grid.step_ps as f64 / dt) as usize;
        let hw = (6.0 * sigma / dt).ceil() as usize;
        let pad = 2 * hw;
        Self {
            dt,
            sub,
            pad,
            n1: grid.n1 * sub + 2 * pad,
            n2: grid.n2 * sub + 2 * pad,
            t1_lo: grid.t1_min_ps as f64 - 0.5 - pad as f64 * dt,
            t2_lo: grid.t2_min_ps as f64 - 0.5 - pad as f64 * dt,
        }
    }

    fn c1(&self, j: usize) -> f64 {
        self.t1_lo + (j as f64 + 0.5) * self.dt
    }

    fn c2(&self, j: usize) -> f64 {
        self.t2_lo + (j as f64 + 0.5) * self.dt
    }
}

fn gaussian_kernel(sigma: f64, dt: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let hw = (6.0 * sigma / dt).ceil() as i64;
    let mut k: Vec<f64> = (-hw..=hw).map(|j| (-0.5 * (j as f64 * dt / sigma).powi(2)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|x| *x /= s);
    k
}

/// Convolves a row-major `n1 × n2` field with `kernel` along the direction
/// `(d1, d2)` ∈ {(1,0), (0,1), (1,1)}. Values outside the field are taken
/// as zero.
fn convolve(field: &[f64], n1: usize, n2: usize, kernel: &[f64], d1: i64, d2: i64) -> Vec<f64> {
    if kernel.len() == 1 {
        return field.to_vec();
    }
    let hw = (kernel.len() / 2) as i64;
    let mut out = vec![0.0; field.len()];
    out.par_chunks_mut(n2).enumerate().for_each(|(i, row)| {
        for (kj, &w) in kernel.iter().enumerate() {
            let off = kj as i64 - hw;
            let si = i as i64 + off * d1;
            if si < 0 || si >= n1 as i64 {
                continue;
            }
            let src = &field[si as usize * n2..(si as usize + 1) * n2];
            let shift = off * d2;
            let (lo, hi) = (0i64.max(-shift), (n2 as i64).min(n2 as i64 - shift));
            for j in lo..hi {
                row[j as usize] += w * src[(j + shift) as usize];
            }
        }
    });
    out
}

fn jitter(field: &[f64], lay: &FineLayout, kernel: &[f64]) -> Vec<f64> {
    let a = convolve(field, lay.n1, lay.n2, kernel, 1, 0);
    let b = convolve(&a, lay.n1, lay.n2, kernel, 0, 1);
    convolve(&b, lay.n1, lay.n2, kernel, 1, 1)
}

fn bin(field: &[f64], lay: &FineLayout, grid: &DensityGrid) -> Vec<f64> {
    let mut out = vec![0.0; grid.n1 * grid.n2];
    let norm = 1.0 / (lay.sub * lay.sub) as f64;
    for i1 in 0..grid.n1 {
        for s1 in 0..lay.sub {
            let row = &field[(lay.pad + i1 * lay.sub + s1) * lay.n2..][..lay.n2];
            let dst = &mut out[i1 * grid.n2..(i1 + 1) * grid.n2];
            for (i2, d) in dst.iter_mut().enumerate() {
                let start = lay.pad + i2 * lay.sub;
                *d += row[start..start + lay.sub].iter().sum::<f64>() * norm;
            }
        }
    }
    out
}

/// Herald rate components (counts·s⁻¹·ps⁻¹ of τ₁, before jitter).
struct HeraldTerms {
    /// 2X at D1, laser at D2 (and the mirror case).
    dl_a: f64,
    dl_b: f64,
    /// Laser–laser plus any herald involving a dark count.
    flat: f64,
    /// Prefactor of the dot–dot renewal density.
    dd: f64,
}

fn herald_terms(scn: &RelayScenario) -> HeraldTerms {
    let r = scn.rates();
    let multi = if scn.accidentals { 1.0 } else { 0.0 };
    HeraldTerms {
        dl_a: 0.5 * r.r2x * r.laser * r.laser_p_d2 * 1e-12,
        dl_b: 0.5 * r.r2x * r.laser * r.laser_p_d1 * 1e-12,
        flat: (multi * r.laser * r.laser * r.laser_p_d1 * r.laser_p_d2 + r.dark * (r.r2x + r.laser + r.dark)) * 1e-12,
        dd: multi * 0.25 * r.eta_2x * r.eta_2x * r.pair_rate,
    }
}

/// Expected three-fold rate densities for both of Bob's outcomes.
pub fn analytic_threefold_density(scn: &RelayScenario, grid: &DensityGrid) -> Result<RateDensity3F> {
    grid.validate()?;
    scn.validate()?;
    let sigma = scn.det.single_sigma_ps();
    let lay = FineLayout::new(grid, sigma);
    let r = scn.rates();
    let h = herald_terms(scn);
    let a = 1.0 / scn.src.x_lifetime_ps;
    let c = if r.pair_rate > 0.0 { scn.src.reexcitation_step_rate() } else { 0.0 };
    let dt = lay.dt;
    let bob_flat = r.bob_single() * 1e-12;
    let dark = r.dark * 1e-12;
    let p3_a = r.with_leak(scn.incoherent_d3_probability(true));
    let p3_b = r.with_leak(scn.incoherent_d3_probability(false));
    let dd_pref = h.dd * r.eta_x;

    let n = lay.n1 * lay.n2;
    let mut sig3 = vec![0.0; n];
    let mut sig4 = vec![0.0; n];
    let mut bg3 = vec![0.0; n];
    let mut bg4 = vec![0.0; n];

    let rows = sig3
        .par_chunks_mut(lay.n2)
        .zip(sig4.par_chunks_mut(lay.n2))
        .zip(bg3.par_chunks_mut(lay.n2).zip(bg4.par_chunks_mut(lay.n2)));
    rows.enumerate().for_each(|(j1, ((s3, s4), (b3, b4)))| {
        let t1 = lay.c1(j1);
        let vis = intrinsic_visibility(t1, &scn.laser, &scn.src);
        let coh = vis.abs();
        let sign = if vis < 0.0 { -1.0 } else { 1.0 };
        let f_dd = if r.pair_rate > 0.0 { renewal_density(t1.abs(), &scn.src) } else { 0.0 };
        let flat_bg = h.flat * bob_flat + (h.dl_a + h.dl_b + h.dd * f_dd) * dark;
        for j2 in 0..lay.n2 {
            let t2 = lay.c2(j2);
            let w_a = h.dl_a * r.eta_x * exp_cell(t2, a, dt);
            let w_b = h.dl_b * r.eta_x * exp_tri(t2 - t1, a, dt);
            let w = w_a + w_b;
            let p3_coh = r.with_leak(scn.coherent_d3_probability(t2, sign));
            let d3 = w * coh * p3_coh + (1.0 - coh) * (w_a * p3_a + w_b * p3_b);
            s3[j2] = d3;
            s4[j2] = w - d3;

            let mut uncorrelated = 0.0;
            if c > 0.0 && scn.accidentals {
                uncorrelated = 0.5
                    * r.eta_x
                    * (h.dl_a * neighbour_x_density(t2, a, c) + h.dl_b * neighbour_x_density(t2 - t1, a, c));
            }
            // Dot–dot heralds: X of the earlier cascade before the later 2X,
            // X of the later cascade after it.
            let (mut dd_h, mut dd_v) = (0.0, 0.0);
            if c > 0.0 {
                let span = t1.abs();
                let (x1, x2_c) = if t1 >= 0.0 { (t2, t2 - t1) } else { (t2 - t1, t2) };
                let early = if (0.0..=span).contains(&x1) {
                    let u = span - x1;
                    dd_pref * a * (-a * x1).exp() * c * c * u * (-c * u).exp()
                } else {
                    0.0
                };
                let late_smear = if t1 >= 0.0 { exp_tri(x2_c, a, dt) } else { exp_cell(x2_c, a, dt) };
                let late = dd_pref * f_dd * late_smear;
                if t1 >= 0.0 {
                    dd_h += early;
                    dd_v += late;
                } else {
                    dd_v += early;
                    dd_h += late;
                }
            }
            let common = flat_bg + uncorrelated;
            b3[j2] = common + dd_h * p3_a + dd_v * p3_b;
            b4[j2] = common + dd_h * (1.0 - p3_a) + dd_v * (1.0 - p3_b);
        }
    });

    let kernel = gaussian_kernel(sigma, dt);
    let bg3 = jitter(&bg3, &lay, &kernel);
    let bg4 = jitter(&bg4, &lay, &kernel);
    let sig3 = jitter(&sig3, &lay, &kernel);
    let sig4 = jitter(&sig4, &lay, &kernel);
    let background = [bin(&bg3, &lay, grid), bin(&bg4, &lay, grid)];
    let signal = [bin(&sig3, &lay, grid), bin(&sig4, &lay, grid)];
    let total = [0, 1].map(|k| signal[k].iter().zip(&background[k]).map(|(s, b)| s + b).collect());
    Ok(RateDensity3F { grid: *grid, total, background })
}

/// Expected D1∧D2 coincidence rate (counts/s) for measured τ₁ in
/// `[t1_lo_ps, t1_hi_ps)` (integer-ps differences).
pub fn herald_rate(scn: &RelayScenario, t1_lo_ps: i64, t1_hi_ps: i64) -> Result<f64> {
    scn.validate()?;
    if t1_hi_ps <= t1_lo_ps {
        return domain("empty herald window");
    }
    let h = herald_terms(scn);
    let width = (t1_hi_ps - t1_lo_ps) as f64;
    let flat = (h.flat + h.dl_a + h.dl_b) * width;
    if h.dd == 0.0 {
        return Ok(flat);
    }
    // Dot–dot part: renewal density smeared by the cross-channel jitter.
    let sigma = scn.det.cross_sigma_ps();
    let kernel = gaussian_kernel(sigma, 1.0);
    let hw = (kernel.len() / 2) as i64;
    let mut dd = 0.0;
    for t in t1_lo_ps..t1_hi_ps {
        for (k, w) in kernel.iter().enumerate() {
            let s = (t - (k as i64 - hw)) as f64;
            dd += w * renewal_density(s.abs(), &scn.src);
        }
    }
    Ok(flat + h.dd * dd)
}
