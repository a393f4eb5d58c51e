//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use qrelay_core::coincidence::acquire::{analytic_map, detuning_sweep, montecarlo_map, Acquisition, Backend};
use qrelay_core::coincidence::entanglement::{entanglement_fidelity_curve, entanglement_period};
use qrelay_core::coincidence::{build_threefold_map, teleportation_fidelity, MapBuilder, MapRanges, Window};
use qrelay_core::polarization::{DensityMatrix1Q, Mat2, PolarizationState, C64};
use qrelay_core::relay::{herald_rate, simulate_time_tags, BobBasis, CardinalState, RelayScenario};
use qrelay_core::security::secure_bits;
use qrelay_core::source::{DetectorParams, QdSourceParams};
use qrelay_core::tomography::fit::{fit_series, oscillation_series, FreqMode};
use qrelay_core::tomography::{
    average_gate_fidelity, fidelity_landscape, physicality_projection, process_tomography, reconstruct_process,
    state_tomography_static, ProcessMatrix, TomographySettings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn wrap(x: f64) -> f64 {
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let p = entanglement_period(&QdSourceParams::default(), &DetectorParams::default(), 65_536.0, 8.0);
    let secs = start.elapsed().as_secs_f64();
    match p {
        Ok(p) => outcome((p - 457.0).abs() <= 2.0 && secs < 10.0, format!("FFT period {p:.2} ps (457 ± 2), {secs:.2} s (< 10 s)")),
        Err(e) => outcome(false, format!("period estimate failed: {e}")),
    }
}

fn criterion_2() -> Outcome {
    let taus: Vec<f64> = (0..1000).map(|i| i as f64).collect();
    let curve = entanglement_fidelity_curve(&taus, &QdSourceParams::default(), &DetectorParams::default());
    let ev = curve.iter().filter(|p| p.tau_ps >= 100.0).map(|p| p.evolving).fold(0.0, f64::max);
    let pm = curve.iter().map(|p| p.phi_minus).fold(0.0, f64::max);
    outcome(
        (ev - 0.963).abs() <= 0.005 && (pm - 0.92).abs() <= 0.01,
        format!("evolving-target peak {ev:.4} (0.963 ± 0.005), Φ⁻ peak {pm:.4} (0.92 ± 0.01)"),
    )
}

fn criterion_3() -> Outcome {
    let f = average_gate_fidelity(0.754);
    outcome((f - 0.836).abs() <= 0.0005, format!("average_gate_fidelity(0.754) = {f:.5} (0.836 ± 0.0005)"))
}

fn criterion_4() -> Outcome {
    let r = secure_bits(0.945).unwrap_or(f64::NAN);
    outcome((r - 0.385).abs() <= 0.001, format!("secure_bits(0.945) = {r:.5} (0.385 ± 0.001)"))
}

fn criterion_5() -> Outcome {
    let base = RelayScenario::cardinal(CardinalState::D);
    let win = Window::new(16, 16, 0, 0);
    let deltas: Vec<f64> = (0..=12).map(|i| i as f64 * 0.5).collect();
    let acq = Acquisition { backend: Backend::Analytic, bin_ps: 8, duration_s: 100.0, seed: 0 };
    let pts = match detuning_sweep(&base, &deltas, &win, &acq) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("analytic sweep failed: {e}")),
    };
    let f = |d: f64| pts.iter().find(|p| p.delta_ghz == d).map(|p| p.estimate.value).unwrap_or(f64::NAN);
    let monotone = pts.windows(2).all(|w| w[1].estimate.value < w[0].estimate.value);

    // Monte Carlo cost at 10⁴ heralds per point (heralds counted in the τ₁ window)
    let rate = herald_rate(&base, -8, 8).unwrap_or(f64::NAN);
    let duration = 1e4 / rate;
    let start = Instant::now();
    let mc_acq = Acquisition { backend: Backend::Montecarlo, bin_ps: 8, duration_s: duration, seed: 5 };
    let mc = detuning_sweep(&base, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &win, &mc_acq);
    let secs = start.elapsed().as_secs_f64();
    let mc_text = match &mc {
        Ok(p) => p.iter().map(|x| format!("{:.0}:{:.2}", x.delta_ghz, x.estimate.value)).collect::<Vec<_>>().join(" "),
        Err(e) => format!("failed ({e})"),
    };
    outcome(
        f(3.0) >= 0.78 && f(6.0) >= 2.0 / 3.0 && monotone && mc.is_ok() && secs < 300.0,
        format!(
            "analytic F(0) {:.4}, F(3 GHz) {:.4} (≥ 0.78), F(6 GHz) {:.4} (≥ 2/3), monotone {monotone}; \
             MC at 10⁴ heralds/point [{mc_text}] in {secs:.1} s (< 300 s)",
            f(0.0),
            f(3.0),
            f(6.0)
        ),
    )
}

fn criterion_6() -> Outcome {
    let win = Window::new(88, 120, 0, 0);
    let ranges = MapRanges::centered(8, 48, -64, 64);
    let mut fids = Vec::new();
    for (k, c) in CardinalState::BB84.iter().enumerate() {
        let scn = RelayScenario::cardinal(*c);
        let f = montecarlo_map(&scn, 8, ranges, 1000 + k as u64, 3.0)
            .and_then(|m| teleportation_fidelity(&m, &win, scn.expected_channel()));
        match f {
            Ok(e) => fids.push(e),
            Err(e) => return outcome(false, format!("MC for {} failed: {e}", c.label())),
        }
    }
    let mean = fids.iter().map(|e| e.value).sum::<f64>() / 4.0;
    let sigma = 0.5 * fids.iter().map(|e| e.sigma * e.sigma).sum::<f64>().sqrt();
    let polar_min = fids[0].value.min(fids[1].value);
    let eq_max = fids[2].value.max(fids[3].value);
    let each: Vec<String> =
        CardinalState::BB84.iter().zip(&fids).map(|(c, e)| format!("{} {:.3}±{:.3}", c.label(), e.value, e.sigma)).collect();
    outcome(
        (0.84..=0.92).contains(&mean) && polar_min > eq_max,
        format!("MC 88×120 ps: {}; mean {mean:.4} ± {sigma:.4} in [0.84, 0.92], polar > equatorial {}", each.join(", "), polar_min > eq_max),
    )
}

fn criterion_7() -> Outcome {
    let ranges = MapRanges::centered(8, 60, 0, 1008);
    let mut phases = Vec::new();
    for c in [CardinalState::D, CardinalState::R] {
        let scn = RelayScenario::new(c.state(), BobBasis::DA);
        let fit = analytic_map(&scn, 8, ranges, 100.0)
            .and_then(|m| oscillation_series(&m, 120, 0, 0, 1008, 56))
            .and_then(|s| fit_series(&s, FreqMode::Fixed(scn.omega())));
        match fit {
            Ok(f) => phases.push(f.phase),
            Err(e) => return outcome(false, format!("fit for {} failed: {e}", c.label())),
        }
    }
    let d = wrap(phases[1] - phases[0]);
    outcome((d - FRAC_PI_2).abs() <= 0.1, format!("φ(R) − φ(D) = {d:.4} rad (π/2 ± 0.1)"))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    // analytic against Monte Carlo, per-bin χ²
    let ranges = MapRanges::centered(8, 200, -300, 1300);
    let scn = RelayScenario::cardinal(CardinalState::D);
    let mc = montecarlo_map(&scn, 8, ranges, 77, 2.0);
    let an = analytic_map(&scn, 8, ranges, 2.0);
    match (mc, an) {
        (Ok(mc), Ok(an)) => {
            let (chi2, cells) = common::chi2_per_cell(&mc, &an, 4, 10.0);
            ok &= chi2 < 1.5;
            notes.push(format!("χ²/cell {chi2:.3} over {cells} cells"));
        }
        _ => {
            ok = false;
            notes.push("χ² maps failed".into());
        }
    }

    // merge-join against the triple loop on short streams
    let mut oracle_ok = true;
    for seed in 0..20 {
        let tags = simulate_time_tags(seed, &scn, 1e-4).unwrap_or_default();
        let tags = &tags[..tags.len().min(1000)];
        let r = MapRanges { t1_min_ps: -400, t1_max_ps: 400, t2_min_ps: -300, t2_max_ps: 1300 };
        let fast = build_threefold_map(tags, 8, r);
        let mut streamed = MapBuilder::new(8, r).expect("ranges");
        let half = tags.len() / 2;
        let pushed = streamed.push(&tags[..half]).and_then(|_| streamed.push(&tags[half..]));
        let slow = common::brute_force_map(tags, 8, r);
        oracle_ok &= pushed.is_ok() && fast.as_ref().ok() == Some(&slow) && streamed.finish() == slow;
    }
    ok &= oracle_ok;
    notes.push(format!("map = brute force on 20 streams {oracle_ok}"));

    // process tomography round trips
    let inputs = [PolarizationState::h(), PolarizationState::v(), PolarizationState::d(), PolarizationState::r()];
    let mut worst_clean: f64 = 0.0;
    let mut worst_noisy: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for seed in 0..50 {
        let chi = common::random_channel(seed);
        let clean: Vec<_> = inputs.iter().map(|s| (s.density(), chi.apply(&s.density()))).collect();
        if let Ok(back) = process_tomography(&clean) {
            worst_clean = worst_clean.max(common::trace_norm(&(back.chi() - chi.chi())));
        } else {
            worst_clean = f64::INFINITY;
        }
        let noisy: Vec<(DensityMatrix1Q, DensityMatrix1Q)> = inputs
            .iter()
            .map(|s| {
                let out = chi.apply(&s.density());
                let mut est = |b: PolarizationState| {
                    Binomial::new(100_000, out.probability(&b)).unwrap().sample(&mut rng) as f64 / 1e5
                };
                let (ph, pd, pr) = (est(PolarizationState::h()), est(PolarizationState::d()), est(PolarizationState::r()));
                (s.density(), state_tomography_static(ph, pd, pr).unwrap())
            })
            .collect();
        match process_tomography(&noisy) {
            Ok(back) => worst_noisy = worst_noisy.max(common::trace_norm(&(back.chi() - chi.chi()))),
            Err(_) => worst_noisy = f64::INFINITY,
        }
    }
    ok &= worst_clean < 1e-10 && worst_noisy < 0.05;
    notes.push(format!("χ round trip trace-norm error {worst_clean:.1e} clean, {worst_noisy:.4} at 10⁵ samples"));

    // landscape of a pure bit flip
    let flip = ProcessMatrix::from_kraus(&[Mat2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0))]);
    let land_ok = flip
        .and_then(|p| fidelity_landscape(&p, 37, 72))
        .map(|l| (l.min - 1.0).abs() < 1e-12 && (l.max - 1.0).abs() < 1e-12)
        .unwrap_or(false);
    ok &= land_ok;
    notes.push(format!("σx landscape ≡ 1 {land_ok}"));

    // physicality projection on random Hermitian matrices
    let mut proj_ok = true;
    for _ in 0..10_000 {
        let mut u = || rng.gen_range(-2.0..2.0);
        let (a, d, re, im) = (u(), u(), u(), u());
        let raw = Mat2::new(C64::new(a, 0.0), C64::new(re, -im), C64::new(re, im), C64::new(d, 0.0));
        let p = physicality_projection(&raw);
        let again = physicality_projection(p.matrix());
        proj_ok &= DensityMatrix1Q::new(*p.matrix()).is_ok() && (again.matrix() - p.matrix()).norm() < 1e-10;
    }
    ok &= proj_ok;
    notes.push(format!("projection PSD and idempotent on 10⁴ inputs {proj_ok}"));

    // identical seeds give identical streams
    let a = simulate_time_tags(42, &scn, 0.003).unwrap_or_default();
    let b = simulate_time_tags(42, &scn, 0.003).unwrap_or_default();
    let c = simulate_time_tags(43, &scn, 0.003).unwrap_or_default();
    let det_ok = !a.is_empty() && a == b && a != c;
    ok &= det_ok;
    notes.push(format!("determinism {det_ok}"));

    outcome(ok, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let base = RelayScenario::new(PolarizationState::h(), BobBasis::HV);
    let acq = Acquisition { backend: Backend::Analytic, bin_ps: 8, duration_s: 100.0, seed: 0 };
    let r = match reconstruct_process(&base, &TomographySettings::default(), &acq) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("reconstruction failed: {e}")),
    };
    let land = match fidelity_landscape(&r.chi, 37, 72) {
        Ok(l) => l,
        Err(e) => return outcome(false, format!("landscape failed: {e}")),
    };
    let polar = land
        .points
        .iter()
        .filter(|p| p.0 == 0.0 || p.0 == PI)
        .map(|p| p.2)
        .fold(f64::INFINITY, f64::min);
    outcome(
        land.min > 2.0 / 3.0 && polar > 0.90,
        format!(
            "χ_xx {:.4}, landscape min {:.4} (> 2/3), polar {:.4} (> 0.90)",
            r.chi.chi()[(1, 1)].re,
            land.min,
            polar
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("phase period", criterion_1),
        ("entanglement peaks", criterion_2),
        ("gate-fidelity arithmetic", criterion_3),
        ("secure-bit rate", criterion_4),
        ("detuning curve", criterion_5),
        ("BB84 suite", criterion_6),
        ("phase coherence", criterion_7),
        ("property suites", criterion_8),
        ("landscape thresholds", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("criterion {} [{name}]: {verdict} ({:.1} s) {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
