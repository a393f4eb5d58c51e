//! The named experiments of the bench runner.
//!
//! Each scenario writes CSV tables (units in the column names), an SVG plot
//! drawn from those tables, and a plain-text summary into the output
//! directory. Nothing time- or machine-dependent is written, so repeated
//! runs with one seed give byte-identical files.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::bench::config::{backend_name, BenchConfig};
use crate::bench::plot::{heatmap_from_csv, line_plot_from_csv, Axes};
use crate::coincidence::acquire::{
    analytic_map, derive_seed, detuning_sweep, montecarlo_map, ranges_for_window, write_detuning_csv, Acquisition, Backend,
};
use crate::coincidence::entanglement::{entanglement_fidelity_curve, oscillation_period_fft, write_entanglement_csv};
use crate::coincidence::fidelity::{
    highest_significance, teleportation_fidelity, window_sweep, write_sweep_csv, FidelityEstimate, SweepSpec, Window,
};
use crate::coincidence::map::OutcomeMap;
use crate::error::{Error, Result};
use crate::polarization::PolarizationState;
use crate::relay::scenario::{BobBasis, CardinalState, RelayScenario};
use crate::security::{threshold_report, ThresholdReport};
use crate::tomography::fit::{fit_series, oscillation_series, write_fit_csv, FreqMode, SinusoidFit};
use crate::tomography::pipeline::{reconstruct_process, ProcessReconstruction, TomographySettings};
use crate::tomography::process::{fidelity_landscape, write_chi_csv, write_landscape_csv, ProcessMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Entanglement,
    Bb84Sweep,
    Detuning,
    Oscillation,
    Tomography,
    Landscape,
    FullReport,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::Entanglement,
        Scenario::Bb84Sweep,
        Scenario::Detuning,
        Scenario::Oscillation,
        Scenario::Tomography,
        Scenario::Landscape,
        Scenario::FullReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Entanglement => "entanglement",
            Scenario::Bb84Sweep => "bb84-sweep",
            Scenario::Detuning => "detuning",
            Scenario::Oscillation => "oscillation",
            Scenario::Tomography => "tomography",
            Scenario::Landscape => "landscape",
            Scenario::FullReport => "full-report",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario '{s}'")))
    }
}

/// Headline numbers of a run, also written as `<scenario>_summary.txt`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub lines: Vec<String>,
    /// Every fidelity reported, labelled.
    pub fidelities: Vec<(String, f64)>,
    /// Threshold comparisons, labelled by what was compared.
    pub thresholds: Vec<(String, ThresholdReport)>,
    pub period_ps: Option<f64>,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn fidelity(&mut self, label: impl Into<String>, f: f64) -> Result<()> {
        let label = label.into();
        if !(0.0..=1.0 + 1e-9).contains(&f) {
            return Err(Error::Invariant(format!("{label}: fidelity {f} outside [0, 1]")));
        }
        self.fidelities.push((label, f));
        Ok(())
    }

    fn threshold(&mut self, label: impl Into<String>, f: f64) -> Result<()> {
        let label = label.into();
        let r = threshold_report(f.clamp(0.0, 1.0))?;
        let mark = |b: bool| if b { "yes" } else { "no" };
        self.line(format!(
            "thresholds [{label}] F = {:.4}: > 2/3 {}, > 0.724 {}, > 0.75 {}, > 0.80 {}; secure bits per coincidence {:.4}",
            r.fidelity,
            mark(r.passes_universal_2_3),
            mark(r.passes_6state_724),
            mark(r.passes_4state_75),
            mark(r.passes_ec_80),
            r.secure_bits_per_coincidence
        ));
        self.thresholds.push((label, r));
        Ok(())
    }

    fn absorb(&mut self, other: RunSummary) {
        self.lines.extend(other.lines);
        self.fidelities.extend(other.fidelities);
        self.thresholds.extend(other.thresholds);
        self.period_ps = self.period_ps.or(other.period_ps);
        self.files.extend(other.files);
    }

    pub fn text(&self, title: &str) -> String {
        let mut s = format!("# {title}\n\n");
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }
}

struct Ctx<'a> {
    cfg: BenchConfig,
    out: &'a Path,
}

impl Ctx<'_> {
    fn scenario(&self, state: PolarizationState, basis: BobBasis) -> RelayScenario {
        RelayScenario {
            input_state: state,
            src: self.cfg.source,
            laser: self.cfg.laser,
            det: self.cfg.detector,
            coupler: self.cfg.coupler,
            bob_basis: basis,
            phase_offset_rad: self.cfg.phase_offset_rad,
            accidentals: !self.cfg.noise_free,
        }
    }

    fn acquisition(&self, backend: Backend, tag: u64) -> Acquisition {
        Acquisition { backend, bin_ps: self.cfg.bin_ps, duration_s: self.cfg.duration_s, seed: derive_seed(self.cfg.seed, tag) }
    }

    fn path(&self, name: &str, sum: &mut RunSummary) -> PathBuf {
        let p = self.out.join(name);
        sum.files.push(p.clone());
        p
    }

    fn create(&self, name: &str, sum: &mut RunSummary) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name, sum))?))
    }
}

/// Runs `scenario` with `cfg`, writing into `cfg.output_dir`.
pub fn run_scenario(scenario: Scenario, cfg: &BenchConfig) -> Result<RunSummary> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let ctx = Ctx { cfg: cfg.effective(), out: &cfg.output_dir };
    let mut sum = match scenario {
        Scenario::Entanglement => entanglement(&ctx)?,
        Scenario::Bb84Sweep => bb84_sweep(&ctx)?,
        Scenario::Detuning => detuning(&ctx)?,
        Scenario::Oscillation => oscillation(&ctx)?,
        Scenario::Tomography => tomography(&ctx, false)?,
        Scenario::Landscape => tomography(&ctx, true)?,
        Scenario::FullReport => {
            let mut all = RunSummary::default();
            for part in [entanglement(&ctx)?, bb84_sweep(&ctx)?, detuning(&ctx)?, oscillation(&ctx)?, tomography(&ctx, true)?] {
                all.absorb(part);
            }
            all
        }
    };
    let name = format!("{}_summary.txt", scenario.name());
    let path = ctx.path(&name, &mut sum);
    let mut head = vec![
        format!("seed {}", cfg.seed),
        format!("backend {:?}", cfg.backend).to_lowercase(),
        format!("duration_s {}", cfg.duration_s),
        format!("noise_free {}", cfg.noise_free),
    ];
    head.append(&mut sum.lines);
    sum.lines = head;
    std::fs::write(path, sum.text(scenario.name()))?;
    Ok(sum)
}

fn entanglement(ctx: &Ctx) -> Result<RunSummary> {
    let mut sum = RunSummary::default();
    let w = &ctx.cfg.windows;
    let n = (w.entanglement_span / w.entanglement_step) as usize;
    let taus: Vec<f64> = (0..n).map(|i| (i as i64 * w.entanglement_step) as f64).collect();
    let curve = entanglement_fidelity_curve(&taus, &ctx.cfg.source, &ctx.cfg.detector);
    let csv = ctx.path("entanglement.csv", &mut sum);
    write_entanglement_csv(BufWriter::new(File::create(&csv)?), &curve)?;

    // the period is taken from the table as written
    let mut rd = csv::Reader::from_path(&csv)?;
    let mut series = Vec::with_capacity(n);
    for rec in rd.records() {
        let rec = rec?;
        series.push(rec[1].parse::<f64>().map_err(|e| Error::Format(e.to_string()))?);
    }
    let period = oscillation_period_fft(&series, w.entanglement_step as f64).ok().filter(|p| p.is_finite());
    sum.period_ps = period;
    match period {
        Some(p) => sum.line(format!("entanglement: oscillation period {p:.2} ps (FFT of the Φ⁺ fidelity)")),
        None => sum.line("entanglement: no oscillation (zero splitting)"),
    }
    let late = |p: &&crate::coincidence::entanglement::EntanglementPoint| p.tau_ps >= 100.0;
    let peak_ev = curve.iter().filter(late).map(|p| p.evolving).fold(f64::NEG_INFINITY, f64::max);
    let peak_pm = curve.iter().map(|p| p.phi_minus).fold(f64::NEG_INFINITY, f64::max);
    let peak_pp = curve.iter().map(|p| p.phi_plus).fold(f64::NEG_INFINITY, f64::max);
    sum.line(format!(
        "entanglement: peak fidelity to the evolving state {peak_ev:.4} (τ ≥ 100 ps), peak Φ⁺ {peak_pp:.4}, peak Φ⁻ {peak_pm:.4}"
    ));
    let zoom: Vec<_> = curve.iter().take_while(|p| p.tau_ps < 3000.0).copied().collect();
    let zoom_csv = ctx.path("entanglement_first_3ns.csv", &mut sum);
    write_entanglement_csv(BufWriter::new(File::create(&zoom_csv)?), &zoom)?;
    let axes = Axes { title: "Pair fidelity against 2X–X delay", x_label: "τ (ps)", y_label: "fidelity" };
    line_plot_from_csv(
        &zoom_csv,
        &ctx.path("entanglement.svg", &mut sum),
        "tau_ps",
        &["f_phi_plus", "f_phi_minus", "f_evolving"],
        None,
        &axes,
    )?;
    Ok(sum)
}

fn bb84_sweep(ctx: &Ctx) -> Result<RunSummary> {
    let mut sum = RunSummary::default();
    let w = &ctx.cfg.windows;
    let max1 = w.bb84.iter().map(|x| x[0]).chain([w.sweep_max[0]]).max().unwrap_or(8);
    let max2 = w.bb84.iter().map(|x| x[1]).chain([w.sweep_max[1]]).max().unwrap_or(8);
    let ranges = ranges_for_window(&Window::new(max1, max2, 0, 0), ctx.cfg.bin_ps);
    let mut table = ctx.create("bb84_fidelity.csv", &mut sum).map(csv::Writer::from_writer)?;
    table.write_record(["backend", "dt1_ps", "dt2_ps", "input", "f", "sigma", "n_correct", "n_wrong"])?;
    for backend in ctx.cfg.backend.backends() {
        let bname = backend_name(backend);
        let scns = CardinalState::BB84.map(RelayScenario::cardinal).map(|s| ctx.scenario(s.input_state, s.bob_basis));
        let rows = match backend {
            Backend::Analytic => {
                let maps = scns
                    .iter()
                    .map(|s| analytic_map(s, ctx.cfg.bin_ps, ranges, ctx.cfg.duration_s))
                    .collect::<Result<Vec<_>>>()?;
                bb84_tables(ctx, &scns, &maps, bname, &mut table, &mut sum)?
            }
            Backend::Montecarlo => {
                let maps = scns
                    .iter()
                    .enumerate()
                    .map(|(k, s)| montecarlo_map(s, ctx.cfg.bin_ps, ranges, ctx.acquisition(backend, 100 + k as u64).seed, ctx.cfg.duration_s))
                    .collect::<Result<Vec<_>>>()?;
                bb84_tables(ctx, &scns, &maps, bname, &mut table, &mut sum)?
            }
        };
        let sweep_csv = ctx.path(&format!("bb84_window_sweep_{bname}.csv"), &mut sum);
        write_sweep_csv(BufWriter::new(File::create(&sweep_csv)?), &rows)?;
        if let Some(best) = highest_significance(&rows) {
            sum.line(format!(
                "bb84 [{bname}]: most significant window {}×{} ps, mean F {:.4} ± {:.4} ({:.1} σ above 0.75)",
                best.window.dt1_ps,
                best.window.dt2_ps,
                best.mean,
                best.sigma_mean,
                best.significance()
            ));
        } else {
            sum.line(format!("bb84 [{bname}]: no window with all four fidelities above 0.75"));
        }
        let axes = Axes { title: "Mean BB84 fidelity over window sizes", x_label: "Δτ₁ (ps)", y_label: "Δτ₂ (ps)" };
        heatmap_from_csv(&sweep_csv, &ctx.path(&format!("bb84_window_sweep_{bname}.svg"), &mut sum), "dt1_ps", "dt2_ps", "mean_f", &axes)?;
    }
    table.flush()?;
    Ok(sum)
}

fn bb84_tables<M: OutcomeMap>(
    ctx: &Ctx,
    scns: &[RelayScenario; 4],
    maps: &[M],
    bname: &str,
    table: &mut csv::Writer<BufWriter<File>>,
    sum: &mut RunSummary,
) -> Result<Vec<crate::coincidence::fidelity::SweepRow>> {
    for (wi, win) in ctx.cfg.windows.bb84.iter().enumerate() {
        let window = Window::new(win[0], win[1], 0, 0);
        let mut est: Vec<FidelityEstimate> = Vec::new();
        for ((scn, map), state) in scns.iter().zip(maps).zip(CardinalState::BB84) {
            let e = teleportation_fidelity(map, &window, scn.expected_channel())?;
            table.write_record([
                bname.to_string(),
                win[0].to_string(),
                win[1].to_string(),
                state.label().to_string(),
                format!("{:.6}", e.value),
                format!("{:.6}", e.sigma),
                format!("{:.3}", e.n_correct),
                format!("{:.3}", e.n_wrong),
            ])?;
            sum.fidelity(format!("bb84 {bname} {}x{} {}", win[0], win[1], state.label()), e.value)?;
            est.push(e);
        }
        let mean = est.iter().map(|e| e.value).sum::<f64>() / 4.0;
        let sigma = 0.5 * est.iter().map(|e| e.sigma * e.sigma).sum::<f64>().sqrt();
        let each: Vec<String> =
            CardinalState::BB84.iter().zip(&est).map(|(s, e)| format!("{} {:.4}", s.label(), e.value)).collect();
        sum.line(format!(
            "bb84 [{bname}] window {}×{} ps: {}; mean {mean:.4} ± {sigma:.4}",
            win[0],
            win[1],
            each.join(", ")
        ));
        sum.fidelity(format!("bb84 {bname} {}x{} mean", win[0], win[1]), mean)?;
        if wi == 0 {
            sum.threshold(format!("bb84 mean, {bname}, {}×{} ps", win[0], win[1]), mean)?;
        }
    }
    let w = &ctx.cfg.windows;
    let spec = SweepSpec { max_dt1_ps: w.sweep_max[0], max_dt2_ps: w.sweep_max[1], center_t1_ps: 0, center_t2_ps: 0 };
    let ch = scns.map(|s| s.expected_channel());
    window_sweep([(&maps[0], ch[0]), (&maps[1], ch[1]), (&maps[2], ch[2]), (&maps[3], ch[3])], &spec)
}

fn detuning(ctx: &Ctx) -> Result<RunSummary> {
    let mut sum = RunSummary::default();
    let base = ctx.scenario(PolarizationState::d(), BobBasis::DA);
    let w = ctx.cfg.windows.detuning;
    let win = Window::new(w[0], w[1], 0, 0);
    for backend in ctx.cfg.backend.backends() {
        let bname = backend_name(backend);
        let pts = detuning_sweep(&base, &ctx.cfg.detuning_ghz, &win, &ctx.acquisition(backend, 200))?;
        let csv = ctx.path(&format!("detuning_{bname}.csv"), &mut sum);
        write_detuning_csv(BufWriter::new(File::create(&csv)?), &pts)?;
        let each: Vec<String> = pts.iter().map(|p| format!("{:.1} GHz {:.4}", p.delta_ghz, p.estimate.value)).collect();
        sum.line(format!("detuning [{bname}] input D, window {}×{} ps: {}", w[0], w[1], each.join(", ")));
        for p in &pts {
            sum.fidelity(format!("detuning {bname} {:.2} GHz", p.delta_ghz), p.estimate.value)?;
        }
        let axes = Axes { title: "Fidelity of |D⟩ against laser detuning", x_label: "δ (GHz)", y_label: "fidelity" };
        if pts.len() > 1 {
            line_plot_from_csv(&csv, &ctx.path(&format!("detuning_{bname}.svg"), &mut sum), "delta_ghz", &["f"], None, &axes)?;
        }
    }
    Ok(sum)
}

fn wrap(x: f64) -> f64 {
    use std::f64::consts::PI;
    (x + PI).rem_euclid(2.0 * PI) - PI
}

fn oscillation(ctx: &Ctx) -> Result<RunSummary> {
    let mut sum = RunSummary::default();
    let w = &ctx.cfg.windows;
    let probe = ctx.scenario(PolarizationState::d(), BobBasis::DA);
    if probe.omega() <= 0.0 {
        sum.line("oscillation: skipped (zero splitting, nothing to fit)");
        return Ok(sum);
    }
    let span = w.oscillation_t2[1] - w.oscillation_t2[0];
    let ranges =
        ranges_for_window(&Window::new(w.oscillation_dt1, span, 0, w.oscillation_t2[0] + span / 2), ctx.cfg.bin_ps);
    let inputs = [CardinalState::D, CardinalState::A, CardinalState::R, CardinalState::L];
    for backend in ctx.cfg.backend.backends() {
        let bname = backend_name(backend);
        let mut fits: Vec<(String, SinusoidFit)> = Vec::new();
        let mut series_w = ctx.create(&format!("oscillation_series_{bname}.csv"), &mut sum).map(csv::Writer::from_writer)?;
        series_w.write_record(["input", "tau2_ps", "n_d3", "n_d4", "fraction_d3"])?;
        for (k, c) in inputs.iter().enumerate() {
            let scn = ctx.scenario(c.state(), BobBasis::DA);
            let series = match backend {
                Backend::Analytic => {
                    let m = analytic_map(&scn, ctx.cfg.bin_ps, ranges, ctx.cfg.duration_s)?;
                    oscillation_series(&m, w.oscillation_dt1, 0, w.oscillation_t2[0], w.oscillation_t2[1], w.oscillation_group)?
                }
                Backend::Montecarlo => {
                    let seed = ctx.acquisition(backend, 300 + k as u64).seed;
                    let m = montecarlo_map(&scn, ctx.cfg.bin_ps, ranges, seed, ctx.cfg.duration_s)?;
                    oscillation_series(&m, w.oscillation_dt1, 0, w.oscillation_t2[0], w.oscillation_t2[1], w.oscillation_group)?
                }
            };
            for p in &series {
                let frac = if p.total() > 0.0 { p.fraction_d3() } else { f64::NAN };
                series_w.write_record([
                    c.label().to_string(),
                    format!("{:.1}", p.tau2_ps),
                    format!("{:.3}", p.n3),
                    format!("{:.3}", p.n4),
                    format!("{frac:.6}"),
                ])?;
            }
            fits.push((c.label().to_string(), fit_series(&series, FreqMode::Fixed(scn.omega()))?));
        }
        series_w.flush()?;
        write_fit_csv(ctx.create(&format!("oscillation_fits_{bname}.csv"), &mut sum)?, &fits)?;
        let ph = |l: &str| fits.iter().find(|f| f.0 == l).map(|f| f.1.phase).unwrap_or(f64::NAN);
        let each: Vec<String> =
            fits.iter().map(|(l, f)| format!("{l}: A {:.3}, φ {:.3} rad", f.amplitude, f.phase)).collect();
        sum.line(format!("oscillation [{bname}] {}", each.join("; ")));
        sum.line(format!(
            "oscillation [{bname}] phase(R) − phase(D) = {:.3} rad (π/2 = {:.3})",
            wrap(ph("R") - ph("D")),
            std::f64::consts::FRAC_PI_2
        ));
        let axes = Axes { title: "Fraction of D outcomes against τ₂", x_label: "τ₂ (ps)", y_label: "P(D)" };
        line_plot_from_csv(
            &ctx.out.join(format!("oscillation_series_{bname}.csv")),
            &ctx.path(&format!("oscillation_{bname}.svg"), &mut sum),
            "tau2_ps",
            &["fraction_d3"],
            Some("input"),
            &axes,
        )?;
    }
    Ok(sum)
}

fn tomography(ctx: &Ctx, with_landscape: bool) -> Result<RunSummary> {
    let mut sum = RunSummary::default();
    let w = &ctx.cfg.windows;
    let set = TomographySettings {
        dt1_ps: w.oscillation_dt1,
        t2_from_ps: w.oscillation_t2[0],
        t2_to_ps: w.oscillation_t2[1],
        group_ps: w.oscillation_group,
        free_frequency: false,
    };
    let base = ctx.scenario(PolarizationState::h(), BobBasis::HV);
    for backend in ctx.cfg.backend.backends() {
        let bname = backend_name(backend);
        let r = reconstruct_process(&base, &set, &ctx.acquisition(backend, 400))?;
        ProcessMatrix::new(*r.chi.chi()).map_err(|e| Error::Invariant(format!("reconstructed χ: {e}")))?;
        write_tomography(ctx, &r, bname, &mut sum)?;
        let chi_xx = r.chi.chi()[(1, 1)].re;
        sum.line(format!(
            "tomography [{bname}]: χ_xx {chi_xx:.4}, process fidelity {:.4}, average gate fidelity {:.4}",
            r.process_fidelity, r.average_fidelity
        ));
        sum.fidelity(format!("tomography {bname} process"), r.process_fidelity)?;
        sum.fidelity(format!("tomography {bname} average"), r.average_fidelity)?;
        sum.threshold(format!("average gate fidelity, {bname}"), r.average_fidelity)?;
        if with_landscape {
            let [nt, np] = ctx.cfg.landscape_grid;
            let land = fidelity_landscape(&r.chi, nt, np)?;
            let csv = ctx.path(&format!("landscape_{bname}.csv"), &mut sum);
            write_landscape_csv(BufWriter::new(File::create(&csv)?), &land)?;
            let polar: Vec<f64> = land
                .points
                .iter()
                .filter(|p| p.0 == 0.0 || p.0 == std::f64::consts::PI)
                .map(|p| p.2)
                .collect();
            let polar_min = polar.iter().copied().fold(f64::INFINITY, f64::min);
            sum.line(format!(
                "landscape [{bname}]: min {:.4}, max {:.4}, polar states {:.4}",
                land.min, land.max, polar_min
            ));
            sum.fidelity(format!("landscape {bname} min"), land.min)?;
            sum.fidelity(format!("landscape {bname} max"), land.max)?;
            sum.threshold(format!("landscape minimum, {bname}"), land.min)?;
            let axes = Axes { title: "Teleportation fidelity over the Poincaré sphere", x_label: "φ (rad)", y_label: "θ (rad)" };
            heatmap_from_csv(&csv, &ctx.path(&format!("landscape_{bname}.svg"), &mut sum), "phi_rad", "theta_rad", "f", &axes)?;
        }
    }
    Ok(sum)
}

fn write_tomography(ctx: &Ctx, r: &ProcessReconstruction, bname: &str, sum: &mut RunSummary) -> Result<()> {
    write_chi_csv(ctx.create(&format!("chi_{bname}.csv"), sum)?, &r.chi)?;
    let mut st = ctx.create(&format!("tomography_states_{bname}.csv"), sum).map(csv::Writer::from_writer)?;
    st.write_record(["input", "p_h", "s_x", "s_y", "s_z", "purity"])?;
    for i in &r.inputs {
        let s = i.output.bloch();
        st.write_record([
            i.label.to_string(),
            format!("{:.6}", i.p_h),
            format!("{:.6}", s[0]),
            format!("{:.6}", s[1]),
            format!("{:.6}", s[2]),
            format!("{:.6}", i.output.purity()),
        ])?;
    }
    st.flush()?;
    let fits: Vec<(String, SinusoidFit)> = r.inputs.iter().filter_map(|i| i.fit.map(|f| (i.label.to_string(), f))).collect();
    if !fits.is_empty() {
        write_fit_csv(ctx.create(&format!("tomography_fits_{bname}.csv"), sum)?, &fits)?;
    }
    Ok(())
}

/// Process exit code for an error: 2 for configuration problems, 3 for
/// invariant violations, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Invariant(_) | Error::NonPhysical(_) => 3,
        _ => 1,
    }
}
