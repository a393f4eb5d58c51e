//! Post-selection windows and windowed teleportation fidelities.

use std::io::Write;

use crate::coincidence::map::OutcomeMap;
use crate::error::{Error, Result};
use crate::relay::tags::Channel;

/// Rectangular post-selection window `Δτ₁ × Δτ₂` around a centre. A bin
/// belongs to the window when its centre lies in `[c − Δ/2, c + Δ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub dt1_ps: i64,
    pub dt2_ps: i64,
    pub center_t1_ps: i64,
    pub center_t2_ps: i64,
}

impl Window {
    pub fn new(dt1_ps: i64, dt2_ps: i64, center_t1_ps: i64, center_t2_ps: i64) -> Self {
        Self { dt1_ps, dt2_ps, center_t1_ps, center_t2_ps }
    }

    pub fn sqrt_area_ps(&self) -> f64 {
        ((self.dt1_ps * self.dt2_ps) as f64).sqrt()
    }

    /// Inclusive-exclusive bin index ranges `(i1_lo, i1_hi, i2_lo, i2_hi)`.
    pub fn bin_ranges<M: OutcomeMap + ?Sized>(&self, map: &M) -> Result<(usize, usize, usize, usize)> {
        let bin = map.bin_ps();
        if self.dt1_ps <= 0 || self.dt2_ps <= 0 || self.dt1_ps % bin != 0 || self.dt2_ps % bin != 0 {
            return Err(Error::Precondition(format!(
                "window {}×{} ps is not a positive multiple of the {bin} ps bin",
                self.dt1_ps, self.dt2_ps
            )));
        }
        // centre of bin i is t_min + i·bin + bin/2; solve for the first bin
        // whose centre reaches the lower window edge
        let first = |t_min: i64, lo_edge_x2: i64| -> i64 {
            let num = lo_edge_x2 - 2 * t_min - 2 * (bin / 2);
            num.div_euclid(2 * bin) + i64::from(num.rem_euclid(2 * bin) != 0)
        };
        let i1 = first(map.t1_min_ps(), 2 * self.center_t1_ps - self.dt1_ps);
        let i2 = first(map.t2_min_ps(), 2 * self.center_t2_ps - self.dt2_ps);
        let (n1, n2) = (self.dt1_ps / bin, self.dt2_ps / bin);
        if i1 < 0 || i2 < 0 || i1 + n1 > map.n1() as i64 || i2 + n2 > map.n2() as i64 {
            return Err(Error::Precondition("window extends beyond the map".into()));
        }
        Ok((i1 as usize, (i1 + n1) as usize, i2 as usize, (i2 + n2) as usize))
    }
}

/// Windowed counts summed directly from a map.
pub fn window_counts<M: OutcomeMap + ?Sized>(map: &M, win: &Window) -> Result<[f64; 2]> {
    let (a1, b1, a2, b2) = win.bin_ranges(map)?;
    let mut out = [0.0; 2];
    for (k, o) in out.iter_mut().enumerate() {
        for i1 in a1..b1 {
            for i2 in a2..b2 {
                *o += map.value(k, i1, i2);
            }
        }
    }
    Ok(out)
}

/// 2-D prefix sums giving O(1) window totals.
pub struct PrefixSums {
    n2: usize,
    sums: [Vec<f64>; 2],
}

impl PrefixSums {
    pub fn new<M: OutcomeMap + ?Sized>(map: &M) -> Self {
        let (n1, n2) = (map.n1(), map.n2());
        let w = n2 + 1;
        let sums = [0, 1].map(|k| {
            let mut s = vec![0.0; (n1 + 1) * w];
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    s[(i1 + 1) * w + i2 + 1] =
                        map.value(k, i1, i2) + s[i1 * w + i2 + 1] + s[(i1 + 1) * w + i2] - s[i1 * w + i2];
                }
            }
            s
        });
        Self { n2, sums }
    }

    pub fn rect(&self, outcome: usize, a1: usize, b1: usize, a2: usize, b2: usize) -> f64 {
        let w = self.n2 + 1;
        let s = &self.sums[outcome];
        s[b1 * w + b2] - s[a1 * w + b2] - s[b1 * w + a2] + s[a1 * w + a2]
    }
}

/// Fraction of three-fold events in the expected output channel with its
/// binomial standard error. Counts are fractional for analytic maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub value: f64,
    pub sigma: f64,
    pub n_correct: f64,
    pub n_wrong: f64,
}

impl FidelityEstimate {
    pub fn from_counts(n_correct: f64, n_wrong: f64) -> Result<Self> {
        let n = n_correct + n_wrong;
        if n.is_nan() || n <= 0.0 {
            return Err(Error::InsufficientData("no coincidences in window".into()));
        }
        let f = n_correct / n;
        Ok(Self { value: f, sigma: (f * (1.0 - f) / n).sqrt(), n_correct, n_wrong })
    }

    pub fn total(&self) -> f64 {
        self.n_correct + self.n_wrong
    }
}

fn outcome_index(ch: Channel) -> Result<usize> {
    match ch {
        Channel::D3 => Ok(0),
        Channel::D4 => Ok(1),
        other => Err(Error::Precondition(format!("{} is not one of Bob's detectors", other.name()))),
    }
}

/// Fidelity to the expected output inside `win`.
pub fn teleportation_fidelity<M: OutcomeMap + ?Sized>(
    map: &M,
    win: &Window,
    expected: Channel,
) -> Result<FidelityEstimate> {
    let k = outcome_index(expected)?;
    let c = window_counts(map, win)?;
    FidelityEstimate::from_counts(c[k], c[1 - k])
}

/// One window of a sweep over the four BB84 inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub window: Window,
    pub individual: [FidelityEstimate; 4],
    pub mean: f64,
    /// Standard error of the mean, ½√Σσᵢ².
    pub sigma_mean: f64,
    pub min_individual: f64,
    /// All four individual fidelities exceed 75 %.
    pub all_above_75: bool,
}

impl SweepRow {
    pub fn significance(&self) -> f64 {
        if self.sigma_mean > 0.0 {
            (self.mean - 0.75) / self.sigma_mean
        } else {
            f64::INFINITY * (self.mean - 0.75).signum()
        }
    }
}

/// Sweep settings: window sizes are every multiple of the bin width up to
/// the stated maxima, at a common centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSpec {
    pub max_dt1_ps: i64,
    pub max_dt2_ps: i64,
    pub center_t1_ps: i64,
    pub center_t2_ps: i64,
}

/// Evaluates every window of `spec` on the four maps (inputs H, V, D, A with
/// their expected channels). Windows where any map is empty are skipped.
pub fn window_sweep<M: OutcomeMap>(maps: [(&M, Channel); 4], spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let bin = maps[0].0.bin_ps();
    if maps.iter().any(|(m, _)| m.bin_ps() != bin || m.n1() != maps[0].0.n1() || m.n2() != maps[0].0.n2()) {
        return Err(Error::Precondition("sweep maps must share one grid".into()));
    }
    let prefix: Vec<PrefixSums> = maps.iter().map(|(m, _)| PrefixSums::new(*m)).collect();
    let idx: Vec<usize> = maps.iter().map(|(_, c)| outcome_index(*c)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for dt1 in (1..=spec.max_dt1_ps / bin).map(|k| k * bin) {
        for dt2 in (1..=spec.max_dt2_ps / bin).map(|k| k * bin) {
            let win = Window::new(dt1, dt2, spec.center_t1_ps, spec.center_t2_ps);
            let (a1, b1, a2, b2) = win.bin_ranges(maps[0].0)?;
            let mut est = Vec::with_capacity(4);
            for (p, &k) in prefix.iter().zip(&idx) {
                let good = p.rect(k, a1, b1, a2, b2);
                let bad = p.rect(1 - k, a1, b1, a2, b2);
                match FidelityEstimate::from_counts(good, bad) {
                    Ok(e) => est.push(e),
                    Err(_) => break,
                }
            }
            if est.len() < 4 {
                continue;
            }
            let individual: [FidelityEstimate; 4] = est.try_into().expect("four estimates");
            let mean = individual.iter().map(|e| e.value).sum::<f64>() / 4.0;
            let sigma_mean = 0.5 * individual.iter().map(|e| e.sigma * e.sigma).sum::<f64>().sqrt();
            let min_individual = individual.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
            rows.push(SweepRow {
                window: win,
                individual,
                mean,
                sigma_mean,
                min_individual,
                all_above_75: individual.iter().all(|e| e.value > 0.75),
            });
        }
    }
    Ok(rows)
}

/// Flagged window with the largest margin above 75 % in units of its
/// standard error.
pub fn highest_significance(rows: &[SweepRow]) -> Option<&SweepRow> {
    rows.iter()
        .filter(|r| r.all_above_75)
        .max_by(|a, b| a.significance().total_cmp(&b.significance()))
}

/// CSV with columns `sqrt_area_ps, dt1_ps, dt2_ps, mean_f, sigma, min_f, flag`.
pub fn write_sweep_csv<W: Write>(writer: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sqrt_area_ps", "dt1_ps", "dt2_ps", "mean_f", "sigma", "min_f", "flag"])?;
    for r in rows {
        w.write_record([
            format!("{:.3}", r.window.sqrt_area_ps()),
            r.window.dt1_ps.to_string(),
            r.window.dt2_ps.to_string(),
            format!("{:.6}", r.mean),
            format!("{:.6}", r.sigma_mean),
            format!("{:.6}", r.min_individual),
            u8::from(r.all_above_75).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coincidence::map::{CoincidenceMap, MapRanges};

    fn filled(d3: u64, d4: u64) -> CoincidenceMap {
        let mut m = CoincidenceMap::empty(8, MapRanges::centered(8, 200, -300, 1300)).unwrap();
        m.counts[0].iter_mut().for_each(|x| *x = d3);
        m.counts[1].iter_mut().for_each(|x| *x = d4);
        m
    }

    #[test]
    fn window_bins_are_centred() {
        let m = filled(1, 0);
        let w = Window::new(88, 120, 0, 0);
        let (a1, b1, a2, b2) = w.bin_ranges(&m).unwrap();
        assert_eq!(b1 - a1, 11);
        assert_eq!(b2 - a2, 15);
        assert_eq!(m.center1(a1), -40);
        assert_eq!(m.center1(b1 - 1), 40);
        assert_eq!(m.center2(a2), -56);
        let single = Window::new(8, 8, 0, 0).bin_ranges(&m).unwrap();
        assert_eq!(m.center1(single.0), 0);
        assert_eq!(m.center2(single.2), 0);
        assert!(Window::new(12, 8, 0, 0).bin_ranges(&m).is_err());
        assert!(Window::new(800, 8, 0, 0).bin_ranges(&m).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let w = Window::new(88, 120, 0, 0);
        let all = teleportation_fidelity(&filled(3, 0), &w, Channel::D3).unwrap();
        assert_eq!(all.value, 1.0);
        assert_eq!(all.sigma, 0.0);
        let even = teleportation_fidelity(&filled(2, 2), &w, Channel::D4).unwrap();
        assert_eq!(even.value, 0.5);
        let n = even.total();
        assert!((even.sigma - 1.0 / (2.0 * n.sqrt())).abs() < 1e-15);
        assert!(matches!(teleportation_fidelity(&filled(0, 0), &w, Channel::D3), Err(Error::InsufficientData(_))));
        assert!(teleportation_fidelity(&filled(1, 1), &w, Channel::D1).is_err());
    }

    #[test]
    fn prefix_sums_match_direct_sums() {
        let mut m = filled(0, 0);
        for (i, x) in m.counts[0].iter_mut().enumerate() {
            *x = (i * 7 % 13) as u64;
        }
        let p = PrefixSums::new(&m);
        for w in [Window::new(8, 8, 0, 0), Window::new(88, 120, 0, 0), Window::new(96, 400, 16, 200)] {
            let (a1, b1, a2, b2) = w.bin_ranges(&m).unwrap();
            assert_eq!(p.rect(0, a1, b1, a2, b2), window_counts(&m, &w).unwrap()[0]);
        }
    }

    #[test]
    fn mean_of_reported_inputs() {
        let vals: [f64; 4] = [0.941, 0.917, 0.831, 0.825];
        let mean = vals.iter().sum::<f64>() / 4.0;
        assert!((mean - 0.8785).abs() < 1e-12);
    }

    #[test]
    fn sweep_statistics_grow_with_area_and_flags_follow_threshold() {
        let good = filled(9, 1);
        let weak = filled(7, 3);
        let spec = SweepSpec { max_dt1_ps: 40, max_dt2_ps: 40, center_t1_ps: 0, center_t2_ps: 0 };
        let rows = window_sweep([(&good, Channel::D3), (&good, Channel::D3), (&good, Channel::D3), (&weak, Channel::D3)], &spec)
            .unwrap();
        assert_eq!(rows.len(), 25);
        assert!(rows.iter().all(|r| !r.all_above_75));
        assert!(highest_significance(&rows).is_none());
        let rows = window_sweep([(&good, Channel::D3); 4], &spec).unwrap();
        let best = highest_significance(&rows).unwrap();
        assert_eq!(best.window, Window::new(40, 40, 0, 0));
        for a in &rows {
            for b in &rows {
                if a.window.dt1_ps <= b.window.dt1_ps && a.window.dt2_ps <= b.window.dt2_ps {
                    assert!(a.individual[0].total() <= b.individual[0].total());
                }
            }
        }
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("sqrt_area_ps,"));
    }
}
