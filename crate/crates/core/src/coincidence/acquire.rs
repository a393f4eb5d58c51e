//! Producing coincidence maps from either backend, and the detuning sweep
//! built on top of that.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coincidence::fidelity::{teleportation_fidelity, FidelityEstimate, Window};
use crate::coincidence::map::{CoincidenceMap, ExpectedMap, MapBuilder, MapRanges};
use crate::error::{Error, Result};
use crate::relay::analytic::{analytic_threefold_density, DensityGrid};
use crate::relay::montecarlo::simulate_streaming;
use crate::relay::scenario::RelayScenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Analytic,
    Montecarlo,
}

/// How to obtain a map: which backend, binning and acquisition time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub backend: Backend,
    pub bin_ps: i64,
    pub duration_s: f64,
    pub seed: u64,
}

/// Deterministic, well-mixed child seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C909);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Expected counts of the analytic backend on `ranges`.
pub fn analytic_map(scn: &RelayScenario, bin_ps: i64, ranges: MapRanges, duration_s: f64) -> Result<ExpectedMap> {
    let probe = CoincidenceMap::empty(bin_ps, ranges)?;
    let grid = DensityGrid {
        t1_min_ps: ranges.t1_min_ps,
        t2_min_ps: ranges.t2_min_ps,
        n1: probe.n1,
        n2: probe.n2,
        step_ps: bin_ps,
    };
    let dens = analytic_threefold_density(scn, &grid)?;
    Ok(ExpectedMap::from_density(&dens, duration_s))
}

/// Simulates tags and bins them on the fly without storing the stream.
pub fn montecarlo_map(
    scn: &RelayScenario,
    bin_ps: i64,
    ranges: MapRanges,
    seed: u64,
    duration_s: f64,
) -> Result<CoincidenceMap> {
    let mut builder = MapBuilder::new(bin_ps, ranges)?;
    simulate_streaming(seed, scn, duration_s, |chunk| builder.push(chunk))?;
    Ok(builder.finish())
}

/// Ranges just large enough to hold `win`, with bins centred on multiples
/// of `bin_ps`.
pub fn ranges_for_window(win: &Window, bin_ps: i64) -> MapRanges {
    let h1 = win.center_t1_ps.abs() + win.dt1_ps / 2;
    MapRanges::centered(
        bin_ps,
        h1,
        win.center_t2_ps - win.dt2_ps / 2,
        win.center_t2_ps + win.dt2_ps / 2,
    )
}

/// Windowed fidelity of `scn` into its expected channel.
pub fn windowed_fidelity(scn: &RelayScenario, win: &Window, acq: &Acquisition) -> Result<FidelityEstimate> {
    let ranges = ranges_for_window(win, acq.bin_ps);
    let expected = scn.expected_channel();
    match acq.backend {
        Backend::Analytic => teleportation_fidelity(&analytic_map(scn, acq.bin_ps, ranges, acq.duration_s)?, win, expected),
        Backend::Montecarlo => {
            let map = montecarlo_map(scn, acq.bin_ps, ranges, acq.seed, acq.duration_s)?;
            teleportation_fidelity(&map, win, expected)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningPoint {
    pub delta_ghz: f64,
    pub estimate: FidelityEstimate,
}

/// Fidelity of `base` (normally input D analysed in the DA basis) for each
/// laser detuning in `deltas`, all in the same window. Monte Carlo points
/// use independent seeds derived from `acq.seed`.
pub fn detuning_sweep(base: &RelayScenario, deltas: &[f64], win: &Window, acq: &Acquisition) -> Result<Vec<DetuningPoint>> {
    if deltas.is_empty() {
        return Err(Error::Precondition("empty detuning list".into()));
    }
    deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut scn = *base;
            scn.laser.detuning_ghz = d;
            let acq_i = Acquisition { seed: derive_seed(acq.seed, i as u64), ..*acq };
            Ok(DetuningPoint { delta_ghz: d, estimate: windowed_fidelity(&scn, win, &acq_i)? })
        })
        .collect()
}

/// CSV with columns `delta_ghz, f, sigma`.
pub fn write_detuning_csv<W: Write>(writer: W, points: &[DetuningPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["delta_ghz", "f", "sigma", "n_total"])?;
    for p in points {
        w.write_record([
            format!("{:.4}", p.delta_ghz),
            format!("{:.6}", p.estimate.value),
            format!("{:.6}", p.estimate.sigma),
            format!("{:.3}", p.estimate.total()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
