//! Event-by-event Monte Carlo of the relay.
//!
//! Simulated time is cut into fixed segments, each driven by its own
//! ChaCha8 stream derived from `(seed, segment index)`, so results do not
//! depend on how many worker threads run. Segment outputs are merged in
//! order through a small carry buffer that absorbs tags pushed across a
//! segment boundary by timing jitter.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::relay::scenario::RelayScenario;
use crate::relay::tags::{Channel, TimeTag};
use crate::source::{intrinsic_visibility, visibility_cutoff_ps, JitterModel, PairEmitter};

/// Length of one independently seeded simulation segment.
pub const SEGMENT_PS: i64 = 1_000_000_000;

fn poisson_times<R: Rng>(rng: &mut R, rate_cps: f64, t0: f64, t1: f64, out: &mut Vec<f64>) {
    if rate_cps <= 0.0 {
        return;
    }
    let gap = Exp::new(rate_cps * 1e-12).expect("positive rate");
    let mut t = t0 + gap.sample(rng);
    while t < t1 {
        out.push(t);
        t += gap.sample(rng);
    }
}

/// Laser photon closest in time to `t` within `cutoff`, if any.
fn nearest(sorted: &[f64], t: f64, cutoff: f64) -> Option<f64> {
    let i = sorted.partition_point(|&x| x < t);
    let before = i.checked_sub(1).map(|j| sorted[j]);
    let after = sorted.get(i).copied();
    let best = match (before, after) {
        (Some(b), Some(a)) => Some(if t - b <= a - t { b } else { a }),
        (b, a) => b.or(a),
    };
    best.filter(|x| (x - t).abs() <= cutoff)
}

/// Tags whose true emission times fall in `[t0_ps, t1_ps)`, jittered and
/// sorted. Tags jittered below zero are dropped.
pub fn simulate_segment(seed: u64, segment: u64, scn: &RelayScenario, t0_ps: i64, t1_ps: i64) -> Vec<TimeTag> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(segment);
    let r = scn.rates();
    let (t0, t1) = (t0_ps as f64, t1_ps as f64);

    // Splitting a Poisson stream at the beam splitter gives two independent
    // Poisson streams.
    let mut laser_d1 = Vec::new();
    let mut laser_d2 = Vec::new();
    poisson_times(&mut rng, r.laser * r.laser_p_d1, t0, t1, &mut laser_d1);
    poisson_times(&mut rng, r.laser * (1.0 - r.laser_p_d1), t0, t1, &mut laser_d2);

    let emissions: Vec<_> = if r.pair_rate > 0.0 {
        PairEmitter::new(&mut rng, &scn.src, t0, t1).collect()
    } else {
        Vec::new()
    };

    let cutoff = visibility_cutoff_ps(&scn.laser, &scn.src);
    let mut biexciton: Vec<(Channel, f64)> = Vec::with_capacity(emissions.len());
    let mut exciton: Vec<(Channel, f64)> = Vec::with_capacity(emissions.len());

    for em in &emissions {
        let seen_2x = rng.gen::<f64>() < r.eta_2x;
        let h_port = rng.gen::<f64>() < 0.5;
        let seen_x = rng.gen::<f64>() < r.eta_x;
        if seen_2x {
            biexciton.push((if h_port { Channel::D1 } else { Channel::D2 }, em.t2x_ps));
        }
        if !seen_x {
            continue;
        }
        let p3 = if seen_2x {
            let partner = if h_port { &laser_d2 } else { &laser_d1 };
            let coherent = nearest(partner, em.t2x_ps, cutoff).and_then(|tl| {
                let (t_d1, tau1) = if h_port { (em.t2x_ps, tl - em.t2x_ps) } else { (tl, em.t2x_ps - tl) };
                let v = intrinsic_visibility(tau1, &scn.laser, &scn.src);
                (rng.gen::<f64>() < v.abs()).then(|| scn.coherent_d3_probability(em.tx_ps - t_d1, v.signum()))
            });
            r.with_leak(coherent.unwrap_or_else(|| scn.incoherent_d3_probability(h_port)))
        } else {
            0.5
        };
        exciton.push((if rng.gen::<f64>() < p3 { Channel::D3 } else { Channel::D4 }, em.tx_ps));
    }

    let mut dark: [Vec<f64>; 4] = Default::default();
    for d in dark.iter_mut() {
        poisson_times(&mut rng, r.dark, t0, t1, d);
    }

    // Every source stream is time ordered before jitter, so each becomes a
    // nearly sorted run of packed (time, channel) keys. Runs are repaired
    // locally and then merged by the run-detecting stable sort.
    let jitter = JitterModel::new(&scn.det);
    let mut keys: Vec<u64> =
        Vec::with_capacity(laser_d1.len() + laser_d2.len() + biexciton.len() + exciton.len() + dark.iter().map(Vec::len).sum::<usize>());
    let mut add_run = |events: &mut dyn Iterator<Item = (Channel, f64)>| {
        let start = keys.len();
        for (ch, t) in events {
            let t = (t + jitter.sample(&mut rng)).round() as i64;
            if t >= 0 {
                keys.push(((t as u64) << 2) | u64::from(ch.index()));
            }
        }
        insertion_sort(&mut keys[start..]);
    };
    add_run(&mut laser_d1.iter().map(|&t| (Channel::D1, t)));
    add_run(&mut laser_d2.iter().map(|&t| (Channel::D2, t)));
    add_run(&mut biexciton.into_iter());
    add_run(&mut exciton.into_iter());
    for (ch, d) in Channel::ALL.into_iter().zip(&dark) {
        add_run(&mut d.iter().map(|&t| (ch, t)));
    }
    keys.sort();
    keys.into_iter().map(|k| TimeTag::new(Channel::ALL[(k & 3) as usize], (k >> 2) as i64)).collect()
}

/// Insertion sort, linear on input whose elements sit a few places from
/// their final position.
fn insertion_sort(v: &mut [u64]) {
    for i in 1..v.len() {
        let x = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] > x {
            v[j] = v[j - 1];
            j -= 1;
        }
        v[j] = x;
    }
}

fn merge_sorted(a: &[TimeTag], b: &[TimeTag]) -> Vec<TimeTag> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Simulates `duration_s` and hands globally sorted chunks of tags to
/// `sink` in time order. Returns the number of tags produced.
pub fn simulate_streaming<F>(seed: u64, scn: &RelayScenario, duration_s: f64, mut sink: F) -> Result<u64>
where
    F: FnMut(&[TimeTag]) -> Result<()>,
{
    scn.validate()?;
    if !scn.accidentals {
        return Err(Error::Precondition("the Monte Carlo backend cannot suppress accidental coincidences".into()));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::Domain(format!("duration {duration_s} s must be > 0")));
    }
    let total_ps = (duration_s * 1e12).round() as i64;
    let n_seg = ((total_ps + SEGMENT_PS - 1) / SEGMENT_PS) as u64;
    let margin = (JitterModel::new(&scn.det).max_abs().ceil() as i64) + 2;
    let batch = (rayon::current_num_threads() * 2).max(1) as u64;

    let mut carry: Vec<TimeTag> = Vec::new();
    let mut produced = 0u64;
    let mut start = 0u64;
    while start < n_seg {
        let end = (start + batch).min(n_seg);
        let parts: Vec<Vec<TimeTag>> = (start..end)
            .into_par_iter()
            .map(|s| {
                let t0 = s as i64 * SEGMENT_PS;
                let t1 = (t0 + SEGMENT_PS).min(total_ps);
                simulate_segment(seed, s, scn, t0, t1)
            })
            .collect();
        for (k, part) in parts.into_iter().enumerate() {
            let seg = start + k as u64;
            // Only the head of this segment can interleave with the carry.
            let overlap = carry.last().map_or(0, |last| part.partition_point(|t| t <= last));
            let head = merge_sorted(&carry, &part[..overlap]);
            let boundary = (seg as i64 + 1) * SEGMENT_PS - margin;
            let last_segment = seg + 1 == n_seg;
            let cut = if last_segment { part.len() } else { part.partition_point(|t| t.t_ps < boundary).max(overlap) };
            let head_cut = if last_segment { head.len() } else { head.partition_point(|t| t.t_ps < boundary) };
            for chunk in [&head[..head_cut], &part[overlap..cut]] {
                if !chunk.is_empty() {
                    sink(chunk)?;
                    produced += chunk.len() as u64;
                }
            }
            carry = head[head_cut..].iter().chain(&part[cut..]).copied().collect();
        }
        start = end;
    }
    Ok(produced)
}

/// Convenience wrapper collecting the whole stream in memory.
pub fn simulate_time_tags(seed: u64, scn: &RelayScenario, duration_s: f64) -> Result<Vec<TimeTag>> {
    let mut all = Vec::new();
    simulate_streaming(seed, scn, duration_s, |chunk| {
        all.extend_from_slice(chunk);
        Ok(())
    })?;
    Ok(all)
}
