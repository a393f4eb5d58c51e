#![allow(dead_code)]

use nalgebra::{Matrix4x2, SymmetricEigen};
use qrelay_core::coincidence::{CoincidenceMap, ExpectedMap, MapRanges, OutcomeMap};
use qrelay_core::polarization::{Mat2, Mat4, C64};
use qrelay_core::relay::{Channel, TimeTag};
use qrelay_core::tomography::ProcessMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Mean Pearson χ² per cell after merging `k × k` bins, over cells whose
/// expectation is at least `min_expected`. Returns `(χ²/cell, cells)`.
pub fn chi2_per_cell(observed: &CoincidenceMap, expected: &ExpectedMap, k: usize, min_expected: f64) -> (f64, usize) {
    let (n1, n2) = (observed.n1 / k, observed.n2 / k);
    let mut chi2 = 0.0;
    let mut cells = 0;
    for o in 0..2 {
        for c1 in 0..n1 {
            for c2 in 0..n2 {
                let (mut obs, mut exp) = (0.0, 0.0);
                for i1 in c1 * k..(c1 + 1) * k {
                    for i2 in c2 * k..(c2 + 1) * k {
                        obs += observed.get(o, i1, i2) as f64;
                        exp += expected.value(o, i1, i2);
                    }
                }
                if exp >= min_expected {
                    chi2 += (obs - exp).powi(2) / exp;
                    cells += 1;
                }
            }
        }
    }
    (chi2 / cells.max(1) as f64, cells)
}

/// Triple loop over every D1, D2 and Bob tag.
pub fn brute_force_map(tags: &[TimeTag], bin: i64, r: MapRanges) -> CoincidenceMap {
    let mut m = CoincidenceMap::empty(bin, r).unwrap();
    for a in tags.iter().filter(|t| t.channel == Channel::D1) {
        for b in tags.iter().filter(|t| t.channel == Channel::D2) {
            let t1 = b.t_ps - a.t_ps;
            if !(r.t1_min_ps..r.t1_max_ps).contains(&t1) {
                continue;
            }
            m.heralds += 1;
            for c in tags.iter().filter(|t| matches!(t.channel, Channel::D3 | Channel::D4)) {
                let t2 = c.t_ps - a.t_ps;
                if !(r.t2_min_ps..r.t2_max_ps).contains(&t2) {
                    continue;
                }
                let o = usize::from(c.channel == Channel::D4);
                let i1 = ((t1 - r.t1_min_ps) / bin) as usize;
                let i2 = ((t2 - r.t2_min_ps) / bin) as usize;
                m.counts[o][i1 * m.n2 + i2] += 1;
            }
        }
    }
    m
}

/// Random channel with two Kraus operators taken from a random isometry.
pub fn random_channel(seed: u64) -> ProcessMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
    let m = Matrix4x2::<C64>::from_fn(|_, _| C64::new(g(), g()));
    let q = m.qr().q();
    let k0 = Mat2::new(q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
    let k1 = Mat2::new(q[(2, 0)], q[(2, 1)], q[(3, 0)], q[(3, 1)]);
    ProcessMatrix::from_kraus(&[k0, k1]).unwrap()
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &Mat4) -> f64 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().map(|v| v.abs()).sum()
}
