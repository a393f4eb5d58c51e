//! Quantum process tomography of the relay as a single-qubit channel.
//!
//! The channel is written in the Pauli basis, `ε(ρ) = Σ χ_mn σ_m ρ σ_n`,
//! with `σ₀ = 𝟙, σ₁ = X, σ₂ = Y, σ₃ = Z`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::polarization::{fidelity, pure_state, DensityMatrix1Q, Mat2, Mat4, PauliSet, PolarizationState, C64};

const TP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessMatrix {
    chi: Mat4,
}

impl ProcessMatrix {
    /// Accepts a χ that is Hermitian, positive semidefinite and trace
    /// preserving to within 1e-9.
    pub fn new(chi: Mat4) -> Result<Self> {
        let herm = (chi - chi.adjoint()).norm();
        if herm > TP_TOL {
            return Err(Error::NonPhysical(format!("χ not Hermitian ({herm:e})")));
        }
        let p = ProcessMatrix { chi };
        let min_eig = p.eigenvalues()[0];
        if min_eig < -TP_TOL {
            return Err(Error::NonPhysical(format!("χ has negative eigenvalue {min_eig}")));
        }
        let tp = p.tp_defect();
        if tp > TP_TOL {
            return Err(Error::NonPhysical(format!("χ not trace preserving ({tp:e})")));
        }
        Ok(p)
    }

    pub fn identity() -> Self {
        let mut chi = Mat4::zeros();
        chi[(0, 0)] = C64::new(1.0, 0.0);
        ProcessMatrix { chi }
    }

    /// Channel with the given Kraus operators.
    pub fn from_kraus(kraus: &[Mat2]) -> Result<Self> {
        let pauli = PauliSet::new();
        let mut chi = Mat4::zeros();
        for k in kraus {
            let e: Vec<C64> = (0..4).map(|m| (pauli.get(m) * k).trace() * 0.5).collect();
            for m in 0..4 {
                for n in 0..4 {
                    chi[(m, n)] += e[m] * e[n].conj();
                }
            }
        }
        ProcessMatrix::new(chi)
    }

    pub fn chi(&self) -> &Mat4 {
        &self.chi
    }

    /// Ascending eigenvalues of χ.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut v: Vec<f64> = SymmetricEigen::new(self.chi).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        [v[0], v[1], v[2], v[3]]
    }

    pub fn apply_matrix(&self, rho: &Mat2) -> Mat2 {
        apply_chi(&self.chi, rho)
    }

    pub fn apply(&self, rho: &DensityMatrix1Q) -> DensityMatrix1Q {
        let out = self.apply_matrix(rho.matrix());
        DensityMatrix1Q::new(out).unwrap_or_else(|_| crate::tomography::state::physicality_projection(&out))
    }

    fn tp_defect(&self) -> f64 {
        (tp_operator(&self.chi) - Mat2::identity()).norm()
    }
}

fn apply_chi(chi: &Mat4, rho: &Mat2) -> Mat2 {
    let p = PauliSet::new();
    let mut out = Mat2::zeros();
    for m in 0..4 {
        for n in 0..4 {
            if chi[(m, n)] != C64::new(0.0, 0.0) {
                out += p.get(m) * rho * p.get(n) * chi[(m, n)];
            }
        }
    }
    out
}

/// `Σ χ_mn σ_n σ_m`, which equals 𝟙 for a trace-preserving channel.
fn tp_operator(chi: &Mat4) -> Mat2 {
    let p = PauliSet::new();
    let mut out = Mat2::zeros();
    for m in 0..4 {
        for n in 0..4 {
            out += p.get(n) * p.get(m) * chi[(m, n)];
        }
    }
    out
}

fn unit(i: usize, j: usize) -> Mat2 {
    let mut e = Mat2::zeros();
    e[(i, j)] = C64::new(1.0, 0.0);
    e
}

/// Raw linear-inversion χ from the channel outputs for inputs H, V, D, R.
fn linear_inversion(out_h: &Mat2, out_v: &Mat2, out_d: &Mat2, out_r: &Mat2) -> Result<Mat4> {
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let hv = out_h + out_v;
    // images of the matrix units |i⟩⟨j|, expressed through the four inputs
    let images = [
        (unit(0, 0), *out_h),
        (unit(1, 1), *out_v),
        (unit(0, 1), out_d + out_r * i - hv * ((one + i) * 0.5)),
        (unit(1, 0), out_d - out_r * i - hv * ((one - i) * 0.5)),
    ];
    let pauli = PauliSet::new();
    let mut b = DMatrix::<C64>::zeros(16, 16);
    let mut rhs = DVector::<C64>::zeros(16);
    for (r, (e, img)) in images.iter().enumerate() {
        for m in 0..4 {
            for n in 0..4 {
                let t = pauli.get(m) * e * pauli.get(n);
                for k in 0..2 {
                    for l in 0..2 {
                        b[(4 * r + 2 * k + l, 4 * m + n)] = t[(k, l)];
                    }
                }
            }
        }
        for k in 0..2 {
            for l in 0..2 {
                rhs[4 * r + 2 * k + l] = img[(k, l)];
            }
        }
    }
    let x = b.lu().solve(&rhs).ok_or_else(|| Error::InsufficientData("χ inversion is singular".into()))?;
    Ok(Mat4::from_fn(|m, n| x[4 * m + n]))
}

fn hermitize<const N: usize>(m: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn psd_clip(m: &Mat4) -> Mat4 {
    let eig = SymmetricEigen::new(hermitize(m));
    let d = Mat4::from_diagonal(&eig.eigenvalues.map(|v| C64::new(v.max(0.0), 0.0)));
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Orthogonal projection onto the affine set `{χ : Σ χ_mn σ_n σ_m = 𝟙}`.
struct TpProjector {
    a: DMatrix<C64>,
    gram_inv: DMatrix<C64>,
}

impl TpProjector {
    fn new() -> Self {
        let p = PauliSet::new();
        let mut a = DMatrix::<C64>::zeros(4, 16);
        for m in 0..4 {
            for n in 0..4 {
                let t = p.get(n) * p.get(m);
                for k in 0..2 {
                    for l in 0..2 {
                        a[(2 * k + l, 4 * m + n)] = t[(k, l)];
                    }
                }
            }
        }
        let gram_inv = (&a * a.adjoint()).try_inverse().expect("TP constraint rows are independent");
        TpProjector { a, gram_inv }
    }

    fn project(&self, chi: &Mat4) -> Mat4 {
        let x = DVector::from_fn(16, |i, _| chi[(i / 4, i % 4)]);
        let b = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let resid = &self.a * &x - b;
        let y = &x - self.a.adjoint() * (&self.gram_inv * resid);
        hermitize(&Mat4::from_fn(|m, n| y[4 * m + n]))
    }
}

/// Nearest completely positive, trace-preserving χ in Frobenius norm.
///
/// Dykstra's alternating projections between the PSD cone and the
/// trace-preserving affine set; the last step is the affine one so the
/// result is trace preserving to rounding, and positivity holds to the
/// convergence tolerance.
pub fn cptp_projection(chi: &Mat4) -> Mat4 {
    let tp = TpProjector::new();
    let mut x = hermitize(chi);
    let mut p = Mat4::zeros();
    let mut q = Mat4::zeros();
    for _ in 0..50_000 {
        let y = psd_clip(&(x + p));
        p += x - y;
        let x_new = tp.project(&(y + q));
        q += y - x_new;
        let step = (x_new - x).norm();
        x = x_new;
        if step < 1e-14 && (x - y).norm() < 1e-11 {
            break;
        }
    }
    x
}

/// Reconstructs χ from `(input, output)` pairs for the inputs H, V, D and R,
/// in that order, and projects it onto the CPTP set.
pub fn process_tomography(pairs: &[(DensityMatrix1Q, DensityMatrix1Q)]) -> Result<ProcessMatrix> {
    if pairs.len() != 4 {
        return Err(Error::Precondition(format!("need 4 input/output pairs, got {}", pairs.len())));
    }
    let expected = [PolarizationState::h(), PolarizationState::v(), PolarizationState::d(), PolarizationState::r()];
    for ((input, _), want) in pairs.iter().zip(expected) {
        if fidelity(input, &want.density()) < 1.0 - 1e-6 {
            return Err(Error::Precondition("inputs must be H, V, D, R in that order".into()));
        }
    }
    let raw = linear_inversion(pairs[0].1.matrix(), pairs[1].1.matrix(), pairs[2].1.matrix(), pairs[3].1.matrix())?;
    let chi = cptp_projection(&raw);
    Ok(ProcessMatrix { chi })
}

/// Pauli-basis coefficients of a unitary, `u_m = tr(σ_m U)/2`.
fn pauli_vector(u: &Mat2) -> [C64; 4] {
    let p = PauliSet::new();
    [0, 1, 2, 3].map(|m| (p.get(m) * u).trace() * 0.5)
}

/// Process fidelity `u† χ u` to the unitary `target`.
pub fn process_fidelity(chi: &ProcessMatrix, target: &Mat2) -> f64 {
    let u = pauli_vector(target);
    let mut f = C64::new(0.0, 0.0);
    for m in 0..4 {
        for n in 0..4 {
            f += u[m].conj() * chi.chi[(m, n)] * u[n];
        }
    }
    f.re
}

pub fn average_gate_fidelity(process_fidelity: f64) -> f64 {
    (2.0 * process_fidelity + 1.0) / 3.0
}

/// The bit-flip ideal of the relay at the phase origin.
pub fn sigma_x() -> Mat2 {
    *PauliSet::new().get(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    /// `(θ, φ, F)` rows, θ outer.
    pub points: Vec<(f64, f64, f64)>,
    pub min: f64,
    pub max: f64,
}

/// `F(θ, φ) = ⟨σxψ| ε(|ψ⟩⟨ψ|) |σxψ⟩` on a grid with θ ∈ [0, π] (inclusive,
/// `n_theta` points) and φ ∈ [0, 2π) (`n_phi` points).
pub fn fidelity_landscape(chi: &ProcessMatrix, n_theta: usize, n_phi: usize) -> Result<Landscape> {
    if n_theta < 2 || n_phi < 1 {
        return Err(Error::Precondition("landscape grid needs n_theta ≥ 2 and n_phi ≥ 1".into()));
    }
    let x = sigma_x();
    let mut points = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let th = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
        for j in 0..n_phi {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            let psi = pure_state(th, ph)?.vector();
            let rho = psi * psi.adjoint();
            let out = chi.apply_matrix(&rho);
            let t = x * psi;
            let f = (t.adjoint() * out * t)[(0, 0)].re;
            points.push((th, ph, f));
        }
    }
    let min = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let max = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(Landscape { points, min, max })
}

/// CSV with columns `m, n, chi_re, chi_im`.
pub fn write_chi_csv<W: Write>(writer: W, chi: &ProcessMatrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["m", "n", "chi_re", "chi_im"])?;
    for m in 0..4 {
        for n in 0..4 {
            let z = chi.chi[(m, n)];
            w.write_record([m.to_string(), n.to_string(), format!("{:.6}", z.re), format!("{:.6}", z.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `theta_rad, phi_rad, f`.
pub fn write_landscape_csv<W: Write>(writer: W, land: &Landscape) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["theta_rad", "phi_rad", "f"])?;
    for (t, p, f) in &land.points {
        w.write_record([format!("{t:.6}"), format!("{p:.6}"), format!("{f:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tomography::state::state_tomography_static;
    use nalgebra::Matrix4x2;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Binomial, Distribution, StandardNormal};

    fn inputs() -> [DensityMatrix1Q; 4] {
        [PolarizationState::h(), PolarizationState::v(), PolarizationState::d(), PolarizationState::r()].map(|s| s.density())
    }

    /// Random channel from a random 2 → 4 isometry (two Kraus operators).
    fn random_channel(seed: u64) -> ProcessMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let m = Matrix4x2::<C64>::from_fn(|_, _| C64::new(g(), g()));
        let q = m.qr().q();
        let k0 = Mat2::new(q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
        let k1 = Mat2::new(q[(2, 0)], q[(2, 1)], q[(3, 0)], q[(3, 1)]);
        ProcessMatrix::from_kraus(&[k0, k1]).unwrap()
    }

    fn pairs_of(chi: &ProcessMatrix) -> Vec<(DensityMatrix1Q, DensityMatrix1Q)> {
        inputs().iter().map(|i| (*i, chi.apply(i))).collect()
    }

    #[test]
    fn identity_and_bit_flip() {
        let id = ProcessMatrix::identity();
        assert!((process_fidelity(&id, &Mat2::identity()) - 1.0).abs() < 1e-12);
        let flip = ProcessMatrix::from_kraus(&[sigma_x()]).unwrap();
        let back = process_tomography(&pairs_of(&flip)).unwrap();
        assert!((back.chi()[(1, 1)].re - 1.0).abs() < 1e-10);
        assert!((average_gate_fidelity(process_fidelity(&back, &sigma_x())) - 1.0).abs() < 1e-10);
        let land = fidelity_landscape(&back, 19, 36).unwrap();
        assert!(land.min > 1.0 - 1e-9);
    }

    #[test]
    fn depolarizing_channel_values() {
        // ε(ρ) = (1 − p) XρX + p 𝟙/2
        let p = 0.3;
        let s = PauliSet::new();
        let w = |x: f64| C64::new(x.sqrt(), 0.0);
        let kraus = [
            s.get(1) * w(1.0 - 0.75 * p),
            s.get(0) * w(p / 4.0),
            s.get(2) * w(p / 4.0),
            s.get(3) * w(p / 4.0),
        ];
        let chi = ProcessMatrix::from_kraus(&kraus).unwrap();
        assert!(ProcessMatrix::from_kraus(&kraus[..3]).is_err());
        let fp = process_fidelity(&chi, &sigma_x());
        assert!((fp - (1.0 - 0.75 * p)).abs() < 1e-12);
        let land = fidelity_landscape(&chi, 10, 10).unwrap();
        assert!((land.min - land.max).abs() < 1e-9, "depolarizing noise is isotropic");
        assert!((land.min - average_gate_fidelity(fp)).abs() < 1e-9);
    }

    #[test]
    fn rejects_wrong_inputs() {
        let id = ProcessMatrix::identity();
        let mut pairs = pairs_of(&id);
        assert!(process_tomography(&pairs[..3]).is_err());
        pairs.swap(0, 1);
        assert!(process_tomography(&pairs).is_err());
    }

    #[test]
    fn cptp_projection_repairs_bad_chi() {
        let mut chi = Mat4::zeros();
        chi[(1, 1)] = C64::new(1.2, 0.0);
        chi[(0, 0)] = C64::new(-0.2, 0.0);
        chi[(0, 1)] = C64::new(0.1, 0.05);
        let fixed = cptp_projection(&chi);
        assert!(ProcessMatrix::new(fixed).is_ok());
    }

    #[test]
    fn noisy_round_trip() {
        let shots = 100_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..20 {
            let chi = random_channel(seed);
            let mut pairs = Vec::new();
            for input in inputs() {
                let out = chi.apply(&input);
                let mut est = |s: PolarizationState| {
                    let p = out.probability(&s);
                    Binomial::new(shots, p).unwrap().sample(&mut rng) as f64 / shots as f64
                };
                let (ph, pd, pr) = (est(PolarizationState::h()), est(PolarizationState::d()), est(PolarizationState::r()));
                pairs.push((input, state_tomography_static(ph, pd, pr).unwrap()));
            }
            let back = process_tomography(&pairs).unwrap();
            assert!((back.chi() - chi.chi()).norm() < 0.05, "seed {seed}: {}", (back.chi() - chi.chi()).norm());
            assert!(ProcessMatrix::new(*back.chi()).is_ok());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn noiseless_round_trip(seed in any::<u64>()) {
            let chi = random_channel(seed);
            let back = process_tomography(&pairs_of(&chi)).unwrap();
            prop_assert!((back.chi() - chi.chi()).norm() < 1e-10);
        }

        #[test]
        fn average_fidelity_is_affine_in_process_fidelity(seed in any::<u64>()) {
            let chi = random_channel(seed);
            let fp = process_fidelity(&chi, &sigma_x());
            // mean of the landscape over a Haar-uniform design (octahedron)
            let states = [
                PolarizationState::h(), PolarizationState::v(), PolarizationState::d(),
                PolarizationState::a(), PolarizationState::r(), PolarizationState::l(),
            ];
            let x = sigma_x();
            let mean: f64 = states.iter().map(|s| {
                let psi = s.vector();
                let out = chi.apply_matrix(&(psi * psi.adjoint()));
                let t = x * psi;
                (t.adjoint() * out * t)[(0, 0)].re
            }).sum::<f64>() / 6.0;
            prop_assert!((mean - average_gate_fidelity(fp)).abs() < 1e-10);
        }
    }
}
