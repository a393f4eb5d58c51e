//! Polarization qubits, the two-photon cascade state and the Bell projections
//! used by the relay.
//!
//! Conventions used throughout the crate:
//!
//! * single-photon basis order is `(H, V)`;
//! * two-photon basis order is `(HH, HV, VH, VV)` with the first factor the
//!   biexciton (2X) photon, or the laser photon when a Bell projection acts on
//!   the (laser, 2X) pair;
//! * times are picoseconds, energies micro-electronvolts.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

/// Reduced Planck constant in µeV·ps.
pub const HBAR_UEV_PS: f64 = 658.2119569;

const NORM_TOL: f64 = 1e-12;
const PHYS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
}

impl PhysicalConstants {
    pub const SI_DERIVED: PhysicalConstants = PhysicalConstants { hbar: HBAR_UEV_PS };
}

/// Angular frequency (rad/ps) of the phase picked up by the cascade state
/// for a fine-structure splitting given in µeV.
pub fn precession_rate(s_split_uev: f64) -> f64 {
    s_split_uev / HBAR_UEV_PS
}

/// Period 2πħ/S in picoseconds.
pub fn precession_period_ps(s_split_uev: f64) -> f64 {
    2.0 * PI * HBAR_UEV_PS / s_split_uev
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cis(phase: f64) -> C64 {
    C64::from_polar(1.0, phase)
}

/// A pure polarization qubit `amp_h |H⟩ + amp_v |V⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub amp_h: C64,
    pub amp_v: C64,
}

impl PolarizationState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amp_h: C64, amp_v: C64) -> Result<Self> {
        let n = (amp_h.norm_sqr() + amp_v.norm_sqr()).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return domain("polarization amplitudes must be finite and not both zero");
        }
        Ok(Self { amp_h: amp_h / n, amp_v: amp_v / n })
    }

    pub fn h() -> Self {
        Self { amp_h: c(1.0, 0.0), amp_v: c(0.0, 0.0) }
    }

    pub fn v() -> Self {
        Self { amp_h: c(0.0, 0.0), amp_v: c(1.0, 0.0) }
    }

    pub fn d() -> Self {
        Self { amp_h: c(FRAC_1_SQRT_2, 0.0), amp_v: c(FRAC_1_SQRT_2, 0.0) }
    }

    pub fn a() -> Self {
        Self { amp_h: c(FRAC_1_SQRT_2, 0.0), amp_v: c(-FRAC_1_SQRT_2, 0.0) }
    }

    pub fn r() -> Self {
        Self { amp_h: c(FRAC_1_SQRT_2, 0.0), amp_v: c(0.0, FRAC_1_SQRT_2) }
    }

    pub fn l() -> Self {
        Self { amp_h: c(FRAC_1_SQRT_2, 0.0), amp_v: c(0.0, -FRAC_1_SQRT_2) }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_h.norm_sqr() + self.amp_v.norm_sqr()
    }

    /// Removes the global phase so that `amp_h` is real and non-negative
    /// (or, for `|V⟩`-like states, `amp_v` is).
    pub fn canonicalize(&self) -> Self {
        let pivot = if self.amp_h.norm() > NORM_TOL { self.amp_h } else { self.amp_v };
        let rot = cis(-pivot.arg());
        let mut out = Self { amp_h: self.amp_h * rot, amp_v: self.amp_v * rot };
        if self.amp_h.norm() > NORM_TOL {
            out.amp_h = c(out.amp_h.re, 0.0);
        } else {
            out.amp_v = c(out.amp_v.re, 0.0);
        }
        out
    }

    pub fn vector(&self) -> Vector2<C64> {
        Vector2::new(self.amp_h, self.amp_v)
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> C64 {
        self.amp_h.conj() * other.amp_h + self.amp_v.conj() * other.amp_v
    }

    pub fn density(&self) -> DensityMatrix1Q {
        let v = self.vector();
        DensityMatrix1Q { m: v * v.adjoint() }
    }

    /// Polar angle θ and azimuth φ of `cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩`.
    pub fn angles(&self) -> (f64, f64) {
        let s = self.canonicalize();
        let theta = 2.0 * s.amp_v.norm().atan2(s.amp_h.norm());
        let phi = if s.amp_v.norm() < NORM_TOL || s.amp_h.norm() < NORM_TOL {
            0.0
        } else {
            s.amp_v.arg().rem_euclid(2.0 * PI)
        };
        (theta, phi)
    }

    /// The orthogonal state.
    pub fn orthogonal(&self) -> Self {
        Self { amp_h: -self.amp_v.conj(), amp_v: self.amp_h.conj() }.canonicalize()
    }
}

/// `cos(θ/2)|H⟩ + e^{iφ} sin(θ/2)|V⟩`, canonicalized.
pub fn pure_state(theta: f64, phi: f64) -> Result<PolarizationState> {
    if !(0.0..=PI).contains(&theta) {
        return domain(format!("theta = {theta} outside [0, π]"));
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return domain(format!("phi = {phi} outside [0, 2π)"));
    }
    let st = PolarizationState {
        amp_h: c((theta / 2.0).cos(), 0.0),
        amp_v: cis(phi) * (theta / 2.0).sin(),
    };
    Ok(st.canonicalize())
}

/// Output of an ideal relay at heralding delay `tau2`: the input with H and V
/// exchanged and the relative phase advanced by `−S·τ₂/ħ`.
pub fn expected_output(input: &PolarizationState, tau2: f64, s_split: f64) -> PolarizationState {
    let rot = cis(-precession_rate(s_split) * tau2);
    PolarizationState { amp_h: input.amp_v * rot, amp_v: input.amp_h }.canonicalize()
}

/// Single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix1Q {
    m: Mat2,
}

impl DensityMatrix1Q {
    /// Validates hermiticity, unit trace and positivity (tolerance 1e-10).
    pub fn new(m: Mat2) -> Result<Self> {
        check_hermitian(&m)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > PHYS_TOL || tr.im.abs() > PHYS_TOL {
            return Err(Error::NonPhysical(format!("trace {tr} != 1")));
        }
        let (lo, _) = hermitian_eigenvalues_2(&m);
        if lo < -PHYS_TOL {
            return Err(Error::NonPhysical(format!("negative eigenvalue {lo}")));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: Mat2) -> Self {
        Self { m }
    }

    pub fn maximally_mixed() -> Self {
        Self { m: Mat2::identity() * c(0.5, 0.0) }
    }

    /// ρ = (𝟙 + x σx + y σy + z σz)/2; the vector must lie in the unit ball.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !len.is_finite() || len > 1.0 + PHYS_TOL {
            return Err(Error::NonPhysical(format!("Bloch vector length {len} > 1")));
        }
        Ok(Self { m: bloch_matrix(r) })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.m
    }

    pub fn bloch(&self) -> [f64; 3] {
        let m = &self.m;
        [2.0 * m[(0, 1)].re, -2.0 * m[(0, 1)].im, (m[(0, 0)] - m[(1, 1)]).re]
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        hermitian_eigenvalues_2(&self.m)
    }

    pub fn purity(&self) -> f64 {
        (self.m * self.m).trace().re
    }

    /// Born probability of projecting onto `state`.
    pub fn probability(&self, state: &PolarizationState) -> f64 {
        let v = state.vector();
        (v.adjoint() * self.m * v)[(0, 0)].re.clamp(0.0, 1.0)
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let d = self.bloch();
        let e = other.bloch();
        0.5 * ((d[0] - e[0]).powi(2) + (d[1] - e[1]).powi(2) + (d[2] - e[2]).powi(2)).sqrt()
    }
}

pub(crate) fn bloch_matrix(r: [f64; 3]) -> Mat2 {
    Mat2::new(
        c(0.5 * (1.0 + r[2]), 0.0),
        c(0.5 * r[0], -0.5 * r[1]),
        c(0.5 * r[0], 0.5 * r[1]),
        c(0.5 * (1.0 - r[2]), 0.0),
    )
}

fn check_hermitian<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> Result<()> {
    let dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if dev > PHYS_TOL {
        return Err(Error::NonPhysical(format!("matrix not Hermitian (deviation {dev:e})")));
    }
    Ok(())
}

/// Ascending eigenvalues of a 2×2 Hermitian matrix.
pub(crate) fn hermitian_eigenvalues_2(m: &Mat2) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - rad, mean + rad)
}

/// Uhlmann fidelity `(tr √(√a b √a))²`.
///
/// For qubits this equals `tr(ab) + 2√(det a · det b)`, which is what is
/// evaluated here. Validity of both arguments is guaranteed by construction
/// of [`DensityMatrix1Q`].
pub fn fidelity(a: &DensityMatrix1Q, b: &DensityMatrix1Q) -> f64 {
    let tr = (a.m * b.m).trace().re;
    let da = a.m.determinant().re.max(0.0);
    let db = b.m.determinant().re.max(0.0);
    (tr + 2.0 * (da * db).sqrt()).clamp(0.0, 1.0)
}

/// Fidelity of a raw (possibly invalid) pair of matrices; rejects
/// non-physical input.
pub fn fidelity_raw(a: &Mat2, b: &Mat2) -> Result<f64> {
    let a = DensityMatrix1Q::new(*a).map_err(|e| Error::Domain(e.to_string()))?;
    let b = DensityMatrix1Q::new(*b).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(fidelity(&a, &b))
}

/// The identity and the three Pauli operators, indexed 0..3.
#[derive(Debug, Clone, Copy)]
pub struct PauliSet {
    pub ops: [Mat2; 4],
}

impl PauliSet {
    pub fn new() -> Self {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let i = c(0.0, 1.0);
        Self {
            ops: [
                Mat2::identity(),
                Mat2::new(z, one, one, z),
                Mat2::new(z, -i, i, z),
                Mat2::new(one, z, z, -one),
            ],
        }
    }

    pub fn get(&self, idx: usize) -> &Mat2 {
        &self.ops[idx]
    }
}

impl Default for PauliSet {
    fn default() -> Self {
        Self::new()
    }
}

/// Density matrix of two polarization qubits, basis `(HH, HV, VH, VV)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    m: Mat4,
}

impl TwoQubitState {
    pub fn new(m: Mat4) -> Result<Self> {
        check_hermitian(&m)?;
        let tr = m.trace();
        if (tr.re - 1.0).abs() > PHYS_TOL || tr.im.abs() > PHYS_TOL {
            return Err(Error::NonPhysical(format!("trace {tr} != 1")));
        }
        let lo = hermitian_eigenvalues_4(&m)[0];
        if lo < -PHYS_TOL {
            return Err(Error::NonPhysical(format!("negative eigenvalue {lo}")));
        }
        Ok(Self { m })
    }

    pub(crate) fn from_matrix_unchecked(m: Mat4) -> Self {
        Self { m }
    }

    pub fn from_pure(psi: &Vector4<C64>) -> Result<Self> {
        let n = psi.norm();
        if !(n.is_finite() && n > 0.0) {
            return domain("zero state vector");
        }
        let v = psi / c(n, 0.0);
        Ok(Self { m: v * v.adjoint() })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.m
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        hermitian_eigenvalues_4(&self.m)
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalized `psi`.
    pub fn fidelity_to_pure(&self, psi: &Vector4<C64>) -> f64 {
        (psi.adjoint() * self.m * psi)[(0, 0)].re
    }

    /// State of the second photon (trace over the first).
    pub fn reduced_second(&self) -> DensityMatrix1Q {
        let mut r = Mat2::zeros();
        for a in 0..2 {
            for x in 0..2 {
                for y in 0..2 {
                    r[(x, y)] += self.m[(2 * a + x, 2 * a + y)];
                }
            }
        }
        DensityMatrix1Q { m: r }
    }

    /// State of the first photon (trace over the second).
    pub fn reduced_first(&self) -> DensityMatrix1Q {
        let mut r = Mat2::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    r[(a, b)] += self.m[(2 * a + x, 2 * b + x)];
                }
            }
        }
        DensityMatrix1Q { m: r }
    }

    /// Expectation value of `op_first ⊗ op_second`.
    pub fn correlation(&self, op_first: &Mat2, op_second: &Mat2) -> f64 {
        (self.m * op_first.kronecker(op_second)).trace().re
    }
}

/// Ascending eigenvalues of a 4×4 Hermitian matrix.
pub(crate) fn hermitian_eigenvalues_4(m: &Mat4) -> [f64; 4] {
    let eig = nalgebra::SymmetricEigen::new(*m);
    let mut ev = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2], eig.eigenvalues[3]];
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn phi_plus() -> Vector4<C64> {
    Vector4::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0))
}

pub fn phi_minus() -> Vector4<C64> {
    Vector4::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-FRAC_1_SQRT_2, 0.0))
}

pub fn psi_plus() -> Vector4<C64> {
    Vector4::new(c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0))
}

pub fn psi_minus() -> Vector4<C64> {
    Vector4::new(c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0), c(0.0, 0.0))
}

/// `(|H₂ₓHₓ⟩ + e^{iωτ}|V₂ₓVₓ⟩)/√2` with `ω = S/ħ`, as a state vector.
pub fn cascade_vector(tau: f64, s_split: f64) -> Vector4<C64> {
    let ph = cis(precession_rate(s_split) * tau);
    Vector4::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), ph * FRAC_1_SQRT_2)
}

/// Pure cascade state emitted with 2X–X delay `tau` (ps).
pub fn entangled_pair_state(tau: f64, s_split: f64) -> Result<TwoQubitState> {
    if !(s_split >= 0.0 && s_split.is_finite()) {
        return domain(format!("fine-structure splitting {s_split} must be >= 0"));
    }
    let v = cascade_vector(tau, s_split);
    Ok(TwoQubitState { m: v * v.adjoint() })
}

/// Projector onto `(|HV⟩ + |VH⟩)/√2`.
pub fn bell_psi_plus_projector() -> Mat4 {
    let v = psi_plus();
    v * v.adjoint()
}

/// Fidelity estimate built from polarization correlations in three bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationFidelity {
    /// Raw estimate `(1 + C_HV + C_DA − C_RL)/4`; may leave [0, 1] for noisy data.
    pub value: f64,
    pub out_of_range: bool,
}

impl CorrelationFidelity {
    pub fn clamped(&self) -> f64 {
        self.value.clamp(0.0, 1.0)
    }
}

/// Fidelity to Φ⁺ from the correlation contrasts measured in the rectilinear,
/// diagonal and circular bases (each `(N_same − N_opposite)/N_total`).
pub fn entanglement_fidelity_from_correlations(c_hv: f64, c_da: f64, c_rl: f64) -> CorrelationFidelity {
    let value = (1.0 + c_hv + c_da - c_rl) / 4.0;
    CorrelationFidelity { value, out_of_range: !(0.0..=1.0).contains(&value) }
}

/// Unnormalized state of photon 3 after projecting photons 1 and 2 of
/// `rho_1 ⊗ rho_23` onto `bra` (a two-photon vector in the 1–2 space).
/// The trace of the result is the projection probability.
pub fn conditional_third(rho_1: &Mat2, rho_23: &Mat4, bra: &Vector4<C64>) -> Mat2 {
    // ρ₃[x,x'] = Σ conj(b[l,a]) ρ₁[l,l'] ρ₂₃[(a,x),(a',x')] b[l',a']
    let mut out = Mat2::zeros();
    for l in 0..2 {
        for a in 0..2 {
            let bl = bra[2 * l + a].conj();
            if bl.norm_sqr() == 0.0 {
                continue;
            }
            for lp in 0..2 {
                for ap in 0..2 {
                    let br = bra[2 * lp + ap];
                    if br.norm_sqr() == 0.0 {
                        continue;
                    }
                    let w = bl * rho_1[(l, lp)] * br;
                    for x in 0..2 {
                        for xp in 0..2 {
                            out[(x, xp)] += w * rho_23[(2 * a + x, 2 * ap + xp)];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Heralded X-photon states of the relay for one input and one pair state.
#[derive(Debug, Clone, Copy)]
pub struct HeraldedStates {
    /// Ψ⁺-projected (indistinguishable photons) output.
    pub coherent_plus: DensityMatrix1Q,
    /// Ψ⁻-projected output, reached when the interference term changes sign.
    pub coherent_minus: DensityMatrix1Q,
    /// Which-path mixture: laser V / 2X H and laser H / 2X V.
    pub incoherent: DensityMatrix1Q,
}

/// Projects `input ⊗ pair` onto the Bell states and the which-path states of
/// the (laser, 2X) photons and returns the normalized X-photon states.
pub fn heralded_states(input: &DensityMatrix1Q, pair: &TwoQubitState) -> HeraldedStates {
    let norm = |m: Mat2| {
        let t = m.trace().re;
        DensityMatrix1Q::from_matrix_unchecked(m / c(t, 0.0))
    };
    let plus = conditional_third(&input.m, &pair.m, &psi_plus());
    let minus = conditional_third(&input.m, &pair.m, &psi_minus());
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let hv = Vector4::new(zero, one, zero, zero);
    let vh = Vector4::new(zero, zero, one, zero);
    let incoh = conditional_third(&input.m, &pair.m, &hv) + conditional_third(&input.m, &pair.m, &vh);
    HeraldedStates { coherent_plus: norm(plus), coherent_minus: norm(minus), incoherent: norm(incoh) }
}
