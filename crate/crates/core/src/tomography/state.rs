//! Single-qubit state reconstruction.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::polarization::{bloch_matrix, DensityMatrix1Q, Mat2, C64};
use crate::tomography::fit::SinusoidFit;

/// Largest oscillation amplitude accepted before a reconstruction is
/// declared non-physical (0.5 plus counting slack).
pub const AMPLITUDE_TOLERANCE: f64 = 0.05;

/// Closest unit-trace positive semidefinite matrix obtained by clipping
/// negative eigenvalues and renormalizing. The input is Hermitized first.
pub fn clip_to_density(m: &Mat2) -> Mat2 {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    let total: f64 = vals.iter().sum();
    if total <= 0.0 {
        return Mat2::identity() * C64::new(0.5, 0.0);
    }
    let d = Mat2::from_diagonal(&vals.map(|v| C64::new(v / total, 0.0)));
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// Nearest physical qubit state by eigenvalue clipping.
pub fn physicality_projection(raw: &Mat2) -> DensityMatrix1Q {
    DensityMatrix1Q::from_matrix_unchecked(clip_to_density(raw))
}

fn stokes_state(s: [f64; 3]) -> DensityMatrix1Q {
    physicality_projection(&bloch_matrix(s))
}

/// State from the fractions of first-listed outcomes in the three bases:
/// P(H), P(D), P(R).
pub fn state_tomography_static(p_hv: f64, p_da: f64, p_rl: f64) -> Result<DensityMatrix1Q> {
    for p in [p_hv, p_da, p_rl] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("outcome fraction {p} outside [0, 1]")));
        }
    }
    Ok(stokes_state([2.0 * p_da - 1.0, 2.0 * p_rl - 1.0, 2.0 * p_hv - 1.0]))
}

/// State at the phase origin from a fit of P(D) along τ₂ and the H fraction.
///
/// With `P(D) = c + A cos(ωτ₂ − φ)` the equatorial components are
/// `s_x = 2A cos(φ − φ₀)` and `s_y = −2A sin(φ − φ₀)`: the output phase
/// runs as `−ωτ₂`, so a state with azimuth ϕ reaches its D-maximum at
/// `ωτ₂ = −ϕ` (relative to φ₀). For example φ − φ₀ = +π/2 gives `|L⟩`.
pub fn state_tomography_oscillation(fit: &SinusoidFit, p_hv: f64, phase_offset: f64) -> Result<DensityMatrix1Q> {
    if fit.amplitude > 0.5 + AMPLITUDE_TOLERANCE {
        return Err(Error::NonPhysical(format!("oscillation amplitude {} exceeds 1/2", fit.amplitude)));
    }
    if !(0.0..=1.0).contains(&p_hv) {
        return Err(Error::Domain(format!("H fraction {p_hv} outside [0, 1]")));
    }
    let d = fit.phase - phase_offset;
    let a2 = 2.0 * fit.amplitude;
    Ok(stokes_state([a2 * d.cos(), -a2 * d.sin(), 2.0 * p_hv - 1.0]))
}
