//! Secret-key yield and classical/quantum fidelity thresholds.

use crate::error::{Error, Result};

/// Best fidelity achievable by measure-and-prepare strategies on all pure states.
pub const UNIVERSAL_CLASSICAL_LIMIT: f64 = 2.0 / 3.0;
/// Cloning limit for protocols restricted to six states.
pub const SIX_STATE_LIMIT: f64 = 0.724;
/// Cloning limit for the four BB84 states.
pub const FOUR_STATE_LIMIT: f64 = 0.75;
/// Fidelity needed for key distillation with one-way error correction.
pub const ERROR_CORRECTION_LIMIT: f64 = 0.80;

/// Binary entropy in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Asymptotic secret bits per sifted coincidence, `max(0, 1 − 2H(1 − f))`.
pub fn secure_bits(fidelity: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::Domain(format!("fidelity {fidelity} outside [0, 1]")));
    }
    Ok((1.0 - 2.0 * binary_entropy(1.0 - fidelity)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub fidelity: f64,
    pub passes_universal_2_3: bool,
    pub passes_6state_724: bool,
    pub passes_4state_75: bool,
    pub passes_ec_80: bool,
    pub secure_bits_per_coincidence: f64,
}

/// Compares `fidelity` with each threshold. Every comparison is strict, so a
/// value sitting exactly on a limit does not pass it.
pub fn threshold_report(fidelity: f64) -> Result<ThresholdReport> {
    Ok(ThresholdReport {
        fidelity,
        passes_universal_2_3: fidelity > UNIVERSAL_CLASSICAL_LIMIT,
        passes_6state_724: fidelity > SIX_STATE_LIMIT,
        passes_4state_75: fidelity > FOUR_STATE_LIMIT,
        passes_ec_80: fidelity > ERROR_CORRECTION_LIMIT,
        secure_bits_per_coincidence: secure_bits(fidelity)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert!((secure_bits(0.945).unwrap() - 0.385).abs() < 1e-3);
        // the zero crossing sits at f ≈ 0.88997, so 0.89 is zero to within 2e-4
        assert!(secure_bits(0.89).unwrap() < 2e-4);
        assert_eq!(secure_bits(0.88).unwrap(), 0.0);
        assert_eq!(secure_bits(1.0).unwrap(), 1.0);
        assert!(secure_bits(1.01).is_err());
        assert!(secure_bits(f64::NAN).is_err());
    }

    #[test]
    fn reports() {
        let r = threshold_report(0.879).unwrap();
        assert!(r.passes_universal_2_3 && r.passes_6state_724 && r.passes_4state_75 && r.passes_ec_80);
        assert_eq!(r.secure_bits_per_coincidence, 0.0);
        let r = threshold_report(0.70).unwrap();
        assert!(r.passes_universal_2_3 && !r.passes_6state_724 && !r.passes_4state_75 && !r.passes_ec_80);
        let r = threshold_report(2.0 / 3.0).unwrap();
        assert!(!r.passes_universal_2_3);
    }

    proptest! {
        #[test]
        fn yield_is_monotone_above_one_half(a in 0.5..1.0f64, b in 0.5..1.0f64) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(secure_bits(lo).unwrap() <= secure_bits(hi).unwrap());
        }
    }
}
