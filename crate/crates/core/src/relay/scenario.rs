use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarization::{expected_output, precession_rate, PolarizationState, C64};
use crate::relay::tags::Channel;
use crate::source::{CouplerParams, DetectorParams, LaserParams, QdSourceParams};

/// Analysis basis at Bob. `D3` records the first listed state, `D4` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BobBasis {
    HV,
    DA,
    RL,
}

impl BobBasis {
    pub const ALL: [BobBasis; 3] = [BobBasis::HV, BobBasis::DA, BobBasis::RL];

    /// States projected onto by D3 and D4.
    pub fn states(self) -> [PolarizationState; 2] {
        match self {
            BobBasis::HV => [PolarizationState::h(), PolarizationState::v()],
            BobBasis::DA => [PolarizationState::d(), PolarizationState::a()],
            BobBasis::RL => [PolarizationState::r(), PolarizationState::l()],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BobBasis::HV => "HV",
            BobBasis::DA => "DA",
            BobBasis::RL => "RL",
        }
    }
}

/// The six cardinal input states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CardinalState {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl CardinalState {
    pub const BB84: [CardinalState; 4] = [CardinalState::H, CardinalState::V, CardinalState::D, CardinalState::A];

    pub fn state(self) -> PolarizationState {
        match self {
            CardinalState::H => PolarizationState::h(),
            CardinalState::V => PolarizationState::v(),
            CardinalState::D => PolarizationState::d(),
            CardinalState::A => PolarizationState::a(),
            CardinalState::R => PolarizationState::r(),
            CardinalState::L => PolarizationState::l(),
        }
    }

    /// Basis in which this state is an eigenstate.
    pub fn basis(self) -> BobBasis {
        match self {
            CardinalState::H | CardinalState::V => BobBasis::HV,
            CardinalState::D | CardinalState::A => BobBasis::DA,
            CardinalState::R | CardinalState::L => BobBasis::RL,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CardinalState::H => "H",
            CardinalState::V => "V",
            CardinalState::D => "D",
            CardinalState::A => "A",
            CardinalState::R => "R",
            CardinalState::L => "L",
        }
    }
}

/// Everything needed to simulate one teleportation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayScenario {
    pub input_state: PolarizationState,
    pub src: QdSourceParams,
    pub laser: LaserParams,
    pub det: DetectorParams,
    pub coupler: CouplerParams,
    pub bob_basis: BobBasis,
    /// Fixed phase added to the output state's relative phase.
    pub phase_offset_rad: f64,
    /// Include laser–laser, dot–dot and neighbour-cascade coincidences.
    /// Only the analytic backend can switch them off.
    pub accidentals: bool,
}

impl RelayScenario {
    pub fn new(input_state: PolarizationState, bob_basis: BobBasis) -> Self {
        Self {
            input_state,
            src: QdSourceParams::default(),
            laser: LaserParams::default(),
            det: DetectorParams::default(),
            coupler: CouplerParams::default(),
            bob_basis,
            phase_offset_rad: 0.0,
            accidentals: true,
        }
    }

    /// Scenario for a cardinal input analysed in its own basis.
    pub fn cardinal(input: CardinalState) -> Self {
        Self::new(input.state(), input.basis())
    }

    pub fn validate(&self) -> Result<()> {
        self.src.validate()?;
        self.laser.validate()?;
        self.det.validate()?;
        self.coupler.validate()?;
        if !self.phase_offset_rad.is_finite() {
            return Err(Error::Config("phase_offset_rad must be finite".into()));
        }
        if (self.input_state.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("input state is not normalized".into()));
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        precession_rate(self.src.fss_uev)
    }

    /// τ₂ at which the output phase equals that of the input (up to the
    /// bit flip).
    pub fn phase_origin_ps(&self) -> f64 {
        let w = self.omega();
        if w > 0.0 {
            self.phase_offset_rad / w
        } else {
            0.0
        }
    }

    /// Bob's channel that an ideal relay fires for this input, evaluated at
    /// the phase origin.
    pub fn expected_channel(&self) -> Channel {
        let out = expected_output(&self.input_state, self.phase_origin_ps(), self.src.fss_uev);
        let [b3, _] = self.bob_basis.states();
        if b3.inner(&out).norm_sqr() >= 0.5 {
            Channel::D3
        } else {
            Channel::D4
        }
    }

    pub fn rates(&self) -> DerivedRates {
        DerivedRates::new(self)
    }

    /// Probability that Bob's D3 fires for the interfering (Bell-projected)
    /// output, heralded at delay `tau2`, before Bob's polarizer leakage.
    /// `sign` is −1 when the interference term is negative (Ψ⁻ projection).
    pub fn coherent_d3_probability(&self, tau2: f64, sign: f64) -> f64 {
        let [b3, _] = self.bob_basis.states();
        let lam = self.src.depolarization;
        let ph = C64::from_polar(sign, -(self.omega() * tau2 - self.phase_offset_rad));
        let amp = b3.amp_h.conj() * self.input_state.amp_v * ph + b3.amp_v.conj() * self.input_state.amp_h;
        (1.0 - lam) * amp.norm_sqr() + lam / 2.0
    }

    /// Probability that D3 fires for the X photon of a non-interfering
    /// herald in which the 2X photon was found H (`h_channel`) or V.
    pub fn incoherent_d3_probability(&self, h_channel: bool) -> f64 {
        let [b3, _] = self.bob_basis.states();
        let lam = self.src.depolarization;
        let (ph, pv) = (b3.amp_h.norm_sqr(), b3.amp_v.norm_sqr());
        if h_channel {
            (1.0 - lam / 2.0) * ph + lam / 2.0 * pv
        } else {
            lam / 2.0 * ph + (1.0 - lam / 2.0) * pv
        }
    }
}

/// Detected rates and probabilities derived from a scenario. Rates are in
/// counts per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub pair_rate: f64,
    /// Probability that a 2X photon is detected at the Bell measurement.
    pub eta_2x: f64,
    /// Probability that an X photon is detected by Bob.
    pub eta_x: f64,
    pub r2x: f64,
    pub laser: f64,
    /// Probabilities that a laser photon lands on D1 (H port) or D2 (V port).
    pub laser_p_d1: f64,
    pub laser_p_d2: f64,
    pub bob_leak: f64,
    pub dark: f64,
}

impl DerivedRates {
    fn new(s: &RelayScenario) -> Self {
        let eta_2x = s.coupler.split_ratio * s.det.efficiency;
        let r2x = s.src.pair_rate_cps * eta_2x;
        let leak = s.det.leakage();
        let p_h = s.input_state.amp_h.norm_sqr();
        let p_v = s.input_state.amp_v.norm_sqr();
        Self {
            pair_rate: s.src.pair_rate_cps,
            eta_2x,
            eta_x: s.det.efficiency,
            r2x,
            laser: s.laser.intensity_ratio * r2x,
            laser_p_d1: p_h * (1.0 - leak) + p_v * leak,
            laser_p_d2: p_v * (1.0 - leak) + p_h * leak,
            bob_leak: leak,
            dark: s.det.dark_cps,
        }
    }

    /// Singles rate of one Bob detector.
    pub fn bob_single(&self) -> f64 {
        self.pair_rate * self.eta_x / 2.0 + self.dark
    }

    /// Applies Bob's polarizer leakage to a D3 probability.
    pub fn with_leak(&self, p3: f64) -> f64 {
        p3 * (1.0 - self.bob_leak) + (1.0 - p3) * self.bob_leak
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::{heralded_states, DensityMatrix1Q};
    use crate::source::mixed_pair_state;

    #[test]
    fn expected_channels_follow_bit_flip() {
        use CardinalState::*;
        let want = [(H, Channel::D4), (V, Channel::D3), (D, Channel::D3), (A, Channel::D4), (R, Channel::D4), (L, Channel::D3)];
        for (c, ch) in want {
            assert_eq!(RelayScenario::cardinal(c).expected_channel(), ch, "{c:?}");
        }
    }

    #[test]
    fn closed_form_probabilities_match_projection() {
        for c in [CardinalState::D, CardinalState::R, CardinalState::H] {
            for basis in BobBasis::ALL {
                let mut s = RelayScenario::cardinal(c);
                s.bob_basis = basis;
                let b3 = basis.states()[0];
                for tau2 in [0.0, 57.0, 300.0] {
                    let hs = heralded_states(&s.input_state.density(), &mixed_pair_state(tau2, &s.src));
                    let p_plus = hs.coherent_plus.probability(&b3);
                    let p_minus = hs.coherent_minus.probability(&b3);
                    assert!((p_plus - s.coherent_d3_probability(tau2, 1.0)).abs() < 1e-12);
                    assert!((p_minus - s.coherent_d3_probability(tau2, -1.0)).abs() < 1e-12);
                    // which-path mixture is the even mix of the two cases
                    // weighted by the laser polarization
                    let ph = s.input_state.amp_h.norm_sqr();
                    let pv = s.input_state.amp_v.norm_sqr();
                    let mix = pv * s.incoherent_d3_probability(true) + ph * s.incoherent_d3_probability(false);
                    assert!((hs.incoherent.probability(&b3) - mix).abs() < 1e-12);
                }
            }
        }
        let _ = DensityMatrix1Q::maximally_mixed();
    }

    #[test]
    fn derived_rates() {
        let r = RelayScenario::cardinal(CardinalState::H).rates();
        assert!((r.r2x - 1e7).abs() < 1e-6);
        assert!((r.laser - 9e6).abs() < 1e-6);
        assert!((r.laser_p_d1 - 0.999).abs() < 1e-12);
        assert!((r.with_leak(1.0) - 0.999).abs() < 1e-12);
    }
}
