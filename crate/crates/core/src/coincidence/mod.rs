pub mod acquire;
pub mod entanglement;
pub mod fidelity;
pub mod map;

pub use acquire::{analytic_map, detuning_sweep, montecarlo_map, Acquisition, Backend, DetuningPoint};
pub use fidelity::{highest_significance, teleportation_fidelity, window_sweep, FidelityEstimate, SweepRow, SweepSpec, Window};
pub use map::{build_threefold_map, CoincidenceMap, ExpectedMap, MapBuilder, MapRanges, OutcomeMap};
pub use entanglement::{entanglement_fidelity_curve, oscillation_period_fft, EntanglementPoint};
