pub mod analytic;
pub mod montecarlo;
pub mod scenario;
pub mod tags;

pub use montecarlo::{simulate_streaming, simulate_time_tags};
pub use analytic::{analytic_threefold_density, herald_rate, DensityGrid, RateDensity3F};
pub use scenario::{BobBasis, CardinalState, DerivedRates, RelayScenario};
pub use tags::{Channel, TimeTag};
