//! State and process reconstruction from coincidence data.

pub mod fit;
pub mod pipeline;
pub mod process;
pub mod state;

pub use fit::{fit_oscillation, fit_series, oscillation_series, FreqMode, SeriesPoint, SinusoidFit};
pub use pipeline::{reconstruct_process, ProcessReconstruction, TomographySettings};
pub use process::{
    average_gate_fidelity, cptp_projection, fidelity_landscape, process_fidelity, process_tomography, sigma_x, Landscape,
    ProcessMatrix,
};
pub use state::{physicality_projection, state_tomography_oscillation, state_tomography_static};
