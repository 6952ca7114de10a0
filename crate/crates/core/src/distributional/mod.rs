//! Distributional functions of point pairs, their pointwise order, and
//! estimation of the (weak) spectrum as the minimal elements.

mod pair;
mod spectrum;
mod step;

pub use pair::{
    chaos_measure, default_grid, empirical_df, exact_df, isotectic_probe, joint_period, weak_pair_filter, xi,
    DfError, DfPair, Isotectic, Provenance, Refutation,
};
pub use spectrum::{
    compare, minimal_elements, minimal_indices, spectrum_estimate, Candidate, Certificate, Comparison,
    SamplerConfig, Source, SpectrumError, SpectrumReport,
};
pub use step::{StepError, StepFunction};
