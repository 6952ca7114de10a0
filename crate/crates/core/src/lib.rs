//! Analysis of piecewise monotonic interval maps satisfying the Markov
//! condition: hypothesis checks, covering-graph structure, periodic points,
//! and distributional functions with their minimal elements (the
//! distributional spectrum).
//!
//! All algorithms are generic over [`Scalar`]; [`Rat`] gives exact results
//! and `f64` gives fast approximate ones.

pub mod distributional;
pub mod graph;
pub mod interval;
pub mod map_model;
pub mod periodic;
pub mod scalar;
pub mod symbolic;

pub use distributional::{DfPair, StepFunction};
pub use graph::{CoveringGraph, IrreducibleComponent};
pub use interval::{Interval, IntervalUnion};
pub use map_model::{Affine, Branch, CriticalSet, EventualPeriod, MapError, PmMap};
pub use scalar::Scalar;
pub use symbolic::Itinerary;

/// Exact rational scalar.
pub type Rat = num_rational::BigRational;

/// Map with exact rational arithmetic.
pub type RatMap = PmMap<Rat>;

/// Map evaluated in double precision.
pub type FloatMap = PmMap<f64>;

/// Step function with exact rational breakpoints and levels.
pub type RatStep = StepFunction<Rat>;
