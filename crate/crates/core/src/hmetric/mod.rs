//! The split metric built from `W = p0 + q0 + p(x) + q(ξ)`, its weights, and
//! sampled checks of the metric axioms and symbol classes.

mod axioms;
mod spec;
mod symclass;

pub use axioms::{
    check_slowness, check_temperateness, check_uncertainty, check_weight, compare_metrics,
    default_c_lattice, default_n_lattice, default_weight_n_lattice, verify_metric, Axiom,
    AxiomReport, MetricComparison, MetricReport, SampleConfig, Violation, WeightReport,
};
pub use spec::{
    fnv1a, DistortedMetric, MetricAt, OscillatorSpec, RhoDeltaMetric, SpecError, SpecSummary,
    SplitMetric,
};
pub use symclass::{
    estimate_order, sigma_membership, OrderEstimate, Seminorm, ShellGrid, SigmaReport,
    SymbolClassError, PLATEAU_TOLERANCE,
};
pub(crate) use symclass::least_squares;
