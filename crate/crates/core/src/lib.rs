pub mod ell2;
pub mod error;
pub mod experiments;
pub mod iteration;
pub mod linalg;
pub mod operators;
pub mod rates;
pub mod subspace;
pub mod two_lines;

pub use ell2::{
    build_truncated, canonical_start, shadow_sublinearity, sublinearity_certificate, BlockModel,
    GrowthRow, GrowthTable,
};
pub use error::{Error, Result};
pub use experiments::{
    aggregate_median, emit_csv, random_start, random_subspace_pair, run_benchmark, BenchRecord,
    Criterion, ExperimentConfig, MedianRow,
};
pub use iteration::{
    evaluate_rule, run_dr, run_dr_affine, run_map, IterationTrace, Method, RunOptions, StepRecord,
    StoppingRule, SubspacePair, Termination, TraceDetail,
};
pub use operators::{
    dr_adjoint, dr_operator, fix_projector, map_operator, operator_norm, verify_identities,
    IdentityReport, LinearMap, PairOperators,
};
pub use rates::{pointwise_bound_check, rate_report, Quantity, RateReport, RateRow};
pub use subspace::{
    orthonormalize, AffineSubspace, AngleSpectrum, OrthonormalBasis, Projector, Subspace, Vector,
};
pub use two_lines::{
    closed_form_dr_power, closed_form_norms, figure_surface, LineNorms, PlaneConfig,
};
