//! Exact regular conditional distributions on finite measurable spaces.
//!
//! * [`measurable`]: finite spaces, partitions standing in for sub-σ-algebras,
//!   events and rational probability measures.
//! * [`rcd`]: construction and verification of rcds, triviality and
//!   conditional triviality, the universal conditioner.
//! * [`iterated`]: iterated rcds, the diagonal integral identity and the
//!   conditional-triviality equivalence checker.
//! * [`continuum`]: the `[0,1] × {0,1}` counterexample evaluated with exact
//!   interval arithmetic.
//! * [`campaign`]: seeded random instances, property suites and shrinking.
//! * [`space_file`]: the JSON space-description format.

pub mod campaign;
pub mod continuum;
pub mod iterated;
pub mod measurable;
pub mod rational;
pub mod rcd;
pub mod space_file;

pub use iterated::{
    agreement_set_for_point, build_iterated, check_iterated, diagonal_agreement_set, in_product_sigma, lemma3_lhs,
    lemma3_rhs, theorem7_check, InconsistentVerdict, IteratedKernel, ProductEvent, Theorem7Report,
};
pub use measurable::{Event, FinitePartition, FiniteSpace, MeasurableError, RationalMeasure};
pub use rational::{format_rational, parse_rational, Rational};
pub use rcd::{
    check_rcd, compute_rcd, conditional_triviality, essentially_equal, is_g_measurable, remark2_equivalence,
    universal_conditioner, Kernel, RcdReport, Remark2Verdict, UniversalConditioner,
};
