//! The `[0, 1] × {0, 1}` counterexample to conditional triviality.
//!
//! `ρ = λ ⊗ m` with `m = (m0, 1 - m0)` non-Dirac, `G` generated by the
//! fiber-symmetric Borel sets `B × {0, 1}` together with all `ρ`-null sets, and
//! the kernel `(x, i) ↦ δ_x ⊗ m`. The kernel satisfies the rcd identity, yet
//! assigns `m0 ∈ (0, 1)` to the `G`-event `{(x, 0)}`.
//!
//! `G` itself is not representable; [`GEvent`] covers finite unions of
//! intervals times both fibers, modified by finitely many points.

mod hybrid;
mod interval;
mod lab;

pub use hybrid::{hybrid_mass, FiberSet, GEvent, HybridEvent, HybridMeasure, Point, RectEvent, Region, StepDensity};
pub use interval::{Interval, IntervalSet};
pub use lab::{
    battery_pairs, discretization_study, discretized_instance, kernel_integral, remark5_identity_check,
    remark5_identity_check_pairs, singleton_is_null, standard_battery, theorem7_consequence_report, triviality_failure,
    DiracProductKernel, DiscretizationRow, IdentityMismatch, Remark5IdentityReport, Theorem7ConsequenceReport,
    DEFAULT_BATTERY_SIDE, NONEXISTENCE_CONCLUSION,
};

use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContinuumError {
    #[error("endpoint {} is outside [0, 1]", format_rational(.0))]
    EndpointOutOfRange(Rational),
    #[error("interval is empty")]
    EmptyInterval,
    #[error("fiber index {0} is not 0 or 1")]
    BadFiber(usize),
    #[error("density breakpoints must start at 0, end at 1 and strictly increase, with one value per cell")]
    BadBreakpoints,
    #[error("density values must be nonnegative")]
    NegativeDensity,
    #[error("atom weights must be positive")]
    NonPositiveAtom,
    #[error("two atoms share a location")]
    DuplicateAtom,
    #[error("total mass is {} instead of 1", format_rational(.0))]
    NotNormalized(Rational),
    #[error("{} is not a probability in [0, 1]", format_rational(.0))]
    NotAProbability(Rational),
    #[error("m0 = {} makes m a Dirac measure; need 0 < m0 < 1", format_rational(.0))]
    DiracM(Rational),
    #[error("measure has an atom on the vertical line x = {}", format_rational(.0))]
    AtomlessViolation(Rational),
    #[error("invalid G-event: {0}")]
    InvalidGEvent(&'static str),
}
