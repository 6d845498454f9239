//! Measures on `[0, 1] × {0, 1}` made of a piecewise-constant density per
//! fiber plus finitely many atoms, and the events they are evaluated on.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use super::interval::{Interval, IntervalSet};
use super::ContinuumError;
use crate::rational::Rational;

/// A point `(x, fiber)` of `[0, 1] × {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Rational,
    pub fiber: usize,
}

impl Point {
    pub fn new(x: Rational, fiber: usize) -> Result<Self, ContinuumError> {
        if fiber > 1 {
            return Err(ContinuumError::BadFiber(fiber));
        }
        if x.is_negative() || x > Rational::one() {
            return Err(ContinuumError::EndpointOutOfRange(x));
        }
        Ok(Self { x, fiber })
    }
}

/// Subset of the fibers `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FiberSet {
    pub zero: bool,
    pub one: bool,
}

impl FiberSet {
    pub const NONE: Self = Self { zero: false, one: false };
    pub const ZERO: Self = Self { zero: true, one: false };
    pub const ONE: Self = Self { zero: false, one: true };
    pub const BOTH: Self = Self { zero: true, one: true };

    pub fn contains(&self, fiber: usize) -> bool {
        match fiber {
            0 => self.zero,
            1 => self.one,
            _ => false,
        }
    }
}

/// Piecewise-constant density on `[0, 1]`: `values[k]` on
/// `(breakpoints[k], breakpoints[k+1])`. Breakpoints start at 0, end at 1 and
/// strictly increase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDensity {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl StepDensity {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self, ContinuumError> {
        let ok = breakpoints.len() >= 2
            && values.len() + 1 == breakpoints.len()
            && breakpoints[0].is_zero()
            && breakpoints.last().is_some_and(|b| b.is_one())
            && breakpoints.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(ContinuumError::BadBreakpoints);
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(ContinuumError::NegativeDensity);
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(value: Rational) -> Self {
        Self { breakpoints: vec![Rational::zero(), Rational::one()], values: vec![value] }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Density value on the open cell containing `x`; at a breakpoint the
    /// cell to the right is used (the left one for `x = 1`).
    pub fn value_at(&self, x: &Rational) -> &Rational {
        let k = self.breakpoints[1..].partition_point(|b| b <= x);
        &self.values[k.min(self.values.len() - 1)]
    }

    pub fn total(&self) -> Rational {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, v)| (&w[1] - &w[0]) * v).sum()
    }

    /// `∫_set density dx`, exactly.
    pub fn integral_over(&self, set: &IntervalSet) -> Rational {
        let mut total = Rational::zero();
        for (w, v) in self.breakpoints.windows(2).zip(&self.values) {
            if v.is_zero() {
                continue;
            }
            let cell = Interval::closed(w[0].clone(), w[1].clone()).expect("breakpoints increase");
            for piece in set.pieces() {
                if let Some(overlap) = piece.intersect(&cell) {
                    total += overlap.length() * v;
                }
            }
        }
        total
    }
}

/// A finite measure on `[0, 1] × {0, 1}` with total mass 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridMeasure {
    densities: [StepDensity; 2],
    atoms: Vec<(Point, Rational)>,
}

impl HybridMeasure {
    pub fn new(densities: [StepDensity; 2], atoms: Vec<(Point, Rational)>) -> Result<Self, ContinuumError> {
        if atoms.iter().any(|(_, w)| !w.is_positive()) {
            return Err(ContinuumError::NonPositiveAtom);
        }
        let locations: BTreeSet<&Point> = atoms.iter().map(|(p, _)| p).collect();
        if locations.len() != atoms.len() {
            return Err(ContinuumError::DuplicateAtom);
        }
        let total = densities[0].total() + densities[1].total() + atoms.iter().map(|(_, w)| w).sum::<Rational>();
        if !total.is_one() {
            return Err(ContinuumError::NotNormalized(total));
        }
        Ok(Self { densities, atoms })
    }

    /// Lebesgue measure on `[0, 1]` times the two-point law `(m0, 1 - m0)`.
    pub fn lebesgue_product(m0: &Rational) -> Result<Self, ContinuumError> {
        if m0.is_negative() || *m0 > Rational::one() {
            return Err(ContinuumError::NotAProbability(m0.clone()));
        }
        Self::new([StepDensity::constant(m0.clone()), StepDensity::constant(Rational::one() - m0)], vec![])
    }

    /// `δ_x ⊗ (m0, 1 - m0)`. Zero-weight atoms are dropped.
    pub fn dirac_product(x: &Rational, m0: &Rational) -> Result<Self, ContinuumError> {
        if m0.is_negative() || *m0 > Rational::one() {
            return Err(ContinuumError::NotAProbability(m0.clone()));
        }
        let atoms = [(0, m0.clone()), (1, Rational::one() - m0)]
            .into_iter()
            .filter(|(_, w)| w.is_positive())
            .map(|(i, w)| Point::new(x.clone(), i).map(|p| (p, w)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new([StepDensity::zero(), StepDensity::zero()], atoms)
    }

    pub fn density(&self, fiber: usize) -> &StepDensity {
        &self.densities[fiber]
    }

    pub fn atoms(&self) -> &[(Point, Rational)] {
        &self.atoms
    }

    pub fn is_atomless(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// General measurable set used internally: an interval set per fiber,
/// modified by finitely many added and removed points.
///
/// `added` points lie outside the interval part, `removed` points inside it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Region {
    fibers: [IntervalSet; 2],
    added: BTreeSet<Point>,
    removed: BTreeSet<Point>,
}

impl Region {
    pub fn from_fibers(fibers: [IntervalSet; 2]) -> Self {
        Self { fibers, added: BTreeSet::new(), removed: BTreeSet::new() }
    }

    /// Interval part of fiber `i`: the region up to finitely many points.
    pub fn fiber(&self, i: usize) -> &IntervalSet {
        &self.fibers[i]
    }

    pub fn added(&self) -> &BTreeSet<Point> {
        &self.added
    }

    pub fn removed(&self) -> &BTreeSet<Point> {
        &self.removed
    }

    pub fn contains(&self, p: &Point) -> bool {
        if self.added.contains(p) {
            return true;
        }
        self.fibers[p.fiber].contains(&p.x) && !self.removed.contains(p)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let fibers = [self.fibers[0].intersection(&other.fibers[0]), self.fibers[1].intersection(&other.fibers[1])];
        let mut out = Self::from_fibers(fibers);
        let candidates = self.added.iter().chain(&self.removed).chain(&other.added).chain(&other.removed);
        for p in candidates {
            let inside = self.contains(p) && other.contains(p);
            let in_intervals = out.fibers[p.fiber].contains(&p.x);
            if inside && !in_intervals {
                out.added.insert(p.clone());
            } else if !inside && in_intervals {
                out.removed.insert(p.clone());
            }
        }
        out
    }
}

/// Anything that can be evaluated by [`hybrid_mass`].
pub trait HybridEvent {
    fn region(&self) -> Region;
}

impl HybridEvent for Region {
    fn region(&self) -> Region {
        self.clone()
    }
}

/// A finite union of `interval × fibers` pieces. Stored canonically as one
/// disjoint interval set per fiber.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RectEvent {
    fibers: [IntervalSet; 2],
}

impl RectEvent {
    pub fn new(pieces: impl IntoIterator<Item = (Interval, FiberSet)>) -> Self {
        let mut per_fiber: [Vec<Interval>; 2] = [vec![], vec![]];
        for (interval, fibers) in pieces {
            for (i, bucket) in per_fiber.iter_mut().enumerate() {
                if fibers.contains(i) {
                    bucket.push(interval.clone());
                }
            }
        }
        let [f0, f1] = per_fiber;
        Self { fibers: [IntervalSet::from_intervals(f0), IntervalSet::from_intervals(f1)] }
    }

    pub fn rect(interval: Interval, fibers: FiberSet) -> Self {
        Self::new([(interval, fibers)])
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        Self::rect(Interval::unit(), FiberSet::BOTH)
    }

    pub fn fiber(&self, i: usize) -> &IntervalSet {
        &self.fibers[i]
    }

    /// Canonical disjoint pieces, fiber 0 first.
    pub fn pieces(&self) -> Vec<(Interval, FiberSet)> {
        let f0 = self.fibers[0].pieces().iter().map(|p| (p.clone(), FiberSet::ZERO));
        let f1 = self.fibers[1].pieces().iter().map(|p| (p.clone(), FiberSet::ONE));
        f0.chain(f1).collect()
    }
}

impl HybridEvent for RectEvent {
    fn region(&self) -> Region {
        Region::from_fibers(self.fibers.clone())
    }
}

/// A member of the conditioning σ-algebra: `base × {0, 1}` with finitely many
/// points added outside it and removed inside it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GEvent {
    base: IntervalSet,
    added_null: BTreeSet<Point>,
    removed_null: BTreeSet<Point>,
}

impl GEvent {
    pub fn new(
        base: IntervalSet,
        added_null: BTreeSet<Point>,
        removed_null: BTreeSet<Point>,
    ) -> Result<Self, ContinuumError> {
        if added_null.iter().any(|p| base.contains(&p.x)) {
            return Err(ContinuumError::InvalidGEvent("added point lies inside the base"));
        }
        if removed_null.iter().any(|p| !base.contains(&p.x)) {
            return Err(ContinuumError::InvalidGEvent("removed point lies outside the base"));
        }
        Ok(Self { base, added_null, removed_null })
    }

    pub fn from_base(base: IntervalSet) -> Self {
        Self { base, ..Default::default() }
    }

    /// The single point `p`, as a null modification of the empty base.
    pub fn singleton(p: Point) -> Self {
        Self { base: IntervalSet::empty(), added_null: [p].into(), removed_null: BTreeSet::new() }
    }

    pub fn full() -> Self {
        Self::from_base(IntervalSet::unit())
    }

    pub fn base(&self) -> &IntervalSet {
        &self.base
    }

    pub fn added_null(&self) -> &BTreeSet<Point> {
        &self.added_null
    }

    pub fn removed_null(&self) -> &BTreeSet<Point> {
        &self.removed_null
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.region().contains(p)
    }
}

impl HybridEvent for GEvent {
    fn region(&self) -> Region {
        Region {
            fibers: [self.base.clone(), self.base.clone()],
            added: self.added_null.clone(),
            removed: self.removed_null.clone(),
        }
    }
}

/// Exact mass: density integrals over the interval part plus the atoms that
/// fall inside the event.
pub fn hybrid_mass(mu: &HybridMeasure, e: &impl HybridEvent) -> Rational {
    let region = e.region();
    let ac: Rational = (0..2).map(|i| mu.densities[i].integral_over(region.fiber(i))).sum();
    let atomic: Rational = mu.atoms.iter().filter(|(p, _)| region.contains(p)).map(|(_, w)| w).sum();
    ac + atomic
}
