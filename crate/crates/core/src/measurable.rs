//! Finite measurable spaces.
//!
//! The σ-algebra on the ground set is always the full power set. A
//! sub-σ-algebra is stored as the partition of its atoms: on a finite set the
//! measurable sets of the sub-σ-algebra are exactly the unions of blocks.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasurableError {
    #[error("a finite space needs at least one point")]
    EmptySpace,
    #[error("point {point} is outside the space of {n} points")]
    OutOfRange { point: usize, n: usize },
    #[error("blocks overlap at point {point}")]
    Overlap { point: usize },
    #[error("blocks do not cover the space: point {missing} is missing")]
    Cover { missing: usize },
    #[error("block {index} is empty")]
    EmptyBlock { index: usize },
    #[error("expected {expected} weights, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("weight {index} is negative")]
    NegativeWeight { index: usize },
    #[error("weights sum to {} instead of 1", format_rational(.sum))]
    NotNormalized { sum: Rational },
    #[error("cannot condition on an event of mass zero")]
    NullConditioning,
}

/// The ground set `{0, …, n-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiniteSpace {
    n: usize,
}

impl FiniteSpace {
    pub fn new(n: usize) -> Result<Self, MeasurableError> {
        if n == 0 {
            return Err(MeasurableError::EmptySpace);
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn full(&self) -> Event {
        Event::full(self.n)
    }
}

/// A subset of a finite space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    n: usize,
    members: BTreeSet<usize>,
}

impl Event {
    pub fn new(space: FiniteSpace, members: impl IntoIterator<Item = usize>) -> Result<Self, MeasurableError> {
        let n = space.size();
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&point) = members.iter().find(|&&p| p >= n) {
            return Err(MeasurableError::OutOfRange { point, n });
        }
        Ok(Self { n, members })
    }

    /// Panicking constructor for indices already known to be in range.
    pub fn from_points(n: usize, members: impl IntoIterator<Item = usize>) -> Self {
        let members: BTreeSet<usize> = members.into_iter().collect();
        assert!(members.iter().all(|&p| p < n), "event point out of range");
        Self { n, members }
    }

    pub fn empty(n: usize) -> Self {
        Self { n, members: BTreeSet::new() }
    }

    pub fn full(n: usize) -> Self {
        Self { n, members: (0..n).collect() }
    }

    pub fn singleton(n: usize, x: usize) -> Self {
        Self::from_points(n, [x])
    }

    /// Bit `i` of `mask` selects point `i`. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self::from_points(n, (0..n).filter(|&i| mask >> i & 1 == 1))
    }

    pub fn space_size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn complement(&self) -> Self {
        Self { n: self.n, members: (0..self.n).filter(|p| !self.members.contains(p)).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "events over different spaces");
        Self { n: self.n, members: self.members.union(&other.members).copied().collect() }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "events over different spaces");
        Self { n: self.n, members: self.members.intersection(&other.members).copied().collect() }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.members.iter().copied().collect()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Atoms of a sub-σ-algebra. Blocks are sorted internally and ordered by
/// their least element, so two partitions are equal iff they describe the
/// same sub-σ-algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinitePartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl FinitePartition {
    /// Validates and canonicalizes a block family.
    pub fn new(space: FiniteSpace, blocks: Vec<Vec<usize>>) -> Result<Self, MeasurableError> {
        let n = space.size();
        let mut seen = vec![false; n];
        let mut canonical = Vec::with_capacity(blocks.len());
        for (index, mut block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(MeasurableError::EmptyBlock { index });
            }
            block.sort_unstable();
            for (j, &p) in block.iter().enumerate() {
                if p >= n {
                    return Err(MeasurableError::OutOfRange { point: p, n });
                }
                if seen[p] || (j > 0 && block[j - 1] == p) {
                    return Err(MeasurableError::Overlap { point: p });
                }
                seen[p] = true;
            }
            canonical.push(block);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(MeasurableError::Cover { missing });
        }
        Ok(Self::from_canonical_blocks(n, canonical))
    }

    fn from_canonical_blocks(n: usize, mut blocks: Vec<Vec<usize>>) -> Self {
        blocks.sort_unstable_by_key(|b| b[0]);
        let mut block_of = vec![0; n];
        for (i, b) in blocks.iter().enumerate() {
            for &p in b {
                block_of[p] = i;
            }
        }
        Self { n, blocks, block_of }
    }

    /// Builds the partition from a per-point label; equal labels share a block.
    pub fn from_labels<L: Ord + Clone>(labels: &[L]) -> Self {
        assert!(!labels.is_empty(), "labels for an empty space");
        let mut groups: std::collections::BTreeMap<L, Vec<usize>> = Default::default();
        for (p, l) in labels.iter().enumerate() {
            groups.entry(l.clone()).or_default().push(p);
        }
        Self::from_canonical_blocks(labels.len(), groups.into_values().collect())
    }

    /// Atoms of the σ-algebra generated by `events`: points are grouped by
    /// their membership pattern across the events.
    pub fn generated_by(space: FiniteSpace, events: &[Event]) -> Self {
        let labels: Vec<Vec<bool>> = space
            .points()
            .map(|p| {
                events
                    .iter()
                    .map(|e| {
                        assert_eq!(e.space_size(), space.size(), "event over a different space");
                        e.contains(p)
                    })
                    .collect()
            })
            .collect();
        Self::from_labels(&labels)
    }

    /// `{{0}, {1}, …}`: the full power set.
    pub fn singletons(n: usize) -> Self {
        assert!(n > 0);
        Self::from_canonical_blocks(n, (0..n).map(|p| vec![p]).collect())
    }

    /// `{{0, …, n-1}}`: the trivial σ-algebra.
    pub fn one_block(n: usize) -> Self {
        assert!(n > 0);
        Self::from_canonical_blocks(n, vec![(0..n).collect()])
    }

    pub fn space_size(&self) -> usize {
        self.n
    }

    pub fn space(&self) -> FiniteSpace {
        FiniteSpace { n: self.n }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_index(&self, x: usize) -> usize {
        self.block_of[x]
    }

    pub fn block_event(&self, index: usize) -> Event {
        Event::from_points(self.n, self.blocks[index].iter().copied())
    }

    /// The block containing `x`.
    pub fn atom_of(&self, x: usize) -> Event {
        assert!(x < self.n, "point {x} out of range");
        self.block_event(self.block_of[x])
    }

    /// Whether `e` is a union of blocks, i.e. a member of the sub-σ-algebra.
    pub fn sigma_contains(&self, e: &Event) -> bool {
        assert_eq!(e.space_size(), self.n, "event over a different space");
        self.blocks.iter().all(|b| {
            let first = e.contains(b[0]);
            b.iter().all(|&p| e.contains(p) == first)
        })
    }

    /// Union of the blocks selected by the bits of `mask`.
    pub fn union_of_blocks(&self, mask: u64) -> Event {
        Event::from_points(
            self.n,
            self.blocks.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).flat_map(|(_, b)| b.iter().copied()),
        )
    }

    /// Whether every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Self) -> bool {
        self.n == coarser.n
            && self.blocks.iter().all(|b| b.iter().all(|&p| coarser.block_of[p] == coarser.block_of[b[0]]))
    }
}

/// A probability measure on `{0, …, n-1}` with exact rational weights.
///
/// Weights live behind an `Arc`, so clones share storage.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMeasure {
    weights: Arc<[Rational]>,
}

impl RationalMeasure {
    pub fn new(weights: Vec<Rational>) -> Result<Self, MeasurableError> {
        if weights.is_empty() {
            return Err(MeasurableError::EmptySpace);
        }
        if let Some(index) = weights.iter().position(|w| w.is_negative()) {
            return Err(MeasurableError::NegativeWeight { index });
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(MeasurableError::NotNormalized { sum });
        }
        Ok(Self { weights: weights.into() })
    }

    /// Like [`RationalMeasure::new`] but also checks the length against `space`.
    pub fn on(space: FiniteSpace, weights: Vec<Rational>) -> Result<Self, MeasurableError> {
        if weights.len() != space.size() {
            return Err(MeasurableError::WrongLength { expected: space.size(), got: weights.len() });
        }
        Self::new(weights)
    }

    pub fn dirac(n: usize, x: usize) -> Self {
        assert!(x < n);
        let weights = (0..n).map(|i| if i == x { Rational::one() } else { Rational::zero() }).collect::<Vec<_>>();
        Self { weights: weights.into() }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        let w = Rational::new(1.into(), (n as i64).into());
        Self { weights: vec![w; n].into() }
    }

    pub fn space_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, x: usize) -> &Rational {
        &self.weights[x]
    }

    /// Points of positive mass.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| w.is_positive()).map(|(i, _)| i)
    }

    pub fn is_null_point(&self, x: usize) -> bool {
        self.weights[x].is_zero()
    }

    pub fn mass(&self, e: &Event) -> Rational {
        assert_eq!(e.space_size(), self.space_size(), "event over a different space");
        e.iter().map(|p| &self.weights[p]).sum()
    }

    /// Mass of a point set given by index, no `Event` allocation.
    pub fn mass_of(&self, points: &[usize]) -> Rational {
        points.iter().map(|&p| &self.weights[p]).sum()
    }

    /// The elementary conditional measure `μ(· ∩ e) / μ(e)`.
    pub fn condition(&self, e: &Event) -> Result<Self, MeasurableError> {
        assert_eq!(e.space_size(), self.space_size(), "event over a different space");
        self.condition_on_points(&e.to_vec())
    }

    pub(crate) fn condition_on_points(&self, points: &[usize]) -> Result<Self, MeasurableError> {
        let total = self.mass_of(points);
        if total.is_zero() {
            return Err(MeasurableError::NullConditioning);
        }
        let mut weights = vec![Rational::zero(); self.space_size()];
        for &p in points {
            weights[p] = &self.weights[p] / &total;
        }
        Ok(Self { weights: weights.into() })
    }

    /// Whether every member of the sub-σ-algebra has mass 0 or 1.
    ///
    /// Computed as "exactly one block carries all the mass": block masses are
    /// nonnegative and sum to 1, and a union of blocks has mass in `{0, 1}`
    /// for every choice of blocks iff one block holds everything.
    pub fn is_trivial_on(&self, part: &FinitePartition) -> bool {
        assert_eq!(part.space_size(), self.space_size(), "partition over a different space");
        part.blocks().iter().filter(|b| self.mass_of(b).is_one()).count() == 1
    }
}

impl fmt::Display for RationalMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}
