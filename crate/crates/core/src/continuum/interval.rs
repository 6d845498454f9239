//! Intervals of `[0, 1]` with rational endpoints, and finite disjoint unions
//! of them.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};

use super::ContinuumError;
use crate::rational::Rational;

/// An interval `⊆ [0, 1]`. Each endpoint is open or closed; a degenerate
/// closed interval `[x, x]` is a single point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
    lo_closed: bool,
    hi_closed: bool,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Result<Self, ContinuumError> {
        for e in [&lo, &hi] {
            if *e < Rational::zero() || *e > Rational::one() {
                return Err(ContinuumError::EndpointOutOfRange(e.clone()));
            }
        }
        let nonempty = lo < hi || (lo == hi && lo_closed && hi_closed);
        if !nonempty {
            return Err(ContinuumError::EmptyInterval);
        }
        Ok(Self { lo, hi, lo_closed, hi_closed })
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self, ContinuumError> {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self, ContinuumError> {
        Self::new(lo, hi, false, false)
    }

    pub fn point(x: Rational) -> Result<Self, ContinuumError> {
        Self::new(x.clone(), x, true, true)
    }

    pub fn unit() -> Self {
        Self { lo: Rational::zero(), hi: Rational::one(), lo_closed: true, hi_closed: true }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = match x.cmp(&self.lo) {
            Ordering::Greater => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Less => false,
        };
        let below = match x.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Greater => false,
        };
        above && below
    }

    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (self.lo.clone(), self.lo_closed),
            Ordering::Less => (other.lo.clone(), other.lo_closed),
            Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (self.hi.clone(), self.hi_closed),
            Ordering::Greater => (other.hi.clone(), other.hi_closed),
            Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Self::new(lo, hi, lo_closed, hi_closed).ok()
    }

    /// Whether `next` (starting no earlier than `self`) overlaps or touches
    /// `self` so that their union is a single interval.
    fn joins(&self, next: &Self) -> bool {
        match next.lo.cmp(&self.hi) {
            Ordering::Less => true,
            Ordering::Equal => self.hi_closed || next.lo_closed,
            Ordering::Greater => false,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// A finite union of intervals, kept sorted, pairwise disjoint and with
/// touching pieces merged.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalSet {
    pieces: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self { pieces: vec![Interval::unit()] }
    }

    pub fn from_intervals(intervals: impl IntoIterator<Item = Interval>) -> Self {
        let mut all: Vec<Interval> = intervals.into_iter().collect();
        all.sort_by(|a, b| a.lo.cmp(&b.lo).then(b.lo_closed.cmp(&a.lo_closed)));
        let mut pieces: Vec<Interval> = Vec::with_capacity(all.len());
        for next in all {
            match pieces.last_mut() {
                Some(cur) if cur.joins(&next) => match next.hi.cmp(&cur.hi) {
                    Ordering::Greater => {
                        cur.hi = next.hi;
                        cur.hi_closed = next.hi_closed;
                    }
                    Ordering::Equal => cur.hi_closed |= next.hi_closed,
                    Ordering::Less => {}
                },
                _ => pieces.push(next),
            }
        }
        Self { pieces }
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }

    /// Lebesgue measure.
    pub fn length(&self) -> Rational {
        self.pieces.iter().map(Interval::length).sum()
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::from_intervals(self.pieces.iter().chain(&other.pieces).cloned())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self::from_intervals(self.pieces.iter().flat_map(|a| other.pieces.iter().filter_map(move |b| a.intersect(b))))
    }

    /// `[0, 1]` minus `self`.
    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = Rational::zero();
        let mut cursor_closed = true;
        for p in &self.pieces {
            if let Ok(gap) = Interval::new(cursor.clone(), p.lo.clone(), cursor_closed, !p.lo_closed) {
                out.push(gap);
            }
            cursor = p.hi.clone();
            cursor_closed = !p.hi_closed;
        }
        if let Ok(gap) = Interval::new(cursor, Rational::one(), cursor_closed, true) {
            out.push(gap);
        }
        Self::from_intervals(out)
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.intersection(other) == *self
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        Self::from_intervals(iter)
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pieces.is_empty() {
            return write!(f, "∅");
        }
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}
