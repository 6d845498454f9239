//! Iterated rcds, the diagonal integral identity, and the two-directional
//! check relating conditional triviality to product-measurable iterated rcds.

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::measurable::{FinitePartition, RationalMeasure};
use crate::rational::{serde_opt_str, Rational};
use crate::rcd::{check_rcd, compute_rcd, conditional_triviality, Kernel};

/// `entry(x, y)` is the measure attached to the pair `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IteratedKernel {
    n: usize,
    grid: Vec<RationalMeasure>,
}

impl IteratedKernel {
    /// `entries` in row-major order: `entries[x * n + y]`.
    pub fn new(n: usize, entries: Vec<RationalMeasure>) -> Self {
        assert!(n > 0);
        assert_eq!(entries.len(), n * n, "grid must have n*n entries");
        assert!(entries.iter().all(|m| m.space_size() == n), "grid entry over a different space");
        Self { n, grid: entries }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> RationalMeasure) -> Self {
        let grid = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self::new(n, grid)
    }

    pub fn space_size(&self) -> usize {
        self.n
    }

    pub fn entry(&self, x: usize, y: usize) -> &RationalMeasure {
        &self.grid[x * self.n + y]
    }

    /// The section `y ↦ entry(x, y)` as a kernel.
    pub fn section(&self, x: usize) -> Kernel {
        Kernel::new(self.grid[x * self.n..(x + 1) * self.n].to_vec()).expect("grid entries share a space")
    }

    pub fn with_section(&self, x: usize, section: &Kernel) -> Self {
        assert_eq!(section.space_size(), self.n);
        let mut grid = self.grid.clone();
        for y in 0..self.n {
            grid[x * self.n + y] = section.row(y).clone();
        }
        Self { n: self.n, grid }
    }

    /// Entries identical on every rectangle `(block of left) × (block of right)`.
    pub fn is_product_measurable(&self, left: &FinitePartition, right: &FinitePartition) -> bool {
        assert_eq!(left.space_size(), self.n);
        assert_eq!(right.space_size(), self.n);
        left.blocks().iter().all(|bl| {
            right.blocks().iter().all(|br| {
                let reference = self.entry(bl[0], br[0]);
                bl.iter().all(|&x| br.iter().all(|&y| self.entry(x, y) == reference))
            })
        })
    }
}

/// A subset of `X × X`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductEvent {
    n: usize,
    cells: Vec<bool>,
}

impl ProductEvent {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let cells = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { n, cells }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut cells = vec![false; n * n];
        for (x, y) in pairs {
            assert!(x < n && y < n, "pair ({x},{y}) out of range");
            cells[x * n + y] = true;
        }
        Self { n, cells }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_fn(n, |_, _| false)
    }

    pub fn full(n: usize) -> Self {
        Self::from_fn(n, |_, _| true)
    }

    pub fn diagonal(n: usize) -> Self {
        Self::from_fn(n, |x, y| x == y)
    }

    pub fn off_diagonal(n: usize) -> Self {
        Self::from_fn(n, |x, y| x != y)
    }

    /// `left × right`.
    pub fn rectangle(n: usize, left: &crate::measurable::Event, right: &crate::measurable::Event) -> Self {
        Self::from_fn(n, |x, y| left.contains(x) && right.contains(y))
    }

    pub fn space_size(&self) -> usize {
        self.n
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.cells[x * self.n + y]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        self.cells.iter().enumerate().filter(|(_, &c)| c).map(move |(i, _)| (i / n, i % n))
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a && *b).collect() }
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect() }
    }

    pub fn is_superset(&self, other: &Self) -> bool {
        assert_eq!(self.n, other.n);
        self.cells.iter().zip(&other.cells).all(|(a, b)| *a || !*b)
    }
}

/// Indicator of `e` constant on every rectangle `(block of left) × (block of
/// right)`. With `right` the singleton partition this is membership in `G ⊗ Σ`.
pub fn in_product_sigma(e: &ProductEvent, left: &FinitePartition, right: &FinitePartition) -> bool {
    assert_eq!(left.space_size(), e.n);
    assert_eq!(right.space_size(), e.n);
    left.blocks().iter().all(|bl| {
        right.blocks().iter().all(|br| {
            let first = e.contains(bl[0], br[0]);
            bl.iter().all(|&x| br.iter().all(|&y| e.contains(x, y) == first))
        })
    })
}

/// `ρ({x : (x, x) ∈ e})`.
pub fn lemma3_lhs(e: &ProductEvent, rho: &RationalMeasure) -> Rational {
    assert_eq!(e.n, rho.space_size());
    (0..e.n).filter(|&x| e.contains(x, x)).map(|x| rho.weight(x)).sum()
}

/// `Σ_x ρ({x}) Σ_y 1_e(x, y) k(x)({y})`.
pub fn lemma3_rhs(e: &ProductEvent, k: &Kernel, rho: &RationalMeasure) -> Rational {
    assert_eq!(e.n, rho.space_size());
    assert_eq!(k.space_size(), rho.space_size());
    let mut total = Rational::zero();
    for x in rho.support() {
        let inner: Rational = (0..e.n).filter(|&y| e.contains(x, y)).map(|y| k.row(x).weight(y)).sum();
        total += rho.weight(x) * inner;
    }
    total
}

/// Conditions each row of the canonical rcd again on `g`.
pub fn build_iterated(rho: &RationalMeasure, g: &FinitePartition) -> IteratedKernel {
    let first = compute_rcd(rho, g);
    let n = rho.space_size();
    let mut grid = Vec::with_capacity(n * n);
    for x in 0..n {
        grid.extend(compute_rcd(first.row(x), g).rows().iter().cloned());
    }
    IteratedKernel::new(n, grid)
}

/// For every `x` of positive `rho`-mass, `y ↦ k2(x, y)` is an rcd of
/// `ρ^G(x)` given `g`.
pub fn check_iterated(k2: &IteratedKernel, rho: &RationalMeasure, g: &FinitePartition) -> bool {
    let first = compute_rcd(rho, g);
    rho.support().all(|x| check_rcd(&k2.section(x), first.row(x), g).passed())
}

/// `{(x, y) : k2(x, y) = k2(x, x)}`.
pub fn diagonal_agreement_set(k2: &IteratedKernel) -> ProductEvent {
    ProductEvent::from_fn(k2.n, |x, y| k2.entry(x, y) == k2.entry(x, x))
}

/// `{(x, y) : k2(x, y)({a}) = k2(x, x)({a})}` for a single point `a`.
pub fn agreement_set_for_point(k2: &IteratedKernel, a: usize) -> ProductEvent {
    ProductEvent::from_fn(k2.n, |x, y| k2.entry(x, y).weight(a) == k2.entry(x, x).weight(a))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("inconsistent verdict: {0}")]
pub struct InconsistentVerdict(pub String);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ForwardVerdict {
    /// The constant-in-`y` grid `(x, y) ↦ ρ^G(x)` is an iterated rcd and
    /// `G ⊗ G`-measurable.
    Passed {
        witness_is_iterated_rcd: bool,
        witness_product_measurable: bool,
    },
    NotApplicable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BackwardVerdict {
    Passed {
        candidate_is_iterated_rcd: bool,
        candidate_product_measurable: bool,
        agreement_set_contains_diagonal: bool,
        agreement_set_product_measurable: bool,
        conditionally_trivial: bool,
    },
    NotApplicable {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem7Report {
    pub conditionally_trivial: bool,
    pub forward: ForwardVerdict,
    pub backward: BackwardVerdict,
    /// Mass of the agreement set under the iterated integral; present only
    /// when the backward direction ran.
    #[serde(with = "serde_opt_str")]
    pub diagonal_mass: Option<Rational>,
}

/// Runs both directions of the equivalence on a finite instance.
///
/// Forward: when `g` is conditionally trivial, `(x, y) ↦ ρ^G(x)` must be a
/// product-measurable iterated rcd. Backward: when `candidate` is an iterated
/// rcd and product-measurable, its agreement set must carry iterated mass 1
/// and `g` must be conditionally trivial. Any broken implication is returned
/// as [`InconsistentVerdict`].
pub fn theorem7_check(
    rho: &RationalMeasure,
    g: &FinitePartition,
    candidate: Option<&IteratedKernel>,
) -> Result<Theorem7Report, InconsistentVerdict> {
    let n = rho.space_size();
    let first = compute_rcd(rho, g);
    let conditionally_trivial = conditional_triviality(rho, g);

    let forward = if conditionally_trivial {
        let witness = IteratedKernel::from_fn(n, |x, _| first.row(x).clone());
        let witness_is_iterated_rcd = check_iterated(&witness, rho, g);
        let witness_product_measurable = witness.is_product_measurable(g, g);
        if !(witness_is_iterated_rcd && witness_product_measurable) {
            return Err(InconsistentVerdict(format!(
                "conditionally trivial but constant-in-y witness fails (iterated rcd: {witness_is_iterated_rcd}, \
                 product measurable: {witness_product_measurable})"
            )));
        }
        ForwardVerdict::Passed { witness_is_iterated_rcd, witness_product_measurable }
    } else {
        ForwardVerdict::NotApplicable { reason: "not conditionally trivial".into() }
    };

    let (backward, diagonal_mass) = match candidate {
        None => (BackwardVerdict::NotApplicable { reason: "no candidate supplied".into() }, None),
        Some(k2) => {
            assert_eq!(k2.space_size(), n, "candidate over a different space");
            let candidate_is_iterated_rcd = check_iterated(k2, rho, g);
            let candidate_product_measurable = k2.is_product_measurable(g, g);
            if !candidate_is_iterated_rcd {
                (BackwardVerdict::NotApplicable { reason: "candidate is not an iterated rcd".into() }, None)
            } else if !candidate_product_measurable {
                (BackwardVerdict::NotApplicable { reason: "candidate is not G⊗G-measurable".into() }, None)
            } else {
                let agreement = diagonal_agreement_set(k2);
                let agreement_set_contains_diagonal = agreement.is_superset(&ProductEvent::diagonal(n));
                let agreement_set_product_measurable = in_product_sigma(&agreement, g, g);
                let mass = lemma3_rhs(&agreement, &first, rho);
                if !agreement_set_contains_diagonal || !agreement_set_product_measurable {
                    return Err(InconsistentVerdict("agreement set of a measurable candidate is malformed".into()));
                }
                if !mass.is_one() {
                    return Err(InconsistentVerdict(format!("agreement set has iterated mass {mass}, expected 1")));
                }
                if !conditionally_trivial {
                    return Err(InconsistentVerdict(
                        "measurable iterated rcd exists but g is not conditionally trivial".into(),
                    ));
                }
                (
                    BackwardVerdict::Passed {
                        candidate_is_iterated_rcd,
                        candidate_product_measurable,
                        agreement_set_contains_diagonal,
                        agreement_set_product_measurable,
                        conditionally_trivial,
                    },
                    Some(mass),
                )
            }
        }
    };

    Ok(Theorem7Report { conditionally_trivial, forward, backward, diagonal_mass })
}
