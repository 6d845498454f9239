//! Regular conditional distributions on finite spaces.
//!
//! A kernel is a row-indexed family of probability measures. Whether it is
//! measurable with respect to a sub-σ-algebra is not part of the type: it is
//! decided against a partition by [`is_g_measurable`]. On a finite space a map
//! into probability measures is measurable for the evaluation σ-algebra iff it
//! is constant on every atom.
//!
//! "ρ-almost every x" is read as "every x with ρ({x}) > 0" throughout.

use num_traits::Zero;
use serde::Serialize;

use crate::measurable::{Event, FinitePartition, MeasurableError, RationalMeasure};
use crate::rational::{serde_str, Rational};

/// `rows[x]` is the measure attached to point `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Kernel {
    rows: Vec<RationalMeasure>,
}

impl Kernel {
    pub fn new(rows: Vec<RationalMeasure>) -> Result<Self, MeasurableError> {
        if rows.is_empty() {
            return Err(MeasurableError::EmptySpace);
        }
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.space_size() != n) {
            return Err(MeasurableError::WrongLength { expected: n, got: bad.space_size() });
        }
        Ok(Self { rows })
    }

    /// Every row equal to `mu`.
    pub fn constant(mu: &RationalMeasure) -> Self {
        Self { rows: vec![mu.clone(); mu.space_size()] }
    }

    pub fn space_size(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, x: usize) -> &RationalMeasure {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[RationalMeasure] {
        &self.rows
    }

    /// Copy of `self` with row `x` replaced.
    pub fn with_row(&self, x: usize, row: RationalMeasure) -> Self {
        assert_eq!(row.space_size(), self.space_size());
        let mut rows = self.rows.clone();
        rows[x] = row;
        Self { rows }
    }

    /// Whether all rows at points of positive `rho`-mass coincide.
    pub fn is_almost_constant(&self, rho: &RationalMeasure) -> bool {
        let mut support = rho.support();
        match support.next() {
            None => true,
            Some(first) => support.all(|x| self.rows[x] == self.rows[first]),
        }
    }
}

/// A pair `(A, G)` at which the defining identity fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RcdWitness {
    #[serde(serialize_with = "ser_event")]
    pub a: Event,
    #[serde(serialize_with = "ser_event")]
    pub g: Event,
    #[serde(with = "serde_str")]
    pub lhs: Rational,
    #[serde(with = "serde_str")]
    pub rhs: Rational,
}

fn ser_event<S: serde::Serializer>(e: &Event, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(e.iter())
}

/// Verdict of [`check_rcd`]. A failing identity always carries a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RcdReport {
    pub measurable: bool,
    pub identity_holds: bool,
    pub witness: Option<RcdWitness>,
}

impl RcdReport {
    pub fn passed(&self) -> bool {
        self.measurable && self.identity_holds
    }
}

/// Rows identical across every block of `g`.
pub fn is_g_measurable(k: &Kernel, g: &FinitePartition) -> bool {
    assert_eq!(k.space_size(), g.space_size(), "kernel and partition over different spaces");
    g.blocks().iter().all(|b| b.iter().all(|&x| k.rows[x] == k.rows[b[0]]))
}

/// The canonical rcd: each row is `rho` conditioned on the atom of its point.
/// Rows on `rho`-null atoms are `rho` itself.
pub fn compute_rcd(rho: &RationalMeasure, g: &FinitePartition) -> Kernel {
    assert_eq!(rho.space_size(), g.space_size(), "measure and partition over different spaces");
    let per_block: Vec<RationalMeasure> =
        g.blocks().iter().map(|b| rho.condition_on_points(b).unwrap_or_else(|_| rho.clone())).collect();
    let rows = (0..rho.space_size()).map(|x| per_block[g.block_index(x)].clone()).collect();
    Kernel { rows }
}

/// Checks `ρ(A ∩ G) = Σ_{x∈G} k(x)(A) ρ({x})` for every singleton `A` and
/// every block `G`. Both sides are additive in `A` and in `G`, so this covers
/// every event and every member of the sub-σ-algebra.
pub fn check_rcd(k: &Kernel, rho: &RationalMeasure, g: &FinitePartition) -> RcdReport {
    let n = rho.space_size();
    assert_eq!(k.space_size(), n, "kernel and measure over different spaces");
    assert_eq!(g.space_size(), n, "partition and measure over different spaces");
    let measurable = is_g_measurable(k, g);
    for block in g.blocks() {
        for a in 0..n {
            let lhs = if block.binary_search(&a).is_ok() { rho.weight(a).clone() } else { Rational::zero() };
            let rhs: Rational = block.iter().map(|&x| k.row(x).weight(a) * rho.weight(x)).sum();
            if lhs != rhs {
                return RcdReport {
                    measurable,
                    identity_holds: false,
                    witness: Some(RcdWitness {
                        a: Event::singleton(n, a),
                        g: Event::from_points(n, block.iter().copied()),
                        lhs,
                        rhs,
                    }),
                };
            }
        }
    }
    RcdReport { measurable, identity_holds: true, witness: None }
}

/// Rows agree at every point of positive `rho`-mass.
pub fn essentially_equal(k1: &Kernel, k2: &Kernel, rho: &RationalMeasure) -> bool {
    assert_eq!(k1.space_size(), k2.space_size());
    assert_eq!(k1.space_size(), rho.space_size());
    rho.support().all(|x| k1.row(x) == k2.row(x))
}

/// The three clauses of the triviality equivalence, each evaluated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Remark2Verdict {
    /// `g` is `rho`-trivial.
    pub trivial: bool,
    /// The constant kernel `x ↦ rho` is an rcd of `rho` given `g`.
    pub constant_is_rcd: bool,
    /// The canonical rcd is `rho`-almost constant.
    pub rcd_almost_constant: bool,
}

impl Remark2Verdict {
    pub fn coherent(&self) -> bool {
        self.trivial == self.constant_is_rcd && self.constant_is_rcd == self.rcd_almost_constant
    }
}

pub fn remark2_equivalence(rho: &RationalMeasure, g: &FinitePartition) -> Remark2Verdict {
    let trivial = rho.is_trivial_on(g);
    let constant_is_rcd = check_rcd(&Kernel::constant(rho), rho, g).passed();
    let rcd_almost_constant = compute_rcd(rho, g).is_almost_constant(rho);
    Remark2Verdict { trivial, constant_is_rcd, rcd_almost_constant }
}

/// Whether `g` is `ρ^G(x)`-trivial for every `x` of positive mass.
///
/// Rows of the canonical rcd are constant on blocks, so it suffices to check
/// one conditional measure per block of positive mass; the kernel is never
/// materialized.
pub fn conditional_triviality(rho: &RationalMeasure, g: &FinitePartition) -> bool {
    assert_eq!(rho.space_size(), g.space_size(), "measure and partition over different spaces");
    g.blocks().iter().filter(|b| !rho.mass_of(b).is_zero()).all(|b| {
        let row = rho.condition_on_points(b).expect("block has positive mass");
        row.is_trivial_on(g)
    })
}

/// `C^G(μ, x)`: a single map that conditions any measure on the atom of `x`,
/// falling back to `μ` on `μ`-null atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversalConditioner {
    g: FinitePartition,
}

impl UniversalConditioner {
    pub fn new(g: FinitePartition) -> Self {
        Self { g }
    }

    pub fn partition(&self) -> &FinitePartition {
        &self.g
    }

    pub fn apply(&self, mu: &RationalMeasure, x: usize) -> RationalMeasure {
        assert_eq!(mu.space_size(), self.g.space_size(), "measure over a different space");
        match mu.condition(&self.g.atom_of(x)) {
            Ok(c) => c,
            Err(_) => mu.clone(),
        }
    }

    /// Rows `x ↦ C^G(μ, x)`.
    pub fn kernel_for(&self, mu: &RationalMeasure) -> Kernel {
        Kernel { rows: (0..mu.space_size()).map(|x| self.apply(mu, x)).collect() }
    }
}

pub fn universal_conditioner(g: &FinitePartition) -> UniversalConditioner {
    UniversalConditioner::new(g.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurable::FiniteSpace;
    use crate::rational::ratio;

    fn measure(ws: &[(i64, i64)]) -> RationalMeasure {
        RationalMeasure::new(ws.iter().map(|&(p, q)| ratio(p, q)).collect()).unwrap()
    }

    fn two_blocks() -> FinitePartition {
        FinitePartition::new(FiniteSpace::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    fn rho_a() -> RationalMeasure {
        measure(&[(1, 6), (1, 3), (1, 4), (1, 4)])
    }

    /// Definition check over every event `A` and every union of blocks `G`.
    fn exhaustive_identity(k: &Kernel, rho: &RationalMeasure, g: &FinitePartition) -> bool {
        let n = rho.space_size();
        (0..1u64 << n).all(|am| {
            let a = Event::from_mask(n, am);
            (0..1u64 << g.num_blocks()).all(|gm| {
                let gev = g.union_of_blocks(gm);
                let lhs = rho.mass(&a.intersection(&gev));
                let rhs: Rational = gev.iter().map(|x| k.row(x).mass(&a) * rho.weight(x)).sum();
                lhs == rhs
            })
        })
    }

    #[test]
    fn measurability_examples() {
        let rho = rho_a();
        assert!(is_g_measurable(&Kernel::constant(&rho), &two_blocks()));
        assert!(is_g_measurable(&Kernel::constant(&rho), &FinitePartition::singletons(4)));
        let k = Kernel::new(vec![RationalMeasure::dirac(2, 0), RationalMeasure::dirac(2, 1)]).unwrap();
        assert!(!is_g_measurable(&k, &FinitePartition::one_block(2)));
        let mu = RationalMeasure::uniform(4);
        let nu = RationalMeasure::dirac(4, 3);
        let k = Kernel::new(vec![mu.clone(), mu, nu.clone(), nu]).unwrap();
        assert!(is_g_measurable(&k, &two_blocks()));
    }

    #[test]
    fn compute_rcd_examples() {
        let k = compute_rcd(&rho_a(), &two_blocks());
        let left = measure(&[(1, 3), (2, 3), (0, 1), (0, 1)]);
        let right = measure(&[(0, 1), (0, 1), (1, 2), (1, 2)]);
        assert_eq!(k.rows(), &[left.clone(), left, right.clone(), right]);
        assert!(exhaustive_identity(&k, &rho_a(), &two_blocks()));

        let rho = rho_a();
        let k = compute_rcd(&rho, &FinitePartition::one_block(4));
        assert!(k.rows().iter().all(|r| *r == rho));

        let delta = RationalMeasure::dirac(4, 0);
        let g = FinitePartition::new(FiniteSpace::new(4).unwrap(), vec![vec![0], vec![1, 2, 3]]).unwrap();
        let k = compute_rcd(&delta, &g);
        assert!(k.rows().iter().all(|r| *r == delta));
    }

    #[test]
    fn check_rcd_examples() {
        let report = check_rcd(&compute_rcd(&rho_a(), &two_blocks()), &rho_a(), &two_blocks());
        assert_eq!(report, RcdReport { measurable: true, identity_holds: true, witness: None });

        let rho = RationalMeasure::uniform(2);
        let report = check_rcd(&Kernel::constant(&rho), &rho, &FinitePartition::singletons(2));
        assert!(report.measurable);
        assert!(!report.identity_holds);
        let w = report.witness.unwrap();
        assert_eq!(w.a, Event::singleton(2, 0));
        assert_eq!(w.g, Event::singleton(2, 0));
        assert_eq!(w.lhs, ratio(1, 2));
        assert_eq!(w.rhs, ratio(1, 4));

        let rho = rho_a();
        assert!(check_rcd(&Kernel::constant(&rho), &rho, &FinitePartition::one_block(4)).passed());
    }

    #[test]
    fn report_json_shape() {
        let rho = rho_a();
        let report = check_rcd(&compute_rcd(&rho, &two_blocks()), &rho, &two_blocks());
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            r#"{"measurable":true,"identity_holds":true,"witness":null}"#
        );
        let rho = RationalMeasure::uniform(2);
        let report = check_rcd(&Kernel::constant(&rho), &rho, &FinitePartition::singletons(2));
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            r#"{"measurable":true,"identity_holds":false,"witness":{"a":[0],"g":[0],"lhs":"1/2","rhs":"1/4"}}"#
        );
    }

    #[test]
    fn non_measurable_kernel_can_still_satisfy_identity() {
        // Rows differ inside a null block: the identity cannot see it.
        let rho = measure(&[(1, 2), (1, 2), (0, 1), (0, 1)]);
        let g = two_blocks();
        let k = compute_rcd(&rho, &g).with_row(3, RationalMeasure::dirac(4, 3));
        let report = check_rcd(&k, &rho, &g);
        assert!(!report.measurable);
        assert!(report.identity_holds);
        assert!(!report.passed());
    }

    #[test]
    fn essential_uniqueness_examples() {
        let rho = measure(&[(1, 2), (1, 2), (0, 1), (0, 1)]);
        let g = two_blocks();
        let k1 = compute_rcd(&rho, &g);
        let other = RationalMeasure::uniform(4);
        let k2 = k1.with_row(2, other.clone()).with_row(3, other);
        assert!(check_rcd(&k2, &rho, &g).passed());
        assert!(essentially_equal(&k1, &k2, &rho));
        assert!(essentially_equal(&k1, &k1, &rho));

        let rho = RationalMeasure::uniform(4);
        let k1 = compute_rcd(&rho, &g);
        let k3 = k1.with_row(0, RationalMeasure::dirac(4, 0));
        assert!(!essentially_equal(&k1, &k3, &rho));
    }

    #[test]
    fn remark2_examples() {
        let g = two_blocks();
        let v = remark2_equivalence(&measure(&[(1, 2), (1, 2), (0, 1), (0, 1)]), &g);
        assert_eq!(v, Remark2Verdict { trivial: true, constant_is_rcd: true, rcd_almost_constant: true });
        let v = remark2_equivalence(&RationalMeasure::uniform(4), &g);
        assert_eq!(v, Remark2Verdict { trivial: false, constant_is_rcd: false, rcd_almost_constant: false });
        let v = remark2_equivalence(&rho_a(), &FinitePartition::one_block(4));
        assert!(v.trivial && v.coherent());
    }

    #[test]
    fn conditional_triviality_examples() {
        assert!(conditional_triviality(&rho_a(), &two_blocks()));
        assert!(conditional_triviality(&rho_a(), &FinitePartition::singletons(4)));
        assert!(compute_rcd(&rho_a(), &FinitePartition::singletons(4))
            .rows()
            .iter()
            .enumerate()
            .all(|(x, r)| *r == RationalMeasure::dirac(4, x)));
    }

    #[test]
    fn universal_conditioner_examples() {
        let c = universal_conditioner(&two_blocks());
        assert_eq!(c.apply(&RationalMeasure::uniform(4), 3), measure(&[(0, 1), (0, 1), (1, 2), (1, 2)]));
        let delta = RationalMeasure::dirac(4, 0);
        assert_eq!(c.apply(&delta, 2), delta);
        for rho in [rho_a(), RationalMeasure::uniform(4), delta] {
            let k = c.kernel_for(&rho);
            assert!(check_rcd(&k, &rho, &two_blocks()).passed());
            assert_eq!(k, compute_rcd(&rho, &two_blocks()));
        }
    }
}
