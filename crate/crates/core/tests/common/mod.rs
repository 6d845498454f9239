//! Brute-force reference computations on finite spaces.
//!
//! Everything here works on raw weight vectors and bitmasks and never calls
//! the library's checking code, so agreement between the two is evidence
//! rather than tautology. Spaces have at most ~12 points.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rcdlab_core::{FinitePartition, Kernel, Rational, RationalMeasure};

pub fn full_mask(n: usize) -> u64 {
    (1u64 << n) - 1
}

pub fn weights(mu: &RationalMeasure) -> Vec<Rational> {
    mu.weights().to_vec()
}

pub fn rows(k: &Kernel) -> Vec<Vec<Rational>> {
    k.rows().iter().map(weights).collect()
}

pub fn mass(w: &[Rational], mask: u64) -> Rational {
    w.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, v)| v.clone()).sum()
}

pub fn block_masks(g: &FinitePartition) -> Vec<u64> {
    g.blocks().iter().map(|b| b.iter().fold(0u64, |m, &x| m | 1 << x)).collect()
}

/// Every union of blocks, i.e. the whole σ-algebra as bitmasks.
pub fn sigma_masks(g: &FinitePartition) -> Vec<u64> {
    let blocks = block_masks(g);
    (0..1u64 << blocks.len())
        .map(|sel| blocks.iter().enumerate().filter(|(i, _)| sel >> i & 1 == 1).fold(0, |m, (_, b)| m | b))
        .collect()
}

/// Smallest family containing `generators`, `∅` and `Ω` closed under
/// complement and pairwise union, by fixpoint iteration.
pub fn closure(n: usize, generators: &[u64]) -> BTreeSet<u64> {
    let full = full_mask(n);
    let mut family: BTreeSet<u64> = generators.iter().copied().chain([0, full]).collect();
    loop {
        let current: Vec<u64> = family.iter().copied().collect();
        let mut grown = false;
        for &a in &current {
            grown |= family.insert(full & !a);
            for &b in &current {
                grown |= family.insert(a | b);
            }
        }
        if !grown {
            return family;
        }
    }
}

/// A kernel is measurable iff `x ↦ k_x(A)` is constant on every block, for
/// every `A`. Checked literally over all `2^n` sets.
pub fn measurable(rows: &[Vec<Rational>], g: &FinitePartition) -> bool {
    let n = rows.len();
    g.blocks().iter().all(|b| {
        (0..1u64 << n).all(|a| {
            let first = mass(&rows[b[0]], a);
            b.iter().all(|&x| mass(&rows[x], a) == first)
        })
    })
}

/// The defining identity over every `A ⊆ Ω` and every `G` in the σ-algebra.
pub fn identity_exhaustive(rows: &[Vec<Rational>], w: &[Rational], g: &FinitePartition) -> bool {
    let n = w.len();
    let gs = sigma_masks(g);
    (0..1u64 << n).all(|a| {
        gs.iter().all(|&gm| {
            let lhs = mass(w, a & gm);
            let rhs: Rational = (0..n).filter(|x| gm >> x & 1 == 1).map(|x| &w[x] * mass(&rows[x], a)).sum();
            lhs == rhs
        })
    })
}

pub fn is_rcd(rows: &[Vec<Rational>], w: &[Rational], g: &FinitePartition) -> bool {
    measurable(rows, g) && identity_exhaustive(rows, w, g)
}

/// Every member of the σ-algebra has mass exactly 0 or 1.
pub fn trivial(w: &[Rational], g: &FinitePartition) -> bool {
    sigma_masks(g).into_iter().all(|gm| {
        let m = mass(w, gm);
        m.is_zero() || m.is_one()
    })
}

pub fn positive_points(w: &[Rational]) -> Vec<usize> {
    (0..w.len()).filter(|&x| !w[x].is_zero()).collect()
}

/// `G` is trivial under `k_x` for every `x` carrying mass.
pub fn conditionally_trivial(rows: &[Vec<Rational>], w: &[Rational], g: &FinitePartition) -> bool {
    positive_points(w).into_iter().all(|x| trivial(&rows[x], g))
}

/// Rows agree wherever `w` is positive.
pub fn agree_ae(a: &[Vec<Rational>], b: &[Vec<Rational>], w: &[Rational]) -> bool {
    positive_points(w).into_iter().all(|x| a[x] == b[x])
}

/// `Σ_x w_x Σ_y k_x(y) 1_E(x, y)` with `E` given as a predicate.
pub fn diagonal_rhs(e: impl Fn(usize, usize) -> bool, rows: &[Vec<Rational>], w: &[Rational]) -> Rational {
    let n = w.len();
    let mut total = Rational::zero();
    for x in 0..n {
        for y in 0..n {
            if e(x, y) {
                total += &w[x] * &rows[x][y];
            }
        }
    }
    total
}

pub fn diagonal_lhs(e: impl Fn(usize, usize) -> bool, w: &[Rational]) -> Rational {
    (0..w.len()).filter(|&x| e(x, x)).map(|x| w[x].clone()).sum()
}

/// Iterated rcd, literally: for every `x` carrying mass, the section
/// `y ↦ k2(x, y)` is an rcd of `k_x` given `G`.
pub fn is_iterated_rcd(k2: &[Vec<Vec<Rational>>], k: &[Vec<Rational>], w: &[Rational], g: &FinitePartition) -> bool {
    positive_points(w).into_iter().all(|x| is_rcd(&k2[x], &k[x], g))
}

/// Midpoint-rule approximations of `ρ(A ∩ G)` and `∫_G (δ_x ⊗ m)(A) ρ(d(x, i))`
/// for `ρ = λ ⊗ m`, using plain floats and `panels` cells. Finitely many
/// modified points of `G` are null and do not enter.
pub mod quadrature {
    use rcdlab_core::continuum::{GEvent, IntervalSet, RectEvent};
    use rcdlab_core::rational::to_f64;

    type Piece = (f64, f64, bool, bool);

    fn pieces(set: &IntervalSet) -> Vec<Piece> {
        set.pieces().iter().map(|p| (to_f64(p.lo()), to_f64(p.hi()), p.lo_closed(), p.hi_closed())).collect()
    }

    fn member(set: &[Piece], x: f64) -> bool {
        set.iter().any(|&(lo, hi, lc, hc)| (x > lo || (lc && x == lo)) && (x < hi || (hc && x == hi)))
    }

    pub fn both_sides(m0: f64, g: &GEvent, a: &RectEvent, panels: usize) -> (f64, f64) {
        let m = [m0, 1.0 - m0];
        let h = 1.0 / panels as f64;
        let (base, a) = (pieces(g.base()), [pieces(a.fiber(0)), pieces(a.fiber(1))]);
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for k in 0..panels {
            let c = (k as f64 + 0.5) * h;
            if !member(&base, c) {
                continue;
            }
            let in_a = [member(&a[0], c), member(&a[1], c)];
            let kernel_value: f64 = (0..2).filter(|&j| in_a[j]).map(|j| m[j]).sum();
            for i in 0..2 {
                if in_a[i] {
                    lhs += h * m[i];
                }
                rhs += h * m[i] * kernel_value;
            }
        }
        (lhs, rhs)
    }
}
