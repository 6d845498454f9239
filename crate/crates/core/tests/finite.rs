mod common;

use common::*;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcdlab_core::rational::ratio;
use rcdlab_core::{
    build_iterated, check_iterated, check_rcd, compute_rcd, conditional_triviality, diagonal_agreement_set,
    essentially_equal, in_product_sigma, is_g_measurable, lemma3_lhs, lemma3_rhs, remark2_equivalence, theorem7_check,
    universal_conditioner, Event, FinitePartition, FiniteSpace, IteratedKernel, Kernel, ProductEvent, RationalMeasure,
};

/// Weights `c_i / d` with a fair chance of zero entries.
fn measure(rng: &mut ChaCha8Rng, n: usize) -> RationalMeasure {
    let d = rng.gen_range(1..=24);
    let mut counts = vec![0i64; n];
    for _ in 0..d {
        let x = if rng.gen_bool(0.3) { rng.gen_range(0..n.div_ceil(2)) } else { rng.gen_range(0..n) };
        counts[x] += 1;
    }
    RationalMeasure::new(counts.iter().map(|&c| ratio(c, d)).collect()).unwrap()
}

fn partition(rng: &mut ChaCha8Rng, n: usize) -> FinitePartition {
    let k = rng.gen_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    FinitePartition::from_labels(&labels)
}

fn instances(seed: u64, count: usize, max_n: usize) -> Vec<(RationalMeasure, FinitePartition)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            (measure(&mut rng, n), partition(&mut rng, n))
        })
        .collect()
}

fn kernel(rows: Vec<RationalMeasure>) -> Kernel {
    Kernel::new(rows).unwrap()
}

#[test]
fn canonical_rcd_passes_exhaustive_identity() {
    for (rho, g) in instances(1, 300, 6) {
        let k = compute_rcd(&rho, &g);
        assert!(is_rcd(&rows(&k), &weights(&rho), &g), "{rho} {g:?}");
        assert!(check_rcd(&k, &rho, &g).passed());
    }
}

#[test]
fn reduced_check_agrees_with_exhaustive_on_arbitrary_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut seen = [0usize; 2];
    for (rho, g) in instances(3, 400, 5) {
        let n = rho.space_size();
        let canonical = compute_rcd(&rho, &g);
        let candidates = [
            canonical.clone(),
            Kernel::constant(&rho),
            kernel((0..n).map(|_| measure(&mut rng, n)).collect()),
            // measurable but otherwise arbitrary
            {
                let per_block: Vec<RationalMeasure> = (0..g.num_blocks()).map(|_| measure(&mut rng, n)).collect();
                kernel((0..n).map(|x| per_block[g.block_index(x)].clone()).collect())
            },
            canonical.with_row(rng.gen_range(0..n), measure(&mut rng, n)),
        ];
        for k in candidates {
            let expected = is_rcd(&rows(&k), &weights(&rho), &g);
            let report = check_rcd(&k, &rho, &g);
            assert_eq!(report.measurable, measurable(&rows(&k), &g));
            assert_eq!(report.passed(), expected, "{rho} {g:?} {k:?}");
            seen[expected as usize] += 1;
        }
    }
    assert!(seen[0] > 100 && seen[1] > 100, "both verdicts exercised: {seen:?}");
}

#[test]
fn witness_is_a_real_counterexample() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (rho, g) in instances(5, 200, 6) {
        let n = rho.space_size();
        let per_block: Vec<RationalMeasure> = (0..g.num_blocks()).map(|_| measure(&mut rng, n)).collect();
        let k = kernel((0..n).map(|x| per_block[g.block_index(x)].clone()).collect());
        let report = check_rcd(&k, &rho, &g);
        if let Some(w) = report.witness {
            let a = w.a.iter().fold(0u64, |m, x| m | 1 << x);
            let gm = w.g.iter().fold(0u64, |m, x| m | 1 << x);
            assert_eq!(w.g.space_size(), n);
            assert!(g.sigma_contains(&w.g));
            let lhs = mass(&weights(&rho), a & gm);
            let rhs: rcdlab_core::Rational = w.g.iter().map(|x| rho.weight(x) * mass(&weights(k.row(x)), a)).sum();
            assert_eq!((lhs.clone(), rhs.clone()), (w.lhs, w.rhs));
            assert_ne!(lhs, rhs);
        }
    }
}

#[test]
fn generated_partition_matches_closure() {
    let space = FiniteSpace::new(4).unwrap();
    let gens = [Event::from_points(4, [0, 1]), Event::from_points(4, [1, 2])];
    let g = FinitePartition::generated_by(space, &gens);
    assert_eq!(g, FinitePartition::singletons(4));
    let expected = closure(4, &[0b0011, 0b0110]);
    assert_eq!(sigma_masks(&g).into_iter().collect::<std::collections::BTreeSet<_>>(), expected);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let n = rng.gen_range(1..=7);
        let space = FiniteSpace::new(n).unwrap();
        let masks: Vec<u64> = (0..rng.gen_range(0..4)).map(|_| rng.gen_range(0..1u64 << n)).collect();
        let events: Vec<Event> = masks.iter().map(|&m| Event::from_mask(n, m)).collect();
        let g = FinitePartition::generated_by(space, &events);
        let got: std::collections::BTreeSet<u64> = sigma_masks(&g).into_iter().collect();
        assert_eq!(got, closure(n, &masks), "n = {n}, generators {masks:?}");
    }
}

#[test]
fn conditioning_example() {
    let rho = RationalMeasure::new(vec![ratio(1, 6), ratio(1, 3), ratio(1, 4), ratio(1, 4)]).unwrap();
    let c = rho.condition(&Event::from_points(4, [0, 1])).unwrap();
    assert_eq!(c.weights(), &[ratio(1, 3), ratio(2, 3), ratio(0, 1), ratio(0, 1)]);
    let g = FinitePartition::new(FiniteSpace::new(4).unwrap(), vec![vec![0, 1], vec![2, 3]]).unwrap();
    let k = compute_rcd(&rho, &g);
    assert_eq!(k.row(0), &c);
    assert_eq!(k.row(3).weights(), &[ratio(0, 1), ratio(0, 1), ratio(1, 2), ratio(1, 2)]);
}

#[test]
fn triviality_against_enumeration() {
    for (rho, g) in instances(7, 400, 7) {
        let expected = trivial(&weights(&rho), &g);
        assert_eq!(rho.is_trivial_on(&g), expected);
        let v = remark2_equivalence(&rho, &g);
        assert_eq!(v.trivial, expected);
        assert_eq!(v.constant_is_rcd, is_rcd(&rows(&Kernel::constant(&rho)), &weights(&rho), &g));
        let k = rows(&compute_rcd(&rho, &g));
        let almost_constant = positive_points(&weights(&rho)).iter().all(|&x| k[x] == weights(&rho));
        assert_eq!(v.rcd_almost_constant, almost_constant);
        assert!(v.coherent());
    }
}

#[test]
fn uniqueness_against_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (rho, g) in instances(9, 200, 5) {
        let n = rho.space_size();
        let w = weights(&rho);
        let canonical = compute_rcd(&rho, &g);
        // any measurable kernel the oracle accepts agrees with the canonical one a.e.
        for _ in 0..5 {
            let per_block: Vec<RationalMeasure> = (0..g.num_blocks())
                .map(|b| if rng.gen_bool(0.5) { canonical.row(g.blocks()[b][0]).clone() } else { measure(&mut rng, n) })
                .collect();
            let k = kernel((0..n).map(|x| per_block[g.block_index(x)].clone()).collect());
            if is_rcd(&rows(&k), &w, &g) {
                assert!(agree_ae(&rows(&k), &rows(&canonical), &w));
                assert!(essentially_equal(&k, &canonical, &rho));
            }
            assert_eq!(essentially_equal(&k, &canonical, &rho), agree_ae(&rows(&k), &rows(&canonical), &w));
        }
    }
}

#[test]
fn conditioner_is_rcd_for_every_measure() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let g = partition(&mut rng, n);
        let c = universal_conditioner(&g);
        for _ in 0..3 {
            let mu = measure(&mut rng, n);
            let k = c.kernel_for(&mu);
            assert!(is_rcd(&rows(&k), &weights(&mu), &g));
            assert!(conditionally_trivial(&rows(&k), &weights(&mu), &g));
            assert!(conditional_triviality(&mu, &g));
        }
    }
}

/// `E ∈ G ⊗ Σ` iff every column `{x : (x, y) ∈ E}` is a union of blocks.
fn columns_measurable(e: &ProductEvent, g: &FinitePartition) -> bool {
    let n = e.space_size();
    let gs = sigma_masks(g);
    (0..n).all(|y| gs.contains(&(0..n).filter(|&x| e.contains(x, y)).fold(0u64, |m, x| m | 1 << x)))
}

#[test]
fn diagonal_identity_exhaustive_small() {
    for (rho, g) in instances(11, 120, 5).into_iter().filter(|(_, g)| g.num_blocks() <= 2) {
        let n = rho.space_size();
        let k = compute_rcd(&rho, &g);
        let (w, kr) = (weights(&rho), rows(&k));
        let bits = g.num_blocks() * n;
        for sel in 0..1u64 << bits {
            let e = ProductEvent::from_fn(n, |x, y| sel >> (g.block_index(x) * n + y) & 1 == 1);
            assert!(columns_measurable(&e, &g));
            assert!(in_product_sigma(&e, &g, &FinitePartition::singletons(n)));
            let lhs = diagonal_lhs(|x, y| e.contains(x, y), &w);
            assert_eq!(lemma3_lhs(&e, &rho), lhs);
            assert_eq!(lemma3_rhs(&e, &k, &rho), diagonal_rhs(|x, y| e.contains(x, y), &kr, &w));
            assert_eq!(lemma3_rhs(&e, &k, &rho), lhs);
        }
    }
}

#[test]
fn product_membership_against_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let n = rng.gen_range(1..=5);
        let g = partition(&mut rng, n);
        let cells: Vec<bool> = (0..n * n).map(|_| rng.gen_bool(0.5)).collect();
        let e = ProductEvent::from_fn(n, |x, y| cells[x * n + y]);
        let cols = columns_measurable(&e, &g);
        assert_eq!(in_product_sigma(&e, &g, &FinitePartition::singletons(n)), cols);
    }
}

fn grid(k2: &IteratedKernel) -> Vec<Vec<Vec<rcdlab_core::Rational>>> {
    let n = k2.space_size();
    (0..n).map(|x| rows(&k2.section(x))).collect()
}

#[test]
fn iterated_rcd_against_oracle() {
    for (rho, g) in instances(13, 200, 5) {
        let n = rho.space_size();
        let k = rows(&compute_rcd(&rho, &g));
        let w = weights(&rho);
        let k2 = build_iterated(&rho, &g);
        assert!(is_iterated_rcd(&grid(&k2), &k, &w, &g));
        assert!(check_iterated(&k2, &rho, &g));
        assert!(k2.is_product_measurable(&g, &g));
        for x in 0..n {
            assert!(is_g_measurable(&k2.section(x), &g));
        }

        let e = diagonal_agreement_set(&k2);
        let mass = diagonal_rhs(|x, y| e.contains(x, y), &k, &w);
        assert!(mass.is_one(), "agreement set mass {mass}");

        let report = theorem7_check(&rho, &g, Some(&k2)).expect("consistent");
        assert_eq!(report.conditionally_trivial, conditionally_trivial(&k, &w, &g));
        assert_eq!(report.diagonal_mass, Some(mass));
    }
}

#[test]
fn constant_in_y_grid_is_iterated_rcd_exactly_when_conditionally_trivial() {
    // The sections of (x, y) ↦ k_x are constant kernels, which are rcds of k_x
    // precisely when G is k_x-trivial.
    for (rho, g) in instances(14, 200, 5) {
        let k = compute_rcd(&rho, &g);
        let n = rho.space_size();
        let constant = IteratedKernel::from_fn(n, |x, _| k.row(x).clone());
        let expected = conditionally_trivial(&rows(&k), &weights(&rho), &g);
        assert_eq!(is_iterated_rcd(&grid(&constant), &rows(&k), &weights(&rho), &g), expected);
        assert_eq!(check_iterated(&constant, &rho, &g), expected);
    }
}

#[test]
fn null_mass_agreement_set_is_still_full_measure() {
    let rho = RationalMeasure::new(vec![ratio(1, 2), ratio(1, 2), ratio(0, 1)]).unwrap();
    let g = FinitePartition::from_labels(&[0, 0, 1]);
    let k2 = build_iterated(&rho, &g);
    let e = diagonal_agreement_set(&k2);
    assert!(e.contains(2, 2));
    let k = compute_rcd(&rho, &g);
    assert!(lemma3_rhs(&e, &k, &rho).is_one());
    assert!(!lemma3_rhs(&ProductEvent::off_diagonal(3), &k, &rho).is_zero());
}
