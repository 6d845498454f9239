use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::hybrid::{hybrid_mass, FiberSet, GEvent, HybridEvent, HybridMeasure, Point, RectEvent};
use super::interval::{Interval, IntervalSet};
use super::ContinuumError;
use crate::measurable::{FinitePartition, RationalMeasure};
use crate::rational::{is_unit_interval_open, ratio, serde_str, Rational};
use crate::rcd::conditional_triviality;

pub const NONEXISTENCE_CONCLUSION: &str = "no measurable iterated rcd exists";
const PREMISES_MISSING: &str = "premises not established";

/// 50 G-events × 50 test events.
pub const DEFAULT_BATTERY_SIDE: usize = 50;
const DEFAULT_BATTERY_SEED: u64 = 0x5eed_0005;

/// `(x, i) ↦ δ_x ⊗ m` with `m = (m0, 1 - m0)`, `0 < m0 < 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiracProductKernel {
    m0: Rational,
}

impl DiracProductKernel {
    pub fn new(m0: Rational) -> Result<Self, ContinuumError> {
        if !is_unit_interval_open(&m0) {
            return Err(ContinuumError::DiracM(m0));
        }
        Ok(Self { m0 })
    }

    pub fn m0(&self) -> &Rational {
        &self.m0
    }

    pub fn m1(&self) -> Rational {
        Rational::one() - &self.m0
    }

    pub fn m(&self, fiber: usize) -> Rational {
        if fiber == 0 {
            self.m0.clone()
        } else {
            self.m1()
        }
    }

    /// The kernel value at `x` (the fiber coordinate is ignored).
    pub fn measure_at(&self, x: &Rational) -> Result<HybridMeasure, ContinuumError> {
        HybridMeasure::dirac_product(x, &self.m0)
    }

    /// `(δ_x ⊗ m)(A)` without building the measure.
    pub fn evaluate(&self, x: &Rational, a: &impl HybridEvent) -> Rational {
        let region = a.region();
        (0..2).filter(|&j| region.contains(&Point { x: x.clone(), fiber: j })).map(|j| self.m(j)).sum()
    }
}

/// `∫_G k(x, i)(A) ρ(d(x, i))`, exactly.
///
/// Off the finitely many modified points, `k(x, i)(A) = Σ_j m_j 1[x ∈ A_j]`
/// where `A_j` is the interval part of fiber `j`, so the density part reduces
/// to `Σ_i Σ_j m_j ∫_{G_i ∩ A_j} f_i`. Atoms of `ρ` inside `G` contribute their
/// weight times the kernel value.
pub fn kernel_integral(
    kernel: &DiracProductKernel,
    rho: &HybridMeasure,
    a: &impl HybridEvent,
    g: &impl HybridEvent,
) -> Rational {
    let a_region = a.region();
    let g_region = g.region();
    let mut total = Rational::zero();
    for i in 0..2 {
        for j in 0..2 {
            let overlap = g_region.fiber(i).intersection(a_region.fiber(j));
            total += kernel.m(j) * rho.density(i).integral_over(&overlap);
        }
    }
    for (p, w) in rho.atoms() {
        if g_region.contains(p) {
            total += w * kernel.evaluate(&p.x, &a_region);
        }
    }
    total
}

/// `true`: `{(x, 0)}` and `{(x, 1)}` are `ρ`-null, so adding or removing them
/// keeps a set inside `G`.
pub fn singleton_is_null(rho: &HybridMeasure, x: &Rational) -> Result<bool, ContinuumError> {
    if rho.atoms().iter().any(|(p, _)| p.x == *x) {
        return Err(ContinuumError::AtomlessViolation(x.clone()));
    }
    let p0 = Point::new(x.clone(), 0)?;
    let p1 = Point::new(x.clone(), 1)?;
    let mass = hybrid_mass(rho, &GEvent::singleton(p0)) + hybrid_mass(rho, &GEvent::singleton(p1));
    Ok(mass.is_zero())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityMismatch {
    pub pair_index: usize,
    #[serde(with = "serde_str")]
    pub lhs: Rational,
    #[serde(with = "serde_str")]
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Remark5IdentityReport {
    #[serde(with = "serde_str")]
    pub m0: Rational,
    pub pairs_checked: usize,
    pub exact_matches: usize,
    pub all_exact: bool,
    /// The first few failing pairs, if any.
    pub mismatches: Vec<IdentityMismatch>,
}

const MAX_REPORTED_MISMATCHES: usize = 16;

/// Compares `ρ(A ∩ G)` with `∫_G (δ_x ⊗ m)(A) ρ(d(x, i))` for each pair, with
/// `ρ = λ ⊗ m`.
pub fn remark5_identity_check_pairs(
    m0: &Rational,
    pairs: &[(GEvent, RectEvent)],
) -> Result<Remark5IdentityReport, ContinuumError> {
    let kernel = DiracProductKernel::new(m0.clone())?;
    let rho = HybridMeasure::lebesgue_product(m0)?;
    let outcomes: Vec<(Rational, Rational)> = pairs
        .par_iter()
        .map(|(g, a)| {
            let lhs = hybrid_mass(&rho, &a.region().intersection(&g.region()));
            let rhs = kernel_integral(&kernel, &rho, a, g);
            (lhs, rhs)
        })
        .collect();
    let exact_matches = outcomes.iter().filter(|(l, r)| l == r).count();
    let mismatches = outcomes
        .into_iter()
        .enumerate()
        .filter(|(_, (l, r))| l != r)
        .take(MAX_REPORTED_MISMATCHES)
        .map(|(pair_index, (lhs, rhs))| IdentityMismatch { pair_index, lhs, rhs })
        .collect::<Vec<_>>();
    Ok(Remark5IdentityReport {
        m0: m0.clone(),
        pairs_checked: pairs.len(),
        exact_matches,
        all_exact: exact_matches == pairs.len(),
        mismatches,
    })
}

/// Every `(G, A)` in `g_events × a_events`.
pub fn remark5_identity_check(
    m0: &Rational,
    g_events: &[GEvent],
    a_events: &[RectEvent],
) -> Result<Remark5IdentityReport, ContinuumError> {
    let pairs: Vec<(GEvent, RectEvent)> =
        g_events.iter().flat_map(|g| a_events.iter().map(move |a| (g.clone(), a.clone()))).collect();
    remark5_identity_check_pairs(m0, &pairs)
}

/// `(δ_x ⊗ m)({(x, 0)})`, which equals `m0` and lies strictly in `(0, 1)`:
/// the G-event `{(x, 0)}` is not trivial under the kernel value at `x`.
pub fn triviality_failure(m0: &Rational, x: &Rational) -> Result<Rational, ContinuumError> {
    let kernel = DiracProductKernel::new(m0.clone())?;
    let nu = kernel.measure_at(x)?;
    let value = hybrid_mass(&nu, &GEvent::singleton(Point::new(x.clone(), 0)?));
    assert!(is_unit_interval_open(&value), "kernel value is trivial on {{(x,0)}}");
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem7ConsequenceReport {
    #[serde(with = "serde_str")]
    pub m0: Rational,
    pub identity_pairs_checked: usize,
    pub all_exact: bool,
    #[serde(with = "serde_str")]
    pub triviality_failure_x: Rational,
    #[serde(with = "serde_str")]
    pub triviality_failure_value: Rational,
    pub theorem7_conclusion: String,
}

impl Theorem7ConsequenceReport {
    /// Chains the computed premises: the kernel is an rcd on the tested
    /// events, and one of its values is non-trivial on a G-event. When both
    /// hold, conditional triviality fails, so by the equivalence no
    /// `G ⊗ G`-measurable iterated rcd exists.
    pub fn from_evidence(identity: &Remark5IdentityReport, x: Rational, failure_value: Rational) -> Self {
        let premises = identity.all_exact && identity.pairs_checked > 0 && is_unit_interval_open(&failure_value);
        Self {
            m0: identity.m0.clone(),
            identity_pairs_checked: identity.pairs_checked,
            all_exact: identity.all_exact,
            triviality_failure_x: x,
            triviality_failure_value: failure_value,
            theorem7_conclusion: if premises { NONEXISTENCE_CONCLUSION } else { PREMISES_MISSING }.to_string(),
        }
    }
}

/// Runs the standard battery and the failure witness at `x = 1/2`.
pub fn theorem7_consequence_report(m0: &Rational) -> Result<Theorem7ConsequenceReport, ContinuumError> {
    let (gs, as_) = standard_battery(DEFAULT_BATTERY_SIDE, DEFAULT_BATTERY_SEED);
    let identity = remark5_identity_check(m0, &gs, &as_)?;
    let x = ratio(1, 2);
    let value = triviality_failure(m0, &x)?;
    Ok(Theorem7ConsequenceReport::from_evidence(&identity, x, value))
}

// Denominators dividing 10^4, so every endpoint sits on the 1/10^4 grid.
const GRID_DENOMINATORS: [i64; 16] = [2, 4, 5, 8, 10, 16, 20, 25, 40, 50, 80, 100, 125, 200, 250, 400];

fn grid_point(rng: &mut ChaCha8Rng) -> Rational {
    let d = GRID_DENOMINATORS[rng.gen_range(0..GRID_DENOMINATORS.len())];
    ratio(rng.gen_range(0..=d), d)
}

fn random_interval(rng: &mut ChaCha8Rng, allow_point: bool) -> Interval {
    loop {
        let a = grid_point(rng);
        let b = grid_point(rng);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if lo == hi {
            if allow_point {
                return Interval::point(lo).expect("grid point in range");
            }
            continue;
        }
        return Interval::new(lo, hi, rng.gen_bool(0.5), rng.gen_bool(0.5)).expect("lo < hi");
    }
}

fn point_inside(rng: &mut ChaCha8Rng, base: &IntervalSet) -> Rational {
    let piece = &base.pieces()[rng.gen_range(0..base.pieces().len())];
    let u = ratio(rng.gen_range(1..8), 8);
    piece.lo() + (piece.hi() - piece.lo()) * u
}

fn point_outside(rng: &mut ChaCha8Rng, base: &IntervalSet) -> Option<Rational> {
    (0..64).map(|_| grid_point(rng)).find(|x| !base.contains(x))
}

fn random_g_event(rng: &mut ChaCha8Rng, index: usize) -> GEvent {
    match index {
        0 => return GEvent::full(),
        1 => return GEvent::default(),
        _ => {}
    }
    let base = if index == 2 {
        IntervalSet::empty()
    } else {
        let count = rng.gen_range(1..=2);
        (0..count).map(|_| random_interval(rng, false)).collect()
    };
    let mut added = std::collections::BTreeSet::new();
    let mut removed = std::collections::BTreeSet::new();
    if rng.gen_bool(0.6) {
        for _ in 0..rng.gen_range(1..=3) {
            if let Some(x) = point_outside(rng, &base) {
                added.insert(Point { x, fiber: rng.gen_range(0..2) });
            }
        }
    }
    if !base.is_empty() && rng.gen_bool(0.6) {
        for _ in 0..rng.gen_range(1..=3) {
            removed.insert(Point { x: point_inside(rng, &base), fiber: rng.gen_range(0..2) });
        }
    }
    GEvent::new(base, added, removed).expect("points placed relative to base")
}

fn random_rect_event(rng: &mut ChaCha8Rng, index: usize) -> RectEvent {
    if index == 0 {
        return RectEvent::full();
    }
    let fibers = [FiberSet::NONE, FiberSet::ZERO, FiberSet::ONE, FiberSet::BOTH][rng.gen_range(0..4)];
    let allow_point = rng.gen_bool(0.1);
    RectEvent::rect(random_interval(rng, allow_point), fibers)
}

/// `side` G-events and `side` test events `I × S`, deterministic in `seed`.
///
/// G-events are finite unions of intervals times both fibers with points
/// added outside and removed inside; the list starts with the full space,
/// the empty set and a pure point set. Test events start with the full
/// space. Endpoints lie on the `1/10^4` grid.
pub fn standard_battery(side: usize, seed: u64) -> (Vec<GEvent>, Vec<RectEvent>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gs = (0..side).map(|i| random_g_event(&mut rng, i)).collect();
    let as_ = (0..side).map(|i| random_rect_event(&mut rng, i)).collect();
    (gs, as_)
}

/// Exactly `count` pairs drawn from a near-square battery in row-major order.
pub fn battery_pairs(count: usize, seed: u64) -> Vec<(GEvent, RectEvent)> {
    if count == 0 {
        return Vec::new();
    }
    let g_side = (count as f64).sqrt().ceil() as usize;
    let a_side = count.div_ceil(g_side);
    let (gs, _) = standard_battery(g_side, seed);
    let (_, as_) = standard_battery(a_side, seed);
    gs.iter().flat_map(|g| as_.iter().map(move |a| (g.clone(), a.clone()))).take(count).collect()
}

/// `2N` points `(bin k, fiber i) ↦ 2k + i`, with `ρ_N = uniform bins ⊗ m` and
/// the partition into bin pairs `{2k, 2k + 1}`.
pub fn discretized_instance(m0: &Rational, bins: usize) -> Result<(RationalMeasure, FinitePartition), ContinuumError> {
    if m0.is_negative() || *m0 > Rational::one() {
        return Err(ContinuumError::NotAProbability(m0.clone()));
    }
    assert!(bins > 0, "need at least one bin");
    let bin_mass = ratio(1, bins as i64);
    let m1 = Rational::one() - m0;
    let weights = (0..bins).flat_map(|_| [&bin_mass * m0, &bin_mass * &m1]).collect();
    let rho = RationalMeasure::new(weights).expect("weights sum to 1");
    let labels: Vec<usize> = (0..2 * bins).map(|p| p / 2).collect();
    Ok((rho, FinitePartition::from_labels(&labels)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscretizationRow {
    #[serde(rename = "N")]
    pub bins: usize,
    pub conditionally_trivial: bool,
}

/// Conditional triviality of each discretization level.
pub fn discretization_study(m0: &Rational, levels: &[usize]) -> Result<Vec<DiscretizationRow>, ContinuumError> {
    let instances = levels
        .iter()
        .map(|&bins| discretized_instance(m0, bins).map(|inst| (bins, inst)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(instances
        .par_iter()
        .map(|(bins, (rho, g))| DiscretizationRow {
            bins: *bins,
            conditionally_trivial: conditional_triviality(rho, g),
        })
        .collect())
}

impl DiscretizationRow {
    pub fn to_csv(rows: &[Self]) -> String {
        let mut out = String::from("N,conditionally_trivial\n");
        for r in rows {
            out.push_str(&format!("{},{}\n", r.bins, r.conditionally_trivial));
        }
        out
    }
}
