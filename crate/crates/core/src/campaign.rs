//! Seeded property campaigns over random finite instances.
//!
//! Each trial draws its own generator from a seed derived from the campaign
//! seed and the trial index, so trials can run in any order (or in parallel)
//! and still produce the same report.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iterated::{
    build_iterated, in_product_sigma, lemma3_lhs, lemma3_rhs, theorem7_check, BackwardVerdict, ForwardVerdict,
    ProductEvent,
};
use crate::measurable::{FinitePartition, RationalMeasure};
use crate::rational::{format_rational, ratio, Rational};
use crate::rcd::{
    check_rcd, compute_rcd, conditional_triviality, essentially_equal, remark2_equivalence, universal_conditioner,
};
use crate::space_file::{Instance, SpaceDescription, SpaceFileError};

/// Weight denominators of generated measures never exceed this.
pub const MAX_DENOMINATOR: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Rcd,
    Remark2,
    Lemma3,
    Theorem7,
    Uniqueness,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Rcd, Suite::Remark2, Suite::Lemma3, Suite::Theorem7, Suite::Uniqueness];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Rcd => "rcd",
            Suite::Remark2 => "remark2",
            Suite::Lemma3 => "lemma3",
            Suite::Theorem7 => "theorem7",
            Suite::Uniqueness => "uniqueness",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CampaignError {
    #[error("unknown suite {0:?} (expected one of rcd, remark2, lemma3, theorem7, uniqueness)")]
    UnknownSuite(String),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("max_points must lie in 2..=64, got {0}")]
    MaxPoints(usize),
    #[error("no suites selected")]
    NoSuites,
}

impl FromStr for Suite {
    type Err = CampaignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|suite| suite.name() == s).ok_or_else(|| CampaignError::UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CampaignConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_points: usize,
    pub suites: Vec<Suite>,
}

impl CampaignConfig {
    pub fn new(seed: u64, trials: usize) -> Self {
        Self { seed, trials, max_points: 10, suites: Suite::ALL.to_vec() }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.trials == 0 {
            return Err(CampaignError::NoTrials);
        }
        if !(2..=64).contains(&self.max_points) {
            return Err(CampaignError::MaxPoints(self.max_points));
        }
        if self.suites.is_empty() {
            return Err(CampaignError::NoSuites);
        }
        Ok(())
    }
}

/// splitmix64 finalizer over `seed` and `index`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A measure on `n` points with weights `c_i / d`, `d ≤ 64`. About half the
/// draws give every point positive mass; the rest usually leave some points
/// (and often whole blocks) null.
pub fn random_measure(rng: &mut impl Rng, n: usize) -> RationalMeasure {
    let d = rng.gen_range(1..=MAX_DENOMINATOR) as usize;
    let mut counts = vec![0i64; n];
    let mut remaining = d;
    if d >= n && rng.gen_bool(0.5) {
        counts.iter_mut().for_each(|c| *c = 1);
        remaining -= n;
    }
    for _ in 0..remaining {
        counts[rng.gen_range(0..n)] += 1;
    }
    RationalMeasure::new(counts.into_iter().map(|c| ratio(c, d as i64)).collect()).expect("counts sum to d")
}

/// Each point gets a label in `0..k` for a random `k`; equal labels share a block.
pub fn random_partition(rng: &mut impl Rng, n: usize) -> FinitePartition {
    let k = rng.gen_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
    FinitePartition::from_labels(&labels)
}

pub fn random_instance(rng: &mut impl Rng, max_points: usize) -> Instance {
    let n = rng.gen_range(2..=max_points.max(2));
    let g = random_partition(rng, n);
    let rho = random_measure(rng, n);
    Instance { rho, g }
}

/// A random member of `G ⊗ Σ`: a union of rectangles `block × {a}`.
pub fn random_product_event(rng: &mut impl Rng, g: &FinitePartition) -> ProductEvent {
    let n = g.space_size();
    let chosen: Vec<bool> = (0..g.num_blocks() * n).map(|_| rng.gen_bool(0.5)).collect();
    ProductEvent::from_fn(n, |x, y| chosen[g.block_index(x) * n + y])
}

/// Instance for trial `trial` of a campaign seeded with `seed`.
pub fn trial_instance(seed: u64, trial: usize, max_points: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, trial as u64));
    random_instance(&mut rng, max_points)
}

/// The generator a suite draws its extra randomness from.
pub fn suite_rng(suite: Suite, seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, suite as u64 + 1000))
}

/// Runs one suite. `seed` drives any extra randomness the suite needs
/// (sampled events, perturbations), so the verdict is a function of
/// `(suite, instance, seed)` alone.
pub fn run_suite(suite: Suite, inst: &Instance, seed: u64) -> Result<(), String> {
    let mut rng = suite_rng(suite, seed);
    let Instance { rho, g } = inst;
    match suite {
        Suite::Rcd => {
            let k = compute_rcd(rho, g);
            let report = check_rcd(&k, rho, g);
            if !report.passed() {
                return Err(format!("canonical rcd rejected: {report:?}"));
            }
            let from_conditioner = universal_conditioner(g).kernel_for(rho);
            if from_conditioner != k {
                return Err("universal conditioner disagrees with the canonical rcd".into());
            }
            if !check_rcd(&from_conditioner, rho, g).passed() {
                return Err("universal conditioner kernel rejected".into());
            }
            if !conditional_triviality(rho, g) {
                return Err("finite instance is not conditionally trivial".into());
            }
            Ok(())
        }
        Suite::Remark2 => {
            let v = remark2_equivalence(rho, g);
            if v.coherent() {
                Ok(())
            } else {
                Err(format!("triviality clauses disagree: {v:?}"))
            }
        }
        Suite::Lemma3 => {
            let sweep = lemma3_sweep(inst, &mut rng, 0, 4);
            match sweep.first_mismatch {
                None if sweep.all_in_product_sigma => Ok(()),
                None => Err("sampled event is not in G⊗Σ".into()),
                Some(m) => {
                    Err(format!("diagonal identity fails: lhs {} rhs {}", format_rational(&m.0), format_rational(&m.1)))
                }
            }
        }
        Suite::Theorem7 => {
            let candidate = build_iterated(rho, g);
            let report = theorem7_check(rho, g, Some(&candidate)).map_err(|e| e.to_string())?;
            if !matches!(report.forward, ForwardVerdict::Passed { .. }) {
                return Err("forward direction did not run".into());
            }
            if !matches!(report.backward, BackwardVerdict::Passed { .. }) {
                return Err(format!("backward direction did not run: {:?}", report.backward));
            }
            match &report.diagonal_mass {
                Some(m) if m.is_one() => Ok(()),
                other => Err(format!("agreement set mass {other:?}")),
            }
        }
        Suite::Uniqueness => uniqueness_probe(inst, &mut rng).verdict(),
    }
}

fn random_measure_other_than(rng: &mut impl Rng, n: usize, avoid: &RationalMeasure) -> RationalMeasure {
    loop {
        let m = random_measure(rng, n);
        if m != *avoid {
            return m;
        }
    }
}

/// Outcome of perturbing the canonical rcd on null atoms and on one
/// positive-mass atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UniquenessProbe {
    pub null_atoms_perturbed: usize,
    pub null_perturbation_is_rcd: bool,
    pub null_perturbation_essentially_equal: bool,
    pub positive_perturbation_breaks_identity: bool,
    pub positive_perturbation_essentially_equal: bool,
}

impl UniquenessProbe {
    pub fn passed(&self) -> bool {
        self.null_perturbation_is_rcd
            && self.null_perturbation_essentially_equal
            && self.positive_perturbation_breaks_identity
            && !self.positive_perturbation_essentially_equal
    }

    fn verdict(&self) -> Result<(), String> {
        if self.passed() {
            Ok(())
        } else {
            Err(format!("uniqueness probe failed: {self:?}"))
        }
    }
}

/// Replaces the rows of every null block by a random measure (constant on
/// the block), then separately replaces the rows of one random positive-mass
/// block by a different measure.
pub fn uniqueness_probe(inst: &Instance, rng: &mut impl Rng) -> UniquenessProbe {
    let Instance { rho, g } = inst;
    let n = inst.n();
    let k = compute_rcd(rho, g);

    let mut on_null = k.clone();
    let mut null_atoms_perturbed = 0;
    for b in g.blocks().iter().filter(|b| rho.mass_of(b).is_zero()) {
        let replacement = random_measure(rng, n);
        for &x in b {
            on_null = on_null.with_row(x, replacement.clone());
        }
        null_atoms_perturbed += 1;
    }

    let positive: Vec<&Vec<usize>> = g.blocks().iter().filter(|b| !rho.mass_of(b).is_zero()).collect();
    let block = positive[rng.gen_range(0..positive.len())];
    let replacement = random_measure_other_than(rng, n, k.row(block[0]));
    let mut on_positive = k.clone();
    for &x in block {
        on_positive = on_positive.with_row(x, replacement.clone());
    }

    UniquenessProbe {
        null_atoms_perturbed,
        null_perturbation_is_rcd: check_rcd(&on_null, rho, g).passed(),
        null_perturbation_essentially_equal: essentially_equal(&k, &on_null, rho),
        positive_perturbation_breaks_identity: !check_rcd(&on_positive, rho, g).identity_holds,
        positive_perturbation_essentially_equal: essentially_equal(&k, &on_positive, rho),
    }
}

/// Result of comparing both sides of the diagonal identity on many events.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma3Sweep {
    pub events_checked: usize,
    pub exhaustive: bool,
    pub all_in_product_sigma: bool,
    #[serde(skip)]
    pub first_mismatch: Option<(Rational, Rational)>,
    pub all_equal: bool,
}

/// Compares both sides of the diagonal identity on members of `G ⊗ Σ`.
/// When `G ⊗ Σ` has at most `2^max_exhaustive_bits` members every one is
/// checked; otherwise `samples` random members are drawn.
pub fn lemma3_sweep(inst: &Instance, rng: &mut impl Rng, max_exhaustive_bits: u32, samples: usize) -> Lemma3Sweep {
    let Instance { rho, g } = inst;
    let n = inst.n();
    let k = compute_rcd(rho, g);
    let singletons = FinitePartition::singletons(n);
    let bits = g.num_blocks() * n;
    let exhaustive = bits as u32 <= max_exhaustive_bits;
    let events: Box<dyn Iterator<Item = ProductEvent>> = if exhaustive {
        Box::new(
            (0..1u64 << bits)
                .map(move |mask| ProductEvent::from_fn(n, |x, y| mask >> (g.block_index(x) * n + y) & 1 == 1)),
        )
    } else {
        let sampled: Vec<ProductEvent> = (0..samples).map(|_| random_product_event(rng, g)).collect();
        Box::new(sampled.into_iter())
    };
    let mut events_checked = 0;
    let mut all_in_product_sigma = true;
    let mut first_mismatch = None;
    for e in events {
        events_checked += 1;
        all_in_product_sigma &= in_product_sigma(&e, g, &singletons);
        let (lhs, rhs) = (lemma3_lhs(&e, rho), lemma3_rhs(&e, &k, rho));
        if lhs != rhs && first_mismatch.is_none() {
            first_mismatch = Some((lhs, rhs));
        }
    }
    Lemma3Sweep {
        events_checked,
        exhaustive,
        all_in_product_sigma,
        all_equal: first_mismatch.is_none(),
        first_mismatch,
    }
}

/// Drops point `p`, renormalizing the remaining weights.
fn remove_point(inst: &Instance, p: usize) -> Option<Instance> {
    let n = inst.n();
    if n <= 1 {
        return None;
    }
    let rest: Vec<Rational> =
        inst.rho.weights().iter().enumerate().filter(|&(i, _)| i != p).map(|(_, w)| w.clone()).collect();
    let total: Rational = rest.iter().sum();
    if total.is_zero() {
        return None;
    }
    let rho = RationalMeasure::new(rest.into_iter().map(|w| w / &total).collect()).ok()?;
    let labels: Vec<usize> = (0..n).filter(|&i| i != p).map(|i| inst.g.block_index(i)).collect();
    Some(Instance { rho, g: FinitePartition::from_labels(&labels) })
}

fn merge_blocks(inst: &Instance, a: usize, b: usize) -> Instance {
    let labels: Vec<usize> = (0..inst.n())
        .map(|x| {
            let l = inst.g.block_index(x);
            if l == b {
                a
            } else {
                l
            }
        })
        .collect();
    Instance { rho: inst.rho.clone(), g: FinitePartition::from_labels(&labels) }
}

fn uniform_on(n: usize, support: &[usize]) -> RationalMeasure {
    let w = ratio(1, support.len() as i64);
    let weights = (0..n).map(|i| if support.contains(&i) { w.clone() } else { Rational::zero() }).collect();
    RationalMeasure::new(weights).expect("uniform weights sum to 1")
}

fn simplify_weights(inst: &Instance) -> Vec<Instance> {
    let n = inst.n();
    let support: Vec<usize> = inst.rho.support().collect();
    let mut out = vec![Instance { rho: uniform_on(n, &support), g: inst.g.clone() }];
    if support.len() < n {
        out.push(Instance { rho: RationalMeasure::uniform(n), g: inst.g.clone() });
    }
    out.retain(|c| c.rho != inst.rho);
    out
}

/// Greedy shrinking: remove points, merge blocks, simplify weights, keeping
/// any change under which `fails` still holds, until nothing applies.
pub fn shrink(inst: &Instance, fails: impl Fn(&Instance) -> bool) -> Instance {
    let mut current = inst.clone();
    loop {
        let mut candidates: Vec<Instance> = (0..current.n()).filter_map(|p| remove_point(&current, p)).collect();
        let blocks = current.g.num_blocks();
        for a in 0..blocks {
            for b in a + 1..blocks {
                candidates.push(merge_blocks(&current, a, b));
            }
        }
        candidates.extend(simplify_weights(&current));
        match candidates.into_iter().find(|c| fails(c)) {
            Some(smaller) => current = smaller,
            None => return current,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteSummary {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub suite: Suite,
    pub detail: String,
    pub shrunk_points: usize,
    pub repro_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: usize,
    pub max_points: usize,
    pub suites: Vec<SuiteSummary>,
    pub failures: Vec<FailureRecord>,
}

impl CampaignReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Contents of a `.repro.json` file. Replaying `suite` on `instance` with
/// `suite_seed` reproduces the failure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reproduction {
    pub suite: Suite,
    pub seed: u64,
    pub trial: usize,
    pub suite_seed: u64,
    pub detail: String,
    pub instance: SpaceDescription,
}

impl Reproduction {
    pub fn from_json(text: &str) -> Result<Self, SpaceFileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn replay(&self) -> Result<Result<(), String>, SpaceFileError> {
        let loaded = self.instance.validate()?;
        Ok(run_suite(self.suite, &loaded.instance, self.suite_seed))
    }
}

pub fn repro_file_name(seed: u64, trial: usize, suite: Suite) -> String {
    format!("campaign-{seed}-trial{trial}-{suite}.repro.json")
}

/// Runs every trial, shrinking failures and writing one reproduction file per
/// failure into `repro_dir` (when given).
pub fn run_campaign(config: &CampaignConfig, repro_dir: Option<&Path>) -> Result<CampaignReport, std::io::Error> {
    run_campaign_with(config, repro_dir, run_suite)
}

/// [`run_campaign`] with a substitute suite runner, for exercising the
/// failure path.
pub fn run_campaign_with(
    config: &CampaignConfig,
    repro_dir: Option<&Path>,
    runner: impl Fn(Suite, &Instance, u64) -> Result<(), String> + Sync,
) -> Result<CampaignReport, std::io::Error> {
    let per_trial: Vec<Vec<(Suite, Result<(), String>, Instance, u64)>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let inst = trial_instance(config.seed, trial, config.max_points);
            let suite_seed = derive_seed(config.seed, trial as u64);
            config
                .suites
                .iter()
                .map(|&suite| (suite, runner(suite, &inst, suite_seed), inst.clone(), suite_seed))
                .collect()
        })
        .collect();

    let mut summaries: Vec<SuiteSummary> =
        config.suites.iter().map(|&suite| SuiteSummary { suite, passed: 0, failed: 0 }).collect();
    let mut failures = Vec::new();
    for (trial, outcomes) in per_trial.into_iter().enumerate() {
        for (i, (suite, outcome, inst, suite_seed)) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(()) => summaries[i].passed += 1,
                Err(detail) => {
                    summaries[i].failed += 1;
                    let shrunk = shrink(&inst, |c| runner(suite, c, suite_seed).is_err());
                    let detail = runner(suite, &shrunk, suite_seed).err().unwrap_or(detail);
                    let repro_file = match repro_dir {
                        Some(dir) => {
                            let path: PathBuf = dir.join(repro_file_name(config.seed, trial, suite));
                            let repro = Reproduction {
                                suite,
                                seed: config.seed,
                                trial,
                                suite_seed,
                                detail: detail.clone(),
                                instance: shrunk.to_description(),
                            };
                            std::fs::write(&path, serde_json::to_string_pretty(&repro).expect("serializable"))?;
                            Some(path.display().to_string())
                        }
                        None => None,
                    };
                    failures.push(FailureRecord { trial, suite, detail, shrunk_points: shrunk.n(), repro_file });
                }
            }
        }
    }
    Ok(CampaignReport {
        seed: config.seed,
        trials: config.trials,
        max_points: config.max_points,
        suites: summaries,
        failures,
    })
}
