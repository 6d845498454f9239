//! `rcdlab`: single checks on space-description files, seeded campaigns and
//! the continuum demonstration.
//!
//! Exit codes: 0 when every check passes, 1 when a property fails, 2 on
//! invalid input.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rcdlab_core::campaign::{self, CampaignConfig, Reproduction, Suite};
use rcdlab_core::continuum::{self, DiscretizationRow, Theorem7ConsequenceReport};
use rcdlab_core::iterated::{BackwardVerdict, ForwardVerdict};
use rcdlab_core::rational::{is_unit_interval_open, parse_rational, ratio};
use rcdlab_core::space_file::load_space;
use rcdlab_core::{build_iterated, check_rcd, compute_rcd, remark2_equivalence, theorem7_check};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "rcdlab", version, about = "Exact checks for regular conditional distributions")]
struct Cli {
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one suite on a space-description file or a campaign `.repro.json`.
    Check {
        #[arg(long)]
        file: PathBuf,
        /// rcd, remark2, lemma3, theorem7 or uniqueness. Defaults to the
        /// suite recorded in a reproduction file.
        #[arg(long)]
        suite: Option<String>,
        /// Seed for sampled events and perturbations. Defaults to the
        /// recorded seed of a reproduction file, else 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run seeded property suites over random finite instances.
    Campaign {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        max_points: usize,
        /// Comma-separated subset of rcd,remark2,lemma3,theorem7,uniqueness.
        #[arg(long, value_delimiter = ',')]
        suites: Option<Vec<String>>,
        /// Where `.repro.json` files for failures are written.
        #[arg(long, default_value = ".")]
        repro_dir: PathBuf,
    },
    /// The `[0,1] × {0,1}` counterexample and its finite discretizations.
    Remark5 {
        /// Weight m(0) as `p/q`, strictly between 0 and 1.
        #[arg(long)]
        m0: String,
        #[arg(long, default_value_t = 2500)]
        pairs: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,8,64,1024")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        seed: u64,
        /// Also write the discretization table to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// A report plus whether every property held.
struct Outcome {
    report: Value,
    passed: bool,
    text_extra: Option<String>,
}

/// Input problems map to exit code 2, everything else that goes wrong to 1.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        Self(e.into())
    }
}

fn run_check(file: &PathBuf, suite: Option<&str>, seed: Option<u64>) -> Result<Outcome, InputError> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let is_repro = serde_json::from_str::<Value>(&text).is_ok_and(|v| v.get("instance").is_some());
    let (loaded, recorded) = if is_repro {
        let repro = Reproduction::from_json(&text).with_context(|| format!("loading {}", file.display()))?;
        let loaded = repro.instance.validate().with_context(|| format!("loading {}", file.display()))?;
        (loaded, Some((repro.suite, repro.suite_seed)))
    } else {
        (load_space(&text).with_context(|| format!("loading {}", file.display()))?, None)
    };
    let suite: Suite = match (suite, recorded) {
        (Some(name), _) => name.parse()?,
        (None, Some((suite, _))) => suite,
        (None, None) => return Err(InputError(anyhow!("--suite is required for space-description files"))),
    };
    let seed = seed.or(recorded.map(|(_, s)| s)).unwrap_or(0);
    let inst = &loaded.instance;
    let (rho, g) = (&inst.rho, &inst.g);
    let mut rng = campaign::suite_rng(suite, seed);

    let outcome = match suite {
        Suite::Rcd => {
            let kernel = loaded.kernel.clone().unwrap_or_else(|| compute_rcd(rho, g));
            let report = check_rcd(&kernel, rho, g);
            Outcome { passed: report.passed(), report: serde_json::to_value(&report)?, text_extra: None }
        }
        Suite::Remark2 => {
            let v = remark2_equivalence(rho, g);
            let mut report = serde_json::to_value(v)?;
            report["coherent"] = json!(v.coherent());
            Outcome { passed: v.coherent(), report, text_extra: None }
        }
        Suite::Lemma3 => {
            let sweep = campaign::lemma3_sweep(inst, &mut rng, 16, 512);
            let mut report = serde_json::to_value(&sweep)?;
            if let Some((lhs, rhs)) = &sweep.first_mismatch {
                report["mismatch"] = json!({
                    "lhs": rcdlab_core::format_rational(lhs),
                    "rhs": rcdlab_core::format_rational(rhs),
                });
            }
            Outcome { passed: sweep.all_equal && sweep.all_in_product_sigma, report, text_extra: None }
        }
        Suite::Theorem7 => {
            let candidate = build_iterated(rho, g);
            match theorem7_check(rho, g, Some(&candidate)) {
                Ok(report) => {
                    let passed = matches!(report.forward, ForwardVerdict::Passed { .. })
                        && matches!(report.backward, BackwardVerdict::Passed { .. });
                    Outcome { passed, report: serde_json::to_value(&report)?, text_extra: None }
                }
                Err(e) => Outcome { passed: false, report: json!({ "error": e.to_string() }), text_extra: None },
            }
        }
        Suite::Uniqueness if inst.n() < 2 => {
            return Err(InputError(anyhow!("uniqueness needs at least two points to perturb")));
        }
        Suite::Uniqueness => {
            let probe = campaign::uniqueness_probe(inst, &mut rng);
            Outcome { passed: probe.passed(), report: serde_json::to_value(&probe)?, text_extra: None }
        }
    };
    Ok(outcome)
}

fn run_campaign(
    seed: u64,
    trials: usize,
    max_points: usize,
    suites: Option<Vec<String>>,
    repro_dir: PathBuf,
) -> Result<Outcome, InputError> {
    let suites = match suites {
        None => Suite::ALL.to_vec(),
        Some(names) => names.iter().map(|s| s.trim().parse()).collect::<Result<Vec<Suite>, _>>()?,
    };
    let config = CampaignConfig { seed, trials, max_points, suites };
    config.validate()?;
    let report = campaign::run_campaign(&config, Some(&repro_dir)).map_err(|e| InputError(e.into()))?;
    Ok(Outcome { passed: report.all_passed(), report: serde_json::to_value(&report)?, text_extra: None })
}

fn run_remark5(
    m0: &str,
    pairs: usize,
    levels: &[usize],
    seed: u64,
    csv: Option<PathBuf>,
) -> Result<Outcome, InputError> {
    let m0 = parse_rational(m0)?;
    if !is_unit_interval_open(&m0) {
        return Err(InputError(anyhow!("--m0 must lie strictly between 0 and 1 (m would be Dirac)")));
    }
    if pairs == 0 {
        return Err(InputError(anyhow!("--pairs must be at least 1")));
    }
    if levels.iter().any(|&l| l == 0) {
        return Err(InputError(anyhow!("--levels entries must be positive")));
    }
    let battery = continuum::battery_pairs(pairs, seed);
    let identity = continuum::remark5_identity_check_pairs(&m0, &battery)?;
    let x = ratio(1, 2);
    let failure = continuum::triviality_failure(&m0, &x)?;
    let consequence = Theorem7ConsequenceReport::from_evidence(&identity, x, failure);
    let rows = continuum::discretization_study(&m0, levels)?;
    let table = DiscretizationRow::to_csv(&rows);
    if let Some(path) = csv {
        std::fs::write(&path, &table).with_context(|| format!("writing {}", path.display()))?;
    }

    let passed = identity.all_exact
        && rows.iter().all(|r| r.conditionally_trivial)
        && consequence.theorem7_conclusion == continuum::NONEXISTENCE_CONCLUSION;
    let mut report = serde_json::to_value(&consequence)?;
    report["discretization"] = serde_json::to_value(&rows)?;
    if !identity.mismatches.is_empty() {
        report["mismatches"] = serde_json::to_value(&identity.mismatches)?;
    }
    Ok(Outcome { report, passed, text_extra: Some(table) })
}

fn render_text(value: &Value, prefix: &str, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_text(v, &key, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                render_text(v, &format!("{prefix}[{i}]"), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

fn emit(outcome: &Outcome, format: Format) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&outcome.report).expect("report serializes")),
        Format::Text => {
            let mut text = String::new();
            render_text(&outcome.report, "", &mut text);
            if let Some(extra) = &outcome.text_extra {
                text.push('\n');
                text.push_str(extra);
            }
            text.push_str(&format!("result: {}\n", if outcome.passed { "pass" } else { "FAIL" }));
            out.write_all(text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, suite, seed } => run_check(&file, suite.as_deref(), seed),
        Command::Campaign { seed, trials, max_points, suites, repro_dir } => {
            run_campaign(seed, trials, max_points, suites, repro_dir)
        }
        Command::Remark5 { m0, pairs, levels, seed, csv } => run_remark5(&m0, pairs, &levels, seed, csv),
    };
    match result {
        Ok(outcome) => {
            // a closed pipe (`| head`) is not an error worth reporting
            if let Err(e) = emit(&outcome, cli.format) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: writing report: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
