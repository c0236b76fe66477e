//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on domain errors (reported with the error's
//! variant name), 2 on usage errors including unreadable or malformed input
//! files.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::Error;
use crate::evaluator::{
    conditional_expected_cost_with, expected_cost_with, monte_carlo_cost, EvalOptions, OutcomeCondition,
};
use crate::model::{Branch, JobId, ObjectiveKind, Rational, SchedInstance, DEFAULT_ENUM_CAP};
use crate::optimal::{binary_search_optimum_with, optimal_expected_cost_with, DpOptions, DEFAULT_DP_CAP};
use crate::policy::PriorityRule;
use crate::reduction::{
    build_sept_pair, build_wsept_pair, count_knapsack_bruteforce, optimal_mode_q, restrict_knapsack,
    verify_lemmas_with, KnapsackInstance, PipelineOptions, ReductionMode,
};

#[derive(Debug, Parser)]
#[command(name = "stosched", version, about = "Exact stochastic scheduling analysis and counting reductions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Most two-point jobs to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUM_CAP)]
    pub max_enum: usize,
    /// Most jobs the dynamic program accepts.
    #[arg(long, global = true, default_value_t = DEFAULT_DP_CAP)]
    pub max_dp: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Start,
    Completion,
}

impl From<Objective> for ObjectiveKind {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Start => ObjectiveKind::StartTimes,
            Objective::Completion => ObjectiveKind::CompletionTimes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Wsept,
    Sept,
    Optimal,
}

impl From<Mode> for ReductionMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Wsept => ReductionMode::Wsept,
            Mode::Sept => ReductionMode::Sept,
            Mode::Optimal => ReductionMode::Optimal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Via {
    Bruteforce,
    Wsept,
    Sept,
    Optimal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expected cost of a list policy.
    Evaluate {
        instance: PathBuf,
        /// sept, wsept, spt, or custom:ID,ID,...
        #[arg(long, value_parser = parse_policy)]
        policy: PriorityRule,
        #[arg(long, value_enum, default_value_t = Objective::Start)]
        objective: Objective,
        /// Fix job outcomes, e.g. `3=hi,4=lo`; repeatable.
        #[arg(long, value_parser = parse_condition, action = clap::ArgAction::Append)]
        condition: Vec<Vec<(JobId, Branch)>>,
        /// Include the per-realization cost table.
        #[arg(long)]
        per_realization: bool,
        /// Estimate by sampling instead of enumerating (requires --seed).
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Optimal expected cost over non-idling adaptive policies.
    Optimal {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Objective::Start)]
        objective: Objective,
        #[arg(long)]
        emit_policy_tree: bool,
    },
    /// Build the paired scheduling instances for a knapsack instance.
    BuildPair {
        knapsack: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Blocker probability (Bernoulli-blocker modes only).
        #[arg(long)]
        q: Option<Rational>,
    },
    /// Count feasible knapsack subsets.
    Count {
        knapsack: PathBuf,
        #[arg(long, value_enum, default_value_t = Via::Bruteforce)]
        via: Via,
    },
    /// Check the structural claims of a reduction numerically.
    Verify {
        knapsack: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Recover the optimum by bisection on the threshold oracle.
    Search {
        instance: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: Rational,
        #[arg(long)]
        hi: Rational,
        #[arg(long)]
        granularity: Rational,
        #[arg(long, value_enum, default_value_t = Objective::Start)]
        objective: Objective,
    },
}

fn parse_policy(s: &str) -> Result<PriorityRule, String> {
    match s.to_ascii_lowercase().as_str() {
        "sept" => Ok(PriorityRule::Sept),
        "wsept" => Ok(PriorityRule::Wsept),
        "spt" => Ok(PriorityRule::Spt),
        other => {
            let list = other
                .strip_prefix("custom:")
                .ok_or_else(|| format!("unknown policy `{s}` (expected sept, wsept, spt or custom:ID,...)"))?;
            list.split(',')
                .map(|x| x.trim().parse::<JobId>().map_err(|_| format!("bad job id `{x}`")))
                .collect::<Result<Vec<_>, _>>()
                .map(PriorityRule::Custom)
        }
    }
}

fn parse_condition(s: &str) -> Result<Vec<(JobId, Branch)>, String> {
    s.split(',')
        .map(|part| {
            let (id, branch) = part.split_once('=').ok_or_else(|| format!("expected ID=lo|hi, got `{part}`"))?;
            let id = id.trim().parse::<JobId>().map_err(|_| format!("bad job id `{id}`"))?;
            let branch = match branch.trim().to_ascii_lowercase().as_str() {
                "lo" | "short" => Branch::Lo,
                "hi" | "long" => Branch::Hi,
                b => return Err(format!("bad branch `{b}` (expected lo or hi)")),
            };
            Ok((id, branch))
        })
        .collect()
}

/// Domain failure or usage failure, mapped to exit codes 1 and 2.
enum Failure {
    Domain(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<SchedInstance, Failure> {
    SchedInstance::from_json(&read_file(path)?)
        .map_err(|e| Failure::Usage(format!("malformed instance {}: {e}", path.display())))
}

fn load_knapsack(path: &Path) -> Result<KnapsackInstance, Failure> {
    KnapsackInstance::from_json(&read_file(path)?)
        .map_err(|e| Failure::Usage(format!("malformed knapsack instance {}: {e}", path.display())))
}

fn pretty(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

fn unsupported(cmd: &str, format: Format) -> Failure {
    Failure::Usage(format!("`{cmd}` does not support --format {format:?}").to_lowercase())
}

fn execute(cli: &Cli) -> Result<String, Failure> {
    let g = &cli.global;
    let eval = EvalOptions { max_enum: g.max_enum, ..EvalOptions::default() };
    let dp = DpOptions { max_jobs: g.max_dp, ..DpOptions::default() };
    let pipeline = PipelineOptions { eval: eval.clone(), dp: dp.clone() };

    match &cli.command {
        Command::Evaluate { instance, policy, objective, condition, per_realization, samples, seed } => {
            let inst = load_instance(instance)?;
            let obj = ObjectiveKind::from(*objective);
            if let Some(samples) = samples {
                let seed = seed.ok_or_else(|| Failure::Usage("--samples requires --seed".into()))?;
                if g.format == Format::Csv {
                    return Err(unsupported("evaluate --samples", g.format));
                }
                let est = monte_carlo_cost(&inst, policy, obj, *samples, seed)?;
                return Ok(match g.format {
                    Format::Text => format!(
                        "approximate mean {} (= {}) ± {} from {} samples, seed {}\n",
                        est.mean_f64, est.mean, est.std_error, est.samples, est.seed
                    ),
                    _ => pretty(&est),
                });
            }
            if !condition.is_empty() {
                if *per_realization || g.format == Format::Csv {
                    return Err(Failure::Usage("--condition cannot be combined with a per-realization table".into()));
                }
                let cond = OutcomeCondition::new(condition.iter().flatten().copied());
                let value = conditional_expected_cost_with(&inst, policy, obj, &cond, &eval)?;
                return Ok(match g.format {
                    Format::Text => format!("conditional expected cost {value}\n"),
                    _ => pretty(&json!({ "total": value, "condition": cond.fixed })),
                });
            }
            let opts = EvalOptions { per_realization: *per_realization || g.format == Format::Csv, ..eval };
            let breakdown = expected_cost_with(&inst, policy, obj, &opts)?;
            Ok(match g.format {
                Format::Json => breakdown.to_json(),
                Format::Csv => breakdown.to_csv(),
                Format::Text => {
                    let mut s = format!("expected cost {}\n", breakdown.total);
                    for (id, c) in &breakdown.per_job {
                        s.push_str(&format!("  job {id}: {c}\n"));
                    }
                    s
                }
            })
        }

        Command::Optimal { instance, objective, emit_policy_tree } => {
            let inst = load_instance(instance)?;
            let (value, tree) = optimal_expected_cost_with(&inst, (*objective).into(), &dp)?;
            Ok(match g.format {
                Format::Json => {
                    let mut report = json!({ "value": value, "scope": tree.scope });
                    if *emit_policy_tree {
                        report["policy_tree"] = serde_json::to_value(&tree.root).expect("tree serializes");
                    }
                    pretty(&report)
                }
                Format::Text => format!("optimal expected cost {value} ({})\n", tree.scope),
                Format::Csv => return Err(unsupported("optimal", g.format)),
            })
        }

        Command::BuildPair { knapsack, mode, q } => {
            let kp = load_knapsack(knapsack)?;
            if g.format != Format::Json {
                return Err(unsupported("build-pair", g.format));
            }
            let report = match mode {
                Mode::Wsept => {
                    if q.is_some() {
                        return Err(Failure::Usage("--q applies only to sept and optimal modes".into()));
                    }
                    let (a, b) = build_wsept_pair(&kp)?;
                    json!({ "mode": ReductionMode::Wsept, "instance1": a, "instance2": b })
                }
                Mode::Sept | Mode::Optimal => {
                    let (eff, adjustment) = restrict_knapsack(&kp)?;
                    let q = match (mode, q) {
                        (_, Some(q)) => Some(q.clone()),
                        (Mode::Optimal, None) => Some(optimal_mode_q(&eff)),
                        _ => None,
                    };
                    let (a, b, q) = build_sept_pair(&eff, q)?;
                    json!({
                        "mode": ReductionMode::from(*mode),
                        "q": q,
                        "transform_applied": adjustment > 0,
                        "adjustment": adjustment,
                        "knapsack": eff,
                        "instance1": a,
                        "instance2": b,
                    })
                }
            };
            Ok(pretty(&report))
        }

        Command::Count { knapsack, via } => {
            let kp = load_knapsack(knapsack)?;
            if g.format == Format::Csv {
                return Err(unsupported("count", g.format));
            }
            let (feasible, body) = match via {
                Via::Bruteforce => {
                    let f = count_knapsack_bruteforce(&kp)?;
                    (f, json!({ "via": "bruteforce", "n": kp.n(), "feasible": f, "infeasible": (1u64 << kp.n()) - f }))
                }
                Via::Wsept | Via::Sept | Via::Optimal => {
                    let mode = match via {
                        Via::Wsept => ReductionMode::Wsept,
                        Via::Sept => ReductionMode::Sept,
                        _ => ReductionMode::Optimal,
                    };
                    let r = crate::reduction::count_via_policy_with(&kp, mode, &pipeline)?;
                    (r.feasible, serde_json::to_value(&r).expect("report serializes"))
                }
            };
            Ok(match g.format {
                Format::Text => format!("feasible {feasible}\n"),
                _ => pretty(&body),
            })
        }

        Command::Verify { knapsack, mode } => {
            let kp = load_knapsack(knapsack)?;
            let report = verify_lemmas_with(&kp, (*mode).into(), &pipeline)?;
            Ok(match g.format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
                Format::Csv => return Err(unsupported("verify", g.format)),
            })
        }

        Command::Search { instance, lo, hi, granularity, objective } => {
            let inst = load_instance(instance)?;
            let out = binary_search_optimum_with(&inst, (*objective).into(), lo, hi, granularity, &dp)?;
            Ok(match g.format {
                Format::Json => pretty(&out),
                Format::Text => format!("optimum {} after {} oracle calls\n", out.value, out.oracle_calls),
                Format::Csv => return Err(unsupported("search", g.format)),
            })
        }
    }
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Reports go to `out` (or `--out`), diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };

    let result = match cli.global.threads {
        Some(0) => Err(Failure::Usage("--threads must be positive".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Failure::Usage(format!("cannot start thread pool: {e}"))),
        },
        None => execute(&cli),
    };

    match result {
        Ok(report) => {
            let report = with_newline(report);
            match &cli.global.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, report) {
                        let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                        return 2;
                    }
                }
                None => {
                    let _ = out.write_all(report.as_bytes());
                }
            }
            0
        }
        Err(Failure::Domain(e)) => {
            let _ = writeln!(err, "error: {}: {e}", e.name());
            1
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "usage error: {msg}");
            2
        }
    }
}
