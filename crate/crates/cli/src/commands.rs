use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mico_core::branchcut::Strategy;
use mico_core::infolab::{
    approx_centerpoint, centerpoint_strategy_run, match_log_csv, run_adversary_match, StrategyKind,
};
use mico_core::model::{Objective, TAU_FEAS};
use mico_core::solver::{
    ellipsoid_continuous, feasibility_with_stats, optimize, pure_integer_optimize,
    FeasibilityResult, OptimizeResult,
};

use crate::instance::{load_instance, Instance};
use crate::suites::{self, bnc_row, Suite, SuiteConfig, SuiteOutput, Table, BNC_HEADER};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MICO_OUT_DIR";

#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<mico_core::Error> for CliError {
    fn from(e: mico_core::Error) -> Self {
        CliError {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            code: "E_IO",
            message: e.to_string(),
        }
    }
}

fn check_failed(message: String) -> CliError {
    CliError {
        code: "E_CHECK",
        message,
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: "E_USAGE",
        message: message.into(),
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "mico",
    version,
    about = "Oracle-based mixed-integer convex optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Instance file, or a generator spec such as `jeroslow 6` or `triangle 5`.
    #[arg(long)]
    pub instance: Option<String>,
    /// Output file (or directory for `bench`); defaults to $MICO_OUT_DIR, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Membership tolerance used when checking returned points.
    #[arg(long, default_value_t = TAU_FEAS)]
    pub tol_feas: f64,
    /// Record wall-clock times in CSV output (breaks byte-identical reruns).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mixed-integer feasibility: a point or a no-deep-point verdict.
    Feas(Common),
    /// Binary-search optimization to eps.
    Opt(Common),
    /// Continuous ellipsoid method (n = 0).
    Ellipsoid(Common),
    /// Exact pure-integer optimization (d = 0).
    Intopt(Common),
    /// Branch-and-cut on a polyhedral instance with a linear objective.
    Bnc {
        #[command(flatten)]
        common: Common,
        /// bb, cg, hybrid or disj.
        #[arg(long, default_value = "bb")]
        strategy: String,
        #[arg(long, default_value_t = 100_000)]
        max_nodes: usize,
    },
    /// Play a query strategy against the resisting oracle; writes the match log.
    Adversary {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 8.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.125)]
        rho: f64,
        /// centerpoint, bisection or random.
        #[arg(long, default_value = "centerpoint")]
        strategy: String,
        /// In-box queries before stopping; defaults to floor(d 2^n log2(R/(3 rho))) - 1.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 24)]
        grid_res: usize,
    },
    /// Approximate centerpoint of the instance body, or with --optimize the
    /// centerpoint query strategy on its objective.
    Centerpoint {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 24)]
        grid_res: usize,
        #[arg(long)]
        optimize: bool,
    },
    /// Run experiment suites and write CSV plus plot data.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Suite name or `all`.
        #[arg(default_value = "all")]
        suite: String,
        /// Jeroslow sizes: `4..12` (inclusive) or a comma list.
        #[arg(long)]
        n: Option<String>,
        /// Triangle heights: `4,8,16` or `1..8`.
        #[arg(long)]
        h: Option<String>,
        #[arg(long, default_value_t = 24)]
        grid_res: usize,
        #[arg(long, default_value_t = 100_000)]
        max_nodes: usize,
    },
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_sizes(s: &str) -> CliResult<Vec<usize>> {
    let bad = || usage(format!("bad size list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn need_instance(c: &Common) -> CliResult<Instance> {
    let spec = c
        .instance
        .as_deref()
        .ok_or_else(|| usage("this command needs --instance"))?;
    Ok(load_instance(spec)?)
}

fn need_objective(inst: &Instance) -> CliResult<&Objective> {
    inst.objective
        .as_ref()
        .ok_or_else(|| usage("this command needs an `objective` line"))
}

fn join_point(z: &nalgebra::DVector<f64>) -> String {
    z.iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn out_target(c: &Common, default_name: &str) -> Option<PathBuf> {
    c.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| Path::new(&d).join(default_name)))
}

/// Writes `text` to the configured destination, or returns it for stdout.
fn emit(c: &Common, name: &str, text: String) -> CliResult<String> {
    match out_target(c, name) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

fn verify_point(inst: &Instance, z: &nalgebra::DVector<f64>, tol: f64) -> CliResult<()> {
    let integral = (0..inst.params.n).all(|i| z[i].fract() == 0.0);
    if !integral || !inst.body.separate_tol(z, tol)?.is_inside() {
        return Err(check_failed(format!(
            "returned point {} fails the membership check",
            join_point(z)
        )));
    }
    Ok(())
}

fn optimize_csv(
    c: &Common,
    inst: &Instance,
    name: &str,
    res: &OptimizeResult,
) -> CliResult<String> {
    let mut t = Table::new(&[
        "instance",
        "verdict",
        "value",
        "point",
        "feasibility_calls",
        "separation_queries",
        "first_order_queries",
        "updates",
        "nodes",
    ]);
    let (verdict, value, point) = match (res.value(), res.point()) {
        (Some(v), Some(z)) => {
            verify_point(inst, z, c.tol_feas)?;
            (
                "EpsOptimal",
                format!("{:?}", inst.reported(v)),
                join_point(z),
            )
        }
        _ => ("NoDeepOptimum", String::new(), String::new()),
    };
    let s = &res.stats;
    t.push(vec![
        inst.name.clone(),
        verdict.into(),
        value,
        point,
        s.feasibility_calls.to_string(),
        s.separation_queries.to_string(),
        s.first_order_queries.to_string(),
        s.updates.to_string(),
        s.nodes.to_string(),
    ]);
    emit(c, name, t.to_csv())
}

/// Runs one command; the returned text goes to stdout.
pub fn run(cli: Cli) -> CliResult<String> {
    match cli.command {
        Command::Feas(c) => {
            let inst = need_instance(&c)?;
            let (res, stats) = feasibility_with_stats(&inst.body, &inst.params)?;
            let (verdict, point) = match &res {
                FeasibilityResult::FoundPoint(z) => {
                    verify_point(&inst, z, c.tol_feas)?;
                    ("FoundPoint", join_point(z))
                }
                FeasibilityResult::NoDeepPoint => ("NoDeepPoint", String::new()),
            };
            let mut t = Table::new(&[
                "instance",
                "verdict",
                "point",
                "separation_queries",
                "updates",
                "nodes",
            ]);
            t.push(vec![
                inst.name.clone(),
                verdict.into(),
                point,
                stats.separation_queries.to_string(),
                stats.updates.to_string(),
                stats.nodes.to_string(),
            ]);
            emit(&c, "feas.csv", t.to_csv())
        }
        Command::Opt(c) => {
            let inst = need_instance(&c)?;
            let res = optimize(&inst.body, need_objective(&inst)?, &inst.params)?;
            optimize_csv(&c, &inst, "opt.csv", &res)
        }
        Command::Ellipsoid(c) => {
            let inst = need_instance(&c)?;
            let res = ellipsoid_continuous(&inst.body, need_objective(&inst)?, &inst.params)?;
            optimize_csv(&c, &inst, "ellipsoid.csv", &res)
        }
        Command::Intopt(c) => {
            let inst = need_instance(&c)?;
            let res = pure_integer_optimize(&inst.body, need_objective(&inst)?, &inst.params)?;
            optimize_csv(&c, &inst, "intopt.csv", &res)
        }
        Command::Bnc {
            common,
            strategy,
            max_nodes,
        } => {
            let inst = need_instance(&common)?;
            let milp = inst.to_milp()?;
            let strategy = Strategy::parse(&strategy)
                .ok_or_else(|| usage(format!("unknown strategy `{strategy}`")))?;
            let cfg = SuiteConfig {
                max_nodes,
                timing: common.timing,
                ..SuiteConfig::default()
            };
            let (row, _, _) = bnc_row(&cfg, &inst.name, milp.dim(), &milp, strategy)?;
            let mut t = Table::new(&BNC_HEADER);
            t.push(row);
            emit(&common, "bnc.csv", t.to_csv())
        }
        Command::Adversary {
            common,
            n,
            d,
            radius,
            rho,
            strategy,
            limit,
            grid_res,
        } => {
            let kind = StrategyKind::parse(&strategy)
                .ok_or_else(|| usage(format!("unknown strategy `{strategy}`")))?;
            let limit = limit.unwrap_or_else(|| suites::adversary_query_limit(n, d, radius, rho));
            let mut s = kind.build(common.seed, grid_res);
            let state = run_adversary_match(n, d, radius, rho, s.as_mut(), limit)?;
            let cert = state.certificate(suites::ADVERSARY_EPS)?;
            let replays = cert.replays(&state.transcript)?;
            if !(replays && cert.boxes_disjoint()) {
                return Err(CliError {
                    code: "E_CERTIFICATE",
                    message: format!("certificate check failed: replays={replays}"),
                });
            }
            let written = emit(&common, "adversary.csv", match_log_csv(&state))?;
            Ok(format!(
                "{written}{} in-box queries of {} total; certificate replays and boxes are disjoint\n",
                state.in_box_queries,
                state.transcript.len()
            ))
        }
        Command::Centerpoint {
            common,
            grid_res,
            optimize,
        } => {
            let inst = need_instance(&common)?;
            let p = &inst.params;
            if optimize {
                let run =
                    centerpoint_strategy_run(&inst.body, need_objective(&inst)?, p, grid_res)?;
                let mut t =
                    Table::new(&["step", "query", "source", "nu_before", "nu_after", "ratio"]);
                for (i, s) in run.steps.iter().enumerate() {
                    t.push(vec![
                        i.to_string(),
                        s.query.to_string(),
                        format!("{:?}", s.source).to_lowercase(),
                        format!("{:?}", s.before),
                        format!("{:?}", s.after),
                        format!("{:?}", s.ratio()),
                    ]);
                }
                let written = emit(&common, "centerpoint.csv", t.to_csv())?;
                let value = run
                    .result
                    .value()
                    .map_or("none".into(), |v| format!("{:?}", inst.reported(v)));
                return Ok(format!(
                    "{written}{} queries (bound {:.1}), value {value}\n",
                    run.queries, run.query_bound
                ));
            }
            let est = approx_centerpoint(&inst.body, p.n, p.d, grid_res)?;
            let mut t = Table::new(&[
                "instance",
                "point",
                "h",
                "nu",
                "ratio",
                "directions",
                "direction_gap",
            ]);
            t.push(vec![
                inst.name.clone(),
                join_point(&est.point),
                format!("{:?}", est.h),
                format!("{:?}", est.nu),
                format!("{:?}", est.ratio()),
                est.directions.to_string(),
                format!("{:?}", est.direction_gap),
            ]);
            emit(&common, "centerpoint.csv", t.to_csv())
        }
        Command::Bench {
            common,
            suite,
            n,
            h,
            grid_res,
            max_nodes,
        } => {
            let mut cfg = SuiteConfig {
                seed: common.seed,
                grid_res,
                max_nodes,
                tol_feas: common.tol_feas,
                timing: common.timing,
                ..SuiteConfig::default()
            };
            if let Some(n) = n {
                cfg.jeroslow_sizes = parse_sizes(&n)?;
            }
            if let Some(h) = h {
                cfg.triangle_heights = parse_sizes(&h)?.into_iter().map(|v| v as u32).collect();
            }
            let list: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![Suite::parse(&suite)
                    .ok_or_else(|| usage(format!("unknown suite `{suite}`")))?]
            };
            let dir = common
                .out
                .clone()
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("mico-out"));
            std::fs::create_dir_all(&dir)?;
            let mut report = String::new();
            let mut failed = Vec::new();
            for s in list {
                let out = s.run(&cfg)?;
                write_suite(&dir, &out)?;
                report.push_str(&suite_line(&out));
                for f in &out.failures {
                    report.push_str(&format!("  {f}\n"));
                }
                if !out.passed() {
                    failed.push(s.as_str());
                }
            }
            if failed.is_empty() {
                Ok(report)
            } else {
                print!("{report}");
                Err(check_failed(format!(
                    "failed suites: {}",
                    failed.join(", ")
                )))
            }
        }
    }
}

pub fn suite_line(out: &SuiteOutput) -> String {
    format!(
        "{:<12} {}  {}\n",
        out.suite.as_str(),
        if out.passed() { "PASS" } else { "FAIL" },
        out.summary
    )
}

/// `<dir>/<suite>.csv` and `<dir>/<suite>.dat`.
pub fn write_suite(dir: &Path, out: &SuiteOutput) -> CliResult<()> {
    std::fs::write(dir.join(format!("{}.csv", out.suite.as_str())), &out.csv)?;
    std::fs::write(dir.join(format!("{}.dat", out.suite.as_str())), &out.plot)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_sizes("4,8").unwrap(), vec![4, 8]);
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn unknown_subcommand_is_a_usage_error() {
        let err = Cli::try_parse_from(["mico", "frobnicate"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
