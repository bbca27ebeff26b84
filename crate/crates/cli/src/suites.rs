//! Seeded experiment suites. Each returns its CSV, plot data and the list of
//! violated checks; the same config always yields the same bytes.

use std::time::Instant;

use mico_core::branchcut::{
    cg_round_closure, hidden_triangle_instance, jeroslow_instance, run_branch_and_cut, BncConfig,
    MilpInstance, Strategy,
};
use mico_core::geometry::sublevel_ball;
use mico_core::infolab::{
    approx_centerpoint, centerpoint_bound, convex_polygon, run_adversary_match, MixedRegion,
    StrategyKind,
};
use mico_core::lp::{LinearProgram, LpOutcome, Relation};
use mico_core::model::{ConvexBody, Objective, Polyhedron, ProblemParameters, TAU_FEAS};
use mico_core::solver::{
    ellipsoid_continuous, feasibility_with_stats, optimize, pure_integer_optimize,
    FeasibilityResult,
};
use mico_core::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::brute;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Contraction,
    Continuous,
    Feasibility,
    Integer,
    Mixed,
    Jeroslow,
    Triangle,
    Adversary,
    Centerpoint,
    Sublevel,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Contraction,
        Suite::Continuous,
        Suite::Feasibility,
        Suite::Integer,
        Suite::Mixed,
        Suite::Jeroslow,
        Suite::Triangle,
        Suite::Adversary,
        Suite::Centerpoint,
        Suite::Sublevel,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Contraction => "contraction",
            Suite::Continuous => "continuous",
            Suite::Feasibility => "feasibility",
            Suite::Integer => "integer",
            Suite::Mixed => "mixed",
            Suite::Jeroslow => "jeroslow",
            Suite::Triangle => "triangle",
            Suite::Adversary => "adversary",
            Suite::Centerpoint => "centerpoint",
            Suite::Sublevel => "sublevel",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Suite::ALL.into_iter().find(|x| x.as_str() == s)
    }

    pub fn run(self, cfg: &SuiteConfig) -> Result<SuiteOutput> {
        match self {
            Suite::Contraction => contraction(cfg),
            Suite::Continuous => continuous(cfg),
            Suite::Feasibility => feasibility_suite(cfg),
            Suite::Integer => integer(cfg),
            Suite::Mixed => mixed(cfg),
            Suite::Jeroslow => jeroslow(cfg),
            Suite::Triangle => triangle(cfg),
            Suite::Adversary => adversary(cfg),
            Suite::Centerpoint => centerpoint(cfg),
            Suite::Sublevel => sublevel(cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub grid_res: usize,
    pub max_nodes: usize,
    /// Membership tolerance when checking returned points.
    pub tol_feas: f64,
    /// Fill the `wall_ms` column; off by default so reruns match byte for byte.
    pub timing: bool,
    pub jeroslow_sizes: Vec<usize>,
    pub triangle_heights: Vec<u32>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 1,
            grid_res: 24,
            max_nodes: 100_000,
            tol_feas: TAU_FEAS,
            timing: false,
            jeroslow_sizes: vec![4, 6, 8, 10, 12],
            triangle_heights: vec![4, 8, 16, 32, 64],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutput {
    pub suite: Suite,
    pub csv: String,
    pub plot: String,
    pub failures: Vec<String>,
    /// One-line summary of the measured quantities.
    pub summary: String,
}

impl SuiteOutput {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// CSV rows with a fixed header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 fields")
    }
}

/// Gnuplot-style data: one block per series, blocks separated by two blank
/// lines.
#[derive(Debug, Clone, Default)]
pub struct PlotData {
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl PlotData {
    pub fn add(&mut self, series: &str, x: f64, y: f64) {
        match self.series.iter_mut().find(|(s, _)| s == series) {
            Some((_, pts)) => pts.push((x, y)),
            None => self.series.push((series.to_string(), vec![(x, y)])),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, (name, pts)) in self.series.iter().enumerate() {
            if i > 0 {
                s.push_str("\n\n");
            }
            s.push_str(&format!("# {name}\n# x y\n"));
            for (x, y) in pts {
                s.push_str(&format!("{x:?} {y:?}\n"));
            }
        }
        s
    }
}

fn f(v: f64) -> String {
    // adding 0.0 maps -0.0 to 0.0
    format!("{:?}", v + 0.0)
}

fn wall(cfg: &SuiteConfig, ms: f64) -> String {
    if cfg.timing {
        format!("{ms:.3}")
    } else {
        String::new()
    }
}

pub fn rng_for(seed: u64, stream: u64, idx: usize) -> ChaCha8Rng {
    let mix = stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (idx as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    ChaCha8Rng::seed_from_u64(seed ^ mix)
}

fn random_direction(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.05 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Uniform point in the unit ball.
fn random_in_ball(rng: &mut ChaCha8Rng, k: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return v;
        }
    }
}

/// A ball, box or polytope inside the origin ball of radius `radius`, with
/// characteristic size drawn from `[min_size, max_size]`.
pub fn random_body(
    rng: &mut ChaCha8Rng,
    k: usize,
    radius: f64,
    min_size: f64,
    max_size: f64,
) -> (ConvexBody, &'static str) {
    let max_size = max_size.min(radius);
    match rng.gen_range(0..3) {
        0 => {
            let r = rng.gen_range(min_size..max_size);
            let c = random_direction(rng, k) * rng.gen_range(0.0..=(radius - r));
            (ConvexBody::ball(c.as_slice(), r), "ball")
        }
        1 => {
            let mut w = DVector::from_fn(k, |_, _| rng.gen_range(min_size..max_size));
            if w.norm() > 0.9 * radius {
                w *= 0.9 * radius / w.norm();
            }
            let c = random_direction(rng, k) * rng.gen_range(0.0..=(radius - w.norm()));
            let lo: Vec<f64> = (0..k).map(|i| c[i] - w[i]).collect();
            let hi: Vec<f64> = (0..k).map(|i| c[i] + w[i]).collect();
            (ConvexBody::cube(&lo, &hi), "box")
        }
        _ => {
            let p = random_direction(rng, k) * rng.gen_range(0.0..=0.5 * radius);
            let half = (radius - p.norm()) / (k as f64).sqrt() * rng.gen_range(0.3..1.0);
            let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
            for i in 0..k {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                rows.push((e.clone(), p[i] + half));
                e[i] = -1.0;
                rows.push((e, -p[i] + half));
            }
            for _ in 0..rng.gen_range(k + 1..k + 5) {
                let a = random_direction(rng, k);
                let s = rng.gen_range(min_size..max_size);
                rows.push((a.as_slice().to_vec(), a.dot(&p) + s));
            }
            let poly = Polyhedron::from_rows(k, &rows).expect("finite rows");
            (ConvexBody::Polyhedron(poly), "polytope")
        }
    }
}

/// A random mixed-integer feasibility instance as drawn by the feasibility
/// and mixed suites.
#[derive(Debug, Clone)]
pub struct MixedCase {
    pub idx: usize,
    pub n: usize,
    pub d: usize,
    pub radius: f64,
    pub body: ConvexBody,
    pub kind: &'static str,
}

pub fn mixed_case(seed: u64, stream: u64, idx: usize) -> MixedCase {
    let mut rng = rng_for(seed, stream, idx);
    let (n, d) = loop {
        let n = rng.gen_range(0..=3usize);
        let d = rng.gen_range(0..=2usize);
        if n + d >= 1 {
            break (n, d);
        }
    };
    let radius = rng.gen_range(1.5..=5.0);
    let (body, kind) = random_body(&mut rng, n + d, radius, 0.02, 1.5);
    MixedCase {
        idx,
        n,
        d,
        radius,
        body,
        kind,
    }
}

pub const FEASIBILITY_CASES: usize = 200;
pub const FEASIBILITY_DELTA: f64 = 0.05;
const STREAM_FEAS: u64 = 3;

/// `-(1 - beta k)^2 / (5k)`.
pub fn contraction_bound(k: usize, beta: f64) -> f64 {
    let k = k as f64;
    -(1.0 - beta * k).powi(2) / (5.0 * k)
}

pub const CONTRACTION_RECORDS: usize = 10_000;

fn contraction(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&["source", "run", "k", "beta", "delta_log_volume", "bound"]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let mut total = 0usize;
    let mut run = 0usize;
    let mut worst = f64::NEG_INFINITY;
    while total < CONTRACTION_RECORDS {
        let (source, log) = if run % 4 == 3 {
            let mut rng = rng_for(cfg.seed, 1, run);
            let d = rng.gen_range(1..=6usize);
            let c = random_direction(&mut rng, d);
            let center = random_in_ball(&mut rng, d) * 0.5;
            let body = ConvexBody::ball(center.as_slice(), rng.gen_range(0.2..0.5));
            let p = ProblemParameters::new(0, d, 1.0)
                .with_lipschitz(1.0)
                .with_rho(0.2)
                .with_eps(1e-4);
            let r = ellipsoid_continuous(&body, &Objective::Linear(c), &p)?;
            ("continuous", r.stats.update_log)
        } else {
            let case = mixed_case(cfg.seed, 1, run);
            let p =
                ProblemParameters::new(case.n, case.d, case.radius).with_delta(FEASIBILITY_DELTA);
            let (_, stats) = feasibility_with_stats(&case.body, &p)?;
            ("lenstra", stats.update_log)
        };
        for rec in log {
            let bound = contraction_bound(rec.k, rec.beta);
            let slack = rec.delta_log_volume - bound;
            worst = worst.max(slack);
            if rec.delta_log_volume > bound + 1e-9 {
                failures.push(format!(
                    "run {run}: k={} beta={} dlogvol={} above bound {}",
                    rec.k, rec.beta, rec.delta_log_volume, bound
                ));
            }
            plot.add(
                &format!("k={}", rec.k),
                rec.beta,
                rec.delta_log_volume / bound,
            );
            table.push(vec![
                source.into(),
                run.to_string(),
                rec.k.to_string(),
                f(rec.beta),
                f(rec.delta_log_volume),
                f(bound),
            ]);
            total += 1;
        }
        run += 1;
    }
    Ok(SuiteOutput {
        suite: Suite::Contraction,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!("{total} updates from {run} runs, max dlogvol - bound = {worst:.3e}"),
        failures,
    })
}

pub const CONTINUOUS_DIMS: [usize; 3] = [2, 5, 10];
pub const CONTINUOUS_TRIALS: usize = 5;
pub const CONTINUOUS_EPS: f64 = 1e-3;

/// `10 d^2 ln(4 M R / (rho eps))`.
pub fn continuous_iteration_cap(d: usize, m: f64, r: f64, rho: f64, eps: f64) -> f64 {
    10.0 * (d * d) as f64 * (4.0 * m * r / (rho * eps)).ln()
}

fn continuous(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&[
        "d",
        "trial",
        "value",
        "optimum",
        "error",
        "iterations",
        "iteration_cap",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let mut worst_err = 0.0f64;
    for (di, &d) in CONTINUOUS_DIMS.iter().enumerate() {
        for trial in 0..CONTINUOUS_TRIALS {
            let mut rng = rng_for(cfg.seed, 2, di * 100 + trial);
            let c = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let m = c.norm();
            let p = ProblemParameters::new(0, d, 1.0)
                .with_lipschitz(m)
                .with_rho(1.0)
                .with_eps(CONTINUOUS_EPS);
            let body = ConvexBody::ball(&vec![0.0; d], 1.0);
            let res = ellipsoid_continuous(&body, &Objective::Linear(c), &p)?;
            let value = res
                .value()
                .ok_or_else(|| Error::Instance("the unit ball is strictly feasible".into()))?;
            let optimum = -m;
            let err = value - optimum;
            let iters = res.stats.separation_queries;
            let cap = continuous_iteration_cap(d, m, 1.0, 1.0, CONTINUOUS_EPS);
            worst_err = worst_err.max(err);
            if err > CONTINUOUS_EPS || err < -1e-9 {
                failures.push(format!("d={d} trial {trial}: error {err}"));
            }
            if iters as f64 > cap {
                failures.push(format!(
                    "d={d} trial {trial}: {iters} iterations above {cap}"
                ));
            }
            plot.add(&format!("d={d}"), trial as f64, iters as f64 / cap);
            table.push(vec![
                d.to_string(),
                trial.to_string(),
                f(value),
                f(optimum),
                f(err),
                iters.to_string(),
                f(cap),
            ]);
        }
    }
    Ok(SuiteOutput {
        suite: Suite::Continuous,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!(
            "{} runs, worst error {worst_err:.2e}",
            CONTINUOUS_DIMS.len() * CONTINUOUS_TRIALS
        ),
        failures,
    })
}

fn is_integral(z: &DVector<f64>, n: usize) -> bool {
    (0..n).all(|i| z[i].fract() == 0.0)
}

fn feasibility_suite(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let rows: Vec<Result<(Vec<String>, Option<String>, f64, bool)>> = (0..FEASIBILITY_CASES)
        .into_par_iter()
        .map(|idx| {
            let case = mixed_case(cfg.seed, STREAM_FEAS, idx);
            let depth = brute::deepest_fiber(&case.body, case.n, case.d)?
                .map_or(f64::NEG_INFINITY, |b| b.1);
            let p =
                ProblemParameters::new(case.n, case.d, case.radius).with_delta(FEASIBILITY_DELTA);
            let (res, stats) = feasibility_with_stats(&case.body, &p)?;
            let expected = depth >= 1.1 * FEASIBILITY_DELTA;
            let mut fail = None;
            let (verdict, integral, inside) = match &res {
                FeasibilityResult::FoundPoint(z) => {
                    let integral = is_integral(z, case.n);
                    let inside = case.body.separate_tol(z, cfg.tol_feas)?.is_inside();
                    if !integral || !inside {
                        fail = Some(format!(
                            "case {idx}: FoundPoint {z:?} integral={integral} inside={inside}"
                        ));
                    }
                    ("FoundPoint", integral.to_string(), inside.to_string())
                }
                FeasibilityResult::NoDeepPoint => {
                    if expected {
                        fail = Some(format!(
                            "case {idx}: NoDeepPoint but a fiber has depth {depth}"
                        ));
                    }
                    ("NoDeepPoint", String::new(), String::new())
                }
            };
            let row = vec![
                idx.to_string(),
                case.n.to_string(),
                case.d.to_string(),
                f(case.radius),
                case.kind.into(),
                f(depth),
                expected.to_string(),
                verdict.into(),
                integral,
                inside,
                stats.separation_queries.to_string(),
            ];
            Ok((row, fail, depth, res.point().is_some()))
        })
        .collect();
    let mut table = Table::new(&[
        "case",
        "n",
        "d",
        "radius",
        "body",
        "oracle_depth",
        "deep_expected",
        "verdict",
        "integral",
        "inside",
        "separation_queries",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let (mut found, mut expected) = (0, 0);
    for r in rows {
        let (row, fail, depth, is_found) = r?;
        if row[6] == "true" {
            expected += 1;
        }
        found += usize::from(is_found);
        plot.add("found", depth.max(-1.0), if is_found { 1.0 } else { 0.0 });
        table.push(row);
        failures.extend(fail);
    }
    Ok(SuiteOutput {
        suite: Suite::Feasibility,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!(
            "{FEASIBILITY_CASES} cases, {expected} with a 1.1 delta-deep fiber, {found} FoundPoint"
        ),
        failures,
    })
}

pub const INTEGER_CASES: usize = 100;

/// Pure-integer case: body, objective and radius.
pub fn integer_case(seed: u64, idx: usize) -> (usize, f64, ConvexBody, &'static str, Objective) {
    let mut rng = rng_for(seed, 4, idx);
    let n = rng.gen_range(1..=5usize);
    let radius = rng.gen_range(1.5..=6.0);
    let (body, kind) = random_body(&mut rng, n, radius, 0.3, 3.0);
    let c: Vec<f64> = loop {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-3..=3) as f64).collect();
        if c.iter().any(|&v| v != 0.0) {
            break c;
        }
    };
    let obj = if rng.gen_bool(0.3) {
        let diag: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen_range(1..=3) as f64).collect();
        Objective::Quadratic {
            q_mat: DMatrix::from_diagonal(&DVector::from_vec(diag)),
            q: DVector::from_vec(c),
            r: 0.0,
        }
    } else {
        Objective::Linear(DVector::from_vec(c))
    };
    (n, radius, body, kind, obj)
}

fn integer(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let rows: Vec<Result<(Vec<String>, Option<String>)>> = (0..INTEGER_CASES)
        .into_par_iter()
        .map(|idx| {
            let (n, radius, body, kind, obj) = integer_case(cfg.seed, idx);
            let brute = brute::integer_optimum(&body, &obj, n)?;
            let p =
                ProblemParameters::new(n, 0, radius).with_lipschitz(obj.lipschitz_bound(radius));
            let res = pure_integer_optimize(&body, &obj, &p)?;
            let got = res.value();
            let mut fail = (got != brute)
                .then(|| format!("case {idx}: solver {got:?}, enumeration {brute:?}"));
            if let Some(z) = res.point() {
                if !is_integral(z, n) || !body.contains(z, cfg.tol_feas)? {
                    fail = Some(format!(
                        "case {idx}: returned point {z:?} is not a feasible lattice point"
                    ));
                }
            }
            let objective = if matches!(obj, Objective::Quadratic { .. }) {
                "quadratic"
            } else {
                "linear"
            };
            let opt = |v: Option<f64>| v.map_or("none".to_string(), f);
            Ok((
                vec![
                    idx.to_string(),
                    n.to_string(),
                    f(radius),
                    kind.into(),
                    objective.into(),
                    opt(got),
                    opt(brute),
                    (got == brute).to_string(),
                    res.stats.separation_queries.to_string(),
                ],
                fail,
            ))
        })
        .collect();
    let mut table = Table::new(&[
        "case",
        "n",
        "radius",
        "body",
        "objective",
        "solver_value",
        "brute_value",
        "match",
        "separation_queries",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let mut feasible = 0;
    for r in rows {
        let (row, fail) = r?;
        if row[6] != "none" {
            feasible += 1;
        }
        plot.add(
            &format!("n={}", row[1]),
            row[0].parse().unwrap_or(0.0),
            row[8].parse().unwrap_or(0.0),
        );
        table.push(row);
        failures.extend(fail);
    }
    Ok(SuiteOutput {
        suite: Suite::Integer,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!("{INTEGER_CASES} cases, {feasible} feasible"),
        failures,
    })
}

pub const MIXED_EPS: f64 = 0.05;
/// Smallest certified strict-feasibility radius admitted to the mixed suite.
pub const MIXED_MIN_RHO: f64 = 0.05;

/// `ceil(log2(4 M R / eps))`.
pub fn binary_search_cap(m: f64, r: f64, eps: f64) -> usize {
    (4.0 * m * r / eps).log2().ceil() as usize
}

fn mixed(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let rows: Vec<Result<Option<(Vec<String>, Option<String>, f64)>>> = (0..FEASIBILITY_CASES)
        .into_par_iter()
        .map(|idx| {
            let case = mixed_case(cfg.seed, STREAM_FEAS, idx);
            let k = case.n + case.d;
            let mut rng = rng_for(cfg.seed, 5, idx);
            let c = random_direction(&mut rng, k);
            let Some((xstar, brute_value)) = brute::linear_optimum(&case.body, &c, case.n, case.d)?
            else {
                return Ok(None);
            };
            let rho = brute::fiber_depth(&case.body, &xstar, case.d)?.min(1.0);
            if rho < MIXED_MIN_RHO {
                return Ok(None);
            }
            let p = ProblemParameters::new(case.n, case.d, case.radius)
                .with_lipschitz(1.0)
                .with_rho(rho)
                .with_eps(MIXED_EPS);
            let res = optimize(&case.body, &Objective::Linear(c), &p)?;
            let cap = binary_search_cap(1.0, case.radius, MIXED_EPS);
            let calls = res.stats.feasibility_calls;
            let mut fail = None;
            let value = match (&res.value(), res.point()) {
                (Some(v), Some(z)) => {
                    if !is_integral(z, case.n)
                        || !case.body.separate_tol(z, cfg.tol_feas)?.is_inside()
                    {
                        fail = Some(format!("case {idx}: returned point {z:?} is infeasible"));
                    } else if *v > brute_value + MIXED_EPS + 1e-9 {
                        fail = Some(format!(
                            "case {idx}: value {v} above optimum {brute_value} + eps"
                        ));
                    }
                    *v
                }
                _ => {
                    fail = Some(format!(
                        "case {idx}: NoDeepOptimum on a rho-feasible instance"
                    ));
                    f64::NAN
                }
            };
            if calls > cap {
                fail = Some(format!("case {idx}: {calls} feasibility calls above {cap}"));
            }
            Ok(Some((
                vec![
                    idx.to_string(),
                    case.n.to_string(),
                    case.d.to_string(),
                    f(case.radius),
                    case.kind.into(),
                    f(rho),
                    f(value),
                    f(brute_value),
                    f(value - brute_value),
                    calls.to_string(),
                    cap.to_string(),
                ],
                fail,
                value - brute_value,
            )))
        })
        .collect();
    let mut table = Table::new(&[
        "case",
        "n",
        "d",
        "radius",
        "body",
        "rho",
        "value",
        "brute_value",
        "gap",
        "feasibility_calls",
        "call_cap",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let mut count = 0;
    for r in rows {
        if let Some((row, fail, gap)) = r? {
            count += 1;
            plot.add("gap", row[0].parse().unwrap_or(0.0), gap);
            table.push(row);
            failures.extend(fail);
        }
    }
    if count == 0 {
        failures.push("no rho-certified instance in the feasibility suite".into());
    }
    Ok(SuiteOutput {
        suite: Suite::Mixed,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!("{count} rho-certified cases, eps = {MIXED_EPS}"),
        failures,
    })
}

pub const BNC_HEADER: [&str; 8] = [
    "family", "size", "strategy", "nodes", "cuts", "rounds", "optimum", "wall_ms",
];

/// One branch-and-cut run as a CSV row.
pub fn bnc_row(
    cfg: &SuiteConfig,
    family: &str,
    size: usize,
    inst: &MilpInstance,
    strategy: Strategy,
) -> Result<(Vec<String>, mico_core::branchcut::RunStats, Option<f64>)> {
    let start = Instant::now();
    let mut bc = BncConfig::default().with_strategy(strategy);
    bc.max_nodes = cfg.max_nodes;
    let (res, stats) = run_branch_and_cut(inst, &bc)?;
    let optimum = res.value().map(|v| inst.reported(v));
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((
        vec![
            family.into(),
            size.to_string(),
            strategy.as_str().into(),
            stats.nodes.to_string(),
            stats.cuts.to_string(),
            String::new(),
            optimum.map_or("none".into(), f),
            wall(cfg, ms),
        ],
        stats,
        optimum,
    ))
}

fn jeroslow(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&BNC_HEADER);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let results: Vec<
        Result<
            Vec<(
                Vec<String>,
                mico_core::branchcut::RunStats,
                Option<f64>,
                Strategy,
            )>,
        >,
    > = cfg
        .jeroslow_sizes
        .par_iter()
        .map(|&n| {
            let inst = jeroslow_instance(n)?;
            let mut out = Vec::new();
            for s in [Strategy::Branch, Strategy::Cut] {
                let (row, stats, opt) = bnc_row(cfg, "jeroslow", n, &inst, s)?;
                out.push((row, stats, opt, s));
            }
            Ok(out)
        })
        .collect();
    let mut summary = Vec::new();
    for (&n, r) in cfg.jeroslow_sizes.iter().zip(results) {
        let want = (n / 2) as f64;
        for (row, stats, opt, s) in r? {
            if opt != Some(want) {
                failures.push(format!(
                    "n={n} {}: optimum {opt:?}, expected {want}",
                    s.as_str()
                ));
            }
            match s {
                Strategy::Branch => {
                    let need = 1usize << (n / 2);
                    if stats.nodes < need {
                        failures.push(format!(
                            "n={n}: branch-and-bound used {} nodes, fewer than 2^{} = {need}",
                            stats.nodes,
                            n / 2
                        ));
                    }
                    plot.add("bb_nodes", n as f64, stats.nodes as f64);
                    summary.push(format!("n={n}: bb {} nodes", stats.nodes));
                }
                _ => {
                    if stats.cuts != 1 {
                        failures.push(format!(
                            "n={n}: pure CG used {} cuts, not exactly 1",
                            stats.cuts
                        ));
                    }
                    plot.add("cg_cuts", n as f64, stats.cuts as f64);
                    summary.push(format!("cg {} cuts", stats.cuts));
                }
            }
            table.push(row);
        }
    }
    Ok(SuiteOutput {
        suite: Suite::Jeroslow,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: summary.join(", "),
        failures,
    })
}

pub const CLOSURE_MAX_ROUNDS: usize = 1000;

fn triangle(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&BNC_HEADER);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let results: Vec<Result<(Vec<String>, Vec<String>, usize, usize, Option<f64>)>> = cfg
        .triangle_heights
        .par_iter()
        .map(|&h| {
            let inst = hidden_triangle_instance(h)?;
            let (bb_row, bb, opt) = bnc_row(cfg, "triangle", h as usize, &inst, Strategy::Branch)?;
            let start = Instant::now();
            let (closed, rounds) = cg_round_closure(&inst, CLOSURE_MAX_ROUNDS)?;
            let bound = match mico_core::branchcut::solve_lp(&closed, &inst.c)? {
                LpOutcome::Optimal(s) => Some(inst.reported(s.value)),
                _ => None,
            };
            let cg_row = vec![
                "triangle".into(),
                h.to_string(),
                "cg-closure".into(),
                String::new(),
                String::new(),
                rounds.to_string(),
                bound.map_or("none".into(), f),
                wall(cfg, start.elapsed().as_secs_f64() * 1e3),
            ];
            Ok((bb_row, cg_row, bb.nodes, rounds, opt))
        })
        .collect();
    let mut prev: Option<(u32, usize)> = None;
    let mut summary = Vec::new();
    for (&h, r) in cfg.triangle_heights.iter().zip(results) {
        let (bb_row, cg_row, nodes, rounds, opt) = r?;
        if nodes > 3 {
            failures.push(format!("h={h}: branching used {nodes} nodes, more than 3"));
        }
        if opt != Some(0.0) {
            failures.push(format!("h={h}: optimum {opt:?}, expected 0"));
        }
        if let Some((ph, pr)) = prev {
            if rounds <= pr {
                failures.push(format!(
                    "rounds not increasing: h={ph} -> {pr}, h={h} -> {rounds}"
                ));
            }
        }
        prev = Some((h, rounds));
        plot.add("bb_nodes", h as f64, nodes as f64);
        plot.add("cg_rounds", h as f64, rounds as f64);
        summary.push(format!("h={h}: {nodes} nodes, {rounds} rounds"));
        table.push(bb_row);
        table.push(cg_row);
    }
    Ok(SuiteOutput {
        suite: Suite::Triangle,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: summary.join(", "),
        failures,
    })
}

pub const ADVERSARY_RADIUS: f64 = 8.0;
pub const ADVERSARY_RHO: f64 = 0.125;
pub const ADVERSARY_EPS: f64 = 0.01;

/// `floor(d 2^n log2(R / (3 rho))) - 1`.
pub fn adversary_query_limit(n: usize, d: usize, radius: f64, rho: f64) -> usize {
    let v = (d as f64 * (1u64 << n) as f64 * (radius / (3.0 * rho)).log2()).floor() as usize;
    v.saturating_sub(1)
}

/// Mixed-integer points of a hull of finitely many points, restricted to the
/// lattice points of its bounding box: for each fiber meeting the hull, the
/// coordinate ranges of the hull's slice there.
pub fn hull_fibers(points: &[DVector<f64>], n: usize) -> Result<Vec<(Vec<i64>, Vec<(f64, f64)>)>> {
    let k = points[0].len();
    let d = k - n;
    let lo: Vec<f64> = (0..n)
        .map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
        .collect();
    let hi: Vec<f64> = (0..n)
        .map(|i| {
            points
                .iter()
                .map(|p| p[i])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let mut out = Vec::new();
    for x in brute::lattice_points(&lo, &hi, n) {
        let slice_lp = |obj: &[f64]| -> Result<LpOutcome> {
            // convex weights lambda with x-part equal to x
            let m = points.len();
            let mut lp = LinearProgram::new(m);
            let mut c = vec![0.0; m];
            for (t, p) in points.iter().enumerate() {
                c[t] = (0..d).map(|j| obj[j] * p[n + j]).sum();
            }
            lp.set_objective(&c)?;
            lp.add_row(&vec![1.0; m], Relation::Eq, 1.0)?;
            for i in 0..n {
                let row: Vec<f64> = points.iter().map(|p| p[i]).collect();
                lp.add_row(&row, Relation::Eq, x[i] as f64)?;
            }
            lp.solve()
        };
        let LpOutcome::Optimal(_) = slice_lp(&vec![0.0; d])? else {
            continue;
        };
        let mut ranges = Vec::new();
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            let lo = slice_lp(&e)?.optimal().map_or(f64::NAN, |s| s.value);
            e[j] = -1.0;
            let hi = slice_lp(&e)?.optimal().map_or(f64::NAN, |s| -s.value);
            ranges.push((lo, hi));
        }
        out.push((x, ranges));
    }
    Ok(out)
}

fn adversary(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut jobs = Vec::new();
    for n in 1..=2usize {
        for d in 1..=2usize {
            for (si, kind) in StrategyKind::ALL.into_iter().enumerate() {
                jobs.push((n, d, si, kind));
            }
        }
    }
    let results: Vec<Result<(Vec<String>, Option<String>)>> = jobs
        .par_iter()
        .map(|&(n, d, si, kind)| {
            let limit = adversary_query_limit(n, d, ADVERSARY_RADIUS, ADVERSARY_RHO);
            let mut strategy = kind.build(cfg.seed.wrapping_add((n * 100 + d * 10 + si) as u64), cfg.grid_res);
            let state = run_adversary_match(n, d, ADVERSARY_RADIUS, ADVERSARY_RHO, strategy.as_mut(), limit)?;
            let mut fail = None;
            if state.in_box_queries != limit {
                fail = Some(format!(
                    "({n},{d}) {}: match ended after {} in-box queries, limit {limit}",
                    kind.as_str(),
                    state.in_box_queries
                ));
            }
            let (replays, disjoint, exact) = match state.certificate(ADVERSARY_EPS) {
                Ok(cert) => {
                    let replays = cert.replays(&state.transcript)?;
                    let disjoint = cert.boxes_disjoint();
                    let x = &state.fibers[cert.fiber].x;
                    let exact = [(&cert.points1, &cert.box1), (&cert.points2, &cert.box2)]
                        .into_iter()
                        .map(|(pts, bx)| -> Result<bool> {
                            let fib = hull_fibers(pts, n)?;
                            Ok(fib.len() == 1
                                && &fib[0].0 == x
                                && fib[0]
                                    .1
                                    .iter()
                                    .enumerate()
                                    .all(|(j, (l, u))| (l - bx.0[j]).abs() < 1e-9 && (u - bx.1[j]).abs() < 1e-9))
                        })
                        .collect::<Result<Vec<bool>>>()?
                        .into_iter()
                        .all(|b| b);
                    if !(replays && disjoint && exact) {
                        fail = Some(format!(
                            "({n},{d}) {}: replays={replays} disjoint={disjoint} exact_parts={exact}",
                            kind.as_str()
                        ));
                    }
                    (replays, disjoint, exact)
                }
                Err(e) => {
                    fail = Some(format!("({n},{d}) {}: no certificate: {e}", kind.as_str()));
                    (false, false, false)
                }
            };
            Ok((
                vec![
                    n.to_string(),
                    d.to_string(),
                    kind.as_str().into(),
                    limit.to_string(),
                    state.in_box_queries.to_string(),
                    state.transcript.len().to_string(),
                    replays.to_string(),
                    disjoint.to_string(),
                    exact.to_string(),
                ],
                fail,
            ))
        })
        .collect();
    let mut table = Table::new(&[
        "n",
        "d",
        "strategy",
        "limit",
        "in_box_queries",
        "queries",
        "replays",
        "boxes_disjoint",
        "mixed_parts_are_boxes",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    for r in results {
        let (row, fail) = r?;
        let x: f64 = row[1].parse::<f64>().unwrap_or(0.0)
            * (1u64 << row[0].parse::<u32>().unwrap_or(0)) as f64;
        plot.add(&row[2], x, row[5].parse().unwrap_or(0.0));
        table.push(row);
        failures.extend(fail);
    }
    Ok(SuiteOutput {
        suite: Suite::Adversary,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!("{} matches", jobs.len()),
        failures,
    })
}

pub const CENTERPOINT_CASES: usize = 10;
pub const CENTERPOINT_SLACK: f64 = 0.02;

/// A random convex polygon: hull of 8 points in the unit square.
pub fn random_polygon(rng: &mut ChaCha8Rng) -> Result<Polyhedron> {
    loop {
        let pts: Vec<[f64; 2]> = (0..8)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        match convex_polygon(&pts) {
            Ok(p) => return Ok(p),
            Err(Error::InvalidInput(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// A random convex body in the plane whose integer fibers are `x = 0` and
/// `x = 1`, both of positive length.
pub fn random_two_fiber(rng: &mut ChaCha8Rng) -> Result<Polyhedron> {
    let mut pts = Vec::new();
    for (lo, hi) in [
        (-0.45, -0.05),
        (-0.45, -0.05),
        (0.1, 0.9),
        (1.05, 1.45),
        (1.05, 1.45),
    ] {
        pts.push([rng.gen_range(lo..hi), rng.gen_range(0.0..1.0)]);
    }
    convex_polygon(&pts)
}

fn centerpoint(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut jobs = Vec::new();
    for i in 0..CENTERPOINT_CASES {
        jobs.push(("polygon", i));
    }
    for i in 0..CENTERPOINT_CASES {
        jobs.push(("two-fiber", i));
    }
    let results: Vec<Result<(Vec<String>, Option<String>, f64)>> = jobs
        .par_iter()
        .map(|&(family, i)| {
            let (stream, n, d, target) = match family {
                "polygon" => (9, 0usize, 2usize, 4.0 / 9.0),
                _ => (10, 1, 1, 0.25),
            };
            let mut rng = rng_for(cfg.seed, stream, i);
            let poly = if n == 0 {
                random_polygon(&mut rng)?
            } else {
                random_two_fiber(&mut rng)?
            };
            let body = ConvexBody::Polyhedron(poly.clone());
            let fibers = MixedRegion::from_polyhedron(&poly, n, d)?.fibers.len();
            let est = approx_centerpoint(&body, n, d, cfg.grid_res)?;
            let floor = (target - CENTERPOINT_SLACK) * est.nu;
            let mut fail = None;
            if est.h < floor {
                fail = Some(format!(
                    "{family} {i}: h = {} below {floor} (nu = {})",
                    est.h, est.nu
                ));
            }
            if n == 1 && fibers != 2 {
                fail = Some(format!("{family} {i}: {fibers} fibers, expected 2"));
            }
            let point = est
                .point
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(" ");
            Ok((
                vec![
                    family.into(),
                    i.to_string(),
                    cfg.grid_res.to_string(),
                    f(est.nu),
                    f(est.h),
                    f(est.ratio()),
                    f(target),
                    f(centerpoint_bound(n, d)),
                    f(est.direction_gap),
                    point,
                ],
                fail,
                est.ratio(),
            ))
        })
        .collect();
    let mut table = Table::new(&[
        "family",
        "case",
        "grid_res",
        "nu",
        "h",
        "ratio",
        "target",
        "theorem_bound",
        "direction_gap",
        "point",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    let mut min_ratio = [f64::INFINITY; 2];
    for r in results {
        let (row, fail, ratio) = r?;
        let slot = usize::from(row[0] != "polygon");
        min_ratio[slot] = min_ratio[slot].min(ratio);
        plot.add(&row[0], row[1].parse().unwrap_or(0.0), ratio);
        table.push(row);
        failures.extend(fail);
    }
    Ok(SuiteOutput {
        suite: Suite::Centerpoint,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!(
            "min h/nu: polygons {:.4}, two-fiber {:.4}",
            min_ratio[0], min_ratio[1]
        ),
        failures,
    })
}

pub const SUBLEVEL_CASES: usize = 50;
pub const SUBLEVEL_SAMPLES: usize = 1000;

fn sublevel(cfg: &SuiteConfig) -> Result<SuiteOutput> {
    let mut table = Table::new(&[
        "case",
        "k",
        "radius",
        "rho",
        "eps",
        "ball_radius",
        "samples",
        "failures",
    ]);
    let mut plot = PlotData::default();
    let mut failures = Vec::new();
    for i in 0..SUBLEVEL_CASES {
        let mut rng = rng_for(cfg.seed, 11, i);
        let k = rng.gen_range(1..=4usize);
        let center = DVector::from_fn(k, |_, _| rng.gen_range(-2.0..2.0));
        let r: f64 = rng.gen_range(0.2..1.5);
        let radius = center.norm() + r;
        let rho = r.min(1.0);
        let g = random_direction(&mut rng, k) * rng.gen_range(0.5..3.0);
        let m = g.norm();
        let z_star = &center - &g * (r / m);
        let eps = m * radius * rng.gen_range(0.01..1.0);
        let (bc, br) = sublevel_ball(&z_star, &center, rho, eps, m, radius)?;
        let level = g.dot(&z_star) + eps;
        let mut bad = 0;
        for _ in 0..SUBLEVEL_SAMPLES {
            let z = &bc + random_in_ball(&mut rng, k) * br;
            let in_body = (&z - &center).norm() <= r + 1e-9;
            let in_level = g.dot(&z) <= level + 1e-9;
            if !(in_body && in_level) {
                bad += 1;
            }
        }
        if bad > 0 {
            failures.push(format!(
                "case {i}: {bad} sampled points outside the sublevel set"
            ));
        }
        plot.add("ball_radius", i as f64, br);
        table.push(vec![
            i.to_string(),
            k.to_string(),
            f(radius),
            f(rho),
            f(eps),
            f(br),
            SUBLEVEL_SAMPLES.to_string(),
            bad.to_string(),
        ]);
    }
    Ok(SuiteOutput {
        suite: Suite::Sublevel,
        csv: table.to_csv(),
        plot: plot.render(),
        summary: format!("{SUBLEVEL_CASES} setups x {SUBLEVEL_SAMPLES} samples"),
        failures,
    })
}

/// Reruns every suite in `first` and lists the ones whose CSV changed.
pub fn rerun_mismatches(first: &[SuiteOutput], cfg: &SuiteConfig) -> Result<Vec<Suite>> {
    let mut bad = Vec::new();
    for out in first {
        let again = out.suite.run(cfg)?;
        if again.csv != out.csv || again.plot != out.plot {
            bad.push(out.suite);
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_limits() {
        assert_eq!(adversary_query_limit(1, 1, 8.0, 0.125), 7);
        assert_eq!(adversary_query_limit(2, 1, 8.0, 0.125), 16);
        assert_eq!(adversary_query_limit(2, 2, 8.0, 0.125), 34);
    }

    #[test]
    fn bodies_fit_radius() {
        for i in 0..200 {
            let case = mixed_case(7, 0, i);
            let (lo, hi) = case.body.bounding_box().unwrap();
            if let ConvexBody::Ball { center, radius, .. } = &case.body {
                assert!(center.norm() + radius <= case.radius + 1e-9);
            } else {
                let corner: f64 = lo
                    .iter()
                    .zip(hi.iter())
                    .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                    .sum();
                assert!(corner.sqrt() <= case.radius + 1e-9, "{i} {}", case.kind);
            }
        }
    }

    #[test]
    fn table_csv() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn hull_fiber_ranges() {
        let pts: Vec<DVector<f64>> = [[0.0, 1.0], [0.0, 2.0], [0.5, 5.0]]
            .iter()
            .map(|p| DVector::from_column_slice(p))
            .collect();
        let fib = hull_fibers(&pts, 1).unwrap();
        assert_eq!(fib.len(), 1);
        assert!((fib[0].1[0].0 - 1.0).abs() < 1e-9 && (fib[0].1[0].1 - 2.0).abs() < 1e-9);
    }
}
