//! Branch-and-cut node loop over LP relaxations.

use std::time::Instant;

use nalgebra::DVector;

use crate::branchcut::cuts::{cg_candidates, is_integral, select_cut};
use crate::branchcut::disjunction::{disjunctive_cut, Disjunction};
use crate::branchcut::instances::{solve_lp, MilpInstance};
use crate::error::{Error, Result};
use crate::lp::LpOutcome;
use crate::model::{Halfspace, Polyhedron};
use crate::solver::{OptimizeOutcome, OptimizeResult, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Variable branching only.
    Branch,
    /// CG cuts at every node; branch only when no CG cut separates.
    Cut,
    /// Up to `cuts_per_node` CG cuts, then branch.
    Hybrid,
    /// Disjunctive cuts from the most fractional variable, then branch.
    Disjunctive,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Branch => "bb",
            Strategy::Cut => "cg",
            Strategy::Hybrid => "hybrid",
            Strategy::Disjunctive => "disj",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bb" | "branch" => Some(Strategy::Branch),
            "cg" | "cut" => Some(Strategy::Cut),
            "hybrid" => Some(Strategy::Hybrid),
            "disj" | "disjunctive" => Some(Strategy::Disjunctive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSelection {
    BestBound,
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BncConfig {
    pub strategy: Strategy,
    pub selection: NodeSelection,
    pub max_nodes: usize,
    pub cuts_per_node: usize,
    /// Pruning tolerance on `bound >= incumbent - eps`.
    pub eps: f64,
}

impl Default for BncConfig {
    fn default() -> Self {
        BncConfig {
            strategy: Strategy::Branch,
            selection: NodeSelection::BestBound,
            max_nodes: 100_000,
            cuts_per_node: 5,
            eps: 0.0,
        }
    }
}

impl BncConfig {
    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BncNode {
    pub id: usize,
    pub relaxation: Polyhedron,
    pub depth: usize,
    pub parent: Option<usize>,
    pub bound: f64,
}

/// A node discarded because its bound could not beat the incumbent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PruneRecord {
    pub node: usize,
    pub bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub nodes: usize,
    pub cuts: usize,
    pub lp_solves: usize,
    pub best_value: Option<f64>,
    pub max_depth: usize,
    pub prunes: Vec<PruneRecord>,
}

impl RunStats {
    pub fn proof_size(&self) -> usize {
        self.nodes + self.cuts
    }
}

/// Most fractional integer coordinate; ties go to the lowest index.
fn branching_variable(x: &DVector<f64>, n: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for i in 0..n {
        let f = x[i] - x[i].floor();
        let dist = f.min(1.0 - f);
        if dist > crate::model::TAU_INT && best.map_or(true, |(_, b)| dist > b + 1e-12) {
            best = Some((i, dist));
        }
    }
    best.map(|(i, _)| i)
}

fn snap(x: &DVector<f64>, n: usize) -> DVector<f64> {
    let mut z = x.clone();
    for i in 0..n {
        z[i] = z[i].round();
    }
    z
}

pub fn run_branch_and_cut(
    inst: &MilpInstance,
    cfg: &BncConfig,
) -> Result<(OptimizeResult, RunStats)> {
    let start = Instant::now();
    let n = inst.n;
    let k = inst.dim();
    let mut stats = RunStats::default();
    let mut incumbent: Option<(DVector<f64>, f64)> = None;
    let ub = |inc: &Option<(DVector<f64>, f64)>| inc.as_ref().map_or(f64::INFINITY, |(_, v)| *v);
    let mut pool: Vec<BncNode> = vec![BncNode {
        id: 0,
        relaxation: inst.poly.clone(),
        depth: 0,
        parent: None,
        bound: f64::NEG_INFINITY,
    }];
    let mut next_id = 1;
    while !pool.is_empty() {
        let idx = match cfg.selection {
            NodeSelection::DepthFirst => pool.len() - 1,
            NodeSelection::BestBound => {
                let mut b = 0;
                for (i, nd) in pool.iter().enumerate() {
                    let cur = &pool[b];
                    if nd.bound < cur.bound || (nd.bound == cur.bound && nd.id < cur.id) {
                        b = i;
                    }
                }
                b
            }
        };
        let mut node = pool.remove(idx);
        stats.nodes += 1;
        if stats.nodes > cfg.max_nodes {
            return Err(Error::Capability(format!(
                "node limit {} reached",
                cfg.max_nodes
            )));
        }
        stats.max_depth = stats.max_depth.max(node.depth);
        if node.bound >= ub(&incumbent) - cfg.eps - 1e-9 {
            stats.prunes.push(PruneRecord {
                node: node.id,
                bound: node.bound,
                incumbent: ub(&incumbent),
            });
            continue;
        }
        let mut cuts_here = 0;
        loop {
            stats.lp_solves += 1;
            let (x, value) = match solve_lp(&node.relaxation, &inst.c)? {
                LpOutcome::Optimal(s) => (DVector::from_vec(s.x), s.value),
                LpOutcome::Infeasible => break,
                LpOutcome::Unbounded => {
                    return Err(Error::Instance("LP relaxation is unbounded".into()))
                }
            };
            if value >= ub(&incumbent) - cfg.eps - 1e-9 {
                stats.prunes.push(PruneRecord {
                    node: node.id,
                    bound: value,
                    incumbent: ub(&incumbent),
                });
                break;
            }
            if is_integral(&x, n) {
                let z = snap(&x, n);
                let v = inst.c.dot(&z);
                if v < ub(&incumbent) {
                    incumbent = Some((z, v));
                }
                break;
            }
            let cut = match cfg.strategy {
                Strategy::Branch => None,
                Strategy::Cut => best_cg_cut(&node.relaxation, n, &x, &inst.c),
                Strategy::Hybrid if cuts_here < cfg.cuts_per_node => {
                    best_cg_cut(&node.relaxation, n, &x, &inst.c)
                }
                Strategy::Disjunctive if cuts_here < cfg.cuts_per_node => {
                    let j = branching_variable(&x, n).expect("fractional point");
                    let d = Disjunction::variable(k, n, j, x[j].floor() as i64)?;
                    disjunctive_cut(&node.relaxation, &d, &x)?
                }
                _ => None,
            };
            if let Some(h) = cut {
                node.relaxation.push(h)?;
                stats.cuts += 1;
                cuts_here += 1;
                continue;
            }
            let j = branching_variable(&x, n).expect("fractional point");
            let lo = x[j].floor();
            let mut e = DVector::zeros(k);
            e[j] = 1.0;
            let down = node
                .relaxation
                .clone()
                .with_row(Halfspace::new(e.clone(), lo)?)?;
            let up = node
                .relaxation
                .clone()
                .with_row(Halfspace::new(-e, -(lo + 1.0))?)?;
            // DFS pops the last pushed child first: explore the down branch first
            for rel in [up, down] {
                pool.push(BncNode {
                    id: next_id,
                    relaxation: rel,
                    depth: node.depth + 1,
                    parent: Some(node.id),
                    bound: value,
                });
                next_id += 1;
            }
            break;
        }
    }
    stats.best_value = incumbent.as_ref().map(|(_, v)| *v);
    let solve_stats = SolveStats {
        nodes: stats.nodes,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        ..Default::default()
    };
    let outcome = match incumbent {
        Some((point, value)) => OptimizeOutcome::EpsOptimal { point, value },
        None => OptimizeOutcome::NoDeepOptimum,
    };
    Ok((
        OptimizeResult {
            outcome,
            stats: solve_stats,
        },
        stats,
    ))
}

fn best_cg_cut(
    poly: &Polyhedron,
    n: usize,
    x: &DVector<f64>,
    c: &DVector<f64>,
) -> Option<Halfspace> {
    let cands = cg_candidates(poly, n, x);
    select_cut(&cands, x, c).map(|i| cands[i].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branchcut::instances::{hidden_triangle_instance, jeroslow_instance};

    #[test]
    fn jeroslow_odd_branching_is_exponential() {
        let inst = jeroslow_instance(5).unwrap();
        let (r, s) = run_branch_and_cut(&inst, &BncConfig::default()).unwrap();
        assert_eq!(inst.reported(r.value().unwrap()), 2.0);
        assert!(s.nodes >= 4, "{}", s.nodes);
    }

    #[test]
    fn jeroslow_odd_single_cut() {
        let inst = jeroslow_instance(5).unwrap();
        let cfg = BncConfig::default().with_strategy(Strategy::Cut);
        let (r, s) = run_branch_and_cut(&inst, &cfg).unwrap();
        assert_eq!(inst.reported(r.value().unwrap()), 2.0);
        assert_eq!(s.cuts, 1);
        assert_eq!(s.nodes, 1);
    }

    #[test]
    fn triangle_branching() {
        let inst = hidden_triangle_instance(5).unwrap();
        let (r, s) = run_branch_and_cut(&inst, &BncConfig::default()).unwrap();
        assert_eq!(inst.reported(r.value().unwrap()), 0.0);
        assert!(s.nodes <= 3);
    }

    #[test]
    fn strategies_agree() {
        let inst = hidden_triangle_instance(3).unwrap();
        for st in [
            Strategy::Branch,
            Strategy::Cut,
            Strategy::Hybrid,
            Strategy::Disjunctive,
        ] {
            let cfg = BncConfig::default().with_strategy(st);
            let (r, s) = run_branch_and_cut(&inst, &cfg).unwrap();
            assert_eq!(inst.reported(r.value().unwrap()), 0.0, "{st:?}");
            for p in &s.prunes {
                assert!(p.bound >= p.incumbent - 1e-9);
            }
        }
    }
}
