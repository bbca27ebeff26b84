//! Line-oriented instance files.
//!
//! ```text
//! # comment
//! name      ball-demo
//! params    1 1 2 1 0.5 0.001 0.05   # n d R M rho eps delta
//! norm      euclid                   # or sup
//! sense     min                      # or max
//! body      ball 1.5 center 0 0
//! objective linear 1 -1
//! ```
//!
//! Bodies: `ball <r> center <c..>`, `supball <r> center <c..>`,
//! `box lower <l..> upper <u..>`, `ellipsoid center <c..> shape <row-major>`,
//! `polyhedron` followed by `row <a..> <= <b>` lines.
//! Objectives: `linear <c..>`, `constant <v> <dim>`, `quadratic matrix
//! <row-major> linear <q..> const <r>` (value `z'Qz/2 + q'z + r`), `maxaffine`
//! followed by `piece <a..> <b>` lines.
//!
//! With `sense max` the objective line is the function to maximize and must be
//! linear or constant; it is stored negated and results are reported in the
//! maximization sense.

use std::fmt::Write as _;

use mico_core::branchcut::{hidden_triangle_instance, jeroslow_instance, MilpInstance};
use mico_core::geometry::{Ellipsoid, PdMatrix};
use mico_core::model::{ConvexBody, NormTag, Objective, Polyhedron, ProblemParameters};
use mico_core::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: String,
    pub body: ConvexBody,
    pub objective: Option<Objective>,
    pub params: ProblemParameters,
    pub maximize: bool,
}

impl Instance {
    /// The instance as a MILP, when the body is polyhedral and the objective linear.
    pub fn to_milp(&self) -> Result<MilpInstance> {
        let poly = self
            .body
            .as_polyhedron()
            .ok_or_else(|| Error::InvalidInput("branch-and-cut needs a polyhedral body".into()))?;
        let c = match &self.objective {
            Some(Objective::Linear(c)) => c.clone(),
            Some(Objective::Constant { dim, .. }) => DVector::zeros(*dim),
            _ => {
                return Err(Error::InvalidInput(
                    "branch-and-cut needs a linear objective".into(),
                ))
            }
        };
        let mut m = MilpInstance::new(poly, c, self.params.n, self.params.d)?;
        m.name = self.name.clone();
        m.maximize = self.maximize;
        Ok(m)
    }

    pub fn from_milp(m: &MilpInstance) -> Result<Self> {
        let radius = milp_radius(m);
        Ok(Instance {
            name: m.name.clone(),
            body: ConvexBody::Polyhedron(m.poly.clone()),
            objective: Some(Objective::Linear(m.c.clone())),
            params: ProblemParameters::new(m.n, m.d, radius).with_lipschitz(m.c.norm()),
            maximize: m.maximize,
        })
    }

    /// Objective value in the instance's own sense.
    pub fn reported(&self, min_value: f64) -> f64 {
        if self.maximize {
            -min_value
        } else {
            min_value
        }
    }
}

fn milp_radius(m: &MilpInstance) -> f64 {
    match ConvexBody::Polyhedron(m.poly.clone()).bounding_box() {
        Ok((lo, hi)) => lo
            .iter()
            .zip(hi.iter())
            .map(|(l, h)| l.abs().max(h.abs()).powi(2))
            .sum::<f64>()
            .sqrt()
            .max(1.0),
        Err(_) => 1.0,
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::InvalidInput(format!("line {line}: {}", msg.into()))
}

fn nums(line: usize, toks: &[&str]) -> Result<Vec<f64>> {
    toks.iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| perr(line, format!("expected a number, got `{t}`")))
        })
        .collect()
}

fn one(line: usize, toks: &[&str]) -> Result<f64> {
    match nums(line, toks)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(perr(line, "expected exactly one number")),
    }
}

/// Splits `toks` at `keyword`.
fn split_at<'a>(
    line: usize,
    toks: &'a [&'a str],
    keyword: &str,
) -> Result<(&'a [&'a str], &'a [&'a str])> {
    let i = toks
        .iter()
        .position(|t| *t == keyword)
        .ok_or_else(|| perr(line, format!("missing `{keyword}`")))?;
    Ok((&toks[..i], &toks[i + 1..]))
}

enum PendingBody {
    Done(ConvexBody),
    Polyhedron(Vec<(Vec<f64>, f64)>),
}

enum PendingObjective {
    Done(Objective),
    MaxAffine(Vec<(Vec<f64>, f64)>),
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut name = String::from("instance");
    let mut params: Option<(ProblemParameters, usize)> = None;
    let mut norm = NormTag::Euclidean;
    let mut maximize = false;
    let mut body: Option<PendingBody> = None;
    let mut objective: Option<PendingObjective> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((&key, rest)) = toks.split_first() else {
            continue;
        };
        match key {
            "name" => name = rest.join(" "),
            "params" => {
                if rest.len() != 7 {
                    return Err(perr(line, "params needs `n d R M rho eps delta`"));
                }
                let dim = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| perr(line, format!("bad dimension `{t}`")))
                };
                let v = nums(line, &rest[2..])?;
                let p = ProblemParameters::new(dim(rest[0])?, dim(rest[1])?, v[0])
                    .with_lipschitz(v[1])
                    .with_rho(v[2])
                    .with_eps(v[3])
                    .with_delta(v[4]);
                params = Some((p, line));
            }
            "norm" => {
                norm = rest
                    .first()
                    .and_then(|t| NormTag::parse(t))
                    .ok_or_else(|| perr(line, "norm must be `euclidean` or `sup`"))?;
            }
            "sense" => {
                maximize = match rest {
                    ["min"] => false,
                    ["max"] => true,
                    _ => return Err(perr(line, "sense must be `min` or `max`")),
                }
            }
            "body" => {
                if body.is_some() {
                    return Err(perr(line, "second `body` line"));
                }
                body = Some(parse_body(line, rest)?);
            }
            "row" => match &mut body {
                Some(PendingBody::Polyhedron(rows)) => {
                    let (a, b) = split_at(line, rest, "<=")?;
                    rows.push((nums(line, a)?, one(line, b)?));
                }
                _ => return Err(perr(line, "`row` outside a polyhedron body")),
            },
            "objective" => {
                if objective.is_some() {
                    return Err(perr(line, "second `objective` line"));
                }
                objective = Some(parse_objective(line, rest)?);
            }
            "piece" => match &mut objective {
                Some(PendingObjective::MaxAffine(pieces)) => {
                    let v = nums(line, rest)?;
                    if v.len() < 2 {
                        return Err(perr(line, "piece needs `a.. b`"));
                    }
                    let (a, b) = v.split_at(v.len() - 1);
                    pieces.push((a.to_vec(), b[0]));
                }
                _ => return Err(perr(line, "`piece` outside a maxaffine objective")),
            },
            other => return Err(perr(line, format!("unknown keyword `{other}`"))),
        }
    }

    let (mut params, params_line) =
        params.ok_or_else(|| Error::InvalidInput("missing `params` line".into()))?;
    params.norm = norm;
    params.validate().map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name,
            reason: format!("line {params_line}: {reason}"),
        },
        other => other,
    })?;
    let (n, d) = (params.n, params.d);
    let body = match body.ok_or_else(|| Error::InvalidInput("missing `body` line".into()))? {
        PendingBody::Done(b) => b,
        PendingBody::Polyhedron(rows) => {
            if rows.is_empty() {
                return Err(Error::InvalidInput("polyhedron without rows".into()));
            }
            ConvexBody::Polyhedron(Polyhedron::from_rows(n + d, &rows)?)
        }
    };
    body.validate()?;
    if body.dim() != n + d {
        return Err(Error::Dimension {
            expected: n + d,
            got: body.dim(),
        });
    }
    let objective = match objective {
        None => None,
        Some(PendingObjective::Done(o)) => Some(o),
        Some(PendingObjective::MaxAffine(p)) => Some(Objective::max_affine(p)?),
    };
    let objective = match (maximize, objective) {
        (false, o) | (true, o @ None) => o,
        (true, Some(o)) => Some(negate(&o).ok_or_else(|| {
            Error::InvalidInput("`sense max` needs a linear or constant objective".into())
        })?),
    };
    if let Some(o) = &objective {
        o.validate()?;
        if o.dim() != n + d {
            return Err(Error::Dimension {
                expected: n + d,
                got: o.dim(),
            });
        }
    }
    Ok(Instance {
        name,
        body,
        objective,
        params,
        maximize,
    })
}

fn parse_body(line: usize, toks: &[&str]) -> Result<PendingBody> {
    let Some((&kind, rest)) = toks.split_first() else {
        return Err(perr(line, "body kind missing"));
    };
    Ok(PendingBody::Done(match kind {
        "ball" | "supball" => {
            let (r, c) = split_at(line, rest, "center")?;
            ConvexBody::Ball {
                center: DVector::from_vec(nums(line, c)?),
                radius: one(line, r)?,
                norm: if kind == "ball" {
                    NormTag::Euclidean
                } else {
                    NormTag::Sup
                },
            }
        }
        "box" => {
            let (_, after) = split_at(line, rest, "lower")?;
            let (l, u) = split_at(line, after, "upper")?;
            ConvexBody::cube(&nums(line, l)?, &nums(line, u)?)
        }
        "ellipsoid" => {
            let (_, after) = split_at(line, rest, "center")?;
            let (c, s) = split_at(line, after, "shape")?;
            let c = nums(line, c)?;
            let s = nums(line, s)?;
            if s.len() != c.len() * c.len() {
                return Err(perr(line, "shape needs k*k entries"));
            }
            let shape = PdMatrix::from_rows(c.len(), &s).map_err(|e| perr(line, e.to_string()))?;
            ConvexBody::Ellipsoid(Ellipsoid::new(DVector::from_vec(c), shape)?)
        }
        "polyhedron" => {
            if !rest.is_empty() {
                return Err(perr(line, "polyhedron rows go on `row` lines"));
            }
            return Ok(PendingBody::Polyhedron(Vec::new()));
        }
        other => return Err(perr(line, format!("unknown body `{other}`"))),
    }))
}

fn parse_objective(line: usize, toks: &[&str]) -> Result<PendingObjective> {
    let Some((&kind, rest)) = toks.split_first() else {
        return Err(perr(line, "objective kind missing"));
    };
    Ok(PendingObjective::Done(match kind {
        "linear" => Objective::Linear(DVector::from_vec(nums(line, rest)?)),
        "constant" => {
            let v = nums(line, rest)?;
            match v.as_slice() {
                [value, dim] if *dim >= 0.0 && dim.fract() == 0.0 => {
                    Objective::constant(*value, *dim as usize)
                }
                _ => return Err(perr(line, "constant needs `value dim`")),
            }
        }
        "quadratic" => {
            let (_, after) = split_at(line, rest, "matrix")?;
            let (m, after) = split_at(line, after, "linear")?;
            let (q, r) = split_at(line, after, "const")?;
            let q = nums(line, q)?;
            let m = nums(line, m)?;
            if m.len() != q.len() * q.len() {
                return Err(perr(line, "matrix needs k*k entries"));
            }
            Objective::Quadratic {
                q_mat: DMatrix::from_row_slice(q.len(), q.len(), &m),
                q: DVector::from_vec(q),
                r: one(line, r)?,
            }
        }
        "maxaffine" => {
            if !rest.is_empty() {
                return Err(perr(line, "maxaffine pieces go on `piece` lines"));
            }
            return Ok(PendingObjective::MaxAffine(Vec::new()));
        }
        other => return Err(perr(line, format!("unknown objective `{other}`"))),
    }))
}

/// `-f` for linear and constant objectives.
fn negate(o: &Objective) -> Option<Objective> {
    match o {
        Objective::Linear(c) => Some(Objective::Linear(-c)),
        Objective::Constant { value, dim } => Some(Objective::constant(-value, *dim)),
        _ => None,
    }
}

fn join(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Text that [`parse_instance`] maps back to `inst`. Floats use the shortest
/// round-trip representation.
pub fn print_instance(inst: &Instance) -> Result<String> {
    let p = &inst.params;
    let mut s = String::new();
    let _ = writeln!(s, "name {}", inst.name);
    let _ = writeln!(
        s,
        "params {} {} {:?} {:?} {:?} {:?} {:?}",
        p.n, p.d, p.radius, p.lipschitz, p.rho, p.eps, p.delta
    );
    let _ = writeln!(s, "norm {}", p.norm.as_str());
    let _ = writeln!(s, "sense {}", if inst.maximize { "max" } else { "min" });
    match &inst.body {
        ConvexBody::Ball {
            center,
            radius,
            norm,
        } => {
            let kind = if *norm == NormTag::Euclidean {
                "ball"
            } else {
                "supball"
            };
            let _ = writeln!(
                s,
                "body {kind} {radius:?} center {}",
                join(center.iter().copied())
            );
        }
        ConvexBody::Box { lower, upper } => {
            let _ = writeln!(
                s,
                "body box lower {} upper {}",
                join(lower.iter().copied()),
                join(upper.iter().copied())
            );
        }
        ConvexBody::Ellipsoid(e) => {
            let m = e.shape.matrix();
            let k = m.nrows();
            let entries = (0..k * k).map(|i| m[(i / k, i % k)]);
            let _ = writeln!(
                s,
                "body ellipsoid center {} shape {}",
                join(e.center.iter().copied()),
                join(entries)
            );
        }
        ConvexBody::Polyhedron(poly) => {
            s.push_str("body polyhedron\n");
            for r in poly.rows() {
                let _ = writeln!(
                    s,
                    "row {} <= {:?}",
                    join(r.normal.iter().copied()),
                    r.offset
                );
            }
        }
        other => {
            return Err(Error::Capability(format!(
                "bodies of this kind have no text form: {:?}",
                std::mem::discriminant(other)
            )))
        }
    }
    let negated = match (&inst.objective, inst.maximize) {
        (Some(o), true) => Some(negate(o).ok_or_else(|| {
            Error::InvalidInput("a maximized objective must be linear or constant".into())
        })?),
        (o, _) => o.clone(),
    };
    match &negated {
        None => {}
        Some(Objective::Linear(c)) => {
            let _ = writeln!(s, "objective linear {}", join(c.iter().copied()));
        }
        Some(Objective::Constant { value, dim }) => {
            let _ = writeln!(s, "objective constant {value:?} {dim}");
        }
        Some(Objective::Quadratic { q_mat, q, r }) => {
            let k = q.len();
            let entries = (0..k * k).map(|i| q_mat[(i / k, i % k)]);
            let _ = writeln!(
                s,
                "objective quadratic matrix {} linear {} const {r:?}",
                join(entries),
                join(q.iter().copied())
            );
        }
        Some(Objective::MaxAffine(pieces)) => {
            s.push_str("objective maxaffine\n");
            for (a, b) in pieces {
                let _ = writeln!(s, "piece {} {b:?}", join(a.iter().copied()));
            }
        }
    }
    Ok(s)
}

/// `jeroslow N` or `triangle H`.
pub fn generate(spec: &str) -> Result<Instance> {
    let toks: Vec<&str> = spec.split_whitespace().collect();
    let bad = || Error::InvalidInput(format!("unknown generator spec `{spec}`"));
    match toks.as_slice() {
        ["jeroslow", n] => Instance::from_milp(&jeroslow_instance(n.parse().map_err(|_| bad())?)?),
        ["triangle", h] => {
            Instance::from_milp(&hidden_triangle_instance(h.parse().map_err(|_| bad())?)?)
        }
        _ => Err(bad()),
    }
}

/// A generator spec, or else the path of an instance file.
pub fn load_instance(arg: &str) -> Result<Instance> {
    if let Ok(inst) = generate(arg) {
        return Ok(inst);
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| Error::InvalidInput(format!("cannot read instance `{arg}`: {e}")))?;
    parse_instance(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BALL: &str =
        "name demo\nparams 1 1 2 1 1 0.001 0.01\nbody ball 1.5 center 0 0\nobjective linear 1 -1\n";

    #[test]
    fn minimal_ball() {
        let inst = parse_instance(BALL).unwrap();
        assert_eq!(inst.body, ConvexBody::ball(&[0.0, 0.0], 1.5));
        assert_eq!(inst.objective, Some(Objective::linear(&[1.0, -1.0])));
        assert_eq!(inst.params.radius, 2.0);
    }

    #[test]
    fn rho_above_one_names_parameter() {
        let text = BALL.replace("2 1 1 0.001", "2 1 2 0.001");
        match parse_instance(&text) {
            Err(Error::InvalidParameter { name, reason }) => {
                assert_eq!(name, "rho");
                assert!(reason.contains("line 2"), "{reason}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = parse_instance("name a\nparams 1 1 x 1 1 1 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn jeroslow_generator() {
        let inst = generate("jeroslow 6").unwrap();
        assert_eq!(inst.to_milp().unwrap(), jeroslow_instance(6).unwrap());
    }

    #[test]
    fn maximize_stores_negation() {
        let inst = parse_instance(&BALL.replace("name demo", "name demo\nsense max")).unwrap();
        assert_eq!(inst.objective, Some(Objective::linear(&[-1.0, 1.0])));
        let back = parse_instance(&print_instance(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn round_trip() {
        let inst = generate("triangle 3").unwrap();
        let back = parse_instance(&print_instance(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
    }
}
