use crate::error::{Error, Result};

/// Membership tolerance used by every built-in separation oracle.
pub const TAU_FEAS: f64 = 1e-7;
/// Tolerance for linear-algebra checks (symmetry, pivots, degenerate normals).
pub const TAU_LIN: f64 = 1e-9;
/// Distance from an integer below which a coordinate is snapped to it.
pub const TAU_INT: f64 = 1e-6;

/// The norm in which radii and Lipschitz constants are stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormTag {
    #[default]
    Euclidean,
    Sup,
}

impl NormTag {
    pub fn as_str(self) -> &'static str {
        match self {
            NormTag::Euclidean => "euclid",
            NormTag::Sup => "sup",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "euclid" | "euclidean" | "l2" => Some(NormTag::Euclidean),
            "sup" | "inf" | "linf" => Some(NormTag::Sup),
            _ => None,
        }
    }
}

/// Instance parameters shared by every algorithm.
///
/// `n` integer variables come first in every point, followed by `d`
/// continuous ones. `radius` bounds the feasible region, `lipschitz` the
/// objective, `rho` is the strict-feasibility radius, `eps` the objective
/// tolerance and `delta` the deep-point radius of the feasibility test.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParameters {
    pub n: usize,
    pub d: usize,
    pub radius: f64,
    pub lipschitz: f64,
    pub rho: f64,
    pub eps: f64,
    pub delta: f64,
    pub norm: NormTag,
}

impl ProblemParameters {
    pub fn new(n: usize, d: usize, radius: f64) -> Self {
        ProblemParameters {
            n,
            d,
            radius,
            lipschitz: 1.0,
            rho: 1.0,
            eps: 1e-3,
            delta: 1e-2,
            norm: NormTag::Euclidean,
        }
    }

    pub fn with_lipschitz(mut self, m: f64) -> Self {
        self.lipschitz = m;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Ambient dimension `n + d`.
    pub fn dim(&self) -> usize {
        self.n + self.d
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: impl Into<String>) -> Result<()> {
            Err(Error::InvalidParameter {
                name,
                reason: reason.into(),
            })
        }
        if self.n + self.d == 0 {
            return bad("n", "n + d must be at least 1");
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return bad(
                "R",
                format!("must be positive and finite, got {}", self.radius),
            );
        }
        if !(self.lipschitz.is_finite() && self.lipschitz >= 0.0) {
            return bad("M", format!("must be nonnegative, got {}", self.lipschitz));
        }
        if self.d >= 1 && !(self.rho > 0.0 && self.rho <= 1.0) {
            return bad(
                "rho",
                format!("must satisfy 0 < rho <= 1, got {}", self.rho),
            );
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return bad("eps", format!("must be nonnegative, got {}", self.eps));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta", format!("must be positive, got {}", self.delta));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_rho_above_one() {
        let p = ProblemParameters::new(1, 1, 4.0).with_rho(2.0);
        match p.validate() {
            Err(Error::InvalidParameter { name, .. }) => assert_eq!(name, "rho"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rho_unconstrained_for_pure_integer() {
        let p = ProblemParameters::new(3, 0, 4.0).with_rho(2.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn empty_dimension_rejected() {
        assert!(ProblemParameters::new(0, 0, 1.0).validate().is_err());
        assert!(ProblemParameters::new(0, 1, 0.0).validate().is_err());
        assert!(ProblemParameters::new(0, 1, 1.0)
            .with_delta(0.0)
            .validate()
            .is_err());
    }
}
