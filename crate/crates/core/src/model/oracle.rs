use std::cell::Cell;

use nalgebra::DVector;

use crate::error::Result;
use crate::model::body::ConvexBody;
use crate::model::halfspace::Halfspace;
use crate::model::objective::Objective;

/// Verdict of a separation oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleAnswer {
    Inside,
    Separator(Halfspace),
}

impl OracleAnswer {
    pub fn is_inside(&self) -> bool {
        matches!(self, OracleAnswer::Inside)
    }
}

/// Value and one subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderAnswer {
    pub value: f64,
    pub subgradient: DVector<f64>,
}

pub trait SeparationOracle {
    fn dim(&self) -> usize;
    fn separate(&self, z: &DVector<f64>) -> Result<OracleAnswer>;
}

pub trait FirstOrderOracle {
    fn dim(&self) -> usize;
    fn first_order(&self, z: &DVector<f64>) -> Result<FirstOrderAnswer>;
}

impl SeparationOracle for ConvexBody {
    fn dim(&self) -> usize {
        ConvexBody::dim(self)
    }

    fn separate(&self, z: &DVector<f64>) -> Result<OracleAnswer> {
        ConvexBody::separate(self, z)
    }
}

impl FirstOrderOracle for Objective {
    fn dim(&self) -> usize {
        Objective::dim(self)
    }

    fn first_order(&self, z: &DVector<f64>) -> Result<FirstOrderAnswer> {
        Objective::first_order(self, z)
    }
}

pub fn query_separation(body: &ConvexBody, z: &DVector<f64>) -> Result<OracleAnswer> {
    body.separate(z)
}

pub fn query_first_order(obj: &Objective, z: &DVector<f64>) -> Result<FirstOrderAnswer> {
    obj.first_order(z)
}

/// Counts separation queries passed through to `inner`.
pub struct CountingSeparation<'a> {
    inner: &'a dyn SeparationOracle,
    count: Cell<usize>,
}

impl<'a> CountingSeparation<'a> {
    pub fn new(inner: &'a dyn SeparationOracle) -> Self {
        CountingSeparation {
            inner,
            count: Cell::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }
}

impl SeparationOracle for CountingSeparation<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn separate(&self, z: &DVector<f64>) -> Result<OracleAnswer> {
        self.count.set(self.count.get() + 1);
        self.inner.separate(z)
    }
}

/// Counts first-order queries passed through to `inner`.
pub struct CountingFirstOrder<'a> {
    inner: &'a dyn FirstOrderOracle,
    count: Cell<usize>,
}

impl<'a> CountingFirstOrder<'a> {
    pub fn new(inner: &'a dyn FirstOrderOracle) -> Self {
        CountingFirstOrder {
            inner,
            count: Cell::new(0),
        }
    }

    pub fn count(&self) -> usize {
        self.count.get()
    }
}

impl FirstOrderOracle for CountingFirstOrder<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn first_order(&self, z: &DVector<f64>) -> Result<FirstOrderAnswer> {
        self.count.set(self.count.get() + 1);
        self.inner.first_order(z)
    }
}
