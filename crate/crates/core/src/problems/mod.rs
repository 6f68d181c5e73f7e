//! Problem abstraction and the benchmark catalog.
//!
//! Every objective is maximized. Benchmarks published in minimization form
//! are negated once, inside their evaluators, and constraints follow the
//! `g(x) >= 0` feasibility convention.

mod front;
mod suite;

pub use front::{cache_path, true_front, FrontProvenance, ReferenceFront};

use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Objective and constraint values at one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub y: Vec<f64>,
    pub g: Vec<f64>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.g.iter().all(|&g| g >= 0.0)
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Evaluation + Send + Sync>;
pub type FrontSampler = Arc<dyn Fn(usize) -> Vec<Vec<f64>> + Send + Sync>;

/// Region of interest `[lower, upper]` in objective space.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl PreferenceBox {
    /// Builds the box from two opposite corners given in any order.
    pub fn from_corners(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Argument("preference corners differ in length".into()));
        }
        let lower: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.min(*y)).collect();
        let upper: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.max(*y)).collect();
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Argument("degenerate preference box".into()));
        }
        Ok(PreferenceBox { lower, upper })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dim_x: usize,
    pub dim_y: usize,
    pub dim_c: usize,
    pub bounds: Vec<(f64, f64)>,
    pub preference: Option<PreferenceBox>,
    /// Hypervolume reference point.
    pub reference_point: Vec<f64>,
    evaluator: Evaluator,
    front: Option<FrontSampler>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dim_x", &self.dim_x)
            .field("dim_y", &self.dim_y)
            .field("dim_c", &self.dim_c)
            .field("bounds", &self.bounds)
            .field("preference", &self.preference)
            .field("reference_point", &self.reference_point)
            .field("analytic_front", &self.front.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(
        name: impl Into<String>,
        dim_y: usize,
        dim_c: usize,
        bounds: Vec<(f64, f64)>,
        reference_point: Vec<f64>,
        evaluator: Evaluator,
    ) -> Result<Self> {
        let name = name.into();
        if bounds.is_empty() {
            return Err(Error::Argument(format!("{name}: empty input space")));
        }
        if bounds.iter().any(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Argument(format!("{name}: bounds require lo < hi")));
        }
        if dim_y == 0 || reference_point.len() != dim_y {
            return Err(Error::Argument(format!(
                "{name}: reference point must have {dim_y} entries"
            )));
        }
        Ok(ProblemSpec {
            name,
            dim_x: bounds.len(),
            dim_y,
            dim_c,
            bounds,
            preference: None,
            reference_point,
            evaluator,
            front: None,
        })
    }

    pub fn with_preference(mut self, preference: PreferenceBox) -> Result<Self> {
        if preference.dim() != self.dim_y {
            return Err(Error::Argument(format!(
                "{}: preference box must have {} dimensions",
                self.name, self.dim_y
            )));
        }
        self.preference = Some(preference);
        Ok(self)
    }

    pub fn with_front(mut self, sampler: FrontSampler) -> Self {
        self.front = Some(sampler);
        self
    }

    pub fn has_analytic_front(&self) -> bool {
        self.front.is_some()
    }

    pub(crate) fn analytic_front(&self, n: usize) -> Option<Vec<Vec<f64>>> {
        self.front.as_ref().map(|s| s(n))
    }

    pub fn is_constrained(&self) -> bool {
        self.dim_c > 0
    }

    /// Evaluates objectives and constraints at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        if x.len() != self.dim_x {
            return Err(Error::Domain(format!(
                "{}: expected {} inputs, got {}",
                self.name,
                self.dim_x,
                x.len()
            )));
        }
        for (i, (v, &(lo, hi))) in x.iter().zip(&self.bounds).enumerate() {
            if !(*v >= lo && *v <= hi) {
                return Err(Error::Domain(format!(
                    "{}: x[{i}] = {v} outside [{lo}, {hi}]",
                    self.name
                )));
            }
        }
        let out = (self.evaluator)(x);
        debug_assert_eq!(out.y.len(), self.dim_y);
        debug_assert_eq!(out.g.len(), self.dim_c);
        Ok(out)
    }
}

/// Every registered benchmark.
pub fn catalog() -> Vec<ProblemSpec> {
    vec![
        suite::zdt1(10, "ZDT1"),
        suite::zdt1(6, "ZDT1_D6"),
        suite::zdt2(8),
        suite::zdt3(),
        suite::dtlz2(),
        suite::dtlz7(),
        suite::mw7(),
        suite::constr(),
    ]
}

/// Case-insensitive catalog lookup.
pub fn lookup(name: &str) -> Result<ProblemSpec> {
    catalog()
        .into_iter()
        .find(|p| p.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Argument(format!("unknown problem '{name}'")))
}
