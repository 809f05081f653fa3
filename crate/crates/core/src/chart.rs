//! Box-shaped chart domains and coframe fields on them.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GfbError, Result};
use crate::forms::{self, Form};
use crate::lie::{LieAlgebra, ModelAlgebra};

/// Default central-difference step in chart units.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Coframes with a larger condition number are treated as degenerate.
pub const MAX_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub periodic: Vec<bool>,
}

impl ChartDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, periodic: Vec<bool>) -> Result<Self> {
        let dom = Self { lower, upper, periodic };
        dom.validate()?;
        Ok(dom)
    }

    /// A box with no periodic coordinates.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = lower.len();
        Self::new(lower, upper, vec![false; n])
    }

    /// Checks the invariants; an empty `periodic` mask is widened to all-false.
    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 {
            return Err(GfbError::InvalidChart("dimension must be at least 1".into()));
        }
        if self.upper.len() != d || (self.periodic.len() != d && !self.periodic.is_empty()) {
            return Err(GfbError::InvalidChart(format!(
                "lower/upper/periodic lengths differ ({}, {}, {})",
                d,
                self.upper.len(),
                self.periodic.len()
            )));
        }
        for i in 0..d {
            if !(self.lower[i] < self.upper[i]) || !self.lower[i].is_finite() || !self.upper[i].is_finite() {
                return Err(GfbError::InvalidChart(format!(
                    "coordinate {i}: need finite lower < upper, got [{}, {}]",
                    self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn is_periodic(&self, i: usize) -> bool {
        self.periodic.get(i).copied().unwrap_or(false)
    }

    fn period(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    /// Maps periodic coordinates into `[lower, upper)`; other coordinates are untouched.
    pub fn wrap(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(i, &x)| {
                if self.is_periodic(i) {
                    self.lower[i] + (x - self.lower[i]).rem_euclid(self.period(i))
                } else {
                    x
                }
            })
            .collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .enumerate()
                .all(|(i, &x)| x.is_finite() && (self.is_periodic(i) || (self.lower[i] <= x && x <= self.upper[i])))
    }

    /// Ensures a central stencil of half-width `h` around `p` stays inside the box.
    pub fn check_stencil(&self, p: &[f64], h: f64) -> Result<()> {
        self.check_point(p)?;
        for (i, &x) in p.iter().enumerate() {
            if !self.is_periodic(i) && (x - h < self.lower[i] || x + h > self.upper[i]) {
                return Err(GfbError::TooCloseToBoundary { point: p.to_vec(), h });
            }
        }
        Ok(())
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if !self.contains(p) {
            return Err(GfbError::OutsideDomain { point: p.to_vec() });
        }
        Ok(())
    }

    /// Coordinate difference `q − p` with periodic coordinates taken to the nearest image.
    pub fn difference(&self, p: &[f64], q: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(q)
            .enumerate()
            .map(|(i, (&a, &b))| {
                let d = b - a;
                if self.is_periodic(i) {
                    let per = self.period(i);
                    d - per * (d / per).round()
                } else {
                    d
                }
            })
            .collect()
    }

    /// Euclidean chart distance, periodic-aware.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        self.difference(p, q).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Uniform sample, keeping non-periodic coordinates at least `margin` inside.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                if self.is_periodic(i) {
                    rng.random_range(self.lower[i]..self.upper[i])
                } else {
                    let lo = self.lower[i] + margin;
                    let hi = self.upper[i] - margin;
                    if lo < hi {
                        rng.random_range(lo..hi)
                    } else {
                        0.5 * (self.lower[i] + self.upper[i])
                    }
                }
            })
            .collect()
    }
}

/// Signature of a coframe evaluator: point → `W(p)` with rows indexed by the algebra.
pub type CoframeFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// A `𝔤 ⋉ ℝⁿ`-valued 1-form on a chart, given by its coefficient matrix.
#[derive(Clone)]
pub struct CoframeField {
    name: String,
    domain: ChartDomain,
    model: ModelAlgebra,
    eval: Arc<CoframeFn>,
}

impl fmt::Debug for CoframeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoframeField")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("m", &self.model.m())
            .field("n", &self.model.n())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameAtPoint {
    pub point: Vec<f64>,
    /// Coframe coefficients `W(p)`.
    pub w: DMatrix<f64>,
    /// Frame `E = W⁻¹`; column `A` is `ζ̄_A`.
    pub e: DMatrix<f64>,
    pub condition: f64,
}

impl FrameAtPoint {
    pub fn column(&self, a: usize) -> Vec<f64> {
        self.e.column(a).iter().copied().collect()
    }

    /// `E·ζ` for a full algebra element.
    pub fn apply(&self, zeta: &[f64]) -> Vec<f64> {
        (&self.e * DVector::from_column_slice(zeta)).iter().copied().collect()
    }
}

impl CoframeField {
    pub fn new<F>(name: impl Into<String>, domain: ChartDomain, model: ModelAlgebra, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        domain.validate()?;
        if model.dim() != domain.dim() {
            return Err(GfbError::DimensionMismatch {
                expected: domain.dim(),
                got: model.dim(),
            });
        }
        Ok(Self {
            name: name.into(),
            domain,
            model,
            eval: Arc::new(eval),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn model(&self) -> &ModelAlgebra {
        &self.model
    }

    pub fn algebra(&self) -> &LieAlgebra {
        self.model.algebra()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    /// Evaluates `W` after periodic wrapping, without a domain check.
    pub fn eval_unchecked(&self, p: &[f64]) -> DMatrix<f64> {
        (self.eval)(&self.domain.wrap(p))
    }

    pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.domain.check_point(p)?;
        let w = self.eval_unchecked(p);
        if w.nrows() != self.dim() || w.ncols() != self.dim() {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim(),
                got: w.nrows(),
            });
        }
        Ok(w)
    }

    pub fn frame_at(&self, p: &[f64]) -> Result<FrameAtPoint> {
        let w = self.eval(p)?;
        let sv = w.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(GfbError::DegenerateCoframe {
                point: p.to_vec(),
                condition,
            });
        }
        let e = w.clone().try_inverse().ok_or_else(|| GfbError::DegenerateCoframe {
            point: p.to_vec(),
            condition,
        })?;
        Ok(FrameAtPoint {
            point: p.to_vec(),
            w,
            e,
            condition,
        })
    }

    /// `(dϖ)^A_{μν}` by central differences with step `h`.
    pub fn exterior_derivative_at(&self, p: &[f64], h: f64) -> Result<Form> {
        check_step(h)?;
        self.domain.check_stencil(p, h)?;
        forms::exterior_derivative(|x| Ok(Form::from_one_form(&self.eval_unchecked(x))), p, h)
    }

    /// `ξ̄(p) = E·(ξ, 0)` for `ξ ∈ 𝔤`.
    pub fn fundamental_vector(&self, xi: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let full = self.model.embed_g(xi)?;
        Ok(self.frame_at(p)?.apply(&full))
    }

    /// `ζ̄(p) = E·ζ` for a full algebra element.
    pub fn frame_vector(&self, zeta: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        if zeta.len() != self.dim() {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim(),
                got: zeta.len(),
            });
        }
        Ok(self.frame_at(p)?.apply(zeta))
    }

    /// A copy of this field whose coefficient matrix is `W(p) + δW(p)`.
    pub fn perturbed<F>(&self, name: impl Into<String>, delta: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        let base = Arc::clone(&self.eval);
        Self {
            name: name.into(),
            domain: self.domain.clone(),
            model: self.model.clone(),
            eval: Arc::new(move |p: &[f64]| base(p) + delta(p)),
        }
    }

    /// Same field on a different chart box.
    pub fn with_domain(&self, domain: ChartDomain) -> Result<Self> {
        domain.validate()?;
        if domain.dim() != self.dim() {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim(),
                got: domain.dim(),
            });
        }
        Ok(Self { domain, ..self.clone() })
    }
}

pub(crate) fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(GfbError::InvalidParameter {
            name: "h".into(),
            reason: format!("step must be positive and finite, got {h}"),
        });
    }
    Ok(())
}
