//! Structure residuals `dϖ + ½[ϖ∧ϖ]` and the equivalent forms of 𝔤-equivariance.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{check_step, CoframeField, DEFAULT_STEP};
use crate::error::{GfbError, Result};
use crate::flow::flow_map;
use crate::forms::Form;
use crate::lie::wedge_bracket_at;

/// Default tolerance for analytic catalog coframes.
pub const ANALYTIC_TOL: f64 = 1e-6;

/// Default tolerance for checks built on numerical flows.
pub const FLOW_TOL: f64 = 1e-4;

/// Default flow time used to difference pullbacks.
pub const DEFAULT_FLOW_EPS: f64 = 1e-3;

/// RK4 substeps used for the short flows inside the Lie-derivative estimate.
const FLOW_SUBSTEPS: usize = 4;

/// Scales a tolerance tuned at the default step to a step `h` (quadratic truncation).
pub fn scaled_tol(base: f64, h: f64) -> f64 {
    base * (h / DEFAULT_STEP).powi(2).max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureResidual {
    pub point: Vec<f64>,
    /// `R^A_{μν}` in coordinate indices.
    pub r: Form,
    /// `R^A_{BC}` in frame indices.
    pub r_frame: Form,
    /// `Ω^A_{bc}`: frame components on horizontal pairs (value index over the full algebra).
    pub omega_coeffs: Form,
    /// Largest `|R^A_{BC}|` with `B` or `C` a 𝔤 index.
    pub vertical_violation: f64,
    pub condition: f64,
    pub m: usize,
}

impl StructureResidual {
    /// `Ω^A_{bc}` with `b, c` counted within `ℝⁿ`.
    pub fn omega(&self, a: usize, b: usize, c: usize) -> f64 {
        self.omega_coeffs.get(a, &[b, c])
    }

    /// Max-norm of the whole residual (frame indices).
    pub fn max_abs(&self) -> f64 {
        self.r_frame.max_abs()
    }

    /// `R_frame` minus the horizontal part rebuilt from `omega_coeffs`.
    pub fn non_horizontal_part(&self) -> Form {
        let mut out = self.r_frame.clone();
        let (value_dim, n) = (self.omega_coeffs.value_dim(), self.omega_coeffs.dim());
        for a in 0..value_dim {
            for b in 0..n {
                for c in 0..n {
                    let v = out.get(a, &[self.m + b, self.m + c]) - self.omega(a, b, c);
                    out.set(a, &[self.m + b, self.m + c], v);
                }
            }
        }
        out
    }
}

pub fn structure_residual_at(field: &CoframeField, p: &[f64], h: f64) -> Result<StructureResidual> {
    let frame = field.frame_at(p)?;
    let dw = field.exterior_derivative_at(p, h)?;
    let wb = wedge_bracket_at(field.algebra(), &frame.w)?;
    let r = dw.add(&wb.scale(0.5))?;
    let r_frame = r.contract_frame(&frame.e)?;
    let dim = field.dim();
    let m = field.model().m();
    let n = dim - m;
    let mut omega_coeffs = Form::zeros(dim, n, 2);
    let mut vertical_violation = 0.0_f64;
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let v = r_frame.get(a, &[b, c]);
                if b < m || c < m {
                    vertical_violation = vertical_violation.max(v.abs());
                } else {
                    omega_coeffs.set(a, &[b - m, c - m], v);
                }
            }
        }
    }
    Ok(StructureResidual {
        point: p.to_vec(),
        r,
        r_frame,
        omega_coeffs,
        vertical_violation,
        condition: frame.condition,
        m,
    })
}

fn check_g_element(field: &CoframeField, xi: &[f64]) -> Result<Vec<f64>> {
    field.model().embed_g(xi)
}

/// `max_{A,C} |R^A(ξ̄, ζ̄_C)|`: the contraction of the residual with a fundamental field.
pub fn horizontality_check(field: &CoframeField, p: &[f64], h: f64, xi: &[f64]) -> Result<f64> {
    let xi_full = check_g_element(field, xi)?;
    let res = structure_residual_at(field, p, h)?;
    let dim = field.dim();
    let mut worst = 0.0_f64;
    for a in 0..dim {
        for c in 0..dim {
            let s: f64 = (0..res.m).map(|i| xi_full[i] * res.r_frame.get(a, &[i, c])).sum();
            worst = worst.max(s.abs());
        }
    }
    Ok(worst)
}

/// Pullback coefficients `(Φ_t^*ϖ)(p) = W(Φ_t(p))·DΦ_t(p)`.
fn pulled_back(field: &CoframeField, xi: &[f64], p: &[f64], t: f64, h: f64) -> Result<DMatrix<f64>> {
    let d = field.dim();
    let phi = flow_map(field, xi, p, t, FLOW_SUBSTEPS)?;
    let w = field.eval(&phi)?;
    let mut jac = DMatrix::zeros(d, d);
    let mut x = p.to_vec();
    for mu in 0..d {
        x[mu] = p[mu] + h;
        let plus = flow_map(field, xi, &x, t, FLOW_SUBSTEPS)?;
        x[mu] = p[mu] - h;
        let minus = flow_map(field, xi, &x, t, FLOW_SUBSTEPS)?;
        x[mu] = p[mu];
        // periodic coordinates stay unwrapped through the flow, so plain differences are safe
        for k in 0..d {
            jac[(k, mu)] = (plus[k] - minus[k]) / (2.0 * h);
        }
    }
    Ok(w * jac)
}

/// `max |(L_ξ̄ϖ + ad_ξ ϖ)(ζ̄_B)|` with the Lie derivative from flowed pullbacks.
pub fn equivariance_residual(field: &CoframeField, p: &[f64], xi: &[f64], h: f64, flow_eps: f64) -> Result<f64> {
    check_step(h)?;
    if !(flow_eps > 0.0) {
        return Err(GfbError::InvalidParameter {
            name: "flow_eps".into(),
            reason: format!("must be positive, got {flow_eps}"),
        });
    }
    let xi_full = check_g_element(field, xi)?;
    field.domain().check_stencil(p, h)?;
    let frame = field.frame_at(p)?;
    let plus = pulled_back(field, xi, p, flow_eps, h)?;
    let minus = pulled_back(field, xi, p, -flow_eps, h)?;
    let lie = (plus - minus) / (2.0 * flow_eps);
    let ad = field.algebra().ad_matrix(&xi_full) * &frame.w;
    Ok(((lie + ad) * &frame.e).amax())
}

/// Gap between the numerical bracket `[ζ̄₁, ζ̄₂](p)` and `E(p)·[ζ₁, ζ₂]`.
///
/// `zeta1` is a 𝔤-element, `zeta2` a full algebra element.
pub fn bracket_compatibility_check(
    field: &CoframeField,
    p: &[f64],
    zeta1: &[f64],
    zeta2: &[f64],
    flow_eps: f64,
) -> Result<f64> {
    let z1 = check_g_element(field, zeta1)?;
    if zeta2.len() != field.dim() {
        return Err(GfbError::DimensionMismatch {
            expected: field.dim(),
            got: zeta2.len(),
        });
    }
    let x = |q: &[f64]| field.frame_vector(&z1, q);
    let y = |q: &[f64]| field.frame_vector(zeta2, q);
    let directional = |v: &dyn Fn(&[f64]) -> Result<Vec<f64>>, dir: &[f64]| -> Result<Vec<f64>> {
        let plus: Vec<f64> = p.iter().zip(dir).map(|(a, b)| a + flow_eps * b).collect();
        let minus: Vec<f64> = p.iter().zip(dir).map(|(a, b)| a - flow_eps * b).collect();
        let (vp, vm) = (v(&plus)?, v(&minus)?);
        Ok(vp.iter().zip(&vm).map(|(a, b)| (a - b) / (2.0 * flow_eps)).collect())
    };
    let xp = x(p)?;
    let yp = y(p)?;
    let dxy = directional(&y, &xp)?;
    let dyx = directional(&x, &yp)?;
    let bracket_model = field.algebra().bracket_raw(&z1, zeta2);
    let expected = field.frame_vector(&bracket_model, p)?;
    Ok(dxy
        .iter()
        .zip(&dyx)
        .zip(&expected)
        .map(|((a, b), e)| (a - b - e).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaStat {
    /// `A_bc` with `A` the algebra label.
    pub component: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// Outcome of [`is_cartan_form`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartanReport {
    pub example: String,
    pub samples: usize,
    pub tol: f64,
    pub h: f64,
    pub seed: u64,
    pub pass: bool,
    pub worst_violation: f64,
    pub worst_point: Vec<f64>,
    /// Largest `|dϖ + ½[ϖ∧ϖ]|` in frame components, horizontal part included.
    pub worst_residual: f64,
    pub worst_condition: f64,
    /// Points where the frame or stencil could not be evaluated.
    pub failed_points: usize,
    pub omega_stats: Vec<OmegaStat>,
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
    /// `Ω^A_{bc}` per sample, `b < c`, ordered like `omega_stats`.
    #[serde(skip)]
    pub omega_samples: Vec<Vec<f64>>,
}

/// Samples the chart uniformly (seeded) and checks the horizontality of the residual.
pub fn is_cartan_form(field: &CoframeField, sample_count: usize, tol: f64, seed: u64, h: f64) -> CartanReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 10.0 * h;
    let points: Vec<Vec<f64>> = (0..sample_count)
        .map(|_| field.domain().sample(&mut rng, margin))
        .collect();
    let results: Vec<Result<StructureResidual>> =
        points.par_iter().map(|p| structure_residual_at(field, p, h)).collect();

    let dim = field.dim();
    let m = field.model().m();
    let n = dim - m;
    let labels = field.algebra().labels().to_vec();
    let mut components = Vec::new();
    for a in 0..dim {
        for b in 0..n {
            for c in b + 1..n {
                components.push((a, b, c));
            }
        }
    }

    let mut worst_violation = 0.0_f64;
    let mut worst_point = Vec::new();
    let mut worst_residual = 0.0_f64;
    let mut worst_condition = 0.0_f64;
    let mut failed_points = 0;
    let mut omega_samples = Vec::with_capacity(points.len());
    let mut kept_points = Vec::with_capacity(points.len());
    for (p, r) in points.iter().zip(results) {
        match r {
            Ok(r) => {
                if r.vertical_violation > worst_violation || worst_point.is_empty() {
                    worst_violation = worst_violation.max(r.vertical_violation);
                    worst_point = p.clone();
                }
                worst_residual = worst_residual.max(r.max_abs());
                worst_condition = worst_condition.max(r.condition);
                omega_samples.push(components.iter().map(|&(a, b, c)| r.omega(a, b, c)).collect::<Vec<_>>());
                kept_points.push(p.clone());
            }
            Err(_) => {
                failed_points += 1;
                if worst_violation.is_finite() {
                    worst_point = p.clone();
                }
                worst_violation = f64::INFINITY;
            }
        }
    }

    let omega_stats = components
        .iter()
        .enumerate()
        .map(|(k, &(a, b, c))| {
            let vals = omega_samples.iter().map(|s| s[k]);
            let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
            for v in vals {
                lo = lo.min(v);
                hi = hi.max(v);
                sum += v;
            }
            let count = omega_samples.len().max(1) as f64;
            OmegaStat {
                component: format!("{}_{}{}", labels[a], b + 1, c + 1),
                min: lo,
                max: hi,
                mean: sum / count,
            }
        })
        .collect();

    CartanReport {
        example: field.name().to_string(),
        samples: sample_count,
        tol,
        h,
        seed,
        pass: failed_points == 0 && worst_violation <= tol,
        worst_violation,
        worst_point,
        worst_residual,
        worst_condition,
        failed_points,
        omega_stats,
        points: kept_points,
        omega_samples,
    }
}

/// `E·v` helper for callers holding a frame and a coefficient vector.
pub fn apply_frame(e: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (e * DVector::from_column_slice(v)).iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use crate::klein::build_catalog_entry;
    use crate::lie::ModelAlgebra;
    use serde_json::Value;

    fn field(id: &str) -> CoframeField {
        build_catalog_entry(id, &Value::Null).unwrap().field
    }

    #[test]
    fn flat_residual_vanishes() {
        let f = field("flat_so2");
        let rep = is_cartan_form(&f, 100, ANALYTIC_TOL, 1, DEFAULT_STEP);
        assert!(rep.pass);
        assert!(rep.worst_residual <= 5e-8, "{}", rep.worst_residual);
    }

    #[test]
    fn corrupted_violation_matches_hand_computation() {
        // ω = (1+y)dz has R^ξ = dy∧dz (no bracket term lands in ξ), ξ̄ = ∂z/(1+y), ē2 = (−sin z, cos z, 0),
        // so R^ξ(ξ̄, ē2) = −cos z/(1+y)
        let f = field("flat_so2_corrupted");
        let p = [0.1, 0.2, 0.0];
        let r = structure_residual_at(&f, &p, DEFAULT_STEP).unwrap();
        let expected = 1.0 / 1.2;
        assert!((r.r_frame.get(0, &[0, 2]).abs() - expected).abs() < 1e-6);
        assert!(r.vertical_violation >= expected - 1e-6);
        assert!(horizontality_check(&f, &p, DEFAULT_STEP, &[1.0]).unwrap() > 0.05);
        let rep = is_cartan_form(&f, 50, ANALYTIC_TOL, 3, DEFAULT_STEP);
        assert!(!rep.pass);
        assert!(rep.worst_violation > 0.1);
        assert_eq!(rep.worst_point.len(), 3);
    }

    #[test]
    fn omega_reconstruction_leaves_only_vertical_part() {
        let f = field("sphere_so3");
        let r = structure_residual_at(&f, &[0.4, 1.1, 2.0], DEFAULT_STEP).unwrap();
        assert!(r.non_horizontal_part().max_abs() <= r.vertical_violation + 1e-10);
    }

    #[test]
    fn identity_coframe_on_abelian_model() {
        let dom = ChartDomain::boxed(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        let f = CoframeField::new("id", dom, ModelAlgebra::translations(3), |_| DMatrix::identity(3, 3)).unwrap();
        let r = structure_residual_at(&f, &[0.0; 3], DEFAULT_STEP).unwrap();
        assert!(r.max_abs() < 1e-12);
        // abelian translations: all brackets vanish
        let gap = bracket_compatibility_check(&f, &[0.1, 0.2, 0.3], &[], &[1.0, 0.0, 0.0], 1e-3).unwrap();
        assert!(gap <= 1e-6);
    }

    #[test]
    fn flat_equivariance_is_exact() {
        let f = field("flat_so2");
        let e = equivariance_residual(&f, &[0.3, -0.5, 1.0], &[1.0], DEFAULT_STEP, DEFAULT_FLOW_EPS).unwrap();
        assert!(e <= 1e-5, "{e}");
    }

    #[test]
    fn corrupted_equivariance_tracks_vertical_contraction() {
        let f = field("flat_so2_corrupted");
        let p = [0.1, 0.2, 0.4];
        let eq = equivariance_residual(&f, &p, &[1.0], DEFAULT_STEP, DEFAULT_FLOW_EPS).unwrap();
        let hz = horizontality_check(&f, &p, DEFAULT_STEP, &[1.0]).unwrap();
        assert!((eq - hz).abs() < 1e-4, "{eq} vs {hz}");
    }

    #[test]
    fn scaled_tolerance() {
        assert_eq!(scaled_tol(1e-6, 1e-4), 1e-6);
        assert!((scaled_tol(1e-6, 1e-3) - 1e-4).abs() < 1e-18);
        assert_eq!(scaled_tol(1e-6, 1e-5), 1e-6);
    }
}
