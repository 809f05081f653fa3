//! Curvature, torsion, covariant differentials and the Einstein panel.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cartan::structure_residual_at;
use crate::chart::{check_step, CoframeField};
use crate::error::{GfbError, Result};
use crate::forms::{self, Form};

/// Accepted `|ρᵀη + ηρ|` for an invariant metric.
pub const METRIC_TOL: f64 = 1e-10;

/// Step recommended for the nested differences in the Bianchi and Ricci checks.
pub const NESTED_STEP: f64 = 1e-3;

/// `Ω^i_{bc}`: the 𝔤 rows of the residual on horizontal frame pairs.
pub fn curvature_at(field: &CoframeField, p: &[f64], h: f64) -> Result<Form> {
    let r = structure_residual_at(field, p, h)?;
    Ok(r.omega_coeffs.restrict_values(0..r.m))
}

/// `Θ^a_{bc}`: the `ℝⁿ` rows of the residual on horizontal frame pairs.
pub fn torsion_at(field: &CoframeField, p: &[f64], h: f64) -> Result<Form> {
    let r = structure_residual_at(field, p, h)?;
    let dim = field.dim();
    Ok(r.omega_coeffs.restrict_values(r.m..dim))
}

/// Pairing table `k^a_{ib} = ρ(ξ_i)^a_b` for [`Form::wedge_with`].
fn pairing(rho: &[DMatrix<f64>], v: usize) -> Vec<f64> {
    let m = rho.len();
    let mut k = vec![0.0; v * m * v];
    for a in 0..v {
        for (i, r) in rho.iter().enumerate() {
            for b in 0..v {
                k[(a * m + i) * v + b] = r[(a, b)];
            }
        }
    }
    k
}

fn check_rho(field: &CoframeField, rho: &[DMatrix<f64>], v: usize) -> Result<()> {
    let m = field.model().m();
    if rho.len() != m {
        return Err(GfbError::DimensionMismatch {
            expected: m,
            got: rho.len(),
        });
    }
    for r in rho {
        if r.nrows() != v || r.ncols() != v {
            return Err(GfbError::DimensionMismatch {
                expected: v,
                got: r.nrows(),
            });
        }
    }
    Ok(())
}

/// The connection part `ω` of the coframe as a 1-form at `p`.
fn connection_form(field: &CoframeField, p: &[f64]) -> Result<Form> {
    let w = field.eval(p)?;
    let m = field.model().m();
    Ok(Form::from_one_form(&w.rows(0, m).into_owned()))
}

/// `d^ωψ = dψ + ρ(ω)∧ψ` at `p`, in coordinate components.
///
/// `psi` returns the coordinate components of a `V`-valued `k`-form; `rho` holds one
/// `V×V` matrix per 𝔤 basis element.
pub fn covariant_exterior_derivative<F>(
    field: &CoframeField,
    psi: F,
    rho: &[DMatrix<f64>],
    p: &[f64],
    h: f64,
) -> Result<Form>
where
    F: Fn(&[f64]) -> Result<Form>,
{
    check_step(h)?;
    field.domain().check_stencil(p, h)?;
    let here = psi(p)?;
    check_rho(field, rho, here.value_dim())?;
    let d = forms::exterior_derivative(&psi, p, h)?;
    let omega = connection_form(field, p)?;
    let v = here.value_dim();
    let wedge = omega.wedge_with(&here, v, &pairing(rho, v))?;
    d.add(&wedge)
}

/// Frame components of a coordinate form at `p`.
pub fn to_frame(field: &CoframeField, p: &[f64], form: &Form) -> Result<Form> {
    form.contract_frame(&field.frame_at(p)?.e)
}

/// 𝔤 rows of `dϖ + ½[ϖ∧ϖ]` in coordinates (this is `dω + ½[ω∧ω]`).
fn curvature_form(field: &CoframeField, p: &[f64], h: f64) -> Result<Form> {
    let r = structure_residual_at(field, p, h)?;
    Ok(r.r.restrict_values(0..r.m))
}

/// Max-norm of `d^ωΩ` (frame components), using the adjoint action on 𝔤.
pub fn bianchi_residual(field: &CoframeField, p: &[f64], h: f64) -> Result<f64> {
    let adj = field.model().g_adjoint();
    let dw = covariant_exterior_derivative(field, |x| curvature_form(field, x, h), &adj, p, h)?;
    Ok(to_frame(field, p, &dw)?.max_abs())
}

/// Max-norm of `d^ωd^ωψ − ρ(Ω)∧ψ` (frame components).
pub fn ricci_identity_residual<F>(field: &CoframeField, psi: F, rho: &[DMatrix<f64>], p: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Form> + Sync,
{
    let inner = |x: &[f64]| covariant_exterior_derivative(field, &psi, rho, x, h);
    let lhs = covariant_exterior_derivative(field, inner, rho, p, h)?;
    let here = psi(p)?;
    let v = here.value_dim();
    let omega = curvature_form(field, p, h)?;
    let rhs = omega.wedge_with(&here, v, &pairing(rho, v))?;
    Ok(to_frame(field, p, &lhs.sub(&rhs)?)?.max_abs())
}

/// The solder form `α` as an `ℝⁿ`-valued coordinate 1-form field.
pub fn solder_form(field: &CoframeField) -> impl Fn(&[f64]) -> Result<Form> + Sync + '_ {
    move |x: &[f64]| {
        let w = field.eval_unchecked(x);
        let m = field.model().m();
        let n = field.model().n();
        Ok(Form::from_one_form(&w.rows(m, n).into_owned()))
    }
}

/// Curvature invariants at a point, all in frame indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePanel {
    pub point: Vec<f64>,
    /// `Ω^i_{bc}` as `[i][b][c]`.
    pub omega: Vec<Vec<Vec<f64>>>,
    /// `Θ^a_{bc}` as `[a][b][c]`.
    pub theta: Vec<Vec<Vec<f64>>>,
    /// `Riem^a_{d,bc} = Ω^i_{bc} ρ(ξ_i)^a_d` as `[a][d][b][c]`.
    pub riem: Vec<Vec<Vec<Vec<f64>>>>,
    /// `Ric_{dc} = Ω^i_{bc} ρ(ξ_i)^b_d`.
    pub ric: Vec<Vec<f64>>,
    pub scal: f64,
    pub ein: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn to_matrix(v: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(v.len(), v.len(), |i, j| v[i][j])
}

impl CurvaturePanel {
    pub fn n(&self) -> usize {
        self.eta.len()
    }

    /// `η^{ab} Ein_{ab}`.
    pub fn ein_trace(&self) -> f64 {
        let inv = to_matrix(&self.eta)
            .try_inverse()
            .expect("metric was checked invertible");
        let ein = to_matrix(&self.ein);
        (0..self.n())
            .flat_map(|a| (0..self.n()).map(move |b| (a, b)))
            .map(|(a, b)| inv[(a, b)] * ein[(a, b)])
            .sum()
    }

    /// `max |Ric − Ricᵀ|`.
    pub fn ric_asymmetry(&self) -> f64 {
        let r = to_matrix(&self.ric);
        (&r - r.transpose()).amax()
    }

    /// `max |Ein − Einᵀ|`.
    pub fn ein_asymmetry(&self) -> f64 {
        let e = to_matrix(&self.ein);
        (&e - e.transpose()).amax()
    }

    pub fn max_torsion(&self) -> f64 {
        self.theta.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest entry of every tensor in the panel.
    pub fn max_abs(&self) -> f64 {
        let m = |it: &mut dyn Iterator<Item = &f64>| it.fold(0.0_f64, |a, x| a.max(x.abs()));
        [
            m(&mut self.omega.iter().flatten().flatten()),
            self.max_torsion(),
            m(&mut self.riem.iter().flatten().flatten().flatten()),
            m(&mut self.ric.iter().flatten()),
            self.scal.abs(),
            m(&mut self.ein.iter().flatten()),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `max |Ein − T|` for a stress–energy matrix `T`.
    pub fn field_equation_residual(&self, t: &DMatrix<f64>) -> f64 {
        (to_matrix(&self.ein) - t).amax()
    }
}

/// Checks `ρ(ξ_i)ᵀη + ηρ(ξ_i) = 0` for every basis element.
pub fn metric_invariance_residual(rho: &[DMatrix<f64>], eta: &DMatrix<f64>) -> f64 {
    rho.iter()
        .map(|r| (r.transpose() * eta + eta * r).amax())
        .fold(0.0, f64::max)
}

/// Ω, Θ, Riem, Ric, Scal and Ein at `p`; `ρ` comes from the field's model algebra.
pub fn einstein_panel(field: &CoframeField, p: &[f64], h: f64, eta: &DMatrix<f64>) -> Result<CurvaturePanel> {
    let model = field.model();
    let (m, n) = (model.m(), model.n());
    if eta.nrows() != n || eta.ncols() != n {
        return Err(GfbError::DimensionMismatch {
            expected: n,
            got: eta.nrows(),
        });
    }
    let rho = model.data().rho();
    let res = metric_invariance_residual(rho, eta);
    if res > METRIC_TOL {
        return Err(GfbError::NonInvariantMetric(res));
    }
    let eta_inv = eta
        .clone()
        .try_inverse()
        .ok_or(GfbError::NonInvariantMetric(f64::INFINITY))?;
    let r = structure_residual_at(field, p, h)?;
    let om = |i: usize, b: usize, c: usize| r.omega(i, b, c);

    let omega: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|i| (0..n).map(|b| (0..n).map(|c| om(i, b, c)).collect()).collect())
        .collect();
    let theta: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|a| (0..n).map(|b| (0..n).map(|c| om(m + a, b, c)).collect()).collect())
        .collect();
    let riem: Vec<Vec<Vec<Vec<f64>>>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|d| {
                    (0..n)
                        .map(|b| {
                            (0..n)
                                .map(|c| (0..m).map(|i| om(i, b, c) * rho[i][(a, d)]).sum())
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let ric = DMatrix::from_fn(n, n, |d, c| {
        (0..m)
            .map(|i| (0..n).map(|b| om(i, b, c) * rho[i][(b, d)]).sum::<f64>())
            .sum()
    });
    let scal: f64 = (0..n)
        .flat_map(|d| (0..n).map(move |a| (d, a)))
        .map(|(d, a)| eta_inv[(d, a)] * ric[(d, a)])
        .sum();
    let ein = &ric - eta * (0.5 * scal);
    Ok(CurvaturePanel {
        point: p.to_vec(),
        omega,
        theta,
        riem,
        ric: rows(&ric),
        scal,
        ein: rows(&ein),
        eta: rows(eta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::DEFAULT_STEP;
    use crate::klein::build_catalog_entry;
    use serde_json::{json, Value};

    fn field(id: &str) -> CoframeField {
        build_catalog_entry(id, &Value::Null).unwrap().field
    }

    #[test]
    fn flat_panel_vanishes() {
        let e = build_catalog_entry("flat_so2", &Value::Null).unwrap();
        let panel = einstein_panel(&e.field, &[0.2, 0.1, 1.0], DEFAULT_STEP, &e.eta).unwrap();
        assert!(panel.max_abs() < 1e-8);
        assert!(bianchi_residual(&e.field, &[0.2, 0.1, 1.0], NESTED_STEP).unwrap() < 1e-8);
    }

    #[test]
    fn non_invariant_metric_rejected() {
        let f = field("flat_so2");
        let eta = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert!(matches!(
            einstein_panel(&f, &[0.0, 0.0, 0.0], DEFAULT_STEP, &eta),
            Err(GfbError::NonInvariantMetric(_))
        ));
    }

    #[test]
    fn torsion_fixture_is_linear_in_c() {
        let p = [0.3, -0.2, 0.0];
        let theta = |c: f64| {
            let e = build_catalog_entry("flat_so2_torsion", &json!({ "c": c })).unwrap();
            torsion_at(&e.field, &p, DEFAULT_STEP).unwrap().get(0, &[0, 1])
        };
        let (a, b, c) = (theta(0.1), theta(0.5), theta(1.0));
        assert!((a - 0.1).abs() < 1e-8 && (b - 0.5).abs() < 1e-8 && (c - 1.0).abs() < 1e-8);
        assert!((b - 5.0 * a).abs() < 1e-8);
        let e = build_catalog_entry("flat_so2_torsion", &json!({ "c": 1.0 })).unwrap();
        assert!(curvature_at(&e.field, &p, DEFAULT_STEP).unwrap().max_abs() < 1e-8);
        assert!(bianchi_residual(&e.field, &p, NESTED_STEP).unwrap() < 1e-3);
    }

    #[test]
    fn covariant_derivative_of_solder_form_is_torsion() {
        let e = build_catalog_entry("flat_so2_torsion", &json!({ "c": 0.7 })).unwrap();
        let f = &e.field;
        let p = [0.1, 0.4, 0.9];
        let rho = f.model().data().rho().to_vec();
        let d = covariant_exterior_derivative(f, solder_form(f), &rho, &p, DEFAULT_STEP).unwrap();
        let frame = to_frame(f, &p, &d).unwrap();
        let theta = torsion_at(f, &p, DEFAULT_STEP).unwrap();
        let m = f.model().m();
        for a in 0..2 {
            assert!((frame.get(a, &[m, m + 1]) - theta.get(a, &[0, 1])).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_scalar_has_zero_differential() {
        let f = field("sphere_so3");
        let psi = |_: &[f64]| -> Result<Form> {
            let mut s = Form::zeros(1, 3, 0);
            s.set(0, &[], 2.5);
            Ok(s)
        };
        let trivial = vec![DMatrix::zeros(1, 1)];
        let d = covariant_exterior_derivative(&f, psi, &trivial, &[1.0, 1.2, 0.5], DEFAULT_STEP).unwrap();
        assert!(d.max_abs() < 1e-12);
    }
}
