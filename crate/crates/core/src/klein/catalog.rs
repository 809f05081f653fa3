//! The example catalog: coframes in explicit charts plus, where available, the global group action.
//!
//! Coordinates per entry:
//!
//! * `flat_so2`: `(x, y, z)`, `z` periodic on `[0, 2π)`, chart point ↔ `(R(z), R(−z)(x,y))`.
//! * `twisted_torus`: `(x, y, z)`, `z` periodic on `[0, 2π)`, chart point ↔ `(R(z/2), (x,y))` in `{±1}\(SO(2)⋉ℝ²)`.
//! * `sphere_so3`: ZYZ Euler angles `(φ, θ, ψ)`, `φ, ψ` periodic, `θ` bounded away from the poles.
//! * `spin4_flat`, `spin4_mod_z2`: `(v, w, x′) ∈ ℝ³×ℝ³×ℝ⁴` with `p = (√(1−|v|²), v)`, `q = (√(1−|w|²), w)`,
//!   chart point ↔ `((p,q), p̄ x′ q)`.
//! * `flat_so2_corrupted`: `flat_so2` with `y·dz` added to `ω`.
//! * `flat_so2_torsion`: `flat_so2` with `ω = dz − c·dx`.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::Value;

use super::groups::{GroupElement, SemidirectGroup, So2Group, Spin4Group};
use super::quaternion as quat;
use super::quotient::QuotientPresentation;
use crate::chart::{ChartDomain, CoframeField};
use crate::error::{GfbError, Result};
use crate::lie::{rotation_generator, LieAlgebra, ModelAlgebra, SemidirectData};

const IDS: &[&str] = &[
    "flat_so2",
    "twisted_torus",
    "sphere_so3",
    "spin4_flat",
    "spin4_mod_z2",
    "flat_so2_corrupted",
    "flat_so2_torsion",
];

pub fn catalog_ids() -> &'static [&'static str] {
    IDS
}

type ToGroup = Arc<dyn Fn(&[f64]) -> GroupElement + Send + Sync>;
type FromGroup = Arc<dyn Fn(&GroupElement) -> Result<Vec<f64>> + Send + Sync>;

#[derive(Clone)]
struct ChartMap {
    to_group: ToGroup,
    from_group: FromGroup,
    /// Chart 𝔤-coefficients are multiplied by this before the group exponential.
    xi_scale: f64,
}

/// A catalog example: its coframe and, for locally Klein entries, the global action.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub field: CoframeField,
    pub quotient: Option<QuotientPresentation>,
    /// Invariant metric on `ℝⁿ` for the Einstein panel.
    pub eta: DMatrix<f64>,
    chart_map: Option<ChartMap>,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("field", &self.field)
            .field("has_action", &self.has_action())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogInfo {
    pub id: String,
    pub description: String,
    pub dim: usize,
    pub g_dim: usize,
    pub n: usize,
    pub has_action: bool,
    pub domain: ChartDomain,
}

impl CatalogEntry {
    pub fn has_action(&self) -> bool {
        self.chart_map.is_some() && self.quotient.is_some()
    }

    fn map(&self) -> Result<&ChartMap> {
        self.chart_map
            .as_ref()
            .ok_or_else(|| GfbError::NoGroupAction(self.id.clone()))
    }

    pub fn group(&self) -> Result<&SemidirectGroup> {
        self.quotient
            .as_ref()
            .map(|q| q.group())
            .ok_or_else(|| GfbError::NoGroupAction(self.id.clone()))
    }

    /// A representative of the chart point in `G⋉V`.
    pub fn chart_to_group(&self, p: &[f64]) -> Result<GroupElement> {
        let map = self.map()?;
        self.field.domain().check_point(p)?;
        Ok((map.to_group)(&self.field.domain().wrap(p)))
    }

    pub fn group_to_chart(&self, e: &GroupElement) -> Result<Vec<f64>> {
        (self.map()?.from_group)(e)
    }

    /// `exp` of a 𝔤-element given in the chart's algebra basis.
    pub fn exp_g(&self, xi: &[f64]) -> Result<GroupElement> {
        let map = self.map()?;
        let g = self.group()?.g();
        if xi.len() != g.algebra_dim() {
            return Err(GfbError::DimensionMismatch {
                expected: g.algebra_dim(),
                got: xi.len(),
            });
        }
        let scaled: Vec<f64> = xi.iter().map(|x| x * map.xi_scale).collect();
        Ok(g.exp(&scaled))
    }

    /// `p·g`: right multiplication by `(g, 0)` transported to the chart.
    pub fn act_right(&self, p: &[f64], g: &GroupElement) -> Result<Vec<f64>> {
        let group = self.group()?;
        let h = self.chart_to_group(p)?;
        let moved = group.mul(&h, &group.from_g(g));
        self.group_to_chart(&moved)
    }

    pub fn info(&self) -> CatalogInfo {
        CatalogInfo {
            id: self.id.clone(),
            description: self.description.clone(),
            dim: self.field.dim(),
            g_dim: self.field.model().m(),
            n: self.field.model().n(),
            has_action: self.has_action(),
            domain: self.field.domain().clone(),
        }
    }
}

/// Listing of every catalog entry with default parameters.
pub fn catalog_info() -> Vec<CatalogInfo> {
    IDS.iter()
        .map(|id| {
            build_catalog_entry(id, &Value::Null)
                .expect("defaults are valid")
                .info()
        })
        .collect()
}

struct Params<'a> {
    id: &'a str,
    map: serde_json::Map<String, Value>,
}

impl<'a> Params<'a> {
    fn new(id: &'a str, v: &Value, allowed: &[&str]) -> Result<Self> {
        let map = match v {
            Value::Null => serde_json::Map::new(),
            Value::Object(m) => m.clone(),
            _ => {
                return Err(GfbError::InvalidParameter {
                    name: "params".into(),
                    reason: format!("{id}: expected an object"),
                })
            }
        };
        if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(GfbError::InvalidParameter {
                name: k.clone(),
                reason: format!("not a parameter of {id} (allowed: {allowed:?})"),
            });
        }
        Ok(Self { id, map })
    }

    fn f64(&self, name: &str, default: f64, lo: f64, hi: f64) -> Result<f64> {
        let v = match self.map.get(name) {
            None => default,
            Some(v) => v.as_f64().ok_or_else(|| GfbError::InvalidParameter {
                name: name.into(),
                reason: format!("{}: expected a number", self.id),
            })?,
        };
        if !(lo < v && v <= hi) {
            return Err(GfbError::InvalidParameter {
                name: name.into(),
                reason: format!("{}: {v} outside ({lo}, {hi}]", self.id),
            });
        }
        Ok(v)
    }
}

fn so2_model() -> ModelAlgebra {
    ModelAlgebra::catalog("so2_semi_r2").expect("catalog algebra")
}

fn so2_box(half: f64) -> Result<ChartDomain> {
    ChartDomain::new(vec![-half, -half, 0.0], vec![half, half, TAU], vec![false, false, true])
}

/// `ω = dz`, `α = R(−z)·(dx, dy)`.
fn flat_so2_w(p: &[f64]) -> DMatrix<f64> {
    let (s, c) = p[2].sin_cos();
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, c, s, 0.0, -s, c, 0.0])
}

fn rot(theta: f64, v: &[f64]) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

fn so2_sd() -> SemidirectGroup {
    SemidirectGroup::new(Arc::new(So2Group))
}

fn flat_so2(params: &Value) -> Result<CatalogEntry> {
    let p = Params::new("flat_so2", params, &["half_width"])?;
    let half = p.f64("half_width", 2.0, 0.0, 1e6)?;
    let field = CoframeField::new("flat_so2", so2_box(half)?, so2_model(), flat_so2_w)?;
    let sd = so2_sd();
    let to = {
        let sd = sd.clone();
        move |p: &[f64]| sd.join(&So2Group::rotation(p[2]), &rot(-p[2], &p[0..2]))
    };
    let from = {
        let sd = sd.clone();
        move |e: &GroupElement| -> Result<Vec<f64>> {
            let (g, x) = sd.split(e);
            let xy = rot(g.0[0], &x);
            Ok(vec![xy[0], xy[1], g.0[0].rem_euclid(TAU)])
        }
    };
    let quotient = QuotientPresentation::new(sd.clone(), vec![sd.identity()], 1e-10)?;
    Ok(CatalogEntry {
        id: "flat_so2".into(),
        description: "SO(2)⋉ℝ² Maurer–Cartan coframe on plane × fibre circle".into(),
        field,
        quotient: Some(quotient),
        eta: DMatrix::identity(2, 2),
        chart_map: Some(ChartMap {
            to_group: Arc::new(to),
            from_group: Arc::new(from),
            xi_scale: 1.0,
        }),
    })
}

/// `ω = dz`, `α¹ = dx − ½y dz`, `α² = dy + ½x dz`.
fn twisted_w(p: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 1.0, 0.0, -0.5 * p[1], 0.0, 1.0, 0.5 * p[0]])
}

fn twisted_torus(params: &Value) -> Result<CatalogEntry> {
    let p = Params::new("twisted_torus", params, &["half_width"])?;
    let half = p.f64("half_width", 2.0, 0.0, 1e6)?;
    let model = ModelAlgebra::new(SemidirectData::new(
        LieAlgebra::catalog("so2")?,
        2,
        vec![rotation_generator(0.5)],
    )?)?;
    let field = CoframeField::new("twisted_torus", so2_box(half)?, model, twisted_w)?;
    let sd = so2_sd();
    let to = {
        let sd = sd.clone();
        move |p: &[f64]| sd.join(&So2Group::rotation(0.5 * p[2]), &p[0..2])
    };
    let from = {
        let sd = sd.clone();
        move |e: &GroupElement| -> Result<Vec<f64>> {
            let (g, x) = sd.split(e);
            Ok(vec![x[0], x[1], (2.0 * g.0[0]).rem_euclid(TAU)])
        }
    };
    let k = vec![sd.identity(), sd.from_g(&So2Group::rotation(PI))];
    let quotient = QuotientPresentation::new(sd, k, 1e-10)?;
    Ok(CatalogEntry {
        id: "twisted_torus".into(),
        description: "{±1}\\(SO(2)⋉ℝ²) with the ½-normalised fibre generator".into(),
        field,
        quotient: Some(quotient),
        eta: DMatrix::identity(2, 2),
        chart_map: Some(ChartMap {
            to_group: Arc::new(to),
            from_group: Arc::new(from),
            xi_scale: 0.5,
        }),
    })
}

/// so(3) Maurer–Cartan in ZYZ Euler angles, rows `(−ω³, ω¹, ω²)`.
fn sphere_w(p: &[f64]) -> DMatrix<f64> {
    let (st, ct) = p[1].sin_cos();
    let (sp, cp) = p[2].sin_cos();
    DMatrix::from_row_slice(3, 3, &[-ct, 0.0, -1.0, -st * cp, sp, 0.0, st * sp, cp, 0.0])
}

fn sphere_so3(params: &Value) -> Result<CatalogEntry> {
    let p = Params::new("sphere_so3", params, &["theta_margin"])?;
    let m = p.f64("theta_margin", 0.3, 0.0, 1.5)?;
    let domain = ChartDomain::new(vec![0.0, m, 0.0], vec![TAU, PI - m, TAU], vec![true, false, true])?;
    let model = ModelAlgebra::new(SemidirectData::new(
        LieAlgebra::catalog("so2")?,
        2,
        vec![rotation_generator(-1.0)],
    )?)?;
    let field = CoframeField::new("sphere_so3", domain, model, sphere_w)?;
    Ok(CatalogEntry {
        id: "sphere_so3".into(),
        description: "so(3) Maurer–Cartan coframe in Euler angles, read as so(2)⋉ℝ²".into(),
        field,
        quotient: None,
        eta: DMatrix::identity(2, 2),
        chart_map: None,
    })
}

fn unit_from_imag(v: &[f64]) -> quat::Quat {
    let s: f64 = v.iter().map(|x| x * x).sum();
    [(1.0 - s).sqrt(), v[0], v[1], v[2]]
}

/// `∂p/∂v_j` for `p = (√(1−|v|²), v)`.
fn unit_partial(v: &[f64], p0: f64, j: usize) -> quat::Quat {
    let mut d = [0.0; 4];
    d[0] = -v[j] / p0;
    d[j + 1] = 1.0;
    d
}

/// Rows 0–5: `2 Im(p̄ dp)`, `2 Im(q̄ dq)`; rows 6–9: `p̄ dx′ q`.
fn spin4_w(x: &[f64]) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(10, 10);
    let (v, rest) = x.split_at(3);
    let (u, _) = rest.split_at(3);
    let p = unit_from_imag(v);
    let q = unit_from_imag(u);
    let pc = quat::conj(&p);
    let qc = quat::conj(&q);
    for j in 0..3 {
        let dp = quat::mul(&pc, &unit_partial(v, p[0], j));
        let dq = quat::mul(&qc, &unit_partial(u, q[0], j));
        for a in 0..3 {
            w[(a, j)] = 2.0 * dp[a + 1];
            w[(3 + a, 3 + j)] = 2.0 * dq[a + 1];
        }
    }
    for s in 0..4 {
        let mut e = [0.0; 4];
        e[s] = 1.0;
        let img = quat::mul(&quat::mul(&pc, &e), &q);
        for r in 0..4 {
            w[(6 + r, 6 + s)] = img[r];
        }
    }
    w
}

fn spin4_common(id: &str, params: &Value, with_chirality: bool) -> Result<CatalogEntry> {
    let p = Params::new(id, params, &["v_half_width", "x_half_width"])?;
    let a = p.f64("v_half_width", 0.35, 0.0, 0.55)?;
    let b = p.f64("x_half_width", 2.0, 0.0, 1e6)?;
    let mut lower = vec![-a; 6];
    lower.extend([-b; 4]);
    let mut upper = vec![a; 6];
    upper.extend([b; 4]);
    let domain = ChartDomain::boxed(lower, upper)?;
    let field = CoframeField::new(id, domain, ModelAlgebra::catalog("spin4_semi_r4")?, spin4_w)?;
    let sd = SemidirectGroup::new(Arc::new(Spin4Group));
    let to = {
        let sd = sd.clone();
        move |x: &[f64]| {
            let p = unit_from_imag(&x[0..3]);
            let q = unit_from_imag(&x[3..6]);
            let local = quat::mul(&quat::mul(&quat::conj(&p), &x[6..10]), &q);
            sd.join(&Spin4Group::pair(p, q), &local)
        }
    };
    let from = {
        let sd = sd.clone();
        move |e: &GroupElement| -> Result<Vec<f64>> {
            let (g, x) = sd.split(e);
            let (p, q) = Spin4Group::split(&g);
            let (p, mut q) = (quat::normalize(p), quat::normalize(q));
            if with_chirality && q[0] < 0.0 {
                // (1,−1)·(g,x) = ((p,−q), x) names the same class
                q = q.map(|c| -c);
            }
            if p[0] <= 0.0 || q[0] <= 0.0 {
                return Err(GfbError::OutsideDomain { point: e.0.clone() });
            }
            let xp = quat::mul(&quat::mul(&p, &x), &quat::conj(&q));
            let mut out = vec![p[1], p[2], p[3], q[1], q[2], q[3]];
            out.extend_from_slice(&xp);
            Ok(out)
        }
    };
    let mut k = vec![sd.identity()];
    if with_chirality {
        k.push(sd.from_g(&Spin4Group::chirality()));
    }
    let quotient = QuotientPresentation::new(sd, k, 1e-10)?;
    let description = if with_chirality {
        "{(1,1),(1,−1)}\\(Spin(4)⋉ℝ⁴) in the quaternion-pair chart"
    } else {
        "Spin(4)⋉ℝ⁴ Maurer–Cartan coframe in a quaternion-pair chart"
    };
    Ok(CatalogEntry {
        id: id.into(),
        description: description.into(),
        field,
        quotient: Some(quotient),
        eta: DMatrix::identity(4, 4),
        chart_map: Some(ChartMap {
            to_group: Arc::new(to),
            from_group: Arc::new(from),
            xi_scale: 1.0,
        }),
    })
}

fn flat_so2_corrupted(params: &Value) -> Result<CatalogEntry> {
    let p = Params::new("flat_so2_corrupted", params, &["half_width"])?;
    let half = p.f64("half_width", 0.5, 0.0, 0.9)?;
    let base = CoframeField::new("flat_so2", so2_box(half)?, so2_model(), flat_so2_w)?;
    let field = base.perturbed("flat_so2_corrupted", |p| {
        let mut d = DMatrix::zeros(3, 3);
        d[(0, 2)] = p[1];
        d
    });
    Ok(CatalogEntry {
        id: "flat_so2_corrupted".into(),
        description: "negative control: flat_so2 with y·dz added to the connection row".into(),
        field,
        quotient: None,
        eta: DMatrix::identity(2, 2),
        chart_map: None,
    })
}

fn flat_so2_torsion(params: &Value) -> Result<CatalogEntry> {
    let p = Params::new("flat_so2_torsion", params, &["c", "half_width"])?;
    let c = p.f64("c", 0.5, -1e3, 1e3)?;
    let half = p.f64("half_width", 2.0, 0.0, 1e6)?;
    let base = CoframeField::new("flat_so2", so2_box(half)?, so2_model(), flat_so2_w)?;
    let field = base.perturbed("flat_so2_torsion", move |_| {
        let mut d = DMatrix::zeros(3, 3);
        d[(0, 0)] = -c;
        d
    });
    Ok(CatalogEntry {
        id: "flat_so2_torsion".into(),
        description: "flat_so2 with ω = dz − c·dx: flat curvature, torsion c at z = 0".into(),
        field,
        quotient: None,
        eta: DMatrix::identity(2, 2),
        chart_map: None,
    })
}

/// Builds a catalog entry; `params` is a JSON object (or null for defaults).
pub fn build_catalog_entry(id: &str, params: &Value) -> Result<CatalogEntry> {
    match id {
        "flat_so2" => flat_so2(params),
        "twisted_torus" => twisted_torus(params),
        "sphere_so3" => sphere_so3(params),
        "spin4_flat" => spin4_common(id, params, false),
        "spin4_mod_z2" => spin4_common(id, params, true),
        "flat_so2_corrupted" => flat_so2_corrupted(params),
        "flat_so2_torsion" => flat_so2_torsion(params),
        other => Err(GfbError::UnknownId(other.to_string())),
    }
}
