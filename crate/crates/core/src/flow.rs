//! Flows of fundamental vector fields, path actions, closure detection and isotropy.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chart::{ChartDomain, CoframeField};
use crate::error::{GfbError, Result};
use crate::klein::quotient::{group_difference, refine};
use crate::klein::{group_model, CatalogEntry, GroupElement, GroupModel, IsotropySearch};
use crate::lie::LieAlgebra;

/// Default closure tolerance in chart units.
pub const CLOSURE_TOL: f64 = 1e-4;

/// Bisection on the closure time stops below this width.
pub const CLOSURE_TIME_TOL: f64 = 1e-8;

/// Smallest step count accepted by [`flow`].
pub const MIN_STEPS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Closure {
    pub period: f64,
    pub distance: f64,
}

/// A sampled flow line with the velocities needed for Hermite interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub xi: Vec<f64>,
    pub times: Vec<f64>,
    /// Unwrapped chart coordinates.
    pub points: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub step: f64,
    /// Time of the last in-domain sample when the orbit left a non-periodic boundary.
    pub left_domain: Option<f64>,
    pub closure: Option<Closure>,
    pub domain: ChartDomain,
}

impl OrbitTrace {
    pub fn end(&self) -> &[f64] {
        self.points.last().expect("trace is nonempty")
    }

    /// Cubic Hermite interpolation of the trajectory at time `t`.
    pub fn interpolate(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.times.len();
        let i = match self.times.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        };
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let dt = t1 - t0;
        let s = (t - t0) / dt;
        let (p0, p1) = (&self.points[i], &self.points[i + 1]);
        let (v0, v1) = (&self.velocities[i], &self.velocities[i + 1]);
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        let d00 = (6.0 * s * s - 6.0 * s) / dt;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d01 = (-6.0 * s * s + 6.0 * s) / dt;
        let d11 = 3.0 * s * s - 2.0 * s;
        let mut p = vec![0.0; p0.len()];
        let mut v = vec![0.0; p0.len()];
        for k in 0..p0.len() {
            p[k] = h00 * p0[k] + h10 * dt * v0[k] + h01 * p1[k] + h11 * dt * v1[k];
            v[k] = d00 * p0[k] + d10 * v0[k] + d01 * p1[k] + d11 * v1[k];
        }
        (p, v)
    }

    /// `d/dt |p(t) − p(0)|²` from the interpolant.
    fn dist2_rate(&self, t: f64) -> (f64, f64) {
        let (p, v) = self.interpolate(t);
        let diff = self.domain.difference(&self.points[0], &p);
        let d2: f64 = diff.iter().map(|d| d * d).sum();
        let rate: f64 = 2.0 * diff.iter().zip(&v).map(|(d, w)| d * w).sum::<f64>();
        (d2, rate)
    }
}

/// One classical RK4 step for an autonomous field; returns the new point.
pub fn rk4_step<F>(field: &F, p: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: f64, x: &[f64]| -> Vec<f64> { p.iter().zip(x).map(|(u, v)| u + a * v).collect() };
    let k1 = field(p)?;
    let k2 = field(&axpy(0.5 * dt, &k1))?;
    let k3 = field(&axpy(0.5 * dt, &k2))?;
    let k4 = field(&axpy(dt, &k3))?;
    Ok((0..p.len())
        .map(|i| p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// RK4 step for a time-dependent field `f(t, p)`.
fn rk4_step_t<F>(field: &F, t: f64, p: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    let axpy = |a: f64, x: &[f64]| -> Vec<f64> { p.iter().zip(x).map(|(u, v)| u + a * v).collect() };
    let k1 = field(t, p)?;
    let k2 = field(t + 0.5 * dt, &axpy(0.5 * dt, &k1))?;
    let k3 = field(t + 0.5 * dt, &axpy(0.5 * dt, &k2))?;
    let k4 = field(t + dt, &axpy(dt, &k3))?;
    Ok((0..p.len())
        .map(|i| p[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// `Φ_t(p)` for the flow of `ξ̄`, using `substeps` RK4 steps.
pub fn flow_map(field: &CoframeField, xi: &[f64], p: &[f64], t: f64, substeps: usize) -> Result<Vec<f64>> {
    let f = |x: &[f64]| field.fundamental_vector(xi, x);
    let dt = t / substeps as f64;
    let mut x = p.to_vec();
    for _ in 0..substeps {
        x = rk4_step(&f, &x, dt)?;
    }
    Ok(x)
}

fn is_exit(e: &GfbError) -> bool {
    matches!(e, GfbError::OutsideDomain { .. })
}

/// Integrates `ṗ = ξ̄(p)` for time `t_total` with `steps` RK4 steps.
///
/// Leaving a non-periodic boundary truncates the trace and sets `left_domain`.
pub fn flow(field: &CoframeField, xi: &[f64], p0: &[f64], t_total: f64, steps: usize) -> Result<OrbitTrace> {
    if steps < MIN_STEPS {
        return Err(GfbError::InvalidParameter {
            name: "steps".into(),
            reason: format!("need at least {MIN_STEPS}, got {steps}"),
        });
    }
    if !(t_total > 0.0) || !t_total.is_finite() {
        return Err(GfbError::InvalidParameter {
            name: "T".into(),
            reason: format!("must be positive, got {t_total}"),
        });
    }
    field.domain().check_point(p0)?;
    let f = |x: &[f64]| field.fundamental_vector(xi, x);
    let dt = t_total / steps as f64;
    let mut trace = OrbitTrace {
        xi: xi.to_vec(),
        times: vec![0.0],
        points: vec![p0.to_vec()],
        velocities: vec![f(p0)?],
        step: dt,
        left_domain: None,
        closure: None,
        domain: field.domain().clone(),
    };
    let mut x = p0.to_vec();
    for k in 0..steps {
        let next = match rk4_step(&f, &x, dt).and_then(|y| f(&y).map(|v| (y, v))) {
            Ok(ok) => ok,
            Err(e) if is_exit(&e) => {
                trace.left_domain = Some(k as f64 * dt);
                break;
            }
            Err(e) => return Err(e),
        };
        x = next.0;
        trace.times.push((k + 1) as f64 * dt);
        trace.points.push(x.clone());
        trace.velocities.push(next.1);
    }
    if trace.times.len() >= 3 {
        trace.closure = detect_closure(&trace, CLOSURE_TOL).map(|period| Closure {
            period,
            distance: trace.dist2_rate(period).0.sqrt(),
        });
    }
    Ok(trace)
}

/// Smallest return time to within `tol` of the start, after first leaving the `tol` ball.
pub fn detect_closure(trace: &OrbitTrace, tol: f64) -> Option<f64> {
    let n = trace.times.len();
    if n < 3 {
        return None;
    }
    let p0 = &trace.points[0];
    let dist = |i: usize| trace.domain.distance(p0, &trace.points[i]);
    let start = (1..n).find(|&i| dist(i) > tol)?;
    let rate_at = |i: usize| -> f64 {
        let diff = trace.domain.difference(p0, &trace.points[i]);
        diff.iter().zip(&trace.velocities[i]).map(|(d, v)| d * v).sum()
    };
    for i in start + 1..n {
        let (r0, r1) = (rate_at(i - 1), rate_at(i));
        let bracket = r0 < 0.0 && r1 >= 0.0;
        // a minimum exactly at the final sample is also a return
        let at_end = i == n - 1 && r1 < 0.0 && dist(i) < tol;
        if !(bracket || at_end) {
            continue;
        }
        let t = if at_end && !bracket {
            trace.times[i]
        } else {
            let (mut lo, mut hi) = (trace.times[i - 1], trace.times[i]);
            while hi - lo > CLOSURE_TIME_TOL {
                let mid = 0.5 * (lo + hi);
                if trace.dist2_rate(mid).1 < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        if trace.dist2_rate(t).0.sqrt() < tol {
            return Some(t);
        }
    }
    None
}

/// One constant piece of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub duration: f64,
    pub xi: Vec<f64>,
}

type PathFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// The log-derivative `a(t) = γ(t)⁻¹γ′(t)` of a group path.
#[derive(Clone)]
pub enum AlgebraPath {
    /// Piecewise-constant schedule; each piece is integrated on its own.
    Piecewise(Vec<PathSegment>),
    /// A continuous `a` on `[0, 1]`.
    Function { dim: usize, samples: usize, a: PathFn },
}

impl std::fmt::Debug for AlgebraPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Piecewise(s) => f.debug_tuple("Piecewise").field(s).finish(),
            Self::Function { dim, samples, .. } => f
                .debug_struct("Function")
                .field("dim", dim)
                .field("samples", samples)
                .finish(),
        }
    }
}

impl AlgebraPath {
    pub fn piecewise(segments: Vec<PathSegment>) -> Result<Self> {
        let dim = segments.first().map(|s| s.xi.len()).unwrap_or(0);
        for s in &segments {
            if !(s.duration >= 0.0) || !s.duration.is_finite() {
                return Err(GfbError::InvalidPath(format!("segment duration {}", s.duration)));
            }
            if s.xi.len() != dim {
                return Err(GfbError::InvalidPath("segments have different dimensions".into()));
            }
        }
        Ok(Self::Piecewise(segments))
    }

    pub fn constant(xi: Vec<f64>, duration: f64) -> Result<Self> {
        Self::piecewise(vec![PathSegment { duration, xi }])
    }

    /// A continuous path; consecutive samples may differ by at most `jump_cap` (max-norm).
    pub fn function<F>(dim: usize, samples: usize, jump_cap: f64, a: F) -> Result<Self>
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        if samples < 2 {
            return Err(GfbError::InvalidPath("need at least 2 samples".into()));
        }
        let mut prev = a(0.0);
        if prev.len() != dim {
            return Err(GfbError::InvalidPath(format!(
                "a(0) has length {}, expected {dim}",
                prev.len()
            )));
        }
        for k in 1..=samples {
            let cur = a(k as f64 / samples as f64);
            let jump = prev.iter().zip(&cur).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            if !(jump <= jump_cap) {
                return Err(GfbError::InvalidPath(format!(
                    "jump {jump:e} between samples exceeds the cap {jump_cap:e}"
                )));
            }
            prev = cur;
        }
        Ok(Self::Function {
            dim,
            samples,
            a: Arc::new(a),
        })
    }

    /// Log-derivative of `γ(t) = exp(u(t))`: `Σ_k (−1)^k/(k+1)! ad_u^k u′`.
    ///
    /// When `u(0) = u(1) = 0` the group path is a closed, contractible loop.
    pub fn from_exponential_curve<U, D>(g: &LieAlgebra, u: U, du: D, samples: usize) -> Result<Self>
    where
        U: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        D: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let g = g.clone();
        let dim = g.dim();
        let a = move |t: f64| {
            let uu = u(t);
            let mut term = du(t);
            let mut out = term.clone();
            let mut fact = 1.0;
            for k in 1..30 {
                term = g.bracket_raw(&uu, &term);
                fact *= (k + 1) as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut small = true;
                for (o, x) in out.iter_mut().zip(&term) {
                    let c = sign * x / fact;
                    *o += c;
                    small &= c.abs() < 1e-18;
                }
                if small {
                    break;
                }
            }
            out
        };
        Self::function(dim, samples, f64::INFINITY, a)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Piecewise(s) => s.first().map(|s| s.xi.len()).unwrap_or(0),
            Self::Function { dim, .. } => *dim,
        }
    }

    pub fn total_time(&self) -> f64 {
        match self {
            Self::Piecewise(s) => s.iter().map(|s| s.duration).sum(),
            Self::Function { .. } => 1.0,
        }
    }
}

/// Integrates `ċ = a(t)‾(c)`; the endpoint stands for `p0·γ(end)`.
///
/// `steps` is the total RK4 budget; piecewise schedules share it by duration.
pub fn integrate_path_action(field: &CoframeField, p0: &[f64], path: &AlgebraPath, steps: usize) -> Result<Vec<f64>> {
    field.domain().check_point(p0)?;
    if steps == 0 {
        return Err(GfbError::InvalidParameter {
            name: "steps".into(),
            reason: "must be positive".into(),
        });
    }
    let m = field.model().m();
    if path.dim() != m && !matches!(path, AlgebraPath::Piecewise(s) if s.is_empty()) {
        return Err(GfbError::DimensionMismatch {
            expected: m,
            got: path.dim(),
        });
    }
    let exit = |e: GfbError, t: f64, x: &[f64]| {
        if is_exit(&e) {
            GfbError::LeftDomain {
                time: t,
                point: x.to_vec(),
            }
        } else {
            e
        }
    };
    let mut x = p0.to_vec();
    match path {
        AlgebraPath::Piecewise(segments) => {
            let total = path.total_time();
            let mut t = 0.0;
            for seg in segments {
                if seg.duration == 0.0 || seg.xi.iter().all(|v| *v == 0.0) {
                    t += seg.duration;
                    continue;
                }
                let n = ((steps as f64 * seg.duration / total).ceil() as usize).max(4);
                let dt = seg.duration / n as f64;
                let f = |y: &[f64]| field.fundamental_vector(&seg.xi, y);
                for _ in 0..n {
                    x = rk4_step(&f, &x, dt).map_err(|e| exit(e, t, &x))?;
                    t += dt;
                }
            }
        }
        AlgebraPath::Function { a, .. } => {
            let dt = 1.0 / steps as f64;
            let f = |t: f64, y: &[f64]| field.fundamental_vector(&a(t), y);
            for k in 0..steps {
                let t = k as f64 * dt;
                x = rk4_step_t(&f, t, &x, dt).map_err(|e| exit(e, t, &x))?;
            }
        }
    }
    Ok(x)
}

/// Chart distance between `p0` and its transport along a loop that closes in the group.
pub fn holonomy_defect(field: &CoframeField, p0: &[f64], path: &AlgebraPath, steps: usize) -> Result<f64> {
    let end = integrate_path_action(field, p0, path, steps)?;
    Ok(field.domain().distance(p0, &end))
}

/// Finite isotropy group found by sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropyFinding {
    /// Chart point (or group representative when produced directly from a quotient).
    pub base_point: Vec<f64>,
    /// Representative of the point in `G⋉V`.
    pub group_point: Vec<f64>,
    pub group_id: String,
    pub elements: Vec<GroupElement>,
    pub order_estimate: usize,
    /// Worst fixing residual over the returned elements.
    pub max_residual: f64,
}

impl IsotropyFinding {
    pub fn is_trivial(&self) -> bool {
        self.order_estimate == 1
    }
}

/// Isotropy group of a chart point of a catalog entry with a global action.
pub fn isotropy_scan(entry: &CatalogEntry, p: &[f64], search: &IsotropySearch) -> Result<IsotropyFinding> {
    let quotient = entry
        .quotient
        .as_ref()
        .ok_or_else(|| GfbError::NoGroupAction(entry.id.clone()))?;
    let h = entry.chart_to_group(p)?;
    let mut finding = quotient.quotient_isotropy(&h, search)?;
    finding.base_point = p.to_vec();
    Ok(finding)
}

/// Orbit type of the first finding relative to the second.
///
/// A smaller isotropy group means a larger orbit type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitTypeOrdering {
    Equal,
    Less,
    Greater,
    Incomparable,
}

/// Searches `c` with `c·S·c⁻¹ ⊆ L` up to `tol`; returns the best residual found.
fn conjugate_into(model: &dyn GroupModel, small: &[GroupElement], large: &[GroupElement], tol: f64) -> f64 {
    let cost = |c: &GroupElement| -> f64 {
        let ci = model.inv(c);
        small
            .iter()
            .map(|s| {
                let cs = model.mul(&model.mul(c, s), &ci);
                large
                    .iter()
                    .map(|l| model.distance(&cs, l))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    let mut candidates = vec![model.identity()];
    candidates.extend(model.lattice());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    candidates.extend((0..128).map(|_| model.random(&mut rng)));
    let mut scored: Vec<(f64, GroupElement)> = candidates.into_iter().map(|c| (cost(&c), c)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    if scored[0].0 <= tol {
        return scored[0].0;
    }
    let mut best = scored[0].0;
    for (_, c) in scored.into_iter().take(8) {
        // fix the nearest targets, then refine the conjugator
        let ci = model.inv(&c);
        let targets: Vec<GroupElement> = small
            .iter()
            .map(|s| {
                let cs = model.mul(&model.mul(&c, s), &ci);
                large
                    .iter()
                    .min_by(|a, b| model.distance(&cs, a).total_cmp(&model.distance(&cs, b)))
                    .expect("nonempty")
                    .clone()
            })
            .collect();
        let residual = |x: &GroupElement| -> Vec<f64> {
            let xi = model.inv(x);
            small
                .iter()
                .zip(&targets)
                .flat_map(|(s, t)| group_difference(model, t, &model.mul(&model.mul(x, s), &xi)))
                .collect()
        };
        let (c, _) = refine(model, c, residual, 60);
        best = best.min(cost(&c));
        if best <= tol {
            break;
        }
    }
    best
}

/// Compares orbit types by searching a conjugator over the sampled group.
pub fn orbit_type_compare(f1: &IsotropyFinding, f2: &IsotropyFinding, tol: f64) -> OrbitTypeOrdering {
    if f1.group_id != f2.group_id {
        return OrbitTypeOrdering::Incomparable;
    }
    let Ok(model) = group_model(&f1.group_id) else {
        return OrbitTypeOrdering::Incomparable;
    };
    let (a, b) = (&f1.elements, &f2.elements);
    let swap = a.len() > b.len();
    let (small, large) = if swap { (b, a) } else { (a, b) };
    if conjugate_into(model.as_ref(), small, large, tol) > tol {
        return OrbitTypeOrdering::Incomparable;
    }
    match (a.len() == b.len(), swap) {
        (true, _) => OrbitTypeOrdering::Equal,
        // f1 has the smaller isotropy group, hence the larger orbit type
        (false, false) => OrbitTypeOrdering::Greater,
        (false, true) => OrbitTypeOrdering::Less,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::klein::{build_catalog_entry, So2Group, Spin4Group};
    use approx::assert_abs_diff_eq;
    use serde_json::Value;
    use std::f64::consts::{PI, TAU};

    fn entry(id: &str) -> CatalogEntry {
        build_catalog_entry(id, &Value::Null).unwrap()
    }

    #[test]
    fn flat_fibre_closes_after_one_turn() {
        let e = entry("flat_so2");
        let p0 = [0.3, -0.4, 1.0];
        let tr = flow(&e.field, &[1.0], &p0, TAU, 400).unwrap();
        assert!(e.field.domain().distance(&p0, tr.end()) < 1e-6);
        let period = tr.closure.as_ref().unwrap().period;
        assert_abs_diff_eq!(period, TAU, epsilon = 1e-4);
        assert!(tr.left_domain.is_none());
    }

    #[test]
    fn translation_orbit_never_closes_and_leaves_box() {
        let e = entry("flat_so2");
        // pure translation e1 at z = 0: straight line in x
        let f = |x: &[f64]| e.field.frame_vector(&[0.0, 1.0, 0.0], x);
        let mut tr = flow(&e.field, &[0.0], &[0.0, 0.0, 0.0], 1.0, 16).unwrap();
        assert!(tr.closure.is_none());
        // build a translation trace by hand through the RK4 helper
        let mut x = vec![-1.0, 0.0, 0.0];
        tr.points = vec![x.clone()];
        tr.velocities = vec![f(&x).unwrap()];
        tr.times = vec![0.0];
        for k in 0..20 {
            x = rk4_step(&f, &x, 0.1).unwrap();
            tr.times.push((k + 1) as f64 * 0.1);
            tr.velocities.push(f(&x).unwrap());
            tr.points.push(x.clone());
        }
        assert!(detect_closure(&tr, 1e-4).is_none());
    }

    #[test]
    fn incomplete_flow_reports_exit_time() {
        // ē_1 flow in flat_so2 at z = 0 moves along x; use a schedule with only translation
        let e = entry("flat_so2");
        let path = AlgebraPath::constant(vec![0.0], 1.0).unwrap();
        assert_eq!(
            integrate_path_action(&e.field, &[1.9, 0.0, 0.0], &path, 8).unwrap(),
            vec![1.9, 0.0, 0.0]
        );
        let tw = entry("twisted_torus");
        // ξ̄ = (½y, −½x, 1) rotates about the centre; radius 2.1 does not fit in the box
        let path = AlgebraPath::constant(vec![1.0], 3.0).unwrap();
        let err = integrate_path_action(&tw.field, &[1.5, 1.47, 0.0], &path, 300).unwrap_err();
        assert!(matches!(err, GfbError::LeftDomain { .. }));
        let tr = flow(&tw.field, &[1.0], &[1.5, 1.47, 0.0], 3.0, 300).unwrap();
        assert!(tr.left_domain.is_some());
    }

    #[test]
    fn twisted_periods() {
        let e = entry("twisted_torus");
        let central = flow(&e.field, &[1.0], &[0.0, 0.0, 0.5], 3.0 * TAU, 3000).unwrap();
        let off = flow(&e.field, &[1.0], &[0.8, -0.3, 0.5], 3.0 * TAU, 3000).unwrap();
        let tc = central.closure.unwrap().period;
        let to = off.closure.unwrap().period;
        assert_abs_diff_eq!(tc, TAU, epsilon = 1e-6);
        assert_abs_diff_eq!(to / tc, 2.0, epsilon = 1e-6);
        // after one revolution the off-centre point sits at (−x0, z0)
        let one = AlgebraPath::constant(vec![1.0], TAU).unwrap();
        let end = integrate_path_action(&e.field, &[0.8, -0.3, 0.5], &one, 2000).unwrap();
        let end = e.field.domain().wrap(&end);
        for (a, b) in end.iter().zip([-0.8, 0.3, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        let defect = holonomy_defect(&e.field, &[0.8, -0.3, 0.5], &one, 2000).unwrap();
        assert_abs_diff_eq!(defect, 2.0 * (0.64f64 + 0.09).sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn rk4_fourth_order_on_flat_orbit() {
        // ζ = ξ + e1 has the closed form x(t) = x0 + (sin(z0+t) − sin z0, cos z0 − cos(z0+t)), z = z0 + t
        let e = entry("flat_so2");
        let p0 = [-0.5f64, -0.5, 0.3];
        let t = 2.0f64;
        let exact = [
            p0[0] + (p0[2] + t).sin() - p0[2].sin(),
            p0[1] - (p0[2] + t).cos() + p0[2].cos(),
            p0[2] + t,
        ];
        let f = |x: &[f64]| e.field.frame_vector(&[1.0, 1.0, 0.0], x);
        let err = |n: usize| {
            let mut x = p0.to_vec();
            for _ in 0..n {
                x = rk4_step(&f, &x, t / n as f64).unwrap();
            }
            x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let ratio = err(20) / err(40);
        assert!((13.0..19.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn flow_group_law() {
        let e = entry("twisted_torus");
        let p0 = [0.4, 0.7, 2.0];
        let a = flow_map(&e.field, &[1.0], &p0, 1.3, 200).unwrap();
        let ab = flow_map(&e.field, &[1.0], &a, 0.9, 200).unwrap();
        let direct = flow_map(&e.field, &[1.0], &p0, 2.2, 400).unwrap();
        assert!(e.field.domain().distance(&ab, &direct) < 1e-6);
    }

    #[test]
    fn contractible_loop_has_no_defect() {
        let e = entry("spin4_flat");
        let g = e.field.model().data().g().clone();
        let r = 0.3;
        let u = move |t: f64| {
            let (s, c) = (TAU * t).sin_cos();
            vec![r * s, r * (1.0 - c), 0.0, 0.5 * r * s, 0.0, -r * (1.0 - c)]
        };
        let du = move |t: f64| {
            let (s, c) = (TAU * t).sin_cos();
            let w = TAU * r;
            vec![w * c, w * s, 0.0, 0.5 * w * c, 0.0, -w * s]
        };
        let path = AlgebraPath::from_exponential_curve(&g, u, du, 64).unwrap();
        let p0 = [0.05, -0.02, 0.01, 0.0, 0.03, -0.04, 0.5, -0.3, 0.2, 0.1];
        assert!(holonomy_defect(&e.field, &p0, &path, 400).unwrap() < 1e-5);
    }

    #[test]
    fn function_path_jump_cap() {
        let step = |t: f64| vec![if t < 0.5 { 0.0 } else { 5.0 }];
        assert!(AlgebraPath::function(1, 32, 1.0, step).is_err());
        assert!(AlgebraPath::function(1, 32, 1.0, |t| vec![t]).is_ok());
        assert!(AlgebraPath::piecewise(vec![PathSegment {
            duration: -1.0,
            xi: vec![1.0]
        }])
        .is_err());
    }

    fn finding(group_id: &str, elements: Vec<GroupElement>) -> IsotropyFinding {
        IsotropyFinding {
            base_point: vec![],
            group_point: vec![],
            group_id: group_id.into(),
            order_estimate: elements.len(),
            elements,
            max_residual: 0.0,
        }
    }

    #[test]
    fn orbit_type_ordering() {
        let e = So2Group.identity();
        let half = So2Group::rotation(PI);
        let triv = finding("so2", vec![e.clone()]);
        let two = finding("so2", vec![e.clone(), half]);
        assert_eq!(orbit_type_compare(&triv, &triv, 1e-6), OrbitTypeOrdering::Equal);
        assert_eq!(orbit_type_compare(&triv, &two, 1e-6), OrbitTypeOrdering::Greater);
        assert_eq!(orbit_type_compare(&two, &triv, 1e-6), OrbitTypeOrdering::Less);

        // Spin(4): the cyclic group generated by (i, 1) and a conjugate of it
        let gen = Spin4Group::pair([0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]);
        let cyc = crate::klein::close_under_products(&Spin4Group, vec![Spin4Group.identity(), gen], 1e-3, 16).unwrap();
        assert_eq!(cyc.len(), 4);
        let c = Spin4Group.lattice()[77].clone();
        let ci = Spin4Group.inv(&c);
        let conj: Vec<GroupElement> = cyc
            .iter()
            .map(|s| Spin4Group.mul(&Spin4Group.mul(&c, s), &ci))
            .collect();
        let f1 = finding("spin4", cyc.clone());
        let f2 = finding("spin4", conj);
        assert_eq!(orbit_type_compare(&f1, &f2, 1e-6), OrbitTypeOrdering::Equal);
        // order 4 cyclic vs the order-2 chirality group: the chirality element is not a square of anything in it
        let chir = finding("spin4", vec![Spin4Group.identity(), Spin4Group::chirality()]);
        assert_eq!(orbit_type_compare(&chir, &f1, 1e-6), OrbitTypeOrdering::Incomparable);
    }

    #[test]
    fn isotropy_requires_action() {
        let e = entry("sphere_so3");
        assert!(matches!(
            isotropy_scan(&e, &[0.0, 1.0, 0.0], &IsotropySearch::default()),
            Err(GfbError::NoGroupAction(_))
        ));
    }
}
