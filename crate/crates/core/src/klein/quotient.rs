//! Discrete quotients `K\(G⋉V)` and the numerical isotropy search on them.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::groups::{GroupElement, GroupModel, SemidirectGroup};
use crate::error::{GfbError, Result};
use crate::flow::IsotropyFinding;

/// Tunables for the sampled isotropy search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsotropySearch {
    pub seed: u64,
    /// Haar samples added to the model's lattice.
    pub random_samples: usize,
    /// Acceptance threshold on the refined residual.
    pub tol: f64,
    /// Candidates above this residual are not refined.
    pub coarse: f64,
    /// Hits closer than this merge into one element.
    pub cluster: f64,
    /// Largest group accepted while closing under multiplication.
    pub max_order: usize,
}

impl Default for IsotropySearch {
    fn default() -> Self {
        Self {
            seed: 0,
            random_samples: 256,
            tol: 1e-8,
            coarse: 0.6,
            cluster: 1e-3,
            max_order: 64,
        }
    }
}

/// `K\(G⋉V)` for a finite subgroup `K`, presented by representatives.
#[derive(Debug, Clone)]
pub struct QuotientPresentation {
    group: SemidirectGroup,
    k: Vec<GroupElement>,
    tol: f64,
}

impl QuotientPresentation {
    /// Checks that `K` contains the identity and is closed under products and inverses.
    pub fn new(group: SemidirectGroup, k: Vec<GroupElement>, tol: f64) -> Result<Self> {
        let contains = |x: &GroupElement| k.iter().any(|y| group.distance(x, y) <= tol);
        let bad = |reason: &str| GfbError::InvalidParameter {
            name: "K".into(),
            reason: reason.into(),
        };
        if !contains(&group.identity()) {
            return Err(bad("identity missing"));
        }
        for a in &k {
            if !contains(&group.inv(a)) {
                return Err(bad("not closed under inverses"));
            }
            for b in &k {
                if !contains(&group.mul(a, b)) {
                    return Err(bad("not closed under products"));
                }
            }
        }
        Ok(Self { group, k, tol })
    }

    pub fn group(&self) -> &SemidirectGroup {
        &self.group
    }

    pub fn k(&self) -> &[GroupElement] {
        &self.k
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `y ∈ K·x` within the presentation tolerance.
    pub fn equivalent(&self, x: &GroupElement, y: &GroupElement) -> bool {
        self.k
            .iter()
            .any(|k| self.group.distance(&self.group.mul(k, x), y) <= self.tol)
    }

    /// Residual vector of `h (g,0) h⁻¹` against a fixed element of `K`.
    fn conj_residual(&self, h: &GroupElement, h_inv: &GroupElement, g: &GroupElement, k: &GroupElement) -> Vec<f64> {
        let c = self.group.mul(&self.group.mul(h, &self.group.from_g(g)), h_inv);
        sd_difference(&self.group, k, &c)
    }

    fn nearest_k(&self, h: &GroupElement, h_inv: &GroupElement, g: &GroupElement) -> (usize, f64) {
        let c = self.group.mul(&self.group.mul(h, &self.group.from_g(g)), h_inv);
        self.k
            .iter()
            .enumerate()
            .map(|(i, k)| (i, self.group.distance(&c, k)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("K is nonempty")
    }

    /// Elements `g ∈ G` with `[h]·g = [h]`, i.e. `h g h⁻¹ ∈ K`.
    pub fn quotient_isotropy(&self, h: &GroupElement, search: &IsotropySearch) -> Result<IsotropyFinding> {
        let model = self.group.g();
        let h_inv = self.group.inv(h);
        let mut candidates = model.lattice();
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        for _ in 0..search.random_samples {
            candidates.push(model.random(&mut rng));
        }

        let hits: Vec<(GroupElement, f64)> = candidates
            .par_iter()
            .filter_map(|g| {
                let (ki, r0) = self.nearest_k(h, &h_inv, g);
                if r0 > search.coarse {
                    return None;
                }
                let k = &self.k[ki];
                let (g, r) = refine(model, g.clone(), |x| self.conj_residual(h, &h_inv, x, k), 60);
                (r <= search.tol).then_some((g, r))
            })
            .collect();

        let mut elements = vec![model.identity()];
        let mut max_residual = 0.0_f64;
        for (g, r) in hits {
            if !elements.iter().any(|e| model.distance(e, &g) < search.cluster) {
                elements.push(g);
            }
            max_residual = max_residual.max(r);
        }
        let elements = close_under_products(model, elements, search.cluster, search.max_order)?;
        for g in &elements {
            let (_, r) = self.nearest_k(h, &h_inv, g);
            max_residual = max_residual.max(r);
        }
        Ok(IsotropyFinding {
            base_point: h.0.clone(),
            group_point: h.0.clone(),
            group_id: model.id().to_string(),
            order_estimate: elements.len(),
            elements,
            max_residual,
        })
    }
}

/// Componentwise difference `b − a` in `G⋉V`, using the group model's own difference on `G`.
pub(crate) fn sd_difference(group: &SemidirectGroup, a: &GroupElement, b: &GroupElement) -> Vec<f64> {
    let (ga, xa) = group.split(a);
    let (gb, xb) = group.split(b);
    let mut d = group_difference(group.g(), &ga, &gb);
    d.extend(xa.iter().zip(&xb).map(|(u, v)| v - u));
    d
}

/// `b − a` in the model's representation, with angles wrapped for SO(2).
pub(crate) fn group_difference(model: &dyn GroupModel, a: &GroupElement, b: &GroupElement) -> Vec<f64> {
    if model.repr_dim() == 1 {
        let d = b.0[0] - a.0[0];
        let w = (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
        vec![w]
    } else {
        a.0.iter().zip(&b.0).map(|(x, y)| y - x).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Levenberg–Marquardt in the local coordinates `g·exp(δ)`.
pub(crate) fn refine<F>(model: &dyn GroupModel, mut g: GroupElement, residual: F, iters: usize) -> (GroupElement, f64)
where
    F: Fn(&GroupElement) -> Vec<f64>,
{
    let m = model.algebra_dim();
    let step = 1e-7;
    let mut r = residual(&g);
    let mut cost = norm(&r);
    let mut lambda = 1e-3;
    for _ in 0..iters {
        if cost < 1e-14 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), m);
        let mut delta = vec![0.0; m];
        for j in 0..m {
            delta[j] = step;
            let plus = residual(&model.retract(&g, &delta));
            delta[j] = -step;
            let minus = residual(&model.retract(&g, &delta));
            delta[j] = 0.0;
            for i in 0..r.len() {
                jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let rhs = -(&jt * &rv);
        let mut improved = false;
        for _ in 0..8 {
            let a = &jtj + DMatrix::identity(m, m) * lambda;
            let Some(dx) = a.lu().solve(&rhs) else {
                lambda *= 10.0;
                continue;
            };
            let cand = model.retract(&g, dx.as_slice());
            let rc = residual(&cand);
            let cc = norm(&rc);
            if cc < cost {
                g = cand;
                r = rc;
                let rel = (cost - cc) / cost.max(1e-300);
                cost = cc;
                lambda = (lambda / 3.0).max(1e-12);
                improved = rel > 1e-12 || dx.amax() > 1e-15;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (g, cost)
}

/// Closes a finite set of elements under products; fails once `max_order` is exceeded.
pub fn close_under_products(
    model: &dyn GroupModel,
    mut elements: Vec<GroupElement>,
    cluster: f64,
    max_order: usize,
) -> Result<Vec<GroupElement>> {
    let mut changed = true;
    while changed {
        changed = false;
        let snapshot = elements.clone();
        for a in &snapshot {
            for b in &snapshot {
                let c = model.mul(a, b);
                if !elements.iter().any(|e| model.distance(e, &c) < cluster) {
                    elements.push(c);
                    changed = true;
                    if elements.len() > max_order {
                        return Err(GfbError::ClosureBudgetExceeded);
                    }
                }
            }
        }
    }
    Ok(elements)
}
