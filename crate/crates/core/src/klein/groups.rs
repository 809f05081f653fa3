//! Compact matrix groups, their actions on a vector space, and semidirect products.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::quaternion as quat;
use crate::error::{GfbError, Result};

/// A group element as a flat real vector in the model's own representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<f64>);

impl GroupElement {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// A compact Lie group `G` acting linearly on `V = ℝⁿ` from the left.
pub trait GroupModel: Send + Sync + fmt::Debug {
    fn id(&self) -> &str;
    /// Length of the element representation.
    fn repr_dim(&self) -> usize;
    fn algebra_dim(&self) -> usize;
    fn v_dim(&self) -> usize;
    fn identity(&self) -> GroupElement;
    fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement;
    fn inv(&self, a: &GroupElement) -> GroupElement;
    fn act_on_v(&self, g: &GroupElement, v: &[f64]) -> Vec<f64>;
    /// Exponential of an algebra element in the catalog basis.
    fn exp(&self, xi: &[f64]) -> GroupElement;
    fn distance(&self, a: &GroupElement, b: &GroupElement) -> f64;
    /// A fixed, fairly dense finite sample of the group.
    fn lattice(&self) -> Vec<GroupElement>;
    /// A Haar-distributed sample.
    fn random(&self, rng: &mut dyn RngCore) -> GroupElement;
    fn check(&self, g: &GroupElement) -> Result<()>;

    /// `g·exp(δ)`: local coordinates around `g`.
    fn retract(&self, g: &GroupElement, delta: &[f64]) -> GroupElement {
        self.mul(g, &self.exp(delta))
    }
}

fn wrap_angle(t: f64) -> f64 {
    let w = (t + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// SO(2) as an angle in `(−π, π]`, acting on `ℝ²` by rotation.
#[derive(Debug, Clone, Copy, Default)]
pub struct So2Group;

impl So2Group {
    pub fn rotation(theta: f64) -> GroupElement {
        GroupElement(vec![wrap_angle(theta)])
    }

    pub const LATTICE_SIZE: usize = 720;
}

impl GroupModel for So2Group {
    fn id(&self) -> &str {
        "so2"
    }
    fn repr_dim(&self) -> usize {
        1
    }
    fn algebra_dim(&self) -> usize {
        1
    }
    fn v_dim(&self) -> usize {
        2
    }
    fn identity(&self) -> GroupElement {
        GroupElement(vec![0.0])
    }
    fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        Self::rotation(a.0[0] + b.0[0])
    }
    fn inv(&self, a: &GroupElement) -> GroupElement {
        Self::rotation(-a.0[0])
    }
    fn act_on_v(&self, g: &GroupElement, v: &[f64]) -> Vec<f64> {
        let (s, c) = g.0[0].sin_cos();
        vec![c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }
    fn exp(&self, xi: &[f64]) -> GroupElement {
        Self::rotation(xi[0])
    }
    fn distance(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        wrap_angle(b.0[0] - a.0[0]).abs()
    }
    fn lattice(&self) -> Vec<GroupElement> {
        (0..Self::LATTICE_SIZE)
            .map(|k| Self::rotation(2.0 * PI * k as f64 / Self::LATTICE_SIZE as f64))
            .collect()
    }
    fn random(&self, rng: &mut dyn RngCore) -> GroupElement {
        Self::rotation(rng.random_range(-PI..PI))
    }
    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.0.len() != 1 || !g.0[0].is_finite() {
            return Err(GfbError::DimensionMismatch {
                expected: 1,
                got: g.0.len(),
            });
        }
        Ok(())
    }
}

/// Spin(4) = Sp(1) × Sp(1) as a pair of unit quaternions `(p, q)`, acting on `ℍ` by `z ↦ p z q̄`.
///
/// The algebra basis is `(e_a/2, 0)` then `(0, e_a/2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Spin4Group;

impl Spin4Group {
    pub fn pair(p: quat::Quat, q: quat::Quat) -> GroupElement {
        let mut v = p.to_vec();
        v.extend_from_slice(&q);
        GroupElement(v)
    }

    pub fn split(g: &GroupElement) -> (&[f64], &[f64]) {
        g.0.split_at(4)
    }

    /// The chirality element `(1, −1)`.
    pub fn chirality() -> GroupElement {
        Self::pair(quat::ONE, [-1.0, 0.0, 0.0, 0.0])
    }
}

fn random_unit_quat(rng: &mut dyn RngCore) -> quat::Quat {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        if quat::norm(&v) > 1e-6 {
            return quat::normalize(&v);
        }
    }
}

impl GroupModel for Spin4Group {
    fn id(&self) -> &str {
        "spin4"
    }
    fn repr_dim(&self) -> usize {
        8
    }
    fn algebra_dim(&self) -> usize {
        6
    }
    fn v_dim(&self) -> usize {
        4
    }
    fn identity(&self) -> GroupElement {
        Self::pair(quat::ONE, quat::ONE)
    }
    fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let (ap, aq) = Self::split(a);
        let (bp, bq) = Self::split(b);
        Self::pair(quat::normalize(&quat::mul(ap, bp)), quat::normalize(&quat::mul(aq, bq)))
    }
    fn inv(&self, a: &GroupElement) -> GroupElement {
        let (p, q) = Self::split(a);
        Self::pair(quat::conj(p), quat::conj(q))
    }
    fn act_on_v(&self, g: &GroupElement, v: &[f64]) -> Vec<f64> {
        // p v q̄ is the inverse element acting through p̄ z q
        let (p, q) = Self::split(g);
        quat::mul(&quat::mul(p, v), &quat::conj(q)).to_vec()
    }
    fn exp(&self, xi: &[f64]) -> GroupElement {
        let half = |s: &[f64]| [0.5 * s[0], 0.5 * s[1], 0.5 * s[2]];
        Self::pair(quat::exp_imag(&half(&xi[0..3])), quat::exp_imag(&half(&xi[3..6])))
    }
    fn distance(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
    fn lattice(&self) -> Vec<GroupElement> {
        let units = quat::hurwitz_units();
        let mut out = Vec::with_capacity(units.len() * units.len());
        for p in &units {
            for q in &units {
                out.push(Self::pair(*p, *q));
            }
        }
        out
    }
    fn random(&self, rng: &mut dyn RngCore) -> GroupElement {
        let p = random_unit_quat(rng);
        let q = random_unit_quat(rng);
        Self::pair(p, q)
    }
    fn check(&self, g: &GroupElement) -> Result<()> {
        if g.0.len() != 8 {
            return Err(GfbError::DimensionMismatch {
                expected: 8,
                got: g.0.len(),
            });
        }
        let (p, q) = Self::split(g);
        quat::check_unit(p)?;
        quat::check_unit(q)
    }
}

/// `G ⋉ V` with product `(g₁,x₁)(g₂,x₂) = (g₁g₂, g₂⁻¹·x₁ + x₂)`.
///
/// Elements are stored as the group representation followed by `x`.
#[derive(Debug, Clone)]
pub struct SemidirectGroup {
    g: Arc<dyn GroupModel>,
}

impl SemidirectGroup {
    pub fn new(g: Arc<dyn GroupModel>) -> Self {
        Self { g }
    }

    pub fn g(&self) -> &dyn GroupModel {
        self.g.as_ref()
    }

    pub fn g_arc(&self) -> Arc<dyn GroupModel> {
        Arc::clone(&self.g)
    }

    pub fn join(&self, g: &GroupElement, x: &[f64]) -> GroupElement {
        let mut v = g.0.clone();
        v.extend_from_slice(x);
        GroupElement(v)
    }

    pub fn split(&self, e: &GroupElement) -> (GroupElement, Vec<f64>) {
        let r = self.g.repr_dim();
        (GroupElement(e.0[..r].to_vec()), e.0[r..].to_vec())
    }

    pub fn identity(&self) -> GroupElement {
        self.join(&self.g.identity(), &vec![0.0; self.g.v_dim()])
    }

    pub fn from_g(&self, g: &GroupElement) -> GroupElement {
        self.join(g, &vec![0.0; self.g.v_dim()])
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let (g1, x1) = self.split(a);
        let (g2, x2) = self.split(b);
        let moved = self.g.act_on_v(&self.g.inv(&g2), &x1);
        let x: Vec<f64> = moved.iter().zip(&x2).map(|(u, v)| u + v).collect();
        self.join(&self.g.mul(&g1, &g2), &x)
    }

    pub fn inv(&self, a: &GroupElement) -> GroupElement {
        let (g, x) = self.split(a);
        let gx: Vec<f64> = self.g.act_on_v(&g, &x).iter().map(|v| -v).collect();
        self.join(&self.g.inv(&g), &gx)
    }

    pub fn distance(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        let (g1, x1) = self.split(a);
        let (g2, x2) = self.split(b);
        let dg = self.g.distance(&g1, &g2);
        let dx: f64 = x1.iter().zip(&x2).map(|(u, v)| (u - v) * (u - v)).sum();
        (dg * dg + dx).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn models() -> Vec<Arc<dyn GroupModel>> {
        vec![Arc::new(So2Group), Arc::new(Spin4Group)]
    }

    #[test]
    fn group_axioms_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in models() {
            for _ in 0..100 {
                let a = g.random(&mut rng);
                let b = g.random(&mut rng);
                let c = g.random(&mut rng);
                let l = g.mul(&g.mul(&a, &b), &c);
                let r = g.mul(&a, &g.mul(&b, &c));
                assert!(g.distance(&l, &r) < 1e-12, "{}", g.id());
                assert!(g.distance(&g.mul(&a, &g.inv(&a)), &g.identity()) < 1e-12);
                assert!(g.distance(&g.mul(&g.identity(), &a), &a) < 1e-12);
                let v: Vec<f64> = (0..g.v_dim()).map(|i| (i as f64) - 0.7).collect();
                let lhs = g.act_on_v(&g.mul(&a, &b), &v);
                let rhs = g.act_on_v(&a, &g.act_on_v(&b, &v));
                assert!(close(&lhs, &rhs, 1e-12));
            }
        }
    }

    #[test]
    fn semidirect_simple_products() {
        let sd = SemidirectGroup::new(Arc::new(Spin4Group));
        let x = [1.0, 2.0, -0.5, 0.25];
        let y = [0.5, -1.0, 3.0, 0.0];
        let ex = sd.join(&Spin4Group.identity(), &x);
        let ey = sd.join(&Spin4Group.identity(), &y);
        let s = sd.mul(&ex, &ey);
        assert!(close(&s.0[8..], &[1.5, 1.0, 2.5, 0.25], 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Spin4Group.random(&mut rng);
        let gx = sd.mul(&sd.from_g(&g), &ex);
        assert!(sd.distance(&gx, &sd.join(&g, &x)) < 1e-15);
    }

    #[test]
    fn spin4_algebra_matches_differentiated_action() {
        // derivative of t ↦ exp(t X_i)·v at t = 0 against the catalog representation
        let model = crate::lie::ModelAlgebra::catalog("spin4_semi_r4").unwrap();
        let h = 1e-5;
        for i in 0..6 {
            let mut xi = vec![0.0; 6];
            for k in 0..4 {
                let mut v = [0.0; 4];
                v[k] = 1.0;
                xi[i] = h;
                let plus = Spin4Group.act_on_v(&Spin4Group.exp(&xi), &v);
                xi[i] = -h;
                let minus = Spin4Group.act_on_v(&Spin4Group.exp(&xi), &v);
                xi[i] = 0.0;
                let col = DVector::from_iterator(4, plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)));
                let expect: DMatrix<f64> = model.data().rho()[i].clone();
                assert!((col - expect.column(k)).amax() < 1e-9, "generator {i}, basis {k}");
            }
        }
    }

    proptest! {
        #[test]
        fn spin4_semidirect_associative(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sd = SemidirectGroup::new(Arc::new(Spin4Group));
            let mut el = || {
                let g = Spin4Group.random(&mut rng);
                let x: Vec<f64> = (0..4).map(|_| rng.random_range(-2.0..2.0)).collect();
                sd.join(&g, &x)
            };
            let (a, b, c) = (el(), el(), el());
            let l = sd.mul(&sd.mul(&a, &b), &c);
            let r = sd.mul(&a, &sd.mul(&b, &c));
            prop_assert!(sd.distance(&l, &r) < 1e-12);
            prop_assert!(sd.distance(&sd.mul(&a, &sd.inv(&a)), &sd.identity()) < 1e-12);
        }
    }
}
