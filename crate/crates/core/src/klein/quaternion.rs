//! Quaternions stored as `[w, x, y, z]` arrays, backed by nalgebra's arithmetic.

use nalgebra::{Matrix4, Quaternion};

use crate::error::{GfbError, Result};

/// Accepted deviation of `|q|` from 1.
pub const UNIT_TOL: f64 = 1e-10;

pub type Quat = [f64; 4];

pub const ONE: Quat = [1.0, 0.0, 0.0, 0.0];

#[inline]
pub fn to_na(q: &[f64]) -> Quaternion<f64> {
    Quaternion::new(q[0], q[1], q[2], q[3])
}

#[inline]
pub fn from_na(q: Quaternion<f64>) -> Quat {
    [q.w, q.i, q.j, q.k]
}

pub fn mul(a: &[f64], b: &[f64]) -> Quat {
    from_na(to_na(a) * to_na(b))
}

pub fn conj(a: &[f64]) -> Quat {
    [a[0], -a[1], -a[2], -a[3]]
}

pub fn norm(a: &[f64]) -> f64 {
    to_na(a).norm()
}

pub fn normalize(a: &[f64]) -> Quat {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n, a[3] / n]
}

/// `exp(u)` for an imaginary quaternion `u = (0, v)`.
pub fn exp_imag(v: &[f64]) -> Quat {
    from_na(Quaternion::new(0.0, v[0], v[1], v[2]).exp())
}

pub fn check_unit(q: &[f64]) -> Result<()> {
    let n = norm(q);
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(GfbError::NonUnitQuaternion(n));
    }
    Ok(())
}

/// `p̄ z q` for unit quaternions `p`, `q`.
pub fn quaternion_action(p: &[f64], q: &[f64], z: &[f64]) -> Result<Quat> {
    check_unit(p)?;
    check_unit(q)?;
    if z.len() != 4 {
        return Err(GfbError::DimensionMismatch {
            expected: 4,
            got: z.len(),
        });
    }
    Ok(mul(&mul(&conj(p), z), q))
}

/// The 4×4 matrix of `z ↦ p̄ z q`, built column by column from the basis.
pub fn action_matrix(p: &[f64], q: &[f64]) -> Result<Matrix4<f64>> {
    let mut m = Matrix4::zeros();
    for c in 0..4 {
        let mut e = [0.0; 4];
        e[c] = 1.0;
        let img = quaternion_action(p, q, &e)?;
        for r in 0..4 {
            m[(r, c)] = img[r];
        }
    }
    Ok(m)
}

/// The 24 Hurwitz units: `±1, ±i, ±j, ±k` and `(±1 ± i ± j ± k)/2`.
pub fn hurwitz_units() -> Vec<Quat> {
    let mut out = Vec::with_capacity(24);
    for k in 0..4 {
        for s in [1.0, -1.0] {
            let mut q = [0.0; 4];
            q[k] = s;
            out.push(q);
        }
    }
    for bits in 0..16u32 {
        let sign = |b: u32| if bits & (1 << b) != 0 { -0.5 } else { 0.5 };
        out.push([sign(0), sign(1), sign(2), sign(3)]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn identity_and_chirality() {
        let z = [0.3, -1.0, 2.0, 0.5];
        assert_eq!(quaternion_action(&ONE, &ONE, &z).unwrap(), z);
        let minus = [-1.0, 0.0, 0.0, 0.0];
        let img = quaternion_action(&ONE, &minus, &z).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(img[k], -z[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn i_i_table() {
        let i = [0.0, 1.0, 0.0, 0.0];
        let act = |z: Quat| quaternion_action(&i, &i, &z).unwrap();
        assert_eq!(act([1.0, 0.0, 0.0, 0.0]), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(act([0.0, 1.0, 0.0, 0.0]), [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(act([0.0, 0.0, 1.0, 0.0]), [0.0, 0.0, -1.0, 0.0]);
        assert_eq!(act([0.0, 0.0, 0.0, 1.0]), [0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn rejects_non_unit() {
        assert!(matches!(
            quaternion_action(&[2.0, 0.0, 0.0, 0.0], &ONE, &ONE),
            Err(GfbError::NonUnitQuaternion(_))
        ));
    }

    #[test]
    fn hurwitz_units_are_unit_and_closed() {
        let units = hurwitz_units();
        assert_eq!(units.len(), 24);
        for a in &units {
            assert_abs_diff_eq!(norm(a), 1.0, epsilon = 1e-15);
            for b in &units {
                let c = mul(a, b);
                assert!(units.iter().any(|u| (0..4).all(|k| (u[k] - c[k]).abs() < 1e-12)));
            }
        }
    }

    fn unit() -> impl Strategy<Value = Quat> {
        proptest::array::uniform4(-1.0..1.0_f64)
            .prop_filter("nonzero", |q| norm(q) > 0.1)
            .prop_map(|q| normalize(&q))
    }

    proptest! {
        #[test]
        fn action_matrix_is_special_orthogonal(p in unit(), q in unit(), z in proptest::array::uniform4(-3.0..3.0_f64)) {
            let m = action_matrix(&p, &q).unwrap();
            prop_assert!((m.transpose() * m - Matrix4::identity()).amax() < 1e-10);
            prop_assert!((m.determinant() - 1.0).abs() < 1e-10);
            let img = quaternion_action(&p, &q, &z).unwrap();
            prop_assert!((norm(&img) - norm(&z)).abs() < 1e-12 * (1.0 + norm(&z)));
        }

        #[test]
        fn exp_is_unit(v in proptest::array::uniform3(-4.0..4.0_f64)) {
            prop_assert!((norm(&exp_imag(&v)) - 1.0).abs() < 1e-14);
        }
    }
}
