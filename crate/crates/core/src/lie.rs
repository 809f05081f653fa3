//! Finite-dimensional real Lie algebras stored as dense structure constants.
//!
//! The bracket convention is `[x, y]^A = c^A_{BC} x^B y^C`. Semidirect products
//! `𝔤 ⋉ ℝⁿ` put the `𝔤` basis first and the translations after it, so a model
//! algebra of dimension `m + n` has indices `0..m` for `𝔤` and `m..m+n` for `ℝⁿ`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GfbError, Result};
use crate::forms::Form;

/// Jacobi residual accepted for the analytic catalog algebras.
pub const JACOBI_TOL: f64 = 1e-12;

/// Largest `|ρ([ξ,ζ]) − [ρ(ξ),ρ(ζ)]|` accepted when building a semidirect product.
pub const REPRESENTATION_TOL: f64 = 1e-8;

/// Identifiers accepted by [`LieAlgebra::catalog`].
pub const CATALOG_IDS: &[&str] = &[
    "so2",
    "so3",
    "spin3",
    "spin4",
    "so2_semi_r2",
    "spin4_semi_r4",
    "so3_as_so2_semi_r2",
];

/// Coefficients of an element in the basis of some algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraElement {
    coeffs: Vec<f64>,
}

impl AlgebraElement {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }

    /// The `i`-th basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coeffs = vec![0.0; dim];
        coeffs[i] = 1.0;
        Self::new(coeffs)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * s).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl From<Vec<f64>> for AlgebraElement {
    fn from(coeffs: Vec<f64>) -> Self {
        Self::new(coeffs)
    }
}

/// `[e_b, e_c] = Σ v·e_a` given as `(b, c, &[(a, v)])`.
pub type BracketRule<'a> = (usize, usize, &'a [(usize, f64)]);

/// A real Lie algebra given by its structure constants.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    constants: Vec<f64>,
    labels: Vec<String>,
}

impl LieAlgebra {
    /// Builds an algebra from a dense `dim³` table laid out as `c[(a·dim + b)·dim + c]`.
    ///
    /// Antisymmetry in the lower pair must hold exactly.
    pub fn new(labels: Vec<String>, constants: Vec<f64>) -> Result<Self> {
        let dim = labels.len();
        if constants.len() != dim * dim * dim {
            return Err(GfbError::DimensionMismatch {
                expected: dim * dim * dim,
                got: constants.len(),
            });
        }
        let alg = Self { dim, constants, labels };
        for a in 0..dim {
            for b in 0..dim {
                for c in b..dim {
                    if alg.c(a, b, c) != -alg.c(a, c, b) {
                        return Err(GfbError::NotAntisymmetric { a, b, c });
                    }
                }
            }
        }
        Ok(alg)
    }

    /// The abelian algebra with the given basis labels.
    pub fn abelian(labels: &[&str]) -> Self {
        let dim = labels.len();
        Self {
            dim,
            constants: vec![0.0; dim * dim * dim],
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Builds an algebra from a list of nonzero brackets `[e_b, e_c] = Σ v·e_a`
    /// given for `b < c`; the mirrored entries are filled in by antisymmetry.
    pub fn from_brackets(labels: &[&str], brackets: &[BracketRule]) -> Result<Self> {
        let mut alg = Self::abelian(labels);
        let dim = alg.dim;
        for &(b, c, terms) in brackets {
            if b >= dim || c >= dim {
                return Err(GfbError::DimensionMismatch {
                    expected: dim,
                    got: b.max(c) + 1,
                });
            }
            if b == c {
                return Err(GfbError::NotAntisymmetric { a: 0, b, c });
            }
            for &(a, v) in terms {
                if a >= dim {
                    return Err(GfbError::DimensionMismatch {
                        expected: dim,
                        got: a + 1,
                    });
                }
                let (i, j) = (alg.index(a, b, c), alg.index(a, c, b));
                alg.constants[i] = v;
                alg.constants[j] = -v;
            }
        }
        Ok(alg)
    }

    /// Looks up one of the named catalog algebras (see [`CATALOG_IDS`]).
    pub fn catalog(id: &str) -> Result<Self> {
        match id {
            "so2" => Ok(so2()),
            "so3" => Ok(so3()),
            "spin3" => Ok(spin3()),
            "spin4" => Ok(spin4()),
            "so2_semi_r2" | "spin4_semi_r4" => Ok(ModelAlgebra::catalog(id)?.algebra().clone()),
            "so3_as_so2_semi_r2" => Ok(so3_as_so2_semi_r2()),
            other => Err(GfbError::UnknownId(other.to_string())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    fn index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    /// Structure constant `c^a_{bc}`.
    #[inline]
    pub fn c(&self, a: usize, b: usize, c: usize) -> f64 {
        self.constants[self.index(a, b, c)]
    }

    pub fn constants(&self) -> &[f64] {
        &self.constants
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(x.coeffs())?;
        self.check(y.coeffs())?;
        Ok(AlgebraElement::new(self.bracket_raw(x.coeffs(), y.coeffs())))
    }

    /// Unchecked bracket on raw coefficient slices.
    pub fn bracket_raw(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut z = vec![0.0; d];
        for (a, za) in z.iter_mut().enumerate() {
            let mut s = 0.0;
            for b in 0..d {
                if x[b] == 0.0 {
                    continue;
                }
                let row = &self.constants[(a * d + b) * d..(a * d + b + 1) * d];
                let inner: f64 = row.iter().zip(y).map(|(c, yc)| c * yc).sum();
                s += x[b] * inner;
            }
            *za = s;
        }
        z
    }

    /// Matrix of `ad_x`, acting on column vectors: `(ad_x)^a_c = c^a_{bc} x^b`.
    pub fn ad_matrix(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |a, c| (0..d).map(|b| self.c(a, b, c) * x[b]).sum())
    }

    /// Largest violation of the Jacobi identity over all basis quadruples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for dd in 0..d {
                        let s: f64 = (0..d)
                            .map(|e| {
                                self.c(a, e, b) * self.c(e, c, dd)
                                    + self.c(a, e, c) * self.c(e, dd, b)
                                    + self.c(a, e, dd) * self.c(e, b, c)
                            })
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

/// A Lie algebra `𝔤` together with a representation on `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidirectData {
    g: LieAlgebra,
    n: usize,
    rho: Vec<DMatrix<f64>>,
}

impl SemidirectData {
    /// `rho[i]` is the `n × n` matrix of the `i`-th basis element of `g`.
    pub fn new(g: LieAlgebra, n: usize, rho: Vec<DMatrix<f64>>) -> Result<Self> {
        if rho.len() != g.dim() {
            return Err(GfbError::DimensionMismatch {
                expected: g.dim(),
                got: rho.len(),
            });
        }
        for r in &rho {
            if r.nrows() != n || r.ncols() != n {
                return Err(GfbError::DimensionMismatch {
                    expected: n,
                    got: r.nrows().max(r.ncols()),
                });
            }
        }
        Ok(Self { g, n, rho })
    }

    pub fn g(&self) -> &LieAlgebra {
        &self.g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &[DMatrix<f64>] {
        &self.rho
    }

    /// `ρ(x)` for an arbitrary element `x` of `𝔤`.
    pub fn rho_of(&self, x: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (xi, r) in x.iter().zip(&self.rho) {
            if *xi != 0.0 {
                out += r * *xi;
            }
        }
        out
    }

    /// `max |ρ([ξ_i,ξ_j]) − (ρ(ξ_i)ρ(ξ_j) − ρ(ξ_j)ρ(ξ_i))|` over basis pairs.
    pub fn representation_residual(&self) -> f64 {
        let m = self.g.dim();
        let mut worst = 0.0_f64;
        for i in 0..m {
            for j in 0..m {
                let br = self.g.bracket_raw(
                    &AlgebraElement::basis(m, i).into_vec(),
                    &AlgebraElement::basis(m, j).into_vec(),
                );
                let lhs = self.rho_of(&br);
                let rhs = &self.rho[i] * &self.rho[j] - &self.rho[j] * &self.rho[i];
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    /// The semidirect product `𝔤 ⋉ ℝⁿ` as a single structure-constant table.
    pub fn semidirect(&self) -> Result<LieAlgebra> {
        let res = self.representation_residual();
        if res > REPRESENTATION_TOL {
            return Err(GfbError::NotARepresentation(res));
        }
        let m = self.g.dim();
        let n = self.n;
        let dim = m + n;
        let mut labels: Vec<String> = self.g.labels().to_vec();
        labels.extend((0..n).map(|a| format!("e{}", a + 1)));
        let mut c = vec![0.0; dim * dim * dim];
        let idx = |a: usize, b: usize, cc: usize| (a * dim + b) * dim + cc;
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    c[idx(k, i, j)] = self.g.c(k, i, j);
                }
            }
        }
        for i in 0..m {
            for a in 0..n {
                for b in 0..n {
                    let v = self.rho[i][(a, b)];
                    c[idx(m + a, i, m + b)] = v;
                    c[idx(m + a, m + b, i)] = -v;
                }
            }
        }
        LieAlgebra::new(labels, c)
    }
}

/// A model algebra `𝔤 ⋉ ℝⁿ`: the semidirect data plus its assembled constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAlgebra {
    data: SemidirectData,
    algebra: LieAlgebra,
}

impl ModelAlgebra {
    pub fn new(data: SemidirectData) -> Result<Self> {
        let algebra = data.semidirect()?;
        Ok(Self { data, algebra })
    }

    /// `𝔤 ⋉ ℝ⁰`: a Maurer–Cartan model for `𝔤` itself.
    pub fn pure(g: LieAlgebra) -> Self {
        let m = g.dim();
        let data = SemidirectData {
            g: g.clone(),
            n: 0,
            rho: vec![DMatrix::zeros(0, 0); m],
        };
        Self { data, algebra: g }
    }

    /// Abelian `ℝⁿ` with a trivial `𝔤`.
    pub fn translations(n: usize) -> Self {
        let data = SemidirectData {
            g: LieAlgebra::abelian(&[]),
            n,
            rho: vec![],
        };
        let labels: Vec<String> = (0..n).map(|a| format!("e{}", a + 1)).collect();
        let algebra = LieAlgebra {
            dim: n,
            constants: vec![0.0; n * n * n],
            labels,
        };
        Self { data, algebra }
    }

    /// `"so2_semi_r2"` or `"spin4_semi_r4"`.
    pub fn catalog(id: &str) -> Result<Self> {
        match id {
            "so2_semi_r2" => Self::new(SemidirectData::new(so2(), 2, vec![rotation_generator(1.0)])?),
            "spin4_semi_r4" => Self::new(SemidirectData::new(spin4(), 4, spin4_vector_rep())?),
            other => Err(GfbError::UnknownId(other.to_string())),
        }
    }

    pub fn data(&self) -> &SemidirectData {
        &self.data
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    /// Dimension of `𝔤`.
    pub fn m(&self) -> usize {
        self.data.g.dim()
    }

    /// Dimension of the translation part.
    pub fn n(&self) -> usize {
        self.data.n
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// `(ξ, 0)` for `ξ ∈ 𝔤`.
    pub fn embed_g(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.len() != self.m() {
            return Err(GfbError::DimensionMismatch {
                expected: self.m(),
                got: xi.len(),
            });
        }
        let mut v = xi.to_vec();
        v.resize(self.dim(), 0.0);
        Ok(v)
    }

    /// Adjoint matrices of the `𝔤` basis restricted to `𝔤` (the adjoint representation).
    pub fn g_adjoint(&self) -> Vec<DMatrix<f64>> {
        let m = self.m();
        (0..m)
            .map(|i| DMatrix::from_fn(m, m, |k, j| self.data.g.c(k, i, j)))
            .collect()
    }
}

/// `[ϖ∧ϖ]^A_{μν} = 2 c^A_{BC} W^B_μ W^C_ν` for the coefficient matrix `W` of an
/// algebra-valued 1-form (rows: algebra index, columns: coordinate direction).
pub fn wedge_bracket_at(algebra: &LieAlgebra, w: &DMatrix<f64>) -> Result<Form> {
    if w.nrows() != algebra.dim() {
        return Err(GfbError::DimensionMismatch {
            expected: algebra.dim(),
            got: w.nrows(),
        });
    }
    let dim = algebra.dim();
    let d = w.ncols();
    let mut out = Form::zeros(dim, d, 2);
    let cols: Vec<Vec<f64>> = (0..d).map(|mu| w.column(mu).iter().copied().collect()).collect();
    for mu in 0..d {
        for nu in (mu + 1)..d {
            let z = algebra.bracket_raw(&cols[mu], &cols[nu]);
            for (a, za) in z.iter().enumerate() {
                out.set(a, &[mu, nu], 2.0 * za);
                out.set(a, &[nu, mu], -2.0 * za);
            }
        }
    }
    Ok(out)
}

/// `[[0, −s], [s, 0]]`: `s` times the infinitesimal rotation of the plane.
pub fn rotation_generator(s: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -s, s, 0.0])
}

fn so2() -> LieAlgebra {
    LieAlgebra::abelian(&["xi"])
}

fn cyclic(labels: &[&str], scale: f64) -> LieAlgebra {
    LieAlgebra::from_brackets(
        labels,
        &[(0, 1, &[(2, scale)]), (1, 2, &[(0, scale)]), (2, 0, &[(1, scale)])],
    )
    .expect("static catalog algebra")
}

fn so3() -> LieAlgebra {
    cyclic(&["L1", "L2", "L3"], 1.0)
}

/// Imaginary quaternions with basis `i/2, j/2, k/2`.
fn spin3() -> LieAlgebra {
    cyclic(&["i/2", "j/2", "k/2"], 1.0)
}

/// `sp(1) ⊕ sp(1)`: left factor acts on `ℍ` by left multiplication, right factor by right multiplication.
fn spin4() -> LieAlgebra {
    let l: &[(usize, f64)] = &[(2, 1.0)];
    LieAlgebra::from_brackets(
        &["pi/2", "pj/2", "pk/2", "qi/2", "qj/2", "qk/2"],
        &[
            (0, 1, l),
            (1, 2, &[(0, 1.0)]),
            (2, 0, &[(1, 1.0)]),
            (3, 4, &[(5, 1.0)]),
            (4, 5, &[(3, 1.0)]),
            (5, 3, &[(4, 1.0)]),
        ],
    )
    .expect("static catalog algebra")
}

/// so(3) in the basis `(ξ, e1, e2) = (−L3, L1, L2)`: `[ξ,e1] = −e2`, `[ξ,e2] = e1`, `[e1,e2] = −ξ`.
fn so3_as_so2_semi_r2() -> LieAlgebra {
    LieAlgebra::from_brackets(
        &["xi", "e1", "e2"],
        &[(0, 1, &[(2, -1.0)]), (0, 2, &[(1, 1.0)]), (1, 2, &[(0, -1.0)])],
    )
    .expect("static catalog algebra")
}

fn quat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn unit_quat(k: usize) -> [f64; 4] {
    let mut q = [0.0; 4];
    q[k] = 1.0;
    q
}

/// The derivative at the identity of `(p, q)·z = p z q̄` in the spin(4) basis above.
fn spin4_vector_rep() -> Vec<DMatrix<f64>> {
    let mut rho = Vec::with_capacity(6);
    for a in 1..=3 {
        let u = unit_quat(a).map(|x| 0.5 * x);
        rho.push(DMatrix::from_fn(4, 4, |r, c| quat_mul(u, unit_quat(c))[r]));
    }
    for a in 1..=3 {
        let u = unit_quat(a).map(|x| 0.5 * x);
        rho.push(DMatrix::from_fn(4, 4, |r, c| -quat_mul(unit_quat(c), u)[r]));
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn rotation_generators() -> [DMatrix<f64>; 3] {
        // (L_k)_{ij} = −ε_{kij}
        let eps = |i: usize, j: usize, k: usize| -> f64 {
            match (i, j, k) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
                _ => 0.0,
            }
        };
        [0, 1, 2].map(|k| DMatrix::from_fn(3, 3, |i, j| -eps(k, i, j)))
    }

    #[test]
    fn so3_constants_match_matrix_commutators() {
        let l = rotation_generators();
        let alg = LieAlgebra::catalog("so3").unwrap();
        for b in 0..3 {
            for c in 0..3 {
                let comm = &l[b] * &l[c] - &l[c] * &l[b];
                // expand the commutator back in the L basis
                let coeffs = [comm[(2, 1)], comm[(0, 2)], comm[(1, 0)]];
                for a in 0..3 {
                    assert_abs_diff_eq!(alg.c(a, b, c), coeffs[a], epsilon = 1e-15);
                }
            }
        }
        let z = alg
            .bracket(&AlgebraElement::basis(3, 0), &AlgebraElement::basis(3, 1))
            .unwrap();
        assert_eq!(z.coeffs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn so2_semidirect_brackets() {
        let alg = LieAlgebra::catalog("so2_semi_r2").unwrap();
        let xi = AlgebraElement::basis(3, 0);
        let e1 = AlgebraElement::basis(3, 1);
        let e2 = AlgebraElement::basis(3, 2);
        assert_eq!(alg.bracket(&xi, &e1).unwrap().coeffs(), &[0.0, 0.0, 1.0]);
        assert_eq!(alg.bracket(&xi, &e2).unwrap().coeffs(), &[0.0, -1.0, 0.0]);
        assert_eq!(alg.bracket(&e1, &e2).unwrap().coeffs(), &[0.0, 0.0, 0.0]);
        let nonzero = alg.constants().iter().filter(|c| **c != 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn trivial_g_gives_abelian_translations() {
        let data = SemidirectData::new(LieAlgebra::abelian(&[]), 3, vec![]).unwrap();
        let alg = data.semidirect().unwrap();
        assert_eq!(alg.dim(), 3);
        assert!(alg.constants().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn semidirect_restricts_to_g_block() {
        let model = ModelAlgebra::catalog("spin4_semi_r4").unwrap();
        let g = model.data().g();
        for k in 0..6 {
            for i in 0..6 {
                for j in 0..6 {
                    assert_eq!(model.algebra().c(k, i, j), g.c(k, i, j));
                }
            }
        }
    }

    #[test]
    fn rejects_non_representation() {
        // two commuting generators mapped to non-commuting matrices
        let g = LieAlgebra::abelian(&["a", "b"]);
        let rho = vec![
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        ];
        let data = SemidirectData::new(g, 2, rho).unwrap();
        assert!(matches!(data.semidirect(), Err(GfbError::NotARepresentation(_))));
    }

    #[test]
    fn rejects_asymmetric_constants() {
        let mut c = vec![0.0; 8];
        c[1] = 1.0; // c^0_{01} without its mirror
        assert!(matches!(
            LieAlgebra::new(vec!["a".into(), "b".into()], c),
            Err(GfbError::NotAntisymmetric { .. })
        ));
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let alg = LieAlgebra::catalog("so3").unwrap();
        let err = alg
            .bracket(&AlgebraElement::zeros(2), &AlgebraElement::zeros(3))
            .unwrap_err();
        assert_eq!(err, GfbError::DimensionMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn catalog_algebras_satisfy_jacobi() {
        for id in CATALOG_IDS {
            let alg = LieAlgebra::catalog(id).unwrap();
            assert!(alg.jacobi_residual() <= JACOBI_TOL, "{id}");
        }
        assert!(LieAlgebra::catalog("e8").is_err());
    }

    #[test]
    fn wedge_bracket_examples() {
        let so2r2 = LieAlgebra::catalog("so2_semi_r2").unwrap();
        let f = wedge_bracket_at(&so2r2, &DMatrix::identity(3, 3)).unwrap();
        assert_eq!(f.get(2, &[0, 1]), 2.0);
        assert_eq!(f.get(2, &[1, 0]), -2.0);
        assert_eq!(f.get(1, &[0, 2]), -2.0);

        let abelian = LieAlgebra::abelian(&["a", "b", "c"]);
        let w = DMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 + 0.5);
        assert_eq!(wedge_bracket_at(&abelian, &w).unwrap().max_abs(), 0.0);

        let so3 = LieAlgebra::catalog("so3").unwrap();
        let mut w = DMatrix::zeros(3, 4);
        w.set_column(2, &nalgebra::DVector::from_vec(vec![0.3, -1.2, 2.0]));
        assert_eq!(wedge_bracket_at(&so3, &w).unwrap().max_abs(), 0.0);

        assert!(wedge_bracket_at(&so3, &DMatrix::zeros(2, 3)).is_err());
    }

    fn element(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0..2.0_f64, dim)
    }

    proptest! {
        #[test]
        fn bracket_is_bilinear_antisymmetric_and_jacobi(
            id in proptest::sample::select(CATALOG_IDS.to_vec()),
            seed in element(30),
            s in -3.0..3.0_f64,
        ) {
            let alg = LieAlgebra::catalog(id).unwrap();
            let d = alg.dim();
            let x = &seed[0..d];
            let y = &seed[10..10 + d];
            let z = &seed[20..20 + d];
            let xy = alg.bracket_raw(x, y);
            let yx = alg.bracket_raw(y, x);
            let xx = alg.bracket_raw(x, x);
            for i in 0..d {
                prop_assert!((xy[i] + yx[i]).abs() < 1e-12);
                prop_assert!(xx[i].abs() < 1e-12);
            }
            let sx_plus_z: Vec<f64> = x.iter().zip(z).map(|(a, b)| s * a + b).collect();
            let lhs = alg.bracket_raw(&sx_plus_z, y);
            let zy = alg.bracket_raw(z, y);
            for i in 0..d {
                prop_assert!((lhs[i] - (s * xy[i] + zy[i])).abs() < 1e-10);
            }
            let j1 = alg.bracket_raw(x, &alg.bracket_raw(y, z));
            let j2 = alg.bracket_raw(y, &alg.bracket_raw(z, x));
            let j3 = alg.bracket_raw(z, &alg.bracket_raw(x, y));
            for i in 0..d {
                prop_assert!((j1[i] + j2[i] + j3[i]).abs() < 1e-10);
            }
        }

        #[test]
        fn wedge_bracket_contracts_to_twice_the_bracket(
            id in proptest::sample::select(CATALOG_IDS.to_vec()),
            seed in element(100),
            xs in element(5),
            ys in element(5),
        ) {
            let alg = LieAlgebra::catalog(id).unwrap();
            let dim = alg.dim();
            let d = 5;
            let w = DMatrix::from_fn(dim, d, |a, mu| seed[(a * d + mu) % seed.len()]);
            let f = wedge_bracket_at(&alg, &w).unwrap();
            let wx: Vec<f64> = (&w * nalgebra::DVector::from_column_slice(&xs)).iter().copied().collect();
            let wy: Vec<f64> = (&w * nalgebra::DVector::from_column_slice(&ys)).iter().copied().collect();
            let br = alg.bracket_raw(&wx, &wy);
            for a in 0..dim {
                let v = f.eval(a, &[&xs, &ys]);
                prop_assert!((v - 2.0 * br[a]).abs() < 1e-12 * (1.0 + br[a].abs()) * 50.0);
            }
        }
    }
}
