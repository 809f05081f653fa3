//! Vector-valued differential forms at a point, stored as full antisymmetric tensors.
//!
//! A rank-`k` form with values in `ℝ^V` on a `d`-dimensional chart is a table
//! `F^a_{μ1…μk}`. Evaluation is `F(X1,…,Xk) = F_{μ1…μk} X1^{μ1}⋯Xk^{μk}`, so a
//! decomposable `α∧β` has components `α_μβ_ν − α_νβ_μ`.

use nalgebra::DMatrix;

use crate::error::{GfbError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    value_dim: usize,
    dim: usize,
    rank: usize,
    data: Vec<f64>,
}

impl Form {
    pub fn zeros(value_dim: usize, dim: usize, rank: usize) -> Self {
        Self {
            value_dim,
            dim,
            rank,
            data: vec![0.0; value_dim * dim.pow(rank as u32)],
        }
    }

    /// A 1-form from its coefficient matrix (rows: values, columns: coordinates).
    pub fn from_one_form(w: &DMatrix<f64>) -> Self {
        let mut f = Self::zeros(w.nrows(), w.ncols(), 1);
        for a in 0..w.nrows() {
            for mu in 0..w.ncols() {
                f.set(a, &[mu], w[(a, mu)]);
            }
        }
        f
    }

    /// A 2-form from one antisymmetric matrix per value component.
    pub fn from_two_form(mats: &[DMatrix<f64>]) -> Result<Self> {
        let dim = mats.first().map(|m| m.nrows()).unwrap_or(0);
        let mut f = Self::zeros(mats.len(), dim, 2);
        for (a, m) in mats.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(GfbError::DimensionMismatch {
                    expected: dim,
                    got: m.ncols(),
                });
            }
            for mu in 0..dim {
                for nu in 0..dim {
                    f.set(a, &[mu, nu], m[(mu, nu)]);
                }
            }
        }
        Ok(f)
    }

    pub fn value_dim(&self) -> usize {
        self.value_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn block(&self) -> usize {
        self.dim.pow(self.rank as u32)
    }

    #[inline]
    fn offset(&self, a: usize, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank);
        let mut o = 0;
        for &i in idx {
            o = o * self.dim + i;
        }
        a * self.block() + o
    }

    #[inline]
    pub fn get(&self, a: usize, idx: &[usize]) -> f64 {
        self.data[self.offset(a, idx)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, idx: &[usize], v: f64) {
        let o = self.offset(a, idx);
        self.data[o] = v;
    }

    /// Sets the component for a strictly increasing index tuple and all its permutations.
    pub fn set_antisymmetric(&mut self, a: usize, sorted: &[usize], v: f64) {
        for_each_permutation(sorted.len(), |perm, sign| {
            let idx: Vec<usize> = perm.iter().map(|&p| sorted[p]).collect();
            self.set(a, &idx, sign * v);
        });
    }

    /// 2-form component matrix for a single value index.
    pub fn matrix(&self, a: usize) -> DMatrix<f64> {
        assert_eq!(self.rank, 2, "matrix() needs a 2-form");
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(a, &[i, j]))
    }

    /// Coefficient matrix of a 1-form.
    pub fn one_form_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank, 1, "one_form_matrix() needs a 1-form");
        DMatrix::from_fn(self.value_dim, self.dim, |a, mu| self.get(a, &[mu]))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.value_dim != other.value_dim || self.dim != other.dim || self.rank != other.rank {
            return Err(GfbError::DimensionMismatch {
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x *= s);
        out
    }

    /// Sum over all coordinate indices of `F^a_{μ…} X1^μ ⋯`.
    pub fn eval(&self, a: usize, vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.rank);
        let block = self.block();
        let base = a * block;
        let mut total = 0.0;
        let mut idx = vec![0usize; self.rank];
        for flat in 0..block {
            let mut r = flat;
            for k in (0..self.rank).rev() {
                idx[k] = r % self.dim;
                r /= self.dim;
            }
            let c = self.data[base + flat];
            if c == 0.0 {
                continue;
            }
            let mut p = c;
            for (k, &i) in idx.iter().enumerate() {
                p *= vectors[k][i];
            }
            total += p;
        }
        total
    }

    /// Applies a linear map to the value index: `(MF)^b = M^b_a F^a`.
    pub fn map_values(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.value_dim {
            return Err(GfbError::DimensionMismatch {
                expected: self.value_dim,
                got: m.ncols(),
            });
        }
        let block = self.block();
        let mut out = Self::zeros(m.nrows(), self.dim, self.rank);
        for b in 0..m.nrows() {
            for a in 0..self.value_dim {
                let k = m[(b, a)];
                if k == 0.0 {
                    continue;
                }
                for i in 0..block {
                    out.data[b * block + i] += k * self.data[a * block + i];
                }
            }
        }
        Ok(out)
    }

    /// Keeps the value components in `range`.
    pub fn restrict_values(&self, range: std::ops::Range<usize>) -> Self {
        let block = self.block();
        Self {
            value_dim: range.len(),
            dim: self.dim,
            rank: self.rank,
            data: self.data[range.start * block..range.end * block].to_vec(),
        }
    }

    /// Substitutes `X_B = Σ_μ m^μ_B ∂_μ` into every slot: `F'_{B1…} = F_{μ1…} m^{μ1}_{B1}⋯`.
    ///
    /// With `m = E`, the frame matrix, this gives frame components.
    pub fn contract_frame(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != self.dim {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim,
                got: m.nrows(),
            });
        }
        let new_dim = m.ncols();
        // contract one slot at a time; slots < k already use new_dim
        let mut cur = self.data.clone();
        let mut dims = vec![self.dim; self.rank];
        for slot in 0..self.rank {
            let before: usize = dims[..slot].iter().product();
            let after: usize = dims[slot + 1..].iter().product();
            let old = dims[slot];
            let mut next = vec![0.0; self.value_dim * before * new_dim * after];
            for a in 0..self.value_dim {
                for p in 0..before {
                    for mu in 0..old {
                        let src = ((a * before + p) * old + mu) * after;
                        for b in 0..new_dim {
                            let k = m[(mu, b)];
                            if k == 0.0 {
                                continue;
                            }
                            let dst = ((a * before + p) * new_dim + b) * after;
                            for s in 0..after {
                                next[dst + s] += k * cur[src + s];
                            }
                        }
                    }
                }
            }
            cur = next;
            dims[slot] = new_dim;
        }
        Ok(Self {
            value_dim: self.value_dim,
            dim: new_dim,
            rank: self.rank,
            data: cur,
        })
    }

    /// `(α∧β)^a = Σ k^a_{ij} α^i ∧ β^j` where `k[(a·Vα + i)·Vβ + j]` is the pairing.
    pub fn wedge_with(&self, other: &Self, out_dim: usize, k: &[f64]) -> Result<Self> {
        if self.dim != other.dim {
            return Err(GfbError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let (va, vb) = (self.value_dim, other.value_dim);
        if k.len() != out_dim * va * vb {
            return Err(GfbError::DimensionMismatch {
                expected: out_dim * va * vb,
                got: k.len(),
            });
        }
        let (p, q) = (self.rank, other.rank);
        let r = p + q;
        let mut out = Self::zeros(out_dim, self.dim, r);
        if r > self.dim {
            return Ok(out);
        }
        let shuffles = shuffles(p, q);
        let mut sa = vec![0usize; p];
        let mut sb = vec![0usize; q];
        for_each_increasing(self.dim, r, |mu| {
            for a in 0..out_dim {
                let mut total = 0.0;
                for (sel, rest, sign) in &shuffles {
                    for (t, &s) in sel.iter().enumerate() {
                        sa[t] = mu[s];
                    }
                    for (t, &s) in rest.iter().enumerate() {
                        sb[t] = mu[s];
                    }
                    let mut acc = 0.0;
                    for i in 0..va {
                        let x = self.get(i, &sa);
                        if x == 0.0 {
                            continue;
                        }
                        for j in 0..vb {
                            let kk = k[(a * va + i) * vb + j];
                            if kk != 0.0 {
                                acc += kk * x * other.get(j, &sb);
                            }
                        }
                    }
                    total += sign * acc;
                }
                if total != 0.0 {
                    out.set_antisymmetric(a, mu, total);
                }
            }
        });
        Ok(out)
    }

    /// Wedge of two scalar-valued forms.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.value_dim != 1 || other.value_dim != 1 {
            return Err(GfbError::DimensionMismatch {
                expected: 1,
                got: self.value_dim.max(other.value_dim),
            });
        }
        self.wedge_with(other, 1, &[1.0])
    }
}

/// Exterior derivative at a point of a form field by central differences of step `h`.
///
/// `(dψ)_{μ0…μk} = Σ_j (−1)^j ∂_{μj} ψ_{μ0…μ̂j…μk}`.
pub fn exterior_derivative<F>(field: F, point: &[f64], h: f64) -> Result<Form>
where
    F: Fn(&[f64]) -> Result<Form>,
{
    let dim = point.len();
    let mut partials = Vec::with_capacity(dim);
    let mut x = point.to_vec();
    for mu in 0..dim {
        x[mu] = point[mu] + h;
        let plus = field(&x)?;
        x[mu] = point[mu] - h;
        let minus = field(&x)?;
        x[mu] = point[mu];
        partials.push(plus.sub(&minus)?.scale(0.5 / h));
    }
    let first = &partials[0];
    if first.dim != dim {
        return Err(GfbError::DimensionMismatch {
            expected: dim,
            got: first.dim,
        });
    }
    Ok(assemble_d(&partials))
}

/// Builds `dψ` from the coordinate partials `∂_μ ψ`.
pub fn assemble_d(partials: &[Form]) -> Form {
    let dim = partials.len();
    let v = partials[0].value_dim;
    let k = partials[0].rank;
    let mut out = Form::zeros(v, dim, k + 1);
    if k + 1 > dim {
        return out;
    }
    let mut omit = vec![0usize; k];
    for_each_increasing(dim, k + 1, |mu| {
        for a in 0..v {
            let mut total = 0.0;
            for j in 0..=k {
                let mut t = 0;
                for (s, &m) in mu.iter().enumerate() {
                    if s != j {
                        omit[t] = m;
                        t += 1;
                    }
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * partials[mu[j]].get(a, &omit);
            }
            if total != 0.0 {
                out.set_antisymmetric(a, mu, total);
            }
        }
    });
    out
}

/// Calls `f` on every strictly increasing tuple of length `k` from `0..n`.
pub fn for_each_increasing(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return;
            }
        }
    }
}

fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize], f64)) {
    // Heap's algorithm, tracking parity
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut sign = 1.0;
    f(&perm, sign);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            f(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// All `(p, q)` shuffles as (selected positions, remaining positions, sign).
fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    let mut out = Vec::new();
    for_each_increasing(p + q, p, |sel| {
        let rest: Vec<usize> = (0..p + q).filter(|i| !sel.contains(i)).collect();
        let inversions: usize = sel.iter().enumerate().map(|(j, &s)| s - j).sum();
        let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
        out.push((sel.to_vec(), rest, sign));
    });
    if p == 0 {
        out.clear();
        out.push((vec![], (0..q).collect(), 1.0));
    }
    out
}
