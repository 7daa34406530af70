//! Small dense real linear algebra.
//!
//! Everything here works on square matrices of modest size (the largest
//! ones are lifts, a few hundred rows at most). Singular values come from
//! one-sided Jacobi rotations, which keep high relative accuracy for the
//! small singular values that the singular value function depends on.

use std::fmt;
use std::ops::Mul;

use itertools::Itertools;
use num_integer::Integer;

use crate::error::{invalid, Error, Result};

/// Hard ceiling on the dimension of a lift built by [`lift`].
pub const LIFT_HARD_CAP: u128 = 4096;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Iteration cap for [`spectral_radius`].
pub const SPECTRAL_RADIUS_MAX_SQUARINGS: usize = 64;
/// Relative stabilisation tolerance for [`spectral_radius`].
pub const SPECTRAL_RADIUS_TOL: f64 = 1e-10;

/// A square real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return invalid("matrix dimension must be positive");
        }
        if data.len() != dim * dim {
            return invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, found {}",
                dim * dim,
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return invalid(format!("non-finite entry at ({}, {})", pos / dim, pos % dim));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from rows; rejects ragged or non-square input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return invalid(format!(
                    "row {i} has {} entries, expected {dim} (matrices must be square)",
                    row.len()
                ));
            }
            data.extend_from_slice(row);
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0);
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    /// `c · I_dim`.
    pub fn scalar(dim: usize, c: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = c;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = x;
        }
        m
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                out[j * d + i] = self.data[i * d + j];
            }
        }
        Self::from_raw(d, out)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Determinant by LU with partial pivoting.
    pub fn determinant(&self) -> f64 {
        determinant_of(self.dim, &self.data)
    }

    /// `self^k` by repeated squaring.
    pub fn pow(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::identity(self.dim);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.dim)).finish()
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let mut out = vec![0.0; self.dim * self.dim];
        mul_into(self.dim, &self.data, &rhs.data, &mut out);
        Matrix::from_raw(self.dim, out)
    }
}

/// `out = a · b` for row-major `d × d` slices.
#[inline]
pub(crate) fn mul_into(d: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    match d {
        1 => out[0] = a[0] * b[0],
        2 => {
            out[0] = a[0] * b[0] + a[1] * b[2];
            out[1] = a[0] * b[1] + a[1] * b[3];
            out[2] = a[2] * b[0] + a[3] * b[2];
            out[3] = a[2] * b[1] + a[3] * b[3];
        }
        _ => {
            out.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..d {
                for k in 0..d {
                    let aik = a[i * d + k];
                    if aik == 0.0 {
                        continue;
                    }
                    let brow = &b[k * d..(k + 1) * d];
                    let orow = &mut out[i * d..(i + 1) * d];
                    for (o, &bkj) in orow.iter_mut().zip(brow) {
                        *o += aik * bkj;
                    }
                }
            }
        }
    }
}

pub(crate) fn determinant_of(d: usize, data: &[f64]) -> f64 {
    match d {
        1 => data[0],
        2 => data[0] * data[3] - data[1] * data[2],
        3 => {
            data[0] * (data[4] * data[8] - data[5] * data[7]) - data[1] * (data[3] * data[8] - data[5] * data[6])
                + data[2] * (data[3] * data[7] - data[4] * data[6])
        }
        _ => lu_determinant(d, data.to_vec()),
    }
}

fn lu_determinant(d: usize, mut a: Vec<f64>) -> f64 {
    let mut det = 1.0;
    for col in 0..d {
        let pivot = (col..d)
            .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
            .unwrap_or(col);
        let p = a[pivot * d + col];
        if p == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for j in 0..d {
                a.swap(pivot * d + j, col * d + j);
            }
            det = -det;
        }
        det *= p;
        for i in col + 1..d {
            let factor = a[i * d + col] / p;
            if factor == 0.0 {
                continue;
            }
            for j in col..d {
                a[i * d + j] -= factor * a[col * d + j];
            }
        }
    }
    det
}

/// Singular values σ₁ ≥ σ₂ ≥ … ≥ σ_d ≥ 0 of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// σ₁, the Euclidean operator norm.
    pub fn largest(&self) -> f64 {
        self.0[0]
    }

    pub fn product(&self) -> f64 {
        self.0.iter().product()
    }

    /// `σ₁ ⋯ σ_k`.
    pub fn leading_product(&self, k: usize) -> f64 {
        self.0[..k].iter().product()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &Matrix) -> Result<SingularSpectrum> {
    if !a.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    let mut scratch = Vec::new();
    let mut out = vec![0.0; a.dim];
    singular_values_into(a.dim, &a.data, &mut scratch, &mut out);
    Ok(SingularSpectrum(out))
}

/// Writes the singular values of the row-major `d × d` matrix `a` into `out`
/// in descending order. `scratch` is reused between calls.
pub(crate) fn singular_values_into(d: usize, a: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) {
    match d {
        1 => out[0] = a[0].abs(),
        2 => {
            let (s1, s2) = singular_values_2x2(a);
            out[0] = s1;
            out[1] = s2;
        }
        _ => {
            one_sided_jacobi(d, a, scratch, out);
        }
    }
}

fn singular_values_2x2(a: &[f64]) -> (f64, f64) {
    let (p, q) = ((a[0] + a[3]).hypot(a[1] - a[2]), (a[0] - a[3]).hypot(a[1] + a[2]));
    let s1 = 0.5 * (p + q);
    if s1 == 0.0 {
        return (0.0, 0.0);
    }
    let det = (a[0] * a[3] - a[1] * a[2]).abs();
    (s1, (det / s1).min(s1))
}

/// Hestenes one-sided Jacobi: orthogonalises the columns of `a`; the
/// resulting column norms are the singular values.
fn one_sided_jacobi(d: usize, a: &[f64], cols: &mut Vec<f64>, out: &mut [f64]) {
    // column-major copy: cols[j*d + i] = a[i][j]
    cols.clear();
    cols.resize(d * d, 0.0);
    for i in 0..d {
        for j in 0..d {
            cols[j * d + i] = a[i * d + j];
        }
    }
    let tol = f64::EPSILON * d as f64;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..d {
            for q in p + 1..d {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..d {
                    let (x, y) = (cols[p * d + i], cols[q * d + i]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..d {
                    let (x, y) = (cols[p * d + i], cols[q * d + i]);
                    cols[p * d + i] = c * x - s * y;
                    cols[q * d + i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    for (j, o) in out.iter_mut().enumerate().take(d) {
        *o = cols[j * d..(j + 1) * d].iter().fold(0.0f64, |acc, &x| acc.hypot(x));
    }
    out[..d].sort_by(|x, y| y.total_cmp(x));
}

/// Euclidean operator norm σ₁(A).
pub fn operator_norm(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.largest())
}

/// The singular value function φ^s(A).
///
/// `σ₁⋯σ_k σ_{k+1}^{s-k}` for `k ≤ s ≤ k+1 ≤ d` and `|det A|^{s/d}` for `s ≥ d`.
pub fn phi(a: &Matrix, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return invalid(format!("exponent s must be positive and finite, got {s}"));
    }
    let d = a.dim;
    if s >= d as f64 {
        if !a.is_finite() {
            return invalid("matrix has non-finite entries");
        }
        return Ok(a.determinant().abs().powf(s / d as f64));
    }
    let sigma = singular_values(a)?;
    Ok(log_phi_from_singular_values(sigma.values(), s).exp())
}

/// `ln φ^s` from a descending spectrum, for `0 < s < d`.
#[inline]
pub(crate) fn log_phi_from_singular_values(sigma: &[f64], s: f64) -> f64 {
    let k = s.floor() as usize;
    let frac = s - k as f64;
    let mut acc: f64 = sigma[..k].iter().map(|x| x.ln()).sum();
    if frac > 0.0 {
        acc += frac * sigma[k].ln();
    }
    acc
}

/// Spectral radius by Gelfand's formula: repeated squaring with rescaling
/// until `‖A^{2^m}‖^{1/2^m}` stabilises.
pub fn spectral_radius(a: &Matrix) -> Result<f64> {
    spectral_radius_with(a, SPECTRAL_RADIUS_MAX_SQUARINGS, SPECTRAL_RADIUS_TOL)
}

pub fn spectral_radius_with(a: &Matrix, max_squarings: usize, rel_tol: f64) -> Result<f64> {
    if !a.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    let d = a.dim;
    let mut x = a.clone();
    // x · e^{log_scale} = A^{2^m}
    let mut log_scale = 0.0;
    let mut prev = f64::NAN;
    let mut scratch = Vec::new();
    let mut sv = vec![0.0; d];
    for m in 0..=max_squarings {
        let top = x.max_abs();
        if top == 0.0 {
            return Ok(0.0);
        }
        x = x.scaled(1.0 / top);
        log_scale += top.ln();
        singular_values_into(d, &x.data, &mut scratch, &mut sv);
        let est = ((sv[0].ln() + log_scale) / 2f64.powi(m as i32)).exp();
        if m >= 2 && (est - prev).abs() <= rel_tol * est {
            return Ok(est);
        }
        prev = est;
        x = &x * &x;
        log_scale *= 2.0;
    }
    Err(Error::ToleranceNotMet {
        iterations: max_squarings,
    })
}

/// Binomial coefficient as `u128`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// The k-th exterior power `A^∧k` in the lexicographic basis of k-subsets.
pub fn exterior_power(a: &Matrix, k: usize) -> Result<Matrix> {
    let d = a.dim;
    if k == 0 || k > d {
        return invalid(format!("exterior power order must be in 1..={d}, got {k}"));
    }
    let subsets: Vec<Vec<usize>> = (0..d).combinations(k).collect();
    let n = subsets.len();
    let mut out = vec![0.0; n * n];
    let mut minor = vec![0.0; k * k];
    for (r, rows) in subsets.iter().enumerate() {
        for (c, cols) in subsets.iter().enumerate() {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    minor[i * k + j] = a.data[ri * d + cj];
                }
            }
            out[r * n + c] = determinant_of(k, &minor);
        }
    }
    Ok(Matrix::from_raw(n, out))
}

/// Kronecker product `A ⊗ B`.
pub fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (m, n) = (a.dim, b.dim);
    let size = m * n;
    let mut out = vec![0.0; size * size];
    for i in 0..m {
        for j in 0..m {
            let aij = a.data[i * m + j];
            for k in 0..n {
                for l in 0..n {
                    out[(i * n + k) * size + j * n + l] = aij * b.data[k * n + l];
                }
            }
        }
    }
    Matrix::from_raw(size, out)
}

/// Checks lift parameters `0 < k < d`, `0 ≤ p < q`, `gcd(p, q) = 1`.
pub fn validate_lift_params(d: usize, k: usize, p: u64, q: u64) -> Result<()> {
    if k == 0 || k >= d {
        return invalid(format!("lift needs 0 < k < d (k = {k}, d = {d})"));
    }
    if q == 0 || p >= q {
        return invalid(format!("lift needs 0 <= p < q (p = {p}, q = {q})"));
    }
    if p.gcd(&q) != 1 {
        return invalid(format!("lift needs p/q in lowest terms (p = {p}, q = {q})"));
    }
    Ok(())
}

/// Dimension `C(d,k)^{q-p} · C(d,k+1)^p` of the lift, saturating on overflow.
pub fn lift_dimension(d: usize, k: usize, p: u64, q: u64) -> u128 {
    let low = binomial(d, k);
    let high = binomial(d, k + 1);
    let mut acc: u128 = 1;
    for _ in 0..q - p {
        acc = acc.saturating_mul(low);
    }
    for _ in 0..p {
        acc = acc.saturating_mul(high);
    }
    acc
}

/// `(A^∧k)^{⊗(q-p)} ⊗ (A^∧(k+1))^{⊗p}`, whose norm to the power `1/q` is
/// `φ^{k+p/q}(A)`.
pub fn lift(a: &Matrix, k: usize, p: u64, q: u64) -> Result<Matrix> {
    validate_lift_params(a.dim, k, p, q)?;
    let dim = lift_dimension(a.dim, k, p, q);
    if dim > LIFT_HARD_CAP {
        return Err(Error::DimensionCapExceeded {
            dimension: dim,
            cap: LIFT_HARD_CAP as usize,
        });
    }
    let low = exterior_power(a, k)?;
    let high = exterior_power(a, k + 1)?;
    let mut acc = Matrix::identity(1);
    for _ in 0..q - p {
        acc = kronecker(&acc, &low);
    }
    for _ in 0..p {
        acc = kronecker(&acc, &high);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn singular_values_of_lower_triangular_example() {
        // AᵀA = [[25,20],[20,25]] has eigenvalues 45 and 5
        let sv = singular_values(&m(&[&[3.0, 0.0], &[4.0, 5.0]])).unwrap();
        assert_relative_eq!(sv.values()[0], 45f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(sv.values()[1], 5f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn singular_values_identity_and_zero() {
        for d in 1..6 {
            let sv = singular_values(&Matrix::identity(d)).unwrap();
            assert!(sv.values().iter().all(|&x| (x - 1.0).abs() < 1e-15));
            let sv = singular_values(&Matrix::zeros(d)).unwrap();
            assert!(sv.values().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn singular_values_jacobi_diagonal_permuted() {
        let a = m(&[&[0.0, 0.0, 3.0], &[-5.0, 0.0, 0.0], &[0.0, 0.5, 0.0]]);
        let sv = singular_values(&a).unwrap();
        assert_relative_eq!(sv.values()[0], 5.0, max_relative = 1e-15);
        assert_relative_eq!(sv.values()[1], 3.0, max_relative = 1e-15);
        assert_relative_eq!(sv.values()[2], 0.5, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(Matrix::new(2, vec![1.0, f64::NAN, 0.0, 1.0]).is_err());
        let overflowing = Matrix::from_raw(1, vec![f64::INFINITY]);
        assert!(matches!(singular_values(&overflowing), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn phi_examples() {
        assert_relative_eq!(
            phi(&Matrix::diag(&[0.5, 0.25]), 1.5).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        let a = m(&[&[3.0, 0.0], &[4.0, 5.0]]);
        assert_relative_eq!(phi(&a, 1.0).unwrap(), 45f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(phi(&a, 4.0).unwrap(), 225.0, max_relative = 1e-14);
        assert!(phi(&a, 0.0).is_err());
        assert!(phi(&a, -1.0).is_err());
    }

    #[test]
    fn phi_branches_agree_at_integers() {
        let a = m(&[&[0.3, -0.7, 0.1], &[0.2, 0.4, -0.5], &[0.9, 0.05, 0.2]]);
        let sv = singular_values(&a).unwrap();
        let det = a.determinant().abs();
        // s = d from the determinant branch and from σ₁σ₂σ₃
        assert_relative_eq!(phi(&a, 3.0).unwrap(), det, max_relative = 1e-12);
        assert_relative_eq!(sv.product(), det, max_relative = 1e-12);
        // s = 2 from either side
        let left = phi(&a, 2.0 - 1e-12).unwrap();
        assert_relative_eq!(phi(&a, 2.0).unwrap(), left, max_relative = 1e-9);
    }

    #[test]
    fn phi_right_discontinuity_for_rank_one() {
        let a = m(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let at_one = phi(&a, 1.0).unwrap();
        assert_relative_eq!(at_one, 5.0, max_relative = 1e-14);
        assert_eq!(phi(&a, 1.0 + 1e-9).unwrap(), 0.0);
        assert_relative_eq!(
            phi(&a, 1.0 - 1e-9).unwrap(),
            5f64.powf(1.0 - 1e-9),
            max_relative = 1e-12
        );
    }

    #[test]
    fn operator_norm_examples() {
        assert_eq!(operator_norm(&Matrix::identity(3)).unwrap(), 1.0);
        assert_eq!(operator_norm(&m(&[&[0.0, 2.0], &[0.0, 0.0]])).unwrap(), 2.0);
        assert_relative_eq!(
            operator_norm(&m(&[&[3.0, 0.0], &[4.0, 5.0]])).unwrap(),
            45f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn spectral_radius_examples() {
        assert_relative_eq!(
            spectral_radius(&Matrix::diag(&[0.5, 0.3])).unwrap(),
            0.5,
            max_relative = 1e-9
        );
        assert_eq!(spectral_radius(&m(&[&[0.0, 1.0], &[0.0, 0.0]])).unwrap(), 0.0);
        assert_relative_eq!(
            spectral_radius(&m(&[&[0.0, 1.0], &[0.5, 0.0]])).unwrap(),
            0.5f64.sqrt(),
            max_relative = 1e-9
        );
        // rotation by 1 radian scaled by 0.9
        let (c, s) = (1f64.cos() * 0.9, 1f64.sin() * 0.9);
        assert_relative_eq!(
            spectral_radius(&m(&[&[c, -s], &[s, c]])).unwrap(),
            0.9,
            max_relative = 1e-9
        );
    }

    #[test]
    fn spectral_radius_reports_non_convergence() {
        let jordan = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            spectral_radius_with(&jordan, 4, 1e-10),
            Err(Error::ToleranceNotMet { iterations: 4 })
        ));
        assert_relative_eq!(spectral_radius(&jordan).unwrap(), 1.0, max_relative = 1e-9);
    }

    #[test]
    fn exterior_power_examples() {
        let a = m(&[&[0.3, -0.7, 0.1], &[0.2, 0.4, -0.5], &[0.9, 0.05, 0.2]]);
        assert_eq!(exterior_power(&a, 1).unwrap(), a);
        let top = exterior_power(&a, 3).unwrap();
        assert_eq!(top.dim(), 1);
        assert_relative_eq!(top.get(0, 0), a.determinant(), max_relative = 1e-14);
        let w = exterior_power(&Matrix::diag(&[2.0, 3.0, 5.0]), 2).unwrap();
        assert_eq!(w, Matrix::diag(&[6.0, 10.0, 15.0]));
        assert!(exterior_power(&a, 0).is_err());
        assert!(exterior_power(&a, 4).is_err());
    }

    #[test]
    fn exterior_power_large_minors_use_lu() {
        let a = Matrix::from_raw(5, (0..25).map(|i| ((i * 7 % 11) as f64 - 5.0) / 7.0).collect());
        let top = exterior_power(&a, 5).unwrap();
        assert_relative_eq!(
            top.get(0, 0),
            lu_determinant(5, a.as_slice().to_vec()),
            max_relative = 1e-12
        );
        let sv = singular_values(&a).unwrap();
        let w4 = exterior_power(&a, 4).unwrap();
        assert_relative_eq!(operator_norm(&w4).unwrap(), sv.leading_product(4), max_relative = 1e-10);
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(
            kronecker(&Matrix::identity(2), &Matrix::identity(3)),
            Matrix::identity(6)
        );
        let k = kronecker(&Matrix::diag(&[2.0, 3.0]), &Matrix::diag(&[5.0, 7.0]));
        assert_eq!(k, Matrix::diag(&[10.0, 14.0, 15.0, 21.0]));
    }

    #[test]
    fn lift_examples() {
        let a = m(&[&[0.3, -0.7], &[0.2, 0.4]]);
        let l = lift(&a, 1, 1, 2).unwrap();
        assert_eq!(l.dim(), 2);
        let expected = a.scaled(a.determinant());
        for (x, y) in l.as_slice().iter().zip(expected.as_slice()) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
        let d = lift(&Matrix::diag(&[0.5, 0.25]), 1, 1, 2).unwrap();
        assert_eq!(d, Matrix::diag(&[0.0625, 0.03125]));
        assert_relative_eq!(operator_norm(&d).unwrap().sqrt(), 0.25, max_relative = 1e-15);
        assert_eq!(lift(&a, 1, 0, 1).unwrap(), a);
    }

    #[test]
    fn lift_rejects_bad_parameters() {
        let a = Matrix::identity(3);
        assert!(lift(&a, 0, 0, 1).is_err());
        assert!(lift(&a, 3, 0, 1).is_err());
        assert!(lift(&a, 1, 2, 2).is_err());
        assert!(lift(&a, 1, 2, 4).is_err());
        assert!(lift(&a, 1, 0, 2).is_err());
        assert!(matches!(
            lift(&Matrix::identity(4), 2, 1, 7),
            Err(Error::DimensionCapExceeded { .. })
        ));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 1), 3);
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(lift_dimension(3, 1, 1, 2), 9);
    }
}
