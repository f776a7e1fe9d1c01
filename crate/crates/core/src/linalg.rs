//! Small dense linear algebra over `f64` and over jets.
//!
//! Matrices are row-major `Vec`s of side `n`. Determinants and adjugates go
//! through a cofactor expansion memoised on the set of used columns, which
//! needs only ring operations and so works unchanged on jets.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::jet::Jet;

/// Commutative ring operations needed by the cofactor routines.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Ring for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn one_like(&self) -> f64 {
        1.0
    }
    fn add(&self, other: &f64) -> f64 {
        self + other
    }
    fn sub(&self, other: &f64) -> f64 {
        self - other
    }
    fn mul(&self, other: &f64) -> f64 {
        self * other
    }
    fn neg(&self) -> f64 {
        -self
    }
}

impl Ring for Jet {
    fn zero_like(&self) -> Jet {
        Jet::zero_like(self)
    }
    fn one_like(&self) -> Jet {
        self.constant_like(1.0)
    }
    fn add(&self, other: &Jet) -> Jet {
        self + other
    }
    fn sub(&self, other: &Jet) -> Jet {
        self - other
    }
    fn mul(&self, other: &Jet) -> Jet {
        self * other
    }
    fn neg(&self) -> Jet {
        -self
    }
}

/// Determinant of the submatrix on `rows` (in order) and the columns in `cols`
/// (a bitmask with as many bits set as there are rows).
fn minor_det<T: Ring>(m: &[T], n: usize, rows: &[usize], memo: &mut Vec<Option<T>>, cols: usize) -> T {
    if let Some(v) = &memo[cols] {
        return v.clone();
    }
    let depth = rows.len() - cols.count_ones() as usize;
    let row = rows[depth];
    let mut acc: Option<T> = None;
    let mut sign_pos = true;
    for c in 0..n {
        if cols & (1 << c) == 0 {
            continue;
        }
        let rest = cols & !(1 << c);
        let term = if rest == 0 {
            m[row * n + c].clone()
        } else {
            m[row * n + c].mul(&minor_det(m, n, rows, memo, rest))
        };
        acc = Some(match acc {
            None if sign_pos => term,
            None => term.neg(),
            Some(a) if sign_pos => a.add(&term),
            Some(a) => a.sub(&term),
        });
        sign_pos = !sign_pos;
    }
    let v = acc.unwrap_or_else(|| m[0].one_like());
    memo[cols] = Some(v.clone());
    v
}

pub fn det<T: Ring>(m: &[T], n: usize) -> T {
    assert_eq!(m.len(), n * n);
    let rows: Vec<usize> = (0..n).collect();
    let mut memo = vec![None; 1 << n];
    minor_det(m, n, &rows, &mut memo, (1 << n) - 1)
}

/// Transposed cofactor matrix, so that `adj · m = m · adj = det(m) · Id`.
pub fn adjugate<T: Ring>(m: &[T], n: usize) -> Vec<T> {
    assert_eq!(m.len(), n * n);
    if n == 1 {
        return vec![m[0].one_like()];
    }
    let full = (1usize << n) - 1;
    let mut adj = vec![m[0].zero_like(); n * n];
    for i in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
        let mut memo = vec![None; 1 << n];
        for j in 0..n {
            let minor = minor_det(m, n, &rows, &mut memo, full & !(1 << j));
            // cofactor (i, j) lands at (j, i)
            adj[j * n + i] = if (i + j) % 2 == 0 { minor } else { minor.neg() };
        }
    }
    adj
}

pub fn matmul<T: Ring>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = a[i * n].mul(&b[j]);
            for k in 1..n {
                acc = acc.add(&a[i * n + k].mul(&b[k * n + j]));
            }
            out.push(acc);
        }
    }
    out
}

/// Inverse of a matrix of jets.
///
/// Split `m = m0 + N` with `m0` the value part; `N` has no constant term, so
/// the Neumann series `Σ (−m0⁻¹N)^k m0⁻¹` terminates exactly at the jet order.
/// Returns `None` when the value part is not invertible.
pub fn jet_inverse(m: &[Jet], n: usize) -> Option<Vec<Jet>> {
    let m0 = DMatrix::from_fn(n, n, |i, j| m[i * n + j].value());
    let inv0 = m0.try_inverse()?;
    let order = m.iter().map(Jet::order).min().unwrap_or(0);
    let nvars = m[0].nvars();
    let inv0_j: Vec<Jet> = (0..n * n).map(|k| Jet::constant(nvars, order, inv0[(k / n, k % n)])).collect();
    // step = −m0⁻¹ N
    let nil: Vec<Jet> = (0..n * n).map(|k| m[k].truncate(order).add_scalar(-m[k].value())).collect();
    let step: Vec<Jet> = matmul(&inv0_j, &nil, n).into_iter().map(|j| -j).collect();
    let mut term = inv0_j.clone();
    let mut sum = inv0_j;
    for _ in 0..order {
        term = matmul(&step, &term, n);
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
    }
    Some(sum)
}

pub fn to_dmatrix(m: &[f64], rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(rows, cols, m)
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Rank and an orthonormal basis of the null space of `m` (as columns of
/// length `m.ncols()`), counting singular values above `threshold`.
pub fn rank_and_kernel(m: &DMatrix<f64>, threshold: f64) -> (usize, Vec<f64>, Vec<Vec<f64>>) {
    let cols = m.ncols();
    // Work with the Gram matrix side so the full right-singular basis is available
    // even when m has fewer rows than columns.
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut pairs: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let rank = pairs.iter().filter(|(s, _)| *s > threshold).count();
    let sv = pairs.iter().map(|p| p.0).collect();
    let kernel = pairs[rank..].iter().map(|&(_, k)| v_t.row(k).iter().copied().collect()).collect();
    (rank, sv, kernel)
}

/// Eigenvalues of a symmetric matrix, ascending, with eigenvectors as columns.
pub fn symmetric_eigen(m: &[f64], n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(to_dmatrix(m, n, n));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| e.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Largest singular value.
pub fn operator_norm(m: &[f64], n: usize) -> f64 {
    singular_values(&to_dmatrix(m, n, n)).first().copied().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn det_and_adjugate_of_3x3() {
        let m = [2.0, -1.0, 0.5, 1.0, 3.0, 2.0, 0.0, 4.0, -1.0];
        let d = det(&m, 3);
        assert_relative_eq!(d, to_dmatrix(&m, 3, 3).determinant(), epsilon = 1e-12);
        let adj = adjugate(&m, 3);
        let p = matmul(&adj, &m, 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { d } else { 0.0 };
                assert_relative_eq!(p[i * 3 + j], want, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_has_zero_determinant_and_rank_one_adjugate() {
        let m = [1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0];
        assert_relative_eq!(det(&m, 3), 0.0, epsilon = 1e-12);
        let (rank, _, _) = rank_and_kernel(&to_dmatrix(&adjugate(&m, 3), 3, 3), 1e-10);
        assert_eq!(rank, 1);
    }

    #[test]
    fn jet_inverse_of_one_by_one_is_reciprocal() {
        let x = Jet::variable(1, 4, 0, 0.0);
        let m = vec![x.add_scalar(2.0)];
        let inv = jet_inverse(&m, 1).unwrap();
        let want = m[0].try_recip().unwrap();
        for (a, b) in inv[0].coeffs().iter().zip(want.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let (rank, _, ker) = rank_and_kernel(&m, 1e-12);
        assert_eq!(rank, 1);
        assert_eq!(ker.len(), 2);
        for v in ker {
            assert!((v[0] + v[1]).abs() < 1e-14);
        }
    }
}
