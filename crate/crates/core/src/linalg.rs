//! Dense linear-algebra helpers shared by the subspace, isometry and
//! ergodic modules. Everything here works in Euclidean coordinates; callers
//! move to and from the μ-weighted reference geometry themselves.

use nalgebra::{DMatrix, DVector};

/// Thin singular value decomposition `a = u · diag(s) · v_t`, singular values
/// nonincreasing.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

pub(crate) fn svd(a: &DMatrix<f64>) -> Svd {
    let (r, c) = a.shape();
    let k = r.min(c);
    if k == 0 {
        return Svd { u: DMatrix::zeros(r, 0), s: Vec::new(), v_t: DMatrix::zeros(0, c) };
    }
    let m = faer::Mat::<f64>::from_fn(r, c, |i, j| a[(i, j)]);
    let d = m.thin_svd().expect("finite matrix");
    let (u, v, sv) = (d.U(), d.V(), d.S().column_vector());
    Svd {
        u: DMatrix::from_fn(r, k, |i, j| u[(i, j)]),
        s: (0..k).map(|i| sv[i]).collect(),
        v_t: DMatrix::from_fn(k, c, |i, j| v[(j, i)]),
    }
}


/// Orthonormal basis (as columns) of the null space of `a`; singular values
/// at most `tol · max(1, σ_max)` count as zero.
pub(crate) fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = a.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    let rows = a.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
    let d = svd(&padded);
    let v_t = d.v_t;
    let smax = d.s.first().copied().unwrap_or(0.0);
    let thr = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..d.s.len())
        .filter(|&i| d.s[i] <= thr)
        .collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

/// Orthonormal rows spanning the row space of `rows` (each a vector of
/// length `n`), discarding singular directions below `tol · σ_max`.
pub(crate) fn row_space(rows: &[Vec<f64>], n: usize, tol: f64) -> Vec<Vec<f64>> {
    if rows.is_empty() {
        return Vec::new();
    }
    let g = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let d = svd(&g);
    let v_t = d.v_t;
    let smax = d.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Vec::new();
    }
    (0..d.s.len())
        .filter(|&i| d.s[i] > tol * smax)
        .map(|i| v_t.row(i).iter().cloned().collect())
        .collect()
}

/// Canonical orthonormal basis of the span of orthonormal `rows`: reduced
/// row echelon form (leading entries positive) followed by Gram–Schmidt in
/// row order. Two orthonormal bases of one subspace map to the same output
/// up to rounding.
pub(crate) fn canonical_rows(rows: Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    let r = rows.len();
    if r == 0 {
        return rows;
    }
    let mut m = rows.clone();
    let mut k = 0;
    for c in 0..n {
        if k == r {
            break;
        }
        let (piv, val) = (k..r)
            .map(|i| (i, m[i][c].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if val <= 1e-9 {
            continue;
        }
        m.swap(k, piv);
        let lead = m[k][c];
        m[k].iter_mut().for_each(|x| *x /= lead);
        for i in 0..r {
            if i != k {
                let f = m[i][c];
                if f != 0.0 {
                    let pivot_row = m[k].clone();
                    m[i].iter_mut().zip(&pivot_row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
        k += 1;
    }
    if k < r {
        return rows;
    }
    gram_schmidt(m)
}

fn gram_schmidt(mut m: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for i in 0..m.len() {
        for _ in 0..2 {
            for j in 0..i {
                let d: f64 = m[i].iter().zip(&m[j]).map(|(a, b)| a * b).sum();
                let prev = m[j].clone();
                m[i].iter_mut().zip(&prev).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nrm = m[i].iter().map(|x| x * x).sum::<f64>().sqrt();
        m[i].iter_mut().for_each(|x| *x /= nrm);
    }
    m
}

/// Frobenius norm of a matrix difference.
pub(crate) fn frob_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm()
}

pub(crate) fn to_dvector(f: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(f)
}

/// Row-major nested vectors from a matrix.
pub fn matrix_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows()).map(|i| a.row(i).iter().cloned().collect()).collect()
}

/// Matrix from row-major nested vectors; `None` when rows are ragged.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return None;
    }
    Some(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}
