//! Mean-ergodic projections of contractions: Cesàro averages with an
//! independent spectral cross-check, projections onto intersections of
//! 1-complemented subspaces, and the fixed-space splitting of a finite
//! group of isometries.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::complement::op_norm;
use crate::error::{Error, Result};
use crate::isometry::{self, SignedPermutation, DEFAULT_ORDER_CAP};
use crate::linalg;
use crate::lpspace::Space;
use crate::partition::Partition;
use crate::subspace::{Subspace, DEFAULT_TOL};

pub const DEFAULT_TOL_ERGODIC: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Doubling steps are capped here whatever `max_iter` says: 2⁶⁰ averaged
/// powers is far past any meaningful accuracy gain.
const MAX_DOUBLINGS: usize = 60;

/// How a contraction bound was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Exact operator norm (p ∈ {1, 2, ∞}).
    Exact,
    /// Convex combination of isometries or a conditional expectation.
    ByConstruction,
    /// Only a sampled lower bound on the norm was checked.
    Sampled,
}

#[derive(Debug, Clone)]
pub struct ContractionOperator {
    space: Space,
    matrix: DMatrix<f64>,
    certification: Certification,
    norm_bound: Option<f64>,
}

impl ContractionOperator {
    /// Certifies an arbitrary matrix: exactly for p ∈ {1, 2, ∞}, by sampling
    /// otherwise (flagged as [`Certification::Sampled`]).
    pub fn from_matrix(space: &Space, matrix: DMatrix<f64>) -> Result<Self> {
        let n = space.n();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension { expected: n, got: matrix.nrows().max(matrix.ncols()) });
        }
        let norm = op_norm(space, &matrix, space.p())?;
        if norm.value > 1.0 + 1e-9 {
            return Err(Error::NotContraction(format!("operator norm at least {}", norm.value)));
        }
        let certification = if norm.exact { Certification::Exact } else { Certification::Sampled };
        Ok(ContractionOperator { space: space.clone(), matrix, certification, norm_bound: Some(norm.value) })
    }

    /// Σ c_k g_k with c_k ≥ 0 summing to one.
    pub fn convex_combination(space: &Space, coeffs: &[f64], elements: &[SignedPermutation]) -> Result<Self> {
        Error::check_dim(coeffs.len(), elements.len())?;
        if coeffs.iter().any(|c| *c < 0.0) || (coeffs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain("coefficients must be nonnegative and sum to one".into()));
        }
        let n = space.n();
        let mut m = DMatrix::zeros(n, n);
        for (c, g) in coeffs.iter().zip(elements) {
            Error::check_dim(n, g.n())?;
            if !g.is_compatible(space) {
                return Err(Error::NotIsometry("element moves atoms between different weights".into()));
            }
            m += g.matrix() * *c;
        }
        Ok(ContractionOperator { space: space.clone(), matrix: m, certification: Certification::ByConstruction, norm_bound: Some(1.0) })
    }

    pub fn conditional_expectation(space: &Space, partition: &Partition) -> Result<Self> {
        let matrix = partition.conditional_expectation(space)?;
        Ok(ContractionOperator { space: space.clone(), matrix, certification: Certification::ByConstruction, norm_bound: Some(1.0) })
    }

    pub fn identity(space: &Space) -> Self {
        let n = space.n();
        ContractionOperator {
            space: space.clone(),
            matrix: DMatrix::identity(n, n),
            certification: Certification::ByConstruction,
            norm_bound: Some(1.0),
        }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn certification(&self) -> Certification {
        self.certification
    }

    pub fn norm_bound(&self) -> Option<f64> {
        self.norm_bound
    }
}

/// Which computation produced a projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErgodicPath {
    Cesaro,
    Spectral,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicReport {
    #[serde(serialize_with = "serialize_matrix")]
    pub projection: DMatrix<f64>,
    /// Doubling steps taken.
    pub iterations: usize,
    /// Number of powers in the returned average (the one with smallest residual).
    pub averaged_terms: f64,
    pub residual: f64,
    #[serde(rename = "fixed_space_basis", serialize_with = "serialize_basis")]
    pub fixed_space: Subspace,
    pub oracle_used: ErgodicPath,
    /// Distance to the projection from the other path, when both ran.
    pub oracle_discrepancy: Option<f64>,
    /// Doubling residual of the Cesàro cross-check on the spectral path.
    pub cross_check_residual: Option<f64>,
}

pub(crate) fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&linalg::matrix_rows(m), s)
}

fn serialize_basis<S: serde::Serializer>(y: &Subspace, s: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(y.basis(), s)
}

/// Frobenius norm of D^{1/2} A D^{-1/2}: the Hilbert–Schmidt norm on ℓ₂(μ).
pub fn reference_norm(space: &Space, a: &DMatrix<f64>) -> f64 {
    let w = space.weights();
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let x = a[(i, j)] * (w[i] / w[j]).sqrt();
            s += x * x;
        }
    }
    s.sqrt()
}

/// Range of an (approximate) projection. Nonzero singular values of a
/// projection are at least one, so one half separates range from noise.
pub fn projection_range(space: &Space, p: &DMatrix<f64>) -> Result<Subspace> {
    let n = space.n();
    let w = space.weights();
    let scaled = DMatrix::from_fn(n, n, |i, j| p[(i, j)] * (w[i] / w[j]).sqrt());
    let svd = linalg::svd(&scaled);
    let u = svd.u;
    let gens: Vec<Vec<f64>> = (0..svd.s.len())
        .filter(|&k| svd.s[k] > 0.5)
        .map(|k| (0..n).map(|i| u[(i, k)] / w[i].sqrt()).collect())
        .collect();
    Subspace::spanned_by(space, &gens, DEFAULT_TOL)
}

/// Null space of a matrix acting on coordinate vectors, as a subspace.
pub(crate) fn kernel(space: &Space, a: &DMatrix<f64>, tol: f64) -> Result<Subspace> {
    let n = space.n();
    let w = space.weights();
    // columns rescaled so the null space comes out in reference coordinates
    let scaled = DMatrix::from_fn(a.nrows(), n, |i, j| a[(i, j)] / w[j].sqrt());
    let ns = linalg::null_space(&scaled, tol);
    let gens: Vec<Vec<f64>> = ns.column_iter().map(|c| (0..n).map(|i| c[i] / w[i].sqrt()).collect()).collect();
    Subspace::spanned_by(space, &gens, DEFAULT_TOL)
}

/// Projection onto ker(I − T) along range(I − T).
pub fn spectral_projection(t: &ContractionOperator) -> Result<DMatrix<f64>> {
    let space = &t.space;
    let n = space.n();
    let i_minus_t = DMatrix::identity(n, n) - &t.matrix;
    let fixed = kernel(space, &i_minus_t, 1e-9)?;
    let k = fixed.dim();
    let svd = linalg::svd(&i_minus_t);
    let u = svd.u;
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let range: Vec<usize> = (0..svd.s.len())
        .filter(|&c| svd.s[c] > 1e-9 * smax.max(1.0))
        .collect();
    if k + range.len() != n {
        return Err(Error::NotContraction("ker(I−T) and range(I−T) do not split the space".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    for (c, b) in fixed.basis().iter().enumerate() {
        m.set_column(c, &DVector::from_column_slice(b));
    }
    for (c, &r) in range.iter().enumerate() {
        m.set_column(k + c, &u.column(r));
    }
    let inv = m.clone().try_inverse().ok_or_else(|| Error::NotContraction("fixed space meets range(I−T)".into()))?;
    let mut sel = DMatrix::zeros(n, n);
    for c in 0..k {
        sel[(c, c)] = 1.0;
    }
    Ok(m * sel * inv)
}

/// Cesàro averages A_N = (1/N) Σ_{k<N} T^k by doubling,
/// A_{2N} = (A_N + T^N A_N)/2, until ‖A_{2N} − A_N‖ ≤ `tol` in the
/// reference norm. `max_iter` bounds the number of doublings.
pub fn cesaro_projection(t: &ContractionOperator, tol: f64, max_iter: usize) -> Result<ErgodicReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    let space = &t.space;
    let n = space.n();
    let mut avg = DMatrix::identity(n, n);
    let mut power = t.matrix.clone();
    let mut terms = 1.0;
    let mut iterations = 0;
    // squaring doubles rounding error each step, so late averages can drift
    // away again; the best one seen is kept
    let mut best = (f64::INFINITY, avg.clone(), 1.0);
    let limit = max_iter.clamp(1, MAX_DOUBLINGS);
    while iterations < limit {
        let next = (&avg + &power * &avg) * 0.5;
        let residual = reference_norm(space, &(&next - &avg));
        avg = next;
        power = &power * &power;
        terms *= 2.0;
        iterations += 1;
        if residual < best.0 {
            best = (residual, avg.clone(), terms);
        }
        if residual <= tol {
            break;
        }
    }
    let (residual, avg, terms) = best;
    let fixed_space = projection_range(space, &avg)?;
    let oracle_discrepancy = spectral_projection(t).ok().map(|p| reference_norm(space, &(&avg - p)));
    let report = ErgodicReport {
        projection: avg,
        iterations,
        averaged_terms: terms,
        residual,
        fixed_space,
        oracle_used: ErgodicPath::Cesaro,
        oracle_discrepancy,
        cross_check_residual: None,
    };
    if residual > tol {
        return Err(Error::Convergence(Box::new(report)));
    }
    Ok(report)
}

/// The spectral projection packaged as a report (no iteration).
pub fn spectral_report(t: &ContractionOperator) -> Result<ErgodicReport> {
    let p = spectral_projection(t)?;
    let fixed_space = projection_range(&t.space, &p)?;
    let residual = reference_norm(&t.space, &(&p * &p - &p));
    Ok(ErgodicReport {
        projection: p,
        iterations: 0,
        averaged_terms: 0.0,
        residual,
        fixed_space,
        oracle_used: ErgodicPath::Spectral,
        oracle_discrepancy: None,
        cross_check_residual: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntersectionReport {
    #[serde(flatten)]
    pub ergodic: ErgodicReport,
    pub intersection_dim: usize,
    pub range_equals_intersection: bool,
}

/// Contractive projection onto the intersection of the ranges of
/// contractive projections: the mean-ergodic projection of their average,
/// by the path of [`ergodic_projection`].
pub fn intersection_projection(projs: &[ContractionOperator], tol: f64, max_iter: usize) -> Result<IntersectionReport> {
    let first = projs.first().ok_or_else(|| Error::Domain("no projections given".into()))?;
    let space = first.space.clone();
    let n = space.n();
    let mut sum = DMatrix::zeros(n, n);
    let mut meet: Option<Subspace> = None;
    for p in projs {
        if p.space != space {
            return Err(Error::Domain("projections act on different spaces".into()));
        }
        let defect = reference_norm(&space, &(&p.matrix * &p.matrix - &p.matrix));
        if defect > 1e-9 {
            return Err(Error::NotProjection(defect));
        }
        sum += &p.matrix;
        let range = projection_range(&space, &p.matrix)?;
        meet = Some(match meet {
            None => range,
            Some(m) => m.intersect(&range)?,
        });
    }
    let certification = if projs.iter().all(|p| p.certification != Certification::Sampled) {
        Certification::ByConstruction
    } else {
        Certification::Sampled
    };
    let avg = ContractionOperator { space: space.clone(), matrix: sum / projs.len() as f64, certification, norm_bound: Some(1.0) };
    let ergodic = ergodic_projection(&avg, tol, max_iter)?;
    if let Some(r) = ergodic.cross_check_residual.filter(|r| *r > tol) {
        let mut partial = ergodic.clone();
        partial.residual = r;
        return Err(Error::Convergence(Box::new(partial)));
    }
    let meet = meet.expect("nonempty");
    let eq_tol = if ergodic.oracle_used == ErgodicPath::Spectral { 1e-9 } else { 1e-6 };
    let range_equals_intersection = ergodic.fixed_space.equal(&meet, eq_tol)?;
    Ok(IntersectionReport { intersection_dim: meet.dim(), range_equals_intersection, ergodic })
}

/// Spectral projection when it validates as the mean-ergodic projection of
/// `t` (idempotent, fixed by T on both sides), otherwise the Cesàro limit.
/// Cesàro still runs in the first case as a cross-check.
pub fn ergodic_projection(t: &ContractionOperator, tol: f64, max_iter: usize) -> Result<ErgodicReport> {
    let space = &t.space;
    if let Ok(p) = spectral_projection(t) {
        let defect = reference_norm(space, &(&p * &p - &p))
            .max(reference_norm(space, &(&t.matrix * &p - &p)))
            .max(reference_norm(space, &(&p * &t.matrix - &p)));
        if defect <= 1e-10 * (1.0 + reference_norm(space, &p)) {
            let mut report = spectral_report(t)?;
            let cesaro = match cesaro_projection(t, tol, max_iter) {
                Ok(c) => c,
                Err(Error::Convergence(c)) => *c,
                Err(e) => return Err(e),
            };
            report.oracle_discrepancy = Some(reference_norm(space, &(&cesaro.projection - &p)));
            report.cross_check_residual = Some(cesaro.residual);
            return Ok(report);
        }
    }
    cesaro_projection(t, tol, max_iter)
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanErgodicValue {
    pub value: Vec<f64>,
    pub path: ErgodicPath,
    /// ‖Tv − v‖ in the reference norm.
    pub fixed_residual: f64,
    /// Distance from `value` to a Cesàro orbit average A_N x, a point of
    /// the convex hull of the orbit segment x, Tx, …, T^{N−1}x.
    pub hull_residual: f64,
    pub orbit_terms: f64,
    /// `hull_residual` ≤ 4·tol·max(1, ‖x‖).
    pub in_hull: bool,
}

/// lim A_N x: the unique point of Fix(T) in the closed convex hull of the orbit.
pub fn mean_ergodic_value(t: &ContractionOperator, x: &[f64], tol: f64, max_iter: usize) -> Result<MeanErgodicValue> {
    t.space.check(x)?;
    let report = ergodic_projection(t, tol, max_iter)?;
    let cesaro = match report.oracle_used {
        ErgodicPath::Cesaro => report.clone(),
        ErgodicPath::Spectral => cesaro_projection(t, tol, max_iter)?,
    };
    let xv = DVector::from_column_slice(x);
    let v = &report.projection * &xv;
    let w = t.space.weights();
    let ref_norm = |d: &DVector<f64>| d.iter().zip(w).map(|(a, m)| m * a * a).sum::<f64>().sqrt();
    let fixed_residual = ref_norm(&(&t.matrix * &v - &v));
    let hull_residual = ref_norm(&(&cesaro.projection * &xv - &v));
    let in_hull = hull_residual <= 4.0 * tol * ref_norm(&xv).max(1.0);
    Ok(MeanErgodicValue {
        value: v.iter().cloned().collect(),
        path: report.oracle_used,
        fixed_residual,
        hull_residual,
        orbit_terms: cesaro.averaged_terms,
        in_hull,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedSpaceReport {
    pub group_order: usize,
    pub fixed_dim: usize,
    pub complement_dim: usize,
    /// dim Fix + dim ker P = n and the two spans fill the space.
    pub direct_sum: bool,
    /// ker P equals the pre-annihilator of the adjoint fixed space.
    pub kernel_is_preannihilator: bool,
    /// Largest relative distance from J(y) to Fix(S*) over sampled y.
    pub duality_residual: f64,
    /// span J(Fix(S)) = Fix(S*).
    pub duality_spans_adjoint_fix: bool,
    /// ker P equals the pre-annihilator of J(Fix(S)).
    pub complement_is_duality_annihilator: bool,
    pub fixed_invariant: bool,
    pub complement_invariant: bool,
    #[serde(serialize_with = "serialize_basis")]
    pub fixed_space: Subspace,
    #[serde(serialize_with = "serialize_basis")]
    pub complement: Subspace,
}

fn preannihilator(space: &Space, functionals: &[Vec<f64>]) -> Result<Subspace> {
    if functionals.is_empty() {
        return Ok(Subspace::whole(space));
    }
    let w = space.weights();
    let a = DMatrix::from_fn(functionals.len(), space.n(), |k, i| w[i] * functionals[k][i]);
    kernel(space, &a, 1e-9)
}

/// The splitting X = Fix(S) ⊕ J(Fix(S))^⊥ = Fix(S) ⊕ Fix(S*)^⊥ for the
/// finite group generated by `gens`, with duality checks on `samples`
/// seeded sphere points of Fix(S).
pub fn fixed_space_check(space: &Space, gens: &[SignedPermutation], samples: usize, seed: u64) -> Result<FixedSpaceReport> {
    let p = space.p();
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::NotStrictlyConvex(p));
    }
    for g in gens {
        Error::check_dim(space.n(), g.n())?;
        if !g.is_compatible(space) {
            return Err(Error::NotIsometry("generator moves atoms between different weights".into()));
        }
    }
    let group = isometry::group_closure(gens, DEFAULT_ORDER_CAP)?;
    let n = space.n();
    let proj = isometry::average(n, &group);
    let fixed = projection_range(space, &proj)?;
    let complement = kernel(space, &proj, 1e-9)?;

    let direct_sum = fixed.dim() + complement.dim() == n && fixed.sum(&complement)?.dim() == n;

    // adjoints under the weighted pairing: D⁻¹ gᵀ D
    let w = space.weights();
    let adjoint_moves: Vec<DMatrix<f64>> = gens
        .iter()
        .map(|g| {
            let m = g.matrix();
            DMatrix::from_fn(n, n, |i, j| m[(j, i)] * w[j] / w[i]) - DMatrix::identity(n, n)
        })
        .collect();
    let stacked = DMatrix::from_fn(n * adjoint_moves.len(), n, |r, c| adjoint_moves[r / n][(r % n, c)]);
    let adjoint_fix = kernel(space, &stacked, 1e-9)?;
    let kernel_is_preannihilator = complement.equal(&preannihilator(space, adjoint_fix.basis())?, 1e-8)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::new();
    let mut duality_residual: f64 = 0.0;
    if fixed.dim() > 0 {
        for _ in 0..samples.max(1) {
            // the group average has exact zeros, so y does too
            let x = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            let mut y: Vec<f64> = (&proj * x).iter().cloned().collect();
            let ny = space.norm(&y)?;
            y.iter_mut().for_each(|x| *x /= ny);
            let jy = space.duality_map(&y)?;
            let proj_jy = adjoint_fix.project(&jy)?;
            let gap: Vec<f64> = jy.iter().zip(&proj_jy).map(|(a, b)| a - b).collect();
            let rel = adjoint_fix.space().pairing(&gap, &gap)?.sqrt() / space.pairing(&jy, &jy)?.sqrt();
            duality_residual = duality_residual.max(rel);
            images.push(jy);
        }
    }
    let j_span = Subspace::spanned_by(space, &images, 1e-9)?;
    let duality_spans_adjoint_fix = j_span.equal(&adjoint_fix, 1e-8)?;
    let complement_is_duality_annihilator = complement.equal(&preannihilator(space, j_span.basis())?, 1e-8)?;

    let invariant = |y: &Subspace| -> Result<bool> {
        for g in gens {
            for b in y.basis() {
                if !y.contains(&g.act(b), 1e-9)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };
    Ok(FixedSpaceReport {
        group_order: group.len(),
        fixed_dim: fixed.dim(),
        complement_dim: complement.dim(),
        direct_sum,
        kernel_is_preannihilator,
        duality_residual,
        duality_spans_adjoint_fix,
        complement_is_duality_annihilator,
        fixed_invariant: invariant(&fixed)?,
        complement_invariant: invariant(&complement)?,
        fixed_space: fixed,
        complement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn identity_converges_in_one_step() {
        let s = Space::uniform(3, 3.0).unwrap();
        let r = cesaro_projection(&ContractionOperator::identity(&s), 1e-6, 100).unwrap();
        assert_eq!(r.iterations, 1);
        assert_eq!(r.projection, DMatrix::identity(3, 3));
    }

    #[test]
    fn half_identity_plus_shift_gives_global_mean() {
        let s = Space::uniform(3, 3.0).unwrap();
        let t = ContractionOperator::convex_combination(
            &s,
            &[0.5, 0.5],
            &[SignedPermutation::identity(3), SignedPermutation::cyclic_shift(3)],
        )
        .unwrap();
        let mean = DMatrix::from_element(3, 3, 1.0 / 3.0);
        assert!(close(&spectral_projection(&t).unwrap(), &mean, 1e-12));
        let r = cesaro_projection(&t, 1e-6, DEFAULT_MAX_ITER).unwrap();
        assert!(reference_norm(&s, &(&r.projection - &mean)) <= 1e-6);
        assert_eq!(r.fixed_space.dim(), 1);
    }

    #[test]
    fn negation_has_trivial_fixed_space() {
        let s = Space::uniform(3, 3.0).unwrap();
        let t = ContractionOperator::convex_combination(&s, &[1.0], &[SignedPermutation::negation(3)]).unwrap();
        let r = cesaro_projection(&t, 1e-6, DEFAULT_MAX_ITER).unwrap();
        assert!(r.projection.norm() < 1e-12);
        assert_eq!(r.fixed_space.dim(), 0);
    }

    #[test]
    fn convergence_failure_carries_partial_report() {
        let s = Space::uniform(3, 3.0).unwrap();
        let t = ContractionOperator::convex_combination(
            &s,
            &[0.999, 0.001],
            &[SignedPermutation::identity(3), SignedPermutation::cyclic_shift(3)],
        )
        .unwrap();
        match cesaro_projection(&t, 1e-12, 3) {
            Err(Error::Convergence(r)) => assert_eq!(r.iterations, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn uncertified_matrix_is_rejected() {
        let s = Space::uniform(2, 1.0).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        assert!(matches!(ContractionOperator::from_matrix(&s, m), Err(Error::NotContraction(_))));
        let s3 = Space::uniform(2, 3.0).unwrap();
        let half = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let c = ContractionOperator::from_matrix(&s3, half).unwrap();
        assert_eq!(c.certification(), Certification::Sampled);
    }

    #[test]
    fn intersection_examples() {
        let s = Space::uniform(3, 3.0).unwrap();
        let p = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let q = Partition::new(3, vec![vec![0], vec![1, 2]]).unwrap();
        let ep = ContractionOperator::conditional_expectation(&s, &p).unwrap();
        let eq = ContractionOperator::conditional_expectation(&s, &q).unwrap();
        let r = intersection_projection(&[ep, eq], 1e-6, DEFAULT_MAX_ITER).unwrap();
        let mean = Partition::indiscrete(3).conditional_expectation(&s).unwrap();
        assert!(reference_norm(&s, &(&r.ergodic.projection - mean)) <= 2e-6);
        assert!(r.range_equals_intersection);
        assert_eq!(r.intersection_dim, 1);

        let id = ContractionOperator::identity(&s);
        let r = intersection_projection(&[id.clone(), id], 1e-6, 10).unwrap();
        assert_eq!(r.ergodic.projection, DMatrix::identity(3, 3));
    }

    #[test]
    fn non_projection_rejected() {
        let s = Space::uniform(3, 3.0).unwrap();
        let t = ContractionOperator::convex_combination(
            &s,
            &[0.5, 0.5],
            &[SignedPermutation::identity(3), SignedPermutation::cyclic_shift(3)],
        )
        .unwrap();
        assert!(matches!(intersection_projection(&[t], 1e-6, 10), Err(Error::NotProjection(_))));
    }

    #[test]
    fn mean_values() {
        let s = Space::uniform(3, 3.0).unwrap();
        let shift = ContractionOperator::convex_combination(&s, &[1.0], &[SignedPermutation::cyclic_shift(3)]).unwrap();
        let v = mean_ergodic_value(&shift, &[1.0, 0.0, 0.0], 1e-9, DEFAULT_MAX_ITER).unwrap();
        for x in &v.value {
            assert!((x - 1.0 / 3.0).abs() < 1e-8);
        }
        let id = ContractionOperator::identity(&s);
        assert_eq!(mean_ergodic_value(&id, &[4.0, -1.0, 2.0], 1e-9, 10).unwrap().value, vec![4.0, -1.0, 2.0]);
        let t = ContractionOperator::convex_combination(
            &s,
            &[0.5, 0.5],
            &[SignedPermutation::identity(3), SignedPermutation::swap(3, 0, 1)],
        )
        .unwrap();
        let v = mean_ergodic_value(&t, &[1.0, 0.0, 5.0], 1e-9, DEFAULT_MAX_ITER).unwrap();
        let expect = [0.5, 0.5, 5.0];
        for (x, e) in v.value.iter().zip(expect) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!(v.fixed_residual < 1e-12);
        assert_eq!(v.path, ErgodicPath::Spectral);
        assert!(v.in_hull);
    }

    #[test]
    fn fixed_space_examples() {
        let s = Space::uniform(3, 3.0).unwrap();
        let r = fixed_space_check(&s, &[SignedPermutation::cyclic_shift(3)], 8, 1).unwrap();
        assert_eq!((r.fixed_dim, r.complement_dim, r.group_order), (1, 2, 3));
        assert!(r.complement.contains(&[1.0, -1.0, 0.0], 1e-12).unwrap());
        assert!(r.direct_sum && r.kernel_is_preannihilator && r.complement_is_duality_annihilator);

        let r = fixed_space_check(&s, &[SignedPermutation::negation(3)], 8, 1).unwrap();
        assert_eq!((r.fixed_dim, r.complement_dim), (0, 3));

        let y = Subspace::from_vectors(&s, &[s.ones(), vec![1.0, 1.0, 2.0]], 1e-9).unwrap();
        let st = isometry::stabilizer(&s, &y, 1e-9).unwrap();
        let r = fixed_space_check(&s, &st, 16, 7).unwrap();
        assert!(r.fixed_space.equal(&y, 1e-9).unwrap());
        assert!(r.duality_residual < 1e-12);
        assert!(r.fixed_invariant && r.complement_invariant && r.duality_spans_adjoint_fix);
        assert!(matches!(fixed_space_check(&Space::uniform(3, 1.0).unwrap(), &st, 4, 1), Err(Error::NotStrictlyConvex(_))));
    }
}
