//! Minimal-norm projections onto a subspace and 1-complementation tests.

use microlp::ComparisonOp;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::lp;
use super::opnorm::{interpolation_bound, DEFAULT_SEED, op_norm, op_norm_with, power_iterate};
use crate::ergodic::serialize_matrix;
use crate::error::{Error, Result};
use crate::lpspace::Space;
use crate::partition::conditional_envelope;
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    /// Reference-orthogonal projection (p = 2).
    Spectral,
    /// Exact linear program over the polyhedral norm (p ∈ {1, ∞}).
    ExactPolyhedral,
    /// Projected subgradient descent with sampled norm evaluation.
    Subgradient,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub seed: u64,
    /// Random starts in addition to the orthogonal and duality projections.
    pub restarts: usize,
    pub iterations: usize,
    /// Starts for the final norm evaluation.
    pub starts: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { seed: DEFAULT_SEED, restarts: 2, iterations: 150, starts: 32 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionSearchResult {
    #[serde(rename = "best_projection", serialize_with = "serialize_matrix")]
    pub projection: DMatrix<f64>,
    /// Norm of `projection`: exact for p ∈ {1, 2, ∞}, a sampled estimate otherwise.
    pub upper_bound: f64,
    /// Proven lower bound on the minimum over all projections.
    pub lower_bound: f64,
    /// Interpolation bound on the norm of `projection`, always rigorous.
    pub certified_upper: f64,
    pub exact: bool,
    pub method: SearchMethod,
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
}

/// Smallest norm of a projection onto `y`, in the space's own exponent.
pub fn min_projection_norm(y: &Subspace, config: &SearchConfig) -> Result<ProjectionSearchResult> {
    let space = y.space();
    let (n, d) = (space.n(), y.dim());
    if d == 0 || d == n {
        return Err(Error::DegenerateRange { dim: d, n });
    }
    let p = space.p();
    if p == 2.0 {
        let proj = y.orthogonal_projection();
        let v = op_norm(space, &proj, 2.0)?.value;
        return Ok(ProjectionSearchResult {
            certified_upper: v,
            projection: proj,
            upper_bound: v,
            lower_bound: 1.0,
            exact: true,
            method: SearchMethod::Spectral,
            iterations: 0,
            restarts: 0,
            seed: config.seed,
        });
    }
    if p == 1.0 || p.is_infinite() {
        return polyhedral(y, config.seed);
    }
    subgradient(y, config)
}

/// min s over P = B C with C B = I and ‖P‖ ≤ s, with |P_ij| ≤ T_ij.
fn polyhedral(y: &Subspace, seed: u64) -> Result<ProjectionSearchResult> {
    let space = y.space();
    let (n, d) = (space.n(), y.dim());
    let w = space.weights();
    let b = y.basis_matrix();
    let l1 = space.p() == 1.0;
    let mut prob = lp::minimize();
    let c: Vec<Vec<_>> = (0..d).map(|_| (0..n).map(|_| prob.add_var(0.0, lp::FREE)).collect()).collect();
    let t: Vec<Vec<_>> = (0..n).map(|_| (0..n).map(|_| prob.add_var(0.0, lp::NONNEG)).collect()).collect();
    let s = prob.add_var(1.0, lp::NONNEG);
    for (a, ca) in c.iter().enumerate() {
        for k in 0..d {
            let expr: Vec<_> = (0..n).map(|j| (ca[j], b[(j, k)])).collect();
            prob.add_constraint(expr, ComparisonOp::Eq, if a == k { 1.0 } else { 0.0 });
        }
    }
    for i in 0..n {
        for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut expr: Vec<_> = (0..d).map(|a| (c[a][j], sign * b[(i, a)])).collect();
                expr.push((t[i][j], -1.0));
                prob.add_constraint(expr, ComparisonOp::Le, 0.0);
            }
        }
    }
    for k in 0..n {
        let mut expr: Vec<_> = if l1 {
            (0..n).map(|i| (t[i][k], w[i] / w[k])).collect()
        } else {
            (0..n).map(|j| (t[k][j], 1.0)).collect()
        };
        expr.push((s, -1.0));
        prob.add_constraint(expr, ComparisonOp::Le, 0.0);
    }
    let sol = lp::solve(&prob)?;
    let cm = DMatrix::from_fn(d, n, |a, j| sol.var_value(c[a][j]));
    let proj = &b * cm;
    let value = op_norm(space, &proj, space.p())?.value;
    Ok(ProjectionSearchResult {
        projection: proj,
        upper_bound: value,
        lower_bound: sol.objective().min(value).max(1.0),
        certified_upper: value,
        exact: true,
        method: SearchMethod::ExactPolyhedral,
        iterations: 0,
        restarts: 0,
        seed,
    })
}

/// Directions kept between norm evaluations so the sampled maximum tracks
/// the moving operator.
struct DirectionPool {
    dirs: Vec<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl DirectionPool {
    const SIZE: usize = 12;

    fn evaluate(&mut self, space: &Space, p: &DMatrix<f64>) -> Result<(f64, Vec<f64>)> {
        let n = space.n();
        let mut cands = self.dirs.clone();
        for _ in 0..2 {
            cands.push((0..n).map(|_| StandardNormal.sample(&mut self.rng)).collect());
        }
        let mut best = (0.0, space.ones());
        for x0 in cands {
            let (v, x) = power_iterate(space, p, x0, 25)?;
            if v > best.0 {
                best = (v, x);
            }
        }
        self.dirs.push(best.1.clone());
        if self.dirs.len() > Self::SIZE {
            self.dirs.remove(0);
        }
        Ok(best)
    }
}

/// Projection B (ΦᵀDB)⁻¹ ΦᵀD whose kernel annihilates Φ = span J(Y).
fn duality_start(y: &Subspace, rng: &mut ChaCha8Rng) -> Result<Option<DMatrix<f64>>> {
    let space = y.space();
    let (n, d) = (space.n(), y.dim());
    let w = space.weights();
    let b = y.basis_matrix();
    let m = 4 * d + 4;
    let mut imgs = DMatrix::zeros(n, m);
    for k in 0..m {
        let c = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let v = &b * c;
        let jv = space.duality_map(v.as_slice())?;
        for i in 0..n {
            imgs[(i, k)] = jv[i] * w[i].sqrt();
        }
    }
    let u = crate::linalg::svd(&imgs).u;
    let phi = DMatrix::from_fn(n, d, |i, k| u[(i, k)] / w[i].sqrt());
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    let gram = phi.transpose() * &dm * &b;
    Ok(gram.try_inverse().map(|g| g * phi.transpose() * dm))
}

fn subgradient(y: &Subspace, config: &SearchConfig) -> Result<ProjectionSearchResult> {
    let space = y.space();
    let (n, d) = (space.n(), y.dim());
    let p = space.p();
    let w = space.weights();
    let b = y.basis_matrix();
    let dm = DMatrix::from_diagonal(&DVector::from_column_slice(w));
    // G ↦ G (I − B Bᵀ D) keeps C B = I since B is μ-orthonormal
    let tangent = DMatrix::identity(n, n) - &b * b.transpose() * &dm;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let orth = b.transpose() * &dm;

    let mut starts = vec![orth.clone()];
    if let Some(c) = duality_start(y, &mut rng)? {
        starts.push(c);
    }
    for _ in 0..config.restarts {
        let r = DMatrix::from_fn(d, n, |_, _| 0.3 * Distribution::<f64>::sample(&StandardNormal, &mut rng));
        starts.push(&orth + r * &tangent);
    }

    let mut best: Option<(f64, DMatrix<f64>)> = None;
    let mut total = 0;
    for c0 in starts {
        let mut pool = DirectionPool { dirs: Vec::new(), rng: ChaCha8Rng::seed_from_u64(rng.random_seed()) };
        let mut c = c0;
        let mut local: Option<(f64, DMatrix<f64>)> = None;
        for k in 0..config.iterations {
            total += 1;
            let proj = &b * &c;
            let (v, x) = pool.evaluate(space, &proj)?;
            if local.as_ref().is_none_or(|l| v < l.0) {
                local = Some((v, c.clone()));
            }
            if v <= 1.0 + 1e-12 {
                break;
            }
            // ∇_C ‖B C x‖ = Bᵀ g xᵀ with g = μ ⊙ sign(y)|y|^{p−1} / ‖y‖^{p−1}
            let yv = &proj * DVector::from_column_slice(&x);
            let ny = space.norm_unchecked(yv.as_slice());
            let g = DVector::from_fn(n, |i, _| w[i] * yv[i].signum() * (yv[i].abs() / ny).powf(p - 1.0));
            let grad = (b.transpose() * g) * DVector::from_column_slice(&x).transpose() * &tangent;
            let gn = grad.norm();
            if gn == 0.0 {
                break;
            }
            c -= grad * (0.05 / (gn * ((k + 1) as f64).sqrt()));
        }
        if let Some((v, cm)) = local {
            if best.as_ref().is_none_or(|bst| v < bst.0) {
                best = Some((v, cm));
            }
        }
    }
    let (_, cm) = best.expect("at least one start");
    let proj = &b * cm;
    let value = op_norm_with(space, &proj, p, config.starts, config.seed)?.value.max(1.0);
    let certified = interpolation_bound(space, &proj, p)?.max(value);
    Ok(ProjectionSearchResult {
        projection: proj,
        upper_bound: value,
        lower_bound: 1.0,
        certified_upper: certified,
        exact: false,
        method: SearchMethod::Subgradient,
        iterations: total,
        restarts: config.restarts,
        seed: config.seed,
    })
}

trait SeedSource {
    fn random_seed(&mut self) -> u64;
}

impl SeedSource for ChaCha8Rng {
    fn random_seed(&mut self) -> u64 {
        rand::RngCore::next_u64(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplementationVerdict {
    pub min_norm: f64,
    pub min_norm_exact: bool,
    pub by_minimax: bool,
    /// J(Y) is a linear subspace; decisive for 1 < p < ∞.
    pub by_duality: Option<bool>,
    /// Y is the range of the conditional expectation onto its generated
    /// partition; decisive for unital Y.
    pub by_conditional_expectation: Option<bool>,
    pub agree: bool,
}

/// Decides 1-complementation by minimax search and, where they apply, by
/// linearity of J(Y) and by the conditional-expectation form.
pub fn is_one_complemented(y: &Subspace, tol: f64, config: &SearchConfig) -> Result<ComplementationVerdict> {
    let space = y.space();
    let (n, d) = (space.n(), y.dim());
    let p = space.p();
    let (min_norm, exact) = if d == 0 || d == n {
        (if d == 0 { 0.0 } else { 1.0 }, true)
    } else {
        let r = min_projection_norm(y, config)?;
        (r.upper_bound, r.exact)
    };
    let by_minimax = min_norm <= 1.0 + tol;
    let by_duality = if p > 1.0 && p.is_finite() { Some(duality_image_is_linear(y, config.seed)?) } else { None };
    let by_conditional_expectation = if y.is_unital(1e-9) && p != 2.0 {
        Some(conditional_envelope(y, 1e-8)?.equal(y, 1e-8)?)
    } else {
        None
    };
    let agree = by_duality.is_none_or(|v| v == by_minimax) && by_conditional_expectation.is_none_or(|v| v == by_minimax);
    Ok(ComplementationVerdict { min_norm, min_norm_exact: exact, by_minimax, by_duality, by_conditional_expectation, agree })
}

/// True when the duality images of sampled points of Y span a space of
/// dimension dim Y.
pub fn duality_image_is_linear(y: &Subspace, seed: u64) -> Result<bool> {
    let space = y.space();
    let d = y.dim();
    if d <= 1 {
        return Ok(true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = y.basis_matrix();
    let imgs: Vec<Vec<f64>> = (0..10 * d)
        .map(|_| {
            let c = DVector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            space.duality_map((&b * c).as_slice())
        })
        .collect::<Result<_>>()?;
    Ok(Subspace::spanned_by(space, &imgs, 1e-7)?.dim() == d)
}
