//! Operator norms on ℓ_p^n(μ).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lpspace::{dual_exponent, Space};

pub const DEFAULT_STARTS: usize = 32;
pub const DEFAULT_SEED: u64 = 42;
const POWER_ITERS: usize = 200;

#[derive(Debug, Clone, Serialize)]
pub struct OpNorm {
    pub value: f64,
    /// False when `value` is only a lower bound found by power iteration.
    pub exact: bool,
    /// A unit vector attaining (or nearly attaining) `value`.
    pub maximizer: Vec<f64>,
}

/// ‖A‖ on ℓ_p(μ) with the weights of `space` and exponent `p`. Exact for
/// p ∈ {1, 2, ∞}; a seeded multi-start lower bound otherwise.
pub fn op_norm(space: &Space, a: &DMatrix<f64>, p: f64) -> Result<OpNorm> {
    op_norm_with(space, a, p, DEFAULT_STARTS, DEFAULT_SEED)
}

pub fn op_norm_with(space: &Space, a: &DMatrix<f64>, p: f64, starts: usize, seed: u64) -> Result<OpNorm> {
    let n = space.n();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Dimension { expected: n, got: if a.nrows() != n { a.nrows() } else { a.ncols() } });
    }
    let sp = space.with_exponent(p)?;
    let w = sp.weights();
    if p == 1.0 {
        let (j, v) = (0..n)
            .map(|j| (j, (0..n).map(|i| w[i] * a[(i, j)].abs()).sum::<f64>() / w[j]))
            .fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best });
        let mut x = vec![0.0; n];
        x[j] = 1.0 / w[j];
        return Ok(OpNorm { value: v, exact: true, maximizer: x });
    }
    if p.is_infinite() {
        let (i, v) = (0..n)
            .map(|i| (i, (0..n).map(|j| a[(i, j)].abs()).sum::<f64>()))
            .fold((0, 0.0), |best, c| if c.1 > best.1 { c } else { best });
        let x: Vec<f64> = (0..n).map(|j| if a[(i, j)] < 0.0 { -1.0 } else { 1.0 }).collect();
        return Ok(OpNorm { value: v, exact: true, maximizer: x });
    }
    if p == 2.0 {
        let scaled = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * (w[i] / w[j]).sqrt());
        let svd = crate::linalg::svd(&scaled);
        let v = svd.s[0];
        let x: Vec<f64> = (0..n).map(|j| svd.v_t[(0, j)] / w[j].sqrt()).collect();
        return Ok(OpNorm { value: v, exact: true, maximizer: x });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = OpNorm { value: 0.0, exact: false, maximizer: sp.ones() };
    for s in 0..starts.max(1) {
        let x0: Vec<f64> = if s < n {
            let mut e = vec![0.0; n];
            e[s] = 1.0;
            e
        } else if s == n {
            sp.ones()
        } else {
            (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
        };
        let (v, x) = power_iterate(&sp, a, x0, POWER_ITERS)?;
        if v > best.value {
            best = OpNorm { value: v, exact: false, maximizer: x };
        }
    }
    Ok(best)
}

/// Nonlinear power iteration for ‖A‖_{p→p}: x ← J_{p'}(A* J_p(Ax)), with the
/// adjoint taken under the weighted pairing. Returns the best ratio seen and
/// the unit vector attaining it.
pub(crate) fn power_iterate(sp: &Space, a: &DMatrix<f64>, x0: Vec<f64>, iters: usize) -> Result<(f64, Vec<f64>)> {
    let n = sp.n();
    let w = sp.weights();
    let dual = sp.dual()?;
    let mut x = x0;
    let nx = sp.norm_unchecked(&x);
    if nx == 0.0 {
        return Ok((0.0, x));
    }
    x.iter_mut().for_each(|v| *v /= nx);
    let mut best = (0.0, x.clone());
    for _ in 0..iters {
        let y = a * DVector::from_column_slice(&x);
        let ratio = sp.norm_unchecked(y.as_slice());
        if ratio > best.0 * (1.0 + 1e-14) {
            best = (ratio, x.clone());
        } else if ratio > 0.0 {
            break;
        }
        if ratio == 0.0 {
            break;
        }
        let z = sp.duality_map(y.as_slice())?;
        let adj: Vec<f64> = (0..n).map(|j| (0..n).map(|i| a[(i, j)] * w[i] * z[i]).sum::<f64>() / w[j]).collect();
        if dual.norm_unchecked(&adj) == 0.0 {
            break;
        }
        let mut next = dual.duality_map(&adj)?;
        let nn = sp.norm_unchecked(&next);
        next.iter_mut().for_each(|v| *v /= nn);
        x = next;
    }
    Ok(best)
}

/// Certified upper bound on ‖A‖_p by interpolation between the exact norms
/// at the endpoints 1, 2 and ∞ (the entries of A being real).
pub fn interpolation_bound(space: &Space, a: &DMatrix<f64>, p: f64) -> Result<f64> {
    let n1 = op_norm(space, a, 1.0)?.value;
    let n2 = op_norm(space, a, 2.0)?.value;
    let ninf = op_norm(space, a, f64::INFINITY)?.value;
    if p == 1.0 {
        return Ok(n1);
    }
    if p.is_infinite() {
        return Ok(ninf);
    }
    dual_exponent(p)?;
    let t = 1.0 / p;
    let ends = n1.powf(t) * ninf.powf(1.0 - t);
    // 1/p = θ/a + (1-θ)/2 with a = 1 or ∞
    let mid = if p <= 2.0 {
        let theta = 2.0 * t - 1.0;
        n1.powf(theta) * n2.powf(1.0 - theta)
    } else {
        let theta = 1.0 - 2.0 * t;
        ninf.powf(theta) * n2.powf(1.0 - theta)
    };
    Ok(ends.min(mid))
}
