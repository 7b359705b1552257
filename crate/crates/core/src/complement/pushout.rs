//! Gluing two copies of X along a subspace: W = (X ⊕₁ X) / {(y, −y) : y ∈ Y}.
//!
//! Classes are represented by their reference-orthogonal projection onto
//! the complement of the kernel, so W carries fixed coordinates of
//! dimension 2n − dim Y.

use microlp::{ComparisonOp, Problem, Variable};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::lp;
use super::projection::{min_projection_norm, SearchConfig};
use crate::error::{Error, Result};
use crate::linalg;
use crate::lpspace::Space;
use crate::subspace::{Subspace, DEFAULT_TOL};

const MAX_SIGN_ATOMS: usize = 10;

#[derive(Debug, Clone)]
pub struct QuotientSpace {
    space: Space,
    glued: Subspace,
    /// 2n × m, orthonormal for the weights (μ, μ); columns span D^⊥.
    rep: DMatrix<f64>,
}

/// Affine row `constant + Σ coeff · var` of an LP.
type AffineRow = (f64, Vec<(Variable, f64)>);

/// Bounds ‖rows‖ (weighted ℓ₁ or ℓ_∞) by auxiliary variables; returns the
/// terms whose sum dominates the norm.
fn norm_terms(prob: &mut Problem, rows: &[AffineRow], weights: &[f64], l1: bool) -> Vec<(Variable, f64)> {
    let shared = if l1 { None } else { Some(prob.add_var(0.0, lp::NONNEG)) };
    let mut terms = Vec::new();
    for (i, (c0, expr)) in rows.iter().enumerate() {
        let t = shared.unwrap_or_else(|| prob.add_var(0.0, lp::NONNEG));
        for sign in [1.0, -1.0] {
            let mut e: Vec<_> = expr.iter().map(|(v, a)| (*v, sign * a)).collect();
            e.push((t, -1.0));
            prob.add_constraint(e, ComparisonOp::Le, -sign * c0);
        }
        if l1 {
            terms.push((t, weights[i]));
        }
    }
    if let Some(t) = shared {
        terms.push((t, 1.0));
    }
    terms
}

impl QuotientSpace {
    pub fn new(space: &Space, glued: &Subspace) -> Result<Self> {
        let (n, d) = (space.n(), glued.dim());
        if glued.space() != space {
            return Err(Error::Domain("subspace lives in a different space".into()));
        }
        if d == n {
            return Err(Error::DegenerateRange { dim: d, n });
        }
        let w = space.weights();
        // kernel basis (y, −y)/√2 is orthonormal for (μ, μ); complete it
        let mut k = DMatrix::zeros(d, 2 * n);
        for (a, b) in glued.basis().iter().enumerate() {
            for i in 0..n {
                k[(a, i)] = b[i] * w[i].sqrt();
                k[(a, n + i)] = -b[i] * w[i].sqrt();
            }
        }
        let comp = if d == 0 { DMatrix::identity(2 * n, 2 * n) } else { linalg::null_space(&k, 1e-10) };
        if comp.ncols() != 2 * n - d {
            return Err(Error::Solver("kernel complement has the wrong dimension".into()));
        }
        let rep = DMatrix::from_fn(2 * n, comp.ncols(), |r, c| comp[(r, c)] / w[r % n].sqrt());
        Ok(QuotientSpace { space: space.clone(), glued: glued.clone(), rep })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn glued(&self) -> &Subspace {
        &self.glued
    }

    /// Dimension of W.
    pub fn dim(&self) -> usize {
        self.rep.ncols()
    }

    pub fn representatives(&self) -> &DMatrix<f64> {
        &self.rep
    }

    fn parent_norm(&self, x: &[f64]) -> f64 {
        let n = self.space.n();
        self.space.norm_unchecked(&x[..n]) + self.space.norm_unchecked(&x[n..])
    }

    /// Coordinates of the class of a parent vector.
    pub fn class_of(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.space.n();
        Error::check_dim(2 * n, x.len())?;
        let w = self.space.weights();
        Ok((0..self.dim()).map(|c| (0..2 * n).map(|r| self.rep[(r, c)] * w[r % n] * x[r]).sum()).collect())
    }

    pub fn lift(&self, coords: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.dim(), coords.len())?;
        Ok((&self.rep * DVector::from_column_slice(coords)).iter().cloned().collect())
    }

    /// Matrix of x ↦ [(x, 0)] (or [(0, x)] for `second`).
    pub fn copy_embedding(&self, second: bool) -> DMatrix<f64> {
        let n = self.space.n();
        let w = self.space.weights();
        let off = if second { n } else { 0 };
        DMatrix::from_fn(self.dim(), n, |c, j| self.rep[(off + j, c)] * w[j])
    }

    /// inf over y ∈ Y of ‖x₁ + y‖ + ‖x₂ − y‖.
    pub fn parent_quotient_norm(&self, x: &[f64]) -> Result<f64> {
        let n = self.space.n();
        Error::check_dim(2 * n, x.len())?;
        let p = self.space.p();
        let d = self.glued.dim();
        if d == 0 {
            return Ok(self.parent_norm(x));
        }
        if p == 1.0 || p.is_infinite() {
            let mut prob = lp::minimize();
            let c: Vec<Variable> = (0..d).map(|_| prob.add_var(0.0, lp::FREE)).collect();
            let rows = self.glued_rows(&c, x);
            let l1 = p == 1.0;
            let w = self.space.weights();
            let mut terms = norm_terms(&mut prob, &rows[..n], w, l1);
            terms.extend(norm_terms(&mut prob, &rows[n..], w, l1));
            let s = prob.add_var(1.0, lp::FREE);
            terms.push((s, -1.0));
            prob.add_constraint(terms, ComparisonOp::Le, 0.0);
            let sol = lp::solve(&prob)?;
            return Ok(sol.objective().max(0.0));
        }
        Ok(self.descend(x))
    }

    fn glued_rows(&self, c: &[Variable], x: &[f64]) -> Vec<AffineRow> {
        let n = self.space.n();
        let basis = self.glued.basis();
        (0..2 * n)
            .map(|r| {
                let sign = if r < n { 1.0 } else { -1.0 };
                (x[r], c.iter().zip(basis).map(|(v, b)| (*v, sign * b[r % n])).collect())
            })
            .collect()
    }

    /// Gradient descent with backtracking on the convex objective.
    fn descend(&self, x: &[f64]) -> f64 {
        let n = self.space.n();
        let p = self.space.p();
        let w = self.space.weights();
        let basis = self.glued.basis();
        let eval = |c: &[f64]| -> (f64, Vec<f64>, Vec<f64>) {
            let mut u = x[..n].to_vec();
            let mut v = x[n..].to_vec();
            for (ck, b) in c.iter().zip(basis) {
                for i in 0..n {
                    u[i] += ck * b[i];
                    v[i] -= ck * b[i];
                }
            }
            let f = self.space.norm_unchecked(&u) + self.space.norm_unchecked(&v);
            (f, u, v)
        };
        let grad_of = |u: &[f64], v: &[f64]| -> Vec<f64> {
            let nu = self.space.norm_unchecked(u);
            let nv = self.space.norm_unchecked(v);
            let g = |z: &[f64], nz: f64| -> Vec<f64> {
                if nz == 0.0 {
                    return vec![0.0; n];
                }
                (0..n).map(|i| w[i] * z[i].signum() * (z[i].abs() / nz).powf(p - 1.0)).collect()
            };
            let (gu, gv) = (g(u, nu), g(v, nv));
            basis.iter().map(|b| (0..n).map(|i| b[i] * (gu[i] - gv[i])).sum()).collect()
        };
        let mut c = vec![0.0; basis.len()];
        let (mut f, mut u, mut v) = eval(&c);
        let mut step = 1.0;
        for _ in 0..2000 {
            let g = grad_of(&u, &v);
            let gn2: f64 = g.iter().map(|a| a * a).sum();
            if gn2 < 1e-30 {
                break;
            }
            let mut improved = false;
            while step > 1e-16 {
                let trial: Vec<f64> = c.iter().zip(&g).map(|(a, b)| a - step * b).collect();
                let (ft, ut, vt) = eval(&trial);
                if ft <= f - 1e-4 * step * gn2 {
                    if f - ft < 1e-16 * f.max(1.0) {
                        f = ft;
                        c = trial;
                        step = 0.0;
                        break;
                    }
                    c = trial;
                    f = ft;
                    u = ut;
                    v = vt;
                    step *= 2.0;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        f
    }

    /// Quotient norm of a point given in W coordinates.
    pub fn norm(&self, coords: &[f64]) -> Result<f64> {
        self.parent_quotient_norm(&self.lift(coords)?)
    }

    /// Extreme points of the parent unit ball (p ∈ {1, ∞}); their classes
    /// generate the unit ball of W.
    pub fn extreme_points(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.space.n();
        let p = self.space.p();
        let w = self.space.weights();
        let mut pts = Vec::new();
        let half: Vec<Vec<f64>> = if p == 1.0 {
            (0..n)
                .flat_map(|j| {
                    [1.0, -1.0].map(|s| {
                        let mut e = vec![0.0; n];
                        e[j] = s / w[j];
                        e
                    })
                })
                .collect()
        } else if p.is_infinite() {
            if n > MAX_SIGN_ATOMS {
                return Err(Error::TooLarge { what: "sign vectors", size: n, cap: MAX_SIGN_ATOMS });
            }
            (0..1usize << n).map(|m| (0..n).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect()).collect()
        } else {
            return Err(Error::Domain(format!("unit ball of ℓ_{p} is not a polytope")));
        };
        for h in &half {
            let mut a = h.clone();
            a.extend(vec![0.0; n]);
            let mut b = vec![0.0; n];
            b.extend(h.iter().cloned());
            pts.push(a);
            pts.push(b);
        }
        Ok(pts)
    }

    /// Norm of an operator on W given in coordinates: exact over extreme
    /// points for p ∈ {1, ∞}, a sampled lower bound otherwise.
    pub fn operator_norm(&self, l: &DMatrix<f64>, seed: u64) -> Result<(f64, bool)> {
        let m = self.dim();
        Error::check_dim(m, l.nrows())?;
        Error::check_dim(m, l.ncols())?;
        let p = self.space.p();
        if p == 1.0 || p.is_infinite() {
            let mut best: f64 = 0.0;
            for e in self.extreme_points()? {
                let w = l * DVector::from_vec(self.class_of(&e)?);
                best = best.max(self.norm(w.as_slice())?);
            }
            return Ok((best, true));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        for _ in 0..128 {
            let x: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let nx = self.norm(&x)?;
            if nx > 0.0 {
                let y = l * DVector::from_column_slice(&x);
                best = best.max(self.norm(y.as_slice())? / nx);
            }
        }
        Ok((best, false))
    }

    /// Projection [(x₁, x₂)] ↦ [(x₁ + x₂, 0)] onto the first copy (or the second).
    pub fn copy_projection(&self, second: bool) -> DMatrix<f64> {
        let n = self.space.n();
        let m = self.dim();
        let emb = self.copy_embedding(second);
        let fold = DMatrix::from_fn(n, m, |i, c| self.rep[(i, c)] + self.rep[(n + i, c)]);
        emb * fold
    }

    /// Minimal norm of a projection of W onto the span of the columns of
    /// `target` (W coordinates), by one linear program (p ∈ {1, ∞}).
    pub fn relative_projection_constant(&self, target: &DMatrix<f64>) -> Result<f64> {
        let p = self.space.p();
        if !(p == 1.0 || p.is_infinite()) {
            return Err(Error::Domain("exact projection constants in W need p ∈ {1, ∞}".into()));
        }
        let m = self.dim();
        let k = target.ncols();
        Error::check_dim(m, target.nrows())?;
        let n = self.space.n();
        let d = self.glued.dim();
        let l1 = p == 1.0;
        let w = self.space.weights();
        let rv = &self.rep * target;
        let mut prob = lp::minimize();
        let c: Vec<Vec<Variable>> = (0..k).map(|_| (0..m).map(|_| prob.add_var(0.0, lp::FREE)).collect()).collect();
        let s = prob.add_var(1.0, lp::NONNEG);
        // C V = I
        for (a, ca) in c.iter().enumerate() {
            for b in 0..k {
                let expr: Vec<_> = (0..m).map(|j| (ca[j], target[(j, b)])).collect();
                prob.add_constraint(expr, ComparisonOp::Eq, if a == b { 1.0 } else { 0.0 });
            }
        }
        for e in self.extreme_points()? {
            let we = self.class_of(&e)?;
            let shift: Vec<Variable> = (0..d).map(|_| prob.add_var(0.0, lp::FREE)).collect();
            let rows: Vec<AffineRow> = (0..2 * n)
                .map(|r| {
                    let mut expr: Vec<(Variable, f64)> = Vec::with_capacity(k * m + d);
                    for a in 0..k {
                        for j in 0..m {
                            expr.push((c[a][j], rv[(r, a)] * we[j]));
                        }
                    }
                    let sign = if r < n { 1.0 } else { -1.0 };
                    for (v, b) in shift.iter().zip(self.glued.basis()) {
                        expr.push((*v, sign * b[r % n]));
                    }
                    (0.0, expr)
                })
                .collect();
            let mut terms = norm_terms(&mut prob, &rows[..n], w, l1);
            terms.extend(norm_terms(&mut prob, &rows[n..], w, l1));
            terms.push((s, -1.0));
            prob.add_constraint(terms, ComparisonOp::Le, 0.0);
        }
        Ok(lp::solve(&prob)?.objective())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PushoutReport {
    pub n: usize,
    pub p: f64,
    pub glued_dim: usize,
    pub quotient_dim: usize,
    pub glued_basis: Vec<Vec<f64>>,
    /// λ(Y, X).
    pub lambda_in_x: Option<f64>,
    /// λ(𝒴, W) for the diagonal image 𝒴.
    pub lambda_in_w: Option<f64>,
    pub copy_projection_norms: [f64; 2],
    pub copy_norms_exact: bool,
    pub copies_one_complemented: bool,
    pub max_embedding_defect: f64,
    pub max_kernel_norm: f64,
    pub copies_meet_in_diagonal: bool,
}

/// Builds W for `y` and runs every check on it.
pub fn pushout(space: &Space, y: &Subspace, seed: u64) -> Result<(QuotientSpace, PushoutReport)> {
    let (n, d) = (space.n(), y.dim());
    if d == n {
        return Err(Error::DegenerateRange { dim: d, n });
    }
    let q = QuotientSpace::new(space, y)?;
    let m = q.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let e1 = q.copy_embedding(false);
    let e2 = q.copy_embedding(true);
    let mut defect: f64 = 0.0;
    let mut samples: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();
    samples.extend((0..16).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()));
    for x in &samples {
        let nx = space.norm_unchecked(x);
        for emb in [&e1, &e2] {
            let img = emb * DVector::from_column_slice(x);
            defect = defect.max((q.norm(img.as_slice())? - nx).abs() / nx);
        }
    }

    let mut kernel_norm: f64 = 0.0;
    for b in y.basis() {
        let mut x = b.clone();
        x.extend(b.iter().map(|v| -v));
        kernel_norm = kernel_norm.max(q.parent_quotient_norm(&x)?);
    }

    let q1 = q.copy_projection(false);
    let q2 = q.copy_projection(true);
    let (n1, exact1) = q.operator_norm(&q1, seed)?;
    let (n2, exact2) = q.operator_norm(&q2, seed)?;
    let copies_one_complemented = n1 <= 1.0 + 1e-6
        && n2 <= 1.0 + 1e-6
        && (&q1 * &q1 - &q1).norm() < 1e-9
        && (&q2 * &q2 - &q2).norm() < 1e-9;

    let wspace = Space::uniform(m, 2.0)?;
    let cols = |mat: &DMatrix<f64>| -> Vec<Vec<f64>> { mat.column_iter().map(|c| c.iter().cloned().collect()).collect() };
    let copy1 = Subspace::spanned_by(&wspace, &cols(&e1), DEFAULT_TOL)?;
    let copy2 = Subspace::spanned_by(&wspace, &cols(&e2), DEFAULT_TOL)?;
    let bm = y.basis_matrix();
    let diag = &e1 * &bm;
    let diag_sub = Subspace::spanned_by(&wspace, &cols(&diag), DEFAULT_TOL)?;
    let copies_meet_in_diagonal = copy1.intersect(&copy2)?.equal(&diag_sub, 1e-8)?
        && (&diag - &e2 * &bm).norm() < 1e-9;

    let p = space.p();
    let polyhedral = p == 1.0 || p.is_infinite();
    let lambda_in_x = if d > 0 && polyhedral { Some(min_projection_norm(y, &SearchConfig { seed, ..Default::default() })?.upper_bound) } else { None };
    let lambda_in_w = if d > 0 && polyhedral { Some(q.relative_projection_constant(&diag)?) } else { None };

    let report = PushoutReport {
        n,
        p,
        glued_dim: d,
        quotient_dim: m,
        glued_basis: y.basis().to_vec(),
        lambda_in_x,
        lambda_in_w,
        copy_projection_norms: [n1, n2],
        copy_norms_exact: exact1 && exact2,
        copies_one_complemented,
        max_embedding_defect: defect,
        max_kernel_norm: kernel_norm,
        copies_meet_in_diagonal,
    };
    Ok((q, report))
}

#[derive(Debug, Clone, Serialize)]
pub struct PushoutScreen {
    pub report: PushoutReport,
    pub candidates_tried: usize,
    /// The search moved past n = 3.
    pub escalated: bool,
}

/// Screens random integer 2-dimensional subspaces of uniform ℓ₁ⁿ for
/// λ(Y, X) ≥ `threshold`, starting at n = 3 and escalating to n = 4, then
/// builds the pushout for the first hit.
pub fn screen_pushout(seed: u64, per_dimension: usize, threshold: f64) -> Result<PushoutScreen> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tried = 0;
    for n in 3..=4 {
        let space = Space::uniform(n, 1.0)?;
        for _ in 0..per_dimension {
            let gens: Vec<Vec<f64>> = (0..2).map(|_| (0..n).map(|_| rng.random_range(-3..=3) as f64).collect()).collect();
            let y = Subspace::spanned_by(&space, &gens, DEFAULT_TOL)?;
            if y.dim() != 2 {
                continue;
            }
            tried += 1;
            let lambda = min_projection_norm(&y, &SearchConfig { seed, ..Default::default() })?.upper_bound;
            if lambda >= threshold {
                let (_, report) = pushout(&space, &y, seed)?;
                return Ok(PushoutScreen { report, candidates_tried: tried, escalated: n > 3 });
            }
        }
    }
    Err(Error::Domain(format!("no candidate reached λ ≥ {threshold} among {tried}")))
}
