//! The ambient space ℓ_p^n(μ): a finite set of atoms carrying strictly
//! positive weights, with the weighted p-norm, the weighted dual pairing,
//! the duality map and Mazur maps between exponents.
//!
//! Vectors are plain `[f64]` slices read as functions on the atoms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which two weights count as equal.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A weighted discrete measure space with exponent `p`.
///
/// `p` may be `f64::INFINITY`; the envelope machinery rejects that case
/// but norms are still defined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct Space {
    p: f64,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Finite(f64),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct SpaceRepr {
    n: usize,
    p: Exponent,
    weights: Vec<f64>,
}

impl TryFrom<SpaceRepr> for Space {
    type Error = Error;

    fn try_from(r: SpaceRepr) -> Result<Self> {
        let p = match r.p {
            Exponent::Finite(p) => p,
            Exponent::Named(s) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
            Exponent::Named(s) => return Err(Error::Parse(format!("bad exponent {s:?}"))),
        };
        Error::check_dim(r.n, r.weights.len())?;
        Space::new(p, r.weights)
    }
}

impl From<Space> for SpaceRepr {
    fn from(s: Space) -> Self {
        let p = if s.p.is_infinite() {
            Exponent::Named("inf".into())
        } else {
            Exponent::Finite(s.p)
        };
        SpaceRepr { n: s.weights.len(), p, weights: s.weights }
    }
}

impl Space {
    pub fn new(p: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("a space needs at least one atom".into()));
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("exponent p = {p} is below 1")));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Domain(format!("weight {w} is not strictly positive")));
        }
        Ok(Space { p, weights })
    }

    /// `n` atoms of weight one.
    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        Space::new(p, vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same atoms and weights, exponent replaced.
    pub fn with_exponent(&self, p: f64) -> Result<Self> {
        Space::new(p, self.weights.clone())
    }

    /// The dual space ℓ_{p′}^n(μ) under the weighted pairing.
    pub fn dual(&self) -> Result<Self> {
        self.with_exponent(dual_exponent(self.p)?)
    }

    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0
    }

    pub fn ones(&self) -> Vec<f64> {
        vec![1.0; self.n()]
    }

    pub(crate) fn check(&self, f: &[f64]) -> Result<()> {
        Error::check_dim(self.n(), f.len())
    }

    pub(crate) fn require_finite_p(&self) -> Result<()> {
        if self.p.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("envelope machinery requires p < ∞".into()))
        }
    }

    /// True when atoms `i` and `j` carry the same weight.
    pub fn same_weight(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.weights[i], self.weights[j]);
        (a - b).abs() <= WEIGHT_TOL * a.max(b)
    }

    /// Weighted p-norm; the max norm when `p` is infinite.
    pub fn norm(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        Ok(self.norm_unchecked(f))
    }

    pub(crate) fn norm_unchecked(&self, f: &[f64]) -> f64 {
        weighted_norm(&self.weights, self.p, f)
    }

    /// ⟨g, f⟩_μ = Σ μ_i g_i f_i.
    pub fn pairing(&self, g: &[f64], f: &[f64]) -> Result<f64> {
        self.check(g)?;
        self.check(f)?;
        Ok(self.weights.iter().zip(g).zip(f).map(|((m, a), b)| m * a * b).sum())
    }

    /// The duality map J, positively homogeneous of degree one:
    /// ‖Jf‖_{p′} = ‖f‖_p and ⟨Jf, f⟩_μ = ‖f‖_p².
    pub fn duality_map(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        let p = self.p;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::NotStrictlyConvex(p));
        }
        let nf = self.norm_unchecked(f);
        if nf == 0.0 {
            return Ok(vec![0.0; f.len()]);
        }
        let scale = nf.powf(2.0 - p);
        Ok(f.iter().map(|&x| scale * signed_pow(x, p - 1.0)).collect())
    }

    /// Mazur map from this space to exponent `target_p` on the same atoms:
    /// on the unit sphere `u ↦ sign(u)|u|^{p/q}`, extended with positive
    /// homogeneity of degree one.
    pub fn mazur_map(&self, target_p: f64, f: &[f64]) -> Result<Vec<f64>> {
        self.check(f)?;
        if target_p.is_nan() || target_p < 1.0 || target_p.is_infinite() {
            return Err(Error::Domain(format!("target exponent {target_p} outside [1, ∞)")));
        }
        self.require_finite_p()?;
        if target_p == self.p {
            return Ok(f.to_vec());
        }
        let nf = self.norm_unchecked(f);
        if nf == 0.0 {
            return Ok(vec![0.0; f.len()]);
        }
        let e = self.p / target_p;
        Ok(f.iter().map(|&x| nf * signed_pow(x / nf, e)).collect())
    }
}

/// sign(x)|x|^e, with 0 ↦ 0.
pub(crate) fn signed_pow(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(e)
    }
}

pub(crate) fn weighted_norm(weights: &[f64], p: f64, f: &[f64]) -> f64 {
    if p.is_infinite() {
        return f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    }
    if p == 1.0 {
        return weights.iter().zip(f).map(|(m, x)| m * x.abs()).sum();
    }
    if p == 2.0 {
        return weights.iter().zip(f).map(|(m, x)| m * x * x).sum::<f64>().sqrt();
    }
    // rescale by the max entry so |x|^p neither overflows nor underflows
    let scale = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let s: f64 = weights.iter().zip(f).map(|(m, x)| m * (x.abs() / scale).powf(p)).sum();
    scale * s.powf(1.0 / p)
}

/// Conjugate exponent p′ = p/(p−1), with 1 ↔ ∞.
pub fn dual_exponent(p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("exponent p = {p} is below 1")));
    }
    Ok(if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    })
}
