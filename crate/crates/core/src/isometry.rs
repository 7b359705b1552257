//! Weight-compatible signed permutations of ℓ_p^n(μ), p ≠ 2: the group
//! action, enumeration, stabilizers, fixed spaces, the algebraic and
//! isometric envelopes, and extension of partial isometries.
//!
//! An element acts by `(g f)_i = ε_i f_{σ⁻¹(i)}` and is required to satisfy
//! `μ_{σ(i)} = μ_i`, which makes it an isometry for every exponent.

use std::collections::{HashSet, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lpspace::Space;
use crate::partition::Partition;
use crate::subspace::{Subspace, DEFAULT_TOL};

/// Largest atom count for which the group is enumerated.
pub const DEFAULT_GROUP_CAP: usize = 8;

/// Largest group order produced by [`group_closure`] unless overridden.
pub const DEFAULT_ORDER_CAP: usize = 10_000;

/// Recorded with every discrete envelope: the discrete group only permutes
/// atoms of equal weight.
pub const DISCRETE_CAVEAT: &str = "discrete isometry group: weight-compatible signed permutations only; \
envelopes can be strictly larger than their continuum counterparts when weights differ";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct SignedPermutationFile {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl Serialize for SignedPermutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SignedPermutationFile {
            perm: self.perm.iter().map(|i| i + 1).collect(),
            signs: self.signs.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SignedPermutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SignedPermutationFile::deserialize(d)?;
        if f.perm.contains(&0) {
            return Err(serde::de::Error::custom("perm entries are 1-based"));
        }
        SignedPermutation::new(f.perm.into_iter().map(|i| i - 1).collect(), f.signs)
            .map_err(serde::de::Error::custom)
    }
}

impl SignedPermutation {
    /// `perm[i]` is the image σ(i); `signs[i]` is ε_i.
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        Error::check_dim(perm.len(), signs.len())?;
        let mut seen = vec![false; perm.len()];
        for &i in &perm {
            if i >= perm.len() || seen[i] {
                return Err(Error::Domain(format!("{perm:?} is not a permutation")));
            }
            seen[i] = true;
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Domain("signs must be ±1".into()));
        }
        Ok(SignedPermutation { perm, signs })
    }

    pub fn identity(n: usize) -> Self {
        SignedPermutation { perm: (0..n).collect(), signs: vec![1; n] }
    }

    pub fn negation(n: usize) -> Self {
        SignedPermutation { perm: (0..n).collect(), signs: vec![-1; n] }
    }

    pub fn swap(n: usize, i: usize, j: usize) -> Self {
        let mut g = Self::identity(n);
        g.perm.swap(i, j);
        g
    }

    pub fn flip(n: usize, i: usize) -> Self {
        let mut g = Self::identity(n);
        g.signs[i] = -1;
        g
    }

    /// σ(i) = i + 1 mod n.
    pub fn cyclic_shift(n: usize) -> Self {
        SignedPermutation { perm: (0..n).map(|i| (i + 1) % n).collect(), signs: vec![1; n] }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &s)| i == s) && self.signs.iter().all(|&s| s == 1)
    }

    fn inverse_perm(&self) -> Vec<usize> {
        let mut inv = vec![0; self.n()];
        for (i, &s) in self.perm.iter().enumerate() {
            inv[s] = i;
        }
        inv
    }

    pub fn inverse(&self) -> Self {
        let signs = (0..self.n()).map(|j| self.signs[self.perm[j]]).collect();
        SignedPermutation { perm: self.inverse_perm(), signs }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let inv = self.inverse_perm();
        let perm = other.perm.iter().map(|&k| self.perm[k]).collect();
        let signs = (0..self.n()).map(|i| self.signs[i] * other.signs[inv[i]]).collect();
        SignedPermutation { perm, signs }
    }

    pub fn is_compatible(&self, space: &Space) -> bool {
        self.n() == space.n() && (0..self.n()).all(|i| space.same_weight(i, self.perm[i]))
    }

    pub fn act(&self, f: &[f64]) -> Vec<f64> {
        let inv = self.inverse_perm();
        (0..self.n()).map(|i| self.signs[i] as f64 * f[inv[i]]).collect()
    }

    /// Matrix with `M[i][σ⁻¹(i)] = ε_i`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let i = self.perm[j];
            m[(i, j)] = self.signs[i] as f64;
        }
        m
    }

    /// Partition of the atoms into cycles of σ.
    pub fn cycle_partition(&self) -> Partition {
        let n = self.n();
        let mut labels = vec![usize::MAX; n];
        for s in 0..n {
            let mut i = s;
            while labels[i] == usize::MAX {
                labels[i] = s;
                i = self.perm[i];
            }
        }
        Partition::from_labels(&labels)
    }

    /// Read a signed permutation off a matrix whose entries are 0 or ±1
    /// within `tol`; `None` otherwise.
    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Option<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return None;
        }
        let mut perm = vec![usize::MAX; n];
        let mut signs = vec![0i8; n];
        for i in 0..n {
            for j in 0..n {
                let x = m[(i, j)];
                if (x.abs() - 1.0).abs() <= tol {
                    if perm[j] != usize::MAX || signs[i] != 0 {
                        return None;
                    }
                    perm[j] = i;
                    signs[i] = if x > 0.0 { 1 } else { -1 };
                } else if x.abs() > tol {
                    return None;
                }
            }
        }
        SignedPermutation::new(perm, signs).ok()
    }
}

/// `g f`, after checking that `g` is an isometry of `space`.
pub fn apply(space: &Space, g: &SignedPermutation, f: &[f64]) -> Result<Vec<f64>> {
    space.check(f)?;
    Error::check_dim(space.n(), g.n())?;
    if !g.is_compatible(space) {
        return Err(Error::NotIsometry("permutation moves atoms between different weights".into()));
    }
    Ok(g.act(f))
}

fn check_enumerable(space: &Space, cap: usize) -> Result<()> {
    if space.is_hilbert() {
        return Err(Error::HilbertCase);
    }
    space.require_finite_p()?;
    if space.n() > cap {
        return Err(Error::TooLarge { what: "atom count", size: space.n(), cap });
    }
    Ok(())
}

/// Depth-first search over permutations in lexicographic order of σ.
/// `pair(j, i)` returns the admissible signs for sending atom `j` to `i`
/// (`None` rejects the pair); `visit` receives σ and, per target atom, the
/// admissible sign set.
fn search<P, V>(space: &Space, pair: P, mut visit: V)
where
    P: Fn(usize, usize) -> Option<SignChoice>,
    V: FnMut(&[usize], &[SignChoice]),
{
    let n = space.n();
    let mut perm = vec![0; n];
    let mut choice = vec![SignChoice::Free; n];
    let mut used = vec![false; n];
    fn rec<P, V>(
        j: usize,
        space: &Space,
        pair: &P,
        visit: &mut V,
        perm: &mut [usize],
        choice: &mut [SignChoice],
        used: &mut [bool],
    ) where
        P: Fn(usize, usize) -> Option<SignChoice>,
        V: FnMut(&[usize], &[SignChoice]),
    {
        let n = perm.len();
        if j == n {
            visit(perm, choice);
            return;
        }
        for i in 0..n {
            if used[i] || !space.same_weight(i, j) {
                continue;
            }
            if let Some(c) = pair(j, i) {
                used[i] = true;
                perm[j] = i;
                choice[i] = c;
                rec(j + 1, space, pair, visit, perm, choice, used);
                used[i] = false;
            }
        }
    }
    rec(0, space, &pair, &mut visit, &mut perm, &mut choice, &mut used);
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SignChoice {
    Plus,
    Minus,
    Free,
}

fn expand(perm: &[usize], choice: &[SignChoice], out: &mut Vec<SignedPermutation>) {
    let free: Vec<usize> = (0..perm.len()).filter(|&i| choice[i] == SignChoice::Free).collect();
    let base: Vec<i8> = choice.iter().map(|c| if *c == SignChoice::Minus { -1 } else { 1 }).collect();
    for mask in 0u64..(1u64 << free.len()) {
        let mut signs = base.clone();
        for (b, &i) in free.iter().enumerate() {
            if mask >> b & 1 == 1 {
                signs[i] = -1;
            }
        }
        out.push(SignedPermutation { perm: perm.to_vec(), signs });
    }
}

/// Every weight-compatible signed permutation, perms in lexicographic
/// order, then signs (+ before −, first atom slowest).
pub fn enumerate_group(space: &Space) -> Result<Vec<SignedPermutation>> {
    enumerate_group_capped(space, DEFAULT_GROUP_CAP)
}

pub fn enumerate_group_capped(space: &Space, cap: usize) -> Result<Vec<SignedPermutation>> {
    check_enumerable(space, cap)?;
    let mut out = Vec::new();
    search(space, |_, _| Some(SignChoice::Free), |perm, choice| expand_lex(perm, choice, &mut out));
    Ok(out)
}

fn expand_lex(perm: &[usize], choice: &[SignChoice], out: &mut Vec<SignedPermutation>) {
    let start = out.len();
    expand(perm, choice, out);
    // reorder sign masks so the first free atom varies slowest
    out[start..].sort_by(|a, b| {
        a.signs.iter().map(|s| -s).cmp(b.signs.iter().map(|s| -s))
    });
}

/// Column of basis values at each atom.
fn atom_columns(y: &Subspace) -> Vec<Vec<f64>> {
    (0..y.n()).map(|i| y.basis().iter().map(|b| b[i]).collect()).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn pair_rule<'a>(src: &'a [Vec<f64>], dst: &'a [Vec<f64>], tol: f64) -> impl Fn(usize, usize) -> Option<SignChoice> + 'a {
    move |j, i| {
        let (s, d) = (&src[j], &dst[i]);
        if norm2(s) <= tol && norm2(d) <= tol {
            return Some(SignChoice::Free);
        }
        let plus = s.iter().zip(d).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if plus <= tol {
            return Some(SignChoice::Plus);
        }
        let minus = s.iter().zip(d).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        if minus <= tol {
            return Some(SignChoice::Minus);
        }
        None
    }
}

/// All group elements fixing every element of `y` (atom-wise within `tol`).
pub fn stabilizer(space: &Space, y: &Subspace, tol: f64) -> Result<Vec<SignedPermutation>> {
    check_enumerable(space, DEFAULT_GROUP_CAP)?;
    Error::check_dim(space.n(), y.n())?;
    let cols = atom_columns(y);
    let mut out = Vec::new();
    search(space, pair_rule(&cols, &cols, tol), |perm, choice| expand_lex(perm, choice, &mut out));
    Ok(out)
}

/// A generating set of the stabilizer: one element per admissible
/// permutation (free signs set to +) plus the sign flips at atoms where
/// `y` vanishes.
pub fn stabilizer_generators(space: &Space, y: &Subspace, tol: f64) -> Result<Vec<SignedPermutation>> {
    check_enumerable(space, DEFAULT_GROUP_CAP)?;
    Error::check_dim(space.n(), y.n())?;
    let cols = atom_columns(y);
    let mut out = Vec::new();
    search(space, pair_rule(&cols, &cols, tol), |perm, choice| {
        let signs = choice.iter().map(|c| if *c == SignChoice::Minus { -1 } else { 1 }).collect();
        out.push(SignedPermutation { perm: perm.to_vec(), signs });
    });
    let n = space.n();
    out.extend((0..n).filter(|&i| norm2(&cols[i]) <= tol).map(|i| SignedPermutation::flip(n, i)));
    Ok(out)
}

/// Common fixed space ⋂ ker(g − I), by successive intersection.
pub fn fixed_space_of(space: &Space, gens: &[SignedPermutation]) -> Result<Subspace> {
    if gens.is_empty() {
        return Err(Error::Domain("need at least one generator".into()));
    }
    let n = space.n();
    let sw: Vec<f64> = space.weights().iter().map(|m| m.sqrt()).collect();
    let mut fixed = Subspace::whole(space);
    for g in gens {
        Error::check_dim(n, g.n())?;
        if fixed.dim() == 0 {
            break;
        }
        let moved: Vec<Vec<f64>> = fixed
            .basis()
            .iter()
            .map(|b| g.act(b).iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        if moved.iter().all(|d| norm2(d) <= DEFAULT_TOL) {
            continue;
        }
        let m = DMatrix::from_fn(n, fixed.dim(), |i, k| moved[k][i] * sw[i]);
        let ns = linalg::null_space(&m, DEFAULT_TOL);
        let b = fixed.basis_matrix();
        fixed = Subspace::from_columns(space, &(b * ns), DEFAULT_TOL)?;
    }
    Ok(fixed)
}

/// Fix(Stab(Y)); Y itself when p = 2.
pub fn algebraic_envelope(space: &Space, y: &Subspace, tol: f64) -> Result<Subspace> {
    Error::check_dim(space.n(), y.n())?;
    if space.is_hilbert() {
        return Ok(y.clone());
    }
    let gens = stabilizer_generators(space, y, tol)?;
    fixed_space_of(space, &gens)
}

/// The isometric (Korovkin) envelope. The discrete group is finite, hence
/// closed, so it coincides with the algebraic envelope.
#[derive(Debug, Clone, Serialize)]
pub struct IsometricEnvelope {
    pub envelope: Subspace,
    pub equals_algebraic: bool,
    pub note: &'static str,
}

pub fn isometric_envelope(space: &Space, y: &Subspace, tol: f64) -> Result<IsometricEnvelope> {
    let envelope = algebraic_envelope(space, y, tol)?;
    let note = if space.is_hilbert() { "p = 2: every subspace is its own envelope" } else { DISCRETE_CAVEAT };
    Ok(IsometricEnvelope { envelope, equals_algebraic: true, note })
}

/// Outcome of extending a partial isometry defined on span(sources).
#[derive(Debug, Clone, Serialize)]
pub enum Extension {
    /// Exactly one restriction to the envelope; `element` is the first
    /// group element realizing it.
    Unique { element: SignedPermutation, restriction: Vec<Vec<f64>> },
    /// Several group elements with pairwise distinct restrictions.
    Multiple { elements: Vec<SignedPermutation> },
}

/// Group elements agreeing with `sources[k] ↦ images[k]`, grouped by their
/// restriction to the algebraic envelope of span(sources).
pub fn extend_partial_isometry(
    space: &Space,
    sources: &[Vec<f64>],
    images: &[Vec<f64>],
    tol: f64,
) -> Result<Extension> {
    check_enumerable(space, DEFAULT_GROUP_CAP)?;
    Error::check_dim(sources.len(), images.len())?;
    for v in sources.iter().chain(images) {
        space.check(v)?;
    }
    check_partial_isometry(space, sources, images, tol)?;
    let n = space.n();
    let scale = sources.iter().chain(images).map(|v| space.norm_unchecked(v)).fold(1.0, f64::max);
    let src: Vec<Vec<f64>> = (0..n).map(|i| sources.iter().map(|s| s[i]).collect()).collect();
    let dst: Vec<Vec<f64>> = (0..n).map(|i| images.iter().map(|s| s[i]).collect()).collect();
    let mut found = Vec::new();
    search(space, pair_rule(&src, &dst, tol * scale), |perm, choice| {
        let signs = choice.iter().map(|c| if *c == SignChoice::Minus { -1 } else { 1 }).collect();
        found.push(SignedPermutation { perm: perm.to_vec(), signs });
    });
    if found.is_empty() {
        return Err(Error::NotExtendable);
    }
    let y = Subspace::from_vectors(space, sources, DEFAULT_TOL)?;
    let env = algebraic_envelope(space, &y, DEFAULT_TOL)?;
    let basis = env.basis_matrix();
    let mut distinct: Vec<(SignedPermutation, DMatrix<f64>)> = Vec::new();
    for g in found {
        let r = g.matrix() * &basis;
        if !distinct.iter().any(|(_, m)| linalg::frob_diff(m, &r) <= tol) {
            distinct.push((g, r));
        }
    }
    if distinct.len() == 1 {
        let (element, r) = distinct.pop().expect("one element");
        Ok(Extension::Unique { element, restriction: linalg::matrix_rows(&r) })
    } else {
        Ok(Extension::Multiple { elements: distinct.into_iter().map(|(g, _)| g).collect() })
    }
}

/// Checks that `sources[k] ↦ images[k]` defines a linear map on the span of
/// the sources that preserves the p-norm (on the sources and on seeded
/// combinations of them).
fn check_partial_isometry(space: &Space, sources: &[Vec<f64>], images: &[Vec<f64>], tol: f64) -> Result<()> {
    let n = space.n();
    let k = sources.len();
    let s = DMatrix::from_fn(n, k, |i, j| sources[j][i]);
    let t = DMatrix::from_fn(n, k, |i, j| images[j][i]);
    let ns = linalg::null_space(&s, DEFAULT_TOL);
    if ns.ncols() > 0 && (&t * &ns).norm() > tol * t.norm().max(1.0) {
        return Err(Error::NotIsometry("images violate a linear relation among the sources".into()));
    }
    let mut coeffs: Vec<Vec<f64>> = (0..k).map(|j| (0..k).map(|i| (i == j) as u8 as f64).collect()).collect();
    // fixed low-discrepancy combinations keep the check deterministic
    for m in 1..=16u32 {
        coeffs.push((0..k).map(|i| (m as f64 * (i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5).collect());
    }
    for c in coeffs {
        let x = &s * nalgebra::DVector::from_vec(c.clone());
        let y = &t * nalgebra::DVector::from_vec(c);
        let (nx, ny) = (space.norm_unchecked(x.as_slice()), space.norm_unchecked(y.as_slice()));
        if (nx - ny).abs() > tol * nx.max(1.0) {
            return Err(Error::NotIsometry(format!("norm {nx} mapped to {ny}")));
        }
    }
    Ok(())
}

/// The group generated by `gens`, by breadth-first multiplication.
pub fn group_closure(gens: &[SignedPermutation], max_order: usize) -> Result<Vec<SignedPermutation>> {
    let n = gens.first().map(|g| g.n()).ok_or_else(|| Error::Domain("no generators".into()))?;
    for g in gens {
        Error::check_dim(n, g.n())?;
    }
    let id = SignedPermutation::identity(n);
    let mut seen: HashSet<SignedPermutation> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(h) = queue.pop_front() {
        for g in gens {
            let gh = g.compose(&h);
            if seen.insert(gh.clone()) {
                if seen.len() > max_order {
                    return Err(Error::TooLarge { what: "group order", size: seen.len(), cap: max_order });
                }
                order.push(gh.clone());
                queue.push_back(gh);
            }
        }
    }
    Ok(order)
}

/// True when the finite set `h` is closed under composition and inverses.
///
/// Grows a generating subset greedily (each new generator at least doubles
/// the generated group) and compares the generated group with `h`.
pub fn is_group(h: &[SignedPermutation]) -> bool {
    let set: HashSet<&SignedPermutation> = h.iter().collect();
    if set.is_empty() {
        return false;
    }
    let mut gens: Vec<SignedPermutation> = Vec::new();
    let mut generated: HashSet<SignedPermutation> = HashSet::new();
    for g in h {
        if generated.contains(g) {
            continue;
        }
        gens.push(g.clone());
        match group_closure(&gens, set.len()) {
            Ok(els) => generated = els.into_iter().collect(),
            Err(_) => return false,
        }
    }
    generated.len() == set.len() && generated.iter().all(|g| set.contains(g))
}

/// (1/|H|) Σ_{h∈H} h, the contractive projection onto Fix(H).
pub fn group_average_projection(space: &Space, h: &[SignedPermutation]) -> Result<DMatrix<f64>> {
    for g in h {
        Error::check_dim(space.n(), g.n())?;
        if !g.is_compatible(space) {
            return Err(Error::NotIsometry("element moves atoms between different weights".into()));
        }
    }
    if !is_group(h) {
        return Err(Error::NotAGroup("set is not closed under composition and inverses".into()));
    }
    Ok(average(space.n(), h))
}

pub(crate) fn average(n: usize, h: &[SignedPermutation]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for g in h {
        for j in 0..n {
            let i = g.perm[j];
            m[(i, j)] += g.signs[i] as f64;
        }
    }
    m / h.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(s: &Space, g: &[Vec<f64>]) -> Subspace {
        Subspace::from_vectors(s, g, 1e-9).unwrap()
    }

    #[test]
    fn action_examples() {
        let s = Space::uniform(3, 3.0).unwrap();
        let f = [1.0, 2.0, 3.0];
        assert_eq!(apply(&s, &SignedPermutation::identity(3), &f).unwrap(), f.to_vec());
        assert_eq!(apply(&s, &SignedPermutation::swap(3, 0, 1), &f).unwrap(), vec![2.0, 1.0, 3.0]);
        assert_eq!(apply(&s, &SignedPermutation::flip(3, 2), &f).unwrap(), vec![1.0, 2.0, -3.0]);
        let w = Space::new(3.0, vec![1.0, 2.0, 2.0]).unwrap();
        assert!(matches!(apply(&w, &SignedPermutation::swap(3, 0, 1), &f), Err(Error::NotIsometry(_))));
    }

    #[test]
    fn compose_matches_matrices() {
        let g = SignedPermutation::new(vec![2, 0, 1], vec![1, -1, 1]).unwrap();
        let h = SignedPermutation::new(vec![1, 0, 2], vec![-1, 1, -1]).unwrap();
        assert_eq!(g.compose(&h).matrix(), g.matrix() * h.matrix());
        assert!(g.compose(&g.inverse()).is_identity());
        assert_eq!(SignedPermutation::from_matrix(&g.matrix(), 1e-12), Some(g));
    }

    #[test]
    fn group_sizes() {
        let s = Space::uniform(1, 3.0).unwrap();
        let g = enumerate_group(&s).unwrap();
        assert_eq!(g, vec![SignedPermutation::identity(1), SignedPermutation::negation(1)]);
        assert_eq!(enumerate_group(&Space::uniform(2, 3.0).unwrap()).unwrap().len(), 8);
        assert_eq!(enumerate_group(&Space::new(3.0, vec![1.0, 2.0]).unwrap()).unwrap().len(), 4);
        assert!(matches!(enumerate_group(&Space::uniform(9, 3.0).unwrap()), Err(Error::TooLarge { .. })));
        assert!(matches!(enumerate_group(&Space::uniform(3, 2.0).unwrap()), Err(Error::HilbertCase)));
    }

    #[test]
    fn enumeration_order() {
        let g = enumerate_group(&Space::uniform(2, 1.0).unwrap()).unwrap();
        assert_eq!(g[0], SignedPermutation::identity(2));
        assert_eq!(g[1].signs(), &[1, -1]);
        assert_eq!(g[3], SignedPermutation::negation(2));
        assert_eq!(g[4].perm(), &[1, 0]);
        assert!(is_group(&g));
    }

    #[test]
    fn stabilizer_examples() {
        let s = Space::uniform(3, 3.0).unwrap();
        assert_eq!(stabilizer(&s, &Subspace::whole(&s), 1e-9).unwrap(), vec![SignedPermutation::identity(3)]);
        assert_eq!(stabilizer(&s, &Subspace::zero(&s), 1e-9).unwrap().len(), 48);
        let st = stabilizer(&s, &span(&s, &[vec![1.0, 1.0, 0.0]]), 1e-9).unwrap();
        assert_eq!(st.len(), 4);
        let expect = [
            SignedPermutation::identity(3),
            SignedPermutation::flip(3, 2),
            SignedPermutation::swap(3, 0, 1),
            SignedPermutation::swap(3, 0, 1).compose(&SignedPermutation::flip(3, 2)),
        ];
        for e in &expect {
            assert!(st.contains(e), "{e:?} missing");
        }
    }

    #[test]
    fn fixed_space_examples() {
        let s = Space::uniform(3, 3.0).unwrap();
        assert_eq!(fixed_space_of(&s, &[SignedPermutation::identity(3)]).unwrap().dim(), 3);
        assert_eq!(fixed_space_of(&s, &[SignedPermutation::negation(3)]).unwrap().dim(), 0);
        let f = fixed_space_of(&s, &[SignedPermutation::cyclic_shift(3)]).unwrap();
        assert!(f.equal(&span(&s, &[s.ones()]), 1e-9).unwrap());
    }

    #[test]
    fn algebraic_envelope_examples() {
        let h = Space::uniform(3, 2.0).unwrap();
        let y = span(&h, &[vec![1.0, 0.0, 0.0]]);
        assert!(algebraic_envelope(&h, &y, 1e-9).unwrap().equal(&y, 1e-12).unwrap());

        let s = Space::uniform(3, 3.0).unwrap();
        let y = span(&s, &[s.ones(), vec![1.0, 1.0, 2.0]]);
        let env = algebraic_envelope(&s, &y, 1e-9).unwrap();
        assert!(env.equal(&span(&s, &[vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]), 1e-9).unwrap());

        let w = Space::new(3.0, vec![1.0, 2.0, 4.0]).unwrap();
        let y = span(&w, &[w.ones(), vec![1.0, 1.0, 2.0]]);
        assert_eq!(algebraic_envelope(&w, &y, 1e-9).unwrap().dim(), 3);
        assert!(isometric_envelope(&w, &y, 1e-9).unwrap().equals_algebraic);
    }

    #[test]
    fn extension_examples() {
        let s = Space::uniform(3, 3.0).unwrap();
        let src = vec![s.ones(), vec![1.0, 1.0, 2.0]];
        match extend_partial_isometry(&s, &src, &src, 1e-9).unwrap() {
            Extension::Unique { element, .. } => assert!(element.is_identity()),
            other => panic!("{other:?}"),
        }
        let img = vec![s.ones(), vec![2.0, 1.0, 1.0]];
        match extend_partial_isometry(&s, &src, &img, 1e-9).unwrap() {
            Extension::Unique { restriction, .. } => {
                // e₁+e₂ ↦ e₂+e₃ and e₃ ↦ e₁ on the envelope
                let env = algebraic_envelope(&s, &span(&s, &src), 1e-9).unwrap();
                let r = crate::linalg::matrix_from_rows(&restriction).unwrap();
                let rev = SignedPermutation::swap(3, 0, 2).matrix() * env.basis_matrix();
                assert!((r - rev).norm() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weight_obstruction() {
        let w = Space::new(3.0, vec![1.0, 2.0, 1.0]).unwrap();
        let e1 = vec![1.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0];
        let r = extend_partial_isometry(&w, std::slice::from_ref(&e1), &[e2], 1e-9);
        assert!(matches!(r, Err(Error::NotIsometry(_))));
        let scaled = vec![0.0, 0.5_f64.powf(1.0 / 3.0), 0.0];
        let r = extend_partial_isometry(&w, &[e1], &[scaled], 1e-9);
        assert!(matches!(r, Err(Error::NotExtendable)));
    }

    #[test]
    fn averaging_projections() {
        let s = Space::uniform(3, 3.0).unwrap();
        let h = vec![SignedPermutation::identity(3), SignedPermutation::negation(3)];
        assert_eq!(group_average_projection(&s, &h).unwrap(), DMatrix::zeros(3, 3));
        let h = vec![SignedPermutation::identity(3), SignedPermutation::swap(3, 0, 1)];
        let e = Partition::new(3, vec![vec![0, 1], vec![2]]).unwrap().conditional_expectation(&s).unwrap();
        assert!((group_average_projection(&s, &h).unwrap() - &e).norm() < 1e-15);
        let y = span(&s, &[s.ones(), vec![1.0, 1.0, 2.0]]);
        let st = stabilizer(&s, &y, 1e-9).unwrap();
        assert!((group_average_projection(&s, &st).unwrap() - e).norm() < 1e-15);
        let bad = vec![SignedPermutation::swap(3, 0, 1)];
        assert!(matches!(group_average_projection(&s, &bad), Err(Error::NotAGroup(_))));
    }

    #[test]
    fn json_form() {
        let g = SignedPermutation::new(vec![1, 0, 2], vec![1, 1, -1]).unwrap();
        let js = serde_json::to_string(&g).unwrap();
        assert_eq!(js, r#"{"perm":[2,1,3],"signs":[1,1,-1]}"#);
        assert_eq!(serde_json::from_str::<SignedPermutation>(&js).unwrap(), g);
    }
}
