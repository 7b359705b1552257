//! Linear subspaces of ℓ_p^n(μ).
//!
//! All linear algebra runs in the μ-weighted Euclidean geometry
//! ⟨f, g⟩ = Σ μ_i f_i g_i, whatever the exponent of the ambient space; the
//! p-norm never drives a rank decision. Bases are stored μ-orthonormal and
//! canonical (reduced echelon form, then Gram–Schmidt), so two equal
//! subspaces carry the same basis up to rounding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lpspace::Space;

/// Default relative tolerance for rank and membership decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Entries below this fraction of a vector's max entry are snapped to zero
/// before lattice operations, so rounding noise does not enlarge supports.
const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    space: Space,
    basis: Vec<Vec<f64>>,
}

/// On-disk form: `{"basis": [[...], ...]}`, canonicalized on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubspaceFile {
    #[serde(alias = "vectors")]
    pub basis: Vec<Vec<f64>>,
}

fn sqrt_weights(space: &Space) -> Vec<f64> {
    space.weights().iter().map(|m| m.sqrt()).collect()
}

impl Subspace {
    /// Canonical basis for the span of `gens`.
    ///
    /// Directions whose singular value falls below `tol` relative to the
    /// largest are discarded. Fails when every generator has reference
    /// norm at most `tol`.
    pub fn from_vectors(space: &Space, gens: &[Vec<f64>], tol: f64) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::ZeroSubspace(tol));
        }
        let s = Self::spanned_by(space, gens, tol)?;
        if s.dim() == 0 {
            return Err(Error::ZeroSubspace(tol));
        }
        Ok(s)
    }

    /// Like [`Subspace::from_vectors`] but returns the zero subspace for an
    /// empty or negligible generator set.
    pub fn spanned_by(space: &Space, gens: &[Vec<f64>], tol: f64) -> Result<Self> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::Domain(format!("tolerance {tol} must be positive")));
        }
        for g in gens {
            space.check(g)?;
        }
        let sw = sqrt_weights(space);
        let rows: Vec<Vec<f64>> = gens
            .iter()
            .map(|g| g.iter().zip(&sw).map(|(x, s)| x * s).collect::<Vec<f64>>())
            .filter(|r: &Vec<f64>| r.iter().map(|x| x * x).sum::<f64>().sqrt() > tol)
            .collect();
        let n = space.n();
        let ortho = linalg::row_space(&rows, n, tol);
        Ok(Self::from_reference_rows(space, linalg::canonical_rows(ortho, n)))
    }

    fn from_reference_rows(space: &Space, rows: Vec<Vec<f64>>) -> Self {
        let sw = sqrt_weights(space);
        let basis = rows
            .into_iter()
            .map(|r| r.iter().zip(&sw).map(|(x, s)| x / s).collect())
            .collect();
        Subspace { space: space.clone(), basis }
    }

    /// Span of the columns of `m` (n × k).
    pub fn from_columns(space: &Space, m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        Error::check_dim(space.n(), m.nrows())?;
        let gens: Vec<Vec<f64>> = m.column_iter().map(|c| c.iter().cloned().collect()).collect();
        Self::spanned_by(space, &gens, tol)
    }

    pub fn zero(space: &Space) -> Self {
        Subspace { space: space.clone(), basis: Vec::new() }
    }

    pub fn whole(space: &Space) -> Self {
        let n = space.n();
        let gens: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::spanned_by(space, &gens, DEFAULT_TOL).expect("identity basis")
    }

    pub fn load(space: &Space, file: &SubspaceFile) -> Result<Self> {
        Self::spanned_by(space, &file.basis, DEFAULT_TOL)
    }

    pub fn to_file(&self) -> SubspaceFile {
        SubspaceFile { basis: self.basis.clone() }
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// μ-orthonormal canonical basis.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Basis as the columns of an n × dim matrix.
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n(), self.dim(), |i, j| self.basis[j][i])
    }

    /// Same subspace viewed in a space with a different exponent.
    pub fn with_space(&self, space: &Space) -> Result<Self> {
        if space.weights() != self.space.weights() {
            return Err(Error::Domain("weights differ".into()));
        }
        Ok(Subspace { space: space.clone(), basis: self.basis.clone() })
    }

    fn same_ambient(&self, other: &Subspace) -> Result<()> {
        Error::check_dim(self.n(), other.n())?;
        if self.space.weights() != other.space.weights() {
            return Err(Error::Domain("subspaces live in differently weighted spaces".into()));
        }
        Ok(())
    }

    fn ref_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.space.weights().iter().zip(f).zip(g).map(|((m, a), b)| m * a * b).sum()
    }

    fn ref_norm(&self, f: &[f64]) -> f64 {
        self.ref_inner(f, f).sqrt()
    }

    /// Reference-orthogonal projection of `f` onto the subspace.
    pub fn project(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.space.check(f)?;
        let mut out = vec![0.0; self.n()];
        for b in &self.basis {
            let c = self.ref_inner(f, b);
            out.iter_mut().zip(b).for_each(|(o, x)| *o += c * x);
        }
        Ok(out)
    }

    /// Matrix of the reference-orthogonal projection.
    pub fn orthogonal_projection(&self) -> DMatrix<f64> {
        let b = self.basis_matrix();
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(self.space.weights()));
        &b * b.transpose() * w
    }

    /// True when the residual of `f` after projection is at most `tol · ‖f‖`
    /// (reference norms).
    pub fn contains(&self, f: &[f64], tol: f64) -> Result<bool> {
        let pf = self.project(f)?;
        let r: Vec<f64> = f.iter().zip(&pf).map(|(a, b)| a - b).collect();
        Ok(self.ref_norm(&r) <= tol * self.ref_norm(f))
    }

    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> Result<bool> {
        self.same_ambient(other)?;
        for b in &other.basis {
            if !self.contains(b, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality by mutual containment of bases.
    pub fn equal(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim()
            && self.contains_subspace(other, tol)?
            && other.contains_subspace(self, tol)?)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        let gens: Vec<Vec<f64>> = self.basis.iter().chain(&other.basis).cloned().collect();
        Subspace::spanned_by(&self.space, &gens, DEFAULT_TOL)
    }

    /// Y ∩ Z as the null space of the conditions (I − P_Z) y = 0 on Y.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.same_ambient(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(&self.space));
        }
        let sw = sqrt_weights(&self.space);
        let n = self.n();
        let mut m = DMatrix::zeros(n, self.dim());
        for (j, b) in self.basis.iter().enumerate() {
            let pb = other.project(b)?;
            for i in 0..n {
                m[(i, j)] = (b[i] - pb[i]) * sw[i];
            }
        }
        let ns = linalg::null_space(&m, DEFAULT_TOL);
        let gens: Vec<Vec<f64>> = ns
            .column_iter()
            .map(|c| {
                let mut v = vec![0.0; n];
                for (k, b) in self.basis.iter().enumerate() {
                    v.iter_mut().zip(b).for_each(|(o, x)| *o += c[k] * x);
                }
                v
            })
            .collect();
        Subspace::spanned_by(&self.space, &gens, DEFAULT_TOL)
    }

    /// Image under a linear operator acting on coordinate vectors.
    pub fn image(&self, op: &DMatrix<f64>) -> Result<Subspace> {
        Error::check_dim(self.n(), op.ncols())?;
        let gens: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|b| (op * linalg::to_dvector(b)).iter().cloned().collect())
            .collect();
        Subspace::spanned_by(&self.space, &gens, DEFAULT_TOL)
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.contains(&self.space.ones(), tol).unwrap_or(false)
    }

    /// The subspace restricted to the atoms in `support`, living in the
    /// correspondingly restricted space.
    pub fn restrict_to(&self, support: &[usize]) -> Result<Subspace> {
        if support.is_empty() || support.iter().any(|&i| i >= self.n()) {
            return Err(Error::Domain("support must be a nonempty set of atoms".into()));
        }
        let w: Vec<f64> = support.iter().map(|&i| self.space.weights()[i]).collect();
        let space = Space::new(self.space.p(), w)?;
        let gens: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|b| support.iter().map(|&i| b[i]).collect())
            .collect();
        Subspace::spanned_by(&space, &gens, DEFAULT_TOL)
    }

    /// span{f / g : f in the basis}, coordinate-wise division.
    pub fn divide_by(&self, g: &[f64]) -> Result<Subspace> {
        self.space.check(g)?;
        if let Some(i) = g.iter().position(|x| *x == 0.0) {
            return Err(Error::FullSupport(i));
        }
        let gens: Vec<Vec<f64>> = self
            .basis
            .iter()
            .map(|b| b.iter().zip(g).map(|(x, d)| x / d).collect())
            .collect();
        Subspace::spanned_by(&self.space, &gens, DEFAULT_TOL)
    }

    /// Smallest sublattice containing the subspace (closed under
    /// coordinate-wise max and min).
    ///
    /// Rounds of: add `b⁺`, `b_i ∨ b_j`, `b_i ∧ b_j` over basis pairs in
    /// lexicographic order, re-canonicalize, stop once the dimension is
    /// stable. The ratio-class closure is then used to confirm (and if
    /// needed complete) the result.
    pub fn lattice_closure(&self) -> Result<Subspace> {
        self.space.require_finite_p()?;
        let mut cur = self.clone();
        loop {
            let basis: Vec<Vec<f64>> = cur.basis.iter().map(|b| snap(b)).collect();
            let mut gens = basis.clone();
            for (i, a) in basis.iter().enumerate() {
                gens.push(a.iter().map(|x| x.max(0.0)).collect());
                for b in &basis[i + 1..] {
                    gens.push(a.iter().zip(b).map(|(x, y)| x.max(*y)).collect());
                    gens.push(a.iter().zip(b).map(|(x, y)| x.min(*y)).collect());
                }
            }
            let next = Subspace::spanned_by(&self.space, &gens, DEFAULT_TOL)?;
            if next.dim() == cur.dim() {
                break;
            }
            cur = next;
        }
        Ok(cur.ratio_class_closure())
    }

    /// The sublattice generated directly from ratio classes: atoms where
    /// every element vanishes are dropped, and two atoms are tied when the
    /// value vectors (b(i))_b and (b(j))_b are positively proportional.
    pub fn ratio_class_closure(&self) -> Subspace {
        let n = self.n();
        let cols: Vec<Vec<f64>> = (0..n).map(|i| self.basis.iter().map(|b| b[i]).collect()).collect();
        let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let top = norms.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return Subspace::zero(&self.space);
        }
        let mut reps: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
        for i in 0..n {
            if norms[i] <= 1e-9 * top {
                continue;
            }
            let dir: Vec<f64> = cols[i].iter().map(|x| x / norms[i]).collect();
            let found = reps.iter_mut().find(|(d, _)| {
                d.iter().zip(&dir).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= 1e-8
            });
            match found {
                Some((_, atom)) => atom[i] = norms[i],
                None => {
                    let mut atom = vec![0.0; n];
                    atom[i] = norms[i];
                    reps.push((dir, atom));
                }
            }
        }
        let gens: Vec<Vec<f64>> = reps.into_iter().map(|(_, a)| a).collect();
        Subspace::spanned_by(&self.space, &gens, DEFAULT_TOL).expect("nonzero atoms")
    }

    /// True when the subspace is closed under ∨ and ∧.
    pub fn is_sublattice(&self) -> bool {
        self.ratio_class_closure().dim() == self.dim()
    }
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

fn snap(v: &[f64]) -> Vec<f64> {
    let m = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    v.iter().map(|x| if x.abs() <= SNAP * m { 0.0 } else { *x }).collect()
}
