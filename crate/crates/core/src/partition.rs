//! σ-algebras on finitely many atoms, represented as set partitions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpspace::Space;
use crate::subspace::{Subspace, DEFAULT_TOL};

/// Default relative gap for level-set splitting.
pub const LEVEL_TOL: f64 = 1e-8;

/// A partition of `{0..n}` into blocks. Blocks are sorted internally and
/// ordered by their smallest atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

/// JSON form with 1-based atoms: `{"blocks": [[1,2],[3]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PartitionFile {
    blocks: Vec<Vec<usize>>,
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartitionFile {
            blocks: self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = PartitionFile::deserialize(d)?;
        let n = f.blocks.iter().map(|b| b.len()).sum();
        let mut blocks = Vec::with_capacity(f.blocks.len());
        for b in f.blocks {
            if b.contains(&0) {
                return Err(serde::de::Error::custom("atom indices are 1-based"));
            }
            blocks.push(b.into_iter().map(|i| i - 1).collect());
        }
        Partition::new(n, blocks).map_err(serde::de::Error::custom)
    }
}

impl Partition {
    /// Validates that `blocks` is a disjoint cover of `0..n` by nonempty sets.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            for &i in b {
                if i >= n || seen[i] {
                    return Err(Error::Domain(format!("atom {i} is out of range or repeated")));
                }
                seen[i] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Domain("blocks do not cover every atom".into()));
        }
        Ok(Self::canonical(blocks))
    }

    fn canonical(mut blocks: Vec<Vec<usize>>) -> Self {
        blocks.iter_mut().for_each(|b| b.sort_unstable());
        blocks.sort_unstable_by_key(|b| b[0]);
        Partition { blocks }
    }

    /// Build from a label per atom; atoms with equal labels share a block.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            map.entry(l).or_default().push(i);
        }
        Self::canonical(map.into_values().collect())
    }

    pub fn discrete(n: usize) -> Self {
        Partition { blocks: (0..n).map(|i| vec![i]).collect() }
    }

    pub fn indiscrete(n: usize) -> Self {
        Partition { blocks: vec![(0..n).collect()] }
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(|b| b.len()).sum()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of each atom.
    pub fn labels(&self) -> Vec<usize> {
        let mut l = vec![0; self.n()];
        for (k, b) in self.blocks.iter().enumerate() {
            for &i in b {
                l[i] = k;
            }
        }
        l
    }

    /// Common refinement.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        Error::check_dim(self.n(), other.n())?;
        let (a, b) = (self.labels(), other.labels());
        let m = other.num_blocks();
        let labels: Vec<usize> = a.iter().zip(&b).map(|(x, y)| x * m + y).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// Finest common coarsening: transitive closure of both block relations.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        Error::check_dim(self.n(), other.n())?;
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for b in self.blocks.iter().chain(&other.blocks) {
            for &i in &b[1..] {
                let (ra, rb) = (find(&mut parent, b[0]), find(&mut parent, i));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// True when every block of `self` lies inside a block of `other`.
    pub fn is_refinement(&self, other: &Partition) -> Result<bool> {
        Error::check_dim(self.n(), other.n())?;
        let l = other.labels();
        Ok(self.blocks.iter().all(|b| b.iter().all(|&i| l[i] == l[b[0]])))
    }

    /// Block-constant vectors.
    pub fn fixed_space(&self, space: &Space) -> Result<Subspace> {
        Error::check_dim(space.n(), self.n())?;
        let gens: Vec<Vec<f64>> = self.blocks.iter().map(|b| indicator(space.n(), b)).collect();
        Subspace::spanned_by(space, &gens, DEFAULT_TOL)
    }

    /// Weighted block averaging (Ef)_i = Σ_{j∈B(i)} μ_j f_j / Σ_{j∈B(i)} μ_j.
    pub fn conditional_expectation(&self, space: &Space) -> Result<DMatrix<f64>> {
        Error::check_dim(space.n(), self.n())?;
        space.require_finite_p()?;
        let n = space.n();
        let w = space.weights();
        let mut e = DMatrix::zeros(n, n);
        for b in &self.blocks {
            let mass: f64 = b.iter().map(|&j| w[j]).sum();
            for &i in b {
                for &j in b {
                    e[(i, j)] = w[j] / mass;
                }
            }
        }
        Ok(e)
    }
}

pub(crate) fn indicator(n: usize, block: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; n];
    block.iter().for_each(|&i| v[i] = 1.0);
    v
}

/// Level sets of one vector: sort the values and split wherever two
/// consecutive values differ by more than `tol` times the vector's scale
/// (its value range, or its largest magnitude when that is bigger).
fn level_sets(v: &[f64], tol: f64) -> Partition {
    let n = v.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
    let lo = v[order[0]];
    let hi = v[order[n - 1]];
    let mag = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let scale = (hi - lo).max(mag);
    let mut labels = vec![0; n];
    let mut label = 0;
    for w in 1..n {
        if v[order[w]] - v[order[w - 1]] > tol * scale {
            label += 1;
        }
        labels[order[w]] = label;
    }
    Partition::from_labels(&labels)
}

/// The partition Σ_Y: atoms share a block iff every element of `y` takes
/// equal values there.
pub fn generated_partition(y: &Subspace, tol: f64) -> Partition {
    let n = y.n();
    y.basis()
        .iter()
        .map(|b| level_sets(b, tol))
        .fold(Partition::indiscrete(n), |acc, p| acc.meet(&p).expect("same n"))
}

/// Block-constant functions of Σ_Y.
pub fn conditional_envelope(y: &Subspace, tol: f64) -> Result<Subspace> {
    y.space().require_finite_p()?;
    generated_partition(y, tol).fixed_space(y.space())
}
