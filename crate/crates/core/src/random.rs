//! Seeded random instances for property suites: spaces, structured
//! subspaces, partitions and signed permutations.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::Result;
use crate::isometry::SignedPermutation;
use crate::lpspace::Space;
use crate::partition::Partition;
use crate::subspace::{Subspace, DEFAULT_TOL};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A partition of `n` atoms into a random number of blocks.
pub fn partition<R: Rng>(rng: &mut R, n: usize) -> Partition {
    let k = rng.random_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Partition::from_labels(&labels)
}

/// Small integer values, constant on the blocks of a random partition, so
/// level sets repeat and envelopes are nontrivial.
pub fn structured_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let p = partition(rng, n);
    let vals: Vec<f64> = (0..p.num_blocks()).map(|_| rng.random_range(-3..=3) as f64).collect();
    p.labels().iter().map(|&l| vals[l]).collect()
}

pub fn generic_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Weights that are uniform or drawn from {1, 2}.
pub fn weights<R: Rng>(rng: &mut R, n: usize, uniform: bool) -> Vec<f64> {
    if uniform {
        vec![1.0; n]
    } else {
        (0..n).map(|_| rng.random_range(1..=2) as f64).collect()
    }
}

/// Up to `k` generators, each structured with probability 3/4; never zero.
pub fn subspace<R: Rng>(rng: &mut R, space: &Space, k: usize) -> Result<(Vec<Vec<f64>>, Subspace)> {
    let n = space.n();
    loop {
        let gens: Vec<Vec<f64>> = (0..k)
            .map(|_| if rng.random_bool(0.75) { structured_vector(rng, n) } else { generic_vector(rng, n) })
            .collect();
        let y = Subspace::spanned_by(space, &gens, DEFAULT_TOL)?;
        if y.dim() > 0 {
            return Ok((gens, y));
        }
    }
}

/// span{𝟙, structured vectors}.
pub fn unital_subspace<R: Rng>(rng: &mut R, space: &Space, extra: usize) -> Result<Subspace> {
    let n = space.n();
    let mut gens = vec![space.ones()];
    gens.extend((0..extra).map(|_| structured_vector(rng, n)));
    Subspace::spanned_by(space, &gens, DEFAULT_TOL)
}

/// A uniformly random permutation with each sign negative with probability
/// `minus`.
pub fn signed_permutation<R: Rng>(rng: &mut R, n: usize, minus: f64) -> SignedPermutation {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let signs = (0..n).map(|_| if rng.random_bool(minus) { -1 } else { 1 }).collect();
    SignedPermutation::new(perm, signs).expect("valid by construction")
}

/// Nonnegative weights summing to one.
pub fn simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| -rng.random_range(f64::EPSILON..1.0f64).ln()).collect();
    let s: f64 = raw.iter().sum();
    let mut c: Vec<f64> = raw.iter().map(|x| x / s).collect();
    let drift = 1.0 - c.iter().sum::<f64>();
    c[0] += drift;
    c
}

pub fn choose<R: Rng, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}
