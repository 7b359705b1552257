//! Seeded property suites over random instances. Trial `i` of a run with
//! seed `s` uses seed `s + i`, so results do not depend on scheduling.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complement::{
    c2_formula, c2n_l1, interpolation_bound, min_projection_norm, op_norm, scan_c2, screen_pushout, SearchConfig,
};
use crate::ergodic::{
    cesaro_projection, intersection_projection, fixed_space_check, reference_norm, spectral_projection,
    ContractionOperator, DEFAULT_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::isometry::{algebraic_envelope, group_closure, isometric_envelope, SignedPermutation, DEFAULT_ORDER_CAP};
use crate::lpspace::{dual_exponent, Space};
use crate::partition::{conditional_envelope, generated_partition, LEVEL_TOL};
use crate::random;
use crate::subspace::{Subspace, DEFAULT_TOL};

/// Equality tolerance for envelopes compared as subspaces.
pub const SUBSPACE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SuiteInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub default_trials: usize,
    /// Deterministic suites run once whatever the trial count.
    pub single: bool,
}

pub const SUITES: &[SuiteInfo] = &[
    SuiteInfo { name: "axioms", description: "closure axioms for the conditional, algebraic, isometric and lattice envelopes", default_trials: 200, single: false },
    SuiteInfo { name: "unital", description: "four envelopes agree on unital subspaces; conditional expectation is contractive", default_trials: 100, single: false },
    SuiteInfo { name: "intersection", description: "projection onto the intersection of two conditional-expectation ranges", default_trials: 50, single: false },
    SuiteInfo { name: "cesaro", description: "Cesàro averages agree with the spectral projection", default_trials: 100, single: false },
    SuiteInfo { name: "groups", description: "fixed-space splitting of finite groups and the duality map", default_trials: 50, single: false },
    SuiteInfo { name: "constants", description: "closed-form projection constants: values, symmetry, monotonicity", default_trials: 1, single: true },
    SuiteInfo { name: "pushout", description: "glued copies are 1-complemented while their intersection is not", default_trials: 1, single: true },
    SuiteInfo { name: "hilbert", description: "p = 2: every subspace is its own envelope and 1-complemented", default_trials: 100, single: false },
    SuiteInfo { name: "mazur", description: "Mazur maps conjugate signed permutations to themselves", default_trials: 200, single: false },
    SuiteInfo { name: "union", description: "envelopes of nested chains are sums of stage envelopes", default_trials: 50, single: false },
    SuiteInfo { name: "chain", description: "conditional ⊆ isometric ⊆ algebraic envelope for weighted unital subspaces", default_trials: 200, single: false },
    SuiteInfo { name: "sublattice", description: "unital sublattices are their own algebraic envelope", default_trials: 100, single: false },
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|s| s.name).collect()
}

pub fn suite_info(name: &str) -> Result<SuiteInfo> {
    SUITES
        .iter()
        .find(|s| s.name == name)
        .copied()
        .ok_or_else(|| Error::Usage(format!("unknown suite `{name}`; available: {}", suite_names().join(", "))))
}

/// Checks and residuals gathered by one trial.
#[derive(Debug, Default, Clone)]
pub struct Trial {
    failures: Vec<String>,
    residuals: Vec<(&'static str, f64)>,
    notes: Vec<String>,
}

impl Trial {
    fn check(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn bound(&mut self, what: &'static str, value: f64, limit: f64) {
        self.residuals.push((what, value));
        if value.is_nan() || value > limit {
            self.failures.push(format!("{what} = {value:e} exceeds {limit:e}"));
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest value of each recorded residual over all trials.
    pub worst: BTreeMap<String, f64>,
    /// Up to ten failure messages, tagged with the trial index.
    pub failures: Vec<String>,
    /// Counts of informational notes.
    pub notes: BTreeMap<String, usize>,
    pub wall_time_ms: u128,
}

impl SuiteOutcome {
    pub fn ok(&self) -> bool {
        self.failed == 0 && self.trials > 0
    }
}

type TrialFn = fn(u64) -> Result<Trial>;

fn trial_fn(name: &str) -> Result<TrialFn> {
    Ok(match name {
        "axioms" => axioms,
        "unital" => unital,
        "intersection" => intersection,
        "cesaro" => cesaro,
        "groups" => groups,
        "constants" => constants,
        "pushout" => pushout_trial,
        "hilbert" => hilbert,
        "mazur" => mazur,
        "union" => union,
        "chain" => chain,
        "sublattice" => sublattice,
        _ => return Err(suite_info(name).err().unwrap_or_else(|| Error::Usage(format!("suite `{name}` has no runner")))),
    })
}

/// Runs `trials` seeded trials (default count when `None`) in parallel.
pub fn run_suite(name: &str, trials: Option<usize>, seed: u64) -> Result<SuiteOutcome> {
    let info = suite_info(name)?;
    let f = trial_fn(name)?;
    let count = if info.single { 1 } else { trials.unwrap_or(info.default_trials) };
    let start = std::time::Instant::now();
    let results: Vec<Result<Trial>> = (0..count).into_par_iter().map(|i| f(seed.wrapping_add(i as u64))).collect();
    let mut out = SuiteOutcome {
        suite: name.to_string(),
        seed,
        trials: count,
        passed: 0,
        failed: 0,
        worst: BTreeMap::new(),
        failures: Vec::new(),
        notes: BTreeMap::new(),
        wall_time_ms: 0,
    };
    for (i, r) in results.into_iter().enumerate() {
        let msgs = match r {
            Ok(t) => {
                for (k, v) in t.residuals {
                    let e = out.worst.entry(k.to_string()).or_insert(0.0);
                    *e = e.max(v);
                }
                for n in t.notes {
                    *out.notes.entry(n).or_insert(0) += 1;
                }
                t.failures
            }
            Err(e) => vec![format!("error: {e}")],
        };
        if msgs.is_empty() {
            out.passed += 1;
        } else {
            out.failed += 1;
            if out.failures.len() < 10 {
                out.failures.push(format!("trial {i}: {}", msgs.join("; ")));
            }
        }
    }
    out.wall_time_ms = start.elapsed().as_millis();
    Ok(out)
}

fn eq(a: &Subspace, b: &Subspace, tol: f64) -> Result<bool> {
    a.equal(b, tol)
}

/// Generators mixed by a unit upper-triangular matrix plus their sum.
fn respan<R: Rng>(rng: &mut R, gens: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = gens[0].len();
    let mut out: Vec<Vec<f64>> = (0..gens.len())
        .map(|i| {
            let mut v = gens[i].clone();
            for g in &gens[i + 1..] {
                let c = rng.random_range(-2..=2) as f64;
                v.iter_mut().zip(g).for_each(|(a, b)| *a += c * b);
            }
            v
        })
        .collect();
    out.push((0..n).map(|j| gens.iter().map(|g| g[j]).sum()).collect());
    out
}

fn envelope_axioms<F>(t: &mut Trial, label: &str, space: &Space, gens: &[Vec<f64>], extra: &[f64], seed: u64, env: F) -> Result<()>
where
    F: Fn(&Subspace) -> Result<Subspace>,
{
    let mut rng = random::rng(seed ^ 0xa5a5);
    let y = Subspace::spanned_by(space, gens, DEFAULT_TOL)?;
    let e = env(&y)?;
    t.check(&format!("{label}: extensive"), e.contains_subspace(&y, SUBSPACE_TOL)?);
    let mut bigger = gens.to_vec();
    bigger.push(extra.to_vec());
    let z = Subspace::spanned_by(space, &bigger, DEFAULT_TOL)?;
    t.check(&format!("{label}: monotone"), env(&z)?.contains_subspace(&e, SUBSPACE_TOL)?);
    let other = Subspace::spanned_by(space, &respan(&mut rng, gens), DEFAULT_TOL)?;
    t.check(&format!("{label}: depends on the span only"), eq(&env(&other)?, &e, SUBSPACE_TOL)?);
    t.check(&format!("{label}: idempotent"), eq(&env(&e)?, &e, SUBSPACE_TOL)?);
    Ok(())
}

fn axioms(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let uniform = rng.random_bool(0.7);
    let w = random::weights(&mut rng, n, uniform);
    let p = random::choose(&mut rng, &[1.0, 1.5, 3.0, 5.0]);
    let p_iso = random::choose(&mut rng, &[1.0, 1.5, 2.0, 3.0]);
    let space = Space::new(p, w.clone())?;
    let iso_space = Space::new(p_iso, w)?;
    let k = rng.random_range(1..=3);
    let (gens, _) = random::subspace(&mut rng, &space, k)?;
    let extra =
        if rng.random_bool(0.75) { random::structured_vector(&mut rng, n) } else { random::generic_vector(&mut rng, n) };
    envelope_axioms(&mut t, "conditional", &space, &gens, &extra, seed, |y| conditional_envelope(y, LEVEL_TOL))?;
    envelope_axioms(&mut t, "algebraic", &space, &gens, &extra, seed, |y| algebraic_envelope(&space, y, DEFAULT_TOL))?;
    envelope_axioms(&mut t, "isometric", &iso_space, &gens, &extra, seed, |y| {
        Ok(isometric_envelope(&iso_space, y, DEFAULT_TOL)?.envelope)
    })?;
    envelope_axioms(&mut t, "lattice", &space, &gens, &extra, seed, |y| y.lattice_closure())?;
    Ok(t)
}

fn unital(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let p = random::choose(&mut rng, &[1.0, 1.5, 3.0, 5.0]);
    let space = Space::uniform(n, p)?;
    let extra = rng.random_range(1..=2);
    let y = random::unital_subspace(&mut rng, &space, extra)?;
    let iso = isometric_envelope(&space, &y, DEFAULT_TOL)?.envelope;
    let alg = algebraic_envelope(&space, &y, DEFAULT_TOL)?;
    let cond = conditional_envelope(&y, LEVEL_TOL)?;
    let lat = y.lattice_closure()?;
    t.check("isometric = algebraic", eq(&iso, &alg, SUBSPACE_TOL)?);
    t.check("algebraic = conditional", eq(&alg, &cond, SUBSPACE_TOL)?);
    t.check("conditional = lattice", eq(&cond, &lat, SUBSPACE_TOL)?);
    t.check("Y ⊆ envelope", cond.contains_subspace(&y, SUBSPACE_TOL)?);
    if p > 1.0 {
        let e = generated_partition(&y, LEVEL_TOL).conditional_expectation(&space)?;
        t.bound("expectation norm (sampled)", op_norm(&space, &e, p)?.value - 1.0, 1e-6);
        t.bound("expectation norm (interpolated)", interpolation_bound(&space, &e, p)? - 1.0, 1e-6);
        t.bound("expectation idempotence", reference_norm(&space, &(&e * &e - &e)), 1e-12);
        if cond.dim() < n {
            let r = min_projection_norm(&cond, &SearchConfig { seed, ..Default::default() })?;
            t.bound("minimax projection norm", r.upper_bound - 1.0, 1e-6);
        }
    }
    Ok(t)
}

fn intersection(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let uniform = rng.random_bool(0.5);
    let w = random::weights(&mut rng, n, uniform);
    let p = random::choose(&mut rng, &[1.0, 1.5, 3.0]);
    let space = Space::new(p, w)?;
    let a = random::partition(&mut rng, n);
    let b = random::partition(&mut rng, n);
    let ea = ContractionOperator::conditional_expectation(&space, &a)?;
    let eb = ContractionOperator::conditional_expectation(&space, &b)?;
    let r = intersection_projection(&[ea, eb], 1e-6, DEFAULT_MAX_ITER)?;
    let join = a.join(&b)?;
    let target = join.fixed_space(&space)?;
    t.bound("Cesàro residual", r.ergodic.cross_check_residual.unwrap_or(r.ergodic.residual), 1e-6);
    t.check("rank equals join block count", r.ergodic.fixed_space.dim() == join.num_blocks());
    t.check("range equals join fixed space", eq(&r.ergodic.fixed_space, &target, 1e-9)?);
    t.check("range equals intersection", r.range_equals_intersection);
    let pm = &r.ergodic.projection;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x = random::generic_vector(&mut rng, n);
        let px = pm * DVector::from_vec(x.clone());
        worst = worst.max(space.norm(px.as_slice())? / space.norm(&x)? - 1.0);
    }
    t.bound("contraction excess", worst, 1e-9);
    Ok(t)
}

fn cesaro(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(2..=6);
    let k = rng.random_range(1..=3);
    let space = Space::uniform(n, 3.0)?;
    let els: Vec<SignedPermutation> = (0..k).map(|_| random::signed_permutation(&mut rng, n, 0.3)).collect();
    let c = random::simplex(&mut rng, k);
    let op = ContractionOperator::convex_combination(&space, &c, &els)?;
    let ces = cesaro_projection(&op, 1e-7, DEFAULT_MAX_ITER)?;
    let spec = spectral_projection(&op)?;
    t.bound("Cesàro vs spectral", reference_norm(&space, &(&ces.projection - spec)), 1e-6);
    Ok(t)
}

fn groups(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let p = random::choose(&mut rng, &[1.5, 3.0]);
    let space = Space::uniform(n, p)?;
    let mut tries = 0;
    let (gens, order) = loop {
        tries += 1;
        let k = rng.random_range(1..=2);
        let gens: Vec<SignedPermutation> = (0..k).map(|_| random::signed_permutation(&mut rng, n, 0.15)).collect();
        match group_closure(&gens, DEFAULT_ORDER_CAP) {
            Ok(g) => break (gens, g.len()),
            Err(Error::TooLarge { .. }) if tries < 50 => continue,
            Err(e) => return Err(e),
        }
    };
    let r = fixed_space_check(&space, &gens, 16, seed)?;
    t.check("group order", r.group_order == order && order <= DEFAULT_ORDER_CAP);
    t.check("direct sum", r.direct_sum);
    t.check("kernel = pre-annihilator of adjoint fixed space", r.kernel_is_preannihilator);
    t.bound("duality residual", r.duality_residual, 1e-8);
    t.check("J(Fix) spans adjoint fixed space", r.duality_spans_adjoint_fix);
    t.check("complement = J(Fix) annihilator", r.complement_is_duality_annihilator);
    t.check("fixed space invariant", r.fixed_invariant);
    t.check("complement invariant", r.complement_invariant);
    Ok(t)
}

fn constants(_seed: u64) -> Result<Trial> {
    let mut t = Trial::default();
    t.bound("c2(2) − 1", (c2_formula(2.0)? - 1.0).abs(), 1e-12);
    let mut sym: f64 = 0.0;
    for k in 1..=50 {
        let p = 1.0 + k as f64 / 50.0 * 0.98;
        sym = sym.max((c2_formula(p)? - c2_formula(dual_exponent(p)?)?).abs());
    }
    t.bound("duality asymmetry", sym, 1e-10);
    let low: Vec<f64> = (0..=200).map(|k| 1.001 + k as f64 * (2.0 - 1.001) / 200.0).collect();
    let high: Vec<f64> = (0..=200).map(|k| 2.0 + k as f64 * 48.0 / 200.0).collect();
    let lo = scan_c2(&low)?;
    let hi = scan_c2(&high)?;
    t.check("strictly decreasing on [1.001, 2]", lo.all_monotone);
    t.check("strictly increasing on [2, 50]", hi.all_monotone);
    t.bound("c2n(1) − 1", (c2n_l1(1)? - 1.0).abs(), 1e-12);
    t.bound("c2n(2) − 4/π", (c2n_l1(2)? - 4.0 / std::f64::consts::PI).abs(), 1e-12);
    let seq: Vec<f64> = (1..=64).map(c2n_l1).collect::<Result<_>>()?;
    t.check("c2n nondecreasing up to 64", seq.windows(2).all(|w| w[1] >= w[0]));
    Ok(t)
}

fn pushout_trial(seed: u64) -> Result<Trial> {
    let mut t = Trial::default();
    let s = screen_pushout(seed, 60, 1.01)?;
    let r = &s.report;
    let lx = r.lambda_in_x.unwrap_or(f64::NAN);
    let lw = r.lambda_in_w.unwrap_or(f64::NAN);
    t.check(&format!("λ(Y, X) = {lx} ≥ 1.01"), lx >= 1.01);
    t.check(&format!("λ(𝒴, W) = {lw} ≥ 1.005"), lw >= 1.005);
    t.bound("copy projection excess", r.copy_projection_norms[0].max(r.copy_projection_norms[1]) - 1.0, 1e-6);
    t.check("copies 1-complemented", r.copies_one_complemented);
    t.check("copy norms exact", r.copy_norms_exact);
    t.bound("embedding defect", r.max_embedding_defect, 1e-9);
    t.bound("kernel class norm", r.max_kernel_norm, 1e-9);
    t.check("copies meet in the diagonal", r.copies_meet_in_diagonal);
    t.note(if s.escalated { "escalated to n = 4" } else { "found at n = 3" });
    Ok(t)
}

fn hilbert(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(2..=6);
    let uniform = rng.random_bool(0.5);
    let space = Space::new(2.0, random::weights(&mut rng, n, uniform))?;
    let k = rng.random_range(1..n);
    let (_, y) = random::subspace(&mut rng, &space, k)?;
    let env = isometric_envelope(&space, &y, DEFAULT_TOL)?.envelope;
    t.check("envelope = Y", env == y);
    if y.dim() < n {
        let r = min_projection_norm(&y, &SearchConfig { seed, ..Default::default() })?;
        t.bound("min projection norm − 1", (r.upper_bound - 1.0).abs(), 1e-9);
    }
    Ok(t)
}

fn mazur(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(2..=6);
    let p = random::choose(&mut rng, &[1.0, 1.5, 3.0]);
    let q = random::choose(&mut rng, &[1.0, 1.5, 3.0]);
    let sp = Space::uniform(n, p)?;
    let sq = Space::uniform(n, q)?;
    let g = random::signed_permutation(&mut rng, n, 0.5);
    let conj = |f: &[f64]| -> Result<Vec<f64>> { sp.mazur_map(q, &g.act(&sq.mazur_map(p, f)?)) };
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            conj(&e)
        })
        .collect::<Result<_>>()?;
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    t.check("basis images form the same signed permutation", m == g.matrix());
    let mut worst: f64 = 0.0;
    let mut sphere: f64 = 0.0;
    for _ in 0..8 {
        let mut f = random::generic_vector(&mut rng, n);
        let nf = sq.norm(&f)?;
        f.iter_mut().for_each(|x| *x /= nf);
        let lhs = conj(&f)?;
        let rhs = g.act(&f);
        worst = worst.max(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        sphere = sphere.max((sp.norm(&sq.mazur_map(p, &f)?)? - 1.0).abs());
    }
    t.bound("conjugate action defect", worst, 1e-12);
    t.bound("sphere defect", sphere, 1e-10);
    Ok(t)
}

fn union(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let space = Space::uniform(n, 3.0)?;
    let mut gens = Vec::new();
    let mut stages = Vec::new();
    for _ in 0..5 {
        gens.push(random::structured_vector(&mut rng, n));
        stages.push(Subspace::spanned_by(&space, &gens, DEFAULT_TOL)?);
    }
    let top = stages.last().expect("five stages");
    for w in stages.windows(2) {
        let (a, b) = (generated_partition(&w[0], LEVEL_TOL), generated_partition(&w[1], LEVEL_TOL));
        t.check("generated partitions refine along the chain", b.is_refinement(&a)?);
    }
    let sum_of = |f: &dyn Fn(&Subspace) -> Result<Subspace>| -> Result<Subspace> {
        stages.iter().try_fold(Subspace::zero(&space), |acc, s| acc.sum(&f(s)?))
    };
    let cond = |y: &Subspace| conditional_envelope(y, LEVEL_TOL);
    let iso = |y: &Subspace| Ok(isometric_envelope(&space, y, DEFAULT_TOL)?.envelope);
    let alg = |y: &Subspace| algebraic_envelope(&space, y, DEFAULT_TOL);
    t.check("conditional envelope of the union", eq(&cond(top)?, &sum_of(&cond)?, 1e-9)?);
    t.check("isometric envelope of the union", eq(&iso(top)?, &sum_of(&iso)?, 1e-9)?);
    t.note(if eq(&alg(top)?, &sum_of(&alg)?, 1e-9)? { "algebraic: union identity holds" } else { "algebraic: union identity fails" });
    Ok(t)
}

fn chain(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let p = random::choose(&mut rng, &[1.0, 1.5, 3.0, 5.0]);
    let uniform = rng.random_bool(0.5);
    let space = Space::new(p, random::weights(&mut rng, n, uniform))?;
    let extra = rng.random_range(1..=2);
    let y = random::unital_subspace(&mut rng, &space, extra)?;
    let cond = conditional_envelope(&y, LEVEL_TOL)?;
    let iso = isometric_envelope(&space, &y, DEFAULT_TOL)?.envelope;
    let alg = algebraic_envelope(&space, &y, DEFAULT_TOL)?;
    t.check("minimal ⊆ isometric", iso.contains_subspace(&cond, SUBSPACE_TOL)?);
    t.check("isometric ⊆ algebraic", alg.contains_subspace(&iso, SUBSPACE_TOL)?);
    t.note(if eq(&cond, &alg, SUBSPACE_TOL)? { "chain collapses" } else { "chain strict" });
    Ok(t)
}

fn sublattice(seed: u64) -> Result<Trial> {
    let mut rng = random::rng(seed);
    let mut t = Trial::default();
    let n = rng.random_range(3..=6);
    let p = random::choose(&mut rng, &[1.0, 1.5, 3.0]);
    let space = Space::uniform(n, p)?;
    let y = random::partition(&mut rng, n).fixed_space(&space)?;
    t.check("Y is a sublattice", y.is_sublattice());
    t.check("algebraic envelope = Y", eq(&algebraic_envelope(&space, &y, DEFAULT_TOL)?, &y, SUBSPACE_TOL)?);
    Ok(t)
}
