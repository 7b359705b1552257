//! Generative checks of the invariants each module promises.

use envlab::complement::{min_projection_norm, op_norm, SearchConfig};
use envlab::ergodic::{cesaro_projection, spectral_projection, ContractionOperator};
use envlab::isometry::{
    algebraic_envelope, enumerate_group, fixed_space_of, group_average_projection, is_group, isometric_envelope,
    stabilizer, SignedPermutation,
};
use envlab::partition::{conditional_envelope, LEVEL_TOL};
use envlab::{Partition, Space, Subspace};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::sample::select;

const TOL: f64 = 1e-9;

fn exponent() -> impl Strategy<Value = f64> {
    select(vec![1.0, 1.25, 1.5, 2.0, 3.0, 4.5, 7.0])
}

fn reflexive_exponent() -> impl Strategy<Value = f64> {
    select(vec![1.25, 1.5, 2.0, 3.0, 4.5, 7.0])
}

fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, n)
}

/// Small integers constant on random blocks, so level sets repeat.
fn structured(n: usize) -> impl Strategy<Value = Vec<f64>> {
    (prop::collection::vec(0..n, n), prop::collection::vec(-3i32..=3, n))
        .prop_map(|(labels, vals)| labels.iter().map(|&l| vals[l] as f64).collect())
}

fn space_with(n: usize, p: f64) -> impl Strategy<Value = Space> {
    prop::collection::vec(0.25..4.0f64, n).prop_map(move |w| Space::new(p, w).unwrap())
}

fn signed_permutation(n: usize) -> impl Strategy<Value = SignedPermutation> {
    (Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), prop::collection::vec(prop::bool::ANY, n))
        .prop_map(|(perm, neg)| SignedPermutation::new(perm, neg.iter().map(|&b| if b { -1 } else { 1 }).collect()).unwrap())
}

fn span(space: &Space, gens: &[Vec<f64>]) -> Subspace {
    Subspace::spanned_by(space, gens, TOL).unwrap()
}

fn unital(space: &Space, extra: &[Vec<f64>]) -> Subspace {
    let mut gens = vec![space.ones()];
    gens.extend(extra.iter().cloned());
    span(space, &gens)
}

fn apply(m: &DMatrix<f64>, f: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(f)).iter().cloned().collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = a.iter().chain(b).fold(1.0_f64, |m, x| m.max(x.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn norm_is_homogeneous_and_subadditive(
        (space, f, g) in (2usize..=7, exponent()).prop_flat_map(|(n, p)| (space_with(n, p), vector(n), vector(n))),
        t in -4.0..4.0f64,
    ) {
        let tf: Vec<f64> = f.iter().map(|x| t * x).collect();
        let nf = space.norm(&f).unwrap();
        prop_assert!((space.norm(&tf).unwrap() - t.abs() * nf).abs() <= 1e-12 * (1.0 + t.abs() * nf));
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        prop_assert!(space.norm(&sum).unwrap() <= nf + space.norm(&g).unwrap() + 1e-12);
    }

    #[test]
    fn duality_map_identities(
        (space, f) in (2usize..=7, reflexive_exponent()).prop_flat_map(|(n, p)| (space_with(n, p), vector(n))),
    ) {
        let nf = space.norm(&f).unwrap();
        let jf = space.duality_map(&f).unwrap();
        let dual = space.dual().unwrap();
        prop_assert!((dual.norm(&jf).unwrap() - nf).abs() <= 1e-9 * nf.max(1.0));
        prop_assert!((space.pairing(&jf, &f).unwrap() - nf * nf).abs() <= 1e-9 * (nf * nf).max(1.0));
        let back = dual.duality_map(&jf).unwrap();
        prop_assert!(close(&back, &f, 1e-9));
    }

    #[test]
    fn duality_map_commutes_with_isometries(
        (p, f, g) in (2usize..=7, reflexive_exponent()).prop_flat_map(|(n, p)| (Just(p), vector(n), signed_permutation(n))),
    ) {
        // uniform weights: every signed permutation is an isometry and (T*)⁻¹ = T
        let space = Space::uniform(f.len(), p).unwrap();
        let lhs = space.duality_map(&g.act(&f)).unwrap();
        let rhs = g.act(&space.duality_map(&f).unwrap());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn mazur_maps_invert_each_other(
        (space, f) in (2usize..=7, exponent()).prop_flat_map(|(n, p)| (space_with(n, p), vector(n))),
        q in exponent(),
    ) {
        let nf = space.norm(&f).unwrap();
        prop_assume!(nf > 1e-6);
        let u: Vec<f64> = f.iter().map(|x| x / nf).collect();
        let target = space.with_exponent(q).unwrap();
        let there = space.mazur_map(q, &u).unwrap();
        prop_assert!((target.norm(&there).unwrap() - 1.0).abs() <= 1e-10);
        let back = target.mazur_map(space.p(), &there).unwrap();
        prop_assert!(close(&back, &u, 1e-10));
    }

    #[test]
    fn dimension_formula_for_sum_and_intersection(
        (space, a, b) in (3usize..=6).prop_flat_map(|n| (
            space_with(n, 3.0),
            prop::collection::vec(structured(n), 1..=3),
            prop::collection::vec(structured(n), 1..=3),
        )),
    ) {
        let (y, z) = (span(&space, &a), span(&space, &b));
        let s = y.sum(&z).unwrap();
        let i = y.intersect(&z).unwrap();
        prop_assert_eq!(y.dim() + z.dim(), s.dim() + i.dim());
        prop_assert!(s.contains_subspace(&y, 1e-9).unwrap() && y.contains_subspace(&i, 1e-9).unwrap());
    }

    #[test]
    fn lattice_closure_is_a_closure(
        (space, a, extra) in (3usize..=6).prop_flat_map(|n| (
            space_with(n, 3.0),
            prop::collection::vec(structured(n), 1..=2),
            structured(n),
        )),
        picks in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4),
    ) {
        prop_assume!(a.iter().any(|v| v.iter().any(|x| *x != 0.0)));
        let y = span(&space, &a);
        let l = y.lattice_closure().unwrap();
        prop_assert!(l.contains_subspace(&y, 1e-9).unwrap());
        prop_assert!(l.lattice_closure().unwrap().equal(&l, 1e-9).unwrap());
        let mut bigger = a.clone();
        bigger.push(extra);
        let lb = span(&space, &bigger).lattice_closure().unwrap();
        prop_assert!(lb.contains_subspace(&l, 1e-9).unwrap());
        let basis = l.basis();
        for (s, t) in picks {
            let u: Vec<f64> = (0..space.n()).map(|i| s * basis[0][i] + t * basis[basis.len() - 1][i]).collect();
            let v: Vec<f64> = basis[basis.len() / 2].clone();
            let join: Vec<f64> = u.iter().zip(&v).map(|(x, y)| x.max(*y)).collect();
            let meet: Vec<f64> = u.iter().zip(&v).map(|(x, y)| x.min(*y)).collect();
            prop_assert!(l.contains(&join, 1e-9).unwrap() && l.contains(&meet, 1e-9).unwrap());
        }
    }

    #[test]
    fn conditional_expectation_is_contractive(
        (space, labels, f) in (2usize..=7, select(vec![1.0, 1.5, 2.0, 3.0, 7.0, f64::INFINITY]))
            .prop_flat_map(|(n, p)| (space_with(n, p), prop::collection::vec(0..n, n), vector(n))),
    ) {
        // the averaging matrix does not depend on p; build it in a finite exponent
        let finite = space.with_exponent(2.0).unwrap();
        let e = Partition::from_labels(&labels).conditional_expectation(&finite).unwrap();
        prop_assert!(space.norm(&apply(&e, &f)).unwrap() <= space.norm(&f).unwrap() + 1e-12);
    }

    #[test]
    fn join_fixed_space_is_the_intersection(
        (space, a, b) in (2usize..=7).prop_flat_map(|n| (
            space_with(n, 3.0),
            prop::collection::vec(0..n, n),
            prop::collection::vec(0..n, n),
        )),
    ) {
        let (pa, pb) = (Partition::from_labels(&a), Partition::from_labels(&b));
        let joined = pa.join(&pb).unwrap().fixed_space(&space).unwrap();
        let inter = pa.fixed_space(&space).unwrap().intersect(&pb.fixed_space(&space).unwrap()).unwrap();
        prop_assert!(joined.equal(&inter, 1e-9).unwrap());
    }

    #[test]
    fn conditional_envelope_of_a_nested_union(
        (space, gens) in (3usize..=6).prop_flat_map(|n| (space_with(n, 3.0), prop::collection::vec(structured(n), 2..=5))),
    ) {
        let mut sum = Subspace::zero(&space);
        for k in 1..=gens.len() {
            sum = sum.sum(&conditional_envelope(&span(&space, &gens[..k]), LEVEL_TOL).unwrap()).unwrap();
        }
        let top = conditional_envelope(&span(&space, &gens), LEVEL_TOL).unwrap();
        prop_assert!(top.equal(&sum, 1e-9).unwrap());
    }

    #[test]
    fn unital_sublattices_are_their_own_algebraic_envelope(
        (labels, p) in (2usize..=6).prop_flat_map(|n| (prop::collection::vec(0..n, n), select(vec![1.0, 1.5, 3.0]))),
    ) {
        let space = Space::uniform(labels.len(), p).unwrap();
        let y = Partition::from_labels(&labels).fixed_space(&space).unwrap();
        prop_assert!(algebraic_envelope(&space, &y, TOL).unwrap().equal(&y, 1e-9).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumerated_groups_are_isometry_groups(
        (weights, f) in (1usize..=4).prop_flat_map(|n| (prop::collection::vec(select(vec![1.0, 2.0]), n), vector(n))),
    ) {
        let space = Space::new(3.0, weights).unwrap();
        let group = enumerate_group(&space).unwrap();
        prop_assert!(is_group(&group));
        for g in &group {
            for p in [1.0, 3.0, 7.0] {
                let s = space.with_exponent(p).unwrap();
                let (a, b) = (s.norm(&g.act(&f)).unwrap(), s.norm(&f).unwrap());
                prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }

    #[test]
    fn envelope_chain_for_unital_subspaces(
        (p, extra) in (3usize..=6).prop_flat_map(|n| (select(vec![1.0, 1.5, 3.0, 5.0]), prop::collection::vec(structured(n), 1..=2))),
    ) {
        let space = Space::uniform(extra[0].len(), p).unwrap();
        let y = unital(&space, &extra);
        let minimal = conditional_envelope(&y, LEVEL_TOL).unwrap();
        let iso = isometric_envelope(&space, &y, TOL).unwrap().envelope;
        let alg = algebraic_envelope(&space, &y, TOL).unwrap();
        prop_assert!(iso.contains_subspace(&minimal, 1e-9).unwrap());
        prop_assert!(alg.contains_subspace(&iso, 1e-9).unwrap());
    }

    #[test]
    fn algebraic_envelope_is_equivariant(
        (p, gens, g) in (3usize..=6).prop_flat_map(|n| (
            select(vec![1.0, 1.5, 3.0]),
            prop::collection::vec(structured(n), 1..=2),
            signed_permutation(n),
        )),
    ) {
        let space = Space::uniform(g.n(), p).unwrap();
        prop_assume!(gens.iter().any(|v| v.iter().any(|x| *x != 0.0)));
        let y = span(&space, &gens);
        let moved: Vec<Vec<f64>> = gens.iter().map(|v| g.act(v)).collect();
        let env_of_moved = algebraic_envelope(&space, &span(&space, &moved), TOL).unwrap();
        let moved_env = y_image(&space, &algebraic_envelope(&space, &y, TOL).unwrap(), &g);
        prop_assert!(env_of_moved.equal(&moved_env, 1e-9).unwrap());
    }

    #[test]
    fn stabilizer_average_projects_contractively_onto_the_envelope(
        (p, gens, f) in (3usize..=6).prop_flat_map(|n| (
            select(vec![1.5, 3.0, 5.0]),
            prop::collection::vec(structured(n), 1..=2),
            vector(n),
        )),
    ) {
        prop_assume!(gens.iter().any(|v| v.iter().any(|x| *x != 0.0)));
        let space = Space::uniform(f.len(), p).unwrap();
        let y = span(&space, &gens);
        let stab = stabilizer(&space, &y, TOL).unwrap();
        let avg = group_average_projection(&space, &stab).unwrap();
        prop_assert!((&avg * &avg - &avg).norm() <= 1e-12);
        prop_assert!(space.norm(&apply(&avg, &f)).unwrap() <= space.norm(&f).unwrap() + 1e-12);
        let env = isometric_envelope(&space, &y, TOL).unwrap().envelope;
        prop_assert!(Subspace::from_columns(&space, &avg, TOL).unwrap().equal(&env, 1e-9).unwrap());
        // the fixed space of the averaged stabilizer is the fixed space of the stabilizer
        prop_assert!(fixed_space_of(&space, &stab).unwrap().equal(&env, 1e-9).unwrap());
    }

    #[test]
    fn permutation_fixed_space_is_constant_on_cycles(
        perm in (2usize..=7).prop_flat_map(|n| Just((0..n).collect::<Vec<usize>>()).prop_shuffle()),
    ) {
        let n = perm.len();
        let space = Space::uniform(n, 3.0).unwrap();
        let g = SignedPermutation::new(perm, vec![1; n]).unwrap();
        let by_group = fixed_space_of(&space, std::slice::from_ref(&g)).unwrap();
        let by_cycles = g.cycle_partition().fixed_space(&space).unwrap();
        prop_assert!(by_group.equal(&by_cycles, 1e-9).unwrap());
    }

    #[test]
    fn cesaro_matches_spectral_projection(
        (n, els, raw) in (2usize..=6, 1usize..=3).prop_flat_map(|(n, k)| (
            Just(n),
            prop::collection::vec(signed_permutation(n), k),
            prop::collection::vec(0.05..1.0f64, k),
        )),
    ) {
        let space = Space::uniform(n, 3.0).unwrap();
        let total: f64 = raw.iter().sum();
        let c: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let op = ContractionOperator::convex_combination(&space, &c, &els).unwrap();
        let tol = 1e-6;
        let ces = cesaro_projection(&op, tol, 100_000).unwrap();
        let spec = spectral_projection(&op).unwrap();
        prop_assert!((&ces.projection - spec).norm() <= tol.max(1e-8));
    }

    #[test]
    fn hilbert_subspaces_are_one_complemented(
        (space, gens) in (2usize..=6).prop_flat_map(|n| (space_with(n, 2.0), prop::collection::vec(vector(n), 1..n))),
    ) {
        let y = span(&space, &gens);
        prop_assume!(y.dim() > 0 && y.dim() < space.n());
        let r = min_projection_norm(&y, &SearchConfig::default()).unwrap();
        prop_assert!((r.upper_bound - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn conditional_envelopes_are_one_complemented(
        (p, extra) in (3usize..=5).prop_flat_map(|n| (select(vec![1.0, 1.5, 3.0]), prop::collection::vec(structured(n), 1..=2))),
    ) {
        let space = Space::uniform(extra[0].len(), p).unwrap();
        let env = conditional_envelope(&unital(&space, &extra), LEVEL_TOL).unwrap();
        prop_assume!(env.dim() < space.n());
        let r = min_projection_norm(&env, &SearchConfig { iterations: 40, restarts: 0, ..Default::default() }).unwrap();
        prop_assert!(r.upper_bound <= 1.0 + 1e-6);
    }

    #[test]
    fn polyhedral_optimum_matches_extreme_point_evaluation(
        (weights, gens) in (3usize..=5).prop_flat_map(|n| (prop::collection::vec(select(vec![1.0, 2.0, 3.0]), n), prop::collection::vec(structured(n), 1..=2))),
        infinite in prop::bool::ANY,
    ) {
        let p = if infinite { f64::INFINITY } else { 1.0 };
        let space = Space::new(p, weights.clone()).unwrap();
        prop_assume!(gens.iter().any(|v| v.iter().any(|x| *x != 0.0)));
        let y = span(&space, &gens);
        prop_assume!(y.dim() < space.n());
        let r = min_projection_norm(&y, &SearchConfig::default()).unwrap();
        let m = &r.projection;
        let n = weights.len();
        // extreme points: ±e_j/μ_j for ℓ₁(μ), sign vectors for ℓ_∞
        let direct = if infinite {
            (0..n).map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
        } else {
            (0..n).map(|j| (0..n).map(|i| weights[i] * m[(i, j)].abs()).sum::<f64>() / weights[j]).fold(0.0, f64::max)
        };
        prop_assert!(r.exact);
        prop_assert!((direct - r.upper_bound).abs() <= 1e-7 * direct.max(1.0));
        prop_assert!((op_norm(&space, m, p).unwrap().value - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn json_round_trips(
        (space, gens, labels, g) in (2usize..=6, exponent()).prop_flat_map(|(n, p)| (
            space_with(n, p),
            prop::collection::vec(vector(n), 1..=2),
            prop::collection::vec(0..n, n),
            signed_permutation(n),
        )),
    ) {
        let s2: Space = serde_json::from_str(&serde_json::to_string(&space).unwrap()).unwrap();
        prop_assert_eq!(&s2, &space);
        prop_assume!(gens.iter().any(|v| v.iter().any(|x| x.abs() > 1e-3)));
        let y = span(&space, &gens);
        let file: envlab::subspace::SubspaceFile = serde_json::from_str(&serde_json::to_string(&y).unwrap()).unwrap();
        prop_assert!(Subspace::load(&space, &file).unwrap().equal(&y, 1e-9).unwrap());
        let part = Partition::from_labels(&labels);
        let p2: Partition = serde_json::from_str(&serde_json::to_string(&part).unwrap()).unwrap();
        prop_assert_eq!(p2, part);
        let g2: SignedPermutation = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        prop_assert_eq!(g2, g);
    }
}

fn y_image(space: &Space, y: &Subspace, g: &SignedPermutation) -> Subspace {
    let moved: Vec<Vec<f64>> = y.basis().iter().map(|b| g.act(b)).collect();
    Subspace::spanned_by(space, &moved, TOL).unwrap()
}
