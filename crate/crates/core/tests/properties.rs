mod common;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use torsion_lab::counting::{
    default_primes, enumerate_rational_points, merge_shards, orbit_degree_lower_bound, shard_plan,
};
use torsion_lab::lattice::{
    complex_closure, fc_closure, full_closure, lattice_intersection, subspace_classify, subspace_span, Frame,
};
use torsion_lab::pipeline::crossover;
use torsion_lab::puiseux::{is_squarefree_in_y, linear_branch_direction, puiseux_expand, ExactBivariate, PuiseuxBranch};
use torsion_lab::numeric::C64;
use torsion_lab::uniformization::{membership_test, CurveModel, RationalTorusPoint, VarietyDescriptor};
use torsion_lab::{ComplexStructure, Error, Lattice, QuadScalar, Subspace};

fn quad(a: i64, b: i64, d: i64) -> QuadScalar {
    format!("{a}+{b}*sqrt({d})").parse().unwrap()
}

fn q(s: &str) -> QuadScalar {
    s.parse().unwrap()
}

fn field() -> impl Strategy<Value = i64> {
    prop::sample::select(vec![2i64, 3, 5])
}

/// Coefficient pairs `(a, b)` of `a + b sqrt(d)` for `k` vectors in R^4.
fn raw_vectors(k: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Vec<(i64, i64)>>> {
    prop::collection::vec(prop::collection::vec((-2i64..=2, -2i64..=2), 4), k)
}

fn span(d: i64, raw: &[Vec<(i64, i64)>]) -> Subspace {
    let vs: Vec<Vec<QuadScalar>> = raw.iter().map(|v| v.iter().map(|&(a, b)| quad(a, b, d)).collect()).collect();
    subspace_span(Frame::Ambient, 4, &vs).unwrap()
}

/// Z(1,0) + Z(i,1) + Z(1,i) + Z(1,sqrt d) in C^2.
fn lattice(d: i64) -> (Lattice, ComplexStructure) {
    let v = |xs: [&str; 4]| xs.iter().map(|s| q(s)).collect::<Vec<_>>();
    let sd = format!("sqrt({d})");
    let lat = Lattice::new(vec![v(["1", "0", "0", "0"]), v(["0", "1", "1", "0"]), v(["1", "0", "0", "1"]), v(["1", "0", &sd, "0"])]).unwrap();
    let j = ComplexStructure::standard(&lat).unwrap();
    (lat, j)
}

/// Unimodular matrix as a product of elementary row additions.
fn unimodular() -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0usize..4, 0usize..4, -2i64..=2), 1..6).prop_map(|ops| {
        let mut u: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| i64::from(i == j)).collect()).collect();
        for (i, j, c) in ops {
            if i != j {
                for k in 0..4 {
                    u[i][k] += c * u[j][k];
                }
            }
        }
        u
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn quad_field_laws(a in -20i64..=20, b in -20i64..=20, c in -20i64..=20, e in -20i64..=20, d in field()) {
        let (x, y) = (quad(a, b, d), quad(c, e, d));
        prop_assert_eq!((x.clone() + y.clone()) - y.clone(), x.clone());
        prop_assert_eq!((x.clone() * y.clone()).norm(), x.norm() * y.norm());
        if (c, e) != (0, 0) {
            prop_assert_eq!((x.clone() * y.clone()) * y.recip(), x);
        }
    }

    #[test]
    fn closure_laws(d in field(), h in raw_vectors(1..=3), extra in raw_vectors(1..=2)) {
        let (lat, j) = lattice(d);
        let h1 = span(d, &h);
        let h2 = h1.join(&span(d, &extra));
        let f = |s: &Subspace| full_closure(s, &lat).unwrap();
        let c = |s: &Subspace| complex_closure(s, &j).unwrap();
        let fc = |s: &Subspace| fc_closure(s, &lat, &j).unwrap();
        let (fh, ch, fch) = (f(&h1), c(&h1), fc(&h1));
        prop_assert!(h1.is_subspace_of(&fh) && h1.is_subspace_of(&ch) && h1.is_subspace_of(&fch));
        prop_assert_eq!(f(&fh), fh.clone());
        prop_assert_eq!(c(&ch), ch.clone());
        prop_assert_eq!(fc(&fch), fch.clone());
        prop_assert!(fh.is_subspace_of(&f(&h2)));
        prop_assert!(ch.is_subspace_of(&c(&h2)));
        prop_assert!(fch.is_subspace_of(&fc(&h2)));
        let class = subspace_classify(&fch, &lat, &j).unwrap();
        prop_assert!(class.is_full && class.is_complex);
    }

    #[test]
    fn full_subspaces_are_spanned_by_their_lattice_points(d in field(), h in raw_vectors(1..=3)) {
        let (lat, j) = lattice(d);
        let k = fc_closure(&span(d, &h), &lat, &j).unwrap();
        let inter = lattice_intersection(&k, &lat).unwrap();
        let vs: Vec<Vec<QuadScalar>> =
            inter.basis.iter().map(|v| v.iter().map(|x| QuadScalar::rational(BigRational::from_integer(x.clone()))).collect()).collect();
        prop_assert_eq!(subspace_span(Frame::Lattice, 4, &vs).unwrap(), k.to_frame(Frame::Lattice, &lat).unwrap());
    }

    #[test]
    fn closures_are_frame_invariant(d in field(), h in raw_vectors(1..=2), u in unimodular()) {
        let (lat, j) = lattice(d);
        let lat2 = lat.change_basis(&u).unwrap();
        let j2 = ComplexStructure::standard(&lat2).unwrap();
        let h = span(d, &h);
        prop_assert_eq!(full_closure(&h, &lat).unwrap(), full_closure(&h, &lat2).unwrap());
        prop_assert_eq!(fc_closure(&h, &lat, &j).unwrap(), fc_closure(&h, &lat2, &j2).unwrap());
    }

    #[test]
    fn branch_count_and_directions(k in 1u32..=3, a in -3i64..=3, m in 0u32..=3, c in 1i64..=4) {
        // y^k + a x^m y - c x^k: the leading part y^k - c x^k forces linear branches.
        let s = format!("y^{k} + {a}*x^{m}*y - {c}*x^{k}");
        let g = ExactBivariate::parse(&s).unwrap();
        prop_assume!(is_squarefree_in_y(&g));
        let Ok(branches) = puiseux_expand(&g, 4) else { return Ok(()) };
        let total: u32 = branches.iter().map(|b| b.ramification).sum();
        prop_assert_eq!(total, g.deg_y(), "{}", s);
        for b in &branches {
            if let Some(dir) = linear_branch_direction(&[PuiseuxBranch::identity(0), b.clone()]) {
                prop_assert!(dir.alpha[0].contains(C64::new(1.0, 0.0)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn membership_is_lattice_periodic(k in prop::collection::vec(0i64..6, 4), axis in 0usize..4) {
        let t = common::torus(&[("1", "i"), ("1", "2i")]);
        let x = VarietyDescriptor::parse(&["y1*y2 - x1 - 3"], 2).unwrap();
        let r = RationalTorusPoint::from_grid(&k, 6);
        let mut shifted = r.coords().to_vec();
        shifted[axis] += BigRational::from_integer(BigInt::from(1));
        let s = RationalTorusPoint::new(shifted);
        prop_assert_eq!(membership_test(&x, &r, &t, 1e-8).unwrap(), membership_test(&x, &s, &t, 1e-8).unwrap());
    }

    #[test]
    fn denominator_is_the_torsion_order(k in prop::collection::vec(-30i64..30, 4), t in 1u64..16) {
        let r = RationalTorusPoint::from_grid(&k, t);
        let den: u64 = r.denominator().try_into().unwrap();
        prop_assert_eq!(t % den, 0);
        let order = (1..=t).find(|&n| r.scale(n as i64).coords().iter().all(|c| c.is_integer())).unwrap();
        prop_assert_eq!(order, den);
    }

    #[test]
    fn shard_merge_equals_unsharded(t in 1u64..=5, n in 1u64..=7) {
        let torus = common::torus(&[("1", "i"), ("1", "i")]);
        let x = VarietyDescriptor::parse(&["y1*y2 - x1*x2 - 1"], 2).unwrap();
        let whole = enumerate_rational_points(&x, &torus, t, 1e-8, None).unwrap();
        let total = t.pow(4);
        let mut parts: Vec<_> =
            shard_plan(total, n).into_iter().map(|r| enumerate_rational_points(&x, &torus, t, 1e-8, Some(r)).unwrap()).collect();
        parts.reverse();
        let mut merged = merge_shards(parts).unwrap();
        merged.seconds = whole.seconds;
        prop_assert_eq!(merged, whole);
    }

    #[test]
    fn divisibility_monotonicity(t1 in 1u64..=3, m in 2u64..=3) {
        let torus = common::torus(&[("1", "i"), ("1", "2i")]);
        let x = VarietyDescriptor::parse(&["x1 - x2"], 2).unwrap();
        let a = enumerate_rational_points(&x, &torus, t1, 1e-8, None).unwrap();
        let b = enumerate_rational_points(&x, &torus, t1 * m, 1e-8, None).unwrap();
        prop_assert!(a.n_in <= b.n_in + b.n_uncertain);
    }

    #[test]
    fn more_primes_never_lower_the_bound(curve in 0usize..4, t in 2u64..=9, keep in prop::collection::vec(any::<bool>(), 20)) {
        let (a, b) = [(1, 0), (-1, 0), (0, 2), (-2, 3)][curve];
        let curve = CurveModel::from_ints(a, b).unwrap();
        let all: Vec<u64> = default_primes().into_iter().take(20).collect();
        let subset: Vec<u64> = all.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
        let bound = |ps: &[u64]| match orbit_degree_lower_bound(&curve, t, ps) {
            Ok(r) => r.lower_bound,
            Err(Error::AllPrimesBad) => 1,
            Err(e) => panic!("{e}"),
        };
        prop_assert!(bound(&subset) <= bound(&all));
        prop_assert!(bound(&subset) >= 1);
    }

    #[test]
    fn crossover_is_stable_under_extension(
        base in prop::collection::vec((1u64..50, 0i64..50), 1..10),
        ext in prop::collection::vec((1u64..50, 0i64..50), 1..6),
    ) {
        let table = |rows: &[(u64, i64)]| -> (Vec<u64>, BTreeMap<u64, u64>, BTreeMap<u64, i64>) {
            let ts = (1..=rows.len() as u64).collect();
            (ts, rows.iter().zip(1u64..).map(|(r, t)| (t, r.0)).collect(), rows.iter().zip(1u64..).map(|(r, t)| (t, r.1)).collect())
        };
        let (ts, b, c) = table(&base);
        let before = crossover(&ts, &b, &c);
        let all: Vec<(u64, i64)> = base.iter().chain(&ext).copied().collect();
        let (ts2, b2, c2) = table(&all);
        let after = crossover(&ts2, &b2, &c2);
        if ext.iter().all(|&(bound, count)| bound as i64 > count) {
            prop_assert_eq!(after, before.or(Some(base.len() as u64 + 1)));
        } else {
            let last_bad = all.iter().zip(1u64..).filter(|(r, _)| r.0 as i64 <= r.1).map(|(_, t)| t).max().unwrap();
            prop_assert!(after.map_or(true, |t| t > last_bad));
        }
    }
}
