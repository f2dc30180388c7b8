//! Property checks shared by the proptest target and the acceptance suite.
#![allow(dead_code)]

use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use torcon_core::arith::{rat, Int};
use torcon_core::discrepancy::{discrepancy_at, is_canonical_pair_toric, Canonicity};
use torcon_core::quotient::{cone_to_quotient, reid_tai_classify};
use torcon_core::{
    Cone, CyclicQuotientType, Fan, GermSpec, IntegerMatrix, LatticeVector, MonomialBranch, MonomialDivisorSpec,
    Rational,
};

// ---------------------------------------------------------------------------
// Smith normal form

pub fn matrix_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (2usize..=4).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(-9i64..=9, n), n))
}

pub fn check_snf(rows: &[Vec<i64>]) -> Result<(), TestCaseError> {
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    let m = IntegerMatrix::from_i64(&refs).unwrap();
    let det = m.determinant();
    let Ok(snf) = m.smith_normal_form() else {
        prop_assert!(det.is_zero());
        return Ok(());
    };
    prop_assert_eq!(snf.left.determinant().abs(), Int::from(1));
    prop_assert_eq!(snf.right.determinant().abs(), Int::from(1));
    let d = snf.left.mul(&m).mul(&snf.right);
    for i in 0..m.size() {
        for j in 0..m.size() {
            let want = if i == j { snf.diagonal[i].clone() } else { Int::zero() };
            prop_assert_eq!(d.get(i, j), &want);
        }
    }
    for w in snf.diagonal.windows(2) {
        prop_assert!(w[0].is_positive());
        prop_assert!((&w[1] % &w[0]).is_zero(), "divisibility chain broken: {:?}", snf.diagonal);
    }
    let prod: Int = snf.diagonal.iter().product();
    prop_assert_eq!(prod, det.abs());
    Ok(())
}

// ---------------------------------------------------------------------------
// star subdivision

/// A full simplicial cone with primitive generators and a lattice point
/// `sum n_i u_i` inside it.
pub fn cone_and_point() -> impl Strategy<Value = (Vec<Vec<i64>>, [i64; 3])> {
    (prop::collection::vec(prop::collection::vec(-5i64..=5, 3), 3), [0i64..=4, 0i64..=4, 0i64..=4])
        .prop_filter("nondegenerate with primitive generators and nonzero point", |(g, n)| {
            let vs: Vec<LatticeVector> = g.iter().map(|v| LatticeVector::from_i64(v)).collect();
            vs.iter().all(|v| v.is_primitive())
                && !IntegerMatrix::from_vectors(&vs).unwrap().determinant().is_zero()
                && n.iter().any(|&x| x > 0)
        })
}

pub fn check_star_subdivision(gens: &[Vec<i64>], n: [i64; 3]) -> Result<(), TestCaseError> {
    let us: Vec<LatticeVector> = gens.iter().map(|v| LatticeVector::from_i64(v)).collect();
    let sigma = Cone::new(us.clone()).unwrap();
    let det_sigma = sigma.multiplicity().unwrap();
    let raw = us
        .iter()
        .zip(n)
        .fold(LatticeVector::zero(3), |acc, (u, k)| acc.add(&u.scale(&Int::from(k))));
    let w = raw.primitive().unwrap();
    let content = raw.content();
    let fan = Fan::new(3, vec![sigma.clone()]).unwrap();
    let sub = fan.star_subdivide(&w);
    if us.contains(&w) {
        // subdividing at a ray changes nothing or is rejected
        return Ok(());
    }
    let sub = sub.unwrap();
    let positive = n.iter().filter(|&&k| k > 0).count();
    prop_assert_eq!(sub.cones().len(), positive);
    for (i, &k) in n.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let mut g = us.clone();
        g[i] = w.clone();
        let want = Rational::new(Int::from(k), content.clone()) * Rational::from_integer(det_sigma.clone());
        let piece = sub.cones().iter().find(|c| {
            let mut a = c.generators().to_vec();
            a.sort();
            let mut b = g.clone();
            b.sort();
            a == b
        });
        prop_assert!(piece.is_some(), "missing cone for index {}", i);
        let m = piece.unwrap().multiplicity().unwrap();
        prop_assert_eq!(Rational::from_integer(m), want);
    }
    // support is preserved on a grid of lattice points
    for a in -3i64..=3 {
        for b in -3i64..=3 {
            for c in -3i64..=3 {
                let p = LatticeVector::from_i64(&[a, b, c]);
                prop_assert_eq!(fan.contains(&p), sub.contains(&p), "support differs at {}", p);
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Reid–Tai

pub fn quotient_strategy() -> impl Strategy<Value = (u64, [i64; 3], u64, usize)> {
    (2u64..=40)
        .prop_flat_map(|r| (Just(r), [0..r as i64, 0..r as i64, 0..r as i64], 1..r, 0usize..6))
        .prop_filter("well formed", |(r, w, _, _)| w.iter().fold(*r as i64, |g, &x| g.gcd(&x)) == 1)
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

pub fn check_reid_tai(r: u64, w: [i64; 3], unit: u64, perm: usize) -> Result<(), TestCaseError> {
    let t = CyclicQuotientType::new(r, &w).unwrap();
    let class = reid_tai_classify(&t);
    if unit.gcd(&r) == 1 {
        let p = PERMS[perm];
        let moved: Vec<i64> = p.iter().map(|&i| w[i] * unit as i64).collect();
        let t2 = CyclicQuotientType::new(r, &moved).unwrap();
        prop_assert_eq!(reid_tai_classify(&t2), class);
        prop_assert_eq!(t2.normalize(), t.normalize());
    }
    // age(g) + age(g^-1) counts the coordinates g moves
    let ages = t.ages();
    for k in 1..r {
        let moved = w.iter().filter(|&&x| (k as i64 * x) % r as i64 != 0).count() as i64;
        let s = &ages[(k - 1) as usize] + &ages[(r - k - 1) as usize];
        prop_assert_eq!(s, rat(moved, 1));
    }
    Ok(())
}

pub fn check_cone_order(gens: &[Vec<i64>]) -> Result<(), TestCaseError> {
    let us: Vec<LatticeVector> = gens.iter().map(|v| LatticeVector::from_i64(v)).collect();
    let cone = Cone::new(us).unwrap();
    let det = cone.multiplicity().unwrap();
    if let Ok(t) = cone_to_quotient(&cone) {
        prop_assert_eq!(Int::from(t.order()), det);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// canonicity oracle

pub const ORACLE_BOUND: u64 = 20;

fn brute_force_smooth(spec: &MonomialDivisorSpec) -> Option<Vec<u64>> {
    let g = GermSpec::SmoothPoint;
    for s in 2..=ORACLE_BOUND {
        for a in 0..=s {
            for b in 0..=s - a {
                let c = s - a - b;
                let w = [a, b, c];
                if w.iter().filter(|&&x| x > 0).count() < 2 || a.gcd(&b).gcd(&c) != 1 {
                    continue;
                }
                let d = discrepancy_at(&g, &LatticeVector::from_i64(&[a as i64, b as i64, c as i64]), spec);
                if d.value.is_negative() {
                    return Some(w.to_vec());
                }
            }
        }
    }
    None
}

/// Random boundaries: up to three branches with up to three monomials of
/// exponents at most six each.
pub fn spec_strategy(nvars: usize, max_den: i64) -> impl Strategy<Value = MonomialDivisorSpec> {
    let mono = prop::collection::vec(0u64..=6, nvars);
    let branch = prop::collection::vec(mono, 1..=3);
    let coeff = (1i64..=max_den).prop_flat_map(|d| (1..=d.min(6), Just(d)));
    prop::collection::vec((coeff, branch), 1..=3).prop_map(|bs| {
        MonomialDivisorSpec::new(
            bs.into_iter()
                .map(|((n, d), exps)| (rat(n, d), MonomialBranch::new(exps, "random").unwrap()))
                .collect(),
        )
    })
}

/// The exact search agrees with the sweep over primitive weights of sum at
/// most `ORACLE_BOUND`; a witness beyond the sweep must be a genuine one.
pub fn check_canonical(spec: &MonomialDivisorSpec) -> Result<(), TestCaseError> {
    let germ = GermSpec::SmoothPoint;
    let exact = is_canonical_pair_toric(&germ, spec, true).unwrap();
    let brute = brute_force_smooth(spec);
    match (&exact.verdict, brute) {
        (Canonicity::Canonical, None) => {}
        (Canonicity::Canonical, Some(w)) => prop_assert!(false, "missed violation at {:?} for {}", w, spec),
        (Canonicity::NotCanonical { witness }, found) => {
            let again = discrepancy_at(&germ, &witness.valuation, spec);
            prop_assert!(again.value.is_negative());
            prop_assert!(witness.valuation.is_primitive());
            prop_assert!(witness.valuation.coords().iter().filter(|x| x.is_positive()).count() >= 2);
            if found.is_none() {
                let sum: Rational = germ.weights_of(&witness.valuation).into_iter().sum();
                prop_assert!(
                    sum > rat(ORACLE_BOUND as i64, 1),
                    "witness {} inside the brute-force range for {}",
                    witness.valuation,
                    spec
                );
            }
        }
    }
    Ok(())
}
