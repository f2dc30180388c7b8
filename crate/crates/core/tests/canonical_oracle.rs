//! The exact toric canonicity search against exhaustive enumeration.

mod support;

use num_traits::Signed;
use proptest::prelude::*;
use support::{check_canonical, spec_strategy};
use torcon_core::arith::rat;
use torcon_core::discrepancy::is_canonical_pair_toric;
use torcon_core::{GermSpec, MonomialBranch, MonomialDivisorSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn exact_search_matches_brute_force(spec in spec_strategy(3, 6)) {
        check_canonical(&spec)?;
    }

    #[test]
    fn small_coefficients_match_brute_force(spec in spec_strategy(3, 18)) {
        check_canonical(&spec)?;
    }
}

#[test]
fn cyclic_germ_agrees_with_enumeration() {
    // enumerate the scaled weights of 1/5(1,-2,2): W2 = -2 W1, W3 = 2 W1 mod 5
    let germ = GermSpec::cyclic(5, 2).unwrap();
    let specs = [
        "x1^2+x2^2+x3^2",
        "x1^3+x2*x3",
        "x1*x2+x3^4",
        "x1^5+x2^5+x3^5",
    ];
    for s in specs {
        for theta in [rat(1, 2), rat(1, 1), rat(2, 1)] {
            let spec = MonomialDivisorSpec::single(theta.clone(), MonomialBranch::parse(s, 3).unwrap());
            let exact = is_canonical_pair_toric(&germ, &spec, true).unwrap();
            let mut brute = None;
            'outer: for w1 in 0..60u64 {
                for w2 in 0..60u64 {
                    for w3 in 0..60u64 {
                        if (w2 + 2 * w1) % 5 != 0 || (w3 + 5 * 60 - 2 * w1) % 5 != 0 {
                            continue;
                        }
                        if [w1, w2, w3].iter().filter(|&&x| x > 0).count() < 1 {
                            continue;
                        }
                        let w: Vec<torcon_core::Rational> =
                            [w1, w2, w3].iter().map(|&x| rat(x as i64, 5)).collect();
                        // germ rays: multiples of the coordinate axes
                        if [w1, w2, w3].iter().filter(|&&x| x > 0).count() == 1 {
                            continue;
                        }
                        let sum: torcon_core::Rational = w.iter().cloned().sum();
                        let a = sum - rat(1, 1) - torcon_core::discrepancy::weight_multiplicity(&spec, &w);
                        if a.is_negative() {
                            brute = Some([w1, w2, w3]);
                            break 'outer;
                        }
                    }
                }
            }
            assert_eq!(exact.is_canonical(), brute.is_none(), "{theta} {s}: brute {brute:?}");
        }
    }
}
