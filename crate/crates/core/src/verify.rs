//! Reproduction checklist: every published number and table the engine can
//! recompute, evaluated from first principles.

use std::time::{Duration, Instant};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{fmt_rational, rat, Rational};
use crate::classifier::{build_report, check_conditions, enumerate_types, ContractionType, Family, GermSpec};
use crate::discrepancy::{cyclic_obstruction, lc_decompose_2d, nonplt_bound, MonomialBranch, MonomialDivisorSpec};
use crate::quotient::{verify_terminal_lemma, CyclicQuotientType};
use crate::surface::{gamma_tilde_sq, gamma_tilde_sq_star, odp_closed_form};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: u128,
    pub limit_ms: u128,
}

/// One named check with its time budget.
pub struct Check {
    pub name: &'static str,
    pub limit: Duration,
    pub run: fn() -> Result<(bool, String)>,
}

pub fn checks() -> Vec<Check> {
    let s = Duration::from_secs;
    vec![
        Check { name: "exceptional Gamma~^2 (E6, E7, E8)", limit: s(1), run: exceptional_values },
        Check { name: "A3 special Gamma~^2 = -5", limit: s(1), run: a3_special },
        Check { name: "A_n / D_n closed forms", limit: s(10), run: closed_form_sweeps },
        Check { name: "ODP closed form vs star fan", limit: s(30), run: odp_sweep },
        Check { name: "terminal lemma, r <= 60", limit: s(60), run: terminal_lemma },
        Check { name: "singularity lists", limit: s(5), run: singularity_lists },
        Check { name: "conditions A, B, C", limit: s(60), run: conditions },
        Check { name: "cyclic germs excluded, r <= 30", limit: s(10), run: cyclic_exclusion },
        Check { name: "two-dimensional decomposition example", limit: s(1), run: decomposition_example },
        Check { name: "non-plt bound, r <= 100", limit: s(5), run: nonplt_sweep },
    ]
}

pub fn run_check(c: &Check) -> CheckResult {
    let t = Instant::now();
    let out = (c.run)();
    let elapsed = t.elapsed();
    let (ok, detail) = match out {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= c.limit;
    let detail = if in_time { detail } else { format!("{detail}; over time budget") };
    CheckResult {
        name: c.name.to_string(),
        passed: ok && in_time,
        detail,
        elapsed_ms: elapsed.as_millis(),
        limit_ms: c.limit.as_millis(),
    }
}

pub fn run_all() -> Vec<CheckResult> {
    checks().iter().map(run_check).collect()
}

fn exceptional_values() -> Result<(bool, String)> {
    let mut ok = true;
    let mut out = vec![];
    for (s, want) in [("E6", rat(-13, 6)), ("E7", rat(-19, 12)), ("E8", rat(-31, 30))] {
        let t: ContractionType = s.parse()?;
        let got = gamma_tilde_sq(&t)?;
        ok &= got == want;
        out.push(format!("{s}: {}", fmt_rational(&got)));
    }
    Ok((ok, out.join(", ")))
}

fn a3_special() -> Result<(bool, String)> {
    let got = gamma_tilde_sq(&ContractionType::a3_special())?;
    Ok((got == rat(-5, 1), fmt_rational(&got)))
}

fn an_closed_form(a2: u64, a3: u64, d1: u64) -> Rational {
    let (a2, a3, d1) = (a2 as i64, a3 as i64, d1 as i64);
    -(rat(a2 + a3, d1 * a2 * a3) + rat((a2 + a3) * (a2 + a3), a2 * a3))
}

fn closed_form_sweeps() -> Result<(bool, String)> {
    let mut n = 0;
    for d1 in 1..=10 {
        for a2 in 1..=20u64 {
            for a3 in 1..=20u64 {
                if a2.gcd(&a3) != 1 {
                    continue;
                }
                let got = gamma_tilde_sq(&ContractionType::an(a2, a3, d1)?)?;
                if got != an_closed_form(a2, a3, d1) {
                    return Ok((false, format!("A_n mismatch at a2={a2}, a3={a3}, d1={d1}")));
                }
                n += 1;
            }
        }
    }
    for k in 1..=20u64 {
        let ki = k as i64;
        let even = gamma_tilde_sq(&ContractionType::new(Family::DEven { k }, false)?)?;
        if even != -(rat(1, 2 * ki) + rat(2 * ki + 1, ki)) {
            return Ok((false, format!("D_(2k+2) mismatch at k={k}")));
        }
        n += 1;
        if k >= 2 {
            let odd = gamma_tilde_sq(&ContractionType::new(Family::DOdd { k }, false)?)?;
            if odd != -(rat(1, 2 * ki - 1) + rat(4 * ki, 2 * ki - 1)) {
                return Ok((false, format!("D_(2k+1) mismatch at k={k}")));
            }
            n += 1;
        }
    }
    Ok((true, format!("{n} types agree")))
}

fn odp_sweep() -> Result<(bool, String)> {
    let mut n = 0;
    for t in enumerate_types(&GermSpec::OrdinaryDoublePoint, 15) {
        let w = t.weights();
        let star = gamma_tilde_sq_star(&GermSpec::OrdinaryDoublePoint, &w, t.phi_degree())?.value;
        if star != odp_closed_form(w[1], w[2], w[3]) {
            return Ok((false, format!("mismatch at {t}: star {}", fmt_rational(&star))));
        }
        n += 1;
    }
    Ok((true, format!("{n} weight vectors agree")))
}

fn terminal_lemma() -> Result<(bool, String)> {
    let r = verify_terminal_lemma(60)?;
    let ok = r.counterexamples.is_empty();
    Ok((ok, format!("{} types checked, {} counterexamples", r.types_checked, r.counterexamples.len())))
}

fn norm(r: u64, w: &[i64]) -> Result<String> {
    Ok(CyclicQuotientType::new(r, w)?.normalize().to_string())
}

fn list_matches(t: &ContractionType, want: Vec<String>) -> Result<bool> {
    let mut got = build_report(t)?.singularity_types();
    let mut want = want;
    got.sort();
    want.sort();
    Ok(got == want)
}

fn singularity_lists() -> Result<(bool, String)> {
    let mut bad = vec![];
    let cases: Vec<(&str, Vec<String>)> = vec![
        ("E6", vec![norm(3, &[1, 1, -1])?, norm(3, &[1, 1, -1])?, norm(2, &[1, 1, 1])?]),
        ("E7", vec![norm(3, &[1, 1, -1])?, norm(4, &[3, 1, -1])?, norm(2, &[1, 1, 1])?]),
        ("E8", vec![norm(5, &[1, 1, -1])?, norm(3, &[1, 1, -1])?, norm(2, &[1, 1, 1])?]),
    ];
    for (s, want) in cases {
        if !list_matches(&s.parse()?, want)? {
            bad.push(s.to_string());
        }
    }
    for (a2, a3, d1) in [(1u64, 2u64, 2u64), (2, 3, 1), (3, 5, 2), (1, 4, 3), (4, 7, 1)] {
        let (p, q) = ((a2 * d1) as i64, (a3 * d1) as i64);
        let mut want = vec![];
        for (ord, other) in [(p, q), (q, p)] {
            if ord > 1 {
                want.push(norm(ord as u64, &[1, other + 1, -1])?);
            }
        }
        let t = ContractionType::an(a2, a3, d1)?;
        if !list_matches(&t, want)? {
            bad.push(t.to_string());
        }
    }
    for (b2, b3, b4) in [(2u64, 2u64, 1u64), (3, 2, 2), (4, 3, 2), (6, 4, 3), (9, 5, 5)] {
        let mut want = vec![];
        for b in [b3, b4] {
            if b > 1 {
                want.push(norm(b, &[1, b2 as i64 + 1, -1])?);
            }
        }
        let t = ContractionType::new(Family::OdpA { b2, b3, b4 }, false)?;
        if !list_matches(&t, want)? {
            bad.push(t.to_string());
        }
    }
    Ok((bad.is_empty(), if bad.is_empty() { "13 types match".into() } else { format!("mismatch: {}", bad.join(", ")) }))
}

fn conditions() -> Result<(bool, String)> {
    use rayon::prelude::*;
    let mut types = enumerate_types(&GermSpec::SmoothPoint, 10);
    types.extend(enumerate_types(&GermSpec::OrdinaryDoublePoint, 10));
    let bad: Vec<String> = types
        .par_iter()
        .filter_map(|t| match check_conditions(&t.germ(), t) {
            Ok(c) if c.all() && c.c_value.is_zero() => None,
            Ok(c) => Some(format!("{t}: {}", c.failing.join("; "))),
            Err(e) => Some(format!("{t}: {e}")),
        })
        .collect();
    let ok = bad.is_empty();
    Ok((ok, if ok { format!("{} types satisfy A, B, C", types.len()) } else { bad.join(", ") }))
}

fn cyclic_exclusion() -> Result<(bool, String)> {
    let mut n = 0;
    for r in 2..=30u64 {
        for q in 1..r {
            if q.gcd(&r) != 1 {
                continue;
            }
            let g = GermSpec::cyclic(r, q)?;
            let w = cyclic_obstruction(r, q)?;
            if !enumerate_types(&g, 50).is_empty() || !w.value.is_negative() {
                return Ok((false, format!("cyclic:{r},{q} not excluded")));
            }
            n += 1;
        }
    }
    Ok((true, format!("{n} germs, each with a negative discrepancy witness")))
}

fn decomposition_example() -> Result<(bool, String)> {
    let spec = MonomialDivisorSpec::single(rat(5, 6), MonomialBranch::parse("x^2+y^3", 2)?);
    let Some(d) = lc_decompose_2d(&spec)? else {
        return Ok((false, "no decomposition".into()));
    };
    let s = &d.splits[0];
    let ok = d.orders == vec![(2, 3)]
        && s.theta_prime == rat(1, 2)
        && s.theta_double_prime == rat(1, 3)
        && d.x_sum.is_one()
        && d.y_sum.is_one()
        && d.equality;
    Ok((ok, format!("(theta', theta'') = ({}, {})", fmt_rational(&s.theta_prime), fmt_rational(&s.theta_double_prime))))
}

fn nonplt_sweep() -> Result<(bool, String)> {
    let z = Rational::zero();
    let mut worst: Option<Rational> = None;
    for r in 2..=100u64 {
        for q in 1..r {
            if q.gcd(&r) != 1 {
                continue;
            }
            let b = nonplt_bound(r, q, &z, &z)?.bound;
            if b > rat(-1, 1) {
                return Ok((false, format!("bound {} > -1 at r={r}, q={q}", fmt_rational(&b))));
            }
            if worst.as_ref().is_none_or(|w| &b > w) {
                worst = Some(b);
            }
        }
    }
    Ok((true, format!("largest bound {}", fmt_rational(&worst.unwrap_or_default()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::gamma_tilde_sq_wpp;

    #[test]
    fn quick_checks_pass() {
        for c in checks() {
            if c.limit <= Duration::from_secs(1) {
                let r = run_check(&c);
                assert!(r.passed, "{}: {}", r.name, r.detail);
            }
        }
    }

    #[test]
    fn an_closed_form_matches_star_route() {
        for (a2, a3, d1) in [(1u64, 1u64, 1u64), (2, 3, 2), (1, 4, 3)] {
            let t = ContractionType::an(a2, a3, d1).unwrap();
            let w = t.weights();
            let wpp = gamma_tilde_sq_wpp([w[0], w[1], w[2]], t.phi_degree()).unwrap().value;
            let star = gamma_tilde_sq_star(&GermSpec::SmoothPoint, &w, t.phi_degree()).unwrap().value;
            assert_eq!(wpp, an_closed_form(a2, a3, d1));
            assert_eq!(star, wpp);
        }
    }
}
