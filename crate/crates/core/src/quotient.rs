//! Cyclic quotient singularities `1/r(w_1,...,w_n)`: extraction from simplicial
//! cones, normal forms and the Reid–Tai criterion.
//!
//! Orders and weights are machine integers: every order met here is the
//! multiplicity of a chart cone or a sweep bound, far below `u64::MAX`.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{solve_in_basis, IntegerMatrix, LatticeVector, Rational};
use crate::fan::Cone;
use crate::{Error, Result};

/// `C^n / Z_r` acting with weights `(w_1, ..., w_n)`, each reduced into `[0, r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicQuotientType {
    order: u64,
    weights: Vec<u64>,
    normalized: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReidTai {
    Smooth,
    Terminal,
    CanonicalNotTerminal,
    NotCanonical,
}

impl fmt::Display for ReidTai {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReidTai::Smooth => "smooth",
            ReidTai::Terminal => "terminal",
            ReidTai::CanonicalNotTerminal => "canonical, not terminal",
            ReidTai::NotCanonical => "not canonical",
        })
    }
}

impl CyclicQuotientType {
    /// Weights may be negative; they are reduced mod `r`.
    pub fn new(order: u64, weights: &[i64]) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameters("quotient order must be positive".into()));
        }
        let w: Vec<u64> = weights.iter().map(|&x| x.rem_euclid(order as i64) as u64).collect();
        Self::from_residues(order, w)
    }

    fn from_residues(order: u64, weights: Vec<u64>) -> Result<Self> {
        if !(2..=3).contains(&weights.len()) {
            return Err(Error::Shape(format!("quotient types have 2 or 3 weights, got {}", weights.len())));
        }
        let g = weights.iter().fold(order, |g, &w| g.gcd(&w));
        if order > 1 && g != 1 {
            return Err(Error::InvalidParameters(format!(
                "1/{order}{weights:?} is not well-formed: gcd with the order is {g}"
            )));
        }
        Ok(CyclicQuotientType { order, weights, normalized: false })
    }

    pub fn smooth(dim: usize) -> Self {
        CyclicQuotientType { order: 1, weights: vec![0; dim], normalized: true }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Lexicographically least weight tuple over all unit multiples and
    /// coordinate permutations.
    pub fn normalize(&self) -> CyclicQuotientType {
        if self.order == 1 {
            return Self::smooth(self.dim());
        }
        let weights = normal_form(self.order, &self.weights);
        CyclicQuotientType { order: self.order, weights, normalized: true }
    }

    /// `age(k) = sum_i frac(k w_i / r)` for `k = 1..r-1`.
    pub fn ages(&self) -> Vec<Rational> {
        let r = self.order;
        (1..r)
            .map(|k| {
                let s: u64 = self.weights.iter().map(|&w| (k * w) % r).sum();
                Rational::new(s.into(), r.into())
            })
            .collect()
    }

    /// The same quotient read as a surface label `1/r(1,b)`, when the first
    /// weight is a unit.
    pub fn surface_label(&self) -> Option<(u64, u64)> {
        if self.dim() != 2 {
            return None;
        }
        if self.order == 1 {
            return Some((1, 0));
        }
        let inv = mod_inverse(self.weights[0], self.order)?;
        Some((self.order, (self.weights[1] * inv) % self.order))
    }
}

impl fmt::Display for CyclicQuotientType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}(", self.order)?;
        for (i, w) in self.weights.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for CyclicQuotientType {
    type Err = Error;

    /// Parses `1/r(w1,w2,w3)`; negative weights are allowed.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected 1/r(w1,...), got {s:?}"));
        let s = s.trim().replace('−', "-");
        let rest = s.strip_prefix("1/").ok_or_else(bad)?;
        let (r, tail) = rest.split_once('(').ok_or_else(bad)?;
        let inner = tail.strip_suffix(')').ok_or_else(bad)?;
        let r: u64 = r.trim().parse().map_err(|_| bad())?;
        let w = inner
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        CyclicQuotientType::new(r, &w)
    }
}

impl Serialize for CyclicQuotientType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CyclicQuotientType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn mod_inverse(a: u64, r: u64) -> Option<u64> {
    let e = (a as i64).extended_gcd(&(r as i64));
    (e.gcd == 1).then(|| e.x.rem_euclid(r as i64) as u64)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    match n {
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
    }
}

fn units(r: u64) -> impl Iterator<Item = u64> {
    (1..r.max(2)).filter(move |u| u.gcd(&r) == 1)
}

/// Every spelling `perm(u * w mod r)` of the type.
fn orbit(r: u64, w: &[u64]) -> Vec<Vec<u64>> {
    let perms = permutations(w.len());
    let mut out = vec![];
    for u in units(r) {
        let m: Vec<u64> = w.iter().map(|&x| (u * x) % r).collect();
        for p in &perms {
            out.push(p.iter().map(|&i| m[i]).collect());
        }
    }
    out
}

fn normal_form(r: u64, w: &[u64]) -> Vec<u64> {
    let mut best: Option<Vec<u64>> = None;
    for u in units(r) {
        let mut m: Vec<u64> = w.iter().map(|&x| (u * x) % r).collect();
        m.sort_unstable();
        if best.as_ref().is_none_or(|b| m < *b) {
            best = Some(m);
        }
    }
    best.unwrap_or_else(|| w.to_vec())
}

/// The quotient `N / (Z-span of the generators)` of a full simplicial cone,
/// presented as `1/r(w)` with respect to the generators.
pub fn cone_to_quotient(cone: &Cone) -> Result<CyclicQuotientType> {
    if !(cone.is_simplicial() && cone.is_full()) {
        return Err(Error::Shape("cone_to_quotient needs a full simplicial cone".into()));
    }
    let gens = cone.generators();
    let n = gens.len();
    // columns = generators
    let m = IntegerMatrix::from_vectors(gens)?.transpose();
    let snf = m.smith_normal_form()?;
    let r_big = snf.diagonal[n - 1].clone();
    if snf.diagonal[..n - 1].iter().any(|d| !d.is_one()) {
        return Err(Error::InvalidParameters(format!(
            "quotient group of {cone} is not cyclic: invariants {:?}",
            snf.diagonal.iter().map(|d| d.to_string()).collect::<Vec<_>>()
        )));
    }
    let r = r_big
        .to_u64()
        .ok_or_else(|| Error::InvalidParameters(format!("quotient order {r_big} too large")))?;
    if r == 1 {
        return Ok(CyclicQuotientType::smooth(n));
    }
    // generator y0 of the group: left * y0 = e_n
    let left_cols: Vec<LatticeVector> = snf.left.transpose().rows().iter().cloned().map(LatticeVector).collect();
    let y0_rat = solve_in_basis(&left_cols, &LatticeVector::unit(n, n - 1))?;
    let y0 = LatticeVector(y0_rat.iter().map(|x| x.to_integer()).collect());
    let lambda = solve_in_basis(gens, &y0)?;
    let weights: Vec<i64> = lambda
        .iter()
        .map(|l| {
            let x = l * Rational::from_integer(r_big.clone());
            debug_assert!(x.is_integer());
            x.to_integer().mod_floor(&r_big).to_i64().expect("residue below order")
        })
        .collect();
    CyclicQuotientType::new(r, &weights)
}

/// Reid–Tai: terminal iff every age exceeds one, canonical iff every age is
/// at least one. Elements with `gcd(k, r) > 1` are included.
pub fn reid_tai_classify(t: &CyclicQuotientType) -> ReidTai {
    if t.order == 1 {
        return ReidTai::Smooth;
    }
    classify_residues(t.order, &t.weights)
}

fn classify_residues(r: u64, w: &[u64]) -> ReidTai {
    let mut all_above = true;
    for k in 1..r {
        let s: u64 = w.iter().map(|&x| (k * x) % r).sum();
        if s < r {
            return ReidTai::NotCanonical;
        }
        if s == r {
            all_above = false;
        }
    }
    if all_above {
        ReidTai::Terminal
    } else {
        ReidTai::CanonicalNotTerminal
    }
}

/// Exhaustive check of the terminal lemma up to a bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TerminalLemmaReport {
    pub r_max: u64,
    /// For each order, the normal forms of the terminal types found.
    pub terminal_forms: Vec<(u64, Vec<CyclicQuotientType>)>,
    pub types_checked: u64,
    /// Weight triples where terminality and membership in the
    /// `1/r(1,-q,q)` orbits disagree.
    pub counterexamples: Vec<CyclicQuotientType>,
}

/// For every `2 <= r <= r_max` and every well-formed weight triple, checks
/// that the triple is terminal iff it is a unit/permutation image of
/// `(1, -q, q)` with `gcd(q, r) = 1`.
pub fn verify_terminal_lemma(r_max: u64) -> Result<TerminalLemmaReport> {
    if r_max < 2 {
        return Err(Error::InvalidParameters("r_max must be at least 2".into()));
    }
    let per_r: Vec<(u64, Vec<CyclicQuotientType>, u64, Vec<CyclicQuotientType>)> =
        (2..=r_max).into_par_iter().map(sweep_order).collect();
    let mut report = TerminalLemmaReport { r_max, terminal_forms: vec![], types_checked: 0, counterexamples: vec![] };
    for (r, forms, checked, bad) in per_r {
        report.terminal_forms.push((r, forms));
        report.types_checked += checked;
        report.counterexamples.extend(bad);
    }
    Ok(report)
}

fn sweep_order(r: u64) -> (u64, Vec<CyclicQuotientType>, u64, Vec<CyclicQuotientType>) {
    let mut expected: HashSet<Vec<u64>> = HashSet::new();
    for q in 1..r {
        if q.gcd(&r) == 1 {
            expected.extend(orbit(r, &[1, r - q, q]));
        }
    }
    let rows: Vec<(u64, Vec<Vec<u64>>, Vec<Vec<u64>>)> = (0..r)
        .into_par_iter()
        .map(|a| {
            let mut checked = 0;
            let mut terminal = vec![];
            let mut bad = vec![];
            for b in 0..r {
                for c in 0..r {
                    if a.gcd(&b).gcd(&c).gcd(&r) != 1 {
                        continue;
                    }
                    checked += 1;
                    let w = vec![a, b, c];
                    let is_terminal = classify_residues(r, &w) == ReidTai::Terminal;
                    if is_terminal != expected.contains(&w) {
                        bad.push(w.clone());
                    }
                    if is_terminal {
                        terminal.push(w);
                    }
                }
            }
            (checked, terminal, bad)
        })
        .collect();
    let mut forms: Vec<Vec<u64>> = vec![];
    let mut checked = 0;
    let mut bad = vec![];
    for (n, t, b) in rows {
        checked += n;
        forms.extend(t.iter().map(|w| normal_form(r, w)));
        bad.extend(b);
    }
    forms.sort();
    forms.dedup();
    let mk = |w: Vec<u64>, normalized| CyclicQuotientType { order: r, weights: w, normalized };
    (
        r,
        forms.into_iter().map(|w| mk(w, true)).collect(),
        checked,
        bad.into_iter().map(|w| mk(w, false)).collect(),
    )
}
