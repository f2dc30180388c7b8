//! Contraction types over terminal toric germs, the three conditions on the
//! designated polynomial, and full reports with chart singularities.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{basis_completing, fmt_rational, rat, LatticeVector, Rational};
use crate::discrepancy::{
    cyclic_obstruction, is_canonical_pair_toric, toric_log_discrepancy_minus_one, Canonicity, DiscrepancyResult,
    MonomialBranch, MonomialDivisorSpec,
};
use crate::fan::{saturation_complement, two_cone_index, Cone, Fan};
pub use crate::fan::GermSpec;
use crate::quotient::{cone_to_quotient, reid_tai_classify, CyclicQuotientType, ReidTai};
use crate::surface::{gamma_tilde_sq, weights_decomposition, SurfaceModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    /// Weights `(1, a2 d1, a3 d1)`.
    An { a2: u64, a3: u64, d1: u64 },
    /// `D_{2k+2}`, weights `(2, 2k, 2k+1)`.
    DEven { k: u64 },
    /// `D_{2k+1}`, weights `(2, 2k-1, 2k)`.
    DOdd { k: u64 },
    E6,
    E7,
    E8,
    /// Over the double point, weights `(1, b2, b3, b4)`.
    OdpA { b2: u64, b3: u64, b4: u64 },
}

/// A non-toric divisorial contraction type together with its designated
/// polynomial `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractionType {
    family: Family,
    /// `phi = x1 x2^2 + x3^2` up to renaming (A3 with `a2 = a3 = 1, d1 = 2`, and `D_n`).
    special_phi: bool,
}

impl ContractionType {
    pub fn new(family: Family, special_phi: bool) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParameters(m));
        match family {
            Family::An { a2, a3, d1 } => {
                if a2 == 0 || a3 == 0 || d1 == 0 {
                    return bad("A_n needs positive a2, a3, d1".into());
                }
                if a2.gcd(&a3) != 1 {
                    return bad(format!("A_n needs gcd(a2, a3) = 1, got a2={a2}, a3={a3}"));
                }
                if special_phi && (a2, a3, d1) != (1, 1, 2) {
                    return bad("the special polynomial occurs for A_n only with a2 = a3 = 1, d1 = 2".into());
                }
            }
            Family::DEven { k } if k < 1 => return bad("D_{2k+2} needs k >= 1".into()),
            Family::DOdd { k } if k < 2 => return bad("D_{2k+1} needs k >= 2".into()),
            Family::OdpA { b2, b3, b4 } => {
                if b2 == 0 || b3 == 0 || b4 == 0 || 1 + b2 != b3 + b4 {
                    return bad(format!("ODP type needs positive weights with 1 + b2 = b3 + b4, got ({b2};{b3},{b4})"));
                }
            }
            _ => {}
        }
        if special_phi && matches!(family, Family::E6 | Family::E7 | Family::E8 | Family::OdpA { .. }) {
            return bad("the special polynomial occurs only for A_3 and D_n".into());
        }
        Ok(ContractionType { family, special_phi })
    }

    pub fn an(a2: u64, a3: u64, d1: u64) -> Result<Self> {
        Self::new(Family::An { a2, a3, d1 }, false)
    }

    /// `D_n`, `n >= 4`.
    pub fn d(n: u64, special: bool) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameters(format!("D_n needs n >= 4, got {n}")));
        }
        let f = if n % 2 == 0 { Family::DEven { k: (n - 2) / 2 } } else { Family::DOdd { k: (n - 1) / 2 } };
        Self::new(f, special)
    }

    pub fn a3_special() -> Self {
        ContractionType { family: Family::An { a2: 1, a3: 1, d1: 2 }, special_phi: true }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn special_phi(&self) -> bool {
        self.special_phi
    }

    pub fn germ(&self) -> GermSpec {
        match self.family {
            Family::OdpA { .. } => GermSpec::OrdinaryDoublePoint,
            _ => GermSpec::SmoothPoint,
        }
    }

    pub fn weights(&self) -> Vec<u64> {
        match self.family {
            Family::An { a2, a3, d1 } => vec![1, a2 * d1, a3 * d1],
            Family::DEven { k } => vec![2, 2 * k, 2 * k + 1],
            Family::DOdd { k } => vec![2, 2 * k - 1, 2 * k],
            Family::E6 => vec![3, 4, 6],
            Family::E7 => vec![4, 6, 9],
            Family::E8 => vec![6, 10, 15],
            Family::OdpA { b2, b3, b4 } => vec![1, b2, b3, b4],
        }
    }

    /// Index of the Du Val singularity `{phi = 0}` (the `n` of `A_n`, `D_n`).
    pub fn du_val_index(&self) -> u64 {
        match self.family {
            Family::An { a2, a3, d1 } => (a2 + a3) * d1 - 1,
            Family::DEven { k } => 2 * k + 2,
            Family::DOdd { k } => 2 * k + 1,
            Family::E6 => 6,
            Family::E7 => 7,
            Family::E8 => 8,
            Family::OdpA { b2, .. } => b2,
        }
    }

    pub fn family_name(&self) -> String {
        let n = self.du_val_index();
        match self.family {
            Family::An { .. } => format!("A{n}"),
            Family::DEven { .. } | Family::DOdd { .. } => format!("D{n}"),
            Family::E6 => "E6".into(),
            Family::E7 => "E7".into(),
            Family::E8 => "E8".into(),
            Family::OdpA { .. } => format!("ODP-A{n}"),
        }
    }

    /// Exponent set of the designated quasihomogeneous polynomial.
    pub fn phi(&self) -> MonomialBranch {
        let (exps, label): (Vec<Vec<u64>>, String) = match (self.family, self.special_phi) {
            (Family::An { .. }, true) => (vec![vec![2, 1, 0], vec![0, 0, 2]], "x1^2*x2+x3^2".into()),
            (Family::An { a2, a3, d1 }, false) => {
                let m = (a2 + a3) * d1;
                (vec![vec![0, 1, 1], vec![m, 0, 0]], format!("x2*x3+x1^{m}"))
            }
            (Family::DEven { .. } | Family::DOdd { .. }, true) => {
                (vec![vec![0, 0, 2], vec![1, 2, 0]], "x3^2+x1*x2^2".into())
            }
            (Family::DEven { k }, false) => (
                vec![vec![0, 0, 2], vec![1, 2, 0], vec![2 * k + 1, 0, 0]],
                format!("x3^2+x1*x2^2+x1^{}", 2 * k + 1),
            ),
            (Family::DOdd { k }, false) => (
                vec![vec![0, 0, 2], vec![1, 2, 0], vec![2 * k, 0, 0]],
                format!("x3^2+x1*x2^2+x1^{}", 2 * k),
            ),
            (Family::E6, _) => (vec![vec![4, 0, 0], vec![0, 3, 0], vec![0, 0, 2]], "x1^4+x2^3+x3^2".into()),
            (Family::E7, _) => (vec![vec![0, 0, 2], vec![0, 3, 0], vec![3, 1, 0]], "x3^2+x2^3+x2*x1^3".into()),
            (Family::E8, _) => (vec![vec![5, 0, 0], vec![0, 3, 0], vec![0, 0, 2]], "x1^5+x2^3+x3^2".into()),
            (Family::OdpA { b2, .. }, _) => (vec![vec![b2, 0, 0, 0], vec![0, 1, 0, 0]], format!("x1^{b2}+x2")),
        };
        MonomialBranch::new(exps, label).expect("nonempty exponent set")
    }

    /// Weighted degree of `phi`.
    pub fn phi_degree(&self) -> u64 {
        let w = self.weights();
        self.phi().exponents().iter().map(|l| l.iter().zip(&w).map(|(a, b)| a * b).sum()).min().unwrap_or(0)
    }

    /// `1 * {phi + psi = 0}` with the general high-degree term `psi` entering
    /// through its Newton polyhedron: pure powers `x_i^N`, `N = deg phi + 1`.
    pub fn boundary_spec(&self) -> MonomialDivisorSpec {
        let phi = self.phi();
        let n = phi.nvars();
        let big = self.phi_degree() + 1;
        let mut exps = phi.exponents().to_vec();
        for i in 0..n {
            let mut e = vec![0u64; n];
            e[i] = big;
            exps.push(e);
        }
        let label = format!("{} + psi", phi.label());
        MonomialDivisorSpec::single(rat(1, 1), MonomialBranch::new(exps, label).expect("nonempty"))
    }

    pub fn phi_spec(&self) -> MonomialDivisorSpec {
        MonomialDivisorSpec::single(rat(1, 1), self.phi())
    }

    /// The parameter capped by enumeration bounds: `n` for `A_n` and `E_n`,
    /// `k` for the `D` families, `b2` over the double point.
    pub fn bound_measure(&self) -> u64 {
        match self.family {
            Family::DEven { k } | Family::DOdd { k } => k,
            Family::OdpA { b2, .. } => b2,
            _ => self.du_val_index(),
        }
    }

    pub fn params(&self) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        match self.family {
            Family::An { a2, a3, d1 } => {
                m.insert("a2".into(), a2);
                m.insert("a3".into(), a3);
                m.insert("d1".into(), d1);
            }
            Family::DEven { k } | Family::DOdd { k } => {
                m.insert("k".into(), k);
            }
            Family::OdpA { b2, b3, b4 } => {
                m.insert("b2".into(), b2);
                m.insert("b3".into(), b3);
                m.insert("b4".into(), b4);
            }
            _ => {}
        }
        m.insert("n".into(), self.du_val_index());
        m
    }
}

impl fmt::Display for ContractionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::An { a2, a3, d1 } => write!(f, "An:{a2},{a3},{d1}")?,
            Family::DEven { .. } | Family::DOdd { .. } => write!(f, "D:{}", self.du_val_index())?,
            Family::E6 => write!(f, "E6")?,
            Family::E7 => write!(f, "E7")?,
            Family::E8 => write!(f, "E8")?,
            Family::OdpA { b2, b3, b4 } => write!(f, "odpA:{b2},{b3},{b4}")?,
        }
        if self.special_phi {
            write!(f, ":special")?;
        }
        Ok(())
    }
}

impl FromStr for ContractionType {
    type Err = Error;

    /// `An:a2,a3,d1`, `D:n`, `E6|E7|E8`, `odpA:b2,b3,b4`; a `:special`
    /// suffix selects `phi = x1 x2^2 + x3^2`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, special) = match s.strip_suffix(":special") {
            Some(b) => (b, true),
            None => (s, false),
        };
        let nums = |t: &str, n: usize| -> Result<Vec<u64>> {
            let v = t
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| Error::Parse(format!("bad number {x:?} in {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != n {
                return Err(Error::Parse(format!("{s:?}: expected {n} parameters")));
            }
            Ok(v)
        };
        let (head, tail) = body.split_once(':').unwrap_or((body, ""));
        match head {
            "An" | "A" => {
                let v = nums(tail, 3)?;
                Self::new(Family::An { a2: v[0], a3: v[1], d1: v[2] }, special)
            }
            "D" | "Dn" => Self::d(nums(tail, 1)?[0], special),
            "E6" | "E7" | "E8" if tail.is_empty() => {
                let f = match head {
                    "E6" => Family::E6,
                    "E7" => Family::E7,
                    _ => Family::E8,
                };
                Self::new(f, special)
            }
            "odpA" | "ODP" | "odp" => {
                let v = nums(tail, 3)?;
                Self::new(Family::OdpA { b2: v[0], b3: v[1], b4: v[2] }, special)
            }
            _ => Err(Error::Parse(format!(
                "unknown type {s:?}; expected An:a2,a3,d1, D:n, E6, E7, E8 or odpA:b2,b3,b4"
            ))),
        }
    }
}

impl Serialize for ContractionType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ContractionType {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// All non-toric contraction types over `germ` with parameters within
/// `bound`: the index `n` for `A_n` and `E_n`, `k` for the `D` families,
/// `b2` over the double point. Cyclic quotient germs admit none.
pub fn enumerate_types(germ: &GermSpec, bound: u64) -> Vec<ContractionType> {
    let mut out = vec![];
    match germ {
        GermSpec::Cyclic { .. } => {}
        GermSpec::SmoothPoint => {
            // n = (a2 + a3) d1 - 1
            for d1 in 1..=bound + 1 {
                for a3 in 1..=(bound + 1) / d1 {
                    for a2 in 1..=a3 {
                        if a2.gcd(&a3) == 1 && (a2 + a3) * d1 <= bound + 1 {
                            out.push(ContractionType::an(a2, a3, d1).expect("admissible"));
                        }
                    }
                }
            }
            if bound >= 3 {
                out.push(ContractionType::a3_special());
            }
            for k in 1..=bound {
                for special in [false, true] {
                    out.push(ContractionType::new(Family::DEven { k }, special).expect("admissible"));
                    if k >= 2 {
                        out.push(ContractionType::new(Family::DOdd { k }, special).expect("admissible"));
                    }
                }
            }
            for f in [Family::E6, Family::E7, Family::E8] {
                let t = ContractionType::new(f, false).expect("admissible");
                if t.bound_measure() <= bound {
                    out.push(t);
                }
            }
        }
        GermSpec::OrdinaryDoublePoint => {
            for b2 in 1..=bound {
                for b3 in 1..=b2 {
                    let b4 = 1 + b2 - b3;
                    out.push(ContractionType::new(Family::OdpA { b2, b3, b4 }, false).expect("admissible"));
                }
            }
        }
    }
    out.sort_by_key(|t| {
        let group = match t.family {
            Family::An { .. } => 0,
            Family::DEven { .. } | Family::DOdd { .. } => 1,
            Family::E6 | Family::E7 | Family::E8 => 2,
            Family::OdpA { .. } => 3,
        };
        (group, t.du_val_index(), *t)
    });
    out
}

/// Enumeration result, with the negative-discrepancy witness that rules out
/// cyclic quotient germs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub germ: GermSpec,
    pub bound: u64,
    pub types: Vec<ContractionType>,
    pub obstruction: Option<DiscrepancyResult>,
}

pub fn classify(germ: &GermSpec, bound: u64) -> Result<Classification> {
    let obstruction = match *germ {
        GermSpec::Cyclic { r, q } => Some(cyclic_obstruction(r, q)?),
        _ => None,
    };
    Ok(Classification { germ: *germ, bound, types: enumerate_types(germ, bound), obstruction })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DuVal {
    A(u64),
    D(u64),
    E6,
    E7,
    E8,
    SpecialX1X2sqX3sq,
    NotDuVal,
}

impl fmt::Display for DuVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DuVal::A(n) => write!(f, "A{n}"),
            DuVal::D(n) => write!(f, "D{n}"),
            DuVal::E6 => write!(f, "E6"),
            DuVal::E7 => write!(f, "E7"),
            DuVal::E8 => write!(f, "E8"),
            DuVal::SpecialX1X2sqX3sq => write!(f, "x1*x2^2+x3^2"),
            DuVal::NotDuVal => write!(f, "not Du Val"),
        }
    }
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Matches a quasihomogeneous exponent set against the A-D-E normal forms
/// and `x1 x2^2 + x3^2`, up to renaming the variables.
pub fn du_val_recognize(weights: [u64; 3], phi: &MonomialBranch) -> Result<DuVal> {
    if phi.nvars() != 3 {
        return Err(Error::Shape("Du Val recognition needs three variables".into()));
    }
    let w: Vec<Rational> = weights.iter().map(|&x| rat(x as i64, 1)).collect();
    if !phi.is_quasihomogeneous(&w) {
        return Err(Error::NotQuasihomogeneous(format!("{phi} with weights {weights:?}")));
    }
    for p in PERMS {
        // exponents in renamed variables (x, y, z) = (x_{p0}, x_{p1}, x_{p2})
        let mut e: Vec<[u64; 3]> = phi.exponents().iter().map(|l| [l[p[0]], l[p[1]], l[p[2]]]).collect();
        e.sort();
        if let Some(t) = match_normal_form(&e) {
            return Ok(t);
        }
    }
    Ok(DuVal::NotDuVal)
}

fn match_normal_form(e: &[[u64; 3]]) -> Option<DuVal> {
    let has = |m: [u64; 3]| e.contains(&m);
    match e.len() {
        2 => {
            // xy + z^{n+1}
            if has([1, 1, 0]) {
                if let Some(z) = e.iter().find(|m| m[0] == 0 && m[1] == 0 && m[2] >= 2) {
                    return Some(DuVal::A(z[2] - 1));
                }
            }
            if has([2, 0, 0]) && has([0, 2, 1]) {
                return Some(DuVal::SpecialX1X2sqX3sq);
            }
            None
        }
        3 => {
            let z = e.iter().find(|m| m[0] == 0 && m[1] == 0).map(|m| m[2]);
            if has([2, 0, 0]) && has([0, 2, 0]) {
                if let Some(z) = z.filter(|&z| z >= 2) {
                    return Some(DuVal::A(z - 1));
                }
            }
            if has([2, 0, 0]) && has([0, 2, 1]) {
                if let Some(z) = z.filter(|&z| z >= 2) {
                    return Some(DuVal::D(z + 1));
                }
            }
            if has([2, 0, 0]) && has([0, 3, 0]) {
                if z == Some(4) {
                    return Some(DuVal::E6);
                }
                if z == Some(5) {
                    return Some(DuVal::E8);
                }
                if has([0, 1, 3]) {
                    return Some(DuVal::E7);
                }
            }
            None
        }
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    /// The pair `(X, 1/n D)` is canonical along toric valuations.
    pub a: bool,
    /// `phi` is quasihomogeneous for the weights.
    pub b: bool,
    /// `a(S, 1/n D) = 0`.
    pub c: bool,
    #[serde(with = "crate::arith::rational_string")]
    pub c_value: Rational,
    pub a_witness: Option<DiscrepancyResult>,
    pub failing: Vec<String>,
}

impl ConditionReport {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c
    }
}

/// Conditions A, B, C for arbitrary weights and a designated `phi`; the
/// general term `psi` enters condition A through pure powers of degree
/// above `phi`.
pub fn check_conditions_for(germ: &GermSpec, weights: &[u64], phi: &MonomialBranch) -> Result<ConditionReport> {
    let w: Vec<Rational> = germ.weights_of(&germ.blowup_ray(weights)?);
    let b = phi.is_quasihomogeneous(&w);
    let deg = phi.order_along(&w);
    let n = phi.nvars();
    let big = deg.ceil().to_integer().to_u64().unwrap_or(0) + 1;
    let mut exps = phi.exponents().to_vec();
    for i in 0..n {
        let mut e = vec![0u64; n];
        e[i] = big;
        exps.push(e);
    }
    let spec = MonomialDivisorSpec::single(rat(1, 1), MonomialBranch::new(exps, format!("{phi} + psi"))?);
    let canon = is_canonical_pair_toric(germ, &spec, true)?;
    let c_res = toric_log_discrepancy_minus_one(germ, weights, &MonomialDivisorSpec::single(rat(1, 1), phi.clone()))?;
    let c = c_res.value.is_zero();
    let a_witness = match canon.verdict {
        Canonicity::NotCanonical { witness } => Some(witness),
        Canonicity::Canonical => None,
    };
    let a = a_witness.is_none();
    let mut failing = vec![];
    if !a {
        failing.push("A: pair not canonical".to_string());
    }
    if !b {
        failing.push("B: phi not quasihomogeneous".to_string());
    }
    if !c {
        failing.push(format!("C: a(S, D) = {} != 0", fmt_rational(&c_res.value)));
    }
    Ok(ConditionReport { a, b, c, c_value: c_res.value, a_witness, failing })
}

pub fn check_conditions(germ: &GermSpec, t: &ContractionType) -> Result<ConditionReport> {
    if *germ != t.germ() {
        return Err(Error::InvalidParameters(format!("type {t} does not live over {germ}")));
    }
    check_conditions_for(germ, &t.weights(), &t.phi())
}

// ---------------------------------------------------------------------------
// reports

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffTerm {
    pub curve: String,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSummary {
    pub kind: String,
    pub diff: Vec<DiffTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingularityEntry {
    pub location: String,
    /// `quotient` for computed chart singularities, `fixture` otherwise.
    pub source: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub reid_tai: Option<ReidTai>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramNode {
    pub id: usize,
    pub kind: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    pub nodes: Vec<DiagramNode>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub log_surface_toric: bool,
    pub plt_blowup: bool,
    #[serde(rename = "non_normal_E")]
    pub non_normal_e: bool,
    pub special_phi: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fixture {
    pub item: String,
    pub value: String,
    pub source: String,
}

/// One toric chart of the blow-up of `Gamma`: the local cone `<w, g, c>`
/// with `Gamma` along `V(<w, c>)`, subdivided at `e4 = w + c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartReport {
    pub location: String,
    pub count: u64,
    pub local_cone: Vec<LatticeVector>,
    pub e4: LatticeVector,
    /// Singularity of the cone `<e4, g, c>` away from the proper transform of `S`.
    pub outside: CyclicQuotientType,
    /// Singularity of the cone `<e4, g, w>`, on the proper transform of `S`.
    pub on_gamma: CyclicQuotientType,
    /// Index of `<e4, g>`: greater than one when the variety is singular along the fiber.
    pub fiber_index: u64,
    /// Surface point `f` meets the curve `Gamma~`, weight of `Gamma~` after normalising the fiber to one.
    pub near_label: String,
    pub far_label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub family: String,
    pub params: BTreeMap<String, u64>,
    pub weights: Vec<u64>,
    pub surface: SurfaceSummary,
    pub gamma_class: String,
    pub gamma_tilde_sq: String,
    pub singularities: Vec<SingularityEntry>,
    pub diagram: Diagram,
    pub flags: Flags,
    pub fixtures: Vec<Fixture>,
    pub contraction_type: ContractionType,
    pub phi: String,
    pub charts: Vec<ChartReport>,
    /// `a(S, D)`: zero, so the contracted surface is a crepant divisor and `Y`
    /// is canonical but not terminal at its image.
    pub crepant_certificate: String,
    pub assumptions: Vec<String>,
}

impl ContractionReport {
    pub fn gamma_tilde_sq_value(&self) -> Result<Rational> {
        crate::arith::parse_rational(&self.gamma_tilde_sq)
    }

    /// Normalized spellings of the computed singularities, with multiplicity.
    pub fn singularity_types(&self) -> Vec<String> {
        self.singularities.iter().map(|s| s.kind.clone()).collect()
    }
}

enum ChartSpec {
    /// Torus-fixed point `V(<w, g, c>)` where `Gamma` follows `V(<w, c>)`.
    Vertex { g: LatticeVector, c: LatticeVector, count: u64, name: String },
    /// General point of the curve `V(<w, g>)` met transversally by `Gamma`.
    Transverse { g: LatticeVector, count: u64, name: String },
}

fn unit(i: usize) -> LatticeVector {
    LatticeVector::unit(3, i)
}

fn odp_gen(i: usize) -> LatticeVector {
    GermSpec::OrdinaryDoublePoint.cone().generators()[i].clone()
}

fn chart_specs(t: &ContractionType) -> Vec<ChartSpec> {
    use ChartSpec::*;
    let vx = |g: usize, c: usize, name: &str| Vertex { g: unit(g), c: unit(c), count: 1, name: name.into() };
    let tr = |g: usize, count: u64, name: &str| Transverse { g: unit(g), count, name: name.into() };
    match (t.family, t.special_phi) {
        (Family::An { .. }, true) => vec![],
        (Family::An { .. }, false) => vec![vx(0, 1, "P1 = (0:0:1)"), vx(0, 2, "P2 = (0:1:0)")],
        (Family::DEven { .. }, false) => vec![vx(2, 0, "P1 = (0:1:0)"), tr(2, 2, "{x3=0}")],
        (Family::DOdd { .. }, false) => vec![vx(2, 0, "P1 = (0:1:0)"), tr(1, 2, "{x2=0}")],
        (Family::DEven { .. } | Family::DOdd { .. }, true) => vec![vx(2, 0, "P1 = (0:1:0)")],
        (Family::E6, _) => vec![tr(1, 2, "{x2=0}"), tr(0, 1, "{x1=0}")],
        (Family::E7, _) => vec![tr(0, 1, "{x1=0}"), vx(2, 1, "P1 = (1:0:0)"), tr(2, 1, "{x3=0}")],
        (Family::E8, _) => vec![tr(0, 1, "{x1=0}"), tr(1, 1, "{x2=0}"), tr(2, 1, "{x3=0}")],
        (Family::OdpA { .. }, _) => vec![
            Vertex { g: odp_gen(1), c: odp_gen(0), count: 1, name: "P1 = V(x1=x2=x4=0)".into() },
            Vertex { g: odp_gen(2), c: odp_gen(3), count: 1, name: "P2 = V(x1=x2=x3=0)".into() },
        ],
    }
}

/// `1/gamma(1, b)` for the surface point `V(<e4, a, b>)` on `V(e4)`, with the
/// weight of the `a` curve normalised to one.
fn surface_label(e4: &LatticeVector, a: &LatticeVector, b: &LatticeVector) -> Result<(u64, u64)> {
    let u = basis_completing(e4)?;
    let proj = |x: &LatticeVector| -> Result<LatticeVector> {
        let y = u.apply(x);
        LatticeVector::new(y.coords()[1..].to_vec()).primitive()
    };
    let cone = Cone::new(vec![proj(a)?, proj(b)?])?;
    cone_to_quotient(&cone)?.surface_label().ok_or_else(|| Error::Shape("non-unit surface weight".into()))
}

fn label_string(l: (u64, u64)) -> String {
    format!("1/{}(1,{})", l.0, l.1)
}

fn build_chart(w: &LatticeVector, spec: &ChartSpec) -> Result<ChartReport> {
    let (g, c, count, name) = match spec {
        ChartSpec::Vertex { g, c, count, name } => (g.clone(), c.clone(), *count, name.clone()),
        ChartSpec::Transverse { g, count, name } => {
            (g.clone(), saturation_complement(w, g)?, *count, format!("general point of {name}"))
        }
    };
    let local = Cone::new(vec![w.clone(), g.clone(), c.clone()])?;
    let e4 = w.add(&c).primitive()?;
    let fan = Fan::new(3, vec![local.clone()])?.star_subdivide(&e4)?;
    let outside_cone = Cone::new(vec![e4.clone(), g.clone(), c.clone()])?;
    let on_cone = Cone::new(vec![e4.clone(), g.clone(), w.clone()])?;
    debug_assert!(fan.cones().iter().all(|k| {
        let mut a = k.generators().to_vec();
        a.sort();
        let mut o = outside_cone.generators().to_vec();
        o.sort();
        let mut p = on_cone.generators().to_vec();
        p.sort();
        a == o || a == p
    }));
    Ok(ChartReport {
        location: name,
        count,
        local_cone: local.generators().to_vec(),
        e4: e4.clone(),
        outside: cone_to_quotient(&outside_cone)?.normalize(),
        on_gamma: cone_to_quotient(&on_cone)?.normalize(),
        fiber_index: two_cone_index(&e4, &g).to_u64().unwrap_or(u64::MAX),
        near_label: label_string(surface_label(&e4, &g, w)?),
        far_label: label_string(surface_label(&e4, &g, &c)?),
    })
}

fn node_for_label(label: (u64, u64)) -> Option<(String, String)> {
    match label {
        (1, _) => None,
        (n, 1) => Some(("curve".into(), format!("-{n}"))),
        (n, b) => Some(("point".into(), format!("1/{n}(1,{b})"))),
    }
}

fn parse_label(s: &str) -> (u64, u64) {
    let t: CyclicQuotientType = s.parse().expect("own label");
    (t.order(), t.weights()[1])
}

const NON_NORMAL_FIBER: &str = "A1 x 1/2(1,1) non-normal fiber";

pub fn build_report(t: &ContractionType) -> Result<ContractionReport> {
    let germ = t.germ();
    let weights = t.weights();
    let w = germ.blowup_ray(&weights)?;
    let gamma = gamma_tilde_sq(t)?;

    let (surface, gamma_class) = match germ {
        GermSpec::OrdinaryDoublePoint => {
            let star = germ.fan().star_subdivide(&w)?.star_surface(&w)?;
            let model = SurfaceModel::from_star(star.clone(), Some([weights[0], weights[1], weights[2], weights[3]]))?;
            let names = ["{x2=x4=0}", "{x1=x4=0}", "{x1=x3=0}", "{x2=x3=0}"];
            let diff = star
                .lifts
                .iter()
                .zip(&model.diff_coeffs)
                .filter(|(_, c)| !c.is_zero())
                .map(|(g, c)| {
                    let i = (0..4).find(|&i| odp_gen(i) == *g).expect("germ ray");
                    DiffTerm { curve: names[i].into(), coeff: fmt_rational(c) }
                })
                .collect();
            let p = format!("P(1,{},{},{})", weights[1], weights[2], weights[3]);
            (
                SurfaceSummary { kind: format!("quadric x1*x2 = x3*x4 in {p}"), diff },
                format!("O_{p}({})|_S", weights[1]),
            )
        }
        _ => {
            let beta = [weights[0], weights[1], weights[2]];
            let dec = weights_decomposition(beta)?;
            let model = SurfaceModel::wpp(beta)?;
            let diff = (0..3)
                .filter(|&i| dec.d[i] > 1)
                .map(|i| DiffTerm { curve: format!("{{x{}=0}}", i + 1), coeff: fmt_rational(&model.diff_coeffs[i]) })
                .collect();
            let p = format!("P({},{},{})", dec.a[0], dec.a[1], dec.a[2]);
            let m = t.phi_degree() / (dec.d[0] * dec.d[1] * dec.d[2]);
            (SurfaceSummary { kind: p.clone(), diff }, format!("O_{p}({m})"))
        }
    };

    let mut charts = vec![];
    for spec in chart_specs(t) {
        charts.push(build_chart(&w, &spec)?);
    }

    let mut singularities = vec![];
    let mut nodes = vec![DiagramNode { id: 0, kind: "gamma".into(), label: "Gamma~".into() }];
    let mut edges = vec![];
    let push = |nodes: &mut Vec<DiagramNode>, kind: String, label: String| -> usize {
        let id = nodes.len();
        nodes.push(DiagramNode { id, kind, label });
        id
    };
    for ch in &charts {
        for _ in 0..ch.count {
            if ch.outside.order() > 1 {
                singularities.push(SingularityEntry {
                    location: ch.location.clone(),
                    source: "quotient".into(),
                    kind: ch.outside.to_string(),
                    reid_tai: Some(reid_tai_classify(&ch.outside)),
                });
            }
            let mut prev = 0;
            if let Some((k, l)) = node_for_label(parse_label(&ch.near_label)) {
                let id = push(&mut nodes, k, l);
                edges.push([prev, id]);
                prev = id;
            }
            let fiber_label = if ch.fiber_index > 1 {
                format!("fiber, singular along (index {})", ch.fiber_index)
            } else {
                "fiber".to_string()
            };
            let f = push(&mut nodes, "fiber".into(), fiber_label);
            edges.push([prev, f]);
            if let Some((k, l)) = node_for_label(parse_label(&ch.far_label)) {
                let id = push(&mut nodes, k, l);
                edges.push([f, id]);
            }
        }
    }

    let mut fixtures = vec![];
    let fixture = |item: &str, value: &str| Fixture { item: item.into(), value: value.into(), source: "paper-fixture".into() };
    if t.special_phi {
        let fiber = match t.family {
            Family::An { .. } => "f",
            _ => "f1",
        };
        singularities.push(SingularityEntry {
            location: format!("{fiber} minus Gamma~"),
            source: "fixture".into(),
            kind: NON_NORMAL_FIBER.into(),
            reid_tai: None,
        });
        let f = push(&mut nodes, "fiber".into(), format!("{fiber}: {NON_NORMAL_FIBER}"));
        edges.push([0, f]);
        fixtures.push(fixture("Y~ near the fiber minus Gamma~", "A1 x 1/2(1,1)"));
        fixtures.push(fixture("E~", &format!("non-normal along {fiber}")));
        fixtures.push(fixture("K_Y~ + E~", "log canonical, not purely log terminal"));
        if matches!(t.family, Family::An { .. }) {
            fixtures.push(fixture("Sing Y~ meets E~ in", "the fiber f"));
            fixtures.push(fixture("Gamma~^2", "-5"));
        }
    }

    let log_surface_toric = matches!(t.family, Family::An { .. } | Family::OdpA { .. }) && !t.special_phi;
    let flags = Flags { log_surface_toric, plt_blowup: !t.special_phi, non_normal_e: t.special_phi, special_phi: t.special_phi };

    let c = toric_log_discrepancy_minus_one(&germ, &weights, &t.phi_spec())?;
    let mut assumptions = vec![format!(
        "psi is general of large degree; it enters only through the pure powers x_i^{} of the boundary",
        t.phi_degree() + 1
    )];
    if let Family::DEven { .. } | Family::DOdd { .. } = t.family {
        if !t.special_phi {
            assumptions.push("extra singularities along the vertex-chart fiber occur iff 3 | (n-2)".into());
        }
    }

    Ok(ContractionReport {
        family: t.family_name(),
        params: t.params(),
        weights,
        surface,
        gamma_class,
        gamma_tilde_sq: fmt_rational(&gamma),
        singularities,
        diagram: Diagram { nodes, edges },
        flags,
        fixtures,
        contraction_type: *t,
        phi: t.phi().label().to_string(),
        charts,
        crepant_certificate: format!("a(S, D) = {}", fmt_rational(&c.value)),
        assumptions,
    })
}

/// Reports for many types at once, in input order.
pub fn build_reports(types: &[ContractionType]) -> Result<Vec<ContractionReport>> {
    types.par_iter().map(build_report).collect()
}
