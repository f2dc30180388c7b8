//! Log discrepancies of toric valuations over a terminal toric germ with a
//! monomial boundary `sum theta_i {f_i = 0}`.
//!
//! A boundary branch is recorded by its exponent set; its multiplicity along
//! the valuation with weights `w` is `min_l <l, w>`, which is exact for
//! branches that are nondegenerate with respect to their Newton polyhedron.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{fmt_rational, parse_rational, rat, solve_in_basis, Int, LatticeVector, Rational};
use crate::fan::{Cone, GermSpec};
use crate::{Error, Result};

/// One branch `{f = 0}`, stored as the exponent set of `f`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialBranch {
    exponents: Vec<Vec<u64>>,
    label: String,
}

impl MonomialBranch {
    pub fn new(mut exponents: Vec<Vec<u64>>, label: impl Into<String>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Parse("branch has no monomials".into()));
        }
        let n = exponents[0].len();
        if exponents.iter().any(|e| e.len() != n) {
            return Err(Error::Shape("monomials with different numbers of variables".into()));
        }
        exponents.sort();
        exponents.dedup();
        Ok(MonomialBranch { exponents, label: label.into() })
    }

    /// Parses `x1^5+x2^3+x3^2`, `x1*x2^2+x3^2` or `x^2+y^3` in `nvars` variables.
    pub fn parse(s: &str, nvars: usize) -> Result<Self> {
        let mut exps = vec![];
        for term in s.split('+') {
            let term: String = term.chars().filter(|c| !c.is_whitespace()).collect();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty monomial in {s:?}")));
            }
            exps.push(parse_monomial(&term, nvars)?);
        }
        MonomialBranch::new(exps, s.trim())
    }

    pub fn exponents(&self) -> &[Vec<u64>] {
        &self.exponents
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nvars(&self) -> usize {
        self.exponents[0].len()
    }

    /// `min_l <l, w>` over the exponent set.
    pub fn order_along(&self, w: &[Rational]) -> Rational {
        self.exponents
            .iter()
            .map(|l| l.iter().zip(w).map(|(&a, b)| b * Rational::from_integer(a.into())).sum::<Rational>())
            .min()
            .expect("nonempty branch")
    }

    /// `true` when every monomial has the same weighted degree.
    pub fn is_quasihomogeneous(&self, w: &[Rational]) -> bool {
        let degs: Vec<Rational> = self
            .exponents
            .iter()
            .map(|l| l.iter().zip(w).map(|(&a, b)| b * Rational::from_integer(a.into())).sum())
            .collect();
        degs.windows(2).all(|p| p[0] == p[1])
    }
}

fn parse_monomial(term: &str, nvars: usize) -> Result<Vec<u64>> {
    let bad = || Error::Parse(format!("cannot read monomial {term:?}"));
    let mut e = vec![0u64; nvars];
    if term == "1" {
        return Ok(e);
    }
    let chars: Vec<char> = term.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '*' {
            i += 1;
            continue;
        }
        let var = match chars[i] {
            'x' if i + 1 < chars.len() && chars[i + 1].is_ascii_digit() => {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let k: usize = chars[start..i].iter().collect::<String>().parse().map_err(|_| bad())?;
                if k == 0 {
                    return Err(bad());
                }
                k - 1
            }
            'x' => {
                i += 1;
                0
            }
            'y' => {
                i += 1;
                1
            }
            'z' => {
                i += 1;
                2
            }
            _ => return Err(bad()),
        };
        if var >= nvars {
            return Err(Error::Parse(format!("variable {} out of range in {term:?}", var + 1)));
        }
        let mut pow = 1u64;
        if i < chars.len() && chars[i] == '^' {
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            pow = chars[start..i].iter().collect::<String>().parse().map_err(|_| bad())?;
        }
        e[var] += pow;
    }
    Ok(e)
}

impl fmt::Display for MonomialBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// `sum_i theta_i {f_i = 0}` with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonomialDivisorSpec {
    pub branches: Vec<(Rational, MonomialBranch)>,
}

impl MonomialDivisorSpec {
    pub fn new(branches: Vec<(Rational, MonomialBranch)>) -> Self {
        MonomialDivisorSpec { branches }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(theta: Rational, branch: MonomialBranch) -> Self {
        MonomialDivisorSpec { branches: vec![(theta, branch)] }
    }

    /// One branch per line, `coeff; monomial+monomial+...`; blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_lines(text: &str, nvars: usize) -> Result<Self> {
        let mut branches = vec![];
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (c, poly) = line
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `coeff; monomials`", no + 1)))?;
            let theta = parse_rational(c.trim()).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            let b = MonomialBranch::parse(poly, nvars).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
            branches.push((theta, b));
        }
        Ok(MonomialDivisorSpec { branches })
    }

    pub fn scaled(&self, t: &Rational) -> Self {
        MonomialDivisorSpec { branches: self.branches.iter().map(|(c, b)| (c * t, b.clone())).collect() }
    }
}

impl fmt::Display for MonomialDivisorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.branches.is_empty() {
            return write!(f, "0");
        }
        for (i, (c, b)) in self.branches.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{{{}}}", fmt_rational(c), b)?;
        }
        Ok(())
    }
}

/// `sum_i theta_i * min_l <l, w>`; zero for the empty boundary.
pub fn weight_multiplicity(spec: &MonomialDivisorSpec, w: &[Rational]) -> Rational {
    spec.branches.iter().map(|(c, b)| c * b.order_along(w)).sum()
}

pub fn weight_multiplicity_int(spec: &MonomialDivisorSpec, w: &[u64]) -> Rational {
    let w: Vec<Rational> = w.iter().map(|&x| rat(x as i64, 1)).collect();
    weight_multiplicity(spec, &w)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscrepancyResult {
    #[serde(with = "crate::arith::rational_string")]
    pub value: Rational,
    pub valuation: LatticeVector,
    /// Log discrepancy of the valuation over the germ (`sum w_i` on a smooth point).
    #[serde(with = "crate::arith::rational_string")]
    pub log_discrepancy: Rational,
    #[serde(with = "crate::arith::rational_string")]
    pub multiplicity: Rational,
}

/// `a(E_v, D)` for a lattice point `v` of the germ cone.
pub fn discrepancy_at(germ: &GermSpec, v: &LatticeVector, spec: &MonomialDivisorSpec) -> DiscrepancyResult {
    let w = germ.weights_of(v);
    let log_discrepancy = germ.log_discrepancy(v);
    let multiplicity = weight_multiplicity(spec, &w);
    DiscrepancyResult {
        value: &log_discrepancy - Rational::one() - &multiplicity,
        valuation: v.clone(),
        log_discrepancy,
        multiplicity,
    }
}

/// `a(E_w, D) = sum w_i - 1 - mult_w(D)` for the weighted blow-up with
/// weights `w` (scaled by `r` on a cyclic germ).
pub fn toric_log_discrepancy_minus_one(
    germ: &GermSpec,
    weights: &[u64],
    spec: &MonomialDivisorSpec,
) -> Result<DiscrepancyResult> {
    let v = germ.blowup_ray(weights)?;
    for (_, b) in &spec.branches {
        if b.nvars() != germ.coordinate_count() {
            return Err(Error::Shape(format!(
                "branch {} has {} variables, germ has {}",
                b,
                b.nvars(),
                germ.coordinate_count()
            )));
        }
    }
    Ok(discrepancy_at(germ, &v, spec))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Canonicity {
    Canonical,
    NotCanonical { witness: DiscrepancyResult },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicityReport {
    pub verdict: Canonicity,
    /// Whether the verdict holds over all valuations: a `NotCanonical`
    /// verdict always does; `Canonical` needs Newton nondegeneracy.
    pub certified: bool,
    pub log_canonical: bool,
}

impl CanonicityReport {
    pub fn is_canonical(&self) -> bool {
        matches!(self.verdict, Canonicity::Canonical)
    }
}

/// Decides whether `(X, D)` is canonical along all toric valuations: every
/// exceptional toric divisor (primitive interior point other than the germ
/// rays) has `a >= 0`.
///
/// The search is exact. On each simplicial piece of the germ cone, in
/// barycentric coordinates `lambda`, `a + 1 = f(lambda) = max_p <c_p, lambda>`
/// is convex and positively homogeneous. Its minimum `m0` on the simplex
/// `sum lambda = 1` sits at a vertex of the linear arrangement and decides
/// which finite search applies.
pub fn is_canonical_pair_toric(
    germ: &GermSpec,
    spec: &MonomialDivisorSpec,
    newton_nondegenerate: bool,
) -> Result<CanonicityReport> {
    for (c, b) in &spec.branches {
        if b.nvars() != germ.coordinate_count() {
            return Err(Error::Shape(format!("branch {b} does not match the germ coordinates")));
        }
        if c.is_negative() {
            return Err(Error::InvalidParameters(format!("negative coefficient {}", fmt_rational(c))));
        }
    }
    let mut best: Option<(Rational, LatticeVector)> = None;
    let mut log_canonical = true;
    for piece in germ.cone().triangulation() {
        let p = Piece::new(germ, &piece, spec)?;
        if p.m0_sign() < 0 {
            log_canonical = false;
        }
        if let Some(v) = p.violation()? {
            let a = discrepancy_at(germ, &v, spec).value;
            let better = match &best {
                None => true,
                Some((b, w)) => a < *b || (a == *b && v < *w),
            };
            if better {
                best = Some((a, v));
            }
        }
    }
    let verdict = match best {
        None => Canonicity::Canonical,
        Some((_, v)) => Canonicity::NotCanonical { witness: discrepancy_at(germ, &v, spec) },
    };
    let certified = newton_nondegenerate || !matches!(verdict, Canonicity::Canonical);
    Ok(CanonicityReport { verdict, certified, log_canonical })
}

/// `a >= -1` along every toric valuation, germ rays included.
pub fn is_log_canonical_pair_toric(germ: &GermSpec, spec: &MonomialDivisorSpec) -> Result<bool> {
    Ok(is_canonical_pair_toric(germ, spec, true)?.log_canonical)
}

type V3 = [i128; 3];

fn dot3(a: &V3, b: &V3) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sub3(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn normalize_dir(u: V3) -> Option<V3> {
    if u.iter().all(|&x| x == 0) {
        return None;
    }
    let u = if u.iter().all(|&x| x <= 0) { [-u[0], -u[1], -u[2]] } else { u };
    if u.iter().any(|&x| x < 0) {
        return None;
    }
    let g = u.iter().fold(0i128, |g, &x| g.gcd(&x));
    Some([u[0] / g, u[1] / g, u[2] / g])
}

fn on_axis(l: &V3) -> bool {
    l.iter().filter(|&&x| x != 0).count() <= 1
}

/// Compare `a/b` with `c/d` for positive denominators.
fn frac_lt(a: i128, b: i128, c: i128, d: i128) -> bool {
    a * d < c * b
}

/// One simplicial piece `<g1,g2,g3>` of the germ cone, in barycentric
/// coordinates `lambda = L / det` with `L` integral.
struct Piece {
    gens: Vec<LatticeVector>,
    det: i128,
    /// `Dc * (1 - p)` for the undominated points `p` of the boundary's
    /// Minkowski-summed Newton set; `Dc * f(lambda) = max <c, lambda>`.
    c: Vec<V3>,
    dc: i128,
    /// Representatives of `Lambda / Z^3`, scaled by `det`.
    offsets: Vec<V3>,
}

impl Piece {
    fn new(germ: &GermSpec, cone: &Cone, spec: &MonomialDivisorSpec) -> Result<Piece> {
        let gens = cone.generators().to_vec();
        let coords: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| {
                germ.weights_of(g)
                    .iter()
                    .map(|x| x.to_integer().to_i128().expect("small coordinate"))
                    .collect()
            })
            .collect();
        let dc: i128 = spec
            .branches
            .iter()
            .fold(Int::one(), |acc, (c, _)| acc.lcm(c.denom()))
            .to_i128()
            .ok_or_else(|| Error::InvalidParameters("coefficient denominators too large".into()))?;
        // Minkowski sum of scaled transformed exponent sets
        let mut sum: Vec<V3> = vec![[0, 0, 0]];
        for (theta, b) in &spec.branches {
            let t = (theta * Rational::from_integer(dc.into())).to_integer().to_i128().expect("scaled coefficient");
            let pts: Vec<V3> = b
                .exponents()
                .iter()
                .map(|l| {
                    let mut p = [0i128; 3];
                    for (j, cj) in coords.iter().enumerate() {
                        p[j] = t * l.iter().zip(cj).map(|(&a, &x)| a as i128 * x).sum::<i128>();
                    }
                    p
                })
                .collect();
            let mut next = vec![];
            for s in &sum {
                for p in &pts {
                    next.push([s[0] + p[0], s[1] + p[1], s[2] + p[2]]);
                }
            }
            sum = prune_dominated(next);
        }
        let c: Vec<V3> = sum.iter().map(|p| [dc - p[0], dc - p[1], dc - p[2]]).collect();
        let det = cone.multiplicity()?.to_i128().expect("small determinant");
        let offsets = lattice_offsets(&gens, det)?;
        Ok(Piece { gens, det, c, dc, offsets })
    }

    /// `Dc * f` at an integral `lambda`.
    fn fval(&self, l: &V3) -> i128 {
        self.c.iter().map(|c| dot3(c, l)).max().expect("nonempty")
    }

    /// `f < 1` at `lambda = L / det`.
    fn violates(&self, big_l: &V3) -> bool {
        self.fval(big_l) < self.det * self.dc
    }

    fn to_lattice(&self, big_l: &V3) -> LatticeVector {
        let mut v = LatticeVector::zero(3);
        for (g, &x) in self.gens.iter().zip(big_l) {
            v = v.add(&g.scale(&Int::from(x)));
        }
        let d = Int::from(self.det);
        LatticeVector::new(v.coords().iter().map(|x| {
            debug_assert!((x % &d).is_zero());
            x / &d
        }).collect())
        .primitive()
        .expect("nonzero lattice point")
    }

    /// Candidate minimisers of `f / sum lambda`: vertices of the simplex,
    /// edge points where two pieces of `f` agree, interior triple points.
    fn candidates(&self) -> Vec<V3> {
        let mut out: Vec<V3> = vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        let n = self.c.len();
        let units = [[1i128, 0, 0], [0, 1, 0], [0, 0, 1]];
        for i in 0..n {
            for j in i + 1..n {
                let d1 = sub3(&self.c[i], &self.c[j]);
                for e in &units {
                    if let Some(u) = normalize_dir(cross3(&d1, e)) {
                        out.push(u);
                    }
                }
                for k in j + 1..n {
                    let d2 = sub3(&self.c[i], &self.c[k]);
                    if let Some(u) = normalize_dir(cross3(&d1, &d2)) {
                        out.push(u);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Minimum of `f` on the simplex as `(num, den)` with `den > 0`, and
    /// the minimising candidates.
    fn minimum(&self) -> ((i128, i128), Vec<V3>) {
        let mut best: Option<(i128, i128)> = None;
        let mut arg = vec![];
        for u in self.candidates() {
            let num = self.fval(&u);
            let den = self.dc * (u[0] + u[1] + u[2]);
            match best {
                Some((bn, bd)) if frac_lt(bn, bd, num, den) => {}
                Some((bn, bd)) if !frac_lt(num, den, bn, bd) => arg.push(u),
                _ => {
                    best = Some((num, den));
                    arg = vec![u];
                }
            }
        }
        (best.expect("candidates"), arg)
    }

    fn m0_sign(&self) -> i32 {
        let ((n, _), _) = self.minimum();
        n.signum() as i32
    }

    /// A lattice point with `a < 0`, off the germ rays, or `None`.
    fn violation(&self) -> Result<Option<LatticeVector>> {
        let ((num, den), arg) = self.minimum();
        if num < 0 {
            let u = arg[0];
            if !on_axis(&u) {
                return Ok(Some(self.to_lattice(&[u[0] * self.det, u[1] * self.det, u[2] * self.det])));
            }
            let k = u.iter().position(|&x| x != 0).expect("axis");
            let j = (k + 1) % 3;
            return Ok(Some(self.descend_axis(k, [0, 0, 0], j)));
        }
        if num == 0 {
            if let Some(u) = arg.iter().find(|u| !on_axis(u)) {
                return Ok(Some(self.to_lattice(&[u[0] * self.det, u[1] * self.det, u[2] * self.det])));
            }
            let zero_axes: Vec<usize> = arg.iter().map(|u| u.iter().position(|&x| x != 0).unwrap()).collect();
            if zero_axes.len() >= 2 {
                let mut l = [0i128; 3];
                l[zero_axes[0]] = self.det;
                l[zero_axes[1]] = self.det;
                return Ok(Some(self.to_lattice(&l)));
            }
            return Ok(self.axis_tube(zero_axes[0]));
        }
        Ok(self.bounded_search(num, den))
    }

    /// Points `m e_k + mu` with `m` doubled until `f < 1`; used when the
    /// limit of `f` along the axis is below one.
    fn descend_axis(&self, k: usize, base: V3, j: usize) -> LatticeVector {
        let mut l = base;
        if l.iter().all(|&x| x == 0) {
            l[j] = self.det;
        }
        let mut m = self.det;
        loop {
            let mut p = l;
            p[k] += m;
            if self.violates(&p) {
                return self.to_lattice(&p);
            }
            m *= 2;
        }
    }

    /// `f` vanishes only on axis `k`. Since `f(m e_k + mu)` decreases to
    /// `g(mu) = max_{c_k = 0} <c, mu>` and dominates it everywhere, the pair
    /// is canonical on this piece iff `g >= 1` on the projected lattice.
    fn axis_tube(&self, k: usize) -> Option<LatticeVector> {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        let cs: Vec<(i128, i128)> = self.c.iter().filter(|c| c[k] == 0).map(|c| (c[i], c[j])).collect();
        let g = |a: i128, b: i128| cs.iter().map(|(x, y)| x * a + y * b).max().expect("nonempty");
        // minimum of g on the segment
        let mut dirs: Vec<(i128, i128)> = vec![(1, 0), (0, 1)];
        for s in 0..cs.len() {
            for t in s + 1..cs.len() {
                let (dx, dy) = (cs[s].0 - cs[t].0, cs[s].1 - cs[t].1);
                let (mut a, mut b) = (dy, -dx);
                if a <= 0 && b <= 0 {
                    (a, b) = (-a, -b);
                }
                if a >= 0 && b >= 0 && (a, b) != (0, 0) {
                    let gg = a.gcd(&b);
                    dirs.push((a / gg, b / gg));
                }
            }
        }
        let (mut bn, mut bd, mut barg) = (i128::MAX, 1i128, (0, 0));
        for &(a, b) in &dirs {
            let (n, d) = (g(a, b), self.dc * (a + b));
            if bn == i128::MAX || frac_lt(n, d, bn, bd) {
                (bn, bd, barg) = (n, d, (a, b));
            }
        }
        let lift = |mi: i128, mj: i128, lk: i128| {
            let mut l = [0i128; 3];
            l[i] = mi;
            l[j] = mj;
            l[k] = lk;
            l
        };
        if bn <= 0 {
            let base = lift(barg.0 * self.det, barg.1 * self.det, 0);
            return Some(self.descend_axis(k, base, i));
        }
        // bounded search for g < 1 on the projected lattice: sum mu < 1 / m1
        let limit = self.det * bd / bn + 1;
        let mut found: Option<V3> = None;
        for o in &self.offsets {
            let mut a = o[i];
            while a <= limit {
                let mut b = o[j];
                while a + b <= limit {
                    if (a, b) != (0, 0) && g(a, b) < self.det * self.dc {
                        let cand = lift(a, b, o[k]);
                        if found.is_none_or(|f| cand < f) {
                            found = Some(cand);
                        }
                    }
                    b += self.det;
                }
                a += self.det;
            }
        }
        found.map(|base| self.descend_axis(k, base, i))
    }

    /// `m0 = num/den > 0`: every violation has `sum lambda < 1/m0`.
    /// Returns the point of least `a`, lexicographically least on ties.
    fn bounded_search(&self, num: i128, den: i128) -> Option<LatticeVector> {
        let limit = self.det * den / num; // sum L <= limit
        let target = self.det * self.dc;
        let mut best: Option<(i128, LatticeVector)> = None;
        for o in &self.offsets {
            let mut l0 = o[0];
            while l0 <= limit {
                let mut l1 = o[1];
                while l0 + l1 <= limit {
                    // interval of L2 with <c, L> < target for all c
                    let mut lo = 0i128;
                    let mut hi = limit - l0 - l1;
                    for c in &self.c {
                        let rest = target - c[0] * l0 - c[1] * l1;
                        if c[2] > 0 {
                            hi = hi.min(Integer::div_floor(&(rest - 1), &c[2]));
                        } else if c[2] < 0 {
                            // c2 * L2 < rest  <=>  L2 > -rest / |c2|
                            lo = lo.max(Integer::div_floor(&-rest, &-c[2]) + 1);
                        } else if rest <= 0 {
                            hi = -1;
                        }
                    }
                    if lo <= hi {
                        // first value >= lo congruent to o[2]
                        let mut l2 = o[2] + Integer::div_ceil(&(lo - o[2]), &self.det).max(0) * self.det;
                        while l2 <= hi {
                            let l = [l0, l1, l2];
                            if !on_axis(&l) && self.violates(&l) {
                                let v = self.to_lattice(&l);
                                let key = self.fval(&l);
                                let better = match &best {
                                    None => true,
                                    Some((b, w)) => key < *b || (key == *b && v < *w),
                                };
                                if better {
                                    best = Some((key, v));
                                }
                            }
                            l2 += self.det;
                        }
                    }
                    l1 += self.det;
                }
                l0 += self.det;
            }
        }
        best.map(|(_, v)| v)
    }
}

fn prune_dominated(mut pts: Vec<V3>) -> Vec<V3> {
    pts.sort();
    pts.dedup();
    let keep: Vec<V3> = pts
        .iter()
        .filter(|p| !pts.iter().any(|q| q != *p && (0..3).all(|i| q[i] <= p[i])))
        .cloned()
        .collect();
    keep
}

/// Representatives `L` (with `lambda = L / det`) of the lattice points of
/// the fundamental parallelepiped.
fn lattice_offsets(gens: &[LatticeVector], det: i128) -> Result<Vec<V3>> {
    let mut gensets: Vec<V3> = vec![];
    for m in 0..3 {
        let lam = solve_in_basis(gens, &LatticeVector::unit(3, m))?;
        let mut v = [0i128; 3];
        for (i, x) in lam.iter().enumerate() {
            let y = x * Rational::from_integer(det.into());
            v[i] = y.to_integer().to_i128().expect("small").rem_euclid(det);
        }
        gensets.push(v);
    }
    let mut group: Vec<V3> = vec![[0, 0, 0]];
    let mut i = 0;
    while i < group.len() {
        let cur = group[i];
        for g in &gensets {
            let n = [(cur[0] + g[0]).rem_euclid(det), (cur[1] + g[1]).rem_euclid(det), (cur[2] + g[2]).rem_euclid(det)];
            if !group.contains(&n) {
                group.push(n);
            }
        }
        i += 1;
    }
    debug_assert_eq!(group.len() as i128, det);
    group.sort();
    Ok(group)
}

/// Discrepancy of the exceptional divisor over the singular point of the
/// terminal chart `T = 1/r(1,-1,q)` in the non-plt argument, and the bound
/// `-(1 - 1/r)(1 + 1/q)` it is compared with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonpltBound {
    #[serde(with = "crate::arith::rational_string")]
    pub discrepancy_t: Rational,
    #[serde(with = "crate::arith::rational_string")]
    pub bound: Rational,
}

pub fn nonplt_bound(r: u64, q: u64, alpha: &Rational, mult: &Rational) -> Result<NonpltBound> {
    let ok = (r, q) == (1, 1) || (r >= 2 && q >= 1 && q < r && r.gcd(&q) == 1);
    if !ok {
        return Err(Error::Hypothesis(format!("need gcd(r,q) = 1 and 1 <= q < r, got r={r}, q={q}")));
    }
    if alpha.is_negative() || mult.is_negative() {
        return Err(Error::Hypothesis("alpha and mult must be nonnegative".into()));
    }
    let (ri, qi) = (r as i64, q as i64);
    let discrepancy_t = rat(qi + 1 - ri, ri) + alpha * rat(qi, ri) - mult;
    let bound = -(rat(1, 1) - rat(1, ri)) * (rat(1, 1) + rat(1, qi));
    Ok(NonpltBound { discrepancy_t, bound })
}

/// The negative-discrepancy witness over a cyclic germ `1/r(1,-q,q)`: the
/// valuation `(1, r-q, q)/r` against a boundary of multiplicity two at the
/// point (all quadratic monomials, coefficient one).
pub fn cyclic_obstruction(r: u64, q: u64) -> Result<DiscrepancyResult> {
    let germ = GermSpec::cyclic(r, q)?;
    let mut quad = vec![];
    for i in 0..3 {
        for j in i..3 {
            let mut e = vec![0u64; 3];
            e[i] += 1;
            e[j] += 1;
            quad.push(e);
        }
    }
    let spec = MonomialDivisorSpec::single(rat(1, 1), MonomialBranch::new(quad, "mult_P = 2")?);
    toric_log_discrepancy_minus_one(&germ, &[1, r - q, q], &spec)
}

/// Result of the two-dimensional decomposition `D = D'_1 + D''_2` along the
/// ordered branch list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// `(d_x, d_y)` of every non-axis branch, in input order.
    pub orders: Vec<(u64, u64)>,
    /// Admissible split indices `j` (into the non-axis branches) with
    /// `(theta'_j, theta''_j)`; `None` when `theta_1 >= 1` already closes
    /// the x-side.
    pub splits: Vec<Split>,
    /// `theta_1 + sum_{i<j} theta_i d_x(f_i) + theta'_j d_x(f_j)`.
    #[serde(with = "crate::arith::rational_string")]
    pub x_sum: Rational,
    /// `theta_2 + theta''_j d_y(f_j) + sum_{i>j} theta_i d_y(f_i)`.
    #[serde(with = "crate::arith::rational_string")]
    pub y_sum: Rational,
    pub inequality_holds: bool,
    pub equality: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Split {
    pub index: Option<usize>,
    #[serde(with = "crate::arith::rational_string")]
    pub theta_prime: Rational,
    #[serde(with = "crate::arith::rational_string")]
    pub theta_double_prime: Rational,
}

/// Decomposition for a boundary on a smooth surface germ. Branches `{x}` and
/// `{y}` are read as the axes with coefficients `theta_1`, `theta_2`; all
/// other branches must be divisible by neither `x` nor `y`.
/// `Ok(None)` means the running `x`-sum never reaches one.
pub fn lc_decompose_2d(spec: &MonomialDivisorSpec) -> Result<Option<Decomposition>> {
    let (mut t1, mut t2) = (Rational::zero(), Rational::zero());
    let mut rest: Vec<(Rational, u64, u64)> = vec![];
    for (theta, b) in &spec.branches {
        if b.nvars() != 2 {
            return Err(Error::Shape(format!("branch {b} is not in two variables")));
        }
        match b.exponents() {
            [e] if e == &vec![1, 0] => t1 += theta,
            [e] if e == &vec![0, 1] => t2 += theta,
            exps => {
                let dx = exps.iter().filter(|e| e[1] == 0).map(|e| e[0]).min();
                let dy = exps.iter().filter(|e| e[0] == 0).map(|e| e[1]).min();
                match (dx, dy) {
                    (Some(dx), Some(dy)) if dx > 0 && dy > 0 => rest.push((theta.clone(), dx, dy)),
                    _ => {
                        return Err(Error::Hypothesis(format!(
                            "branch {b} is divisible by x or y, or is a unit"
                        )))
                    }
                }
            }
        }
    }
    let one = Rational::one();
    let orders = rest.iter().map(|(_, dx, dy)| (*dx, *dy)).collect();
    let dxr = |d: u64| rat(d as i64, 1);
    let y_tail = |from: usize| -> Rational { rest[from..].iter().map(|(t, _, dy)| t * dxr(*dy)).sum() };

    if t1 >= one {
        let y_sum = &t2 + y_tail(0);
        return Ok(Some(Decomposition {
            orders,
            splits: vec![Split { index: None, theta_prime: Rational::zero(), theta_double_prime: Rational::zero() }],
            x_sum: t1,
            inequality_holds: y_sum >= one,
            equality: y_sum == one,
            y_sum,
        }));
    }
    let mut s = t1.clone();
    for (j, (theta, dx, _)) in rest.iter().enumerate() {
        let reach = &s + theta * dxr(*dx);
        if reach >= one {
            let tp = (&one - &s) / dxr(*dx);
            let tpp = theta - &tp;
            let mut splits = vec![Split { index: Some(j), theta_prime: tp, theta_double_prime: tpp.clone() }];
            if tpp.is_zero() && j + 1 < rest.len() {
                splits.push(Split {
                    index: Some(j + 1),
                    theta_prime: Rational::zero(),
                    theta_double_prime: rest[j + 1].0.clone(),
                });
            }
            let y_sum = &t2 + &tpp * dxr(rest[j].2) + y_tail(j + 1);
            return Ok(Some(Decomposition {
                orders,
                splits,
                x_sum: one.clone(),
                inequality_holds: y_sum >= one,
                equality: y_sum == one,
                y_sum,
            }));
        }
        s = reach;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branch(s: &str, n: usize) -> MonomialBranch {
        MonomialBranch::parse(s, n).unwrap()
    }

    fn spec(items: &[(i64, i64, &str)], n: usize) -> MonomialDivisorSpec {
        MonomialDivisorSpec::new(items.iter().map(|&(p, q, s)| (rat(p, q), branch(s, n))).collect())
    }

    #[test]
    fn parse_branch() {
        let b = branch("x1^5+x2^3+x3^2", 3);
        assert_eq!(b.exponents(), &[vec![0, 0, 2], vec![0, 3, 0], vec![5, 0, 0]]);
        assert_eq!(branch("x1*x2^2+x3^2", 3).exponents(), &[vec![0, 0, 2], vec![1, 2, 0]]);
        assert_eq!(branch("x^2+y^3", 2).exponents(), &[vec![0, 3], vec![2, 0]]);
        assert_eq!(branch("x1x2^2", 3).exponents(), &[vec![1, 2, 0]]);
        assert!(MonomialBranch::parse("x4", 3).is_err());
        assert!(MonomialBranch::parse("x1+", 3).is_err());
    }

    #[test]
    fn parse_spec_file() {
        let s = MonomialDivisorSpec::parse_lines("# comment\n5/6; x1^2+x2^3\n\n1; x3\n", 3).unwrap();
        assert_eq!(s.branches.len(), 2);
        assert_eq!(s.branches[0].0, rat(5, 6));
        assert!(MonomialDivisorSpec::parse_lines("5/6 x1", 3).is_err());
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(weight_multiplicity_int(&spec(&[(1, 1, "x^2+y^3")], 2), &[1, 1]), rat(2, 1));
        assert_eq!(weight_multiplicity_int(&spec(&[(1, 1, "x1^5+x2^3+x3^2")], 3), &[6, 10, 15]), rat(30, 1));
        assert_eq!(weight_multiplicity_int(&spec(&[(1, 2, "x"), (1, 3, "y")], 2), &[1, 1]), rat(5, 6));
        assert_eq!(weight_multiplicity_int(&MonomialDivisorSpec::empty(), &[1, 1]), rat(0, 1));
    }

    #[test]
    fn discrepancy_examples() {
        let g = GermSpec::SmoothPoint;
        let e = MonomialDivisorSpec::empty();
        assert_eq!(toric_log_discrepancy_minus_one(&g, &[1, 1, 1], &e).unwrap().value, rat(2, 1));
        assert_eq!(toric_log_discrepancy_minus_one(&g, &[6, 10, 15], &e).unwrap().value, rat(30, 1));
        let phi = spec(&[(1, 1, "x1^5+x2^3+x3^2")], 3);
        assert_eq!(toric_log_discrepancy_minus_one(&g, &[6, 10, 15], &phi).unwrap().value, rat(0, 1));
        assert!(toric_log_discrepancy_minus_one(&g, &[2, 4, 6], &e).is_err());
    }

    #[test]
    fn odp_discrepancy_uses_height() {
        let g = GermSpec::OrdinaryDoublePoint;
        let r = toric_log_discrepancy_minus_one(&g, &[1, 2, 2, 1], &MonomialDivisorSpec::empty()).unwrap();
        assert_eq!(r.log_discrepancy, rat(3, 1));
        let phi = spec(&[(1, 1, "x1^2+x2")], 4);
        assert_eq!(toric_log_discrepancy_minus_one(&g, &[1, 2, 2, 1], &phi).unwrap().value, rat(0, 1));
    }

    #[test]
    fn canonicity_examples() {
        let g = GermSpec::SmoothPoint;
        let r = is_canonical_pair_toric(&g, &spec(&[(1, 1, "x1^2+x2^2+x3^2")], 3), true).unwrap();
        assert!(r.is_canonical());
        let r = is_canonical_pair_toric(&g, &spec(&[(1, 1, "x1+x2^2")], 3), true).unwrap();
        assert!(r.is_canonical());
        let r = is_canonical_pair_toric(&g, &spec(&[(2, 1, "x1")], 3), true).unwrap();
        match r.verdict {
            Canonicity::NotCanonical { witness } => assert!(witness.value.is_negative()),
            _ => panic!("2*{{x1}} is not canonical"),
        }
        assert!(!r.log_canonical);
        // x1*x2 with coefficient one: the blow-up of x1 = x2 = 0 has a = -1
        let r = is_canonical_pair_toric(&g, &spec(&[(1, 1, "x1*x2")], 3), true).unwrap();
        assert!(!r.is_canonical() && r.log_canonical);
        // {x1 = 0} + {x2 = 0}: the blow-up of the curve x1 = x2 = 0 has a = -1
        let r = is_canonical_pair_toric(&g, &spec(&[(1, 1, "x1"), (1, 1, "x2")], 3), true).unwrap();
        assert!(!r.is_canonical());
        assert!(r.log_canonical);
    }

    #[test]
    fn degenerate_input_is_one_sided() {
        let g = GermSpec::SmoothPoint;
        let r = is_canonical_pair_toric(&g, &spec(&[(1, 2, "x1^2+x2^2")], 3), false).unwrap();
        assert!(r.is_canonical());
        assert!(!r.certified);
    }

    #[test]
    fn nonplt_examples() {
        let z = Rational::zero();
        let b = nonplt_bound(2, 1, &z, &z).unwrap();
        assert_eq!((b.discrepancy_t, b.bound), (rat(0, 1), rat(-1, 1)));
        assert_eq!(nonplt_bound(3, 2, &z, &z).unwrap().bound, rat(-1, 1));
        assert_eq!(nonplt_bound(5, 2, &z, &z).unwrap().bound, rat(-6, 5));
        assert!(nonplt_bound(4, 2, &z, &z).is_err());
    }

    #[test]
    fn cyclic_obstruction_is_negative() {
        let w = cyclic_obstruction(5, 2).unwrap();
        assert_eq!(w.value, rat(-1, 5));
    }

    #[test]
    fn decomposition_examples() {
        let d = lc_decompose_2d(&spec(&[(5, 6, "x^2+y^3")], 2)).unwrap().unwrap();
        assert_eq!(d.orders, vec![(2, 3)]);
        assert_eq!(d.splits[0].theta_prime, rat(1, 2));
        assert_eq!(d.splits[0].theta_double_prime, rat(1, 3));
        assert!(d.inequality_holds && d.equality);

        let d = lc_decompose_2d(&spec(&[(1, 1, "x"), (1, 1, "y")], 2)).unwrap().unwrap();
        assert_eq!(d.y_sum, rat(1, 1));
        assert!(d.inequality_holds);

        let d = lc_decompose_2d(&spec(&[(1, 2, "x^2+y^2")], 2)).unwrap().unwrap();
        assert_eq!(d.splits[0].theta_prime, rat(1, 2));
        assert_eq!(d.y_sum, rat(0, 1));
        assert!(!d.inequality_holds);

        assert!(lc_decompose_2d(&spec(&[(1, 3, "x^2+y^3")], 2)).unwrap().is_none());
        assert!(lc_decompose_2d(&spec(&[(1, 3, "x^2*y+y^3")], 2)).is_err());
    }

    #[test]
    fn decomposition_lists_tied_indices() {
        let d = lc_decompose_2d(&spec(&[(1, 2, "x^2+y^5"), (1, 4, "x^3+y")], 2)).unwrap().unwrap();
        assert_eq!(d.splits.len(), 2);
        assert_eq!(d.splits[1].index, Some(1));
        assert_eq!(d.y_sum, rat(1, 4));
    }
}
