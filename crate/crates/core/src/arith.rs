//! Exact integers, rationals, lattice vectors and integer matrices.
//!
//! Everything is arbitrary precision. There is no floating point anywhere in
//! the computational path; decimals are produced only for human-facing
//! annotations.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Int = BigInt;
pub type Rational = BigRational;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rational {
    Rational::from_integer(n.clone())
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation, for annotations only.
pub fn approx(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().map_err(|_| bad())?;
            let d: Int = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Serde adapter writing rationals as `"p/q"` strings.
pub mod rational_string {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod rational_vec {
    use super::*;
    use serde::ser::SerializeSeq;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&fmt_rational(r))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    r - r.floor()
}

pub fn gcd_all<'a, I: IntoIterator<Item = &'a Int>>(it: I) -> Int {
    it.into_iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// A point of a rank-2 or rank-3 lattice.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<Int>);

impl LatticeVector {
    pub fn new(coords: Vec<Int>) -> Self {
        LatticeVector(coords)
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        LatticeVector(coords.iter().map(|&c| Int::from(c)).collect())
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![Int::zero(); rank])
    }

    pub fn unit(rank: usize, i: usize) -> Self {
        let mut v = Self::zero(rank);
        v.0[i] = Int::one();
        v
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Int] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn content(&self) -> Int {
        gcd_all(&self.0)
    }

    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    /// Divides out the gcd of the coordinates.
    pub fn primitive(&self) -> Result<LatticeVector> {
        if self.is_zero() {
            return Err(Error::ZeroVector);
        }
        let g = self.content();
        Ok(LatticeVector(self.0.iter().map(|c| c / &g).collect()))
    }

    pub fn add(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> LatticeVector {
        LatticeVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &Int) -> LatticeVector {
        LatticeVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn dot(&self, other: &LatticeVector) -> Int {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(|c| c.to_i64()).collect()
    }

    pub fn cross(&self, other: &LatticeVector) -> LatticeVector {
        let (a, b) = (&self.0, &other.0);
        LatticeVector(vec![
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ])
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for LatticeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // Canonical form is a plain JSON integer array; values beyond i64 fall
        // back to decimal strings.
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for c in &self.0 {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LatticeVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Coord {
            Small(i64),
            Big(String),
        }
        let raw = Vec::<Coord>::deserialize(d)?;
        raw.into_iter()
            .map(|c| match c {
                Coord::Small(v) => Ok(Int::from(v)),
                Coord::Big(s) => s.parse::<Int>().map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(LatticeVector)
    }
}

/// Square integer matrix, stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: Vec<Vec<Int>>,
}

/// `left * m * right = diag(diagonal)`, with `left`, `right` unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub diagonal: Vec<Int>,
    pub left: IntegerMatrix,
    pub right: IntegerMatrix,
}

impl IntegerMatrix {
    pub fn from_rows(rows: Vec<Vec<Int>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("matrix is not square ({n} rows)")));
        }
        Ok(IntegerMatrix { rows })
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| Int::from(v)).collect()).collect())
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_vectors(vs: &[LatticeVector]) -> Result<Self> {
        Self::from_rows(vs.iter().map(|v| v.0.clone()).collect())
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
            .collect();
        IntegerMatrix { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Int>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.rows[i][j]
    }

    pub fn row(&self, i: usize) -> LatticeVector {
        LatticeVector(self.rows[i].clone())
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let n = self.size();
        let rows = (0..n).map(|i| (0..n).map(|j| self.rows[j][i].clone()).collect()).collect();
        IntegerMatrix { rows }
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        let n = self.size();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|k| &self.rows[i][k] * &other.rows[k][j]).sum())
                    .collect()
            })
            .collect();
        IntegerMatrix { rows }
    }

    pub fn apply(&self, v: &LatticeVector) -> LatticeVector {
        LatticeVector(self.rows.iter().map(|r| r.iter().zip(&v.0).map(|(a, b)| a * b).sum()).collect())
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Int {
        let n = self.size();
        if n == 0 {
            return Int::one();
        }
        let mut a = self.rows.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    /// Smith normal form by elementary row/column operations, always pivoting
    /// on the entry of least absolute value. Deterministic.
    pub fn smith_normal_form(&self) -> Result<SmithForm> {
        let n = self.size();
        if self.determinant().is_zero() {
            return Err(Error::DegenerateCone);
        }
        let mut a = self.rows.clone();
        let mut left = IntegerMatrix::identity(n).rows;
        let mut right = IntegerMatrix::identity(n).rows;

        for t in 0..n {
            loop {
                // pivot: least nonzero |entry| in the trailing block, first in row-major order
                let (pi, pj) = {
                    let mut best: Option<(usize, usize)> = None;
                    for i in t..n {
                        for j in t..n {
                            if a[i][j].is_zero() {
                                continue;
                            }
                            if best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                                best = Some((i, j));
                            }
                        }
                    }
                    best.expect("nonsingular matrix has a nonzero trailing block")
                };
                a.swap(t, pi);
                left.swap(t, pi);
                for row in a.iter_mut() {
                    row.swap(t, pj);
                }
                for row in right.iter_mut() {
                    row.swap(t, pj);
                }

                let mut clean = true;
                for i in t + 1..n {
                    let q = a[i][t].div_floor(&a[t][t]);
                    if !q.is_zero() {
                        for j in 0..n {
                            let v = &a[t][j] * &q;
                            a[i][j] -= v;
                            let v = &left[t][j] * &q;
                            left[i][j] -= v;
                        }
                    }
                    if !a[i][t].is_zero() {
                        clean = false;
                    }
                }
                for j in t + 1..n {
                    let q = a[t][j].div_floor(&a[t][t]);
                    if !q.is_zero() {
                        for i in 0..n {
                            let v = &a[i][t] * &q;
                            a[i][j] -= v;
                            let v = &right[i][t] * &q;
                            right[i][j] -= v;
                        }
                    }
                    if !a[t][j].is_zero() {
                        clean = false;
                    }
                }
                if !clean {
                    continue;
                }
                // divisibility: fold an offending row into row t and retry
                let offending = (t + 1..n)
                    .find(|&i| (t + 1..n).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
                match offending {
                    Some(i) => {
                        for j in 0..n {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                            let v = left[i][j].clone();
                            left[t][j] += v;
                        }
                    }
                    None => break,
                }
            }
            if a[t][t].is_negative() {
                for j in 0..n {
                    a[t][j] = -a[t][j].clone();
                    left[t][j] = -left[t][j].clone();
                }
            }
        }
        Ok(SmithForm {
            diagonal: (0..n).map(|i| a[i][i].clone()).collect(),
            left: IntegerMatrix { rows: left },
            right: IntegerMatrix { rows: right },
        })
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", LatticeVector(r.clone()))?;
        }
        Ok(())
    }
}

/// Solves `sum_i x_i * cols[i] = y` over the rationals (Cramer's rule).
pub fn solve_in_basis(cols: &[LatticeVector], y: &LatticeVector) -> Result<Vec<Rational>> {
    let m = IntegerMatrix::from_vectors(cols)?.transpose();
    let det = m.determinant();
    if det.is_zero() {
        return Err(Error::DegenerateCone);
    }
    let n = cols.len();
    (0..n)
        .map(|i| {
            let mut c = cols.to_vec();
            c[i] = y.clone();
            let d = IntegerMatrix::from_vectors(&c)?.determinant();
            Ok(Rational::new(d, det.clone()))
        })
        .collect()
}

/// Unimodular matrix `u` with `u * v = (1, 0, ..., 0)` for a primitive `v`.
/// Built from the Smith transform of `v` viewed as a column.
pub fn basis_completing(v: &LatticeVector) -> Result<IntegerMatrix> {
    let v = v.primitive()?;
    let n = v.rank();
    let mut cur = IntegerMatrix::identity(n).rows;
    let mut col: Vec<Int> = v.0.clone();
    // Euclid down the column with row operations.
    loop {
        let nz: Vec<usize> = (0..n).filter(|&i| !col[i].is_zero()).collect();
        if nz.len() == 1 {
            let p = nz[0];
            col.swap(0, p);
            cur.swap(0, p);
            if col[0].is_negative() {
                col[0] = -col[0].clone();
                for x in cur[0].iter_mut() {
                    *x = -x.clone();
                }
            }
            break;
        }
        let p = *nz.iter().min_by_key(|&&i| (col[i].abs(), i)).unwrap();
        for &i in &nz {
            if i == p {
                continue;
            }
            let q = col[i].div_floor(&col[p]);
            col[i] = &col[i] - &q * &col[p];
            for j in 0..n {
                let v = &cur[p][j] * &q;
                cur[i][j] -= v;
            }
        }
    }
    debug_assert!(col[0].is_one());
    Ok(IntegerMatrix { rows: cur })
}
