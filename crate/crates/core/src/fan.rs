//! Cones, fans, weighted blow-up rays and star subdivisions.
//!
//! All fans live in `Z^rank`. The three terminal toric germ kinds are encoded
//! as a single cone each:
//!
//! * smooth point: the standard octant;
//! * cyclic `1/r(1,-q,q)`: the octant of the refined lattice
//!   `Z^3 + Z(1,-q,q)/r`, written in the basis `((1,-q,q)/r, e2, e3)`, so the
//!   cone generators become `(r,q,-q), (0,1,0), (0,0,1)`;
//! * ordinary double point: the cone over the unit square at height one,
//!   generators `(0,0,1), (1,0,1), (1,1,1), (0,1,1)` in cyclic order.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{basis_completing, gcd_all, rat, solve_in_basis, Int, IntegerMatrix, LatticeVector, Rational};
use crate::{Error, Result};

/// A terminal toric 3-fold germ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GermSpec {
    SmoothPoint,
    Cyclic { r: u64, q: u64 },
    OrdinaryDoublePoint,
}

impl GermSpec {
    pub fn cyclic(r: u64, q: u64) -> Result<Self> {
        if r < 2 || q == 0 || q >= r || r.gcd(&q) != 1 {
            return Err(Error::InvalidParameters(format!(
                "cyclic germ needs r >= 2, 1 <= q < r, gcd(r,q) = 1; got r={r}, q={q}"
            )));
        }
        Ok(GermSpec::Cyclic { r, q })
    }

    /// Number of coordinate functions `x_i` of the germ.
    pub fn coordinate_count(&self) -> usize {
        match self {
            GermSpec::OrdinaryDoublePoint => 4,
            _ => 3,
        }
    }

    pub fn cone(&self) -> Cone {
        let gens: Vec<LatticeVector> = match *self {
            GermSpec::SmoothPoint => (0..3).map(|i| LatticeVector::unit(3, i)).collect(),
            GermSpec::Cyclic { r, q } => vec![
                LatticeVector::from_i64(&[r as i64, q as i64, -(q as i64)]),
                LatticeVector::unit(3, 1),
                LatticeVector::unit(3, 2),
            ],
            GermSpec::OrdinaryDoublePoint => [[0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]]
                .iter()
                .map(|g| LatticeVector::from_i64(g))
                .collect(),
        };
        Cone { generators: gens }
    }

    pub fn fan(&self) -> Fan {
        Fan { rank: 3, maximal_cones: vec![self.cone()] }
    }

    /// Linear forms giving the weight of each coordinate function `x_i` on a
    /// lattice vector (rational for the cyclic germ).
    pub fn coordinate_forms(&self) -> Vec<[Rational; 3]> {
        let z = || rat(0, 1);
        let o = || rat(1, 1);
        match *self {
            GermSpec::SmoothPoint => vec![[o(), z(), z()], [z(), o(), z()], [z(), z(), o()]],
            GermSpec::Cyclic { r, q } => {
                let (r, q) = (r as i64, q as i64);
                vec![[rat(1, r), z(), z()], [rat(-q, r), o(), z()], [rat(q, r), z(), o()]]
            }
            // x1 x2 = x3 x4
            GermSpec::OrdinaryDoublePoint => vec![
                [o(), z(), z()],
                [rat(-1, 1), z(), o()],
                [z(), o(), z()],
                [z(), rat(-1, 1), o()],
            ],
        }
    }

    /// The form pairing to one on every ray of the germ cone (log discrepancy
    /// of toric valuations).
    pub fn canonical_form(&self) -> [Rational; 3] {
        match *self {
            GermSpec::SmoothPoint => [rat(1, 1), rat(1, 1), rat(1, 1)],
            GermSpec::Cyclic { r, .. } => [rat(1, r as i64), rat(1, 1), rat(1, 1)],
            GermSpec::OrdinaryDoublePoint => [rat(0, 1), rat(0, 1), rat(1, 1)],
        }
    }

    /// Weights of the coordinate functions along `v`.
    pub fn weights_of(&self, v: &LatticeVector) -> Vec<Rational> {
        self.coordinate_forms().iter().map(|f| pair(f, v)).collect()
    }

    pub fn log_discrepancy(&self, v: &LatticeVector) -> Rational {
        pair(&self.canonical_form(), v)
    }

    /// Primitive interior lattice point whose pairings with the coordinate
    /// functions are the given weights. For the cyclic germ the weights are
    /// scaled by `r`: `(1, r-q, q)` means the valuation `(1/r, (r-q)/r, q/r)`.
    pub fn blowup_ray(&self, weights: &[u64]) -> Result<LatticeVector> {
        let bad = |m: String| Err(Error::InadmissibleWeights(m));
        if weights.len() != self.coordinate_count() {
            return bad(format!("expected {} weights, got {}", self.coordinate_count(), weights.len()));
        }
        if weights.contains(&0) {
            return bad("weights must be positive".into());
        }
        let w: Vec<i64> = weights.iter().map(|&b| b as i64).collect();
        let v = match *self {
            GermSpec::SmoothPoint => LatticeVector::from_i64(&w),
            GermSpec::OrdinaryDoublePoint => {
                if w[0] + w[1] != w[2] + w[3] {
                    return bad(format!("beta1+beta2 != beta3+beta4 for {w:?}"));
                }
                for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
                    if w[i].gcd(&w[j]).gcd(&w[k]) != 1 {
                        return bad(format!(
                            "gcd(beta{}, beta{}, beta{}) != 1 for {w:?}",
                            i + 1,
                            j + 1,
                            k + 1
                        ));
                    }
                }
                LatticeVector::from_i64(&[w[0], w[2], w[0] + w[1]])
            }
            GermSpec::Cyclic { r, q } => {
                let (r, q) = (r as i64, q as i64);
                if (w[1] + q * w[0]).rem_euclid(r) != 0 || (w[2] - q * w[0]).rem_euclid(r) != 0 {
                    return bad(format!("{w:?}/{r} is not in the lattice Z^3 + Z(1,-{q},{q})/{r}"));
                }
                LatticeVector::from_i64(&[w[0], (q * w[0] + w[1]) / r, (w[2] - q * w[0]) / r])
            }
        };
        if !v.is_primitive() {
            return bad(format!("gcd of weights {w:?} is {}, valuation ray is not primitive", v.content()));
        }
        Ok(v)
    }
}

impl fmt::Display for GermSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GermSpec::SmoothPoint => write!(f, "smooth"),
            GermSpec::Cyclic { r, q } => write!(f, "cyclic:{r},{q}"),
            GermSpec::OrdinaryDoublePoint => write!(f, "odp"),
        }
    }
}

impl std::str::FromStr for GermSpec {
    type Err = Error;

    /// `smooth`, `cyclic:R,Q` or `odp`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "smooth" => return Ok(GermSpec::SmoothPoint),
            "odp" => return Ok(GermSpec::OrdinaryDoublePoint),
            _ => {}
        }
        let bad = || Error::Parse(format!("unknown germ {s:?}; expected smooth, cyclic:R,Q or odp"));
        let rest = s.strip_prefix("cyclic:").ok_or_else(bad)?;
        let (r, q) = rest.split_once(',').ok_or_else(bad)?;
        let r = r.trim().parse().map_err(|_| bad())?;
        let q = q.trim().parse().map_err(|_| bad())?;
        GermSpec::cyclic(r, q)
    }
}

pub(crate) fn pair(form: &[Rational; 3], v: &LatticeVector) -> Rational {
    form.iter().zip(v.coords()).map(|(a, b)| a * Rational::from_integer(b.clone())).sum()
}

/// A rational polyhedral cone. Generators are primitive; the cone is either
/// simplicial or the square cone `g1 + g3 = g2 + g4` (cyclic order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cone {
    generators: Vec<LatticeVector>,
}

impl Cone {
    pub fn new(generators: Vec<LatticeVector>) -> Result<Cone> {
        let rank = generators.first().map(|g| g.rank()).unwrap_or(0);
        if generators.iter().any(|g| g.rank() != rank) {
            return Err(Error::Shape("cone generators of mixed rank".into()));
        }
        if let Some(g) = generators.iter().find(|g| !g.is_primitive()) {
            return Err(Error::InadmissibleWeights(format!("cone generator {g} is not primitive")));
        }
        let c = Cone { generators };
        if c.generators.len() == 4 && rank == 3 {
            let g = &c.generators;
            if g[0].add(&g[2]) != g[1].add(&g[3]) {
                return Err(Error::Shape("4-generator cone is not a square cone".into()));
            }
        } else if c.generators.len() == rank {
            if c.matrix().determinant().is_zero() {
                return Err(Error::DegenerateCone);
            }
        } else if c.generators.len() > rank {
            return Err(Error::Shape("non-simplicial cone other than the square cone".into()));
        }
        Ok(c)
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.first().map(|g| g.rank()).unwrap_or(0)
    }

    pub fn is_simplicial(&self) -> bool {
        self.generators.len() <= self.rank()
    }

    pub fn is_full(&self) -> bool {
        self.generators.len() >= self.rank()
    }

    pub fn matrix(&self) -> IntegerMatrix {
        IntegerMatrix::from_vectors(&self.generators).expect("square generator matrix")
    }

    /// `|det|` of a full simplicial cone.
    pub fn multiplicity(&self) -> Result<Int> {
        if !(self.is_simplicial() && self.is_full()) {
            return Err(Error::Shape("multiplicity needs a full-dimensional simplicial cone".into()));
        }
        let d = self.matrix().determinant();
        if d.is_zero() {
            return Err(Error::DegenerateCone);
        }
        Ok(d.abs())
    }

    /// Full-dimensional simplicial pieces: the cone itself, or the two
    /// triangles of the square along the `g1 g3` diagonal.
    pub fn triangulation(&self) -> Vec<Cone> {
        if self.is_simplicial() {
            vec![self.clone()]
        } else {
            let g = &self.generators;
            vec![
                Cone { generators: vec![g[0].clone(), g[1].clone(), g[2].clone()] },
                Cone { generators: vec![g[0].clone(), g[2].clone(), g[3].clone()] },
            ]
        }
    }

    /// Coordinates of `v` in the generators of a full simplicial cone.
    pub fn coordinates(&self, v: &LatticeVector) -> Result<Vec<Rational>> {
        solve_in_basis(&self.generators, v)
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        if !self.is_full() {
            return false;
        }
        self.triangulation().iter().any(|t| {
            t.coordinates(v)
                .map(|c| c.iter().all(|x| !x.is_negative()))
                .unwrap_or(false)
        })
    }

    pub fn has_generator(&self, v: &LatticeVector) -> bool {
        self.generators.contains(v)
    }

    /// Facets as generator lists (adjacent pairs for the square cone).
    pub fn facets(&self) -> Vec<Vec<LatticeVector>> {
        let g = &self.generators;
        let n = g.len();
        if self.is_simplicial() {
            (0..n)
                .map(|skip| (0..n).filter(|&i| i != skip).map(|i| g[i].clone()).collect())
                .collect()
        } else {
            (0..n).map(|i| vec![g[i].clone(), g[(i + 1) % n].clone()]).collect()
        }
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ">")
    }
}

/// A fan given by its maximal cones; faces are implicit generator subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    maximal_cones: Vec<Cone>,
}

#[derive(Serialize, Deserialize)]
struct FanJson {
    rank: usize,
    cones: Vec<Vec<LatticeVector>>,
}

impl Serialize for Fan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FanJson {
            rank: self.rank,
            cones: self.maximal_cones.iter().map(|c| c.generators.clone()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FanJson::deserialize(d)?;
        let cones = raw
            .cones
            .into_iter()
            .map(Cone::new)
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Fan::new(raw.rank, cones).map_err(serde::de::Error::custom)
    }
}

impl Fan {
    pub fn new(rank: usize, maximal_cones: Vec<Cone>) -> Result<Fan> {
        if maximal_cones.iter().any(|c| c.rank() != rank) {
            return Err(Error::Shape(format!("cone rank differs from fan rank {rank}")));
        }
        Ok(Fan { rank, maximal_cones })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cones(&self) -> &[Cone] {
        &self.maximal_cones
    }

    /// Distinct rays, in order of first appearance.
    pub fn rays(&self) -> Vec<LatticeVector> {
        let mut out: Vec<LatticeVector> = vec![];
        for c in &self.maximal_cones {
            for g in c.generators() {
                if !out.contains(g) {
                    out.push(g.clone());
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.maximal_cones.iter().any(|c| c.contains(v))
    }

    /// Star subdivision at `w`: every maximal cone containing `w` is replaced
    /// by the cones spanned by `w` and its facets not containing `w`.
    pub fn star_subdivide(&self, w: &LatticeVector) -> Result<Fan> {
        if w.rank() != self.rank {
            return Err(Error::Shape(format!("vector {w} has rank {}, fan has rank {}", w.rank(), self.rank)));
        }
        if !w.is_primitive() {
            return Err(Error::InadmissibleWeights(format!("subdivision vector {w} is not primitive")));
        }
        if !self.contains(w) {
            return Err(Error::OutsideSupport(w.to_string()));
        }
        if self.rays().contains(w) {
            return Ok(self.clone());
        }
        let mut cones = vec![];
        for c in &self.maximal_cones {
            if !c.contains(w) {
                cones.push(c.clone());
                continue;
            }
            for facet in c.facets() {
                let mut gens = vec![w.clone()];
                gens.extend(facet);
                let m = IntegerMatrix::from_vectors(&gens)?;
                if !m.determinant().is_zero() {
                    cones.push(Cone { generators: gens });
                }
            }
        }
        Ok(Fan { rank: self.rank, maximal_cones: cones })
    }

    /// The toric surface `V(rho)` through its fan in `N / Z rho`.
    pub fn star_surface(&self, rho: &LatticeVector) -> Result<StarSurface> {
        if !self.rays().contains(rho) || self.rank != 3 {
            return Err(Error::NotARay(rho.to_string()));
        }
        let u = basis_completing(rho)?;
        let project = |g: &LatticeVector| {
            let x = u.apply(g);
            LatticeVector::new(x.coords()[1..].to_vec())
        };
        let mut lifts: Vec<LatticeVector> = vec![];
        let mut images: Vec<LatticeVector> = vec![];
        let mut pairs = 0usize;
        for c in self.maximal_cones.iter().filter(|c| c.has_generator(rho)) {
            if !c.is_simplicial() {
                return Err(Error::Shape("star of a ray inside a non-simplicial cone".into()));
            }
            pairs += 1;
            for g in c.generators().iter().filter(|g| *g != rho) {
                let img = project(g);
                let prim = img.primitive()?;
                if !images.iter().any(|i| i.primitive().ok().as_ref() == Some(&prim)) {
                    lifts.push(g.clone());
                    images.push(img);
                }
            }
        }
        let mut order: Vec<usize> = (0..images.len()).collect();
        order.sort_by(|&a, &b| angle_cmp(&images[a], &images[b]));
        let lifts: Vec<LatticeVector> = order.iter().map(|&i| lifts[i].clone()).collect();
        let images: Vec<LatticeVector> = order.iter().map(|&i| images[i].clone()).collect();
        let rays: Vec<LatticeVector> = images.iter().map(|i| i.primitive().expect("nonzero image")).collect();
        let curve_indices: Vec<Int> = images.iter().map(|i| i.content()).collect();
        let n = rays.len();
        let edge_indices: Vec<Int> = (0..n).map(|i| det2(&rays[i], &rays[(i + 1) % n]).abs()).collect();
        let complete = pairs == n
            && n >= 3
            && (0..n).all(|i| det2(&rays[i], &rays[(i + 1) % n]).is_positive());
        Ok(StarSurface {
            rho: rho.clone(),
            rays,
            lifts,
            boundary_curve_count: n,
            edge_indices,
            curve_indices,
            complete,
        })
    }
}

pub(crate) fn det2(a: &LatticeVector, b: &LatticeVector) -> Int {
    &a.coords()[0] * &b.coords()[1] - &a.coords()[1] * &b.coords()[0]
}

fn half(v: &LatticeVector) -> u8 {
    let (x, y) = (&v.coords()[0], &v.coords()[1]);
    if y.is_positive() || (y.is_zero() && x.is_positive()) {
        0
    } else {
        1
    }
}

/// Counter-clockwise angular order starting from the positive x-axis.
pub(crate) fn angle_cmp(a: &LatticeVector, b: &LatticeVector) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| Int::zero().cmp(&det2(a, b)))
}

/// Fan of the exceptional surface `V(rho)` in the rank-2 quotient lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarSurface {
    pub rho: LatticeVector,
    /// Primitive rays of the quotient fan in counter-clockwise order.
    pub rays: Vec<LatticeVector>,
    /// The generator of the ambient fan mapping onto each ray.
    pub lifts: Vec<LatticeVector>,
    pub boundary_curve_count: usize,
    /// `|det(u_i, u_{i+1})|`: order of the surface point between curves i and i+1.
    pub edge_indices: Vec<Int>,
    /// Index of the 2-cone `<rho, lift_i>`: transversal index of the ambient
    /// variety along boundary curve i.
    pub curve_indices: Vec<Int>,
    pub complete: bool,
}

impl StarSurface {
    /// `rank Pic = #rays - 2` for a complete simplicial surface fan.
    pub fn picard_rank(&self) -> usize {
        self.boundary_curve_count.saturating_sub(2)
    }
}

/// gcd of all 2x2 minors of the 2 x rank matrix `[a; b]`: the index of the
/// lattice spanned by `a, b` in its saturation.
pub fn two_cone_index(a: &LatticeVector, b: &LatticeVector) -> Int {
    let n = a.rank();
    let mut minors = vec![];
    for i in 0..n {
        for j in i + 1..n {
            minors.push(&a.coords()[i] * &b.coords()[j] - &a.coords()[j] * &b.coords()[i]);
        }
    }
    gcd_all(&minors)
}

/// A vector `v` with `Z^3 = sat(Z a + Z b) + Z v`.
pub fn saturation_complement(a: &LatticeVector, b: &LatticeVector) -> Result<LatticeVector> {
    let normal = a.cross(b).primitive()?;
    let n = normal.coords();
    let (g01, x0, x1) = ext_gcd(&n[0], &n[1]);
    let (g, y01, y2) = ext_gcd(&g01, &n[2]);
    debug_assert!(g.is_one());
    Ok(LatticeVector::new(vec![&y01 * &x0, &y01 * &x1, y2]))
}

fn ext_gcd(a: &Int, b: &Int) -> (Int, Int, Int) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}
