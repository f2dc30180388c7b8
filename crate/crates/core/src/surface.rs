//! Intersection theory on the exceptional surface `S` of a weighted blow-up.
//!
//! Two independent routes are provided. The closed-form route treats `S` as a
//! weighted projective plane `P(a1,a2,a3)` with the different
//! `sum (d_i - 1)/d_i {x_i = 0}`. The star route works on the toric surface
//! `V(rho)` read off the subdivided fan: boundary curves `C_i`, their
//! intersection matrix, and the restriction `H = -S|_S`.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{rat, rat_int, LatticeVector, Rational};
use crate::classifier::ContractionType;
use crate::discrepancy::{toric_log_discrepancy_minus_one, MonomialDivisorSpec};
use crate::fan::{det2, GermSpec, StarSurface};
use crate::{Error, Result};

/// `(beta_1, beta_2, beta_3) = (a1 d2 d3, a2 d1 d3, a3 d1 d2)`, `d_i = gcd(beta_j, beta_k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WeightsDecomposition {
    pub a: [u64; 3],
    pub d: [u64; 3],
}

pub fn weights_decomposition(beta: [u64; 3]) -> Result<WeightsDecomposition> {
    if beta.contains(&0) {
        return Err(Error::NotToricBlowupForm(format!("{beta:?} has a zero weight")));
    }
    let d = [beta[1].gcd(&beta[2]), beta[0].gcd(&beta[2]), beta[0].gcd(&beta[1])];
    let mut a = [0u64; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let m = d[j] * d[k];
        if beta[i] % m != 0 {
            return Err(Error::NotToricBlowupForm(format!(
                "{beta:?}: beta_{} = {} is not divisible by d_{} d_{} = {m}",
                i + 1,
                beta[i],
                j + 1,
                k + 1
            )));
        }
        a[i] = beta[i] / m;
    }
    Ok(WeightsDecomposition { a, d })
}

/// `O(m) . O(m') = m m' / (a1 a2 a3)` on `P(a1,a2,a3)`.
pub fn wpp_intersection(m: &Rational, m2: &Rational, a: [u64; 3]) -> Rational {
    m * m2 / rat((a[0] * a[1] * a[2]) as i64, 1)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SurfaceKind {
    Wpp { a: [u64; 3], d: [u64; 3] },
    QuadricStar { beta: [u64; 4], star: StarSurface },
    GeneralStar(StarSurface),
}

/// `S` with its different. Boundary curves are `{x_i = 0}` on a weighted
/// projective plane and the star-fan curves `C_i` otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurfaceModel {
    pub kind: SurfaceKind,
    pub diff_coeffs: Vec<Rational>,
    pub boundary_selfints: Vec<Rational>,
}

/// Rational divisor classes up to numerical equivalence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DivisorClass {
    /// `m * O(1)` on a weighted projective plane.
    Wpp(Rational),
    /// `sum c_i C_i` over the boundary curves of a star surface.
    Boundary(Vec<Rational>),
}

impl DivisorClass {
    pub fn scale(&self, t: &Rational) -> DivisorClass {
        match self {
            DivisorClass::Wpp(m) => DivisorClass::Wpp(m * t),
            DivisorClass::Boundary(c) => DivisorClass::Boundary(c.iter().map(|x| x * t).collect()),
        }
    }

    pub fn add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        match (self, other) {
            (DivisorClass::Wpp(a), DivisorClass::Wpp(b)) => Ok(DivisorClass::Wpp(a + b)),
            (DivisorClass::Boundary(a), DivisorClass::Boundary(b)) if a.len() == b.len() => {
                Ok(DivisorClass::Boundary(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
            _ => Err(Error::Shape("classes live on different surfaces".into())),
        }
    }
}

impl SurfaceModel {
    pub fn wpp(beta: [u64; 3]) -> Result<SurfaceModel> {
        let WeightsDecomposition { a, d } = weights_decomposition(beta)?;
        let prod = (a[0] * a[1] * a[2]) as i64;
        Ok(SurfaceModel {
            kind: SurfaceKind::Wpp { a, d },
            diff_coeffs: d.iter().map(|&di| rat(di as i64 - 1, di as i64)).collect(),
            boundary_selfints: a.iter().map(|&ai| rat((ai * ai) as i64, prod)).collect(),
        })
    }

    /// Star-route model of `V(rho)`; `beta` marks the quadric of an ODP germ.
    pub fn from_star(star: StarSurface, quadric_beta: Option<[u64; 4]>) -> Result<SurfaceModel> {
        if !star.complete {
            return Err(Error::Shape(format!("star surface of {} is not complete", star.rho)));
        }
        let n = star.rays.len();
        let u = &star.rays;
        let boundary_selfints = (0..n)
            .map(|i| {
                let (p, nx) = ((i + n - 1) % n, (i + 1) % n);
                -rat_int(&det2(&u[p], &u[nx])) / (rat_int(&det2(&u[p], &u[i])) * rat_int(&det2(&u[i], &u[nx])))
            })
            .collect();
        let diff_coeffs = star.curve_indices.iter().map(|m| (rat_int(m) - Rational::one()) / rat_int(m)).collect();
        let kind = match quadric_beta {
            Some(beta) if n == 4 => SurfaceKind::QuadricStar { beta, star },
            Some(_) => return Err(Error::Shape("quadric star needs four boundary curves".into())),
            None => SurfaceKind::GeneralStar(star),
        };
        Ok(SurfaceModel { kind, diff_coeffs, boundary_selfints })
    }

    pub fn star(&self) -> Option<&StarSurface> {
        match &self.kind {
            SurfaceKind::Wpp { .. } => None,
            SurfaceKind::QuadricStar { star, .. } | SurfaceKind::GeneralStar(star) => Some(star),
        }
    }

    pub fn picard_rank(&self) -> usize {
        match &self.kind {
            SurfaceKind::Wpp { .. } => 1,
            _ => self.star().map(|s| s.picard_rank()).unwrap_or(0),
        }
    }

    /// `C_i . C_j` for the boundary curves of a star model: `1/det(u_i, u_j)`
    /// for neighbours, the self-intersection on the diagonal, zero otherwise.
    pub fn intersection_matrix(&self) -> Option<Vec<Vec<Rational>>> {
        let star = self.star()?;
        let n = star.rays.len();
        let mut m = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            m[i][i] = self.boundary_selfints[i].clone();
            let j = (i + 1) % n;
            let v = Rational::one() / rat_int(&det2(&star.rays[i], &star.rays[j]));
            m[i][j] = v.clone();
            m[j][i] = v;
        }
        Some(m)
    }

    pub fn intersect(&self, x: &DivisorClass, y: &DivisorClass) -> Result<Rational> {
        match (&self.kind, x, y) {
            (SurfaceKind::Wpp { a, .. }, DivisorClass::Wpp(p), DivisorClass::Wpp(q)) => Ok(wpp_intersection(p, q, *a)),
            (_, DivisorClass::Boundary(p), DivisorClass::Boundary(q)) => {
                let m = self.intersection_matrix().ok_or_else(|| Error::Shape("no star data".into()))?;
                if p.len() != m.len() || q.len() != m.len() {
                    return Err(Error::Shape("class length differs from curve count".into()));
                }
                let mut s = Rational::zero();
                for i in 0..m.len() {
                    for j in 0..m.len() {
                        s += &p[i] * &m[i][j] * &q[j];
                    }
                }
                Ok(s)
            }
            _ => Err(Error::Shape("class does not match the surface model".into())),
        }
    }

    /// `K_S + Diff_S(0)`: `-sum a_i + sum (d_i - 1)/d_i a_i` times `O(1)` on a
    /// weighted projective plane, `-sum C_i / m_i` on a star model.
    pub fn adjunction_class(&self) -> DivisorClass {
        match &self.kind {
            SurfaceKind::Wpp { a, d } => DivisorClass::Wpp(adjunction_degree_wpp(*a, *d)),
            _ => {
                let star = self.star().expect("star model");
                DivisorClass::Boundary(star.curve_indices.iter().map(|m| -Rational::one() / rat_int(m)).collect())
            }
        }
    }

    /// `H = -S|_S` on a star model, from any `m` with `<m, rho> = 1`:
    /// `H = sum <m, lift_i> / m_i C_i`.
    pub fn restriction_class(&self) -> Result<DivisorClass> {
        let star = self.star().ok_or_else(|| Error::Shape("restriction class needs a star model".into()))?;
        let m = dual_unit(&star.rho)?;
        Ok(DivisorClass::Boundary(
            star.lifts
                .iter()
                .zip(&star.curve_indices)
                .map(|(g, mi)| pair_rational(&m, g) / rat_int(mi))
                .collect(),
        ))
    }

    /// The class `sum c_i C_i` of a boundary curve set, checked for length.
    pub fn boundary_class(&self, coeffs: Vec<Rational>) -> Result<DivisorClass> {
        let n = self.star().map(|s| s.rays.len()).ok_or_else(|| Error::Shape("no boundary curves".into()))?;
        if coeffs.len() != n {
            return Err(Error::Shape(format!("expected {n} coefficients")));
        }
        Ok(DivisorClass::Boundary(coeffs))
    }
}

/// A rational linear form with `<m, rho> = 1`.
fn dual_unit(rho: &LatticeVector) -> Result<Vec<Rational>> {
    let i = rho.coords().iter().position(|x| !x.is_zero()).ok_or(Error::ZeroVector)?;
    let mut m = vec![Rational::zero(); rho.rank()];
    m[i] = Rational::one() / rat_int(&rho.coords()[i]);
    Ok(m)
}

fn pair_rational(m: &[Rational], v: &LatticeVector) -> Rational {
    m.iter().zip(v.coords()).map(|(a, b)| a * rat_int(b)).sum()
}

fn adjunction_degree_wpp(a: [u64; 3], d: [u64; 3]) -> Rational {
    (0..3)
        .map(|i| -rat(a[i] as i64, 1) + rat(d[i] as i64 - 1, d[i] as i64) * rat(a[i] as i64, 1))
        .sum()
}

/// Degree of `K_S + Diff_S(0)`: the `O(1)` coefficient on a weighted
/// projective plane; on star models, its pairing with `H`.
pub fn adjunction_degree(model: &SurfaceModel) -> Result<Rational> {
    match model.adjunction_class() {
        DivisorClass::Wpp(m) => Ok(m),
        k => model.intersect(&k, &model.restriction_class()?),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Positivity {
    pub nef: bool,
    pub ample: bool,
    /// First boundary curve with negative intersection.
    pub witness: Option<usize>,
}

/// Picard rank one: the sign of the degree decides. Star models: pairings
/// with every boundary curve (these generate the cone of curves).
pub fn nef_test(model: &SurfaceModel, class: &DivisorClass) -> Result<Positivity> {
    match (&model.kind, class) {
        (SurfaceKind::Wpp { .. }, DivisorClass::Wpp(m)) => {
            Ok(Positivity { nef: !m.is_negative(), ample: m.is_positive(), witness: m.is_negative().then_some(0) })
        }
        (_, DivisorClass::Boundary(c)) => {
            let n = c.len();
            let mut pairings = vec![];
            for i in 0..n {
                let mut e = vec![Rational::zero(); n];
                e[i] = Rational::one();
                pairings.push(model.intersect(class, &DivisorClass::Boundary(e))?);
            }
            let witness = pairings.iter().position(|p| p.is_negative());
            Ok(Positivity {
                nef: witness.is_none(),
                ample: pairings.iter().all(|p| p.is_positive()),
                witness,
            })
        }
        _ => Err(Error::Shape("class does not match the surface model".into())),
    }
}

/// `a2 + a3 - a2 a3 - (d3 - 1)/d3 a3`; negative values make
/// `-(K_S + Diff)` restricted to the relevant curve positive, hence the
/// adjoint divisor ample in the point case.
pub fn point_case_degree(a2: u64, a3: u64, d3: u64) -> Result<Positivity> {
    let v = point_case_value(a2, a3, d3)?;
    Ok(Positivity { nef: v.is_negative() || v.is_zero(), ample: v.is_negative(), witness: None })
}

pub fn point_case_value(a2: u64, a3: u64, d3: u64) -> Result<Rational> {
    if d3 == 0 {
        return Err(Error::InvalidParameters("d3 must be positive".into()));
    }
    let (a2, a3, d3) = (a2 as i64, a3 as i64, d3 as i64);
    Ok(rat(a2 + a3 - a2 * a3, 1) - rat(d3 - 1, d3) * rat(a3, 1))
}

/// Evaluation of `(K_S + Diff).Gamma / (a(S,0) + 1) - Gamma^2` with its parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaEvaluation {
    #[serde(with = "crate::arith::rational_string")]
    pub adjunction_pairing: Rational,
    #[serde(with = "crate::arith::rational_string")]
    pub a_plus_one: Rational,
    #[serde(with = "crate::arith::rational_string")]
    pub gamma_sq: Rational,
    #[serde(with = "crate::arith::rational_string")]
    pub value: Rational,
}

fn a_plus_one(germ: &GermSpec, weights: &[u64]) -> Result<Rational> {
    Ok(toric_log_discrepancy_minus_one(germ, weights, &MonomialDivisorSpec::empty())?.value + Rational::one())
}

/// Closed-form route on `P(a)`: `Gamma ~ O(deg / (d1 d2 d3))`.
pub fn gamma_tilde_sq_wpp(beta: [u64; 3], phi_degree: u64) -> Result<GammaEvaluation> {
    let model = SurfaceModel::wpp(beta)?;
    let SurfaceKind::Wpp { a, d } = model.kind else { unreachable!() };
    let gamma = rat(phi_degree as i64, (d[0] * d[1] * d[2]) as i64);
    let k = adjunction_degree_wpp(a, d);
    let adjunction_pairing = wpp_intersection(&k, &gamma, a);
    let gamma_sq = wpp_intersection(&gamma, &gamma, a);
    let a1 = a_plus_one(&GermSpec::SmoothPoint, &beta)?;
    let value = &adjunction_pairing / &a1 - &gamma_sq;
    Ok(GammaEvaluation { adjunction_pairing, a_plus_one: a1, gamma_sq, value })
}

/// Star route: `Gamma ~ deg * H` with `H = -S|_S` and
/// `K_S + Diff = -sum C_i / m_i`, both read off the subdivided fan.
pub fn gamma_tilde_sq_star(germ: &GermSpec, weights: &[u64], phi_degree: u64) -> Result<GammaEvaluation> {
    let rho = germ.blowup_ray(weights)?;
    let star = germ.fan().star_subdivide(&rho)?.star_surface(&rho)?;
    let quadric = match germ {
        GermSpec::OrdinaryDoublePoint => Some([weights[0], weights[1], weights[2], weights[3]]),
        _ => None,
    };
    let model = SurfaceModel::from_star(star, quadric)?;
    let h = model.restriction_class()?;
    let gamma = h.scale(&rat(phi_degree as i64, 1));
    let adjunction_pairing = model.intersect(&model.adjunction_class(), &gamma)?;
    let gamma_sq = model.intersect(&gamma, &gamma)?;
    let a1 = a_plus_one(germ, weights)?;
    let value = &adjunction_pairing / &a1 - &gamma_sq;
    Ok(GammaEvaluation { adjunction_pairing, a_plus_one: a1, gamma_sq, value })
}

/// `-(beta2 + 1)(1/beta3 + 1/beta4)`.
pub fn odp_closed_form(b2: u64, b3: u64, b4: u64) -> Rational {
    -rat(b2 as i64 + 1, 1) * (rat(1, b3 as i64) + rat(1, b4 as i64))
}

/// `(Gamma~^2)` on the blown-up surface for a contraction type.
pub fn gamma_tilde_sq(t: &ContractionType) -> Result<Rational> {
    let w = t.weights();
    match t.germ() {
        GermSpec::OrdinaryDoublePoint => Ok(odp_closed_form(w[1], w[2], w[3])),
        GermSpec::SmoothPoint => Ok(gamma_tilde_sq_wpp([w[0], w[1], w[2]], t.phi_degree())?.value),
        g => Err(Error::InvalidParameters(format!("no contraction types over {g}"))),
    }
}
