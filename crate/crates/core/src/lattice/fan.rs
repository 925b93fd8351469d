use num_traits::Zero;

use super::exact::{self, int_rows};
use super::polytope::{positively_spans, subsets, Inequality, LatticePolytope};
use super::point::{q, Rational, RationalPoint};
use crate::error::{Error, Result};

/// Rational polyhedral cone generated by primitive integer rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    rays: Vec<Vec<i64>>,
}

impl Cone {
    pub fn new(rays: Vec<Vec<i64>>) -> Result<Self> {
        for r in &rays {
            if r.iter().all(|&x| x == 0) {
                return Err(Error::InvalidFan("zero ray".into()));
            }
            if exact::gcd_of(r) != 1 {
                return Err(Error::InvalidFan(format!("ray {r:?} is not primitive")));
            }
        }
        Ok(Self { rays })
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    fn ambient_dim(&self) -> usize {
        self.rays.first().map_or(0, Vec::len)
    }

    /// A cone is strict iff it contains no line, i.e. `0 ∉ conv(rays)`.
    pub fn is_strict(&self) -> bool {
        if self.rays.is_empty() {
            return true;
        }
        let pts: Vec<RationalPoint> = self.rays.iter().map(|r| RationalPoint::from_ints(r)).collect();
        let hull = LatticePolytope::from_vertices(self.ambient_dim(), &pts).expect("non-empty ray set");
        !hull.contains(&RationalPoint::zero(self.ambient_dim()))
    }

    /// Determinant of the ray matrix when the rays form a basis candidate (`d` rays in `R^d`).
    pub fn determinant(&self) -> Option<i64> {
        let d = self.ambient_dim();
        (self.rays.len() == d && d > 0).then(|| exact::int_determinant(&self.rays))
    }

    /// Smooth iff the rays are part of a `Z`-basis of `N`. For maximal cones this is `|det| = 1`.
    pub fn is_smooth(&self) -> bool {
        match self.determinant() {
            Some(det) => det.abs() == 1,
            None => {
                // lower-dimensional: rays are part of a basis iff the gcd of the maximal minors is 1
                let d = self.ambient_dim();
                let k = self.rays.len();
                if k > d || exact::rank(&int_rows(&self.rays), d) < k {
                    return false;
                }
                let minors: Vec<i64> = subsets(d, k)
                    .iter()
                    .map(|cols| {
                        let sub: Vec<Vec<i64>> = self.rays.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
                        exact::int_determinant(&sub)
                    })
                    .collect();
                exact::gcd_of(&minors) == 1
            }
        }
    }

    /// Exact membership test for a rational vector.
    pub fn contains(&self, v: &RationalPoint) -> bool {
        let d = v.dim();
        if v.0.iter().all(Zero::is_zero) {
            return true;
        }
        if self.rays.is_empty() {
            return false;
        }
        let r = exact::rank(&int_rows(&self.rays), d);
        subsets(self.rays.len(), r).iter().any(|s| {
            let cols: Vec<&Vec<i64>> = s.iter().map(|&i| &self.rays[i]).collect();
            let a: Vec<Vec<Rational>> = (0..d).map(|row| cols.iter().map(|c| q(c[row])).collect()).collect();
            exact::solve_unique(&a, &v.0, r).is_some_and(|c| exact::is_all_nonnegative(&c))
        })
    }
}

/// Fan given by its rays and its maximal cones (as ray-index lists).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<Vec<i64>>,
    cones: Vec<Vec<usize>>,
    complete: bool,
}

impl Fan {
    /// Directly supplied fan. Rays must be distinct and primitive and every cone strict.
    /// Completeness is not decided for such fans.
    pub fn new(dim: usize, rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Result<Self> {
        for r in &rays {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.len() });
            }
        }
        for (i, a) in rays.iter().enumerate() {
            if rays[..i].contains(a) {
                return Err(Error::InvalidFan(format!("duplicate ray {a:?}")));
            }
        }
        let fan = Self { dim, rays, cones, complete: false };
        for (i, c) in fan.cones.iter().enumerate() {
            if c.iter().any(|&j| j >= fan.rays.len()) {
                return Err(Error::InvalidFan(format!("cone {i} references a missing ray")));
            }
            let cone = fan.cone(i)?;
            if !cone.is_strict() {
                return Err(Error::InvalidFan(format!("cone {i} contains a line")));
            }
        }
        Ok(fan)
    }

    /// Normal fan of a full-dimensional polytope: rays are the primitive inner facet
    /// normals, and each vertex contributes the cone of facets tight there.
    pub fn normal_fan(polytope: &LatticePolytope) -> Result<Self> {
        if !polytope.is_full_dimensional() {
            return Err(Error::DegeneratePolytope);
        }
        let rays: Vec<Vec<i64>> = polytope.facets().iter().map(|f| f.normal.clone()).collect();
        let cones = polytope.vertices().iter().map(|v| polytope.tight_facets(v)).collect();
        Ok(Self { dim: polytope.dim(), rays, cones, complete: true })
    }

    /// Fan of `P^d`: rays `e_1, …, e_d, −(e_1 + … + e_d)`, maximal cones all `d`-subsets.
    pub fn projective_space(dim: usize) -> Self {
        let mut rays: Vec<Vec<i64>> = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        rays.push(vec![-1; dim]);
        let cones = subsets(dim + 1, dim);
        Self { dim, rays, cones, complete: true }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[Vec<i64>] {
        &self.rays
    }

    pub fn cone_indices(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn cone(&self, i: usize) -> Result<Cone> {
        Cone::new(self.cones[i].iter().map(|&j| self.rays[j].clone()).collect())
    }

    pub fn cones(&self) -> Vec<Cone> {
        (0..self.cones.len()).map(|i| self.cone(i).expect("validated cone")).collect()
    }

    /// `true` only for fans constructed as normal fans (or the projective-space fan).
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn smoothness(&self) -> SmoothnessReport {
        let cones: Vec<ConeSmoothness> = self
            .cones()
            .iter()
            .enumerate()
            .map(|(index, c)| ConeSmoothness {
                index,
                determinant: c.determinant(),
                smooth: c.is_smooth(),
            })
            .collect();
        let smooth = cones.iter().all(|c| c.smooth);
        SmoothnessReport { cones, smooth }
    }
}

/// Per-cone smoothness diagnostic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeSmoothness {
    pub index: usize,
    /// Ray determinant when the cone has exactly `d` rays.
    pub determinant: Option<i64>,
    pub smooth: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessReport {
    pub cones: Vec<ConeSmoothness>,
    pub smooth: bool,
}

pub fn validate_smooth_fan(fan: &Fan) -> SmoothnessReport {
    fan.smoothness()
}

/// Torus-invariant divisor `D = Σ a_i D_i` on a fan with rays `u_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusDivisor {
    fan: Fan,
    coeffs: Vec<i64>,
}

impl TorusDivisor {
    pub fn new(fan: Fan, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != fan.rays().len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for {} rays",
                coeffs.len(),
                fan.rays().len()
            )));
        }
        Ok(Self { fan, coeffs })
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.fan != other.fan {
            return Err(Error::InvalidArgument("divisors live on different fans".into()));
        }
        Self::new(self.fan.clone(), self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    /// `Δ_D = {x : ⟨x, u_i⟩ ≥ −a_i for every ray}`.
    pub fn polytope(&self) -> Result<LatticePolytope> {
        self.support_function()?;
        let inequalities: Vec<Inequality> = self
            .fan
            .rays()
            .iter()
            .zip(&self.coeffs)
            .map(|(u, &a)| Inequality::new(u.clone(), q(-a)))
            .collect();
        if !self.fan.is_complete() && !positively_spans(self.fan.rays(), self.fan.dim()) {
            return Err(Error::Unbounded);
        }
        LatticePolytope::from_inequalities(self.fan.dim(), &inequalities)
    }

    /// Cone-wise linear forms `m_σ` with `⟨m_σ, u_i⟩ = −a_i` on the rays of `σ`.
    pub fn support_function(&self) -> Result<SupportFunction> {
        let d = self.fan.dim();
        let mut forms = Vec::with_capacity(self.fan.cone_indices().len());
        for (ci, cone) in self.fan.cone_indices().iter().enumerate() {
            let a: Vec<Vec<Rational>> = cone.iter().map(|&j| self.fan.rays()[j].iter().map(|&x| q(x)).collect()).collect();
            let b: Vec<Rational> = cone.iter().map(|&j| q(-self.coeffs[j])).collect();
            let Some(m) = exact::solve(&a, &b, d) else {
                return Err(Error::NonCartier { cone: ci });
            };
            let unique = exact::rank(&a, d) == d;
            if unique && !m.iter().all(|x| x.is_integer()) {
                return Err(Error::NonCartier { cone: ci });
            }
            forms.push(RationalPoint(m));
        }
        Ok(SupportFunction { fan: self.fan.clone(), forms })
    }

    /// `min_{v ∈ vert Δ_D} ⟨v, u⟩`, which is the support function for nef divisors.
    pub fn support_value(&self, u: &RationalPoint) -> Result<Rational> {
        let p = self.polytope()?;
        Ok(support_value(&p, u))
    }
}

/// `min_{v ∈ vert P} ⟨v, u⟩`.
pub fn support_value(p: &LatticePolytope, u: &RationalPoint) -> Rational {
    p.vertices()
        .iter()
        .map(|v| v.dot(u))
        .min()
        .expect("polytope has a vertex")
}

/// Piecewise-linear support function `ψ_D`: one linear form per maximal cone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportFunction {
    fan: Fan,
    forms: Vec<RationalPoint>,
}

impl SupportFunction {
    pub fn forms(&self) -> &[RationalPoint] {
        &self.forms
    }

    /// `ψ(u)` via the linear form of a cone containing `u`; `None` outside the support.
    pub fn eval(&self, u: &RationalPoint) -> Option<Rational> {
        self.fan
            .cones()
            .iter()
            .position(|c| c.contains(u))
            .map(|i| self.forms[i].dot(u))
    }

    /// Linear forms of two cones agree on their shared rays.
    pub fn is_continuous(&self) -> bool {
        let idx = self.fan.cone_indices();
        for i in 0..idx.len() {
            for j in i + 1..idx.len() {
                for r in idx[i].iter().filter(|r| idx[j].contains(r)) {
                    let u = RationalPoint::from_ints(&self.fan.rays()[*r]);
                    if self.forms[i].dot(&u) != self.forms[j].dot(&u) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
