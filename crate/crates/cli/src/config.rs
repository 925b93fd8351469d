//! JSON problem configs.
//!
//! Lattice data is exact: coordinates are integers or `"p/q"` strings.
//! Weights, sharpness values and tolerances are plain decimals.

use serde::{Deserialize, Serialize};
use torvol_core::lattice::{format_rational, parse_rational};
use torvol_core::{Fan, LatticePolytope, MetricModel, Rational, RationalPoint, TorusDivisor};

use crate::CliError;

/// An exact coordinate: a JSON integer or a rational string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exact {
    Int(i64),
    Text(String),
}

impl Exact {
    pub fn to_rational(&self) -> Result<Rational, CliError> {
        match self {
            Exact::Int(n) => Ok(Rational::from_integer((*n).into())),
            Exact::Text(s) => parse_rational(s).map_err(|e| CliError::Config(e.to_string())),
        }
    }

    pub fn from_rational(q: &Rational) -> Self {
        Exact::Text(format_rational(q))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpec {
    pub rays: Vec<Vec<i64>>,
    pub cones: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub vertices: Vec<Vec<Exact>>,
}

/// Either a fan with divisor coefficients or the vertices of `Δ`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan: Option<FanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polytope: Option<PolytopeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    /// `ψ` of the reference polytope, or of `vertices` when given.
    Canonical {
        #[serde(default)]
        vertices: Option<Vec<Vec<Exact>>>,
    },
    FubiniStudy {
        #[serde(default)]
        dim: Option<usize>,
    },
    /// Points default to the lattice points of the reference polytope, weights to 1.
    LogSumExp {
        #[serde(default)]
        points: Option<Vec<Vec<Exact>>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        sharpness: f64,
    },
    Scaled {
        base: Box<MetricSpec>,
        lambda: f64,
    },
    Sharpened {
        base: Box<MetricSpec>,
        factor: f64,
    },
    Sum {
        terms: Vec<MetricSpec>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `g_k` is the metric sharpened by `k`; the limit is the canonical metric.
    #[default]
    Sharpened,
    /// `g_k` is the metric itself.
    Constant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub k: Vec<u32>,
    #[serde(default)]
    pub family: Family,
    /// Random sample points added to the distance grid.
    #[serde(default)]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lmax: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Grid resolution `n` of the conjugate grid `Δ ∩ (1/n)Z^d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<u32>,
}

/// Top-level config. Unknown top-level keys are ignored so that report
/// output (which carries extra fields) can be fed back in.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variety: Option<VarietySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polynomial: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default)]
    pub options: OptionsSpec,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// The reference polytope `Δ_D` of the variety section, if any.
    pub fn reference(&self) -> Result<Option<LatticePolytope>, CliError> {
        self.variety.as_ref().map(VarietySpec::polytope).transpose()
    }

    /// The metric, checked against the reference polytope when both are given.
    pub fn metric(&self) -> Result<MetricModel, CliError> {
        let spec = self.metric.as_ref().ok_or_else(|| CliError::Config("config has no metric".into()))?;
        let reference = self.reference()?;
        let dim = reference.as_ref().map(LatticePolytope::dim);
        let m = build_metric(spec, reference.as_ref(), dim)?;
        if let Some(p) = &reference {
            if p.vertices() != m.polytope().vertices() {
                return Err(CliError::Config("the metric polytope differs from the polytope of the variety".into()));
            }
        }
        Ok(m)
    }
}

fn point(coords: &[Exact]) -> Result<RationalPoint, CliError> {
    Ok(RationalPoint::new(coords.iter().map(Exact::to_rational).collect::<Result<_, _>>()?))
}

fn points(list: &[Vec<Exact>]) -> Result<Vec<RationalPoint>, CliError> {
    list.iter().map(|p| point(p)).collect()
}

fn hull(list: &[Vec<Exact>]) -> Result<LatticePolytope, CliError> {
    let pts = points(list)?;
    let dim = pts.first().ok_or_else(|| CliError::Config("empty vertex list".into()))?.dim();
    Ok(LatticePolytope::from_vertices(dim, &pts)?)
}

impl VarietySpec {
    pub fn polytope(&self) -> Result<LatticePolytope, CliError> {
        match (&self.fan, &self.coeffs, &self.polytope) {
            (Some(fan), Some(coeffs), None) => {
                let dim = fan.rays.first().map(Vec::len).ok_or_else(|| CliError::Config("fan has no rays".into()))?;
                let fan = Fan::new(dim, fan.rays.clone(), fan.cones.clone())?;
                Ok(TorusDivisor::new(fan, coeffs.clone())?.polytope()?)
            }
            (None, None, Some(p)) => hull(&p.vertices),
            (Some(_), None, None) => Err(CliError::Config("variety.fan needs variety.coeffs".into())),
            _ => Err(CliError::Config("variety must give either fan and coeffs or polytope".into())),
        }
    }

    pub fn from_polytope(p: &LatticePolytope) -> Self {
        let vertices = p.vertices().iter().map(|v| v.coords().iter().map(Exact::from_rational).collect()).collect();
        Self { polytope: Some(PolytopeSpec { vertices }), ..Self::default() }
    }
}

/// Terms of a sum carry their own points: only the dimension is inherited.
fn build_metric(spec: &MetricSpec, reference: Option<&LatticePolytope>, dim: Option<usize>) -> Result<MetricModel, CliError> {
    let need = |what: &str| CliError::Config(format!("{what} metric needs a variety or explicit points"));
    Ok(match spec {
        MetricSpec::Canonical { vertices: Some(v) } => MetricModel::canonical_on(hull(v)?),
        MetricSpec::Canonical { vertices: None } => {
            MetricModel::canonical_on(reference.ok_or_else(|| need("canonical"))?.clone())
        }
        MetricSpec::FubiniStudy { dim: None } => {
            MetricModel::fubini_study(dim.ok_or_else(|| need("fubini_study"))?)
        }
        MetricSpec::LogSumExp { points: pts, weights, sharpness } => {
            let pts = match pts {
                Some(p) => points(p)?,
                None => {
                    reference.ok_or_else(|| need("log_sum_exp"))?.lattice_points(1).iter().map(|e| e.to_rational()).collect()
                }
            };
            let weights = weights.clone().unwrap_or_else(|| vec![1.0; pts.len()]);
            MetricModel::log_sum_exp(pts, &weights, *sharpness)?
        }
        MetricSpec::FubiniStudy { dim: Some(d) } => MetricModel::fubini_study(*d),
        MetricSpec::Scaled { base, lambda } => build_metric(base, reference, dim)?.scaled(*lambda),
        MetricSpec::Sharpened { base, factor } => build_metric(base, reference, dim)?.sharpened(*factor)?,
        MetricSpec::Sum { terms } => {
            let mut it = terms.iter();
            let first = it.next().ok_or_else(|| CliError::Config("sum metric has no terms".into()))?;
            let mut acc = build_metric(first, None, dim)?;
            for t in it {
                acc = acc.add(&build_metric(t, None, dim)?)?;
            }
            acc
        }
    })
}
