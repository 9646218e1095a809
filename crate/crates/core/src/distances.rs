//! Distances between subspaces built from principal angles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::{cross_gram, principal_angles, AngleSpectrum, Subspace};
use crate::linalg::{clamp_unit, determinant, TolerancePolicy};

/// The supported distances. Ids double as the CLI vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "theta1")]
    Theta1,
    #[serde(rename = "thetaF")]
    ThetaF,
    #[serde(rename = "thetaK")]
    ThetaK,
    #[serde(rename = "chordal")]
    Chordal,
    #[serde(rename = "geodesic")]
    Geodesic,
    #[serde(rename = "fubini-study")]
    FubiniStudy,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Theta1,
        Metric::ThetaF,
        Metric::ThetaK,
        Metric::Chordal,
        Metric::Geodesic,
        Metric::FubiniStudy,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Metric::Theta1 => "theta1",
            Metric::ThetaF => "thetaF",
            Metric::ThetaK => "thetaK",
            Metric::Chordal => "chordal",
            Metric::Geodesic => "geodesic",
            Metric::FubiniStudy => "fubini-study",
        }
    }

    /// Whether every value is one of the principal angles of the pair.
    pub fn is_angle_distance(self) -> bool {
        matches!(self, Metric::Theta1 | Metric::ThetaF | Metric::ThetaK)
    }

    /// Whether the distance vanishes only on identical subspaces.
    pub fn is_proper(self) -> bool {
        self != Metric::Theta1
    }

    /// Whether the value is measured in radians (everything but chordal).
    pub fn is_angular(self) -> bool {
        self != Metric::Chordal
    }

    /// Evaluate from a precomputed spectrum.
    pub fn from_spectrum(self, s: &AngleSpectrum, tol: &TolerancePolicy) -> f64 {
        match self {
            Metric::Theta1 => theta_1(s),
            Metric::ThetaF => theta_f(s, tol.eps_angle),
            Metric::ThetaK => theta_k(s),
            Metric::Chordal => chordal(s),
            Metric::Geodesic => geodesic(s),
            Metric::FubiniStudy => fubini_study_product(s),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_string()))
    }
}

pub fn theta_1(s: &AngleSpectrum) -> f64 {
    s.min()
}

/// Smallest angle above `eps_angle`; zero when there is none (identical spans).
pub fn theta_f(s: &AngleSpectrum, eps_angle: f64) -> f64 {
    s.nonzero(eps_angle).first().copied().unwrap_or(0.0)
}

pub fn theta_k(s: &AngleSpectrum) -> f64 {
    s.max()
}

/// `sqrt(Σ sin² θ_i)`.
pub fn chordal(s: &AngleSpectrum) -> f64 {
    s.angles()
        .iter()
        .map(|t| t.sin().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `sqrt(k − tr(VᵀUUᵀV))`, computed without angles.
pub fn chordal_trace(u: &Subspace, v: &Subspace) -> Result<f64> {
    let m = cross_gram(u, v)?;
    let tr = m.frobenius_dot(&m);
    Ok((u.dim() as f64 - tr).max(0.0).sqrt())
}

/// `sqrt(Σ θ_i²)`.
pub fn geodesic(s: &AngleSpectrum) -> f64 {
    s.angles().iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// `arccos |det(UᵀV)|`.
pub fn fubini_study(u: &Subspace, v: &Subspace) -> Result<f64> {
    let det = determinant(&cross_gram(u, v)?)?;
    Ok(clamp_unit(det.abs())?.acos())
}

/// `arccos Π cos θ_i`.
pub fn fubini_study_product(s: &AngleSpectrum) -> f64 {
    s.angles()
        .iter()
        .map(|t| t.cos())
        .product::<f64>()
        .clamp(0.0, 1.0)
        .acos()
}

/// Distance between `u` and `v` under `metric`.
pub fn evaluate(metric: Metric, u: &Subspace, v: &Subspace, tol: &TolerancePolicy) -> Result<f64> {
    match metric {
        Metric::FubiniStudy => fubini_study(u, v),
        _ => Ok(metric.from_spectrum(&principal_angles(u, v)?, tol)),
    }
}
