//! Random-matrix reference laws.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// First crossing of the Wigner–Dyson and Poisson spacing densities.
pub const S0: f64 = 0.4729;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    /// `(π/2) s exp(-π s²/4)`
    WignerDyson,
    /// `exp(-s)`
    Poisson,
    /// χ² with one degree of freedom, `exp(-x/2) / sqrt(2πx)`.
    PorterThomas,
    StdNormal,
}

pub fn reference_pdf(kind: ReferenceKind, x: f64) -> Result<f64> {
    let domain = |ok: bool| {
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("{x} is outside the domain of {kind:?}")))
        }
    };
    match kind {
        ReferenceKind::WignerDyson => {
            domain(x >= 0.0)?;
            Ok(wigner_dyson_pdf(x))
        }
        ReferenceKind::Poisson => {
            domain(x >= 0.0)?;
            Ok((-x).exp())
        }
        ReferenceKind::PorterThomas => {
            domain(x > 0.0)?;
            Ok((-x / 2.0).exp() / (2.0 * PI * x).sqrt())
        }
        ReferenceKind::StdNormal => {
            domain(x.is_finite())?;
            Ok(std_normal_pdf(x))
        }
    }
}

pub fn wigner_dyson_pdf(s: f64) -> f64 {
    PI / 2.0 * s * (-PI / 4.0 * s * s).exp()
}

pub fn wigner_dyson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-PI / 4.0 * s * s).exp()
    }
}

pub fn poisson_cdf(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        1.0 - (-s).exp()
    }
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-x * x / 2.0).exp() / (2.0 * PI).sqrt()
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2))
}

/// Density of `ln(c²)` for `c ~ N(0, 1)`.
pub fn log_porter_thomas_pdf(y: f64) -> f64 {
    let x = y.exp();
    (y / 2.0 - x / 2.0).exp() / (2.0 * PI).sqrt()
}

pub fn log_porter_thomas_cdf(y: f64) -> f64 {
    erf((y.exp() / 2.0).sqrt())
}
