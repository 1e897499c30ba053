//! Cutoff-regularized vacuum energy of a Casimir piston, empty or filled
//! with a weak inhomogeneous dielectric.
//!
//! Natural units ħ = c = 1 throughout. Energies per unit plate area carry
//! units of 1/length³.

pub mod acceptance;
pub mod asymptotics;
pub mod error;
pub mod ideal_piston;
pub mod model;
pub mod perturbation;
pub mod precise;
pub mod quadrature;
pub mod specfun;
pub mod summation;

pub use error::{PistonError, Result};

use serde::{Deserialize, Serialize};

/// How a number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Numeric,
    Closed,
    Asymptotic,
    Quadrature,
    Sum,
    TransferMatrix,
    Fit,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Numeric => "numeric",
            Method::Closed => "closed",
            Method::Asymptotic => "asymptotic",
            Method::Quadrature => "quadrature",
            Method::Sum => "sum",
            Method::TransferMatrix => "transfer_matrix",
            Method::Fit => "fit",
        })
    }
}
