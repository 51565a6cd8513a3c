use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ellipticity pair, spatial dimension and nonlinearity exponent of
/// `-M(D^2 u) + |u|^{s-1} u = f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    lambda: f64,
    big_lambda: f64,
    dim: usize,
    s: f64,
}

impl ProblemParams {
    pub fn new(lambda: f64, big_lambda: f64, dim: usize, s: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Parameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(big_lambda.is_finite() && big_lambda >= lambda) {
            return Err(Error::Parameter(format!(
                "Lambda must satisfy lambda <= Lambda, got lambda={lambda}, Lambda={big_lambda}"
            )));
        }
        if dim == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if !(s.is_finite() && s > 1.0) {
            return Err(Error::Parameter(format!("exponent s must exceed 1, got {s}")));
        }
        Ok(Self {
            lambda,
            big_lambda,
            dim,
            s,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    #[allow(non_snake_case)]
    pub fn Lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `(lambda/Lambda)(N-1) + 1`, the smallest effective radial dimension.
    pub fn n_plus(&self) -> f64 {
        self.lambda / self.big_lambda * (self.dim as f64 - 1.0) + 1.0
    }

    /// `(Lambda/lambda)(N-1) + 1`, the largest effective radial dimension.
    pub fn n_minus(&self) -> f64 {
        self.big_lambda / self.lambda * (self.dim as f64 - 1.0) + 1.0
    }

    /// Same parameters with a different spatial dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.lambda, self.big_lambda, dim, self.s)
    }

    pub fn is_isotropic(&self) -> bool {
        self.lambda == self.big_lambda
    }
}
