use serde::Serialize;

use super::ModelError;
use crate::scalar::Scalar;

/// Shifted monomial edge cost `a·x^d + b` with `a, b ≥ 0` and `d ≥ 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CostFunction<T> {
    a: T,
    b: T,
    degree: u32,
}

impl<T: Scalar> CostFunction<T> {
    pub fn new(a: T, b: T, degree: u32) -> Result<Self, ModelError> {
        if a < T::zero() || b < T::zero() {
            return Err(ModelError::InvalidCost(format!(
                "coefficients must be nonnegative (a = {a}, b = {b})"
            )));
        }
        if degree == 0 {
            return Err(ModelError::InvalidCost("degree must be at least 1".into()));
        }
        Ok(Self { a, b, degree })
    }

    pub fn linear(a: T, b: T) -> Result<Self, ModelError> {
        Self::new(a, b, 1)
    }

    pub fn constant(b: T) -> Result<Self, ModelError> {
        Self::new(T::zero(), b, 1)
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// True cost `a·x^d + b`.
    pub fn evaluate(&self, x: &T) -> T {
        self.a.clone() * x.powu(self.degree) + self.b.clone()
    }

    /// Cost as seen by a user scaling the congestion term by `r`.
    pub fn perceived(&self, x: &T, r: &T) -> T {
        r.clone() * self.a.clone() * x.powu(self.degree) + self.b.clone()
    }

    /// `d/dx (a·x^d + b)`.
    pub fn derivative(&self, x: &T) -> T {
        if self.degree == 1 {
            return self.a.clone();
        }
        T::from_usize(self.degree as usize) * self.a.clone() * x.powu(self.degree - 1)
    }

    /// Marginal social cost `d/dx (x·C(x)) = (d+1)·a·x^d + b`.
    pub fn marginal(&self, x: &T) -> T {
        T::from_usize(self.degree as usize + 1) * self.a.clone() * x.powu(self.degree)
            + self.b.clone()
    }

    pub fn is_constant(&self) -> bool {
        self.a.is_zero()
    }
}
