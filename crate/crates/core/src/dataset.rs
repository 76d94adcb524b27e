use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_usize, to_decimal, to_f64, Rational};

/// Divisor used when turning a sum of squared deviations into a variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n - 1`.
    Sample,
}

impl Convention {
    /// Factor that converts a population variance into this convention.
    /// `None` for the sample convention with `n < 2`.
    pub fn factor(self, n: usize) -> Option<Rational> {
        match self {
            Convention::Population => Some(Rational::one()),
            Convention::Sample if n >= 2 => Some(from_usize(n) / from_usize(n - 1)),
            Convention::Sample => None,
        }
    }

    pub fn from_population(self, variance: &Rational, n: usize) -> Option<Rational> {
        self.factor(n).map(|f| variance * f)
    }

    pub fn to_population(self, variance: &Rational, n: usize) -> Option<Rational> {
        self.factor(n).map(|f| variance / f)
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "population" | "pop" | "" => Ok(Convention::Population),
            "sample" => Ok(Convention::Sample),
            other => Err(Error::InvalidInput(format!("unknown convention {other:?}"))),
        }
    }
}

/// A non-empty finite dataset of exact values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dataset {
    values: Vec<Rational>,
}

impl Dataset {
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("dataset must not be empty".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(n: usize, value: Rational) -> Self {
        assert!(n > 0, "dataset must not be empty");
        Self {
            values: vec![value; n],
        }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sorted(mut self) -> Self {
        self.values.sort();
        self
    }

    pub fn sum(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |acc, x| acc + x)
    }

    pub fn sum_of_squares(&self) -> Rational {
        self.values.iter().fold(Rational::zero(), |acc, x| acc + x * x)
    }

    pub fn mean(&self) -> Rational {
        self.sum() / from_usize(self.len())
    }

    /// `Σ x_i² / n − mean²`.
    pub fn population_variance(&self) -> Rational {
        let n = from_usize(self.len());
        let mean = self.sum() / &n;
        self.sum_of_squares() / n - &mean * &mean
    }

    /// Population variance times `n / (n − 1)`; `None` when `n < 2`.
    pub fn sample_variance(&self) -> Option<Rational> {
        Convention::Sample.from_population(&self.population_variance(), self.len())
    }

    pub fn variance(&self, convention: Convention) -> Option<Rational> {
        convention.from_population(&self.population_variance(), self.len())
    }

    pub fn min(&self) -> &Rational {
        self.values.iter().min().expect("non-empty")
    }

    pub fn max(&self) -> &Rational {
        self.values.iter().max().expect("non-empty")
    }

    /// Number of values strictly inside `(lower, upper)`.
    pub fn interior_count(&self, lower: &Rational, upper: &Rational) -> usize {
        self.values
            .iter()
            .filter(|x| lower < *x && *x < upper)
            .count()
    }

    pub fn within(&self, lower: &Rational, upper: &Rational) -> bool {
        self.values.iter().all(|x| lower <= x && x <= upper)
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Self {
        Self {
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(to_f64).collect()
    }

    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.values.iter().map(to_decimal).collect()
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal_strings().join(" "))
    }
}
