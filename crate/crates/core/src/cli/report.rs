//! Serializable verdict records shared by `check --json` and `audit`.

use serde::Serialize;

use crate::feasibility::{FeasibilityVerdict, Status};
use crate::rational::{to_decimal, to_ratio_string, Interval, Rational};

#[derive(Debug, Clone, Serialize)]
pub struct Number {
    pub rational: String,
    pub decimal: String,
}

impl From<&Rational> for Number {
    fn from(r: &Rational) -> Self {
        Self {
            rational: to_ratio_string(r),
            decimal: to_decimal(r),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Window {
    pub lower: Number,
    pub upper: Number,
}

impl From<&Interval> for Window {
    fn from(w: &Interval) -> Self {
        Self {
            lower: (&w.lower).into(),
            upper: (&w.upper).into(),
        }
    }
}

/// One verdict; field order is the output key order.
#[derive(Debug, Clone, Serialize)]
pub struct VerdictRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub status: Status,
    pub max_attainable_variance: Option<Number>,
    pub reported_variance_window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<String>>,
    pub margin: Option<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmean: Option<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_attainable_variance: Option<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl VerdictRecord {
    pub fn from_verdict(id: Option<String>, v: &FeasibilityVerdict) -> Self {
        Self {
            id,
            status: v.status,
            max_attainable_variance: Some((&v.max_attainable_variance).into()),
            reported_variance_window: Some((&v.reported_variance_window).into()),
            witness: v.witness.as_ref().map(|w| w.to_decimal_strings()),
            margin: Some((&v.margin).into()),
            argmean: Some((&v.argmean).into()),
            min_attainable_variance: Some((&v.min_attainable_variance).into()),
            error: None,
        }
    }

    pub fn invalid(id: Option<String>, message: String) -> Self {
        Self {
            id,
            status: Status::InvalidInput,
            max_attainable_variance: None,
            reported_variance_window: None,
            witness: None,
            margin: None,
            argmean: None,
            min_attainable_variance: None,
            error: Some(message),
        }
    }

    /// Flat row for CSV output.
    pub fn csv_row(&self) -> [String; 9] {
        let dec = |n: &Option<Number>| n.as_ref().map(|n| n.decimal.clone()).unwrap_or_default();
        let rat = |n: &Option<Number>| n.as_ref().map(|n| n.rational.clone()).unwrap_or_default();
        let (lo, hi) = match &self.reported_variance_window {
            Some(w) => (w.lower.decimal.clone(), w.upper.decimal.clone()),
            None => (String::new(), String::new()),
        };
        [
            self.id.clone().unwrap_or_default(),
            self.status.to_string(),
            rat(&self.max_attainable_variance),
            dec(&self.max_attainable_variance),
            lo,
            hi,
            dec(&self.margin),
            self.witness.as_ref().map(|w| w.join(" ")).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "id",
    "status",
    "max_attainable_variance",
    "max_attainable_variance_decimal",
    "reported_variance_lower",
    "reported_variance_upper",
    "margin",
    "witness",
    "error",
];
