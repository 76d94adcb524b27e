//! Feasibility of reported summary statistics.
//!
//! A report `(n, mean, sd, min, max)` is feasible when some real dataset
//! reproduces it. Rounded values are widened to their rounding windows and
//! the sharp maximum variance is maximized exactly over the mean window.
//!
//! Rounding model: a literal with `d` decimals stands for the closed window
//! `value ± 5·10^(−d−1)`. This is a modeling choice; an `exact` flag
//! collapses the window to the literal's value.
//!
//! For bounds-only semantics and a fixed mean the attainable variances form
//! the whole interval `[0, max]`: the feasible set is convex, variance is
//! continuous on it, and shrinking the extremal dataset toward its mean
//! sweeps every intermediate value. This is the one analytic step taken
//! beyond the closed form itself.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds::{max_variance, witness_dataset, BoundsSpec, ProblemSpec, Semantics};
use crate::dataset::{Convention, Dataset};
use crate::error::{Error, Result};
use crate::oracle::{attained_mean_range, attained_min_variance, attained_vertex_max};
use crate::rational::{
    exact_sqrt, from_usize, parse_literal, ratio, to_decimal, Interval, Rational,
};

/// A reported decimal and the interval of true values consistent with it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoundedValue {
    literal: String,
    value: Rational,
    decimals: u32,
    exact: bool,
}

impl RoundedValue {
    /// Precision is inferred from the literal (`"0.10"` → 2 decimals).
    /// Fractions such as `"1/3"` are always exact.
    pub fn parse(literal: &str) -> Result<Self> {
        let parsed = parse_literal(literal)?;
        Ok(Self {
            literal: literal.trim().to_string(),
            value: parsed.value,
            decimals: parsed.decimals.unwrap_or(0),
            exact: parsed.decimals.is_none(),
        })
    }

    pub fn exact(literal: &str) -> Result<Self> {
        Ok(Self::parse(literal)?.into_exact())
    }

    pub fn from_rational(value: Rational) -> Self {
        Self {
            literal: to_decimal(&value),
            value,
            decimals: 0,
            exact: true,
        }
    }

    pub fn into_exact(mut self) -> Self {
        self.exact = true;
        self
    }

    pub fn with_decimals(mut self, decimals: u32) -> Self {
        self.decimals = decimals;
        self
    }

    pub fn literal(&self) -> &str {
        &self.literal
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    pub fn decimals(&self) -> u32 {
        self.decimals
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Half of one unit in the last reported place.
    pub fn half_width(&self) -> Rational {
        if self.exact {
            return Rational::zero();
        }
        let unit = Rational::new(
            One::one(),
            num_traits::pow(num_bigint::BigInt::from(10), self.decimals as usize),
        );
        unit / from_usize(2)
    }

    pub fn window(&self) -> Interval {
        let h = self.half_width();
        Interval {
            lower: &self.value - &h,
            upper: &self.value + h,
        }
    }

    /// Whether a true value `x` could have been reported as this literal.
    /// Both window endpoints count, whichever way the reporter broke ties.
    pub fn is_consistent(&self, x: &Rational) -> bool {
        self.window().contains(x)
    }
}

/// A claimed set of summary statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportedStats {
    pub n: usize,
    pub mean: RoundedValue,
    pub sd: RoundedValue,
    pub lower: Rational,
    pub upper: Rational,
    pub convention: Convention,
    pub semantics: Semantics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Feasible,
    Infeasible,
    InvalidInput,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::InvalidInput => "invalid_input",
        })
    }
}

/// Outcome of a feasibility check. Variances are in the reported convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub status: Status,
    /// Largest attainable variance over the mean window.
    pub max_attainable_variance: Rational,
    /// Smallest attainable variance over the mean window (0 for bounds-only).
    pub min_attainable_variance: Rational,
    /// Mean at which the maximum is attained (smallest such mean).
    pub argmean: Rational,
    pub reported_variance_window: Interval,
    /// Present iff feasible.
    pub witness: Option<Dataset>,
    /// `max_attainable_variance − reported_variance_window.lower`; negative
    /// when the report needs more spread than any dataset allows.
    pub margin: Rational,
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        self.status == Status::Feasible
    }
}

fn clip_mean_window(window: &Interval, bounds: &Interval) -> Result<Interval> {
    window.intersect(bounds).ok_or_else(|| Error::EmptyWindow {
        window: window.to_string(),
        lower: to_decimal(&bounds.lower),
        upper: to_decimal(&bounds.upper),
    })
}

/// Candidate means on `window`: its endpoints plus every `m + (M − m)·j/n`
/// strictly inside, ascending.
fn piece_candidates(n: usize, window: &Interval, lower: &Rational, upper: &Rational) -> Vec<Rational> {
    let width = upper - lower;
    let mut out = vec![window.lower.clone()];
    if !width.is_zero() {
        let nn = from_usize(n);
        let first = ((&window.lower - lower) / &width * &nn).ceil().to_integer();
        let last = ((&window.upper - lower) / &width * &nn).floor().to_integer();
        let mut j = first;
        while j <= last {
            let c = lower + &width * Rational::from_integer(j.clone()) / &nn;
            if c > window.lower && c < window.upper {
                out.push(c);
            }
            j += 1;
        }
    }
    if window.upper != window.lower {
        out.push(window.upper.clone());
    }
    out
}

/// Exact maximum of the sharp bound over all means in `window ∩ [m, M]`,
/// with the smallest mean attaining it.
///
/// On the unit scale `g(c) = c(1 − c) − a(1 − a)/n` with `a = frac(nc)`.
/// Between breakpoints `c = j/n` its slope is `2((n − 1)c − j)` and its
/// curvature `2(n − 1) ≥ 0`, so each piece peaks at an endpoint and only
/// window endpoints and interior breakpoints need evaluating.
pub fn max_over_mean_window(
    n: usize,
    window: &Interval,
    lower: &Rational,
    upper: &Rational,
) -> Result<(Rational, Rational)> {
    let bounds = BoundsSpec::new(lower.clone(), upper.clone(), Semantics::BoundsOnly)?;
    let clipped = clip_mean_window(window, &Interval::new(lower.clone(), upper.clone()).expect("m ≤ M"))?;
    let mut best: Option<(Rational, Rational)> = None;
    for c in piece_candidates(n, &clipped, lower, upper) {
        let v = max_variance(&ProblemSpec::new(n, c.clone(), bounds.clone())?)?;
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, c));
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Precision of the bisection fallback in [`interpolate_into`], on variance.
pub fn witness_tolerance() -> Rational {
    Rational::new(One::one(), num_traits::pow(num_bigint::BigInt::from(10), 18))
}

/// Covariance-style inner product `Σ(x_i − x̄)(y_i − ȳ)/n`.
fn centered_product(x: &[Rational], y: &[Rational]) -> Rational {
    let n = from_usize(x.len());
    let mx = x.iter().fold(Rational::zero(), |a, v| a + v) / &n;
    let my = y.iter().fold(Rational::zero(), |a, v| a + v) / &n;
    x.iter()
        .zip(y)
        .fold(Rational::zero(), |a, (u, v)| a + (u - &mx) * (v - &my))
        / n
}

/// A point on the segment `from + t(to − from)`, `t ∈ [0, 1]`, whose
/// population variance lies in `target`.
///
/// Requires `var(from) ≤ target.upper` and `var(to) ≥ target.lower`.
/// Variance along the segment is the convex quadratic
/// `var(from) + 2t·cov(from, d) + t²·var(d)`; an exact rational root is
/// used when one exists, otherwise bisection stops within
/// [`witness_tolerance`].
pub fn interpolate_into(from: &Dataset, to: &Dataset, target: &Interval) -> Dataset {
    let at = |t: &Rational| -> Dataset {
        Dataset::new(
            from.values()
                .iter()
                .zip(to.values())
                .map(|(a, b)| a + (b - a) * t)
                .collect(),
        )
        .expect("non-empty")
    };
    let v0 = from.population_variance();
    if target.contains(&v0) {
        return from.clone();
    }
    let v1 = to.population_variance();
    if target.contains(&v1) {
        return to.clone();
    }

    let d: Vec<Rational> = from
        .values()
        .iter()
        .zip(to.values())
        .map(|(a, b)| b - a)
        .collect();
    let quad = centered_product(&d, &d);
    let lin = centered_product(from.values(), &d) * from_usize(2);
    if quad.is_positive() {
        // larger root of quad·t² + lin·t + (v0 − lower) = 0
        let disc = &lin * &lin - from_usize(4) * &quad * (&v0 - &target.lower);
        if let Some(s) = exact_sqrt(&disc) {
            let t = (-&lin + s) / (from_usize(2) * &quad);
            if !t.is_negative() && t <= Rational::one() {
                let x = at(&t);
                if target.contains(&x.population_variance()) {
                    return x;
                }
            }
        }
    }

    let tol = witness_tolerance();
    let (mut lo, mut hi) = (Rational::zero(), Rational::one());
    let (mut vlo, mut vhi) = (v0, v1);
    let half = ratio(1, 2);
    for _ in 0..256 {
        if &vhi - &vlo <= tol {
            break;
        }
        let mid = (&lo + &hi) * &half;
        let x = at(&mid);
        let v = x.population_variance();
        if target.contains(&v) {
            return x;
        }
        if v < target.lower {
            lo = mid;
            vlo = v;
        } else {
            hi = mid;
            vhi = v;
        }
    }
    at(&hi)
}

struct Decision {
    max: Rational,
    argmean: Rational,
    min: Rational,
    witness: Option<Dataset>,
}

fn decide_bounds_only(
    n: usize,
    mean_window: &Interval,
    variance: &Interval,
    bounds: &BoundsSpec,
) -> Result<Decision> {
    let (max, argmean) = max_over_mean_window(n, mean_window, bounds.lower(), bounds.upper())?;
    let witness = (variance.lower <= max).then(|| -> Result<Dataset> {
        let spec = ProblemSpec::new(n, argmean.clone(), bounds.clone())?;
        let (_, extremal) = witness_dataset(&spec)?;
        let constant = Dataset::constant(n, argmean.clone());
        Ok(interpolate_into(&constant, &extremal, variance))
    });
    Ok(Decision {
        max,
        argmean,
        min: Rational::zero(),
        witness: witness.transpose()?,
    })
}

fn decide_attained(
    n: usize,
    mean_window: &Interval,
    variance: &Interval,
    bounds: &BoundsSpec,
) -> Result<Decision> {
    let (lower, upper) = (bounds.lower(), bounds.upper());
    let range = attained_mean_range(n, lower, upper).ok_or_else(|| {
        Error::InvalidInput(format!("no dataset of length {n} can contain both bounds"))
    })?;
    let window = clip_mean_window(mean_window, &range)?;
    let spec_at = |c: &Rational| ProblemSpec::new(n, c.clone(), bounds.clone());

    let mut best: Option<(Rational, Rational, Dataset)> = None;
    for c in piece_candidates(n, &window, lower, upper) {
        let r = attained_vertex_max(&spec_at(&c)?)?;
        if best.as_ref().map_or(true, |(b, _, _)| r.best_variance > *b) {
            best = Some((r.best_variance, c, r.argmax));
        }
    }
    let (max, argmean, max_data) = best.expect("at least one candidate");

    // pinned-extremes minimum is convex in the mean with its vertex at (m + M)/2
    let mid = (lower + upper) / from_usize(2);
    let mut min_candidates = vec![window.lower.clone(), window.upper.clone()];
    if window.contains(&mid) {
        min_candidates.push(mid);
    }
    let mut lowest: Option<(Rational, Dataset)> = None;
    for c in min_candidates {
        let (v, d) = attained_min_variance(&spec_at(&c)?)?;
        if lowest.as_ref().map_or(true, |(b, _)| v < *b) {
            lowest = Some((v, d));
        }
    }
    let (min, min_data) = lowest.expect("at least one candidate");

    let feasible = variance.lower <= max && variance.upper >= min;
    Ok(Decision {
        max,
        argmean,
        min,
        witness: feasible.then(|| interpolate_into(&min_data, &max_data, variance)),
    })
}

/// Decides feasibility for a population-convention variance window.
///
/// Returned variances are population variances.
pub fn check_population(
    n: usize,
    mean_window: &Interval,
    variance: &Interval,
    bounds: &BoundsSpec,
) -> Result<FeasibilityVerdict> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let d = match bounds.semantics() {
        Semantics::BoundsOnly => decide_bounds_only(n, mean_window, variance, bounds)?,
        Semantics::AttainedExtremes => decide_attained(n, mean_window, variance, bounds)?,
    };
    let status = if d.witness.is_some() {
        Status::Feasible
    } else {
        Status::Infeasible
    };
    Ok(FeasibilityVerdict {
        status,
        margin: &d.max - &variance.lower,
        max_attainable_variance: d.max,
        min_attainable_variance: d.min,
        argmean: d.argmean,
        reported_variance_window: variance.clone(),
        witness: d.witness,
    })
}

/// Checks reported statistics; see the module docs for the model.
pub fn check(stats: &ReportedStats) -> Result<FeasibilityVerdict> {
    let n = stats.n;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let factor = stats.convention.factor(n).ok_or_else(|| {
        Error::InvalidInput("sample convention needs n ≥ 2".into())
    })?;
    if stats.sd.value().is_negative() {
        return Err(Error::InvalidInput("sd must be non-negative".into()));
    }
    let bounds = BoundsSpec::new(stats.lower.clone(), stats.upper.clone(), stats.semantics)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;

    let sd = stats.sd.window();
    let sd = Interval {
        lower: std::cmp::max(sd.lower, Rational::zero()),
        upper: sd.upper,
    };
    let reported = sd.square();
    let population = reported.scale(&factor.recip());

    let mut verdict = check_population(n, &stats.mean.window(), &population, &bounds)?;
    verdict.max_attainable_variance *= &factor;
    verdict.min_attainable_variance *= &factor;
    verdict.reported_variance_window = reported;
    verdict.margin = &verdict.max_attainable_variance - &verdict.reported_variance_window.lower;
    Ok(verdict)
}

/// Checks a reported coefficient of variation for data in `[0, 1]`.
///
/// Uses the length-free bound `CV² ≤ 1/mean − 1`, which is largest at the
/// bottom of the mean window. All quantities in the returned verdict are
/// squared CVs rather than variances. The witness has mean at the bottom of
/// the window and length equal to that mean's denominator, where the bound
/// is attained exactly.
pub fn cv_check(mean: &RoundedValue, cv: &RoundedValue) -> Result<FeasibilityVerdict> {
    if cv.value().is_negative() {
        return Err(Error::InvalidInput("cv must be non-negative".into()));
    }
    let unit = Interval::new(Rational::zero(), Rational::one()).expect("0 ≤ 1");
    let window = clip_mean_window(&mean.window(), &unit)?;
    if !window.lower.is_positive() {
        return Err(Error::Domain(format!(
            "mean window {} touches 0, where the CV is undefined",
            mean.window()
        )));
    }
    let c = window.lower.clone();
    let max = c.recip() - Rational::one();

    let cvw = cv.window();
    let cvw = Interval {
        lower: std::cmp::max(cvw.lower, Rational::zero()),
        upper: cvw.upper,
    };
    let squared = cvw.square();
    let witness = if squared.lower <= max {
        let n: usize = c
            .denom()
            .try_into()
            .map_err(|_| Error::Domain("mean denominator too large for a witness".into()))?;
        let spec = ProblemSpec::unit(n, c.clone())?;
        let (_, extremal) = witness_dataset(&spec)?;
        let target = squared.scale(&(&c * &c));
        Some(interpolate_into(&Dataset::constant(n, c.clone()), &extremal, &target))
    } else {
        None
    };
    Ok(FeasibilityVerdict {
        status: if witness.is_some() {
            Status::Feasible
        } else {
            Status::Infeasible
        },
        margin: &max - &squared.lower,
        max_attainable_variance: max,
        min_attainable_variance: Rational::zero(),
        argmean: c,
        reported_variance_window: squared,
        witness,
    })
}

/// Whether `x`'s mean and standard deviation round back to the reported
/// literals (comparison on squared SDs, so no square roots are taken).
pub fn reproduces(stats: &ReportedStats, x: &Dataset) -> bool {
    let Some(var) = x.variance(stats.convention) else {
        return false;
    };
    let sd = stats.sd.window();
    let sd = Interval {
        lower: std::cmp::max(sd.lower, Rational::zero()),
        upper: sd.upper,
    };
    x.len() == stats.n
        && stats.mean.is_consistent(&x.mean())
        && sd.square().contains(&var)
        && x.within(&stats.lower, &stats.upper)
        && (stats.semantics == Semantics::BoundsOnly
            || (x.min() == &stats.lower && x.max() == &stats.upper))
}
