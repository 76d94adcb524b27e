//! Sharp maximum variance of a bounded dataset with a fixed mean.
//!
//! On the unit interval the maximum population variance of `n` values with
//! mean `c` is
//!
//! ```text
//! c(1 − c) − a(1 − a)/n,   a = frac(n·c)
//! ```
//!
//! and it is attained by `floor(n·c)` ones, a single interior value `a`
//! (when `a > 0`) and zeros everywhere else. General bounds `[m, M]` follow
//! from the affine map `x ↦ (M − m)x + m`, which scales variances by
//! `(M − m)²`.
//!
//! The fractional part of `n·c` is discontinuous in `c`, so everything here
//! is exact rational arithmetic.

use num_traits::{One, Signed, Zero};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rational::{floor_i64, from_usize, to_decimal, Rational};

pub use crate::rational::frac_part;

/// How the bounds constrain the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Semantics {
    /// `m ≤ x_i ≤ M`.
    #[default]
    BoundsOnly,
    /// Additionally `min(x) = m` and `max(x) = M`.
    AttainedExtremes,
}

impl std::str::FromStr for Semantics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bounds" | "bounds-only" | "" => Ok(Semantics::BoundsOnly),
            "attained" | "attained-extremes" => Ok(Semantics::AttainedExtremes),
            other => Err(Error::InvalidInput(format!("unknown semantics {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundsSpec {
    lower: Rational,
    upper: Rational,
    semantics: Semantics,
}

impl BoundsSpec {
    pub fn new(lower: Rational, upper: Rational, semantics: Semantics) -> Result<Self> {
        if lower > upper {
            return Err(Error::Domain(format!(
                "lower bound {} exceeds upper bound {}",
                to_decimal(&lower),
                to_decimal(&upper)
            )));
        }
        Ok(Self {
            lower,
            upper,
            semantics,
        })
    }

    /// `[0, 1]`, bounds only.
    pub fn unit() -> Self {
        Self {
            lower: Rational::zero(),
            upper: Rational::one(),
            semantics: Semantics::BoundsOnly,
        }
    }

    pub fn lower(&self) -> &Rational {
        &self.lower
    }

    pub fn upper(&self) -> &Rational {
        &self.upper
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn width(&self) -> Rational {
        &self.upper - &self.lower
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn with_semantics(&self, semantics: Semantics) -> Self {
        Self {
            semantics,
            ..self.clone()
        }
    }

    /// `(x − m)/(M − m)`; `None` when the bounds coincide.
    pub fn to_unit(&self, x: &Rational) -> Option<Rational> {
        let w = self.width();
        (!w.is_zero()).then(|| (x - &self.lower) / w)
    }

    /// `(M − m)u + m`.
    pub fn from_unit(&self, u: &Rational) -> Rational {
        self.width() * u + &self.lower
    }
}

/// One constrained-maximization instance: `n` values in the bounds with a
/// prescribed mean.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    n: usize,
    mean: Rational,
    bounds: BoundsSpec,
}

impl ProblemSpec {
    /// Fails with [`Error::Infeasible`] if the mean is outside the bounds and
    /// with [`Error::Domain`] if `n == 0`.
    pub fn new(n: usize, mean: Rational, bounds: BoundsSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dataset length must be at least 1".into()));
        }
        if !bounds.contains(&mean) {
            return Err(Error::Infeasible(format!(
                "mean {} outside [{}, {}]",
                to_decimal(&mean),
                to_decimal(bounds.lower()),
                to_decimal(bounds.upper())
            )));
        }
        Ok(Self { n, mean, bounds })
    }

    pub fn unit(n: usize, mean: Rational) -> Result<Self> {
        Self::new(n, mean, BoundsSpec::unit())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> &Rational {
        &self.mean
    }

    pub fn bounds(&self) -> &BoundsSpec {
        &self.bounds
    }

    pub fn lower(&self) -> &Rational {
        self.bounds.lower()
    }

    pub fn upper(&self) -> &Rational {
        self.bounds.upper()
    }

    pub fn semantics(&self) -> Semantics {
        self.bounds.semantics()
    }

    /// Mean rescaled to the unit interval; `None` when `m = M`.
    pub fn unit_mean(&self) -> Option<Rational> {
        self.bounds.to_unit(&self.mean)
    }

    pub fn with_semantics(&self, semantics: Semantics) -> Self {
        Self {
            bounds: self.bounds.with_semantics(semantics),
            ..self.clone()
        }
    }
}

/// Shape of the maximizer on the unit scale: `count_at_max` ones,
/// `count_at_min` zeros and, when `interior_value > 0`, one interior value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtremalStructure {
    pub count_at_max: usize,
    pub count_at_min: usize,
    pub interior_value: Rational,
}

impl ExtremalStructure {
    pub fn has_interior(&self) -> bool {
        self.interior_value.is_positive()
    }

    pub fn len(&self) -> usize {
        self.count_at_max + self.count_at_min + usize::from(self.has_interior())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unit-scale values, ascending.
    pub fn unit_values(&self) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.count_at_min];
        if self.has_interior() {
            v.push(self.interior_value.clone());
        }
        v.extend(std::iter::repeat(Rational::one()).take(self.count_at_max));
        v
    }
}

fn require_unit_mean(c: &Rational) -> Result<()> {
    if c.is_negative() || c > &Rational::one() {
        return Err(Error::Domain(format!(
            "unit-scale mean {} outside [0, 1]",
            to_decimal(c)
        )));
    }
    Ok(())
}

/// Sharp maximum population variance of `n` values in `[0, 1]` with mean `c`.
pub fn max_variance_unit(n: usize, c: &Rational) -> Result<Rational> {
    require_unit_mean(c)?;
    if n == 0 {
        return Err(Error::Domain("dataset length must be at least 1".into()));
    }
    let n = from_usize(n);
    let a = frac_part(&(&n * c));
    Ok(c * (Rational::one() - c) - &a * (Rational::one() - &a) / n)
}

/// Sharp maximum population variance for general bounds (bounds-only
/// semantics).
pub fn max_variance(spec: &ProblemSpec) -> Result<Rational> {
    if spec.semantics() != Semantics::BoundsOnly {
        return Err(Error::Semantics);
    }
    match spec.unit_mean() {
        None => Ok(Rational::zero()),
        Some(c) => {
            let w = spec.bounds().width();
            Ok(&w * &w * max_variance_unit(spec.n(), &c)?)
        }
    }
}

/// `(M − c)(c − m)`, the classical bound that ignores `n`.
pub fn bhatia_davis(c: &Rational, lower: &Rational, upper: &Rational) -> Result<Rational> {
    if c < lower || c > upper {
        return Err(Error::Domain(format!(
            "mean {} outside [{}, {}]",
            to_decimal(c),
            to_decimal(lower),
            to_decimal(upper)
        )));
    }
    Ok((upper - c) * (c - lower))
}

/// Band guaranteed to contain [`max_variance_unit`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Envelope {
    pub lo: Rational,
    pub hi: Rational,
}

/// `(c(1 − c) − 1/(4n), c(1 − c))`, from `0 ≤ a(1 − a) ≤ 1/4`.
pub fn envelope(n: usize, c: &Rational) -> Envelope {
    assert!(n > 0, "dataset length must be at least 1");
    let hi = c * (Rational::one() - c);
    let lo = &hi - Rational::one() / (from_usize(4) * from_usize(n));
    Envelope { lo, hi }
}

/// Unit-scale shape of the maximizer. `None` when `m = M`.
pub fn extremal_structure(spec: &ProblemSpec) -> Option<ExtremalStructure> {
    let c = spec.unit_mean()?;
    let total = from_usize(spec.n()) * c;
    let k = floor_i64(&total) as usize;
    let a = frac_part(&total);
    let count_at_min = spec.n() - k - usize::from(a.is_positive());
    Some(ExtremalStructure {
        count_at_max: k,
        count_at_min,
        interior_value: a,
    })
}

/// A dataset attaining [`max_variance`], sorted ascending.
pub fn witness_dataset(spec: &ProblemSpec) -> Result<(ExtremalStructure, Dataset)> {
    if spec.semantics() != Semantics::BoundsOnly {
        return Err(Error::Semantics);
    }
    match extremal_structure(spec) {
        None => {
            let structure = ExtremalStructure {
                count_at_max: 0,
                count_at_min: spec.n(),
                interior_value: Rational::zero(),
            };
            Ok((structure, Dataset::constant(spec.n(), spec.mean().clone())))
        }
        Some(structure) => {
            let values = structure
                .unit_values()
                .iter()
                .map(|u| spec.bounds().from_unit(u))
                .collect();
            Ok((structure, Dataset::new(values)?))
        }
    }
}

/// Both sides of `Σ x_i² ≤ Σ x_i − a(1 − a)`, `a = frac(Σ x_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SumSquaresBound {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

/// Evaluates the sum-of-squares inequality for data in `[0, 1]`.
pub fn sum_squares_bound(x: &Dataset) -> Result<SumSquaresBound> {
    if !x.within(&Rational::zero(), &Rational::one()) {
        return Err(Error::Domain("values must lie in [0, 1]".into()));
    }
    let sum = x.sum();
    let a = frac_part(&sum);
    let lhs = x.sum_of_squares();
    let rhs = sum - &a * (Rational::one() - &a);
    let holds = lhs <= rhs;
    Ok(SumSquaresBound { lhs, rhs, holds })
}

/// Squared upper bound on the coefficient of variation of data in `[0, 1]`
/// with the given mean: `1/mean − 1`. Take the square root only for display.
pub fn cv_squared_max(mean: &Rational) -> Result<Rational> {
    if !mean.is_positive() || mean > &Rational::one() {
        return Err(Error::Domain(format!(
            "mean {} outside (0, 1]",
            to_decimal(mean)
        )));
    }
    Ok(mean.recip() - Rational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn general(n: usize, c: Rational, m: i64, big_m: i64) -> ProblemSpec {
        ProblemSpec::new(
            n,
            c,
            BoundsSpec::new(int(m), int(big_m), Semantics::BoundsOnly).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn max_variance_unit_examples() {
        assert_eq!(max_variance_unit(5, &ratio(1, 10)).unwrap(), ratio(1, 25));
        assert_eq!(max_variance_unit(4, &ratio(1, 2)).unwrap(), ratio(1, 4));
        // (0, 1/2, 1): (0 + 1/4 + 1)/3 − 1/4
        assert_eq!(max_variance_unit(3, &ratio(1, 2)).unwrap(), ratio(1, 6));
        for c in [int(0), ratio(1, 3), ratio(9, 10), int(1)] {
            assert_eq!(max_variance_unit(1, &c).unwrap(), int(0));
        }
    }

    #[test]
    fn max_variance_unit_domain() {
        assert!(matches!(
            max_variance_unit(5, &ratio(11, 10)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            max_variance_unit(5, &ratio(-1, 10)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn max_variance_general_examples() {
        assert_eq!(
            max_variance(&general(5, ratio(1, 10), 0, 1)).unwrap(),
            ratio(1, 25)
        );
        assert_eq!(max_variance(&general(5, int(2), 2, 10)).unwrap(), int(0));
        let spec = general(5, ratio(14, 5), 2, 10);
        let direct = Dataset::new(vec![int(2), int(2), int(2), int(2), int(6)]).unwrap();
        assert_eq!(direct.mean(), ratio(14, 5));
        assert_eq!(direct.population_variance(), ratio(64, 25));
        assert_eq!(max_variance(&spec).unwrap(), ratio(64, 25));
    }

    #[test]
    fn max_variance_rejects_attained_semantics() {
        let spec = general(5, ratio(1, 2), 0, 1).with_semantics(Semantics::AttainedExtremes);
        assert_eq!(max_variance(&spec), Err(Error::Semantics));
        assert!(matches!(witness_dataset(&spec), Err(Error::Semantics)));
    }

    #[test]
    fn infeasible_mean_fails_construction() {
        let b = BoundsSpec::new(int(0), int(1), Semantics::BoundsOnly).unwrap();
        assert!(matches!(
            ProblemSpec::new(5, ratio(3, 2), b.clone()),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            ProblemSpec::new(0, ratio(1, 2), b),
            Err(Error::Domain(_))
        ));
        assert!(BoundsSpec::new(int(1), int(0), Semantics::BoundsOnly).is_err());
    }

    #[test]
    fn degenerate_bounds() {
        let spec = general(4, int(3), 3, 3);
        assert_eq!(max_variance(&spec).unwrap(), int(0));
        let (s, d) = witness_dataset(&spec).unwrap();
        assert_eq!(d, Dataset::constant(4, int(3)));
        assert_eq!(s.count_at_min, 4);
        assert!(!s.has_interior());
    }

    #[test]
    fn bhatia_davis_examples() {
        assert_eq!(
            bhatia_davis(&ratio(1, 10), &int(0), &int(1)).unwrap(),
            ratio(9, 100)
        );
        assert_eq!(bhatia_davis(&int(2), &int(2), &int(10)).unwrap(), int(0));
        // (10 − 2.8)(2.8 − 2) = 7.2 · 0.8
        assert_eq!(
            bhatia_davis(&ratio(14, 5), &int(2), &int(10)).unwrap(),
            ratio(36, 5) * ratio(4, 5)
        );
        assert_eq!(
            bhatia_davis(&ratio(14, 5), &int(2), &int(10)).unwrap(),
            ratio(144, 25)
        );
        assert!(bhatia_davis(&int(11), &int(2), &int(10)).is_err());
    }

    #[test]
    fn envelope_examples() {
        let e = envelope(5, &ratio(1, 10));
        assert_eq!((e.lo.clone(), e.hi), (ratio(1, 25), ratio(9, 100)));
        assert_eq!(max_variance_unit(5, &ratio(1, 10)).unwrap(), e.lo);

        let e = envelope(4, &ratio(1, 2));
        assert_eq!((e.lo, e.hi.clone()), (ratio(3, 16), ratio(1, 4)));
        assert_eq!(max_variance_unit(4, &ratio(1, 2)).unwrap(), e.hi);

        let e = envelope(3, &ratio(1, 2));
        assert_eq!((e.lo.clone(), e.hi.clone()), (ratio(1, 6), ratio(1, 4)));
        let v = max_variance_unit(3, &ratio(1, 2)).unwrap();
        assert!(e.lo <= v && v <= e.hi);
    }

    #[test]
    fn witness_examples() {
        let (s, d) = witness_dataset(&general(5, ratio(1, 10), 0, 1)).unwrap();
        assert_eq!(d.values(), &[int(0), int(0), int(0), int(0), ratio(1, 2)]);
        assert_eq!(
            s,
            ExtremalStructure {
                count_at_max: 0,
                count_at_min: 4,
                interior_value: ratio(1, 2)
            }
        );

        let (s, d) = witness_dataset(&general(4, ratio(1, 2), 0, 1)).unwrap();
        assert_eq!(d.values(), &[int(0), int(0), int(1), int(1)]);
        assert!(!s.has_interior());

        let spec = general(5, ratio(14, 5), 2, 10);
        let (_, d) = witness_dataset(&spec).unwrap();
        assert_eq!(d.values(), &[int(2), int(2), int(2), int(2), int(6)]);
        assert_eq!(d.mean(), ratio(14, 5));
        assert_eq!(d.population_variance(), ratio(64, 25));
    }

    #[test]
    fn witness_at_unit_extremes() {
        let (s, d) = witness_dataset(&general(3, int(0), 0, 1)).unwrap();
        assert_eq!(d, Dataset::constant(3, int(0)));
        assert_eq!(s.len(), 3);
        let (s, d) = witness_dataset(&general(3, int(1), 0, 1)).unwrap();
        assert_eq!(d, Dataset::constant(3, int(1)));
        assert_eq!(s.count_at_max, 3);
    }

    #[test]
    fn structure_invariants() {
        for n in 1..=12 {
            for p in 0..=7 {
                let c = ratio(p, 7);
                let spec = general(n, c.clone(), 0, 1);
                let s = extremal_structure(&spec).unwrap();
                assert_eq!(s.len(), n);
                assert_eq!(
                    from_usize(s.count_at_max) + &s.interior_value,
                    from_usize(n) * c
                );
            }
        }
    }

    #[test]
    fn sum_squares_examples() {
        let d = Dataset::new(vec![int(0), int(0), int(0), int(0), ratio(1, 2)]).unwrap();
        let b = sum_squares_bound(&d).unwrap();
        assert_eq!((b.lhs.clone(), b.rhs.clone()), (ratio(1, 4), ratio(1, 4)));
        assert!(b.holds);

        let b = sum_squares_bound(&Dataset::constant(3, int(1))).unwrap();
        assert_eq!((b.lhs, b.rhs, b.holds), (int(3), int(3), true));

        let d = Dataset::new(vec![ratio(1, 2), ratio(7, 10)]).unwrap();
        let b = sum_squares_bound(&d).unwrap();
        assert_eq!(b.lhs, ratio(37, 50));
        assert_eq!(b.rhs, ratio(26, 25));
        assert!(b.holds);

        let d = Dataset::new(vec![ratio(3, 2)]).unwrap();
        assert!(sum_squares_bound(&d).is_err());
    }

    #[test]
    fn cv_examples() {
        assert_eq!(cv_squared_max(&ratio(1, 10)).unwrap(), int(9));
        assert_eq!(cv_squared_max(&int(1)).unwrap(), int(0));
        assert_eq!(cv_squared_max(&ratio(1, 2)).unwrap(), int(1));
        assert!(cv_squared_max(&int(0)).is_err());
        assert!(cv_squared_max(&ratio(-1, 2)).is_err());

        // n = 5 witness: SD 0.2, mean 0.1, CV² = 4 ≤ 9.
        let d = Dataset::new(vec![int(0), int(0), int(0), int(0), ratio(1, 2)]).unwrap();
        let cv2 = d.population_variance() / (d.mean() * d.mean());
        assert_eq!(cv2, int(4));
        // n even at c = 1/2 attains c(1 − c), so CV² = 1 is reached.
        let v = max_variance_unit(2, &ratio(1, 2)).unwrap();
        assert_eq!(v / ratio(1, 4), cv_squared_max(&ratio(1, 2)).unwrap());
    }

    #[test]
    fn not_monotone_in_n() {
        let c = ratio(1, 2);
        let two = max_variance_unit(2, &c).unwrap();
        let three = max_variance_unit(3, &c).unwrap();
        assert_eq!((two.clone(), three.clone()), (ratio(1, 4), ratio(1, 6)));
        assert!(three < two);
    }
}
