use num_traits::{One, Zero};
use proptest::prelude::*;

use sharpvar::bounds::extremal_structure;
use sharpvar::feasibility::{check_population, reproduces};
use sharpvar::oracle::attained_vertex_max;
use sharpvar::rational::{from_usize, int, ratio, to_f64};
use sharpvar::{
    bhatia_davis, check, cv_squared_max, envelope, frac_part, grid_max, hill_climb_max,
    max_over_mean_window, max_variance, max_variance_unit, sum_squares_bound, vertex_max,
    witness_dataset, BoundsSpec, Convention, Dataset, Interval, ProblemSpec, Rational,
    ReportedStats, RoundedValue, Semantics, Status,
};

fn unit_means(den_max: i64) -> impl Iterator<Item = Rational> {
    (1..=den_max).flat_map(|q| (0..=q).map(move |p| ratio(p, q)))
}

#[test]
fn sharpness_dominance_envelope_sweep() {
    for n in 1..=60usize {
        for c in unit_means(12) {
            let spec = ProblemSpec::unit(n, c.clone()).unwrap();
            let sharp = max_variance_unit(n, &c).unwrap();
            let (_, w) = witness_dataset(&spec).unwrap();
            assert_eq!(w.population_variance(), sharp, "n={n} c={c}");

            let bd = bhatia_davis(&c, &int(0), &int(1)).unwrap();
            assert!(sharp <= bd);
            let a = frac_part(&(from_usize(n) * &c));
            assert_eq!(sharp == bd, a.is_zero(), "n={n} c={c}");

            let e = envelope(n, &c);
            assert!(e.lo <= sharp && sharp <= e.hi);

            let gap = &bd - &sharp;
            assert!(gap >= Rational::zero());
            assert!(gap <= Rational::one() / from_usize(4 * n));
        }
    }
}

#[test]
fn witness_validity_general_bounds() {
    for (m, big_m) in [(0, 1), (2, 10), (-3, 5), (-7, -2)] {
        let bounds = BoundsSpec::new(int(m), int(big_m), Semantics::BoundsOnly).unwrap();
        for n in 1..=25usize {
            for u in unit_means(9) {
                let c = bounds.from_unit(&u);
                let spec = ProblemSpec::new(n, c.clone(), bounds.clone()).unwrap();
                let (s, w) = witness_dataset(&spec).unwrap();
                assert_eq!(w.len(), n);
                assert_eq!(w.mean(), c);
                assert!(w.within(&int(m), &int(big_m)));
                assert!(w.interior_count(&int(m), &int(big_m)) <= 1);
                assert_eq!(s.len(), n);
                assert!(w.values().windows(2).all(|p| p[0] <= p[1]));
                assert_eq!(w.population_variance(), max_variance(&spec).unwrap());

                // affine covariance
                let width = int(big_m - m);
                assert_eq!(
                    max_variance(&spec).unwrap(),
                    &width * &width * max_variance_unit(n, &u).unwrap()
                );
                assert_eq!(
                    extremal_structure(&spec).unwrap().interior_value,
                    frac_part(&(from_usize(n) * u))
                );
            }
        }
    }
}

#[test]
fn cv_bound_holds_for_witnesses() {
    for n in 1..=40usize {
        for c in unit_means(10).filter(|c| !c.is_zero()) {
            let (_, w) = witness_dataset(&ProblemSpec::unit(n, c.clone()).unwrap()).unwrap();
            let cv2 = w.population_variance() / (&c * &c);
            assert!(cv2 <= cv_squared_max(&c).unwrap());
        }
    }
}

#[test]
fn oracle_equivalence_and_structure() {
    for n in 1..=50usize {
        for c in unit_means(10) {
            let spec = ProblemSpec::unit(n, c).unwrap();
            let r = vertex_max(&spec).unwrap();
            assert_eq!(r.best_variance, max_variance(&spec).unwrap());
            assert_eq!(r.best_variance, r.argmax.population_variance());
            assert!(r.argmax.interior_count(&int(0), &int(1)) <= 1);
        }
    }
}

#[test]
fn grid_never_exceeds_vertex() {
    for n in 1..=4usize {
        for q in 1..=8u32 {
            for p in 0..=(n as i64 * q as i64) {
                let spec = ProblemSpec::unit(n, ratio(p, n as i64 * q as i64)).unwrap();
                let g = grid_max(&spec, q).unwrap();
                assert!(g.best_variance <= vertex_max(&spec).unwrap().best_variance);
            }
        }
    }
}

#[test]
fn attained_never_exceeds_bounds_only() {
    let attained = BoundsSpec::new(int(-1), int(2), Semantics::AttainedExtremes).unwrap();
    let plain = BoundsSpec::new(int(-1), int(2), Semantics::BoundsOnly).unwrap();
    for n in 1..=20usize {
        for u in unit_means(8) {
            let c = plain.from_unit(&u);
            let a = ProblemSpec::new(n, c.clone(), attained.clone()).unwrap();
            let b = ProblemSpec::new(n, c, plain.clone()).unwrap();
            if let Ok(r) = attained_vertex_max(&a) {
                assert!(r.best_variance <= vertex_max(&b).unwrap().best_variance);
            }
        }
    }
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    prop::collection::vec((0i64..=100, 1i64..=100), 1..=20).prop_map(|pairs| {
        let values = pairs
            .into_iter()
            .map(|(p, q)| ratio(p.min(q), q))
            .collect();
        Dataset::new(values).unwrap()
    })
}

fn unit_mean_strategy() -> impl Strategy<Value = Rational> {
    (1i64..=40).prop_flat_map(|q| (0..=q).prop_map(move |p| ratio(p, q)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sum_of_squares_inequality(d in dataset_strategy()) {
        let b = sum_squares_bound(&d).unwrap();
        prop_assert!(b.holds);
        prop_assert!(b.lhs <= b.rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn point_window_equals_closed_form(n in 1usize..=40, c in unit_mean_strategy(), m in -5i64..=5, w in 0i64..=6) {
        let (lo, hi) = (int(m), int(m + w));
        let bounds = BoundsSpec::new(lo.clone(), hi.clone(), Semantics::BoundsOnly).unwrap();
        let mean = bounds.from_unit(&c);
        let spec = ProblemSpec::new(n, mean.clone(), bounds).unwrap();
        let (v, at) = max_over_mean_window(n, &Interval::point(mean.clone()), &lo, &hi).unwrap();
        prop_assert_eq!(v, max_variance(&spec).unwrap());
        prop_assert_eq!(at, mean);
    }

    #[test]
    fn hill_climb_close_to_closed_form(n in 1usize..=30, c in unit_mean_strategy(), seed in any::<u64>()) {
        let spec = ProblemSpec::unit(n, c).unwrap();
        let r = hill_climb_max(&spec, 20, seed).unwrap();
        let exact = to_f64(&max_variance(&spec).unwrap());
        prop_assert!((to_f64(&r.best_variance) - exact).abs() <= 1e-6);
        prop_assert!(to_f64(&r.best_variance) <= exact + 1e-9);
    }
}

/// A reported literal with `decimals` digits for a value in `[0, 1]`.
fn literal(units: i64, decimals: u32) -> String {
    let scale = 10i64.pow(decimals);
    let whole = units / scale;
    let frac = units % scale;
    if decimals == 0 {
        whole.to_string()
    } else {
        format!("{whole}.{frac:0width$}", width = decimals as usize)
    }
}

fn stats_strategy() -> impl Strategy<Value = ReportedStats> {
    (2usize..=15, 1u32..=3, 1u32..=3, any::<bool>(), any::<bool>())
        .prop_flat_map(|(n, md, sd, sample, attained)| {
            let ms = 10i64.pow(md);
            let ss = 10i64.pow(sd);
            (Just((n, md, sd, sample, attained)), 0..=ms, 0..=ss * 6 / 10)
        })
        .prop_map(|((n, md, sd, sample, attained), mu, su)| ReportedStats {
            n,
            mean: RoundedValue::parse(&literal(mu, md)).unwrap(),
            sd: RoundedValue::parse(&literal(su, sd)).unwrap(),
            lower: int(0),
            upper: int(1),
            convention: if sample {
                Convention::Sample
            } else {
                Convention::Population
            },
            semantics: if attained {
                Semantics::AttainedExtremes
            } else {
                Semantics::BoundsOnly
            },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn feasible_witness_reproduces_report(s in stats_strategy()) {
        if let Ok(v) = check(&s) {
            match v.status {
                Status::Feasible => {
                    let w = v.witness.as_ref().unwrap();
                    prop_assert!(reproduces(&s, w), "witness {} for {:?}", w, s);
                }
                Status::Infeasible => {
                    let w = &v.reported_variance_window;
                    prop_assert!(w.lower > v.max_attainable_variance || w.upper < v.min_attainable_variance);
                    prop_assert!(v.witness.is_none());
                }
                Status::InvalidInput => unreachable!(),
            }
        }
    }

    #[test]
    fn widening_never_breaks_feasibility(s in stats_strategy()) {
        let Ok(v) = check(&s) else { return Ok(()) };
        if !v.is_feasible() {
            return Ok(());
        }
        let mut wider = s.clone();
        wider.sd = s.sd.clone().with_decimals(s.sd.decimals().saturating_sub(1));
        prop_assert!(check(&wider).unwrap().is_feasible());
        let mut wider = s.clone();
        wider.mean = s.mean.clone().with_decimals(s.mean.decimals().saturating_sub(1));
        prop_assert!(check(&wider).unwrap().is_feasible());
    }

    #[test]
    fn sample_matches_rescaled_population(s in stats_strategy()) {
        let mut s = s;
        s.convention = Convention::Sample;
        let Ok(v) = check(&s) else { return Ok(()) };
        let n = from_usize(s.n);
        let sd = s.sd.window();
        let sd = Interval::new(sd.lower.max(Rational::zero()), sd.upper).unwrap();
        let population = sd.square().scale(&((&n - Rational::one()) / &n));
        let bounds = BoundsSpec::new(s.lower.clone(), s.upper.clone(), s.semantics).unwrap();
        let p = check_population(s.n, &s.mean.window(), &population, &bounds).unwrap();
        prop_assert_eq!(v.status, p.status);
        prop_assert_eq!(
            v.max_attainable_variance,
            p.max_attainable_variance * &n / (&n - Rational::one())
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn infeasible_verdicts_survive_search(s in stats_strategy(), seed in any::<u64>()) {
        let mut s = s;
        s.semantics = Semantics::BoundsOnly;
        let Ok(v) = check(&s) else { return Ok(()) };
        if v.is_feasible() {
            return Ok(());
        }
        let window = s.mean.window().intersect(&Interval::new(int(0), int(1)).unwrap()).unwrap();
        let factor = s.convention.factor(s.n).unwrap();
        for i in 0..100i64 {
            let c = &window.lower + window.width() * ratio(i, 99);
            let spec = ProblemSpec::unit(s.n, c).unwrap();
            let found = hill_climb_max(&spec, 2, seed ^ i as u64).unwrap();
            let var = found.best_variance * &factor;
            prop_assert!(!v.reported_variance_window.contains(&var));
        }
    }
}
