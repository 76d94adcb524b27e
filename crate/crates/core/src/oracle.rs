//! Independent maximizers used to check the closed form.
//!
//! Variance at a fixed mean is a convex function of the data, so its maximum
//! over `{x ∈ [m, M]^n : Σx = n·c}` sits at a vertex of that polytope, and a
//! vertex has at most one coordinate strictly between the bounds.
//! [`vertex_max`] enumerates those vertices directly on `[m, M]` and
//! evaluates each one, so it never calls the closed form.
//! [`hill_climb_max`] makes no structural assumption at all, and
//! [`grid_max`] is plain brute force for tiny `n`.
//!
//! [`attained_vertex_max`] and [`attained_min_variance`] cover the variant
//! where both bounds must appear in the data, which has no closed form here.

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{ProblemSpec, Semantics};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rational::{from_f64, from_usize, to_decimal, to_f64, Interval, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    VertexEnum,
    HillClimb,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Population variance of `argmax`, computed exactly.
    pub best_variance: Rational,
    pub argmax: Dataset,
    pub method: Method,
    pub evaluations: u64,
}

/// Every vertex of `{x ∈ [lo, hi]^count : Σx = sum}` up to permutation,
/// each sorted ascending: `k` values at `hi`, at most one value in
/// `[lo, hi)`, the rest at `lo`, for every feasible `k`.
fn box_sum_vertices(count: usize, sum: &Rational, lo: &Rational, hi: &Rational) -> Vec<Vec<Rational>> {
    if count == 0 {
        return if sum.is_zero() { vec![vec![]] } else { vec![] };
    }
    if lo == hi {
        return if *sum == from_usize(count) * lo {
            vec![vec![lo.clone(); count]]
        } else {
            vec![]
        };
    }
    let mut out = Vec::new();
    for k in 0..=count {
        let at_max = from_usize(k) * hi;
        if k == count {
            if *sum == at_max {
                out.push(vec![hi.clone(); count]);
            }
            continue;
        }
        let rest = count - k - 1;
        let free = sum - at_max - from_usize(rest) * lo;
        if lo <= &free && &free < hi {
            let mut v = vec![lo.clone(); rest];
            v.push(free);
            v.extend(std::iter::repeat(hi.clone()).take(k));
            out.push(v);
        }
    }
    out
}

fn best_of(candidates: Vec<Vec<Rational>>, method: Method) -> Option<OracleResult> {
    let evaluations = candidates.len() as u64;
    let mut best: Option<(Rational, Dataset)> = None;
    for values in candidates {
        let d = Dataset::new(values).ok()?;
        let v = d.population_variance();
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, d));
        }
    }
    best.map(|(best_variance, argmax)| OracleResult {
        best_variance,
        argmax,
        method,
        evaluations,
    })
}

/// Exact maximum by enumerating every vertex of the feasible polytope.
pub fn vertex_max(spec: &ProblemSpec) -> Result<OracleResult> {
    if spec.semantics() != Semantics::BoundsOnly {
        return Err(Error::Semantics);
    }
    let total = from_usize(spec.n()) * spec.mean();
    let candidates = box_sum_vertices(spec.n(), &total, spec.lower(), spec.upper());
    best_of(candidates, Method::VertexEnum)
        .ok_or_else(|| Error::Infeasible("no vertex has the required sum".into()))
}

/// Range of means for which some dataset of length `n` contains both `m`
/// and `M`.
pub fn attained_mean_range(n: usize, lower: &Rational, upper: &Rational) -> Option<Interval> {
    if lower == upper {
        return (n >= 1).then(|| Interval::point(lower.clone()));
    }
    if n < 2 {
        return None;
    }
    let nn = from_usize(n);
    let low = (lower * from_usize(n - 1) + upper) / &nn;
    let high = (lower + upper * from_usize(n - 1)) / &nn;
    Interval::new(low, high)
}

fn attained_infeasible(spec: &ProblemSpec) -> Error {
    Error::Infeasible(format!(
        "no dataset of length {} with mean {} attains both {} and {}",
        spec.n(),
        to_decimal(spec.mean()),
        to_decimal(spec.lower()),
        to_decimal(spec.upper())
    ))
}

/// Sum the `n − 2` unpinned values must have once `m` and `M` are placed.
fn residual_sum(spec: &ProblemSpec) -> Option<Rational> {
    (spec.n() >= 2).then(|| from_usize(spec.n()) * spec.mean() - spec.lower() - spec.upper())
}

/// Exact maximum when the data must contain both `m` and `M`.
///
/// One coordinate is pinned at each bound; the remaining `n − 2` are
/// maximized by vertex enumeration. The semantics flag on `spec` is ignored.
pub fn attained_vertex_max(spec: &ProblemSpec) -> Result<OracleResult> {
    let (lo, hi) = (spec.lower(), spec.upper());
    if lo == hi {
        return Ok(OracleResult {
            best_variance: Rational::zero(),
            argmax: Dataset::constant(spec.n(), lo.clone()),
            method: Method::VertexEnum,
            evaluations: 1,
        });
    }
    let residual = residual_sum(spec).ok_or_else(|| attained_infeasible(spec))?;
    let candidates = box_sum_vertices(spec.n() - 2, &residual, lo, hi)
        .into_iter()
        .map(|free| {
            let mut v = Vec::with_capacity(spec.n());
            v.push(lo.clone());
            v.extend(free);
            v.push(hi.clone());
            v
        })
        .collect();
    best_of(candidates, Method::VertexEnum).ok_or_else(|| attained_infeasible(spec))
}

/// Minimum population variance when the data must contain both `m` and `M`:
/// the pinned pair plus `n − 2` copies of the residual mean.
pub fn attained_min_variance(spec: &ProblemSpec) -> Result<(Rational, Dataset)> {
    let (lo, hi) = (spec.lower(), spec.upper());
    if lo == hi {
        return Ok((Rational::zero(), Dataset::constant(spec.n(), lo.clone())));
    }
    let residual = residual_sum(spec).ok_or_else(|| attained_infeasible(spec))?;
    let free = spec.n() - 2;
    let mut values = vec![lo.clone()];
    if free == 0 {
        if !residual.is_zero() {
            return Err(attained_infeasible(spec));
        }
    } else {
        let r = residual / from_usize(free);
        if &r < lo || &r > hi {
            return Err(attained_infeasible(spec));
        }
        values.extend(std::iter::repeat(r).take(free));
    }
    values.push(hi.clone());
    let d = Dataset::new(values)?;
    Ok((d.population_variance(), d))
}

/// Smallest step the hill climb tries before giving up.
pub const HILL_CLIMB_EPS_FLOOR: f64 = 1e-12;
const MAX_SWEEPS_PER_STEP: usize = 10_000;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-restart seed; depends only on `(seed, restart)`.
fn restart_seed(seed: u64, restart: u64) -> u64 {
    splitmix64(seed ^ splitmix64(restart))
}

/// One restart of pairwise-transfer ascent on `count` free values in
/// `[lo, hi]` with mean `mean`. Returns the values and the number of
/// candidate moves evaluated.
fn climb(count: usize, mean: f64, lo: f64, hi: f64, seed: u64) -> (Vec<f64>, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..count).map(|_| rng.gen_range(lo..=hi)).collect();
    let ubar = u.iter().sum::<f64>() / count as f64;
    let mut x: Vec<f64> = if ubar > mean {
        u.iter().map(|v| lo + (v - lo) * (mean - lo) / (ubar - lo)).collect()
    } else if ubar < mean {
        u.iter().map(|v| hi - (hi - v) * (hi - mean) / (hi - ubar)).collect()
    } else {
        u
    };
    for v in x.iter_mut() {
        *v = v.clamp(lo, hi);
    }

    let mut pairs: Vec<(usize, usize)> = (0..count)
        .flat_map(|i| (0..count).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut evaluations = 0u64;
    let mut eps = (hi - lo) / 4.0;
    let mut sweeps = 0;
    while eps >= HILL_CLIMB_EPS_FLOOR {
        pairs.shuffle(&mut rng);
        let mut improved = false;
        for &(i, j) in &pairs {
            evaluations += 1;
            let d = eps.min(x[i] - lo).min(hi - x[j]);
            if d <= 0.0 {
                continue;
            }
            // change in Σx² when d moves from x_i to x_j
            let gain = 2.0 * d * d + 2.0 * d * (x[j] - x[i]);
            if gain > 0.0 {
                x[i] = (x[i] - d).max(lo);
                x[j] = (x[j] + d).min(hi);
                improved = true;
            }
        }
        sweeps += 1;
        if !improved || sweeps >= MAX_SWEEPS_PER_STEP {
            eps /= 2.0;
            sweeps = 0;
        }
    }
    (x, evaluations)
}

/// Random-restart pairwise-transfer hill climb in `f64`.
///
/// Each restart starts from a random point with the right mean and moves
/// mass between coordinate pairs at fixed mean, accepting strict increases.
/// The step starts at `(M − m)/4` and halves whenever a full shuffled sweep
/// over all pairs brings no improvement. Restarts run in parallel with
/// per-restart seeds derived from `(seed, restart)`, so the result does not
/// depend on scheduling. With attained-extremes semantics one coordinate
/// is pinned at each bound.
pub fn hill_climb_max(spec: &ProblemSpec, restarts: usize, seed: u64) -> Result<OracleResult> {
    let (lo, hi) = (spec.lower(), spec.upper());
    let attained = spec.semantics() == Semantics::AttainedExtremes && lo != hi;
    let (pinned, free, free_mean) = if attained {
        let residual = residual_sum(spec).ok_or_else(|| attained_infeasible(spec))?;
        let free = spec.n() - 2;
        let r = if free == 0 {
            if !residual.is_zero() {
                return Err(attained_infeasible(spec));
            }
            lo.clone()
        } else {
            residual / from_usize(free)
        };
        if &r < lo || &r > hi {
            return Err(attained_infeasible(spec));
        }
        (vec![lo.clone(), hi.clone()], free, r)
    } else {
        (vec![], spec.n(), spec.mean().clone())
    };

    let degenerate = free <= 1 || lo == hi || &free_mean == lo || &free_mean == hi;
    let (free_values, evaluations) = if degenerate {
        (vec![free_mean.clone(); free], 0)
    } else {
        let (flo, fhi, fmean) = (to_f64(lo), to_f64(hi), to_f64(&free_mean));
        let runs: Vec<(Vec<f64>, u64)> = (0..restarts.max(1) as u64)
            .into_par_iter()
            .map(|r| climb(free, fmean, flo, fhi, restart_seed(seed, r)))
            .collect();
        let evaluations = runs.iter().map(|(_, e)| e).sum();
        let sum_sq = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>();
        let mut best = 0;
        for (i, (v, _)) in runs.iter().enumerate() {
            if sum_sq(v) > sum_sq(&runs[best].0) {
                best = i;
            }
        }
        let values = runs[best]
            .0
            .iter()
            .map(|&t| from_f64(t).expect("finite"))
            .collect();
        (values, evaluations)
    };

    let mut values = pinned;
    values.extend(free_values);
    values.sort();
    let argmax = Dataset::new(values)?;
    Ok(OracleResult {
        best_variance: argmax.population_variance(),
        argmax,
        method: Method::HillClimb,
        evaluations,
    })
}

/// Largest `n` accepted by [`grid_max`].
pub const GRID_MAX_N: usize = 6;

/// Exhaustive search over datasets whose values lie on
/// `{m + t(M − m)/q : t = 0..q}` and whose sum is exactly `n·c`.
/// Multisets are enumerated once each (non-decreasing grid indices).
pub fn grid_max(spec: &ProblemSpec, resolution: u32) -> Result<OracleResult> {
    if spec.semantics() != Semantics::BoundsOnly {
        return Err(Error::Semantics);
    }
    let n = spec.n();
    if n > GRID_MAX_N {
        return Err(Error::Domain(format!(
            "grid search supports n ≤ {GRID_MAX_N}, got {n}"
        )));
    }
    if resolution == 0 {
        return Err(Error::Domain("grid resolution must be positive".into()));
    }
    let Some(c) = spec.unit_mean() else {
        return Ok(OracleResult {
            best_variance: Rational::zero(),
            argmax: Dataset::constant(n, spec.mean().clone()),
            method: Method::Grid,
            evaluations: 1,
        });
    };
    let q = resolution as usize;
    let target = from_usize(n) * c * from_usize(q);
    if !target.is_integer() {
        return Err(Error::NotOnGrid(to_decimal(&target)));
    }
    let target: usize = target.to_integer().try_into().expect("small grid sum");

    let step = spec.bounds().width() / from_usize(q);
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut evaluations = 0u64;
    let mut current = Vec::with_capacity(n);

    fn recurse(
        slots: usize,
        remaining: usize,
        min_index: usize,
        q: usize,
        current: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if slots == 0 {
            if remaining == 0 {
                visit(current);
            }
            return;
        }
        for t in min_index..=q.min(remaining) {
            // the remaining slots are all ≥ t
            if t * slots > remaining || q * slots < remaining {
                break;
            }
            current.push(t);
            recurse(slots - 1, remaining - t, t, q, current, visit);
            current.pop();
        }
    }

    let mut visit = |idx: &[usize]| {
        evaluations += 1;
        let d = Dataset::new(idx.iter().map(|&t| from_usize(t)).collect()).expect("n ≥ 1");
        let v = d.population_variance();
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, idx.to_vec()));
        }
    };
    recurse(n, target, 0, q, &mut current, &mut visit);

    let (_, idx) = best.ok_or_else(|| Error::NotOnGrid(target.to_string()))?;
    let argmax = Dataset::new(
        idx.iter()
            .map(|&t| spec.lower() + &step * from_usize(t))
            .collect(),
    )?;
    Ok(OracleResult {
        best_variance: argmax.population_variance(),
        argmax,
        method: Method::Grid,
        evaluations,
    })
}
