//! Dynamic-assignment Blahut-Arimoto for the amplitude-constrained channel
//! `|x| <= 1`.
//!
//! Each outer iteration optimizes probabilities on the current support with
//! BA (a capacity lower bound `I`), evaluates the relative-entropy profile
//! `D(x) = D(p(y|x) || p(y))` over `[-1, 1]` (its maximum `D_max` is an upper
//! bound), and stops once `D_max - I < epsilon`. Otherwise a mass point is
//! added when no point lies strictly between the center and the profile
//! maximizer, or the symmetric pair closest to the maximizer is moved by a
//! bounded line search with the probabilities held fixed.
//!
//! The support interval is centered at 0, and every intermediate
//! distribution is kept exactly symmetric about it.

use serde::{Deserialize, Serialize};

use crate::ba::{self, BaOptions};
use crate::error::{Error, Result};
use crate::numerics::{
    mutual_information, AwgnChannel, FinitePmf, Likelihood, OutputProfile, QuadratureGrid,
    QuadratureScheme,
};
use crate::scalar::Real;
use crate::search::{brent_max, golden_section_max};

/// Initial half-separation of the two points a center point splits into.
pub const SPLIT_OFFSET: f64 = 1e-4;

/// Minimum gap kept between neighbouring mass points during line searches.
pub const ORDER_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DabAcOptions<T> {
    /// Required gap `D_max - I` (bits).
    pub epsilon: T,
    pub max_outer_iters: usize,
    /// Grid size for locating the maximizer of `D(x)` on `[-1, 1]`.
    pub xmax_grid: usize,
    /// Mass points below this probability are removed after each BA call.
    pub prune_threshold: T,
    pub ba: BaOptions<T>,
    pub quadrature: QuadratureScheme<T>,
    /// Keep every outer iteration in [`DabAcResult::history`].
    pub record_history: bool,
}

impl<T: Real> Default for DabAcOptions<T> {
    fn default() -> Self {
        Self {
            epsilon: T::tol(1e-5, 64.0),
            max_outer_iters: 5000,
            xmax_grid: 4001,
            prune_threshold: T::lit(1e-9),
            ba: BaOptions::default(),
            quadrature: QuadratureScheme::default(),
            record_history: false,
        }
    }
}

impl<T: Real> DabAcOptions<T> {
    pub fn validate(&self) -> Result<(), T> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {:?}",
                self.epsilon
            )));
        }
        if self.xmax_grid < 3 || self.max_outer_iters == 0 {
            return Err(Error::InvalidArgument(
                "xmax_grid must be >= 3 and max_outer_iters >= 1".into(),
            ));
        }
        self.ba.validate()
    }
}

/// One outer iteration, after the BA step and pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct OuterStep<T> {
    pub pmf: FinitePmf<T>,
    pub mutual_information: T,
    pub d_max: T,
    pub x_max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct DabAcResult<T> {
    pub pmf: FinitePmf<T>,
    /// Mutual information of `pmf`.
    pub capacity_lower: T,
    /// Smallest `D_max` seen over all outer iterations.
    pub capacity_upper: T,
    pub outer_iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<OuterStep<T>>,
}

impl<T: Real> DabAcResult<T> {
    pub fn gap(&self) -> T {
        self.capacity_upper - self.capacity_lower
    }
}

/// Maximizer of `x -> D(p(y|x) || p(y))` over `[-1, 1]` and its value (the
/// capacity upper bound for the output density induced by `pmf`).
///
/// A uniform grid of `grid` points locates the best cell (ties within
/// `1e-12` bits go to the larger `x`); golden-section search on the
/// neighbouring cells refines it to `|dx| < 1e-10`.
pub fn find_x_max<T: Real>(
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
    grid: usize,
) -> Result<(T, T), T> {
    let profile = OutputProfile::for_unit_amplitude(pmf, *ch, q);
    find_x_max_on(&profile, grid)
}

fn find_x_max_on<T: Real>(profile: &OutputProfile<T>, grid: usize) -> Result<(T, T), T> {
    let grid = grid.max(3);
    let step = T::lit(2.0) / T::from_usize(grid - 1).unwrap();
    let at = |k: usize| -T::one() + step * T::from_usize(k).unwrap();
    let tie = T::tol(1e-12, 64.0);
    let mut best_k = 0;
    let mut best_v = T::neg_infinity();
    for k in 0..grid {
        let x = if k == grid - 1 { T::one() } else { at(k) };
        let v = profile.relative_entropy(x)?;
        if v > best_v + tie {
            best_k = k;
            best_v = v;
        } else if v >= best_v - tie {
            best_k = k;
            best_v = best_v.max(v);
        }
    }
    let lo = if best_k == 0 {
        -T::one()
    } else {
        at(best_k - 1)
    };
    let hi = if best_k + 1 >= grid - 1 {
        T::one()
    } else {
        at(best_k + 1)
    };
    let mut err = None;
    let refined = golden_section_max(
        |x| match profile.relative_entropy(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                T::neg_infinity()
            }
        },
        lo,
        hi,
        T::tol(1e-10, 16.0),
    );
    if let Some(e) = err {
        return Err(e);
    }
    let grid_x = if best_k == grid - 1 {
        T::one()
    } else {
        at(best_k)
    };
    if refined.value > best_v {
        Ok((refined.x, refined.value))
    } else {
        Ok((grid_x, best_v))
    }
}

/// Adds a mass point when none lies strictly between `x_max` and the
/// center 0. Even cardinality gains a point at 0; odd cardinality splits
/// the center point into `±SPLIT_OFFSET`.
pub fn add_mass_point<T: Real>(locations: &[T], x_max: T) -> (Vec<T>, bool) {
    add_mass_point_with(locations, x_max, T::lit(SPLIT_OFFSET))
}

pub fn add_mass_point_with<T: Real>(locations: &[T], x_max: T, split_offset: T) -> (Vec<T>, bool) {
    let (a, b) = (x_max.min(T::zero()), x_max.max(T::zero()));
    if locations.iter().any(|&x| x > a && x < b) {
        return (locations.to_vec(), false);
    }
    let n = locations.len();
    let mut out = Vec::with_capacity(n + 1);
    if n.is_multiple_of(2) {
        out.extend_from_slice(&locations[..n / 2]);
        out.push(T::zero());
        out.extend_from_slice(&locations[n / 2..]);
    } else {
        let room = if n > 1 {
            locations[n / 2 + 1] / T::lit(2.0)
        } else {
            split_offset
        };
        let d = split_offset.min(room);
        out.extend_from_slice(&locations[..n / 2]);
        out.push(-d);
        out.push(d);
        out.extend_from_slice(&locations[n / 2 + 1..]);
    }
    (out, true)
}

/// Index (upper half) of the point strictly between the center and
/// `x_max` that is closest to `x_max`.
fn movable_index<T: Real>(locations: &[T], x_max: T) -> Option<usize> {
    let (a, b) = (x_max.min(T::zero()), x_max.max(T::zero()));
    let n = locations.len();
    let closest = locations
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > a && x < b)
        .min_by(|(_, x), (_, y)| {
            (**x - x_max)
                .abs()
                .partial_cmp(&(**y - x_max).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)?;
    Some(if locations[closest] < T::zero() {
        n - 1 - closest
    } else {
        closest
    })
}

/// Feasible displacement range for the upper pair member `u`, keeping
/// strict ordering (with [`ORDER_MARGIN`]) and `|x| <= 1`.
fn pair_bounds<T: Real>(locations: &[T], u: usize, outer_limit: Option<T>) -> (T, T) {
    let margin = T::lit(ORDER_MARGIN);
    let x = locations[u];
    let n = locations.len();
    let below = if locations[u - 1] > T::zero() {
        locations[u - 1]
    } else {
        T::zero()
    };
    let lo = below + margin;
    let hi = if u + 1 < n {
        locations[u + 1] - margin
    } else {
        outer_limit.unwrap_or(T::infinity())
    };
    (lo - x, hi - x)
}

/// Locations with the symmetric pair `(mirror(u), u)` displaced to
/// `∓(x_u + lambda)`.
pub(crate) fn displaced<T: Real>(locations: &[T], u: usize, lambda: T) -> Vec<T> {
    let n = locations.len();
    let mut out = locations.to_vec();
    let v = locations[u] + lambda;
    out[u] = v;
    out[n - 1 - u] = -v;
    out
}

/// Moves the symmetric pair closest to `x_max` (inside the interval
/// between the center and `x_max`) to maximize the mutual information with
/// the probabilities held fixed.
pub fn improve_locations<T: Real>(
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    x_max: T,
    q: &QuadratureScheme<T>,
) -> Result<FinitePmf<T>, T> {
    let u = movable_index(pmf.locations(), x_max).ok_or(Error::NoMovableIndex { x_max })?;
    let grid = unit_window(pmf, ch, q);
    Ok(move_pair(pmf, ch, u, &grid, q.truncation_radius()).0)
}

fn unit_window<T: Real>(
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
) -> QuadratureGrid<T> {
    let lo = pmf.min_location().min(-T::one());
    let hi = pmf.max_location().max(T::one());
    let (a, b) = q.window(lo, hi, ch.sigma());
    q.grid(a, b)
}

/// Line search on the displacement of pair `u`; returns the new pmf and its
/// mutual information.
fn move_pair<T: Real>(
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    u: usize,
    grid: &QuadratureGrid<T>,
    radius: T,
) -> (FinitePmf<T>, T) {
    let locs = pmf.locations();
    let probs = pmf.probabilities();
    let (lo, hi) = pair_bounds(locs, u, Some(T::one()));
    let mi_at = |lambda: T| {
        let cand = displaced(locs, u, lambda);
        Likelihood::with_grid(&cand, ch, grid.clone(), radius).mutual_information(probs)
    };
    let best = brent_max(
        mi_at,
        lo.min(T::zero()),
        hi.max(T::zero()),
        Some(T::zero()),
        T::tol(1e-10, 64.0),
        80,
    );
    let moved = FinitePmf::from_parts_unchecked(displaced(locs, u, best.x), probs.to_vec());
    (moved, best.value)
}

/// Averages mirrored probabilities so the distribution is exactly symmetric.
pub(crate) fn symmetrize<T: Real>(p: &mut [T]) {
    let n = p.len();
    for i in 0..n / 2 {
        let m = (p[i] + p[n - 1 - i]) / T::lit(2.0);
        p[i] = m;
        p[n - 1 - i] = m;
    }
}

fn check_symmetric_unit<T: Real>(pmf: &FinitePmf<T>) -> Result<(), T> {
    let tol = T::tol(1e-9, 64.0);
    let (dl, _) = pmf.asymmetry();
    let n = pmf.cardinality();
    if dl > tol || (n % 2 == 1 && pmf.locations()[n / 2].abs() > tol) {
        return Err(Error::InvalidArgument(
            "initial support must be symmetric about 0".into(),
        ));
    }
    if pmf.min_location() < -T::one() - tol || pmf.max_location() > T::one() + tol {
        return Err(Error::InvalidArgument(
            "initial support must lie in [-1, 1]".into(),
        ));
    }
    Ok(())
}

/// Exactly mirrored copy of the locations (upper half wins).
fn mirror_locations<T: Real>(locs: &mut [T]) {
    let n = locs.len();
    for i in 0..n / 2 {
        locs[i] = -locs[n - 1 - i];
    }
    if n % 2 == 1 {
        locs[n / 2] = T::zero();
    }
}

/// Runs the full DAB loop from `init` and returns the bracketed capacity.
pub fn dab_ac_solve<T: Real>(
    ch: &AwgnChannel<T>,
    init: &FinitePmf<T>,
    opts: &DabAcOptions<T>,
) -> Result<DabAcResult<T>, T> {
    opts.validate()?;
    check_symmetric_unit(init)?;
    let q = &opts.quadrature;
    let (mut locs, mut probs) = init.clone().into_parts();
    mirror_locations(&mut locs);
    for x in locs.iter_mut() {
        *x = x.max(-T::one()).min(T::one());
    }
    let mut upper = T::infinity();
    let mut best_lower = T::neg_infinity();
    let mut history = Vec::new();
    let mut last: Option<(FinitePmf<T>, T)> = None;
    let tight_ba = BaOptions {
        kkt_tol: Some(opts.epsilon / T::lit(10.0)),
        ..opts.ba
    };
    let mut tighten = false;

    for k in 1..=opts.max_outer_iters {
        let ba_opts = if tighten { &tight_ba } else { &opts.ba };
        let out = match ba::ba_fixed_support_warm(&locs, &probs, ch, q, ba_opts) {
            Ok(o) => o,
            Err(Error::MaxItersExceeded(best)) => *best,
            Err(e) => return Err(e),
        };
        let mut p = out.probabilities;
        symmetrize(&mut p);
        let full = FinitePmf::from_parts_unchecked(locs.clone(), p);
        let pmf = full.pruned(opts.prune_threshold);
        let mi = mutual_information(&pmf, ch, q)?;
        let profile = OutputProfile::for_unit_amplitude(&pmf, *ch, q);
        let (x_max, d_max) = find_x_max_on(&profile, opts.xmax_grid)?;
        upper = upper.min(d_max);
        best_lower = best_lower.max(mi);
        if opts.record_history {
            history.push(OuterStep {
                pmf: pmf.clone(),
                mutual_information: mi,
                d_max,
                x_max,
            });
        }
        last = Some((pmf.clone(), mi));
        if d_max - mi < opts.epsilon {
            return Ok(DabAcResult {
                pmf,
                capacity_lower: mi,
                capacity_upper: upper,
                outer_iterations: k,
                converged: true,
                history,
            });
        }

        let (cur_locs, cur_probs) = pmf.clone().into_parts();
        let snap = T::lit(SPLIT_OFFSET);
        tighten = cur_locs.iter().any(|&x| (x - x_max).abs() <= snap);
        if tighten {
            // D peaks on the support itself, so only the probabilities are off
            locs = cur_locs;
            probs = cur_probs;
            continue;
        }
        let (new_locs, added) = add_mass_point(&cur_locs, x_max);
        if added {
            probs = seed_probabilities(&cur_probs, new_locs.len());
            locs = new_locs;
            continue;
        }
        let grid = unit_window(&pmf, ch, q);
        let u = movable_index(&cur_locs, x_max).ok_or(Error::NoMovableIndex { x_max })?;
        let (moved, _) = move_pair(&pmf, ch, u, &grid, q.truncation_radius());
        let (l, p) = moved.into_parts();
        locs = l;
        probs = p;
    }

    let (pmf, mi) = last.expect("at least one outer iteration");
    Err(Error::MaxOuterItersExceeded(Box::new(DabAcResult {
        pmf,
        capacity_lower: mi,
        capacity_upper: upper,
        outer_iterations: opts.max_outer_iters,
        converged: false,
        history,
    })))
}

/// Probabilities for a support that just gained a point. An inserted center
/// takes `1/(n+1)` of the mass; a split center divides its mass evenly.
fn seed_probabilities<T: Real>(old: &[T], new_len: usize) -> Vec<T> {
    let n = old.len();
    let mut out = Vec::with_capacity(new_len);
    if n.is_multiple_of(2) {
        let share = T::one() / T::from_usize(n + 1).unwrap();
        let scale = T::one() - share;
        out.extend(old[..n / 2].iter().map(|&p| p * scale));
        out.push(share);
        out.extend(old[n / 2..].iter().map(|&p| p * scale));
    } else {
        let half = old[n / 2] / T::lit(2.0);
        out.extend_from_slice(&old[..n / 2]);
        out.push(half);
        out.push(half);
        out.extend_from_slice(&old[n / 2 + 1..]);
    }
    out
}

/// Best symmetric distribution with exactly `cardinality` mass points on
/// `[-1, 1]` (odd cardinality keeps a point at 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct FixedCardinalityOptimum<T> {
    pub pmf: FinitePmf<T>,
    pub mutual_information: T,
}

/// Maximizes the BA-optimal mutual information over symmetric supports of
/// a fixed cardinality by cyclic coordinate ascent on the pair magnitudes.
/// Each coordinate step is a bounded Brent search where every trial
/// location set gets its own BA solve.
pub fn ac_fixed_cardinality<T: Real>(
    ch: &AwgnChannel<T>,
    cardinality: usize,
    q: &QuadratureScheme<T>,
    ba_opts: &BaOptions<T>,
    rate_tol: T,
) -> Result<FixedCardinalityOptimum<T>, T> {
    if cardinality == 0 {
        return Err(Error::InvalidArgument(
            "cardinality must be positive".into(),
        ));
    }
    let pairs = cardinality / 2;
    let odd = cardinality % 2 == 1;
    let build = |mags: &[T]| -> Vec<T> {
        let mut v: Vec<T> = mags.iter().rev().map(|m| -*m).collect();
        if odd {
            v.push(T::zero());
        }
        v.extend_from_slice(mags);
        v
    };
    // Equally spaced start on [-1, 1].
    let denom = T::from_usize(cardinality.max(2) - 1).unwrap();
    let mut mags: Vec<T> = (0..pairs)
        .map(|k| {
            let idx = if odd { 2 * (k + 1) } else { 2 * k + 1 };
            T::from_usize(idx).unwrap() / denom
        })
        .collect();
    let mut probs = vec![T::one() / T::from_usize(cardinality).unwrap(); cardinality];

    let solve = |mags: &[T], init: &[T]| -> Result<ba::BaOutcome<T>, T> {
        let locs = build(mags);
        match ba::ba_fixed_support_warm(&locs, init, ch, q, ba_opts) {
            Ok(o) => Ok(o),
            Err(Error::MaxItersExceeded(best)) => Ok(*best),
            Err(e) => Err(e),
        }
    };
    let mut best = solve(&mags, &probs)?;
    probs = best.probabilities.clone();
    let margin = T::lit(ORDER_MARGIN);
    for _cycle in 0..200 {
        let start = best.mutual_information;
        for k in 0..pairs {
            let lo = if k == 0 { margin } else { mags[k - 1] + margin };
            let hi = if k + 1 < pairs {
                mags[k + 1] - margin
            } else {
                T::one()
            };
            if hi <= lo {
                continue;
            }
            let mut err = None;
            let base = mags.clone();
            let warm = probs.clone();
            let r = brent_max(
                |m| {
                    let mut trial = base.clone();
                    trial[k] = m;
                    match solve(&trial, &warm) {
                        Ok(o) => o.mutual_information,
                        Err(e) => {
                            err = Some(e);
                            T::neg_infinity()
                        }
                    }
                },
                lo,
                hi,
                Some(mags[k]),
                T::tol(1e-9, 64.0),
                80,
            );
            if let Some(e) = err {
                return Err(e);
            }
            if r.value > best.mutual_information {
                mags[k] = r.x;
                best = solve(&mags, &warm)?;
                probs = best.probabilities.clone();
            }
        }
        if best.mutual_information - start < rate_tol {
            break;
        }
    }
    let mut p = best.probabilities;
    symmetrize(&mut p);
    let pmf = FinitePmf::normalized(build(&mags), p)?;
    Ok(FixedCardinalityOptimum {
        mutual_information: best.mutual_information,
        pmf,
    })
}
