//! Blahut-Arimoto over a fixed support, with an optional second-moment
//! constraint enforced through a Lagrange multiplier.
//!
//! One iteration maps `p_i <- p_i c_i / sum_j p_j c_j` with
//! `c_i = 2^(D_i - s x_i^2)`, where `D_i` is the relative entropy of point
//! `i` against the current output density and `s >= 0` is the multiplier
//! (zero for the unconstrained problem). For fixed `s` the iteration
//! ascends `I - s E[X^2]`; the realized power `E(s)` is nonincreasing in
//! `s`, and a bracketed secant search picks `s` so that `E(s)` meets the
//! budget.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_locations, AwgnChannel, Likelihood, QuadratureScheme};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaOptions<T> {
    /// Stop once an iteration raises the objective by less than this (bits).
    pub tol: T,
    pub max_iters: usize,
    /// Allowed `|E[X^2] - limit|` in power-constrained runs.
    pub power_tol: T,
    /// When set, convergence also needs the (penalized) divergences of
    /// every point with probability above `1e-6` to lie within this of the
    /// largest divergence on the support.
    pub kkt_tol: Option<T>,
}

impl<T: Real> Default for BaOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol(1e-9, 4.0),
            max_iters: 200_000,
            power_tol: T::tol(1e-8, 16.0),
            kkt_tol: None,
        }
    }
}

impl<T: Real> BaOptions<T> {
    pub fn validate(&self) -> Result<(), T> {
        if !(self.tol > T::zero())
            || !(self.power_tol > T::zero())
            || self.max_iters == 0
            || self.kkt_tol.is_some_and(|k| !(k > T::zero()))
        {
            return Err(Error::InvalidArgument(format!(
                "BA options need tol > 0, power_tol > 0, max_iters >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }
}

/// Converged (or best-so-far) probabilities on a fixed support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaOutcome<T> {
    pub probabilities: Vec<T>,
    pub mutual_information: T,
    /// Zero for unconstrained runs and for inactive power constraints.
    pub lagrange_multiplier: T,
    pub iterations: usize,
    pub realized_power: T,
    /// `D(p(y|x_i) || p(y))` at the returned probabilities, in bits.
    pub divergences: Vec<T>,
}

impl<T: Real> BaOutcome<T> {
    /// Largest divergence over the support; an upper bound on the capacity
    /// of the fixed-support channel when unconstrained.
    pub fn max_divergence(&self) -> T {
        self.divergences
            .iter()
            .copied()
            .fold(T::neg_infinity(), T::max)
    }
}

/// Runs the multiplicative update from `init` until the objective gain
/// drops below `tol` (and the KKT spread is within `kkt`, when given) or
/// `max_iters` updates were applied. The boolean is `true` on convergence.
pub(crate) fn iterate<T: Real>(
    lik: &Likelihood<T>,
    init: &[T],
    multiplier: T,
    tol: T,
    kkt: Option<T>,
    max_iters: usize,
    mut history: Option<&mut Vec<T>>,
) -> (BaOutcome<T>, bool) {
    let xs = lik.locations();
    let x2: Vec<T> = xs.iter().map(|x| *x * *x).collect();
    let mut p = init.to_vec();
    normalize(&mut p);
    let mut log_q = Vec::new();
    let mut d = Vec::new();
    let mut prev = T::neg_infinity();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        lik.log_output(&p, &mut log_q);
        lik.divergences_with(&log_q, &mut d);
        let mi = dot(&p, &d);
        let power = dot(&p, &x2);
        let objective = mi - multiplier * power;
        if let Some(h) = history.as_deref_mut() {
            h.push(mi);
        }
        let exps: Vec<T> = d
            .iter()
            .zip(&x2)
            .map(|(&di, &xi2)| di - multiplier * xi2)
            .collect();
        if objective - prev < tol && kkt.is_none_or(|k| kkt_spread(&p, &exps) <= k) {
            converged = true;
            break;
        }
        if iterations == max_iters {
            break;
        }
        prev = objective;
        let top = exps
            .iter()
            .zip(&p)
            .filter(|(_, pi)| **pi > T::zero())
            .fold(T::neg_infinity(), |m, (e, _)| m.max(*e));
        for (pi, e) in p.iter_mut().zip(&exps) {
            *pi = *pi * (*e - top).exp2();
        }
        normalize(&mut p);
        iterations += 1;
    }
    let mi = dot(&p, &d).max(T::zero());
    let realized_power = dot(&p, &x2);
    (
        BaOutcome {
            probabilities: p,
            mutual_information: mi,
            lagrange_multiplier: multiplier,
            iterations,
            realized_power,
            divergences: d,
        },
        converged,
    )
}

/// Largest penalized divergence minus the smallest one among points holding
/// more than `1e-6` of the mass.
fn kkt_spread<T: Real>(p: &[T], exps: &[T]) -> T {
    let floor = T::lit(1e-6);
    let top = exps.iter().copied().fold(T::neg_infinity(), T::max);
    let low = p
        .iter()
        .zip(exps)
        .filter(|(pi, _)| **pi > floor)
        .fold(T::infinity(), |m, (_, e)| m.min(*e));
    top - low
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn normalize<T: Real>(p: &mut [T]) {
    let s = p.iter().fold(T::zero(), |a, &v| a + v);
    for v in p.iter_mut() {
        *v = *v / s;
    }
}

/// Warm starts are floored so that mass points driven towards zero by an
/// earlier run can recover.
fn warm_start<T: Real>(init: &[T]) -> Vec<T> {
    let floor = T::tol(1e-12, 4.0);
    let mut p: Vec<T> = init.iter().map(|&v| v.max(floor)).collect();
    normalize(&mut p);
    p
}

fn uniform<T: Real>(n: usize) -> Vec<T> {
    vec![T::one() / T::from_usize(n).unwrap(); n]
}

/// MI-maximizing probabilities on a fixed support, from a uniform start.
pub fn ba_fixed_support<T: Real>(
    locations: &[T],
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
    opts: &BaOptions<T>,
) -> Result<BaOutcome<T>, T> {
    ba_fixed_support_warm(locations, &uniform(locations.len()), ch, q, opts)
}

/// [`ba_fixed_support`] starting from `init` (floored at `1e-12`).
pub fn ba_fixed_support_warm<T: Real>(
    locations: &[T],
    init: &[T],
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
    opts: &BaOptions<T>,
) -> Result<BaOutcome<T>, T> {
    check_locations(locations)?;
    opts.validate()?;
    check_init(locations, init)?;
    let lik = Likelihood::new(locations, ch, q);
    let (outcome, converged) = iterate(
        &lik,
        &warm_start(init),
        T::zero(),
        opts.tol,
        opts.kkt_tol,
        opts.max_iters,
        None,
    );
    if converged {
        Ok(outcome)
    } else {
        Err(Error::MaxItersExceeded(Box::new(outcome)))
    }
}

/// Unconstrained BA from a uniform start, returning the mutual information
/// after every iteration alongside the outcome.
pub fn ba_trace<T: Real>(
    locations: &[T],
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
    opts: &BaOptions<T>,
) -> Result<(BaOutcome<T>, Vec<T>), T> {
    check_locations(locations)?;
    opts.validate()?;
    let lik = Likelihood::new(locations, ch, q);
    let mut history = Vec::new();
    let (outcome, converged) = iterate(
        &lik,
        &uniform(locations.len()),
        T::zero(),
        opts.tol,
        opts.kkt_tol,
        opts.max_iters,
        Some(&mut history),
    );
    if converged {
        Ok((outcome, history))
    } else {
        Err(Error::MaxItersExceeded(Box::new(outcome)))
    }
}

fn check_init<T: Real>(locations: &[T], init: &[T]) -> Result<(), T> {
    if init.len() != locations.len() {
        return Err(Error::InvalidArgument(format!(
            "{} initial probabilities for {} locations",
            init.len(),
            locations.len()
        )));
    }
    if init.iter().any(|p| !p.is_finite() || *p < T::zero()) {
        return Err(Error::InvalidArgument(
            "initial probabilities must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// First bracket step around a multiplier hint (a factor).
const HINT_STEP: f64 = 1.1;

/// Largest relative power miss of the multiplier search that is still
/// accepted and projected onto the budget.
const NEAR_MISS: f64 = 1e-3;

/// Power-constrained BA: maximizes `I` over probabilities on the support
/// subject to `E[X^2] <= power_limit`.
pub fn ba_power_constrained<T: Real>(
    locations: &[T],
    ch: &AwgnChannel<T>,
    power_limit: T,
    q: &QuadratureScheme<T>,
    opts: &BaOptions<T>,
) -> Result<BaOutcome<T>, T> {
    ba_power_constrained_warm(
        locations,
        &uniform(locations.len()),
        None,
        ch,
        power_limit,
        q,
        opts,
    )
}

/// [`ba_power_constrained`] warm-started from `init` probabilities. When
/// `multiplier_hint` is a positive value from a nearby problem, the
/// multiplier bracket is grown around it instead of from `[0, 1]`.
pub fn ba_power_constrained_warm<T: Real>(
    locations: &[T],
    init: &[T],
    multiplier_hint: Option<T>,
    ch: &AwgnChannel<T>,
    power_limit: T,
    q: &QuadratureScheme<T>,
    opts: &BaOptions<T>,
) -> Result<BaOutcome<T>, T> {
    check_locations(locations)?;
    opts.validate()?;
    check_init(locations, init)?;
    if !(power_limit > T::zero()) || !power_limit.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "power limit must be positive, got {power_limit:?}"
        )));
    }
    let min_power = locations
        .iter()
        .map(|x| *x * *x)
        .fold(T::infinity(), T::min);
    if min_power > power_limit + opts.power_tol {
        return Err(Error::Infeasible {
            power_limit,
            min_power,
        });
    }

    let lik = Likelihood::new(locations, ch, q);
    let start = warm_start(init);
    match search_multiplier(
        &lik,
        &start,
        multiplier_hint,
        power_limit,
        opts,
        opts.kkt_tol,
    ) {
        // Objective-gain stopping can leave `E(s)` inconsistent between
        // nearby multipliers at very low SNR. Retry with every evaluation
        // held to the KKT conditions.
        Err(Error::SecantDivergence(_)) if opts.kkt_tol.is_none() => {
            let kkt = opts.tol * T::lit(10.0);
            search_multiplier(&lik, &start, multiplier_hint, power_limit, opts, Some(kkt))
        }
        r => r,
    }
}

fn search_multiplier<T: Real>(
    lik: &Likelihood<T>,
    start: &[T],
    multiplier_hint: Option<T>,
    power_limit: T,
    opts: &BaOptions<T>,
    kkt: Option<T>,
) -> Result<BaOutcome<T>, T> {
    // Each multiplier starts from the result at the nearest multiplier
    // evaluated so far when that one is within a factor of two; otherwise
    // from `init`. Chaining across large jumps lets a big multiplier starve
    // outer points, and the multiplicative update recovers from that only
    // very slowly.
    let mut seen: Vec<(T, Vec<T>)> = Vec::new();
    let mut last: Option<BaOutcome<T>> = None;
    let mut run = |s: T, last: &mut Option<BaOutcome<T>>| -> T {
        let near = seen
            .iter()
            .filter(|(t, _)| {
                let (a, b) = (s.min(*t), s.max(*t));
                b == a || (a > T::zero() && b <= a * T::lit(2.0))
            })
            .min_by(|x, y| (x.0 - s).abs().partial_cmp(&(y.0 - s).abs()).unwrap());
        let from = near.map_or_else(|| start.to_vec(), |(_, p)| warm_start(p));
        let (out, _) = iterate(lik, &from, s, opts.tol, kkt, opts.max_iters, None);
        seen.push((s, out.probabilities.clone()));
        let e = out.realized_power;
        *last = Some(out);
        e
    };

    let free = run(T::zero(), &mut last);
    if free <= power_limit + opts.power_tol {
        let out = last.take().unwrap();
        return Ok(project_to_power(lik, out, power_limit, opts.power_tol));
    }

    let mut history: Vec<(T, T, BaOutcome<T>)> = Vec::new();
    let solved = solve_bracketed(
        |s| {
            let e = run(s, &mut last);
            history.push((s, e, last.clone().unwrap()));
            e
        },
        // Aim inside the budget so a converged search needs no projection.
        power_limit - opts.power_tol / T::lit(2.0),
        opts.power_tol / T::lit(2.0),
        multiplier_hint,
        200,
    );
    let out = match solved {
        Ok(s) => history
            .into_iter()
            .rev()
            .find(|(hs, _, _)| *hs == s)
            .map(|(_, _, o)| o)
            .expect("secant returns an evaluated multiplier"),
        // Each evaluation is itself iterative, so near a sharp optimum the
        // realized power carries noise above `power_tol` and the bracket can
        // collapse short of the target. The closest evaluation is then
        // closed onto the budget by the projection below.
        Err(err) => history
            .into_iter()
            .filter(|(_, e, _)| (*e - power_limit).abs() <= power_limit * T::lit(NEAR_MISS))
            .min_by(|a, b| {
                let da = (a.1 - power_limit).abs();
                let db = (b.1 - power_limit).abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(_, _, o)| o)
            .ok_or(err)?,
    };
    Ok(project_to_power(lik, out, power_limit, opts.power_tol))
}

/// Mixes a small amount of probability onto the lowest-power points (or,
/// for an active constraint undershot by more than `power_tol`, the
/// highest-power points) so the realized power meets the limit, then
/// refreshes the divergences. Mass goes to tied points in proportion to
/// what they hold, so mirrored supports stay balanced. Slack unconstrained
/// solutions are left alone.
fn project_to_power<T: Real>(
    lik: &Likelihood<T>,
    mut out: BaOutcome<T>,
    power_limit: T,
    power_tol: T,
) -> BaOutcome<T> {
    let over = out.realized_power > power_limit;
    let under = out.lagrange_multiplier > T::zero() && out.realized_power < power_limit - power_tol;
    if !(over || under) {
        return out;
    }
    let x2: Vec<T> = lik.locations().iter().map(|x| *x * *x).collect();
    let target = if over {
        x2.iter().copied().fold(T::infinity(), T::min)
    } else {
        x2.iter().copied().fold(T::neg_infinity(), T::max)
    };
    let t = (out.realized_power - power_limit) / (out.realized_power - target);
    // every point already sits at the limit up to rounding
    if !(t > T::zero() && t <= T::one()) {
        return out;
    }
    let near = T::tol(1e-12, 16.0) * target.max(T::one());
    let tied: Vec<usize> = (0..x2.len())
        .filter(|&i| (x2[i] - target).abs() <= near)
        .collect();
    let held = tied
        .iter()
        .fold(T::zero(), |a, &i| a + out.probabilities[i]);
    let share: Vec<T> = tied
        .iter()
        .map(|&i| {
            if held > T::zero() {
                out.probabilities[i] / held
            } else {
                T::one() / T::from_usize(tied.len()).unwrap()
            }
        })
        .collect();
    for p in out.probabilities.iter_mut() {
        *p = *p * (T::one() - t);
    }
    for (&i, &w) in tied.iter().zip(&share) {
        out.probabilities[i] = out.probabilities[i] + t * w;
    }
    normalize(&mut out.probabilities);
    out.realized_power = dot(&out.probabilities, &x2);
    lik.divergences(&out.probabilities, &mut out.divergences);
    out.mutual_information = dot(&out.probabilities, &out.divergences).max(T::zero());
    out
}

/// Finds `s >= 0` with `|power_of(s) - target| <= tol` for a nonincreasing
/// `power_of`.
///
/// The bracket starts at `s = 0` and doubles `s` from 1 until the power
/// falls below `target`; then secant steps run inside the bracket, falling
/// back to bisection whenever a step would leave it. At most 200 function
/// evaluations are spent in the secant phase.
pub fn solve_multiplier_secant<T: Real>(
    power_of: impl FnMut(T) -> T,
    target: T,
    tol: T,
) -> Result<T, T> {
    solve_bracketed(power_of, target, tol, None, 200)
}

fn solve_bracketed<T: Real>(
    mut power_of: impl FnMut(T) -> T,
    target: T,
    tol: T,
    hint: Option<T>,
    max_iters: usize,
) -> Result<T, T> {
    let two = T::lit(2.0);
    let f0;
    // (lo, f_lo) has power above target, (hi, f_hi) below.
    let (mut lo, mut f_lo, mut hi, mut f_hi);
    match hint.filter(|h| *h > T::zero() && h.is_finite()) {
        Some(h) => {
            let fh = power_of(h) - target;
            if fh.abs() <= tol {
                return Ok(h);
            }
            // A hint comes from a nearby problem, so the bracket is grown
            // geometrically from a small step instead of a doubling.
            let mut factor = T::lit(HINT_STEP);
            if fh > T::zero() {
                lo = h;
                f_lo = fh;
                let mut s = h * factor;
                let mut fs = power_of(s) - target;
                let mut grow = 0;
                while fs > tol {
                    lo = s;
                    f_lo = fs;
                    factor = (factor * factor).min(two);
                    s = s * factor;
                    fs = power_of(s) - target;
                    grow += 1;
                    if grow > 200 {
                        return Err(Error::SecantDivergence(
                            "power stays above target for every multiplier tried".into(),
                        ));
                    }
                }
                if fs.abs() <= tol {
                    return Ok(s);
                }
                hi = s;
                f_hi = fs;
            } else {
                hi = h;
                f_hi = fh;
                let mut s = h / factor;
                let mut fs = power_of(s) - target;
                let mut shrink = 0;
                while fs < -tol && shrink < 40 {
                    hi = s;
                    f_hi = fs;
                    factor = (factor * factor).min(two);
                    s = s / factor;
                    fs = power_of(s) - target;
                    shrink += 1;
                }
                if fs.abs() <= tol {
                    return Ok(s);
                }
                if fs < T::zero() {
                    s = T::zero();
                    fs = power_of(s) - target;
                    if fs <= tol {
                        return Ok(T::zero());
                    }
                }
                lo = s;
                f_lo = fs;
            }
        }
        None => {
            f0 = power_of(T::zero()) - target;
            if f0 <= tol {
                return Ok(T::zero());
            }
            lo = T::zero();
            f_lo = f0;
            let mut s = T::one();
            let mut fs = power_of(s) - target;
            let mut grow = 0;
            while fs >= T::zero() {
                if fs <= tol {
                    return Ok(s);
                }
                lo = s;
                f_lo = fs;
                s = s * two;
                fs = power_of(s) - target;
                grow += 1;
                if grow > 200 {
                    return Err(Error::SecantDivergence(
                        "power stays above target for every multiplier tried".into(),
                    ));
                }
            }
            if fs.abs() <= tol {
                return Ok(s);
            }
            hi = s;
            f_hi = fs;
        }
    }

    let (mut s_prev, mut f_prev) = (lo, f_lo);
    let (mut s_cur, mut f_cur) = (hi, f_hi);
    let (mut best_s, mut best_f) = if f_lo.abs() < f_hi.abs() {
        (lo, f_lo)
    } else {
        (hi, f_hi)
    };
    for _ in 0..max_iters {
        let mut s_new = if f_cur != f_prev {
            s_cur - f_cur * (s_cur - s_prev) / (f_cur - f_prev)
        } else {
            (lo + hi) / two
        };
        if !(s_new > lo && s_new < hi) {
            s_new = (lo + hi) / two;
        }
        let f_new = power_of(s_new) - target;
        if f_new.abs() < best_f.abs() {
            best_s = s_new;
            best_f = f_new;
        }
        if f_new.abs() <= tol {
            return Ok(s_new);
        }
        if f_new > T::zero() {
            lo = s_new;
            f_lo = f_new;
        } else {
            hi = s_new;
            f_hi = f_new;
        }
        s_prev = s_cur;
        f_prev = f_cur;
        s_cur = s_new;
        f_cur = f_new;
        if hi - lo <= T::tol(1e-10, 4.0) * hi.max(T::one()) {
            break;
        }
    }
    let _ = (f_lo, f_hi);
    Err(Error::SecantDivergence(format!(
        "closest multiplier {best_s:?} leaves power off target by {best_f:?}"
    )))
}
