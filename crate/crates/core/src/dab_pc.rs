//! Dynamic-assignment Blahut-Arimoto for the power-constrained channel at a
//! fixed input cardinality.
//!
//! Each iteration optimizes probabilities with power-constrained BA, picks a
//! symmetric pair of mass points round-robin, and line-searches the pair's
//! magnitude. Every trial position is made feasible by rescaling the
//! probabilities of another group of points so that total probability and
//! second moment stay fixed (a "power-preserving move"). The loop stops when
//! an iteration gains less than `delta_i_tol` bits or after `max_iters`
//! iterations. Locations stay mirrored about 0; probabilities may not.

use serde::{Deserialize, Serialize};

use crate::ba::{ba_power_constrained_warm, BaOptions};
use crate::baselines::equilattice;
use crate::dab_ac::ORDER_MARGIN;
use crate::error::{Error, Result};
use crate::numerics::{AwgnChannel, FinitePmf, Likelihood, QuadratureScheme};
use crate::scalar::Real;
use crate::search::brent_max;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DabPcOptions<T> {
    /// Stop once an iteration raises the rate by less than this (bits).
    pub delta_i_tol: T,
    pub max_iters: usize,
    /// Allowed `|E[X^2] - limit|` after each BA call.
    pub power_tol: T,
    pub ba: BaOptions<T>,
    pub quadrature: QuadratureScheme<T>,
}

impl<T: Real> Default for DabPcOptions<T> {
    fn default() -> Self {
        Self {
            delta_i_tol: T::tol(1e-5, 64.0),
            max_iters: 400,
            power_tol: T::tol(1e-8, 16.0),
            ba: BaOptions::default(),
            quadrature: QuadratureScheme::default(),
        }
    }
}

impl<T: Real> DabPcOptions<T> {
    pub fn validate(&self) -> Result<(), T> {
        if !(self.delta_i_tol > T::zero()) || !(self.power_tol > T::zero()) || self.max_iters == 0 {
            return Err(Error::InvalidArgument(format!(
                "DAB-PC options need delta_i_tol > 0, power_tol > 0, max_iters >= 1: \
                 {:?}, {:?}, {}",
                self.delta_i_tol, self.power_tol, self.max_iters
            )));
        }
        self.ba.validate()
    }

    fn ba_options(&self) -> BaOptions<T> {
        BaOptions {
            power_tol: self.power_tol,
            ..self.ba
        }
    }
}

/// Why [`dab_pc_solve`] stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergedBy {
    DeltaI,
    IterationCap,
}

impl ConvergedBy {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvergedBy::DeltaI => "delta_i",
            ConvergedBy::IterationCap => "iteration_cap",
        }
    }
}

impl std::fmt::Display for ConvergedBy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct DabPcResult<T> {
    pub pmf: FinitePmf<T>,
    /// Mutual information of `pmf`; a lower estimate of the fixed-cardinality
    /// capacity.
    pub rate: T,
    pub iterations: usize,
    pub converged_by: ConvergedBy,
    /// Multiplier from the last BA call (0 when the budget was slack).
    pub lagrange_multiplier: T,
    /// Best rate after each iteration; starts with the rate of the initial
    /// distribution.
    pub history: Vec<T>,
    /// Largest `|x_i + x_{n-1-i}|` of the final support.
    pub location_asymmetry: T,
    /// Largest `|p_i - p_{n-1-i}|` of the final distribution.
    pub probability_asymmetry: T,
}

/// Group totals for a pair `(j, n-1-j)`: points outside the pair (higher
/// power), the pair itself, and points inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowDecomposition<T> {
    pub p_out: T,
    pub p_move: T,
    pub p_in: T,
    pub e_out: T,
    pub e_move: T,
    pub e_in: T,
}

impl<T: Real> FlowDecomposition<T> {
    /// Splits `pmf` around the pair whose lower index is `j`.
    pub fn new(pmf: &FinitePmf<T>, j: usize) -> Result<Self, T> {
        let mirror = pair_mirror(pmf.cardinality(), j)?;
        let mut d = FlowDecomposition {
            p_out: T::zero(),
            p_move: T::zero(),
            p_in: T::zero(),
            e_out: T::zero(),
            e_move: T::zero(),
            e_in: T::zero(),
        };
        for (i, (x, p)) in pmf.iter().enumerate() {
            let (pg, eg) = if i < j || i > mirror {
                (&mut d.p_out, &mut d.e_out)
            } else if i == j || i == mirror {
                (&mut d.p_move, &mut d.e_move)
            } else {
                (&mut d.p_in, &mut d.e_in)
            };
            *pg = *pg + p;
            *eg = *eg + p * x * x;
        }
        Ok(d)
    }
}

fn pair_mirror<T: Real>(n: usize, j: usize) -> Result<usize, T> {
    if n < 2 || j >= n / 2 {
        return Err(Error::InvalidArgument(format!(
            "pair index {j} is not a lower pair member for cardinality {n}"
        )));
    }
    Ok(n - 1 - j)
}

/// Pair visited at `step` (counted from 0): lower indices cycle through
/// `0, 1, ..., n/2 - 1`, so an odd center point is never moved. `None` when
/// `cardinality < 2`.
pub fn select_pair_round_robin(cardinality: usize, step: usize) -> Option<(usize, usize)> {
    let pairs = cardinality / 2;
    (pairs > 0).then(|| {
        let j = step % pairs;
        (j, cardinality - 1 - j)
    })
}

/// Relocates the pair `(j, n-1-j)` to `new_pair` and rescales
/// probabilities so the result has total probability 1 and second moment
/// `power_limit`.
///
/// The pair's probabilities scale by `alpha_move`. For `j > 0` the outer
/// group scales by `alpha_out` and inner points are untouched; for the
/// outermost pair the inner group scales instead. The two factors solve
///
/// ```text
/// a p_g + b p_move = 1 - p_fixed
/// a e_g + b e_move' = power_limit - e_fixed
/// ```
///
/// where `e_move'` is the pair's second moment at the new locations. An
/// empty scaled group fixes `a = 1` and leaves one equation for `b`.
pub fn power_preserving_move<T: Real>(
    pmf: &FinitePmf<T>,
    pair: (usize, usize),
    new_pair: (T, T),
    power_limit: T,
) -> Result<FinitePmf<T>, T> {
    let n = pmf.cardinality();
    let (j, m) = pair;
    if pair_mirror::<T>(n, j)? != m {
        return Err(Error::InvalidArgument(format!(
            "({j}, {m}) is not a mirrored pair for cardinality {n}"
        )));
    }
    let locs = pmf.locations();
    let (lo, hi) = new_pair;
    let ordered = lo < hi
        && (j == 0 || lo > locs[j - 1])
        && (m + 1 == n || hi < locs[m + 1])
        && (m - j == 1 || (lo < locs[j + 1] && hi > locs[m - 1]));
    if !ordered || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "new pair ({lo:?}, {hi:?}) breaks the ordering of the support"
        )));
    }
    if !(power_limit > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "power limit must be positive, got {power_limit:?}"
        )));
    }

    let d = FlowDecomposition::new(pmf, j)?;
    let probs = pmf.probabilities();
    let e_move_new = probs[j] * lo * lo + probs[m] * hi * hi;
    let outermost = j == 0;
    let (p_g, e_g, p_fixed, e_fixed) = if outermost {
        (d.p_in, d.e_in, d.p_out, d.e_out)
    } else {
        (d.p_out, d.e_out, d.p_in, d.e_in)
    };
    let r1 = T::one() - p_fixed;
    let r2 = power_limit - e_fixed;
    let scale = T::tol(1e-12, 64.0) * power_limit.max(T::one());

    let (a, b) = if p_g == T::zero() {
        if d.p_move == T::zero() {
            return Err(Error::InfeasibleFlow(
                "the pair carries no probability".into(),
            ));
        }
        let b = r1 / d.p_move;
        if (b * e_move_new - r2).abs() > scale {
            return Err(Error::InfeasibleFlow(format!(
                "no other group can absorb the power change (pair power {:?}, budget {r2:?})",
                b * e_move_new
            )));
        }
        (T::one(), b)
    } else {
        let det = p_g * e_move_new - d.p_move * e_g;
        if det.abs()
            <= T::epsilon() * (p_g * e_move_new).abs().max(d.p_move * e_g.abs()) * T::lit(16.0)
        {
            return Err(Error::InfeasibleFlow(
                "the flow equations are singular".into(),
            ));
        }
        let a = (r1 * e_move_new - d.p_move * r2) / det;
        let b = (p_g * r2 - e_g * r1) / det;
        (a, b)
    };
    if !(a >= T::zero()) || !(b >= T::zero()) {
        return Err(Error::InfeasibleFlow(format!(
            "scaling factors ({a:?}, {b:?}) would make probabilities negative"
        )));
    }

    let mut new_locs = locs.to_vec();
    new_locs[j] = lo;
    new_locs[m] = hi;
    let new_probs = probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let inner = i > j && i < m;
            if i == j || i == m {
                p * b
            } else if inner == outermost {
                p * a
            } else {
                p
            }
        })
        .collect();
    FinitePmf::new(new_locs, new_probs)
}

/// Moves the pair `(j, n-1-j)` to magnitude `magnitude`.
fn move_to<T: Real>(
    pmf: &FinitePmf<T>,
    j: usize,
    magnitude: T,
    power_limit: T,
) -> Result<FinitePmf<T>, T> {
    let m = pmf.cardinality() - 1 - j;
    power_preserving_move(pmf, (j, m), (-magnitude, magnitude), power_limit)
}

/// Line search over the displacement of one pair's magnitude. Returns the
/// moved distribution and its rate when that beats `current_rate`.
fn search_pair<T: Real>(
    pmf: &FinitePmf<T>,
    j: usize,
    ch: &AwgnChannel<T>,
    power_limit: T,
    current_rate: T,
    q: &QuadratureScheme<T>,
) -> Option<(FinitePmf<T>, T)> {
    let locs = pmf.locations();
    let n = locs.len();
    let m = n - 1 - j;
    let a = locs[m];
    let margin = T::lit(ORDER_MARGIN);
    let a_in = if m - j > 1 {
        locs[m - 1].max(T::zero())
    } else {
        T::zero()
    };
    // The outermost pair has no outer neighbour; its magnitude may at most
    // double in one step.
    let a_out = if j == 0 { a + a } else { locs[m + 1] };
    let feasible = |lambda: T| move_to(pmf, j, a + lambda, power_limit).is_ok();
    let shrink = |mut bound: T| {
        for _ in 0..60 {
            if feasible(bound) {
                return bound;
            }
            bound = bound / T::lit(2.0);
        }
        T::zero()
    };
    let lo = shrink((a_in + margin - a).min(T::zero()));
    let hi = shrink((a_out - margin - a).max(T::zero()));
    if !(hi - lo > margin) {
        return None;
    }
    let rate_at = |lambda: T| {
        if lambda == T::zero() {
            return current_rate;
        }
        match move_to(pmf, j, a + lambda, power_limit) {
            Ok(moved) => {
                Likelihood::new(moved.locations(), ch, q).mutual_information(moved.probabilities())
            }
            Err(_) => T::neg_infinity(),
        }
    };
    let best = brent_max(rate_at, lo, hi, Some(T::zero()), T::tol(1e-9, 64.0), 60);
    if best.value > current_rate && best.x != T::zero() {
        move_to(pmf, j, a + best.x, power_limit)
            .ok()
            .map(|moved| (moved, best.value))
    } else {
        None
    }
}

/// Finite-cardinality rate optimization under `E[X^2] <= power_limit`.
///
/// Starts from `init`, or the equilattice of `cardinality` points at
/// `power_limit` when `init` is `None`. `init` must have the requested
/// cardinality, locations mirrored about 0 and power at most
/// `power_limit`.
pub fn dab_pc_solve<T: Real>(
    ch: &AwgnChannel<T>,
    power_limit: T,
    cardinality: usize,
    init: Option<&FinitePmf<T>>,
    opts: &DabPcOptions<T>,
) -> Result<DabPcResult<T>, T> {
    opts.validate()?;
    if !(power_limit > T::zero()) || !power_limit.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "power limit must be positive, got {power_limit:?}"
        )));
    }
    let mut pmf = match init {
        Some(p) => checked_init(p, cardinality, power_limit, opts.power_tol)?,
        None if cardinality == 1 => FinitePmf::point_mass(T::zero()),
        None => equilattice(cardinality, power_limit)?,
    };
    let q = &opts.quadrature;
    let ba_opts = opts.ba_options();
    let mut rate = Likelihood::new(pmf.locations(), ch, q).mutual_information(pmf.probabilities());
    let mut history = vec![rate];
    let mut hint = None;
    let mut multiplier = T::zero();
    let mut converged_by = ConvergedBy::IterationCap;
    let mut iterations = 0;

    for step in 0..opts.max_iters {
        iterations = step + 1;
        let out = ba_power_constrained_warm(
            pmf.locations(),
            pmf.probabilities(),
            hint,
            ch,
            power_limit,
            q,
            &ba_opts,
        )?;
        multiplier = out.lagrange_multiplier;
        hint = (multiplier > T::zero()).then_some(multiplier);
        let mut cand_rate = out.mutual_information;
        let mut cand = pmf.with_probabilities(out.probabilities)?;
        if let Some((j, _)) = select_pair_round_robin(cardinality, step) {
            if let Some((moved, r)) = search_pair(&cand, j, ch, power_limit, cand_rate, q) {
                cand = moved;
                cand_rate = r;
            }
        }
        if cand_rate > rate {
            pmf = cand;
            rate = cand_rate;
        }
        history.push(rate);
        let window = (cardinality / 2).max(1);
        let gain = rate - history[history.len().saturating_sub(window + 1)];
        if gain < opts.delta_i_tol {
            converged_by = ConvergedBy::DeltaI;
            break;
        }
    }

    let (location_asymmetry, probability_asymmetry) = pmf.asymmetry();
    Ok(DabPcResult {
        pmf,
        rate,
        iterations,
        converged_by,
        lagrange_multiplier: multiplier,
        history,
        location_asymmetry,
        probability_asymmetry,
    })
}

fn checked_init<T: Real>(
    init: &FinitePmf<T>,
    cardinality: usize,
    power_limit: T,
    power_tol: T,
) -> Result<FinitePmf<T>, T> {
    if init.cardinality() != cardinality {
        return Err(Error::InvalidArgument(format!(
            "initial distribution has {} points, expected {cardinality}",
            init.cardinality()
        )));
    }
    let (dl, _) = init.asymmetry();
    let n = cardinality;
    if dl > T::tol(1e-9, 64.0) || (n % 2 == 1 && init.locations()[n / 2].abs() > T::tol(1e-9, 64.0))
    {
        return Err(Error::InvalidArgument(
            "initial locations must be mirrored about 0".into(),
        ));
    }
    if init.power() > power_limit + power_tol {
        return Err(Error::InvalidArgument(format!(
            "initial power {:?} exceeds the limit {power_limit:?}",
            init.power()
        )));
    }
    let (mut locs, probs) = init.clone().into_parts();
    for i in 0..n / 2 {
        let mag = (locs[n - 1 - i] - locs[i]) / T::lit(2.0);
        locs[i] = -mag;
        locs[n - 1 - i] = mag;
    }
    if n % 2 == 1 {
        locs[n / 2] = T::zero();
    }
    FinitePmf::new(locs, probs)
}
