//! Densities, relative entropies and mutual information for a finite input
//! distribution observed through additive Gaussian noise.
//!
//! Every integral over the output runs on a [`QuadratureGrid`]. For a
//! support point `x_i` only the nodes within `truncation_radius * sigma` of
//! `x_i` carry its conditional density; outside that band the density is
//! below `exp(-r^2 / 2)` of its peak and is dropped. The output density is
//! evaluated in the log domain whenever the plain sum underflows, so
//! `log p(y)` stays finite between widely separated mass points.

use serde::{Deserialize, Serialize};

use super::pmf::FinitePmf;
use super::quadrature::{QuadratureGrid, QuadratureScheme};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Additive white Gaussian noise with variance `noise_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AwgnChannel<T> {
    noise_power: T,
}

impl<T: Real> AwgnChannel<T> {
    pub fn new(noise_power: T) -> Result<Self, T> {
        if !(noise_power > T::zero()) || !noise_power.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise power must be positive and finite, got {noise_power:?}"
            )));
        }
        Ok(Self { noise_power })
    }

    /// Channel whose peak SNR `10 log10(1/N)` equals `db` (amplitude
    /// normalized to 1).
    pub fn from_peak_snr_db(db: T) -> Result<Self, T> {
        Self::new(T::lit(10.0).powf(-db / T::lit(10.0)))
    }

    /// Channel giving SNR `db` for an input of average power `power`.
    pub fn from_snr_db(db: T, power: T) -> Result<Self, T> {
        Self::new(power * T::lit(10.0).powf(-db / T::lit(10.0)))
    }

    pub fn noise_power(&self) -> T {
        self.noise_power
    }

    pub fn sigma(&self) -> T {
        self.noise_power.sqrt()
    }

    /// `ln` of the conditional density `N(y; x, noise_power)`.
    #[inline]
    pub fn log_conditional(&self, y: T, x: T) -> T {
        let d = y - x;
        -(d * d) / (T::lit(2.0) * self.noise_power) - log_norm(self.noise_power)
    }

    #[inline]
    pub fn conditional(&self, y: T, x: T) -> T {
        self.log_conditional(y, x).exp()
    }
}

/// `0.5 ln(2 pi N)`.
#[inline]
fn log_norm<T: Real>(noise_power: T) -> T {
    T::lit(0.5) * (T::TAU() * noise_power).ln()
}

/// Peak SNR in dB for an amplitude constraint of 1: `-10 log10 N`.
pub fn peak_snr_db<T: Real>(ch: &AwgnChannel<T>) -> T {
    -T::lit(10.0) * ch.noise_power().log10()
}

/// SNR in dB from the realized input power.
pub fn true_snr_db<T: Real>(pmf: &FinitePmf<T>, ch: &AwgnChannel<T>) -> T {
    T::lit(10.0) * (pmf.power() / ch.noise_power()).log10()
}

/// Output density `p(y) = sum_i p_i N(y; x_i, N)`.
pub fn output_density<T: Real>(pmf: &FinitePmf<T>, ch: &AwgnChannel<T>, y: T) -> T {
    pmf.iter()
        .fold(T::zero(), |acc, (x, p)| acc + p * ch.conditional(y, x))
}

/// `D(p(y|x) || p(y))` in bits.
pub fn relative_entropy_at<T: Real>(
    x: T,
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
) -> Result<T, T> {
    let lo = pmf.min_location().min(x);
    let hi = pmf.max_location().max(x);
    let (a, b) = q.window(lo, hi, ch.sigma());
    OutputProfile::new(pmf, *ch, q.grid(a, b), q.truncation_radius()).relative_entropy(x)
}

/// `I(X; Y) = sum_i p_i D(p(y|x_i) || p(y))` in bits.
pub fn mutual_information<T: Real>(
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
) -> Result<T, T> {
    let lik = Likelihood::new(pmf.locations(), ch, q);
    lik.check_coverage()?;
    Ok(lik.mutual_information(pmf.probabilities()))
}

/// Relative entropy of every support point, in bits.
pub fn divergences<T: Real>(
    pmf: &FinitePmf<T>,
    ch: &AwgnChannel<T>,
    q: &QuadratureScheme<T>,
) -> Result<Vec<T>, T> {
    let lik = Likelihood::new(pmf.locations(), ch, q);
    lik.check_coverage()?;
    let mut d = Vec::new();
    lik.divergences(pmf.probabilities(), &mut d);
    Ok(d)
}

/// Output density of a fixed input distribution tabulated on a grid, for
/// evaluating `D(p(y|x) || p(y))` at many `x`.
#[derive(Debug, Clone)]
pub struct OutputProfile<T> {
    ch: AwgnChannel<T>,
    grid: QuadratureGrid<T>,
    log_q: Vec<T>,
    band: T,
}

impl<T: Real> OutputProfile<T> {
    pub fn new(pmf: &FinitePmf<T>, ch: AwgnChannel<T>, grid: QuadratureGrid<T>, radius: T) -> Self {
        let log_q = grid
            .nodes()
            .iter()
            .map(|&y| log_output_density(pmf, &ch, y))
            .collect();
        Self {
            band: radius * ch.sigma(),
            ch,
            grid,
            log_q,
        }
    }

    /// Window covering `[-1, 1]` and the support, the domain searched for
    /// the capacity upper bound under a unit amplitude constraint.
    pub fn for_unit_amplitude(
        pmf: &FinitePmf<T>,
        ch: AwgnChannel<T>,
        q: &QuadratureScheme<T>,
    ) -> Self {
        let lo = pmf.min_location().min(-T::one());
        let hi = pmf.max_location().max(T::one());
        let (a, b) = q.window(lo, hi, ch.sigma());
        Self::new(pmf, ch, q.grid(a, b), q.truncation_radius())
    }

    pub fn grid(&self) -> &QuadratureGrid<T> {
        &self.grid
    }

    pub fn relative_entropy(&self, x: T) -> Result<T, T> {
        let floor = T::density_floor();
        let nodes = self.grid.nodes();
        let weights = self.grid.weights();
        let mut acc = T::zero();
        let mut live = false;
        for n in self.grid.range(x - self.band, x + self.band) {
            let log_c = self.ch.log_conditional(nodes[n], x);
            let c = log_c.exp();
            if c < floor {
                continue;
            }
            live = true;
            acc = acc + weights[n] * c * (log_c - self.log_q[n]);
        }
        if !live {
            return Err(Error::NumericalUnderflow { x });
        }
        Ok((acc / T::LN_2()).max(T::zero()))
    }
}

/// `ln p(y)`, falling back to log-sum-exp when the direct sum underflows.
fn log_output_density<T: Real>(pmf: &FinitePmf<T>, ch: &AwgnChannel<T>, y: T) -> T {
    let q = output_density(pmf, ch, y);
    if q > T::density_floor() {
        return q.ln();
    }
    log_sum_exp(
        pmf.iter()
            .filter(|(_, p)| *p > T::zero())
            .map(|(x, p)| p.ln() + ch.log_conditional(y, x)),
    )
}

fn log_sum_exp<T: Real>(terms: impl Iterator<Item = T>) -> T {
    let terms: Vec<T> = terms.collect();
    let m = terms.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + terms.iter().fold(T::zero(), |a, &t| a + (t - m).exp()).ln()
}

#[derive(Debug, Clone)]
struct Row<T> {
    start: usize,
    /// Conditional density at each node of the band.
    dens: Vec<T>,
    /// Quadrature weight times conditional density.
    wdens: Vec<T>,
    /// `sum_n w_n c_n ln c_n`, independent of the input probabilities.
    self_term: T,
}

/// Conditional densities of a fixed support tabulated on one quadrature
/// grid. Evaluating divergences for new probabilities costs one pass over
/// the table plus one logarithm per node.
#[derive(Debug, Clone)]
pub struct Likelihood<T> {
    ch: AwgnChannel<T>,
    grid: QuadratureGrid<T>,
    locations: Vec<T>,
    rows: Vec<Row<T>>,
}

impl<T: Real> Likelihood<T> {
    /// Table on the scheme's window around `locations`.
    pub fn new(locations: &[T], ch: &AwgnChannel<T>, q: &QuadratureScheme<T>) -> Self {
        let lo = locations.iter().copied().fold(T::infinity(), T::min);
        let hi = locations.iter().copied().fold(T::neg_infinity(), T::max);
        let (a, b) = q.window(lo, hi, ch.sigma());
        Self::with_grid(locations, ch, q.grid(a, b), q.truncation_radius())
    }

    pub fn with_grid(
        locations: &[T],
        ch: &AwgnChannel<T>,
        grid: QuadratureGrid<T>,
        radius: T,
    ) -> Self {
        let band = radius * ch.sigma();
        let floor = T::density_floor();
        let rows = locations
            .iter()
            .map(|&x| {
                let range = grid.range(x - band, x + band);
                let mut dens = Vec::with_capacity(range.len());
                let mut wdens = Vec::with_capacity(range.len());
                let mut self_term = T::zero();
                for n in range.clone() {
                    let lc = ch.log_conditional(grid.nodes()[n], x);
                    let c = lc.exp();
                    if c < floor {
                        dens.push(T::zero());
                        wdens.push(T::zero());
                        continue;
                    }
                    let wc = grid.weights()[n] * c;
                    dens.push(c);
                    wdens.push(wc);
                    self_term = self_term + wc * lc;
                }
                Row {
                    start: range.start,
                    dens,
                    wdens,
                    self_term,
                }
            })
            .collect();
        Self {
            ch: *ch,
            grid,
            locations: locations.to_vec(),
            rows,
        }
    }

    pub fn locations(&self) -> &[T] {
        &self.locations
    }

    pub fn channel(&self) -> &AwgnChannel<T> {
        &self.ch
    }

    fn check_coverage(&self) -> Result<(), T> {
        match self
            .rows
            .iter()
            .zip(&self.locations)
            .find(|(r, _)| r.wdens.iter().all(|w| *w == T::zero()))
        {
            Some((_, &x)) => Err(Error::NumericalUnderflow { x }),
            None => Ok(()),
        }
    }

    /// Writes `ln p(y_n)` for every node into `out`.
    pub fn log_output(&self, probs: &[T], out: &mut Vec<T>) {
        let m = self.grid.len();
        out.clear();
        out.resize(m, T::zero());
        for (row, &p) in self.rows.iter().zip(probs) {
            if p == T::zero() {
                continue;
            }
            for (o, &c) in out[row.start..row.start + row.dens.len()]
                .iter_mut()
                .zip(&row.dens)
            {
                *o = *o + p * c;
            }
        }
        let floor = T::density_floor();
        let nodes = self.grid.nodes();
        for (n, o) in out.iter_mut().enumerate() {
            *o = if *o > floor {
                o.ln()
            } else {
                log_sum_exp(
                    self.locations
                        .iter()
                        .zip(probs)
                        .filter(|(_, p)| **p > T::zero())
                        .map(|(&x, &p)| p.ln() + self.ch.log_conditional(nodes[n], x)),
                )
            };
        }
    }

    /// Divergence of each support point (bits) against the output density
    /// induced by `probs`.
    pub fn divergences(&self, probs: &[T], out: &mut Vec<T>) {
        let mut log_q = Vec::new();
        self.log_output(probs, &mut log_q);
        self.divergences_with(&log_q, out);
    }

    pub(crate) fn divergences_with(&self, log_q: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend(self.rows.iter().map(|row| {
            let cross = row
                .wdens
                .iter()
                .zip(&log_q[row.start..row.start + row.wdens.len()])
                .fold(
                    T::zero(),
                    |a, (&w, &l)| if w > T::zero() { a + w * l } else { a },
                );
            ((row.self_term - cross) / T::LN_2()).max(T::zero())
        }));
    }

    pub fn mutual_information(&self, probs: &[T]) -> T {
        let mut d = Vec::new();
        self.divergences(probs, &mut d);
        d.iter()
            .zip(probs)
            .fold(T::zero(), |a, (&d, &p)| a + p * d)
            .max(T::zero())
    }
}
