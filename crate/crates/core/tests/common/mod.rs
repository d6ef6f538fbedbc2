//! Brute-force references shared by the integration suites. Nothing in
//! this file calls into the crate's quadrature or solvers; `props` and
//! `checks` hold the crate-facing checks built on top of it.

#![allow(dead_code)]

pub mod checks;
pub mod props;

/// Mixture `p(y)` and conditional densities tabulated on a uniform grid,
/// integrated with the trapezoid rule.
pub struct TrapezoidChannel {
    pub h: f64,
    /// `cond[i][k] = N(y_k; x_i, noise)`
    pub cond: Vec<Vec<f64>>,
}

impl TrapezoidChannel {
    pub fn new(locations: &[f64], noise: f64, points: usize, radius: f64) -> Self {
        let s = noise.sqrt();
        let lo = locations.iter().cloned().fold(f64::INFINITY, f64::min) - radius * s;
        let hi = locations.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + radius * s;
        let h = (hi - lo) / (points - 1) as f64;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * noise).sqrt();
        let cond = locations
            .iter()
            .map(|&x| {
                (0..points)
                    .map(|k| {
                        let d = lo + h * k as f64 - x;
                        norm * (-d * d / (2.0 * noise)).exp()
                    })
                    .collect()
            })
            .collect();
        Self { h, cond }
    }

    /// Per-point relative entropies in bits.
    pub fn divergences(&self, probs: &[f64]) -> Vec<f64> {
        let m = self.cond[0].len();
        let out: Vec<f64> = (0..m)
            .map(|k| probs.iter().zip(&self.cond).map(|(p, c)| p * c[k]).sum())
            .collect();
        self.cond
            .iter()
            .map(|c| {
                let mut acc = 0.0;
                for k in 0..m {
                    if c[k] > 1e-300 && out[k] > 0.0 {
                        let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
                        acc += w * c[k] * (c[k] / out[k]).log2();
                    }
                }
                acc * self.h
            })
            .collect()
    }

    pub fn mutual_information(&self, probs: &[f64]) -> f64 {
        self.divergences(probs)
            .iter()
            .zip(probs)
            .map(|(d, p)| d * p)
            .sum()
    }
}

/// Mutual information by a 100001-point trapezoid rule over +-12 sigma.
pub fn trapezoid_mi(locations: &[f64], probs: &[f64], noise: f64) -> f64 {
    TrapezoidChannel::new(locations, noise, 100_001, 12.0).mutual_information(probs)
}

/// Relative entropy of `N(x, noise)` against the mixture, same rule.
pub fn trapezoid_divergence(x: f64, locations: &[f64], probs: &[f64], noise: f64) -> f64 {
    let mut locs = locations.to_vec();
    locs.push(x);
    let mut p = probs.to_vec();
    p.push(0.0);
    let ch = TrapezoidChannel::new(&locs, noise, 100_001, 12.0);
    *ch.divergences(&p).last().unwrap()
}

/// Coarse-to-fine exhaustive search over the probability simplex
/// (dimension 2 to 4). Each level scans a full lattice around the current
/// best at one tenth of the previous step. `feasible` filters points.
pub fn simplex_grid_max(
    dim: usize,
    mut objective: impl FnMut(&[f64]) -> f64,
    feasible: impl Fn(&[f64]) -> bool,
    final_step: f64,
) -> (Vec<f64>, f64) {
    assert!((2..=4).contains(&dim));
    let mut step: f64 = 0.02;
    let mut center = vec![1.0 / dim as f64; dim];
    let mut span: f64 = 1.0;
    let mut best = (center.clone(), f64::NEG_INFINITY);
    loop {
        let free = dim - 1;
        let k = (span / step).round() as i64;
        let mut idx = vec![-k; free];
        loop {
            let mut p: Vec<f64> = (0..free)
                .map(|i| center[i] + idx[i] as f64 * step)
                .collect();
            let last = 1.0 - p.iter().sum::<f64>();
            p.push(last);
            if p.iter().all(|v| *v >= -1e-15) {
                let p: Vec<f64> = p.iter().map(|v| v.max(0.0)).collect();
                if feasible(&p) {
                    let v = objective(&p);
                    if v > best.1 {
                        best = (p, v);
                    }
                }
            }
            let mut d = 0;
            while d < free {
                idx[d] += 1;
                if idx[d] <= k {
                    break;
                }
                idx[d] = -k;
                d += 1;
            }
            if d == free {
                break;
            }
        }
        if step <= final_step * 1.0001 {
            return best;
        }
        center = best.0.clone();
        span = 2.0 * step;
        step /= 10.0;
    }
}

pub fn capacity_bits(snr: f64) -> f64 {
    0.5 * (1.0 + snr).log2()
}

/// Capacity of the unit-amplitude channel restricted to `points` equally
/// spaced inputs on `[-1, 1]`, by plain Blahut-Arimoto on a tabulated
/// channel. Returns `(lower, upper)` once they are within `gap`.
pub fn dense_grid_capacity(noise: f64, points: usize, gap: f64, max_iters: usize) -> (f64, f64) {
    let locs: Vec<f64> = (0..points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
        .collect();
    let tc = TrapezoidChannel::new(&locs, noise, 1501, 12.0);
    let m = tc.cond[0].len();
    let w: Vec<f64> = (0..m)
        .map(|k| {
            if k == 0 || k == m - 1 {
                0.5 * tc.h
            } else {
                tc.h
            }
        })
        .collect();
    // sum_k w_k c_ik log2 c_ik, fixed across iterations
    let self_info: Vec<f64> = tc
        .cond
        .iter()
        .map(|c| {
            (0..m)
                .filter(|&k| c[k] > 1e-300)
                .map(|k| w[k] * c[k] * c[k].log2())
                .sum()
        })
        .collect();
    let mut p = vec![1.0 / points as f64; points];
    let mut bounds = (0.0, f64::INFINITY);
    for _ in 0..max_iters {
        let mut out = vec![0.0; m];
        for (pi, c) in p.iter().zip(&tc.cond) {
            for k in 0..m {
                out[k] += pi * c[k];
            }
        }
        let log_out: Vec<f64> = out.iter().map(|v| v.max(1e-300).log2()).collect();
        let d: Vec<f64> = tc
            .cond
            .iter()
            .zip(&self_info)
            .map(|(c, s)| s - (0..m).map(|k| w[k] * c[k] * log_out[k]).sum::<f64>())
            .collect();
        let lower: f64 = p.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        bounds = (lower, upper);
        if upper - lower < gap {
            break;
        }
        let mut total = 0.0;
        for (pi, di) in p.iter_mut().zip(&d) {
            *pi *= (di - upper).exp2();
            total += *pi;
        }
        p.iter_mut().for_each(|v| *v /= total);
    }
    bounds
}
