//! Generators and property bodies. The proptest suite and the acceptance
//! run both drive these.

use dab_core::ba::{ba_fixed_support, ba_power_constrained, ba_trace, BaOptions};
use dab_core::dab_ac::find_x_max;
use dab_core::dab_pc::power_preserving_move;
use dab_core::numerics::{divergences, mutual_information, output_density, relative_entropy_at};
use dab_core::{Channel, Pmf, Quadrature};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub type Outcome = Result<(), TestCaseError>;

fn q() -> Quadrature {
    Quadrature::default()
}

/// Strictly increasing locations with gaps in [0.05, 0.8], plus weights.
pub fn arb_pmf(max_len: usize) -> impl Strategy<Value = Pmf> {
    (1..=max_len)
        .prop_flat_map(|n| {
            (
                -1.5f64..0.0,
                prop::collection::vec(0.05f64..0.8, n - 1),
                prop::collection::vec(0.01f64..1.0, n),
            )
        })
        .prop_map(|(start, gaps, w)| {
            let mut locs = vec![start];
            for g in gaps {
                locs.push(locs.last().unwrap() + g);
            }
            Pmf::normalized(locs, w).unwrap()
        })
}

/// Mirrored support of even size >= 4 with mirrored weights.
pub fn arb_symmetric(max_pairs: usize) -> impl Strategy<Value = Pmf> {
    (2..=max_pairs)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(0.1f64..0.6, k),
                prop::collection::vec(0.05f64..1.0, k),
            )
        })
        .prop_map(|(gaps, w)| {
            let mut mags = Vec::new();
            let mut m = 0.0;
            for g in gaps {
                m += g;
                mags.push(m);
            }
            let total: f64 = w.iter().sum();
            Pmf::symmetric(
                &mags,
                &w.iter().map(|v| v / (2.0 * total)).collect::<Vec<_>>(),
                None,
            )
            .unwrap()
        })
}

/// Noise variance for SNRs between -5 and 15 dB at unit signal.
pub fn noise() -> impl Strategy<Value = f64> {
    (-15.0f64..5.0).prop_map(|db| 10f64.powf(db / 10.0))
}

pub fn probabilities_sum_to_one(pmf: &Pmf) -> Outcome {
    let s: f64 = pmf.probabilities().iter().sum();
    prop_assert!((s - 1.0).abs() < 1e-12);
    prop_assert!(pmf.locations().windows(2).all(|w| w[0] < w[1]));
    Ok(())
}

pub fn output_density_integrates_to_one(pmf: &Pmf, n: f64) -> Outcome {
    let ch = Channel::new(n).unwrap();
    let scheme = q();
    let (a, b) = scheme.window(pmf.min_location(), pmf.max_location(), ch.sigma());
    let total = scheme.grid(a, b).integrate(|y| output_density(pmf, &ch, y));
    prop_assert!((total - 1.0).abs() < 1e-8, "{}", total);
    Ok(())
}

pub fn kl_closed_form(x0: f64, t: f64, n: f64) -> Outcome {
    let ch = Channel::new(n).unwrap();
    let x = x0 + t * n.sqrt();
    let d = relative_entropy_at(x, &Pmf::point_mass(x0), &ch, &q()).unwrap();
    let exact = (x - x0).powi(2) / (2.0 * n) * std::f64::consts::LOG2_E;
    prop_assert!((d - exact).abs() < 1e-9, "{} vs {}", d, exact);
    Ok(())
}

pub fn rate_is_translation_invariant(pmf: &Pmf, n: f64, c: f64) -> Outcome {
    let ch = Channel::new(n).unwrap();
    let shifted = Pmf::new(
        pmf.locations().iter().map(|x| x + c).collect(),
        pmf.probabilities().to_vec(),
    )
    .unwrap();
    let a = mutual_information(pmf, &ch, &q()).unwrap();
    let b = mutual_information(&shifted, &ch, &q()).unwrap();
    prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    Ok(())
}

pub fn rate_below_every_ceiling(pmf: &Pmf, n: f64) -> Outcome {
    let ch = Channel::new(n).unwrap();
    let i = mutual_information(pmf, &ch, &q()).unwrap();
    let d = divergences(pmf, &ch, &q()).unwrap();
    let d_max = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    prop_assert!(i >= 0.0);
    prop_assert!(i <= d_max + 1e-12);
    prop_assert!(i <= (pmf.cardinality() as f64).log2() + 1e-12);
    prop_assert!(i <= 0.5 * (1.0 + pmf.variance() / n).log2() + 1e-9);
    Ok(())
}

pub fn noisier_channel_carries_less(pmf: &Pmf, n: f64) -> Outcome {
    let rates: Vec<f64> = [1.0, 1.5, 2.5, 4.0]
        .iter()
        .map(|k| mutual_information(pmf, &Channel::new(n * k).unwrap(), &q()).unwrap())
        .collect();
    prop_assert!(
        rates.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        "{:?}",
        rates
    );
    Ok(())
}

pub fn ba_ascends_monotonically(pmf: &Pmf, n: f64) -> Outcome {
    let ch = Channel::new(n).unwrap();
    let (_, hist) = ba_trace(pmf.locations(), &ch, &q(), &BaOptions::default()).unwrap();
    prop_assert!(hist.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    Ok(())
}

pub fn ba_fixed_point_equalizes_divergences(pmf: &Pmf, n: f64) -> Outcome {
    let ch = Channel::new(n).unwrap();
    let tol = BaOptions::<f64>::default().tol;
    let opts = BaOptions {
        kkt_tol: Some(10.0 * tol),
        ..Default::default()
    };
    let out = ba_fixed_support(pmf.locations(), &ch, &q(), &opts).unwrap();
    let hi = out.max_divergence();
    for (p, d) in out.probabilities.iter().zip(&out.divergences) {
        if *p > 1e-6 {
            prop_assert!(hi - d <= 10.0 * tol, "{:?}", out);
        }
    }
    prop_assert!(out.mutual_information <= hi + 1e-12);
    Ok(())
}

/// `frac` places the power limit between the inner and outer squared
/// magnitudes so that the constraint is feasible and can bind.
pub fn pc_fixed_point_equalizes_penalized_divergences(
    pmf: &Pmf,
    snr_db: f64,
    frac: f64,
) -> Outcome {
    let inner = pmf.locations()[pmf.cardinality() / 2].powi(2);
    let limit = inner + frac * (pmf.max_location().powi(2) - inner);
    let ch = Channel::new(limit / 10f64.powf(snr_db / 10.0)).unwrap();
    let tol = BaOptions::<f64>::default().tol;
    let opts = BaOptions {
        kkt_tol: Some(10.0 * tol),
        ..Default::default()
    };
    let out = ba_power_constrained(pmf.locations(), &ch, limit, &q(), &opts).unwrap();
    prop_assert!(out.realized_power <= limit + 1e-12);
    let s = out.lagrange_multiplier;
    if s > 0.0 {
        prop_assert!((out.realized_power - limit).abs() <= 1e-8);
    }
    let pen: Vec<f64> = out
        .divergences
        .iter()
        .zip(pmf.locations())
        .map(|(d, x)| d - s * x * x)
        .collect();
    let hi = pen.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (p, v) in out.probabilities.iter().zip(&pen) {
        if *p > 1e-6 {
            prop_assert!(hi - v <= 10.0 * tol, "{:?} {:?}", pen, out);
        }
    }
    Ok(())
}

pub fn moves_preserve_mass_and_power(pmf: &Pmf, pick: usize, shift: f64) -> Outcome {
    let n = pmf.cardinality();
    let j = pick % (n / 2);
    let m = n - 1 - j;
    let new = pmf.locations()[m] + shift * 0.2;
    let limit = pmf.power();
    if let Ok(out) = power_preserving_move(pmf, (j, m), (-new, new), limit) {
        let s: f64 = out.probabilities().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        prop_assert!((out.power() - limit).abs() < 1e-12 * limit.max(1.0));
        prop_assert!(out.probabilities().iter().all(|p| *p >= 0.0));
    }
    Ok(())
}

pub fn unit_amplitude_rate_below_d_max(pmf: &Pmf, n: f64) -> Outcome {
    let clipped = Pmf::new(
        pmf.locations().iter().map(|x| x.clamp(-1.0, 1.0)).collect(),
        pmf.probabilities().to_vec(),
    );
    prop_assume!(clipped.is_ok());
    let pmf = clipped.unwrap();
    let ch = Channel::new(n).unwrap();
    let i = mutual_information(&pmf, &ch, &q()).unwrap();
    let (_, d_max) = find_x_max(&pmf, &ch, &q(), 401).unwrap();
    prop_assert!(i <= d_max + 1e-12, "{} vs {}", i, d_max);
    Ok(())
}
