//! Sweep drivers: warm-started amplitude-constrained sweeps over peak SNR,
//! cardinality transition detection, power-constrained cardinality x SNR
//! grids, and minimum-cardinality selection at a capacity gap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ba::BaOptions;
use crate::baselines::shannon_capacity_bits;
use crate::dab_ac::{ac_fixed_cardinality, dab_ac_solve, DabAcOptions};
use crate::dab_pc::{dab_pc_solve, ConvergedBy, DabPcOptions};
use crate::error::{Error, Result};
use crate::numerics::{true_snr_db, AwgnChannel, FinitePmf, QuadratureScheme};
use crate::scalar::Real;

/// Bisection stops once the transition bracket is narrower than this (dB).
pub const TRANSITION_RESOLUTION_DB: f64 = 0.005;

/// `start, start + step, ...` up to `end` inclusive (a point within
/// `1e-9 step` of `end` counts). Points are computed as `start + i step`
/// so no rounding accumulates.
pub fn db_grid<T: Real>(start: T, end: T, step: T) -> Result<Vec<T>, T> {
    if !(step > T::zero()) || !start.is_finite() || !end.is_finite() || end < start {
        return Err(Error::InvalidArgument(format!(
            "grid needs start <= end and step > 0, got {start:?}:{end:?}:{step:?}"
        )));
    }
    let slack = step * T::lit(1e-9);
    let mut out = Vec::new();
    for i in 0.. {
        let v = start + step * T::from_usize(i).unwrap();
        if v > end + slack {
            break;
        }
        out.push(v.min(end));
    }
    Ok(out)
}

fn at_snr<V, T: Real>(snr_db: T, r: Result<V, T>) -> Result<V, T> {
    r.map_err(|e| Error::AtSnr {
        snr_db,
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct AcSweepRecord<T> {
    pub peak_snr_db: T,
    /// SNR computed from the realized power of `pmf`.
    pub true_snr_db: T,
    /// Mutual information of `pmf` (lower end of the capacity bracket).
    pub capacity: T,
    /// Upper end of the capacity bracket.
    pub capacity_upper: T,
    pub cardinality: usize,
    pub entropy: T,
    pub pmf: FinitePmf<T>,
    /// Gaussian-input capacity at the realized power.
    pub pc_capacity_at_true_snr: T,
    pub outer_iterations: usize,
}

/// Amplitude-constrained capacity over a peak-SNR grid. The first point
/// starts from `{-1, +1}` with equal mass; each later point is warm-started
/// from the previous distribution.
pub fn ac_sweep<T: Real>(
    peak_snr_start: T,
    peak_snr_end: T,
    delta_db: T,
    opts: &DabAcOptions<T>,
) -> Result<Vec<AcSweepRecord<T>>, T> {
    if !(peak_snr_start < peak_snr_end) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs start < end, got {peak_snr_start:?} and {peak_snr_end:?}"
        )));
    }
    let grid = db_grid(peak_snr_start, peak_snr_end, delta_db)?;
    let mut pmf = FinitePmf::uniform(vec![-T::one(), T::one()])?;
    let mut out = Vec::with_capacity(grid.len());
    for db in grid {
        let ch = at_snr(db, AwgnChannel::from_peak_snr_db(db))?;
        let res = at_snr(db, dab_ac_solve(&ch, &pmf, opts))?;
        let power = res.pmf.power();
        out.push(AcSweepRecord {
            peak_snr_db: db,
            true_snr_db: true_snr_db(&res.pmf, &ch),
            capacity: res.capacity_lower,
            capacity_upper: res.capacity_upper,
            cardinality: res.pmf.cardinality(),
            entropy: res.pmf.entropy(),
            pc_capacity_at_true_snr: shannon_capacity_bits(power / ch.noise_power()),
            outer_iterations: res.outer_iterations,
            pmf: res.pmf.clone(),
        });
        pmf = res.pmf;
    }
    Ok(out)
}

/// Rate advantage of the best `from_card + 1` point distribution over the
/// best `from_card` point one at a peak SNR.
pub fn cardinality_advantage<T: Real>(
    peak_snr_db: T,
    from_card: usize,
    q: &QuadratureScheme<T>,
    ba_opts: &BaOptions<T>,
    rate_tol: T,
) -> Result<T, T> {
    let ch = AwgnChannel::from_peak_snr_db(peak_snr_db)?;
    // Each fixed-cardinality optimum only needs to be resolved well below
    // the decision threshold.
    let inner = rate_tol / T::lit(100.0);
    let a = ac_fixed_cardinality(&ch, from_card, q, ba_opts, inner)?;
    let b = ac_fixed_cardinality(&ch, from_card + 1, q, ba_opts, inner)?;
    Ok(b.mutual_information - a.mutual_information)
}

/// Peak SNR at which the optimal cardinality grows from `from_card` to
/// `from_card + 1`, bisected to [`TRANSITION_RESOLUTION_DB`].
///
/// `from_card` counts as optimal at a probe when one extra point gains less
/// than `rate_tol` bits. The endpoints must straddle the transition.
pub fn detect_transition<T: Real>(
    low_snr_db: T,
    high_snr_db: T,
    from_card: usize,
    rate_tol: T,
    q: &QuadratureScheme<T>,
    ba_opts: &BaOptions<T>,
) -> Result<T, T> {
    if from_card == 0 || !(low_snr_db < high_snr_db) || !(rate_tol > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "need from_card >= 1, low < high and rate_tol > 0 \
             (got {from_card}, {low_snr_db:?}, {high_snr_db:?}, {rate_tol:?})"
        )));
    }
    let still_optimal = |db: T| -> Result<bool, T> {
        let gain = at_snr(
            db,
            cardinality_advantage(db, from_card, q, ba_opts, rate_tol),
        )?;
        Ok(gain < rate_tol)
    };
    if !still_optimal(low_snr_db)? {
        return Err(Error::BracketInvalid(format!(
            "{} points are not optimal at the low end {low_snr_db:?} dB",
            from_card
        )));
    }
    if still_optimal(high_snr_db)? {
        return Err(Error::BracketInvalid(format!(
            "{} points are still optimal at the high end {high_snr_db:?} dB",
            from_card
        )));
    }
    let (mut lo, mut hi) = (low_snr_db, high_snr_db);
    let resolution = T::lit(TRANSITION_RESOLUTION_DB);
    while hi - lo >= resolution {
        let mid = (lo + hi) / T::lit(2.0);
        if still_optimal(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct PcSweepRecord<T> {
    pub snr_db: T,
    pub cardinality: usize,
    pub rate: T,
    /// Gaussian-input capacity at `snr_db`.
    pub capacity: T,
    /// `capacity - rate`.
    pub gap_to_capacity: T,
    pub entropy: T,
    pub pmf: FinitePmf<T>,
    pub converged_by: ConvergedBy,
    pub iterations: usize,
}

/// A grid cell whose solve failed; the chain continues from the last good
/// distribution.
#[derive(Debug, Clone)]
pub struct CellFailure<T: std::fmt::Debug> {
    pub snr_db: T,
    pub cardinality: usize,
    pub error: Error<T>,
}

#[derive(Debug, Clone)]
pub struct PcSweep<T: std::fmt::Debug> {
    /// Sorted by `(cardinality, snr_db)`.
    pub records: Vec<PcSweepRecord<T>>,
    pub failures: Vec<CellFailure<T>>,
}

/// Noise power for SNR `snr_db` at unit signal power.
pub fn unit_power_channel<T: Real>(snr_db: T) -> Result<AwgnChannel<T>, T> {
    AwgnChannel::from_snr_db(snr_db, T::one())
}

/// One cardinality over increasing SNRs at unit power, each solve
/// warm-started from the previous one (`init` seeds the first). `on_cell`
/// sees every finished cell in order, which lets callers checkpoint.
pub fn pc_chain<T: Real>(
    cardinality: usize,
    snr_grid_db: &[T],
    init: Option<FinitePmf<T>>,
    opts: &DabPcOptions<T>,
    mut on_cell: impl FnMut(std::result::Result<&PcSweepRecord<T>, &CellFailure<T>>),
) -> PcSweep<T> {
    let mut records = Vec::with_capacity(snr_grid_db.len());
    let mut failures = Vec::new();
    let mut warm = init;
    for &db in snr_grid_db {
        let solved = unit_power_channel(db)
            .and_then(|ch| dab_pc_solve(&ch, T::one(), cardinality, warm.as_ref(), opts));
        match solved {
            Ok(res) => {
                let capacity = shannon_capacity_bits(T::lit(10.0).powf(db / T::lit(10.0)));
                let rec = PcSweepRecord {
                    snr_db: db,
                    cardinality,
                    rate: res.rate,
                    capacity,
                    gap_to_capacity: capacity - res.rate,
                    entropy: res.pmf.entropy(),
                    converged_by: res.converged_by,
                    iterations: res.iterations,
                    pmf: res.pmf,
                };
                on_cell(Ok(&rec));
                warm = Some(rec.pmf.clone());
                records.push(rec);
            }
            Err(error) => {
                let f = CellFailure {
                    snr_db: db,
                    cardinality,
                    error,
                };
                on_cell(Err(&f));
                failures.push(f);
            }
        }
    }
    PcSweep { records, failures }
}

/// Every `(cardinality, SNR)` cell at unit power. Chains for distinct
/// cardinalities run concurrently; the merged result is deterministic.
pub fn pc_sweep<T: Real>(
    snr_grid_db: &[T],
    cardinalities: &[usize],
    opts: &DabPcOptions<T>,
) -> Result<PcSweep<T>, T> {
    check_pc_grid(snr_grid_db, cardinalities)?;
    let chains: Vec<PcSweep<T>> = cardinalities
        .par_iter()
        .map(|&k| pc_chain(k, snr_grid_db, None, opts, |_| {}))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for c in chains {
        records.extend(c.records);
        failures.extend(c.failures);
    }
    let key = |k: usize, s: T| (k, s);
    records.sort_by(|a, b| {
        key(a.cardinality, a.snr_db)
            .partial_cmp(&key(b.cardinality, b.snr_db))
            .unwrap()
    });
    failures.sort_by(|a, b| {
        key(a.cardinality, a.snr_db)
            .partial_cmp(&key(b.cardinality, b.snr_db))
            .unwrap()
    });
    Ok(PcSweep { records, failures })
}

/// Validates a power-constrained sweep grid: nonempty, strictly increasing
/// SNRs and distinct positive cardinalities.
pub fn check_pc_grid<T: Real>(snr_grid_db: &[T], cardinalities: &[usize]) -> Result<(), T> {
    if snr_grid_db.is_empty() || cardinalities.is_empty() {
        return Err(Error::InvalidArgument(
            "SNR grid and cardinality list must be nonempty".into(),
        ));
    }
    if snr_grid_db.iter().any(|v| !v.is_finite()) || snr_grid_db.windows(2).any(|w| !(w[0] < w[1]))
    {
        return Err(Error::InvalidArgument(
            "SNR grid must be finite and strictly increasing".into(),
        ));
    }
    let mut ks = cardinalities.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.len() != cardinalities.len() || ks[0] == 0 {
        return Err(Error::InvalidArgument(
            "cardinalities must be distinct and positive".into(),
        ));
    }
    Ok(())
}

/// Smallest cardinality meeting the gap target at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct Selection<T> {
    pub snr_db: T,
    pub cardinality: usize,
    pub rate: T,
    pub capacity: T,
    pub gap_to_capacity: T,
    pub entropy: T,
    /// `log2(cardinality) - capacity`.
    pub log2_cardinality_minus_capacity: T,
    /// `entropy - capacity`.
    pub entropy_minus_capacity: T,
    pub pmf: FinitePmf<T>,
    pub converged_by: ConvergedBy,
}

/// Picks the smallest cardinality with `gap_to_capacity <= gap_target` at
/// `snr_db` among `records`.
pub fn select_at<T: Real>(
    records: &[PcSweepRecord<T>],
    snr_db: T,
    gap_target: T,
) -> Result<Selection<T>, T> {
    records
        .iter()
        .filter(|r| r.snr_db == snr_db && r.gap_to_capacity <= gap_target)
        .min_by_key(|r| r.cardinality)
        .map(|r| Selection {
            snr_db,
            cardinality: r.cardinality,
            rate: r.rate,
            capacity: r.capacity,
            gap_to_capacity: r.gap_to_capacity,
            entropy: r.entropy,
            log2_cardinality_minus_capacity: T::from_usize(r.cardinality).unwrap().log2()
                - r.capacity,
            entropy_minus_capacity: r.entropy - r.capacity,
            pmf: r.pmf.clone(),
            converged_by: r.converged_by,
        })
        .ok_or(Error::NoSatisfyingCardinality { snr_db })
}

/// [`select_at`] for every SNR present in `records`, in increasing order.
pub fn min_cardinality_selection<T: Real>(
    records: &[PcSweepRecord<T>],
    gap_target: T,
) -> Result<Vec<Selection<T>>, T> {
    snrs_of(records)
        .into_iter()
        .map(|s| select_at(records, s, gap_target))
        .collect()
}

/// Distinct SNRs of `records`, increasing.
pub fn snrs_of<T: Real>(records: &[PcSweepRecord<T>]) -> Vec<T> {
    let mut snrs: Vec<T> = records.iter().map(|r| r.snr_db).collect();
    snrs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snrs.dedup();
    snrs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(snr_db: f64, cardinality: usize, rate: f64) -> PcSweepRecord<f64> {
        let capacity = shannon_capacity_bits(10f64.powf(snr_db / 10.0));
        PcSweepRecord {
            snr_db,
            cardinality,
            rate,
            capacity,
            gap_to_capacity: capacity - rate,
            entropy: (cardinality as f64).log2(),
            pmf: crate::baselines::equilattice(cardinality, 1.0).unwrap(),
            converged_by: ConvergedBy::DeltaI,
            iterations: 1,
        }
    }

    #[test]
    fn grid_is_inclusive_without_drift() {
        let g = db_grid(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 1.0);
        assert_eq!(db_grid(0.0, 33.0, 1.0).unwrap().len(), 34);
        assert_eq!(db_grid(2.0, 2.0, 0.5).unwrap(), vec![2.0]);
        assert!(db_grid(1.0, 0.0, 0.1).is_err());
        assert!(db_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn pc_grid_checks() {
        assert!(check_pc_grid(&[0.0, 1.0], &[2, 3]).is_ok());
        assert!(check_pc_grid::<f64>(&[], &[2]).is_err());
        assert!(check_pc_grid(&[1.0, 0.0], &[2]).is_err());
        assert!(check_pc_grid(&[0.0], &[2, 2]).is_err());
        assert!(check_pc_grid(&[0.0], &[0]).is_err());
    }

    #[test]
    fn selection_picks_smallest_cardinality() {
        let c10 = shannon_capacity_bits(10.0);
        let recs = vec![
            record(10.0, 2, 0.99),
            record(10.0, 4, c10 - 0.02),
            record(10.0, 8, c10 - 0.005),
            record(10.0, 16, c10 - 0.001),
        ];
        let s = select_at(&recs, 10.0, 0.01).unwrap();
        assert_eq!(s.cardinality, 8);
        assert!((s.log2_cardinality_minus_capacity - (3.0 - c10)).abs() < 1e-15);
        assert_eq!(select_at(&recs, 10.0, 0.1).unwrap().cardinality, 4);
        assert!(matches!(
            select_at(&recs, 10.0, 1e-4),
            Err(Error::NoSatisfyingCardinality { .. })
        ));
    }

    #[test]
    fn loose_gap_selects_binary_at_low_snr() {
        let ch = unit_power_channel(-5.0).unwrap();
        let res = dab_pc_solve(&ch, 1.0, 2, None, &DabPcOptions::default()).unwrap();
        let mut recs = vec![record(-5.0, 2, res.rate)];
        recs.push(record(0.0, 2, 0.45));
        let sel = min_cardinality_selection(&recs, 1.0).unwrap();
        assert_eq!(sel.len(), 2);
        assert!(sel.iter().all(|s| s.cardinality == 2));
        assert_eq!(snrs_of(&recs), vec![-5.0, 0.0]);
    }

    #[test]
    fn binary_still_optimal_at_3db() {
        let gain = cardinality_advantage(
            3.0,
            2,
            &QuadratureScheme::default(),
            &BaOptions::default(),
            1e-7,
        )
        .unwrap();
        assert!(gain < 1e-7, "{gain}");
    }

    #[test]
    fn transition_bracket_must_straddle() {
        let q = QuadratureScheme::default();
        let ba = BaOptions::default();
        let r = detect_transition(0.0, 3.0, 2, 1e-7, &q, &ba);
        assert!(matches!(r, Err(Error::BracketInvalid(_))), "{r:?}");
        assert!(matches!(
            detect_transition(3.0, 0.0, 2, 1e-7, &q, &ba),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sweep_records_are_ordered_and_capped() {
        let sweep = pc_sweep(&[0.0, 6.0], &[4, 2], &DabPcOptions::default()).unwrap();
        assert!(sweep.failures.is_empty());
        let keys: Vec<_> = sweep
            .records
            .iter()
            .map(|r| (r.cardinality, r.snr_db))
            .collect();
        assert_eq!(keys, vec![(2, 0.0), (2, 6.0), (4, 0.0), (4, 6.0)]);
        for r in &sweep.records {
            assert!(r.gap_to_capacity >= -1e-9);
            assert!(r.rate <= (r.cardinality as f64).log2() + 1e-12);
        }
    }
}
