//! One function per subcommand. Each validates its inputs, runs the
//! solver and renders the result in the requested format.

use std::path::Path;

use dab_core::baselines::{equilattice, equilattice_rate, shannon_capacity_bits};
use dab_core::dab_ac::dab_ac_solve;
use dab_core::dab_pc::{dab_pc_solve, ConvergedBy};
use dab_core::numerics::true_snr_db;
use dab_core::sweep::{ac_sweep, check_pc_grid, min_cardinality_selection, pc_chain, Selection};
use dab_core::{
    AcSweepRecord, Channel, DabAcOptions, DabPcOptions, DabPcResult, PcSweepRecord, Pmf, Quadrature,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{AcFlags, PcFlags};
use crate::checkpoint::{ChainCheckpoint, FailedCell};
use crate::error::{CliError, CliResult};
use crate::output::{num, opt_num, pmf_from_row, to_json, Format, Table};

/// Rendered result plus the number of failed cells to report afterwards.
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub failed_cells: usize,
}

impl From<Vec<u8>> for Rendered {
    fn from(bytes: Vec<u8>) -> Self {
        Rendered {
            bytes,
            failed_cells: 0,
        }
    }
}

fn usage(e: dab_core::Error) -> CliError {
    CliError::Usage(e.to_string())
}

pub fn quadrature(nodes: usize, radius: f64) -> CliResult<Quadrature> {
    Quadrature::new(nodes, radius).map_err(usage)
}

fn ac_options(f: &AcFlags, q: Quadrature) -> CliResult<DabAcOptions> {
    let opts = DabAcOptions {
        epsilon: f.epsilon,
        max_outer_iters: f.max_outer_iters,
        quadrature: q,
        ..Default::default()
    };
    opts.validate().map_err(usage)?;
    Ok(opts)
}

fn pc_options(f: &PcFlags, q: Quadrature) -> CliResult<DabPcOptions> {
    let opts = DabPcOptions {
        delta_i_tol: f.delta_i_tol,
        max_iters: f.max_iters,
        power_tol: f.power_tol,
        quadrature: q,
        ..Default::default()
    };
    opts.validate().map_err(usage)?;
    Ok(opts)
}

// ---- amplitude constrained ------------------------------------------------

#[derive(Debug, Serialize)]
struct AcBounds {
    lower_bits: f64,
    upper_bits: f64,
    gap_bits: f64,
}

#[derive(Debug, Serialize)]
struct AcDiagnostics {
    outer_iterations: usize,
    converged: bool,
    entropy_bits: f64,
    power: f64,
    pc_capacity_at_true_snr_bits: f64,
}

#[derive(Debug, Serialize)]
struct AcOut {
    peak_snr_db: f64,
    true_snr_db: f64,
    cardinality: usize,
    pmf: Pmf,
    bounds: AcBounds,
    diagnostics: AcDiagnostics,
}

impl From<&AcSweepRecord> for AcOut {
    fn from(r: &AcSweepRecord) -> Self {
        AcOut {
            peak_snr_db: r.peak_snr_db,
            true_snr_db: r.true_snr_db,
            cardinality: r.cardinality,
            pmf: r.pmf.clone(),
            bounds: AcBounds {
                lower_bits: r.capacity,
                upper_bits: r.capacity_upper,
                gap_bits: r.capacity_upper - r.capacity,
            },
            diagnostics: AcDiagnostics {
                outer_iterations: r.outer_iterations,
                converged: true,
                entropy_bits: r.entropy,
                power: r.pmf.power(),
                pc_capacity_at_true_snr_bits: r.pc_capacity_at_true_snr,
            },
        }
    }
}

/// Columns of amplitude-constrained tables. `snr_db` is the true SNR,
/// `capacity_bits` the Gaussian-input capacity at that SNR, `gap_bits` the
/// distance between the two and `capacity_upper_bits` the certified upper
/// bound on the amplitude-constrained capacity.
pub const AC_COLUMNS: &[&str] = &[
    "snr_db",
    "peak_snr_db",
    "cardinality",
    "rate_bits",
    "capacity_bits",
    "gap_bits",
    "entropy_bits",
    "power",
    "converged_by",
    "capacity_upper_bits",
];

fn ac_table(records: &[AcSweepRecord]) -> Table {
    let mut t = Table::new(AC_COLUMNS);
    for r in records {
        t.push(
            vec![
                num(r.true_snr_db),
                num(r.peak_snr_db),
                r.cardinality.to_string(),
                num(r.capacity),
                num(r.pc_capacity_at_true_snr),
                num(r.pc_capacity_at_true_snr - r.capacity),
                num(r.entropy),
                num(r.pmf.power()),
                "epsilon".into(),
                num(r.capacity_upper),
            ],
            Some(&r.pmf),
        );
    }
    t
}

fn render_ac(records: &[AcSweepRecord], format: Format, single: bool) -> CliResult<Vec<u8>> {
    match format {
        Format::Csv => ac_table(records).to_csv(),
        Format::Json if single => Ok(to_json(&AcOut::from(&records[0]))),
        Format::Json => {
            #[derive(Serialize)]
            struct Doc {
                records: Vec<AcOut>,
            }
            Ok(to_json(&Doc {
                records: records.iter().map(AcOut::from).collect(),
            }))
        }
    }
}

pub fn ac_solve(
    peak_snr_db: f64,
    flags: &AcFlags,
    q: Quadrature,
    format: Format,
) -> CliResult<Rendered> {
    let opts = ac_options(flags, q)?;
    let ch = Channel::from_peak_snr_db(peak_snr_db).map_err(usage)?;
    let start = Pmf::uniform(vec![-1.0, 1.0]).expect("two-point start");
    let res = dab_ac_solve(&ch, &start, &opts)?;
    let power = res.pmf.power();
    let rec = AcSweepRecord {
        peak_snr_db,
        true_snr_db: true_snr_db(&res.pmf, &ch),
        capacity: res.capacity_lower,
        capacity_upper: res.capacity_upper,
        cardinality: res.pmf.cardinality(),
        entropy: res.pmf.entropy(),
        pc_capacity_at_true_snr: shannon_capacity_bits(power / ch.noise_power()),
        outer_iterations: res.outer_iterations,
        pmf: res.pmf,
    };
    Ok(render_ac(&[rec], format, true)?.into())
}

pub fn ac_sweep_cmd(
    grid: &[f64],
    flags: &AcFlags,
    q: Quadrature,
    format: Format,
) -> CliResult<Rendered> {
    let opts = ac_options(flags, q)?;
    let (start, end) = (grid[0], *grid.last().unwrap());
    let step = if grid.len() > 1 {
        grid[1] - grid[0]
    } else {
        1.0
    };
    let records = if grid.len() == 1 {
        // a single point is a plain solve
        return ac_solve(start, flags, q, format);
    } else {
        ac_sweep(start, end, step, &opts)?
    };
    log::info!(
        "ac chain: {} points, final cardinality {}",
        records.len(),
        records.last().unwrap().cardinality
    );
    Ok(render_ac(&records, format, false)?.into())
}

// ---- power constrained ----------------------------------------------------

#[derive(Debug, Serialize)]
struct PcBounds {
    rate_bits: f64,
    capacity_bits: f64,
    gap_bits: f64,
}

#[derive(Debug, Serialize)]
struct PcDiagnostics {
    iterations: usize,
    converged_by: ConvergedBy,
    lagrange_multiplier: f64,
    entropy_bits: f64,
    power: f64,
    location_asymmetry: f64,
    probability_asymmetry: f64,
}

#[derive(Debug, Serialize)]
struct PcOut {
    snr_db: f64,
    cardinality: usize,
    pmf: Pmf,
    bounds: PcBounds,
    diagnostics: PcDiagnostics,
}

pub const PC_COLUMNS: &[&str] = &[
    "snr_db",
    "peak_snr_db",
    "cardinality",
    "rate_bits",
    "capacity_bits",
    "gap_bits",
    "entropy_bits",
    "power",
    "converged_by",
];

fn load_pmf(path: &Path) -> CliResult<Pmf> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn pc_solve(
    snr_db: f64,
    cardinality: usize,
    power: f64,
    init: Option<&Path>,
    flags: &PcFlags,
    q: Quadrature,
    format: Format,
) -> CliResult<Rendered> {
    let opts = pc_options(flags, q)?;
    if cardinality == 0 {
        return Err(CliError::Usage("cardinality must be at least 1".into()));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(CliError::Usage(format!(
            "power must be positive, got {power}"
        )));
    }
    let ch = Channel::from_snr_db(snr_db, power).map_err(usage)?;
    let init = init.map(load_pmf).transpose()?;
    let res: DabPcResult = dab_pc_solve(&ch, power, cardinality, init.as_ref(), &opts)?;
    let capacity = shannon_capacity_bits(power / ch.noise_power());
    match format {
        Format::Json => Ok(to_json(&PcOut {
            snr_db,
            cardinality,
            bounds: PcBounds {
                rate_bits: res.rate,
                capacity_bits: capacity,
                gap_bits: capacity - res.rate,
            },
            diagnostics: PcDiagnostics {
                iterations: res.iterations,
                converged_by: res.converged_by,
                lagrange_multiplier: res.lagrange_multiplier,
                entropy_bits: res.pmf.entropy(),
                power: res.pmf.power(),
                location_asymmetry: res.location_asymmetry,
                probability_asymmetry: res.probability_asymmetry,
            },
            pmf: res.pmf,
        })
        .into()),
        Format::Csv => {
            let mut t = Table::new(PC_COLUMNS);
            t.push(
                vec![
                    num(snr_db),
                    String::new(),
                    cardinality.to_string(),
                    num(res.rate),
                    num(capacity),
                    num(capacity - res.rate),
                    num(res.pmf.entropy()),
                    num(res.pmf.power()),
                    res.converged_by.to_string(),
                ],
                Some(&res.pmf),
            );
            Ok(t.to_csv()?.into())
        }
    }
}

fn pc_table(records: &[PcSweepRecord]) -> Table {
    let mut t = Table::new(PC_COLUMNS);
    for r in records {
        t.push(
            vec![
                num(r.snr_db),
                String::new(),
                r.cardinality.to_string(),
                num(r.rate),
                num(r.capacity),
                num(r.gap_to_capacity),
                num(r.entropy),
                num(r.pmf.power()),
                r.converged_by.to_string(),
            ],
            Some(&r.pmf),
        );
    }
    t
}

/// Runs (or resumes) one chain, checkpointing after every cell.
fn run_chain(
    k: usize,
    grid: &[f64],
    opts: &DabPcOptions,
    checkpoint_dir: Option<&Path>,
) -> CliResult<ChainCheckpoint> {
    let mut ck = match checkpoint_dir {
        Some(dir) => {
            ChainCheckpoint::load(dir, k, grid)?.unwrap_or_else(|| ChainCheckpoint::new(k, grid))
        }
        None => ChainCheckpoint::new(k, grid),
    };
    let remaining = ck.remaining();
    if remaining.is_empty() {
        log::info!("chain {k}: complete in checkpoint");
        return Ok(ck);
    }
    let warm = ck.records.last().map(|r| r.pmf.clone());
    let mut save_err = None;
    pc_chain(k, &remaining, warm, opts, |cell| {
        match cell {
            Ok(r) => ck.records.push(r.clone()),
            Err(f) => {
                log::warn!("chain {k}: {} dB failed: {}", f.snr_db, f.error);
                ck.failures.push(FailedCell {
                    snr_db: f.snr_db,
                    cardinality: k,
                    error: f.error.to_string(),
                });
            }
        }
        if let (Some(dir), None) = (checkpoint_dir, &save_err) {
            if let Err(e) = ck.save(dir) {
                save_err = Some(e);
            }
        }
    });
    if let Some(e) = save_err {
        return Err(e);
    }
    let last = ck.records.last();
    log::info!(
        "chain {k}: {} cells, last rate {}",
        ck.records.len(),
        last.map_or(f64::NAN, |r| r.rate)
    );
    Ok(ck)
}

#[derive(Debug, Serialize, Deserialize)]
struct PcSweepDoc {
    records: Vec<PcSweepRecord>,
    failures: Vec<FailedCell>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selection: Option<Vec<SelectionOut>>,
}

pub fn pc_sweep_cmd(
    grid: &[f64],
    cards: &[usize],
    gap: Option<f64>,
    checkpoint_dir: Option<&Path>,
    flags: &PcFlags,
    q: Quadrature,
    format: Format,
) -> CliResult<Rendered> {
    let opts = pc_options(flags, q)?;
    check_pc_grid(grid, cards).map_err(usage)?;
    if let Some(g) = gap {
        check_gap(g)?;
    }
    let chains: Vec<ChainCheckpoint> = cards
        .par_iter()
        .map(|&k| run_chain(k, grid, &opts, checkpoint_dir))
        .collect::<CliResult<_>>()?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for c in chains {
        records.extend(c.records);
        failures.extend(c.failures);
    }
    // chains finish in any order; the output is keyed by (cardinality, snr)
    let key = |k: usize, s: f64| (k, s);
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
    let failed_cells = failures.len();
    let bytes = match format {
        Format::Csv => {
            if gap.is_some() {
                log::warn!(
                    "--gap is only reported in JSON output; run `select` on the CSV instead"
                );
            }
            pc_table(&records).to_csv()?
        }
        Format::Json => {
            let selection = gap
                .map(|g| {
                    min_cardinality_selection(&records, g)
                        .map(|s| s.iter().map(SelectionOut::from).collect())
                })
                .transpose()?;
            to_json(&PcSweepDoc {
                records,
                failures,
                selection,
            })
        }
    };
    Ok(Rendered {
        bytes,
        failed_cells,
    })
}

// ---- selection ------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct SelectionOut {
    snr_db: f64,
    cardinality: usize,
    rate_bits: f64,
    capacity_bits: f64,
    gap_bits: f64,
    entropy_bits: f64,
    log2_cardinality_minus_capacity_bits: f64,
    entropy_minus_capacity_bits: f64,
    converged_by: ConvergedBy,
    pmf: Pmf,
}

impl From<&Selection<f64>> for SelectionOut {
    fn from(s: &Selection<f64>) -> Self {
        SelectionOut {
            snr_db: s.snr_db,
            cardinality: s.cardinality,
            rate_bits: s.rate,
            capacity_bits: s.capacity,
            gap_bits: s.gap_to_capacity,
            entropy_bits: s.entropy,
            log2_cardinality_minus_capacity_bits: s.log2_cardinality_minus_capacity,
            entropy_minus_capacity_bits: s.entropy_minus_capacity,
            converged_by: s.converged_by,
            pmf: s.pmf.clone(),
        }
    }
}

pub const SELECT_COLUMNS: &[&str] = &[
    "snr_db",
    "cardinality",
    "rate_bits",
    "capacity_bits",
    "gap_bits",
    "entropy_bits",
    "log2_card_minus_capacity_bits",
    "entropy_minus_capacity_bits",
    "power",
    "converged_by",
];

fn check_gap(gap: f64) -> CliResult<()> {
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(CliError::Usage(format!("gap must be positive, got {gap}")));
    }
    Ok(())
}

fn bad_input(path: &Path, message: impl ToString) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Records from a `pc-sweep` JSON document or CSV table.
pub fn read_records(path: &Path) -> CliResult<Vec<PcSweepRecord>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let looks_json = bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{');
    if looks_json {
        let doc: PcSweepDoc = serde_json::from_slice(&bytes).map_err(|e| bad_input(path, e))?;
        return Ok(doc.records);
    }
    let mut rdr = csv::Reader::from_reader(bytes.as_slice());
    let headers = rdr.headers().map_err(|e| bad_input(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad_input(path, format!("missing column {name}")))
    };
    let (snr, card, rate, cap, gap, ent, conv) = (
        col("snr_db")?,
        col("cardinality")?,
        col("rate_bits")?,
        col("capacity_bits")?,
        col("gap_bits")?,
        col("entropy_bits")?,
        col("converged_by")?,
    );
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| bad_input(path, e))?;
        let f = |i: usize| -> CliResult<f64> {
            row[i]
                .parse()
                .map_err(|e| bad_input(path, format!("{}: {e}", &headers[i])))
        };
        let converged_by = match &row[conv] {
            "delta_i" => ConvergedBy::DeltaI,
            "iteration_cap" => ConvergedBy::IterationCap,
            other => return Err(bad_input(path, format!("unknown converged_by '{other}'"))),
        };
        out.push(PcSweepRecord {
            snr_db: f(snr)?,
            cardinality: row[card].parse().map_err(|e| bad_input(path, e))?,
            rate: f(rate)?,
            capacity: f(cap)?,
            gap_to_capacity: f(gap)?,
            entropy: f(ent)?,
            pmf: pmf_from_row(&headers, &row).map_err(|e| bad_input(path, e))?,
            converged_by,
            iterations: 0,
        });
    }
    Ok(out)
}

pub fn select(input: &Path, gap: f64, format: Format) -> CliResult<Rendered> {
    check_gap(gap)?;
    let records = read_records(input)?;
    if records.is_empty() {
        return Err(bad_input(input, "no sweep records"));
    }
    let sel = min_cardinality_selection(&records, gap)?;
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Doc {
                gap_target_bits: f64,
                selection: Vec<SelectionOut>,
            }
            Ok(to_json(&Doc {
                gap_target_bits: gap,
                selection: sel.iter().map(SelectionOut::from).collect(),
            })
            .into())
        }
        Format::Csv => {
            let mut t = Table::new(SELECT_COLUMNS);
            for s in &sel {
                t.push(
                    vec![
                        num(s.snr_db),
                        s.cardinality.to_string(),
                        num(s.rate),
                        num(s.capacity),
                        num(s.gap_to_capacity),
                        num(s.entropy),
                        num(s.log2_cardinality_minus_capacity),
                        num(s.entropy_minus_capacity),
                        num(s.pmf.power()),
                        s.converged_by.to_string(),
                    ],
                    Some(&s.pmf),
                );
            }
            Ok(t.to_csv()?.into())
        }
    }
}

// ---- baselines ------------------------------------------------------------

#[derive(Debug, Serialize)]
struct BaselineOut {
    cardinality: usize,
    power: f64,
    pmf: Pmf,
    #[serde(skip_serializing_if = "Option::is_none")]
    snr_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rate_bits: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    capacity_bits: Option<f64>,
}

pub const BASELINE_COLUMNS: &[&str] = &[
    "snr_db",
    "cardinality",
    "rate_bits",
    "capacity_bits",
    "gap_bits",
    "entropy_bits",
    "power",
];

pub fn baseline(
    cardinality: usize,
    power: f64,
    snr_db: Option<f64>,
    q: Quadrature,
    format: Format,
) -> CliResult<Rendered> {
    let pmf = equilattice(cardinality, power).map_err(usage)?;
    let (rate, capacity) = match snr_db {
        Some(db) => {
            let ch = Channel::from_snr_db(db, power).map_err(usage)?;
            (
                Some(equilattice_rate(cardinality, &ch, power, &q)?),
                Some(shannon_capacity_bits(power / ch.noise_power())),
            )
        }
        None => (None, None),
    };
    match format {
        Format::Json => Ok(to_json(&BaselineOut {
            cardinality,
            power,
            pmf,
            snr_db,
            rate_bits: rate,
            capacity_bits: capacity,
        })
        .into()),
        Format::Csv => {
            let mut t = Table::new(BASELINE_COLUMNS);
            let gap = rate.zip(capacity).map(|(r, c)| c - r);
            t.push(
                vec![
                    opt_num(snr_db),
                    cardinality.to_string(),
                    opt_num(rate),
                    opt_num(capacity),
                    opt_num(gap),
                    num(pmf.entropy()),
                    num(pmf.power()),
                ],
                Some(&pmf),
            );
            Ok(t.to_csv()?.into())
        }
    }
}
