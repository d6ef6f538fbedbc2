//! Command-line front end: argument handling, result files and resumable
//! sweeps over the `dab-core` solvers.

pub mod args;
pub mod checkpoint;
pub mod commands;
pub mod error;
pub mod output;
pub mod range;

use args::{Cli, Command};
use error::{CliError, CliResult};
use output::Destination;

/// Executes a parsed command line and writes its result.
pub fn run(cli: Cli) -> CliResult<()> {
    let c = &cli.common;
    if c.threads > 0 {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(c.threads)
            .build_global();
    }
    let q = commands::quadrature(c.quad_nodes, c.quad_radius)?;
    let (name, rendered) = match &cli.command {
        Command::AcSolve { peak_snr_db, ac } => (
            "ac-solve",
            commands::ac_solve(*peak_snr_db, ac, q, c.format)?,
        ),
        Command::AcSweep { peak_snr_db, ac } => {
            let grid = range::parse_db_range(peak_snr_db)?;
            ("ac-sweep", commands::ac_sweep_cmd(&grid, ac, q, c.format)?)
        }
        Command::PcSolve {
            snr_db,
            cardinality,
            power,
            init,
            pc,
        } => (
            "pc-solve",
            commands::pc_solve(
                *snr_db,
                *cardinality,
                *power,
                init.as_deref(),
                pc,
                q,
                c.format,
            )?,
        ),
        Command::PcSweep {
            snr_db,
            cards,
            gap,
            checkpoint_dir,
            pc,
        } => {
            let grid = range::parse_db_range(snr_db)?;
            let cards = range::parse_cards(cards)?;
            (
                "pc-sweep",
                commands::pc_sweep_cmd(
                    &grid,
                    &cards,
                    *gap,
                    checkpoint_dir.as_deref(),
                    pc,
                    q,
                    c.format,
                )?,
            )
        }
        Command::Select { input, gap } => ("select", commands::select(input, *gap, c.format)?),
        Command::Baseline {
            equilattice,
            power,
            snr_db,
        } => (
            "baseline",
            commands::baseline(*equilattice, *power, *snr_db, q, c.format)?,
        ),
    };
    Destination::resolve(c.output.as_deref(), c.out_dir.as_deref(), name, c.format)
        .write(&rendered.bytes)?;
    if rendered.failed_cells > 0 {
        return Err(CliError::CellFailures {
            count: rendered.failed_cells,
        });
    }
    Ok(())
}
