//! The reference comparison grid: closed-form envelope cdfs against
//! truncated-chain bounds with exact and Monte Carlo transition rows, on
//! the grid i in {2, 5, 10} x n in {2, 5, 7, 10}.
//!
//! This drives the same report the `bgwp table1` subcommand prints.

use bgwp::cli::{cmd_table1, Table1Request};

fn main() -> bgwp::Result<()> {
    let report = cmd_table1(&Table1Request {
        alpha: 0.25,
        cap: 20,
        reps: 10_000,
        seed: 1,
    })?;
    print!("{}", report.to_csv());
    Ok(())
}
