//! The exactly solvable family: modified-geometric daughter and son counts.
//!
//! With P(k female offspring) = b c^{k-1} for k >= 1, both envelope
//! processes stay in the family, so the per-generation tail sandwich and
//! the mean interval come out in closed form with no iteration at all.

use bgwp::analytic::{mg_example_report, mg_tail};

fn main() -> bgwp::Result<()> {
    let (b, c) = (0.25, 0.25);
    let report = mg_example_report(b, c, b, c, 10)?;

    println!("daughters ~ MG(b = {b}, c = {c}), sons alike, one ancestor");
    println!();
    println!("the sibling-mated line is again modified geometric:");
    println!("  b_s = {:.6}, c_s = {:.6}", report.b_s, report.c_s);
    println!("  means: mu_f = {:.6}, mu_s = {:.6}", report.mu_f, report.mu_s);
    println!("  tail shapes: u_f = {:.6}, u_s = {:.6}", report.u_f, report.u_s);
    println!();
    println!("closed-form sandwich for P(T > n):");
    println!("{:>3} {:>14} {:>14}", "n", "lower", "upper");
    for row in &report.rows {
        println!("{:>3} {:>14.8} {:>14.8}", row.n, row.lower, row.upper);
    }
    println!();
    println!(
        "mean interval: {:.6} <= E[T] <= {:.6} (raw lower {:.6})",
        report.mean_lower, report.mean_upper, report.mean_lower_raw
    );
    println!();
    println!("single tail values come straight from the formula, e.g.");
    for n in [1u32, 5, 20] {
        println!("  P(T_f > {n:>2}) = {:.10}", mg_tail(b, c, n)?);
    }
    Ok(())
}
