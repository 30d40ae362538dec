//! Certify the two structural properties the extinction-time theory needs
//! from a mating rule: superadditivity (merging pools never produces fewer
//! units) and female domination (never more units than females).
//!
//! The built-in rules carry closed-form proofs; the grid check confirms
//! them and catches custom rules that break either property.

use bgwp::mating::{check_female_dominated_fn, check_superadditive_fn, PropertyReport};
use bgwp::MatingRule;

fn show(report: &PropertyReport) {
    let verdict = if report.holds { "holds" } else { "FAILS" };
    let how = if report.analytic { "proof + grid" } else { "grid only" };
    print!(
        "  {:<16} {} ({}, arguments up to {})",
        format!("{:?}:", report.property),
        verdict,
        how,
        report.cap
    );
    match report.counterexample {
        Some(c) => println!(", counterexample {c:?}"),
        None => println!(),
    }
}

fn main() {
    let cap = 40;
    for rule in [MatingRule::Promiscuous, MatingRule::polygamous(3).unwrap(), MatingRule::Identity]
    {
        println!("{rule:?}:");
        show(&rule.check_superadditive(cap));
        show(&rule.check_female_dominated(cap));
        println!();
    }

    // rounding half-units up makes splitting a pool profitable: two pools
    // of 1 female yield 1 + 1 units, merged they yield only 1
    let round_up = |x: u64, _y: u64| x.div_ceil(2);
    println!("custom zeta(x, y) = ceil(x / 2):");
    show(&check_superadditive_fn(round_up, 20));
    show(&check_female_dominated_fn(round_up, 20));
    println!();

    // a rule that lets males found units on their own breaks domination
    let males_too = |x: u64, y: u64| x + y;
    println!("custom zeta(x, y) = x + y:");
    show(&check_superadditive_fn(males_too, 20));
    show(&check_female_dominated_fn(males_too, 20));
}
