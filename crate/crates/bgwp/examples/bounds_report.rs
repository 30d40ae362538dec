//! Analytic tail and mean bounds for a two-sex process, no simulation.
//!
//! The process: each unit leaves a litter of 3 children, each independently
//! female with probability 1/4, under promiscuous mating. Ten ancestors.

use bgwp::analytic::{bgwp_tail_bounds, mean_time_bounds};
use bgwp::engine::growth_rate;
use bgwp::{MatingRule, OffspringLaw, ProcessSpec};

fn main() -> bgwp::Result<()> {
    let spec = ProcessSpec::new(
        OffspringLaw::sex_multinomial(3, 0.25)?,
        MatingRule::Promiscuous,
        1,
    )?;
    let rate = growth_rate(&spec);
    println!("growth rate r = {:.6} ({:?})", rate.value, rate.provenance);
    println!();
    println!("tail sandwich for P(T > n), single ancestor:");
    println!("{:>3} {:>12} {:>12} {:>12}  note", "n", "lower", "upper", "width");
    for n in 0..=12u32 {
        let tb = bgwp_tail_bounds(&spec, 1, n)?;
        let note = match (tb.lower_clamped, tb.upper_clamped) {
            (true, true) => "both sides clamped to [0, 1]",
            (true, false) => "lower side clamped to [0, 1]",
            (false, true) => "upper side clamped to [0, 1]",
            (false, false) => "",
        };
        println!("{:>3} {:>12.6} {:>12.6} {:>12.6}  {}", n, tb.lower, tb.upper, tb.gap, note);
    }

    println!();
    println!("mean extinction time by initial population:");
    for i in [3u64, 5, 10] {
        let mean = mean_time_bounds(&spec, i)?;
        println!(
            "  i = {:>2}: {:.4} <= E[T] <= {:.4} generations (raw lower {:.4})",
            i, mean.lower, mean.upper, mean.raw_lower
        );
    }
    Ok(())
}
