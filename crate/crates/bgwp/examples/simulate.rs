//! Deterministic parallel Monte Carlo: the empirical extinction cdf lands
//! inside the analytic sandwich, and the empirical mean inside the mean
//! interval. Rerunning with the same seed reproduces every digit.

use bgwp::analytic::{bgwp_tail_bounds, mean_time_bounds};
use bgwp::engine::{default_horizon, empirical_cdf, empirical_mean, growth_rate};
use bgwp::{MatingRule, OffspringLaw, ProcessSpec};

fn main() -> bgwp::Result<()> {
    let spec = ProcessSpec::new(
        OffspringLaw::sex_multinomial(3, 0.25)?,
        MatingRule::Promiscuous,
        5,
    )?;
    let (n_max, reps, seed) = (10u32, 100_000u64, 42u64);

    let emp = empirical_cdf(&spec, n_max, reps, seed);
    println!("{} replicates, master seed {}, scheme {}", emp.reps, emp.master_seed, emp.rng_scheme);
    println!();
    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "n", "lower", "empirical", "upper", "std_err");
    for n in 0..=n_max {
        let tb = bgwp_tail_bounds(&spec, spec.initial, n)?;
        // tail bounds flip into cdf bounds
        println!(
            "{:>3} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            n,
            1.0 - tb.upper,
            emp.cdf[n as usize],
            1.0 - tb.lower,
            emp.std_err[n as usize]
        );
    }

    let r = growth_rate(&spec).value;
    let horizon = default_horizon(spec.initial, r).expect("subcritical");
    let mc = empirical_mean(&spec, reps, seed, horizon)?;
    let bound = mean_time_bounds(&spec, spec.initial)?;
    println!();
    println!(
        "mean: {:.4} <= {:.4} (+- {:.4}) <= {:.4}   (horizon {}, censored {})",
        bound.lower, mc.mean, mc.std_err, bound.upper, mc.horizon, mc.censored
    );
    Ok(())
}
