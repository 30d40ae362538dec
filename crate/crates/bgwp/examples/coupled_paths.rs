//! The pathwise sandwich behind every bound in the crate: run the two-sex
//! process and its two envelopes on a single shared pool of litters, and
//! the three populations never cross.

use bgwp::engine::{coupled_step, replicate_rng, CoupledState};
use bgwp::{MatingRule, OffspringLaw, ProcessSpec};

fn main() -> bgwp::Result<()> {
    let spec = ProcessSpec::new(
        OffspringLaw::sex_multinomial(3, 0.25)?,
        MatingRule::Promiscuous,
        5,
    )?;

    println!("three coupled trajectories from {} units:", spec.initial);
    for replicate in 0..3u64 {
        let mut rng = replicate_rng(9, replicate);
        let mut state = CoupledState::starting_at(spec.initial);
        print!("  sibling <= two-sex <= female:");
        while state.female_line > 0 {
            print!("  {} <= {} <= {}", state.sibling_mated, state.two_sex, state.female_line);
            state = coupled_step(&spec, state, &mut rng);
        }
        println!("  0 <= 0 <= 0");
    }

    let trajectories = 10_000u64;
    let mut violations = 0u64;
    let mut longest = 0u32;
    for replicate in 0..trajectories {
        let mut rng = replicate_rng(10, replicate);
        let mut state = CoupledState::starting_at(spec.initial);
        let mut steps = 0u32;
        while state.female_line > 0 {
            state = coupled_step(&spec, state, &mut rng);
            if !(state.sibling_mated <= state.two_sex && state.two_sex <= state.female_line) {
                violations += 1;
            }
            steps += 1;
        }
        longest = longest.max(steps);
    }
    println!();
    println!(
        "{trajectories} trajectories, {violations} ordering violations, longest lineage {longest} generations"
    );
    Ok(())
}
