//! Acceptance gate: one test per numbered criterion, each printing a single
//! PASS line. Tolerances are pinned next to the assertions they guard.

use bgwp::analytic::{
    asexual_tail_bounds, mean_time_bounds, mg_example_report, mg_tail, pgf_extinction_cdf,
};
use bgwp::chains::{truncation_error, ChainBoundTable};
use bgwp::engine::{
    coupled_step, default_horizon, empirical_cdf, empirical_mean, replicate_rng,
    transition_matrix_exact, CoupledState, RowMethod, TransitionRow, TruncatedTransitionMatrix,
};
use bgwp::{MatingRule, OffspringLaw, ProcessSpec};

fn trinomial_spec(initial: u64) -> ProcessSpec {
    ProcessSpec::new(
        OffspringLaw::sex_multinomial(3, 0.25).unwrap(),
        MatingRule::Promiscuous,
        initial,
    )
    .unwrap()
}

fn female_pgf(x: f64) -> f64 {
    (0.25 * x + 0.75).powi(3)
}

fn sibling_pgf(x: f64) -> f64 {
    0.4375 + 0.421875 * x + 0.140625 * x * x
}

const GRID: [(u64, u32); 12] = [
    (2, 2),
    (2, 5),
    (2, 7),
    (2, 10),
    (5, 2),
    (5, 5),
    (5, 7),
    (5, 10),
    (10, 2),
    (10, 5),
    (10, 7),
    (10, 10),
];

/// Reference extinction cdfs on the grid, three decimals:
/// (i, n, female-line, sibling-mated).
const ENVELOPE_REFERENCE: [(u64, u32, f64, f64); 12] = [
    (2, 2, 0.392, 0.421),
    (2, 5, 0.759, 0.801),
    (2, 7, 0.868, 0.902),
    (2, 10, 0.945, 0.966),
    (5, 2, 0.096, 0.115),
    (5, 5, 0.503, 0.575),
    (5, 7, 0.702, 0.774),
    (5, 10, 0.869, 0.918),
    (10, 2, 0.009, 0.013),
    (10, 5, 0.253, 0.330),
    (10, 7, 0.492, 0.598),
    (10, 10, 0.755, 0.842),
];

/// Reference truncated-chain cdfs on the grid (Monte Carlo rows with
/// 10,000 replicates behind them, so only good to about +-0.01).
const CHAIN_REFERENCE: [(u64, u32, f64); 12] = [
    (2, 2, 0.400),
    (2, 5, 0.773),
    (2, 7, 0.880),
    (2, 10, 0.952),
    (5, 2, 0.098),
    (5, 5, 0.513),
    (5, 7, 0.714),
    (5, 10, 0.879),
    (10, 2, 0.009),
    (10, 5, 0.259),
    (10, 7, 0.503),
    (10, 10, 0.767),
];

#[test]
fn acceptance_01_envelope_cdfs_match_reference_grid() {
    const TOL: f64 = 5e-4;
    for (i, n, fl_ref, sm_ref) in ENVELOPE_REFERENCE {
        let fl = pgf_extinction_cdf(female_pgf, i, n);
        let sm = pgf_extinction_cdf(sibling_pgf, i, n);
        assert!(
            (fl - fl_ref).abs() <= TOL,
            "female-line cdf at ({i}, {n}): {fl} vs reference {fl_ref}"
        );
        assert!(
            (sm - sm_ref).abs() <= TOL,
            "sibling-mated cdf at ({i}, {n}): {sm} vs reference {sm_ref}"
        );
    }
    println!("acceptance 01 envelope cdfs match reference grid to 5e-4: PASS");
}

#[test]
fn acceptance_02_exact_chain_bounds_agree_and_match_reference() {
    const AGREE_TOL: f64 = 5e-4; // three-decimal agreement between the pair
    const REF_TOL: f64 = 0.01; // reference column carries Monte Carlo noise
    let matrix = transition_matrix_exact(&trinomial_spec(1), 20).unwrap();
    let table = ChainBoundTable::compute(&matrix, 10, Some(0.75)).unwrap();
    for (i, n, reference) in CHAIN_REFERENCE {
        let hat = table.g_hat_at(i, n).unwrap();
        let tilde = table.g_tilde_at(i, n).unwrap();
        assert!(
            tilde - hat <= AGREE_TOL,
            "bounds disagree beyond 3 decimals at ({i}, {n}): {hat} vs {tilde}"
        );
        assert!(
            (hat - reference).abs() <= REF_TOL && (tilde - reference).abs() <= REF_TOL,
            "chain bounds at ({i}, {n}) stray from reference {reference}: [{hat}, {tilde}]"
        );
    }
    println!("acceptance 02 exact chain bounds agree to 3 decimals and match reference: PASS");
}

#[test]
fn acceptance_03_sandwich_ordering_and_empirical_containment() {
    const SLACK: f64 = 1e-12;
    const REPS: u64 = 100_000;
    let matrix = transition_matrix_exact(&trinomial_spec(1), 20).unwrap();
    let table = ChainBoundTable::compute(&matrix, 10, Some(0.75)).unwrap();
    for i in [2u64, 5, 10] {
        let empirical = empirical_cdf(&trinomial_spec(i), 10, REPS, 300 + i);
        for &(gi, n) in GRID.iter().filter(|(gi, _)| *gi == i) {
            let fl = pgf_extinction_cdf(female_pgf, gi, n);
            let sm = pgf_extinction_cdf(sibling_pgf, gi, n);
            let hat = table.g_hat_at(gi, n).unwrap();
            let tilde = table.g_tilde_at(gi, n).unwrap();
            let cert = table.certificate(gi, n).unwrap().unwrap();
            // the envelope cdfs bracket the true cdf, which the chain pair
            // traps up to its certified truncation error
            assert!(
                fl <= hat + cert.eps_hat + SLACK,
                "({gi}, {n}): female-line cdf {fl} above certified lower bound {hat}"
            );
            assert!(hat <= tilde, "({gi}, {n}): chain bounds out of order");
            assert!(
                tilde <= sm + cert.eps_tilde + SLACK,
                "({gi}, {n}): upper bound {tilde} above sibling-mated cdf {sm}"
            );
            let p = empirical.cdf[n as usize];
            let se = empirical.std_err[n as usize];
            assert!(
                hat - 3.0 * se <= p && p <= tilde + 3.0 * se,
                "({gi}, {n}): empirical cdf {p} outside [{hat}, {tilde}] +- 3 se"
            );
        }
    }
    println!("acceptance 03 sandwich ordering with certificates and empirical containment: PASS");
}

#[test]
fn acceptance_04_gap_certificates_and_cap_scaling() {
    const SLACK: f64 = 1e-12;
    const RATIO: f64 = 0.55;
    let spec = trinomial_spec(1);
    let mut max_gaps = Vec::new();
    for cap in [10usize, 20, 40, 80] {
        let matrix = transition_matrix_exact(&spec, cap).unwrap();
        let table = ChainBoundTable::compute(&matrix, 10, Some(0.75)).unwrap();
        let mut max_gap: f64 = 0.0;
        for (i, n) in GRID {
            if i > cap as u64 {
                continue;
            }
            let gap = table.gap_at(i, n).unwrap();
            let (eps_hat, eps_tilde) = truncation_error(i, n, 0.75, cap).unwrap();
            assert!(
                gap <= eps_hat + eps_tilde + SLACK,
                "cap {cap}, cell ({i}, {n}): measured gap {gap} above certificate"
            );
            max_gap = max_gap.max(gap);
        }
        max_gaps.push((cap, max_gap));
    }
    for pair in max_gaps.windows(2) {
        let (cap, gap) = pair[0];
        let (cap2, gap2) = pair[1];
        assert!(
            gap2 <= RATIO * gap + SLACK * SLACK,
            "doubling the cap {cap} -> {cap2} only shrank the gap {gap} -> {gap2}"
        );
    }
    println!("acceptance 04 gaps within certificates and halving the cap error at 2M: PASS");
}

#[test]
fn acceptance_05_modified_geometric_family() {
    const CLOSED_FORM_TOL: f64 = 1e-10;
    const REPS: u64 = 100_000;
    let (b, c) = (0.25, 0.25);
    let mg_pgf = move |x: f64| 1.0 - b / (1.0 - c) + b * x / (1.0 - c * x);
    for n in 0..=30u32 {
        let closed = mg_tail(b, c, n).unwrap();
        let iterated = 1.0 - pgf_extinction_cdf(mg_pgf, 1, n);
        assert!(
            (closed - iterated).abs() <= CLOSED_FORM_TOL,
            "n = {n}: closed form {closed} vs iterated {iterated}"
        );
    }

    let report = mg_example_report(b, c, b, c, 10).unwrap();
    let spec = ProcessSpec::new(
        OffspringLaw::independent_mg(b, c, b, c).unwrap(),
        MatingRule::Promiscuous,
        1,
    )
    .unwrap();
    let empirical = empirical_cdf(&spec, 10, REPS, 500);
    for row in &report.rows {
        let tail = 1.0 - empirical.cdf[row.n as usize];
        // slack under each endpoint's own binomial variance; the plug-in
        // standard error degenerates to 0 once no replicate survives
        let slack = |p: f64| 3.0 * (p * (1.0 - p) / REPS as f64).sqrt();
        assert!(
            row.lower - slack(row.lower) <= tail && tail <= row.upper + slack(row.upper),
            "n = {}: empirical tail {tail} outside [{}, {}] +- 3 se",
            row.n,
            row.lower,
            row.upper
        );
    }
    let horizon = default_horizon(1, report.mu_f).unwrap();
    let mean = empirical_mean(&spec, REPS, 500, horizon).unwrap();
    assert!(
        report.mean_lower - 3.0 * mean.std_err <= mean.mean
            && mean.mean <= report.mean_upper + 3.0 * mean.std_err,
        "empirical mean {} outside [{}, {}] +- 3 se",
        mean.mean,
        report.mean_lower,
        report.mean_upper
    );
    println!("acceptance 05 modified-geometric closed forms, tail sandwich, mean interval: PASS");
}

#[test]
fn acceptance_06_asexual_bounds_contain_exact_tails() {
    const SLACK: f64 = 1e-12;
    // law p0 = 0.6, p1 = 0.3, p2 = 0.1: mu = 0.5, sigma2 = 0.45
    let pgf = |x: f64| 0.6 + 0.3 * x + 0.1 * x * x;
    for i in [1u64, 2, 5] {
        for n in 0..=20u32 {
            let tail = 1.0 - pgf_extinction_cdf(pgf, i, n);
            let tb = asexual_tail_bounds(0.5, 0.6, 0.45, i, n).unwrap();
            assert!(
                tb.lower - SLACK <= tail && tail <= tb.upper + SLACK,
                "i = {i}, n = {n}: exact tail {tail} outside [{}, {}]",
                tb.lower,
                tb.upper
            );
        }
    }
    println!("acceptance 06 asexual tail bounds contain pgf-iterated tails: PASS");
}

#[test]
fn acceptance_07_mean_bounds_contain_monte_carlo_means() {
    const UPPER_REF: f64 = 13.004;
    const UPPER_TOL: f64 = 0.001;
    const REPS: u64 = 100_000;
    for i in [3u64, 5, 10] {
        let spec = trinomial_spec(i);
        let bound = mean_time_bounds(&spec, i).unwrap();
        let horizon = default_horizon(i, 0.75).unwrap();
        let mc = empirical_mean(&spec, REPS, 700 + i, horizon).unwrap();
        assert!(
            bound.lower <= mc.mean && mc.mean <= bound.upper,
            "i = {i}: Monte Carlo mean {} outside [{}, {}]",
            mc.mean,
            bound.lower,
            bound.upper
        );
        if i == 10 {
            assert!(
                (bound.upper - UPPER_REF).abs() <= UPPER_TOL,
                "upper bound at i = 10: {} vs {UPPER_REF}",
                bound.upper
            );
        }
    }
    println!("acceptance 07 mean interval contains Monte Carlo means, upper bound pinned: PASS");
}

#[test]
fn acceptance_08_pathwise_envelope_ordering() {
    const TRAJECTORIES: u64 = 1_000;
    const STEP_CAP: u32 = 10_000;
    let spec = trinomial_spec(10);
    let mut rng = replicate_rng(800, 0);
    let mut violations = 0u64;
    for _ in 0..TRAJECTORIES {
        let mut state = CoupledState::starting_at(spec.initial);
        let mut steps = 0;
        while state.female_line > 0 {
            state = coupled_step(&spec, state, &mut rng);
            if !(state.sibling_mated <= state.two_sex && state.two_sex <= state.female_line) {
                violations += 1;
            }
            steps += 1;
            assert!(steps < STEP_CAP, "subcritical trajectory failed to die");
        }
    }
    assert_eq!(violations, 0, "{violations} envelope-order violations");
    println!("acceptance 08 pathwise envelope ordering holds on 1000 shared trajectories: PASS");
}

#[test]
fn acceptance_09_chain_recursions_match_forward_evolution() {
    const TOL: f64 = 1e-12;
    let matrix = TruncatedTransitionMatrix {
        cap: 3,
        rows: vec![
            TransitionRow { probs: vec![0.3, 0.4, 0.2, 0.05], overflow: 0.05 },
            TransitionRow { probs: vec![0.1, 0.2, 0.3, 0.2], overflow: 0.2 },
            TransitionRow { probs: vec![0.05, 0.1, 0.2, 0.3], overflow: 0.35 },
        ],
        method: RowMethod::Exact,
    };
    let cap = matrix.cap;
    let table = ChainBoundTable::compute(&matrix, 50, None).unwrap();
    for start in 1..=cap as u64 {
        // lower chain: overflow enters a sticky never-extinct state;
        // upper chain: overflow is immediate extinction
        let mut hat_dist = vec![0.0; cap + 2];
        let mut tilde_dist = vec![0.0; cap + 1];
        hat_dist[start as usize] = 1.0;
        tilde_dist[start as usize] = 1.0;
        for n in 1..=50u32 {
            let mut next_hat = vec![0.0; cap + 2];
            next_hat[0] = hat_dist[0];
            next_hat[cap + 1] = hat_dist[cap + 1];
            let mut next_tilde = vec![0.0; cap + 1];
            next_tilde[0] = tilde_dist[0];
            for i in 1..=cap {
                let row = &matrix.rows[i - 1];
                for j in 0..=cap {
                    next_hat[j] += hat_dist[i] * row.probs[j];
                    next_tilde[j] += tilde_dist[i] * row.probs[j];
                }
                next_hat[cap + 1] += hat_dist[i] * row.overflow;
                next_tilde[0] += tilde_dist[i] * row.overflow;
            }
            hat_dist = next_hat;
            tilde_dist = next_tilde;
            let hat = table.g_hat_at(start, n).unwrap();
            let tilde = table.g_tilde_at(start, n).unwrap();
            assert!(
                (hat_dist[0] - hat).abs() <= TOL,
                "start {start}, n = {n}: lower chain {} vs recursion {hat}",
                hat_dist[0]
            );
            assert!(
                (tilde_dist[0] - tilde).abs() <= TOL,
                "start {start}, n = {n}: upper chain {} vs recursion {tilde}",
                tilde_dist[0]
            );
        }
    }
    println!("acceptance 09 chain recursions match forward-evolved absorbing chains: PASS");
}
