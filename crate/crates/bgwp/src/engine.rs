//! Process dynamics: generation steps, envelope processes, extinction-time
//! sampling, growth rates, and truncated transition matrices.
//!
//! Monte Carlo runs are deterministic: replicate `j` of a run with master
//! seed `s` draws from `ChaCha8Rng::seed_from_u64(s)` switched to stream `j`,
//! and replicate results are aggregated as integer counts, so outputs do not
//! depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::mating::MatingRule;
use crate::offspring::OffspringLaw;
use crate::{Error, Result};

/// Identifier of the replicate-seeding scheme, recorded in every report.
pub const RNG_SCHEME: &str = "chacha8/u64-master-seed/stream-per-replicate/v1";

/// Tail mass `i * r^n` at which the default simulation horizon censors.
pub const DEFAULT_CENSOR_TAIL: f64 = 1e-6;

/// A fully specified two-sex process: offspring law, mating rule, and the
/// initial number of mating units.
#[derive(Debug, Clone, Serialize)]
pub struct ProcessSpec {
    pub law: OffspringLaw,
    pub rule: MatingRule,
    pub initial: u64,
}

impl ProcessSpec {
    pub fn new(law: OffspringLaw, rule: MatingRule, initial: u64) -> Result<Self> {
        if initial == 0 {
            return Err(Error::InvalidParameter(
                "initial number of mating units must be >= 1".into(),
            ));
        }
        Ok(ProcessSpec { law, rule, initial })
    }
}

/// Generator for one replicate under [`RNG_SCHEME`]: every index gets its
/// own stream of the master-seeded cipher, so replicates are independent
/// and any one of them can be reproduced in isolation.
pub fn replicate_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// One generation of the two-sex process from `z` mating units.
pub fn step<R: Rng + ?Sized>(spec: &ProcessSpec, z: u64, rng: &mut R) -> u64 {
    let (mut f, mut m) = (0u64, 0u64);
    for _ in 0..z {
        let (df, dm) = spec.law.sample(rng);
        f += df;
        m += dm;
    }
    spec.rule.eval(f, m)
}

/// Next two-sex generation given the litters of the current units.
pub fn two_sex_from_pairs(pairs: &[(u64, u64)], rule: &MatingRule) -> u64 {
    let f: u64 = pairs.iter().map(|p| p.0).sum();
    let m: u64 = pairs.iter().map(|p| p.1).sum();
    rule.eval(f, m)
}

/// Next female-line generation (daughters only) given the same litters.
pub fn female_line_from_pairs(pairs: &[(u64, u64)]) -> u64 {
    pairs.iter().map(|p| p.0).sum()
}

/// Next sibling-mated generation: each litter mates only within itself.
pub fn sibling_mated_from_pairs(pairs: &[(u64, u64)], rule: &MatingRule) -> u64 {
    pairs.iter().map(|&(f, m)| rule.eval(f, m)).sum()
}

/// The two single-sex envelope processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Associated {
    /// Upper envelope: every daughter founds a unit.
    FemaleLine,
    /// Lower envelope: units form within litters only.
    SiblingMated,
}

/// One generation of an envelope process from `z` units.
pub fn associated_step<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    z: u64,
    rng: &mut R,
    which: Associated,
) -> u64 {
    let mut total = 0u64;
    for _ in 0..z {
        let (df, dm) = spec.law.sample(rng);
        total += match which {
            Associated::FemaleLine => df,
            Associated::SiblingMated => spec.rule.eval(df, dm),
        };
    }
    total
}

/// Joint state of the two envelopes and the two-sex process under shared
/// litter draws. Stepping preserves `sibling_mated <= two_sex <= female_line`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoupledState {
    pub sibling_mated: u64,
    pub two_sex: u64,
    pub female_line: u64,
}

impl CoupledState {
    pub fn starting_at(initial: u64) -> Self {
        CoupledState { sibling_mated: initial, two_sex: initial, female_line: initial }
    }
}

/// Advance all three processes one generation from a single pool of litters:
/// process with `k` units consumes the first `k` draws of the pool.
pub fn coupled_step<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    state: CoupledState,
    rng: &mut R,
) -> CoupledState {
    let n = state.female_line.max(state.two_sex).max(state.sibling_mated);
    let (mut fl_f, mut ts_f, mut ts_m, mut sm_units) = (0u64, 0u64, 0u64, 0u64);
    for j in 0..n {
        let (df, dm) = spec.law.sample(rng);
        if j < state.female_line {
            fl_f += df;
        }
        if j < state.two_sex {
            ts_f += df;
            ts_m += dm;
        }
        if j < state.sibling_mated {
            sm_units += spec.rule.eval(df, dm);
        }
    }
    CoupledState {
        sibling_mated: sm_units,
        two_sex: spec.rule.eval(ts_f, ts_m),
        female_line: fl_f,
    }
}

/// Outcome of one simulated lineage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtinctionSample {
    /// Extinct at generation `n >= 1`.
    Extinct(u32),
    /// Still alive at the horizon.
    Censored { horizon: u32 },
}

/// Simulate until extinction or `horizon` generations, whichever is first.
pub fn sample_extinction_time<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    horizon: u32,
    rng: &mut R,
) -> ExtinctionSample {
    let mut z = spec.initial;
    for n in 1..=horizon {
        z = step(spec, z, rng);
        if z == 0 {
            return ExtinctionSample::Extinct(n);
        }
    }
    ExtinctionSample::Censored { horizon }
}

/// Empirical distribution function of the extinction time.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalCdf {
    pub n_max: u32,
    pub reps: u64,
    pub master_seed: u64,
    pub rng_scheme: &'static str,
    /// `P(T <= n)` estimates for `n = 0..=n_max`.
    pub cdf: Vec<f64>,
    /// Binomial standard error per entry.
    pub std_err: Vec<f64>,
    /// Replicates still alive at `n_max`.
    pub censored: u64,
}

/// Estimate `P(T <= n)` for `n = 0..=n_max` from `reps` independent
/// replicates. Deterministic in `master_seed` regardless of thread count.
pub fn empirical_cdf(spec: &ProcessSpec, n_max: u32, reps: u64, master_seed: u64) -> EmpiricalCdf {
    let slots = n_max as usize + 2; // extinction at 1..=n_max, plus censored
    let counts = (0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; slots],
            |mut acc, idx| {
                let mut rng = replicate_rng(master_seed, idx);
                match sample_extinction_time(spec, n_max.max(1), &mut rng) {
                    ExtinctionSample::Extinct(t) if t <= n_max => acc[t as usize] += 1,
                    _ => acc[slots - 1] += 1,
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; slots],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let mut cdf = Vec::with_capacity(n_max as usize + 1);
    let mut std_err = Vec::with_capacity(n_max as usize + 1);
    let mut cum = 0u64;
    for n in 0..=n_max as usize {
        cum += counts[n];
        let p = cum as f64 / reps as f64;
        cdf.push(p);
        std_err.push((p * (1.0 - p) / reps as f64).sqrt());
    }
    EmpiricalCdf {
        n_max,
        reps,
        master_seed,
        rng_scheme: RNG_SCHEME,
        cdf,
        std_err,
        censored: counts[slots - 1],
    }
}

/// Sample mean of the extinction time, censored at a horizon.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub reps: u64,
    pub horizon: u32,
    pub censored: u64,
    pub master_seed: u64,
    pub rng_scheme: &'static str,
}

/// Smallest horizon `n >= 1` with `initial * r^n` below
/// [`DEFAULT_CENSOR_TAIL`]; `None` unless `0 <= r < 1`.
pub fn default_horizon(initial: u64, r: f64) -> Option<u32> {
    if !(0.0..1.0).contains(&r) {
        return None;
    }
    if r == 0.0 {
        return Some(1);
    }
    let guess = ((DEFAULT_CENSOR_TAIL / initial as f64).ln() / r.ln()).ceil();
    let mut n = guess.max(1.0) as u32;
    while initial as f64 * r.powi(n as i32) >= DEFAULT_CENSOR_TAIL {
        n += 1;
    }
    Some(n.max(1))
}

/// Estimate the mean extinction time from `reps` replicates censored at
/// `horizon` (censored lineages contribute the horizon itself, so the
/// estimate is a lower biased by at most the censored tail mass).
pub fn empirical_mean(
    spec: &ProcessSpec,
    reps: u64,
    master_seed: u64,
    horizon: u32,
) -> Result<MeanEstimate> {
    if reps < 2 {
        return Err(Error::InvalidParameter("mean estimation needs reps >= 2".into()));
    }
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    let (sum, sum_sq, censored) = (0..reps)
        .into_par_iter()
        .fold(
            || (0u64, 0u128, 0u64),
            |(s, s2, c), idx| {
                let mut rng = replicate_rng(master_seed, idx);
                let (t, cens) = match sample_extinction_time(spec, horizon, &mut rng) {
                    ExtinctionSample::Extinct(t) => (t as u64, 0),
                    ExtinctionSample::Censored { horizon } => (horizon as u64, 1),
                };
                (s + t, s2 + (t as u128) * (t as u128), c + cens)
            },
        )
        .reduce(|| (0u64, 0u128, 0u64), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = reps as f64;
    let mean = sum as f64 / n;
    let var = (sum_sq as f64 - n * mean * mean) / (n - 1.0);
    Ok(MeanEstimate {
        mean,
        std_err: (var.max(0.0) / n).sqrt(),
        reps,
        horizon,
        censored,
        master_seed,
        rng_scheme: RNG_SCHEME,
    })
}

/// How a growth rate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    /// Exact closed form for the built-in mating rules.
    ClosedForm,
    /// The female-line mean, an upper bound valid for any superadditive
    /// female-dominated rule.
    UpperEnvelope,
    /// Monte Carlo estimate of the per-unit reproduction mean.
    Estimated { i_max: u64, reps: u64, std_err: f64 },
}

/// Asymptotic per-unit reproduction mean `r`; the process is subcritical
/// exactly when `r < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthRate {
    pub value: f64,
    pub provenance: Provenance,
}

impl GrowthRate {
    /// Upper envelope `r <= mu_f`, applicable to any female-dominated rule.
    pub fn upper_envelope(mu_f: f64) -> Self {
        GrowthRate { value: mu_f, provenance: Provenance::UpperEnvelope }
    }
}

/// Growth rate of the configured process, in closed form: `mu_f` for
/// promiscuous and identity mating, `min(mu_f, k mu_m)` for polygamous.
pub fn growth_rate(spec: &ProcessSpec) -> GrowthRate {
    let m = spec.law.moments();
    let value = match spec.rule {
        MatingRule::Promiscuous | MatingRule::Identity => m.mu_f,
        MatingRule::Polygamous { k } => m.mu_f.min(k as f64 * m.mu_m),
    };
    GrowthRate { value, provenance: Provenance::ClosedForm }
}

/// Monte Carlo check of the growth rate: estimates the per-unit mean
/// `E[Z_1 | Z_0 = i] / i` for `i = 1..=i_max` and reports the largest.
pub fn estimate_growth_rate(
    spec: &ProcessSpec,
    i_max: u64,
    reps: u64,
    master_seed: u64,
) -> Result<GrowthRate> {
    if i_max == 0 || reps < 2 {
        return Err(Error::InvalidParameter(
            "growth-rate estimation needs i_max >= 1 and reps >= 2".into(),
        ));
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_se = f64::NAN;
    for i in 1..=i_max {
        let mut rng = replicate_rng(master_seed, i);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..reps {
            let ratio = step(spec, i, &mut rng) as f64 / i as f64;
            s += ratio;
            s2 += ratio * ratio;
        }
        let mean = s / reps as f64;
        if mean > best {
            best = mean;
            let var = (s2 - reps as f64 * mean * mean) / (reps as f64 - 1.0);
            best_se = (var.max(0.0) / reps as f64).sqrt();
        }
    }
    Ok(GrowthRate {
        value: best,
        provenance: Provenance::Estimated { i_max, reps, std_err: best_se },
    })
}

/// How the rows of a truncated transition matrix were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RowMethod {
    Exact,
    MonteCarlo { reps: u64, master_seed: u64 },
}

/// One-step transition probabilities out of a state, truncated at a cap.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionRow {
    /// `P(Z_1 = j | Z_0 = i)` for `j = 0..=cap`.
    pub probs: Vec<f64>,
    /// Mass that lands above the cap.
    pub overflow: f64,
}

/// Transition rows for states `1..=cap` of the embedded population chain.
#[derive(Debug, Clone, Serialize)]
pub struct TruncatedTransitionMatrix {
    pub cap: usize,
    /// `rows[i - 1]` describes transitions out of state `i`.
    pub rows: Vec<TransitionRow>,
    pub method: RowMethod,
}

impl TruncatedTransitionMatrix {
    /// Structural consistency: one row per state, each of width `cap + 1`.
    pub fn check_shape(&self) -> Result<()> {
        if self.cap == 0 {
            return Err(Error::InvalidParameter("matrix cap must be >= 1".into()));
        }
        if self.rows.len() != self.cap {
            return Err(Error::InvalidParameter(format!(
                "matrix holds {} rows but cap is {}",
                self.rows.len(),
                self.cap
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.probs.len() != self.cap + 1 {
                return Err(Error::InvalidParameter(format!(
                    "row {} has width {} but cap is {}",
                    i + 1,
                    row.probs.len(),
                    self.cap
                )));
            }
        }
        Ok(())
    }
}

/// Dense joint distribution of pooled litters over `i` units.
struct JointGrid {
    probs: Vec<f64>,
    fdim: usize,
    mdim: usize,
}

impl JointGrid {
    fn delta() -> Self {
        JointGrid { probs: vec![1.0], fdim: 1, mdim: 1 }
    }

    /// Convolve one more unit's litter into the pool.
    fn convolve(&self, support: &[(u64, u64, f64)], fmax: usize, mmax: usize) -> Self {
        let fdim = self.fdim + fmax;
        let mdim = self.mdim + mmax;
        let mut next = vec![0.0; fdim * mdim];
        for f in 0..self.fdim {
            for m in 0..self.mdim {
                let p = self.probs[f * self.mdim + m];
                if p == 0.0 {
                    continue;
                }
                for &(df, dm, q) in support {
                    next[(f + df as usize) * mdim + (m + dm as usize)] += p * q;
                }
            }
        }
        JointGrid { probs: next, fdim, mdim }
    }

    fn to_row(&self, rule: &MatingRule, cap: usize) -> TransitionRow {
        let mut probs = vec![0.0; cap + 1];
        let mut overflow = 0.0;
        for f in 0..self.fdim {
            for m in 0..self.mdim {
                let p = self.probs[f * self.mdim + m];
                if p == 0.0 {
                    continue;
                }
                let j = rule.eval(f as u64, m as u64) as usize;
                if j <= cap {
                    probs[j] += p;
                } else {
                    overflow += p;
                }
            }
        }
        TransitionRow { probs, overflow }
    }
}

fn support_extent(support: &[(u64, u64, f64)]) -> (usize, usize) {
    let fmax = support.iter().map(|e| e.0).max().unwrap_or(0) as usize;
    let mmax = support.iter().map(|e| e.1).max().unwrap_or(0) as usize;
    (fmax, mmax)
}

/// Exact transition row out of state `i`, by `i`-fold convolution of the
/// (truncated) litter law pushed through the mating rule.
pub fn transition_row_exact(spec: &ProcessSpec, i: u64, cap: usize) -> Result<TransitionRow> {
    if i == 0 || cap == 0 {
        return Err(Error::InvalidParameter("state and cap must be >= 1".into()));
    }
    let support = spec.law.enumerate()?;
    let (fmax, mmax) = support_extent(&support);
    let mut grid = JointGrid::delta();
    for _ in 0..i {
        grid = grid.convolve(&support, fmax, mmax);
    }
    Ok(grid.to_row(&spec.rule, cap))
}

/// Exact rows for every state `1..=cap`, sharing one incremental convolution.
pub fn transition_matrix_exact(spec: &ProcessSpec, cap: usize) -> Result<TruncatedTransitionMatrix> {
    if cap == 0 {
        return Err(Error::InvalidParameter("cap must be >= 1".into()));
    }
    let support = spec.law.enumerate()?;
    let (fmax, mmax) = support_extent(&support);
    let mut rows = Vec::with_capacity(cap);
    let mut grid = JointGrid::delta();
    for _ in 1..=cap {
        grid = grid.convolve(&support, fmax, mmax);
        rows.push(grid.to_row(&spec.rule, cap));
    }
    Ok(TruncatedTransitionMatrix { cap, rows, method: RowMethod::Exact })
}

/// Monte Carlo transition counts out of state `i`: `(counts[0..=cap],
/// overflow_count)`, with counts summing to `reps` exactly.
pub fn transition_row_mc_counts<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    i: u64,
    cap: usize,
    reps: u64,
    rng: &mut R,
) -> Result<(Vec<u64>, u64)> {
    if i == 0 || cap == 0 || reps == 0 {
        return Err(Error::InvalidParameter("state, cap, and reps must be >= 1".into()));
    }
    let mut counts = vec![0u64; cap + 1];
    let mut overflow = 0u64;
    for _ in 0..reps {
        let j = step_from(spec, i, rng) as usize;
        if j <= cap {
            counts[j] += 1;
        } else {
            overflow += 1;
        }
    }
    Ok((counts, overflow))
}

fn step_from<R: Rng + ?Sized>(spec: &ProcessSpec, i: u64, rng: &mut R) -> u64 {
    step(spec, i, rng)
}

/// Monte Carlo transition row out of state `i` (relative frequencies).
pub fn transition_row_mc<R: Rng + ?Sized>(
    spec: &ProcessSpec,
    i: u64,
    cap: usize,
    reps: u64,
    rng: &mut R,
) -> Result<TransitionRow> {
    let (counts, overflow) = transition_row_mc_counts(spec, i, cap, reps, rng)?;
    Ok(TransitionRow {
        probs: counts.iter().map(|&c| c as f64 / reps as f64).collect(),
        overflow: overflow as f64 / reps as f64,
    })
}

/// Monte Carlo rows for every state `1..=cap`; row `i` draws from stream `i`
/// of the master seed, so the matrix is deterministic and rows independent.
pub fn transition_matrix_mc(
    spec: &ProcessSpec,
    cap: usize,
    reps: u64,
    master_seed: u64,
) -> Result<TruncatedTransitionMatrix> {
    if cap == 0 || reps == 0 {
        return Err(Error::InvalidParameter("cap and reps must be >= 1".into()));
    }
    let rows = (1..=cap as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master_seed, i);
            transition_row_mc(spec, i, cap, reps, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncatedTransitionMatrix {
        cap,
        rows,
        method: RowMethod::MonteCarlo { reps, master_seed },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trinomial_spec(initial: u64) -> ProcessSpec {
        ProcessSpec::new(
            OffspringLaw::sex_multinomial(3, 0.25).unwrap(),
            MatingRule::Promiscuous,
            initial,
        )
        .unwrap()
    }

    #[test]
    fn spec_rejects_zero_initial() {
        let law = OffspringLaw::sex_multinomial(3, 0.25).unwrap();
        assert!(ProcessSpec::new(law, MatingRule::Promiscuous, 0).is_err());
    }

    #[test]
    fn step_from_empty_population_stays_empty() {
        let spec = trinomial_spec(1);
        let mut rng = replicate_rng(0, 0);
        assert_eq!(step(&spec, 0, &mut rng), 0);
    }

    #[test]
    fn step_with_point_mass_laws() {
        let no_males = ProcessSpec::new(
            OffspringLaw::tabulated(vec![(2, 0, 1.0)]).unwrap(),
            MatingRule::Promiscuous,
            1,
        )
        .unwrap();
        let mut rng = replicate_rng(1, 0);
        assert_eq!(step(&no_males, 1, &mut rng), 0);

        let identity = ProcessSpec::new(
            OffspringLaw::tabulated(vec![(2, 0, 1.0)]).unwrap(),
            MatingRule::Identity,
            1,
        )
        .unwrap();
        assert_eq!(step(&identity, 3, &mut rng), 6);
    }

    #[test]
    fn pair_kernels_match_hand_example() {
        let pairs = [(2, 0), (1, 3)];
        assert_eq!(female_line_from_pairs(&pairs), 3);
        assert_eq!(two_sex_from_pairs(&pairs, &MatingRule::Promiscuous), 3);
        assert_eq!(sibling_mated_from_pairs(&pairs, &MatingRule::Promiscuous), 1);
    }

    #[test]
    fn coupled_step_preserves_envelope_order() {
        let spec = trinomial_spec(6);
        let mut rng = replicate_rng(11, 0);
        let mut violations = 0;
        for _ in 0..1000 {
            let mut state = CoupledState::starting_at(spec.initial);
            while state.female_line > 0 {
                state = coupled_step(&spec, state, &mut rng);
                if !(state.sibling_mated <= state.two_sex && state.two_sex <= state.female_line) {
                    violations += 1;
                }
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn identity_rule_collapses_the_coupling() {
        let spec = ProcessSpec::new(
            OffspringLaw::sex_multinomial(3, 0.25).unwrap(),
            MatingRule::Identity,
            4,
        )
        .unwrap();
        let mut rng = replicate_rng(3, 0);
        let mut state = CoupledState::starting_at(4);
        for _ in 0..20 {
            state = coupled_step(&spec, state, &mut rng);
            assert_eq!(state.sibling_mated, state.two_sex);
            assert_eq!(state.two_sex, state.female_line);
        }
    }

    #[test]
    fn extinction_is_immediate_for_childless_law() {
        let spec = ProcessSpec::new(
            OffspringLaw::tabulated(vec![(0, 0, 1.0)]).unwrap(),
            MatingRule::Promiscuous,
            1,
        )
        .unwrap();
        let mut rng = replicate_rng(0, 0);
        assert_eq!(sample_extinction_time(&spec, 10, &mut rng), ExtinctionSample::Extinct(1));
    }

    #[test]
    fn immortal_law_censors_at_horizon() {
        let spec = ProcessSpec::new(
            OffspringLaw::tabulated(vec![(1, 0, 1.0)]).unwrap(),
            MatingRule::Identity,
            1,
        )
        .unwrap();
        let mut rng = replicate_rng(0, 0);
        assert_eq!(
            sample_extinction_time(&spec, 10, &mut rng),
            ExtinctionSample::Censored { horizon: 10 }
        );
    }

    #[test]
    fn empirical_cdf_baseline_entries() {
        let spec = trinomial_spec(2);
        let e = empirical_cdf(&spec, 5, 2_000, 42);
        assert_eq!(e.cdf[0], 0.0);
        assert!(e.cdf.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(e.rng_scheme, RNG_SCHEME);
    }

    #[test]
    fn empirical_cdf_hits_reference_interval() {
        // reference envelope cdfs at i = 2, n = 5 bracket the true value
        let spec = trinomial_spec(2);
        let e = empirical_cdf(&spec, 5, 100_000, 7);
        let p = e.cdf[5];
        let se = e.std_err[5];
        assert!(
            p > 0.759 - 3.0 * se && p < 0.801 + 3.0 * se,
            "P(T <= 5) = {p} outside envelope interval"
        );
    }

    #[test]
    fn empirical_cdf_deterministic_across_thread_counts() {
        let spec = trinomial_spec(3);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| empirical_cdf(&spec, 8, 20_000, 123))
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.cdf, b.cdf);
        assert_eq!(a.censored, b.censored);
    }

    #[test]
    fn mean_estimate_for_deterministic_one_step_extinction() {
        let spec = ProcessSpec::new(
            OffspringLaw::tabulated(vec![(0, 0, 1.0)]).unwrap(),
            MatingRule::Promiscuous,
            5,
        )
        .unwrap();
        let m = empirical_mean(&spec, 100, 9, 10).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.std_err, 0.0);
        assert_eq!(m.censored, 0);
    }

    #[test]
    fn default_horizon_known_values() {
        assert_eq!(default_horizon(10, 0.75), Some(57));
        assert_eq!(default_horizon(5, 0.75), Some(54));
        assert_eq!(default_horizon(2, 0.75), Some(51));
        assert_eq!(default_horizon(1, 0.0), Some(1));
        assert_eq!(default_horizon(1, 1.0), None);
        assert_eq!(default_horizon(1, 1.2), None);
    }

    #[test]
    fn growth_rate_closed_forms() {
        let spec = trinomial_spec(1);
        let r = growth_rate(&spec);
        assert_eq!(r.value, 0.75);
        assert_eq!(r.provenance, Provenance::ClosedForm);

        // mu_f = 0.8, mu_m = 0.5, k = 1 -> rate limited by males
        let law = OffspringLaw::tabulated(vec![(1, 1, 0.5), (1, 0, 0.3), (0, 0, 0.2)]).unwrap();
        let spec = ProcessSpec::new(law.clone(), MatingRule::polygamous(1).unwrap(), 1).unwrap();
        assert!((growth_rate(&spec).value - 0.5).abs() < 1e-15);

        let spec = ProcessSpec::new(law, MatingRule::Identity, 1).unwrap();
        assert!((growth_rate(&spec).value - 0.8).abs() < 1e-15);
    }

    #[test]
    fn estimated_growth_rate_close_to_closed_form() {
        let spec = trinomial_spec(1);
        let est = estimate_growth_rate(&spec, 5, 20_000, 31).unwrap();
        match est.provenance {
            Provenance::Estimated { std_err, .. } => {
                assert!(
                    (est.value - 0.75).abs() < 5.0 * std_err + 0.01,
                    "estimate {} too far from 0.75",
                    est.value
                );
            }
            other => panic!("unexpected provenance {other:?}"),
        }
    }

    #[test]
    fn exact_row_single_unit_is_sibling_law() {
        let spec = trinomial_spec(1);
        let row = transition_row_exact(&spec, 1, 20).unwrap();
        assert!((row.probs[0] - 0.4375).abs() < 1e-15);
        assert!((row.probs[1] - 0.421875).abs() < 1e-15);
        assert!((row.probs[2] - 0.140625).abs() < 1e-15);
        assert_eq!(row.overflow, 0.0);
        let total: f64 = row.probs.iter().sum::<f64>() + row.overflow;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_row_two_units_known_entries() {
        let spec = trinomial_spec(1);
        let row = transition_row_exact(&spec, 2, 20).unwrap();
        // pooled daughters are Binomial(6, 1/4); all-female and all-male
        // pools both collapse to state 0
        assert!((row.probs[0] - (0.75f64.powi(6) + 0.25f64.powi(6))).abs() < 1e-15);
        assert!((row.probs[5] - 6.0 * 0.25f64.powi(5) * 0.75).abs() < 1e-15);
        assert_eq!(row.probs[6], 0.0);
        assert_eq!(row.overflow, 0.0);
    }

    #[test]
    fn exact_row_overflow_appears_when_cap_is_tight() {
        let spec = trinomial_spec(1);
        let row = transition_row_exact(&spec, 4, 5).unwrap();
        assert!(row.overflow > 0.0);
        let total: f64 = row.probs.iter().sum::<f64>() + row.overflow;
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_matrix_rows_match_single_row_builder() {
        let spec = trinomial_spec(1);
        let m = transition_matrix_exact(&spec, 8).unwrap();
        m.check_shape().unwrap();
        for i in [1u64, 3, 8] {
            let row = transition_row_exact(&spec, i, 8).unwrap();
            let mrow = &m.rows[i as usize - 1];
            for j in 0..=8 {
                assert!((row.probs[j] - mrow.probs[j]).abs() < 1e-12);
            }
            assert!((row.overflow - mrow.overflow).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_rows_for_identity_point_mass() {
        let spec = ProcessSpec::new(
            OffspringLaw::tabulated(vec![(1, 0, 1.0)]).unwrap(),
            MatingRule::Identity,
            1,
        )
        .unwrap();
        let row = transition_row_exact(&spec, 1, 4).unwrap();
        assert_eq!(row.probs[1], 1.0);
        assert_eq!(row.probs.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn mc_counts_sum_to_reps_exactly() {
        let spec = trinomial_spec(1);
        let mut rng = replicate_rng(5, 0);
        let (counts, overflow) = transition_row_mc_counts(&spec, 3, 6, 10_000, &mut rng).unwrap();
        assert_eq!(counts.iter().sum::<u64>() + overflow, 10_000);
    }

    #[test]
    fn mc_row_tracks_exact_row_at_large_reps() {
        let spec = trinomial_spec(1);
        let exact = transition_row_exact(&spec, 2, 10).unwrap();
        let mut rng = replicate_rng(17, 0);
        let mc = transition_row_mc(&spec, 2, 10, 1_000_000, &mut rng).unwrap();
        for j in 0..=10 {
            let p = exact.probs[j];
            if p >= 1e-6 {
                let se = (p * (1.0 - p) / 1e6).sqrt();
                assert!(
                    (mc.probs[j] - p).abs() < 5.0 * se,
                    "entry {j}: {} vs {p} (5 se = {})",
                    mc.probs[j],
                    5.0 * se
                );
            } else {
                assert!(mc.probs[j] <= 1e-4, "entry {j} should be negligible");
            }
        }
    }

    #[test]
    fn mc_matrix_is_deterministic_in_master_seed() {
        let spec = trinomial_spec(1);
        let a = transition_matrix_mc(&spec, 6, 2_000, 77).unwrap();
        let b = transition_matrix_mc(&spec, 6, 2_000, 77).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.probs, rb.probs);
        }
    }

    #[test]
    fn mean_population_respects_growth_envelope() {
        // E[Z_k] <= i r^k; test the empirical mean against it with slack
        let spec = trinomial_spec(5);
        let reps = 100_000u64;
        let r = growth_rate(&spec).value;
        for k in [1u32, 3, 5] {
            let (sum, sum_sq) = (0..reps)
                .map(|idx| {
                    let mut rng = replicate_rng(1000 + k as u64, idx);
                    let mut z = spec.initial;
                    for _ in 0..k {
                        z = step(&spec, z, &mut rng);
                    }
                    (z as f64, (z * z) as f64)
                })
                .fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
            let mean = sum / reps as f64;
            let var = (sum_sq - reps as f64 * mean * mean) / (reps as f64 - 1.0);
            let se = (var.max(0.0) / reps as f64).sqrt();
            let envelope = spec.initial as f64 * r.powi(k as i32);
            assert!(
                mean <= envelope + 3.0 * se,
                "k = {k}: mean {mean} above envelope {envelope}"
            );
        }
    }
}
