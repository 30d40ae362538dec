//! Offspring laws: joint distributions of (female, male) litter counts.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

use crate::mating::MatingRule;
use crate::{Error, Result};

/// Tail mass below which unbounded supports are truncated when enumerating.
pub const TRUNCATION_TOL: f64 = 1e-12;
/// Hard cap on the enumerated support length per sex.
pub const SUPPORT_CAP: usize = 65_536;
/// Tabulated probabilities must sum to 1 within this tolerance; smaller
/// discrepancies are renormalized away and flagged.
pub const TABLE_MASS_TOL: f64 = 1e-9;

/// Joint law of the (females, males) litter of one mating unit.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OffspringLaw {
    /// Independent female and male counts, each modified geometric:
    /// `P(k) = b c^(k-1)` for `k >= 1` and `P(0) = 1 - b/(1-c)`.
    IndependentMg { b_f: f64, c_f: f64, b_m: f64, c_m: f64 },
    /// A litter of fixed size in which each offspring is independently
    /// female with probability `alpha`.
    SexMultinomial { litter: u32, alpha: f64 },
    /// A finite table of `(females, males) -> probability` entries.
    Table(TabulatedLaw),
}

/// Finite-support law given directly as a probability table.
#[derive(Debug, Clone, Serialize)]
pub struct TabulatedLaw {
    entries: Vec<(u64, u64, f64)>,
    renormalized: bool,
}

impl TabulatedLaw {
    /// Entries as `(females, males, probability)`, sorted, zero mass removed.
    pub fn entries(&self) -> &[(u64, u64, f64)] {
        &self.entries
    }

    /// True when construction had to rescale the probabilities to sum to 1.
    pub fn renormalized(&self) -> bool {
        self.renormalized
    }
}

/// First and second moments of the per-sex marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffspringMoments {
    pub mu_f: f64,
    pub mu_m: f64,
    pub var_f: f64,
    pub var_m: f64,
    /// Probability that a unit has no daughters at all.
    pub p_f0: f64,
}

/// Law of `zeta(f, m)` for a single litter: the units formed if every
/// litter could only mate within itself. Iterating this law as a single-sex
/// process bounds the two-sex process from below.
#[derive(Debug, Clone, Serialize)]
pub struct MatedSiblingLaw {
    pmf: Vec<f64>,
    pub mu_s: f64,
    pub sigma2_s: f64,
}

impl MatedSiblingLaw {
    /// `P(h = k)`; zero beyond the stored support.
    pub fn pmf(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// Probability generating function `E[x^h]`.
    pub fn pgf(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut xk = 1.0;
        for &p in &self.pmf {
            acc += p * xk;
            xk *= x;
        }
        acc
    }

    /// Largest stored support point.
    pub fn support_max(&self) -> usize {
        self.pmf.len().saturating_sub(1)
    }
}

fn check_prob(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {value} must lie in [0, 1]"
        )));
    }
    Ok(())
}

fn check_mg_pair(prefix: &str, b: f64, c: f64) -> Result<()> {
    if !b.is_finite() || !c.is_finite() || b <= 0.0 || c <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "modified-geometric parameters b_{prefix} = {b}, c_{prefix} = {c} must be positive"
        )));
    }
    if b + c > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "modified-geometric parameters require b_{prefix} + c_{prefix} <= 1, got {}",
            b + c
        )));
    }
    Ok(())
}

/// `P(xi = k)` for the modified geometric law.
fn mg_pmf(b: f64, c: f64, k: u64) -> f64 {
    if k == 0 {
        1.0 - b / (1.0 - c)
    } else {
        let e = (k - 1).min(i32::MAX as u64) as i32;
        b * c.powi(e)
    }
}

/// Support 0..=K with `P(xi > K) < tol`, as a pmf vector.
fn mg_pmf_vec(b: f64, c: f64, tol: f64) -> Result<Vec<f64>> {
    // P(xi > K) = (b / (1 - c)) c^K
    let q = b / (1.0 - c);
    let mut k = if q < tol {
        0usize
    } else {
        ((tol / q).ln() / c.ln()).ceil().max(0.0) as usize
    };
    while q * c.powi(k as i32) >= tol {
        k += 1;
    }
    if k + 1 > SUPPORT_CAP {
        return Err(Error::TruncationCap { required: k + 1, cap: SUPPORT_CAP });
    }
    Ok((0..=k as u64).map(|j| mg_pmf(b, c, j)).collect())
}

fn binom_coeff(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

impl OffspringLaw {
    /// Independent modified-geometric daughters and sons.
    pub fn independent_mg(b_f: f64, c_f: f64, b_m: f64, c_m: f64) -> Result<Self> {
        check_mg_pair("f", b_f, c_f)?;
        check_mg_pair("m", b_m, c_m)?;
        Ok(OffspringLaw::IndependentMg { b_f, c_f, b_m, c_m })
    }

    /// Fixed litter of `litter` offspring, each female with probability `alpha`.
    pub fn sex_multinomial(litter: u32, alpha: f64) -> Result<Self> {
        if litter == 0 || litter > 1000 {
            return Err(Error::InvalidParameter(format!(
                "litter size {litter} must lie in 1..=1000"
            )));
        }
        check_prob("alpha", alpha)?;
        if alpha == 0.0 || alpha == 1.0 {
            return Err(Error::InvalidParameter(
                "alpha must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(OffspringLaw::SexMultinomial { litter, alpha })
    }

    /// Law given as `(females, males, probability)` entries. The mass must
    /// be 1 within [`TABLE_MASS_TOL`]; smaller discrepancies are rescaled
    /// away and recorded on the returned table.
    pub fn tabulated(entries: Vec<(u64, u64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("probability table is empty".into()));
        }
        let mut cleaned: Vec<(u64, u64, f64)> = Vec::with_capacity(entries.len());
        let mut mass = 0.0;
        for &(f, m, p) in &entries {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "table probability {p} at ({f}, {m}) must be finite and >= 0"
                )));
            }
            if f as usize > SUPPORT_CAP || m as usize > SUPPORT_CAP {
                return Err(Error::InvalidParameter(format!(
                    "table support point ({f}, {m}) exceeds the cap {SUPPORT_CAP}"
                )));
            }
            mass += p;
            if p > 0.0 {
                cleaned.push((f, m, p));
            }
        }
        if (mass - 1.0).abs() > TABLE_MASS_TOL {
            return Err(Error::InvalidParameter(format!(
                "table probabilities sum to {mass}, further than {TABLE_MASS_TOL} from 1"
            )));
        }
        if cleaned.is_empty() {
            return Err(Error::InvalidParameter(
                "probability table has no positive entries".into(),
            ));
        }
        cleaned.sort_by_key(|&(f, m, _)| (f, m));
        for w in cleaned.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidParameter(format!(
                    "duplicate table entry for ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let renormalized = mass != 1.0;
        if renormalized {
            for e in &mut cleaned {
                e.2 /= mass;
            }
        }
        Ok(OffspringLaw::Table(TabulatedLaw { entries: cleaned, renormalized }))
    }

    /// `P(females = f, males = m)` for one litter.
    pub fn pmf(&self, f: u64, m: u64) -> f64 {
        match *self {
            OffspringLaw::IndependentMg { b_f, c_f, b_m, c_m } => {
                mg_pmf(b_f, c_f, f) * mg_pmf(b_m, c_m, m)
            }
            OffspringLaw::SexMultinomial { litter, alpha } => {
                if f + m != litter as u64 {
                    return 0.0;
                }
                binom_coeff(litter, f as u32)
                    * alpha.powi(f as i32)
                    * (1.0 - alpha).powi(m as i32)
            }
            OffspringLaw::Table(ref t) => t
                .entries
                .binary_search_by_key(&(f, m), |&(tf, tm, _)| (tf, tm))
                .map(|idx| t.entries[idx].2)
                .unwrap_or(0.0),
        }
    }

    /// Draw one litter.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        match *self {
            OffspringLaw::IndependentMg { b_f, c_f, b_m, c_m } => {
                (sample_mg(b_f, c_f, rng), sample_mg(b_m, c_m, rng))
            }
            OffspringLaw::SexMultinomial { litter, alpha } => {
                let f = Binomial::new(litter as u64, alpha)
                    .expect("validated parameters")
                    .sample(rng);
                (f, litter as u64 - f)
            }
            OffspringLaw::Table(ref t) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(f, m, p) in &t.entries {
                    acc += p;
                    if u < acc {
                        return (f, m);
                    }
                }
                let &(f, m, _) = t.entries.last().expect("non-empty table");
                (f, m)
            }
        }
    }

    /// Marginal means and variances, plus the no-daughter probability.
    pub fn moments(&self) -> OffspringMoments {
        match *self {
            OffspringLaw::IndependentMg { b_f, c_f, b_m, c_m } => {
                let (mu_f, var_f) = mg_moments(b_f, c_f);
                let (mu_m, var_m) = mg_moments(b_m, c_m);
                OffspringMoments { mu_f, mu_m, var_f, var_m, p_f0: mg_pmf(b_f, c_f, 0) }
            }
            OffspringLaw::SexMultinomial { litter, alpha } => {
                let l = litter as f64;
                let v = l * alpha * (1.0 - alpha);
                OffspringMoments {
                    mu_f: l * alpha,
                    mu_m: l * (1.0 - alpha),
                    var_f: v,
                    var_m: v,
                    p_f0: (1.0 - alpha).powi(litter as i32),
                }
            }
            OffspringLaw::Table(ref t) => {
                let (mut mu_f, mut mu_m, mut sf, mut sm, mut p_f0) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for &(f, m, p) in &t.entries {
                    let (f, m) = (f as f64, m as f64);
                    mu_f += p * f;
                    mu_m += p * m;
                    sf += p * f * f;
                    sm += p * m * m;
                    if f == 0.0 {
                        p_f0 += p;
                    }
                }
                OffspringMoments {
                    mu_f,
                    mu_m,
                    var_f: sf - mu_f * mu_f,
                    var_m: sm - mu_m * mu_m,
                    p_f0,
                }
            }
        }
    }

    /// Probability generating function of the female marginal, `E[x^f]`.
    pub fn female_pgf(&self, x: f64) -> f64 {
        match *self {
            OffspringLaw::IndependentMg { b_f, c_f, .. } => {
                1.0 - b_f / (1.0 - c_f) + b_f * x / (1.0 - c_f * x)
            }
            OffspringLaw::SexMultinomial { litter, alpha } => {
                (alpha * x + 1.0 - alpha).powi(litter as i32)
            }
            OffspringLaw::Table(ref t) => {
                let mut by_f = 0.0;
                for &(f, _, p) in &t.entries {
                    by_f += p * x.powi(f.min(i32::MAX as u64) as i32);
                }
                by_f
            }
        }
    }

    /// Truncated enumeration of the joint support as `(f, m, probability)`.
    /// Unbounded marginals are cut once their tail mass drops below
    /// [`TRUNCATION_TOL`]; finite laws are enumerated exactly.
    pub fn enumerate(&self) -> Result<Vec<(u64, u64, f64)>> {
        match *self {
            OffspringLaw::IndependentMg { b_f, c_f, b_m, c_m } => {
                let pf = mg_pmf_vec(b_f, c_f, TRUNCATION_TOL)?;
                let pm = mg_pmf_vec(b_m, c_m, TRUNCATION_TOL)?;
                let mut out = Vec::with_capacity(pf.len() * pm.len());
                for (f, &qf) in pf.iter().enumerate() {
                    for (m, &qm) in pm.iter().enumerate() {
                        out.push((f as u64, m as u64, qf * qm));
                    }
                }
                Ok(out)
            }
            OffspringLaw::SexMultinomial { litter, .. } => Ok((0..=litter as u64)
                .map(|f| (f, litter as u64 - f, self.pmf(f, litter as u64 - f)))
                .collect()),
            OffspringLaw::Table(ref t) => Ok(t.entries.clone()),
        }
    }

    /// Law of `zeta(f, m)` over a single litter, with its moments.
    pub fn mated_sibling_law(&self, rule: &MatingRule) -> Result<MatedSiblingLaw> {
        let support = self.enumerate()?;
        let mut pmf: Vec<f64> = Vec::new();
        let (mut mu, mut m2) = (0.0, 0.0);
        for &(f, m, p) in &support {
            let h = rule.eval(f, m);
            let hu = h as usize;
            if hu >= pmf.len() {
                pmf.resize(hu + 1, 0.0);
            }
            pmf[hu] += p;
            mu += p * h as f64;
            m2 += p * (h as f64) * (h as f64);
        }
        Ok(MatedSiblingLaw { pmf, mu_s: mu, sigma2_s: m2 - mu * mu })
    }
}

fn mg_moments(b: f64, c: f64) -> (f64, f64) {
    let mu = b / ((1.0 - c) * (1.0 - c));
    let m2 = b * (1.0 + c) / ((1.0 - c) * (1.0 - c) * (1.0 - c));
    (mu, m2 - mu * mu)
}

fn sample_mg<R: Rng + ?Sized>(b: f64, c: f64, rng: &mut R) -> u64 {
    let q = b / (1.0 - c); // P(xi >= 1)
    let u: f64 = rng.random();
    if u >= q {
        return 0;
    }
    // given xi >= 1, xi - 1 is geometric with ratio c; invert its cdf on (0, 1]
    let v: f64 = 1.0 - rng.random::<f64>();
    1 + (v.ln() / c.ln()).floor() as u64
}
