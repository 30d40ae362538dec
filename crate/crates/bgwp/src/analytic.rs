//! Closed-form bounds on the extinction time: two-sided tail envelopes with
//! explicit constants, interval bounds on the mean, pgf-iteration cdfs for
//! the single-sex envelope processes, and the exactly solvable
//! modified-geometric family.

use serde::Serialize;

use crate::engine::{growth_rate, GrowthRate, ProcessSpec, Provenance};

use crate::{Error, Result};

fn check_subcritical_mean(mu: f64) -> Result<()> {
    if !mu.is_finite() || mu <= 0.0 || mu >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "offspring mean {mu} must lie strictly inside (0, 1)"
        )));
    }
    Ok(())
}

fn check_state(i: u64) -> Result<()> {
    if i == 0 {
        return Err(Error::InvalidParameter("initial state must be >= 1".into()));
    }
    Ok(())
}

/// Two-sided bound on a tail probability `P_i(T > n)`.
///
/// `raw_*` are the bare formula values; `lower`/`upper` are clamped into
/// `[0, 1]` (the lower formula can go negative for large `i`, the upper can
/// exceed one for small `n`). `gap` is the width of the raw interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailBound {
    pub i: u64,
    pub n: u32,
    pub raw_lower: f64,
    pub raw_upper: f64,
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub lower_clamped: bool,
    pub upper_clamped: bool,
}

impl TailBound {
    fn from_raw(i: u64, n: u32, raw_lower: f64, raw_upper: f64) -> Self {
        let lower = raw_lower.clamp(0.0, 1.0);
        let upper = raw_upper.clamp(0.0, 1.0);
        TailBound {
            i,
            n,
            raw_lower,
            raw_upper,
            lower,
            upper,
            gap: raw_upper - raw_lower,
            lower_clamped: lower != raw_lower,
            upper_clamped: upper != raw_upper,
        }
    }
}

/// Interval bound on a mean extinction time `E_i[T]`.
///
/// `mu`, `sigma2`, and `b` are the constants entering the lower bound (for
/// the two-sex process these come from the sibling-mated envelope); `r` is
/// the growth rate used by the upper bound, when one is involved.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanBound {
    pub i: u64,
    pub raw_lower: f64,
    /// `max(raw_lower, 1)`; extinction takes at least one generation.
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    pub sigma2: f64,
    pub b: Option<f64>,
    pub r: Option<f64>,
    /// True when `r` is only the female-line envelope, not the exact rate.
    pub envelope_rate: bool,
}

/// Prefactor of the upper tail bound `P_i(T > n) <= Q * i * mu^n` for a
/// subcritical single-sex process with offspring mean `mu` and
/// no-offspring probability `p0`. Equals 1 except for a single ancestor.
pub fn agresti_upper_factor(mu: f64, p0: f64, i: u64, n: u32) -> Result<f64> {
    check_subcritical_mean(mu)?;
    if !p0.is_finite() || !(0.0..=1.0).contains(&p0) {
        return Err(Error::InvalidParameter(format!(
            "no-offspring probability {p0} must lie in [0, 1]"
        )));
    }
    check_state(i)?;
    if i != 1 {
        return Ok(1.0);
    }
    // the sharper branch mu/(mu + p0 - 1) only applies when positive
    let branch = mu + p0 - 1.0;
    let c1 = if branch > 0.0 { (mu / branch).max(2.0) } else { 2.0 };
    let a = mu.powi(n as i32);
    Ok(1.0 - (1.0 - a) / (c1 * (1.0 - mu) + 1.0 - a))
}

/// Prefactor of the lower tail bound `Q * mu^n <= P_i(T > n)`, from the mean
/// and variance of the offspring law. May be negative for large `i`; callers
/// clamp.
pub fn agresti_lower_factor(mu: f64, sigma2: f64, i: u64, n: u32) -> Result<f64> {
    check_subcritical_mean(mu)?;
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "offspring variance {sigma2} must be positive; degenerate laws have exact \
             extinction cdfs and need no bound"
        )));
    }
    check_state(i)?;
    let c2 = mu * (1.0 - mu) / sigma2;
    let a = mu.powi(n as i32);
    let denom = 1.0 - (1.0 - c2) * a;
    Ok(c2 / denom - (1.0 - a) / denom * (i - 1) as f64 / 2.0)
}

/// Two-sided bound on `P_i(T > n)` for a single-sex process.
pub fn asexual_tail_bounds(mu: f64, p0: f64, sigma2: f64, i: u64, n: u32) -> Result<TailBound> {
    let q_upper = agresti_upper_factor(mu, p0, i, n)?;
    let q_lower = agresti_lower_factor(mu, sigma2, i, n)?;
    let a = mu.powi(n as i32);
    Ok(TailBound::from_raw(i, n, q_lower * a, q_upper * i as f64 * a))
}

/// The constants both envelope processes contribute to the closed-form
/// bounds: female-line mean and no-daughter probability for the upper end,
/// sibling-law mean and variance for the lower end, and the growth rate.
#[derive(Debug, Clone, Serialize)]
pub struct AssociatedConstants {
    pub mu_f: f64,
    pub p_f0: f64,
    pub mu_s: f64,
    pub sigma2_s: f64,
    pub rate: GrowthRate,
}

impl AssociatedConstants {
    pub fn from_spec(spec: &ProcessSpec) -> Result<Self> {
        let m = spec.law.moments();
        let sibling = spec.law.mated_sibling_law(&spec.rule)?;
        Ok(AssociatedConstants {
            mu_f: m.mu_f,
            p_f0: m.p_f0,
            mu_s: sibling.mu_s,
            sigma2_s: sibling.sigma2_s,
            rate: growth_rate(spec),
        })
    }

    /// Replace the growth rate, e.g. with an envelope or an estimate for a
    /// mating rule without a closed form.
    pub fn with_rate(mut self, rate: GrowthRate) -> Self {
        self.rate = rate;
        self
    }

    /// Two-sided bound on `P_i(T > n)`: sibling-mated envelope below,
    /// female-line envelope above.
    pub fn tail_bound(&self, i: u64, n: u32) -> Result<TailBound> {
        check_state(i)?;
        if self.mu_f >= 1.0 {
            return Err(Error::OutOfScope {
                quantity: "female-line offspring mean",
                value: self.mu_f,
            });
        }
        if self.mu_f == 0.0 {
            // no unit ever has a daughter, so extinction is certain at n = 1
            let exact = if n == 0 { 1.0 } else { 0.0 };
            return Ok(TailBound::from_raw(i, n, exact, exact));
        }
        let raw_upper =
            agresti_upper_factor(self.mu_f, self.p_f0, i, n)? * i as f64 * self.mu_f.powi(n as i32);
        let raw_lower = if self.mu_s == 0.0 {
            // sibling envelope dies in one step; its tail is the trivial bound
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            agresti_lower_factor(self.mu_s, self.sigma2_s, i, n)? * self.mu_s.powi(n as i32)
        };
        Ok(TailBound::from_raw(i, n, raw_lower, raw_upper))
    }

    /// Interval bound on `E_i[T]`, valid for `i >= 3`.
    pub fn mean_bound(&self, i: u64) -> Result<MeanBound> {
        if i < 3 {
            return Err(Error::InvalidParameter(format!(
                "mean bounds need an initial population of at least 3 units, got {i}"
            )));
        }
        let r = self.rate.value;
        if r >= 1.0 {
            return Err(Error::OutOfScope { quantity: "growth rate", value: r });
        }
        let log_i = (i as f64).ln();
        let upper = (log_i / r.ln().abs() + (2.0 - r) / (1.0 - r)).min(i as f64 / (1.0 - r));
        let (raw_lower, b) = if self.mu_s == 0.0 || self.sigma2_s == 0.0 {
            // degenerate sibling envelope certifies nothing beyond T >= 1
            (1.0, None)
        } else {
            let b = (1.0 - self.mu_s) * self.mu_s / self.sigma2_s;
            let raw = ((log_i - log_i.ln()) / self.mu_s.ln().abs() - 1.0)
                * (1.0 - 1.0 / (i as f64 * b));
            (raw, Some(b))
        };
        Ok(MeanBound {
            i,
            raw_lower,
            lower: raw_lower.max(1.0),
            upper,
            mu: self.mu_s,
            sigma2: self.sigma2_s,
            b,
            r: Some(r),
            envelope_rate: matches!(self.rate.provenance, Provenance::UpperEnvelope),
        })
    }
}

/// Two-sided bound on `P_i(T > n)` for a two-sex process.
pub fn bgwp_tail_bounds(spec: &ProcessSpec, i: u64, n: u32) -> Result<TailBound> {
    AssociatedConstants::from_spec(spec)?.tail_bound(i, n)
}

/// Interval bound on `E_i[T]` for a single-sex process, `i >= 3`.
pub fn mean_time_bounds_asexual(mu: f64, sigma2: f64, i: u64) -> Result<MeanBound> {
    if i < 3 {
        return Err(Error::InvalidParameter(format!(
            "mean bounds need an initial population of at least 3 units, got {i}"
        )));
    }
    check_subcritical_mean(mu)?;
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "offspring variance {sigma2} must be positive"
        )));
    }
    let b = (1.0 - mu) * mu / sigma2;
    let log_i = (i as f64).ln();
    let log_mu = mu.ln().abs();
    let raw_lower = ((log_i - log_i.ln()) / log_mu - 1.0) * (1.0 - 1.0 / (i as f64 * b));
    let upper = log_i / log_mu + (2.0 - mu) / (1.0 - mu);
    Ok(MeanBound {
        i,
        raw_lower,
        lower: raw_lower.max(1.0),
        upper,
        mu,
        sigma2,
        b: Some(b),
        r: None,
        envelope_rate: false,
    })
}

/// Interval bound on `E_i[T]` for a two-sex process, `i >= 3`.
pub fn mean_time_bounds(spec: &ProcessSpec, i: u64) -> Result<MeanBound> {
    AssociatedConstants::from_spec(spec)?.mean_bound(i)
}

/// Extinction cdf `P_i(T <= n)` of a single-sex process: the n-fold
/// self-composition of its pgf at 0, raised to the i-th power.
pub fn pgf_extinction_cdf(pgf: impl Fn(f64) -> f64, i: u64, n: u32) -> f64 {
    let mut x = 0.0;
    for _ in 0..n {
        x = pgf(x);
    }
    if i <= i32::MAX as u64 {
        x.powi(i as i32)
    } else {
        x.powf(i as f64)
    }
}

fn validate_mg(b: f64, c: f64) -> Result<()> {
    if !b.is_finite() || !c.is_finite() || b <= 0.0 || c <= 0.0 || b + c > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "modified-geometric parameters need b > 0, c > 0, b + c <= 1; got b = {b}, c = {c}"
        )));
    }
    Ok(())
}

/// Exact single-ancestor tail `P(T > n)` for a subcritical asexual process
/// with modified-geometric offspring `P(k) = b c^(k-1)`, `k >= 1`.
pub fn mg_tail(b: f64, c: f64, n: u32) -> Result<f64> {
    validate_mg(b, c)?;
    let mu = b / ((1.0 - c) * (1.0 - c));
    if mu >= 1.0 {
        return Err(Error::OutOfScope { quantity: "offspring mean", value: mu });
    }
    // subcriticality makes u > 1, so both denominators stay positive
    let u = (1.0 - b - c) / (c * (1.0 - c));
    let a = mu.powi(n as i32);
    Ok((u - 1.0) / (u - a) * a)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MgExampleRow {
    pub n: u32,
    /// Exact sibling-mated tail, a lower bound on `P_1(T > n)`.
    pub lower: f64,
    /// Exact female-line tail, an upper bound on `P_1(T > n)`.
    pub upper: f64,
}

/// Closed-form sandwich for a single ancestor with independent
/// modified-geometric daughter and son counts under promiscuous mating.
#[derive(Debug, Clone, Serialize)]
pub struct MgExampleReport {
    pub b_f: f64,
    pub c_f: f64,
    pub b_m: f64,
    pub c_m: f64,
    /// Sibling-mated offspring law is again modified geometric, with this
    /// success parameter and ratio `c_s = c_f`.
    pub b_s: f64,
    pub c_s: f64,
    pub mu_f: f64,
    pub mu_s: f64,
    pub u_f: f64,
    pub u_s: f64,
    pub rows: Vec<MgExampleRow>,
    pub mean_lower_raw: f64,
    pub mean_lower: f64,
    pub mean_upper: f64,
}

/// Evaluate the exactly solvable modified-geometric family: per-`n` tail
/// sandwich `P(T_s > n) <= P_1(T > n) <= P(T_f > n)` and the mean interval
/// `[(1 - 1/u_s)/(1 - mu_s), 1/(1 - mu_f)]`.
pub fn mg_example_report(
    b_f: f64,
    c_f: f64,
    b_m: f64,
    c_m: f64,
    n_max: u32,
) -> Result<MgExampleReport> {
    validate_mg(b_f, c_f)?;
    validate_mg(b_m, c_m)?;
    let mu_f = b_f / ((1.0 - c_f) * (1.0 - c_f));
    if mu_f >= 1.0 {
        return Err(Error::OutOfScope { quantity: "female-line offspring mean", value: mu_f });
    }
    // a daughter heads a sibling unit only if she has a brother, which
    // thins the law to b_s = b_f * P(m >= 1) while keeping the ratio c_f
    let b_s = b_f * b_m / (1.0 - c_m);
    let c_s = c_f;
    let mu_s = b_s / ((1.0 - c_s) * (1.0 - c_s));
    let u_f = (1.0 - b_f - c_f) / (c_f * (1.0 - c_f));
    let u_s = (1.0 - b_s - c_s) / (c_s * (1.0 - c_s));
    let rows = (0..=n_max)
        .map(|n| {
            Ok(MgExampleRow { n, lower: mg_tail(b_s, c_s, n)?, upper: mg_tail(b_f, c_f, n)? })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_lower_raw = (1.0 - 1.0 / u_s) / (1.0 - mu_s);
    Ok(MgExampleReport {
        b_f,
        c_f,
        b_m,
        c_m,
        b_s,
        c_s,
        mu_f,
        mu_s,
        u_f,
        u_s,
        rows,
        mean_lower_raw,
        mean_lower: mean_lower_raw.max(1.0),
        mean_upper: 1.0 / (1.0 - mu_f),
    })
}
