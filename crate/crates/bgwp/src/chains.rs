//! Certified cdf bounds from truncated absorbing chains.
//!
//! Truncating the population chain at a cap `M` yields two computable
//! chains: one where crossing the cap means the lineage never dies (its
//! absorption cdf underestimates the true extinction cdf) and one where
//! crossing the cap kills the lineage immediately (overestimates). Both are
//! driven by the same [`TruncatedTransitionMatrix`]; the truncation error is
//! certified in closed form from the growth rate.

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{RowMethod, TruncatedTransitionMatrix};
use crate::{Error, Result};

fn validate_matrix(matrix: &TruncatedTransitionMatrix) -> Result<()> {
    matrix.check_shape()?;
    for (idx, row) in matrix.rows.iter().enumerate() {
        let mut total = row.overflow;
        if !(row.overflow >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "row {} has negative or NaN overflow {}",
                idx + 1,
                row.overflow
            )));
        }
        for &p in &row.probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "row {} holds an invalid probability {p}",
                    idx + 1
                )));
            }
            total += p;
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "row {} has total mass {total} > 1",
                idx + 1
            )));
        }
    }
    Ok(())
}

fn check_query(cap: usize, i: u64) -> Result<usize> {
    if i == 0 || i > cap as u64 {
        return Err(Error::InvalidParameter(format!(
            "state {i} outside the truncated range 1..={cap}"
        )));
    }
    Ok(i as usize - 1)
}

/// Certified truncation error at one `(i, n)` cell.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TruncationCertificate {
    pub i: u64,
    pub n: u32,
    /// Bounds the shortfall of the lower chain: `G - g_hat <= eps_hat`.
    pub eps_hat: f64,
    /// Bounds the excess of the upper chain: `g_tilde - G <= eps_tilde`.
    pub eps_tilde: f64,
}

fn geometric_partial_sum(r: f64, n: u32) -> f64 {
    // r + r^2 + .. + r^(n-1), written to stay stable near r = 1
    (r - r.powi(n as i32)) / (1.0 - r)
}

/// Certified truncation errors `(eps_hat, eps_tilde)` for cap `m`, valid for
/// subcritical rate `r` and horizon `n >= 2`.
pub fn truncation_error(i: u64, n: u32, r: f64, m: usize) -> Result<(f64, f64)> {
    if i == 0 {
        return Err(Error::InvalidParameter("state must be >= 1".into()));
    }
    if (m as u64) < i {
        return Err(Error::InvalidParameter(format!("cap {m} must be at least the state {i}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "truncation certificates hold for horizons n >= 2 only".into(),
        ));
    }
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidParameter(format!("growth rate {r} must lie in (0, 1)")));
    }
    if r >= 1.0 {
        return Err(Error::OutOfScope { quantity: "growth rate", value: r });
    }
    let scale = i as f64 / m as f64;
    Ok((scale * geometric_partial_sum(r, n), scale * geometric_partial_sum(r, n + 1)))
}

/// Smallest cap `m >= i` whose combined certificate
/// `i (c_n + c_(n+1)) / m` meets `target_gap`.
pub fn choose_cap(i: u64, n: u32, r: f64, target_gap: f64) -> Result<usize> {
    if !(target_gap > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target gap {target_gap} must be positive"
        )));
    }
    // reuse the certificate validation at the smallest admissible cap
    let (eps_hat, eps_tilde) = truncation_error(i, n, r, i as usize)?;
    let combined_at_i = eps_hat + eps_tilde;
    let m = (i as f64 * combined_at_i / target_gap).ceil();
    Ok((m as usize).max(i as usize))
}

/// Lower and upper cdf bounds for every state `1..=cap` and horizon
/// `0..=horizon`, plus per-cell certificates when a growth rate is known.
#[derive(Debug, Clone, Serialize)]
pub struct ChainBoundTable {
    pub cap: usize,
    pub horizon: u32,
    pub method: RowMethod,
    /// Growth rate backing the certificates, if one was supplied.
    pub rate: Option<f64>,
    /// `hat[n][i - 1]`: lower bounds on `P_i(T <= n)`.
    hat: Vec<Vec<f64>>,
    /// `gap[n][i - 1]`: exact upper-minus-lower differences, accumulated by
    /// their own recursion so they survive cancellation.
    gap: Vec<Vec<f64>>,
}

impl ChainBoundTable {
    /// Evolve both recursions `horizon` steps. Each step maps the previous
    /// vectors through the matrix, in parallel over states:
    ///
    /// ```text
    /// hat_i(n) = P_i0 + sum_j P_ij hat_j(n-1)
    /// gap_i(n) = o_i  + sum_j P_ij gap_j(n-1)
    /// ```
    ///
    /// The upper bound is recovered as `hat + gap`, which keeps the pair
    /// ordered in floating point and makes them identical when no row
    /// overflows.
    pub fn compute(
        matrix: &TruncatedTransitionMatrix,
        horizon: u32,
        rate: Option<f64>,
    ) -> Result<Self> {
        validate_matrix(matrix)?;
        if let Some(r) = rate {
            if !r.is_finite() || r <= 0.0 || r >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "certificate growth rate {r} must lie in (0, 1)"
                )));
            }
        }
        let cap = matrix.cap;
        let mut hat = Vec::with_capacity(horizon as usize + 1);
        let mut gap = Vec::with_capacity(horizon as usize + 1);
        hat.push(vec![0.0; cap]);
        gap.push(vec![0.0; cap]);
        for _ in 1..=horizon {
            let prev_hat = hat.last().unwrap();
            let prev_gap = gap.last().unwrap();
            let (next_hat, next_gap): (Vec<f64>, Vec<f64>) = matrix
                .rows
                .par_iter()
                .map(|row| {
                    let mut h = row.probs[0];
                    let mut g = row.overflow;
                    for j in 1..=cap {
                        let p = row.probs[j];
                        if p != 0.0 {
                            h += p * prev_hat[j - 1];
                            g += p * prev_gap[j - 1];
                        }
                    }
                    (h, g)
                })
                .unzip();
            hat.push(next_hat);
            gap.push(next_gap);
        }
        Ok(ChainBoundTable { cap, horizon, method: matrix.method, rate, hat, gap })
    }

    fn checked(&self, i: u64, n: u32) -> Result<(usize, usize)> {
        let idx = check_query(self.cap, i)?;
        if n > self.horizon {
            return Err(Error::InvalidParameter(format!(
                "horizon {n} beyond the computed table ({})",
                self.horizon
            )));
        }
        Ok((n as usize, idx))
    }

    /// Lower bound on `P_i(T <= n)`.
    pub fn g_hat_at(&self, i: u64, n: u32) -> Result<f64> {
        let (n, idx) = self.checked(i, n)?;
        Ok(self.hat[n][idx])
    }

    /// Upper bound on `P_i(T <= n)`.
    pub fn g_tilde_at(&self, i: u64, n: u32) -> Result<f64> {
        let (n, idx) = self.checked(i, n)?;
        Ok((self.hat[n][idx] + self.gap[n][idx]).min(1.0))
    }

    /// Width `g_tilde - g_hat`, computed without cancellation.
    pub fn gap_at(&self, i: u64, n: u32) -> Result<f64> {
        let (n, idx) = self.checked(i, n)?;
        Ok(self.gap[n][idx])
    }

    /// Certified truncation error, available once `n >= 2` and a growth
    /// rate was supplied.
    pub fn certificate(&self, i: u64, n: u32) -> Result<Option<TruncationCertificate>> {
        self.checked(i, n)?;
        let Some(r) = self.rate else { return Ok(None) };
        if n < 2 {
            return Ok(None);
        }
        let (eps_hat, eps_tilde) = truncation_error(i, n, r, self.cap)?;
        Ok(Some(TruncationCertificate { i, n, eps_hat, eps_tilde }))
    }

    /// True when the rows were Monte Carlo estimates, in which case the
    /// bounds (and certificates) describe the estimated chain, not the
    /// exact process.
    pub fn mc_estimated(&self) -> bool {
        matches!(self.method, RowMethod::MonteCarlo { .. })
    }
}

/// Lower bound on `P_i(T <= n)` from the chain that survives any excursion
/// above the cap.
pub fn g_hat(matrix: &TruncatedTransitionMatrix, i: u64, n: u32) -> Result<f64> {
    check_query(matrix.cap, i)?;
    ChainBoundTable::compute(matrix, n, None)?.g_hat_at(i, n)
}

/// Upper bound on `P_i(T <= n)` from the chain that dies on any excursion
/// above the cap.
pub fn g_tilde(matrix: &TruncatedTransitionMatrix, i: u64, n: u32) -> Result<f64> {
    check_query(matrix.cap, i)?;
    ChainBoundTable::compute(matrix, n, None)?.g_tilde_at(i, n)
}

/// Width of the chain sandwich at `(i, n)`.
pub fn gap(matrix: &TruncatedTransitionMatrix, i: u64, n: u32) -> Result<f64> {
    check_query(matrix.cap, i)?;
    ChainBoundTable::compute(matrix, n, None)?.gap_at(i, n)
}
