//! Run configurations and the report-building commands behind the `bgwp`
//! binary. Commands return plain report structs; rendering to JSON or CSV
//! and writing to disk are separate steps so the pieces stay scriptable
//! from library code too.
//!
//! Reports never contain timestamps or machine identifiers. Together with
//! the deterministic engine seeding, rerunning a command with the same
//! configuration reproduces the output byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::{
    bgwp_tail_bounds, pgf_extinction_cdf, AssociatedConstants, MeanBound,
};
use crate::chains::ChainBoundTable;
use crate::engine::{
    default_horizon, empirical_cdf, empirical_mean, growth_rate, transition_matrix_exact,
    transition_matrix_mc, GrowthRate, MeanEstimate, ProcessSpec, RowMethod, RNG_SCHEME,
};
use crate::mating::{MatingRule, PropertyReport};
use crate::offspring::OffspringLaw;
use crate::{Error, Result};

/// Offspring-law section of a run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LawConfig {
    SexMultinomial {
        #[serde(default = "default_litter")]
        litter: u32,
        alpha: f64,
    },
    IndependentMg {
        b_f: f64,
        c_f: f64,
        b_m: f64,
        c_m: f64,
    },
    Table {
        entries: Vec<(u64, u64, f64)>,
    },
}

fn default_litter() -> u32 {
    3
}

impl LawConfig {
    pub fn to_law(&self) -> Result<OffspringLaw> {
        match self {
            LawConfig::SexMultinomial { litter, alpha } => {
                OffspringLaw::sex_multinomial(*litter, *alpha)
            }
            LawConfig::IndependentMg { b_f, c_f, b_m, c_m } => {
                OffspringLaw::independent_mg(*b_f, *c_f, *b_m, *c_m)
            }
            LawConfig::Table { entries } => OffspringLaw::tabulated(entries.clone()),
        }
    }
}

/// Mating-rule section of a run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MatingConfig {
    #[default]
    Promiscuous,
    Polygamous {
        k: u64,
    },
    Identity,
}

impl MatingConfig {
    pub fn to_rule(&self) -> Result<MatingRule> {
        match self {
            MatingConfig::Promiscuous => Ok(MatingRule::Promiscuous),
            MatingConfig::Polygamous { k } => MatingRule::polygamous(*k),
            MatingConfig::Identity => Ok(MatingRule::Identity),
        }
    }
}

/// A process description as read from a JSON config file:
/// `{"law": {...}, "mating": {...}, "initial": n}`. The mating section
/// defaults to promiscuous and `initial` to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub law: LawConfig,
    #[serde(default)]
    pub mating: MatingConfig,
    #[serde(default = "default_initial")]
    pub initial: u64,
}

fn default_initial() -> u64 {
    1
}

impl RunConfig {
    /// The reference configuration: litter-3 sex-multinomial law with
    /// daughter probability `alpha`, promiscuous mating.
    pub fn sex_multinomial(alpha: f64, initial: u64) -> Self {
        RunConfig {
            law: LawConfig::SexMultinomial { litter: 3, alpha },
            mating: MatingConfig::Promiscuous,
            initial,
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Validate every field through the domain constructors.
    pub fn to_spec(&self) -> Result<ProcessSpec> {
        ProcessSpec::new(self.law.to_law()?, self.mating.to_rule()?, self.initial)
    }
}

/// Provenance block present in every report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMeta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    pub seed: Option<u64>,
    pub reps: Option<u64>,
    pub rng_scheme: Option<&'static str>,
    pub method: Option<&'static str>,
    pub notes: Vec<String>,
}

impl ReportMeta {
    fn new(command: &'static str, config: RunConfig) -> Self {
        ReportMeta {
            tool: "bgwp",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            seed: None,
            reps: None,
            rng_scheme: None,
            method: None,
            notes: Vec::new(),
        }
    }

    fn csv_header(&self, out: &mut String) {
        let _ = writeln!(out, "# tool,{}", self.tool);
        let _ = writeln!(out, "# version,{}", self.version);
        let _ = writeln!(out, "# command,{}", self.command);
        let _ = writeln!(
            out,
            "# config,{}",
            serde_json::to_string(&self.config).expect("config serializes")
        );
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed,{seed}");
        }
        if let Some(reps) = self.reps {
            let _ = writeln!(out, "# reps,{reps}");
        }
        if let Some(scheme) = self.rng_scheme {
            let _ = writeln!(out, "# rng_scheme,{scheme}");
        }
        if let Some(method) = self.method {
            let _ = writeln!(out, "# method,{method}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "# note,{note}");
        }
    }
}

/// Which matrix builder backs the chain bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMethod {
    Exact,
    Mc,
}

impl ChainMethod {
    fn label(self) -> &'static str {
        match self {
            ChainMethod::Exact => "exact",
            ChainMethod::Mc => "mc",
        }
    }
}

impl std::str::FromStr for ChainMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ChainMethod::Exact),
            "mc" => Ok(ChainMethod::Mc),
            other => Err(Error::Config(format!("unknown method '{other}', expected exact|mc"))),
        }
    }
}

pub struct BoundsRequest {
    pub config: RunConfig,
    pub n_max: u32,
    /// Include truncated-chain bounds at this cap.
    pub chain_cap: Option<usize>,
    pub method: ChainMethod,
    /// Replicates per matrix row when `method` is Monte Carlo.
    pub reps: u64,
    pub seed: u64,
    /// Force the mean section; errors if `initial < 3`. Without the flag
    /// the mean appears automatically whenever `initial >= 3`.
    pub want_mean: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundsRow {
    pub n: u32,
    /// Upper-envelope extinction cdf (slowest to die).
    pub female_line_cdf: f64,
    /// Lower-envelope extinction cdf (fastest to die).
    pub sibling_mated_cdf: f64,
    pub tail_lower: f64,
    pub tail_upper: f64,
    pub tail_raw_lower: f64,
    pub tail_raw_upper: f64,
    pub tail_gap: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChainRow {
    pub n: u32,
    pub g_hat: f64,
    pub g_tilde: f64,
    pub gap: f64,
    pub eps_hat: Option<f64>,
    pub eps_tilde: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSection {
    pub cap: usize,
    pub method: RowMethod,
    /// Monte Carlo rows bound the estimated chain, not the exact process.
    pub mc_estimated: bool,
    pub rows: Vec<ChainRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub meta: ReportMeta,
    pub i: u64,
    pub rate: GrowthRate,
    pub constants: AssociatedConstants,
    pub rows: Vec<BoundsRow>,
    pub mean: Option<MeanBound>,
    pub chain: Option<ChainSection>,
}

/// Per-`n` analytic envelopes and tail bounds, the mean interval when
/// available, and optionally certified truncated-chain bounds.
pub fn cmd_bounds(req: &BoundsRequest) -> Result<BoundsReport> {
    let spec = req.config.to_spec()?;
    let i = spec.initial;
    let constants = AssociatedConstants::from_spec(&spec)?;
    if constants.mu_f >= 1.0 {
        return Err(Error::OutOfScope {
            quantity: "female-line offspring mean",
            value: constants.mu_f,
        });
    }
    let rate = growth_rate(&spec);

    let mut meta = ReportMeta::new("bounds", req.config.clone());
    if matches!(spec.rule, MatingRule::Identity) {
        meta.notes.push(
            "identity mating: the process is single-sex, both envelopes coincide with it"
                .into(),
        );
    }

    let sibling = spec.law.mated_sibling_law(&spec.rule)?;
    let rows = (0..=req.n_max)
        .map(|n| {
            let tb = bgwp_tail_bounds(&spec, i, n)?;
            Ok(BoundsRow {
                n,
                female_line_cdf: pgf_extinction_cdf(|x| spec.law.female_pgf(x), i, n),
                sibling_mated_cdf: pgf_extinction_cdf(|x| sibling.pgf(x), i, n),
                tail_lower: tb.lower,
                tail_upper: tb.upper,
                tail_raw_lower: tb.raw_lower,
                tail_raw_upper: tb.raw_upper,
                tail_gap: tb.gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mean = if req.want_mean || i >= 3 {
        Some(constants.mean_bound(i)?)
    } else {
        meta.notes.push(format!(
            "mean bounds omitted: they require initial >= 3, this run has initial = {i}"
        ));
        None
    };

    let chain = match req.chain_cap {
        None => None,
        Some(cap) => {
            let matrix = match req.method {
                ChainMethod::Exact => transition_matrix_exact(&spec, cap)?,
                ChainMethod::Mc => {
                    meta.seed = Some(req.seed);
                    meta.reps = Some(req.reps);
                    meta.rng_scheme = Some(RNG_SCHEME);
                    transition_matrix_mc(&spec, cap, req.reps, req.seed)?
                }
            };
            meta.method = Some(req.method.label());
            let cert_rate = (rate.value > 0.0 && rate.value < 1.0).then_some(rate.value);
            let table = ChainBoundTable::compute(&matrix, req.n_max, cert_rate)?;
            if table.mc_estimated() {
                meta.notes.push(
                    "chain rows are Monte Carlo estimates; bounds describe the estimated \
                     chain, not the exact process"
                        .into(),
                );
            }
            if (i as usize) > cap {
                return Err(Error::InvalidParameter(format!(
                    "chain cap {cap} is below the initial population {i}"
                )));
            }
            let rows = (0..=req.n_max)
                .map(|n| {
                    let cert = table.certificate(i, n)?;
                    Ok(ChainRow {
                        n,
                        g_hat: table.g_hat_at(i, n)?,
                        g_tilde: table.g_tilde_at(i, n)?,
                        gap: table.gap_at(i, n)?,
                        eps_hat: cert.map(|c| c.eps_hat),
                        eps_tilde: cert.map(|c| c.eps_tilde),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Some(ChainSection {
                cap,
                method: matrix.method,
                mc_estimated: table.mc_estimated(),
                rows,
            })
        }
    };

    Ok(BoundsReport { meta, i, rate, constants, rows, mean, chain })
}

impl BoundsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        self.meta.csv_header(&mut out);
        let _ = writeln!(out, "# initial,{}", self.i);
        let _ = writeln!(out, "# growth_rate,{:.6}", self.rate.value);
        if let Some(mean) = &self.mean {
            let _ = writeln!(out, "# mean_raw_lower,{:.6}", mean.raw_lower);
            let _ = writeln!(out, "# mean_lower,{:.6}", mean.lower);
            let _ = writeln!(out, "# mean_upper,{:.6}", mean.upper);
        }
        let mut header = String::from(
            "n,female_line_cdf,sibling_mated_cdf,tail_lower,tail_upper,\
             tail_raw_lower,tail_raw_upper,tail_gap",
        );
        if let Some(chain) = &self.chain {
            let _ = writeln!(out, "# chain_cap,{}", chain.cap);
            header.push_str(",g_hat,g_tilde,chain_gap,eps_hat,eps_tilde");
        }
        let _ = writeln!(out, "{header}");
        for (idx, row) in self.rows.iter().enumerate() {
            let _ = write!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                row.n,
                row.female_line_cdf,
                row.sibling_mated_cdf,
                row.tail_lower,
                row.tail_upper,
                row.tail_raw_lower,
                row.tail_raw_upper,
                row.tail_gap
            );
            if let Some(chain) = &self.chain {
                let c = &chain.rows[idx];
                let _ = write!(out, ",{:.6},{:.6},{:.6}", c.g_hat, c.g_tilde, c.gap);
                match (c.eps_hat, c.eps_tilde) {
                    (Some(h), Some(t)) => {
                        let _ = write!(out, ",{h:.6},{t:.6}");
                    }
                    _ => out.push_str(",,"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub struct Table1Request {
    pub alpha: f64,
    pub cap: usize,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table1Cell {
    pub i: u64,
    pub n: u32,
    pub female_line_cdf: f64,
    pub chain_lower_exact: f64,
    pub chain_upper_exact: f64,
    pub chain_lower_mc: f64,
    pub chain_upper_mc: f64,
    pub sibling_mated_cdf: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub meta: ReportMeta,
    pub alpha: f64,
    pub cap: usize,
    pub cells: Vec<Table1Cell>,
}

/// The comparison grid `i in {2, 5, 10} x n in {2, 5, 7, 10}`: envelope
/// cdfs against truncated-chain bounds from exact and from Monte Carlo
/// transition rows.
pub fn cmd_table1(req: &Table1Request) -> Result<Table1Report> {
    let config = RunConfig::sex_multinomial(req.alpha, 1);
    let spec = config.to_spec()?;
    let rate = growth_rate(&spec);
    if rate.value >= 1.0 {
        return Err(Error::OutOfScope { quantity: "growth rate", value: rate.value });
    }
    if req.cap < 10 {
        return Err(Error::InvalidParameter(format!(
            "cap {} cannot hold the grid's largest initial population 10",
            req.cap
        )));
    }
    let mut meta = ReportMeta::new("table1", config);
    meta.seed = Some(req.seed);
    meta.reps = Some(req.reps);
    meta.rng_scheme = Some(RNG_SCHEME);
    meta.method = Some("exact+mc");

    let sibling = spec.law.mated_sibling_law(&spec.rule)?;
    let exact = ChainBoundTable::compute(
        &transition_matrix_exact(&spec, req.cap)?,
        10,
        Some(rate.value),
    )?;
    let mc = ChainBoundTable::compute(
        &transition_matrix_mc(&spec, req.cap, req.reps, req.seed)?,
        10,
        Some(rate.value),
    )?;

    let mut cells = Vec::with_capacity(12);
    for i in [2u64, 5, 10] {
        for n in [2u32, 5, 7, 10] {
            cells.push(Table1Cell {
                i,
                n,
                female_line_cdf: pgf_extinction_cdf(|x| spec.law.female_pgf(x), i, n),
                chain_lower_exact: exact.g_hat_at(i, n)?,
                chain_upper_exact: exact.g_tilde_at(i, n)?,
                chain_lower_mc: mc.g_hat_at(i, n)?,
                chain_upper_mc: mc.g_tilde_at(i, n)?,
                sibling_mated_cdf: pgf_extinction_cdf(|x| sibling.pgf(x), i, n),
            });
        }
    }
    Ok(Table1Report { meta, alpha: req.alpha, cap: req.cap, cells })
}

impl Table1Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        self.meta.csv_header(&mut out);
        let _ = writeln!(out, "# alpha,{:.6}", self.alpha);
        let _ = writeln!(out, "# cap,{}", self.cap);
        let _ = writeln!(
            out,
            "i,n,female_line_cdf,chain_lower_exact,chain_upper_exact,\
             chain_lower_mc,chain_upper_mc,sibling_mated_cdf"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                c.i,
                c.n,
                c.female_line_cdf,
                c.chain_lower_exact,
                c.chain_upper_exact,
                c.chain_lower_mc,
                c.chain_upper_mc,
                c.sibling_mated_cdf
            );
        }
        out
    }
}

pub struct SimulateRequest {
    pub config: RunConfig,
    pub n_max: u32,
    pub reps: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimulateRow {
    pub n: u32,
    pub empirical_cdf: f64,
    pub std_err: f64,
    pub female_line_cdf: f64,
    pub sibling_mated_cdf: f64,
    /// Analytic bounds on the tail `P(T > n)`; absent outside the
    /// subcritical regime.
    pub tail_lower: Option<f64>,
    pub tail_upper: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    pub meta: ReportMeta,
    pub i: u64,
    pub rate: GrowthRate,
    pub rows: Vec<SimulateRow>,
    pub censored: u64,
    /// Sample mean over an extended horizon chosen so the censored tail is
    /// negligible; absent when the process is not subcritical.
    pub mean: Option<MeanEstimate>,
}

/// Deterministic Monte Carlo estimate of the extinction-time cdf, with
/// envelope and bound columns for comparison, plus the sample mean.
pub fn cmd_simulate(req: &SimulateRequest) -> Result<SimulateReport> {
    let spec = req.config.to_spec()?;
    let i = spec.initial;
    let rate = growth_rate(&spec);
    let mut meta = ReportMeta::new("simulate", req.config.clone());
    meta.seed = Some(req.seed);
    meta.reps = Some(req.reps);
    meta.rng_scheme = Some(RNG_SCHEME);

    let empirical = empirical_cdf(&spec, req.n_max, req.reps, req.seed);
    let constants = AssociatedConstants::from_spec(&spec)?;
    let subcritical = constants.mu_f < 1.0 && constants.mu_f > 0.0;
    if !subcritical {
        meta.notes.push(format!(
            "analytic tail bounds omitted: female-line mean {} is outside (0, 1)",
            constants.mu_f
        ));
    }
    let sibling = spec.law.mated_sibling_law(&spec.rule)?;
    let rows = (0..=req.n_max)
        .map(|n| {
            let tb = if subcritical {
                Some(constants.tail_bound(i, n)?)
            } else {
                None
            };
            Ok(SimulateRow {
                n,
                empirical_cdf: empirical.cdf[n as usize],
                std_err: empirical.std_err[n as usize],
                female_line_cdf: pgf_extinction_cdf(|x| spec.law.female_pgf(x), i, n),
                sibling_mated_cdf: pgf_extinction_cdf(|x| sibling.pgf(x), i, n),
                tail_lower: tb.map(|t| t.lower),
                tail_upper: tb.map(|t| t.upper),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // same master seed as the cdf run: replicate j extends the same
    // trajectory past n_max instead of drawing a fresh one
    let mean = match default_horizon(i, rate.value) {
        Some(horizon) => Some(empirical_mean(&spec, req.reps, req.seed, horizon)?),
        None => {
            meta.notes.push(format!(
                "mean omitted: no finite default horizon for growth rate {}",
                rate.value
            ));
            None
        }
    };

    Ok(SimulateReport { meta, i, rate, rows, censored: empirical.censored, mean })
}

impl SimulateReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        self.meta.csv_header(&mut out);
        let _ = writeln!(out, "# initial,{}", self.i);
        let _ = writeln!(out, "# growth_rate,{:.6}", self.rate.value);
        let _ = writeln!(out, "# censored,{}", self.censored);
        if let Some(mean) = &self.mean {
            let _ = writeln!(out, "# mean,{:.6}", mean.mean);
            let _ = writeln!(out, "# mean_std_err,{:.6}", mean.std_err);
            let _ = writeln!(out, "# mean_horizon,{}", mean.horizon);
            let _ = writeln!(out, "# mean_censored,{}", mean.censored);
        }
        let _ = writeln!(
            out,
            "n,empirical_cdf,std_err,female_line_cdf,sibling_mated_cdf,tail_lower,tail_upper"
        );
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6}",
                r.n, r.empirical_cdf, r.std_err, r.female_line_cdf, r.sibling_mated_cdf
            );
            match (r.tail_lower, r.tail_upper) {
                (Some(lo), Some(up)) => {
                    let _ = writeln!(out, ",{lo:.6},{up:.6}");
                }
                _ => out.push_str(",,\n"),
            }
        }
        out
    }
}

pub struct CheckRequest {
    pub config: RunConfig,
    /// Exhaustive grid bound for the property checks.
    pub cap: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub meta: ReportMeta,
    pub rule: MatingRule,
    pub superadditive: PropertyReport,
    pub female_dominated: PropertyReport,
    pub all_hold: bool,
}

/// Certify the configured mating rule's structural properties on a grid.
pub fn cmd_check(req: &CheckRequest) -> Result<CheckReport> {
    let spec = req.config.to_spec()?;
    let meta = ReportMeta::new("check", req.config.clone());
    let superadditive = spec.rule.check_superadditive(req.cap);
    let female_dominated = spec.rule.check_female_dominated(req.cap);
    let all_hold = superadditive.holds && female_dominated.holds;
    Ok(CheckReport { meta, rule: spec.rule, superadditive, female_dominated, all_hold })
}

impl CheckReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        self.meta.csv_header(&mut out);
        let _ = writeln!(out, "property,holds,analytic,cap,counterexample");
        for report in [&self.superadditive, &self.female_dominated] {
            let counterexample = report
                .counterexample
                .map(|c| format!("{c:?}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{:?},{},{},{},{}",
                report.property, report.holds, report.analytic, report.cap, counterexample
            );
        }
        out
    }
}

/// Output encoding for a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format '{other}', expected csv|json"))),
        }
    }
}

/// Pretty JSON with a trailing newline. Floats use serde_json's shortest
/// round-trip encoding, so every value parses back bit-identically.
pub fn render_json<T: Serialize>(report: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Write to `out`, or stdout when no path is given.
pub fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Process exit code for an error: 3 for out-of-scope models, 2 for
/// anything else (validation, config, I/O).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::OutOfScope { .. } => 3,
        _ => 2,
    }
}
