//! Command-line surface: `bounds`, `verify-trees` and `grt-table`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::cluster::{cluster_report, ClusterError, ClusterReport, PsiView};
use crate::formal_series::{lagrange_inverse, rat, ratio, Rational, Series};
use crate::potentials::{
    compute_vertex_coefficients, parse_potential_toml, McSettings, PairPotential, PotentialConfig, PotentialError,
    PotentialKind, PotentialParameters, Provenance, PsiMode, VertexCoefficients,
};
use crate::trees::{
    check_faithfulness, classify_splittable, enumerate_rooted_trees, truncated_weight_direct,
    truncated_weight_scheme, verify_partition_scheme_with_rule, PenroseRule, TreeError, WeightMatrix,
};
use crate::virial::{
    grt_table, m_star_with, t_pen1_series, tree_sum_degrees, tree_sum_functional, virial_from_cluster_bell,
    virial_from_cluster_lagrange, virial_report, VirialError, VirialReport, GRT_DEFAULT_TERMS,
};

pub const SCHEMA: &str = "virial-bounds/1";
pub const DEFAULT_ORDER: usize = 14;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const DEFAULT_MC_ORDER: usize = 5;
pub const VERIFY_MAX: usize = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<PotentialError> for CliError {
    fn from(e: PotentialError) -> Self {
        match e {
            PotentialError::DegenerateSampler | PotentialError::Unavailable(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<VirialError> for CliError {
    fn from(e: VirialError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "virial-bounds", version, about = "Convergence-radius bounds for cluster and virial expansions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster and virial radius bounds for one potential.
    Bounds(BoundsArgs),
    /// Run the tree and formal-series oracle suites.
    VerifyTrees(VerifyArgs),
    /// GRT radii for power-law potentials, exponents 4 to 8.
    GrtTable(TableArgs),
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !(v >= 1.0) || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("'{s}' is not a positive integer"));
    }
    Ok(v as u64)
}

#[derive(Debug, Clone, Default, Args)]
pub struct BoundsArgs {
    /// TOML run configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// hard-sphere, power-law, tabulated or ideal.
    #[arg(long)]
    pub potential: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Hard-sphere exclusion distance.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Power-law exponent.
    #[arg(long = "exp")]
    pub exponent: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// CSV table (r, phi) for tabulated potentials.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Truncation order N of the vertex sum.
    #[arg(long)]
    pub order: Option<usize>,
    /// Monte Carlo samples per g(n), e.g. 1e6.
    #[arg(long, value_parser = parse_count)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Highest n estimated by Monte Carlo.
    #[arg(long)]
    pub mc_order: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Fugacity |z| at which to report the fixed point μ_z.
    #[arg(long)]
    pub fugacity: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Omit point estimates; report certified quantities only.
    #[arg(long)]
    pub certified_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    OmitSameGeneration,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long = "n", default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, default_value_t = GRT_DEFAULT_TERMS)]
    pub terms: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum CountValue {
    Int(u64),
    Float(f64),
    Text(String),
}

impl CountValue {
    fn get(&self) -> Result<u64, String> {
        match self {
            CountValue::Int(v) => parse_count(&v.to_string()),
            CountValue::Float(v) => parse_count(&v.to_string()),
            CountValue::Text(s) => parse_count(s),
        }
    }
}

/// Run configuration as read from TOML.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialConfig>,
    pub order: Option<usize>,
    samples: Option<CountValue>,
    pub seed: Option<u64>,
    pub mc_order: Option<usize>,
    pub workers: Option<usize>,
    pub fugacity: Option<f64>,
    pub format: Option<OutputFormat>,
    pub certified_only: Option<bool>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Fully resolved settings: flags over config file over defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub potential: PotentialConfig,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
    pub order: usize,
    pub samples: u64,
    pub seed: Option<u64>,
    pub mc_order: usize,
    pub workers: usize,
    pub fugacity: Option<f64>,
    pub format: OutputFormat,
    pub certified_only: bool,
}

impl RunSettings {
    pub fn resolve(args: &BoundsArgs) -> Result<Self, CliError> {
        let (file, base_dir) = match &args.config {
            Some(path) => (RunConfig::load(path)?, path.parent().map(Path::to_path_buf)),
            None => (RunConfig::default(), None),
        };
        let flags = PotentialConfig {
            kind: args.potential.clone(),
            beta: args.beta,
            dimension: args.dim,
            parameters: PotentialParameters {
                radius: args.radius,
                epsilon: args.epsilon,
                sigma: args.sigma,
                exponent: args.exponent,
                table: args.table.clone(),
            },
        };
        let potential = file.potential.clone().unwrap_or_default().overlay(&flags);
        let samples = match (args.samples, &file.samples) {
            (Some(s), _) => s,
            (None, Some(v)) => v.get().map_err(CliError::Config)?,
            (None, None) => DEFAULT_SAMPLES,
        };
        // table paths given on the command line are relative to the working directory
        let base_dir = if args.table.is_some() { None } else { base_dir };
        let settings = RunSettings {
            potential,
            base_dir,
            order: args.order.or(file.order).unwrap_or(DEFAULT_ORDER),
            samples,
            seed: args.seed.or(file.seed),
            mc_order: args.mc_order.or(file.mc_order).unwrap_or(DEFAULT_MC_ORDER),
            workers: args.workers.or(file.workers).unwrap_or(1),
            fugacity: args.fugacity.or(file.fugacity),
            format: args.format.or(file.format).unwrap_or(OutputFormat::Json),
            certified_only: args.certified_only || file.certified_only.unwrap_or(false),
        };
        if settings.order < 2 {
            return Err(CliError::Config(format!("order must be at least 2, got {}", settings.order)));
        }
        if settings.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if settings.potential.kind.is_none() {
            return Err(CliError::Config("no potential given (use --potential or a config file)".into()));
        }
        Ok(settings)
    }
}

/// A length-like quantity in natural units (times C(β)) and absolute units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaled {
    Finite { natural: f64, absolute: f64 },
    Infinite,
}

impl Scaled {
    fn new(absolute: f64, c: f64) -> Self {
        Scaled::Finite { natural: absolute * c, absolute }
    }

    pub fn absolute(&self) -> Option<f64> {
        match self {
            Scaled::Finite { absolute, .. } => Some(*absolute),
            Scaled::Infinite => None,
        }
    }

    pub fn natural(&self) -> Option<f64> {
        match self {
            Scaled::Finite { natural, .. } => Some(*natural),
            Scaled::Infinite => None,
        }
    }
}

impl Serialize for Scaled {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Pair {
            natural: f64,
            absolute: f64,
        }
        match *self {
            Scaled::Finite { natural, absolute } => Pair { natural, absolute }.serialize(s),
            Scaled::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexRow {
    pub n: usize,
    /// g(n)/C^n used by certified bounds.
    pub upper_normalized: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate_normalized: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_err_normalized: Option<f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSection {
    pub r_classical: Scaled,
    pub r_star: Scaled,
    pub mu_star: Scaled,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_first_correction: Option<Scaled>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star_estimate: Option<Scaled>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_z: Option<Scaled>,
    pub penrose_upper_n2: Scaled,
    pub endpoint: bool,
    pub optimizer_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirialSection {
    pub m_star: Scaled,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_star_estimate: Option<Scaled>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_star_estimate: Option<Scaled>,
    pub r_grt: Scaled,
    pub r_lp_classical: Scaled,
    pub grt_tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialSummary {
    #[serde(flatten)]
    pub kind: PotentialKindSummary,
    pub dimension: usize,
    pub beta: f64,
    pub c_beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKindSummary {
    HardSphere { radius: f64 },
    PowerLaw { epsilon: f64, sigma: f64, exponent: f64 },
    Tabulated { nodes: usize },
    Ideal,
}

impl From<&PotentialKind> for PotentialKindSummary {
    fn from(k: &PotentialKind) -> Self {
        match k {
            PotentialKind::HardSphere { radius } => Self::HardSphere { radius: *radius },
            PotentialKind::PowerLaw { epsilon, sigma, exponent } => {
                Self::PowerLaw { epsilon: *epsilon, sigma: *sigma, exponent: *exponent }
            }
            PotentialKind::Tabulated { table } => Self::Tabulated { nodes: table.nodes().len() },
            PotentialKind::Ideal => Self::Ideal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingsSummary {
    pub order: usize,
    pub samples: u64,
    pub seed: Option<u64>,
    pub mc_order: usize,
    pub workers: usize,
    pub certified_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub schema: &'static str,
    pub status: Status,
    pub potential: PotentialSummary,
    pub settings: SettingsSummary,
    pub vertex_coefficients: Vec<VertexRow>,
    pub cluster: ClusterSection,
    pub virial: VirialSection,
}

fn needs_monte_carlo(p: &PairPotential, order: usize, mc_order: usize) -> bool {
    let cap = p.degree_cap().unwrap_or(usize::MAX);
    (2..=order.min(mc_order).min(cap)).any(|n| matches!(p.g_exact(n), Err(PotentialError::Unavailable(_))))
}

fn vertex_rows(vc: &VertexCoefficients, certified_only: bool) -> Vec<VertexRow> {
    let c = vc.c_beta();
    (1..=vc.order())
        .filter_map(|n| vc.get(n))
        .map(|e| {
            let scale = c.powi(e.n as i32);
            VertexRow {
                n: e.n,
                upper_normalized: e.upper / scale,
                estimate_normalized: (!certified_only).then_some(e.value / scale),
                std_err_normalized: match e.provenance {
                    Provenance::MonteCarlo { std_err, .. } => Some(std_err / scale),
                    _ => None,
                },
                provenance: e.provenance,
            }
        })
        .collect()
}

fn cluster_section(rep: &ClusterReport) -> ClusterSection {
    let c = rep.c_beta;
    ClusterSection {
        r_classical: Scaled::new(rep.r_classical, c),
        r_star: Scaled::new(rep.r_star, c),
        mu_star: Scaled::new(rep.mu_star, c),
        r_first_correction: rep.r_first_correction.map(|f| Scaled::new(f.r2, c)),
        r_star_estimate: rep.r_star_estimate.map(|r| Scaled::new(r, c)),
        mu_z: rep.mu_z.as_ref().map(|m| Scaled::new(m.mu, c)),
        penrose_upper_n2: Scaled::new(rep.penrose_upper[0].radius, c),
        endpoint: rep.metadata.endpoint,
        optimizer_evaluations: rep.metadata.optimizer_evaluations,
    }
}

fn virial_section(rep: &VirialReport, m_est: Option<f64>, c: f64) -> VirialSection {
    VirialSection {
        m_star: Scaled::new(rep.m_star, c),
        m_star_estimate: m_est.map(|m| Scaled::new(m, c)),
        r_star_estimate: rep.r_star_estimate.map(|r| Scaled::new(r.value, c)),
        r_grt: Scaled::new(rep.r_grt, c),
        r_lp_classical: Scaled::new(rep.r_lp_classical, c),
        grt_tail_bound: rep.metadata.grt_tail_bound,
    }
}

fn settings_summary(s: &RunSettings) -> SettingsSummary {
    SettingsSummary {
        order: s.order,
        samples: s.samples,
        seed: s.seed,
        mc_order: s.mc_order,
        workers: s.workers,
        certified_only: s.certified_only,
    }
}

fn trivial_report(p: &PairPotential, s: &RunSettings) -> BoundsReport {
    BoundsReport {
        schema: SCHEMA,
        status: Status::Trivial,
        potential: PotentialSummary { kind: (&p.kind).into(), dimension: p.dim, beta: p.beta, c_beta: 0.0 },
        settings: settings_summary(s),
        vertex_coefficients: Vec::new(),
        cluster: ClusterSection {
            r_classical: Scaled::Infinite,
            r_star: Scaled::Infinite,
            mu_star: Scaled::Infinite,
            r_first_correction: None,
            r_star_estimate: None,
            mu_z: None,
            penrose_upper_n2: Scaled::Infinite,
            endpoint: false,
            optimizer_evaluations: 0,
        },
        virial: VirialSection {
            m_star: Scaled::Infinite,
            m_star_estimate: None,
            r_star_estimate: None,
            r_grt: Scaled::Infinite,
            r_lp_classical: Scaled::Infinite,
            grt_tail_bound: 0.0,
        },
    }
}

/// Full bound pipeline for one potential.
pub fn cmd_bounds(s: &RunSettings) -> Result<BoundsReport, CliError> {
    let p = s.potential.build(s.base_dir.as_deref())?;
    if matches!(p.kind, PotentialKind::Ideal) {
        return Ok(trivial_report(&p, s));
    }
    let mc_needed = needs_monte_carlo(&p, s.order, s.mc_order);
    let seed = match (mc_needed, s.seed) {
        (true, None) => return Err(CliError::Config("a seed is required when Monte Carlo estimates are used".into())),
        (_, seed) => seed.unwrap_or(0),
    };
    let mc = McSettings { samples: s.samples, seed, workers: s.workers, max_order: s.mc_order };
    let vc = compute_vertex_coefficients(&p, s.order, &mc)?;
    let c = vc.c_beta();
    let with_estimates = !s.certified_only;
    let cluster = cluster_report(&vc, s.fugacity, with_estimates)?;
    let virial = virial_report(&vc, s.order, with_estimates)?;
    let m_est = if with_estimates {
        Some(m_star_with(&PsiView::new(&vc, PsiMode::Lower))?.m_star)
    } else {
        None
    };
    Ok(BoundsReport {
        schema: SCHEMA,
        status: Status::Ok,
        potential: PotentialSummary { kind: (&p.kind).into(), dimension: p.dim, beta: p.beta, c_beta: c },
        settings: settings_summary(s),
        vertex_coefficients: vertex_rows(&vc, s.certified_only),
        cluster: cluster_section(&cluster),
        virial: virial_section(&virial, m_est, c),
    })
}

fn flat_rows(r: &BoundsReport) -> Vec<(String, Scaled)> {
    let mut rows = vec![
        ("cluster.r_classical".to_string(), r.cluster.r_classical),
        ("cluster.r_star".into(), r.cluster.r_star),
        ("cluster.mu_star".into(), r.cluster.mu_star),
    ];
    let opt = [
        ("cluster.r_first_correction", r.cluster.r_first_correction),
        ("cluster.r_star_estimate", r.cluster.r_star_estimate),
        ("cluster.mu_z", r.cluster.mu_z),
    ];
    rows.extend(opt.iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    rows.push(("cluster.penrose_upper_n2".into(), r.cluster.penrose_upper_n2));
    rows.push(("virial.m_star".into(), r.virial.m_star));
    let opt = [("virial.m_star_estimate", r.virial.m_star_estimate), ("virial.r_star_estimate", r.virial.r_star_estimate)];
    rows.extend(opt.iter().filter_map(|(k, v)| v.map(|v| (k.to_string(), v))));
    rows.push(("virial.r_grt".into(), r.virial.r_grt));
    rows.push(("virial.r_lp_classical".into(), r.virial.r_lp_classical));
    rows
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "infinite".to_string(), |x| format!("{x}"))
}

pub fn render_bounds(r: &BoundsReport, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(r).map(|s| s + "\n").map_err(|e| CliError::Numerical(e.to_string()))
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Numerical(e.to_string());
            w.write_record(["quantity", "natural", "absolute"]).map_err(io)?;
            for (k, v) in flat_rows(r) {
                w.write_record([k, cell(v.natural()), cell(v.absolute())]).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "status: {:?}", r.status);
            let _ = writeln!(out, "C(beta) = {}", r.potential.c_beta);
            for row in &r.vertex_coefficients {
                let _ = writeln!(out, "g({})/C^{} <= {}", row.n, row.n, row.upper_normalized);
            }
            for (k, v) in flat_rows(r) {
                match v {
                    Scaled::Finite { natural, absolute } => {
                        let _ = writeln!(out, "{k}: {absolute} ({natural} in units of 1/C)");
                    }
                    Scaled::Infinite => {
                        let _ = writeln!(out, "{k}: infinite");
                    }
                }
            }
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub n: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub n_max: usize,
    pub rule: &'static str,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

fn pow_usize(base: usize, exp: usize) -> BigInt {
    BigInt::from(base).pow(exp as u32)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.random_range(-9..=9), rng.random_range(1..=7))
}

/// Oracle suites on trees of size ≤ n_max.
pub fn cmd_verify(n_max: usize, rule: PenroseRule) -> Result<VerifyReport, CliError> {
    if n_max == 0 || n_max > VERIFY_MAX {
        return Err(CliError::Config(format!("n must be between 1 and {VERIFY_MAX}, got {n_max}")));
    }
    let tree_err = |e: TreeError| CliError::Numerical(e.to_string());
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for n in 1..=n_max {
        let count = enumerate_rooted_trees(n).map_err(tree_err)?.len();
        let expect = pow_usize(n + 1, n - 1);
        checks.push(CheckResult {
            name: "cayley_count",
            n,
            passed: BigInt::from(count) == expect,
            detail: format!("{count} trees, expected {expect}"),
        });
        if n <= 5 {
            let sc = verify_partition_scheme_with_rule(n, rule).map_err(tree_err)?;
            checks.push(CheckResult {
                name: "partition_scheme",
                n,
                passed: sc.passes(),
                detail: format!(
                    "{} connected graphs, {} uncovered, {} multiply covered",
                    sc.connected_graphs, sc.uncovered, sc.multiply_covered
                ),
            });
            let faithful = check_faithfulness(n);
            checks.push(CheckResult {
                name: "concatenation_faithful",
                n,
                passed: faithful.is_ok(),
                detail: match faithful {
                    Ok(k) => format!("{k} splittings checked"),
                    Err(e) => e,
                },
            });
            let w = WeightMatrix::from_fn(n + 1, |_, _| random_rational(&mut rng), Rational::zero());
            let direct = truncated_weight_direct(&w).map_err(tree_err)?;
            let scheme = truncated_weight_scheme(&w).map_err(tree_err)?;
            checks.push(CheckResult {
                name: "truncated_weight_dual_path",
                n,
                passed: direct == scheme,
                detail: format!("direct {direct}, scheme {scheme}"),
            });
        }
        let classes = classify_splittable(n).map_err(tree_err)?;
        let unsplittable = classes.get(&1).copied().unwrap_or(0);
        let expect = pow_usize(n - 1, n - 1);
        checks.push(CheckResult {
            name: "unsplittable_count",
            n,
            passed: BigInt::from(unsplittable) == expect,
            detail: format!("{unsplittable} unsplittable trees, expected {expect}"),
        });
    }
    checks.extend(series_checks(n_max, &mut rng)?);
    let passed = checks.iter().all(|c| c.passed);
    let rule = match rule {
        PenroseRule::Standard => "standard",
        PenroseRule::OmitSameGeneration => "omit-same-generation",
    };
    Ok(VerifyReport { schema: SCHEMA, n_max, rule, passed, checks })
}

fn series_checks(n_max: usize, rng: &mut ChaCha8Rng) -> Result<Vec<CheckResult>, CliError> {
    let num = |e: VirialError| CliError::Numerical(e.to_string());
    let mut checks = Vec::new();
    let ones = vec![Rational::one(); n_max + 1];
    let f = tree_sum_functional(&ones, n_max).map_err(num)?;
    let d = tree_sum_degrees(&ones, n_max).map_err(num)?;
    checks.push(CheckResult {
        name: "tree_sum_dual_path",
        n: n_max,
        passed: f.coeffs() == d.coeffs(),
        detail: "functional equation vs degree sum, unit weights".into(),
    });
    let t = t_pen1_series(&f).map_err(num)?;
    let ok = (1..=n_max).all(|n| {
        let egf = t.coeff(n) * Rational::from_integer(crate::formal_series::factorial(n));
        egf == Rational::from_integer(pow_usize(n - 1, n - 1))
    });
    checks.push(CheckResult {
        name: "unsplittable_series",
        n: n_max,
        passed: ok,
        detail: "1 - 1/B with unit weights has EGF coefficients (n-1)^(n-1)".into(),
    });
    let b: Vec<Rational> = (0..n_max).map(|_| random_rational(rng)).collect();
    let mut ok = true;
    for n in 0..=n_max {
        ok &= virial_from_cluster_bell(&b, n).map_err(num)? == virial_from_cluster_lagrange(&b, n).map_err(num)?;
    }
    checks.push(CheckResult {
        name: "virial_dual_path",
        n: n_max,
        passed: ok,
        detail: "Bell polynomial vs Lagrange inversion".into(),
    });
    let order = n_max.max(2);
    let mut coeffs = vec![rat(0), rat(1)];
    coeffs.extend((2..=order).map(|_| random_rational(rng)));
    let s = Series::new(coeffs);
    let inv = lagrange_inverse(&s).map_err(|e| CliError::Numerical(e.to_string()))?;
    let round = s.compose(&inv).map_err(|e| CliError::Numerical(e.to_string()))?;
    checks.push(CheckResult {
        name: "lagrange_round_trip",
        n: order,
        passed: round == Series::x(order),
        detail: "b(b^{-1}(X)) = X".into(),
    });
    Ok(checks)
}

pub fn render_verify(r: &VerifyReport, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(r).map(|s| s + "\n").map_err(|e| CliError::Numerical(e.to_string()))
        }
        OutputFormat::Csv | OutputFormat::Text => {
            let mut out = String::new();
            for c in &r.checks {
                let _ = writeln!(out, "{} {} n={} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.n, c.detail);
            }
            let _ = writeln!(out, "{}", if r.passed { "all checks passed" } else { "some checks failed" });
            Ok(out)
        }
    }
}

pub fn cmd_grt_table(terms: usize, format: OutputFormat) -> Result<String, CliError> {
    let rows = grt_table(terms)?;
    match format {
        OutputFormat::Csv => {
            let mut out = String::from("exponent,c_beta,r_grt,r_num\n");
            for r in &rows {
                let _ = writeln!(out, "{},{:.6},{:.6},{:.4}", r.exponent, r.c1, r.r_grt, r.r_num);
            }
            Ok(out)
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Table<'a> {
                schema: &'static str,
                rows: &'a [crate::virial::GrtRow],
            }
            serde_json::to_string_pretty(&Table { schema: SCHEMA, rows: &rows })
                .map(|s| s + "\n")
                .map_err(|e| CliError::Numerical(e.to_string()))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            for r in &rows {
                let _ = writeln!(out, "n = {}: C(1) = {:.6}, R_GRT = {:.4}, R_Num = {:.4}", r.exponent, r.c1, r.r_grt, r.r_num);
            }
            Ok(out)
        }
    }
}

/// Text to print and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub exit_code: i32,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Bounds(args) => {
            let settings = RunSettings::resolve(args)?;
            let report = cmd_bounds(&settings)?;
            Ok(Outcome { output: render_bounds(&report, settings.format)?, exit_code: 0 })
        }
        Command::VerifyTrees(args) => {
            let rule = match args.inject_fault {
                Some(Fault::OmitSameGeneration) => PenroseRule::OmitSameGeneration,
                None => PenroseRule::Standard,
            };
            let report = cmd_verify(args.n_max, rule)?;
            let exit_code = if report.passed { 0 } else { 1 };
            Ok(Outcome { output: render_verify(&report, args.format)?, exit_code })
        }
        Command::GrtTable(args) => Ok(Outcome { output: cmd_grt_table(args.terms, args.format)?, exit_code: 0 }),
    }
}

/// Parses a potential-only TOML snippet into run settings with defaults.
pub fn settings_for(potential_toml: &str) -> Result<RunSettings, CliError> {
    let potential = parse_potential_toml(potential_toml)?;
    Ok(RunSettings {
        potential,
        base_dir: None,
        order: DEFAULT_ORDER,
        samples: DEFAULT_SAMPLES,
        seed: None,
        mc_order: DEFAULT_MC_ORDER,
        workers: 1,
        fugacity: None,
        format: OutputFormat::Json,
        certified_only: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("virial-bounds").chain(list.iter().copied())).unwrap()
    }

    fn bounds(list: &[&str]) -> Result<BoundsReport, CliError> {
        match args(list).command {
            Command::Bounds(a) => cmd_bounds(&RunSettings::resolve(&a)?),
            _ => unreachable!(),
        }
    }

    #[test]
    fn hard_rods_report() {
        let r = bounds(&["bounds", "--potential", "hard-sphere", "--dim", "1", "--radius", "0.5"]).unwrap();
        assert!((r.potential.c_beta - 1.0).abs() < 1e-12);
        let rs = r.cluster.r_star.natural().unwrap();
        assert!((rs - 2f64.sqrt() / (1.0 + 2f64.sqrt())).abs() < 1e-9);
        assert!((r.virial.m_star.natural().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn ideal_is_trivial() {
        let r = bounds(&["bounds", "--potential", "ideal"]).unwrap();
        assert_eq!(r.status, Status::Trivial);
        let json = render_bounds(&r, OutputFormat::Json).unwrap();
        assert!(json.contains("\"r_star\": \"infinite\""));
    }

    #[test]
    fn seed_required_for_monte_carlo() {
        let e = bounds(&["bounds", "--potential", "power-law", "--exp", "6", "--samples", "1e3"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn config_errors() {
        let e = bounds(&["bounds", "--potential", "power-law", "--exp", "2", "--seed", "1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = bounds(&["bounds", "--potential", "hard-sphere", "--order", "1"]).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(Cli::try_parse_from(["virial-bounds", "bounds", "--samples", "1.5"]).is_err());
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
    }

    #[test]
    fn config_file_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "order = 6\nsamples = 2e3\nseed = 3\n[potential]\nkind = \"hard-sphere\"\ndimension = 2\n[potential.parameters]\nradius = 1.0\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let a = match args(&["bounds", "--config", p, "--dim", "1"]).command {
            Command::Bounds(a) => a,
            _ => unreachable!(),
        };
        let s = RunSettings::resolve(&a).unwrap();
        assert_eq!(s.order, 6);
        assert_eq!(s.samples, 2000);
        assert_eq!(s.potential.dimension, Some(1));
        assert_eq!(s.potential.parameters.radius, Some(1.0));
    }

    #[test]
    fn verify_small() {
        let r = cmd_verify(3, PenroseRule::Standard).unwrap();
        assert!(r.passed, "{r:?}");
        let r = cmd_verify(3, PenroseRule::OmitSameGeneration).unwrap();
        assert!(!r.passed);
        assert!(cmd_verify(8, PenroseRule::Standard).is_err());
    }

    #[test]
    fn grt_csv() {
        let out = cmd_grt_table(GRT_DEFAULT_TERMS, OutputFormat::Csv).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines[3].starts_with("6,7.424437,0.03124"), "{}", lines[3]);
    }

    #[test]
    fn settings_from_snippet() {
        let s = settings_for("kind = \"hard-sphere\"\ndimension = 1\n[parameters]\nradius = 0.5\n").unwrap();
        let r = cmd_bounds(&s).unwrap();
        assert_eq!(r.schema, SCHEMA);
    }
}
