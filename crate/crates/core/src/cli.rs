//! Command-line front end behind the `dht-exp` binary.
//!
//! Each subcommand reads a JSON model file and writes CSV, preceded by a
//! `#` header that records the tool version, every effective parameter and
//! the SHA-256 of the model file. Numbers carry 9 significant digits.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dht::{
    compare_schemes, jhtcc_uncoded, jhtcc_uncoded_opt, shtcc_tad, shtcc_tad_stein, shtcc_tai, shtcc_tai_stein,
    Achiever, BoundReport, BoundSearch, CompareOptions, Feasibility, SourceModel, UncodedDesign,
};
use crate::error::{Error, Result};
use crate::optimize::SimplexSearch;
use crate::prob::{kl, Channel, JointPmf, Pmf};
use crate::regions::{channel_max_divergence, maximize_channel_branch, rht_tradeoff, ChannelPairLaw, DirectPair, LawSearch};
use crate::simulate::{rht_prediction, simulate_rht, SimConfig, SimReport};

/// Tolerance on row sums of ingested matrices, checked in exact decimal.
pub const INGEST_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "dht-exp", version, about = "Error exponents for hypothesis testing over noisy channels")]
pub struct Cli {
    /// Worker threads (speed only; output is identical for any value).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact trade-off curve: direct, channel or remote testing.
    Region(RegionArgs),
    /// Achievable exponents of the separation and uncoded schemes.
    Bounds(BoundsArgs),
    /// Monte Carlo run of the remote two-codeword scheme.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON model file.
    pub model: PathBuf,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the rows as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegionKind {
    Direct,
    Channel,
    Rht,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[command(flatten)]
    pub io: OutputArgs,
    #[arg(long, value_enum, default_value = "rht")]
    pub kind: RegionKind,
    /// Pair-law lattice resolution.
    #[arg(long, default_value_t = 20)]
    pub grid: u32,
    /// Smallest pattern-search step.
    #[arg(long)]
    pub tol: Option<f64>,
    /// `start:stop:step` or a comma list; default is 20 points below the
    /// largest finite type-I exponent.
    #[arg(long)]
    pub kappa_grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Shtcc,
    JhtccUncoded,
    Both,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub io: OutputArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub scheme: Scheme,
    /// Outer lattice resolution.
    #[arg(long, default_value_t = 10)]
    pub grid: u32,
    /// Smallest step of every pattern search.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "0:0.01:0.001")]
    pub kappa_grid: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub io: OutputArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta1: f64,
    /// Strictly increasing blocklengths, comma list or `start:stop:step`.
    #[arg(long, default_value = "20,40,60,80,100")]
    pub n_grid: String,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Row-major pair law over channel inputs; defaults to a point mass on
    /// the most divergent row pair.
    #[arg(long)]
    pub law: Option<String>,
}

/// Model file layout. Probabilities are decimal strings.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub alphabets: Alphabets,
    pub p_uv: Vec<Vec<String>>,
    pub q_uv: Vec<Vec<String>>,
    pub channel: Vec<Vec<String>>,
    #[serde(default)]
    pub designs: Option<Designs>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Alphabets {
    pub u: Option<Vec<String>>,
    pub v: Option<Vec<String>>,
    pub x: Option<Vec<String>>,
    pub y: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Designs {
    /// Fixed uncoded design used instead of the search.
    pub uncoded: Option<UncodedFile>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UncodedFile {
    pub p_s: Vec<String>,
    /// `maps[s][u][x]`.
    pub maps: Vec<Vec<Vec<String>>>,
}

/// Parsed model.
#[derive(Debug, Clone)]
pub struct Model {
    pub source: SourceModel,
    pub channel: Channel,
    pub uncoded: Option<UncodedDesign>,
    pub digest: String,
}

impl Model {
    pub fn p_u(&self) -> Pmf {
        self.source.p_uv().row_marginal()
    }

    pub fn q_u(&self) -> Pmf {
        self.source.q_uv().row_marginal()
    }
}

/// Parses a non-negative decimal like `0.35` into units of `1e-30`.
fn parse_decimal(s: &str) -> Result<u128> {
    const SCALE: usize = 30;
    let bad = || Error::Parse(format!("{s:?} is not a non-negative decimal"));
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
        || frac.len() > SCALE
        || int.len() > 3
    {
        return Err(bad());
    }
    let int: u128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let padded = format!("{frac:0<SCALE$}");
    let frac: u128 = padded.parse().map_err(|_| bad())?;
    Ok(int * 10u128.pow(SCALE as u32) + frac)
}

/// Decimal strings to floats; the exact decimal sum must be 1 within
/// [`INGEST_TOL`]. The floats are renormalized.
fn parse_stochastic(cells: &[String], what: &str) -> Result<Vec<f64>> {
    let units = cells.iter().map(|c| parse_decimal(c)).collect::<Result<Vec<_>>>()?;
    let one = 10u128.pow(30);
    let tol = (INGEST_TOL * 1e30) as u128;
    let total: u128 = units.iter().sum();
    if total.abs_diff(one) > tol {
        return Err(Error::Input(format!("{what} sums to {}, not 1", total as f64 / one as f64)));
    }
    let v: Vec<f64> = cells.iter().map(|c| c.parse::<f64>().expect("validated decimal")).collect();
    let s: f64 = v.iter().sum();
    Ok(v.into_iter().map(|x| x / s).collect())
}

fn rectangular<T>(m: &[Vec<T>], what: &str) -> Result<(usize, usize)> {
    let cols = m.first().map_or(0, Vec::len);
    if m.is_empty() || cols == 0 || m.iter().any(|r| r.len() != cols) {
        return Err(Error::Input(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok((m.len(), cols))
}

fn labels(given: &Option<Vec<String>>, n: usize, what: &str) -> Result<Vec<String>> {
    match given {
        Some(l) if l.len() != n => Err(Error::AlphabetMismatch(format!("{what} has {} labels, matrix needs {n}", l.len()))),
        Some(l) => Ok(l.clone()),
        None => Ok((0..n).map(|i| i.to_string()).collect()),
    }
}

fn parse_joint(m: &[Vec<String>], alph: &Alphabets, what: &str) -> Result<JointPmf> {
    let (r, c) = rectangular(m, what)?;
    let flat: Vec<String> = m.iter().flatten().cloned().collect();
    JointPmf::new(labels(&alph.u, r, "u")?, labels(&alph.v, c, "v")?, parse_stochastic(&flat, what)?)
}

/// Parses and validates a model file's text.
pub fn parse_model(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let p = parse_joint(&file.p_uv, &file.alphabets, "p_uv")?;
    let q = parse_joint(&file.q_uv, &file.alphabets, "q_uv")?;
    if (p.nrows(), p.ncols()) != (q.nrows(), q.ncols()) {
        return Err(Error::AlphabetMismatch("p_uv and q_uv shapes differ".into()));
    }
    let (nx, ny) = rectangular(&file.channel, "channel")?;
    let rows = file
        .channel
        .iter()
        .enumerate()
        .map(|(i, r)| parse_stochastic(r, &format!("channel row {i}")))
        .collect::<Result<Vec<_>>>()?;
    let channel = Channel::new(labels(&file.alphabets.x, nx, "x")?, labels(&file.alphabets.y, ny, "y")?, rows)?;
    let uncoded = match file.designs.and_then(|d| d.uncoded) {
        None => None,
        Some(u) => Some(UncodedDesign {
            p_s: parse_stochastic(&u.p_s, "designs.uncoded.p_s")?,
            maps: u
                .maps
                .iter()
                .map(|m| m.iter().map(|row| parse_stochastic(row, "designs.uncoded map row")).collect())
                .collect::<Result<_>>()?,
        }),
    };
    Ok(Model { source: SourceModel::new(p, q)?, channel, uncoded, digest: sha256_hex(text.as_bytes()) })
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Nine significant digits, plain decimal where it reads well.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.8e}");
    let exp: i32 = s.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if (-5..9).contains(&exp) {
        format!("{x:.*}", (8 - exp) as usize)
    } else {
        s
    }
}

/// `start:stop:step` (inclusive) or a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Input(format!("grid {spec:?}: {what}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let v = if let [a, b, s] = spec.split(':').collect::<Vec<_>>()[..] {
        let (a, b, s) = (num(a)?, num(b)?, num(s)?);
        if !(s > 0.0) || b < a {
            return Err(bad("need start <= stop and step > 0"));
        }
        let count = ((b - a) / s + 1e-9).floor() as usize;
        (0..=count).map(|i| a + i as f64 * s).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(bad("empty or non-finite"));
    }
    Ok(v)
}

fn parse_usize_grid(spec: &str) -> Result<Vec<usize>> {
    parse_grid(spec)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as usize)
            } else {
                Err(Error::Input(format!("blocklength {x} is not a whole number")))
            }
        })
        .collect()
}

/// What every output file records about how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub input_sha256: String,
}

impl RunManifest {
    fn new(subcommand: &str, model: &Model) -> Self {
        RunManifest {
            tool: "dht-exp".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            params: BTreeMap::new(),
            input_sha256: model.digest.clone(),
        }
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.into(), value.to_string());
    }

    fn header_lines(&self) -> Vec<String> {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        vec![
            format!("# {} {}", self.tool, self.version),
            format!("# subcommand: {}", self.subcommand),
            format!("# params: {}", params.join(" ")),
            format!("# input_sha256: {}", self.input_sha256),
        ]
    }
}

/// A finished table: manifest, header, rows and trailing summary lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub manifest: RunManifest,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when the run finished but part of it failed (e.g. a fit).
    pub failure: Option<Error>,
}

impl Table {
    fn new(manifest: RunManifest, columns: Vec<&'static str>) -> Self {
        Table { manifest, columns, rows: Vec::new(), summary: Vec::new(), warnings: Vec::new(), failure: None }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.manifest.header_lines();
        out.push(self.columns.join(","));
        out.extend(self.rows.iter().map(|r| r.join(",")));
        out.extend(self.summary.iter().map(|s| format!("# {s}")));
        out.join("\n") + "\n"
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<BTreeMap<&str, &str>> =
            self.rows.iter().map(|r| self.columns.iter().copied().zip(r.iter().map(String::as_str)).collect()).collect();
        let doc = serde_json::json!({ "manifest": self.manifest, "rows": rows, "summary": self.summary });
        serde_json::to_string_pretty(&doc).expect("table serializes") + "\n"
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn search_with(resolution: u32, tol: Option<f64>) -> SimplexSearch {
    let mut s = SimplexSearch { resolution, ..SimplexSearch::default() };
    if let Some(t) = tol {
        s.min_step = t;
    }
    s
}

fn check_tol(tol: Option<f64>) -> Result<()> {
    match tol {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(Error::Input(format!("--tol {t} must lie in (0, 1)"))),
        _ => Ok(()),
    }
}

/// Points of `kappas` strictly below `sup`; warns about the rest.
fn below(kappas: Vec<f64>, sup: f64, warnings: &mut Vec<String>) -> Vec<f64> {
    let total = kappas.len();
    let kept: Vec<f64> = kappas.into_iter().filter(|&k| k < sup).collect();
    if kept.is_empty() {
        warnings.push(format!("empty positive boundary: no grid point lies below kappa_alpha = {}", fmt_num(sup)));
    } else if kept.len() < total {
        warnings.push(format!("{} grid points at or beyond kappa_alpha = {} skipped", total - kept.len(), fmt_num(sup)));
    }
    kept
}

pub fn cmd_region(args: &RegionArgs, model: &Model) -> Result<Table> {
    check_tol(args.tol)?;
    let mut m = RunManifest::new("region", model);
    m.set("kind", value_name(args.kind));
    m.set("grid", args.grid);
    m.set("tol", args.tol.map_or("default".into(), |t| t.to_string()));
    m.set("kappa_grid", args.kappa_grid.clone().unwrap_or_else(|| "auto".into()));
    let mut t = Table::new(m, vec!["kappa_alpha", "kappa_beta", "theta0", "theta1", "bound"]);
    let search: LawSearch = search_with(args.grid, args.tol);
    let (p_u, q_u, ch) = (model.p_u(), model.q_u(), &model.channel);

    let sup = match args.kind {
        RegionKind::Direct => DirectPair::new(&p_u, &q_u)?.interval().1,
        RegionKind::Channel => channel_max_divergence(ch)?.0,
        RegionKind::Rht => DirectPair::new(&p_u, &q_u)?.interval().1.min(channel_max_divergence(ch)?.0),
    };
    let grid = match &args.kappa_grid {
        Some(g) => parse_grid(g)?,
        None => (0..20).map(|i| sup * i as f64 / 20.0).collect(),
    };
    let grid = below(grid, sup, &mut t.warnings);
    let label = value_name(args.kind);
    for k in grid {
        let (kb, th0, th1) = match args.kind {
            RegionKind::Direct => {
                let pt = DirectPair::new(&p_u, &q_u)?.tradeoff_point(k);
                (pt.kappa_beta, Some(pt.theta0), None)
            }
            RegionKind::Channel => {
                let opt = maximize_channel_branch(ch, k, &search)?;
                (opt.kappa_beta, None, Some(opt.theta1))
            }
            RegionKind::Rht => {
                let pt = rht_tradeoff(&p_u, &q_u, ch, k, &search)?;
                (pt.kappa_beta, Some(pt.theta0), Some(pt.theta1))
            }
        };
        let opt = |x: Option<f64>| x.map_or(String::new(), fmt_num);
        t.rows.push(vec![fmt_num(k), fmt_num(kb), opt(th0), opt(th1), label.clone()]);
    }
    Ok(t)
}

fn bound_row(r: &BoundReport) -> Vec<String> {
    vec![fmt_num(r.kappa_alpha), r.bound.clone(), fmt_num(r.value), r.feasible.to_string(), r.achiever_digest()]
}

fn separation(model: &Model, k: f64, search: &BoundSearch) -> Result<BoundReport> {
    let (s, ch) = (&model.source, &model.channel);
    if s.is_tai() {
        if k == 0.0 {
            shtcc_tai_stein(s, ch, &search.outer)
        } else {
            shtcc_tai(s, ch, k, search)
        }
    } else if k == 0.0 {
        shtcc_tad_stein(s, ch, search)
    } else {
        shtcc_tad(s, ch, k, search)
    }
}

fn uncoded(model: &Model, k: f64, search: &BoundSearch) -> Result<BoundReport> {
    match &model.uncoded {
        Some(d) => Ok(BoundReport {
            bound: "jhtcc_uncoded".into(),
            kappa_alpha: k,
            value: jhtcc_uncoded(&model.source, &model.channel, k, d)?,
            feasible: true,
            flags: Feasibility { rate: true, special_message: true, expurgated: true },
            achiever: Achiever {
                time_sharing: (d.p_s.len() > 1).then(|| d.p_s.clone()),
                uncoded_maps: Some(d.maps.clone()),
                ..Achiever::default()
            },
            grid_resolution: 0,
        }),
        None => jhtcc_uncoded_opt(&model.source, &model.channel, k, 1, &search.outer),
    }
}

pub fn cmd_bounds(args: &BoundsArgs, model: &Model) -> Result<Table> {
    check_tol(args.tol)?;
    let mut m = RunManifest::new("bounds", model);
    m.set("scheme", value_name(args.scheme));
    m.set("grid", args.grid);
    m.set("tol", args.tol.map_or("default".into(), |t| t.to_string()));
    m.set("kappa_grid", &args.kappa_grid);
    let mut t = Table::new(m, vec!["kappa_alpha", "bound", "value", "feasible", "achiever_digest"]);
    let kappas = parse_grid(&args.kappa_grid)?;
    if kappas.iter().any(|&k| k < 0.0) {
        return Err(Error::Input("kappa_alpha must be non-negative".into()));
    }
    let mut search = BoundSearch::default().with_resolution(args.grid);
    if let Some(tol) = args.tol {
        search.outer.min_step = tol;
        search.ball.min_step = tol;
        search.design.min_step = tol;
    }
    let special = model.source.is_tai() || model.source.is_tad();
    let want_sep = match args.scheme {
        Scheme::Shtcc | Scheme::Both if special => true,
        Scheme::Shtcc => {
            return Err(Error::Input("the separation scheme needs a TAI or TAD model; use jhtcc-uncoded".into()));
        }
        Scheme::Both => {
            t.warnings.push("model is neither TAI nor TAD; separation rows omitted".into());
            false
        }
        Scheme::JhtccUncoded => false,
    };
    let want_unc = args.scheme != Scheme::Shtcc;
    for &k in &kappas {
        if want_unc {
            t.rows.push(bound_row(&uncoded(model, k, &search)?));
        }
        if want_sep {
            t.rows.push(bound_row(&separation(model, k, &search)?));
        }
    }
    if args.scheme == Scheme::Both && model.uncoded.is_none() {
        let opts = CompareOptions { search, separation: false, time_sharing: 1 };
        let cmp = compare_schemes(&model.source, &model.channel, &[], &opts)?;
        t.summary.push(format!("expurgated_zero_rate,{}", fmt_num(cmp.expurgated_zero_rate)));
        match cmp.crossover {
            Some(c) => t.summary.push(format!("crossover,{}", fmt_num(c))),
            None => t.warnings.push("uncoded curve does not cross the zero-rate expurgated line".into()),
        }
    }
    Ok(t)
}

fn default_law(ch: &Channel) -> ChannelPairLaw {
    let nx = ch.num_inputs();
    let (a, b) = match channel_max_divergence(ch) {
        Ok((_, pair)) => pair,
        // rows with disjoint supports: first pair at infinite divergence
        Err(_) => (0..nx)
            .flat_map(|a| (0..nx).map(move |b| (a, b)))
            .find(|&(a, b)| kl(ch.row(a).probs(), ch.row(b).probs()).is_infinite())
            .unwrap_or((0, 0)),
    };
    ChannelPairLaw::point_mass(nx, a, b)
}

pub fn cmd_simulate(args: &SimulateArgs, model: &Model) -> Result<Table> {
    let ch = &model.channel;
    let nx = ch.num_inputs();
    let law = match &args.law {
        Some(s) => {
            let cells: Vec<String> = s.split(',').map(|c| c.trim().to_string()).collect();
            if cells.len() != nx * nx {
                return Err(Error::Input(format!("--law needs {} entries", nx * nx)));
            }
            ChannelPairLaw::from_probs(nx, parse_stochastic(&cells, "--law")?)?
        }
        None => default_law(ch),
    };
    let cfg = SimConfig::new(parse_usize_grid(&args.n_grid)?, args.trials, args.seed)?;
    let mut m = RunManifest::new("simulate", model);
    m.set("theta0", args.theta0);
    m.set("theta1", args.theta1);
    m.set("n_grid", &args.n_grid);
    m.set("trials", args.trials);
    m.set("seed", args.seed);
    m.set("law", law.probs().iter().map(f64::to_string).collect::<Vec<_>>().join(","));
    let mut t = Table::new(m, vec!["n", "alpha_hat", "beta_hat", "alpha_errors", "beta_errors"]);
    let (p_u, q_u) = (model.p_u(), model.q_u());
    let pred = rht_prediction(&p_u, &q_u, ch, args.theta0, args.theta1, &law)?;
    let report: SimReport = simulate_rht(&p_u, &q_u, ch, args.theta0, args.theta1, &law, &cfg)?;
    for r in &report.rows {
        t.rows.push(vec![
            r.n.to_string(),
            fmt_num(r.alpha_hat),
            fmt_num(r.beta_hat),
            r.alpha_errors.to_string(),
            r.beta_errors.to_string(),
        ]);
    }
    t.summary.push("quantity,fitted,std_error,analytic,censored".into());
    for (name, fit, analytic) in [("kappa_alpha", report.alpha_fit(), pred.zeta0), ("kappa_beta", report.beta_fit(), pred.zeta1)] {
        match fit {
            Ok(f) => t.summary.push(format!(
                "{name},{},{},{},{}",
                fmt_num(f.slope),
                fmt_num(f.std_error),
                fmt_num(analytic),
                f.censored
            )),
            Err(e) => {
                t.summary.push(format!("{name},,,{},", fmt_num(analytic)));
                t.warnings.push(format!("{name}: {e}"));
                t.failure.get_or_insert(e);
            }
        }
    }
    for r in &report.rows {
        if let Some(c) = &r.pair_counts {
            let c: Vec<String> = c.iter().map(usize::to_string).collect();
            t.summary.push(format!("joint_type n={}: {}", r.n, c.join(",")));
        }
    }
    Ok(t)
}

fn write_outputs(t: &Table, io: &OutputArgs) -> Result<()> {
    let write = |path: &Path, text: &str| {
        fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
    };
    match &io.out {
        Some(p) => write(p, &t.to_csv())?,
        None => {
            std::io::stdout().write_all(t.to_csv().as_bytes()).map_err(|e| Error::Input(e.to_string()))?;
        }
    }
    if let Some(p) = &io.json {
        write(p, &t.to_json())?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Table> {
    let (io, run): (&OutputArgs, Box<dyn Fn(&Model) -> Result<Table> + Sync>) = match &cli.command {
        Command::Region(a) => (&a.io, Box::new(move |m| cmd_region(a, m))),
        Command::Bounds(a) => (&a.io, Box::new(move |m| cmd_bounds(a, m))),
        Command::Simulate(a) => (&a.io, Box::new(move |m| cmd_simulate(a, m))),
    };
    let model = load_model(&io.model)?;
    let table = match cli.threads {
        Some(0) => return Err(Error::Input("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Input(e.to_string()))?
            .install(|| run(&model))?,
        None => run(&model)?,
    };
    write_outputs(&table, io)?;
    Ok(table)
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(t) => {
            for w in &t.warnings {
                eprintln!("warning: {w}");
            }
            t.failure.map_or(0, |e| e.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.35").unwrap(), 35 * 10u128.pow(28));
        assert_eq!(parse_decimal("1").unwrap(), 10u128.pow(30));
        assert_eq!(parse_decimal(".5").unwrap(), 5 * 10u128.pow(29));
        for bad in ["", ".", "-0.1", "1e-3", "0.3x", "0.1.2", "1234"] {
            assert!(parse_decimal(bad).is_err(), "{bad}");
        }
        // 0.1 + 0.2 + 0.7 is exactly one in decimal
        let v = parse_stochastic(&["0.1".into(), "0.2".into(), "0.7".into()], "t").unwrap();
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(parse_stochastic(&["0.5".into(), "0.499999998".into()], "t").is_err());
        assert!(parse_stochastic(&["0.5".into(), "0.4999999995".into()], "t").is_ok());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0235999), "0.0235999000");
        assert_eq!(fmt_num(1.0), "1.00000000");
        assert_eq!(fmt_num(123.456), "123.456000");
        assert_eq!(fmt_num(1e-7), "1.00000000e-7");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:0.01:0.005").unwrap(), vec![0.0, 0.005, 0.01]);
        assert_eq!(parse_grid("0.1,0.3").unwrap(), vec![0.1, 0.3]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert_eq!(parse_usize_grid("100:400:100").unwrap(), vec![100, 200, 300, 400]);
        assert!(parse_usize_grid("1.5").is_err());
    }

    #[test]
    fn model_validation() {
        let ok = r#"{"p_uv":[["0.25","0.25"],["0.25","0.25"]],"q_uv":[["0","0.5"],["0.5","0"]],
                     "channel":[["0.65","0.35"],["0.35","0.65"]]}"#;
        let m = parse_model(ok).unwrap();
        assert!(m.source.is_tad());
        assert_eq!(m.digest.len(), 64);
        let not_stochastic = ok.replace(r#"["0.65","0.35"]"#, r#"["0.65","0.34"]"#);
        assert_eq!(parse_model(&not_stochastic).unwrap_err().exit_code(), 2);
        let numbers = ok.replace(r#""0.65""#, "0.65");
        assert!(matches!(parse_model(&numbers), Err(Error::Parse(_))));
        let ragged = ok.replace(r#"["0","0.5"]"#, r#"["0.5"]"#);
        assert!(parse_model(&ragged).is_err());
        let labelled = ok.replace(r#"{"p_uv""#, r#"{"alphabets":{"u":["a","b","c"]},"p_uv""#);
        assert!(matches!(parse_model(&labelled), Err(Error::AlphabetMismatch(_))));
    }
}
