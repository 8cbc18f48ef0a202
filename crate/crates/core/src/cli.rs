//! Command-line front end.
//!
//! Exit codes: 0 when everything passes, 1 when a statistical or residual
//! check fails, 2 on configuration errors.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::densealg::{haar_unitary, RngStream, C64};
use crate::dualunitary::{build_d2, check_dual, DualGateParams, GateJson, Residuals, DUAL_TOLERANCE};
use crate::mc_oracle::{compare, moment_estimates, mps_samples, peps_samples, ComparisonReport, Provenance, DEFAULT_THRESHOLD, MIN_SAMPLES};
use crate::mps::{CorrelationCase, MpsEnsembleSpec, MpsGeometry};
use crate::mps_moments::{avg_moment_d1, avg_moment_d2, MomentKind, MomentResult};
use crate::operators::{matrix_from_pairs, matrix_to_pairs, Operator};
use crate::peps::{PepsEnsembleSpec, PepsGeometry};
use crate::peps_moments::{avg_moment_d1_peps, avg_moment_d2_peps};
use crate::weingarten::{WeingartenTable, MAX_WEINGARTEN_DEGREE};
use crate::{Error, Result};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Samples per point when a campaign does not set them.
pub const DEFAULT_SAMPLES: usize = 20_000;

#[derive(Parser, Debug)]
#[command(name = "tnmoments", version, about = "Haar-averaged correlation moments of random solvable MPS and PEPS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SampleKind {
    /// Haar unitaries on `C^q`.
    #[default]
    Haar,
    /// Random dual-unitary gates on two qubits.
    Dual,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact Weingarten values per cycle type.
    Weingarten {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact averaged moment of one correlation diagram.
    Moment {
        #[arg(long, value_parser = parse_kind)]
        kind: MomentKind,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic against Monte Carlo for every point of a campaign file, or
    /// for the built-in campaign when no file is given.
    Verify {
        campaign: Option<PathBuf>,
        /// Overrides every point's threshold.
        #[arg(long)]
        threshold: Option<f64>,
        /// Overrides every point's sample count.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Temporal and spatial unitarity residuals of a two-site gate.
    Gatecheck {
        matrix: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dumps random unitaries or dual-unitary gates as JSON.
    Sample {
        #[arg(long, value_enum, default_value_t)]
        kind: SampleKind,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug, Clone)]
pub struct PointArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long = "D")]
    pub bond: usize,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub v: Option<usize>,
    /// `x,r,t` for MPS or `x1,x2,r1,r2,t` for PEPS.
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long = "op-a", default_value = "pauli-z")]
    pub op_a: String,
    #[arg(long = "op-b", default_value = "pauli-z")]
    pub op_b: String,
}

fn parse_kind(s: &str) -> std::result::Result<MomentKind, String> {
    MomentKind::parse(s).map_err(|e| e.to_string())
}

/// One parameter point, as given on the command line or in a campaign file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: MomentKind,
    pub k: usize,
    pub d: usize,
    #[serde(rename = "D")]
    pub bond: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    pub op_a: String,
    pub op_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl RunConfig {
    pub fn from_args(kind: MomentKind, p: &PointArgs) -> Self {
        Self {
            kind,
            k: p.k,
            d: p.d,
            bond: p.bond,
            s: p.s,
            v: p.v,
            geometry: p.geometry.clone(),
            op_a: p.op_a.clone(),
            op_b: p.op_b.clone(),
            samples: None,
            seed: None,
            threshold: None,
        }
    }

    fn operators(&self) -> Result<(Operator, Operator)> {
        Ok((Operator::parse(&self.op_a, self.d)?, Operator::parse(&self.op_b, self.d)?))
    }

    fn coords(&self, len: usize) -> Result<Option<Vec<i64>>> {
        let Some(g) = &self.geometry else { return Ok(None) };
        let coords: Vec<i64> = g
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Invalid(format!("bad geometry {g}")))?;
        if coords.len() != len {
            return Err(Error::Invalid(format!("geometry {g} needs {len} comma-separated integers")));
        }
        if coords[len - 1] < 0 {
            return Err(Error::Invalid("time must be non-negative".into()));
        }
        Ok(Some(coords))
    }

    fn chain_s(&self) -> Result<usize> {
        self.s.ok_or_else(|| Error::Invalid(format!("{} needs s or a geometry", self.kind.name())))
    }

    /// Geometry of the MPS kinds, derived from `s` when not given.
    pub fn mps_geometry(&self) -> Result<MpsGeometry> {
        let g = match self.coords(3)? {
            Some(c) => MpsGeometry { x: c[0], r: c[1], t: c[2] as usize },
            None if self.kind == MomentKind::MpsD2 => MpsGeometry::for_chain(self.chain_s()?, 1),
            None => MpsGeometry { x: 1, r: 5, t: 1 },
        };
        Ok(g)
    }

    /// Geometry of the PEPS kinds, derived from `s` when not given.
    pub fn peps_geometry(&self) -> Result<PepsGeometry> {
        let g = match self.coords(5)? {
            Some(c) => PepsGeometry { x1: c[0], x2: c[1], r1: c[2], r2: c[3], t: c[4] as usize },
            None => {
                let r1 = match self.kind {
                    MomentKind::PepsD2 => MpsGeometry::for_chain(self.chain_s()?, 1).r,
                    _ => 5,
                };
                PepsGeometry { x1: 1, x2: 0, r1, r2: 0, t: 1 }
            }
        };
        Ok(g)
    }

    /// Middle-unit count implied by the geometry, checked against `kind` and `s`.
    fn resolved_s(&self) -> Result<Option<usize>> {
        let case = match self.kind {
            MomentKind::MpsD1 | MomentKind::MpsD2 => self.mps_geometry()?.case(),
            MomentKind::PepsD1 | MomentKind::PepsD2 => self.peps_geometry()?.case()?,
        };
        let s = match (case, self.kind.is_chain()) {
            (CorrelationCase::GenericD2 { s }, true) => Some(s),
            (CorrelationCase::BoundaryD1, false) => None,
            (c, _) if c.is_zero() => return Err(Error::Invalid(format!("geometry vanishes identically ({c:?})"))),
            (c, _) => return Err(Error::Invalid(format!("geometry case {c:?} does not match kind {}", self.kind.name()))),
        };
        if let (Some(want), Some(got)) = (self.s, s) {
            if want != got {
                return Err(Error::Invalid(format!("s={want} disagrees with the geometry, which gives s={got}")));
            }
        }
        Ok(s)
    }

    /// Exact averaged moment.
    pub fn analytic(&self) -> Result<MomentResult> {
        let (a, b) = self.operators()?;
        let s = self.resolved_s()?;
        let (k, d, bond) = (self.k, self.d, self.bond);
        match (self.kind, s) {
            (MomentKind::MpsD2, Some(s)) => avg_moment_d2(k, d, bond, s, &a, &b),
            (MomentKind::MpsD1, _) => avg_moment_d1(k, d, bond, &a, &b),
            (MomentKind::PepsD2, Some(s)) => avg_moment_d2_peps(k, d, bond, s, &a, &b),
            (MomentKind::PepsD1, _) => avg_moment_d1_peps(k, d, bond, &a, &b),
            _ => unreachable!("resolved_s pairs chain kinds with s"),
        }
    }

    fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_SAMPLES)
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    /// Correlation value of every sample.
    fn draw(&self) -> Result<Vec<C64>> {
        let (a, b) = self.operators()?;
        let s = self.resolved_s()?;
        let v = self.v.unwrap_or(s.map_or(1, |s| s + 2));
        let (n, seed) = (self.samples(), self.seed());
        if n < MIN_SAMPLES {
            return Err(Error::Invalid(format!("at least {MIN_SAMPLES} samples are required, got {n}")));
        }
        match self.kind {
            MomentKind::MpsD1 | MomentKind::MpsD2 => {
                let spec = MpsEnsembleSpec { d: self.d, bond: self.bond, v, geometry: self.mps_geometry()? };
                mps_samples(&spec, a.matrix(), b.matrix(), n, seed)
            }
            MomentKind::PepsD1 | MomentKind::PepsD2 => {
                let spec = PepsEnsembleSpec { d: self.d, bond: self.bond, v, m: 3, geometry: self.peps_geometry()? };
                peps_samples(&spec, a.matrix(), b.matrix(), n, seed)
            }
        }
    }

    /// Key shared by points that can reuse one set of samples.
    fn sample_key(&self) -> String {
        let mut c = self.clone();
        c.k = 0;
        c.threshold = None;
        serde_json::to_string(&c).expect("config serializes")
    }
}

/// The analytic-versus-sampling campaign run when `verify` gets no file.
pub fn default_campaign() -> Vec<RunConfig> {
    let point = |kind, k, bond, s, op: &str, seed| RunConfig {
        kind,
        k,
        d: 2,
        bond,
        s: Some(s),
        v: None,
        geometry: None,
        op_a: op.into(),
        op_b: op.into(),
        samples: Some(DEFAULT_SAMPLES),
        seed: Some(seed),
        threshold: Some(DEFAULT_THRESHOLD),
    };
    let mut out = Vec::new();
    for s in 1..=2 {
        for (i, op) in ["pauli-x", "pauli-z"].into_iter().enumerate() {
            for k in 1..=3 {
                out.push(point(MomentKind::MpsD2, k, 2, s, op, 100 + 10 * s as u64 + i as u64));
            }
        }
    }
    for k in 1..=2 {
        out.push(point(MomentKind::PepsD2, k, 4, 1, "pauli-z", 200));
    }
    out
}

/// Result wrapper recording the tool, the configuration and the run time.
#[derive(Debug, Serialize)]
pub struct Artifact<C: Serialize, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: C,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub wall_time: f64,
    pub result: T,
}

impl<C: Serialize, T: Serialize> Artifact<C, T> {
    fn new(config: C, seed: Option<u64>, start: Instant, result: T) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config,
            seed,
            wall_time: start.elapsed().as_secs_f64(),
            result,
        }
    }
}

/// Whether the checks of a successful command passed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Pass => EXIT_PASS,
            Outcome::Fail => EXIT_FAIL,
        }
    }
}

#[derive(Serialize)]
struct WeingartenConfig {
    k: usize,
    q: u64,
}

/// Weingarten table of `S_k` at dimension `q`.
pub fn cmd_weingarten(k: usize, q: u64, format: Format, out: &mut dyn Write) -> Result<Outcome> {
    if k == 0 || k > MAX_WEINGARTEN_DEGREE {
        return Err(Error::DegreeOutOfRange { degree: k, max: MAX_WEINGARTEN_DEGREE });
    }
    let start = Instant::now();
    let table = WeingartenTable::new(k, q)?.to_json();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&Artifact::new(WeingartenConfig { k, q }, None, start, &table))?)?,
        Format::Csv => {
            writeln!(out, "cycle_type,numerator,denominator,float")?;
            for e in &table.entries {
                writeln!(out, "\"{}\",{},{},{:e}", e.cycle_type, e.value.numerator, e.value.denominator, e.float)?;
            }
        }
    }
    Ok(Outcome::Pass)
}

fn moment_csv_header(out: &mut dyn Write) -> Result<()> {
    writeln!(out, "kind,k,d,D,s,op_a,op_b,exact,float_re,float_im")?;
    Ok(())
}

fn moment_csv_row(out: &mut dyn Write, r: &MomentResult) -> Result<()> {
    let z = r.to_c64();
    let exact = r.exact().map(|q| q.to_string()).unwrap_or_default();
    let s = r.s.map(|s| s.to_string()).unwrap_or_default();
    write!(out, "{},{},{},{},{},{},{},{},{:e},{:e}", r.kind.name(), r.k, r.d, r.bond, s, csv_field(&r.op_a), csv_field(&r.op_b), exact, z.re, z.im)?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Exact averaged moment for one parameter point.
pub fn cmd_moment(config: &RunConfig, format: Format, out: &mut dyn Write) -> Result<Outcome> {
    let start = Instant::now();
    let result = config.analytic()?;
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&Artifact::new(config, None, start, &result))?)?,
        Format::Csv => {
            moment_csv_header(out)?;
            moment_csv_row(out, &result)?;
            writeln!(out)?;
        }
    }
    Ok(Outcome::Pass)
}

/// Reads a campaign: a JSON array of [`RunConfig`] objects.
pub fn read_campaign(path: &Path) -> Result<Vec<RunConfig>> {
    let points: Vec<RunConfig> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok(points)
}

/// Runs every point, sharing samples between points that differ only in `k`.
pub fn run_campaign(points: &[RunConfig]) -> Result<Vec<ComparisonReport>> {
    if points.is_empty() {
        return Err(Error::Invalid("campaign has no points".into()));
    }
    let analytic: Vec<MomentResult> = points.iter().map(RunConfig::analytic).collect::<Result<_>>()?;
    let mut drawn: HashMap<String, (Vec<C64>, f64)> = HashMap::new();
    let mut reports = Vec::with_capacity(points.len());
    for (p, exact) in points.iter().zip(&analytic) {
        let key = p.sample_key();
        if !drawn.contains_key(&key) {
            let start = Instant::now();
            let samples = p.draw()?;
            drawn.insert(key.clone(), (samples, start.elapsed().as_secs_f64()));
        }
        let (samples, wall) = &drawn[&key];
        let mut est = moment_estimates(samples, &[p.k], p.seed(), *wall)?.remove(0);
        let (a, b) = p.operators()?;
        est.provenance = Some(Provenance::new(p.kind, exact.s, p.k, p.d, p.bond, &a, &b));
        reports.push(compare(exact, &est, p.threshold.unwrap_or(DEFAULT_THRESHOLD))?);
    }
    Ok(reports)
}

/// Emits one report per line and fails unless every point passes.
pub fn cmd_verify(points: &[RunConfig], format: Format, out: &mut dyn Write) -> Result<Outcome> {
    let start = Instant::now();
    let reports = run_campaign(points)?;
    if format == Format::Csv {
        writeln!(out, "kind,k,d,D,s,op_a,op_b,exact,float_re,float_im,mc_re,mc_im,stderr_re,stderr_im,n,seed,z,threshold,pass")?;
    }
    for (p, r) in points.iter().zip(&reports) {
        match format {
            Format::Json => writeln!(out, "{}", serde_json::to_string(&Artifact::new(p, p.seed, start, r))?)?,
            Format::Csv => {
                moment_csv_row(out, &r.analytic)?;
                let m = &r.mc;
                writeln!(out, ",{:e},{:e},{:e},{:e},{},{},{:.3},{},{}", m.mean.re, m.mean.im, m.stderr[0], m.stderr[1], m.n_samples, m.seed, r.z_score, r.threshold, r.pass)?;
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    // Two-sided normal tail beyond z = 4, per component.
    let per_point = 2.0 * 6.334e-5;
    eprintln!(
        "{} of {} points passed; expected false alarms at z ≤ {} ≈ {:.1e} for the whole campaign",
        reports.len() - failed,
        reports.len(),
        DEFAULT_THRESHOLD,
        per_point * reports.len() as f64
    );
    Ok(if failed == 0 { Outcome::Pass } else { Outcome::Fail })
}

/// Residual report of a gate check.
#[derive(Debug, Serialize)]
pub struct GateReport {
    pub residuals: Residuals,
    pub tolerance: f64,
    pub pass: bool,
}

/// Reads a gate file holding either a bare matrix of `[re, im]` rows or a
/// gate object with a `matrix` field.
pub fn read_gate(path: &Path) -> Result<nalgebra::DMatrix<C64>> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let rows: Vec<Vec<[f64; 2]>> = if value.is_object() {
        serde_json::from_value::<GateJson>(value)?.matrix
    } else {
        serde_json::from_value(value)?
    };
    matrix_from_pairs(&rows)
}

/// Unitarity in time and space of the gate stored at `path`.
pub fn cmd_gatecheck(path: &Path, d: usize, out: &mut dyn Write) -> Result<Outcome> {
    let start = Instant::now();
    let u = read_gate(path)?;
    let residuals = check_dual(&u, d)?;
    let report = GateReport { residuals, tolerance: DUAL_TOLERANCE, pass: residuals.passes(DUAL_TOLERANCE) };
    #[derive(Serialize)]
    struct Config<'a> {
        matrix: &'a Path,
        d: usize,
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&Artifact::new(Config { matrix: path, d }, None, start, &report))?)?;
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}

/// Haar unitaries on `C^q`, or dual-unitary qubit gates, from stream
/// `(seed, i)` for the `i`-th item. One item is written bare, several as an
/// array.
pub fn cmd_sample(kind: SampleKind, q: usize, count: usize, seed: u64, out: &mut dyn Write) -> Result<Outcome> {
    if count == 0 || q == 0 {
        return Err(Error::Invalid("count and q must be positive".into()));
    }
    let items: Vec<serde_json::Value> = (0..count)
        .map(|i| {
            let mut rng = RngStream::new(seed, i as u64);
            match kind {
                SampleKind::Haar => Ok(serde_json::to_value(matrix_to_pairs(haar_unitary(q, &mut rng).matrix()))?),
                SampleKind::Dual => Ok(serde_json::to_value(build_d2(&DualGateParams::random(&mut rng))?.to_json())?),
            }
        })
        .collect::<Result<_>>()?;
    let text = if count == 1 { serde_json::to_string_pretty(&items[0])? } else { serde_json::to_string_pretty(&items)? };
    writeln!(out, "{text}")?;
    Ok(Outcome::Pass)
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Weingarten { k, q, format, out } => cmd_weingarten(k, q, format, &mut open_out(&out)?),
        Command::Moment { kind, point, format, out } => cmd_moment(&RunConfig::from_args(kind, &point), format, &mut open_out(&out)?),
        Command::Verify { campaign, threshold, samples, format, out } => {
            let mut points = match campaign {
                Some(p) => read_campaign(&p)?,
                None => default_campaign(),
            };
            for p in &mut points {
                p.threshold = threshold.or(p.threshold);
                p.samples = samples.or(p.samples);
            }
            cmd_verify(&points, format, &mut open_out(&out)?)
        }
        Command::Gatecheck { matrix, d, out } => cmd_gatecheck(&matrix, d, &mut open_out(&out)?),
        Command::Sample { kind, q, count, seed, out } => cmd_sample(kind, q, count, seed, &mut open_out(&out)?),
    }
}

/// Parses `args` (program name first), runs and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    match run(cli) {
        Ok(outcome) => outcome.code(),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn output(f: impl FnOnce(&mut Vec<u8>) -> Result<Outcome>) -> (Outcome, String) {
        let mut buf = Vec::new();
        let o = f(&mut buf).unwrap();
        (o, String::from_utf8(buf).unwrap())
    }

    fn point(kind: MomentKind, k: usize, op: &str) -> RunConfig {
        RunConfig {
            kind,
            k,
            d: 2,
            bond: 2,
            s: Some(1),
            v: None,
            geometry: None,
            op_a: op.into(),
            op_b: op.into(),
            samples: Some(400),
            seed: Some(1),
            threshold: None,
        }
    }

    #[test]
    fn weingarten_rows() {
        let (_, text) = output(|o| cmd_weingarten(2, 4, Format::Csv, o));
        assert!(text.contains(",1,15,") && text.contains(",-1,60,"), "{text}");
        let (_, text) = output(|o| cmd_weingarten(1, 4, Format::Json, o));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["result"]["entries"][0]["denominator"], "4");
        assert!(matches!(cmd_weingarten(7, 8, Format::Json, &mut Vec::new()), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn moment_values() {
        let (_, text) = output(|o| cmd_moment(&point(MomentKind::MpsD2, 1, "pauli-z"), Format::Json, o));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["result"]["exact"]["numerator"], "0");
        assert_eq!(v["config"]["op_a"], "pauli-z");
        let (_, text) = output(|o| cmd_moment(&point(MomentKind::MpsD2, 1, "identity"), Format::Csv, o));
        assert!(text.lines().nth(1).unwrap().contains(",1,"), "{text}");
    }

    #[test]
    fn geometry_must_match_kind() {
        let mut p = point(MomentKind::MpsD2, 1, "pauli-z");
        p.geometry = Some("1,5,1".into());
        assert!(p.analytic().is_err());
        p.geometry = Some("1,9,1".into());
        assert!(p.analytic().is_ok());
        p.s = Some(2);
        assert!(p.analytic().is_err());
        p.geometry = Some("2,9,1".into());
        assert!(p.analytic().is_err());
    }

    #[test]
    fn verify_exit_codes() {
        let points = vec![point(MomentKind::MpsD2, 1, "identity"), point(MomentKind::MpsD2, 2, "pauli-z")];
        let (o, text) = output(|o| cmd_verify(&points, Format::Json, o));
        assert_eq!(o, Outcome::Pass);
        assert_eq!(text.lines().count(), 2);
        let tight: Vec<RunConfig> = (1..=3)
            .map(|k| RunConfig { threshold: Some(1e-3), ..point(MomentKind::MpsD2, k, "pauli-x") })
            .collect();
        assert_eq!(cmd_verify(&tight, Format::Csv, &mut Vec::new()).unwrap(), Outcome::Fail);
        assert!(cmd_verify(&[], Format::Json, &mut Vec::new()).is_err());
    }

    #[test]
    fn points_differing_in_k_share_samples() {
        let points = vec![point(MomentKind::MpsD2, 1, "pauli-z"), point(MomentKind::MpsD2, 2, "pauli-z")];
        let reports = run_campaign(&points).unwrap();
        let single = run_campaign(&points[1..]).unwrap();
        assert_eq!(reports[1].mc.mean, single[0].mc.mean);
    }

    #[test]
    fn sampled_gate_round_trips_through_gatecheck() {
        let dir = std::env::temp_dir().join(format!("tnmoments-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("gate.json");
        let (_, text) = output(|o| cmd_sample(SampleKind::Dual, 2, 1, 4, o));
        std::fs::write(&path, text).unwrap();
        assert_eq!(output(|o| cmd_gatecheck(&path, 2, o)).0, Outcome::Pass);
        std::fs::write(&path, serde_json::to_string(&matrix_to_pairs(&crate::dualunitary::cnot_matrix())).unwrap()).unwrap();
        let (o, text) = output(|o| cmd_gatecheck(&path, 2, o));
        assert_eq!(o, Outcome::Fail);
        assert!(text.contains("spatial_left"));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn command_line_exit_codes() {
        assert_eq!(main_with_args(["tnmoments", "weingarten", "--k", "2", "--q", "3", "--out", "/dev/null"]), EXIT_PASS);
        assert_eq!(main_with_args(["tnmoments", "weingarten", "--k", "9", "--q", "3"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["tnmoments", "bogus"]), EXIT_CONFIG);
        assert_eq!(main_with_args(["tnmoments", "moment", "--kind", "mps-d9", "--k", "1", "--d", "2", "--D", "2"]), EXIT_CONFIG);
    }
}
