//! Command-line front end.
//!
//! Exit codes: 0 success, 1 INVALID certificate or verdict, 2 parameter or
//! configuration error, 3 numeric failure.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::calderon::{char_closed_form, CalderonOp, SigmaTriple};
use crate::certify::{
    certify_lower_bound, evaluate_certificate, membership_divergence, nonimprove_experiment, recheck, truncated_power,
    weak_fatou_probe, weak_type_sweep, CertifyConfig, ExtremalSequence, FatouLimit, NonimproveConfig, Verdict,
};
use crate::corpus;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measure::{Piece, StepFunction};
use crate::norms::{lambda_phi_norm, lorentz_norm_dist, lorentz_norm_rearr, Extended, LorentzIndex, PhiFunction};
use crate::operators::{rearrange_radial, sample_output, OutputWindow, RadialFunction, RnOperator};
use crate::report::{canonicalize, to_canonical_string};

/// Default output directory when `--out` is absent.
pub const OUT_DIR_ENV: &str = "RIESZ_ENDPOINT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "riesz-endpoint",
    version,
    about = "Rearrangement-invariant norms, Calderón operators and endpoint certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Emit the tabular part of the result as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Run sweeps on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Nonincreasing rearrangement f* of a step function.
    Rearrange(StepInput),
    /// Lorentz norm ‖f‖_{p,q} (both forms) or the Λ_φ norm.
    Norm(NormArgs),
    /// Calderón operator R, S0, H or Sinf at one point.
    Calderon(CalderonArgs),
    /// Riesz, maximal, Hardy–Littlewood or Hilbert operator on a radial function.
    Apply(ApplyArgs),
    Certify {
        #[command(subcommand)]
        command: CertifyCommand,
    },
    Sweep {
        #[command(subcommand)]
        command: SweepCommand,
    },
    Experiment {
        #[command(subcommand)]
        command: ExperimentCommand,
    },
    Probe {
        #[command(subcommand)]
        command: ProbeCommand,
    },
}

#[derive(Subcommand, Debug)]
pub enum CertifyCommand {
    /// Search (C, c) for (Tχ_{E_j})*(t) ≥ C·T_σ(χ_{(0,a_j)})(ct).
    LowerBound(CertifyArgs),
}

#[derive(Subcommand, Debug)]
pub enum SweepCommand {
    /// Ratios ‖Tf‖_target / ‖f‖_domain over a seeded corpus.
    WeakType(SweepArgs),
}

#[derive(Subcommand, Debug)]
pub enum ExperimentCommand {
    /// Riesz potential on a_j^{-1}χ_{B(0,1/j)}: constant domain norms, growing target norms.
    Nonimprove(NonimproveArgs),
}

#[derive(Subcommand, Debug)]
pub enum ProbeCommand {
    /// Weak Fatou check on a monotone family read from JSON.
    Fatou(FatouArgs),
    /// Lorentz norms of truncations of t^{-1/q}.
    Membership(MembershipArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct StepInput {
    /// JSON file with a step function ("-" for stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Inline pieces "len:value,len:value,...".
    #[arg(long = "f")]
    pub inline: Option<String>,
}

#[derive(Args, Debug)]
pub struct NormArgs {
    #[command(flatten)]
    pub input: StepInput,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Concave φ: "power:<e>" or a JSON object {"kind": ...}.
    #[arg(long)]
    pub phi: Option<String>,
}

#[derive(Args, Debug)]
pub struct CalderonArgs {
    #[arg(long)]
    pub op: CalderonOp,
    /// "p,q,m" with "inf" allowed.
    #[arg(long)]
    pub sigma: SigmaTriple,
    /// Evaluate on χ_{(0,a)} in closed form.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub t: f64,
    #[command(flatten)]
    pub input: StepInput,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpName {
    Riesz,
    Maximal,
    Hl,
    Hilbert,
}

#[derive(Args, Debug, Clone)]
pub struct OperatorArgs {
    #[arg(long)]
    pub op: OpName,
    /// Riesz order γ ∈ (0, n).
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Fractional maximal order α ∈ [0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Multiply the Riesz potential by c_γ.
    #[arg(long)]
    pub with_constant: bool,
}

impl OperatorArgs {
    pub fn operator(&self) -> RnOperator {
        match self.op {
            OpName::Riesz => RnOperator::Riesz { gamma: self.gamma, with_constant: self.with_constant },
            OpName::Maximal => RnOperator::Maximal { alpha: self.alpha },
            OpName::Hl => RnOperator::Hl,
            OpName::Hilbert => RnOperator::Hilbert,
        }
    }
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// JSON file with {"n": .., "profile": {..}} ("-" for stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Inline radial profile "len:value,...".
    #[arg(long = "f")]
    pub inline: Option<String>,
    /// Use χ_{B(0,ρ)} as input.
    #[arg(long)]
    pub ball: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Comma-separated radii |x| at which to evaluate.
    #[arg(long, value_delimiter = ',')]
    pub x: Vec<f64>,
    /// Also sample the output on the default window and return its rearrangement.
    #[arg(long)]
    pub rearranged: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiiLaw {
    /// ρ_j = 1/j
    Shrinking,
    /// ρ_j = j
    Growing,
    /// ρ_k = 2^{(k − count/2)/4}
    Dilates,
    /// Seeded two-level profiles.
    TwoBall,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    #[arg(long)]
    pub calderon: CalderonOp,
    #[arg(long)]
    pub sigma: SigmaTriple,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, value_enum, default_value = "shrinking")]
    pub family: RadiiLaw,
    #[arg(long, default_value_t = 10)]
    pub jmax: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e3)]
    pub t_max: f64,
    #[arg(long, default_value_t = 193)]
    pub grid_size: usize,
    /// Finite-range cut for H and Sinf.
    #[arg(long)]
    pub t0: Option<f64>,
    /// Evaluate this C instead of searching (requires --c).
    #[arg(long = "C")]
    pub big_c: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Re-evaluate on a grid this many times finer.
    #[arg(long)]
    pub recheck: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub operator: OperatorArgs,
    /// Domain Lorentz index "p,q".
    #[arg(long)]
    pub domain: LorentzIndex,
    /// Target Lorentz index "p,q".
    #[arg(long)]
    pub target: LorentzIndex,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[arg(long, value_enum, default_value = "dilates")]
    pub corpus: RadiiLaw,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = corpus::DEFAULT_SEED)]
    pub seed: u64,
    /// Observe outputs on |x| < outer_abs instead of a window relative to the support.
    #[arg(long)]
    pub outer_abs: Option<f64>,
    #[arg(long, default_value_t = 32)]
    pub per_decade: u32,
}

#[derive(Args, Debug)]
pub struct NonimproveArgs {
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Domain index q in (0, 1].
    #[arg(long)]
    pub q: f64,
    /// Target secondary index r.
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 64)]
    pub jmax: usize,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
}

#[derive(Args, Debug)]
pub struct FatouArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub q: f64,
    /// JSON {"family": [step functions], "limit": step function} ("-" for stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Use the anchored truncations of t^{-1/p} on (10^{-k}, 10^k), k = 1..=N.
    #[arg(long)]
    pub truncations: Option<u32>,
    /// Norm of the limit when it is not a step function.
    #[arg(long)]
    pub limit_norm: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Args, Debug)]
pub struct MembershipArgs {
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,
    #[arg(long = "T", value_delimiter = ',')]
    pub t_cut: Vec<f64>,
}

/// Resolved settings shared by `certify`, `sweep` and `experiment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub operator: Option<RnOperator>,
    pub calderon: Option<CalderonOp>,
    pub sigma: Option<SigmaTriple>,
    pub domain: Option<LorentzIndex>,
    pub target: Option<LorentzIndex>,
    pub n: u32,
    pub j_max: usize,
    pub radii_law: RadiiLaw,
    pub t_range: (f64, f64),
    pub grid_size: usize,
    pub window: OutputWindow,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    fn base(n: u32, radii_law: RadiiLaw, out: Option<PathBuf>) -> Self {
        ExperimentConfig {
            operator: None,
            calderon: None,
            sigma: None,
            domain: None,
            target: None,
            n,
            j_max: 10,
            radii_law,
            t_range: (1e-3, 1e3),
            grid_size: 193,
            window: OutputWindow::default(),
            seed: corpus::DEFAULT_SEED,
            out,
        }
    }

    /// Rejects incomplete or contradictory settings with a named code.
    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::config("dimension", format!("n must be 1, 2 or 3, got {}", self.n)));
        }
        if self.j_max == 0 {
            return Err(Error::config("family-size", "j_max must be at least 1"));
        }
        if self.calderon.is_some() != self.sigma.is_some() {
            return Err(Error::config("missing-sigma", "a Calderón operator needs sigma and vice versa"));
        }
        if self.domain.is_some() != self.target.is_some() {
            return Err(Error::config("missing-index", "sweeps need both a domain and a target index"));
        }
        if let Some(op) = self.operator {
            if self.n != 1 && !matches!(op, RnOperator::Riesz { .. }) {
                return Err(Error::config("dimension", format!("{} is implemented for n = 1 only", op.name())));
            }
        }
        if matches!(self.radii_law, RadiiLaw::Dilates | RadiiLaw::TwoBall) && self.calderon.is_some() {
            return Err(Error::config("family-law", "certificates need a shrinking or growing ball family"));
        }
        Ok(())
    }
}

/// Parses "len:value,len:value".
pub fn parse_inline(s: &str) -> Result<StepFunction> {
    let mut pieces = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (l, v) = part.split_once(':').ok_or_else(|| Error::param(format!("expected len:value, got {part:?}")))?;
        let len = l.trim().parse().map_err(|_| Error::param(format!("bad length {l:?}")))?;
        let value = v.trim().parse().map_err(|_| Error::param(format!("bad value {v:?}")))?;
        pieces.push(Piece::new(len, value));
    }
    StepFunction::new(pieces)
}

fn read_source(path: &PathBuf) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

impl StepInput {
    fn load(&self) -> Result<Option<StepFunction>> {
        match (&self.input, &self.inline) {
            (Some(_), Some(_)) => Err(Error::param("give either --input or --f, not both")),
            (Some(p), None) => Ok(Some(serde_json::from_str(&read_source(p)?)?)),
            (None, Some(s)) => Ok(Some(parse_inline(s)?)),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<StepFunction> {
        self.load()?.ok_or_else(|| Error::param("a step function is required (--input or --f)"))
    }
}

fn parse_phi(s: &str) -> Result<PhiFunction> {
    if let Some(e) = s.strip_prefix("power:") {
        let e: f64 = e.trim().parse().map_err(|_| Error::param(format!("bad exponent in {s:?}")))?;
        return PhiFunction::power(e);
    }
    Ok(serde_json::from_str(s)?)
}

/// Result of a subcommand: the JSON report, an optional table for `--csv`,
/// and whether the mathematical verdict failed.
struct Output {
    name: &'static str,
    report: Value,
    table: Option<Value>,
    failed: bool,
}

impl Output {
    fn new<T: Serialize>(name: &'static str, report: &T) -> Result<Self> {
        Ok(Output { name, report: serde_json::to_value(report)?, table: None, failed: false })
    }

    fn with_table<T: Serialize>(mut self, rows: &T) -> Result<Self> {
        self.table = Some(serde_json::to_value(rows)?);
        Ok(self)
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        Value::Bool(b) => b.to_string(),
        other => other.to_string(),
    }
}

/// Renders an array of flat objects (or a single object) as CSV with sorted columns.
pub fn render_csv(rows: &Value) -> Result<String> {
    let rows = match canonicalize(rows.clone()) {
        Value::Array(xs) => xs,
        other => vec![other],
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<String> = match rows.first() {
        Some(Value::Object(m)) => m.keys().cloned().collect(),
        Some(_) => vec!["value".into()],
        None => Vec::new(),
    };
    if !header.is_empty() {
        w.write_record(&header)?;
    }
    for row in &rows {
        match row {
            Value::Object(m) => w.write_record(header.iter().map(|k| m.get(k).map(cell).unwrap_or_default()))?,
            other => w.write_record([cell(other)])?,
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn exec_for(cli: &Cli) -> Exec {
    if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    }
}

fn radii(law: RadiiLaw, j_max: usize) -> Result<Vec<f64>> {
    match law {
        RadiiLaw::Shrinking => Ok((1..=j_max).map(|j| 1.0 / j as f64).collect()),
        RadiiLaw::Growing => Ok((1..=j_max).map(|j| j as f64).collect()),
        _ => Err(Error::config("family-law", "certificates need a shrinking or growing ball family")),
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let exec = exec_for(cli);
    match &cli.command {
        Command::Rearrange(input) => {
            let f = input.require()?;
            let fs = f.rearrange();
            let rows: Vec<Value> = fs.cells().map(|(a, b, v)| json!({"start": a, "end": b, "value": v})).collect();
            Output::new("rearrange", &fs)?.with_table(&rows)
        }
        Command::Norm(args) => {
            let f = args.input.require()?;
            match (&args.phi, args.p, args.q) {
                (Some(phi), None, None) => {
                    let phi = parse_phi(phi)?;
                    let value = lambda_phi_norm(&f, &phi);
                    Output::new("norm", &json!({"phi": phi, "norm": value}))
                }
                (None, Some(p), Some(q)) => {
                    let idx = LorentzIndex::new(p, q)?;
                    let dist = lorentz_norm_dist(&f, idx);
                    let rearr = lorentz_norm_rearr(&f, idx);
                    let report = json!({"p": Extended(p), "q": Extended(q), "norm": rearr, "norm_dist": dist, "norm_rearr": rearr});
                    let out = Output::new("norm", &report)?;
                    let table = out.report.clone();
                    out.with_table(&table)
                }
                _ => Err(Error::param("norm needs either --p and --q, or --phi")),
            }
        }
        Command::Calderon(args) => {
            let g = args.input.load()?;
            let (value, source) = match (args.a, g) {
                (Some(a), None) => {
                    if !(a > 0.0) {
                        return Err(Error::param(format!("a must be positive, got {a}")));
                    }
                    if args.op.acts_near_zero() && args.sigma.p.is_infinite() {
                        return Err(Error::param("R and S0 require p < inf"));
                    }
                    (char_closed_form(args.op, args.sigma, a, args.t)?, "closed_form")
                }
                (None, Some(g)) => (args.op.eval(args.sigma, &g, args.t)?, "generic"),
                _ => return Err(Error::param("calderon needs exactly one of --a or a step function")),
            };
            let report = json!({"op": args.op, "sigma": args.sigma, "t": args.t, "value": value, "source": source});
            Output::new("calderon", &report)
        }
        Command::Apply(args) => {
            let op = args.operator.operator();
            let f = match (&args.input, &args.inline, args.ball) {
                (Some(p), None, None) => serde_json::from_str::<RadialFunction>(&read_source(p)?)?,
                (None, Some(s), None) => RadialFunction::new(args.n, parse_inline(s)?)?,
                (None, None, Some(r)) => RadialFunction::ball(args.n, r, 1.0)?,
                _ => return Err(Error::param("apply needs exactly one of --input, --f or --ball")),
            };
            let values = op.eval_many(&f, &args.x, exec)?;
            let rows: Vec<Value> = args.x.iter().zip(&values).map(|(x, v)| json!({"x": x, "value": v})).collect();
            let mut report = json!({"operator": op, "input": f, "values": rows});
            if args.rearranged {
                let out = sample_output(&op, &f, &OutputWindow::default(), exec)?;
                report["rearranged"] = serde_json::to_value(rearrange_radial(&out))?;
            }
            Output::new("apply", &report)?.with_table(&rows)
        }
        Command::Certify { command: CertifyCommand::LowerBound(args) } => {
            let mut ec = ExperimentConfig::base(args.n, args.family, cli.out.clone());
            ec.operator = Some(args.operator.operator());
            ec.calderon = Some(args.calderon);
            ec.sigma = Some(args.sigma);
            ec.j_max = args.jmax;
            ec.t_range = (args.t_min, args.t_max);
            ec.grid_size = args.grid_size;
            ec.validate()?;
            // The normalization exponent does not enter the certificate; p = ∞ falls back to 1.
            let p = if args.sigma.p.is_finite() { args.sigma.p } else { 1.0 };
            let family = ExtremalSequence::new(p, args.n, radii(args.family, args.jmax)?)?;
            let mut cfg = CertifyConfig::new(
                args.operator.operator(),
                args.calderon,
                args.sigma,
                family,
                ec.t_range,
                ec.grid_size,
            )?;
            if let Some(t0) = args.t0 {
                cfg = cfg.with_t0(t0)?;
            }
            let cert = match (args.big_c, args.c) {
                (Some(big_c), Some(c)) => evaluate_certificate(&cfg, big_c, c, exec)?,
                (None, None) => certify_lower_bound(&cfg, exec)?,
                _ => return Err(Error::param("--C and --c must be given together")),
            };
            let mut report = serde_json::to_value(&cert)?;
            let mut failed = cert.verdict != Verdict::Valid;
            if let Some(factor) = args.recheck {
                if factor < 1 {
                    return Err(Error::param("--recheck needs a factor of at least 1"));
                }
                let re = recheck(&cfg, &cert, factor, exec)?;
                let stable = re.margin >= -1e-9 * cert.big_c;
                failed |= !stable;
                report["recheck"] = json!({"factor": factor, "margin": re.margin, "stable": stable});
            }
            let out = Output { name: "certify", report, table: None, failed };
            out.with_table(&cert.worst_per_j)
        }
        Command::Sweep { command: SweepCommand::WeakType(args) } => {
            let mut ec = ExperimentConfig::base(args.n, args.corpus, cli.out.clone());
            ec.operator = Some(args.operator.operator());
            ec.domain = Some(args.domain);
            ec.target = Some(args.target);
            ec.j_max = args.count;
            ec.seed = args.seed;
            ec.window =
                OutputWindow { per_decade: args.per_decade, outer_abs: args.outer_abs, ..OutputWindow::default() };
            ec.validate()?;
            let corpus = match args.corpus {
                RadiiLaw::Dilates => corpus::ball_dilates(args.n, args.count)?,
                RadiiLaw::Shrinking => corpus::shrinking_balls(args.n, args.count)?,
                RadiiLaw::Growing => {
                    (1..=args.count).map(|j| RadialFunction::ball(args.n, j as f64, 1.0)).collect::<Result<_>>()?
                }
                RadiiLaw::TwoBall => corpus::two_ball_profiles(args.seed, args.n, args.count)?,
            };
            let report =
                weak_type_sweep(&ec.operator.expect("set above"), args.domain, args.target, &corpus, &ec.window, exec)?;
            let mut out = Output::new("sweep", &report)?;
            out.report["config"] = serde_json::to_value(&ec)?;
            out.with_table(&report.rows)
        }
        Command::Experiment { command: ExperimentCommand::Nonimprove(args) } => {
            let mut ec = ExperimentConfig::base(args.n, RadiiLaw::Shrinking, cli.out.clone());
            ec.operator = Some(RnOperator::Riesz { gamma: args.gamma, with_constant: false });
            ec.j_max = args.jmax;
            ec.validate()?;
            let cfg = NonimproveConfig { n: args.n, ..NonimproveConfig::new(args.gamma, args.q, args.r, args.jmax) };
            let report = nonimprove_experiment(&cfg, exec)?;
            let mut out = Output::new("nonimprove", &report)?.with_table(&report.rows)?;
            out.failed = report.verdict == Verdict::Invalid;
            Ok(out)
        }
        Command::Probe { command: ProbeCommand::Membership(args) } => {
            if args.eps.is_empty() || args.t_cut.is_empty() {
                return Err(Error::param("membership needs --eps and --T lists"));
            }
            let rows = membership_divergence(args.q, args.r, &args.eps, &args.t_cut)?;
            Output::new("membership", &json!({"q": args.q, "r": Extended(args.r), "rows": rows}))?.with_table(&rows)
        }
        Command::Probe { command: ProbeCommand::Fatou(args) } => {
            let idx = LorentzIndex::new(args.p, args.q)?;
            let (family, limit) = match (&args.input, args.truncations) {
                (Some(path), None) => {
                    #[derive(Deserialize)]
                    struct FatouInput {
                        family: Vec<StepFunction>,
                        limit: Option<StepFunction>,
                    }
                    let inp: FatouInput = serde_json::from_str(&read_source(path)?)?;
                    let limit = match (inp.limit, args.limit_norm) {
                        (Some(g), None) => FatouLimit::Function(g),
                        (None, Some(v)) => FatouLimit::Norm(v),
                        _ => return Err(Error::param("give exactly one of a limit function or --limit-norm")),
                    };
                    (inp.family, limit)
                }
                (None, Some(k)) => {
                    let family = (1..=k as i32)
                        .map(|i| truncated_power(args.p, 10f64.powi(-i), 10f64.powi(i)))
                        .collect::<Result<Vec<_>>>()?;
                    let limit = args.limit_norm.ok_or_else(|| Error::param("truncation families need --limit-norm"))?;
                    (family, FatouLimit::Norm(limit))
                }
                _ => return Err(Error::param("fatou needs exactly one of --input or --truncations")),
            };
            let report = weak_fatou_probe(idx, &family, &limit, args.tolerance)?;
            let mut out = Output::new("fatou", &report)?;
            out.failed = !report.holds;
            Ok(out)
        }
    }
}

fn emit(cli: &Cli, out: &Output, stdout: &mut dyn Write) -> Result<()> {
    let text = match (&out.table, cli.csv) {
        (Some(table), true) => render_csv(table)?,
        _ => to_canonical_string(&out.report)?,
    };
    let path = cli.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|dir| {
            PathBuf::from(dir).join(format!(
                "{}.{}",
                out.name,
                if cli.csv && out.table.is_some() { "csv" } else { "json" }
            ))
        })
    });
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&p, text)?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs the command line `args` (including the program name) and returns the
/// process exit code. Errors are reported on stderr as JSON.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|out| {
        emit(&cli, &out, stdout)?;
        Ok(out.failed)
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            eprintln!("{}", json!({"error": e.code(), "message": e.to_string()}));
            e.exit_code()
        }
    }
}
