//! `ultraweights`: analyses, verification suites and CSV dumps.
//!
//! Exit status: 0 when every decided verdict is the expected one, 1 when
//! some check fails, 2 for configuration errors, 3 when a numerical budget
//! runs out.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use ultraweights::conjugate::{biconjugate, upper_conjugate, verify_sandwich, young_conjugate, SandwichConfig, SandwichKind};
use ultraweights::descriptor::{SequenceDescriptor, WeightDescriptor};
use ultraweights::flat::{FlatConfig, FlatFunction};
use ultraweights::gamma::{estimate_gamma, verify_index_identity, GammaConfig, IndexIdentity};
use ultraweights::jets::{check_ramified_membership, complexify, dbar_residual, jet_norm, ramify_jet, y_operator_coefficients, Jet};
use ultraweights::matrix::{MatrixCondition, Omega7Form, WeightMatrix, DEFAULT_INDICES};
use ultraweights::numeric::log_grid;
use ultraweights::sequence::{SequenceCondition, TailConfig, DEFAULT_P_MAX};
use ultraweights::surgery::{Majorant, SurgeryConfig, SurgeryWeight};
use ultraweights::verify::{self, GammaRecord, Suite, VerifyConfig};
use ultraweights::weight::{WeightCheckConfig, WeightCondition, WeightFunction};
use ultraweights::{ConditionReport, Error, Record, Summary};

const THREADS_ENV: &str = "ULTRAWEIGHTS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "ultraweights", version, about = "Weight functions, weight matrices, growth indices and flat functions")]
struct Cli {
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized jets and sampled quadrature points
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check conditions on a weight function or a weight sequence
    Analyze(AnalyzeArgs),
    /// Bracket the growth index, optionally with index identities
    Gamma(GammaArgs),
    /// Build the associated weight matrix and check matrix conditions
    Matrix(MatrixArgs),
    /// Tabulate a conjugate and check the conjugate inequalities
    Conjugate(ConjugateArgs),
    /// Construct the sectorial flat function and run its checks
    Flat(FlatArgs),
    /// Construct a surgery weight and verify the construction
    Surgery(SurgeryArgs),
    /// Jet norms, complexification, ramification and Y-operator coefficients
    Jets(JetsArgs),
    /// Run the verification suites on a corpus
    Verify(VerifyArgs),
    /// Write a CSV table
    Dump(DumpArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Weight,
    Sequence,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    target: Target,
    /// Weight or sequence descriptor
    #[arg(long)]
    spec: String,
    /// Comma-separated condition tags (default: all for the target)
    #[arg(long, value_delimiter = ',')]
    conditions: Vec<String>,
    /// Tabulated length for sequence descriptors
    #[arg(long, default_value_t = DEFAULT_P_MAX)]
    p_max: usize,
    #[arg(long)]
    tail_lo: Option<f64>,
    #[arg(long)]
    tail_hi: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 10.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
    /// Skip the doubled-window stability re-run
    #[arg(long)]
    no_stability: bool,
    /// Comma-separated index identities (snq, om1, upper-shift, matrix-rows, lower-shift, hat-rows, scaling)
    #[arg(long, value_delimiter = ',')]
    identities: Vec<String>,
}

#[derive(Args, Debug)]
struct MatrixArgs {
    #[arg(long)]
    spec: String,
    #[arg(long, value_delimiter = ',')]
    indices: Vec<f64>,
    #[arg(long, default_value_t = ultraweights::matrix::DEFAULT_P_MAX)]
    p_max: usize,
    /// Comma-separated matrix conditions (mg_roumieu, mg_beurling, L_roumieu, L_beurling, constant, sc, omega7-doubling, omega7-square)
    #[arg(long, value_delimiter = ',')]
    conditions: Vec<String>,
    /// Also write `l,p,logW` rows here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConjugateKind {
    Young,
    Upper,
    Biconjugate,
}

#[derive(Args, Debug)]
struct ConjugateArgs {
    #[arg(long)]
    spec: String,
    #[arg(long, value_enum, default_value = "upper")]
    kind: ConjugateKind,
    #[arg(long, default_value_t = 1e-3)]
    from: f64,
    #[arg(long, default_value_t = 1e3)]
    to: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Check the conjugate inequality families at these indices
    #[arg(long, value_delimiter = ',')]
    sandwich: Vec<f64>,
    /// Also write `x,value,arg` rows here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FlatArgs {
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Sector opening
    #[arg(long, default_value_t = 1.5)]
    gamma: f64,
    /// Lower estimate of the index of the reciprocal upper conjugate; estimated when absent
    #[arg(long)]
    gamma_e: Option<f64>,
    #[arg(long, default_value_t = 6)]
    j_max: usize,
    /// Also write `r,theta,absG,argG` rows on the sector grid here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SurgeryArgs {
    #[arg(long)]
    spec: String,
    /// Majorant h(t) = t^e
    #[arg(long, default_value_t = 0.75)]
    majorant_exponent: f64,
    #[arg(long, default_value_t = 1.5)]
    gamma: f64,
    /// Witness K of the index property; estimated when absent
    #[arg(long)]
    k: Option<f64>,
    #[arg(long, default_value_t = 1e12)]
    x_max: f64,
}

#[derive(Args, Debug)]
struct JetsArgs {
    /// Weight whose matrix row measures the jet
    #[arg(long, default_value = "gevrey:s=2")]
    spec: String,
    /// Matrix index of the row
    #[arg(long, default_value_t = 1.0)]
    l: f64,
    /// Jet CSV (`p,re,im`); a seeded random jet of this order otherwise
    #[arg(long)]
    jet: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    order: usize,
    #[arg(long, default_value_t = 2)]
    q: usize,
    #[arg(long, default_value_t = 20)]
    j_max: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    /// Weight descriptors (default corpus when absent)
    #[arg(long)]
    corpus: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DumpKind {
    /// `p,logM`
    Sequence,
    /// `t,omega`
    Weight,
    /// `l,p,logW`
    Matrix,
    /// `r,theta,absG,argG`
    Flat,
    /// `p,re,im`
    Jet,
}

#[derive(Args, Debug)]
struct DumpArgs {
    kind: DumpKind,
    #[arg(long)]
    spec: String,
    #[arg(long, default_value_t = 128)]
    p_max: usize,
    #[arg(long, default_value_t = 1e-2)]
    from: f64,
    #[arg(long, default_value_t = 1e8)]
    to: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Matrix index (matrix, jet)
    #[arg(long, value_delimiter = ',')]
    indices: Vec<f64>,
}

/// Structured output of every subcommand.
#[derive(Serialize)]
struct Report {
    tool_version: &'static str,
    command: &'static str,
    config: BTreeMap<&'static str, String>,
    records: Vec<Record>,
    gamma_estimates: Vec<GammaRecord>,
    data: Value,
    summary: Summary,
}

impl Report {
    fn new(command: &'static str) -> Self {
        Report {
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            config: BTreeMap::new(),
            records: Vec::new(),
            gamma_estimates: Vec::new(),
            data: Value::Null,
            summary: Summary::default(),
        }
    }

    fn set(&mut self, k: &'static str, v: impl ToString) {
        self.config.insert(k, v.to_string());
    }

    fn push(&mut self, r: ConditionReport, subject: &str) {
        self.records.push(Record::expect_holds(self.command, subject, r));
    }
}

enum Failure {
    Config(String),
    Budget(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::InvalidInput(_) | Error::Io(_) | Error::Domain(_) => Failure::Config(e.to_string()),
            _ if e.is_budget() => Failure::Budget(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(f) = configure_threads() {
        return report_failure(f);
    }
    match run(&cli) {
        Ok(Some(mut rep)) => {
            rep.summary = Summary::of(&rep.records);
            if let Err(f) = emit(&rep, cli.out.as_deref()) {
                return report_failure(f);
            }
            if rep.summary.unexpected > 0 {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    let (code, msg) = match f {
        Failure::Config(m) => (2, m),
        Failure::Budget(m) => (3, m),
        Failure::Numeric(m) => (1, m),
    };
    eprintln!("ultraweights: {msg}");
    ExitCode::from(code)
}

fn configure_threads() -> Outcome<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    if n == 0 {
        return Err(Failure::Config(format!("{THREADS_ENV} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn emit(rep: &Report, out: Option<&Path>) -> Outcome<()> {
    let text = serde_json::to_string_pretty(rep).map_err(|e| Failure::Config(e.to_string()))?;
    match out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => {
            let mut so = io::stdout().lock();
            writeln!(so, "{text}")?;
        }
    }
    Ok(())
}

fn csv_sink(path: &Path) -> Outcome<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn parse_weight(s: &str) -> Outcome<(WeightDescriptor, WeightFunction)> {
    let d = WeightDescriptor::parse(s)?;
    let w = d.build()?;
    Ok((d, w))
}

fn parse_sequence_condition(tag: &str) -> Outcome<SequenceCondition> {
    Ok(match tag {
        "lc" => SequenceCondition::Lc,
        "slc" => SequenceCondition::Slc,
        "mg" => SequenceCondition::Mg,
        "nq" => SequenceCondition::Nq,
        "beta1" => SequenceCondition::Beta1,
        "gamma1" => SequenceCondition::Gamma1,
        _ => return Err(Failure::Config(format!("unknown sequence condition '{tag}'"))),
    })
}

fn run(cli: &Cli) -> Outcome<Option<Report>> {
    Ok(Some(match &cli.command {
        Command::Analyze(a) => analyze(a)?,
        Command::Gamma(a) => gamma(a)?,
        Command::Matrix(a) => matrix(a)?,
        Command::Conjugate(a) => conjugate(a)?,
        Command::Flat(a) => flat(a, cli.seed)?,
        Command::Surgery(a) => surgery(a)?,
        Command::Jets(a) => jets(a, cli.seed)?,
        Command::Verify(a) => run_verify(a, cli.seed)?,
        Command::Dump(a) => {
            dump(a, cli.seed)?;
            return Ok(None);
        }
    }))
}

fn analyze(a: &AnalyzeArgs) -> Outcome<Report> {
    let mut rep = Report::new("analyze");
    rep.set("spec", &a.spec);
    match a.target {
        Target::Weight => {
            let (_, w) = parse_weight(&a.spec)?;
            let conds: Vec<WeightCondition> = if a.conditions.is_empty() {
                WeightCondition::ALL.to_vec()
            } else {
                a.conditions.iter().map(|c| WeightCondition::parse(c)).collect::<Result<_, _>>()?
            };
            let mut cfg = WeightCheckConfig::default();
            cfg.tail_lo = a.tail_lo.unwrap_or(cfg.tail_lo);
            cfg.tail_hi = a.tail_hi.unwrap_or(cfg.tail_hi);
            cfg.margin = a.margin.unwrap_or(cfg.margin);
            if !(cfg.tail_lo > 0.0 && cfg.tail_hi > cfg.tail_lo) {
                return Err(Failure::Config("tail window must satisfy 0 < tail-lo < tail-hi".into()));
            }
            rep.set("target", "weight");
            rep.set("conditions", conds.iter().map(|c| c.tag()).collect::<Vec<_>>().join(","));
            rep.set("tail", format!("[{:e}, {:e}] x {}", cfg.tail_lo, cfg.tail_hi, cfg.tail_points));
            rep.set("margin", cfg.margin);
            rep.push(w.check_axioms(&cfg), &a.spec);
            for c in conds {
                rep.push(w.check_condition(c, &cfg), &a.spec);
            }
        }
        Target::Sequence => {
            let d = SequenceDescriptor::parse(&a.spec)?;
            let conds: Vec<SequenceCondition> = if a.conditions.is_empty() {
                ["lc", "slc", "mg", "nq", "beta1", "gamma1"].iter().map(|c| parse_sequence_condition(c)).collect::<Outcome<_>>()?
            } else {
                a.conditions.iter().map(|c| parse_sequence_condition(c)).collect::<Outcome<_>>()?
            };
            let m = d.build(a.p_max)?;
            let cfg = TailConfig {
                margin: a.margin.unwrap_or(TailConfig::default().margin),
            };
            rep.set("target", "sequence");
            rep.set("p_max", a.p_max);
            rep.set("conditions", conds.iter().map(|c| c.tag()).collect::<Vec<_>>().join(","));
            for c in &conds {
                rep.push(m.check_condition(c, cfg), &a.spec);
            }
        }
    }
    Ok(rep)
}

fn gamma(a: &GammaArgs) -> Outcome<Report> {
    let (_, w) = parse_weight(&a.spec)?;
    let ids: Vec<IndexIdentity> = a.identities.iter().map(|t| IndexIdentity::parse(t)).collect::<Result<_, _>>()?;
    if !(a.gamma_max > 0.0 && a.tol > 0.0) {
        return Err(Failure::Config("gamma-max and tol must be positive".into()));
    }
    let cfg = GammaConfig {
        gamma_max: a.gamma_max,
        tol: a.tol,
        stability_check: !a.no_stability,
        ..GammaConfig::default()
    };
    let mut rep = Report::new("gamma");
    rep.set("spec", &a.spec);
    rep.set("gamma_max", a.gamma_max);
    rep.set("tol", a.tol);
    rep.set("stability_check", !a.no_stability);
    let e = estimate_gamma(&w, &cfg)?;
    rep.push(verify::gamma_bracket_report(&a.spec, &e, None, f64::INFINITY), &a.spec);
    rep.gamma_estimates.push(GammaRecord {
        subject: a.spec.clone(),
        estimate: e,
    });
    for id in ids {
        rep.push(verify_index_identity(id, &w, &cfg), &a.spec);
    }
    Ok(rep)
}

fn matrix(a: &MatrixArgs) -> Outcome<Report> {
    let (_, w) = parse_weight(&a.spec)?;
    let mut conds = Vec::new();
    let mut forms = Vec::new();
    for c in &a.conditions {
        match c.as_str() {
            "omega7-doubling" => forms.push(Omega7Form::Doubling),
            "omega7-square" => forms.push(Omega7Form::Square),
            _ => conds.push(MatrixCondition::parse(c)?),
        }
    }
    let idx = if a.indices.is_empty() { DEFAULT_INDICES.to_vec() } else { a.indices.clone() };
    let m = WeightMatrix::build(&w, &idx, a.p_max)?;
    let mut rep = Report::new("matrix");
    rep.set("spec", &a.spec);
    rep.set("indices", format!("{idx:?}"));
    rep.set("p_max", a.p_max);
    rep.push(m.check_monotone(), &a.spec);
    for c in conds {
        rep.push(m.check_condition(c), &a.spec);
    }
    for f in forms {
        rep.push(m.check_omega7(f), &a.spec);
    }
    if let Some(p) = &a.csv {
        m.write_csv(csv_sink(p)?)?;
        rep.set("csv", p.display());
    }
    Ok(rep)
}

fn conjugate(a: &ConjugateArgs) -> Outcome<Report> {
    let (_, w) = parse_weight(&a.spec)?;
    if !(a.from > 0.0 && a.to > a.from && a.points >= 2) {
        return Err(Failure::Config("need 0 < from < to and at least two points".into()));
    }
    let xs = log_grid(a.from, a.to, a.points);
    let mut rep = Report::new("conjugate");
    rep.set("spec", &a.spec);
    rep.set("kind", format!("{:?}", a.kind).to_lowercase());
    rep.set("grid", format!("[{:e}, {:e}] x {}", a.from, a.to, a.points));
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let c = match a.kind {
            ConjugateKind::Young => young_conjugate(&w, x)?,
            ConjugateKind::Upper => upper_conjugate(&w, x)?,
            ConjugateKind::Biconjugate => biconjugate(&w, x)?,
        };
        rows.push((x, c.value, c.arg));
    }
    if let ConjugateKind::Biconjugate = a.kind {
        rep.push(
            verify::agreement("biconjugate", "young-biconjugate", &xs, 1e-6, |y| Ok((biconjugate(&w, y)?.value, w.phi(y)?))),
            &a.spec,
        );
    }
    let cfg = SandwichConfig::default();
    for &x in &a.sandwich {
        if x.is_nan() || x <= 0.0 {
            return Err(Failure::Config("sandwich indices must be positive".into()));
        }
        for k in [
            SandwichKind::MatrixConjugate { weight: w.clone(), x },
            SandwichKind::SmallSequence { weight: w.clone(), x },
            SandwichKind::HForm { weight: w.clone(), x },
        ] {
            rep.push(verify_sandwich(&k, &cfg), &format!("{}, x = {x}", a.spec));
        }
    }
    if let Some(p) = &a.csv {
        let mut wr = csv_sink(p)?;
        writeln!(wr, "x,value,arg")?;
        for (x, v, g) in &rows {
            writeln!(wr, "{x:.17e},{v:.17e},{g:.17e}")?;
        }
        wr.flush()?;
        rep.set("csv", p.display());
    }
    rep.data = json!({ "rows": rows });
    Ok(rep)
}

fn flat(a: &FlatArgs, seed: u64) -> Outcome<Report> {
    let (_, w) = parse_weight(&a.spec)?;
    let cfg = FlatConfig {
        a: a.a,
        gamma: a.gamma,
        gamma_e: a.gamma_e,
        ..FlatConfig::default()
    };
    let f = FlatFunction::new(&w, cfg)?;
    let mut rep = Report::new("flat");
    rep.set("spec", &a.spec);
    rep.set("a", a.a);
    rep.set("gamma", a.gamma);
    rep.set("j_max", a.j_max);
    let grid = f.sector_grid();
    rep.push(f.check_two_sided_bound(&grid), &a.spec);
    rep.push(f.check_flat_at_zero(1e-12, 20), &a.spec);
    rep.push(f.check_mesh_halving(seed), &a.spec);
    rep.push(f.check_finite_difference(), &a.spec);
    rep.push(f.check_cauchy_riemann(), &a.spec);
    rep.push(f.check_derivative_bound(&grid[..grid.len().min(40)], a.j_max), &a.spec);
    let (lo, hi, n) = verify::FLAT_RAY_GRID;
    rep.push(f.check_flatness_on_ray(&log_grid(lo, hi, n), a.j_max), &a.spec);
    rep.data = json!({
        "gamma_e": f.gamma_e(),
        "delta": f.delta(),
        "s": f.s(),
        "eps": f.eps(),
        "kernel_exponent": f.kernel_exponent(),
    });
    if let Some(p) = &a.csv {
        f.write_grid_csv(&grid, csv_sink(p)?)?;
        rep.set("csv", p.display());
    }
    Ok(rep)
}

fn surgery(a: &SurgeryArgs) -> Outcome<Report> {
    let (_, w) = parse_weight(&a.spec)?;
    let e = a.majorant_exponent;
    if !(e > 0.0 && e <= 1.0) {
        return Err(Failure::Config("majorant exponent must lie in (0, 1]".into()));
    }
    let h: Majorant = Arc::new(move |t: f64| t.powf(e));
    let cfg = SurgeryConfig {
        k: a.k,
        x_max: a.x_max,
        ..SurgeryConfig::default()
    };
    let sw = SurgeryWeight::build(w, h, format!("t^{e}"), a.gamma, cfg)?;
    let mut rep = Report::new("surgery");
    rep.set("spec", &a.spec);
    rep.set("majorant", format!("t^{e}"));
    rep.set("gamma", a.gamma);
    for r in sw.verify() {
        rep.push(r, &a.spec);
    }
    rep.data = json!({
        "K": sw.k(),
        "breakpoints": sw.breakpoints(),
        "partial_sums": sw.partial_sums(),
    });
    let est = estimate_gamma(&WeightFunction::surgery(sw), &GammaConfig::default())?;
    rep.gamma_estimates.push(GammaRecord {
        subject: format!("surgery of {}", a.spec),
        estimate: est,
    });
    Ok(rep)
}

fn jets(a: &JetsArgs, seed: u64) -> Outcome<Report> {
    let (_, w) = parse_weight(&a.spec)?;
    if a.q == 0 || a.j_max == 0 || a.j_max > ultraweights::jets::Y_MAX {
        return Err(Failure::Config(format!("need q >= 1 and 1 <= j-max <= {}", ultraweights::jets::Y_MAX)));
    }
    let mut rep = Report::new("jets");
    rep.set("spec", &a.spec);
    rep.set("l", a.l);
    rep.set("q", a.q);
    rep.set("j_max", a.j_max);
    let order = match &a.jet {
        Some(p) => Jet::load_csv(p)?.order(),
        None => a.order,
    };
    let m = WeightMatrix::build(&w, &[a.l], order.max(2))?;
    let row = m.row(a.l)?;
    let jet = match &a.jet {
        Some(p) => {
            rep.set("jet", p.display());
            Jet::load_csv(p)?
        }
        None => {
            rep.set("jet", format!("random, order {order}, seed {seed}"));
            Jet::random(seed, &truncate(row, order)?)
        }
    };
    let c = complexify(&jet)?;
    let norm = jet_norm(&jet, row)?;
    let cnorm = jet_norm(&c, row)?;
    let dbar = dbar_residual(&c)?;
    let base = ConditionReport::new("dbar-flat", "complexified-jet-dbar").range(format!("order {order}"));
    rep.push(if dbar == 0.0 { base.holds(vec![("residual", 0.0)]) } else { base.fails(dbar) }, &a.spec);
    let base = ConditionReport::new("complexified-norm", "complexified-jet-norm").range(format!("order {order}"));
    rep.push(if norm == cnorm { base.holds(vec![("norm", norm)]) } else { base.fails(cnorm - norm) }, &a.spec);
    rep.push(check_ramified_membership(&jet, &w, a.q, &[0.5 * a.l, a.l, 2.0 * a.l, 4.0 * a.l]), &a.spec);
    let y = y_operator_coefficients(a.q, a.j_max)?;
    rep.push(y.check_bound(), &format!("q = {}", a.q));
    let star = ramify_jet(&jet, a.q)?;
    rep.data = json!({
        "norm": norm,
        "ramified": star.coeffs().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "y_coefficients": y,
    });
    Ok(rep)
}

/// First `order + 1` entries of a row.
fn truncate(row: &ultraweights::sequence::WeightSequence, order: usize) -> Outcome<ultraweights::sequence::WeightSequence> {
    Ok(ultraweights::sequence::WeightSequence::from_log_values(
        row.label(),
        row.log_values()[..=order.min(row.p_max())].to_vec(),
    )?)
}

fn run_verify(a: &VerifyArgs, seed: u64) -> Outcome<Report> {
    let suite: Suite = a.suite.parse()?;
    let mut cfg = VerifyConfig {
        suite,
        seed,
        ..VerifyConfig::default()
    };
    if !a.corpus.is_empty() {
        cfg.corpus = a.corpus.iter().map(|s| WeightDescriptor::parse(s)).collect::<Result<_, _>>()?;
    }
    let mut rep = Report::new("verify");
    rep.set("suite", suite.name());
    rep.set("seed", seed);
    rep.set("corpus", cfg.corpus.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "));
    let out = verify::run(&cfg)?;
    rep.records = out.records;
    rep.gamma_estimates = out.gamma_estimates;
    Ok(rep)
}

fn dump(a: &DumpArgs, seed: u64) -> Outcome<()> {
    let stdout = io::stdout();
    let mut so = stdout.lock();
    match a.kind {
        DumpKind::Sequence => {
            SequenceDescriptor::parse(&a.spec)?.build(a.p_max)?.write_csv(&mut so)?;
        }
        DumpKind::Weight => {
            let (_, w) = parse_weight(&a.spec)?;
            if !(a.from > 0.0 && a.to > a.from && a.points >= 2) {
                return Err(Failure::Config("need 0 < from < to and at least two points".into()));
            }
            writeln!(so, "t,omega")?;
            for t in log_grid(a.from, a.to, a.points) {
                writeln!(so, "{t:.17e},{:.17e}", w.eval(t)?)?;
            }
        }
        DumpKind::Matrix => {
            let (_, w) = parse_weight(&a.spec)?;
            let idx = if a.indices.is_empty() { DEFAULT_INDICES.to_vec() } else { a.indices.clone() };
            WeightMatrix::build(&w, &idx, a.p_max)?.write_csv(&mut so)?;
        }
        DumpKind::Flat => {
            let (_, w) = parse_weight(&a.spec)?;
            let f = FlatFunction::new(&w, FlatConfig::default())?;
            f.write_grid_csv(&f.sector_grid(), &mut so)?;
        }
        DumpKind::Jet => {
            let (_, w) = parse_weight(&a.spec)?;
            let l = a.indices.first().copied().unwrap_or(1.0);
            let m = WeightMatrix::build(&w, &[l], a.p_max)?;
            Jet::random(seed, m.row(l)?).write_csv(&mut so)?;
        }
    }
    so.flush()?;
    Ok(())
}
