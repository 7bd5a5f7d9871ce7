//! Command-line front end.
//!
//! # Input grammar
//!
//! ```text
//! # comments run from '#' to the end of the line; blank lines are ignored
//! m=<positive integer>          first significant line
//! a_1,a_2,...,a_m               one generator exponent vector per line
//! ```
//!
//! Exponents are non-negative integers; whitespace around numbers is
//! allowed. Every error names the 1-based line it occurred on.
//!
//! Coordinates given on the command line (`--p`, `--s`, `--t`) and box
//! selectors (`--box`) are 1-based, as are the shuffles and box coordinates
//! in the JSON output.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use crate::complex::{oracle_sweep, BoxComplex, ExactnessReport, SweepReport};
use crate::error::{Error, Result};
use crate::exact::parse_rational;
use crate::geometry::{khom_formal_sum, KhomReport};
use crate::ideal::MonomialIdeal;
use crate::lattice::{LatticeBox, MultiIndex};
use crate::toeplitz::{
    decay_profile, projection_commutator, quotient_toeplitz, schatten_partial_sums, self_commutator,
    toeplitz_matrix, DecayProfile, SchattenReport, TruncatedOperator,
};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub cutoff: u32,
    pub dedupe: bool,
    pub weight: u32,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            cutoff: 8,
            dedupe: true,
            weight: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealSpec {
    pub m: usize,
    pub generators: Vec<Vec<u32>>,
    pub options: Options,
}

impl IdealSpec {
    pub fn ideal(&self) -> Result<MonomialIdeal> {
        let gens = self
            .generators
            .iter()
            .map(|g| MultiIndex::new(g.clone()))
            .collect::<Result<Vec<_>>>()?;
        MonomialIdeal::new(self.m, gens)
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_ideal(text: &str) -> Result<IdealSpec> {
    let mut m: Option<usize> = None;
    let mut generators = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(dim) = m else {
            let value = line
                .strip_prefix('m')
                .map(str::trim_start)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| parse_error(line_no, "expected a header of the form m=<int>"))?;
            let dim: usize = value
                .trim()
                .parse()
                .map_err(|_| parse_error(line_no, format!("invalid dimension {:?}", value.trim())))?;
            if dim == 0 {
                return Err(parse_error(line_no, "dimension must be at least 1"));
            }
            m = Some(dim);
            continue;
        };
        let mut exponents = Vec::with_capacity(dim);
        for field in line.split(',') {
            let field = field.trim();
            if field.starts_with('-') && field[1..].parse::<u64>().is_ok() {
                return Err(parse_error(line_no, format!("negative exponent {field}")));
            }
            let value: u32 = field
                .parse()
                .map_err(|_| parse_error(line_no, format!("malformed exponent {field:?}")))?;
            exponents.push(value);
        }
        if exponents.len() != dim {
            return Err(parse_error(
                line_no,
                format!("expected {dim} exponents, found {}", exponents.len()),
            ));
        }
        generators.push(exponents);
    }
    let m = m.ok_or_else(|| parse_error(last_line.max(1), "missing header m=<int>"))?;
    if generators.is_empty() {
        return Err(parse_error(last_line, "no generators given"));
    }
    Ok(IdealSpec {
        m,
        generators,
        options: Options::default(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
    Mm,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    /// `T_{z_p}` on the selected box space.
    #[default]
    Shift,
    /// `[P, T_{z_s}]` for the selected box projection.
    ProjectionCommutator,
    /// `T_s* T_t - T_t T_s*` on the selected box space.
    SelfCommutator,
    /// `T_{z_p}` compressed to the quotient by the ideal.
    Quotient,
}

#[derive(Debug, Parser)]
#[command(name = "boxres", version, about = "Box resolutions of monomial ideals in the Bergman space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Boxes, level dimensions and the exactness report.
    Resolve(CommonArgs),
    /// Exactness checks only.
    Exactness(CommonArgs),
    /// A truncated Toeplitz operator with its decay profile.
    Toeplitz(ToeplitzArgs),
    /// Formal alternating sum over the levels.
    Khom(CommonArgs),
    /// Per-multidegree simplicial verification.
    Oracle(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "m-cutoff", default_value_t = 8)]
    pub cutoff: u32,
    #[arg(long)]
    pub no_dedupe: bool,
    #[arg(long, default_value_t = 0)]
    pub weight: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToeplitzArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = OperatorKind::Shift)]
    pub op: OperatorKind,
    /// 1-based box position, or `full` for the whole space.
    #[arg(long = "box", default_value = "1")]
    pub region: String,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    /// Schatten exponent, an integer or `p/q`.
    #[arg(long)]
    pub schatten: Option<String>,
    /// Comma-separated cutoffs for the Schatten partial sums.
    #[arg(long)]
    pub schatten_cutoffs: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub body: String,
}

impl Outcome {
    fn new(pass: bool, body: String) -> Self {
        Self {
            code: if pass { EXIT_PASS } else { EXIT_CHECK_FAILED },
            body,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    text
}

fn no_matrix_market(command: &str) -> Error {
    Error::Selector(format!("format mm is only available for toeplitz, not {command}"))
}

#[derive(Serialize)]
struct ComponentJson<'a> {
    shuffle: Vec<usize>,
    #[serde(rename = "box")]
    region: &'a LatticeBox,
    dim: usize,
}

#[derive(Serialize)]
struct LevelJson<'a> {
    q: usize,
    dim: usize,
    components: Vec<ComponentJson<'a>>,
}

#[derive(Serialize)]
struct ResolveJson<'a> {
    schema_version: u32,
    command: &'static str,
    ideal: &'a MonomialIdeal,
    cutoff: u32,
    dedupe: bool,
    k: usize,
    boxes: &'a [LatticeBox],
    levels: Vec<LevelJson<'a>>,
    exactness: &'a ExactnessReport,
    pass: bool,
}

fn build(spec: &IdealSpec) -> Result<BoxComplex> {
    if spec.options.cutoff == 0 {
        return Err(Error::ZeroCutoff);
    }
    BoxComplex::build(&spec.ideal()?, spec.options.cutoff, spec.options.dedupe)
}

fn exactness_csv(report: &ExactnessReport) -> String {
    let mut out = String::from("check,level,expected,actual,pass\n");
    for c in &report.checks {
        out.push_str(&format!("{},{},{},{},{}\n", c.name, c.level, c.expected, c.actual, c.pass));
    }
    out
}

pub fn cmd_resolve(spec: &IdealSpec, format: Format) -> Result<Outcome> {
    let cx = build(spec)?;
    let report = cx.exactness_report()?;
    let body = match format {
        Format::Json => {
            let levels = cx
                .levels()
                .iter()
                .map(|level| LevelJson {
                    q: level.q,
                    dim: level.dim(),
                    components: level
                        .components
                        .iter()
                        .map(|c| ComponentJson {
                            shuffle: c.shuffle.one_based(),
                            region: &c.region,
                            dim: c.points.len(),
                        })
                        .collect(),
                })
                .collect();
            to_json(&ResolveJson {
                schema_version: SCHEMA_VERSION,
                command: "resolve",
                ideal: cx.ideal(),
                cutoff: cx.cutoff(),
                dedupe: cx.dedupe(),
                k: cx.k(),
                boxes: cx.boxes(),
                levels,
                exactness: &report,
                pass: report.pass,
            })
        }
        Format::Csv => {
            let mut out = String::from("level,dim,rank\n");
            for (q, dim) in report.dims.iter().enumerate() {
                let rank = report.ranks.get(q).map(ToString::to_string).unwrap_or_default();
                out.push_str(&format!("{q},{dim},{rank}\n"));
            }
            out
        }
        Format::Mm => return Err(no_matrix_market("resolve")),
    };
    Ok(Outcome::new(report.pass, body))
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    report: &'a T,
}

pub fn cmd_exactness(spec: &IdealSpec, format: Format) -> Result<Outcome> {
    let report = build(spec)?.exactness_report()?;
    let body = match format {
        Format::Json => to_json(&Envelope {
            schema_version: SCHEMA_VERSION,
            command: "exactness",
            report: &report,
        }),
        Format::Csv => exactness_csv(&report),
        Format::Mm => return Err(no_matrix_market("exactness")),
    };
    Ok(Outcome::new(report.pass, body))
}

pub fn cmd_oracle(spec: &IdealSpec, format: Format) -> Result<Outcome> {
    let report: SweepReport = oracle_sweep(&build(spec)?)?;
    let pass = report.all_exact && report.all_match_global && report.consistent;
    let body = match format {
        Format::Json => to_json(&Envelope {
            schema_version: SCHEMA_VERSION,
            command: "oracle",
            report: &report,
        }),
        Format::Csv => {
            let mut out = String::from("level,summed_dim,global_dim,summed_rank,global_rank\n");
            for q in 0..report.global_dims.len() {
                let rank = |v: &[usize]| v.get(q).map(ToString::to_string).unwrap_or_default();
                out.push_str(&format!(
                    "{q},{},{},{},{}\n",
                    report.summed_dims[q],
                    report.global_dims[q],
                    rank(&report.summed_ranks),
                    rank(&report.global_ranks)
                ));
            }
            out
        }
        Format::Mm => return Err(no_matrix_market("oracle")),
    };
    Ok(Outcome::new(pass, body))
}

pub fn cmd_khom(spec: &IdealSpec, format: Format) -> Result<Outcome> {
    let report: KhomReport = khom_formal_sum(&build(spec)?);
    let body = match format {
        Format::Json => to_json(&Envelope {
            schema_version: SCHEMA_VERSION,
            command: "khom",
            report: &report,
        }),
        Format::Csv => {
            let mut out = String::from("level,sign,shuffle,base_dim,rank,fiber_weights\n");
            let join = |v: &[String]| v.join(";");
            for term in &report.terms {
                for c in &term.components {
                    let shuffle: Vec<String> = c.shuffle.iter().map(ToString::to_string).collect();
                    let weights: Vec<String> = c.bundle.fiber_weights.iter().map(ToString::to_string).collect();
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        term.level,
                        term.sign,
                        join(&shuffle),
                        c.bundle.base_dim,
                        c.bundle.rank,
                        join(&weights)
                    ));
                }
            }
            out
        }
        Format::Mm => return Err(no_matrix_market("khom")),
    };
    Ok(Outcome::new(true, body))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToeplitzRequest {
    pub op: OperatorKind,
    /// 1-based box position; `None` selects the whole space.
    pub region: Option<usize>,
    pub p: usize,
    pub s: usize,
    pub t: usize,
    pub schatten: Option<BigRational>,
    pub schatten_cutoffs: Option<Vec<u32>>,
}

impl ToeplitzRequest {
    fn from_args(args: &ToeplitzArgs) -> Result<Self> {
        let region = match args.region.trim() {
            "full" => None,
            other => Some(
                other
                    .parse::<usize>()
                    .map_err(|_| Error::Selector(format!("box must be a positive integer or 'full', got {other:?}")))?,
            ),
        };
        let schatten = args
            .schatten
            .as_deref()
            .map(|s| parse_rational(s).ok_or_else(|| Error::Selector(format!("invalid Schatten exponent {s:?}"))))
            .transpose()?;
        let schatten_cutoffs = args
            .schatten_cutoffs
            .as_deref()
            .map(|list| {
                list.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::Selector(format!("invalid cutoff {v:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Self {
            op: args.op,
            region,
            p: args.p,
            s: args.s,
            t: args.t,
            schatten,
            schatten_cutoffs,
        })
    }
}

fn zero_based(name: &str, value: usize, m: usize) -> Result<usize> {
    if value == 0 || value > m {
        return Err(Error::Selector(format!("--{name} must lie in 1..={m}, got {value}")));
    }
    Ok(value - 1)
}

#[derive(Serialize)]
struct OperatorJson {
    kind: OperatorKind,
    #[serde(rename = "box")]
    region: Option<LatticeBox>,
    coordinates: Vec<usize>,
    weight: u32,
    cutoff: u32,
}

#[derive(Serialize)]
struct ToeplitzJson<'a> {
    schema_version: u32,
    command: &'static str,
    operator: OperatorJson,
    matrix: &'a TruncatedOperator,
    decay: &'a DecayProfile,
    schatten: Option<&'a SchattenReport>,
}

fn default_schatten_cutoffs(cutoff: u32) -> Vec<u32> {
    let mut cuts: Vec<u32> = (1..=4).map(|i| (cutoff - 1) * i / 4).filter(|&c| c >= 1).collect();
    cuts.dedup();
    cuts
}

pub fn cmd_toeplitz(spec: &IdealSpec, request: &ToeplitzRequest, format: Format) -> Result<Outcome> {
    let ideal = spec.ideal()?;
    if ideal.is_unit() {
        return Err(Error::UnitIdeal);
    }
    let Options { cutoff, dedupe, weight } = spec.options;
    if cutoff == 0 {
        return Err(Error::ZeroCutoff);
    }
    let m = ideal.ambient_dim();
    let boxes = ideal.boxes_from_generators(dedupe);
    let region = match request.region {
        None => LatticeBox::full(m),
        Some(i) if i >= 1 && i <= boxes.len() => boxes[i - 1].clone(),
        Some(i) => {
            return Err(Error::Selector(format!("--box must lie in 1..={} or be 'full', got {i}", boxes.len())))
        }
    };
    let (matrix, coordinates, region_json) = match request.op {
        OperatorKind::Shift => {
            let p = zero_based("p", request.p, m)?;
            (toeplitz_matrix(&region, p, cutoff, weight)?, vec![p + 1], Some(region))
        }
        OperatorKind::ProjectionCommutator => {
            let s = zero_based("s", request.s, m)?;
            (projection_commutator(&region, s, cutoff, weight)?, vec![s + 1], Some(region))
        }
        OperatorKind::SelfCommutator => {
            let s = zero_based("s", request.s, m)?;
            let t = zero_based("t", request.t, m)?;
            (self_commutator(&region, s, t, cutoff, weight)?, vec![s + 1, t + 1], Some(region))
        }
        OperatorKind::Quotient => {
            let p = zero_based("p", request.p, m)?;
            (quotient_toeplitz(&ideal, p, cutoff, weight)?, vec![p + 1], None)
        }
    };
    let decay = decay_profile(&matrix);
    let schatten = match &request.schatten {
        Some(p) => {
            let cuts = request
                .schatten_cutoffs
                .clone()
                .unwrap_or_else(|| default_schatten_cutoffs(cutoff));
            Some(schatten_partial_sums(&matrix, p, &cuts)?)
        }
        None => None,
    };
    let body = match format {
        Format::Json => to_json(&ToeplitzJson {
            schema_version: SCHEMA_VERSION,
            command: "toeplitz",
            operator: OperatorJson {
                kind: request.op,
                region: region_json,
                coordinates,
                weight,
                cutoff,
            },
            matrix: &matrix,
            decay: &decay,
            schatten: schatten.as_ref(),
        }),
        Format::Csv => decay.to_csv(),
        Format::Mm => matrix.to_matrix_market(),
    };
    Ok(Outcome::new(true, body))
}

fn load(common: &CommonArgs) -> Result<IdealSpec> {
    let text = std::fs::read_to_string(&common.input)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", common.input.display())))?;
    let mut spec = parse_ideal(&text)?;
    spec.options = Options {
        cutoff: common.cutoff,
        dedupe: !common.no_dedupe,
        weight: common.weight,
    };
    Ok(spec)
}

/// Runs one command. Errors correspond to invalid input.
pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Resolve(c) => cmd_resolve(&load(c)?, c.format),
        Command::Exactness(c) => cmd_exactness(&load(c)?, c.format),
        Command::Khom(c) => cmd_khom(&load(c)?, c.format),
        Command::Oracle(c) => cmd_oracle(&load(c)?, c.format),
        Command::Toeplitz(args) => {
            let request = ToeplitzRequest::from_args(args)?;
            cmd_toeplitz(&load(&args.common)?, &request, args.common.format)
        }
    }
}

impl Command {
    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            Command::Resolve(c) | Command::Exactness(c) | Command::Khom(c) | Command::Oracle(c) => c.output.as_ref(),
            Command::Toeplitz(args) => args.common.output.as_ref(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> IdealSpec {
        parse_ideal(text).unwrap()
    }

    #[test]
    fn parses_the_square_ideal() {
        let s = spec("m=2\n2,2");
        assert_eq!(s.m, 2);
        assert_eq!(s.generators, vec![vec![2, 2]]);
        assert_eq!(s.options, Options::default());
    }

    #[test]
    fn parses_comments_and_blank_lines() {
        let s = spec("# a three-variable ideal\n\nm = 3\n2, 0, 0  # z1^2\n0,0,1\n");
        assert_eq!(s.generators, vec![vec![2, 0, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn reports_line_numbers() {
        let cases = [
            ("m=2\n2,2,1", 2, "expected 2"),
            ("m=2\n\n1,-3", 3, "negative"),
            ("m=2\n1,x", 2, "malformed"),
            ("2,2", 1, "header"),
            ("m=0\n", 1, "at least 1"),
            ("m=2\n# nothing\n", 2, "no generators"),
        ];
        for (text, line, fragment) in cases {
            match parse_ideal(text).unwrap_err() {
                Error::Parse { line: l, message } => {
                    assert_eq!(l, line, "{text:?}");
                    assert!(message.contains(fragment), "{message}");
                }
                other => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn resolve_passes_and_is_deterministic() {
        let s = spec("m=2\n2,2");
        let a = cmd_resolve(&s, Format::Json).unwrap();
        let b = cmd_resolve(&s, Format::Json).unwrap();
        assert_eq!(a.code, EXIT_PASS);
        assert_eq!(a, b);
        let value: serde_json::Value = serde_json::from_str(&a.body).unwrap();
        assert_eq!(value["schema_version"], 1);
        assert_eq!(value["k"], 2);
        assert_eq!(value["boxes"][0]["j"], serde_json::json!([1]));
        assert_eq!(value["levels"][2]["components"][0]["shuffle"], serde_json::json!([1, 2]));
    }

    #[test]
    fn unit_ideal_is_invalid_input() {
        assert_eq!(cmd_resolve(&spec("m=1\n0"), Format::Json).unwrap_err(), Error::UnitIdeal);
    }

    #[test]
    fn matrix_market_is_toeplitz_only() {
        assert!(matches!(cmd_khom(&spec("m=2\n2,2"), Format::Mm), Err(Error::Selector(_))));
    }

    #[test]
    fn toeplitz_selectors_are_checked() {
        let s = spec("m=2\n2,2");
        let mut request = ToeplitzRequest {
            op: OperatorKind::Shift,
            region: Some(3),
            p: 1,
            s: 1,
            t: 1,
            schatten: None,
            schatten_cutoffs: None,
        };
        assert!(matches!(cmd_toeplitz(&s, &request, Format::Json), Err(Error::Selector(_))));
        request.region = Some(1);
        request.p = 3;
        assert!(matches!(cmd_toeplitz(&s, &request, Format::Json), Err(Error::Selector(_))));
        request.p = 2;
        let out = cmd_toeplitz(&s, &request, Format::Mm).unwrap();
        assert!(out.body.starts_with("%%MatrixMarket matrix coordinate real general"));
    }

    #[test]
    fn default_cutoffs_are_increasing() {
        assert_eq!(default_schatten_cutoffs(9), vec![2, 4, 6, 8]);
        assert_eq!(default_schatten_cutoffs(2), vec![1]);
    }
}
