use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use opakit::closed_forms::{
    ball_rotation_opa, cyclicity_classify, diag_embed_opa, fms_distance, fms_distance_limit, DiagFamily, DiagTarget,
    WeightSequence,
};
use opakit::filter2d::{impulse_response, run_recursion, stability_check_with, stabilize_with, DataArray, FilterSpec};
use opakit::fixtures::{run_filtered, Corpus};
use opakit::opa::{opa, opa_float, opa_sequence};
use opakit::ortho::{difference_family, weighted_gram_schmidt};
use opakit::report::{self, envelope, to_json_string};
use opakit::shapiro::{shapiro_shields, ss_verify};
use opakit::text::{parse_points, parse_poly};
use opakit::zero_scan::{face_profile, polydisk_zero_free, profile_csv, DEFAULT_GRID, DEFAULT_MARGIN};
use opakit::{Error, ExactScalar, MPoly, SpaceSpec};

#[derive(Parser, Debug)]
#[command(name = "opakit", version, about = "Optimal polynomial approximants in weighted Hilbert spaces")]
struct Cli {
    /// Directory for output files; `--out` names are resolved against it.
    #[arg(long, global = true, env = "OPAKIT_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Output file (stdout when neither this nor an output directory is set).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal approximant p_n^* of 1/f.
    Opa(OpaArgs),
    /// Orthogonal polynomials for the weight f.
    Ortho(OrthoArgs),
    /// One-variable formulas and their diagonal embeddings.
    #[command(subcommand)]
    ClosedForm(ClosedForm),
    /// Shapiro-Shields function for a finite point set.
    Shapiro(ShapiroArgs),
    /// Root moduli along a torus face, as CSV.
    Profile(ProfileArgs),
    /// Grid test for zeros on the closed bidisk.
    ZeroFree(ZeroFreeArgs),
    /// Two-dimensional recursive filters.
    #[command(subcommand)]
    Filter(FilterCmd),
    /// Regression suite over the embedded tables.
    Fixtures(FixturesArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Args, Debug)]
struct OpaArgs {
    #[arg(long, default_value = "hardy2")]
    space: String,
    #[arg(long)]
    f: String,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Emit p_0^*, …, p_n^* instead of p_n^* alone.
    #[arg(long)]
    sequence: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConventionArg {
    Monic,
    OpaDifference,
}

#[derive(Args, Debug)]
struct OrthoArgs {
    #[arg(long, default_value = "hardy2")]
    space: String,
    #[arg(long)]
    f: String,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "monic")]
    convention: ConventionArg,
}

#[derive(Subcommand, Debug)]
enum ClosedForm {
    /// Approximant of a diagonal family on J_n: `bidisk:a1,a2` or `ball:d`.
    Diag {
        #[arg(long)]
        target: String,
        #[arg(long)]
        n: u32,
    },
    /// p_N^* for 1 - (z1 + z2)/sqrt 2 in H²_2 at N = n(n+3)/2.
    BallRotation {
        #[arg(long)]
        order: usize,
    },
    /// ν_n² for 1 - z in H_ω, or its limit with `--limit`: `dirichlet:s`, `da:d`, `hardy`.
    Distance {
        #[arg(long)]
        weights: String,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long)]
        limit: Option<u32>,
    },
    /// Cyclicity of a diagonal family: `bidisk:a1,a2` or `ball:d`.
    Cyclicity {
        #[arg(long)]
        family: String,
    },
}

#[derive(Args, Debug)]
struct ShapiroArgs {
    #[arg(long, default_value = "hardy2")]
    space: String,
    /// Points separated by `;`, e.g. "(1/2,1/3);(0,1/4)".
    #[arg(long)]
    points: String,
    #[arg(long, default_value_t = 30)]
    trunc: u32,
    #[arg(long, default_value_t = 10)]
    jmax: usize,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long)]
    f: String,
    /// Variable swept on the unit circle.
    #[arg(long, default_value = "z2")]
    face: String,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct ZeroFreeArgs {
    #[arg(long)]
    f: String,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
}

#[derive(Subcommand, Debug)]
enum FilterCmd {
    /// Output array for a CSV data array.
    Run {
        #[arg(long, visible_alias = "A", default_value = "1")]
        a: String,
        #[arg(long, visible_alias = "B")]
        b: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
    },
    /// Impulse response with growth estimate.
    Impulse {
        #[arg(long, visible_alias = "A", default_value = "1")]
        a: String,
        #[arg(long, visible_alias = "B")]
        b: String,
        #[arg(long, default_value_t = 32)]
        rows: usize,
        #[arg(long, default_value_t = 32)]
        cols: usize,
    },
    /// Zero scan of the denominator.
    Stability {
        #[arg(long, visible_alias = "B")]
        b: String,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Replace 1/B by 1/p_n^* with p_n^* the Hardy approximant of 1/B.
    Stabilize {
        #[arg(long, visible_alias = "B")]
        b: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
}

#[derive(Args, Debug)]
struct FixturesArgs {
    /// Run only the criteria with this filter name.
    #[arg(long)]
    filter: Option<String>,
    /// Use a corpus file instead of the embedded one.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

enum Output {
    Json(Value),
    Text(String, &'static str),
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } => 2,
            Error::Mode(_) => 3,
            Error::Integrity(_) => 4,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = std::result::Result<(Output, &'static str), Failure>;

fn space(s: &str) -> Result<SpaceSpec, Error> {
    s.parse()
}

fn bidisk_poly(src: &str) -> Result<MPoly, Error> {
    parse_poly(src, 2)
}

fn parse_family(src: &str) -> Result<DiagFamily, Error> {
    let bad = || Error::Parse { position: 0, message: format!("expected bidisk:a1,a2 or ball:d, got {src:?}") };
    let (kind, rest) = src.split_once(':').ok_or_else(bad)?;
    match kind {
        "bidisk" => {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            Ok(DiagFamily::Bidisk {
                alpha1: a.trim().parse().map_err(|_| bad())?,
                alpha2: b.trim().parse().map_err(|_| bad())?,
            })
        }
        "ball" => Ok(DiagFamily::Ball { d: rest.trim().parse().map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

fn parse_weights(src: &str) -> Result<WeightSequence, Error> {
    let bad = || Error::Parse { position: 0, message: format!("expected dirichlet:s, da:d or hardy, got {src:?}") };
    match src.split_once(':') {
        None if src == "hardy" => Ok(WeightSequence::hardy()),
        Some(("dirichlet", s)) => Ok(WeightSequence::dirichlet(s.trim().parse().map_err(|_| bad())?)),
        Some(("da", d)) => Ok(WeightSequence::drury_arveson_diag(d.trim().parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn cmd_opa(a: &OpaArgs) -> CmdResult {
    let s = space(&a.space)?;
    let f = parse_poly(&a.f, s.dim())?;
    let config = json!({ "command": "opa", "space": s.descriptor(), "f": a.f, "n": a.n,
        "mode": format!("{:?}", a.mode).to_lowercase(), "sequence": a.sequence });
    let result = match a.mode {
        Mode::Exact if a.sequence => {
            let seq = opa_sequence(&s, &f, a.n)?;
            Value::Array(seq.iter().map(report::opa_json).collect::<Result<_, _>>()?)
        }
        Mode::Exact => report::opa_json(&opa(&s, &f, a.n)?)?,
        Mode::Float => {
            let orders: Vec<usize> = if a.sequence { (0..=a.n).collect() } else { vec![a.n] };
            let runs = orders
                .into_iter()
                .map(|n| opa_float(&s, &f, n).map(|r| report::opa_float_json(&s.descriptor(), &f, &r)))
                .collect::<Result<Vec<_>, _>>()?;
            if a.sequence {
                Value::Array(runs)
            } else {
                runs.into_iter().next().unwrap_or(Value::Null)
            }
        }
    };
    Ok((Output::Json(envelope(config, result)), "opa"))
}

fn cmd_ortho(a: &OrthoArgs) -> CmdResult {
    let s = space(&a.space)?;
    let f = parse_poly(&a.f, s.dim())?;
    let fam = match a.convention {
        ConventionArg::Monic => weighted_gram_schmidt(&s, &f, a.n)?,
        ConventionArg::OpaDifference => difference_family(&opa_sequence(&s, &f, a.n)?)?,
    };
    let config = json!({ "command": "ortho", "space": s.descriptor(), "f": a.f, "n": a.n, "convention": fam.convention.as_str() });
    Ok((Output::Json(envelope(config, report::ortho_json(&fam)?)), "ortho"))
}

fn cmd_closed_form(c: &ClosedForm) -> CmdResult {
    let (config, result) = match c {
        ClosedForm::Diag { target, n } => {
            let t = match parse_family(target)? {
                DiagFamily::Bidisk { alpha1, alpha2 } => DiagTarget::Bidisk { alpha1, alpha2 },
                DiagFamily::Ball { d } => DiagTarget::Ball { d },
            };
            let r = diag_embed_opa(&t, *n)?;
            (
                json!({ "command": "closed-form diag", "target": target, "n": n }),
                json!({ "f": r.f.to_string(), "approximant": r.approximant.to_string(),
                    "coeffs": report::poly_coeffs(&r.approximant)?, "valid_from": r.valid_from, "valid_to": r.valid_to }),
            )
        }
        ClosedForm::BallRotation { order } => {
            let p = ball_rotation_opa(*order)?;
            (
                json!({ "command": "closed-form ball-rotation", "order": order }),
                json!({ "approximant": p.to_string(), "coeffs": report::poly_coeffs(&p)? }),
            )
        }
        ClosedForm::Distance { weights, n, limit } => {
            let w = parse_weights(weights)?;
            let result = match limit {
                Some(terms) => {
                    let l = fms_distance_limit(&w, *terms)?;
                    json!({ "nu2": l.nu2, "nu": l.nu, "tail_bound": l.tail_bound, "cyclic": l.cyclic, "terms": l.terms })
                }
                None => {
                    let d = fms_distance(&w, *n)?;
                    json!({ "nu2_exact": d.to_string(), "nu_float": d.to_f64()?.sqrt() })
                }
            };
            (json!({ "command": "closed-form distance", "weights": weights, "n": n, "limit": limit }), result)
        }
        ClosedForm::Cyclicity { family } => {
            let c = cyclicity_classify(parse_family(family)?)?;
            (
                json!({ "command": "closed-form cyclicity", "family": family }),
                json!({ "cyclic": c.cyclic, "classification": if c.cyclic { "cyclic" } else { "non_cyclic" }, "nu_limit": c.nu_limit }),
            )
        }
    };
    Ok((Output::Json(envelope(config, result)), "closed-form"))
}

fn cmd_shapiro(a: &ShapiroArgs) -> CmdResult {
    let s = space(&a.space)?;
    let points: Vec<Vec<ExactScalar>> = parse_points(&a.points)?;
    let ssf = shapiro_shields(&s, &points, a.trunc)?;
    let rep = ss_verify(&ssf, a.jmax)?;
    let config =
        json!({ "command": "shapiro", "space": s.descriptor(), "points": a.points, "trunc": a.trunc, "jmax": a.jmax });
    Ok((Output::Json(envelope(config, report::shapiro_json(&ssf, &rep)?)), "shapiro"))
}

fn face_index(face: &str) -> Result<usize, Error> {
    match face {
        "z1" | "1" => Ok(0),
        "z2" | "2" => Ok(1),
        _ => Err(Error::Parse { position: 0, message: format!("face must be z1 or z2, got {face:?}") }),
    }
}

fn cmd_profile(a: &ProfileArgs) -> CmdResult {
    let p = bidisk_poly(&a.f)?;
    let prof = face_profile(&p, face_index(&a.face)?, a.grid)?;
    let out = match a.format {
        Format::Csv => Output::Text(profile_csv(std::slice::from_ref(&prof)), "csv"),
        Format::Json => {
            let samples: Vec<Value> = prof
                .samples
                .iter()
                .map(|s| json!({ "t": s.t, "min_modulus": s.min_modulus, "degenerate": s.degenerate }))
                .collect();
            let config = json!({ "command": "profile", "f": a.f, "face": a.face, "grid": a.grid });
            Output::Json(envelope(config, json!({ "global_min": prof.global_min, "samples": samples })))
        }
    };
    Ok((out, "profile"))
}

fn cmd_zero_free(a: &ZeroFreeArgs) -> CmdResult {
    let p = bidisk_poly(&a.f)?;
    let r = polydisk_zero_free(&p, a.grid, a.margin)?;
    let config = json!({ "command": "zero-free", "f": a.f, "grid": a.grid, "margin": a.margin });
    Ok((Output::Json(envelope(config, report::zero_scan_json(&r))), "zero-free"))
}

fn cmd_filter(c: &FilterCmd) -> CmdResult {
    let out = match c {
        FilterCmd::Run { a, b, data, rows, cols, mode } => {
            let fs = FilterSpec::new(bidisk_poly(a)?, bidisk_poly(b)?)?;
            let text = fs::read_to_string(data)
                .map_err(|e| Failure { code: 1, message: format!("{}: {e}", data.display()) })?;
            let csv = match mode {
                Mode::Exact => run_recursion(&fs, &DataArray::<ExactScalar>::from_csv(&text)?, *rows, *cols)?.to_csv(),
                Mode::Float => run_recursion(&fs, &DataArray::<f64>::from_csv(&text)?, *rows, *cols)?.to_csv(),
            };
            Output::Text(csv, "csv")
        }
        FilterCmd::Impulse { a, b, rows, cols } => {
            let fs = FilterSpec::new(bidisk_poly(a)?, bidisk_poly(b)?)?;
            let r = impulse_response(&fs, *rows, *cols)?;
            let config = json!({ "command": "filter impulse", "a": a, "b": b, "rows": rows, "cols": cols });
            Output::Json(envelope(config, report::impulse_json(&r)))
        }
        FilterCmd::Stability { b, grid, margin } => {
            let r = stability_check_with(&bidisk_poly(b)?, *grid, *margin)?;
            let config = json!({ "command": "filter stability", "b": b, "grid": grid, "margin": margin });
            Output::Json(envelope(config, report::stability_json(&r)))
        }
        FilterCmd::Stabilize { b, n, grid, margin } => {
            let r = stabilize_with(&bidisk_poly(b)?, *n, *grid, *margin)?;
            let config = json!({ "command": "filter stabilize", "b": b, "n": n, "grid": grid, "margin": margin });
            Output::Json(envelope(config, report::stabilize_json(&r)?))
        }
    };
    Ok((out, "filter"))
}

fn cmd_fixtures(a: &FixturesArgs) -> std::result::Result<bool, Failure> {
    let corpus = match &a.corpus {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?;
            Corpus::parse(&text)?
        }
        None => Corpus::embedded()?,
    };
    let summary = run_filtered(&corpus, a.filter.as_deref())?;
    for o in &summary.outcomes {
        println!("{}", o.line());
        for c in o.checks.iter().filter(|c| !c.pass) {
            println!("    FAIL {}: {}", c.name, c.detail);
        }
    }
    println!("ledger:");
    for n in &summary.ledger {
        println!("  - {}: printed {}; computed {}", n.topic, n.printed, n.computed);
    }
    println!("{}", summary.summary_line());
    Ok(summary.failed() == 0)
}

fn write_output(cli: &Cli, out: Output, stem: &str) -> std::result::Result<(), Failure> {
    let (text, ext) = match out {
        Output::Json(v) => (to_json_string(&v), "json"),
        Output::Text(t, ext) => (t, ext),
    };
    let path = match (&cli.out_dir, &cli.out) {
        (Some(dir), Some(file)) if file.is_relative() => Some(dir.join(file)),
        (_, Some(file)) => Some(file.clone()),
        (Some(dir), None) => Some(dir.join(format!("{stem}.{ext}"))),
        (None, None) => None,
    };
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| Failure { code: 1, message: format!("{}: {e}", parent.display()) })?;
            }
            fs::write(&p, text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", p.display()) })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> std::result::Result<bool, Failure> {
    let res = match &cli.command {
        Command::Opa(a) => cmd_opa(a),
        Command::Ortho(a) => cmd_ortho(a),
        Command::ClosedForm(c) => cmd_closed_form(c),
        Command::Shapiro(a) => cmd_shapiro(a),
        Command::Profile(a) => cmd_profile(a),
        Command::ZeroFree(a) => cmd_zero_free(a),
        Command::Filter(c) => cmd_filter(c),
        Command::Fixtures(a) => return cmd_fixtures(a),
    };
    let (out, stem) = res?;
    write_output(cli, out, stem)?;
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
