//! `wll` — construct, analyze, cascade and scan polynomial-loop filter banks.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid input data, 4 ambiguous rank.

mod pgm;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wll::cascade::{
    cascade_complex, cascade_real, divergence_flags, dyadic_decimal, wavelet_from_scaling, CascadeGrid,
};
use wll::cuntzrep::{analyze, Classification};
use wll::filterbank::{filters_from_loop, highpass_from_lowpass};
use wll::linalg::{cr, ComplexMatrix, C64};
use wll::loopgroup::{
    factorize, two_param_coeffs, two_param_loop, validate_loop, DiagonalStructure, MatrixLoop,
    TwoParamPoint, LOOP_TOL,
};
use wll::waveclass::{cohen_classify, fmt_f64, grid_scan, moment_order, scan_csv, ScanRecord, MOMENT_TOL};

const MAX_LEVELS: u32 = 24;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{0}")]
    Ambiguous(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Ambiguous(_) => 4,
        }
    }
}

impl From<wll::Error> for CliError {
    fn from(e: wll::Error) -> Self {
        match e {
            wll::Error::RankAmbiguous { .. } => CliError::Ambiguous(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "wll", version, about = "Polynomial loops, wavelet filters and their representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients a0..a5 of the two-angle family at (θ, ρ), in radians.
    Family {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
        /// Write the loop as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cascade grid of the scaling function (or wavelet) as `x,value` CSV.
    Cascade {
        #[arg(long, conflicts_with_all = ["theta", "rho"])]
        r#loop: Option<PathBuf>,
        #[arg(long, requires = "rho", allow_hyphen_values = true)]
        theta: Option<f64>,
        #[arg(long, requires = "theta", allow_hyphen_values = true)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(0..=MAX_LEVELS as i64))]
        levels: u32,
        /// Emit ψ on the next finer grid instead of φ.
        #[arg(long)]
        wavelet: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Representation report for a loop file.
    Classify {
        #[arg(long)]
        r#loop: PathBuf,
    },
    /// Parameter scan of the two-angle family.
    Scan {
        #[arg(long)]
        step: f64,
        /// θ0 θ1 ρ0 ρ1 (half-open ranges); defaults to [0, π)².
        #[arg(long, num_args = 4, value_names = ["THETA0", "THETA1", "RHO0", "RHO1"], allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Column rendered by `--format pgm`.
        #[arg(long, default_value = "a0")]
        column: String,
    },
    /// Degree-one factorization of a loop file.
    Factor {
        #[arg(long)]
        r#loop: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Pgm,
}

fn finite(name: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Usage(format!("--{name} must be finite, got {x}")))
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn read_loop(path: &Path) -> CliResult<MatrixLoop> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let a = MatrixLoop::from_json_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let report = validate_loop(&a, LOOP_TOL);
    if !report.is_valid() {
        return Err(CliError::Input(format!(
            "{}: not a unitary loop (residual {:.3e})",
            path.display(),
            report.worst_residual()
        )));
    }
    Ok(a)
}

fn num(x: f64) -> Value {
    json!(x)
}

fn matrix_json(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s.into_bytes()
}

fn cmd_family(theta: f64, rho: f64, out: Option<&Path>) -> CliResult<()> {
    let pt = TwoParamPoint::new(finite("theta", theta)?, finite("rho", rho)?);
    let a = two_param_coeffs(pt);
    let lp = two_param_loop(pt);
    let f = divergence_flags(&a);
    let report = json!({
        "theta": num(theta),
        "rho": num(rho),
        "coeffs": a.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "lambda0": num(wll::cuntzrep::lambda0(&lp)),
        "diverges_left": f.diverges_left,
        "diverges_right": f.diverges_right,
        "marginal": f.marginal,
    });
    emit(None, &pretty(&report))?;
    if let Some(p) = out {
        let mut s = lp.to_json_string();
        s.push('\n');
        fs::write(p, s)?;
    }
    Ok(())
}

fn grid_csv_real(grid: &CascadeGrid<f64>) -> String {
    let mut s = String::from("x,value\n");
    for (i, v) in grid.values.iter().enumerate() {
        s.push_str(&format!("{},{}\n", dyadic_decimal(i as u64, grid.level), fmt_f64(*v)));
    }
    s
}

fn grid_csv_complex(grid: &CascadeGrid<C64>) -> String {
    let mut s = String::from("x,value,value_im\n");
    for (i, v) in grid.values.iter().enumerate() {
        s.push_str(&format!("{},{},{}\n", dyadic_decimal(i as u64, grid.level), fmt_f64(v.re), fmt_f64(v.im)));
    }
    s
}

fn cmd_cascade(
    lp: Option<&Path>,
    angles: Option<(f64, f64)>,
    levels: u32,
    wavelet: bool,
    out: Option<&Path>,
) -> CliResult<()> {
    let (a, b): (Vec<C64>, Vec<C64>) = match (lp, angles) {
        (Some(path), _) => {
            let fb = filters_from_loop(&read_loop(path)?);
            if fb.n() != 2 {
                return Err(CliError::Input(format!("cascade needs a 2x2 loop, got N = {}", fb.n())));
            }
            (fb.scaled(0), fb.scaled(1))
        }
        (None, Some((t, r))) => {
            let a: Vec<C64> =
                two_param_coeffs(TwoParamPoint::new(finite("theta", t)?, finite("rho", r)?)).map(cr).to_vec();
            let b = highpass_from_lowpass(&a)?;
            (a, b)
        }
        (None, None) => return Err(CliError::Usage("give --loop or --theta/--rho".into())),
    };
    let real = a.iter().chain(&b).all(|x| x.im == 0.0);
    let csv = if real {
        let ar: Vec<f64> = a.iter().map(|x| x.re).collect();
        let br: Vec<f64> = b.iter().map(|x| x.re).collect();
        let phi = cascade_real(&ar, levels)?;
        grid_csv_real(&if wavelet { wavelet_from_scaling(&phi, &br) } else { phi })
    } else {
        let phi = cascade_complex(&a, levels)?;
        grid_csv_complex(&if wavelet { wavelet_from_scaling(&phi, &b) } else { phi })
    };
    emit(out, csv.as_bytes())
}

fn diagonal_json(d: &DiagonalStructure) -> Value {
    match d {
        DiagonalStructure::FullyDiagonal { exponents, .. } => {
            json!({ "kind": "fully_diagonal", "exponents": exponents })
        }
        DiagonalStructure::DiagonalCorner { d0, b, d1, exponents_d0, exponents_d1, interior_monomial_columns } => {
            json!({
                "kind": "diagonal_corner",
                "d0": d0, "b": b, "d1": d1,
                "exponents_d0": exponents_d0,
                "exponents_d1": exponents_d1,
                "interior_monomial_columns": interior_monomial_columns,
            })
        }
        DiagonalStructure::PurelyNonDiagonal => json!({ "kind": "purely_non_diagonal" }),
    }
}

fn cmd_classify(path: &Path) -> CliResult<()> {
    let a = read_loop(path)?;
    let rep = analyze(&a)?;
    let diagonal_data = match &rep.classification {
        Classification::Irreducible => Value::Null,
        Classification::Reducible(d) => json!({
            "fixed_projection_supports": d.projections,
            "projections_diagonal": d.projections_diagonal,
            "projections_fixed": d.projections_fixed,
            "fixed_space_abelian": d.fixed_space_abelian,
            "structure": diagonal_json(&d.diagonal),
        }),
    };
    // the cycle test and the moment order refer to dyadic filters
    let (cohen, moment) = if a.n() == 2 {
        let m0 = filters_from_loop(&a).m()[0].clone();
        (json!(cohen_classify(&m0)?.label()), json!(moment_order(&m0, MOMENT_TOL)))
    } else {
        (Value::Null, Value::Null)
    };
    let report = json!({
        "N": a.n(),
        "genus": a.genus()?,
        "lambda0": num(rep.lambda0),
        "r0": rep.r0,
        "fixed_dim": rep.fixed_dim,
        "classification": rep.classification.tag(),
        "diagonal_data": diagonal_data,
        "minimal_subspace_dim": rep.minimal_subspace_dim,
        "cohen": cohen,
        "moment_order": moment,
    });
    emit(None, &pretty(&report))
}

fn record_json(r: &ScanRecord) -> Value {
    json!({
        "theta": num(r.theta),
        "rho": num(r.rho),
        "coeffs": r.coeffs.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        "lambda0": num(r.lambda0),
        "div_left": r.flags.diverges_left,
        "div_right": r.flags.diverges_right,
        "marginal": r.flags.marginal,
        "moment_order": r.moment_order,
        "cohen": r.cohen.label(),
        "embed0_3": r.embedding.embed0_3,
        "embed1_4": r.embedding.embed1_4,
        "embed2_5": r.embedding.embed2_5,
    })
}

fn cmd_scan(step: f64, window: Option<&[f64]>, out: Option<&Path>, format: Format, column: &str) -> CliResult<()> {
    if !(step.is_finite() && step > 0.0) {
        return Err(CliError::Usage(format!("--step must be positive and finite, got {step}")));
    }
    let pi = std::f64::consts::PI;
    let w = window.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0, pi, 0.0, pi]);
    for (k, x) in w.iter().enumerate() {
        finite(&format!("window[{k}]"), *x)?;
    }
    let records = grid_scan((w[0], w[1]), (w[2], w[3]), step)?;
    match format {
        Format::Csv => emit(out, scan_csv(&records).as_bytes()),
        Format::Json => emit(out, &pretty(&Value::Array(records.iter().map(record_json).collect()))),
        Format::Pgm => {
            let cols = wll::waveclass::axis_len(w[2], w[3], step);
            let bytes = pgm::render(&records, cols, column).map_err(CliError::Usage)?;
            emit(out, &bytes)
        }
    }
}

fn cmd_factor(path: &Path) -> CliResult<()> {
    let a = read_loop(path)?;
    let f = factorize(&a)?;
    let report = json!({
        "V": matrix_json(&f.v),
        "factors": f.factors.iter().map(|(p, r)| json!({ "projection": matrix_json(p), "power": r })).collect::<Vec<_>>(),
        "residual": num(f.residual),
    });
    emit(None, &pretty(&report))
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("WLL_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("WLL_THREADS must be a positive integer, got {v:?}")))?;
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Family { theta, rho, out } => cmd_family(theta, rho, out.as_deref()),
        Command::Cascade { r#loop, theta, rho, levels, wavelet, out } => {
            cmd_cascade(r#loop.as_deref(), theta.zip(rho), levels, wavelet, out.as_deref())
        }
        Command::Classify { r#loop } => cmd_classify(&r#loop),
        Command::Scan { step, window, out, format, column } => {
            cmd_scan(step, window.as_deref(), out.as_deref(), format, &column)
        }
        Command::Factor { r#loop } => cmd_factor(&r#loop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wll: {e}");
            ExitCode::from(e.code())
        }
    }
}
