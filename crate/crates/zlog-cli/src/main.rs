//! `zlog`: command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure. Errors are
//! printed to stderr as one JSON object `{"error": kind, "message": ...}`.

mod config;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use zlog::abel_plana_verify::{
    verify_box_identity, verify_classical, verify_step_integrals, BoxFunction, ClassicalTest, StepKind,
};
use zlog::continuation::{
    eval_f, locate_weil_poles, monodromy_loop, parse_complex, residue_estimate, Engine, PathSpec,
    DEFAULT_CLEARANCE,
};
use zlog::motive_data::DEFAULT_RADIUS;
use zlog::pseudo_divisor::{build_support_p, periodify, support_d, support_e, PeriodicVariant};
use zlog::recurrence::{falsify_report, falsify_sequence, RecurrenceReport, Verdict};
use zlog::series::zlog_series;
use zlog::{RealPowerSeries, Window};

use output::{emit, float, json};

#[derive(Debug)]
pub enum CliError {
    Lib(zlog::Error),
    Config(String),
    Io(String),
}

impl From<zlog::Error> for CliError {
    fn from(e: zlog::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) => e.kind(),
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Config(m) | CliError::Io(m) => m.clone(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "zlog", version, about = "Multiplicative zeta functions over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON model config.
    #[arg(long)]
    config: PathBuf,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Taylor coefficients of Z_log as CSV.
    Coeffs {
        #[command(flatten)]
        io: Common,
        #[arg(long, default_value_t = 32)]
        terms: usize,
    },
    /// Z_log (or f) continued along a path.
    Eval {
        #[command(flatten)]
        io: Common,
        /// End point, e.g. "1.5-0.2i".
        #[arg(long, allow_hyphen_values = true)]
        z: Option<String>,
        /// Semicolon-separated vertices after 0; overrides --z.
        #[arg(long, allow_hyphen_values = true)]
        path: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CLEARANCE)]
        clearance: f64,
        #[arg(long, value_enum, default_value_t = Target::Zlog)]
        target: Target,
    },
    /// Phase (or magnitude) raster of Z_log plus a CSV of the values.
    Grid {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 200)]
        res: usize,
        #[arg(long, value_enum, default_value_t = Raster::Phase)]
        mode: Raster,
    },
    /// Support of P, P^per, D or E as CSV.
    Divisor {
        #[command(flatten)]
        io: Common,
        #[arg(long, value_enum)]
        kind: DivisorArg,
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 4)]
        lmax: usize,
    },
    /// Singular points of the model within a radius.
    Poles {
        #[command(flatten)]
        io: Common,
        #[arg(long, default_value_t = DEFAULT_RADIUS)]
        radius: f64,
    },
    /// Loop integral of J~/z around a circle.
    Monodromy {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
    },
    /// Residue of the log-derivative of Z_log at a pole.
    Residue {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Weil numbers recovered from the poles on |z| = sqrt q.
    WeilPoles {
        #[command(flatten)]
        io: Common,
    },
    /// Linear-recurrence search on log N_r.
    Recurrence {
        #[command(flatten)]
        io: Common,
        #[arg(long, default_value_t = 8)]
        dmax: usize,
        #[arg(long, default_value_t = 48)]
        horizon: usize,
        /// Human-readable table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Numerical checks of the summation identities.
    Verify {
        #[command(subcommand)]
        check: Verify,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// The box identity on [a, b] x [-K, K].
    Box {
        #[command(flatten)]
        io: Common,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        /// Integer or "auto" (= r0).
        #[arg(long, default_value = "auto")]
        a: String,
        /// Integer, or "+n" relative to a.
        #[arg(long, default_value = "+8", allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// One boundary integral: series against quadrature.
    Step {
        #[command(flatten)]
        io: Common,
        #[arg(long)]
        kind: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        /// Number or "inf".
        #[arg(long, default_value = "inf")]
        b: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Classical Abel–Plana on closed-form sums.
    Classical {
        #[arg(long, value_enum)]
        test: ClassicalArg,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        w: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Zlog,
    F,
}

#[derive(Clone, Copy, ValueEnum)]
enum Raster {
    Phase,
    Magnitude,
}

#[derive(Clone, Copy, ValueEnum)]
enum DivisorArg {
    P,
    Pper,
    PperPlus,
    PperMinus,
    D,
    E,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassicalArg {
    ExpDecay,
    InverseSquare,
}

fn complex(s: &str) -> Result<Complex64> {
    Ok(parse_complex(s)?)
}

fn window(s: &str) -> Result<Window> {
    Ok(s.parse::<Window>()?)
}

fn series_csv(s: &RealPowerSeries) -> String {
    let mut out = String::from("index,coefficient\n");
    for (i, c) in s.coeffs().iter().enumerate() {
        out.push_str(&format!("{i},{}\n", float(*c)));
    }
    out
}

fn coeffs(io: &Common, terms: usize) -> Result<()> {
    if terms == 0 {
        return Err(CliError::Config("--terms must be >= 1".into()));
    }
    let cfg = config::load(&io.config)?;
    let series = match cfg.counts(terms)? {
        Some(counts) => zlog_series(&counts, terms)?,
        None => {
            let mut c = vec![0.0];
            c.extend(cfg.model()?.log_coefficients(terms));
            RealPowerSeries::real(c)?.exp()?
        }
    };
    emit(&series_csv(&series), io.out.as_deref())
}

#[derive(Serialize)]
struct EvalRecord {
    target: &'static str,
    point: Complex64,
    path: Vec<Complex64>,
    value: Complex64,
    branch_offset: Complex64,
    error_estimate: f64,
}

fn eval(io: &Common, z: Option<&str>, path: Option<&str>, clearance: f64, target: Target) -> Result<()> {
    let model = config::load(&io.config)?.model()?;
    let spec = match (path, z) {
        (Some(p), _) => p.parse::<PathSpec>()?,
        (None, Some(z)) => PathSpec::straight(complex(z)?),
        (None, None) => return Err(CliError::Config("eval needs --z or --path".into())),
    };
    let spec = PathSpec::new(spec.vertices, clearance)?;
    let (name, res) = match target {
        Target::Zlog => ("zlog", model.eval_zlog(&spec)?),
        Target::F => ("f", eval_f(&spec, &model.data, model.k)?),
    };
    let rec = EvalRecord {
        target: name,
        point: spec.end(),
        path: spec.vertices.clone(),
        value: res.value,
        branch_offset: res.branch_offset,
        error_estimate: res.error_estimate,
    };
    emit(&json(&rec)?, io.out.as_deref())
}

fn pixel(w: &Window, res: usize, row: usize, col: usize) -> Complex64 {
    let re = w.re_min + (col as f64 + 0.5) / res as f64 * (w.re_max - w.re_min);
    let im = w.im_max - (row as f64 + 0.5) / res as f64 * (w.im_max - w.im_min);
    Complex64::new(re, im)
}

fn shade(v: Complex64, mode: Raster) -> u8 {
    if !(v.re.is_finite() && v.im.is_finite()) {
        return 0;
    }
    let x = match mode {
        Raster::Phase => (v.arg() + PI) / (2.0 * PI),
        Raster::Magnitude => v.norm().ln().atan() / PI + 0.5,
    };
    (x * 255.0).round().clamp(0.0, 255.0) as u8
}

fn grid(io: &Common, win: &str, res: usize, mode: Raster) -> Result<()> {
    let out = io.out.as_deref().ok_or_else(|| CliError::Config("grid needs --out".into()))?;
    if !(1..=4096).contains(&res) {
        return Err(CliError::Config("--res must be in 1..=4096".into()));
    }
    let w = window(win)?;
    let model = config::load(&io.config)?.model()?;
    let eng = model.engine(w.max_abs())?;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let rows: Vec<Vec<(Complex64, Complex64)>> = (0..res)
        .into_par_iter()
        .map(|row| {
            (0..res)
                .map(|col| {
                    let z = pixel(&w, res, row, col);
                    let v = model
                        .eval_zlog_with(&eng, &PathSpec::straight(z))
                        .map_or(nan, |r| r.value);
                    (z, v)
                })
                .collect()
        })
        .collect();
    let mut pgm = format!("P5\n{res} {res}\n255\n").into_bytes();
    let mut csv = String::from("re,im,value_re,value_im\n");
    for (z, v) in rows.iter().flatten() {
        pgm.push(shade(*v, mode));
        csv.push_str(&format!("{},{},{},{}\n", float(z.re), float(z.im), float(v.re), float(v.im)));
    }
    std::fs::write(out, pgm).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    emit(&csv, Some(&out.with_extension("csv")))
}

fn divisor(io: &Common, kind: DivisorArg, win: &str, lmax: usize) -> Result<()> {
    let data = config::load(&io.config)?.model()?.data;
    let w = window(win)?;
    let d = match kind {
        DivisorArg::P => build_support_p(&data, lmax, w)?,
        DivisorArg::Pper => periodify(&build_support_p(&data, lmax, w)?, PeriodicVariant::Full)?,
        DivisorArg::PperPlus => periodify(&build_support_p(&data, lmax, w)?, PeriodicVariant::Plus)?,
        DivisorArg::PperMinus => periodify(&build_support_p(&data, lmax, w)?, PeriodicVariant::Minus)?,
        DivisorArg::D => support_d(&data, lmax, w)?,
        DivisorArg::E => support_e(&data, lmax, w)?,
    };
    emit(&d.to_csv(), io.out.as_deref())
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn poles(io: &Common, radius: f64) -> Result<()> {
    let model = config::load(&io.config)?.model()?;
    let eng = model.engine(radius)?;
    let pts: Vec<Complex64> = model.singularities(&eng).into_iter().filter(|z| z.norm() <= radius).collect();
    emit(&json(&sorted(pts))?, io.out.as_deref())
}

fn monodromy(io: &Common, center: &str, radius: f64) -> Result<()> {
    let model = config::load(&io.config)?.model()?;
    let c = complex(center)?;
    let eng = Engine::new(&model.data, model.k, (c.norm() + radius).max(1.0) * 1.01)?;
    emit(&json(&monodromy_loop(&eng, c, radius)?)?, io.out.as_deref())
}

fn residue(io: &Common, at: &str) -> Result<()> {
    let model = config::load(&io.config)?.model()?;
    emit(&json(&residue_estimate(&model, complex(at)?)?)?, io.out.as_deref())
}

fn weil_poles(io: &Common) -> Result<()> {
    let model = config::load(&io.config)?.model()?;
    emit(&json(&locate_weil_poles(&model)?)?, io.out.as_deref())
}

fn table(r: &RecurrenceReport) -> String {
    let mut s = format!("sequence: {}\nmethod: {}\nhorizon: {}\n", r.sequence_id, r.method, r.horizon);
    s.push_str("order  residual                 excluded  max_det_log2\n");
    for o in &r.orders {
        let ex = o.excluded.map_or("-".to_string(), |e| e.to_string());
        let det = o.max_det_log2.map_or("-".to_string(), |d| format!("{d:.3}"));
        s.push_str(&format!("{:<6} {:<24} {:<9} {}\n", o.order, float(o.residual), ex, det));
    }
    let verdict = match r.verdict {
        Verdict::RecurrenceFound { order } => format!("recurrence found, order {order}"),
        Verdict::FalsifiedUpTo { d_max } => format!("no recurrence of order <= {d_max}"),
    };
    s.push_str(&format!("verdict: {verdict}\nnote: {}\n", r.note));
    s
}

fn recurrence(io: &Common, dmax: usize, horizon: usize, as_table: bool) -> Result<()> {
    let cfg = config::load(&io.config)?;
    let report = match cfg.counts(horizon)? {
        Some(counts) => falsify_report(&counts, dmax, horizon)?,
        None => {
            let logs: Vec<f64> = cfg
                .model()?
                .log_coefficients(horizon)
                .iter()
                .enumerate()
                .map(|(i, c)| c * (i + 1) as f64)
                .collect();
            falsify_sequence("log|N_r| from spectral data", &logs, dmax, horizon)?
        }
    };
    let text = if as_table { table(&report) } else { json(&report)? };
    emit(&text, io.out.as_deref())
}

fn verify(check: &Verify) -> Result<()> {
    match check {
        Verify::Box { io, w, a, b, tol } => {
            let model = config::load(&io.config)?.model()?;
            let h = BoxFunction::new(&model.data, complex(w)?, model.k)?;
            let bad = |s: &str| CliError::Config(format!("bad box bound {s:?}"));
            let a = match a.as_str() {
                "auto" => h.r0 as i64,
                s => s.parse().map_err(|_| bad(s))?,
            };
            let b = match b.strip_prefix('+') {
                Some(d) => a + d.parse::<i64>().map_err(|_| bad(b))?,
                None => b.parse().map_err(|_| bad(b))?,
            };
            emit(&json(&verify_box_identity(&h, a, b, *tol)?)?, io.out.as_deref())
        }
        Verify::Step { io, kind, w, a, b, tol } => {
            let model = config::load(&io.config)?.model()?;
            let h = BoxFunction::new(&model.data, complex(w)?, model.k)?;
            let kind: StepKind = kind.parse()?;
            let b = match b.as_str() {
                "inf" | "+inf" => None,
                s => Some(s.parse().map_err(|_| CliError::Config(format!("bad bound {s:?}")))?),
            };
            emit(&json(&verify_step_integrals(kind, &h, *a, b, *tol)?)?, io.out.as_deref())
        }
        Verify::Classical { test, w, tol, out } => {
            let t = match test {
                ClassicalArg::ExpDecay => ClassicalTest::ExpDecay { w: complex(w)? },
                ClassicalArg::InverseSquare => ClassicalTest::InverseSquare,
            };
            emit(&json(&verify_classical(t, *tol)?)?, out.as_deref())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Coeffs { io, terms } => coeffs(io, *terms),
        Command::Eval { io, z, path, clearance, target } => {
            eval(io, z.as_deref(), path.as_deref(), *clearance, *target)
        }
        Command::Grid { io, window, res, mode } => grid(io, window, *res, *mode),
        Command::Divisor { io, kind, window, lmax } => divisor(io, *kind, window, *lmax),
        Command::Poles { io, radius } => poles(io, *radius),
        Command::Monodromy { io, center, radius } => monodromy(io, center, *radius),
        Command::Residue { io, at } => residue(io, at),
        Command::WeilPoles { io } => weil_poles(io),
        Command::Recurrence { io, dmax, horizon, table } => recurrence(io, *dmax, *horizon, *table),
        Command::Verify { check } => verify(check),
    }
}

fn report(e: &CliError) {
    let msg = serde_json::json!({ "error": e.kind(), "message": e.message() });
    eprintln!("{msg}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = serde_json::json!({ "error": "usage", "message": e.to_string().trim_end() });
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code())
        }
    }
}
