use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hmu::carleson::{
    carleson_sup, log_carleson_sup, moment_carleson_sup, predict, zhao_k, CarlesonReport, GridSpec,
    MomentCarlesonReport, Prediction,
};
use hmu::hardy::CoefficientVector;
use hmu::operator::{
    agreement_check_with, apply, default_z_grid, truncation_tail_bound, AgreementReport,
    HankelTruncation, Method, TAIL_TOL,
};
use hmu::schatten::{frobenius_sq, MembershipReport, SchattenReport, SpectralLadder};
use hmu::verify::{self, seeded_moment_index, VerifyConfig, VerifyReport, DEFAULT_SEED};
use hmu::{Measure, MomentMethod, QuadratureSpec};
use num_complex::Complex64;
use serde::Serialize;

/// Largest N at which `apply` also runs the naive kernel.
const CROSS_CHECK_MAX_N: usize = 1024;
const RESIDUAL_TOL: f64 = 1e-12;
const AGREEMENT_TOL: f64 = 1e-8;
const FROBENIUS_TOL: f64 = 1e-10;
const MONOTONICITY_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(
    name = "hmu",
    version,
    about = "Generalized Hilbert operators induced by measures on [0,1)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moments μ_0..μ_M with a complete-monotonicity check.
    Moments {
        #[command(flatten)]
        common: Common,
        /// Highest moment order.
        #[arg(long = "M", default_value_t = 16)]
        max_order: usize,
    },
    /// Carleson functionals, their verdicts and the boundedness prediction.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        /// Logarithmic exponent; the log functional runs only when set.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 14)]
        grid_levels: usize,
        /// Source Hardy exponent for the prediction.
        #[arg(long)]
        p: Option<f64>,
        /// Target Hardy exponent for the prediction.
        #[arg(long)]
        q: Option<f64>,
        /// Moments used by the moment-side functional.
        #[arg(long = "M", default_value_t = 4096)]
        max_order: usize,
    },
    /// Applies the N×N Hankel truncation to a coefficient vector.
    Apply {
        #[command(flatten)]
        common: Common,
        /// JSON array of coefficients, each a number or [re, im].
        #[arg(long, value_name = "PATH")]
        coeffs: PathBuf,
        #[arg(long = "N", default_value_t = 4096)]
        n: usize,
    },
    /// Singular values, Schatten partial sums and the membership verdict.
    Schatten {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Top of the ladder N/8, N/4, N/2, N.
        #[arg(long = "N", default_value_t = 1024)]
        n: usize,
        /// Explicit comma-separated ladder, overriding --N.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Runs the full check suite.
    Verify {
        #[command(flatten)]
        output: Output,
        #[command(flatten)]
        quad: Quad,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Scale one moment by 1.01 in the agreement check; without an index
        /// the index is drawn from the seed.
        #[arg(long, num_args = 0..=1, value_name = "INDEX")]
        corrupt_moment: Option<Option<usize>>,
    },
}

#[derive(Args)]
struct Common {
    /// Measure description (JSON file).
    #[arg(long, value_name = "PATH")]
    measure: PathBuf,
    #[command(flatten)]
    output: Output,
    #[command(flatten)]
    quad: Quad,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Quad {
    /// Integrand evaluations per integral.
    #[arg(long, default_value_t = 4096)]
    budget: usize,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

impl Quad {
    fn spec(&self) -> Result<QuadratureSpec> {
        Ok(QuadratureSpec::new(self.budget, true, self.tolerance)?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Whether every invariant checked by the command held.
struct Status(bool);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Status(true)) => ExitCode::SUCCESS,
        Ok(Status(false)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Status> {
    match command {
        Command::Moments { common, max_order } => cmd_moments(&common, max_order),
        Command::Classify {
            common,
            s,
            alpha,
            grid_levels,
            p,
            q,
            max_order,
        } => cmd_classify(&common, s, alpha, grid_levels, (p, q), max_order),
        Command::Apply { common, coeffs, n } => cmd_apply(&common, &coeffs, n),
        Command::Schatten {
            common,
            p,
            n,
            ladder,
        } => cmd_schatten(&common, p, n, ladder),
        Command::Verify {
            output,
            quad,
            seed,
            corrupt_moment,
        } => cmd_verify(&output, &quad, seed, corrupt_moment),
    }
}

fn read_measure(path: &Path) -> Result<Measure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading measure file {}", path.display()))?;
    Measure::from_json(&text).with_context(|| format!("parsing measure file {}", path.display()))
}

fn read_coefficients(path: &Path) -> Result<CoefficientVector> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading coefficients {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("parsing coefficients {}", path.display()))?;
    let Some(items) = value.as_array() else {
        bail!("coefficients {}: expected a JSON array", path.display());
    };
    let coeffs = items
        .iter()
        .enumerate()
        .map(|(i, item)| match item {
            serde_json::Value::Number(x) => Ok(Complex64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
            serde_json::Value::Array(pair) if pair.len() == 2 => {
                match (pair[0].as_f64(), pair[1].as_f64()) {
                    (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                    _ => bail!("coefficients {}: entry {i} is not [re, im]", path.display()),
                }
            }
            _ => bail!(
                "coefficients {}: entry {i} must be a number or [re, im]",
                path.display()
            ),
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientVector::new(coeffs).with_context(|| format!("coefficients {}", path.display()))
}

fn emit(output: &Output, content: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: &Output, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, text.as_bytes())
}

fn csv_bytes<F>(fill: F) -> Result<Vec<u8>>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>,
{
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    fill(&mut w)?;
    Ok(w.into_inner()?)
}

#[derive(Serialize)]
struct MomentsOutput {
    measure: Measure,
    max_order: usize,
    values: Vec<f64>,
    methods: Vec<MomentMethod>,
    error_bound: f64,
    complete_monotonicity_defect: f64,
    complete_monotonicity_tolerance: f64,
    max_increase: f64,
    passed: bool,
}

fn cmd_moments(common: &Common, max_order: usize) -> Result<Status> {
    let measure = read_measure(&common.measure)?;
    let seq = measure.moments_up_to(max_order, &common.quad.spec()?)?;
    let mu0 = seq.values()[0];
    // Eighth differences amplify per-moment errors by up to 2^8.
    let tol = MONOTONICITY_TOL + 256.0 * seq.error_bound / mu0;
    let defect = seq.complete_monotonicity_defect(8);
    let max_increase = if seq.len() > 1 {
        seq.max_increase()
    } else {
        0.0
    };
    let passed = defect >= -tol && max_increase <= seq.error_bound;
    let out = MomentsOutput {
        measure,
        max_order,
        values: seq.values().to_vec(),
        methods: seq.methods.clone(),
        error_bound: seq.error_bound,
        complete_monotonicity_defect: defect,
        complete_monotonicity_tolerance: tol,
        max_increase,
        passed,
    };
    match common.output.format {
        Format::Json => emit_json(&common.output, &out)?,
        Format::Csv => {
            let bytes = csv_bytes(|w| {
                w.write_record(["n", "value", "method"])?;
                for (n, (v, m)) in out.values.iter().zip(&out.methods).enumerate() {
                    let method = match m {
                        MomentMethod::ClosedForm => "closed_form",
                        MomentMethod::Quadrature => "quadrature",
                    };
                    w.write_record([n.to_string(), v.to_string(), method.to_string()])?;
                }
                Ok(())
            })?;
            emit(&common.output, &bytes)?;
        }
    }
    if !passed {
        eprintln!(
            "moment sequence fails monotonicity: defect {defect:e}, max increase {max_increase:e}"
        );
    }
    Ok(Status(passed))
}

#[derive(Serialize)]
struct ClassifyOutput {
    measure: Measure,
    s: f64,
    alpha: Option<f64>,
    grid_levels: usize,
    tail: CarlesonReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    log: Option<CarlesonReport>,
    zhao: CarlesonReport,
    moment: MomentCarlesonReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    prediction: Option<PredictionOutput>,
}

#[derive(Serialize)]
struct PredictionOutput {
    p: f64,
    q: f64,
    #[serde(flatten)]
    prediction: Prediction,
}

fn cmd_classify(
    common: &Common,
    s: f64,
    alpha: Option<f64>,
    grid_levels: usize,
    exponents: (Option<f64>, Option<f64>),
    max_order: usize,
) -> Result<Status> {
    let measure = read_measure(&common.measure)?;
    let q = common.quad.spec()?;
    let grid = GridSpec::new(grid_levels)?;
    let tail = carleson_sup(&measure, s, &grid, &q)?;
    let log = alpha
        .map(|a| log_carleson_sup(&measure, a, s, &grid, &q))
        .transpose()?;
    let zhao = zhao_k(&measure, alpha.unwrap_or(0.0), s, &grid, &q)?;
    let moment = moment_carleson_sup(&measure.moments_up_to(max_order, &q)?, s)?;
    let prediction = match exponents {
        (Some(p), Some(q_exp)) => Some(PredictionOutput {
            p,
            q: q_exp,
            prediction: predict(p, q_exp, &measure)?,
        }),
        (None, None) => None,
        _ => bail!("--p and --q must be given together"),
    };
    let out = ClassifyOutput {
        measure,
        s,
        alpha,
        grid_levels,
        tail,
        log,
        zhao,
        moment,
        prediction,
    };
    match common.output.format {
        Format::Json => emit_json(&common.output, &out)?,
        Format::Csv => {
            let points = grid.points();
            let bytes = csv_bytes(|w| {
                w.write_record(["functional", "j", "a_j", "value"])?;
                let reports = [
                    Some(("tail", &out.tail)),
                    out.log.as_ref().map(|r| ("log", r)),
                    Some(("zhao", &out.zhao)),
                ];
                for (name, r) in reports.into_iter().flatten() {
                    for (j, (a, v)) in points.iter().zip(&r.values).enumerate() {
                        w.write_record([
                            name.to_string(),
                            j.to_string(),
                            a.to_string(),
                            v.to_string(),
                        ])?;
                    }
                }
                let verdicts = serde_json::json!({
                    "tail": {"verdict": out.tail.verdict, "vanishing": out.tail.vanishing, "sup": out.tail.sup_value},
                    "log": out.log.as_ref().map(|r| serde_json::json!({"verdict": r.verdict, "vanishing": r.vanishing, "sup": r.sup_value})),
                    "zhao": {"verdict": out.zhao.verdict, "vanishing": out.zhao.vanishing, "sup": out.zhao.sup_value},
                    "moment": {"verdict": out.moment.verdict, "vanishing": out.moment.vanishing, "sup": out.moment.sup_value},
                    "prediction": out.prediction,
                });
                w.write_record(["verdict".to_string(), verdicts.to_string()])?;
                Ok(())
            })?;
            emit(&common.output, &bytes)?;
        }
    }
    Ok(Status(true))
}

#[derive(Serialize)]
struct ApplyOutput {
    n: usize,
    method: Method,
    residual: Option<f64>,
    agreement: Option<AgreementReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement_skipped: Option<String>,
    output: CoefficientVector,
}

fn cmd_apply(common: &Common, coeffs: &Path, n: usize) -> Result<Status> {
    let measure = read_measure(&common.measure)?;
    let f = read_coefficients(coeffs)?;
    let q = common.quad.spec()?;
    let t = HankelTruncation::from_measure(&measure, n, &q)?;
    let report = apply(&t, &f, n <= CROSS_CHECK_MAX_N)?;
    let grid = default_z_grid();
    let rmax = grid.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tail = truncation_tail_bound(t.moments()[0], &f, rmax, n);
    let (agreement, agreement_skipped) = if tail < TAIL_TOL {
        (
            Some(agreement_check_with(&t, &measure, &f, &grid, &q)?),
            None,
        )
    } else {
        let why = format!(
            "series tail bound {tail:e} at |z| = 0.9 is not below {TAIL_TOL:e}; increase --N"
        );
        (None, Some(why))
    };
    let residual_ok = report.residual.is_none_or(|r| r <= RESIDUAL_TOL);
    let agreement_ok = agreement
        .as_ref()
        .is_none_or(|a| a.max_error <= AGREEMENT_TOL);
    let out = ApplyOutput {
        n,
        method: report.method,
        residual: report.residual,
        agreement,
        agreement_skipped,
        output: report.output,
    };
    match common.output.format {
        Format::Json => emit_json(&common.output, &out)?,
        Format::Csv => {
            let bytes = csv_bytes(|w| {
                w.write_record(["n", "re", "im"])?;
                for (k, c) in out.output.coeffs().iter().enumerate() {
                    w.write_record([k.to_string(), c.re.to_string(), c.im.to_string()])?;
                }
                Ok(())
            })?;
            emit(&common.output, &bytes)?;
            eprintln!(
                "residual {}, agreement max error {}",
                out.residual.map_or("n/a".to_string(), |r| format!("{r:e}")),
                out.agreement
                    .as_ref()
                    .map_or("skipped".to_string(), |a| format!("{:e}", a.max_error))
            );
        }
    }
    if !residual_ok {
        eprintln!(
            "fast and naive products differ by {:e}",
            out.residual.unwrap_or(f64::NAN)
        );
    }
    if let Some(why) = &out.agreement_skipped {
        eprintln!("agreement check skipped: {why}");
    }
    if let Some(a) = out.agreement.as_ref().filter(|_| !agreement_ok) {
        eprintln!("series and integral forms differ by {:e}", a.max_error);
    }
    Ok(Status(residual_ok && agreement_ok))
}

#[derive(Serialize)]
struct FrobeniusCheck {
    n: usize,
    relative_error: f64,
}

#[derive(Serialize)]
struct SchattenOutput {
    measure: Measure,
    p: f64,
    reports: Vec<SchattenReport>,
    membership: MembershipReport,
    frobenius: Vec<FrobeniusCheck>,
}

fn cmd_schatten(common: &Common, p: f64, n: usize, ladder: Option<Vec<usize>>) -> Result<Status> {
    let measure = read_measure(&common.measure)?;
    let q = common.quad.spec()?;
    let ladder = match ladder {
        Some(l) => l,
        None => {
            if n < 8 {
                bail!("--N must be at least 8 to form the ladder N/8, N/4, N/2, N");
            }
            vec![n / 8, n / 4, n / 2, n]
        }
    };
    let spectra = SpectralLadder::new(&measure, &ladder, &q)?;
    let reports = spectra.reports(p)?;
    let membership = spectra.verdict(p)?;
    let top = *ladder.last().expect("validated ladder");
    let moments = measure.moments_up_to(2 * top - 2, &q)?;
    let frobenius = ladder
        .iter()
        .zip(spectra.spectra())
        .map(|(n, values)| {
            let exact = frobenius_sq(&HankelTruncation::from_sequence(&moments, *n)?);
            let sum_sq: f64 = values.iter().map(|v| v * v).sum();
            Ok(FrobeniusCheck {
                n: *n,
                relative_error: (sum_sq - exact).abs() / exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = frobenius.iter().all(|c| c.relative_error <= FROBENIUS_TOL);
    let out = SchattenOutput {
        measure,
        p,
        reports,
        membership,
        frobenius,
    };
    match common.output.format {
        Format::Json => emit_json(&common.output, &out)?,
        Format::Csv => {
            let bytes = csv_bytes(|w| {
                w.write_record(["N", "schatten_partial", "criterion_partial"])?;
                for r in &out.reports {
                    w.write_record([
                        r.n.to_string(),
                        r.schatten_partial.to_string(),
                        r.criterion_partial.to_string(),
                    ])?;
                }
                Ok(())
            })?;
            emit(&common.output, &bytes)?;
        }
    }
    if !passed {
        eprintln!("Frobenius identity fails beyond {FROBENIUS_TOL:e}");
    }
    Ok(Status(passed))
}

fn cmd_verify(
    output: &Output,
    quad: &Quad,
    seed: u64,
    corrupt: Option<Option<usize>>,
) -> Result<Status> {
    let cfg = VerifyConfig {
        seed,
        corrupt_moment: corrupt.map(|k| k.unwrap_or_else(|| seeded_moment_index(seed))),
        quadrature: quad.spec()?,
    };
    let report: VerifyReport = verify::run(&cfg)?;
    for c in &report.checks {
        eprintln!(
            "check {:>2} {:<32} {}",
            c.id,
            c.name,
            if c.passed { "pass" } else { "FAIL" }
        );
        for f in &c.failures {
            eprintln!("         {f}");
        }
    }
    match output.format {
        Format::Json => emit_json(output, &report)?,
        Format::Csv => {
            let bytes = csv_bytes(|w| {
                w.write_record(["id", "name", "passed"])?;
                for c in &report.checks {
                    w.write_record([c.id.to_string(), c.name.clone(), c.passed.to_string()])?;
                }
                Ok(())
            })?;
            emit(output, &bytes)?;
        }
    }
    Ok(Status(report.passed))
}
