use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use xrmat::dump::{self, RForm};
use xrmat::dynamical::{check_dynamical_ybe, DynamicalR};
use xrmat::fusion::{
    check_fused_intertwine, check_fused_twist, check_projector_commutation, fused_commutant, fused_space,
    FusedBuilder,
};
use xrmat::hecke::Sign;
use xrmat::rbox::{check_equal, check_intertwine, check_twisted_ybe, rbox_explicit, BoxBuilder};
use xrmat::rep::{check_lemma1, check_relations, rho, rho_tuple, Generator};
use xrmat::report::CheckReport;
use xrmat::suite::{run_suite, summary, tolerances as tols, Level, SuiteConfig};
use xrmat::{sample_params, Backend, Error, ParamSet, Point, QParam, RatFunc};

#[derive(Parser, Debug)]
#[command(
    name = "xrmat",
    version,
    about = "Build and verify twisted R-matrices for an affine quantum superalgebra"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the Cartan matrix, parities and grading vector as JSON.
    DumpCartan {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the defining relations on the vector representation.
    CheckRelations(CheckArgs),
    /// Check invariance of the two distinguished subspaces of the tensor square at y = qx.
    CheckLemma1(CheckArgs),
    /// Print the 16x16 R-matrix on the tensor square.
    BuildR {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = BackendArg::Numeric)]
        backend: BackendArg,
        #[arg(long, default_value = "explicit", value_parser = parse_form)]
        form: RForm,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the twisted Yang-Baxter equation for the box or a fused R-matrix.
    CheckYbe {
        #[command(flatten)]
        check: CheckArgs,
        #[arg(long, value_enum, default_value_t = YbeLevel::Box)]
        level: YbeLevel,
        #[command(flatten)]
        fusion: FusionArgs,
    },
    /// Fused basis plus dimension, intertwining and irreducibility checks.
    FusionReport {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        fusion: FusionArgs,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the dynamical Yang-Baxter equation.
    CheckDynamical {
        #[command(flatten)]
        check: CheckArgs,
        #[command(flatten)]
        fusion: FusionArgs,
        /// Dynamical parameter; defaults to log(x)/log(q) on the principal branch.
        #[arg(long, value_parser = parse_complex)]
        lambda: Option<Complex64>,
    },
    /// Run a verification level over several seeded parameter draws.
    Verify {
        #[arg(value_parser = parse_level)]
        level: Level,
        #[arg(long, value_enum, default_value_t = BackendArg::Numeric)]
        backend: BackendArg,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        sign: Option<SignArg>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        single_thread: bool,
        #[arg(long)]
        negative_controls: bool,
    },
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// Seed for the parameter draw; explicit values below override it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_complex)]
    q: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    u: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    v: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    w: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    x: Option<Complex64>,
    #[arg(long, value_parser = parse_complex)]
    y: Option<Complex64>,
}

#[derive(Args, Debug, Clone)]
struct CheckArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum, default_value_t = BackendArg::Numeric)]
    backend: BackendArg,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    negative_controls: bool,
}

#[derive(Args, Debug, Clone)]
struct FusionArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_enum, default_value_t = SignArg::Plus)]
    sign: SignArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BackendArg {
    Numeric,
    Exact,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Numeric => Backend::Numeric,
            BackendArg::Exact => Backend::Exact,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SignArg {
    Plus,
    Minus,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum YbeLevel {
    Box,
    Fused,
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    let z = match s.split_once(',') {
        Some((re, im)) => Complex64::new(parse(re)?, parse(im)?),
        None => Complex64::new(parse(s)?, 0.0),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_level(s: &str) -> Result<Level, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_form(s: &str) -> Result<RForm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Config(String),
    Io(String),
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            Error::Unsupported(_) => Failure::Config(e.to_string()),
            other => Failure::Compute(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

impl ParamArgs {
    fn resolve(&self) -> CliResult<ParamSet> {
        let mut p = sample_params(self.seed)?;
        let overrides = [
            (&mut p.q, self.q),
            (&mut p.u, self.u),
            (&mut p.v, self.v),
            (&mut p.w, self.w),
            (&mut p.x, self.x),
        ];
        for (slot, value) in overrides {
            if let Some(z) = value {
                *slot = z;
            }
        }
        p.y = self.y.unwrap_or(p.q * p.x);
        if p.q.norm() == 0.0 {
            return Err(Failure::Config("q must be nonzero".into()));
        }
        Ok(p)
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(io::stdout()),
    })
}

fn write_value(path: Option<&Path>, value: &Value) -> CliResult<()> {
    match path {
        Some(p) => dump::write_json(p, value)?,
        None => io::stdout().write_all(&dump::to_bytes(value))?,
    }
    Ok(())
}

/// Writes reports as JSON lines and returns whether all passed.
fn emit(path: Option<&Path>, reports: &[CheckReport]) -> CliResult<bool> {
    let mut out = open_output(path)?;
    for r in reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    out.flush()?;
    Ok(reports.iter().all(|r| r.pass))
}

fn require_numeric(backend: BackendArg, what: &str) -> CliResult<()> {
    match backend {
        BackendArg::Numeric => Ok(()),
        BackendArg::Exact => Err(Failure::Config(format!(
            "{what} supports only the numeric backend"
        ))),
    }
}

fn tagged(r: CheckReport, p: &ParamSet) -> CheckReport {
    r.with_params(
        serde_json::to_value(p).expect("parameters serialize"),
        Some(p.seed),
    )
}

fn check_relations_cmd(a: &CheckArgs) -> CliResult<bool> {
    let tol = a.tol.unwrap_or(tols::RELATIONS);
    let report = match a.backend {
        BackendArg::Exact => {
            let pt = Point::<RatFunc>::symbolic();
            check_relations(&rho(&pt.q, &pt.x), &pt.q, 0.0)
        }
        BackendArg::Numeric => {
            let p = a.params.resolve()?;
            let q = QParam::new(p.q)?;
            tagged(check_relations(&rho(&q, &p.x), &q, tol), &p)
        }
    };
    emit(a.output.as_deref(), &[report])
}

fn check_lemma1_cmd(a: &CheckArgs) -> CliResult<bool> {
    let tol = a.tol.unwrap_or(tols::LEMMA1);
    let report = match a.backend {
        BackendArg::Exact => {
            if a.params.y.is_some() {
                return Err(Failure::Config(
                    "the exact backend checks the symbolic point y = qx".into(),
                ));
            }
            let pt = Point::<RatFunc>::symbolic();
            let y = pt.q.q.mul(&pt.x);
            check_lemma1(&pt.q, &pt.x, &y, 0.0)?
        }
        BackendArg::Numeric => {
            let p = a.params.resolve()?;
            let q = QParam::new(p.q)?;
            tagged(check_lemma1(&q, &p.x, &p.y, tol)?, &p)
        }
    };
    emit(a.output.as_deref(), &[report])
}

fn build_r_cmd(
    params: &ParamArgs,
    backend: BackendArg,
    form: RForm,
    output: Option<&Path>,
) -> CliResult<bool> {
    let value = match backend {
        BackendArg::Exact => {
            let pt = Point::<RatFunc>::symbolic();
            dump::rbox_json(&pt.q, &pt.u, &pt.v, &pt.x, form)?
        }
        BackendArg::Numeric => {
            let p = params.resolve()?;
            let q = QParam::new(p.q)?;
            dump::rbox_json(&q, &p.u, &p.v, &p.x, form)?
        }
    };
    write_value(output, &value)?;
    Ok(true)
}

fn check_ybe_cmd(a: &CheckArgs, level: YbeLevel, f: &FusionArgs) -> CliResult<bool> {
    let mut reports = Vec::new();
    match (level, a.backend) {
        (YbeLevel::Box, BackendArg::Exact) => {
            let pt = Point::<RatFunc>::symbolic();
            let b = BoxBuilder {
                q: pt.q.clone(),
                shift: 1,
            };
            reports.push(check_twisted_ybe(&b, &pt.u, &pt.v, &pt.w, &pt.x, 0.0)?);
            if a.negative_controls {
                let bad = BoxBuilder {
                    q: pt.q.clone(),
                    shift: 0,
                };
                reports.push(check_twisted_ybe(&bad, &pt.u, &pt.v, &pt.w, &pt.x, 0.0)?.expect_failure());
            }
        }
        (YbeLevel::Box, BackendArg::Numeric) => {
            let p = a.params.resolve()?;
            let q = QParam::new(p.q)?;
            let tol = a.tol.unwrap_or(tols::BOX_YBE);
            let b = BoxBuilder {
                q: q.clone(),
                shift: 1,
            };
            reports.push(tagged(check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, tol)?, &p));
            if a.negative_controls {
                let bad = BoxBuilder { q, shift: 0 };
                let r = check_twisted_ybe(&bad, &p.u, &p.v, &p.w, &p.x, tols::NEGATIVE)?;
                reports.push(tagged(r.expect_failure(), &p));
            }
        }
        (YbeLevel::Fused, backend) => {
            require_numeric(backend, "the fused Yang-Baxter check")?;
            let p = a.params.resolve()?;
            let q = QParam::new(p.q)?;
            let default = if f.n >= 3 {
                tols::FUSED_YBE_3
            } else {
                tols::FUSED_YBE_2
            };
            let tol = a.tol.unwrap_or(default);
            let b = FusedBuilder::new(&q, f.n, f.sign.into(), &p.x)?;
            reports.push(tagged(check_twisted_ybe(&b, &p.u, &p.v, &p.w, &p.x, tol)?, &p));
            if a.negative_controls {
                let bad = b.with_shift(1);
                let r = check_twisted_ybe(&bad, &p.u, &p.v, &p.w, &p.x, tols::NEGATIVE)?;
                reports.push(tagged(r.expect_failure(), &p));
            }
        }
    }
    emit(a.output.as_deref(), &reports)
}

fn fusion_report_cmd(
    params: &ParamArgs,
    f: &FusionArgs,
    tol: Option<f64>,
    output: Option<&Path>,
) -> CliResult<bool> {
    let p = params.resolve()?;
    let q = QParam::new(p.q)?;
    let sign: Sign = f.sign.into();
    let tol = tol.unwrap_or(tols::FUSION);
    let space = fused_space(&q, f.n, &p.x, sign)?;
    let mut reports = vec![
        check_projector_commutation(&q, f.n, &p.u, &p.v, &p.x, sign, None, tol)?,
        check_fused_intertwine(&q, f.n, &p.u, &p.v, &p.x, sign, None, tol)?,
        check_fused_twist(&q, &space, &p.u, tol)?,
    ];
    let commutant = fused_commutant(&q, &space, &p.u, tols::COMMUTANT)?;
    if f.n == 2 {
        let r = rbox_explicit(&q, &p.u, &p.v, &p.x);
        let a = rho_tuple(&q, &[p.u, p.v], &p.x)?;
        let b = rho_tuple(&q, &[p.v, p.u], &p.x)?;
        let gens: Vec<Generator> = Generator::primary().collect();
        reports.push(check_intertwine(&r, &a, &b, &gens, tols::INTERTWINE));
    }
    reports.push(check_equal(&p.point(), tols::RBOX_EQUAL)?);
    let reports: Vec<CheckReport> = reports.into_iter().map(|r| tagged(r, &p)).collect();
    let pass = reports.iter().all(|r| r.pass) && commutant == 1;
    let mut value = dump::fused_basis_json(&q, f.n, p.x, sign)?;
    value["params"] = serde_json::to_value(p).expect("parameters serialize");
    value["commutant_dimension"] = json!(commutant);
    value["reports"] = Value::Array(
        reports
            .iter()
            .map(|r| serde_json::to_value(r).expect("reports serialize"))
            .collect(),
    );
    value["pass"] = json!(pass);
    write_value(output, &value)?;
    Ok(pass)
}

fn check_dynamical_cmd(a: &CheckArgs, f: &FusionArgs, lambda: Option<Complex64>) -> CliResult<bool> {
    require_numeric(a.backend, "the dynamical check")?;
    let p = a.params.resolve()?;
    let q = QParam::new(p.q)?;
    let dr = DynamicalR::on_branch(&q, f.n, f.sign.into(), 0)?;
    let lambda = lambda.unwrap_or_else(|| p.x.ln() / dr.a);
    let default = if f.n >= 3 {
        tols::FUSED_YBE_3
    } else {
        tols::FUSED_YBE_2
    };
    let tol = a.tol.unwrap_or(default);
    let mut reports = vec![tagged(
        check_dynamical_ybe(&dr, p.u, p.v, p.w, lambda, None, tol)?,
        &p,
    )];
    if a.negative_controls {
        let fake = Some(Complex64::new(-(f.n as f64) - 1.0, 0.0));
        let r = check_dynamical_ybe(&dr, p.u, p.v, p.w, lambda, fake, tols::NEGATIVE)?;
        reports.push(tagged(r.expect_failure(), &p));
    }
    emit(a.output.as_deref(), &reports)
}

fn verify_cmd(config: SuiteConfig, output: Option<&Path>) -> CliResult<bool> {
    config.validate()?;
    let mut out = open_output(output)?;
    let mut write_error: Option<io::Error> = None;
    let reports = run_suite(&config, &mut |r| {
        if write_error.is_none() {
            if let Err(e) = writeln!(out, "{}", r.to_json_line()).and_then(|_| out.flush()) {
                write_error = Some(e);
            }
        }
    })?;
    if let Some(e) = write_error {
        return Err(e.into());
    }
    writeln!(out, "{}", summary(&reports))?;
    out.flush()?;
    Ok(reports.iter().all(|r| r.pass))
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::DumpCartan { output } => {
            write_value(output.as_deref(), &dump::cartan_json()?)?;
            Ok(true)
        }
        Command::CheckRelations(a) => check_relations_cmd(&a),
        Command::CheckLemma1(a) => check_lemma1_cmd(&a),
        Command::BuildR {
            params,
            backend,
            form,
            output,
        } => build_r_cmd(&params, backend, form, output.as_deref()),
        Command::CheckYbe { check, level, fusion } => check_ybe_cmd(&check, level, &fusion),
        Command::FusionReport {
            params,
            fusion,
            tol,
            output,
        } => fusion_report_cmd(&params, &fusion, tol, output.as_deref()),
        Command::CheckDynamical {
            check,
            fusion,
            lambda,
        } => check_dynamical_cmd(&check, &fusion, lambda),
        Command::Verify {
            level,
            backend,
            tol,
            seed,
            samples,
            n,
            sign,
            output,
            single_thread,
            negative_controls,
        } => {
            let config = SuiteConfig {
                level,
                backend: backend.into(),
                tol,
                seed,
                samples,
                n,
                sign: sign.map(Sign::from),
                negative_controls,
                single_thread,
            };
            verify_cmd(config, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
