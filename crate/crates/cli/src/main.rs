mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use jacobi_bound::canon::{CanonError, OrderMatrix};
use jacobi_bound::dsl::{parse_point, parse_system, SystemFile};
use jacobi_bound::linear::{LinearError, OperatorMatrix};
use jacobi_bound::order::Order;
use jacobi_bound::report::{self, AnalysisError, CanonReport, NormalFormReport, Options};

#[derive(Parser)]
#[command(name = "jacobi-bound", version, about = "Order bounds and normal forms for systems of ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report: order matrix, canon, truncated jacobian, quasi-regularity, linear analysis
    Analyze {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Common,
    },
    /// Jacobi number and minimal canon of each system
    Bound {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Common,
    },
    /// Minimal canon of an order matrix given in the matrix text format
    Canon {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Common,
    },
    /// Solved normal form of a square linear system
    NormalForm {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        opts: Common,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// JSON point file: {"t": 0.1, "x1": 1, "x1^2": -0.5}
    #[arg(long, value_name = "FILE")]
    point: Option<PathBuf>,
    /// Seeded random points for numeric checks when no point is given
    #[arg(long, value_name = "N", default_value_t = 0)]
    random_points: usize,
    #[arg(long, value_name = "U64", default_value_t = 0)]
    seed: u64,
    /// Highest prolongation level checked for quasi-regularity
    #[arg(long, value_name = "N", default_value_t = 4)]
    s_max: u32,
    /// Relative singular-value threshold for numeric rank
    #[arg(long, value_name = "REAL", default_value_t = 1e-9)]
    tol: f64,
    /// Print a JSON object instead of text
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    module: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, module: &'static str, message: impl ToString) -> Self {
        Failure { code, module, message: message.to_string() }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        Failure::new(e.exit_code() as u8, e.module(), e)
    }
}

struct Output {
    json: Value,
    text: String,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new(2, "cli", format!("{}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<SystemFile, Failure> {
    parse_system(&read(path)?).map_err(|e| Failure::new(2, "cli", e))
}

fn options(system: &SystemFile, opts: &Common) -> Result<Options, Failure> {
    let point = match &opts.point {
        Some(path) => Some(parse_point(&read(path)?, &system.vars).map_err(|e| Failure::new(2, "cli", e))?),
        None => None,
    };
    Ok(Options { point, random_points: opts.random_points, seed: opts.seed, s_max: opts.s_max, tol: opts.tol })
}

fn json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn analyze(path: &Path, opts: &Common) -> Result<Output, Failure> {
    let system = load_system(path)?;
    let r = report::analyze(&system, &options(&system, opts)?)?;
    Ok(Output { text: render::report(&r), json: json(&r) })
}

#[derive(Serialize)]
struct BoundOutput {
    order_matrix: Vec<Vec<Order>>,
    padded: bool,
    canon: CanonReport,
    jacobi_number: Order,
}

fn bound(path: &Path) -> Result<Output, Failure> {
    let system = load_system(path)?;
    let (a, c) = report::bound(&system)?;
    let out = BoundOutput {
        order_matrix: a.to_rows(),
        padded: a.is_padded(),
        canon: CanonReport::from(&c),
        jacobi_number: Order::Finite(c.jacobi_number),
    };
    let text = render::bound(&system.vars, &out.order_matrix, out.padded, &out.canon, c.jacobi_number);
    Ok(Output { json: json(&out), text })
}

fn canon(path: &Path) -> Result<Output, Failure> {
    let a: OrderMatrix = read(path)?.parse().map_err(|e| Failure::new(2, "cli", e))?;
    let a = a.pad_square().map_err(|e| Failure::new(2, "jacobi_core", e))?;
    let c = a.minimal_canon().map_err(|e| match e {
        CanonError::NoTransversal { .. } => Failure::new(3, "jacobi_core", format!("Jacobi number is -inf: {e}")),
        e => Failure::new(2, "jacobi_core", e),
    })?;
    let vars: Vec<String> = (1..=a.cols()).map(|j| format!("x{j}")).collect();
    let out = BoundOutput {
        order_matrix: a.to_rows(),
        padded: a.is_padded(),
        canon: CanonReport::from(&c),
        jacobi_number: Order::Finite(c.jacobi_number),
    };
    let text = render::bound(&vars, &out.order_matrix, out.padded, &out.canon, c.jacobi_number);
    Ok(Output { json: json(&out), text })
}

#[derive(Serialize)]
struct NormalFormOutput {
    variables: Vec<String>,
    order: i64,
    #[serde(flatten)]
    normal_form: NormalFormReport,
}

fn normal_form(path: &Path) -> Result<Output, Failure> {
    let system = load_system(path)?;
    let linear = |e: LinearError| match e {
        LinearError::NotLinear { .. } | LinearError::UnknownVariable { .. } | LinearError::NotSquare { .. } => {
            Failure::new(4, "linear_normal_form", e)
        }
        e => Failure::new(5, "linear_normal_form", e),
    };
    let a = OperatorMatrix::from_system(&system.exprs(), system.arity()).map_err(linear)?;
    let f = a.normal_form().map_err(linear)?;
    let out = NormalFormOutput {
        variables: system.vars.clone(),
        order: f.order,
        normal_form: NormalFormReport::new(&f, &system.vars),
    };
    Ok(Output { text: render::normal_form(&out.normal_form, out.order), json: json(&out) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (files, opts, job): (Vec<PathBuf>, Common, fn(&Path, &Common) -> Result<Output, Failure>) =
        match cli.command {
            Command::Analyze { files, opts } => (files, opts, analyze),
            Command::Bound { files, opts } => (files, opts, |p, _| bound(p)),
            Command::Canon { files, opts } => (files, opts, |p, _| canon(p)),
            Command::NormalForm { files, opts } => (files, opts, |p, _| normal_form(p)),
        };

    let results: Vec<Result<Output, Failure>> = thread::scope(|s| {
        let handles: Vec<_> = files.iter().map(|f| s.spawn(|| job(f, &opts))).collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });

    let mut code = 0u8;
    let mut values = Vec::new();
    for (path, result) in files.iter().zip(results) {
        match result {
            Ok(out) => {
                if opts.json {
                    values.push(out.json);
                } else {
                    if files.len() > 1 {
                        println!("== {}", path.display());
                    }
                    print!("{}", out.text);
                }
            }
            Err(f) => {
                eprintln!("error [{}] {}: {}", f.module, path.display(), f.message);
                if code == 0 {
                    code = f.code;
                }
                if opts.json {
                    values.push(serde_json::json!({
                        "file": path.display().to_string(),
                        "error": { "module": f.module, "message": f.message, "exit_code": f.code },
                    }));
                }
            }
        }
    }
    if opts.json {
        let doc = if values.len() == 1 { values.pop().unwrap() } else { Value::Array(values) };
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    }
    ExitCode::from(code)
}
