use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use malliavin_stein::chaos::{decompose_hoeffding, decompose_walsh, ChaosDecomposition, TruthTable};
use malliavin_stein::contraction::star;
use malliavin_stein::engine::{distance, distance_mc, Estimate, RNG_ID};
use malliavin_stein::io::{self, DecompositionFile, KernelFile};
use malliavin_stein::malliavin::{apply_l, apply_l_inverse, apply_pt};
use malliavin_stein::sparse::{fractional_product, Cover, Injection, SparseIndexSet};
use malliavin_stein::stein::{self, WeightSequence};
use malliavin_stein::verify::{self, CheckRow};
use malliavin_stein::{GeneralKernel, Rational, Scalar, SymmetricKernel, TestFunction};

#[derive(Parser)]
#[command(name = "mstein", version, about = "Malliavin-Stein bounds for Rademacher functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format of the report printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Scalar arithmetic for commands that support both.
    #[arg(long = "arith", global = true, value_enum, default_value_t = Arith::Float)]
    arith: Arith,
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Arith {
    Float,
    Rational,
}

impl Arith {
    fn name(self) -> &'static str {
        match self {
            Arith::Float => <f64 as Scalar>::MODE,
            Arith::Rational => <Rational as Scalar>::MODE,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Chaos decomposition of a truth table.
    Decompose {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Walsh)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Star contraction of two kernels.
    Contract {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contraction norm inequalities on seeded random pairs.
    VerifyEstimates {
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// Applies L, its inverse or the semigroup to a decomposition.
    Operators {
        #[arg(long)]
        dec: PathBuf,
        #[arg(long, value_enum)]
        op: Op,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operator identities on seeded random decompositions.
    VerifyMalliavin {
        #[arg(long, default_value_t = 6)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
    },
    /// Normal approximation bounds.
    Bound(BoundArgs),
    /// Distance |E h(F) - E h(Z)| by enumeration or Monte Carlo.
    Distance {
        #[arg(long)]
        dec: PathBuf,
        #[arg(long, default_value = "cos:a=1")]
        h: String,
        #[arg(long, value_enum, default_value_t = DistanceMode::Exact)]
        mode: DistanceMode,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sparse index sets.
    #[command(subcommand)]
    Sparse(SparseCommand),
    /// Seeded identity suites.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Walsh,
    Hoeffding,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    #[value(name = "L")]
    L,
    #[value(name = "Linv")]
    Linv,
    #[value(name = "Pt")]
    Pt,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceMode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum BoundMode {
    General,
    Average,
    FixedChaos,
    Double,
    Runs,
    Sparse,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long, value_enum, default_value_t = BoundMode::General)]
    mode: BoundMode,
    #[arg(long, default_value = "cos:a=1")]
    h: String,
    /// Decomposition file (general mode, or fixed-chaos/double with one kernel).
    #[arg(long)]
    dec: Option<PathBuf>,
    /// Kernel file (fixed-chaos and double modes).
    #[arg(long)]
    kernel: Option<PathBuf>,
    /// Weight sequence such as ones:n=100, inv:r=50 or file:weights.json.
    #[arg(long)]
    alpha: Option<String>,
    /// Sparse set file (sparse mode).
    #[arg(long)]
    set: Option<PathBuf>,
    /// Weights for the weighted sparse statistics.
    #[arg(long)]
    beta: Option<String>,
    /// Rate study over these sizes: partial sums (average mode) or
    /// unit-weight runs (runs mode).
    #[arg(long, value_delimiter = ',')]
    rate: Vec<usize>,
    /// Largest dimension measured by exact enumeration in rate studies.
    #[arg(long, default_value_t = 20)]
    max_enum: usize,
}

#[derive(Subcommand)]
enum SparseCommand {
    /// Fractional Cartesian product set for a cover.
    Build {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        cover: String,
        #[arg(long = "N")]
        big_n: usize,
        /// mixed or random:SEED.
        #[arg(long, default_value = "mixed")]
        injection: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling table over a grid of N.
    Scale {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value = "1,2;2,3;1,3")]
        cover: String,
        #[arg(long = "Ns", value_delimiter = ',', default_value = "64,128,256,512,1024")]
        ns: Vec<usize>,
        #[arg(long, default_value = "mixed")]
        injection: String,
        #[arg(long, default_value = "cos:a=1")]
        h: String,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Every suite over `seeds` instances.
    All {
        #[arg(long, default_value_t = 6)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        seeds: u64,
    },
}

#[derive(Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunReport {
    command: Vec<String>,
    version: &'static str,
    rng: &'static str,
    mode: &'static str,
    inputs: Vec<InputDigest>,
    rows: Vec<CheckRow>,
    result: Value,
    pass: bool,
    wall_time_s: f64,
}

/// Unreadable or invalid input, reported with exit code 3.
enum Failure {
    Input(String),
}

impl From<malliavin_stein::Error> for Failure {
    fn from(e: malliavin_stein::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

/// Accumulates inputs and checks for the report.
struct Run {
    inputs: Vec<InputDigest>,
    rows: Vec<CheckRow>,
    csv: Option<String>,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn weights(&mut self, spec: &str) -> Result<WeightSequence, Failure> {
        match spec.strip_prefix("file:") {
            Some(path) => {
                let text = self.read(Path::new(path))?;
                Ok(io::parse_json(&text)?)
            }
            None => Ok(WeightSequence::parse(spec)?),
        }
    }
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn need<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    value.as_ref().ok_or_else(|| Failure::Input(format!("this mode needs --{flag}")))
}

fn general_to_f64<S: Scalar>(k: &GeneralKernel<S>) -> Result<GeneralKernel<f64>, Failure> {
    Ok(GeneralKernel::new(k.order(), k.sorted_entries().into_iter().map(|(t, v)| (t, v.to_f64())))?)
}

fn exact_dec(dec: &ChaosDecomposition<f64>) -> ChaosDecomposition<Rational> {
    dec.map_scalar(|&x| Rational::from_f64(x))
}

fn to_float(dec: &ChaosDecomposition<Rational>) -> ChaosDecomposition<f64> {
    dec.map_scalar(|x| x.to_f64())
}

fn parse_injection(spec: &str) -> Result<Injection, Failure> {
    match spec.split_once(':') {
        None if spec == "mixed" => Ok(Injection::MixedRadix),
        Some(("random", seed)) => seed
            .parse()
            .map(|seed| Injection::Random { seed })
            .map_err(|_| Failure::Input(format!("bad seed '{seed}'"))),
        _ => Err(Failure::Input(format!("unknown injection '{spec}', expected mixed or random:SEED"))),
    }
}

fn kernel_for_fixed_chaos(run: &mut Run, args: &BoundArgs) -> Result<SymmetricKernel<f64>, Failure> {
    if let Some(p) = &args.kernel {
        return Ok(io::read_kernel(&run.read(p)?)?);
    }
    let dec = io::read_decomposition(&run.read(need(&args.dec, "kernel or --dec")?)?)?;
    let mut kernels = dec.kernels();
    match (kernels.next(), kernels.next()) {
        (Some(k), None) => Ok(k.clone()),
        _ => Err(Failure::Input("decomposition must hold exactly one kernel".into())),
    }
}

fn measured(dec: &ChaosDecomposition<f64>, h: &TestFunction, max_enum: usize) -> Option<f64> {
    (dec.dimension() <= max_enum).then(|| distance(dec, h).ok()).flatten()
}

fn rate_csv(rows: &[(usize, f64, f64, f64, Option<f64>)]) -> String {
    let mut out = String::from("n,B1,B2,total,measured_distance\n");
    for (n, b1, b2, total, m) in rows {
        let m = m.map(|v| format!("{v:e}")).unwrap_or_default();
        out.push_str(&format!("{n},{b1:e},{b2:e},{total:e},{m}\n"));
    }
    out
}

fn bound(run: &mut Run, args: &BoundArgs) -> Result<Value, Failure> {
    let h = TestFunction::parse(&args.h)?;
    let value = match args.mode {
        BoundMode::General => {
            let dec = io::read_decomposition(&run.read(need(&args.dec, "dec")?)?)?;
            json!(stein::bound_general(&dec, &h)?)
        }
        BoundMode::Average if !args.rate.is_empty() => {
            let mut rows = Vec::new();
            for &n in &args.rate {
                let alpha = WeightSequence::constant(n, 1.0 / (n as f64).sqrt());
                let b = stein::bound_average(&alpha, &h)?;
                let dec = alpha.to_decomposition()?;
                rows.push((n, b.b1, b.b2, b.total, measured(&dec, &h, args.max_enum)));
            }
            run.csv = Some(rate_csv(&rows));
            json!(rows)
        }
        BoundMode::Average => {
            let alpha = run.weights(need(&args.alpha, "alpha")?)?;
            json!(stein::bound_average(&alpha, &h)?)
        }
        BoundMode::FixedChaos => {
            let f = kernel_for_fixed_chaos(run, args)?;
            json!(stein::bound_fixed_chaos(&f, &h)?)
        }
        BoundMode::Double => {
            let f = kernel_for_fixed_chaos(run, args)?;
            let mut v = json!(stein::bound_double_integral(&f, &h)?);
            if let Ok(c) = stein::chatterjee_bound(&f) {
                v["chatterjee"] = json!(c);
            }
            v
        }
        BoundMode::Runs if !args.rate.is_empty() => {
            let mut rows = Vec::new();
            for &n in &args.rate {
                let alpha = WeightSequence::ones(n);
                let b = stein::bound_two_runs(&alpha, &h)?;
                let dist = if n < args.max_enum {
                    let (f, g) = stein::two_runs_kernels(&alpha)?;
                    let mut dec = f.to_decomposition()?;
                    dec = dec.add(&ChaosDecomposition::from_kernel(g).with_dimension(dec.dimension())?);
                    measured(&dec, &h, args.max_enum)
                } else {
                    None
                };
                rows.push((n, b.breakdown[0].value, b.breakdown[1].value, b.total, dist));
            }
            run.csv = Some(rate_csv(&rows));
            json!(rows)
        }
        BoundMode::Runs => {
            let alpha = run.weights(need(&args.alpha, "alpha")?)?;
            json!(stein::bound_two_runs(&alpha, &h)?)
        }
        BoundMode::Sparse => {
            let set: SparseIndexSet = io::parse_json(&run.read(need(&args.set, "set")?)?)?;
            let mut v = json!({ "stats": stein::bound_sparse_stats(&set, &h)? });
            if let Some(spec) = &args.beta {
                let beta = run.weights(spec)?;
                v["weighted"] = json!(stein::bound_weighted_sparse(&beta, &set)?);
            }
            v
        }
    };
    Ok(value)
}

fn rows_csv(rows: &[CheckRow]) -> String {
    let mut out = String::from("suite,id,seed,lhs,rhs,tolerance,pass\n");
    for r in rows {
        out.push_str(&format!(
            "{},\"{}\",{},{:e},{:e},{:e},{}\n",
            r.suite, r.id, r.seed, r.lhs, r.rhs, r.tolerance, r.pass
        ));
    }
    out
}

fn execute(cli: &Cli, run: &mut Run) -> Result<Value, Failure> {
    let rational = cli.arith == Arith::Rational;
    match &cli.command {
        Command::Decompose { table, method, out } => {
            let t = io::read_table(&run.read(table)?)?;
            let dec = if rational {
                let exact = TruthTable::new(t.dimension(), t.values().iter().map(|&v| Rational::from_f64(v)).collect())?;
                let dec = match method {
                    Method::Walsh => decompose_walsh(&exact)?,
                    Method::Hoeffding => decompose_hoeffding(&exact)?,
                };
                let back = dec.to_table()?;
                let exact_round_trip = back.values() == exact.values();
                run.rows.push(CheckRow {
                    suite: "decompose".into(),
                    id: "reconstruction".into(),
                    seed: 0,
                    lhs: 0.0,
                    rhs: 0.0,
                    tolerance: 0.0,
                    pass: exact_round_trip,
                });
                to_float(&dec)
            } else {
                match method {
                    Method::Walsh => decompose_walsh(&t)?,
                    Method::Hoeffding => decompose_hoeffding(&t)?,
                }
            };
            let file = DecompositionFile::from_decomposition(&dec);
            write_out(out, &io::to_json(&file))?;
            Ok(json!(file))
        }
        Command::Contract { f, g, r, l, out } => {
            let fk = io::read_kernel(&run.read(f)?)?;
            let gk = io::read_kernel(&run.read(g)?)?;
            let c = if rational {
                let to_exact = |k: &SymmetricKernel<f64>| k.map_scalar(|&x| Rational::from_f64(x));
                general_to_f64(&star(&to_exact(&fk), &to_exact(&gk), *r, *l)?)?
            } else {
                star(&fk, &gk, *r, *l)?
            };
            let file = KernelFile::from_general(&c);
            write_out(out, &io::to_json(&file))?;
            Ok(json!({ "kernel": file, "l2_norm": c.l2_norm() }))
        }
        Command::VerifyEstimates { seeds } => {
            for seed in 0..*seeds {
                run.rows.extend(if rational {
                    verify::estimate_checks::<Rational>(seed)
                } else {
                    verify::estimate_checks::<f64>(seed)
                });
            }
            Ok(Value::Null)
        }
        Command::Operators { dec, op, t, out } => {
            let d = io::read_decomposition(&run.read(dec)?)?;
            let result = if rational {
                let e = exact_dec(&d);
                to_float(&match op {
                    Op::L => apply_l(&e),
                    Op::Linv => apply_l_inverse(&e)?,
                    Op::Pt => apply_pt(&e, *t)?,
                })
            } else {
                match op {
                    Op::L => apply_l(&d),
                    Op::Linv => apply_l_inverse(&d)?,
                    Op::Pt => apply_pt(&d, *t)?,
                }
            };
            let file = DecompositionFile::from_decomposition(&result);
            write_out(out, &io::to_json(&file))?;
            Ok(json!(file))
        }
        Command::VerifyMalliavin { d, seeds } => {
            for seed in 0..*seeds {
                run.rows.extend(verify::malliavin_checks(seed, (*d).clamp(1, 8))?);
            }
            Ok(Value::Null)
        }
        Command::Bound(args) => bound(run, args),
        Command::Distance { dec, h, mode, samples, seed } => {
            let d = io::read_decomposition(&run.read(dec)?)?;
            let h = TestFunction::parse(h)?;
            let est = match mode {
                DistanceMode::Exact => Estimate::exact(distance(&d, &h)?, d.compress().dimension()),
                DistanceMode::Mc => distance_mc(&d, &h, *samples, *seed)?,
            };
            Ok(json!(est))
        }
        Command::Sparse(SparseCommand::Build { d, m, cover, big_n, injection, out }) => {
            let cover = Cover::parse(*d, *m, cover)?;
            let set = fractional_product(&cover, *big_n, &parse_injection(injection)?)?;
            write_out(out, &io::to_json(&set))?;
            Ok(json!({
                "representatives": set.representatives().len(),
                "cardinality": set.cardinality(),
                "set": set,
            }))
        }
        Command::Sparse(SparseCommand::Scale { d, m, cover, ns, injection, h }) => {
            let cover = Cover::parse(*d, *m, cover)?;
            let h = TestFunction::parse(h)?;
            let table = stein::scaling_table(&cover, ns, &parse_injection(injection)?, &h)?;
            run.csv = Some(table.to_csv());
            Ok(json!(table))
        }
        Command::Verify(VerifyCommand::All { d, seeds }) => {
            run.rows.extend(verify::verify_all(*d, *seeds)?);
            Ok(Value::Null)
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = Cli::parse();
    let mut run = Run { inputs: Vec::new(), rows: Vec::new(), csv: None };
    let result = match execute(&cli, &mut run) {
        Ok(v) => v,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(3);
        }
    };
    let pass = run.rows.iter().all(|r| r.pass);
    let report = RunReport {
        command: std::env::args().collect(),
        version: env!("CARGO_PKG_VERSION"),
        rng: RNG_ID,
        mode: cli.arith.name(),
        inputs: run.inputs,
        rows: run.rows,
        result,
        pass,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let json_text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Err(Failure::Input(msg)) = write_out(&cli.report, &json_text) {
        eprintln!("error: {msg}");
        return ExitCode::from(3);
    }
    match cli.format {
        Format::Json => println!("{json_text}"),
        Format::Csv => match &run.csv {
            Some(csv) => print!("{csv}"),
            None => print!("{}", rows_csv(&report.rows)),
        },
    }
    if !pass {
        let failed = report.rows.iter().filter(|r| !r.pass).count();
        eprintln!("{failed} of {} checks failed", report.rows.len());
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
