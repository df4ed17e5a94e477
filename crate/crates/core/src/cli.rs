//! Command-line front end. `run` takes the argument list and output streams
//! and returns the process exit code: 0 on success, 2 for invalid input,
//! 3 for resource limits and I/O failures.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::circle::{
    deviation_histogram, flat_norms, h_sharp_coefficients, representation_counts, summarize,
    verify_with_counts, VerifyRow, BOUNDARY_FRACTION, EXACT_CHECK_X,
};
use crate::ecapp::construct_curve;
use crate::error::{Error, Result};
use crate::expsum::{best_approx, ideal_exp_sum, weyl_bound_ratio, IdealCharacter, QuadraticField, WeylRow};
use crate::galois::GaloisSpec;
use crate::genfun::{GenfunContext, MinorArcRow};
use crate::instance::{builtin_instance_json, FieldClass, ProblemInstance};
use crate::phase::Alpha;
use crate::sieve::{smooth_count, PrimeTable, SieveParams};
use crate::singular::LocalFactors;

pub const SCHEMA: &str = "chebotarev-circle/1";
const HISTOGRAM_EDGES: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

#[derive(Parser, Debug)]
#[command(name = "chebotarev", version, about = "Prime representation counts in Chebotarev classes")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit timestamps and runtimes from outputs.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compare S(N) with the predicted main term; writes verify.csv and summary.json.
    Verify {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        pmax: Option<u64>,
        /// Binary prime-table cache file.
        #[arg(long)]
        prime_cache: Option<PathBuf>,
    },
    /// Main-term components for each N, as JSON.
    LocalFactors {
        #[command(flatten)]
        instance: InstanceArg,
        /// Override the instance's N values.
        #[arg(long = "n", num_args = 1.., allow_negative_numbers = true)]
        n: Vec<i64>,
        #[arg(long)]
        pmax: Option<u64>,
    },
    /// G, G♯ and |G♭| at the given α, as CSV.
    Genfun {
        /// Built-in field-class such as gaussian-e.
        #[arg(long, conflicts_with = "spec")]
        builtin: Option<String>,
        /// GaloisSpec JSON file (with --class).
        #[arg(long, requires = "class")]
        spec: Option<PathBuf>,
        #[arg(long)]
        class: Option<String>,
        #[arg(long = "X")]
        x: u64,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        alpha: Vec<Alpha>,
        #[arg(long = "A", default_value_t = 1.0)]
        a: f64,
        #[arg(long = "B")]
        b: Option<f64>,
    },
    /// Weyl sums against their bound, or ideal exponential sums, as CSV.
    Expsum {
        /// Polynomial coefficients, constant term first, comma separated.
        #[arg(long, conflicts_with = "ideal", allow_hyphen_values = true)]
        poly: Option<String>,
        /// Discriminant of a quadratic field: sum r_d(m) e(αm) over m ≤ X.
        #[arg(long, allow_negative_numbers = true)]
        ideal: Option<i64>,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        alpha: Vec<Alpha>,
        #[arg(long = "X")]
        x: u64,
        /// Weight ideal sums by log m.
        #[arg(long)]
        log_weighted: bool,
    },
    /// Count squarefree z-smooth n ≤ Y.
    Smooth {
        #[arg(long)]
        z: f64,
        #[arg(long = "Y")]
        y: f64,
    },
    /// Best rational approximation with denominator ≤ qmax.
    Ratapprox {
        #[arg(long, allow_negative_numbers = true)]
        alpha: Alpha,
        #[arg(long)]
        qmax: u64,
    },
    /// Elliptic curve with discriminant supported on primes split in a field.
    EcConstruct {
        /// Built-in field name or GaloisSpec JSON file.
        #[arg(long)]
        field: String,
        #[arg(long)]
        limit: u64,
    },
}

#[derive(Args, Debug)]
pub struct InstanceArg {
    /// Instance JSON file or built-in instance name.
    #[arg(long)]
    pub instance: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceLimit(_) | Error::Io(_) | Error::Cache(_) | Error::NotFoundWithinLimit { .. } => 3,
        _ => 2,
    }
}

fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))
}

pub fn load_instance(arg: &str) -> Result<ProblemInstance> {
    let p = Path::new(arg);
    if p.is_file() {
        ProblemInstance::from_json(&read_input(p)?)
    } else if builtin_instance_json(arg).is_some() {
        ProblemInstance::builtin(arg)
    } else {
        Err(Error::Validation(format!("no instance file or built-in named {arg:?}")))
    }
}

fn load_spec(arg: &str) -> Result<GaloisSpec> {
    if let Some(s) = GaloisSpec::builtin(arg) {
        return Ok(s);
    }
    let p = Path::new(arg);
    if p.is_file() {
        return GaloisSpec::from_json(&read_input(p)?)?.validated();
    }
    Err(Error::Validation(format!("no spec file or built-in field named {arg:?}")))
}

fn prime_table(limit: u64, cache: Option<&Path>) -> Result<PrimeTable> {
    match cache {
        Some(path) => PrimeTable::cached(limit, path),
        None => PrimeTable::new(limit),
    }
}

fn create_out(path: &Path, name: &str) -> Result<std::fs::File> {
    Ok(std::fs::File::create(path.join(name))?)
}

fn cmd_verify(
    inst_arg: &str,
    out_dir: &Path,
    pmax: Option<u64>,
    cache: Option<&Path>,
    no_timestamp: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let start = Instant::now();
    let mut inst = load_instance(inst_arg)?;
    if let Some(p) = pmax {
        inst.euler_pmax = p;
        inst.validate()?;
    }
    std::fs::create_dir_all(out_dir)?;
    let table = prime_table(inst.x.max(2), cache)?;
    let counts = representation_counts(&table, &inst)?;
    let rows = verify_with_counts(&counts, &inst, &inst.n_values, inst.euler_pmax)?;
    let summary = summarize(&rows);
    let params = inst.sieve_params();

    let mut csv = String::new();
    if !no_timestamp {
        csv.push_str(&format!("# generated_unix={}\n", unix_now()));
    }
    csv.push_str(VerifyRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    create_out(out_dir, "verify.csv")?.write_all(csv.as_bytes())?;

    let mut doc = json!({
        "schema": SCHEMA,
        "instance": {
            "fields": inst.fields.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
            "a": inst.a,
            "X": inst.x,
            "D": inst.modulus(),
            "N_count": inst.n_values.len(),
        },
        "defaults": {
            "A": params.a,
            "B": params.b,
            "z": params.z,
            "euler_pmax": inst.euler_pmax,
            "boundary_fraction": BOUNDARY_FRACTION,
            "exact_check_max_X": EXACT_CHECK_X,
        },
        "summary": summary,
        "exact_check_max_deviation": counts.exact_check,
    });
    if inst.k() == 2 {
        let h = h_sharp_coefficients(&table, &inst, params.z)?;
        let flat: Vec<f64> = counts.weighted.iter().zip(&h.weighted).map(|(a, b)| a - b).collect();
        doc["k2"] = json!({
            "histogram_edges": HISTOGRAM_EDGES,
            "histogram": deviation_histogram(&rows, &HISTOGRAM_EDGES),
            "flat_norms": flat_norms(&flat),
        });
    }
    if !no_timestamp {
        doc["generated_unix"] = json!(unix_now());
        doc["runtime_seconds"] = json!(start.elapsed().as_secs_f64());
    }
    let text = serde_json::to_string_pretty(&doc)?;
    create_out(out_dir, "summary.json")?.write_all(text.as_bytes())?;
    writeln!(out, "{}", serde_json::to_string(&doc["summary"])?)?;
    Ok(())
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn cmd_local_factors(inst_arg: &str, ns: &[i64], pmax: Option<u64>, out: &mut dyn Write) -> Result<()> {
    let inst = load_instance(inst_arg)?;
    let pmax = pmax.unwrap_or(inst.euler_pmax);
    let local = LocalFactors::new(&inst, pmax)?;
    let ns = if ns.is_empty() { &inst.n_values[..] } else { ns };
    let doc = json!({
        "schema": SCHEMA,
        "reports": local.reports(ns),
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_genfun(
    builtin: Option<&str>,
    spec: Option<&Path>,
    class: Option<&str>,
    x: u64,
    alphas: &[Alpha],
    a: f64,
    b: Option<f64>,
    out: &mut dyn Write,
) -> Result<()> {
    let (spec, label) = match (builtin, spec) {
        (Some(name), _) => {
            let fc = FieldClass::builtin(name)?;
            (fc.spec, fc.class_label)
        }
        (None, Some(path)) => {
            let s = GaloisSpec::from_json(&read_input(path)?)?.validated()?;
            (s, class.unwrap_or_default().to_string())
        }
        _ => return Err(Error::Validation("give --builtin or --spec with --class".into())),
    };
    let table = PrimeTable::new(x.max(2))?;
    let params = SieveParams::new(x, a, b.unwrap_or(4.0 * a));
    let ctx = GenfunContext::new(&table, &spec, &label, x, params)?;
    writeln!(out, "{}", MinorArcRow::CSV_HEADER)?;
    for row in ctx.minor_arc_scan(alphas)? {
        writeln!(out, "{}", row.csv())?;
    }
    Ok(())
}

fn parse_poly(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Validation(format!("bad polynomial coefficient {t:?}")))
        })
        .collect()
}

fn cmd_expsum(
    poly: Option<&str>,
    ideal: Option<i64>,
    alphas: &[Alpha],
    x: u64,
    log_weighted: bool,
    out: &mut dyn Write,
) -> Result<()> {
    match (poly, ideal) {
        (Some(p), _) => {
            let coeffs = parse_poly(p)?;
            writeln!(out, "{}", WeylRow::CSV_HEADER)?;
            for &alpha in alphas {
                writeln!(out, "{}", weyl_bound_ratio(&coeffs, alpha, x)?.csv())?;
            }
        }
        (None, Some(d)) => {
            let field = QuadraticField::new(d)?;
            writeln!(out, "alpha,d,X,sum_re,sum_im")?;
            for &alpha in alphas {
                let s = ideal_exp_sum(&field, &IdealCharacter::Trivial, alpha, x, log_weighted)?;
                writeln!(out, "{alpha},{d},{x},{:.12e},{:.12e}", s.re, s.im)?;
            }
        }
        _ => return Err(Error::Validation("give --poly or --ideal".into())),
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Verify {
            instance,
            out: dir,
            pmax,
            prime_cache,
        } => cmd_verify(&instance.instance, &dir, pmax, prime_cache.as_deref(), cli.no_timestamp, out),
        Command::LocalFactors { instance, n, pmax } => cmd_local_factors(&instance.instance, &n, pmax, out),
        Command::Genfun {
            builtin,
            spec,
            class,
            x,
            alpha,
            a,
            b,
        } => cmd_genfun(builtin.as_deref(), spec.as_deref(), class.as_deref(), x, &alpha, a, b, out),
        Command::Expsum {
            poly,
            ideal,
            alpha,
            x,
            log_weighted,
        } => cmd_expsum(poly.as_deref(), ideal, &alpha, x, log_weighted, out),
        Command::Smooth { z, y } => {
            writeln!(out, "{}", smooth_count(z, y))?;
            Ok(())
        }
        Command::Ratapprox { alpha, qmax } => {
            if qmax == 0 {
                return Err(Error::Validation("qmax must be positive".into()));
            }
            let r = best_approx(alpha, qmax)?;
            writeln!(out, "{}/{}", r.a, r.q)?;
            Ok(())
        }
        Command::EcConstruct { field, limit } => {
            let spec = load_spec(&field)?;
            let cert = construct_curve(&spec, limit)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&cert)?)?;
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return 3;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(cli, &mut buf));
    if let Err(e) = out.write_all(&buf) {
        let _ = writeln!(err, "error: {e}");
        return 3;
    }
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
