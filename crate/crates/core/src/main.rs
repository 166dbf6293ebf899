use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use trigpred::families::{measure_from_json, FamilySpec, FAMILIES};
use trigpred::finite_obs::{augment_projection, finite_cross_error, objective, solve_lp, solve_p2};
use trigpred::harness::{dinf_singleton_check, parse_n_list, round_sig, stability_sweep, Problem};
use trigpred::hardy::{outer_coefficients, series_exp, series_log, PowerSeries};
use trigpred::interpolation::{interp_cross_error, interp_distance, l1_classification};
use trigpred::msteps::{mstep_cross_error, mstep_distance, mstep_projection, szego_distance};
use trigpred::periodic::{periodic_cross_error, periodic_distance, periodic_distance2_double_sum};
use trigpred::{Error, Result, SpectralMeasure};

#[derive(Parser)]
#[command(name = "trigpred", version, about = "Prediction and interpolation errors under perturbed spectral measures")]
struct Cli {
    /// Grid size N (power of two).
    #[arg(long, global = true, default_value_t = 16384)]
    grid_size: usize,
    /// Number of outer-function coefficients reported.
    #[arg(long, global = true, default_value_t = 256)]
    series_order: usize,
    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolation of one missing value.
    Interp {
        #[command(flatten)]
        m: MeasureArg,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        cross: CrossArg,
    },
    /// One-step prediction error and outer-function coefficients.
    Szego {
        #[command(flatten)]
        m: MeasureArg,
    },
    /// m-step prediction.
    Msteps {
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        cross: CrossArg,
    },
    /// Finitely many observed lags.
    Finite {
        #[command(flatten)]
        m: MeasureArg,
        /// Comma separated nonzero frequencies.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        freqs: Vec<i64>,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        cross: CrossArg,
        /// Add one more frequency by a rank-one update (p = 2).
        #[arg(long, allow_hyphen_values = true)]
        augment: Option<i64>,
    },
    /// Observations on a coset x + qZ.
    Periodic {
        #[command(flatten)]
        m: MeasureArg,
        #[arg(long)]
        q: usize,
        #[arg(long, allow_hyphen_values = true)]
        x: i64,
        #[arg(long)]
        p: f64,
        #[command(flatten)]
        cross: CrossArg,
    },
    /// Stability of the errors along a family of measures.
    Stability {
        #[command(subcommand)]
        command: StabilityCommand,
    },
    /// Sup-norm singleton example: (d_inf(mu_0), d_inf(mu_n)).
    Dinf,
    /// Randomized exp/log power-series round trip.
    Roundtrip {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        len: usize,
    },
    /// List the registered families.
    Families,
}

#[derive(Subcommand)]
enum StabilityCommand {
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    family: String,
    /// `start:end:step` or a comma separated list.
    #[arg(long)]
    n: String,
    /// interp | msteps | finite | periodic
    #[arg(long)]
    problem: String,
    #[arg(long)]
    p: f64,
    /// Family parameters as key=value, repeatable.
    #[arg(long = "param", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    freqs: Vec<i64>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<i64>,
    /// Measure document for the custom-json family.
    #[arg(long)]
    document: Option<String>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArg {
    /// Measure description: inline JSON or a path to a JSON file.
    #[arg(long)]
    measure: String,
}

#[derive(Args)]
struct CrossArg {
    /// True measure under which the projection of --measure is evaluated.
    #[arg(long)]
    cross: Option<String>,
}

fn parse_kv(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    let v = v.parse::<f64>().map_err(|e| e.to_string())?;
    Ok((k.to_string(), v))
}

fn load_json(arg: &str) -> Result<Value> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::Input(format!("{arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid JSON: {e}")))
}

fn load_measure(arg: &str, grid: usize) -> Result<SpectralMeasure> {
    measure_from_json(&load_json(arg)?, grid)
}

fn num(v: f64) -> Value {
    if v.is_nan() {
        Value::Null
    } else if v.is_infinite() {
        Value::from(if v > 0.0 { "inf" } else { "-inf" })
    } else {
        json!(round_sig(v, 12))
    }
}

fn complex_list(c: &[Complex64]) -> Value {
    Value::Array(c.iter().map(|z| json!([num(z.re), num(z.im)])).collect())
}

fn check_series_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Input("series order must be positive".into()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Value> {
    let n = cli.grid_size;
    match &cli.command {
        Command::Interp { m, p, cross } => {
            let mu = load_measure(&m.measure, n)?;
            let mut out = json!({"problem": "interp", "p": num(*p), "distance": num(interp_distance(&mu, *p)?)});
            if *p == 1.0 {
                out["l1_classification"] = serde_json::to_value(l1_classification(&mu)).expect("enum");
            }
            if let Some(c) = &cross.cross {
                out["cross_error"] = num(interp_cross_error(&mu, &load_measure(c, n)?, *p)?);
            }
            Ok(out)
        }
        Command::Szego { m } => {
            check_series_order(cli.series_order)?;
            let mu = load_measure(&m.measure, n)?;
            let d = szego_distance(&mu)?;
            let mut out = json!({"problem": "szego", "distance": num(d)});
            if d > 0.0 {
                let b = outer_coefficients(&mu, cli.series_order)?;
                out["outer_coefficients"] = complex_list(&b.coeffs);
            }
            Ok(out)
        }
        Command::Msteps { measure, m, p, cross } => {
            let mu = load_measure(&measure.measure, n)?;
            let proj = mstep_projection(&mu, *m, *p)?;
            let mut out = json!({
                "problem": "msteps",
                "m": m,
                "p": num(*p),
                "distance": num(mstep_distance(&mu, *m)?),
                "degenerate": proj.degenerate,
            });
            if let Some(r) = &proj.roots {
                out["truncation_root_free"] = json!(r.root_free());
                out["truncation_boundary_gap"] = num(r.boundary_gap);
            }
            if let Some(c) = &cross.cross {
                out["cross_error"] = num(mstep_cross_error(&mu, &load_measure(c, n)?, *m, *p)?);
            }
            Ok(out)
        }
        Command::Finite { m, freqs, p, cross, augment } => {
            let mu = load_measure(&m.measure, n)?;
            let mut out = json!({"problem": "finite", "freqs": freqs, "p": num(*p)});
            if *p == 2.0 {
                let s = solve_p2(&mu, freqs)?;
                out["coeffs"] = complex_list(&s.coeffs);
                out["distance"] = num(s.distance);
                out["rank"] = json!(s.rank);
            } else {
                let s = solve_lp(&mu, freqs, *p)?;
                out["coeffs"] = complex_list(&s.coeffs);
                out["distance"] = num(s.distance);
                out["iterations"] = json!(s.iterations);
                out["converged"] = json!(s.converged);
            }
            if let Some(c) = &cross.cross {
                out["cross_error"] = num(finite_cross_error(&mu, &load_measure(c, n)?, freqs, *p)?);
            }
            if let Some(x) = augment {
                let a = augment_projection(&mu, freqs, *x, &[0])?;
                let dist = objective(&mu, &a.freqs, &a.projections[0], 2.0);
                out["augmented"] = json!({
                    "freqs": a.freqs,
                    "coeffs": complex_list(&a.projections[0]),
                    "distance": num(dist),
                });
            }
            Ok(out)
        }
        Command::Periodic { m, q, x, p, cross } => {
            let mu = load_measure(&m.measure, n)?;
            let mut out = json!({
                "problem": "periodic",
                "q": q,
                "x": x,
                "p": num(*p),
                "distance": num(periodic_distance(&mu, *q, *x, *p)?),
            });
            if *p == 2.0 {
                out["distance_double_sum"] = num(periodic_distance2_double_sum(&mu, *q, *x)?);
            }
            if let Some(c) = &cross.cross {
                out["cross_error"] = num(periodic_cross_error(&mu, &load_measure(c, n)?, *q, *x, *p)?);
            }
            Ok(out)
        }
        Command::Stability { command: StabilityCommand::Sweep(a) } => {
            let problem = match a.problem.as_str() {
                "interp" => Problem::Interp,
                "msteps" => Problem::Msteps { m: a.m.ok_or_else(|| Error::Input("msteps needs --m".into()))? },
                "finite" => {
                    if a.freqs.is_empty() {
                        return Err(Error::Input("finite needs --freqs".into()));
                    }
                    Problem::Finite { freqs: a.freqs.clone() }
                }
                "periodic" => Problem::Periodic {
                    q: a.q.ok_or_else(|| Error::Input("periodic needs --q".into()))?,
                    x: a.x.ok_or_else(|| Error::Input("periodic needs --x".into()))?,
                },
                other => return Err(Error::Input(format!("unknown problem '{other}'"))),
            };
            let spec = FamilySpec {
                name: a.family.clone(),
                params: a.params.iter().cloned().collect::<BTreeMap<_, _>>(),
                n: 1,
                document: a.document.as_deref().map(load_json).transpose()?,
            };
            let report = stability_sweep(&spec, &parse_n_list(&a.n)?, &problem, a.p, n)?;
            if let Some(path) = &a.csv {
                std::fs::write(path, report.to_csv()).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            }
            Ok(serde_json::to_value(&report).expect("report serializes"))
        }
        Command::Dinf => Ok(serde_json::to_value(dinf_singleton_check()).expect("serializes")),
        Command::Roundtrip { count, len } => {
            if *len == 0 {
                return Err(Error::Input("series length must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut worst: f64 = 0.0;
            for _ in 0..*count {
                let mut a: Vec<Complex64> = (0..*len)
                    .map(|j| {
                        let s = 1.0 / (1.0 + j as f64).powi(2);
                        Complex64::new(rng.gen_range(-s..s), rng.gen_range(-s..s))
                    })
                    .collect();
                a[0].im = 0.0;
                let back = series_log(&series_exp(&PowerSeries::new(a.clone())))?;
                let err = a.iter().zip(&back.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                worst = worst.max(err);
            }
            Ok(json!({"seed": cli.seed, "count": count, "max_error": num(worst)}))
        }
        Command::Families => Ok(json!(FAMILIES)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            let text = serde_json::to_string_pretty(&v).expect("value serializes");
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text + "\n") {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => {
                    // Ignore a closed pipe.
                    let _ = writeln!(std::io::stdout().lock(), "{text}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
