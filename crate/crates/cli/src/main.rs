//! `avoider`: exact distributions, generating functions, rate functions and
//! Monte-Carlo checks for statistics of pattern-avoiding permutations.
//!
//! Exit codes: 0 success, 1 verification failure or internal error,
//! 2 usage error, 3 argument out of range, 4 resource cap exceeded.

mod manifest;

use std::io::Write;
use std::process::ExitCode;

use avoider_core::acceptance::{all_passed, run_all, Level};
use avoider_core::catalan::{catalan, ln_catalan};
use avoider_core::distribution::{counts, Caps, Mode, Side, Table, DEFAULT_EXACT_CAP};
use avoider_core::enumeration::brute_distribution;
use avoider_core::permutation::{PatternId, StatisticId};
use avoider_core::rate::{ldp_slope_exact, lft_numeric, rate_closed_form, relative_entropy_form};
use avoider_core::sampler::{estimate_tail, moments_from_histogram, statistic_histogram, SamplerConfig};
use avoider_core::series::{expand_g, quadratic_roots, Family, UPoly};
use avoider_core::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use manifest::RunManifest;

const EXACT_CATALAN_CAP: usize = 8192;
const GF_FLOAT_CAP: usize = 4096;

#[derive(Parser)]
#[command(name = "avoider", version, about = "Statistics of pattern-avoiding permutations")]
struct Cli {
    /// Leave `wall_time_seconds` null so reruns are byte-identical.
    #[arg(long, global = true)]
    no_wall_time: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Exact or log-float distribution of a statistic.
    Dist {
        #[arg(long, default_value = "231")]
        pattern: PatternId,
        #[arg(long)]
        stat: StatisticId,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "exact")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Coefficients of the bivariate generating function.
    Gf {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Coefficients as exact polynomials in u (default).
        #[arg(long, conflicts_with = "lambda")]
        u_exact: bool,
        /// Evaluate at u = e^lambda instead.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Closed-form rate function and its Legendre-Fenchel cross-checks.
    Rate {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        x: f64,
    },
    /// Finite-n tail slope against the rate function.
    Ldp {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "ge")]
        side: Side,
        /// Defaults to exact up to n = 256 and log-float above.
        #[arg(long)]
        mode: Option<Mode>,
    },
    /// Monte-Carlo moments or tail estimate from the uniform sampler.
    Sample {
        #[arg(long, default_value = "231")]
        pattern: PatternId,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        stat: StatisticId,
        #[arg(long)]
        tail: Option<f64>,
        #[arg(long, default_value = "ge")]
        side: Side,
    },
    /// The n-th Catalan number.
    Catalan {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "log")]
        exact: bool,
        /// Print ln C_n instead.
        #[arg(long)]
        log: bool,
        #[arg(long)]
        json: bool,
    },
    /// Run the acceptance suite.
    Verify {
        level: Level,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Core(Error),
    Verify(Vec<u8>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => 4,
        Error::Internal(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Verify(ids)) => {
            eprintln!("error: acceptance criteria failed: {ids:?}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let timed = !cli.no_wall_time;
    match cli.command {
        Command::Dist { pattern, stat, n, mode, format } => Ok(dist(pattern, stat, n, mode, format, timed)?),
        Command::Gf { family, n, lambda, format, .. } => Ok(gf(family, n, lambda, format, timed)?),
        Command::Rate { family, x } => Ok(rate(family, x, timed)?),
        Command::Ldp { family, x, n, side, mode } => Ok(ldp(family, x, n, side, mode, timed)?),
        Command::Sample { pattern, n, reps, seed, stat, tail, side } => {
            Ok(sample(SamplerConfig::new(pattern, n, seed, reps), stat, tail, side, timed)?)
        }
        Command::Catalan { n, log, json, .. } => Ok(catalan_cmd(n, log, json, timed)?),
        Command::Verify { level, json } => verify(level, json, timed),
    }
}

fn dist(pattern: PatternId, stat: StatisticId, n: usize, mode: Mode, format: Format, timed: bool) -> Result<String, Error> {
    let manifest = RunManifest::new("dist", timed)
        .param("pattern", pattern.to_string())
        .param("stat", stat.name())
        .param("n", n)
        .param("mode", mode.to_string());
    let by_recurrence = match stat {
        StatisticId::AltPm => pattern == PatternId::P231,
        StatisticId::Lis => matches!(pattern, PatternId::P231 | PatternId::P312),
        _ => false,
    };
    let table = if by_recurrence {
        match counts(stat, n, mode, Caps::default())? {
            Table::Exact(mut t) => {
                t.pattern = pattern;
                Table::Exact(t)
            }
            t => t,
        }
    } else {
        let t = brute_distribution(n, pattern, stat)?;
        match mode {
            Mode::Exact => Table::Exact(t),
            Mode::LogFloat => Table::LogFloat(t.to_logfloat()),
        }
    };
    Ok(match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut v = table.to_json();
            v["pattern"] = json!(pattern.to_string());
            manifest.wrap(v)
        }
    })
}

fn gf(family: Family, n: usize, lambda: Option<f64>, format: Format, timed: bool) -> Result<String, Error> {
    let mut manifest = RunManifest::new("gf", timed).param("family", family_name(family)).param("n", n);
    let (cells, result_extra): (Vec<Value>, Value) = match lambda {
        None => {
            if n > DEFAULT_EXACT_CAP {
                return Err(Error::ResourceLimit {
                    what: "exact generating-function expansion",
                    n,
                    cap: DEFAULT_EXACT_CAP,
                    hint: "; use --lambda for a float expansion",
                });
            }
            manifest = manifest.param("ring", "exact");
            let g = expand_g(family, n, &UPoly::u())?;
            let cells = (0..=n).map(|k| json!(g.coeff(k).to_string())).collect();
            (cells, json!({ "ring": "exact" }))
        }
        Some(l) => {
            if !l.is_finite() {
                return Err(Error::InvalidArgument("lambda must be finite".into()));
            }
            if n > GF_FLOAT_CAP {
                return Err(Error::ResourceLimit {
                    what: "float generating-function expansion",
                    n,
                    cap: GF_FLOAT_CAP,
                    hint: "",
                });
            }
            manifest = manifest.param("ring", "float").param("lambda", l);
            let g = expand_g(family, n, &l.exp())?;
            let cells = (0..=n).map(|k| json!(g.coeff(k))).collect();
            let roots = quadratic_roots(family, l)?;
            (cells, json!({ "ring": "float", "lambda": l, "roots": roots }))
        }
    };
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("n,coeff\n");
            for (k, c) in cells.iter().enumerate() {
                match c {
                    Value::String(s) => out.push_str(&format!("{k},{s}\n")),
                    v => out.push_str(&format!("{k},{v}\n")),
                }
            }
            out
        }
        Format::Json => {
            let mut result = result_extra;
            result["family"] = json!(family_name(family));
            result["n"] = json!(n);
            result["coefficients"] = Value::Array(cells);
            manifest.wrap(result)
        }
    })
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::Alt => "alt",
        Family::Inc => "inc",
    }
}

fn rate(family: Family, x: f64, timed: bool) -> Result<String, Error> {
    let manifest = RunManifest::new("rate", timed).param("family", family_name(family)).param("x", x);
    let closed = rate_closed_form(family, x)?;
    let mut result = Map::new();
    result.insert("family".into(), json!(family_name(family)));
    result.insert("x".into(), json!(x));
    result.insert("closed_form".into(), json!(closed));
    result.insert("relative_entropy".into(), json!(relative_entropy_form(family, x)?));
    if x > 0.0 && x < 1.0 {
        match lft_numeric(family, x) {
            Ok(r) => {
                result.insert("legendre_fenchel".into(), json!(r));
            }
            Err(Error::Saturated { lambda, boundary_value }) => {
                result.insert(
                    "saturated".into(),
                    json!({ "lambda": lambda, "boundary_value": boundary_value }),
                );
            }
            Err(e) => return Err(e),
        }
    }
    Ok(manifest.wrap(Value::Object(result)))
}

fn ldp(family: Family, x: f64, n: usize, side: Side, mode: Option<Mode>, timed: bool) -> Result<String, Error> {
    let mode = mode.unwrap_or(if n <= DEFAULT_EXACT_CAP { Mode::Exact } else { Mode::LogFloat });
    let manifest = RunManifest::new("ldp", timed)
        .param("family", family_name(family))
        .param("x", x)
        .param("n", n)
        .param("side", side.to_string())
        .param("mode", mode.to_string());
    let stat = match family {
        Family::Alt => StatisticId::AltPm,
        Family::Inc => StatisticId::Lis,
    };
    let table = counts(stat, n, mode, Caps::default())?;
    let report = ldp_slope_exact(&table, x, side)?;
    Ok(manifest.wrap(serde_json::to_value(report).expect("serializable")))
}

fn sample(cfg: SamplerConfig, stat: StatisticId, tail: Option<f64>, side: Side, timed: bool) -> Result<String, Error> {
    let mut manifest = RunManifest::new("sample", timed)
        .param("pattern", cfg.pattern.to_string())
        .param("n", cfg.n)
        .param("reps", cfg.reps)
        .param("stat", stat.name())
        .seed(cfg.seed);
    let result = match tail {
        Some(x) => {
            manifest = manifest.param("tail", x).param("side", side.to_string());
            serde_json::to_value(estimate_tail(&cfg, stat, x, side)?).expect("serializable")
        }
        None => {
            let hist = statistic_histogram(&cfg, stat)?;
            let moments = moments_from_histogram(stat, &hist);
            let hist: Map<String, Value> = hist
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(k, &c)| (k.to_string(), json!(c)))
                .collect();
            json!({ "moments": moments, "histogram": hist })
        }
    };
    Ok(manifest.wrap(result))
}

fn catalan_cmd(n: usize, log: bool, as_json: bool, timed: bool) -> Result<String, Error> {
    let manifest = RunManifest::new("catalan", timed).param("n", n).param("log", log);
    let (text, value) = if log {
        let l = ln_catalan(n);
        (format!("{l}"), json!({ "n": n, "ln_value": l }))
    } else {
        if n > EXACT_CATALAN_CAP {
            return Err(Error::ResourceLimit {
                what: "exact Catalan number",
                n,
                cap: EXACT_CATALAN_CAP,
                hint: "; use --log",
            });
        }
        let c = catalan(n).to_string();
        (c.clone(), json!({ "n": n, "value": c }))
    };
    Ok(if as_json { manifest.wrap(value) } else { text + "\n" })
}

fn verify(level: Level, as_json: bool, timed: bool) -> Result<String, Failure> {
    let manifest = RunManifest::new("verify", timed).param("level", level.to_string());
    let results = run_all(level);
    let out = if as_json {
        manifest.wrap(json!({ "level": level, "passed": all_passed(&results), "criteria": results }))
    } else {
        let mut s: String = results.iter().map(|r| format!("{r}\n")).collect();
        let passed = results.iter().filter(|r| r.passed).count();
        s.push_str(&format!("{passed}/{} criteria passed ({level})\n", results.len()));
        s
    };
    if all_passed(&results) {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Verify(results.iter().filter(|r| !r.passed).map(|r| r.id).collect()))
    }
}
