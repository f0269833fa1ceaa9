mod laws;
mod output;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use progeny_core::checks::{check_all, CheckOptions, Fault};
use progeny_core::law::{LawError, OffspringLaw};
use progeny_core::progeny::{
    check_is_progeny, offspring_of, progeny_of, progeny_of_newton, ProgenyError,
};
use progeny_core::rational::ExactRational;
use progeny_core::sibuya::{sibuya_gf, sibuya_sample, sibuya_survival, SibuyaError, SibuyaParams};
use progeny_core::sibuya_progeny::{
    certify, certify_interval, rational_grid, BParam, CertificateReport, CertifyError,
};
use progeny_core::sim::{
    compare, replica_rng, simulate, simulate_summary, GWConfig, Histogram, SimError, SimSummary,
    DEFAULT_TV_THRESHOLD,
};
use progeny_core::tilt::{prop2_residual, tilt_offspring, tilt_params, tilt_progeny, TiltError};

use laws::LawSpec;
use output::{opt_cell, Format, Report, Table};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation; exit status 1.
    Usage(String),
    /// The inputs are well formed but the mathematics refuses; exit status 2.
    Domain {
        kind: String,
        message: String,
    },
    Io(String),
}

/// The variant name of an error, from its `Debug` form.
fn kind_of(e: &impl std::fmt::Debug) -> String {
    let dbg = format!("{e:?}");
    // unwrap transparent wrappers such as Law(Series(NotInvertible))
    let mut kind = dbg.as_str();
    loop {
        let end = kind.find(['(', ' ', '{']).unwrap_or(kind.len());
        let head = &kind[..end];
        let inner = kind[end..].strip_prefix('(');
        match (head, inner) {
            ("Law" | "Series" | "Sibuya" | "Progeny" | "Tilt", Some(rest)) => kind = rest,
            _ => return head.to_string(),
        }
    }
}

macro_rules! domain_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain { kind: kind_of(&e), message: e.to_string() }
            }
        }
    )*};
}

domain_error!(
    LawError,
    ProgenyError,
    TiltError,
    SimError,
    CertifyError,
    SibuyaError
);

fn parse_rational(s: &str) -> Result<ExactRational, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Parser, Debug)]
#[command(
    name = "gwprogeny",
    version,
    about = "Exact Sibuya-progeny certification, progeny laws and Galton-Watson simulation"
)]
struct Cli {
    /// Output format; the default comes from GWPROGENY_FORMAT, else json.
    #[arg(
        long,
        global = true,
        env = "GWPROGENY_FORMAT",
        value_enum,
        default_value = "json"
    )]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sibuya masses and draws.
    #[command(subcommand)]
    Sibuya(SibuyaCmd),
    /// Offspring law <-> progeny law.
    #[command(subcommand)]
    Progeny(ProgenyCmd),
    /// First negative coefficient of b*h_b for one b.
    Certify(CertifyArgs),
    /// `certify` over an exact rational grid.
    CertifyGrid(GridArgs),
    /// Exponential tilting.
    #[command(subcommand)]
    Tilt(TiltCmd),
    /// Monte Carlo Galton-Watson runs.
    Simulate(SimulateArgs),
    /// Run every release criterion.
    CheckAll(CheckAllArgs),
}

#[derive(Args, Debug, Serialize)]
struct SibuyaParamArgs {
    #[arg(long, value_parser = parse_rational)]
    a: ExactRational,
    /// Generalized law s_{a,k}.
    #[arg(long, default_value_t = 0)]
    k: u32,
    /// Tilt of the law.
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    rho: ExactRational,
    /// Weight of the Sibuya part in a mixture with an atom at 0.
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    lambda: ExactRational,
}

impl SibuyaParamArgs {
    fn params(&self) -> Result<SibuyaParams, CliError> {
        Ok(SibuyaParams::new(
            self.a.clone(),
            self.k,
            self.rho.clone(),
            self.lambda.clone(),
        )?)
    }
}

#[derive(Subcommand, Debug)]
enum SibuyaCmd {
    /// Exact masses and survival function.
    Pmf {
        #[command(flatten)]
        params: SibuyaParamArgs,
        #[arg(long, default_value_t = 20)]
        n_max: u64,
    },
    /// Event-based draws; draw i uses stream i of the seed.
    Sample {
        #[command(flatten)]
        params: SibuyaParamArgs,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug, Serialize)]
enum ProgenyCmd {
    /// Progeny law of an offspring law (Lagrange, cross-checked by Newton).
    Forward {
        #[arg(long)]
        offspring: String,
        #[arg(long, default_value_t = 20)]
        order: usize,
    },
    /// Offspring series u/g(u) of a progeny law; negative entries are flagged.
    Invert {
        #[arg(long)]
        progeny: String,
        #[arg(long, default_value_t = 20)]
        order: usize,
    },
    /// Whether a law can be a progeny, up to the given order.
    Check {
        #[arg(long)]
        progeny: String,
        #[arg(long, default_value_t = 200)]
        order: usize,
    },
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[arg(long, value_parser = parse_rational)]
    b: ExactRational,
    #[arg(long, default_value_t = 500)]
    n_max: usize,
    /// Same as --format json.
    #[arg(long, conflicts_with = "csv")]
    #[serde(skip)]
    json: bool,
    /// Same as --format csv.
    #[arg(long)]
    #[serde(skip)]
    csv: bool,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    #[arg(long, value_parser = parse_rational)]
    from: ExactRational,
    #[arg(long, value_parser = parse_rational)]
    to: ExactRational,
    #[arg(long, value_parser = parse_rational)]
    step: ExactRational,
    #[arg(long, default_value_t = 500)]
    n_max: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Family {
    Geometric,
    SibuyaOffspring,
}

#[derive(Args, Debug, Serialize)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, value_parser = parse_rational)]
    alpha: Option<ExactRational>,
    #[arg(long, value_parser = parse_rational)]
    b: Option<ExactRational>,
}

impl FamilyArgs {
    fn law(&self, order: usize) -> Result<OffspringLaw, CliError> {
        let missing =
            |flag: &str, fam: &str| CliError::Usage(format!("--family {fam} requires --{flag}"));
        Ok(match self.family {
            Family::Geometric => OffspringLaw::geometric(
                self.alpha
                    .clone()
                    .ok_or_else(|| missing("alpha", "geometric"))?,
                order,
            )?,
            Family::SibuyaOffspring => OffspringLaw::sibuya_offspring(
                self.b
                    .clone()
                    .ok_or_else(|| missing("b", "sibuya-offspring"))?,
                order,
            )?,
        })
    }
}

#[derive(Subcommand, Debug)]
enum TiltCmd {
    /// f_p(rz)/f_p(r).
    Offspring {
        #[arg(long)]
        law: String,
        #[arg(long, value_parser = parse_rational)]
        r: ExactRational,
        #[arg(long, default_value_t = 20)]
        order: usize,
    },
    /// f_q(rho z)/f_q(rho).
    Progeny {
        #[arg(long)]
        law: String,
        #[arg(long, value_parser = parse_rational)]
        rho: ExactRational,
        #[arg(long, default_value_t = 20)]
        order: usize,
    },
    /// Residual of the tilted functional equation for a family.
    Check {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_parser = parse_rational)]
        r: ExactRational,
        #[arg(long, default_value_t = 40)]
        order: usize,
    },
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, value_enum, required_unless_present = "law")]
    family: Option<Family>,
    #[arg(long, value_parser = parse_rational)]
    alpha: Option<ExactRational>,
    #[arg(long, value_parser = parse_rational)]
    b: Option<ExactRational>,
    /// Offspring law argument, instead of --family.
    #[arg(long, conflicts_with = "family")]
    law: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_gen: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_total: u64,
    /// Histogram cells 0..=k_max plus a tail cell.
    #[arg(long, default_value_t = 20)]
    k_max: usize,
    /// Also write one CSV row per replica here.
    #[arg(long)]
    per_replica: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CheckAllArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<u32>>,
    /// Mutate one coefficient inside this criterion.
    #[arg(long)]
    fault: Option<u32>,
    #[arg(long, default_value_t = 1_000_000)]
    replicas: u64,
    #[arg(long, default_value_t = CheckOptions::default().seed)]
    seed: u64,
    /// Exit with status 2 when a criterion fails.
    #[arg(long)]
    strict: bool,
}

fn config(command: &str, format: Format, args: impl Serialize) -> serde_json::Value {
    json!({ "command": command, "format": format, "args": args })
}

fn series_table(s: &progeny_core::series::PowerSeries, from: usize) -> Table {
    let mut t = Table::new(&["n", "coefficient", "approx"]);
    for n in from..=s.order() {
        let c = s.coeff(n);
        t.push(vec![
            n.to_string(),
            c.to_string(),
            format!("{:e}", c.to_f64()),
        ]);
    }
    t
}

fn run_sibuya(cmd: SibuyaCmd, format: Format) -> Result<Report, CliError> {
    match cmd {
        SibuyaCmd::Pmf { params, n_max } => {
            let p = params.params()?;
            let gf = sibuya_gf(&p, n_max as usize)?;
            let mut t = Table::new(&["n", "pmf", "approx", "survival"]);
            for n in 0..=n_max {
                let m = gf.coeff(n as usize);
                t.push(vec![
                    n.to_string(),
                    m.to_string(),
                    format!("{:e}", m.to_f64()),
                    sibuya_survival(&p, n)?.to_string(),
                ]);
            }
            Ok(Report::new(
                config(
                    "sibuya pmf",
                    format,
                    json!({"params": params, "n_max": n_max}),
                ),
                t,
            ))
        }
        SibuyaCmd::Sample {
            params,
            count,
            seed,
        } => {
            let p = params.params()?;
            let mut t = Table::new(&["index", "value"]);
            for i in 0..count {
                let v = sibuya_sample(&p, &mut replica_rng(seed, i))?;
                t.push(vec![i.to_string(), v.to_string()]);
            }
            let cfg = json!({"params": params, "count": count, "seed": seed});
            Ok(Report::new(config("sibuya sample", format, cfg), t))
        }
    }
}

fn run_progeny(cmd: ProgenyCmd, format: Format) -> Result<Report, CliError> {
    let cfg = config("progeny", format, &cmd);
    match cmd {
        ProgenyCmd::Forward { offspring, order } => {
            let p = LawSpec(offspring).offspring(order)?;
            let q = progeny_of(&p, order)?;
            let newton = progeny_of_newton(&p, order)?;
            let report = Report::new(cfg, series_table(q.series(), 1))
                .with("offspring_mean", p.mean())
                .with("offspring_family", p.family())
                .with("progeny_family", q.family())
                .with("routes_agree", q.series() == newton.series())
                .with("tail_mass", q.tail_mass());
            Ok(report)
        }
        ProgenyCmd::Invert { progeny, order } => {
            let q = LawSpec(progeny).progeny(order + 1)?;
            let s = offspring_of(&q, order)?;
            let mut t = Table::new(&["n", "coefficient", "approx", "negative"]);
            for n in 0..=order {
                let c = s.coeff(n);
                t.push(vec![
                    n.to_string(),
                    c.to_string(),
                    format!("{:e}", c.to_f64()),
                    c.is_negative().to_string(),
                ]);
            }
            let first_negative = (0..=order).find(|&n| s.coeff_signum(n) < 0);
            Ok(Report::new(cfg, t)
                .with("first_negative", first_negative)
                .with("nonnegative", first_negative.is_none()))
        }
        ProgenyCmd::Check { progeny, order } => {
            let q = LawSpec(progeny).progeny(order + 1)?;
            let r = check_is_progeny(&q, order)?;
            let mut t = Table::new(&["n", "coefficient", "partial_sum"]);
            let mut partial = ExactRational::zero();
            for n in 0..=order {
                let c = r.offspring.coeff(n);
                partial += &c;
                t.push(vec![n.to_string(), c.to_string(), partial.to_string()]);
            }
            Ok(Report::new(cfg, t)
                .with("valid_to_order", r.is_valid())
                .with("first_negative", r.first_negative)
                .with("first_excess", r.first_excess)
                .with("first_violation", r.first_violation()))
        }
    }
}

fn certificate_row(r: &CertificateReport) -> Vec<String> {
    vec![
        r.b.to_string(),
        opt_cell(&r.first_negative),
        opt_cell(&r.value_at_first_negative),
        format!("{:.3}", r.elapsed.as_secs_f64() * 1e3),
        r.structural_certificate.to_string(),
    ]
}

const CERT_COLUMNS: &[&str] = &[
    "b",
    "first_negative",
    "value",
    "elapsed_ms",
    "structural_certificate",
];

fn run_certify(args: CertifyArgs, format: Format) -> Result<Report, CliError> {
    let b = BParam::new(args.b.clone())?;
    let r = certify(&b, args.n_max)?;
    let row = certificate_row(&r);
    let mut t = Table::new(CERT_COLUMNS);
    t.push(row.clone());
    Ok(Report::new(config("certify", format, &args), t)
        .with("b", &r.b)
        .with("n_max", r.n_max)
        .with("first_negative", r.first_negative)
        .with("value_at_first_negative", &r.value_at_first_negative)
        .with("louis_identity", r.louis_identity)
        .with("structural_certificate", r.structural_certificate)
        .with(
            "elapsed_ms",
            row[3].parse::<f64>().expect("formatted float"),
        ))
}

fn run_grid(args: GridArgs, format: Format) -> Result<Report, CliError> {
    let grid = rational_grid(&args.from, &args.to, &args.step)?;
    let reports = certify_interval(&grid, args.n_max)?;
    let mut t = Table::new(CERT_COLUMNS);
    for r in &reports {
        t.push(certificate_row(r));
    }
    let negatives = reports
        .iter()
        .filter(|r| r.first_negative.is_some())
        .count();
    Ok(Report::new(config("certify-grid", format, &args), t)
        .with("points", reports.len())
        .with("with_negative_coefficient", negatives))
}

fn run_tilt(cmd: TiltCmd, format: Format) -> Result<Report, CliError> {
    match cmd {
        TiltCmd::Offspring { law, r, order } => {
            let cfg = config(
                "tilt offspring",
                format,
                json!({"law": law, "r": r, "order": order}),
            );
            let p = LawSpec(law).offspring(order)?;
            let t = tilt_offspring(&p, &r)?;
            Ok(Report::new(cfg, series_table(t.law.series(), 0))
                .with("tilted_mean", &t.mean)
                .with("subcritical", !t.mean.exceeds_one())
                .with("truncated_normalizer", t.truncated_normalizer)
                .with("family", t.law.family()))
        }
        TiltCmd::Progeny { law, rho, order } => {
            let cfg = config(
                "tilt progeny",
                format,
                json!({"law": law, "rho": rho, "order": order}),
            );
            let q = LawSpec(law).progeny(order)?;
            let t = tilt_progeny(&q, &rho)?;
            Ok(Report::new(cfg, series_table(t.law.series(), 1))
                .with("truncated_normalizer", t.truncated_normalizer)
                .with("family", t.law.family()))
        }
        TiltCmd::Check { family, r, order } => {
            let cfg = config(
                "tilt check",
                format,
                json!({"family": family, "r": r, "order": order}),
            );
            let p = family.law(order)?;
            let q = progeny_of(&p, order)?;
            let params = tilt_params(&p, &q, &r)?;
            let residual = prop2_residual(&p, &q, &r, order)?;
            Ok(Report::new(cfg, series_table(&residual, 0))
                .with("rho", &params.rho)
                .with("rho_exact", params.rho_exact)
                .with("residual_zero", residual.is_zero())
                .with("first_nonzero", residual.valuation()))
        }
    }
}

fn histogram_table(h: &Histogram, exact: Option<&[ExactRational]>) -> Table {
    let n = h.total() as f64;
    let mut t = Table::new(&["k", "count", "empirical", "exact"]);
    for (k, &c) in h.counts.iter().enumerate() {
        let e = exact.map_or(String::new(), |e| format!("{:e}", e[k].to_f64()));
        t.push(vec![
            k.to_string(),
            c.to_string(),
            format!("{:e}", c as f64 / n),
            e,
        ]);
    }
    let tail_exact = exact.map_or(String::new(), |e| {
        let rest = ExactRational::one() - e.iter().sum::<ExactRational>();
        format!("{:e}", rest.to_f64())
    });
    t.push(vec![
        "tail".into(),
        h.tail.to_string(),
        format!("{:e}", h.tail as f64 / n),
        tail_exact,
    ]);
    t
}

fn run_simulate(args: SimulateArgs, format: Format) -> Result<Report, CliError> {
    let law = match (&args.law, args.family) {
        (Some(spec), _) => LawSpec(spec.clone()).offspring(OffspringLaw::DEFAULT_ORDER)?,
        (None, Some(family)) => FamilyArgs {
            family,
            alpha: args.alpha.clone(),
            b: args.b.clone(),
        }
        .law(OffspringLaw::DEFAULT_ORDER)?,
        (None, None) => return Err(CliError::Usage("give --family or --law".into())),
    };
    let cfg = GWConfig {
        master_seed: args.seed,
        max_generations: args.max_gen,
        max_total: args.max_total,
        replicas: args.replicas,
    };
    let summary = match &args.per_replica {
        Some(path) => {
            let results = simulate(&law, &cfg)?;
            let io = |e: std::io::Error| CliError::Io(e.to_string());
            let mut f = File::create(path).map_err(io)?;
            writeln!(f, "replica,total,censored,generations").map_err(io)?;
            for (i, r) in results.iter().enumerate() {
                writeln!(
                    f,
                    "{i},{},{},{}",
                    r.total,
                    r.censored,
                    r.trajectory.len() - 1
                )
                .map_err(io)?;
            }
            summarize(&results, &cfg, args.k_max)
        }
        None => simulate_summary(&law, &cfg, args.k_max)?,
    };
    // exact totals exist only when extinction is certain
    let exact = progeny_of(&law, args.k_max)
        .ok()
        .map(|q| q.series().coeffs());
    let tv = match &exact {
        Some(e) => compare(&summary.histogram, e, DEFAULT_TV_THRESHOLD).ok(),
        None => None,
    };
    let table = histogram_table(&summary.histogram, exact.as_deref());
    Ok(Report::new(
        config("simulate", format, json!({"args": args, "gw": cfg})),
        table,
    )
    .with("replicas", summary.replicas)
    .with("censored", summary.censored)
    .with("censored_fraction", summary.censored_fraction)
    .with("mean_total_uncensored", summary.mean_total)
    .with("mean_total_se", summary.mean_total_se)
    .with("offspring_mean", law.mean())
    .with("histogram", &summary.histogram)
    .with("tv_vs_exact", tv))
}

fn summarize(results: &[progeny_core::sim::GWResult], cfg: &GWConfig, k_max: usize) -> SimSummary {
    let mut hist = Histogram::new(k_max);
    let uncensored: Vec<f64> = results
        .iter()
        .filter_map(|r| {
            if r.censored {
                hist.record_tail();
                None
            } else {
                hist.record(r.total);
                Some(r.total as f64)
            }
        })
        .collect();
    let n = uncensored.len() as f64;
    let mean = uncensored.iter().sum::<f64>() / n;
    let var = uncensored.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let censored = results.len() as u64 - uncensored.len() as u64;
    SimSummary {
        replicas: cfg.replicas,
        censored,
        censored_fraction: censored as f64 / cfg.replicas as f64,
        histogram: hist,
        mean_total: mean,
        mean_total_se: (var / n).sqrt(),
    }
}

fn run_check_all(args: CheckAllArgs, format: Format) -> Result<(Report, bool), CliError> {
    let opts = CheckOptions {
        only: args.only.clone(),
        fault: args
            .fault
            .map(|criterion| Fault::MutateCoefficient { criterion }),
        replicas: args.replicas,
        seed: args.seed,
    };
    let report = check_all(&opts);
    let mut t = Table::new(&["criterion", "pass", "elapsed_ms", "name", "detail"]);
    for o in &report.outcomes {
        t.push(vec![
            o.label(),
            o.pass.to_string(),
            format!("{:.1}", o.elapsed_ms),
            o.name.clone(),
            o.detail.clone(),
        ]);
    }
    let fail = args.strict && !report.all_pass;
    let out = Report::new(config("check-all", format, &args), t)
        .with("all_pass", report.all_pass)
        .with("closed_form_discrepancy", &report.closed_form_discrepancy)
        .with("elapsed_ms", report.elapsed_ms);
    Ok((out, fail))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let mut format = cli.format;
    let mut failed = false;
    let report = match cli.command {
        Command::Sibuya(cmd) => run_sibuya(cmd, format)?,
        Command::Progeny(cmd) => run_progeny(cmd, format)?,
        Command::Certify(args) => {
            if args.json {
                format = Format::Json;
            } else if args.csv {
                format = Format::Csv;
            }
            run_certify(args, format)?
        }
        Command::CertifyGrid(args) => run_grid(args, format)?,
        Command::Tilt(cmd) => run_tilt(cmd, format)?,
        Command::Simulate(args) => run_simulate(args, format)?,
        Command::CheckAll(args) => {
            let (report, fail) = run_check_all(args, format)?;
            failed = fail;
            report
        }
    };
    report.emit(format, cli.output.as_deref())?;
    Ok(failed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Domain { kind, message }) => {
            eprintln!(
                "{}",
                json!({ "error": { "kind": kind, "message": message } })
            );
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("{}", json!({ "error": { "kind": "Io", "message": msg } }));
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_kinds_unwrap_wrappers() {
        let e = ProgenyError::Law(LawError::InsufficientOrder {
            requested: 3,
            available: 1,
        });
        assert_eq!(kind_of(&e), "InsufficientOrder");
        assert_eq!(kind_of(&ProgenyError::NotInvertible), "NotInvertible");
    }
}
