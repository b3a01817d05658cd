//! Command-line driver: encode price CSVs, run the efficiency test, rolling
//! windows, simulations, calibration curves, exact-distribution queries,
//! and plot-data emission.

use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use marketinfo::asymptotic::{critical_value, error_bound, gamma_params, BoundParams};
use marketinfo::efficiency::test_efficiency;
use marketinfo::error::Error;
use marketinfo::exact::{enumerate_pmf, mean_exact, moment_exact, ConditionalSetup};
use marketinfo::montecarlo::{calibration_curve, simulate, GeneratorKind, GeneratorSpec};
use marketinfo::rolling::{run_roll, RollingConfig};
use marketinfo::symbolic::{encode_returns, BinarySequence, PriceSeries};

#[derive(Parser)]
#[command(name = "marketinfo", version, about = "Entropy-based market information and a test of weak-form market efficiency")]
struct Cli {
    /// Write CSV output to a file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Size of the worker pool for parallel subcommands.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BitsInput {
    /// Price CSV file with header `date,price` (`-` for standard input).
    #[arg(long, conflicts_with = "bits")]
    csv: Option<String>,

    /// Literal bit string, e.g. `0110100`.
    #[arg(long)]
    bits: Option<String>,
}

impl BitsInput {
    fn load(&self) -> Result<BinarySequence, Error> {
        match (&self.csv, &self.bits) {
            (Some(path), None) => {
                let text = read_input(path)?;
                Ok(encode_returns(&PriceSeries::from_csv(&text)?))
            }
            (None, Some(bits)) => BinarySequence::from_str_bits(bits),
            _ => Err(Error::Domain("provide exactly one of --csv or --bits".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Encode a price CSV into increase indicators.
    Encode {
        /// Price CSV file (`-` for standard input).
        #[arg(long)]
        csv: String,
    },
    /// Test a single series or bit string for market efficiency.
    Test {
        #[command(flatten)]
        input: BitsInput,
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Use only the last WINDOW returns.
        #[arg(long)]
        window: Option<usize>,
        /// Emit a machine-readable CSV row instead of the human rendering.
        #[arg(long)]
        machine: bool,
    },
    /// Rolling-window tests over a price CSV.
    Roll {
        #[arg(long)]
        csv: String,
        #[arg(long, default_value_t = 100)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 1)]
        step: usize,
    },
    /// Simulate the information statistic under a bit-trajectory generator.
    Simulate {
        /// `fair`, `biased:P`, or `markov:PI0,PI1`.
        #[arg(long, default_value = "fair")]
        generator: String,
        /// Bits per trajectory.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Kolmogorov-Smirnov calibration of the gamma law over an n-grid.
    Calibrate {
        /// Comma-separated trajectory lengths.
        #[arg(long, default_value = "25,50,75,100,150,200,300,400,600,800,1000")]
        grid: String,
        #[arg(long, default_value_t = 1)]
        l: u32,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Plot-ready CSVs for the standard figures.
    Figures {
        #[arg(long, value_parser = ["bound", "distribution", "calibration", "critical"])]
        which: String,
        /// Required for the stochastic figures (distribution, calibration).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact finite-sample distribution queries.
    Exact {
        /// Comma-separated per-prefix counts; the length must be a power of two.
        #[arg(long)]
        counts: String,
        /// Moment order to compute via the nested sum (0 = skip).
        #[arg(long, default_value_t = 1)]
        moment: u32,
        /// Also enumerate and print the full pmf.
        #[arg(long)]
        pmf: bool,
    },
    /// Remainder-bound curves (CSV `n,q2,q3,q4,q5`).
    Bound {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
    },
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

/// Reals are printed at 10 significant digits.
fn fmt(x: f64) -> String {
    format!("{x:.9e}")
}

fn parse_generator(s: &str) -> Result<GeneratorKind, Error> {
    if s == "fair" {
        return Ok(GeneratorKind::FairCoin);
    }
    if let Some(p) = s.strip_prefix("biased:") {
        let p: f64 = p
            .parse()
            .map_err(|_| Error::Domain(format!("bad bias `{p}`")))?;
        return Ok(GeneratorKind::BiasedCoin { p });
    }
    if let Some(rest) = s.strip_prefix("markov:") {
        let (a, b) = rest
            .split_once(',')
            .ok_or_else(|| Error::Domain("markov needs `markov:PI0,PI1`".into()))?;
        let pi_0: f64 = a.parse().map_err(|_| Error::Domain(format!("bad pi_0 `{a}`")))?;
        let pi_1: f64 = b.parse().map_err(|_| Error::Domain(format!("bad pi_1 `{b}`")))?;
        return Ok(GeneratorKind::Markov { pi_0, pi_1 });
    }
    Err(Error::Domain(format!(
        "unknown generator `{s}` (use fair, biased:P, or markov:PI0,PI1)"
    )))
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::Domain(format!("bad integer `{tok}`")))
        })
        .collect()
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), Error> {
    match &cli.command {
        Command::Encode { csv } => {
            let series = PriceSeries::from_csv(&read_input(csv)?)?;
            let bits = encode_returns(&series);
            writeln!(out, "date,bit")?;
            for (date, bit) in series.dates().iter().skip(1).zip(bits.bits()) {
                writeln!(out, "{date},{bit}")?;
            }
        }
        Command::Test { input, l, window, machine } => {
            let mut bits = input.load()?;
            if let Some(w) = window {
                let all = bits.bits();
                if all.len() < *w {
                    return Err(Error::InputTooShort { needed: *w, got: all.len() });
                }
                bits = BinarySequence::new(all[all.len() - w..].to_vec())?;
            }
            let r = test_efficiency(&bits, *l)?;
            let crits: Vec<f64> = [0.05, 0.01, 0.001]
                .iter()
                .map(|&a| critical_value(a, &r.params))
                .collect::<Result<_, _>>()?;
            if *machine {
                writeln!(out, "l,n,info,p_value,crit95,crit99,crit999,reject95,reject99,reject999,small_sample")?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.params.l,
                    r.estimate.n,
                    fmt(r.estimate.info),
                    fmt(r.p_value),
                    fmt(crits[0]),
                    fmt(crits[1]),
                    fmt(crits[2]),
                    r.reject_95 as u8,
                    r.reject_99 as u8,
                    r.reject_999 as u8,
                    r.small_sample_warning as u8
                )?;
            } else {
                writeln!(out, "L = {}, N = {} (L+1)-grams", r.params.l, r.estimate.n)?;
                writeln!(out, "information  = {} bits", fmt(r.estimate.info))?;
                writeln!(
                    out,
                    "null law     = Gamma(shape {}, scale {})",
                    r.params.shape,
                    fmt(r.params.scale)
                )?;
                writeln!(out, "p-value      = {}", fmt(r.p_value))?;
                writeln!(
                    out,
                    "critical     = {} (95%), {} (99%), {} (99.9%)",
                    fmt(crits[0]),
                    fmt(crits[1]),
                    fmt(crits[2])
                )?;
                writeln!(
                    out,
                    "reject       = {} (95%), {} (99%), {} (99.9%)",
                    r.reject_95, r.reject_99, r.reject_999
                )?;
                if r.small_sample_warning {
                    eprintln!("warning: N = {} < 100, the gamma approximation is rough", r.estimate.n);
                }
            }
        }
        Command::Roll { csv, window, l, step } => {
            let series = PriceSeries::from_csv(&read_input(csv)?)?;
            let config = RollingConfig {
                window: *window,
                l: *l,
                step: *step,
                ..RollingConfig::default()
            };
            let (rows, summary) = run_roll(&series, &config)?;
            writeln!(out, "date,info,p_value,crit95,crit99,crit999,reject95,reject99,reject999")?;
            for row in &rows {
                match (&row.info, &row.p_value) {
                    (Some(info), Some(p)) => writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        row.date,
                        fmt(*info),
                        fmt(*p),
                        fmt(row.critical_values[0]),
                        fmt(row.critical_values[1]),
                        fmt(row.critical_values[2]),
                        row.rejects[0] as u8,
                        row.rejects[1] as u8,
                        row.rejects[2] as u8
                    )?,
                    _ => {
                        writeln!(out, "{},,,,,,0,0,0", row.date)?;
                        eprintln!(
                            "{}: skipped ({})",
                            row.date,
                            row.reason.as_deref().unwrap_or("unknown")
                        );
                    }
                }
            }
            for &(level, frac) in &summary.rejection_fractions {
                eprintln!("rejected at {:.1}%: {:.1}% of dates", level * 100.0, frac * 100.0);
            }
            if summary.rows_skipped > 0 {
                eprintln!("skipped {} of {} windows", summary.rows_skipped, summary.rows_total);
            }
        }
        Command::Simulate { generator, n, l, trials, seed } => {
            let kind = parse_generator(generator)?;
            let spec = GeneratorSpec::new(kind, *n)?;
            let report = simulate(&spec, *l, *trials, *seed)?;
            writeln!(out, "trial,info,p_value")?;
            for (i, (info, p)) in report.samples.iter().zip(&report.p_values).enumerate() {
                writeln!(out, "{i},{},{}", fmt(*info), fmt(*p))?;
            }
            eprintln!(
                "KS = {} (p = {}), unobserved-prefix trials = {}",
                fmt(report.ks_statistic),
                fmt(report.ks_pvalue),
                report.unobserved_prefix_trials
            );
            for &(level, rate) in &report.rejection_rates {
                eprintln!("rejection rate at {:.1}%: {:.4}", level * 100.0, rate);
            }
        }
        Command::Calibrate { grid, l, trials, seed } => {
            let grid = parse_usize_list(grid)?;
            let rows = calibration_curve(*l, &grid, *trials, *seed)?;
            writeln!(out, "n,ks_stat,ks_pvalue")?;
            for (n, ks, ksp, unobserved) in rows {
                writeln!(out, "{n},{},{}", fmt(ks), fmt(ksp))?;
                if unobserved > 0 {
                    eprintln!("n = {n}: {unobserved} unobserved-prefix trials excluded");
                }
            }
        }
        Command::Figures { which, seed } => run_figures(which, *seed, out)?,
        Command::Exact { counts, moment, pmf } => {
            let counts = parse_usize_list(counts)?;
            let size = counts.len();
            if !size.is_power_of_two() || size < 2 {
                return Err(Error::Domain(format!(
                    "counts length {size} is not a power of two >= 2"
                )));
            }
            let l = size.trailing_zeros();
            let setup = ConditionalSetup::from_counts(l, counts)?;
            if *pmf {
                let dist = enumerate_pmf(&setup)?;
                writeln!(out, "value,probability")?;
                for (v, p) in dist.atoms {
                    writeln!(out, "{},{}", fmt(v), fmt(p))?;
                }
            } else {
                // compute everything before emitting, so a budget refusal
                // does not leave a partial CSV behind
                let mean = mean_exact(&setup);
                let higher = if *moment > 0 {
                    Some(moment_exact(*moment, &setup)?)
                } else {
                    None
                };
                writeln!(out, "statistic,value")?;
                writeln!(out, "mean_exact,{}", fmt(mean))?;
                if let Some(m) = higher {
                    writeln!(out, "moment_{moment},{}", fmt(m))?;
                }
            }
        }
        Command::Bound { t, p, epsilon } => {
            write_bound_csv(*t, *p, *epsilon, out)?;
        }
    }
    Ok(())
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            let frac = i as f64 / (points - 1) as f64;
            (lo.ln() + frac * (hi.ln() - lo.ln())).exp()
        })
        .collect()
}

fn write_bound_csv(t: f64, p: f64, epsilon: f64, out: &mut dyn Write) -> Result<(), Error> {
    writeln!(out, "n,q2,q3,q4,q5")?;
    for n_j in log_grid(1e2, 1e6, 81) {
        let vals: Vec<String> = (2..=5u64)
            .map(|q| error_bound(&BoundParams { t, p_j: p, q, epsilon, n_j }).map(fmt))
            .collect::<Result<_, _>>()?;
        writeln!(out, "{},{}", fmt(n_j), vals.join(","))?;
    }
    Ok(())
}

fn run_figures(which: &str, seed: Option<u64>, out: &mut dyn Write) -> Result<(), Error> {
    let need_seed = || seed.ok_or_else(|| Error::Domain(format!("figure `{which}` needs --seed")));
    match which {
        "bound" => write_bound_csv(1.0, 0.5, 1.0, out)?,
        "distribution" => {
            let seed = need_seed()?;
            writeln!(out, "l,n,value,ecdf,gamma_cdf")?;
            for (l, n) in [(1u32, 100usize), (2, 4000)] {
                let spec = GeneratorSpec::new(GeneratorKind::FairCoin, n)?;
                let report = simulate(&spec, l, 1000, seed)?;
                let mut sorted = report.samples.clone();
                sorted.sort_by(|a, b| a.total_cmp(b));
                let m = sorted.len() as f64;
                for (i, &v) in sorted.iter().enumerate() {
                    let gcdf = 1.0 - marketinfo::asymptotic::survival(v, &report.params)?;
                    writeln!(
                        out,
                        "{l},{n},{},{},{}",
                        fmt(v),
                        fmt((i as f64 + 1.0) / m),
                        fmt(gcdf)
                    )?;
                }
            }
        }
        "calibration" => {
            let seed = need_seed()?;
            let grid = [25usize, 50, 75, 100, 150, 200, 300, 400, 600, 800, 1000];
            let trials = 1000usize;
            let rows = calibration_curve(1, &grid, trials, seed)?;
            let m = trials as f64;
            writeln!(out, "n,ks_stat,ks_pvalue,crit5,crit1,crit01")?;
            // asymptotic Kolmogorov quantiles at 5%, 1%, 0.1%
            let (c5, c1, c01) = (1.358 / m.sqrt(), 1.628 / m.sqrt(), 1.949 / m.sqrt());
            for (n, ks, ksp, _) in rows {
                writeln!(out, "{n},{},{},{},{},{}", fmt(ks), fmt(ksp), fmt(c5), fmt(c1), fmt(c01))?;
            }
        }
        "critical" => {
            writeln!(out, "l,n,crit95,crit99,crit999")?;
            for l in [1u32, 2] {
                for n in (50..=1000).step_by(10) {
                    let params = gamma_params(l, n)?;
                    let vals: Vec<String> = [0.05, 0.01, 0.001]
                        .iter()
                        .map(|&a| critical_value(a, &params).map(fmt))
                        .collect::<Result<_, _>>()?;
                    writeln!(out, "{l},{n},{}", vals.join(","))?;
                }
            }
        }
        _ => unreachable!("clap restricts the figure names"),
    }
    Ok(())
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Domain(_) => 1,
        Error::InputTooShort { .. }
        | Error::CsvParse { .. }
        | Error::UnobservedPrefix { .. }
        | Error::Io(_) => 2,
        Error::BudgetExceeded { .. } | Error::Range(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("error: failed to build worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.out {
        Some(path) => {
            let file = match fs::File::create(path) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: cannot create {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            let mut writer = std::io::BufWriter::new(file);
            run(&cli, &mut writer).and_then(|_| writer.flush().map_err(Error::from))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            run(&cli, &mut lock)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
