//! Command-line front end: argument parsing, settings resolution and the
//! four commands.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dfrelay_core::analytic::{
    rate_adhoc, rate_block, rate_hop, rate_optimal_dp, rate_optimal_indep, rate_sliding,
    sum_rate_multiuser, RateValue,
};
use dfrelay_core::expsum::{
    survival_adhoc, survival_block, survival_dp, survival_hop, survival_optimal_indep,
    survival_sliding, ExpPoly,
};
use dfrelay_core::model::{db_to_linear, NetworkConfig};
use dfrelay_core::Strategy;

use crate::config::{self, ConfigMap};
use crate::error::{AppError, AppResult};
use crate::montecarlo::{
    effectiveness_row, estimate_rates, estimate_sum_rate_multiuser, RateEstimate,
};
use crate::output::{write_atomic, Cell, Format, Table};
use crate::sweep::{parse_snr_list, parse_usize_list};

/// Trial counts below this trigger a warning.
pub const RECOMMENDED_TRIALS: u64 = 100;

/// SNR used by `effectiveness` when none is given, in dB.
pub const EFFECTIVENESS_SNR_DB: &str = "10";

/// Exact compare header.
pub const COMPARE_COLUMNS: [&str; 8] = [
    "snr_db",
    "strategy",
    "w",
    "rate_analytic",
    "rate_sim_mean",
    "rate_sim_stderr",
    "trials",
    "seed",
];

#[derive(Debug, Parser)]
#[command(
    name = "dfrelay",
    version,
    about = "Relay selection in multi-hop decode-and-forward networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form achievable rates.
    Analytic(Flags),
    /// Monte Carlo achievable rates.
    Simulate(Flags),
    /// Sliding-window rate as a percentage of the optimal rate, per window size.
    Effectiveness(Flags),
    /// Analytic and simulated rates side by side.
    Compare(Flags),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analytic(_) => "analytic",
            Command::Simulate(_) => "simulate",
            Command::Effectiveness(_) => "effectiveness",
            Command::Compare(_) => "compare",
        }
    }

    pub fn flags(&self) -> &Flags {
        match self {
            Command::Analytic(f)
            | Command::Simulate(f)
            | Command::Effectiveness(f)
            | Command::Compare(f) => f,
        }
    }
}

/// Flags shared by every command. Values left unset fall back to the
/// configuration file, then to per-command defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Relays per stage M (a list such as `2,3,4` for effectiveness).
    #[arg(long, value_name = "M")]
    pub relays: Option<String>,
    /// Hops L (a list for effectiveness).
    #[arg(long, value_name = "L")]
    pub hops: Option<String>,
    /// SNR in dB: a value, a list `a,b` or an inclusive range `start:stop:step`.
    #[arg(long = "snr-db", value_name = "SPEC", allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// Comma-separated strategies: optimal, brute, hop, adhoc, block, sliding.
    #[arg(long, value_name = "LIST")]
    pub strategy: Option<String>,
    /// Sliding window size.
    #[arg(long, value_name = "W")]
    pub window: Option<String>,
    /// Block size.
    #[arg(long = "block-size", value_name = "W")]
    pub block_size: Option<String>,
    /// Window sizes for effectiveness, e.g. `1:6`.
    #[arg(long, value_name = "LIST")]
    pub windows: Option<String>,
    #[arg(long, value_name = "N")]
    pub trials: Option<String>,
    #[arg(long, value_name = "S")]
    pub seed: Option<String>,
    /// Users sharing the relays (noise-limited sum rate).
    #[arg(long, value_name = "N")]
    pub users: Option<String>,
    /// Worker threads, 0 for one per core. Does not change results.
    #[arg(long, value_name = "T")]
    pub threads: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// csv or json.
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Flat key=value file supplying defaults for any flag.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Approximation behind the analytic optimal rate: dp or indep.
    #[arg(long = "optimal-approx", value_name = "KIND")]
    pub optimal_approx: Option<String>,
    /// Write the survival-function terms (coeff, power, decay) of each
    /// analytic strategy to this CSV file.
    #[arg(long = "dump-terms", value_name = "PATH")]
    pub dump_terms: Option<PathBuf>,
}

/// Approximation used for the analytic optimal rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimalApprox {
    Dp,
    Indep,
}

impl OptimalApprox {
    fn parse(s: &str) -> AppResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dp" => Ok(OptimalApprox::Dp),
            "indep" | "independent" => Ok(OptimalApprox::Indep),
            other => Err(AppError::Usage(format!(
                "unknown optimal approximation `{other}`, expected dp or indep"
            ))),
        }
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub relays: Vec<usize>,
    pub hops: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub strategies: Vec<String>,
    /// True when the strategy list came from the defaults.
    pub default_strategies: bool,
    pub window: usize,
    pub block_size: usize,
    pub windows: Option<Vec<usize>>,
    pub trials: u64,
    pub seed: u64,
    pub users: usize,
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub optimal_approx: OptimalApprox,
    pub dump_terms: Option<PathBuf>,
    /// Effective values as `key = value` pairs, for the output metadata.
    pub echo: Vec<(String, String)>,
}

struct Resolver<'a> {
    config: &'a ConfigMap,
    echo: Vec<(String, String)>,
}

impl Resolver<'_> {
    /// Flag, then configuration file, then `default`.
    fn raw(&mut self, key: &str, flag: Option<&str>, default: Option<&str>) -> Option<String> {
        let value = flag
            .map(str::to_string)
            .or_else(|| self.config.get(key).map(str::to_string))
            .or_else(|| default.map(str::to_string))?;
        if !matches!(key, "threads" | "output") {
            self.echo.push((key.to_string(), value.clone()));
        }
        Some(value)
    }

    fn parse<T>(
        &mut self,
        key: &str,
        flag: Option<&str>,
        default: &str,
        parse: impl Fn(&str) -> AppResult<T>,
    ) -> AppResult<T> {
        let raw = self.raw(key, flag, Some(default)).expect("default given");
        parse(&raw).map_err(|e| match e {
            AppError::Usage(m) => AppError::Usage(format!("--{key}: {m}")),
            other => other,
        })
    }
}

fn parse_u64(s: &str) -> AppResult<u64> {
    s.trim()
        .parse()
        .map_err(|_| AppError::Usage(format!("not a non-negative integer: `{}`", s.trim())))
}

fn parse_usize(s: &str) -> AppResult<usize> {
    s.trim()
        .parse()
        .map_err(|_| AppError::Usage(format!("not a non-negative integer: `{}`", s.trim())))
}

impl Settings {
    /// Merges flags, the configuration file (if any) and the defaults of
    /// `command`.
    pub fn resolve(command: &Command) -> AppResult<Self> {
        let flags = command.flags();
        let config = match &flags.config {
            Some(path) => ConfigMap::load(path)?,
            None => ConfigMap::default(),
        };
        let effectiveness = matches!(command, Command::Effectiveness(_));
        let mut r = Resolver {
            config: &config,
            echo: Vec::new(),
        };

        let relays = r.parse("relays", flags.relays.as_deref(), "2", parse_usize_list)?;
        let hops = r.parse(
            "hops",
            flags.hops.as_deref(),
            if effectiveness { "6" } else { "4" },
            parse_usize_list,
        )?;
        let snr_default = if effectiveness {
            EFFECTIVENESS_SNR_DB
        } else {
            "0:30:5"
        };
        let snr_db = r.parse(
            "snr-db",
            flags.snr_db.as_deref(),
            snr_default,
            parse_snr_list,
        )?;
        let explicit = flags.strategy.is_some() || config.get("strategy").is_some();
        let strategies = if effectiveness {
            Vec::new()
        } else {
            let raw = r
                .raw(
                    "strategy",
                    flags.strategy.as_deref(),
                    Some("optimal,hop,adhoc,block,sliding"),
                )
                .expect("default given");
            let names: Vec<String> = raw.split(',').map(|s| s.trim().to_string()).collect();
            if names.iter().any(String::is_empty) {
                return Err(AppError::Usage(format!(
                    "--strategy: empty entry in `{raw}`"
                )));
            }
            names
        };
        let window = r.parse("window", flags.window.as_deref(), "2", parse_usize)?;
        let block_size = r.parse("block-size", flags.block_size.as_deref(), "2", parse_usize)?;
        let windows = match r.raw("windows", flags.windows.as_deref(), None) {
            Some(raw) => Some(parse_usize_list(&raw)?),
            None => None,
        };
        let trials_default = if effectiveness { "5000" } else { "10000" };
        let trials = r.parse("trials", flags.trials.as_deref(), trials_default, parse_u64)?;
        let seed = r.parse("seed", flags.seed.as_deref(), "1", parse_u64)?;
        let users = r.parse("users", flags.users.as_deref(), "1", parse_usize)?;
        let threads = r.parse("threads", flags.threads.as_deref(), "0", parse_usize)?;
        let output = flags
            .output
            .clone()
            .or_else(|| config.get("output").map(PathBuf::from));
        let format = r.parse("format", flags.format.as_deref(), "csv", Format::parse)?;
        let optimal_approx = r.parse(
            "optimal-approx",
            flags.optimal_approx.as_deref(),
            "dp",
            OptimalApprox::parse,
        )?;
        let dump_terms = flags
            .dump_terms
            .clone()
            .or_else(|| config.get("dump-terms").map(PathBuf::from));

        if relays.is_empty() || hops.is_empty() {
            return Err(AppError::Usage(
                "--relays and --hops need at least one value".into(),
            ));
        }
        if !effectiveness && (relays.len() > 1 || hops.len() > 1) {
            return Err(AppError::Usage(format!(
                "{} takes a single --relays and --hops value; lists are for effectiveness",
                command.name()
            )));
        }
        if users == 0 {
            return Err(AppError::Usage("--users must be at least 1".into()));
        }
        if trials == 0 {
            return Err(AppError::Usage("--trials must be at least 1".into()));
        }
        Ok(Settings {
            relays,
            hops,
            snr_db,
            strategies,
            default_strategies: !explicit,
            window,
            block_size,
            windows,
            trials,
            seed,
            users,
            threads,
            output,
            format,
            optimal_approx,
            dump_terms,
            echo: r.echo,
        })
    }

    fn shape(&self) -> (usize, usize) {
        (self.relays[0], self.hops[0])
    }

    /// Strategies for an `hops`-hop network. Block is dropped from the
    /// default list when it is undefined for `hops`; an explicit request is
    /// validated and rejected instead.
    pub fn strategy_list(&self, hops: usize) -> AppResult<Vec<Strategy>> {
        let mut out = Vec::new();
        for name in &self.strategies {
            let kind: Strategy = name.parse()?;
            let s = match kind {
                Strategy::Block(_) => Strategy::Block(self.block_size),
                Strategy::Sliding(_) => Strategy::Sliding(self.window),
                other => other,
            };
            if let Err(e) = s.validate(hops) {
                if self.default_strategies {
                    continue;
                }
                return Err(e.into());
            }
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Ok(out)
    }
}

/// Closed-form rate of `strategy`, or `None` when there is none (brute
/// force, block and sliding with `w ≠ 2`).
pub fn analytic_rate(
    strategy: Strategy,
    relays: usize,
    hops: usize,
    snr_scale: f64,
    approx: OptimalApprox,
) -> AppResult<Option<RateValue>> {
    let value = match strategy {
        Strategy::Optimal => match approx {
            OptimalApprox::Dp => rate_optimal_dp(relays, hops, snr_scale)?,
            OptimalApprox::Indep => rate_optimal_indep(relays, hops, snr_scale)?,
        },
        Strategy::HopByHop => rate_hop(relays, hops, snr_scale)?,
        Strategy::AdHoc => rate_adhoc(relays, hops, snr_scale)?,
        Strategy::Block(2) => rate_block(relays, hops, snr_scale)?,
        Strategy::Sliding(2) => rate_sliding(relays, hops, snr_scale)?,
        Strategy::BruteForce | Strategy::Block(_) | Strategy::Sliding(_) => return Ok(None),
    };
    Ok(Some(value))
}

fn window_cell(s: Strategy) -> Cell {
    s.window().into()
}

fn warn_trials(trials: u64) {
    if trials < RECOMMENDED_TRIALS {
        eprintln!(
            "warning: {trials} trials is below the recommended minimum of {RECOMMENDED_TRIALS}"
        );
    }
}

fn network(relays: usize, hops: usize, snr_db: f64) -> AppResult<NetworkConfig> {
    Ok(NetworkConfig::from_db(hops, relays, snr_db)?)
}

/// Rows of `analytic`: `snr_db, strategy, w, rate, method`.
pub fn cmd_analytic(s: &Settings) -> AppResult<Table> {
    let (relays, hops) = s.shape();
    let strategies = s.strategy_list(hops)?;
    let mut table = Table::new(["snr_db", "strategy", "w", "rate", "method"]);
    for &snr_db in &s.snr_db {
        let scale = db_to_linear(snr_db);
        for &strategy in &strategies {
            let Some(value) = analytic_rate(strategy, relays, hops, scale, s.optimal_approx)?
            else {
                return Err(AppError::Usage(format!(
                    "no closed-form rate for {strategy}"
                )));
            };
            let value = sum_rate_multiuser(s.users, value)?;
            table.push(vec![
                Cell::Float(snr_db),
                strategy.name().into(),
                window_cell(strategy),
                Cell::Float(value.rate),
                value.method.name().into(),
            ]);
        }
    }
    if let Some(path) = &s.dump_terms {
        dump_terms(path, &strategies, relays, hops, s.optimal_approx)?;
    }
    Ok(table)
}

fn simulate_point(
    s: &Settings,
    strategies: &[Strategy],
    snr_db: f64,
) -> AppResult<Vec<RateEstimate>> {
    let (relays, hops) = s.shape();
    let config = network(relays, hops, snr_db)?;
    if s.users == 1 {
        return Ok(estimate_rates(&config, strategies, s.trials, s.seed)?);
    }
    strategies
        .iter()
        .map(|&strategy| {
            Ok(estimate_sum_rate_multiuser(
                &config, s.users, strategy, s.trials, s.seed,
            )?)
        })
        .collect()
}

/// Rows of `simulate`: `snr_db, strategy, w, mean, stderr, trials, seed`.
pub fn cmd_simulate(s: &Settings) -> AppResult<Table> {
    let strategies = s.strategy_list(s.shape().1)?;
    warn_trials(s.trials);
    let mut table = Table::new([
        "snr_db", "strategy", "w", "mean", "stderr", "trials", "seed",
    ]);
    for &snr_db in &s.snr_db {
        for est in simulate_point(s, &strategies, snr_db)? {
            table.push(vec![
                Cell::Float(snr_db),
                est.strategy.name().into(),
                window_cell(est.strategy),
                Cell::Float(est.mean),
                Cell::Float(est.stderr),
                Cell::Int(est.trials),
                Cell::Int(est.seed),
            ]);
        }
    }
    Ok(table)
}

/// Rows of `compare`, with the header in [`COMPARE_COLUMNS`].
pub fn cmd_compare(s: &Settings) -> AppResult<Table> {
    let (relays, hops) = s.shape();
    let strategies = s.strategy_list(hops)?;
    warn_trials(s.trials);
    let mut table = Table::new(COMPARE_COLUMNS);
    for &snr_db in &s.snr_db {
        let scale = db_to_linear(snr_db);
        for est in simulate_point(s, &strategies, snr_db)? {
            let analytic = match analytic_rate(est.strategy, relays, hops, scale, s.optimal_approx)?
            {
                Some(v) => Cell::Float(sum_rate_multiuser(s.users, v)?.rate),
                None => Cell::Empty,
            };
            table.push(vec![
                Cell::Float(snr_db),
                est.strategy.name().into(),
                window_cell(est.strategy),
                analytic,
                Cell::Float(est.mean),
                Cell::Float(est.stderr),
                Cell::Int(est.trials),
                Cell::Int(est.seed),
            ]);
        }
    }
    Ok(table)
}

/// Rows of `effectiveness`: one per (relays, hops, snr_db) with a column
/// `w<k>` per window size, as percentages to two decimals. Window sizes
/// above a row's hop count are left empty when the window list is the
/// default `1:L`.
pub fn cmd_effectiveness(s: &Settings) -> AppResult<Table> {
    warn_trials(s.trials);
    let max_hops = *s.hops.iter().max().expect("non-empty");
    let columns = s
        .windows
        .clone()
        .unwrap_or_else(|| (1..=max_hops).collect());
    if columns.is_empty() {
        return Err(AppError::Usage("--windows needs at least one value".into()));
    }
    let mut header: Vec<String> = ["relays", "hops", "snr_db", "trials", "seed"]
        .map(String::from)
        .to_vec();
    header.extend(columns.iter().map(|w| format!("w{w}")));
    let mut table = Table::new(header);
    for &relays in &s.relays {
        for &hops in &s.hops {
            let windows: Vec<usize> = if s.windows.is_some() {
                if let Some(&w) = columns.iter().find(|&&w| w == 0 || w > hops) {
                    return Err(AppError::Usage(format!("window {w} is outside 1..={hops}")));
                }
                columns.clone()
            } else {
                columns.iter().copied().filter(|&w| w <= hops).collect()
            };
            for &snr_db in &s.snr_db {
                let config = network(relays, hops, snr_db)?;
                let pct = effectiveness_row(&config, &windows, s.trials, s.seed)?;
                let mut row = vec![
                    Cell::Int(relays as u64),
                    Cell::Int(hops as u64),
                    Cell::Float(snr_db),
                    Cell::Int(s.trials),
                    Cell::Int(s.seed),
                ];
                let mut values = pct.into_iter();
                row.extend(columns.iter().map(|&w| {
                    if w <= hops {
                        Cell::Fixed2(values.next().expect("one value per window"))
                    } else {
                        Cell::Empty
                    }
                }));
                table.push(row);
            }
        }
    }
    Ok(table)
}

fn survival_terms(
    strategy: Strategy,
    relays: usize,
    hops: usize,
    approx: OptimalApprox,
) -> AppResult<Option<ExpPoly>> {
    let s = match strategy {
        Strategy::Optimal => match approx {
            OptimalApprox::Dp => survival_dp(relays, hops)?,
            OptimalApprox::Indep => survival_optimal_indep(relays, hops)?,
        },
        Strategy::HopByHop => survival_hop(relays, hops)?,
        Strategy::AdHoc => survival_adhoc(relays, hops)?,
        Strategy::Block(2) => survival_block(relays, hops)?,
        Strategy::Sliding(2) => survival_sliding(relays, hops)?,
        _ => return Ok(None),
    };
    Ok(Some(s))
}

/// Writes `strategy, coeff, power, decay` for every survival term.
fn dump_terms(
    path: &Path,
    strategies: &[Strategy],
    relays: usize,
    hops: usize,
    approx: OptimalApprox,
) -> AppResult<()> {
    let mut table = Table::new(["strategy", "coeff", "power", "decay"]);
    for &strategy in strategies {
        let Some(poly) = survival_terms(strategy, relays, hops, approx)? else {
            continue;
        };
        for t in poly.terms() {
            table.push(vec![
                strategy.name().into(),
                Cell::Float(t.coeff),
                Cell::Int(u64::from(t.power)),
                Cell::Int(u64::from(t.decay)),
            ]);
        }
    }
    write_atomic(path, table.to_csv().as_bytes())
}

/// Renders `table` in the requested format and writes it, together with
/// the effective configuration, to the output path or standard output.
pub fn emit(command: &str, s: &Settings, table: &Table) -> AppResult<()> {
    let body = match s.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(command, &s.echo),
    };
    match &s.output {
        Some(path) => {
            write_atomic(path, body.as_bytes())?;
            if s.format == Format::Csv {
                let mut sidecar = path.clone().into_os_string();
                sidecar.push(".config");
                write_atomic(Path::new(&sidecar), config::render(&s.echo).as_bytes())?;
            }
        }
        None => {
            if s.format == Format::Csv {
                let mut err = std::io::stderr().lock();
                for (k, v) in &s.echo {
                    let _ = writeln!(err, "# {k} = {v}");
                }
            }
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| AppError::io("<stdout>", e))?;
        }
    }
    Ok(())
}

/// Runs one parsed invocation.
pub fn run(cli: &Cli) -> AppResult<()> {
    let settings = Settings::resolve(&cli.command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.threads)
        .build()
        .map_err(|e| {
            AppError::Usage(format!(
                "cannot start {} worker threads: {e}",
                settings.threads
            ))
        })?;
    let table = pool.install(|| match cli.command {
        Command::Analytic(_) => cmd_analytic(&settings),
        Command::Simulate(_) => cmd_simulate(&settings),
        Command::Effectiveness(_) => cmd_effectiveness(&settings),
        Command::Compare(_) => cmd_compare(&settings),
    })?;
    emit(cli.command.name(), &settings, &table)
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> AppResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| AppError::Usage(e.to_string()))?;
    run(&cli)
}
