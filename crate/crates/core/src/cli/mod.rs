//! Argument definitions and subcommand dispatch.

pub mod config;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use bhent::experiments::{
    ground_state_summary, pair_arrival_time, run_cotunneling, run_ctqw_figure, run_ln_vs_u_sweep,
    run_mott_transport, run_sdq_scenario, uniform_grid, ScenarioSpec, SdqScenario,
};
use bhent::table::{Record, Table};
use bhent::validate::{run_all, CheckResult};
use bhent::BhError;

use config::{resolve, Config};

#[derive(Debug, Parser)]
#[command(name = "bhent", version, about = "Transport and entanglement of bosons on a Bose-Hubbard chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output file [default: standard output]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// `key = value` file with defaults for any flag; flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// More progress output on stderr (repeat for more)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form single-particle walk from the middle site: t, p_1..p_M
    Ctqw(CtqwArgs),
    /// Ground-state energy and end-site entanglement, one row per U/J
    GroundState(ModelArgs),
    /// Boson injected at the middle of the ground state: t, n_i, ln_k, norm, energy, particles
    Transport(TransportArgs),
    /// First maximum of the end-site negativity versus U/J: u_over_j, t_firstmax, ln_firstmax
    LnSweep(TransportArgs),
    /// Bosons released together from the middle site: t, n_i, spread, edge_pair, norm, energy, particles
    Cotunnel(CotunnelArgs),
    /// Two delocalized qubits at the chain ends: t, p, ln, p_ln, pop_00..pop_11, norm, n_i
    Sdq(SdqArgs),
    /// Run the built-in consistency checks
    Validate,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Final time in units of 1/J
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Time step in units of 1/J [default: 0.05]
    #[arg(long)]
    pub dt: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CtqwArgs {
    /// Number of sites, odd [default: 41]
    #[arg(long)]
    pub sites: Option<usize>,
    #[command(flatten)]
    pub time: TimeArgs,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Number of sites [default: 9]
    #[arg(long)]
    pub sites: Option<usize>,
    /// Bosons per site in the ground state [default: 1]
    #[arg(long)]
    pub nbar: Option<usize>,
    /// Occupation cap per site [default: 3]
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Interaction U/J, comma-separated for several values
    #[arg(long, value_delimiter = ',')]
    pub u: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TransportArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub time: TimeArgs,
}

#[derive(Debug, Args)]
pub struct CotunnelArgs {
    /// Number of sites [default: 7]
    #[arg(long)]
    pub sites: Option<usize>,
    /// Bosons on the middle site at t = 0 [default: 2]
    #[arg(long)]
    pub particles: Option<usize>,
    /// Interaction U/J [default: 40]
    #[arg(long)]
    pub u: Option<f64>,
    #[command(flatten)]
    pub time: TimeArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// 24 sites, bosons on sites 12 and 13
    Fig4,
    /// 4 sites, bosons on sites 2 and 3
    Fig5,
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let value = self.to_possible_value().expect("no skipped variants");
        f.write_str(value.get_name())
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Args)]
pub struct SdqArgs {
    /// Chain layout [default: fig4]
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    /// Interaction U/J [default: 20]
    #[arg(long)]
    pub u: Option<f64>,
    /// Background filling under the two extra bosons [default: 0]
    #[arg(long)]
    pub nbar: Option<usize>,
    #[command(flatten)]
    pub time: TimeArgs,
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flag or configuration value.
    Usage(String),
    Run(BhError),
    /// `validate` ran but some check failed.
    Checks,
}

impl From<BhError> for Failure {
    fn from(e: BhError) -> Self {
        Failure::Run(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(BhError::Io(e))
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(BhError::InfeasibleDimension { .. }) => 3,
            Failure::Run(_) | Failure::Checks => 1,
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage<T>(r: Result<T, String>) -> Outcome<T> {
    r.map_err(Failure::Usage)
}

struct Context {
    config: Config,
    parameters: BTreeMap<String, String>,
}

impl Context {
    fn pick<T>(&mut self, flag: Option<T>, key: &str, default: T) -> Outcome<T>
    where
        T: std::str::FromStr + std::fmt::Display,
        T::Err: std::fmt::Display,
    {
        let v = usage(resolve(flag, &self.config, key, default))?;
        self.parameters.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    fn pick_list(&mut self, flag: Option<Vec<f64>>, key: &str, default: &[f64]) -> Outcome<Vec<f64>> {
        let v = match flag {
            Some(v) => v,
            None => usage(self.config.get_list(key))?.unwrap_or_else(|| default.to_vec()),
        };
        let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        self.parameters.insert(key.to_string(), text.join(","));
        Ok(v)
    }

    fn pick_single_u(&mut self, flag: Option<Vec<f64>>, default: f64) -> Outcome<f64> {
        let v = self.pick_list(flag, "u", &[default])?;
        match v.as_slice() {
            [u] => Ok(*u),
            _ => Err(Failure::Usage(format!("this subcommand takes one U/J value, got {}", v.len()))),
        }
    }

    fn grid(&mut self, time: &TimeArgs, tmax_default: f64) -> Outcome<Vec<f64>> {
        let (tmax, dt) = self.horizon(time, tmax_default)?;
        Ok(uniform_grid(tmax, dt))
    }

    fn horizon(&mut self, time: &TimeArgs, tmax_default: f64) -> Outcome<(f64, f64)> {
        let tmax = self.pick(time.tmax, "tmax", tmax_default)?;
        let dt = self.pick(time.dt, "dt", bhent::ctqw::DEFAULT_DT)?;
        if !(dt > 0.0 && dt.is_finite()) || !(tmax >= 0.0 && tmax.is_finite()) {
            return Err(Failure::Usage(format!("need tmax >= 0 and dt > 0, got tmax {tmax}, dt {dt}")));
        }
        if tmax / dt > 1e7 {
            return Err(Failure::Usage(format!("grid of {:.0} steps is too long", tmax / dt)));
        }
        Ok((tmax, dt))
    }
}

enum Output {
    Table(Table),
    Checks(Vec<CheckResult>),
}

pub fn run(cli: Cli) -> Outcome<()> {
    let config = match &cli.config {
        Some(path) => usage(Config::load(path))?,
        None => Config::default(),
    };
    let format = match cli.format {
        Some(f) => f,
        None => usage(config.get::<Format>("format"))?.unwrap_or(Format::Csv),
    };
    let out = match cli.out.clone() {
        Some(p) => Some(p),
        None => usage(config.get::<PathBuf>("out"))?,
    };
    let mut ctx = Context { config, parameters: BTreeMap::new() };
    let (name, output) = execute(&cli.command, &mut ctx)?;
    let sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    let failed = match &output {
        Output::Checks(results) => results.iter().any(|r| !r.passed),
        Output::Table(_) => false,
    };
    write_output(&mut sink, name, ctx.parameters, output, format)?;
    sink.flush()?;
    if failed {
        return Err(Failure::Checks);
    }
    Ok(())
}

fn execute(command: &Command, ctx: &mut Context) -> Outcome<(&'static str, Output)> {
    let table = match command {
        Command::Ctqw(a) => {
            let sites = ctx.pick(a.sites, "sites", 41)?;
            let (tmax, dt) = ctx.horizon(&a.time, 10.0)?;
            info!("closed-form walk on {sites} sites up to Jt = {tmax}");
            ("ctqw", Table::from_series(&run_ctqw_figure(sites, tmax, dt)?))
        }
        Command::GroundState(a) => {
            let (sites, nbar, nmax) = model(ctx, a)?;
            let us = ctx.pick_list(a.u.clone(), "u", &[10.0])?;
            let mut columns: Vec<String> =
                ["u_over_j", "dim", "energy", "residual", "degenerate", "ln_edges", "purity_edges"]
                    .map(String::from)
                    .to_vec();
            columns.extend((1..=sites).map(|i| format!("n_{i}")));
            let mut table = Table::new(columns);
            for u in us {
                info!("ground state at U/J = {u}");
                let g = ground_state_summary(&ScenarioSpec::new("ground-state", sites, nbar, nmax, u, vec![0.0]))?;
                let mut row = vec![
                    g.u_over_j,
                    g.dim as f64,
                    g.energy,
                    g.residual,
                    if g.degenerate { 1.0 } else { 0.0 },
                    g.ln_edges,
                    g.purity_edges,
                ];
                row.extend(g.occupations);
                table.push(row)?;
            }
            ("ground-state", table)
        }
        Command::Transport(a) => {
            let (sites, nbar, nmax) = model(ctx, &a.model)?;
            let u = ctx.pick_single_u(a.model.u.clone(), 40.0)?;
            let grid = ctx.grid(&a.time, 6.0)?;
            info!("transport on {sites} sites, U/J = {u}, {} samples", grid.len());
            let spec = ScenarioSpec::new("transport", sites, nbar, nmax, u, grid);
            ("transport", Table::from_series(&run_mott_transport(&spec)?))
        }
        Command::LnSweep(a) => {
            let (sites, nbar, nmax) = model(ctx, &a.model)?;
            let us = ctx.pick_list(a.model.u.clone(), "u", &[6.0, 10.0, 15.0, 25.0, 40.0])?;
            let grid = ctx.grid(&a.time, 8.0)?;
            info!("sweep over {} values of U/J on {sites} sites", us.len());
            let base = ScenarioSpec::new("ln-sweep", sites, nbar, nmax, 0.0, grid);
            ("ln-sweep", Table::from_sweep(&run_ln_vs_u_sweep(&base, &us)?))
        }
        Command::Cotunnel(a) => {
            let sites = ctx.pick(a.sites, "sites", 7)?;
            let particles = ctx.pick(a.particles, "particles", 2)?;
            let u = ctx.pick(a.u, "u", 40.0)?;
            let grid = ctx.grid(&a.time, 60.0)?;
            let spec = ScenarioSpec::new("cotunnel", sites, 0, particles, u, grid);
            let series = run_cotunneling(&spec, particles)?;
            match pair_arrival_time(&series, u) {
                Some(t) => info!("pair reaches the last site at Jt = {t:.4}"),
                None => info!("pair does not reach the last site within the horizon"),
            }
            ("cotunnel", Table::from_series(&series))
        }
        Command::Sdq(a) => {
            let scenario = ctx.pick(a.scenario, "scenario", Scenario::Fig4)?;
            let u = ctx.pick(a.u, "u", 20.0)?;
            let nbar = ctx.pick(a.nbar, "nbar", 0)?;
            let (sites, tmax) = match scenario {
                Scenario::Fig4 => (24, 20.0),
                Scenario::Fig5 => (4, 6.0),
            };
            let grid = ctx.grid(&a.time, tmax)?;
            info!("delocalized qubits on {sites} sites, U/J = {u}, background {nbar}");
            let series = run_sdq_scenario(&SdqScenario::ends(sites, u, nbar, grid))?;
            ("sdq", Table::from_series(&series))
        }
        Command::Validate => {
            let results = run_all();
            for r in &results {
                info!("{} {} in {:.2} s", r.name, if r.passed { "passed" } else { "FAILED" }, r.seconds);
            }
            return Ok(("validate", Output::Checks(results)));
        }
    };
    Ok((table.0, Output::Table(table.1)))
}

fn model(ctx: &mut Context, a: &ModelArgs) -> Outcome<(usize, usize, usize)> {
    Ok((
        ctx.pick(a.sites, "sites", 9)?,
        ctx.pick(a.nbar, "nbar", 1)?,
        ctx.pick(a.nmax, "nmax", 3)?,
    ))
}

fn write_output<W: Write>(
    sink: &mut W,
    command: &str,
    parameters: BTreeMap<String, String>,
    output: Output,
    format: Format,
) -> Outcome<()> {
    match (output, format) {
        (Output::Table(table), Format::Csv) => table.write_csv(sink)?,
        (Output::Table(table), Format::Json) => {
            let record = Record { command: command.to_string(), parameters, table };
            writeln!(sink, "{}", record.to_json()?)?;
        }
        (Output::Checks(results), Format::Csv) => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(["check", "passed", "seconds", "detail"]).map_err(csv_failure)?;
            for r in &results {
                w.write_record([r.name.clone(), r.passed.to_string(), format!("{:.3}", r.seconds), r.detail.clone()])
                    .map_err(csv_failure)?;
            }
            w.flush()?;
        }
        (Output::Checks(results), Format::Json) => {
            let text = serde_json::to_string_pretty(&results)
                .map_err(|e| Failure::Run(BhError::InvalidParameter(e.to_string())))?;
            writeln!(sink, "{text}")?;
        }
    }
    Ok(())
}

fn csv_failure(e: csv::Error) -> Failure {
    Failure::Run(BhError::InvalidParameter(format!("csv: {e}")))
}
