//! The `debug` command line: batch experiments, terminal sessions and
//! non-interactive diagnosis, all through the HTTP service.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kbdebug::api::{BatchReport, BatchRequest, CreateSessionRequest, SessionView, SolveRequest, Targets};
use kbdebug::logic::{AxiomSet, Dpi, DpiEnvelope};
use kbdebug::probability::FaultModel;
use kbdebug::session::{Engine, Mode, Reply, SessionConfig, SessionStatus};
use kbdebug::strategy::StrategyChoice;
use kbdebug_client::Client;

#[derive(Parser, Debug)]
#[command(name = "debug", version, about = "Interactive debugging of faulty knowledge bases")]
pub struct Cli {
    /// Service to talk to. Without one, an embedded server is started.
    #[arg(long, global = true, env = "KBDEBUG_SERVER")]
    pub server: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run oracle-answered sessions for each target and strategy.
    Batch(BatchArgs),
    /// Answer queries on the terminal.
    Interactive(InteractiveArgs),
    /// List the most probable diagnoses without asking anything.
    Solve(SolveArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SessionArgs {
    /// DPI as JSON.
    #[arg(long)]
    pub dpi: PathBuf,
    /// Fault model as JSON.
    #[arg(long)]
    pub faults: Option<PathBuf>,
    #[arg(long, default_value_t = 0.85)]
    pub sigma: f64,
    /// Number of leading diagnoses.
    #[arg(long, default_value_t = 9)]
    pub n: usize,
    #[arg(long, default_value = "conflict")]
    pub engine: Engine,
    #[arg(long, default_value = "dynamic")]
    pub mode: Mode,
    /// Seed for the random strategy.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Entropy threshold for the CKK query search.
    #[arg(long)]
    pub gamma: Option<f64>,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Target diagnosis file: one id list, or a list of them.
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "ent")]
    pub strategy: Vec<StrategyChoice>,
    /// Write the rows as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InteractiveArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long, default_value = "ent")]
    pub strategy: StrategyChoice,
    /// Write the final session snapshot as JSON.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub dpi: PathBuf,
    #[arg(long)]
    pub faults: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long)]
    pub time_limit_ms: Option<u64>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn fault_model(path: &Option<PathBuf>) -> Result<FaultModel> {
    path.as_deref().map(read_json).transpose().map(Option::unwrap_or_default)
}

fn with_seed(strategy: StrategyChoice, seed: Option<u64>) -> StrategyChoice {
    match (strategy, seed) {
        (StrategyChoice::Random { .. }, Some(seed)) => StrategyChoice::Random { seed },
        (s, _) => s,
    }
}

impl SessionArgs {
    fn config(&self, strategy: StrategyChoice) -> Result<SessionConfig> {
        Ok(SessionConfig {
            n_leading: self.n,
            sigma: self.sigma,
            engine: self.engine,
            mode: self.mode,
            strategy: with_seed(strategy, self.seed),
            fault_model: fault_model(&self.faults)?,
            gamma: self.gamma,
            ..SessionConfig::default()
        })
    }
}

/// Holds the embedded server's data directory for the life of the process.
pub struct Connection {
    pub client: Client,
    _data: Option<tempfile::TempDir>,
}

/// Use `server` if given, else start one in-process on an ephemeral port.
/// The embedded server keeps its files in `KBDEBUG_DATA_DIR` when set.
pub fn connect(server: Option<&str>) -> Result<Connection> {
    if let Some(url) = server {
        return Ok(Connection { client: Client::new(url), _data: None });
    }
    let (dir, data) = match std::env::var_os("KBDEBUG_DATA_DIR") {
        Some(d) => (PathBuf::from(d), None),
        None => {
            let t = tempfile::tempdir()?;
            (t.path().to_path_buf(), Some(t))
        }
    };
    let addr = kbdebug_service::spawn_background(&dir).context("starting the embedded server")?;
    let client = Client::new(&format!("http://{addr}"));
    let start = Instant::now();
    while client.health().is_err() {
        if start.elapsed() > Duration::from_secs(10) {
            bail!("embedded server did not come up");
        }
        std::thread::sleep(Duration::from_millis(20));
    }
    Ok(Connection { client, _data: data })
}

fn ids(set: &AxiomSet) -> String {
    set.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

pub fn batch(client: &Client, args: &BatchArgs, out: &mut impl Write) -> Result<BatchReport> {
    let dpi: DpiEnvelope = read_json(&args.session.dpi)?;
    let targets: Targets = read_json(&args.target)?;
    let req = BatchRequest {
        dpi,
        targets: targets.into_vec(),
        strategies: args.strategy.clone(),
        config: args.session.config(StrategyChoice::Entropy)?,
        seed: args.session.seed,
    };
    let report = client.batch(&req)?;
    writeln!(out, "{:<8} {:<12} {:>8} {:<12} {:>10}", "strategy", "target", "queries", "diagnosis", "ms")?;
    for r in &report.rows {
        match &r.error {
            Some(e) => writeln!(out, "{:<8} {:<12} error: {e}", r.strategy, ids(&r.target))?,
            None => writeln!(
                out,
                "{:<8} {:<12} {:>8} {:<12} {:>10.1}",
                r.strategy,
                ids(&r.target),
                r.query_count.unwrap_or_default(),
                r.diagnosis.as_ref().map(ids).unwrap_or_else(|| "-".into()),
                r.wall_ms
            )?,
        }
    }
    for a in &report.aggregates {
        writeln!(out, "{}: runs {} min {} avg {:.2} max {}", a.strategy, a.runs, a.min, a.avg, a.max)?;
    }
    if let Some(path) = &args.out {
        write_csv(path, &report)?;
    }
    Ok(report)
}

pub fn write_csv(path: &Path, report: &BatchReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["strategy", "target", "query_count", "diagnosis", "status", "wall_ms", "error"])?;
    for r in &report.rows {
        w.write_record([
            r.strategy.clone(),
            ids(&r.target),
            r.query_count.map(|n| n.to_string()).unwrap_or_default(),
            r.diagnosis.as_ref().map(ids).unwrap_or_default(),
            r.status.map(|s| serde_json::to_value(s).unwrap().as_str().unwrap_or_default().to_string()).unwrap_or_default(),
            format!("{:.3}", r.wall_ms),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn print_leading(out: &mut impl Write, view: &SessionView, dpi: &Dpi) -> Result<()> {
    for d in &view.leading {
        let texts: Vec<String> = d.axiom_ids.iter().map(|id| dpi.axiom(*id).map(|a| a.text.clone()).unwrap_or_default()).collect();
        writeln!(out, "  {:.4}  [{}]  {}", d.posterior, ids(&d.axiom_ids), texts.join(" ; "))?;
    }
    Ok(())
}

/// Read y/n/s answers from `input` until the session ends. End of input
/// aborts the session.
pub fn interactive(client: &Client, args: &InteractiveArgs, input: &mut impl BufRead, out: &mut impl Write) -> Result<SessionView> {
    let envelope: DpiEnvelope = read_json(&args.session.dpi)?;
    let dpi = Dpi::from_envelope(&envelope)?;
    let req = CreateSessionRequest { dpi: envelope, config: args.session.config(args.strategy)? };
    let mut view = client.create_session(&req)?;
    writeln!(out, "session {}", view.session_id)?;
    let mut line = String::new();
    while let Some(query) = view.query.clone() {
        writeln!(out, "leading diagnoses:")?;
        print_leading(out, &view, &dpi)?;
        writeln!(out, "query {}: should the intended knowledge base entail", view.history.len() + 1)?;
        for f in &query {
            writeln!(out, "    {f}")?;
        }
        let reply = loop {
            write!(out, "[y/n/s] > ")?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                break None;
            }
            match line.parse::<Reply>() {
                Ok(r) => break Some(r),
                Err(e) => writeln!(out, "{e}")?,
            }
        };
        view = match reply {
            Some(r) => client.answer(&view.session_id, r)?,
            None => {
                writeln!(out)?;
                client.abort(&view.session_id)?
            }
        };
    }
    let status = serde_json::to_value(view.status)?;
    writeln!(out, "status: {}", status.as_str().unwrap_or_default())?;
    if view.status != SessionStatus::Aborted {
        print_leading(out, &view, &dpi)?;
    }
    if let Some(p) = &view.proposal {
        writeln!(out, "diagnosis: [{}]", ids(&p.diagnosis.axiom_ids))?;
        for id in &p.diagnosis.axiom_ids {
            if let Some(a) = dpi.axiom(*id) {
                writeln!(out, "  remove {id}: {}", a.text)?;
            }
        }
        writeln!(out, "repaired knowledge base:")?;
        for s in &p.solution_kb {
            writeln!(out, "  {s}")?;
        }
    }
    if let Some(path) = &args.snapshot {
        let snapshot = client.session(&view.session_id)?.record.snapshot;
        fs::write(path, serde_json::to_string_pretty(&snapshot)? + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(view)
}

pub fn solve(client: &Client, args: &SolveArgs, out: &mut impl Write) -> Result<()> {
    let envelope: DpiEnvelope = read_json(&args.dpi)?;
    let dpi = Dpi::from_envelope(&envelope)?;
    let req = SolveRequest { dpi: envelope, fault_model: fault_model(&args.faults)?, n: args.n, time_limit_ms: args.time_limit_ms };
    let result = client.solve(&req)?;
    for (rank, d) in result.diagnoses.iter().enumerate() {
        let texts: Vec<String> = d.axiom_ids.iter().filter_map(|id| dpi.axiom(*id)).map(|a| a.text.clone()).collect();
        writeln!(out, "{:>2}. {:.4}  [{}]  {}", rank + 1, d.posterior, ids(&d.axiom_ids), texts.join(" ; "))?;
    }
    if !result.complete {
        writeln!(out, "(time limit reached)")?;
    }
    Ok(())
}

pub fn run(cli: Cli, input: &mut impl BufRead, out: &mut impl Write) -> Result<()> {
    let conn = connect(cli.server.as_deref())?;
    match &cli.command {
        Command::Batch(a) => batch(&conn.client, a, out).map(drop),
        Command::Interactive(a) => interactive(&conn.client, a, input, out).map(drop),
        Command::Solve(a) => solve(&conn.client, a, out),
    }
}
