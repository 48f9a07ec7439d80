//! Command-line front end. Machine-readable results go to stdout, human
//! summaries to stderr. Exit codes: 0 success or verified, 1 verification
//! failure, 2 bad usage or input.

use std::collections::{BTreeMap, HashSet};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::applications::{
    count_unique_upvotes, issue_roll, make_service_tag, service_check, sortition_select,
    write_count_csv, CheckOutcome, CountRow, Upvote,
};
use crate::canonical::to_canonical_string;
use crate::ceremony::{
    verify_event, CeremonyScript, CosignPolicy, GroundTruth, LogEntry, RollList,
};
use crate::crypto::hash_parts;
use crate::error::{Error, Result};
use crate::federation::{
    run_federation_cycle, verify_cycle, CycleBundle, CycleCheck, FederationScenario,
};
use crate::sybilsim::{run_scenario, write_csv, SybilScenario};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5EED;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Parser, Debug)]
#[command(
    name = "popkit",
    version,
    about = "Pseudonym-party toolkit and Sybil economics simulator"
)]
pub struct Cli {
    /// Master seed for all randomness.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Directory for output files and the run manifest.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run or verify a single event.
    #[command(subcommand)]
    Ceremony(CeremonyCmd),
    /// Simulate or verify a federated cycle.
    #[command(subcommand)]
    Federation(FederationCmd),
    /// Run the threshold-verification attack simulator.
    Sybilsim(SybilArgs),
    /// Token applications: service tags, like counts, sortition.
    #[command(subcommand)]
    Apps(AppsCmd),
    /// Rerun a command from its manifest and compare outputs byte for byte.
    Replay { manifest: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum CeremonyCmd {
    /// Run a ceremony script; prints the event record.
    Run { script: PathBuf },
    /// Verify an event record, or a script after running it.
    Verify { input: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum FederationCmd {
    /// Run a federation scenario; prints the cycle bundle.
    Simulate { scenario: PathBuf },
    /// Re-check a cycle bundle, or a scenario after running it.
    Verify { input: PathBuf },
}

#[derive(Args, Debug)]
pub struct SybilArgs {
    pub scenario: PathBuf,
    /// One parameter to sweep, as `key=v1,v2,...`.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Per-cycle CSV path; sweep points get a `-key-value` suffix.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub replications: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum AppsCmd {
    /// Replay service-tag uses; prints one outcome per use.
    Tag { fixture: PathBuf },
    /// Count unique people behind upvotes; prints the count.
    Count {
        fixture: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Select k tokens from a roll; prints the selected indices.
    Sortition { fixture: PathBuf },
}

/// Published roll plus the event log a verifier checks it against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub roll: RollList,
    pub seal_log: Vec<LogEntry>,
    pub policy: CosignPolicy,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EventInput {
    Record(EventRecord),
    Script(CeremonyScript),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CycleInput {
    Bundle(Box<CycleBundle>),
    Scenario(FederationScenario),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TagUse {
    pub person: usize,
    pub service: String,
    pub action: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TagFixture {
    pub people: usize,
    #[serde(default)]
    pub cycle: u64,
    pub uses: Vec<TagUse>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccountVote {
    pub account: String,
    pub person: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountFixture {
    pub fixture_id: String,
    pub people: usize,
    #[serde(default)]
    pub cycle: u64,
    pub post_id: String,
    pub upvotes: Vec<AccountVote>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SortitionFixture {
    pub people: usize,
    #[serde(default)]
    pub cycle: u64,
    /// Public beacon output; hashed to the 32-byte selection seed.
    pub beacon: String,
    pub k: usize,
}

/// Everything needed to reproduce a run: written next to its outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, input paths made absolute and
    /// `--out`/`--csv` removed.
    pub args: Vec<String>,
    pub inputs: Vec<String>,
    pub master_seed: u64,
    pub out_dir: String,
    pub tool_version: String,
    /// Output file name to SHA-256 hex.
    pub outputs: BTreeMap<String, String>,
}

struct Outputs {
    dir: Option<PathBuf>,
    quiet: bool,
    files: BTreeMap<String, String>,
}

impl Outputs {
    fn new(dir: Option<PathBuf>, quiet: bool) -> Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir,
            quiet,
            files: BTreeMap::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(d) = &self.dir {
            std::fs::write(d.join(name), bytes)?;
            self.files
                .insert(name.to_owned(), hex::encode(Sha256::digest(bytes)));
        }
        Ok(())
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(out: &mut Outputs, name: &str, value: &T) -> Result<()> {
    let text = to_canonical_string(value)?;
    if !out.quiet {
        println!("{text}");
    }
    out.write(name, text.as_bytes())
}

fn verdict(passed: bool) -> u8 {
    if passed {
        0
    } else {
        1
    }
}

fn run_script(script: &CeremonyScript, seed: u64) -> Result<EventRecord> {
    let outcome = script.run(seed)?;
    Ok(EventRecord {
        roll: outcome.roll,
        seal_log: outcome.ground.seal_log,
        policy: script.config.policy(),
    })
}

fn ceremony(cmd: &CeremonyCmd, seed: u64, out: &mut Outputs) -> Result<u8> {
    match cmd {
        CeremonyCmd::Run { script } => {
            let record = run_script(&read_json(script)?, seed)?;
            eprintln!(
                "event {}: {} tokens",
                record.roll.event_id(),
                record.roll.len()
            );
            emit(out, "event.json", &record)?;
            Ok(0)
        }
        CeremonyCmd::Verify { input } => {
            let record = match read_json(input)? {
                EventInput::Record(r) => r,
                EventInput::Script(s) => run_script(&s, seed)?,
            };
            let ground = GroundTruth::from_log(record.seal_log);
            let report = verify_event(&record.roll, &ground, &record.policy);
            for f in &report.findings {
                eprintln!("{:?}: {}", f.code, f.detail);
            }
            eprintln!("{}", if report.passed { "passed" } else { "FAILED" });
            emit(out, "report.json", &report)?;
            Ok(verdict(report.passed))
        }
    }
}

fn federation(cmd: &FederationCmd, seed: u64, out: &mut Outputs) -> Result<u8> {
    let (report, name) = match cmd {
        FederationCmd::Simulate { scenario } => {
            let bundle = run_federation_cycle(&read_json(scenario)?, seed)?;
            emit(out, "bundle.json", &bundle)?;
            (bundle.report, "bundle.json")
        }
        FederationCmd::Verify { input } => {
            // a bundle's own report is not trusted; recompute from what was published
            let report = match read_json(input)? {
                CycleInput::Bundle(b) => {
                    verify_cycle(&b.records, &b.schedule, &b.reveals, &CycleCheck::default())
                }
                CycleInput::Scenario(s) => run_federation_cycle(&s, seed)?.report,
            };
            emit(out, "report.json", &report)?;
            (report, "report.json")
        }
    };
    for f in &report.flagged_sites {
        eprintln!("{}: {:?}", f.site, f.reasons);
    }
    eprintln!(
        "cycle {}: {} sites passed, {} flagged ({name})",
        report.cycle,
        report.passed_sites.len(),
        report.flagged_sites.len()
    );
    Ok(verdict(report.passed()))
}

/// Parses `key=v1,v2,...`.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<String>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::InvalidArgument(format!("sweep must be key=v1,v2: {spec}")))?;
    let values: Vec<String> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(String::from)
        .collect();
    if key.is_empty() || values.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "sweep must be key=v1,v2: {spec}"
        )));
    }
    Ok((key.trim().to_owned(), values))
}

#[derive(Serialize)]
struct SweepPoint {
    key: Option<String>,
    value: Option<String>,
    summary: crate::sybilsim::SimSummary,
}

fn suffixed(path: &Path, key: &str, value: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sybilsim");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}-{key}-{value}.{ext}"))
}

fn sybilsim(args: &SybilArgs, seed: u64, out: &mut Outputs) -> Result<u8> {
    let mut base: SybilScenario = read_json(&args.scenario)?;
    if let Some(r) = args.replications {
        base.replications = r;
    }
    base.validate()?;
    let points: Vec<(Option<(String, String)>, SybilScenario)> = match &args.sweep {
        None => vec![(None, base)],
        Some(spec) => {
            let (key, values) = parse_sweep(spec)?;
            values
                .into_iter()
                .map(|v| Ok((Some((key.clone(), v.clone())), base.with_field(&key, &v)?)))
                .collect::<Result<_>>()?
        }
    };
    let mut summaries = Vec::new();
    for (point, sc) in points {
        let result = run_scenario(&sc, seed)?;
        let mut csv = Vec::new();
        write_csv(&result, &mut csv)?;
        let name = match &point {
            None => "sybilsim.csv".to_owned(),
            Some((k, v)) => format!("sybilsim-{k}-{v}.csv"),
        };
        out.write(&name, &csv)?;
        if let Some(path) = &args.csv {
            let path = match &point {
                None => path.clone(),
                Some((k, v)) => suffixed(path, k, v),
            };
            std::fs::write(path, &csv)?;
        }
        let s = &result.summary;
        let label = point
            .as_ref()
            .map_or(String::new(), |(k, v)| format!("{k}={v}: "));
        eprintln!(
            "{label}advantage {:.4} ± {:.4}, minions/cycle {:.1}, lucky {:.3e} (exact {:.3e}), final share {:.3}",
            s.mean_advantage, s.advantage_stderr, s.mean_minions, s.mean_lucky_fraction, s.lucky_fraction_exact, s.final_share
        );
        for n in &s.notes {
            eprintln!("  note: {n}");
        }
        let (key, value) = point.map_or((None, None), |(k, v)| (Some(k), Some(v)));
        summaries.push(SweepPoint {
            key,
            value,
            summary: result.summary,
        });
    }
    emit(out, "summary.json", &summaries)?;
    Ok(0)
}

fn apps(cmd: &AppsCmd, seed: u64, out: &mut Outputs) -> Result<u8> {
    match cmd {
        AppsCmd::Tag { fixture } => {
            let fx: TagFixture = read_json(fixture)?;
            let (kps, roll) = issue_roll(fx.people, fx.cycle, seed)?;
            let mut seen = HashSet::new();
            let mut outcomes = Vec::new();
            for u in &fx.uses {
                let holder = kps
                    .get(u.person)
                    .ok_or_else(|| Error::InvalidArgument(format!("no person {}", u.person)))?;
                let proof = make_service_tag(holder, &roll, &u.service, &u.action)?;
                let outcome = service_check(&proof, &roll, &u.service, &u.action, &mut seen);
                eprintln!(
                    "person {} {}/{}: {outcome:?}",
                    u.person, u.service, u.action
                );
                outcomes.push(outcome);
            }
            emit(out, "tags.json", &outcomes)?;
            Ok(verdict(!outcomes.contains(&CheckOutcome::Invalid)))
        }
        AppsCmd::Count { fixture, csv } => {
            let fx: CountFixture = read_json(fixture)?;
            let (kps, roll) = issue_roll(fx.people, fx.cycle, seed)?;
            let votes = fx
                .upvotes
                .iter()
                .map(|v| {
                    let holder = kps
                        .get(v.person)
                        .ok_or_else(|| Error::InvalidArgument(format!("no person {}", v.person)))?;
                    Upvote::new(holder, &roll, &fx.post_id, &v.account)
                })
                .collect::<Result<Vec<_>>>()?;
            let counted = count_unique_upvotes(&fx.post_id, &votes, &roll);
            let row = CountRow {
                fixture_id: fx.fixture_id.clone(),
                persons: fx.people,
                accounts: fx
                    .upvotes
                    .iter()
                    .map(|v| v.account.as_str())
                    .collect::<HashSet<_>>()
                    .len(),
                counted,
            };
            let mut buf = Vec::new();
            write_count_csv(std::slice::from_ref(&row), &mut buf)?;
            out.write("count.csv", &buf)?;
            if let Some(path) = csv {
                std::fs::write(path, &buf)?;
            }
            let accounts = fx
                .upvotes
                .iter()
                .map(|v| v.account.as_str())
                .collect::<HashSet<_>>()
                .len();
            eprintln!(
                "{}: {} upvotes from {accounts} accounts count as {counted}",
                fx.fixture_id,
                votes.len()
            );
            if !out.quiet {
                println!("{counted}");
            }
            Ok(0)
        }
        AppsCmd::Sortition { fixture } => {
            let fx: SortitionFixture = read_json(fixture)?;
            let (_, roll) = issue_roll(fx.people, fx.cycle, seed)?;
            let beacon = hash_parts("popkit/beacon", &[fx.beacon.as_bytes()]);
            let result = sortition_select(&roll, &beacon, fx.k)?;
            eprintln!("selected {} of {}", result.k, roll.len());
            emit(out, "sortition.json", &result.selected)?;
            out.write(
                "sortition-full.json",
                to_canonical_string(&result)?.as_bytes(),
            )?;
            Ok(0)
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Ceremony(_) => "ceremony",
        Command::Federation(_) => "federation",
        Command::Sybilsim(_) => "sybilsim",
        Command::Apps(_) => "apps",
        Command::Replay { .. } => "replay",
    }
}

/// Argument list for the manifest: existing input files made absolute,
/// output-location flags dropped.
fn manifest_args(raw: &[String]) -> (Vec<String>, Vec<String>) {
    let mut args = Vec::new();
    let mut inputs = Vec::new();
    let mut it = raw.iter();
    while let Some(a) = it.next() {
        if a == "--out" || a == "--csv" {
            it.next();
            continue;
        }
        if a.starts_with("--out=") || a.starts_with("--csv=") {
            continue;
        }
        let p = Path::new(a);
        if !a.starts_with('-') && p.is_file() {
            let abs = std::fs::canonicalize(p)
                .map(|p| p.display().to_string())
                .unwrap_or_else(|_| a.clone());
            inputs.push(abs.clone());
            args.push(abs);
        } else {
            args.push(a.clone());
        }
    }
    (args, inputs)
}

fn replay(manifest_path: &Path) -> Result<u8> {
    let manifest: RunManifest = read_json(manifest_path)?;
    let dir = tempfile::tempdir()?;
    let mut argv = vec!["popkit".to_owned()];
    argv.extend(manifest.args.iter().cloned());
    argv.push("--out".into());
    argv.push(dir.path().display().to_string());
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(Error::InvalidArgument("cannot replay a replay".into()));
    }
    execute(&cli, &argv[1..], true)?;
    let rerun: RunManifest = read_json(&dir.path().join(MANIFEST_FILE))?;
    let mut same = true;
    for (name, digest) in &manifest.outputs {
        match rerun.outputs.get(name) {
            Some(d) if d == digest => eprintln!("{name}: identical"),
            Some(_) => {
                eprintln!("{name}: DIFFERS");
                same = false;
            }
            None => {
                eprintln!("{name}: missing from rerun");
                same = false;
            }
        }
    }
    println!(
        "{}",
        serde_json::json!({ "reproduced": same, "outputs": manifest.outputs.len() })
    );
    Ok(verdict(same))
}

fn execute(cli: &Cli, raw_args: &[String], quiet: bool) -> Result<u8> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest);
    }
    let mut out = Outputs::new(cli.out.clone(), quiet)?;
    let code = match &cli.command {
        Command::Ceremony(c) => ceremony(c, cli.seed, &mut out)?,
        Command::Federation(c) => federation(c, cli.seed, &mut out)?,
        Command::Sybilsim(a) => sybilsim(a, cli.seed, &mut out)?,
        Command::Apps(c) => apps(c, cli.seed, &mut out)?,
        Command::Replay { .. } => unreachable!(),
    };
    if let Some(dir) = &cli.out {
        let (args, inputs) = manifest_args(raw_args);
        let manifest = RunManifest {
            command: command_name(&cli.command).to_owned(),
            args,
            inputs,
            master_seed: cli.seed,
            out_dir: dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            outputs: out.files,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(dir.join(MANIFEST_FILE), text)?;
    }
    Ok(code)
}

/// Parses `argv` (including the program name) and runs; returns the exit
/// code instead of exiting.
pub fn run_from<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let raw: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(&cli, &raw, false) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

pub fn main() -> ExitCode {
    ExitCode::from(run_from(std::env::args_os()))
}
