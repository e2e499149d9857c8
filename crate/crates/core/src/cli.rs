//! Command-line front end. `dispatch` parses argv and returns an exit code;
//! `run` does the work against caller-supplied I/O.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::gateway::{Backend, GatewayError, ProviderConfig, DEFAULT_API_KEY_ENV, DEFAULT_BASE_URL, DEFAULT_MODEL};
use crate::harness::{
    condition_fidelity, run_battery, validation_report, BatterySpec, HarnessError, ResultsStore, ValidationOptions,
    DEFAULT_CONDITION_RUNS,
};
use crate::keypack::{KeyPack, KeyPackError};
use crate::model::{alignment_score, trait_distances, Level, ModelError, Trait, TraitProfile, TraitScores};
use crate::prompt::{assemble_prompt, enumerate_profiles, PromptSpec};
use crate::psychometrics::{Inventory, PsychometricsError};
use crate::session::{chat_repl, default_script, simulate, write_transcript, SessionError};
use crate::study::synth::{planted_study, SynthConfig};
use crate::study::{ingest, write_csv, write_tables, CaProfiles, PerceptionKey, StudyError, StudyReport};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT: &str = "tmk-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("cannot access {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    KeyPack(#[from] KeyPackError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Psychometrics(#[from] PsychometricsError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Http,
    Mock,
}

#[derive(Debug, Parser)]
#[command(name = "tmk", version, about = "Trait Modulation Keys: personality-steered agents and alignment analytics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Chat-completions endpoint root.
    #[arg(long, global = true, default_value = DEFAULT_BASE_URL)]
    pub base_url: String,
    /// Model name sent with each request.
    #[arg(long, global = true, default_value = DEFAULT_MODEL)]
    pub model: String,
    /// Sampling temperature.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub temperature: f64,
    /// Force temperature 0 (smoke tests).
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Environment variable holding the API key.
    #[arg(long, global = true, default_value = DEFAULT_API_KEY_ENV)]
    pub api_key_env: String,
    /// Retries per request after the first attempt.
    #[arg(long, global = true, default_value_t = 3)]
    pub max_retries: u32,
    /// Concurrent requests during batch runs.
    #[arg(long, global = true, default_value_t = 8)]
    pub max_in_flight: usize,
    /// Key pack JSON; the bundled pack when omitted.
    #[arg(long, global = true)]
    pub pack: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = DEFAULT_OUT)]
    pub out: PathBuf,
    /// Seed for the mock provider and clustering.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Model backend: a live OpenAI-compatible endpoint or the offline mock.
    #[arg(long, global = true, value_enum, default_value_t = ProviderKind::Mock)]
    pub provider: ProviderKind,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the key pack, or show one key.
    Keys {
        /// Trait to show, e.g. `extraversion`.
        #[arg(long = "trait", requires = "level")]
        trait_: Option<Trait>,
        /// Level to show: low, medium or high.
        #[arg(long)]
        level: Option<Level>,
    },
    /// Assemble the system prompt for a profile.
    Prompt {
        /// Five-letter profile code in O C E A ES order, e.g. `HMLHM`.
        #[arg(long)]
        profile: TraitProfile,
    },
    /// Run the validation battery and write fidelity, reliability, MTMM and
    /// criterion reports.
    Validate {
        /// `all` for the 243 profiles, or comma-separated codes.
        #[arg(long, default_value = "all")]
        profiles: String,
        /// Inventory JSON files; the bundled three when omitted.
        #[arg(long = "inventory")]
        inventories: Vec<PathBuf>,
        /// Administrations per profile and inventory.
        #[arg(long, default_value_t = 1)]
        replicates: u32,
    },
    /// Repeated administrations under one profile, counting in-band scores.
    FidelityCondition {
        #[arg(long, default_value = "MMMMM")]
        profile: TraitProfile,
        #[arg(long, default_value_t = DEFAULT_CONDITION_RUNS)]
        runs: u32,
        /// 5-point trait inventory; Mini-IPIP when omitted.
        #[arg(long)]
        inventory: Option<PathBuf>,
    },
    /// Alignment between user trait scores and an agent profile.
    Align {
        /// User scores O,C,E,A,ES on the 1-5 scale.
        #[arg(long, value_delimiter = ',', required = true)]
        user: Vec<f64>,
        /// Agent profile code, e.g. `MMMMM`.
        #[arg(long)]
        agent: TraitProfile,
    },
    /// RQ1-RQ4 over a participant CSV.
    Analyze {
        /// Participant CSV.
        #[arg(long)]
        input: PathBuf,
        /// Agent profile per condition as `low=LLLLL,medium=MMMMM,high=HHHHH`.
        #[arg(long)]
        conditions: Option<String>,
    },
    /// Write a synthetic participant CSV with planted effects.
    Synth {
        #[arg(long, default_value_t = 50)]
        n_per_condition: usize,
        /// Identical conditions and no alignment effect.
        #[arg(long)]
        null: bool,
    },
    /// Interactive terminal chat with a steered agent.
    Chat {
        #[arg(long, default_value = "MMMMM")]
        profile: TraitProfile,
    },
    /// Headless scripted session with flow conformance and lint.
    Simulate {
        #[arg(long, default_value = "MMMMM")]
        profile: TraitProfile,
        /// User lines, one per line; a built-in script when omitted.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, default_value_t = 60)]
        max_turns: usize,
    },
}

impl GlobalArgs {
    pub fn backend(&self) -> Backend {
        match self.provider {
            ProviderKind::Mock => Backend::Mock { seed: self.seed },
            ProviderKind::Http => {
                let cfg = ProviderConfig {
                    base_url: self.base_url.clone(),
                    model_name: self.model.clone(),
                    temperature: self.temperature,
                    max_retries: self.max_retries,
                    api_key_env: self.api_key_env.clone(),
                    max_in_flight: self.max_in_flight,
                    ..ProviderConfig::default()
                };
                Backend::Http(if self.deterministic { cfg.deterministic() } else { cfg })
            }
        }
    }

    pub fn pack(&self) -> Result<KeyPack, CliError> {
        match &self.pack {
            Some(p) => Ok(KeyPack::from_json(&read(p)?, &p.display().to_string())?),
            None => Ok(KeyPack::bundled()),
        }
    }

    fn out_dir(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Io(self.out.display().to_string(), e))?;
        Ok(&self.out)
    }
}

fn read(p: &Path) -> Result<String, CliError> {
    fs::read_to_string(p).map_err(|e| CliError::Io(p.display().to_string(), e))
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io("output".into(), e)
}

fn parse_profiles(s: &str) -> Result<Vec<TraitProfile>, CliError> {
    if s.trim() == "all" {
        return Ok(enumerate_profiles());
    }
    Ok(s.split(',').map(TraitProfile::from_code).collect::<Result<_, _>>()?)
}

fn parse_conditions(s: &str) -> Result<CaProfiles, CliError> {
    let mut map = CaProfiles::default();
    for part in s.split(',') {
        let (level, code) = part
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("condition mapping `{part}` must look like low=LLLLL")))?;
        map.0.insert(level.trim().parse()?, TraitProfile::from_code(code)?);
    }
    Ok(map)
}

/// Executes a parsed command.
pub fn run(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Keys { trait_, level } => {
            let pack = g.pack()?;
            match (trait_, level) {
                (Some(t), Some(l)) => {
                    let key = pack.key(*t, *l);
                    writeln!(out, "{} {} ({})", t.name(), l, key.provenance.as_deref().unwrap_or("unspecified")).map_err(io)?;
                    writeln!(out, "\n{}\n", key.personality).map_err(io)?;
                    for cue in &key.style_cues {
                        writeln!(out, "- {cue}").map_err(io)?;
                    }
                }
                _ => {
                    writeln!(out, "pack {} ({} keys)", pack.pack_id, pack.len()).map_err(io)?;
                    for key in pack.keys() {
                        writeln!(
                            out,
                            "{:<20} {:<7} {:<14} {} cues",
                            key.trait_.key(),
                            key.level.as_str(),
                            key.provenance.as_deref().unwrap_or("-"),
                            key.style_cues.len()
                        )
                        .map_err(io)?;
                    }
                }
            }
        }
        Command::Prompt { profile } => {
            let pack = g.pack()?;
            write!(out, "{}", assemble_prompt(&PromptSpec::new(*profile, &pack))).map_err(io)?;
        }
        Command::Validate {
            profiles,
            inventories,
            replicates,
        } => {
            let pack = g.pack()?;
            let invs = if inventories.is_empty() {
                vec![Inventory::mini_ipip(), Inventory::ipip_markers(), Inventory::criteria_demo()]
            } else {
                inventories.iter().map(Inventory::load).collect::<Result<Vec<_>, _>>()?
            };
            let mut spec = BatterySpec::new(&pack, parse_profiles(profiles)?, invs.clone());
            spec.replicates = *replicates;
            let dir = g.out_dir()?;
            let store = ResultsStore::open(dir.join("store"))?;
            let run = run_battery(&g.backend(), &spec, &store)?;
            writeln!(out, "cells completed {}, skipped {}, failed {}", run.completed, run.skipped, run.failures.len())
                .map_err(io)?;
            for f in run.failures.iter().take(5) {
                writeln!(out, "  failed {} {} r{}: {}", f.profile, f.inventory_id, f.replicate, f.error).map_err(io)?;
            }
            if run.completed + run.skipped == 0 {
                let first = run.failures.first().map(|f| f.error.as_str()).unwrap_or("no cells to run");
                return Err(CliError::Failed(format!("every cell failed: {first}")));
            }
            let mut opts = ValidationOptions::default();
            if !invs.iter().any(|i| i.inventory_id == opts.fidelity_inventory) {
                opts.fidelity_inventory = invs[0].inventory_id.clone();
            }
            let report = validation_report(&store.load_cells()?, &invs, &opts)?;
            report.export(dir.join("report"))?;
            let fid = &report.fidelity;
            writeln!(
                out,
                "fidelity: {} / {} observations matched ({:.3}); mean rho {}",
                fid.n_matches,
                fid.n_observations,
                fid.match_rate,
                fid.mean_rho.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into())
            )
            .map_err(io)?;
            writeln!(
                out,
                "reference: {} / {} ({:.3}); mean rho {:.2}",
                fid.reference.matches, fid.reference.observations, fid.reference.match_rate, fid.reference.mean_rho
            )
            .map_err(io)?;
            if let Some(m) = &report.mtmm {
                writeln!(
                    out,
                    "mtmm: mean convergent r {}, mean delta {}",
                    m.mean_convergent_r.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into()),
                    m.mean_delta.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into())
                )
                .map_err(io)?;
            }
            if let Some(c) = &report.criterion {
                let ok = c.results.iter().filter(|r| r.satisfied).count();
                writeln!(out, "criterion: {ok} / {} expectations satisfied", c.results.len()).map_err(io)?;
            }
            writeln!(out, "reports written to {}", dir.join("report").display()).map_err(io)?;
            if !run.failures.is_empty() {
                return Err(HarnessError::CellsFailed(run.failures.len()).into());
            }
        }
        Command::FidelityCondition {
            profile,
            runs,
            inventory,
        } => {
            let pack = g.pack()?;
            let inv = match inventory {
                Some(p) => Inventory::load(p)?,
                None => Inventory::mini_ipip(),
            };
            let dir = g.out_dir()?;
            let store_dir = dir.join(format!("condition_{}", profile.code()));
            let rep = condition_fidelity(&g.backend(), &pack, *profile, *runs, &inv, &store_dir)?;
            writeln!(
                out,
                "{}: {} / {} trait scores in the targeted band ({:.3})",
                profile, rep.in_band, rep.n_observations, rep.in_band_rate
            )
            .map_err(io)?;
            for (t, n) in &rep.per_trait_in_band {
                writeln!(out, "  {:<20} {n} / {}", t.name(), rep.n_runs).map_err(io)?;
            }
            let path = dir.join(format!("condition_{}.json", profile.code()));
            fs::write(&path, serde_json::to_string_pretty(&rep)?)
                .map_err(|e| CliError::Io(path.display().to_string(), e))?;
        }
        Command::Align { user, agent } => {
            let arr: [f64; 5] = user
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage("--user takes exactly five scores".into()))?;
            let p = TraitScores::new(arr)?;
            writeln!(out, "alignment {:.6}", alignment_score(&p, agent)).map_err(io)?;
            for (t, d) in Trait::ALL.iter().zip(trait_distances(&p, agent)) {
                writeln!(out, "  {:<20} distance {d:.4}", t.name()).map_err(io)?;
            }
        }
        Command::Analyze { input, conditions } => {
            let profiles = match conditions {
                Some(s) => parse_conditions(s)?,
                None => CaProfiles::default(),
            };
            let ing = ingest(input, &PerceptionKey::default())?;
            for d in &ing.rejected {
                writeln!(out, "rejected line {}: {}", d.line, d.message).map_err(io)?;
            }
            let report = StudyReport::analyze(&ing.records, &profiles, g.seed)?;
            let dir = g.out_dir()?;
            write_tables(&report, dir)?;
            writeln!(out, "{} records analysed, {} rejected", ing.records.len(), ing.rejected.len()).map_err(io)?;
            for m in &report.rq1.measures {
                if let Some(r) = &m.omnibus.result {
                    writeln!(
                        out,
                        "  {:<20} H = {:.3}, p = {:.4}, eta2 = {:.3} {}",
                        m.measure.label(),
                        r.statistic,
                        r.p_value,
                        r.effect_size,
                        m.omnibus.stars
                    )
                    .map_err(io)?;
                }
            }
            match (&report.rq4, &report.rq4_error) {
                (Some(r4), _) => {
                    let sizes: Vec<String> = r4.clusters.iter().map(|c| format!("{} n={}", c.label, c.size)).collect();
                    writeln!(out, "clusters (k={}, silhouette {:.3}): {}", r4.k, r4.silhouette, sizes.join("; "))
                        .map_err(io)?;
                }
                (None, Some(e)) => writeln!(out, "clustering skipped: {e}").map_err(io)?,
                (None, None) => {}
            }
            writeln!(out, "tables written to {}", dir.display()).map_err(io)?;
        }
        Command::Synth { n_per_condition, null } => {
            let cfg = if *null {
                SynthConfig::null(*n_per_condition)
            } else {
                SynthConfig {
                    n_per_condition: *n_per_condition,
                    ..SynthConfig::default()
                }
            };
            let records = planted_study(g.seed, &cfg);
            let path = g.out_dir()?.join("synthetic.csv");
            let f = fs::File::create(&path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            write_csv(&records, f, &PerceptionKey::default())?;
            writeln!(out, "{} records written to {}", records.len(), path.display()).map_err(io)?;
        }
        Command::Chat { profile } => {
            let pack = g.pack()?;
            let prompt = assemble_prompt(&PromptSpec::new(*profile, &pack));
            let provider = g.backend().provider(*profile, 0)?;
            let transcript = chat_repl(provider.as_ref(), &prompt, input, &mut *out)?;
            let path = g.out_dir()?.join("chat_transcript.jsonl");
            let f = fs::File::create(&path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            write_transcript(f, &transcript)?;
        }
        Command::Simulate {
            profile,
            script,
            max_turns,
        } => {
            let pack = g.pack()?;
            let prompt = assemble_prompt(&PromptSpec::new(*profile, &pack));
            let lines = match script {
                Some(p) => read(p)?.lines().filter(|l| !l.trim().is_empty()).map(str::to_string).collect(),
                None => default_script(),
            };
            let provider = g.backend().provider(*profile, 0)?;
            let outcome = simulate(provider.as_ref(), &prompt, &lines, *max_turns)?;
            let dir = g.out_dir()?;
            let path = dir.join("transcript.jsonl");
            let f = fs::File::create(&path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            write_transcript(f, &outcome.transcript)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&outcome.summary)?).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `argv` (including the program name) and runs it. Returns the
/// process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn dispatch<I, T>(argv: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match run(&cli, input, out) {
        Ok(()) => 0,
        // reader went away, e.g. `tmk keys | head`
        Err(CliError::Io(_, e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let _ = writeln!(err, "  caused by: {s}");
                source = s.source();
            }
            if matches!(e, CliError::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut input: &[u8] = b"";
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("tmk").chain(args.iter().copied());
        let code = dispatch(argv, &mut input, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn align_identity() {
        let (code, out, _) = call(&["align", "--user", "3,3,3,3,3", "--agent", "MMMMM"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("alignment 1.000000"), "{out}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["align", "--user", "3,3", "--agent", "MMMMM"]).0, 2);
        assert_eq!(call(&["prompt", "--profile", "XYZ"]).0, 2);
        assert_eq!(call(&["--bogus"]).0, 2);
        let (code, _, err) = call(&["analyze", "--input", "/definitely/missing.csv", "--out", "/tmp"]);
        assert_eq!(code, 1);
        assert!(err.contains("missing.csv"));
    }

    #[test]
    fn help_lists_flags() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        for flag in ["--base-url", "--model", "--temperature", "--pack", "--out", "--seed", "--provider", "--deterministic"] {
            assert!(out.contains(flag), "{flag}");
        }
    }

    #[test]
    fn keys_and_prompt() {
        let (code, out, _) = call(&["keys"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 16);
        let (code, out, _) = call(&["prompt", "--profile", "HHHHH"]);
        assert_eq!(code, 0);
        assert!(out.contains("<Key trait=\"agreeableness\" level=\"high\">"));
        let (code, out, _) = call(&["keys", "--trait", "extraversion", "--level", "low"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("Extraversion low"));
    }

    #[test]
    fn http_without_key_fails_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let (code, _, err) = call(&[
            "simulate",
            "--provider",
            "http",
            "--api-key-env",
            "TMK_SURELY_UNSET_KEY",
            "--out",
            out,
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("TMK_SURELY_UNSET_KEY"), "{err}");
    }
}
