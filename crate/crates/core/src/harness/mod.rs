//! The validation battery: run profiles through a provider, persist every
//! answer, and compute control fidelity, reliability and validity from the
//! stored cells.

pub mod fidelity;
pub mod report;
pub mod store;

use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::gateway::{administer_inventory, Backend, ChatProvider, GatewayError};
use crate::keypack::KeyPack;
use crate::model::{Trait, TraitProfile};
use crate::prompt::{assemble_prompt, PromptSpec, TaskSections};
use crate::psychometrics::{score_sheet, trait_scores, Inventory, PsychometricsError};

pub use fidelity::{
    fidelity, observe, summarize_condition, ConditionFidelity, FidelityObservation, FidelityReport, MissKind,
    TraitFidelity, CLOSE_MISS_THRESHOLD,
};
pub use report::{validation_report, ValidationOptions, ValidationReport};
pub use store::{CellFailure, CellRecord, Manifest, Provenance, ResultsStore};

/// Runs per condition for the condition-fidelity check; a power analysis in
/// the original study asked for at least 39.
pub const DEFAULT_CONDITION_RUNS: u32 = 40;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("results store: {0}")]
    Store(String),
    #[error("battery needs at least one profile")]
    NoProfiles,
    #[error("battery needs a 5-point inventory covering all five traits")]
    NoTraitInventory,
    #[error("inventory `{0}` is not among the stored cells")]
    MissingInventory(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Psychometrics(#[from] PsychometricsError),
    #[error("{0} cell(s) failed; see failures.jsonl")]
    CellsFailed(usize),
}

/// What to run: profiles x inventories x replicates.
#[derive(Debug, Clone)]
pub struct BatterySpec<'a> {
    pub pack: &'a KeyPack,
    pub sections: TaskSections,
    pub profiles: Vec<TraitProfile>,
    pub inventories: Vec<Inventory>,
    pub replicates: u32,
}

impl<'a> BatterySpec<'a> {
    pub fn new(pack: &'a KeyPack, profiles: Vec<TraitProfile>, inventories: Vec<Inventory>) -> Self {
        BatterySpec {
            pack,
            sections: TaskSections::default(),
            profiles,
            inventories,
            replicates: 1,
        }
    }

    fn check(&self) -> Result<(), HarnessError> {
        if self.profiles.is_empty() {
            return Err(HarnessError::NoProfiles);
        }
        let covers_traits = |inv: &Inventory| {
            inv.scale_max == 5
                && Trait::ALL.iter().all(|t| {
                    inv.subscales()
                        .iter()
                        .any(|s| Trait::from_subscale(s).is_some_and(|(x, _)| x == *t))
                })
        };
        if !self.inventories.iter().any(covers_traits) {
            return Err(HarnessError::NoTraitInventory);
        }
        Ok(())
    }
}

/// Recorded alongside every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunInfo {
    pub model: String,
    pub backend: String,
    pub seed: u64,
}

impl RunInfo {
    pub fn for_backend(backend: &Backend) -> Self {
        let (desc, seed) = match backend {
            Backend::Http(cfg) => (format!("http:{}", cfg.base_url), 0),
            Backend::Mock { seed } => ("mock".to_string(), *seed),
        };
        RunInfo {
            model: backend.model_name(),
            backend: desc,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryRun {
    pub manifest: Manifest,
    pub completed: usize,
    pub skipped: usize,
    pub failures: Vec<CellFailure>,
}

pub fn run_battery(backend: &Backend, spec: &BatterySpec<'_>, store: &ResultsStore) -> Result<BatteryRun, HarnessError> {
    let factory = |p: TraitProfile, r: u32| backend.provider(p, r);
    run_battery_with(&factory, &RunInfo::for_backend(backend), backend.max_in_flight(), spec, store)
}

type Factory<'f> = dyn Fn(TraitProfile, u32) -> Result<Box<dyn ChatProvider>, GatewayError> + Sync + 'f;

/// Like [`run_battery`] with a caller-supplied provider factory. Cells
/// already present in the store are skipped without building a provider.
pub fn run_battery_with(
    factory: &Factory<'_>,
    info: &RunInfo,
    max_in_flight: usize,
    spec: &BatterySpec<'_>,
    store: &ResultsStore,
) -> Result<BatteryRun, HarnessError> {
    spec.check()?;
    let manifest = store.write_manifest(&Manifest {
        model: info.model.clone(),
        backend: info.backend.clone(),
        pack_id: spec.pack.pack_id.clone(),
        seed: info.seed,
        replicates: spec.replicates,
        profiles: spec.profiles.iter().map(TraitProfile::code).collect(),
        inventories: spec.inventories.iter().map(|i| i.inventory_id.clone()).collect(),
        created_unix_ms: store::now_ms(),
    })?;

    let mut cells = Vec::new();
    for rep in 0..spec.replicates {
        for p in &spec.profiles {
            for inv in &spec.inventories {
                cells.push((*p, inv, rep));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(max_in_flight.max(1))
        .build()
        .map_err(|e| HarnessError::Store(format!("thread pool: {e}")))?;

    enum Outcome {
        Skipped,
        Done,
        Failed(CellFailure),
    }
    let outcomes: Vec<Result<Outcome, HarnessError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(profile, inv, rep)| {
                let code = profile.code();
                if store.has_cell(&code, &inv.inventory_id, rep) {
                    return Ok(Outcome::Skipped);
                }
                let fail = |e: String| {
                    Outcome::Failed(CellFailure {
                        profile: code.clone(),
                        inventory_id: inv.inventory_id.clone(),
                        replicate: rep,
                        error: e,
                    })
                };
                let started = store::now_ms();
                let provider = match factory(profile, rep) {
                    Ok(p) => p,
                    Err(e) => return Ok(fail(e.to_string())),
                };
                let prompt = assemble_prompt(&PromptSpec {
                    profile,
                    pack: spec.pack,
                    sections: spec.sections.clone(),
                });
                let sheet = match administer_inventory(provider.as_ref(), &prompt, inv) {
                    Ok(s) => s,
                    Err(e) => return Ok(fail(e.to_string())),
                };
                let scores = score_sheet(inv, &sheet)?;
                store.write_cell(&CellRecord {
                    profile: code.clone(),
                    inventory_id: inv.inventory_id.clone(),
                    replicate: rep,
                    answers: sheet.answers,
                    scores,
                    provenance: Provenance {
                        model: info.model.clone(),
                        provider: provider.describe(),
                        pack_id: spec.pack.pack_id.clone(),
                        seed: info.seed,
                        started_unix_ms: started,
                        finished_unix_ms: store::now_ms(),
                    },
                })?;
                Ok(Outcome::Done)
            })
            .collect()
    });

    let (mut completed, mut skipped, mut failures) = (0, 0, Vec::new());
    for o in outcomes {
        match o? {
            Outcome::Skipped => skipped += 1,
            Outcome::Done => completed += 1,
            Outcome::Failed(f) => failures.push(f),
        }
    }
    store.write_failures(&failures)?;
    Ok(BatteryRun {
        manifest,
        completed,
        skipped,
        failures,
    })
}

/// Administers `inventory` `n_runs` times under one profile and reports how
/// many trait scores landed in the targeted band.
pub fn condition_fidelity(
    backend: &Backend,
    pack: &KeyPack,
    profile: TraitProfile,
    n_runs: u32,
    inventory: &Inventory,
    store_dir: impl AsRef<Path>,
) -> Result<ConditionFidelity, HarnessError> {
    if n_runs == 0 {
        return Err(HarnessError::Store("n_runs must be at least 1".into()));
    }
    let store = ResultsStore::open(store_dir)?;
    let mut spec = BatterySpec::new(pack, vec![profile], vec![inventory.clone()]);
    spec.replicates = n_runs;
    let run = run_battery(backend, &spec, &store)?;
    if !run.failures.is_empty() {
        return Err(HarnessError::CellsFailed(run.failures.len()));
    }
    let code = profile.code();
    let runs: Vec<_> = store
        .load_cells()?
        .into_iter()
        .filter(|c| c.profile == code && c.inventory_id == inventory.inventory_id && c.replicate < n_runs)
        .filter_map(|c| trait_scores(&c.scores))
        .collect();
    Ok(summarize_condition(profile, &runs))
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::gateway::MockProvider;
    use crate::model::Level;

    #[test]
    fn one_profile_two_inventories_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultsStore::open(dir.path()).unwrap();
        let pack = KeyPack::bundled();
        let spec = BatterySpec::new(
            &pack,
            vec![TraitProfile::from_code("LMHLM").unwrap()],
            vec![Inventory::mini_ipip(), Inventory::ipip_markers()],
        );
        let calls = AtomicUsize::new(0);
        let factory = |p: TraitProfile, r: u32| -> Result<Box<dyn ChatProvider>, GatewayError> {
            calls.fetch_add(1, Ordering::SeqCst);
            Ok(Box::new(MockProvider::new(p, r as u64)))
        };
        let info = RunInfo {
            model: "mock".into(),
            backend: "mock".into(),
            seed: 0,
        };
        let run = run_battery_with(&factory, &info, 2, &spec, &store).unwrap();
        assert_eq!((run.completed, run.skipped), (2, 0));
        assert_eq!(store.load_cells().unwrap().len(), 2);
        assert_eq!(calls.load(Ordering::SeqCst), 2);

        let again = run_battery_with(&factory, &info, 2, &spec, &store).unwrap();
        assert_eq!((again.completed, again.skipped), (0, 2));
        assert_eq!(calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn failures_are_recorded_and_battery_continues() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultsStore::open(dir.path()).unwrap();
        let pack = KeyPack::bundled();
        let spec = BatterySpec::new(
            &pack,
            vec![TraitProfile::uniform(Level::Low), TraitProfile::uniform(Level::High)],
            vec![Inventory::mini_ipip()],
        );
        let factory = |p: TraitProfile, _r: u32| -> Result<Box<dyn ChatProvider>, GatewayError> {
            if p.level(Trait::Openness) == Level::High {
                Err(GatewayError::EmptyCompletion)
            } else {
                Ok(Box::new(MockProvider::new(p, 1)))
            }
        };
        let info = RunInfo {
            model: "m".into(),
            backend: "b".into(),
            seed: 0,
        };
        let run = run_battery_with(&factory, &info, 1, &spec, &store).unwrap();
        assert_eq!(run.completed, 1);
        assert_eq!(run.failures.len(), 1);
        assert_eq!(store.load_failures().unwrap(), run.failures);
    }

    #[test]
    fn spec_preconditions() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultsStore::open(dir.path()).unwrap();
        let pack = KeyPack::bundled();
        let backend = Backend::Mock { seed: 1 };
        let spec = BatterySpec::new(&pack, vec![], vec![Inventory::mini_ipip()]);
        assert!(matches!(run_battery(&backend, &spec, &store), Err(HarnessError::NoProfiles)));
        let spec = BatterySpec::new(&pack, vec![TraitProfile::uniform(Level::Low)], vec![Inventory::criteria_demo()]);
        assert!(matches!(run_battery(&backend, &spec, &store), Err(HarnessError::NoTraitInventory)));
    }

    #[test]
    fn condition_single_run() {
        let dir = tempfile::tempdir().unwrap();
        let c = condition_fidelity(
            &Backend::Mock { seed: 3 },
            &KeyPack::bundled(),
            TraitProfile::uniform(Level::Medium),
            1,
            &Inventory::mini_ipip(),
            dir.path(),
        )
        .unwrap();
        assert_eq!(c.n_observations, 5);
        assert_eq!(c.in_band, 5);
    }
}
