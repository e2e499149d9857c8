//! Reports computed from a results store. Timestamps never enter a report,
//! so recomputing from the same store is bit-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fidelity::{fidelity, observe, FidelityObservation, FidelityReport};
use super::store::CellRecord;
use super::HarnessError;
use crate::model::TraitProfile;
use crate::psychometrics::validity::{REFERENCE_MAX_NONTARGET_R, REFERENCE_MEAN_CONVERGENT_R, REFERENCE_MEAN_DELTA};
use crate::psychometrics::{
    criterion_validity, default_expectations, mtmm, subscale_reliability, trait_scores, CriterionReport, Expectation,
    Inventory, ItemMatrix, MtmmReport, ReliabilityReport, OMEGA_ESTIMATOR,
};

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// 5-point trait inventory scored for control fidelity.
    pub fidelity_inventory: String,
    /// Second trait instrument for the multi-trait multi-method check.
    pub second_method: Option<String>,
    pub criteria_inventory: Option<String>,
    pub expectations: Vec<Expectation>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            fidelity_inventory: "mini-ipip".into(),
            second_method: Some("ipip-markers-10".into()),
            criteria_inventory: Some("criteria-demo".into()),
            expectations: default_expectations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtmmReference {
    pub mean_convergent_r: f64,
    pub mean_delta: f64,
    pub max_nontarget_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub fidelity: FidelityReport,
    pub reliability: BTreeMap<String, ReliabilityReport>,
    pub mtmm: Option<MtmmReport>,
    pub mtmm_reference: MtmmReference,
    pub criterion: Option<CriterionReport>,
    #[serde(skip)]
    pub observations: Vec<FidelityObservation>,
}

type CellKey = (String, u32);

fn by_inventory<'a>(cells: &'a [CellRecord], id: &str) -> BTreeMap<CellKey, &'a CellRecord> {
    cells
        .iter()
        .filter(|c| c.inventory_id == id)
        .map(|c| ((c.profile.clone(), c.replicate), c))
        .collect()
}

/// Keyed item matrix for one subscale across all cells of an inventory.
pub fn keyed_matrix(inv: &Inventory, subscale: &str, cells: &[&CellRecord]) -> Result<ItemMatrix, HarnessError> {
    let items: Vec<_> = inv.items_of(subscale).collect();
    let rows = cells
        .iter()
        .filter_map(|c| {
            items
                .iter()
                .map(|it| {
                    c.answers.get(&it.id).map(|&raw| {
                        let v = if it.reverse { inv.scale_max + 1 - raw } else { raw };
                        f64::from(v)
                    })
                })
                .collect::<Option<Vec<f64>>>()
        })
        .collect();
    Ok(ItemMatrix::new(items.iter().map(|i| i.id.clone()).collect(), rows)?)
}

/// Rows present under both inventories, in key order.
fn paired<'a>(
    primary: &BTreeMap<CellKey, &CellRecord>,
    other: &BTreeMap<CellKey, &'a CellRecord>,
) -> (Vec<[f64; 5]>, Vec<&'a CellRecord>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (key, cell) in primary {
        if let (Some(o), Some(p)) = (other.get(key), trait_scores(&cell.scores)) {
            a.push(p.as_array());
            b.push(*o);
        }
    }
    (a, b)
}

pub fn validation_report(
    cells: &[CellRecord],
    inventories: &[Inventory],
    opts: &ValidationOptions,
) -> Result<ValidationReport, HarnessError> {
    let primary = by_inventory(cells, &opts.fidelity_inventory);
    if primary.is_empty() {
        return Err(HarnessError::MissingInventory(opts.fidelity_inventory.clone()));
    }
    let mut observations = Vec::new();
    for ((code, _), cell) in &primary {
        let profile = TraitProfile::from_code(code).map_err(|e| HarnessError::Store(e.to_string()))?;
        let scores = trait_scores(&cell.scores)
            .ok_or_else(|| HarnessError::Store(format!("cell {code} lacks five trait scores")))?;
        observations.extend(observe(profile, &scores));
    }

    let mut reliability = BTreeMap::new();
    for inv in inventories {
        let inv_cells: Vec<&CellRecord> = by_inventory(cells, &inv.inventory_id).into_values().collect();
        if inv_cells.is_empty() {
            continue;
        }
        let subscales = inv
            .subscales()
            .into_iter()
            .map(|s| Ok(subscale_reliability(s, &keyed_matrix(inv, s, &inv_cells)?)))
            .collect::<Result<Vec<_>, HarnessError>>()?;
        reliability.insert(
            inv.inventory_id.clone(),
            ReliabilityReport {
                omega_estimator: OMEGA_ESTIMATOR.into(),
                subscales,
            },
        );
    }

    let mtmm_report = match &opts.second_method {
        Some(id) => {
            let second = by_inventory(cells, id);
            let (a, b) = paired(&primary, &second);
            let b: Vec<[f64; 5]> = b.iter().filter_map(|c| trait_scores(&c.scores)).map(|s| s.as_array()).collect();
            if a.len() == b.len() && a.len() >= 3 {
                Some(mtmm(&a, &b)?)
            } else {
                None
            }
        }
        None => None,
    };

    let criterion = match &opts.criteria_inventory {
        Some(id) => {
            let crit = by_inventory(cells, id);
            let (a, b) = paired(&primary, &crit);
            if a.len() >= 3 {
                let mut cols: BTreeMap<String, Vec<f64>> = BTreeMap::new();
                for name in b[0].scores.keys() {
                    if b.iter().all(|c| c.scores.contains_key(name)) {
                        cols.insert(name.clone(), b.iter().map(|c| c.scores[name]).collect());
                    }
                }
                Some(criterion_validity(&a, &cols, &opts.expectations)?)
            } else {
                None
            }
        }
        None => None,
    };

    Ok(ValidationReport {
        fidelity: fidelity(&observations),
        reliability,
        mtmm: mtmm_report,
        mtmm_reference: MtmmReference {
            mean_convergent_r: REFERENCE_MEAN_CONVERGENT_R,
            mean_delta: REFERENCE_MEAN_DELTA,
            max_nontarget_r: REFERENCE_MAX_NONTARGET_R,
        },
        criterion,
        observations,
    })
}

impl ValidationReport {
    /// Writes `observations.csv`, `reliability.csv`, and `report.json`.
    pub fn export(&self, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(dir.display().to_string(), e))?;
        let csv_err = |e: csv::Error| HarnessError::Store(e.to_string());

        let mut w = csv::Writer::from_path(dir.join("observations.csv")).map_err(csv_err)?;
        for o in &self.observations {
            w.serialize(o).map_err(csv_err)?;
        }
        w.flush().map_err(|e| HarnessError::Io("observations.csv".into(), e))?;

        let mut w = csv::Writer::from_path(dir.join("reliability.csv")).map_err(csv_err)?;
        w.write_record(["inventory", "subscale", "n_items", "n_observations", "alpha", "omega", "lambda6", "lambda6_pinv"])
            .map_err(csv_err)?;
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for (inv, rep) in &self.reliability {
            for s in &rep.subscales {
                w.write_record([
                    inv.clone(),
                    s.subscale.clone(),
                    s.n_items.to_string(),
                    s.n_observations.to_string(),
                    fmt(s.alpha),
                    fmt(s.omega),
                    fmt(s.lambda6),
                    s.lambda6_pseudo_inverse.to_string(),
                ])
                .map_err(csv_err)?;
            }
        }
        w.flush().map_err(|e| HarnessError::Io("reliability.csv".into(), e))?;

        let json = serde_json::to_string_pretty(self).map_err(|e| HarnessError::Store(e.to_string()))?;
        let path = dir.join("report.json");
        fs::write(&path, json).map_err(|e| HarnessError::Io(path.display().to_string(), e))
    }
}
