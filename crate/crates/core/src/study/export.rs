//! Full RQ1-RQ4 run over a record set, and its on-disk tables.
//!
//! ```text
//! table1_descriptives.csv   table2_condition_kw.csv   table3_condition_pairwise.csv
//! table4_alignment.csv      table5_trait_distance.csv table6_cluster_kw.csv
//! table7_cluster_pairwise.csv  clusters.csv  k_selection.csv  within_cluster.csv
//! summary.json  audit.jsonl
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rq::{AuditEntry, CorrelationCell, OmnibusRow, PairwiseRow};
use super::{rq1, rq2, rq3, rq4, CaProfiles, Rq1Report, Rq2Report, Rq3Report, Rq4Report, StudyError, StudyRecord};
use crate::model::{Level, Trait};
use crate::stats::EffectKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub n_records: usize,
    pub seed: u64,
    pub ca_profiles: CaProfiles,
    pub cluster_features_standardized: bool,
    pub ols_reference_level: String,
    pub omnibus_effect: String,
    pub pairwise_effect: String,
    pub pairwise_correction: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub header: ReportHeader,
    pub rq1: Rq1Report,
    pub rq2: Rq2Report,
    pub rq3: Rq3Report,
    /// Absent when clustering is impossible; the reason is in `rq4_error`.
    pub rq4: Option<Rq4Report>,
    pub rq4_error: Option<String>,
}

impl StudyReport {
    /// Runs all four analyses. Clustering failures are reported, not fatal.
    pub fn analyze(records: &[StudyRecord], profiles: &CaProfiles, seed: u64) -> Result<Self, StudyError> {
        let (rq4_report, rq4_error) = match rq4(records, profiles, seed) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(StudyReport {
            header: ReportHeader {
                n_records: records.len(),
                seed,
                ca_profiles: profiles.clone(),
                cluster_features_standardized: true,
                ols_reference_level: Level::Low.as_str().into(),
                omnibus_effect: EffectKind::RankEtaSquared.label().into(),
                pairwise_effect: EffectKind::RFromZ.label().into(),
                pairwise_correction: "bonferroni over all pairs".into(),
            },
            rq1: rq1(records),
            rq2: rq2(records, profiles)?,
            rq3: rq3(records, profiles)?,
            rq4: rq4_report,
            rq4_error,
        })
    }

    pub fn audit(&self) -> Vec<&AuditEntry> {
        self.rq1
            .audit
            .iter()
            .chain(&self.rq2.audit)
            .chain(&self.rq3.audit)
            .chain(self.rq4.iter().flat_map(|r| &r.audit))
            .collect()
    }
}

fn f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}

fn fo(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<fs::File>, StudyError> {
    Ok(csv::Writer::from_path(dir.join(name))?)
}

fn omnibus_rows(w: &mut csv::Writer<fs::File>, rows: &[OmnibusRow]) -> Result<(), StudyError> {
    w.write_record(["measure", "n", "n_excluded", "h", "df", "p", "eta2", "sig", "note", "ref_h", "ref_p", "ref_eta2"])?;
    for o in rows {
        let r = o.result.as_ref();
        w.write_record([
            o.measure.label().to_string(),
            o.n.to_string(),
            o.n_excluded.to_string(),
            fo(r.map(|r| r.statistic)),
            fo(r.and_then(|r| r.df)),
            fo(r.map(|r| r.p_value)),
            fo(r.map(|r| r.effect_size)),
            o.stars.clone(),
            o.note.clone().unwrap_or_default(),
            fo(o.reference.map(|x| x.h)),
            fo(o.reference.and_then(|x| x.p)),
            fo(o.reference.map(|x| x.eta2)),
        ])?;
    }
    w.flush().map_err(|e| StudyError::Io("table".into(), e))
}

fn pairwise_rows(w: &mut csv::Writer<fs::File>, rows: &[PairwiseRow]) -> Result<(), StudyError> {
    w.write_record([
        "measure", "pair", "n_a", "n_b", "u", "u_min", "z", "p", "p_adj", "r", "higher", "sig", "omnibus_significant",
    ])?;
    for p in rows {
        w.write_record([
            p.measure.label().to_string(),
            p.pair.clone(),
            p.n_a.to_string(),
            p.n_b.to_string(),
            f(p.u),
            f(p.u_min),
            f(p.z),
            f(p.p),
            f(p.p_adj),
            f(p.r),
            p.higher.clone(),
            p.stars.clone(),
            p.omnibus_significant.to_string(),
        ])?;
    }
    w.flush().map_err(|e| StudyError::Io("table".into(), e))
}

fn corr_fields(c: &CorrelationCell) -> [String; 6] {
    [
        c.n.to_string(),
        c.n_excluded.to_string(),
        fo(c.rho),
        fo(c.p),
        c.stars.clone(),
        c.note.clone().unwrap_or_default(),
    ]
}

/// Writes every table plus `summary.json` and `audit.jsonl` into `dir`.
pub fn write_tables(report: &StudyReport, dir: impl AsRef<Path>) -> Result<(), StudyError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| StudyError::Io(dir.display().to_string(), e))?;
    let io = |e: std::io::Error| StudyError::Io(dir.display().to_string(), e);

    let mut w = writer(dir, "table1_descriptives.csv")?;
    w.write_record(["measure", "condition", "n", "mean", "sd", "median"])?;
    for m in &report.rq1.measures {
        for d in &m.descriptives {
            w.write_record([
                m.measure.label().to_string(),
                d.group.clone(),
                d.n.to_string(),
                fo(d.mean),
                fo(d.sd),
                fo(d.median),
            ])?;
        }
    }
    w.flush().map_err(io)?;

    let omni: Vec<OmnibusRow> = report.rq1.measures.iter().map(|m| m.omnibus.clone()).collect();
    omnibus_rows(&mut writer(dir, "table2_condition_kw.csv")?, &omni)?;
    let pairs: Vec<PairwiseRow> = report.rq1.measures.iter().flat_map(|m| m.pairwise.clone()).collect();
    pairwise_rows(&mut writer(dir, "table3_condition_pairwise.csv")?, &pairs)?;

    let mut w = writer(dir, "table4_alignment.csv")?;
    w.write_record([
        "measure", "n", "n_excluded", "rho", "p", "sig", "note", "ref_rho", "ols_n", "r2_step1", "r2_step2", "beta",
        "se_beta", "p_beta", "delta_r2", "f_change", "p_delta", "ols_note",
    ])?;
    for m in &report.rq2.measures {
        let o = m.ols.as_ref();
        let mut row = vec![m.measure.label().to_string()];
        row.extend(corr_fields(&m.spearman));
        row.push(f(m.reference_rho));
        row.extend([
            o.map(|o| o.n.to_string()).unwrap_or_default(),
            fo(o.map(|o| o.r2_step1)),
            fo(o.map(|o| o.r2_step2)),
            fo(o.map(|o| o.beta_alignment)),
            fo(o.map(|o| o.se_alignment)),
            fo(o.map(|o| o.p_beta)),
            fo(o.map(|o| o.delta_r2)),
            fo(o.map(|o| o.f_change)),
            fo(o.map(|o| o.p_delta)),
            m.ols_note.clone().unwrap_or_default(),
        ]);
        w.write_record(&row)?;
    }
    w.flush().map_err(io)?;

    let mut w = writer(dir, "table5_trait_distance.csv")?;
    w.write_record(["measure", "trait_distance", "n", "n_excluded", "rho", "p", "sig", "note", "ref_rho"])?;
    for c in &report.rq3.cells {
        let mut row = vec![c.measure.label().to_string(), c.trait_.name().to_string()];
        row.extend(corr_fields(&c.correlation));
        row.push(f(c.reference_rho));
        w.write_record(&row)?;
    }
    w.flush().map_err(io)?;

    if let Some(r4) = &report.rq4 {
        omnibus_rows(&mut writer(dir, "table6_cluster_kw.csv")?, &r4.omnibus)?;
        pairwise_rows(&mut writer(dir, "table7_cluster_pairwise.csv")?, &r4.pairwise)?;

        let mut w = writer(dir, "clusters.csv")?;
        let mut header = vec!["cluster".to_string(), "label".into(), "size".into()];
        header.extend(Trait::ALL.iter().map(|t| format!("{}_distance", t.key())));
        header.push("mean_alignment".into());
        header.extend(Level::ALL.iter().map(|l| format!("pct_{}", l.as_str())));
        w.write_record(&header)?;
        for c in &r4.clusters {
            let mut row = vec![format!("C{}", c.cluster_id), c.label.clone(), c.size.to_string()];
            row.extend(c.mean_distances.iter().map(|&d| f(d)));
            row.push(f(c.mean_alignment));
            row.extend(Level::ALL.iter().map(|l| f(c.condition_pct[l])));
            w.write_record(&row)?;
        }
        w.flush().map_err(io)?;

        let mut w = writer(dir, "k_selection.csv")?;
        w.write_record(["k", "silhouette", "inertia", "chosen"])?;
        for c in &r4.selection.candidates {
            w.write_record([c.k.to_string(), f(c.silhouette), f(c.inertia), (c.k == r4.k).to_string()])?;
        }
        w.flush().map_err(io)?;

        let mut w = writer(dir, "within_cluster.csv")?;
        w.write_record(["cluster", "label", "measure", "n", "n_excluded", "rho", "p", "sig", "note"])?;
        for wc in &r4.within_cluster {
            let mut row = vec![format!("C{}", wc.cluster_id), wc.label.clone(), wc.measure.label().to_string()];
            row.extend(corr_fields(&wc.correlation));
            w.write_record(&row)?;
        }
        w.flush().map_err(io)?;
    }

    let json = serde_json::to_string_pretty(report).map_err(|e| StudyError::Schema(e.to_string()))?;
    fs::write(dir.join("summary.json"), json).map_err(io)?;
    let mut audit = fs::File::create(dir.join("audit.jsonl")).map_err(io)?;
    for entry in report.audit() {
        let line = serde_json::to_string(entry).map_err(|e| StudyError::Schema(e.to_string()))?;
        writeln!(audit, "{line}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::synth::{archetype_population, planted_study, SynthConfig};

    #[test]
    fn tables_written() {
        let recs = planted_study(3, &SynthConfig::default());
        let rep = StudyReport::analyze(&recs, &CaProfiles::default(), 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_tables(&rep, dir.path()).unwrap();
        let lines = |name: &str| fs::read_to_string(dir.path().join(name)).unwrap().lines().count();
        assert_eq!(lines("table1_descriptives.csv"), 1 + 18);
        assert_eq!(lines("table2_condition_kw.csv"), 1 + 6);
        assert_eq!(lines("table3_condition_pairwise.csv"), 1 + 18);
        assert_eq!(lines("table4_alignment.csv"), 1 + 6);
        assert_eq!(lines("table5_trait_distance.csv"), 1 + 30);
        assert_eq!(lines("table6_cluster_kw.csv"), 1 + 6);
        assert_eq!(lines("audit.jsonl"), rep.audit().len());
        let again = StudyReport::analyze(&recs, &CaProfiles::default(), 7).unwrap();
        assert_eq!(serde_json::to_string(&rep).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn archetypes_recovered() {
        let (recs, truth) = archetype_population(11, 50);
        let r4 = rq4(&recs, &CaProfiles::default(), 1).unwrap();
        assert_eq!(r4.k, 3);
        assert!(crate::study::synth::recovery_rate(&r4.assignments, &truth) >= 0.95);
        let labels: Vec<&str> = r4.clusters.iter().map(|c| c.label.as_str()).collect();
        for want in ["Well-Aligned", "Globally-Misaligned", "Extraversion-Misaligned"] {
            assert!(labels.contains(&want), "{labels:?}");
        }
        let sizes: usize = r4.clusters.iter().map(|c| c.size).sum();
        assert_eq!(sizes, 150);
        for c in &r4.clusters {
            assert!((c.condition_pct.values().sum::<f64>() - 100.0).abs() < 1e-9);
        }
    }
}
