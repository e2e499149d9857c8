//! RQ1 condition effects, RQ2 alignment, RQ3 per-trait distances, RQ4
//! alignment clusters. Every table cell comes from one stats call, logged
//! in the report's audit trail.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::reference::{self, OmnibusRef};
use super::{CaProfiles, Measure, StudyError, StudyRecord};
use crate::model::{alignment_score, trait_distances, Level, Trait};
use crate::stats::{
    bonferroni, hierarchical_ols, kmeans, kruskal_wallis, mann_whitney, mean, median, sample_sd, select_k,
    spearman, stars, GroupedSample, HierarchicalOls, KSelection, TestResult,
};

/// Largest k tried during cluster selection.
pub const MAX_K: usize = 8;
pub const MIN_CLUSTER_RECORDS: usize = 10;
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub table: String,
    pub row: String,
    pub call: String,
    pub n: usize,
}

#[derive(Debug, Default)]
struct Audit(Vec<AuditEntry>);

impl Audit {
    fn log(&mut self, table: &str, row: impl Into<String>, call: &str, n: usize) {
        self.0.push(AuditEntry {
            table: table.into(),
            row: row.into(),
            call: call.into(),
            n,
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptive {
    pub group: String,
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmnibusRow {
    pub measure: Measure,
    pub n: usize,
    pub n_excluded: usize,
    pub result: Option<TestResult>,
    pub stars: String,
    pub note: Option<String>,
    pub reference: Option<OmnibusRef>,
}

impl OmnibusRow {
    pub fn significant(&self) -> bool {
        self.result.as_ref().is_some_and(|r| r.p_value < ALPHA)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseRow {
    pub measure: Measure,
    pub pair: String,
    pub n_a: usize,
    pub n_b: usize,
    /// U counted for the first-named group.
    pub u: f64,
    pub u_min: f64,
    pub z: f64,
    pub p: f64,
    pub p_adj: f64,
    pub r: f64,
    /// Group with the higher rank mass, or `tie`.
    pub higher: String,
    pub stars: String,
    /// Whether the omnibus test for this measure was significant.
    pub omnibus_significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq1Measure {
    pub measure: Measure,
    pub descriptives: Vec<Descriptive>,
    pub omnibus: OmnibusRow,
    pub pairwise: Vec<PairwiseRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq1Report {
    pub n_records: usize,
    pub measures: Vec<Rq1Measure>,
    pub audit: Vec<AuditEntry>,
}

impl Rq1Report {
    pub fn measure(&self, m: Measure) -> &Rq1Measure {
        &self.measures[m.index()]
    }
}

impl Rq1Measure {
    pub fn pair(&self, pair: &str) -> Option<&PairwiseRow> {
        self.pairwise.iter().find(|p| p.pair == pair)
    }
}

fn describe(group: &str, xs: &[f64]) -> Descriptive {
    let opt = |v: f64| v.is_finite().then_some(v);
    Descriptive {
        group: group.into(),
        n: xs.len(),
        mean: (!xs.is_empty()).then(|| mean(xs)),
        sd: opt(sample_sd(xs)),
        median: opt(median(xs)),
    }
}

/// Omnibus Kruskal-Wallis plus Bonferroni-adjusted pairwise Mann-Whitney
/// over the non-empty groups, in the order given.
fn compare_groups(
    measure: Measure,
    groups: &[(String, Vec<f64>)],
    n_excluded: usize,
    reference: Option<OmnibusRef>,
    tables: (&str, &str),
    audit: &mut Audit,
) -> (OmnibusRow, Vec<PairwiseRow>) {
    let present: Vec<(String, Vec<f64>)> = groups.iter().filter(|(_, v)| !v.is_empty()).cloned().collect();
    let n: usize = present.iter().map(|(_, v)| v.len()).sum();
    let (result, note) = if present.len() < 2 {
        (None, Some(format!("{} populated group(s); need two", present.len())))
    } else {
        audit.log(tables.0, measure.label(), "kruskal_wallis", n);
        match GroupedSample::new(present.clone()).and_then(|g| kruskal_wallis(&g)) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let omnibus = OmnibusRow {
        measure,
        n,
        n_excluded,
        stars: result.as_ref().map(|r| stars(r.p_value).to_string()).unwrap_or_default(),
        result,
        note,
        reference,
    };

    let mut raw = Vec::new();
    for i in 0..present.len() {
        for j in i + 1..present.len() {
            let (la, a) = &present[i];
            let (lb, b) = &present[j];
            let pair = format!("{la} vs {lb}");
            audit.log(tables.1, format!("{} {pair}", measure.label()), "mann_whitney", a.len() + b.len());
            if let Ok(mw) = mann_whitney(a, b) {
                raw.push((pair, la.clone(), lb.clone(), mw));
            }
        }
    }
    let m = present.len() * present.len().saturating_sub(1) / 2;
    let adjusted = bonferroni(&raw.iter().map(|r| r.3.p_value()).collect::<Vec<_>>(), m);
    let omnibus_significant = omnibus.significant();
    let pairwise = raw
        .into_iter()
        .zip(adjusted)
        .map(|((pair, la, lb, mw), p_adj)| {
            let half = mw.test.group_sizes[0] as f64 * mw.test.group_sizes[1] as f64 / 2.0;
            let higher = if mw.u_a > half {
                la
            } else if mw.u_a < half {
                lb
            } else {
                "tie".into()
            };
            PairwiseRow {
                measure,
                pair,
                n_a: mw.test.group_sizes[0],
                n_b: mw.test.group_sizes[1],
                u: mw.u_a,
                u_min: mw.u,
                z: mw.z,
                p: mw.p_value(),
                p_adj,
                r: mw.r(),
                higher,
                stars: stars(p_adj).to_string(),
                omnibus_significant,
            }
        })
        .collect();
    (omnibus, pairwise)
}

fn split<K: Ord + Copy>(
    records: &[StudyRecord],
    keys: &[K],
    key_of: impl Fn(usize, &StudyRecord) -> K,
    m: Measure,
) -> (BTreeMap<K, Vec<f64>>, usize) {
    let mut groups: BTreeMap<K, Vec<f64>> = keys.iter().map(|&k| (k, Vec::new())).collect();
    let mut excluded = 0;
    for (i, r) in records.iter().enumerate() {
        match r.perception(m) {
            Some(v) => groups.entry(key_of(i, r)).or_default().push(v),
            None => excluded += 1,
        }
    }
    (groups, excluded)
}

/// Condition effects: descriptives, Kruskal-Wallis, and pairwise tests.
pub fn rq1(records: &[StudyRecord]) -> Rq1Report {
    let mut audit = Audit::default();
    let measures = Measure::ALL
        .into_iter()
        .map(|m| {
            let (groups, excluded) = split(records, &Level::ALL, |_, r| r.condition, m);
            let labelled: Vec<(String, Vec<f64>)> =
                groups.into_iter().map(|(l, v)| (l.as_str().to_string(), v)).collect();
            let descriptives = labelled.iter().map(|(l, v)| describe(l, v)).collect();
            for (l, v) in &labelled {
                audit.log("table1", format!("{} {l}", m.label()), "mean_sd", v.len());
            }
            let (omnibus, pairwise) = compare_groups(
                m,
                &labelled,
                excluded,
                Some(reference::condition_kw(m)),
                ("table2", "table3"),
                &mut audit,
            );
            Rq1Measure {
                measure: m,
                descriptives,
                omnibus,
                pairwise,
            }
        })
        .collect();
    Rq1Report {
        n_records: records.len(),
        measures,
        audit: audit.0,
    }
}

/// Alignment score and five trait distances per record, via core-model.
pub fn alignment_features(
    records: &[StudyRecord],
    profiles: &CaProfiles,
) -> Result<Vec<([f64; 5], f64)>, StudyError> {
    records
        .iter()
        .map(|r| {
            let c = profiles.get(r.condition)?;
            Ok((trait_distances(&r.traits, &c), alignment_score(&r.traits, &c)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub min: f64,
    pub max: f64,
    pub by_condition: Vec<Descriptive>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub n: usize,
    pub n_excluded: usize,
    pub rho: Option<f64>,
    pub p: Option<f64>,
    pub stars: String,
    /// Set when the coefficient is undefined, for example zero variance.
    pub note: Option<String>,
}

fn correlate(x: &[f64], y: &[f64], n_excluded: usize) -> CorrelationCell {
    match spearman(x, y) {
        Ok(c) => CorrelationCell {
            n: c.n,
            n_excluded,
            rho: Some(c.r),
            p: Some(c.p_value),
            stars: stars(c.p_value).to_string(),
            note: None,
        },
        Err(e) => CorrelationCell {
            n: x.len(),
            n_excluded,
            rho: None,
            p: None,
            stars: String::new(),
            note: Some(e.to_string()),
        },
    }
}

/// `(x, y)` pairs restricted to records with measure `m`.
fn paired_with(records: &[StudyRecord], xs: &[f64], m: Measure) -> (Vec<f64>, Vec<f64>, usize) {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (r, &v) in records.iter().zip(xs) {
        if let Some(p) = r.perception(m) {
            x.push(v);
            y.push(p);
        }
    }
    let excluded = records.len() - x.len();
    (x, y, excluded)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq2Measure {
    pub measure: Measure,
    pub spearman: CorrelationCell,
    pub ols: Option<HierarchicalOls>,
    pub ols_note: Option<String>,
    pub reference_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq2Report {
    pub alignment: AlignmentSummary,
    pub alignment_scores: Vec<f64>,
    pub measures: Vec<Rq2Measure>,
    pub audit: Vec<AuditEntry>,
}

impl Rq2Report {
    pub fn measure(&self, m: Measure) -> &Rq2Measure {
        &self.measures[m.index()]
    }
}

pub fn rq2(records: &[StudyRecord], profiles: &CaProfiles) -> Result<Rq2Report, StudyError> {
    let mut audit = Audit::default();
    let scores: Vec<f64> = alignment_features(records, profiles)?.into_iter().map(|f| f.1).collect();
    if scores.is_empty() {
        return Err(StudyError::TooFewRecords { need: 1, got: 0 });
    }
    let by_condition = Level::ALL
        .iter()
        .map(|&l| {
            let xs: Vec<f64> =
                records.iter().zip(&scores).filter(|(r, _)| r.condition == l).map(|(_, &s)| s).collect();
            describe(l.as_str(), &xs)
        })
        .collect();
    let alignment = AlignmentSummary {
        n: scores.len(),
        mean: mean(&scores),
        sd: Some(sample_sd(&scores)).filter(|v| v.is_finite()),
        min: scores.iter().copied().fold(f64::INFINITY, f64::min),
        max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        by_condition,
    };
    let measures = Measure::ALL
        .into_iter()
        .map(|m| {
            let (x, y, excluded) = paired_with(records, &scores, m);
            audit.log("table4", m.label(), "spearman", x.len());
            let cell = correlate(&x, &y, excluded);
            let conditions: Vec<&str> = records
                .iter()
                .filter(|r| r.perception(m).is_some())
                .map(|r| r.condition.as_str())
                .collect();
            audit.log("table4_ols", m.label(), "hierarchical_ols", x.len());
            let (ols, ols_note) = match hierarchical_ols(&y, &conditions, &x) {
                Ok(o) => (Some(o), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Rq2Measure {
                measure: m,
                spearman: cell,
                ols,
                ols_note,
                reference_rho: reference::ALIGNMENT_RHO[m.index()],
            }
        })
        .collect();
    Ok(Rq2Report {
        alignment,
        alignment_scores: scores,
        measures,
        audit: audit.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq3Cell {
    pub measure: Measure,
    #[serde(rename = "trait")]
    pub trait_: Trait,
    pub correlation: CorrelationCell,
    pub reference_rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq3Report {
    /// Measure-major, traits in canonical order.
    pub cells: Vec<Rq3Cell>,
    pub audit: Vec<AuditEntry>,
}

impl Rq3Report {
    pub fn cell(&self, m: Measure, t: Trait) -> &Rq3Cell {
        &self.cells[m.index() * 5 + t.index()]
    }
}

pub fn rq3(records: &[StudyRecord], profiles: &CaProfiles) -> Result<Rq3Report, StudyError> {
    let mut audit = Audit::default();
    let features = alignment_features(records, profiles)?;
    let mut cells = Vec::with_capacity(30);
    for m in Measure::ALL {
        for t in Trait::ALL {
            let d: Vec<f64> = features.iter().map(|f| f.0[t.index()]).collect();
            let (x, y, excluded) = paired_with(records, &d, m);
            audit.log("table5", format!("{} x {}", m.label(), t.name()), "spearman", x.len());
            cells.push(Rq3Cell {
                measure: m,
                trait_: t,
                correlation: correlate(&x, &y, excluded),
                reference_rho: reference::DISTANCE_RHO[m.index()][t.index()],
            });
        }
    }
    Ok(Rq3Report { cells, audit: audit.0 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: usize,
    pub label: String,
    pub size: usize,
    /// Raw (unstandardized) mean distance per trait, canonical order.
    pub mean_distances: [f64; 5],
    pub mean_alignment: f64,
    /// Share of each condition within the cluster, in percent.
    pub condition_pct: BTreeMap<Level, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WithinCluster {
    pub cluster_id: usize,
    pub label: String,
    pub measure: Measure,
    pub correlation: CorrelationCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq4Report {
    pub seed: u64,
    pub feature_names: Vec<String>,
    /// Features are z-scored (sample SD) before clustering.
    pub standardized: bool,
    pub selection: KSelection,
    pub k: usize,
    pub silhouette: f64,
    pub assignments: Vec<usize>,
    pub clusters: Vec<ClusterProfile>,
    pub omnibus: Vec<OmnibusRow>,
    pub pairwise: Vec<PairwiseRow>,
    pub within_cluster: Vec<WithinCluster>,
    pub reference_silhouette: f64,
    pub audit: Vec<AuditEntry>,
}

impl Rq4Report {
    pub fn cluster_by_label(&self, label: &str) -> Option<&ClusterProfile> {
        self.clusters.iter().find(|c| c.label == label)
    }
}

/// Column-wise z-scores; constant columns become zero.
pub fn standardize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = rows.to_vec();
    for j in 0..d {
        let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let mu = mean(&col);
        let sd = sample_sd(&col);
        for r in out.iter_mut() {
            r[j] = if sd.is_finite() && sd > 1e-12 { (r[j] - mu) / sd } else { 0.0 };
        }
    }
    out
}

fn distinct_rows(rows: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
    keys.sort();
    keys.dedup();
    keys.len()
}

/// Rule-based names: lowest total distance is Well-Aligned, highest is
/// Globally-Misaligned, others take their largest single-trait distance.
pub fn label_clusters(mean_distances: &[[f64; 5]]) -> Vec<String> {
    let total = |d: &[f64; 5]| d.iter().sum::<f64>();
    let k = mean_distances.len();
    let order = |cmp: fn(f64, f64) -> bool| {
        (0..k).fold(0, |best, i| if cmp(total(&mean_distances[i]), total(&mean_distances[best])) { i } else { best })
    };
    let well = order(|a, b| a < b);
    let global = order(|a, b| a > b);
    let mut labels: Vec<String> = (0..k)
        .map(|i| {
            if i == well {
                "Well-Aligned".to_string()
            } else if i == global {
                "Globally-Misaligned".to_string()
            } else {
                let d = &mean_distances[i];
                let t = (0..5).fold(0, |b, j| if d[j] > d[b] { j } else { b });
                format!("{}-Misaligned", Trait::ALL[t].name())
            }
        })
        .collect();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for l in labels.iter_mut() {
        let count = seen.entry(l.clone()).or_insert(0);
        *count += 1;
        if *count > 1 {
            *l = format!("{l} {count}");
        }
    }
    labels
}

pub fn rq4(records: &[StudyRecord], profiles: &CaProfiles, seed: u64) -> Result<Rq4Report, StudyError> {
    let n = records.len();
    if n < MIN_CLUSTER_RECORDS {
        return Err(StudyError::TooFewRecords {
            need: MIN_CLUSTER_RECORDS,
            got: n,
        });
    }
    let mut audit = Audit::default();
    let features = alignment_features(records, profiles)?;
    let raw: Vec<Vec<f64>> = features
        .iter()
        .map(|(d, a)| d.iter().copied().chain(std::iter::once(*a)).collect())
        .collect();
    let points = standardize(&raw);
    let distinct = distinct_rows(&points);
    if distinct < 2 {
        return Err(StudyError::Degenerate(format!("{distinct} distinct feature vector(s); need at least 2")));
    }
    let k_max = MAX_K.min(n - 1).min(distinct);
    audit.log("k_selection", format!("k=2..{k_max}"), "select_k", n);
    let selection = select_k(&points, 2..=k_max, seed)?;
    let k = selection.k_best;
    audit.log("clusters", format!("k={k}"), "kmeans", n);
    let fit = kmeans(&points, k, seed)?;
    let silhouette = selection
        .candidates
        .iter()
        .find(|c| c.k == k)
        .map(|c| c.silhouette)
        .unwrap_or(f64::NAN);

    let mut profiles_out = Vec::with_capacity(k);
    let mut mean_distances = Vec::with_capacity(k);
    for c in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| fit.assignments[i] == c).collect();
        let size = members.len();
        let mut md = [0.0; 5];
        for t in 0..5 {
            md[t] = members.iter().map(|&i| features[i].0[t]).sum::<f64>() / size.max(1) as f64;
        }
        let ma = members.iter().map(|&i| features[i].1).sum::<f64>() / size.max(1) as f64;
        let condition_pct = Level::ALL
            .iter()
            .map(|&l| {
                let count = members.iter().filter(|&&i| records[i].condition == l).count();
                (l, if size == 0 { 0.0 } else { 100.0 * count as f64 / size as f64 })
            })
            .collect();
        mean_distances.push(md);
        profiles_out.push(ClusterProfile {
            cluster_id: c,
            label: String::new(),
            size,
            mean_distances: md,
            mean_alignment: ma,
            condition_pct,
        });
    }
    for (p, l) in profiles_out.iter_mut().zip(label_clusters(&mean_distances)) {
        p.label = l;
    }

    let ids: Vec<usize> = (0..k).collect();
    let mut omnibus = Vec::new();
    let mut pairwise = Vec::new();
    for m in Measure::ALL {
        let (groups, excluded) = split(records, &ids, |i, _| fit.assignments[i], m);
        let labelled: Vec<(String, Vec<f64>)> = groups.into_iter().map(|(c, v)| (format!("C{c}"), v)).collect();
        let (o, p) = compare_groups(
            m,
            &labelled,
            excluded,
            (k == 3).then(|| reference::cluster_kw(m)),
            ("table6", "table7"),
            &mut audit,
        );
        omnibus.push(o);
        pairwise.extend(p);
    }

    let scores: Vec<f64> = features.iter().map(|f| f.1).collect();
    let mut within_cluster = Vec::new();
    for p in &profiles_out {
        let members: Vec<usize> = (0..n).filter(|&i| fit.assignments[i] == p.cluster_id).collect();
        let sub: Vec<StudyRecord> = members.iter().map(|&i| records[i].clone()).collect();
        let sub_scores: Vec<f64> = members.iter().map(|&i| scores[i]).collect();
        for m in Measure::ALL {
            let (x, y, excluded) = paired_with(&sub, &sub_scores, m);
            audit.log("within_cluster", format!("C{} {}", p.cluster_id, m.label()), "spearman", x.len());
            within_cluster.push(WithinCluster {
                cluster_id: p.cluster_id,
                label: p.label.clone(),
                measure: m,
                correlation: correlate(&x, &y, excluded),
            });
        }
    }

    Ok(Rq4Report {
        seed,
        feature_names: Trait::ALL
            .iter()
            .map(|t| format!("{}_distance", t.key()))
            .chain(std::iter::once("alignment".to_string()))
            .collect(),
        standardized: true,
        selection,
        k,
        silhouette,
        assignments: fit.assignments,
        clusters: profiles_out,
        omnibus,
        pairwise,
        within_cluster,
        reference_silhouette: reference::CLUSTER_SILHOUETTE,
        audit: audit.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TraitScores;
    use crate::study::synth::{planted_study, SynthConfig};

    #[test]
    fn planted_condition_and_alignment_effects() {
        let recs = planted_study(1, &SynthConfig::default());
        let r1 = rq1(&recs);
        let lm = r1.measure(Measure::Likeability).pair("low vs medium").unwrap();
        assert!(lm.p_adj < 0.05 && lm.higher == "medium", "{lm:?}");
        assert_eq!(r1.measure(Measure::Trust).pairwise.len(), 3);
        let r2 = rq2(&recs, &CaProfiles::default()).unwrap();
        let like = &r2.measure(Measure::Likeability).spearman;
        assert!(like.rho.unwrap() > 0.0 && like.p.unwrap() < 0.05);
        assert!(r2.measure(Measure::Likeability).ols.is_some());
    }

    #[test]
    fn identical_alignment_is_flagged() {
        let mut recs = planted_study(2, &SynthConfig::default());
        for r in recs.iter_mut() {
            r.condition = Level::Medium;
            r.traits = TraitScores::new([3.0; 5]).unwrap();
        }
        let r2 = rq2(&recs, &CaProfiles::default()).unwrap();
        for m in &r2.measures {
            assert!(m.spearman.rho.is_none());
            assert!(m.spearman.note.is_some());
        }
        let r3 = rq3(&recs, &CaProfiles::default()).unwrap();
        assert!(r3.cells.iter().all(|c| c.correlation.rho.is_none()));
        assert!(matches!(rq4(&recs, &CaProfiles::default(), 1), Err(StudyError::Degenerate(_))));
        assert!(matches!(rq4(&recs[..5], &CaProfiles::default(), 1), Err(StudyError::TooFewRecords { .. })));
    }

    #[test]
    fn planted_extraversion_distance() {
        let mut recs = planted_study(4, &SynthConfig::null(50));
        let profiles = CaProfiles::default();
        for r in recs.iter_mut() {
            let d = trait_distances(&r.traits, &profiles.get(r.condition).unwrap());
            let v = (4.5 - d[Trait::Extraversion.index()]).clamp(1.0, 5.0);
            r.perceptions[Measure::Intelligence.index()] = Some(v);
        }
        let r3 = rq3(&recs, &profiles).unwrap();
        let e = &r3.cell(Measure::Intelligence, Trait::Extraversion).correlation;
        assert!(e.rho.unwrap() < -0.9 && e.p.unwrap() < 0.001);
        assert_eq!(r3.cells.len(), 30);
    }

    #[test]
    fn missing_perceptions_excluded_with_counts() {
        let mut recs = planted_study(6, &SynthConfig::default());
        recs[0].perceptions[Measure::Trust.index()] = None;
        recs[70].perceptions[Measure::Trust.index()] = None;
        let r1 = rq1(&recs);
        assert_eq!(r1.measure(Measure::Trust).omnibus.n_excluded, 2);
        assert_eq!(r1.measure(Measure::Trust).omnibus.n, 148);
        let r2 = rq2(&recs, &CaProfiles::default()).unwrap();
        assert_eq!(r2.measure(Measure::Trust).spearman.n_excluded, 2);
    }

    #[test]
    fn single_condition_has_no_omnibus() {
        let recs: Vec<StudyRecord> =
            planted_study(8, &SynthConfig::default()).into_iter().filter(|r| r.condition == Level::High).collect();
        let r1 = rq1(&recs);
        assert!(r1.measures.iter().all(|m| m.omnibus.result.is_none() && m.pairwise.is_empty()));
    }

    #[test]
    fn labels_by_rule() {
        let labels = label_clusters(&[[0.4, 0.4, 3.0, 0.4, 0.4], [3.0; 5], [0.2; 5]]);
        assert_eq!(labels, vec!["Extraversion-Misaligned", "Globally-Misaligned", "Well-Aligned"]);
        let dup = label_clusters(&[[0.1; 5], [0.0, 0.0, 2.0, 0.0, 0.0], [0.0, 0.0, 2.1, 0.0, 0.0], [3.0; 5]]);
        assert_eq!(dup[1], "Extraversion-Misaligned");
        assert_eq!(dup[2], "Extraversion-Misaligned 2");
    }
}
