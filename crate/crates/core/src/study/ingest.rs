//! Participant CSV ingest. Bad rows are skipped with a diagnostic naming the
//! file line; schema problems abort.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{score_perception, Measure, PerceptionKey, StudyError, StudyRecord};
use crate::model::{Level, TraitScores};

pub const REQUIRED_COLUMNS: [&str; 13] = [
    "participant_id",
    "condition",
    "o",
    "c",
    "e",
    "a",
    "es",
    "intelligence",
    "enjoyment",
    "anthropomorphism",
    "adoption",
    "trust",
    "likeability",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    /// 1-based line in the file; the header is line 1.
    pub line: u64,
    pub participant_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records: Vec<StudyRecord>,
    pub rejected: Vec<RowDiagnostic>,
}

/// Raw item column: measure plus 1-based item position.
fn raw_column(name: &str, key: &PerceptionKey) -> Result<(Measure, usize), StudyError> {
    let bad = || StudyError::Schema(format!("unexpected column `{name}`"));
    let (measure, item) = name.rsplit_once('_').ok_or_else(bad)?;
    let measure: Measure = measure.parse().map_err(|_| bad())?;
    let item: usize = item.parse().map_err(|_| bad())?;
    if item == 0 || item > key.measure(measure).items.len() {
        return Err(StudyError::Schema(format!(
            "column `{name}`: {measure} has {} items",
            key.measure(measure).items.len()
        )));
    }
    Ok((measure, item))
}

pub fn ingest(path: impl AsRef<Path>, key: &PerceptionKey) -> Result<IngestReport, StudyError> {
    let path = path.as_ref();
    let f = fs::File::open(path).map_err(|e| StudyError::Io(path.display().to_string(), e))?;
    ingest_reader(f, key)
}

pub fn ingest_reader(reader: impl Read, key: &PerceptionKey) -> Result<IngestReport, StudyError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.len() < REQUIRED_COLUMNS.len()
        || headers.iter().zip(REQUIRED_COLUMNS).any(|(h, want)| h != want)
    {
        return Err(StudyError::Schema(format!(
            "header must start with `{}`, found `{}`",
            REQUIRED_COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut extra: Vec<(Measure, usize)> = Vec::new();
    for name in headers.iter().skip(REQUIRED_COLUMNS.len()) {
        let col = raw_column(name, key)?;
        if extra.contains(&col) {
            return Err(StudyError::Schema(format!("duplicate column `{name}`")));
        }
        extra.push(col);
    }

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut rows = 0usize;
    for row in rdr.records() {
        rows += 1;
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() != headers.len() {
            rejected.push(RowDiagnostic {
                line,
                participant_id: row.get(0).map(str::to_string),
                message: format!("expected {} fields, found {}", headers.len(), row.len()),
            });
            continue;
        }
        match parse_row(&row, &extra, key) {
            Ok(r) => records.push(r),
            Err(message) => rejected.push(RowDiagnostic {
                line,
                participant_id: row.get(0).filter(|s| !s.is_empty()).map(str::to_string),
                message,
            }),
        }
    }
    if rows == 0 {
        return Err(StudyError::Empty);
    }
    Ok(IngestReport { records, rejected })
}

fn parse_row(row: &csv::StringRecord, extra: &[(Measure, usize)], key: &PerceptionKey) -> Result<StudyRecord, String> {
    let id = &row[0];
    if id.is_empty() {
        return Err("participant_id is empty".into());
    }
    let condition: Level = row[1].parse().map_err(|_| format!("condition `{}` is not low/medium/high", &row[1]))?;

    let mut traits = [0.0; 5];
    for (i, slot) in traits.iter_mut().enumerate() {
        let col = REQUIRED_COLUMNS[2 + i];
        let cell = &row[2 + i];
        *slot = cell.parse::<f64>().map_err(|_| format!("{col}: `{cell}` is not a number"))?;
        if !slot.is_finite() || !(1.0..=5.0).contains(slot) {
            return Err(format!("{col}: {cell} outside [1, 5]"));
        }
    }
    let traits = TraitScores::new(traits).map_err(|e| e.to_string())?;

    let mut raw: BTreeMap<Measure, Vec<Option<u8>>> = BTreeMap::new();
    for (j, &(m, item)) in extra.iter().enumerate() {
        let cell = &row[REQUIRED_COLUMNS.len() + j];
        let slots = raw.entry(m).or_insert_with(|| vec![None; key.measure(m).items.len()]);
        if cell.is_empty() {
            continue;
        }
        let v: u8 = cell.parse().map_err(|_| format!("{}_{item}: `{cell}` is not an integer", m.column()))?;
        if v < 1 || v > key.measure(m).scale_max {
            return Err(format!("{}_{item}: {v} outside 1..={}", m.column(), key.measure(m).scale_max));
        }
        slots[item - 1] = Some(v);
    }

    let mut perceptions = [None; 6];
    let mut raw_items = BTreeMap::new();
    for m in Measure::ALL {
        let cell = &row[7 + m.index()];
        let complete: Option<Vec<u8>> = raw.get(&m).and_then(|s| s.iter().copied().collect());
        if let Some(items) = &complete {
            raw_items.insert(m, items.clone());
        }
        perceptions[m.index()] = if cell.is_empty() {
            match complete {
                Some(items) => Some(score_perception(&items, key.measure(m)).map_err(|e| e.to_string())?),
                None => None,
            }
        } else {
            let v: f64 = cell.parse().map_err(|_| format!("{}: `{cell}` is not a number", m.column()))?;
            let max = f64::from(m.scale_max());
            if !v.is_finite() || !(1.0..=max).contains(&v) {
                return Err(format!("{}: {cell} outside [1, {max}]", m.column()));
            }
            Some(v)
        };
    }
    Ok(StudyRecord {
        participant_id: id.to_string(),
        condition,
        traits,
        perceptions,
        raw_items,
    })
}

/// Writes records in the ingest schema. Raw item columns are emitted for the
/// measures where every record carries items.
pub fn write_csv(records: &[StudyRecord], out: impl Write, key: &PerceptionKey) -> Result<(), StudyError> {
    let raw_measures: Vec<Measure> = Measure::ALL
        .into_iter()
        .filter(|m| !records.is_empty() && records.iter().all(|r| r.raw_items.contains_key(m)))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = REQUIRED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for m in &raw_measures {
        for i in 1..=key.measure(*m).items.len() {
            header.push(format!("{}_{i}", m.column()));
        }
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.participant_id.clone(), r.condition.as_str().to_string()];
        row.extend(r.traits.as_array().iter().map(|v| format!("{v}")));
        row.extend(r.perceptions.iter().map(|p| p.map(|v| format!("{v}")).unwrap_or_default()));
        for m in &raw_measures {
            row.extend(r.raw_items[m].iter().map(|v| v.to_string()));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| StudyError::Io("csv output".into(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str =
        "participant_id,condition,o,c,e,a,es,intelligence,enjoyment,anthropomorphism,adoption,trust,likeability";

    #[test]
    fn rejects_rows_with_line_numbers() {
        let csv = format!(
            "{HEADER},trust_1\n\
             p1,low,3,3,3,3,3,4,5,3,4,5,4,2\n\
             p2,medium,3,3,3,3,3,4,5,3,4,5,4,9\n\
             p3,high,3,3,3,3,6,4,5,3,4,5,4,2\n\
             p4,extreme,3,3,3,3,3,4,5,3,4,5,4,2\n\
             p5,high,3,3,3,3,3,4,5,3,4,8,4,2\n"
        );
        let rep = ingest_reader(csv.as_bytes(), &PerceptionKey::default()).unwrap();
        assert_eq!(rep.records.len(), 1);
        let lines: Vec<u64> = rep.rejected.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6]);
        assert!(rep.rejected[0].message.contains("trust_1: 9"), "{}", rep.rejected[0].message);
    }

    #[test]
    fn raw_items_only_are_scored() {
        let csv = format!(
            "{HEADER},enjoyment_1,enjoyment_2,enjoyment_3\n\
             p1,medium,2.5,3,4,3.25,1.75,,,,,,,6,5,7\n"
        );
        let rep = ingest_reader(csv.as_bytes(), &PerceptionKey::default()).unwrap();
        let r = &rep.records[0];
        assert_eq!(r.perception(Measure::Enjoyment), Some(6.0));
        assert_eq!(r.perception(Measure::Trust), None);
        assert_eq!(r.raw_items[&Measure::Enjoyment], vec![6, 5, 7]);
    }

    #[test]
    fn schema_errors() {
        let key = PerceptionKey::default();
        assert!(matches!(ingest_reader("a,b\n1,2\n".as_bytes(), &key), Err(StudyError::Schema(_))));
        assert!(matches!(ingest_reader(format!("{HEADER}\n").as_bytes(), &key), Err(StudyError::Empty)));
        assert!(matches!(ingest_reader("".as_bytes(), &key), Err(StudyError::Schema(_))));
        assert!(matches!(
            ingest_reader(format!("{HEADER},trust_11\n").as_bytes(), &key),
            Err(StudyError::Schema(_))
        ));
        assert!(matches!(
            ingest_reader(format!("{HEADER},mood_1\n").as_bytes(), &key),
            Err(StudyError::Schema(_))
        ));
    }
}
