//! Event CSV files and the embedded Tokyo 2020 sport-climbing results.
//!
//! The format is `name,<stage_1>,...,<stage_s>` with an optional trailing
//! `qual_rank` column holding positive integers. Ranks are written as
//! decimal literals whose only permitted fractional part is `.5`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::LazyLock;

use crate::error::{Error, Result};
use crate::field::{Competitor, EventField, ReferenceStandings};
use crate::rank::{Rank, RankVector};

pub const REFERENCE_COLUMN: &str = "qual_rank";

/// Parses and validates an event CSV.
pub fn load_event(reader: impl Read) -> Result<EventField> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Parse { row: 1, column: 1, message: e.to_string() })?
        .clone();
    if headers.get(0) != Some("name") {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "the first column must be `name`".into(),
        });
    }
    let has_reference = headers.len() > 1 && headers.get(headers.len() - 1) == Some(REFERENCE_COLUMN);
    let stage_end = if has_reference { headers.len() - 1 } else { headers.len() };
    let stage_names: Vec<String> = headers.iter().take(stage_end).skip(1).map(str::to_string).collect();
    if stage_names.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: 2,
            message: "at least one stage column is required".into(),
        });
    }
    if let Some(pos) = stage_names.iter().position(|s| s.trim().is_empty()) {
        return Err(Error::Parse { row: 1, column: pos + 2, message: "empty stage name".into() });
    }

    let mut competitors = Vec::new();
    let mut reference = BTreeMap::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse { row, column: 1, message: e.to_string() })?;
        if record.len() != headers.len() {
            return Err(Error::Parse {
                row,
                column: record.len().min(headers.len()) + 1,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let name = record[0].to_string();
        let ranks = (1..stage_end)
            .map(|col| {
                let cell = &record[col];
                cell.parse::<Rank>().map_err(|_| {
                    if is_sub_unit_rank(cell) {
                        Error::Validation(format!(
                            "row {row}, stage {:?}: rank {cell} is below 1",
                            stage_names[col - 1]
                        ))
                    } else {
                        Error::Parse { row, column: col + 1, message: format!("invalid rank {cell:?}") }
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if has_reference {
            let cell = &record[stage_end];
            if !cell.is_empty() {
                let rank = cell
                    .parse::<u32>()
                    .ok()
                    .filter(|&r| r >= 1 && cell.bytes().all(|b| b.is_ascii_digit()))
                    .ok_or_else(|| Error::Parse {
                        row,
                        column: stage_end + 1,
                        message: format!("invalid {REFERENCE_COLUMN} {cell:?}; expected a positive integer"),
                    })?;
                reference.insert(name.clone(), rank);
            }
        }
        competitors.push(Competitor::new(name, RankVector::new(ranks)?));
    }
    let reference = if has_reference { Some(ReferenceStandings::new(reference)?) } else { None };
    EventField::new(stage_names, competitors, reference)
}

/// Well-formed literal whose value is below 1 (`0`, `0.5`).
fn is_sub_unit_rank(cell: &str) -> bool {
    let whole = cell.strip_suffix(".5").unwrap_or(cell);
    !whole.is_empty() && whole.bytes().all(|b| b == b'0')
}

pub fn load_event_path(path: impl AsRef<Path>) -> Result<EventField> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    load_event(file)
}

/// Writes the canonical CSV form of `field`.
pub fn write_event(field: &EventField, writer: impl Write) -> Result<()> {
    let mut csv = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut header = vec!["name".to_string()];
    header.extend(field.stage_names().iter().cloned());
    if field.reference().is_some() {
        header.push(REFERENCE_COLUMN.to_string());
    }
    csv.write_record(&header).map_err(io)?;
    for c in field.competitors() {
        let mut row = vec![c.name.clone()];
        row.extend(c.ranks.iter().map(|r| r.to_string()));
        if let Some(reference) = field.reference() {
            row.push(reference.rank_of(&c.name).map(|r| r.to_string()).unwrap_or_default());
        }
        csv.write_record(&row).map_err(io)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn event_to_csv(field: &EventField) -> String {
    let mut buf = Vec::new();
    write_event(field, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

/// A compiled-in results table.
#[derive(Clone, Debug)]
pub struct EmbeddedDataset {
    pub name: &'static str,
    pub title: &'static str,
    pub csv: &'static str,
    pub notes: &'static [&'static str],
    pub field: EventField,
}

const SOURCES: [(&str, &str, &str, &[&str]); 4] = [
    (
        "men-prelims",
        "Tokyo 2020 sport climbing, men's preliminaries",
        include_str!("../data/men-prelims.csv"),
        &["qual_rank is the official (product-method) qualification order"],
    ),
    (
        "men-finals",
        "Tokyo 2020 sport climbing, men's finals",
        include_str!("../data/men-finals.csv"),
        &[
            "B. Mawem qualified 7th but did not start the final (injury); he is not part of the scored field and was classified 8th overall",
            "qual_rank is each finalist's preliminary (product-method) placement",
        ],
    ),
    (
        "women-prelims",
        "Tokyo 2020 sport climbing, women's preliminaries",
        include_str!("../data/women-prelims.csv"),
        &["qual_rank is the official (product-method) qualification order"],
    ),
    (
        "women-finals",
        "Tokyo 2020 sport climbing, women's finals",
        include_str!("../data/women-finals.csv"),
        &["qual_rank is each finalist's preliminary (product-method) placement"],
    ),
];

static EMBEDDED: LazyLock<Vec<EmbeddedDataset>> = LazyLock::new(|| {
    SOURCES
        .iter()
        .map(|&(name, title, csv, notes)| EmbeddedDataset {
            name,
            title,
            csv,
            notes,
            field: load_event(csv.as_bytes()).unwrap_or_else(|e| panic!("embedded dataset {name} is invalid: {e}")),
        })
        .collect()
});

pub fn embedded_datasets() -> &'static [EmbeddedDataset] {
    &EMBEDDED
}

pub fn embedded(name: &str) -> Option<&'static EmbeddedDataset> {
    EMBEDDED.iter().find(|d| d.name == name)
}

pub fn embedded_names() -> Vec<&'static str> {
    SOURCES.iter().map(|s| s.0).collect()
}
