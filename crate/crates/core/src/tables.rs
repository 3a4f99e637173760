//! Affine normalisation and integer scoring tables.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use crate::error::{Error, Result};
use crate::field::EventField;
use crate::rank::Rank;
use crate::score::{ScoreFunction, WeightVector};
use crate::standings::{score_field, Method, Standings};

/// Returns `offset + scale * f` pinned so that `g(1) = lo` and `g(n) = hi`.
pub fn affine_normalize(f: &ScoreFunction, n: u32, lo: f64, hi: f64) -> Result<ScoreFunction> {
    if n < 2 {
        return Err(Error::Contract(format!("affine normalisation needs n >= 2, got {n}")));
    }
    if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
        return Err(Error::Contract(format!("need lo < hi, got lo {lo}, hi {hi}")));
    }
    let first = f.eval_f64(Rank::FIRST)?;
    let last = f.eval_f64(Rank::new(n)?)?;
    if last <= first {
        return Err(Error::DegenerateFunction { n });
    }
    let scale = (hi - lo) / (last - first);
    let offset = lo - scale * first;
    ScoreFunction::affine(f.clone(), offset, scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Round to nearest, halves away from zero.
    NearestHalfAway,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableProvenance {
    pub function: ScoreFunction,
    pub scale: f64,
    pub offset: f64,
    pub rounding: Rounding,
}

/// Integer points for ranks `1..=n`, strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoringTable {
    points: Vec<i64>,
    provenance: TableProvenance,
}

impl ScoringTable {
    pub fn n(&self) -> u32 {
        self.points.len() as u32
    }

    /// Points for an integer rank in `1..=n`.
    pub fn points(&self, rank: u32) -> Option<i64> {
        rank.checked_sub(1).and_then(|i| self.points.get(i as usize)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, i64)> + '_ {
        self.points.iter().enumerate().map(|(i, &p)| (i as u32 + 1, p))
    }

    pub fn provenance(&self) -> &TableProvenance {
        &self.provenance
    }

    /// `rank,points` header then one LF-terminated row per rank.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,points\n");
        for (rank, points) in self.entries() {
            out.push_str(&format!("{rank},{points}\n"));
        }
        out
    }

    pub fn as_score_function(&self) -> ScoreFunction {
        let entries = self
            .entries()
            .map(|(rank, points)| (Rank::new(rank).expect("table ranks start at 1"), points as f64))
            .collect();
        ScoreFunction::table(entries).expect("table points are strictly increasing")
    }
}

/// `round(scale * f(j) + offset)` for `j = 1..=n`.
pub fn generate_table(f: &ScoreFunction, n: u32, scale: f64, offset: f64) -> Result<ScoringTable> {
    if n < 2 {
        return Err(Error::Contract(format!("a scoring table needs n >= 2, got {n}")));
    }
    if !(scale > 0.0 && scale.is_finite()) || !offset.is_finite() {
        return Err(Error::Contract(format!("need finite offset and scale > 0, got scale {scale}")));
    }
    let mut points = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let value = scale * f.eval_f64(Rank::new(j)?)? + offset;
        let rounded = value.round();
        if !rounded.is_finite() || rounded.abs() > i64::MAX as f64 / 2.0 {
            return Err(Error::Contract(format!("rank {j} maps to a non-representable value {value}")));
        }
        let rounded = rounded as i64;
        if let Some(&prev) = points.last() {
            if rounded <= prev {
                return Err(Error::TableDegeneracy {
                    lower: j - 1,
                    upper: j,
                    lower_points: prev,
                    upper_points: rounded,
                });
            }
        }
        points.push(rounded);
    }
    Ok(ScoringTable {
        points,
        provenance: TableProvenance {
            function: f.clone(),
            scale,
            offset,
            rounding: Rounding::NearestHalfAway,
        },
    })
}

/// Reads a `rank,points` CSV into a table score function.
pub fn read_points_table(reader: impl Read) -> Result<ScoreFunction> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv
        .headers()
        .map_err(|e| Error::Parse { row: 1, column: 1, message: e.to_string() })?
        .clone();
    if headers.len() != 2 || &headers[0] != "rank" || &headers[1] != "points" {
        return Err(Error::Parse {
            row: 1,
            column: 1,
            message: "expected header `rank,points`".into(),
        });
    }
    let mut entries = BTreeMap::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse { row, column: 1, message: e.to_string() })?;
        let rank: Rank = record[0]
            .trim()
            .parse()
            .map_err(|e: Error| Error::Parse { row, column: 1, message: e.to_string() })?;
        let points: f64 = record[1].trim().parse().map_err(|_| Error::Parse {
            row,
            column: 2,
            message: format!("invalid points value {:?}", &record[1]),
        })?;
        if entries.insert(rank, points).is_some() {
            return Err(Error::Validation(format!("rank {rank} appears twice in the table")));
        }
    }
    ScoreFunction::table(entries)
}

/// One field's comparison between table-based and function-based standings.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEquivalence {
    pub label: String,
    pub identical: bool,
    /// Pairs of (group under table, group under function) that differ.
    pub mismatched_groups: Vec<(Vec<String>, Vec<String>)>,
}

fn group_of(standings: &Standings) -> BTreeMap<String, (u32, BTreeSet<String>)> {
    let mut out = BTreeMap::new();
    for group in standings.groups() {
        let members: BTreeSet<String> = group.iter().map(|e| e.name.clone()).collect();
        for e in group {
            out.insert(e.name.clone(), (e.rank, members.clone()));
        }
    }
    out
}

/// For each field, whether `table` ranks it the same way as `f` does.
pub fn table_ranking_equivalence(
    table: &ScoringTable,
    f: &ScoreFunction,
    fields: &[(&str, &EventField)],
) -> Result<Vec<FieldEquivalence>> {
    let table_fn = table.as_score_function();
    fields
        .iter()
        .map(|(label, field)| {
            let weights = WeightVector::unit(field.stage_count());
            let by_table = score_field(field, &Method::Additive(table_fn.clone()), &weights)?;
            let by_function = score_field(field, &Method::Additive(f.clone()), &weights)?;
            let table_groups = group_of(&by_table);
            let function_groups = group_of(&by_function);
            let mut mismatched: BTreeSet<(Vec<String>, Vec<String>)> = BTreeSet::new();
            for (name, (rank, group)) in &table_groups {
                let (other_rank, other_group) = &function_groups[name];
                if rank != other_rank || group != other_group {
                    mismatched.insert((group.iter().cloned().collect(), other_group.iter().cloned().collect()));
                }
            }
            Ok(FieldEquivalence {
                label: label.to_string(),
                identical: mismatched.is_empty(),
                mismatched_groups: mismatched.into_iter().collect(),
            })
        })
        .collect()
}
