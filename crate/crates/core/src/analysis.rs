//! Cross-method comparisons of standings.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::field::EventField;
use crate::rank::Rank;
use crate::score::ScoreFunction;
use crate::standings::{rank_field, ScoringSystem, Standings};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonRow {
    pub name: String,
    pub rank_a: u32,
    pub rank_b: u32,
    /// `rank_b - rank_a`; negative means the competitor does better under B.
    pub delta: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodComparison {
    /// In the order of standings A.
    pub rows: Vec<ComparisonRow>,
    pub k: usize,
    /// In the first `k` under A but not under B.
    pub top_k_a_not_b: Vec<String>,
    pub top_k_b_not_a: Vec<String>,
    /// A tie group straddles position `k` in at least one of the standings.
    pub cut_splits_tie: bool,
    pub distance: RankDistance,
    pub standings_a: Standings,
    pub standings_b: Standings,
}

fn top_k(standings: &Standings, k: usize) -> BTreeSet<String> {
    standings.entries().iter().take(k).map(|e| e.name.clone()).collect()
}

fn splits_tie(standings: &Standings, k: usize) -> bool {
    let entries = standings.entries();
    k > 0 && k < entries.len() && entries[k - 1].tie_group == entries[k].tie_group
}

/// Ranks `field` under both systems and reports how the outcomes differ.
///
/// The top-`k` cut takes the first `k` entries of each tie-broken standings.
pub fn compare_methods(
    field: &EventField,
    system_a: &ScoringSystem,
    system_b: &ScoringSystem,
    k: usize,
) -> Result<MethodComparison> {
    if k == 0 || k > field.len() {
        return Err(Error::Contract(format!(
            "cut size k must be in 1..={}, got {k}",
            field.len()
        )));
    }
    let standings_a = rank_field(field, system_a)?;
    let standings_b = rank_field(field, system_b)?;
    let ranks_b: HashMap<&str, u32> = standings_b.entries().iter().map(|e| (e.name.as_str(), e.rank)).collect();
    let rows = standings_a
        .entries()
        .iter()
        .map(|e| {
            let rank_b = ranks_b[e.name.as_str()];
            ComparisonRow {
                name: e.name.clone(),
                rank_a: e.rank,
                rank_b,
                delta: rank_b as i64 - e.rank as i64,
            }
        })
        .collect();
    let (top_a, top_b) = (top_k(&standings_a, k), top_k(&standings_b, k));
    // keep the listing in standings order
    let in_order = |standings: &Standings, keep: &dyn Fn(&str) -> bool| -> Vec<String> {
        standings
            .entries()
            .iter()
            .filter(|e| keep(&e.name))
            .map(|e| e.name.clone())
            .collect()
    };
    let top_k_a_not_b = in_order(&standings_a, &|n| top_a.contains(n) && !top_b.contains(n));
    let top_k_b_not_a = in_order(&standings_b, &|n| top_b.contains(n) && !top_a.contains(n));
    let distance = rank_distance(&standings_a, &standings_b)?;
    Ok(MethodComparison {
        rows,
        k,
        top_k_a_not_b,
        top_k_b_not_a,
        cut_splits_tie: splits_tie(&standings_a, k) || splits_tie(&standings_b, k),
        distance,
        standings_a,
        standings_b,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalencePair {
    pub function: ScoreFunction,
    pub n: u32,
    pub pair: (u32, u32),
    /// `|f(a) + f(a+1) - f(1) - f(n)|`.
    pub residual: f64,
}

/// Residual for the adjacent pair `(a, a+1)`. Linear and logarithmic
/// functions are compared exactly (integer sums, integer products), so an
/// exact decomposition yields a residual of exactly zero.
fn pair_residual(f: &ScoreFunction, a: u32, n: u32) -> Result<f64> {
    match f {
        ScoreFunction::Linear => Ok((2 * a as i64 + 1 - (1 + n as i64)).abs() as f64),
        ScoreFunction::Logarithmic => {
            let lhs = a as u128 * (a as u128 + 1);
            let rhs = n as u128;
            if lhs == rhs {
                Ok(0.0)
            } else {
                Ok((lhs as f64 / rhs as f64).ln().abs())
            }
        }
        _ => {
            let at = |j: u32| -> Result<f64> { f.eval_f64(Rank::new(j)?) };
            Ok((at(a)? + at(a + 1)? - at(1)? - at(n)?).abs())
        }
    }
}

/// The adjacent ranks whose combined score is closest to first-plus-last.
pub fn equivalence_pair(f: &ScoreFunction, n: u32) -> Result<EquivalencePair> {
    if n < 3 {
        return Err(Error::Contract(format!("equivalence search needs n >= 3, got {n}")));
    }
    let mut best: Option<(u32, f64)> = None;
    for a in 1..n {
        let residual = pair_residual(f, a, n)?;
        if best.is_none_or(|(_, r)| residual < r) {
            best = Some((a, residual));
        }
    }
    let (a, residual) = best.expect("n >= 3 gives at least one pair");
    Ok(EquivalencePair {
        function: f.clone(),
        n,
        pair: (a, a + 1),
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankDistance {
    /// Number of discordant pairs.
    pub distance: u64,
    /// Set when leftover ties were completed by name order for the count.
    pub approximate: bool,
}

/// Standings order with each unresolved tie group sorted by name.
fn total_order(standings: &Standings) -> Vec<&str> {
    let mut out = Vec::with_capacity(standings.len());
    for group in standings.groups() {
        let mut names: Vec<&str> = group.iter().map(|e| e.name.as_str()).collect();
        names.sort_unstable();
        out.extend(names);
    }
    out
}

/// Kendall tau distance between two standings of the same competitors.
pub fn rank_distance(a: &Standings, b: &Standings) -> Result<RankDistance> {
    let order_a = total_order(a);
    let order_b = total_order(b);
    let position_b: HashMap<&str, usize> = order_b.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    if order_a.len() != order_b.len() || position_b.len() != order_b.len() {
        return Err(Error::CompetitorMismatch(format!(
            "{} competitors against {}",
            order_a.len(),
            order_b.len()
        )));
    }
    let mut sequence = Vec::with_capacity(order_a.len());
    for name in &order_a {
        let pos = position_b
            .get(name)
            .ok_or_else(|| Error::CompetitorMismatch(format!("{name} is missing from the second standings")))?;
        sequence.push(*pos);
    }
    Ok(RankDistance {
        distance: count_inversions(&mut sequence),
        approximate: !a.is_total_order() || !b.is_total_order(),
    })
}

/// Merge-sort inversion count; sorts `values` in place.
fn count_inversions(values: &mut [usize]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = count_inversions(&mut values[..mid]) + count_inversions(&mut values[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if values[i] <= values[j] {
            merged.push(values[i]);
            i += 1;
        } else {
            merged.push(values[j]);
            count += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&values[i..mid]);
    merged.extend_from_slice(&values[j..]);
    values.copy_from_slice(&merged);
    count
}
