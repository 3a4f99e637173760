#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rankforge_core::{Competitor, EventField, Rank, RankVector, Standings};

/// One stage of tie-averaged ranks: a random permutation whose consecutive
/// placements are occasionally merged into shared groups.
pub fn random_stage<R: Rng>(n: usize, rng: &mut R, tie_chance: f64) -> Vec<Rank> {
    let mut doubled = vec![0u32; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut place = 1u32;
    let mut i = 0;
    while i < n {
        let mut size = 1;
        while i + size < n && rng.random_bool(tie_chance) {
            size += 1;
        }
        // k tied competitors at places m..m+k-1 carry m + (k-1)/2
        let value = 2 * place + size as u32 - 1;
        for &slot in &order[i..i + size] {
            doubled[slot] = value;
        }
        place += size as u32;
        i += size;
    }
    doubled.into_iter().map(|d| Rank::from_doubled(d).unwrap()).collect()
}

pub fn random_field<R: Rng>(n: usize, stages: usize, rng: &mut R, tie_chance: f64) -> EventField {
    let columns: Vec<Vec<Rank>> = (0..stages).map(|_| random_stage(n, rng, tie_chance)).collect();
    let competitors = (0..n)
        .map(|i| {
            let ranks = columns.iter().map(|c| c[i]).collect();
            Competitor::new(format!("p{i:02}"), RankVector::new(ranks).unwrap())
        })
        .collect();
    EventField::unnamed(stages, competitors).unwrap()
}

/// Every rank number equals 1 + the number of competitors in earlier groups,
/// and groups are contiguous.
pub fn numbering_holds(standings: &Standings) -> bool {
    let mut ahead = 0u32;
    let mut seen_groups = std::collections::HashSet::new();
    for group in standings.groups() {
        if !seen_groups.insert(group[0].tie_group) {
            return false;
        }
        if group.iter().any(|e| e.rank != ahead + 1 || e.tie_group != group[0].tie_group) {
            return false;
        }
        ahead += group.len() as u32;
    }
    ahead as usize == standings.len()
}

/// Standard competition ranking from scores alone: 1 + |strictly smaller|.
pub fn numbering_matches_scores(standings: &Standings) -> bool {
    let entries = standings.entries();
    entries.iter().all(|e| {
        let smaller = entries
            .iter()
            .filter(|o| o.score.tie_cmp(e.score) == std::cmp::Ordering::Less)
            .count() as u32;
        e.rank == smaller + 1
    })
}
