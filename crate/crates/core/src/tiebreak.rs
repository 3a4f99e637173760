//! Ordered tie-break policies applied to groups of equal-scoring competitors.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::EventField;
use crate::rank::RankVector;
use crate::score::WeightVector;
use crate::standings::{Standings, StandingsEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TieBreakPolicy {
    /// Two-way ties only: whoever places better in a strict majority of
    /// stages goes first.
    HeadToHead,
    /// Order by the field's reference standings; members missing from the
    /// reference trail as one group.
    CountBack,
    /// Order by placement in one stage (0-based). `None` picks the stage
    /// with the largest weight.
    DesignatedStage(Option<usize>),
    /// Leave the tie in place.
    SharedRank,
}

impl fmt::Display for TieBreakPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TieBreakPolicy::HeadToHead => write!(f, "head2head"),
            TieBreakPolicy::CountBack => write!(f, "countback"),
            TieBreakPolicy::DesignatedStage(Some(i)) => write!(f, "stage:{}", i + 1),
            TieBreakPolicy::DesignatedStage(None) => write!(f, "stage"),
            TieBreakPolicy::SharedRank => write!(f, "shared"),
        }
    }
}

pub const POLICY_NAMES: &str = "head2head, countback, stage, stage:<i> (1-based), shared";

impl FromStr for TieBreakPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::Configuration(format!("unknown tie-break policy {s:?}; expected one of {POLICY_NAMES}"));
        match s.trim() {
            "head2head" => Ok(TieBreakPolicy::HeadToHead),
            "countback" => Ok(TieBreakPolicy::CountBack),
            "shared" => Ok(TieBreakPolicy::SharedRank),
            "stage" => Ok(TieBreakPolicy::DesignatedStage(None)),
            other => {
                let index = other.strip_prefix("stage:").ok_or_else(unknown)?;
                let index: usize = index.parse().map_err(|_| unknown())?;
                if index == 0 {
                    return Err(unknown());
                }
                Ok(TieBreakPolicy::DesignatedStage(Some(index - 1)))
            }
        }
    }
}

/// A non-empty policy list. A trailing `SharedRank` is implied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieBreakChain(Vec<TieBreakPolicy>);

impl TieBreakChain {
    pub fn new(policies: Vec<TieBreakPolicy>) -> Result<Self> {
        if policies.is_empty() {
            return Err(Error::Configuration("a tie-break chain needs at least one policy".into()));
        }
        if let Some(pos) = policies.iter().position(|p| *p == TieBreakPolicy::SharedRank) {
            if pos + 1 != policies.len() {
                return Err(Error::Configuration("shared must be the last tie-break policy".into()));
            }
        }
        Ok(TieBreakChain(policies))
    }

    pub fn shared() -> Self {
        TieBreakChain(vec![TieBreakPolicy::SharedRank])
    }

    /// Head-to-head, then count-back when a reference exists, then shared.
    pub fn olympic(has_reference: bool) -> Self {
        let mut policies = vec![TieBreakPolicy::HeadToHead];
        if has_reference {
            policies.push(TieBreakPolicy::CountBack);
        }
        policies.push(TieBreakPolicy::SharedRank);
        TieBreakChain(policies)
    }

    pub fn policies(&self) -> &[TieBreakPolicy] {
        &self.0
    }

    /// Checks the chain against what the context can supply.
    pub fn check(&self, ctx: &TieContext<'_>) -> Result<()> {
        for policy in &self.0 {
            match policy {
                TieBreakPolicy::CountBack if ctx.field.reference().is_none() => {
                    return Err(Error::Configuration(
                        "countback needs reference standings, but the event has none".into(),
                    ));
                }
                TieBreakPolicy::DesignatedStage(Some(i)) if *i >= ctx.field.stage_count() => {
                    return Err(Error::Configuration(format!(
                        "stage:{} is out of range for an event with {} stages",
                        i + 1,
                        ctx.field.stage_count()
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

impl FromStr for TieBreakChain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let policies = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        TieBreakChain::new(policies)
    }
}

impl fmt::Display for TieBreakChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", names.join(","))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TieContext<'a> {
    pub field: &'a EventField,
    pub weights: Option<&'a WeightVector>,
}

impl<'a> TieContext<'a> {
    pub fn new(field: &'a EventField) -> Self {
        TieContext { field, weights: None }
    }

    pub fn with_weights(mut self, weights: &'a WeightVector) -> Self {
        self.weights = Some(weights);
        self
    }

    fn designated_stage(&self, stage: Option<usize>) -> usize {
        stage.unwrap_or_else(|| self.weights.map(WeightVector::heaviest_stage).unwrap_or(0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TieOutcome {
    /// The policy split the group into these ordered sub-groups.
    Resolved(Vec<Vec<String>>),
    /// The policy applied but could not separate anyone.
    PassThrough,
    /// Head-to-head on a group larger than two.
    NotApplicable,
    /// The tie was left shared.
    Shared,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieResolutionRecord {
    pub members: Vec<String>,
    pub policy: TieBreakPolicy,
    pub outcome: TieOutcome,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieBreak {
    /// Ordered sub-groups; members of one sub-group remain tied.
    pub order: Vec<Vec<String>>,
    pub records: Vec<TieResolutionRecord>,
}

/// `Less` when `a` beats `b` in a strict majority of stages, `Greater` for
/// the reverse, `Equal` when neither does.
pub fn head_to_head(a: &RankVector, b: &RankVector) -> Ordering {
    let stages = a.len().min(b.len());
    let (mut a_wins, mut b_wins) = (0, 0);
    for (ra, rb) in a.iter().zip(b.iter()) {
        match ra.cmp(&rb) {
            Ordering::Less => a_wins += 1,
            Ordering::Greater => b_wins += 1,
            Ordering::Equal => {}
        }
    }
    if 2 * a_wins > stages {
        Ordering::Less
    } else if 2 * b_wins > stages {
        Ordering::Greater
    } else {
        Ordering::Equal
    }
}

pub fn break_tie(
    group: &[(&str, &RankVector)],
    chain: &TieBreakChain,
    ctx: &TieContext<'_>,
) -> Result<TieBreak> {
    if group.len() < 2 {
        return Err(Error::Contract("a tie group needs at least two members".into()));
    }
    chain.check(ctx)?;
    let mut records = Vec::new();
    let members: Vec<usize> = (0..group.len()).collect();
    let order = resolve(group, members, chain.policies(), ctx, &mut records);
    let order = order
        .into_iter()
        .map(|sub| sub.into_iter().map(|i| group[i].0.to_string()).collect())
        .collect();
    Ok(TieBreak { order, records })
}

fn names(group: &[(&str, &RankVector)], members: &[usize]) -> Vec<String> {
    members.iter().map(|&i| group[i].0.to_string()).collect()
}

/// Splits `members` by `key`, ascending, keeping input order within a part.
fn partition_by<K: Ord>(members: &[usize], key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    let mut parts: BTreeMap<K, Vec<usize>> = BTreeMap::new();
    for &m in members {
        parts.entry(key(m)).or_default().push(m);
    }
    parts.into_values().collect()
}

fn resolve(
    group: &[(&str, &RankVector)],
    members: Vec<usize>,
    policies: &[TieBreakPolicy],
    ctx: &TieContext<'_>,
    records: &mut Vec<TieResolutionRecord>,
) -> Vec<Vec<usize>> {
    let Some((&policy, rest)) = policies.split_first() else {
        return vec![members];
    };
    if members.len() < 2 {
        return vec![members];
    }
    let parts = match policy {
        TieBreakPolicy::SharedRank => {
            records.push(TieResolutionRecord {
                members: names(group, &members),
                policy,
                outcome: TieOutcome::Shared,
            });
            return vec![members];
        }
        TieBreakPolicy::HeadToHead if members.len() != 2 => {
            records.push(TieResolutionRecord {
                members: names(group, &members),
                policy,
                outcome: TieOutcome::NotApplicable,
            });
            return resolve(group, members, rest, ctx, records);
        }
        TieBreakPolicy::HeadToHead => {
            let (a, b) = (members[0], members[1]);
            match head_to_head(group[a].1, group[b].1) {
                Ordering::Less => vec![vec![a], vec![b]],
                Ordering::Greater => vec![vec![b], vec![a]],
                Ordering::Equal => vec![members.clone()],
            }
        }
        TieBreakPolicy::CountBack => {
            let reference = ctx.field.reference();
            // `None` sorts after every `Some`, so unranked members trail.
            partition_by(&members, |m| {
                let rank = reference.and_then(|r| r.rank_of(group[m].0));
                (rank.is_none(), rank)
            })
        }
        TieBreakPolicy::DesignatedStage(stage) => {
            let stage = ctx.designated_stage(stage);
            partition_by(&members, |m| group[m].1.get(stage))
        }
    };
    if parts.len() == 1 {
        records.push(TieResolutionRecord {
            members: names(group, &members),
            policy,
            outcome: TieOutcome::PassThrough,
        });
        return resolve(group, members, rest, ctx, records);
    }
    records.push(TieResolutionRecord {
        members: names(group, &members),
        policy,
        outcome: TieOutcome::Resolved(parts.iter().map(|p| names(group, p)).collect()),
    });
    parts
        .into_iter()
        .flat_map(|part| resolve(group, part, rest, ctx, records))
        .collect()
}

/// Runs `chain` over every tie group of `standings` and renumbers.
pub fn apply_chain(standings: Standings, chain: &TieBreakChain, ctx: &TieContext<'_>) -> Result<Standings> {
    chain.check(ctx)?;
    let (groups, mut records) = standings.into_groups();
    let mut resolved: Vec<Vec<StandingsEntry>> = Vec::with_capacity(groups.len());
    for group in groups {
        if group.len() < 2 {
            resolved.push(group);
            continue;
        }
        let members: Vec<(&str, &RankVector)> = group.iter().map(|e| (e.name.as_str(), &e.ranks)).collect();
        let mut sub_records = Vec::new();
        let order = resolve(&members, (0..group.len()).collect(), chain.policies(), ctx, &mut sub_records);
        records.extend(sub_records);
        let mut slots: Vec<Option<StandingsEntry>> = group.into_iter().map(Some).collect();
        for part in order {
            resolved.push(part.into_iter().filter_map(|i| slots[i].take()).collect());
        }
    }
    Ok(Standings::from_groups(resolved, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Competitor;

    fn rv(values: &[f64]) -> RankVector {
        RankVector::from_values(values).unwrap()
    }

    fn women_finals() -> EventField {
        let rows: [(&str, [f64; 3]); 8] = [
            ("Garnbret", [5.0, 1.0, 1.0]),
            ("Nonaka", [3.0, 3.0, 5.0]),
            ("Noguchi", [4.0, 4.0, 4.0]),
            ("Miroslaw", [1.0, 8.0, 8.0]),
            ("Raboutou", [7.0, 2.0, 6.0]),
            ("Jaubert", [2.0, 6.0, 7.0]),
            ("Pilz", [6.0, 5.0, 3.0]),
            ("Seo", [8.0, 7.0, 2.0]),
        ];
        let comps = rows.iter().map(|(n, r)| Competitor::new(*n, rv(r))).collect();
        EventField::unnamed(3, comps).unwrap()
    }

    #[test]
    fn policy_names_round_trip() {
        for name in ["head2head", "countback", "stage", "stage:2", "shared"] {
            let p: TieBreakPolicy = name.parse().unwrap();
            assert_eq!(p.to_string(), name);
        }
        assert!("stage:0".parse::<TieBreakPolicy>().is_err());
        assert!("coin".parse::<TieBreakPolicy>().is_err());
        assert!("shared,head2head".parse::<TieBreakChain>().is_err());
        assert!("".parse::<TieBreakChain>().is_err());
    }

    #[test]
    fn head_to_head_examples() {
        let field = women_finals();
        let ctx = TieContext::new(&field);
        let chain = TieBreakChain::new(vec![TieBreakPolicy::HeadToHead]).unwrap();
        let noguchi = rv(&[4.0, 4.0, 4.0]);
        let miroslaw = rv(&[1.0, 8.0, 8.0]);
        let out = break_tie(&[("Miroslaw", &miroslaw), ("Noguchi", &noguchi)], &chain, &ctx).unwrap();
        assert_eq!(out.order, vec![vec!["Noguchi".to_string()], vec!["Miroslaw".to_string()]]);
        assert_eq!(out.records[0].policy, TieBreakPolicy::HeadToHead);

        let raboutou = rv(&[7.0, 2.0, 6.0]);
        let jaubert = rv(&[2.0, 6.0, 7.0]);
        let out = break_tie(&[("Jaubert", &jaubert), ("Raboutou", &raboutou)], &chain, &ctx).unwrap();
        assert_eq!(out.order[0], vec!["Raboutou".to_string()]);
    }

    #[test]
    fn identical_vectors_stay_shared() {
        let field = women_finals();
        let ctx = TieContext::new(&field);
        let chain: TieBreakChain = "head2head,shared".parse().unwrap();
        let a = rv(&[2.0, 3.0, 4.0]);
        let out = break_tie(&[("A", &a), ("B", &a)], &chain, &ctx).unwrap();
        assert_eq!(out.order.len(), 1);
        assert_eq!(out.records[0].outcome, TieOutcome::PassThrough);
        assert_eq!(out.records[1].outcome, TieOutcome::Shared);
    }

    #[test]
    fn majority_requires_more_than_half_of_all_stages() {
        // one win, two equal stages: not a majority of three
        assert_eq!(head_to_head(&rv(&[1.0, 2.0, 2.0]), &rv(&[2.0, 2.0, 2.0])), Ordering::Equal);
        assert_eq!(head_to_head(&rv(&[1.0, 1.0, 3.0]), &rv(&[2.0, 2.0, 2.0])), Ordering::Less);
        assert_eq!(head_to_head(&rv(&[1.0, 4.0]), &rv(&[2.0, 3.0])), Ordering::Equal);
    }

    #[test]
    fn head_to_head_skips_large_groups() {
        let field = women_finals();
        let ctx = TieContext::new(&field);
        let chain: TieBreakChain = "head2head,stage:1".parse().unwrap();
        let (a, b, c) = (rv(&[1.0, 3.0]), rv(&[2.0, 2.0]), rv(&[3.0, 1.0]));
        let out = break_tie(&[("A", &a), ("B", &b), ("C", &c)], &chain, &ctx).unwrap();
        assert_eq!(out.records[0].outcome, TieOutcome::NotApplicable);
        assert_eq!(out.order, vec![vec!["A".to_string()], vec!["B".to_string()], vec!["C".to_string()]]);
    }

    #[test]
    fn countback_needs_reference() {
        let field = women_finals();
        let ctx = TieContext::new(&field);
        let chain: TieBreakChain = "countback".parse().unwrap();
        let a = rv(&[2.0, 3.0, 4.0]);
        let err = break_tie(&[("A", &a), ("B", &a)], &chain, &ctx).unwrap_err();
        assert!(matches!(err, Error::Configuration(_)));
    }

    #[test]
    fn countback_orders_by_reference_and_passes_on_unranked() {
        use crate::field::ReferenceStandings;
        let comps = vec![
            Competitor::new("A", rv(&[1.0])),
            Competitor::new("B", rv(&[2.0])),
            Competitor::new("C", rv(&[3.0])),
            Competitor::new("D", rv(&[4.0])),
        ];
        let reference = ReferenceStandings::new(BTreeMap::from([("C".to_string(), 1), ("A".to_string(), 2)])).unwrap();
        let field = EventField::new(vec!["s".into()], comps, Some(reference)).unwrap();
        let ctx = TieContext::new(&field);
        let chain: TieBreakChain = "countback,stage:1".parse().unwrap();
        let (a, b, c, d) = (rv(&[1.0]), rv(&[2.0]), rv(&[3.0]), rv(&[4.0]));
        let out = break_tie(&[("D", &d), ("A", &a), ("B", &b), ("C", &c)], &chain, &ctx).unwrap();
        let flat: Vec<&str> = out.order.iter().map(|g| g[0].as_str()).collect();
        assert_eq!(flat, ["C", "A", "B", "D"]);
    }

    #[test]
    fn designated_stage_defaults_to_heaviest() {
        let comps = vec![Competitor::new("A", rv(&[1.0, 2.0])), Competitor::new("B", rv(&[2.0, 1.0]))];
        let field = EventField::unnamed(2, comps).unwrap();
        let weights = WeightVector::new(vec![1.0, 2.0]).unwrap();
        let ctx = TieContext::new(&field).with_weights(&weights);
        let chain: TieBreakChain = "stage".parse().unwrap();
        let (a, b) = (rv(&[1.0, 2.0]), rv(&[2.0, 1.0]));
        let out = break_tie(&[("A", &a), ("B", &b)], &chain, &ctx).unwrap();
        assert_eq!(out.order[0], vec!["B".to_string()]);
        let chain: TieBreakChain = "stage:3".parse().unwrap();
        assert!(break_tie(&[("A", &a), ("B", &b)], &chain, &ctx).is_err());
    }

    #[test]
    fn singleton_group_is_a_contract_error() {
        let field = women_finals();
        let a = rv(&[1.0, 1.0, 1.0]);
        let res = break_tie(&[("A", &a)], &TieBreakChain::shared(), &TieContext::new(&field));
        assert!(matches!(res, Err(Error::Contract(_))));
    }
}
