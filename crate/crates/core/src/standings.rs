//! Combined standings for a field under a scoring system.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::EventField;
use crate::rank::RankVector;
use crate::score::{aggregate_score, weighted_product_score, Score, ScoreFunction, WeightVector};
use crate::tiebreak::{apply_chain, TieBreakChain, TieContext, TieResolutionRecord};

/// How per-stage ranks combine into one score.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Weighted sum of a score function over stages.
    Additive(ScoreFunction),
    /// Exact product of the ranks (weights act as integer exponents).
    Product,
}

impl Method {
    pub fn sum() -> Self {
        Method::Additive(ScoreFunction::Linear)
    }

    pub fn log() -> Self {
        Method::Additive(ScoreFunction::Logarithmic)
    }

    pub fn sqrt() -> Self {
        Method::Additive(ScoreFunction::sqrt())
    }

    pub fn score(&self, ranks: &RankVector, weights: &WeightVector) -> Result<Score> {
        match self {
            Method::Additive(f) => aggregate_score(ranks, f, weights),
            Method::Product => weighted_product_score(ranks, weights).map(Score::Exact),
        }
    }

    /// The additive score function that ranks identically to this method.
    pub fn score_function(&self) -> ScoreFunction {
        match self {
            Method::Additive(f) => f.clone(),
            Method::Product => ScoreFunction::Logarithmic,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Product => write!(f, "product"),
            Method::Additive(ScoreFunction::Linear) => write!(f, "sum"),
            Method::Additive(func) => write!(f, "{func}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoringSystem {
    pub method: Method,
    /// `None` means every stage weighs 1.
    pub weights: Option<WeightVector>,
    pub chain: TieBreakChain,
}

impl ScoringSystem {
    /// Unweighted, ties left shared.
    pub fn new(method: Method) -> Self {
        ScoringSystem {
            method,
            weights: None,
            chain: TieBreakChain::shared(),
        }
    }

    pub fn with_weights(mut self, weights: WeightVector) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_chain(mut self, chain: TieBreakChain) -> Self {
        self.chain = chain;
        self
    }

    pub fn weights_for(&self, stages: usize) -> Result<WeightVector> {
        match &self.weights {
            Some(w) if w.len() != stages => Err(Error::Contract(format!(
                "{} weights given for an event with {stages} stages",
                w.len()
            ))),
            Some(w) => Ok(w.clone()),
            None => Ok(WeightVector::unit(stages)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandingsEntry {
    pub name: String,
    pub ranks: RankVector,
    pub score: Score,
    /// `1 + ` the number of competitors in strictly earlier groups.
    pub rank: u32,
    /// Index of this entry's (possibly singleton) tie group.
    pub tie_group: usize,
}

/// Competitors in ascending score order, grouped into contiguous ties.
#[derive(Clone, Debug, PartialEq)]
pub struct Standings {
    entries: Vec<StandingsEntry>,
    resolutions: Vec<TieResolutionRecord>,
}

impl Standings {
    pub(crate) fn from_groups(groups: Vec<Vec<StandingsEntry>>, resolutions: Vec<TieResolutionRecord>) -> Self {
        let mut entries = Vec::with_capacity(groups.iter().map(Vec::len).sum());
        let mut ahead = 0u32;
        for (group_id, group) in groups.into_iter().filter(|g| !g.is_empty()).enumerate() {
            let size = group.len() as u32;
            for mut entry in group {
                entry.rank = ahead + 1;
                entry.tie_group = group_id;
                entries.push(entry);
            }
            ahead += size;
        }
        Standings { entries, resolutions }
    }

    pub(crate) fn into_groups(self) -> (Vec<Vec<StandingsEntry>>, Vec<TieResolutionRecord>) {
        let mut groups: Vec<Vec<StandingsEntry>> = Vec::new();
        let mut current = usize::MAX;
        for entry in self.entries {
            if entry.tie_group != current {
                current = entry.tie_group;
                groups.push(Vec::new());
            }
            groups.last_mut().expect("group pushed above").push(entry);
        }
        (groups, self.resolutions)
    }

    pub fn entries(&self) -> &[StandingsEntry] {
        &self.entries
    }

    pub fn resolutions(&self) -> &[TieResolutionRecord] {
        &self.resolutions
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, name: &str) -> Option<&StandingsEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn rank_of(&self, name: &str) -> Option<u32> {
        self.entry(name).map(|e| e.rank)
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn groups(&self) -> Vec<&[StandingsEntry]> {
        self.entries
            .chunk_by(|a, b| a.tie_group == b.tie_group)
            .collect()
    }

    /// Groups of two or more competitors sharing a rank.
    pub fn ties(&self) -> Vec<&[StandingsEntry]> {
        self.groups().into_iter().filter(|g| g.len() > 1).collect()
    }

    pub fn is_total_order(&self) -> bool {
        self.ties().is_empty()
    }

    /// Same competitors with the same rank numbers, hence the same order and
    /// tie groups.
    pub fn same_ranking(&self, other: &Standings) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let theirs: HashMap<&str, u32> = other.entries.iter().map(|e| (e.name.as_str(), e.rank)).collect();
        self.entries
            .iter()
            .all(|e| theirs.get(e.name.as_str()) == Some(&e.rank))
    }
}

/// Scores and sorts without running any tie-break policy.
pub fn score_field(field: &EventField, method: &Method, weights: &WeightVector) -> Result<Standings> {
    if weights.len() != field.stage_count() {
        return Err(Error::Contract(format!(
            "{} weights given for an event with {} stages",
            weights.len(),
            field.stage_count()
        )));
    }
    let mut scored = field
        .competitors()
        .iter()
        .map(|c| {
            if c.ranks.len() != field.stage_count() {
                return Err(Error::Validation(format!("{} has the wrong number of ranks", c.name)));
            }
            Ok(StandingsEntry {
                name: c.name.clone(),
                ranks: c.ranks.clone(),
                score: method.score(&c.ranks, weights)?,
                rank: 0,
                tie_group: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| a.score.sort_cmp(b.score));

    let mut groups: Vec<Vec<StandingsEntry>> = Vec::new();
    for entry in scored {
        match groups.last_mut() {
            Some(group) if group.last().is_some_and(|prev| prev.score.tie_cmp(entry.score) == Ordering::Equal) => {
                group.push(entry)
            }
            _ => groups.push(vec![entry]),
        }
    }
    Ok(Standings::from_groups(groups, Vec::new()))
}

/// Scores, sorts, groups ties and applies the system's tie-break chain.
pub fn rank_field(field: &EventField, system: &ScoringSystem) -> Result<Standings> {
    let weights = system.weights_for(field.stage_count())?;
    let ctx = TieContext::new(field).with_weights(&weights);
    system.chain.check(&ctx)?;
    let raw = score_field(field, &system.method, &weights)?;
    apply_chain(raw, &system.chain, &ctx)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogProductReport {
    pub product: Standings,
    pub log: Standings,
    pub matches: bool,
}

/// Compares exact-product standings with log-sum standings, ties included.
pub fn verify_log_product_equivalence(field: &EventField) -> Result<LogProductReport> {
    let weights = WeightVector::unit(field.stage_count());
    let product = score_field(field, &Method::Product, &weights)?;
    let log = score_field(field, &Method::log(), &weights)?;
    let matches = product.same_ranking(&log);
    Ok(LogProductReport { product, log, matches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Competitor;
    use crate::tiebreak::TieBreakPolicy;

    fn field(rows: &[(&str, &[f64])]) -> EventField {
        let s = rows[0].1.len();
        let comps = rows
            .iter()
            .map(|(n, r)| Competitor::new(*n, RankVector::from_values(r).unwrap()))
            .collect();
        EventField::unnamed(s, comps).unwrap()
    }

    #[test]
    fn singleton_field() {
        let f = field(&[("Solo", &[1.0, 1.0])]);
        let st = rank_field(&f, &ScoringSystem::new(Method::Product)).unwrap();
        assert_eq!(st.entries()[0].rank, 1);
    }

    #[test]
    fn competition_numbering_with_ties() {
        let f = field(&[("A", &[1.0, 3.0]), ("B", &[2.0, 2.0]), ("C", &[3.0, 1.0])]);
        let st = rank_field(&f, &ScoringSystem::new(Method::sum())).unwrap();
        assert!(st.entries().iter().all(|e| e.rank == 1));
        assert_eq!(st.ties().len(), 1);
        let st = rank_field(&f, &ScoringSystem::new(Method::Product)).unwrap();
        assert_eq!(st.names(), ["A", "C", "B"]);
        assert_eq!(st.rank_of("C"), Some(1));
        assert_eq!(st.rank_of("B"), Some(3));
    }

    #[test]
    fn skating_tiebreak_by_long_program() {
        // 3rd + 1st beats 1st + 2nd on the long-program tie-break
        let f = field(&[("A", &[3.0, 1.0]), ("B", &[1.0, 2.0]), ("C", &[2.0, 3.0])]);
        let system = ScoringSystem::new(Method::sum())
            .with_weights(WeightVector::new(vec![1.0, 2.0]).unwrap())
            .with_chain(TieBreakChain::new(vec![TieBreakPolicy::DesignatedStage(None)]).unwrap());
        let st = rank_field(&f, &system).unwrap();
        assert_eq!(st.names(), ["A", "B", "C"]);
        assert_eq!(st.rank_of("B"), Some(2));
        assert_eq!(st.resolutions().len(), 1);
    }

    #[test]
    fn weight_length_is_checked() {
        let f = field(&[("A", &[1.0, 2.0]), ("B", &[2.0, 1.0])]);
        let system = ScoringSystem::new(Method::sum()).with_weights(WeightVector::unit(3));
        assert!(matches!(rank_field(&f, &system), Err(Error::Contract(_))));
    }

    #[test]
    fn float_ties_are_found() {
        let f = field(&[("A", &[1.0, 2.0, 3.0]), ("B", &[2.0, 3.0, 1.0]), ("C", &[3.0, 1.0, 2.0])]);
        let st = score_field(&f, &Method::sqrt(), &WeightVector::unit(3)).unwrap();
        assert_eq!(st.ties().len(), 1);
        assert!(st.entries().iter().all(|e| e.rank == 1));
    }

    #[test]
    fn chain_application_recorded() {
        let f = field(&[
            ("B", &[2.0, 1.0, 2.0]),
            ("A", &[1.0, 4.0, 1.0]),
            ("C", &[3.0, 2.0, 3.0]),
            ("D", &[4.0, 3.0, 4.0]),
        ]);
        let system = ScoringSystem::new(Method::Product).with_chain("head2head".parse().unwrap());
        let st = rank_field(&f, &system).unwrap();
        assert_eq!(st.names(), ["A", "B", "C", "D"]);
        assert_eq!(st.rank_of("B"), Some(2));
        assert_eq!(st.resolutions()[0].policy, TieBreakPolicy::HeadToHead);
    }
}
