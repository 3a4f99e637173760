//! Competitors and their per-stage placements.

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};
use crate::rank::{Rank, RankVector};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Competitor {
    pub name: String,
    pub ranks: RankVector,
}

impl Competitor {
    pub fn new(name: impl Into<String>, ranks: RankVector) -> Self {
        Competitor {
            name: name.into(),
            ranks,
        }
    }
}

/// Placements from an earlier round (e.g. qualification), used by count-back.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReferenceStandings {
    ranks: BTreeMap<String, u32>,
}

impl ReferenceStandings {
    pub fn new(ranks: BTreeMap<String, u32>) -> Result<Self> {
        if let Some((name, _)) = ranks.iter().find(|(_, &r)| r == 0) {
            return Err(Error::Validation(format!("reference rank for {name} must be positive")));
        }
        Ok(ReferenceStandings { ranks })
    }

    pub fn rank_of(&self, name: &str) -> Option<u32> {
        self.ranks.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// A validated set of competitors, each with one rank per stage.
///
/// Within each stage the ranks form a tie-averaged permutation of `1..=n`:
/// `k` competitors sharing placements `m..m+k` all carry `m + (k-1)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventField {
    stage_names: Vec<String>,
    competitors: Vec<Competitor>,
    reference: Option<ReferenceStandings>,
    subset: bool,
}

impl EventField {
    pub fn new(
        stage_names: Vec<String>,
        competitors: Vec<Competitor>,
        reference: Option<ReferenceStandings>,
    ) -> Result<Self> {
        let field = EventField {
            stage_names,
            competitors,
            reference,
            subset: false,
        };
        field.validate()?;
        Ok(field)
    }

    /// Field with stages named `stage1..stageS`.
    pub fn unnamed(stages: usize, competitors: Vec<Competitor>) -> Result<Self> {
        let names = (1..=stages).map(|i| format!("stage{i}")).collect();
        EventField::new(names, competitors, None)
    }

    /// Keeps the competitors matching `keep`, with their ranks unchanged.
    ///
    /// The result is flagged as a subset: its stage ranks are no longer a
    /// permutation of the reduced field size, so the per-stage validator is
    /// not re-applied.
    pub fn restrict(&self, keep: impl Fn(&Competitor) -> bool) -> EventField {
        EventField {
            stage_names: self.stage_names.clone(),
            competitors: self.competitors.iter().filter(|c| keep(c)).cloned().collect(),
            reference: self.reference.clone(),
            subset: true,
        }
    }

    pub fn stage_count(&self) -> usize {
        self.stage_names.len()
    }

    pub fn stage_names(&self) -> &[String] {
        &self.stage_names
    }

    pub fn competitors(&self) -> &[Competitor] {
        &self.competitors
    }

    pub fn len(&self) -> usize {
        self.competitors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.competitors.is_empty()
    }

    pub fn is_subset(&self) -> bool {
        self.subset
    }

    pub fn reference(&self) -> Option<&ReferenceStandings> {
        self.reference.as_ref()
    }

    pub fn competitor(&self, name: &str) -> Option<&Competitor> {
        self.competitors.iter().find(|c| c.name == name)
    }

    pub fn with_reference(mut self, reference: Option<ReferenceStandings>) -> Result<Self> {
        self.reference = reference;
        self.validate_reference()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.stage_names.is_empty() {
            return Err(Error::Validation("an event needs at least one stage".into()));
        }
        if self.competitors.is_empty() {
            return Err(Error::Validation("an event needs at least one competitor".into()));
        }
        let mut seen = HashSet::new();
        for c in &self.competitors {
            if c.name.is_empty() {
                return Err(Error::Validation("competitor names must be non-empty".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Validation(format!("duplicate competitor name {:?}", c.name)));
            }
            if c.ranks.len() != self.stage_count() {
                return Err(Error::Validation(format!(
                    "{} has {} ranks but the event has {} stages",
                    c.name,
                    c.ranks.len(),
                    self.stage_count()
                )));
            }
        }
        for (stage, stage_name) in self.stage_names.iter().enumerate() {
            let ranks: Vec<Rank> = self
                .competitors
                .iter()
                .map(|c| c.ranks.ranks()[stage])
                .collect();
            check_tie_averaged(stage_name, &ranks)?;
        }
        self.validate_reference()
    }

    fn validate_reference(&self) -> Result<()> {
        let Some(reference) = &self.reference else {
            return Ok(());
        };
        for name in reference.ranks.keys() {
            if self.competitor(name).is_none() {
                return Err(Error::Validation(format!("reference standings name unknown competitor {name:?}")));
            }
        }
        Ok(())
    }
}

/// Checks that `ranks` is a tie-averaged permutation of `1..=ranks.len()`.
pub fn check_tie_averaged(stage: &str, ranks: &[Rank]) -> Result<()> {
    let mut doubled: Vec<u32> = ranks.iter().map(|r| r.doubled()).collect();
    doubled.sort_unstable();
    // `next` is the smallest unoccupied placement.
    let mut next: u64 = 1;
    let mut i = 0;
    while i < doubled.len() {
        let value = doubled[i];
        let group = doubled[i..].iter().take_while(|&&d| d == value).count();
        let expected = 2 * next + group as u64 - 1;
        if value as u64 != expected {
            let shown: Vec<String> = doubled[i..i + group]
                .iter()
                .map(|&d| Rank::from_doubled(d).map(|r| r.to_string()).unwrap_or_default())
                .collect();
            let last = next + group as u64 - 1;
            let expected_rank = Rank::from_doubled(expected as u32)
                .map(|r| r.to_string())
                .unwrap_or_else(|_| "?".into());
            let detail = if group == 1 {
                format!("expected {expected_rank} for place {next}")
            } else {
                format!("expected {expected_rank} for places {next}-{last}")
            };
            return Err(Error::Validation(format!(
                "stage {stage:?}: ranks [{}] are not a tie-averaged placement ({detail})",
                shown.join(", ")
            )));
        }
        next += group as u64;
        i += group;
    }
    Ok(())
}
