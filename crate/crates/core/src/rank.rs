//! Placements within a single stage.
//!
//! A [`Rank`] is stored as twice its value so that tie-averaged placements
//! such as `19.5` stay exact. Quarter ranks and anything below 1 are
//! rejected at construction.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u32);

impl Rank {
    pub const FIRST: Rank = Rank(2);

    /// Integer placement `1, 2, 3, ...`.
    pub fn new(place: u32) -> Result<Self> {
        place
            .checked_mul(2)
            .filter(|_| place >= 1)
            .map(Rank)
            .ok_or_else(|| Error::InvalidRank(place.to_string()))
    }

    /// Builds a rank from twice its value, so `from_doubled(39)` is `19.5`.
    pub fn from_doubled(doubled: u32) -> Result<Self> {
        if doubled < 2 {
            return Err(Error::InvalidRank(format!("{}", doubled as f64 / 2.0)));
        }
        Ok(Rank(doubled))
    }

    pub fn from_f64(value: f64) -> Result<Self> {
        let doubled = value * 2.0;
        if !doubled.is_finite() || doubled.fract() != 0.0 || doubled < 2.0 || doubled > u32::MAX as f64 {
            return Err(Error::InvalidRank(value.to_string()));
        }
        Ok(Rank(doubled as u32))
    }

    pub fn doubled(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Integer placement, if this rank is not a shared half-rank.
    pub fn place(self) -> Option<u32> {
        self.is_integer().then_some(self.0 / 2)
    }

    pub fn to_ratio(self) -> Ratio<i128> {
        Ratio::new(self.0 as i128, 2)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}.5", self.0 / 2)
        }
    }
}

impl fmt::Debug for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rank({self})")
    }
}

/// Accepts `13` and `19.5`; rejects `19.0`, `19.25`, signs and exponents.
impl FromStr for Rank {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidRank(s.to_string());
        let (whole, half) = match s.split_once('.') {
            None => (s, false),
            Some((whole, "5")) => (whole, true),
            Some(_) => return Err(invalid()),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let whole: u32 = whole.parse().map_err(|_| invalid())?;
        let doubled = whole
            .checked_mul(2)
            .and_then(|d| d.checked_add(half as u32))
            .ok_or_else(invalid)?;
        Rank::from_doubled(doubled).map_err(|_| invalid())
    }
}

/// One competitor's placements across all stages, in stage order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RankVector(Vec<Rank>);

impl RankVector {
    pub fn new(ranks: Vec<Rank>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::Contract("a rank vector needs at least one stage".into()));
        }
        Ok(RankVector(ranks))
    }

    /// Convenience for literal data; every value must be a valid rank.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        values
            .iter()
            .map(|&v| Rank::from_f64(v))
            .collect::<Result<Vec<_>>>()
            .and_then(RankVector::new)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ranks(&self) -> &[Rank] {
        &self.0
    }

    pub fn get(&self, stage: usize) -> Option<Rank> {
        self.0.get(stage).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Rank> + '_ {
        self.0.iter().copied()
    }
}

impl fmt::Display for RankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}
