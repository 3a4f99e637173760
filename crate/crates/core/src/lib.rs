//! Ranking-based scoring for multi-discipline competitions.
//!
//! Each competitor carries one rank per stage. A [`ScoringSystem`] combines
//! those ranks (a weighted sum of a [`ScoreFunction`], or an exact product),
//! sorts ascending, and resolves ties through a [`TieBreakChain`].
//!
//! ```
//! use rankforge_core::{dataset, rank_field, Method, ScoringSystem, TieBreakChain};
//!
//! let finals = &dataset::embedded("women-finals").unwrap().field;
//! let system = ScoringSystem::new(Method::Product).with_chain("head2head".parse().unwrap());
//! let standings = rank_field(finals, &system).unwrap();
//! assert_eq!(standings.names()[..3], ["Garnbret", "Nonaka", "Noguchi"]);
//! ```

pub mod analysis;
pub mod dataset;
mod error;
pub mod field;
pub mod rank;
pub mod score;
pub mod sim;
pub mod standings;
pub mod tables;
pub mod tiebreak;

pub use error::{Error, Result};
pub use field::{Competitor, EventField, ReferenceStandings};
pub use rank::{Rank, RankVector};
pub use score::{aggregate_score, product_score, Score, ScoreFunction, WeightVector};
pub use standings::{rank_field, score_field, verify_log_product_equivalence, Method, ScoringSystem, Standings};
pub use tiebreak::{apply_chain, break_tie, TieBreakChain, TieBreakPolicy, TieContext};
