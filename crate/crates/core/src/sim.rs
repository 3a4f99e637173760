//! Seeded Monte Carlo estimates of how often a profiled competitor makes a
//! top-`k` cut under each scoring system.
//!
//! Stages are independent uniform permutations. Trial `t` draws from a
//! ChaCha8 stream selected by `(seed, t)`, and per-trial outcomes are summed
//! exactly, so results do not depend on thread count or scheduling. All
//! systems score the same generated field in each trial.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Competitor, EventField};
use crate::rank::{Rank, RankVector};
use crate::standings::{rank_field, ScoringSystem};

/// Name of the profiled competitor in generated fields.
pub const SUBJECT: &str = "subject";

/// Stage placements forced on the subject; other stages are random.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecialistProfile {
    forced: BTreeMap<usize, u32>,
}

impl SpecialistProfile {
    pub fn unforced() -> Self {
        SpecialistProfile::default()
    }

    /// `forced` maps a 0-based stage index to an integer placement.
    pub fn new(forced: BTreeMap<usize, u32>) -> Self {
        SpecialistProfile { forced }
    }

    pub fn forced(&self) -> &BTreeMap<usize, u32> {
        &self.forced
    }

    fn check(&self, n: usize, stages: usize) -> Result<()> {
        for (&stage, &place) in &self.forced {
            if stage >= stages {
                return Err(Error::Configuration(format!(
                    "forced stage {} is out of range for {stages} stages",
                    stage + 1
                )));
            }
            if place == 0 || place as usize > n {
                return Err(Error::Configuration(format!(
                    "forced placement {place} is outside 1..={n}"
                )));
            }
        }
        Ok(())
    }
}

/// One uniformly random permutation per stage, with the subject (first
/// competitor) swapped onto any forced placement.
pub fn generate_field<R: Rng + ?Sized>(
    n: usize,
    stages: usize,
    profile: &SpecialistProfile,
    rng: &mut R,
) -> Result<EventField> {
    if n == 0 || stages == 0 {
        return Err(Error::Configuration("need at least one competitor and one stage".into()));
    }
    profile.check(n, stages)?;
    let mut columns: Vec<Vec<u32>> = Vec::with_capacity(stages);
    for stage in 0..stages {
        let mut places: Vec<u32> = (1..=n as u32).collect();
        places.shuffle(rng);
        if let Some(&forced) = profile.forced.get(&stage) {
            let at = places.iter().position(|&p| p == forced).expect("forced place is in 1..=n");
            places.swap(0, at);
        }
        columns.push(places);
    }
    let competitors = (0..n)
        .map(|i| {
            let ranks = columns
                .iter()
                .map(|col| Rank::new(col[i]))
                .collect::<Result<Vec<_>>>()?;
            let name = if i == 0 { SUBJECT.to_string() } else { format!("c{i:03}") };
            Ok(Competitor::new(name, RankVector::new(ranks)?))
        })
        .collect::<Result<Vec<_>>>()?;
    EventField::unnamed(stages, competitors)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimSystem {
    pub label: String,
    pub system: ScoringSystem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub stages: usize,
    pub k: usize,
    pub trials: u64,
    pub seed: u64,
    pub systems: Vec<SimSystem>,
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl SimConfig {
    fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Configuration("trials must be at least 1".into()));
        }
        if self.n < 2 || self.stages == 0 {
            return Err(Error::Configuration("need n >= 2 and at least one stage".into()));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::Configuration(format!("k must be in 1..={}, got {}", self.n, self.k)));
        }
        if self.systems.is_empty() {
            return Err(Error::Configuration("at least one scoring system is required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodEstimate {
    pub label: String,
    /// Estimated probability that the subject makes the cut.
    pub estimate: f64,
    /// `sqrt(p (1 - p) / trials)`.
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub estimates: Vec<MethodEstimate>,
    pub trials: u64,
    pub seed: u64,
}

impl SimResult {
    /// `method,estimate,stderr,trials,seed` with full-precision floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,estimate,stderr,trials,seed\n");
        for e in &self.estimates {
            let _ = writeln!(out, "{},{},{},{},{}", e.label, e.estimate, e.std_error, self.trials, self.seed);
        }
        out
    }

    pub fn get(&self, label: &str) -> Option<&MethodEstimate> {
        self.estimates.iter().find(|e| e.label == label)
    }
}

/// Subject's share of a qualification slot in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Share {
    Out,
    In,
    /// `slots / group`: a tie group straddles the cut.
    Partial { slots: usize, group: usize },
}

#[derive(Clone, Debug)]
struct Tally {
    full: Vec<u64>,
    partial: Vec<BigRational>,
}

impl Tally {
    fn new(systems: usize) -> Self {
        Tally {
            full: vec![0; systems],
            partial: vec![BigRational::zero(); systems],
        }
    }

    fn add(mut self, shares: Vec<Share>) -> Self {
        for (i, share) in shares.into_iter().enumerate() {
            match share {
                Share::Out => {}
                Share::In => self.full[i] += 1,
                Share::Partial { slots, group } => {
                    self.partial[i] += BigRational::new(BigInt::from(slots), BigInt::from(group));
                }
            }
        }
        self
    }

    fn merge(mut self, other: Tally) -> Self {
        for i in 0..self.full.len() {
            self.full[i] += other.full[i];
            self.partial[i] += &other.partial[i];
        }
        self
    }
}

fn subject_share(field: &EventField, system: &ScoringSystem, k: usize) -> Result<Share> {
    let standings = rank_field(field, system)?;
    let entries = standings.entries();
    let at = entries
        .iter()
        .position(|e| e.name == SUBJECT)
        .expect("generated fields contain the subject");
    let group_id = entries[at].tie_group;
    let start = entries.iter().position(|e| e.tie_group == group_id).expect("subject's group exists");
    let size = entries[start..].iter().take_while(|e| e.tie_group == group_id).count();
    Ok(if start + size <= k {
        Share::In
    } else if start >= k {
        Share::Out
    } else {
        Share::Partial { slots: k - start, group: size }
    })
}

fn run_trial(config: &SimConfig, profile: &SpecialistProfile, trial: u64) -> Result<Vec<Share>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    let field = generate_field(config.n, config.stages, profile, &mut rng)?;
    config
        .systems
        .iter()
        .map(|s| subject_share(&field, &s.system, config.k))
        .collect()
}

fn tally(config: &SimConfig, profile: &SpecialistProfile) -> Result<Tally> {
    let systems = config.systems.len();
    (0..config.trials)
        .into_par_iter()
        .map(|trial| run_trial(config, profile, trial))
        .try_fold(|| Tally::new(systems), |acc, shares| Ok::<_, Error>(acc.add(shares?)))
        .try_reduce(|| Tally::new(systems), |a, b| Ok(a.merge(b)))
}

pub fn simulate_qualification(config: &SimConfig, profile: &SpecialistProfile) -> Result<SimResult> {
    config.check()?;
    profile.check(config.n, config.stages)?;
    let totals = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Configuration(format!("cannot build thread pool: {e}")))?
            .install(|| tally(config, profile))?,
        None => tally(config, profile)?,
    };
    let trials = config.trials;
    let estimates = config
        .systems
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let hits = BigRational::from_integer(BigInt::from(totals.full[i])) + &totals.partial[i];
            let p = (hits / BigInt::from(trials)).to_f64().unwrap_or(f64::NAN);
            MethodEstimate {
                label: s.label.clone(),
                estimate: p,
                std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            }
        })
        .collect();
    Ok(SimResult {
        estimates,
        trials,
        seed: config.seed,
    })
}
