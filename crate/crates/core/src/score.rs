//! Score functions and per-competitor aggregate scores.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rank::{Rank, RankVector};

/// Relative tolerance under which two floating scores count as tied.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-9;

/// An aggregate or per-stage score. Lower is better.
///
/// `Exact` is used whenever every ingredient is rational (linear scores,
/// products, tables with half-integer points, integer weights); everything
/// else is carried as `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Score {
    Exact(Ratio<i128>),
    Float(f64),
}

impl Score {
    pub fn to_f64(self) -> f64 {
        match self {
            Score::Exact(r) => ratio_to_f64(r),
            Score::Float(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Score::Exact(_))
    }

    /// Ordering that reports `Equal` for tied scores: exact equality when
    /// both sides are exact, otherwise `|a - b| <= 1e-9 * max(1, |a|, |b|)`.
    pub fn tie_cmp(self, other: Score) -> Ordering {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => a.cmp(&b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let scale = 1f64.max(a.abs()).max(b.abs());
                if (a - b).abs() <= FLOAT_TIE_TOLERANCE * scale {
                    Ordering::Equal
                } else {
                    a.total_cmp(&b)
                }
            }
        }
    }

    /// Strict total order used for sorting prior to tie grouping.
    pub(crate) fn sort_cmp(self, other: Score) -> Ordering {
        match (self, other) {
            (Score::Exact(a), Score::Exact(b)) => a.cmp(&b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

/// Exact scores print without trailing zeros; floating scores with three
/// decimals.
impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Exact(r) => f.write_str(&format_exact(*r)),
            Score::Float(v) => write!(f, "{v:.3}"),
        }
    }
}

pub(crate) fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

/// Terminating decimal expansion when one exists, else `numer/denom`.
pub fn format_exact(r: Ratio<i128>) -> String {
    let mut d = *r.denom();
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let r = r.abs();
    let whole = r.to_integer();
    let mut rem = (r - Ratio::from_integer(whole)).numer().to_owned();
    let denom = *r.denom();
    if rem.is_zero() {
        return format!("{sign}{whole}");
    }
    let mut digits = String::new();
    while !rem.is_zero() {
        rem *= 10;
        digits.push(char::from(b'0' + (rem / denom) as u8));
        rem %= denom;
    }
    format!("{sign}{whole}.{digits}")
}

/// Per-rank points for an explicit lookup-table score function.
#[derive(Clone, Debug, PartialEq)]
pub struct PointsTable {
    entries: BTreeMap<Rank, f64>,
}

impl PointsTable {
    /// Entries must be finite and strictly increasing in rank.
    pub fn new(entries: BTreeMap<Rank, f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidFunction("a points table needs at least one entry".into()));
        }
        let mut prev: Option<(Rank, f64)> = None;
        for (&rank, &points) in &entries {
            if !points.is_finite() {
                return Err(Error::InvalidFunction(format!("rank {rank} has non-finite points")));
            }
            if let Some((prev_rank, prev_points)) = prev {
                if points <= prev_points {
                    return Err(Error::InvalidFunction(format!(
                        "points must strictly increase: rank {prev_rank} -> {prev_points}, rank {rank} -> {points}"
                    )));
                }
            }
            prev = Some((rank, points));
        }
        Ok(PointsTable { entries })
    }

    pub fn get(&self, rank: Rank) -> Option<f64> {
        self.entries.get(&rank).copied()
    }

    pub fn entries(&self) -> &BTreeMap<Rank, f64> {
        &self.entries
    }

    /// True when every entry is a half-integer, so sums stay exact.
    pub fn is_exact(&self) -> bool {
        self.entries
            .values()
            .all(|v| (v * 2.0).fract() == 0.0 && (v * 2.0).abs() < 1e15)
    }
}

/// A monotone-increasing map from rank to points.
#[derive(Clone, Debug, PartialEq)]
pub enum ScoreFunction {
    Linear,
    /// `rank^p` with `0 < p <= 1`.
    Power(f64),
    Logarithmic,
    Table(PointsTable),
    /// `offset + scale * base(rank)` with `scale > 0`.
    Affine {
        base: Box<ScoreFunction>,
        offset: f64,
        scale: f64,
    },
}

impl ScoreFunction {
    pub fn sqrt() -> Self {
        ScoreFunction::Power(0.5)
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidFunction(format!("power exponent must satisfy 0 < p <= 1, got {p}")));
        }
        Ok(ScoreFunction::Power(p))
    }

    pub fn table(entries: BTreeMap<Rank, f64>) -> Result<Self> {
        PointsTable::new(entries).map(ScoreFunction::Table)
    }

    pub fn affine(base: ScoreFunction, offset: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) || !offset.is_finite() {
            return Err(Error::InvalidFunction(format!(
                "affine wrapper needs finite offset and scale > 0, got offset {offset}, scale {scale}"
            )));
        }
        Ok(ScoreFunction::Affine {
            base: Box::new(base),
            offset,
            scale,
        })
    }

    /// The 1968 Olympic sailing points: 0, 3, 5.7, 8, 10, 11.7, then `j + 6`
    /// from seventh place on, tabulated up to `n`.
    pub fn sailing_1968(n: u32) -> Result<Self> {
        const HEAD: [f64; 6] = [0.0, 3.0, 5.7, 8.0, 10.0, 11.7];
        let entries = (1..=n)
            .map(|j| {
                let points = HEAD.get(j as usize - 1).copied().unwrap_or(j as f64 + 6.0);
                Rank::new(j).map(|r| (r, points))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        ScoreFunction::table(entries)
    }

    /// Whether evaluation yields exact rational scores.
    pub fn is_exact(&self) -> bool {
        match self {
            ScoreFunction::Linear => true,
            ScoreFunction::Table(t) => t.is_exact(),
            _ => false,
        }
    }

    pub fn eval(&self, rank: Rank) -> Result<Score> {
        match self {
            ScoreFunction::Linear => Ok(Score::Exact(rank.to_ratio())),
            ScoreFunction::Power(p) => Ok(Score::Float(rank.value().powf(*p))),
            ScoreFunction::Logarithmic => Ok(Score::Float(rank.value().ln())),
            ScoreFunction::Table(table) => {
                let points = table.get(rank).ok_or_else(|| Error::Domain {
                    function: self.to_string(),
                    rank: rank.to_string(),
                })?;
                if table.is_exact() {
                    Ok(Score::Exact(Ratio::new((points * 2.0) as i128, 2)))
                } else {
                    Ok(Score::Float(points))
                }
            }
            ScoreFunction::Affine { base, offset, scale } => {
                let inner = base.eval(rank)?.to_f64();
                Ok(Score::Float(offset + scale * inner))
            }
        }
    }

    pub fn eval_f64(&self, rank: Rank) -> Result<f64> {
        self.eval(rank).map(Score::to_f64)
    }
}

impl fmt::Display for ScoreFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreFunction::Linear => write!(f, "linear"),
            ScoreFunction::Power(p) if *p == 0.5 => write!(f, "sqrt"),
            ScoreFunction::Power(p) => write!(f, "power({p})"),
            ScoreFunction::Logarithmic => write!(f, "log"),
            ScoreFunction::Table(t) => write!(f, "table[{} ranks]", t.entries.len()),
            ScoreFunction::Affine { base, offset, scale } => {
                write!(f, "{offset} + {scale} * {base}")
            }
        }
    }
}

/// Per-stage weights; all strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Contract("a weight vector needs at least one stage".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Contract(format!("weights must be positive and finite, got {w}")));
        }
        Ok(WeightVector(weights))
    }

    pub fn unit(stages: usize) -> Self {
        WeightVector(vec![1.0; stages.max(1)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&w| w == 1.0)
    }

    /// First stage carrying the largest weight.
    pub fn heaviest_stage(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.0.iter().enumerate() {
            if w > self.0[best] {
                best = i;
            }
        }
        best
    }

    /// The weights as integers, when all of them are whole numbers.
    pub fn as_integers(&self) -> Option<Vec<i128>> {
        self.0
            .iter()
            .map(|&w| (w.fract() == 0.0 && w < 1e15).then_some(w as i128))
            .collect()
    }
}

fn check_lengths(rv: &RankVector, weights: &WeightVector) -> Result<()> {
    if rv.len() != weights.len() {
        return Err(Error::Contract(format!(
            "rank vector has {} stages but weight vector has {}",
            rv.len(),
            weights.len()
        )));
    }
    Ok(())
}

/// `sum_i w_i * f(r_i)`.
pub fn aggregate_score(rv: &RankVector, f: &ScoreFunction, weights: &WeightVector) -> Result<Score> {
    check_lengths(rv, weights)?;
    if f.is_exact() {
        if let Some(int_weights) = weights.as_integers() {
            let mut total = Ratio::<i128>::zero();
            for (rank, w) in rv.iter().zip(int_weights) {
                let Score::Exact(points) = f.eval(rank)? else {
                    unreachable!("exact function produced a float score")
                };
                total = Ratio::from_integer(w)
                    .checked_mul(&points)
                    .and_then(|term| total.checked_add(&term))
                    .ok_or_else(|| Error::Overflow(format!("weighted sum of {rv}")))?;
            }
            return Ok(Score::Exact(total));
        }
    }
    let mut total = 0.0;
    for (rank, &w) in rv.iter().zip(weights.weights()) {
        total += w * f.eval_f64(rank)?;
    }
    Ok(Score::Float(total))
}

/// Exact product of the ranks.
pub fn product_score(rv: &RankVector) -> Result<Ratio<i128>> {
    rv.iter().try_fold(Ratio::from_integer(1), |acc: Ratio<i128>, r| {
        acc.checked_mul(&r.to_ratio())
            .ok_or_else(|| Error::Overflow(format!("product of {rv}")))
    })
}

/// `prod_i r_i^{w_i}`; only integer weights keep this rational.
pub fn weighted_product_score(rv: &RankVector, weights: &WeightVector) -> Result<Ratio<i128>> {
    check_lengths(rv, weights)?;
    let int_weights = weights
        .as_integers()
        .ok_or_else(|| Error::Contract("product scoring needs integer weights".into()))?;
    let mut acc = Ratio::from_integer(1);
    for (rank, w) in rv.iter().zip(int_weights) {
        for _ in 0..w {
            acc = acc
                .checked_mul(&rank.to_ratio())
                .ok_or_else(|| Error::Overflow(format!("weighted product of {rv}")))?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank(v: f64) -> Rank {
        Rank::from_f64(v).unwrap()
    }

    fn rv(values: &[f64]) -> RankVector {
        RankVector::from_values(values).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(ScoreFunction::Linear.eval(rank(7.0)).unwrap(), Score::Exact(Ratio::from_integer(7)));
        assert_eq!(ScoreFunction::Logarithmic.eval_f64(rank(1.0)).unwrap(), 0.0);
        let sailing = ScoreFunction::sailing_1968(20).unwrap();
        assert_eq!(sailing.eval_f64(rank(3.0)).unwrap(), 5.7);
        assert_eq!(sailing.eval_f64(rank(9.0)).unwrap(), 15.0);
        // 20^0.5 = 4.47213595499958 (oracle: mpmath)
        let v = ScoreFunction::sqrt().eval_f64(rank(20.0)).unwrap();
        assert!((v - 4.472_135_955).abs() < 1e-4);
    }

    #[test]
    fn sailing_prefers_first_and_third_to_two_seconds() {
        let sailing = ScoreFunction::sailing_1968(10).unwrap();
        let w = WeightVector::unit(2);
        let a = aggregate_score(&rv(&[1.0, 3.0]), &sailing, &w).unwrap();
        let b = aggregate_score(&rv(&[2.0, 2.0]), &sailing, &w).unwrap();
        assert_eq!(a.tie_cmp(b), Ordering::Less);
    }

    #[test]
    fn table_domain_error() {
        let sailing = ScoreFunction::sailing_1968(8).unwrap();
        assert!(matches!(sailing.eval(rank(9.0)), Err(Error::Domain { .. })));
        assert!(matches!(sailing.eval(rank(2.5)), Err(Error::Domain { .. })));
    }

    #[test]
    fn table_must_increase() {
        let entries = BTreeMap::from([(rank(1.0), 0.0), (rank(2.0), 3.0), (rank(3.0), 3.0)]);
        assert!(ScoreFunction::table(entries).is_err());
    }

    #[test]
    fn parameter_validation() {
        assert!(ScoreFunction::power(0.0).is_err());
        assert!(ScoreFunction::power(1.5).is_err());
        assert!(ScoreFunction::power(1.0).is_ok());
        assert!(ScoreFunction::affine(ScoreFunction::Linear, -3.0, 0.0).is_err());
        assert!(ScoreFunction::affine(ScoreFunction::Linear, -3.0, 2.0).is_ok());
        assert!(WeightVector::new(vec![1.0, 0.0]).is_err());
        assert!(WeightVector::new(vec![]).is_err());
    }

    #[test]
    fn aggregate_examples() {
        let unit = WeightVector::unit(3);
        let s = aggregate_score(&rv(&[3.0, 1.0, 11.0]), &ScoreFunction::sqrt(), &unit).unwrap();
        assert!((s.to_f64() - 6.049).abs() < 1e-3);
        let s = aggregate_score(&rv(&[5.0, 1.0, 1.0]), &ScoreFunction::Linear, &unit).unwrap();
        assert_eq!(s, Score::Exact(Ratio::from_integer(7)));
        let skating = WeightVector::new(vec![1.0, 2.0]).unwrap();
        let s = aggregate_score(&rv(&[3.0, 1.0]), &ScoreFunction::Linear, &skating).unwrap();
        assert_eq!(s, Score::Exact(Ratio::from_integer(5)));
    }

    #[test]
    fn aggregate_length_mismatch() {
        let err = aggregate_score(&rv(&[1.0, 2.0]), &ScoreFunction::Linear, &WeightVector::unit(3));
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn fractional_weights_fall_back_to_float() {
        let w = WeightVector::new(vec![0.5, 1.5]).unwrap();
        let s = aggregate_score(&rv(&[2.0, 4.0]), &ScoreFunction::Linear, &w).unwrap();
        assert_eq!(s, Score::Float(7.0));
    }

    #[test]
    fn products_are_exact() {
        assert_eq!(product_score(&rv(&[1.0, 18.0, 20.0])).unwrap(), Ratio::from_integer(360));
        assert_eq!(product_score(&rv(&[13.0, 19.5, 18.0])).unwrap(), Ratio::from_integer(4563));
        assert_eq!(product_score(&rv(&[1.0, 1.0, 1.0])).unwrap(), Ratio::from_integer(1));
        assert_eq!(
            product_score(&rv(&[17.0, 19.5, 19.0])).unwrap(),
            Ratio::new(12597, 2)
        );
        let s = aggregate_score(&rv(&[13.0, 19.5, 18.0]), &ScoreFunction::Linear, &WeightVector::unit(3)).unwrap();
        assert_eq!(s, Score::Exact(Ratio::new(101, 2)));
    }

    #[test]
    fn weighted_product() {
        let w = WeightVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(weighted_product_score(&rv(&[3.0, 2.0]), &w).unwrap(), Ratio::from_integer(12));
        let w = WeightVector::new(vec![1.0, 1.5]).unwrap();
        assert!(weighted_product_score(&rv(&[3.0, 2.0]), &w).is_err());
    }

    #[test]
    fn exact_formatting() {
        assert_eq!(format_exact(Ratio::new(12597, 2)), "6298.5");
        assert_eq!(format_exact(Ratio::from_integer(4563)), "4563");
        assert_eq!(format_exact(Ratio::new(-3, 8)), "-0.375");
        assert_eq!(format_exact(Ratio::new(1, 3)), "1/3");
        assert_eq!(Score::Float(6.0494).to_string(), "6.049");
    }

    #[test]
    fn float_ties_use_relative_tolerance() {
        let a = Score::Float(1000.0);
        assert_eq!(a.tie_cmp(Score::Float(1000.0 + 5e-7)), Ordering::Equal);
        assert_eq!(a.tie_cmp(Score::Float(1000.0 + 5e-6)), Ordering::Less);
        assert_eq!(Score::Float(0.0).tie_cmp(Score::Float(5e-10)), Ordering::Equal);
    }

    #[test]
    fn heaviest_stage_picks_first_max() {
        assert_eq!(WeightVector::new(vec![1.0, 2.0]).unwrap().heaviest_stage(), 1);
        assert_eq!(WeightVector::new(vec![3.0, 1.0, 3.0]).unwrap().heaviest_stage(), 0);
    }
}
