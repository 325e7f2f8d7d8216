//! Otsu thresholding and its constrained-range refinement.
//!
//! For a split at level `T`, class 1 holds levels `<= T` and class 2 levels
//! `> T`. The between-class variance `w1 * w2 * (mu1 - mu2)^2` equals
//! `(s1 * n2 - s2 * n1)^2 / (n1 * n2 * total^2)` where `n` are pixel counts and
//! `s` level sums, so candidate splits are compared on the integer fraction
//! `(s1 * n2 - s2 * n1)^2 / (n1 * n2)`. That makes the argmax and the
//! lowest-level tie-break exact.

use std::cmp::Ordering;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::GrayMap;

/// 256-level histogram of an 8-bit map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayHistogram {
    counts: [u64; 256],
    total: u64,
    p_min: u8,
    p_max: u8,
}

impl GrayHistogram {
    pub fn from_counts(counts: [u64; 256]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyHistogram);
        }
        let p_min = counts.iter().position(|&c| c > 0).unwrap() as u8;
        let p_max = counts.iter().rposition(|&c| c > 0).unwrap() as u8;
        Ok(Self { counts, total, p_min, p_max })
    }

    pub fn from_map(map: &GrayMap) -> Self {
        let mut counts = [0u64; 256];
        for &v in map.as_raw() {
            counts[usize::from(v)] += 1;
        }
        Self::from_counts(counts).expect("maps are never empty")
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn p_min(&self) -> u8 {
        self.p_min
    }

    pub fn p_max(&self) -> u8 {
        self.p_max
    }

    /// Cumulative `(n1, s1)` for every level: count and level-sum of class 1.
    fn cumulative(&self) -> Vec<(u64, u64)> {
        let mut acc = (0u64, 0u64);
        self.counts
            .iter()
            .enumerate()
            .map(|(level, &c)| {
                acc.0 += c;
                acc.1 += c * level as u64;
                acc
            })
            .collect()
    }

    fn level_sum(&self) -> u64 {
        self.counts.iter().enumerate().map(|(l, &c)| c * l as u64).sum()
    }
}

/// How the lower bound of the constrained search is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OtsuLower {
    /// The plain Otsu argmax.
    #[default]
    Argmax,
    /// `floor((mu1 + mu2) / 2)` evaluated at the Otsu argmax split.
    Midpoint,
}

impl std::str::FromStr for OtsuLower {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "argmax" => Ok(Self::Argmax),
            "midpoint" => Ok(Self::Midpoint),
            other => Err(format!("expected `argmax` or `midpoint`, got `{other}`")),
        }
    }
}

impl std::fmt::Display for OtsuLower {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Argmax => "argmax",
            Self::Midpoint => "midpoint",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub g_otsu: u8,
    pub g_optimal: u8,
    pub variance_at_optimal: f64,
}

/// Between-class variance of one split as an exact fraction
/// `num / den`, scaled by `total^2`.
#[derive(Debug, Clone, Copy)]
struct SplitScore {
    num: u128,
    den: u128,
}

impl SplitScore {
    fn new(n1: u64, s1: u64, n2: u64, s2: u64) -> Self {
        if n1 == 0 || n2 == 0 {
            return Self { num: 0, den: 1 };
        }
        let diff = (i128::from(s1) * i128::from(n2) - i128::from(s2) * i128::from(n1)).unsigned_abs();
        Self { num: diff * diff, den: u128::from(n1) * u128::from(n2) }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => (BigUint::from(self.num) * other.den).cmp(&(BigUint::from(other.num) * self.den)),
        }
    }

    fn variance(&self, total: u64) -> f64 {
        let t = total as f64;
        self.num as f64 / self.den as f64 / (t * t)
    }
}

/// Argmax over `lo..=hi` of the between-class variance, lowest level on ties.
fn argmax_in(hist: &GrayHistogram, cum: &[(u64, u64)], lo: u8, hi: u8) -> (u8, SplitScore) {
    let (total, sum) = (hist.total, hist.level_sum());
    let score_at = |t: u8| {
        let (n1, s1) = cum[usize::from(t)];
        SplitScore::new(n1, s1, total - n1, sum - s1)
    };
    let mut best = (lo, score_at(lo));
    for t in (u16::from(lo) + 1..=u16::from(hi)).map(|t| t as u8) {
        let s = score_at(t);
        if s.cmp(&best.1) == Ordering::Greater {
            best = (t, s);
        }
    }
    best
}

/// Otsu threshold over `p_min..=p_max`. A single-level histogram returns
/// that level.
pub fn otsu(hist: &GrayHistogram) -> u8 {
    argmax_in(hist, &hist.cumulative(), hist.p_min, hist.p_max).0
}

/// `floor((mu1 + mu2) / 2)` for the split at `t`, or `t` when a class is empty.
pub fn class_mean_midpoint(hist: &GrayHistogram, t: u8) -> u8 {
    let cum = hist.cumulative();
    let (n1, s1) = cum[usize::from(t)];
    let (n2, s2) = (hist.total - n1, hist.level_sum() - s1);
    if n1 == 0 || n2 == 0 {
        return t;
    }
    let (n1, s1, n2, s2) = (u128::from(n1), u128::from(s1), u128::from(n2), u128::from(s2));
    ((s1 * n2 + s2 * n1) / (2 * n1 * n2)) as u8
}

/// Otsu followed by a second argmax restricted to `g_otsu..=p_max`.
pub fn constrained_otsu(hist: &GrayHistogram) -> ThresholdResult {
    constrained_otsu_with(hist, OtsuLower::Argmax)
}

pub fn constrained_otsu_with(hist: &GrayHistogram, lower: OtsuLower) -> ThresholdResult {
    let cum = hist.cumulative();
    let t = argmax_in(hist, &cum, hist.p_min, hist.p_max).0;
    let g_otsu = match lower {
        OtsuLower::Argmax => t,
        OtsuLower::Midpoint => class_mean_midpoint(hist, t),
    };
    let (g_optimal, score) = argmax_in(hist, &cum, g_otsu, hist.p_max);
    ThresholdResult { g_otsu, g_optimal, variance_at_optimal: score.variance(hist.total) }
}

/// `> threshold` becomes 255, everything else 0.
pub fn binarize(map: &GrayMap, threshold: u8) -> GrayMap {
    let data = map.as_raw().iter().map(|&v| if v > threshold { 255 } else { 0 }).collect();
    GrayMap::from_raw(map.width(), map.height(), data).expect("same dimensions")
}
