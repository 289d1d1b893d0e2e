//! Empirical quantiles and the binary quantile filter.

use serde::{Deserialize, Serialize};

use crate::qcf::QcfError;
use crate::series::{ProbabilityLevel, TimeSeries};

/// Rank `k = ceil(p * n)` of the inverse empirical CDF, clamped to `[1, n]`.
///
/// `p * n` is snapped to the nearest integer when it is within rounding
/// noise of one, so that e.g. `0.07 * 100` selects rank 7 and not 8.
pub(crate) fn order_statistic_rank(p: f64, n: usize) -> usize {
    let pos = p * n as f64;
    let nearest = pos.round();
    let k = if (pos - nearest).abs() <= 1e-9 * (n as f64).max(1.0) {
        nearest
    } else {
        pos.ceil()
    };
    (k as usize).clamp(1, n)
}

/// Inverse-ECDF quantile: the order statistic `x_(ceil(p*T))` of the sorted
/// values, with `p = 0` returning the minimum.
pub fn empirical_quantile(values: &[f64], p: ProbabilityLevel) -> Result<f64, QcfError> {
    if values.is_empty() {
        return Err(QcfError::EmptyInput);
    }
    let k = order_statistic_rank(p.value(), values.len());
    let mut scratch = values.to_vec();
    let (_, kth, _) = scratch.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// A quantile-filtered 0/1 series.
///
/// Bits are 1 where the observation is at or below the quantile threshold.
/// A complemented series (see [`BinarySeries::complement`]) marks the
/// observations strictly above it instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySeries {
    bits: Vec<u8>,
    level: ProbabilityLevel,
    achieved_fraction: f64,
    quantile_value: f64,
    complemented: bool,
}

impl BinarySeries {
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn level(&self) -> ProbabilityLevel {
        self.level
    }

    /// Fraction of ones actually obtained. Ties at the threshold can push
    /// this above the nominal level.
    pub fn achieved_fraction(&self) -> f64 {
        self.achieved_fraction
    }

    pub fn quantile_value(&self) -> f64 {
        self.quantile_value
    }

    pub fn is_complemented(&self) -> bool {
        self.complemented
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// All zeros or all ones: zero variance, so no correlation is defined.
    pub fn is_degenerate(&self) -> bool {
        let ones = self.ones();
        ones == 0 || ones == self.bits.len()
    }

    /// Bitwise NOT: the indicator of observations strictly above the threshold.
    pub fn complement(&self) -> Self {
        let bits: Vec<u8> = self.bits.iter().map(|&b| 1 - b).collect();
        Self {
            achieved_fraction: fraction_of_ones(&bits),
            bits,
            level: self.level,
            quantile_value: self.quantile_value,
            complemented: !self.complemented,
        }
    }

    pub(crate) fn as_f64(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| f64::from(b)).collect()
    }
}

fn fraction_of_ones(bits: &[u8]) -> f64 {
    bits.iter().map(|&b| usize::from(b)).sum::<usize>() as f64 / bits.len() as f64
}

/// Maps `x` to `1{x_t <= q_p}` with `q_p` from [`empirical_quantile`].
pub fn filter_series(x: &TimeSeries, p: ProbabilityLevel) -> Result<BinarySeries, QcfError> {
    filter_values(x.values(), p)
}

pub fn filter_values(values: &[f64], p: ProbabilityLevel) -> Result<BinarySeries, QcfError> {
    let q = empirical_quantile(values, p)?;
    let bits: Vec<u8> = values.iter().map(|&v| u8::from(v <= q)).collect();
    Ok(BinarySeries {
        achieved_fraction: fraction_of_ones(&bits),
        bits,
        level: p,
        quantile_value: q,
        complemented: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(p: f64) -> ProbabilityLevel {
        ProbabilityLevel::new(p).unwrap()
    }

    const WORKED: [f64; 10] = [1.0, -5.0, 10.0, 0.0, -6.0, -2.0, -2.0, 2.0, 0.0, 2.0];

    /// Independent sort-and-index oracle for `p = twentieths / 20`, with the
    /// rank computed in exact integer arithmetic.
    fn sorted_oracle(values: &[f64], twentieths: usize) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let k = ((twentieths * v.len()).div_ceil(20)).max(1);
        v[k - 1]
    }

    #[test]
    fn worked_example_median() {
        assert_eq!(empirical_quantile(&WORKED, level(0.5)).unwrap(), 0.0);
        let f = filter_values(&WORKED, level(0.5)).unwrap();
        assert_eq!(f.bits(), &[0, 1, 0, 1, 1, 1, 1, 0, 1, 0]);
        assert_eq!(f.quantile_value(), 0.0);
        assert_eq!(f.achieved_fraction(), 0.6);
    }

    #[test]
    fn small_examples() {
        assert_eq!(
            empirical_quantile(&[3.0, 1.0, 2.0], level(1.0 / 3.0)).unwrap(),
            1.0
        );
        assert_eq!(empirical_quantile(&[4.0; 7], level(0.37)).unwrap(), 4.0);
        assert_eq!(empirical_quantile(&WORKED, level(0.0)).unwrap(), -6.0);
        let f = filter_values(&[5.0, 4.0, 3.0, 2.0, 1.0], level(0.4)).unwrap();
        assert_eq!(f.bits(), &[0, 0, 0, 1, 1]);
        assert_eq!(f.quantile_value(), 2.0);
    }

    #[test]
    fn top_level_is_all_ones() {
        let f = filter_values(&WORKED, level(1.0)).unwrap();
        assert!(f.bits().iter().all(|&b| b == 1));
        assert!(f.is_degenerate());
    }

    #[test]
    fn empty_input() {
        assert_eq!(
            empirical_quantile(&[], level(0.5)),
            Err(QcfError::EmptyInput)
        );
    }

    #[test]
    fn rank_snaps_products_that_round_up() {
        // 0.07 * 100 = 7.000000000000001 in binary floating point.
        assert_eq!(order_statistic_rank(0.07, 100), 7);
        assert_eq!(order_statistic_rank(0.071, 100), 8);
        assert_eq!(order_statistic_rank(0.0, 10), 1);
        assert_eq!(order_statistic_rank(1.0, 10), 10);
    }

    #[test]
    fn complement_flips_fraction() {
        let f = filter_values(&WORKED, level(0.5)).unwrap();
        let c = f.complement();
        assert_eq!(c.bits(), &[1, 0, 1, 0, 0, 0, 0, 1, 0, 1]);
        assert!((c.achieved_fraction() - 0.4).abs() < 1e-15);
        assert_eq!(c.complement(), f);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn matches_sort_oracle(values in prop::collection::vec(-100i32..100, 1..200), k in 0usize..=20) {
                let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
                let p = k as f64 / 20.0;
                prop_assert_eq!(empirical_quantile(&xs, level(p)).unwrap(), sorted_oracle(&xs, k));
            }

            #[test]
            fn fraction_at_least_rank(values in prop::collection::vec(-20i32..20, 2..300), k in 1u32..20) {
                let xs: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
                let p = f64::from(k) / 20.0;
                let f = filter_values(&xs, level(p)).unwrap();
                let n = xs.len();
                let min_ones = order_statistic_rank(p, n);
                prop_assert!(f.ones() >= min_ones);
                prop_assert_eq!(f.achieved_fraction(), f.ones() as f64 / n as f64);
            }
        }
    }
}
