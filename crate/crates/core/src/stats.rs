//! Small numeric helpers shared by the gate and the report builders.

use crate::error::{Error, Result};

/// Linear-interpolation quantile of an unsorted sample, `p` in `[0, 1]`.
///
/// Interpolates between closest ranks: with `n` sorted values the quantile
/// sits at fractional rank `h = (n - 1) * p`.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::data("quantile of empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::data(format!("quantile level {p} outside [0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(quantile_sorted(&sorted, p))
}

/// Same as [`quantile`] but assumes `sorted` is already ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Five-number summary (min, q1, median, q3, max) of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn five_number(values: &[f64]) -> Result<FiveNumber> {
    if values.is_empty() {
        return Err(Error::data("five-number summary of empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    Ok(FiveNumber {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates_between_ranks() {
        let v = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        assert_eq!(quantile(&v, 0.75).unwrap(), 0.75);
        assert!((quantile(&v, 0.95).unwrap() - 0.95).abs() < 1e-15);
        assert_eq!(quantile(&v, 0.0).unwrap(), 0.0);
        assert_eq!(quantile(&v, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn quantile_degenerate_cases() {
        assert_eq!(quantile(&[0.7], 0.75).unwrap(), 0.7);
        assert_eq!(quantile(&[0.4, 0.4, 0.4], 0.95).unwrap(), 0.4);
        assert!(quantile(&[], 0.5).is_err());
        assert!(quantile(&[1.0], 1.5).is_err());
    }

    #[test]
    fn five_number_single_value() {
        let s = five_number(&[0.3]).unwrap();
        assert_eq!(s.min, 0.3);
        assert_eq!(s.q1, 0.3);
        assert_eq!(s.median, 0.3);
        assert_eq!(s.q3, 0.3);
        assert_eq!(s.max, 0.3);
    }

    #[test]
    fn five_number_quartiles_are_ordered() {
        let s = five_number(&[0.9, 0.1, 0.5, 0.3, 0.7, 0.2]).unwrap();
        assert!(s.min <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.max);
    }
}
