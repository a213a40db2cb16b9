//! Rank-based inverse normal transform.

use crate::error::{JlsError, Result};
use crate::numeric::normal_quantile;

/// Blom offset.
pub const BLOM_OFFSET: f64 = 3.0 / 8.0;

/// Maps the `m` observed values to `Φ⁻¹((r - c) / (m + 1 - 2c))`, where `r`
/// is the average rank among tied values and `c` the offset. Missing values
/// stay missing.
pub fn inverse_normal_transform(values: &[Option<f64>], offset: f64) -> Result<Vec<Option<f64>>> {
    if !(0.0..=0.5).contains(&offset) {
        return Err(JlsError::InvalidInput(format!("rank offset {offset} not in [0, 0.5]")));
    }
    let mut observed: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    if observed.iter().any(|(_, x)| !x.is_finite()) {
        return Err(JlsError::Validation("phenotype contains non-finite values".into()));
    }
    let m = observed.len();
    if m < 2 {
        return Err(JlsError::Validation(format!(
            "inverse normal transform needs at least 2 observed values, got {m}"
        )));
    }
    observed.sort_by(|a, b| a.1.total_cmp(&b.1));
    if observed[0].1 == observed[m - 1].1 {
        return Err(JlsError::Validation("all phenotype values are tied".into()));
    }
    let denom = m as f64 + 1.0 - 2.0 * offset;
    let mut out = vec![None; values.len()];
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && observed[end].1 == observed[start].1 {
            end += 1;
        }
        // ranks start+1 ..= end, averaged
        let rank = (start + 1 + end) as f64 / 2.0;
        let z = normal_quantile((rank - offset) / denom)?;
        for &(i, _) in &observed[start..end] {
            out[i] = Some(z);
        }
        start = end;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_tied_is_an_error() {
        assert!(inverse_normal_transform(&[Some(3.0), Some(3.0)], BLOM_OFFSET).is_err());
        assert!(inverse_normal_transform(&[Some(3.0), None], BLOM_OFFSET).is_err());
    }

    #[test]
    fn missing_preserved_and_ties_averaged() {
        let out = inverse_normal_transform(&[Some(1.0), None, Some(2.0), Some(2.0), Some(5.0)], BLOM_OFFSET)
            .unwrap();
        assert!(out[1].is_none());
        assert_eq!(out[2], out[3]);
        // ranks 1, 2.5, 2.5, 4 are symmetric about 2.5
        assert!(out[2].unwrap().abs() < 1e-15);
        assert!((out[0].unwrap() + out[4].unwrap()).abs() < 1e-12);
    }

    #[test]
    fn half_offset() {
        let out = inverse_normal_transform(&[Some(0.0), Some(1.0)], 0.5).unwrap();
        let z = normal_quantile(0.25).unwrap();
        assert!((out[0].unwrap() - z).abs() < 1e-15);
    }
}
