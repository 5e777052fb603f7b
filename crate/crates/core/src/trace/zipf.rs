use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit {
    /// Zipf exponent: the negated slope of log frequency against log rank.
    pub s: f64,
    /// Coefficient of determination of the log-log fit.
    pub r2: f64,
    /// Number of ranks that passed the frequency cutoff.
    pub ranks_used: usize,
}

/// Least-squares fit of `ln f = c - s ln r` over ranks whose frequency is at
/// least `min_freq`.
///
/// `frequencies[i]` is the frequency of rank `i + 1` and must be sorted in
/// descending order for `s` to be meaningful. Ranks below the cutoff are
/// skipped but keep their rank positions.
pub fn fit_zipf(frequencies: &[f64], min_freq: f64) -> Result<ZipfFit> {
    let points: Vec<(f64, f64)> = frequencies
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= min_freq && f > 0.0)
        .map(|(i, &f)| (((i + 1) as f64).ln(), f.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientZipfMass);
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in &points {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let slope = sxy / sxx;
    // Residual sum of squares of the fitted line is syy - slope * sxy.
    let r2 = if syy <= f64::EPSILON * n * mean_y.abs().max(1.0) {
        1.0
    } else {
        (slope * sxy / syy).clamp(0.0, 1.0)
    };
    Ok(ZipfFit { s: (-slope).max(0.0), r2, ranks_used: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let f: Vec<f64> = (1..=100).map(|r| 1000.0 / r as f64).collect();
        let fit = fit_zipf(&f, 5.0).unwrap();
        assert!((fit.s - 1.0).abs() < 0.01, "{fit:?}");
        assert!(fit.r2 >= 0.999);
        assert_eq!(fit.ranks_used, 100);
    }

    #[test]
    fn flat_frequencies_have_zero_exponent() {
        let f = vec![50.0; 40];
        let fit = fit_zipf(&f, 5.0).unwrap();
        assert!(fit.s.abs() < 0.01);
    }

    #[test]
    fn cutoff_drops_tail_but_keeps_ranks() {
        // Ranks 1..=10 follow 1/r^2; rank 11.. fall below the cutoff.
        let mut f: Vec<f64> = (1..=10).map(|r| 10_000.0 / (r * r) as f64).collect();
        f.extend([1.0, 1.0, 1.0]);
        let fit = fit_zipf(&f, 5.0).unwrap();
        assert_eq!(fit.ranks_used, 10);
        assert!((fit.s - 2.0).abs() < 1e-9);
    }

    #[test]
    fn insufficient_mass() {
        assert!(matches!(fit_zipf(&[100.0, 4.0, 3.0], 5.0), Err(Error::InsufficientZipfMass)));
        assert!(matches!(fit_zipf(&[], 5.0), Err(Error::InsufficientZipfMass)));
        assert_eq!(
            fit_zipf(&[1.0], 5.0).unwrap_err().to_string(),
            "insufficient mass for Zipf fit"
        );
    }

    proptest! {
        #[test]
        fn scale_invariant(
            mut f in prop::collection::vec(5.0f64..1e6, 2..60),
            scale in 1.0f64..1e3,
        ) {
            f.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let a = fit_zipf(&f, 5.0).unwrap();
            let scaled: Vec<f64> = f.iter().map(|x| x * scale).collect();
            let b = fit_zipf(&scaled, 5.0).unwrap();
            prop_assert!((a.s - b.s).abs() < 1e-9);
            prop_assert!((a.r2 - b.r2).abs() < 1e-9);
        }

        #[test]
        fn exponent_nonnegative_for_sorted_input(mut f in prop::collection::vec(5.0f64..1e6, 2..60)) {
            f.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let fit = fit_zipf(&f, 5.0).unwrap();
            prop_assert!(fit.s >= 0.0);
            prop_assert!((0.0..=1.0).contains(&fit.r2));
        }
    }
}
