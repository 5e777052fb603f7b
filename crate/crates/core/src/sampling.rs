use rand::Rng;

use crate::error::{Error, Result};

/// Categorical distribution over `T` with integer weights.
///
/// Draws invert a cumulative-weight array by binary search, so a draw costs
/// one uniform integer and `O(log n)` comparisons. Integer weights make the
/// inversion exact: outcome `i` is returned for exactly `weight_i` of the
/// `total` equally likely integers.
#[derive(Debug, Clone)]
pub struct Categorical<T> {
    values: Vec<T>,
    cumulative: Vec<u64>,
}

impl<T> Categorical<T> {
    /// Zero-weight entries are dropped.
    pub fn new<I>(weighted: I) -> Result<Self>
    where
        I: IntoIterator<Item = (T, u64)>,
    {
        let mut values = Vec::new();
        let mut cumulative = Vec::new();
        let mut total: u64 = 0;
        for (value, weight) in weighted {
            if weight == 0 {
                continue;
            }
            total = total
                .checked_add(weight)
                .ok_or_else(|| Error::Distribution("total weight overflows u64".into()))?;
            values.push(value);
            cumulative.push(total);
        }
        if values.is_empty() {
            return Err(Error::Distribution("no outcome has positive weight".into()));
        }
        Ok(Categorical { values, cumulative })
    }

    pub fn total(&self) -> u64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen_range(0..self.total());
        self.cumulative.partition_point(|&c| c <= u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &T {
        &self.values[self.sample_index(rng)]
    }

    /// Draws from the first `n` outcomes only, renormalized. `None` when
    /// `n` is zero.
    pub fn sample_prefix<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<&T> {
        let n = n.min(self.len());
        let weight = *self.cumulative.get(n.checked_sub(1)?)?;
        let u = rng.gen_range(0..weight);
        Some(&self.values[self.cumulative[..n].partition_point(|&c| c <= u)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chunk_rng;

    #[test]
    fn prefix_draws_stay_in_prefix() {
        let c = Categorical::new([(0u8, 1), (1, 3), (2, 6)]).unwrap();
        let mut rng = chunk_rng(2, 0);
        assert!(c.sample_prefix(0, &mut rng).is_none());
        let mut hits = [0u32; 3];
        for _ in 0..40_000 {
            hits[*c.sample_prefix(2, &mut rng).unwrap() as usize] += 1;
        }
        assert_eq!(hits[2], 0);
        let frac = hits[0] as f64 / 40_000.0;
        assert!((frac - 0.25).abs() < 0.01, "{frac}");
        assert!(c.sample_prefix(9, &mut rng).is_some());
    }

    #[test]
    fn degenerate_distribution_always_returns_sole_value() {
        let c = Categorical::new([("x", 0), ("y", 5), ("z", 0)]).unwrap();
        let mut rng = chunk_rng(1, 0);
        for _ in 0..100 {
            assert_eq!(*c.sample(&mut rng), "y");
        }
    }

    #[test]
    fn all_zero_weights_rejected() {
        assert!(Categorical::new([("x", 0u64)]).is_err());
        assert!(Categorical::<u8>::new([]).is_err());
    }

    #[test]
    fn inversion_boundaries_are_exact() {
        // weights 1,2,3 -> integers 0 | 1 2 | 3 4 5
        let c = Categorical::new([(0, 1), (1, 2), (2, 3)]).unwrap();
        let idx: Vec<usize> = (0..6)
            .map(|u| c.cumulative.partition_point(|&x| x <= u))
            .collect();
        assert_eq!(idx, vec![0, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn empirical_frequencies_track_weights() {
        let c = Categorical::new([('a', 1), ('b', 3)]).unwrap();
        let mut rng = chunk_rng(9, 0);
        let n = 200_000;
        let b = (0..n).filter(|_| *c.sample(&mut rng) == 'b').count();
        let frac = b as f64 / n as f64;
        assert!((frac - 0.75).abs() < 0.005, "{frac}");
    }
}
