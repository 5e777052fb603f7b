use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

/// Reuse distance of one request: the number of distinct keys requested
/// strictly between it and the previous request for the same key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReuseDistance {
    Distance(u64),
    /// First request for a key.
    Cold,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReuseHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub cold: u64,
}

impl ReuseHistogram {
    pub fn from_distances(distances: &[ReuseDistance]) -> Self {
        let mut h = ReuseHistogram::default();
        for d in distances {
            h.record(*d);
        }
        h
    }

    pub fn record(&mut self, d: ReuseDistance) {
        match d {
            ReuseDistance::Cold => self.cold += 1,
            ReuseDistance::Distance(d) => *self.counts.entry(d).or_default() += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.cold + self.counts.values().sum::<u64>()
    }

    /// Cumulative distribution over distances with cold requests treated as
    /// infinitely distant.
    pub fn cdf(&self) -> Vec<(ReuseDistance, f64)> {
        let total = self.total() as f64;
        let mut acc = 0u64;
        let mut out: Vec<(ReuseDistance, f64)> = self
            .counts
            .iter()
            .map(|(&d, &n)| {
                acc += n;
                (ReuseDistance::Distance(d), acc as f64 / total)
            })
            .collect();
        if self.cold > 0 {
            out.push((ReuseDistance::Cold, 1.0));
        }
        if let Some(last) = out.last_mut() {
            last.1 = 1.0;
        }
        out
    }
}

/// Fenwick tree over request positions.
struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, pos: usize, delta: i64) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `0..pos`.
    fn prefix(&self, pos: usize) -> i64 {
        let mut i = pos;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Reuse distance of every request in `keys`, plus their histogram.
///
/// Each key's most recent position is marked in a Fenwick tree. For a
/// repeat at position `i` whose previous occurrence is `j`, the keys seen
/// strictly between them are exactly those whose latest mark falls in
/// `(j, i)`, so the distance is a range count. `O(n log n)` overall.
pub fn compute_reuse_distances<K>(keys: &[K]) -> (Vec<ReuseDistance>, ReuseHistogram)
where
    K: Hash + Eq,
{
    let mut last: HashMap<&K, usize> = HashMap::with_capacity(keys.len() / 2 + 1);
    let mut marks = Fenwick::new(keys.len());
    let mut distances = Vec::with_capacity(keys.len());
    let mut hist = ReuseHistogram::default();
    for (i, key) in keys.iter().enumerate() {
        let d = match last.insert(key, i) {
            None => ReuseDistance::Cold,
            Some(j) => {
                let between = marks.prefix(i) - marks.prefix(j + 1);
                marks.add(j, -1);
                ReuseDistance::Distance(between as u64)
            }
        };
        marks.add(i, 1);
        hist.record(d);
        distances.push(d);
    }
    (distances, hist)
}
