//! Uniform vertex subsets and Bernoulli edges within one layer.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{domain, Result};

/// Below this density edges are found by geometric skipping over the
/// linearized pair index; at or above it every pair gets its own coin.
pub const SKIP_THRESHOLD: f64 = 0.25;

/// Receives the retained edges of a layer.
pub trait EdgeSink {
    fn add_edge(&mut self, u: u32, v: u32);
}

impl EdgeSink for Vec<(u32, u32)> {
    fn add_edge(&mut self, u: u32, v: u32) {
        self.push((u, v));
    }
}

/// Uniform `x`-subset of `0..n` by Floyd's algorithm in O(x log x) time,
/// independent of `n`. Returned in increasing order.
pub fn sample_vertex_subset<R: Rng + ?Sized>(n: u64, x: u64, rng: &mut R) -> Result<Vec<u32>> {
    if x > n {
        return Err(domain!("subset size {x} exceeds n = {n}"));
    }
    if n > u32::MAX as u64 + 1 {
        return Err(domain!("n = {n} exceeds the u32 vertex range"));
    }
    let mut chosen = BTreeSet::new();
    for j in (n - x)..n {
        let t = rng.random_range(0..=j);
        if !chosen.insert(t as u32) {
            chosen.insert(j as u32);
        }
    }
    Ok(chosen.into_iter().collect())
}

/// Floyd's algorithm over a fixed vertex range with a generation-stamped
/// membership table, so each draw costs O(x) after the one-off O(n) setup.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    stamp: Vec<u32>,
    generation: u32,
}

impl SubsetSampler {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "vertex count {n} does not fit in u32");
        SubsetSampler {
            stamp: alloc::vec![0; n],
            generation: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.stamp.len()
    }

    /// Fills `out` with a uniform `x`-subset of `0..n` (unordered).
    pub fn sample<R: Rng + ?Sized>(&mut self, x: usize, rng: &mut R, out: &mut Vec<u32>) {
        let n = self.stamp.len();
        assert!(x <= n, "subset size {x} exceeds n = {n}");
        out.clear();
        if x == n {
            out.extend(0..n as u32);
            return;
        }
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.generation = 1;
        }
        let g = self.generation;
        for j in (n - x)..n {
            let t = rng.random_range(0..=j as u32);
            let pick = if self.stamp[t as usize] == g { j as u32 } else { t };
            self.stamp[pick as usize] = g;
            out.push(pick);
        }
    }
}

/// Decodes a linear pair index into `(a, b)` with `a < b`, where pairs are
/// ordered by `b` then `a`: `index = b (b - 1) / 2 + a`.
pub fn decode_pair(index: u64) -> (u64, u64) {
    let mut b = ((1.0 + libm::sqrt(1.0 + 8.0 * index as f64)) / 2.0) as u64;
    while b > 1 && b * (b - 1) / 2 > index {
        b -= 1;
    }
    while (b + 1) * b / 2 <= index {
        b += 1;
    }
    (index - b * (b - 1) / 2, b)
}

/// Retains each of the `C(x, 2)` pairs of `subset` independently with
/// probability `q`, sending kept edges to `sink`. Returns the count kept.
pub fn sample_layer_edges<R, S>(subset: &[u32], q: f64, rng: &mut R, sink: &mut S) -> u64
where
    R: Rng + ?Sized,
    S: EdgeSink + ?Sized,
{
    let x = subset.len();
    if x < 2 || q <= 0.0 {
        return 0;
    }
    let mut kept = 0;
    if q >= 1.0 {
        for b in 1..x {
            for a in 0..b {
                sink.add_edge(subset[a], subset[b]);
            }
        }
        return (x as u64) * (x as u64 - 1) / 2;
    }
    if q >= SKIP_THRESHOLD {
        for b in 1..x {
            for a in 0..b {
                if rng.random_bool(q) {
                    sink.add_edge(subset[a], subset[b]);
                    kept += 1;
                }
            }
        }
        return kept;
    }
    let pairs = (x as u64) * (x as u64 - 1) / 2;
    let ln_keep = libm::log1p(-q);
    let mut next: u64 = 0;
    loop {
        // u in (0, 1]; the gap to the next kept pair is Geometric(q).
        let u = 1.0 - rng.random::<f64>();
        let gap = libm::floor(libm::log(u) / ln_keep);
        if gap >= (pairs - next) as f64 {
            break;
        }
        next += gap as u64;
        let (a, b) = decode_pair(next);
        sink.add_edge(subset[a as usize], subset[b as usize]);
        kept += 1;
        next += 1;
        if next >= pairs {
            break;
        }
    }
    kept
}
