//! How the `m` layers of a graph obtain their `(size, density)` pairs.

use alloc::vec::Vec;

use crate::error::{domain, invalid_law, Result};
use crate::law::{Atom, CommunityLaw};
use crate::math::check_probability;

#[derive(Debug, Clone, PartialEq)]
enum Layers {
    Iid {
        law: CommunityLaw,
        truncated: CommunityLaw,
        m: u64,
    },
    Fixed(Vec<(u64, f64)>),
}

/// Layers with identical per-layer law, as consumed by the exact formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGroup {
    /// Per-layer law of `(X̃, Q)`, already truncated at `n`.
    pub law: CommunityLaw,
    pub count: u64,
}

/// Layer schedule over the vertex set `[n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSchedule {
    n: u64,
    layers: Layers,
}

impl LayerSchedule {
    /// `m` layers whose `(X, Q)` are drawn independently from `law`; sizes are
    /// truncated to `min(X, n)` when sampled.
    pub fn iid(n: u64, law: CommunityLaw, m: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain!("schedule needs at least one vertex"));
        }
        let truncated = law.truncate(n)?;
        Ok(LayerSchedule {
            n,
            layers: Layers::Iid { law, truncated, m },
        })
    }

    /// One layer per pair, in order. Sizes above `n` are rejected, never
    /// truncated.
    pub fn fixed(n: u64, pairs: Vec<(u64, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(domain!("schedule needs at least one vertex"));
        }
        for (i, &(x, q)) in pairs.iter().enumerate() {
            if x > n {
                return Err(domain!("layer {i}: size {x} exceeds n = {n}"));
            }
            check_probability(q).map_err(|_| invalid_law!("layer {i}: density {q} is outside [0, 1]"))?;
        }
        Ok(LayerSchedule {
            n,
            layers: Layers::Fixed(pairs),
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn m(&self) -> u64 {
        match &self.layers {
            Layers::Iid { m, .. } => *m,
            Layers::Fixed(p) => p.len() as u64,
        }
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.layers, Layers::Iid { .. })
    }

    /// The untruncated law of an IID schedule.
    pub fn law(&self) -> Option<&CommunityLaw> {
        match &self.layers {
            Layers::Iid { law, .. } => Some(law),
            Layers::Fixed(_) => None,
        }
    }

    pub fn pairs(&self) -> Option<&[(u64, f64)]> {
        match &self.layers {
            Layers::Iid { .. } => None,
            Layers::Fixed(p) => Some(p),
        }
    }

    /// Same layers with a different count; only meaningful for IID schedules.
    pub fn with_m(&self, m: u64) -> Result<Self> {
        match &self.layers {
            Layers::Iid { law, truncated, .. } => Ok(LayerSchedule {
                n: self.n,
                layers: Layers::Iid {
                    law: law.clone(),
                    truncated: truncated.clone(),
                    m,
                },
            }),
            Layers::Fixed(_) => Err(domain!("a fixed schedule has a fixed layer count")),
        }
    }

    /// Law of the layer attributes of a uniformly chosen layer, after
    /// truncation at `n`. For a fixed schedule every pair gets weight `1/m`.
    pub fn mixture_law(&self) -> Result<CommunityLaw> {
        match &self.layers {
            Layers::Iid { truncated, .. } => Ok(truncated.clone()),
            Layers::Fixed(pairs) => {
                if pairs.is_empty() {
                    return Err(invalid_law!("an empty fixed schedule has no mixture law"));
                }
                let w = 1.0 / pairs.len() as f64;
                CommunityLaw::new(pairs.iter().map(|&(x, q)| Atom::new(x, q, w)).collect())
            }
        }
    }

    /// Layers grouped by identical per-layer law, in a deterministic order.
    pub fn layer_groups(&self) -> Result<Vec<LayerGroup>> {
        match &self.layers {
            Layers::Iid { truncated, m, .. } => Ok(if *m == 0 {
                Vec::new()
            } else {
                alloc::vec![LayerGroup {
                    law: truncated.clone(),
                    count: *m
                }]
            }),
            Layers::Fixed(pairs) => {
                let mut sorted: Vec<(u64, u64)> = pairs
                    .iter()
                    .map(|&(x, q)| (x, if q == 0.0 { 0.0f64 } else { q }.to_bits()))
                    .collect();
                sorted.sort_unstable();
                let mut groups: Vec<LayerGroup> = Vec::new();
                let mut i = 0;
                while i < sorted.len() {
                    let mut j = i;
                    while j < sorted.len() && sorted[j] == sorted[i] {
                        j += 1;
                    }
                    let (x, qbits) = sorted[i];
                    groups.push(LayerGroup {
                        law: CommunityLaw::degenerate(x, f64::from_bits(qbits))?,
                        count: (j - i) as u64,
                    });
                    i = j;
                }
                Ok(groups)
            }
        }
    }

    /// `sum over layers of q * x^2`, the expected-edge measure used to cap
    /// explicit edge retention.
    pub fn expected_edge_load(&self) -> f64 {
        match &self.layers {
            Layers::Iid { truncated, m, .. } => {
                let per_layer: f64 = truncated
                    .atoms()
                    .map(|a| {
                        a.iter()
                            .map(|a| a.weight * a.density * a.size as f64 * a.size as f64)
                            .sum()
                    })
                    .unwrap_or(0.0);
                per_layer * *m as f64
            }
            Layers::Fixed(pairs) => pairs.iter().map(|&(x, q)| q * x as f64 * x as f64).sum(),
        }
    }

    /// Truncated per-layer law used for sampling in IID mode.
    pub(crate) fn truncated_law(&self) -> Option<&CommunityLaw> {
        match &self.layers {
            Layers::Iid { truncated, .. } => Some(truncated),
            Layers::Fixed(_) => None,
        }
    }
}
