//! Layer-by-layer sampling of the union graph and its connectivity.

use alloc::vec::Vec;

use rand::Rng;

use super::dsu::DisjointSets;
use super::sampling::{sample_layer_edges, EdgeSink, SubsetSampler};
use super::seed::{attribute_stream, edge_stream};
use crate::error::{domain, Error, Result};
use crate::schedule::LayerSchedule;

/// Expected-edge load above which explicit edge retention is refused.
pub const RETAIN_EDGES_CAP: f64 = 1e8;

/// Union graph on `[n]` built by streaming layer edges into a disjoint-set
/// forest.
#[derive(Debug, Clone)]
pub struct GraphSample {
    n: usize,
    edges_seen: u64,
    dsu: DisjointSets,
    touched: Vec<bool>,
    untouched: usize,
    edges: Option<Vec<(u32, u32)>>,
}

impl GraphSample {
    pub fn new(n: usize, retain_edges: bool) -> Self {
        GraphSample {
            n,
            edges_seen: 0,
            dsu: DisjointSets::new(n),
            touched: alloc::vec![false; n],
            untouched: n,
            edges: retain_edges.then(Vec::new),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Retained edges counted with multiplicity across layers.
    pub fn edges_seen(&self) -> u64 {
        self.edges_seen
    }

    pub fn component_count(&self) -> usize {
        self.dsu.components()
    }

    pub fn largest_component(&self) -> usize {
        self.dsu.largest()
    }

    /// Vertices without any incident edge.
    pub fn isolated_count(&self) -> usize {
        self.untouched
    }

    pub fn is_touched(&self, v: u32) -> bool {
        self.touched[v as usize]
    }

    pub fn edges(&self) -> Option<&[(u32, u32)]> {
        self.edges.as_deref()
    }

    pub fn dsu_mut(&mut self) -> &mut DisjointSets {
        &mut self.dsu
    }

    /// Adds one layer on an explicit vertex subset. Sampling code draws the
    /// subset itself; tests use this to pin layers to chosen vertices.
    pub fn add_layer_on<R: Rng + ?Sized>(&mut self, subset: &[u32], q: f64, rng: &mut R) -> u64 {
        sample_layer_edges(subset, q, rng, self)
    }

    fn touch(&mut self, v: u32) {
        let t = &mut self.touched[v as usize];
        if !*t {
            *t = true;
            self.untouched -= 1;
        }
    }
}

impl EdgeSink for GraphSample {
    fn add_edge(&mut self, u: u32, v: u32) {
        self.edges_seen += 1;
        self.touch(u);
        self.touch(v);
        self.dsu.union(u, v);
        if let Some(edges) = &mut self.edges {
            edges.push((u, v));
        }
    }
}

/// Connectivity summary of one sampled graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConnectivityStats {
    pub connected: bool,
    pub components: usize,
    /// `N_0`.
    pub isolated: usize,
    pub largest: usize,
    pub edges: u64,
}

/// Graphs on zero or one vertex count as connected.
pub fn connectivity_stats(sample: &GraphSample) -> ConnectivityStats {
    ConnectivityStats {
        connected: sample.component_count() <= 1,
        components: sample.component_count(),
        isolated: sample.isolated_count(),
        largest: sample.largest_component(),
        edges: sample.edges_seen(),
    }
}

/// Reusable per-worker state for sampling graphs from one schedule.
///
/// Layer `l` of replicate `r` depends only on `(master_seed, r, l)`, so the
/// first `m` layers of a longer run coincide with an `m`-layer run.
#[derive(Debug, Clone)]
pub struct GraphSampler<'a> {
    schedule: &'a LayerSchedule,
    master_seed: u64,
    atoms: Vec<(u64, f64)>,
    cdf: Vec<f64>,
    subsets: SubsetSampler,
    buffer: Vec<u32>,
}

impl<'a> GraphSampler<'a> {
    pub fn new(schedule: &'a LayerSchedule, master_seed: u64) -> Result<Self> {
        let n = usize::try_from(schedule.n()).ok().filter(|&n| n <= u32::MAX as usize);
        let n = n.ok_or_else(|| domain!("n = {} exceeds the u32 vertex range", schedule.n()))?;
        let (atoms, cdf) = match schedule.truncated_law() {
            Some(law) => {
                let atoms = law.atoms().expect("truncated laws are linear");
                let mut acc = 0.0;
                let cdf = atoms
                    .iter()
                    .map(|a| {
                        acc += a.weight;
                        acc
                    })
                    .collect();
                (atoms.iter().map(|a| (a.size, a.density)).collect(), cdf)
            }
            None => (Vec::new(), Vec::new()),
        };
        Ok(GraphSampler {
            schedule,
            master_seed,
            atoms,
            cdf,
            subsets: SubsetSampler::new(n),
            buffer: Vec::new(),
        })
    }

    pub fn schedule(&self) -> &LayerSchedule {
        self.schedule
    }

    /// `(x, q)` of layer `layer` in replicate `replicate`, sizes already
    /// truncated at `n`. IID schedules define layers past `m` as well.
    pub fn layer_attributes(&self, replicate: u64, layer: u64) -> (u64, f64) {
        match self.schedule.pairs() {
            Some(pairs) => pairs[layer as usize],
            None => {
                if self.atoms.len() == 1 {
                    return self.atoms[0];
                }
                let u: f64 = attribute_stream(self.master_seed, replicate, layer).random();
                let idx = self.cdf.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
                self.atoms[idx]
            }
        }
    }

    /// Samples layer `layer` of `replicate` into `graph`.
    pub fn apply_layer(&mut self, graph: &mut GraphSample, replicate: u64, layer: u64) -> u64 {
        let (x, q) = self.layer_attributes(replicate, layer);
        let mut rng = edge_stream(self.master_seed, replicate, layer);
        self.subsets.sample(x as usize, &mut rng, &mut self.buffer);
        sample_layer_edges(&self.buffer, q, &mut rng, graph)
    }

    /// The full `m`-layer graph of one replicate.
    pub fn sample(&mut self, replicate: u64, retain_edges: bool) -> Result<GraphSample> {
        if retain_edges && self.schedule.expected_edge_load() > RETAIN_EDGES_CAP {
            return Err(Error::Refused(alloc::format!(
                "retaining edges would materialize about {:.3e} edges (cap {RETAIN_EDGES_CAP:e})",
                self.schedule.expected_edge_load()
            )));
        }
        let mut graph = GraphSample::new(self.subsets.n(), retain_edges);
        for layer in 0..self.schedule.m() {
            self.apply_layer(&mut graph, replicate, layer);
        }
        Ok(graph)
    }

    /// Connectivity after each of the ascending layer counts in
    /// `checkpoints`, from a single growing graph.
    pub fn sample_prefixes(&mut self, replicate: u64, checkpoints: &[u64]) -> Result<Vec<ConnectivityStats>> {
        if checkpoints.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain!("checkpoints must be ascending"));
        }
        if let (false, Some(&last)) = (self.schedule.is_iid(), checkpoints.last()) {
            if last > self.schedule.m() {
                return Err(domain!(
                    "checkpoint {last} exceeds the {} fixed layers",
                    self.schedule.m()
                ));
            }
        }
        let mut graph = GraphSample::new(self.subsets.n(), false);
        let mut out = Vec::with_capacity(checkpoints.len());
        let mut layer = 0;
        for &c in checkpoints {
            while layer < c {
                self.apply_layer(&mut graph, replicate, layer);
                layer += 1;
            }
            out.push(connectivity_stats(&graph));
        }
        Ok(out)
    }
}

/// One replicate of the union graph for `schedule`.
pub fn sample_graph(
    schedule: &LayerSchedule,
    master_seed: u64,
    replicate: u64,
    retain_edges: bool,
) -> Result<GraphSample> {
    GraphSampler::new(schedule, master_seed)?.sample(replicate, retain_edges)
}

/// First place where adding a layer lost connectivity or split components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingViolation {
    pub replicate: u64,
    /// Number of layers after which the violation was observed.
    pub prefix: u64,
    pub components_before: usize,
    pub components_after: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CouplingReport {
    pub replicates: u64,
    pub prefixes_checked: u64,
    pub violation: Option<CouplingViolation>,
}

impl CouplingReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Replays each replicate's layer stream one layer at a time and checks that
/// the component count never increases and connectivity is never lost.
pub fn coupling_monotonicity_check(
    schedule: &LayerSchedule,
    replicates: u64,
    master_seed: u64,
) -> Result<CouplingReport> {
    if schedule.m() < 2 {
        return Err(domain!("the coupling check needs at least two layers"));
    }
    let mut sampler = GraphSampler::new(schedule, master_seed)?;
    let mut prefixes_checked = 0;
    for replicate in 0..replicates {
        let mut graph = GraphSample::new(schedule.n() as usize, false);
        let mut before = connectivity_stats(&graph);
        for layer in 0..schedule.m() {
            sampler.apply_layer(&mut graph, replicate, layer);
            let after = connectivity_stats(&graph);
            prefixes_checked += 1;
            if after.components > before.components || (before.connected && !after.connected) {
                return Ok(CouplingReport {
                    replicates,
                    prefixes_checked,
                    violation: Some(CouplingViolation {
                        replicate,
                        prefix: layer + 1,
                        components_before: before.components,
                        components_after: after.components,
                    }),
                });
            }
            before = after;
        }
    }
    Ok(CouplingReport {
        replicates,
        prefixes_checked,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::CommunityLaw;
    use crate::sim::seed::StreamRng;
    use alloc::vec;
    use rand::SeedableRng;

    #[test]
    fn empty_schedule_leaves_singletons() {
        let s = LayerSchedule::iid(5, CommunityLaw::degenerate(2, 1.0).unwrap(), 0).unwrap();
        let g = sample_graph(&s, 1, 0, false).unwrap();
        let st = connectivity_stats(&g);
        assert_eq!((st.connected, st.components, st.isolated, st.largest), (false, 5, 5, 1));
    }

    #[test]
    fn spanning_clique_connects() {
        let s = LayerSchedule::fixed(7, vec![(7, 1.0)]).unwrap();
        let st = connectivity_stats(&sample_graph(&s, 1, 0, false).unwrap());
        assert!(st.connected);
        assert_eq!(st.isolated, 0);
        assert_eq!(st.edges, 21);
    }

    #[test]
    fn tiny_graph_conventions() {
        let s = LayerSchedule::fixed(1, vec![(1, 1.0), (0, 0.5)]).unwrap();
        assert!(connectivity_stats(&sample_graph(&s, 9, 0, false).unwrap()).connected);
        assert!(connectivity_stats(&GraphSample::new(0, false)).connected);
    }

    #[test]
    fn three_vertices_without_layers() {
        let st = connectivity_stats(&GraphSample::new(3, false));
        assert_eq!((st.connected, st.components, st.isolated), (false, 3, 3));
    }

    #[test]
    fn pinned_path_is_connected() {
        let mut g = GraphSample::new(4, true);
        let mut rng = StreamRng::seed_from_u64(0);
        for pair in [[0u32, 1], [1, 2], [2, 3]] {
            g.add_layer_on(&pair, 1.0, &mut rng);
        }
        let st = connectivity_stats(&g);
        assert!(st.connected);
        assert_eq!(st.isolated, 0);
        assert_eq!(g.edges().unwrap().len(), 3);
    }

    #[test]
    fn clique_layers_count_every_pair() {
        let pairs: Vec<(u64, f64)> = vec![(5, 1.0), (3, 1.0), (9, 1.0), (1, 1.0), (9, 1.0)];
        let expected: u64 = pairs.iter().map(|&(x, _)| x * x.saturating_sub(1) / 2).sum();
        let s = LayerSchedule::fixed(10, pairs).unwrap();
        for rep in 0..20 {
            assert_eq!(sample_graph(&s, 5, rep, false).unwrap().edges_seen(), expected);
        }
    }

    #[test]
    fn untouched_vertices_are_exactly_the_singletons() {
        let law = CommunityLaw::new(vec![
            crate::law::Atom::new(2, 1.0, 0.4),
            crate::law::Atom::new(6, 0.2, 0.6),
        ])
        .unwrap();
        for n in [2u64, 9, 30, 50] {
            let s = LayerSchedule::iid(n, law.clone(), n / 2).unwrap();
            for rep in 0..30 {
                let mut g = sample_graph(&s, 17, rep, false).unwrap();
                let isolated = g.isolated_count();
                let mut singletons = 0;
                for v in 0..n as u32 {
                    let single = g.dsu_mut().set_size(v) == 1;
                    assert_eq!(single, !g.is_touched(v));
                    singletons += usize::from(single);
                }
                assert_eq!(singletons, isolated);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_coupled() {
        let law = CommunityLaw::new(vec![
            crate::law::Atom::new(3, 0.5, 0.5),
            crate::law::Atom::new(8, 0.1, 0.5),
        ])
        .unwrap();
        let long = LayerSchedule::iid(60, law, 80).unwrap();
        let mut sampler = GraphSampler::new(&long, 99).unwrap();
        let prefixes = sampler.sample_prefixes(4, &[0, 10, 40, 80]).unwrap();
        for (i, m) in [0u64, 10, 40, 80].into_iter().enumerate() {
            let short = long.with_m(m).unwrap();
            let st = connectivity_stats(&sample_graph(&short, 99, 4, false).unwrap());
            assert_eq!(st, prefixes[i]);
        }
        assert!(sampler.sample_prefixes(0, &[5, 3]).is_err());
    }

    #[test]
    fn retention_cap_is_enforced() {
        let s = LayerSchedule::iid(20_000, CommunityLaw::degenerate(20_000, 1.0).unwrap(), 1).unwrap();
        let err = sample_graph(&s, 0, 0, true).unwrap_err();
        assert_eq!(err.code(), "refused");
    }

    #[test]
    fn zero_density_keeps_components_at_n() {
        let s = LayerSchedule::iid(30, CommunityLaw::degenerate(10, 0.0).unwrap(), 25).unwrap();
        let report = coupling_monotonicity_check(&s, 5, 3).unwrap();
        assert!(report.passed());
        assert_eq!(report.prefixes_checked, 125);
        let g = sample_graph(&s, 3, 0, false).unwrap();
        assert_eq!(g.component_count(), 30);
    }
}
