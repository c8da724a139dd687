//! The a-TMFG builder: local expansion over a static kNN graph with a
//! bounded face universe, a lazy-deletion candidate heap, cached face
//! centroids, and an index-backed global rescue when local search stalls.
//!
//! Expansion attaches the best (face, node) pair currently known, kills
//! the face, and subdivides it into three children. Each live face holds
//! at most one entry in the heap; a popped entry whose node has since
//! been integrated triggers a fresh local re-score of that face, so no
//! face with a valid local candidate is ever starved. When the heap runs
//! dry the centroids of all live faces are batch-queried against the
//! index, whose deletion mask guarantees only frontier nodes come back.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::Serialize;

use crate::ann::{build_index, AnnIndex, IndexParams, SparseKnnGraph};
use crate::dataset::{dot, znormalize, DataMatrix};
use crate::error::{Error, Result};
use crate::graph::EdgeList;
use crate::util::{derive_seed, OrdF64};

/// Cap on the number of live faces. `Auto` resolves to
/// `max(1000, ceil(0.3 n))`, the elbow band of the fidelity curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniverseLimit {
    Auto,
    Unbounded,
    Fixed(usize),
}

impl UniverseLimit {
    pub fn resolve(&self, n: usize) -> Option<usize> {
        match self {
            UniverseLimit::Auto => Some(1000.max(n.div_ceil(10) * 3)),
            UniverseLimit::Unbounded => None,
            UniverseLimit::Fixed(u) => Some(*u),
        }
    }
}

/// Build configuration. Index parameters pass through to the ANN layer;
/// the index rng seed is derived from `seed` so one root seed drives
/// the whole run.
#[derive(Debug, Clone)]
pub struct AtmfgConfig {
    pub k: usize,
    pub universe_limit: UniverseLimit,
    pub clique_size: usize,
    pub rescue_k: usize,
    pub seed: u64,
    pub index: IndexParams,
}

impl Default for AtmfgConfig {
    fn default() -> Self {
        AtmfgConfig {
            k: 50,
            universe_limit: UniverseLimit::Auto,
            clique_size: 4,
            rescue_k: 8,
            seed: 0,
            index: IndexParams::default(),
        }
    }
}

impl AtmfgConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 3 {
            return Err(Error::Parameter(format!(
                "neighborhood k must be at least 3, got {}",
                self.k
            )));
        }
        if self.clique_size != 4 {
            return Err(Error::Parameter(format!(
                "only tetrahedral seeding (clique size 4) is supported, got {}",
                self.clique_size
            )));
        }
        if self.rescue_k < 1 {
            return Err(Error::Parameter("rescue_k must be at least 1".into()));
        }
        if let UniverseLimit::Fixed(0) = self.universe_limit {
            return Err(Error::Parameter("universe limit must be at least 1".into()));
        }
        Ok(())
    }
}

/// A 3-clique eligible to receive a new node. The centroid is the
/// elementwise sum of the three vertex rows, computed once at creation.
#[derive(Debug, Clone)]
pub struct Face {
    pub face_id: u64,
    pub vertices: [u32; 3],
    pub centroid: Vec<f64>,
    pub alive: bool,
}

/// Birth-ordered set of live faces with oldest-first pruning.
pub struct FaceUniverse {
    faces: Vec<Face>,
    live_count: usize,
    limit: Option<usize>,
    oldest_cursor: usize,
    centroids_computed: u64,
}

impl FaceUniverse {
    pub fn new(limit: Option<usize>) -> Self {
        FaceUniverse {
            faces: Vec::new(),
            live_count: 0,
            limit,
            oldest_cursor: 0,
            centroids_computed: 0,
        }
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn face(&self, id: u64) -> &Face {
        &self.faces[id as usize]
    }

    pub fn is_alive(&self, id: u64) -> bool {
        self.faces[id as usize].alive
    }

    pub fn create(&mut self, m: &DataMatrix, vertices: [u32; 3]) -> u64 {
        let id = self.faces.len() as u64;
        let (a, b, c) = (
            m.row(vertices[0] as usize),
            m.row(vertices[1] as usize),
            m.row(vertices[2] as usize),
        );
        let centroid = (0..m.n_cols()).map(|t| a[t] + b[t] + c[t]).collect();
        self.centroids_computed += 1;
        self.faces.push(Face {
            face_id: id,
            vertices,
            centroid,
            alive: true,
        });
        self.live_count += 1;
        id
    }

    pub fn kill(&mut self, id: u64) {
        let f = &mut self.faces[id as usize];
        if f.alive {
            f.alive = false;
            f.centroid = Vec::new();
            self.live_count -= 1;
        }
    }

    /// Prunes oldest live faces until the limit holds. Returns how many
    /// faces were dropped.
    pub fn prune_to_limit(&mut self) -> u64 {
        let Some(limit) = self.limit else { return 0 };
        let mut pruned = 0;
        while self.live_count > limit {
            while !self.faces[self.oldest_cursor].alive {
                self.oldest_cursor += 1;
            }
            let id = self.oldest_cursor as u64;
            self.kill(id);
            pruned += 1;
        }
        pruned
    }

    pub fn live_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces[self.oldest_cursor..].iter().filter(|f| f.alive)
    }
}

/// Max-heap entry: score first, then lower node id, then older face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct HeapKey(OrdF64, Reverse<u32>, Reverse<u64>);

/// Priority queue of (score, face, node) candidates with lazy deletion:
/// entries referencing dead faces or integrated nodes are discarded at
/// pop time.
pub struct CandidateHeap {
    heap: BinaryHeap<HeapKey>,
}

impl CandidateHeap {
    pub fn new() -> Self {
        CandidateHeap {
            heap: BinaryHeap::new(),
        }
    }

    pub fn push(&mut self, score: f64, node: u32, face_id: u64) {
        self.heap.push(HeapKey(OrdF64(score), Reverse(node), Reverse(face_id)));
    }

    pub fn pop(&mut self) -> Option<(f64, u32, u64)> {
        self.heap
            .pop()
            .map(|HeapKey(OrdF64(s), Reverse(n), Reverse(f))| (s, n, f))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

impl Default for CandidateHeap {
    fn default() -> Self {
        Self::new()
    }
}

/// Run counters; part of the public contract so benchmarks and tests can
/// assert engine behavior without private hooks.
#[derive(Debug, Clone, Serialize)]
pub struct EngineStats {
    pub n: usize,
    pub edges: usize,
    pub rescues: u64,
    pub lazy_discards: u64,
    pub faces_pruned: u64,
    pub peak_universe: usize,
    pub wall_seconds: f64,
    pub centroids_computed: u64,
    pub faces_created: u64,
}

/// One expansion, recorded when tracing is requested.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineStep {
    pub face: [u32; 3],
    pub node: u32,
    pub score: f64,
}

/// Sum of `v`'s correlations to the three vertices of `f`, evaluated as
/// one inner product against the cached centroid.
pub fn score(m: &DataMatrix, f: &Face, v: u32) -> Result<f64> {
    if f.vertices.contains(&v) {
        return Err(Error::Parameter(format!(
            "candidate {v} is a vertex of face {}",
            f.face_id
        )));
    }
    if v as usize >= m.n_rows() {
        return Err(Error::Bounds {
            index: v as usize,
            len: m.n_rows(),
        });
    }
    Ok(dot(&f.centroid, m.row(v as usize)) / m.n_cols() as f64)
}

/// Seed clique from the kNN graph: the node whose top `c-1` neighbor
/// weights have the largest sum, together with those neighbors. Ties go
/// to the lower node id. Nodes with fewer than `c-1` neighbors are
/// skipped; if all are, the highest-degree node is used and the clique
/// padded with the smallest unused ids.
pub fn seed_clique(g: &SparseKnnGraph, c: usize) -> Result<Vec<u32>> {
    let n = g.n_nodes();
    if n < c {
        return Err(Error::Size(format!(
            "need at least {c} nodes for a seed clique, got {n}"
        )));
    }
    let mut best: Option<(f64, u32)> = None;
    for i in 0..n {
        let list = g.neighbors(i);
        if list.len() < c - 1 {
            continue;
        }
        let sum: f64 = list[..c - 1].iter().map(|&(_, w)| w).sum();
        let better = match best {
            None => true,
            Some((bs, bi)) => sum > bs || (sum == bs && (i as u32) < bi),
        };
        if better {
            best = Some((sum, i as u32));
        }
    }
    let center = match best {
        Some((_, i)) => i,
        None => (0..n)
            .max_by_key(|&i| (g.neighbors(i).len(), Reverse(i)))
            .unwrap() as u32,
    };
    let mut clique = vec![center];
    for &(id, _) in g.neighbors(center as usize).iter().take(c - 1) {
        clique.push(id);
    }
    let mut pad = 0u32;
    while clique.len() < c {
        if !clique.contains(&pad) {
            clique.push(pad);
        }
        pad += 1;
    }
    Ok(clique)
}

struct Builder<'a> {
    m: &'a DataMatrix,
    k: usize,
    rescue_k: usize,
    idx: AnnIndex<'a>,
    g: SparseKnnGraph,
    universe: FaceUniverse,
    heap: CandidateHeap,
    edges: EdgeList,
    integrated: Vec<bool>,
    n_integrated: usize,
    rescues: u64,
    lazy_discards: u64,
    faces_pruned: u64,
    peak_universe: usize,
    trace: Option<Vec<EngineStep>>,
}

impl<'a> Builder<'a> {
    /// Local candidate pool of a face: union of its vertices' kNN lists,
    /// minus integrated nodes.
    fn gather_pool(&self, face: &Face) -> Vec<u32> {
        let mut pool = Vec::with_capacity(3 * self.k);
        for &u in &face.vertices {
            for &(id, _) in self.g.neighbors(u as usize) {
                if !self.integrated[id as usize] {
                    pool.push(id);
                }
            }
        }
        pool.sort_unstable();
        pool.dedup();
        pool
    }

    /// Scores the pool against the face centroid and pushes the single
    /// best candidate, if any.
    fn push_best_local(&mut self, face_id: u64) {
        let face = self.universe.face(face_id);
        let pool = self.gather_pool(face);
        let d = self.m.n_cols() as f64;
        let mut best: Option<(f64, u32)> = None;
        for &v in &pool {
            let s = dot(&face.centroid, self.m.row(v as usize)) / d;
            let better = match best {
                None => true,
                Some((bs, bv)) => s > bs || (s == bs && v < bv),
            };
            if better {
                best = Some((s, v));
            }
        }
        if let Some((s, v)) = best {
            self.heap.push(s, v, face_id);
        }
    }

    fn local_expand(&mut self, face_id: u64, v: u32, score: f64) -> Result<()> {
        if !self.universe.is_alive(face_id) || self.integrated[v as usize] {
            return Err(Error::Internal(format!(
                "expand called with stale candidate (face {face_id}, node {v})"
            )));
        }
        let [a, b, c] = self.universe.face(face_id).vertices;
        for u in [a, b, c] {
            self.edges
                .add(v, u, self.m.correlation(v as usize, u as usize)?)?;
        }
        self.integrated[v as usize] = true;
        self.n_integrated += 1;
        self.idx.mark_deleted(v)?;
        self.universe.kill(face_id);

        let children = [
            self.universe.create(self.m, [v, b, c]),
            self.universe.create(self.m, [a, v, c]),
            self.universe.create(self.m, [a, b, v]),
        ];
        self.faces_pruned += self.universe.prune_to_limit();
        for child in children {
            if self.universe.is_alive(child) {
                self.push_best_local(child);
            }
        }
        self.peak_universe = self.peak_universe.max(self.universe.live_count());
        if let Some(trace) = &mut self.trace {
            trace.push(EngineStep {
                face: [a, b, c],
                node: v,
                score,
            });
        }
        Ok(())
    }

    /// Batch-queries the index with every live face centroid and pushes
    /// the best valid pair per face. Returns the number pushed.
    fn global_rescue(&mut self) -> Result<usize> {
        let live: Vec<(u64, Vec<f64>)> = self
            .universe
            .live_faces()
            .map(|f| (f.face_id, f.centroid.clone()))
            .collect();
        let vectors: Vec<Vec<f64>> = live.iter().map(|(_, c)| c.clone()).collect();
        let results = self.idx.batch_query(&vectors, self.rescue_k)?;
        let mut pushed = 0;
        for ((face_id, _), hits) in live.iter().zip(results) {
            // Hits are live index nodes, hence non-integrated; similarity
            // is exactly the face score, so the first hit is the best pair.
            if let Some(&(node, sim)) = hits.first() {
                self.heap.push(sim, node, *face_id);
                pushed += 1;
            }
        }
        Ok(pushed)
    }
}

/// Builds the a-TMFG. The output has exactly `3N - 6` edges over one
/// connected component.
pub fn build_atmfg(m: &DataMatrix, cfg: &AtmfgConfig) -> Result<(EdgeList, EngineStats)> {
    let (edges, stats, _) = run(m, cfg, false)?;
    Ok((edges, stats))
}

/// As [`build_atmfg`], additionally recording every expansion step.
pub fn build_atmfg_traced(
    m: &DataMatrix,
    cfg: &AtmfgConfig,
) -> Result<(EdgeList, EngineStats, Vec<EngineStep>)> {
    let (edges, stats, trace) = run(m, cfg, true)?;
    Ok((edges, stats, trace.unwrap_or_default()))
}

fn run(
    m: &DataMatrix,
    cfg: &AtmfgConfig,
    record_trace: bool,
) -> Result<(EdgeList, EngineStats, Option<Vec<EngineStep>>)> {
    cfg.validate()?;
    let owned;
    let m = if m.is_normalized() {
        m
    } else {
        owned = znormalize(m.clone());
        &owned
    };
    let n = m.n_rows();
    if n < 4 {
        return Err(Error::Size(format!("TMFG needs at least 4 nodes, got {n}")));
    }

    let started = Instant::now();
    let mut index_params = cfg.index.clone();
    index_params.rng_seed = derive_seed(cfg.seed, "ann-index", 0);
    let mut idx = build_index(m, index_params)?;
    let k = cfg.k.min(n - 1);
    let g = idx.export_knn_graph(k)?;

    let clique = seed_clique(&g, cfg.clique_size)?;
    let mut edges = EdgeList::new(n);
    for i in 0..clique.len() {
        for j in (i + 1)..clique.len() {
            edges.add(
                clique[i],
                clique[j],
                m.correlation(clique[i] as usize, clique[j] as usize)?,
            )?;
        }
    }
    let mut integrated = vec![false; n];
    for &s in &clique {
        integrated[s as usize] = true;
        idx.mark_deleted(s)?;
    }

    let mut b = Builder {
        m,
        k,
        rescue_k: cfg.rescue_k,
        idx,
        g,
        universe: FaceUniverse::new(cfg.universe_limit.resolve(n)),
        heap: CandidateHeap::new(),
        edges,
        integrated,
        n_integrated: clique.len(),
        rescues: 0,
        lazy_discards: 0,
        faces_pruned: 0,
        peak_universe: 0,
        trace: record_trace.then(Vec::new),
    };

    let initial = [
        b.universe.create(m, [clique[0], clique[1], clique[2]]),
        b.universe.create(m, [clique[0], clique[1], clique[3]]),
        b.universe.create(m, [clique[0], clique[2], clique[3]]),
        b.universe.create(m, [clique[1], clique[2], clique[3]]),
    ];
    b.faces_pruned += b.universe.prune_to_limit();
    for f in initial {
        if b.universe.is_alive(f) {
            b.push_best_local(f);
        }
    }
    b.peak_universe = b.universe.live_count();

    let target_edges = 3 * n - 6;
    while b.edges.len() < target_edges {
        let mut expanded = false;
        while let Some((s, v, face_id)) = b.heap.pop() {
            if !b.universe.is_alive(face_id) {
                b.lazy_discards += 1;
                continue;
            }
            if b.integrated[v as usize] {
                // Face still live: re-score it so it is never starved.
                b.lazy_discards += 1;
                b.push_best_local(face_id);
                continue;
            }
            b.local_expand(face_id, v, s)?;
            expanded = true;
            break;
        }
        if !expanded {
            b.rescues += 1;
            let injected = b.global_rescue()?;
            if injected == 0 {
                return Err(Error::FrontierExhausted {
                    remaining: n - b.n_integrated,
                });
            }
        }
    }

    let stats = EngineStats {
        n,
        edges: b.edges.len(),
        rescues: b.rescues,
        lazy_discards: b.lazy_discards,
        faces_pruned: b.faces_pruned,
        peak_universe: b.peak_universe,
        wall_seconds: started.elapsed().as_secs_f64(),
        centroids_computed: b.universe.centroids_computed,
        faces_created: b.universe.faces.len() as u64,
    };
    Ok((b.edges, stats, b.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
        znormalize(DataMatrix::from_values(n, d, vals).unwrap())
    }

    #[test]
    fn n4_is_k4_with_no_rescues() {
        let m = random_matrix(4, 6, 1);
        let (edges, stats) = build_atmfg(&m, &AtmfgConfig::default()).unwrap();
        assert_eq!(edges.len(), 6);
        assert_eq!(stats.rescues, 0);
        assert!(edges.is_connected());
    }

    #[test]
    fn too_small_is_size_error() {
        let m = random_matrix(3, 4, 2);
        assert!(matches!(
            build_atmfg(&m, &AtmfgConfig::default()),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn config_validation() {
        let m = random_matrix(10, 4, 3);
        let bad_k = AtmfgConfig { k: 2, ..AtmfgConfig::default() };
        assert!(matches!(build_atmfg(&m, &bad_k), Err(Error::Parameter(_))));
        let bad_clique = AtmfgConfig { clique_size: 5, ..AtmfgConfig::default() };
        assert!(matches!(build_atmfg(&m, &bad_clique), Err(Error::Parameter(_))));
        let bad_rescue = AtmfgConfig { rescue_k: 0, ..AtmfgConfig::default() };
        assert!(matches!(build_atmfg(&m, &bad_rescue), Err(Error::Parameter(_))));
    }

    #[test]
    fn structural_postconditions() {
        for n in [5usize, 12, 37, 100] {
            let m = random_matrix(n, 8, n as u64);
            let (edges, stats) = build_atmfg(&m, &AtmfgConfig::default()).unwrap();
            assert_eq!(edges.len(), 3 * n - 6, "n = {n}");
            assert!(edges.is_connected(), "n = {n}");
            assert_eq!(stats.edges, 3 * n - 6);
        }
    }

    #[test]
    fn unbounded_universe_reaches_2n_minus_4() {
        let n = 60;
        let m = random_matrix(n, 8, 4);
        let cfg = AtmfgConfig {
            universe_limit: UniverseLimit::Unbounded,
            ..AtmfgConfig::default()
        };
        let (_, stats) = build_atmfg(&m, &cfg).unwrap();
        assert_eq!(stats.peak_universe, 2 * n - 4);
        assert_eq!(stats.faces_pruned, 0);
    }

    #[test]
    fn bounded_universe_never_exceeds_limit() {
        let n = 120;
        let m = random_matrix(n, 8, 5);
        let cfg = AtmfgConfig {
            universe_limit: UniverseLimit::Fixed(20),
            ..AtmfgConfig::default()
        };
        let (edges, stats) = build_atmfg(&m, &cfg).unwrap();
        assert_eq!(edges.len(), 3 * n - 6);
        assert!(edges.is_connected());
        assert!(stats.peak_universe <= 20, "peak {}", stats.peak_universe);
        assert!(stats.faces_pruned > 0);
    }

    #[test]
    fn centroids_computed_exactly_once_per_face() {
        let n = 75;
        let m = random_matrix(n, 8, 6);
        let (_, stats) = build_atmfg(&m, &AtmfgConfig::default()).unwrap();
        assert_eq!(stats.centroids_computed, stats.faces_created);
        assert_eq!(stats.faces_created as usize, 4 + 3 * (n - 4));
    }

    #[test]
    fn deterministic_given_seed() {
        let m = random_matrix(90, 10, 7);
        let cfg = AtmfgConfig { seed: 11, ..AtmfgConfig::default() };
        let (e1, _) = build_atmfg(&m, &cfg).unwrap();
        let (e2, _) = build_atmfg(&m, &cfg).unwrap();
        assert_eq!(e1.edge_set(), e2.edge_set());
    }

    #[test]
    fn score_matches_three_term_sum() {
        let m = random_matrix(20, 40, 8);
        let mut universe = FaceUniverse::new(None);
        let f = universe.create(&m, [2, 5, 11]);
        let face = universe.face(f);
        for v in [0u32, 7, 19] {
            let got = score(&m, face, v).unwrap();
            let expected = m.correlation(v as usize, 2).unwrap()
                + m.correlation(v as usize, 5).unwrap()
                + m.correlation(v as usize, 11).unwrap();
            assert!((got - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn score_rejects_face_vertices() {
        let m = random_matrix(8, 6, 9);
        let mut universe = FaceUniverse::new(None);
        let f = universe.create(&m, [1, 2, 3]);
        assert!(matches!(
            score(&m, universe.face(f), 2),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn score_degenerate_node_is_zero() {
        let mut vals: Vec<f64> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..4 * 6 {
            vals.push(rng.random::<f64>());
        }
        vals.extend_from_slice(&[3.0; 6]); // constant row 4
        let m = znormalize(DataMatrix::from_values(5, 6, vals).unwrap());
        let mut universe = FaceUniverse::new(None);
        let f = universe.create(&m, [0, 1, 2]);
        assert_eq!(score(&m, universe.face(f), 4).unwrap(), 0.0);
    }

    #[test]
    fn seed_clique_n4_returns_everything() {
        let m = random_matrix(4, 6, 11);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let g = idx.export_knn_graph(3).unwrap();
        let mut clique = seed_clique(&g, 4).unwrap();
        clique.sort_unstable();
        assert_eq!(clique, vec![0, 1, 2, 3]);
    }

    #[test]
    fn seed_clique_picks_dominant_node() {
        // Five rows where rows 0..=3 are near-copies of each other and row 4
        // is unrelated: node ids 0..4 all see high top-3 sums, node 4 does
        // not. The enumerated oracle is the max over per-node top-3 sums.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let base: Vec<f64> = (0..24).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut vals = Vec::new();
        for i in 0..4 {
            vals.extend(base.iter().map(|x| x + 0.01 * (i as f64) * x.abs()));
        }
        vals.extend((0..24).map(|_| rng.random::<f64>() - 0.5));
        let m = znormalize(DataMatrix::from_values(5, 24, vals).unwrap());
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let g = idx.export_knn_graph(3).unwrap();

        let mut best = (f64::NEG_INFINITY, u32::MAX);
        for i in 0..5usize {
            let mut weights: Vec<f64> = (0..5)
                .filter(|&j| j != i)
                .map(|j| m.correlation(i, j).unwrap())
                .collect();
            weights.sort_by(|a, b| b.total_cmp(a));
            let sum: f64 = weights[..3].iter().sum();
            if sum > best.0 {
                best = (sum, i as u32);
            }
        }
        let clique = seed_clique(&g, 4).unwrap();
        assert_eq!(clique[0], best.1);
        assert!(!clique.contains(&4));
    }

    #[test]
    fn candidate_heap_ordering() {
        let mut h = CandidateHeap::new();
        h.push(0.5, 9, 2);
        h.push(0.9, 7, 1);
        h.push(0.9, 3, 5);
        h.push(0.9, 3, 4);
        assert_eq!(h.pop(), Some((0.9, 3, 4)));
        assert_eq!(h.pop(), Some((0.9, 3, 5)));
        assert_eq!(h.pop(), Some((0.9, 7, 1)));
        assert_eq!(h.pop(), Some((0.5, 9, 2)));
        assert!(h.pop().is_none());
    }

    #[test]
    fn universe_prunes_oldest_first() {
        let m = random_matrix(12, 6, 13);
        let mut u = FaceUniverse::new(Some(2));
        let f0 = u.create(&m, [0, 1, 2]);
        let f1 = u.create(&m, [1, 2, 3]);
        let f2 = u.create(&m, [2, 3, 4]);
        assert_eq!(u.prune_to_limit(), 1);
        assert!(!u.is_alive(f0));
        assert!(u.is_alive(f1));
        assert!(u.is_alive(f2));
    }
}
