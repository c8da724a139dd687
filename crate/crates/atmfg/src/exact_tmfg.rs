//! Exact O(N^2) TMFG baseline with a full construction trace.
//!
//! The builder keeps one cached best candidate per active face and
//! re-scores eagerly whenever an insertion invalidates a cached entry, so
//! the total work stays quadratic in N. The trace records, for every
//! step, where in the birth-ordered face universe the selected face sat —
//! the raw material for the face-location statistic.

use crate::dataset::{dot, znormalize, DataMatrix};
use crate::error::{Error, Result};
use crate::graph::EdgeList;

/// Node-count cap for the exact builder; beyond this the quadratic cost
/// is impractical. `build_exact_tmfg_unbounded` skips the guard.
pub const EXACT_NODE_CAP: usize = 30_000;

/// One insertion step: the selected face's 1-based birth rank `j` among
/// the live faces, the live-face count at selection time, the inserted
/// node, and its gain (sum of the three correlations to the face).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub face_rank: usize,
    pub universe_size: usize,
    pub node: u32,
    pub gain: f64,
}

/// Birth-ordered record of every insertion, N-4 steps for N nodes.
#[derive(Debug, Clone, Default)]
pub struct ConstructionTrace {
    pub steps: Vec<TraceStep>,
}

/// Per-check outcome of [`validate_tmfg`].
#[derive(Debug, Clone, serde::Serialize)]
pub struct TmfgValidation {
    pub edge_count_ok: bool,
    pub connectivity_ok: bool,
    pub insertion_degree_ok: bool,
    pub universe_growth_ok: bool,
}

impl TmfgValidation {
    pub fn passed(&self) -> bool {
        self.edge_count_ok && self.connectivity_ok && self.insertion_degree_ok && self.universe_growth_ok
    }
}

struct FaceRec {
    vertices: [u32; 3],
    centroid: Vec<f64>,
    alive: bool,
    best_node: u32,
    best_gain: f64,
    exhausted: bool,
}

struct ExactBuilder<'a> {
    m: &'a DataMatrix,
    faces: Vec<FaceRec>,
    live: Vec<usize>,
    remaining: Vec<u32>,
    integrated: Vec<bool>,
}

impl<'a> ExactBuilder<'a> {
    fn centroid(&self, a: u32, b: u32, c: u32) -> Vec<f64> {
        let (ra, rb, rc) = (
            self.m.row(a as usize),
            self.m.row(b as usize),
            self.m.row(c as usize),
        );
        (0..self.m.n_cols()).map(|t| ra[t] + rb[t] + rc[t]).collect()
    }

    /// Best remaining candidate for a face: max gain, ties to lower id.
    fn score_face(&self, centroid: &[f64]) -> (u32, f64, bool) {
        let d = self.m.n_cols() as f64;
        let mut best_node = u32::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for &v in &self.remaining {
            let gain = dot(centroid, self.m.row(v as usize)) / d;
            if gain > best_gain || (gain == best_gain && v < best_node) {
                best_gain = gain;
                best_node = v;
            }
        }
        if best_node == u32::MAX {
            (0, f64::NEG_INFINITY, true)
        } else {
            (best_node, best_gain, false)
        }
    }

    fn push_face(&mut self, a: u32, b: u32, c: u32) {
        let centroid = self.centroid(a, b, c);
        let (best_node, best_gain, exhausted) = self.score_face(&centroid);
        self.faces.push(FaceRec {
            vertices: [a, b, c],
            centroid,
            alive: true,
            best_node,
            best_gain,
            exhausted,
        });
        self.live.push(self.faces.len() - 1);
    }

    fn remove_remaining(&mut self, v: u32) {
        let pos = self.remaining.iter().position(|&x| x == v).unwrap();
        self.remaining.swap_remove(pos);
        self.integrated[v as usize] = true;
    }
}

/// Greedy seed tetrahedron: the node with maximal correlation row-sum,
/// its best partner, then twice the node maximizing summed correlation
/// to the seed set. Ties go to the lower node id.
fn seed_tetrahedron(m: &DataMatrix) -> [u32; 4] {
    let n = m.n_rows();
    let d_cols = m.n_cols();
    let d = d_cols as f64;
    let mut total = vec![0.0f64; d_cols];
    for i in 0..n {
        for (t, x) in m.row(i).iter().enumerate() {
            total[t] += x;
        }
    }
    let mut first = 0u32;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let s = dot(&total, m.row(i)) / d;
        if s > best {
            best = s;
            first = i as u32;
        }
    }

    let mut seed = vec![first];
    let mut seed_sum: Vec<f64> = m.row(first as usize).to_vec();
    for _ in 0..3 {
        let mut pick = u32::MAX;
        let mut best = f64::NEG_INFINITY;
        for c in 0..n as u32 {
            if seed.contains(&c) {
                continue;
            }
            let s = dot(&seed_sum, m.row(c as usize)) / d;
            if s > best || (s == best && c < pick) {
                best = s;
                pick = c;
            }
        }
        seed.push(pick);
        for (t, x) in m.row(pick as usize).iter().enumerate() {
            seed_sum[t] += x;
        }
    }
    [seed[0], seed[1], seed[2], seed[3]]
}

/// Builds the exact TMFG. Refuses `N > EXACT_NODE_CAP`; see
/// [`build_exact_tmfg_unbounded`] for the escape hatch.
pub fn build_exact_tmfg(m: &DataMatrix) -> Result<(EdgeList, ConstructionTrace)> {
    if m.n_rows() > EXACT_NODE_CAP {
        return Err(Error::SizeGuard {
            n: m.n_rows(),
            cap: EXACT_NODE_CAP,
        });
    }
    build_exact_tmfg_unbounded(m)
}

/// Exact TMFG without the node-count guard.
pub fn build_exact_tmfg_unbounded(m: &DataMatrix) -> Result<(EdgeList, ConstructionTrace)> {
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

    let seed = seed_tetrahedron(m);
    let mut edges = EdgeList::new(n);
    for i in 0..4 {
        for j in (i + 1)..4 {
            edges.add(seed[i], seed[j], m.correlation(seed[i] as usize, seed[j] as usize)?)?;
        }
    }

    let mut integrated = vec![false; n];
    for &s in &seed {
        integrated[s as usize] = true;
    }
    let remaining: Vec<u32> = (0..n as u32).filter(|&v| !integrated[v as usize]).collect();

    let mut b = ExactBuilder {
        m,
        faces: Vec::with_capacity(4 + 3 * (n - 4)),
        live: Vec::with_capacity(2 * n),
        remaining,
        integrated,
    };
    b.push_face(seed[0], seed[1], seed[2]);
    b.push_face(seed[0], seed[1], seed[3]);
    b.push_face(seed[0], seed[2], seed[3]);
    b.push_face(seed[1], seed[2], seed[3]);

    let mut trace = ConstructionTrace::default();
    for _ in 0..(n - 4) {
        b.live.retain(|&f| b.faces[f].alive);

        // Argmax over live faces: gain desc, node asc, face birth asc.
        let mut best_rank = usize::MAX;
        for (rank, &f) in b.live.iter().enumerate() {
            let fr = &b.faces[f];
            debug_assert!(!fr.exhausted, "live face with no candidates mid-build");
            if best_rank == usize::MAX {
                best_rank = rank;
                continue;
            }
            let cur = &b.faces[b.live[best_rank]];
            if fr.best_gain > cur.best_gain
                || (fr.best_gain == cur.best_gain && fr.best_node < cur.best_node)
            {
                best_rank = rank;
            }
        }
        let face_id = b.live[best_rank];
        let (v, gain, [fa, fb, fc]) = {
            let fr = &b.faces[face_id];
            (fr.best_node, fr.best_gain, fr.vertices)
        };
        trace.steps.push(TraceStep {
            face_rank: best_rank + 1,
            universe_size: b.live.len(),
            node: v,
            gain,
        });

        for &u in &[fa, fb, fc] {
            edges.add(v, u, m.correlation(v as usize, u as usize)?)?;
        }
        b.faces[face_id].alive = false;
        b.remove_remaining(v);

        b.push_face(v, fb, fc);
        b.push_face(fa, v, fc);
        b.push_face(fa, fb, v);

        // Invalidate cached candidates naming the inserted node.
        let new_from = b.faces.len() - 3;
        for idx in 0..b.live.len() {
            let f = b.live[idx];
            if f >= new_from || !b.faces[f].alive || b.faces[f].best_node != v {
                continue;
            }
            let (bn, bg, ex) = b.score_face(&b.faces[f].centroid);
            let fr = &mut b.faces[f];
            fr.best_node = bn;
            fr.best_gain = bg;
            fr.exhausted = ex;
        }
    }

    Ok((edges, trace))
}

/// Face-location statistic per step: `L = (j - F) / F` where `j` is the
/// selected face's birth rank and `F` the universe size. 0 means the
/// newest face was selected; values approach -1 for the oldest.
pub fn face_location_stats(trace: &ConstructionTrace) -> Vec<f64> {
    trace
        .steps
        .iter()
        .map(|s| (s.face_rank as f64 - s.universe_size as f64) / s.universe_size as f64)
        .collect()
}

/// Structural audit of a finished exact build against its trace.
pub fn validate_tmfg(edges: &EdgeList, trace: &ConstructionTrace) -> TmfgValidation {
    let n = edges.n_nodes();
    let edge_count_ok = edges.len() == 3 * n - 6;
    let connectivity_ok = edges.is_connected();
    let universe_growth_ok = trace
        .steps
        .iter()
        .enumerate()
        .all(|(t, s)| s.universe_size == 4 + 2 * t)
        && trace.steps.len() + 4 == n;

    // Insertion order: seed nodes first, then trace order. Every non-seed
    // node must have exactly 3 edges toward earlier nodes.
    let mut order = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut duplicates = false;
    for (t, s) in trace.steps.iter().enumerate() {
        let v = s.node as usize;
        if v >= n || seen[v] {
            duplicates = true;
            break;
        }
        seen[v] = true;
        order[v] = t + 1;
    }
    let insertion_degree_ok = if duplicates {
        false
    } else {
        let mut back_deg = vec![0usize; n];
        for &(u, v, _) in edges.edges() {
            let (ou, ov) = (order[u as usize], order[v as usize]);
            if ou == ov {
                continue; // seed-internal edge
            }
            let later = if ou > ov { u as usize } else { v as usize };
            back_deg[later] += 1;
        }
        (0..n).all(|v| order[v] == 0 || back_deg[v] == 3)
    };

    TmfgValidation {
        edge_count_ok,
        connectivity_ok,
        insertion_degree_ok,
        universe_growth_ok,
    }
}
