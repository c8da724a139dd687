//! Hierarchical navigable small-world graph over matrix rows, using scaled
//! inner-product similarity (higher is closer). Nodes are inserted
//! sequentially with a seeded level generator, so a fixed seed gives a
//! fully deterministic structure. Deletion is a mask applied when results
//! are collected: dead nodes still route traffic, they just cannot be
//! returned.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{dot, DataMatrix};
use crate::util::OrdF64;

pub(crate) struct Hnsw {
    max_degree: usize,
    max_degree_l0: usize,
    ef_construction: usize,
    level_scale: f64,
    levels: Vec<u32>,
    /// links[node][level] = neighbor ids.
    links: Vec<Vec<Vec<u32>>>,
    entry: u32,
    max_level: u32,
}

/// Scratch bitset marking visited nodes during one search.
struct Visited {
    words: Vec<u64>,
}

impl Visited {
    fn new(n: usize) -> Self {
        Visited {
            words: vec![0u64; n.div_ceil(64)],
        }
    }

    fn insert(&mut self, id: u32) -> bool {
        let (w, b) = ((id / 64) as usize, id % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    fn clear(&mut self) {
        self.words.fill(0);
    }
}

impl Hnsw {
    pub fn build(data: &DataMatrix, max_degree: usize, ef_construction: usize, seed: u64) -> Self {
        let n = data.n_rows();
        let mut hnsw = Hnsw {
            max_degree,
            max_degree_l0: max_degree * 2,
            ef_construction: ef_construction.max(max_degree + 1),
            level_scale: 1.0 / (max_degree as f64).ln().max(f64::MIN_POSITIVE),
            levels: Vec::with_capacity(n),
            links: Vec::with_capacity(n),
            entry: 0,
            max_level: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut visited = Visited::new(n);
        for i in 0..n {
            let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
            let level = (-u.ln() * hnsw.level_scale).floor() as u32;
            hnsw.insert(data, i as u32, level, &mut visited);
        }
        hnsw
    }

    fn sim(data: &DataMatrix, query: &[f64], id: u32) -> f64 {
        dot(query, data.row(id as usize)) / data.n_cols() as f64
    }

    fn insert(&mut self, data: &DataMatrix, id: u32, level: u32, visited: &mut Visited) {
        self.levels.push(level);
        self.links
            .push((0..=level).map(|_| Vec::new()).collect());
        if id == 0 {
            self.entry = 0;
            self.max_level = level;
            return;
        }

        let query = data.row(id as usize);
        let mut ep = (Self::sim(data, query, self.entry), self.entry);
        let mut lc = self.max_level;
        while lc > level {
            ep = self.greedy_step(data, query, ep, lc);
            lc -= 1;
        }

        let mut entries = vec![ep];
        for lc in (0..=level.min(self.max_level)).rev() {
            visited.clear();
            let nearest = self.search_layer(
                data,
                query,
                &entries,
                self.ef_construction,
                lc,
                None,
                visited,
            );
            let cap = if lc == 0 { self.max_degree_l0 } else { self.max_degree };
            for &(_, nb) in nearest.iter().take(cap) {
                self.links[id as usize][lc as usize].push(nb);
                self.links[nb as usize][lc as usize].push(id);
                if self.links[nb as usize][lc as usize].len() > cap {
                    self.shrink(data, nb, lc, cap);
                }
            }
            entries = nearest;
        }

        if level > self.max_level {
            self.max_level = level;
            self.entry = id;
        }
    }

    /// Keeps only the `cap` most similar neighbors of `id` at `level`.
    fn shrink(&mut self, data: &DataMatrix, id: u32, level: u32, cap: usize) {
        let row = data.row(id as usize);
        let list = &mut self.links[id as usize][level as usize];
        let mut scored: Vec<(f64, u32)> = list
            .iter()
            .map(|&nb| (dot(row, data.row(nb as usize)), nb))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(cap);
        *list = scored.into_iter().map(|(_, nb)| nb).collect();
    }

    /// Greedy descent within one level: follow the best neighbor while it
    /// improves on the current point.
    fn greedy_step(&self, data: &DataMatrix, query: &[f64], mut ep: (f64, u32), level: u32) -> (f64, u32) {
        loop {
            let mut improved = false;
            for &nb in &self.links[ep.1 as usize][level as usize] {
                let s = Self::sim(data, query, nb);
                if s > ep.0 || (s == ep.0 && nb < ep.1) {
                    ep = (s, nb);
                    improved = true;
                }
            }
            if !improved {
                return ep;
            }
        }
    }

    /// Beam search at one level. Returns up to `ef` live nodes sorted by
    /// descending similarity (ties by ascending id). With a deletion mask,
    /// dead nodes are traversed but never returned.
    #[allow(clippy::too_many_arguments)]
    fn search_layer(
        &self,
        data: &DataMatrix,
        query: &[f64],
        entries: &[(f64, u32)],
        ef: usize,
        level: u32,
        deleted: Option<&[bool]>,
        visited: &mut Visited,
    ) -> Vec<(f64, u32)> {
        let is_live = |id: u32| deleted.map_or(true, |d| !d[id as usize]);
        let mut candidates: BinaryHeap<(OrdF64, Reverse<u32>)> = BinaryHeap::new();
        let mut results: BinaryHeap<Reverse<(OrdF64, Reverse<u32>)>> = BinaryHeap::new();

        for &(s, id) in entries {
            if visited.insert(id) {
                candidates.push((OrdF64(s), Reverse(id)));
                if is_live(id) {
                    results.push(Reverse((OrdF64(s), Reverse(id))));
                }
            }
        }

        while let Some((OrdF64(cs), Reverse(cid))) = candidates.pop() {
            let worst = if results.len() >= ef {
                results.peek().map(|Reverse((OrdF64(s), _))| *s).unwrap()
            } else {
                f64::NEG_INFINITY
            };
            if cs < worst {
                break;
            }
            for &nb in &self.links[cid as usize][level as usize] {
                if !visited.insert(nb) {
                    continue;
                }
                let s = Self::sim(data, query, nb);
                let worst = if results.len() >= ef {
                    results.peek().map(|Reverse((OrdF64(w), _))| *w).unwrap()
                } else {
                    f64::NEG_INFINITY
                };
                if s >= worst || results.len() < ef {
                    candidates.push((OrdF64(s), Reverse(nb)));
                    if is_live(nb) {
                        results.push(Reverse((OrdF64(s), Reverse(nb))));
                        if results.len() > ef {
                            results.pop();
                        }
                    }
                }
            }
        }

        let mut out: Vec<(f64, u32)> = results
            .into_iter()
            .map(|Reverse((OrdF64(s), Reverse(id)))| (s, id))
            .collect();
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Full query: descend from the top level, then beam-search level 0.
    pub fn search(
        &self,
        data: &DataMatrix,
        query: &[f64],
        k: usize,
        ef: usize,
        deleted: &[bool],
    ) -> Vec<(f64, u32)> {
        if self.links.is_empty() {
            return Vec::new();
        }
        let mut visited = Visited::new(self.links.len());
        let mut ep = (Self::sim(data, query, self.entry), self.entry);
        let mut lc = self.max_level;
        while lc > 0 {
            ep = self.greedy_step(data, query, ep, lc);
            lc -= 1;
        }
        let mut out = self.search_layer(
            data,
            query,
            &[ep],
            ef.max(k),
            0,
            Some(deleted),
            &mut visited,
        );
        out.truncate(k);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{znormalize, DataMatrix};
    use rand::Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
        znormalize(DataMatrix::from_values(n, d, vals).unwrap())
    }

    #[test]
    fn self_query_ranks_first() {
        let m = random_matrix(64, 12, 3);
        let h = Hnsw::build(&m, 8, 100, 42);
        let deleted = vec![false; 64];
        for i in [0usize, 17, 63] {
            let res = h.search(&m, m.row(i), 1, 32, &deleted);
            assert_eq!(res[0].1, i as u32);
            assert!((res[0].0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let m = random_matrix(128, 8, 9);
        let a = Hnsw::build(&m, 8, 64, 7);
        let b = Hnsw::build(&m, 8, 64, 7);
        let deleted = vec![false; 128];
        for i in 0..16 {
            let qa = a.search(&m, m.row(i), 5, 32, &deleted);
            let qb = b.search(&m, m.row(i), 5, 32, &deleted);
            assert_eq!(qa, qb);
        }
    }

    #[test]
    fn deleted_nodes_never_returned_but_still_route() {
        let m = random_matrix(100, 10, 5);
        let h = Hnsw::build(&m, 8, 100, 1);
        let mut deleted = vec![false; 100];
        // Kill most of the graph; the rest must still be reachable.
        for i in 0..90 {
            deleted[i] = true;
        }
        let res = h.search(&m, m.row(0), 10, 64, &deleted);
        assert!(!res.is_empty());
        for &(_, id) in &res {
            assert!(id >= 90, "returned deleted node {id}");
        }
    }
}
