//! Nearest-neighbor index over matrix rows with soft deletion, plus the
//! static sparse kNN graph exported from it.
//!
//! Similarity is the scaled inner product `dot(q, row)/D`, which equals
//! Pearson correlation on normalized rows — the same quantity the graph
//! builders use as edge weight. Small inputs fall back to an exact scan
//! so tests and small runs are oracle-precise.

mod hnsw;

use hnsw::Hnsw;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};

/// Index construction parameters. `ef_search = None` resolves per query
/// to `max(64, 2k)`; an explicit value is still clamped to at least `k`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct IndexParams {
    pub max_degree: usize,
    pub ef_construction: usize,
    pub ef_search: Option<usize>,
    pub exact_fallback_threshold: usize,
    pub rng_seed: u64,
}

impl Default for IndexParams {
    fn default() -> Self {
        IndexParams {
            max_degree: 16,
            ef_construction: 200,
            ef_search: None,
            exact_fallback_threshold: 2048,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexMode {
    Exact,
    Approximate,
}

/// Nearest-neighbor index over the rows of a normalized matrix.
pub struct AnnIndex<'a> {
    data: &'a DataMatrix,
    mode: IndexMode,
    params: IndexParams,
    deleted: Vec<bool>,
    n_deleted: usize,
    graph: Option<Hnsw>,
}

/// Static sparse kNN graph in compressed sparse row layout. Neighbor
/// lists are sorted by descending weight, ties by ascending id.
#[derive(Debug, Clone)]
pub struct SparseKnnGraph {
    k: usize,
    n: usize,
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

impl SparseKnnGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn total_entries(&self) -> usize {
        self.entries.len()
    }
}

/// Builds the index over all rows. Mode is exact when
/// `N <= exact_fallback_threshold`, approximate (HNSW) otherwise.
pub fn build_index<'a>(m: &'a DataMatrix, params: IndexParams) -> Result<AnnIndex<'a>> {
    if m.n_rows() == 0 {
        return Err(Error::EmptyInput("cannot index an empty matrix".into()));
    }
    if !m.is_normalized() {
        return Err(Error::Parameter("index requires a normalized matrix".into()));
    }
    if params.max_degree < 2 {
        return Err(Error::Parameter(format!(
            "max_degree must be at least 2, got {}",
            params.max_degree
        )));
    }
    let n = m.n_rows();
    let mode = if n <= params.exact_fallback_threshold {
        IndexMode::Exact
    } else {
        IndexMode::Approximate
    };
    let graph = match mode {
        IndexMode::Exact => None,
        IndexMode::Approximate => Some(Hnsw::build(
            m,
            params.max_degree,
            params.ef_construction,
            params.rng_seed,
        )),
    };
    Ok(AnnIndex {
        data: m,
        mode,
        params,
        deleted: vec![false; n],
        n_deleted: 0,
        graph,
    })
}

impl<'a> AnnIndex<'a> {
    pub fn mode(&self) -> IndexMode {
        self.mode
    }

    pub fn n_rows(&self) -> usize {
        self.data.n_rows()
    }

    pub fn live_count(&self) -> usize {
        self.data.n_rows() - self.n_deleted
    }

    pub fn is_deleted(&self, id: u32) -> bool {
        self.deleted[id as usize]
    }

    fn effective_ef(&self, k: usize) -> usize {
        self.params.ef_search.unwrap_or(64.max(2 * k)).max(k)
    }

    /// Top-k live rows by `dot(vector, row)/D`, descending, ties by
    /// ascending id. Exact mode scans everything; approximate mode is
    /// best-effort under `ef_search`.
    pub fn query(&self, vector: &[f64], k: usize) -> Result<Vec<(u32, f64)>> {
        if k == 0 {
            return Err(Error::Parameter("query requires k >= 1".into()));
        }
        if vector.len() != self.data.n_cols() {
            return Err(Error::Dimension(format!(
                "query vector has length {}, index dimensionality is {}",
                vector.len(),
                self.data.n_cols()
            )));
        }
        if self.n_deleted == self.data.n_rows() {
            return Ok(Vec::new());
        }
        match self.mode {
            IndexMode::Exact => Ok(self.exact_scan(vector, k)),
            IndexMode::Approximate => {
                let ef = self.effective_ef(k);
                let hits =
                    self.graph
                        .as_ref()
                        .unwrap()
                        .search(self.data, vector, k, ef, &self.deleted);
                Ok(hits.into_iter().map(|(s, id)| (id, s)).collect())
            }
        }
    }

    /// Queries each vector in order; result order matches input order.
    pub fn batch_query(&self, vectors: &[Vec<f64>], k: usize) -> Result<Vec<Vec<(u32, f64)>>> {
        vectors.iter().map(|v| self.query(v, k)).collect()
    }

    /// Excludes `id` from all subsequent query results. Idempotent.
    pub fn mark_deleted(&mut self, id: u32) -> Result<()> {
        let i = id as usize;
        if i >= self.data.n_rows() {
            return Err(Error::Bounds {
                index: i,
                len: self.data.n_rows(),
            });
        }
        if !self.deleted[i] {
            self.deleted[i] = true;
            self.n_deleted += 1;
        }
        Ok(())
    }

    fn exact_scan(&self, vector: &[f64], k: usize) -> Vec<(u32, f64)> {
        let d = self.data.n_cols() as f64;
        let mut scored: Vec<(u32, f64)> = (0..self.data.n_rows())
            .filter(|&i| !self.deleted[i])
            .map(|i| {
                (
                    i as u32,
                    crate::dataset::dot(vector, self.data.row(i)) / d,
                )
            })
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }

    /// Exports the static kNN graph `G`: neighbor list of node i is its
    /// top-k query result excluding i itself, weights are correlations.
    /// Must be called before any deletion; `k` cannot reach N.
    pub fn export_knn_graph(&self, k: usize) -> Result<SparseKnnGraph> {
        let n = self.data.n_rows();
        if self.n_deleted > 0 {
            return Err(Error::Parameter(
                "kNN graph must be exported before any deletion".into(),
            ));
        }
        if k == 0 {
            return Err(Error::Parameter("kNN graph requires k >= 1".into()));
        }
        if k >= n {
            return Err(Error::Size(format!(
                "neighborhood k = {k} cannot reach n = {n} (max n-1)"
            )));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries = Vec::with_capacity(n * k);
        offsets.push(0);
        let lists: Vec<Vec<(u32, f64)>> = {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let hits = self
                        .query(self.data.row(i), k + 1)
                        .expect("row query cannot fail");
                    hits.into_iter()
                        .filter(|&(id, _)| id as usize != i)
                        .take(k)
                        .collect()
                })
                .collect()
        };
        for list in lists {
            entries.extend(list);
            offsets.push(entries.len());
        }
        Ok(SparseKnnGraph {
            k,
            n,
            offsets,
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::znormalize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
        znormalize(DataMatrix::from_values(n, d, vals).unwrap())
    }

    /// Brute-force top-k oracle, independent of the index code path.
    fn brute_force_top_k(
        m: &DataMatrix,
        vector: &[f64],
        k: usize,
        deleted: &[bool],
    ) -> Vec<(u32, f64)> {
        let d = m.n_cols() as f64;
        let mut scored: Vec<(u32, f64)> = (0..m.n_rows())
            .filter(|&i| !deleted[i])
            .map(|i| (i as u32, crate::dataset::dot(vector, m.row(i)) / d))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored.truncate(k);
        scored
    }

    #[test]
    fn small_n_forces_exact_mode() {
        let m = random_matrix(10, 6, 1);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        assert_eq!(idx.mode(), IndexMode::Exact);
    }

    #[test]
    fn self_match_first() {
        let m = random_matrix(10, 6, 2);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let res = idx.query(m.row(4), 1).unwrap();
        assert_eq!(res[0].0, 4);
        assert!((res[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_query_matches_brute_force_with_ties() {
        let m = random_matrix(5, 4, 3);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let res = idx.query(m.row(3), 2).unwrap();
        let expected = brute_force_top_k(&m, m.row(3), 2, &[false; 5]);
        assert_eq!(res, expected);
        assert_eq!(res[0].0, 3);
    }

    #[test]
    fn exact_mode_equals_full_scan_oracle() {
        let m = random_matrix(200, 8, 4);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        for q in 0..20 {
            let res = idx.query(m.row(q), 7).unwrap();
            let expected = brute_force_top_k(&m, m.row(q), 7, &vec![false; 200]);
            assert_eq!(res, expected);
        }
    }

    #[test]
    fn deletion_excluded_and_idempotent() {
        let m = random_matrix(30, 6, 5);
        let mut idx = build_index(&m, IndexParams::default()).unwrap();
        let before = idx.query(m.row(0), 3).unwrap();
        let top = before[0].0;
        idx.mark_deleted(top).unwrap();
        idx.mark_deleted(top).unwrap();
        assert_eq!(idx.live_count(), 29);
        let after = idx.query(m.row(0), 3).unwrap();
        assert!(after.iter().all(|&(id, _)| id != top));
        // Former rank 2 becomes rank 1.
        assert_eq!(after[0].0, before[1].0);
        let mut deleted = vec![false; 30];
        deleted[top as usize] = true;
        assert_eq!(after, brute_force_top_k(&m, m.row(0), 3, &deleted));
    }

    #[test]
    fn delete_out_of_range_is_bounds_error() {
        let m = random_matrix(4, 4, 6);
        let mut idx = build_index(&m, IndexParams::default()).unwrap();
        assert!(matches!(idx.mark_deleted(4), Err(Error::Bounds { .. })));
    }

    #[test]
    fn all_deleted_returns_empty() {
        let m = random_matrix(5, 4, 7);
        let mut idx = build_index(&m, IndexParams::default()).unwrap();
        for i in 0..5 {
            idx.mark_deleted(i).unwrap();
        }
        assert!(idx.query(m.row(0), 3).unwrap().is_empty());
    }

    #[test]
    fn k_saturates_at_live_count() {
        let m = random_matrix(5, 4, 8);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let res = idx.query(m.row(0), 50).unwrap();
        assert_eq!(res.len(), 5);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let m = random_matrix(5, 4, 9);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        assert!(matches!(
            idx.query(&[0.0; 7], 2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn batch_query_elementwise() {
        let m = random_matrix(40, 6, 10);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let vectors: Vec<Vec<f64>> = (0..6).map(|i| m.row(i).to_vec()).collect();
        let batch = idx.batch_query(&vectors, 4).unwrap();
        assert_eq!(batch.len(), 6);
        for (i, v) in vectors.iter().enumerate() {
            assert_eq!(batch[i], idx.query(v, 4).unwrap());
        }
        assert!(idx.batch_query(&[], 4).unwrap().is_empty());
        // Two identical vectors give two identical result lists.
        let twin = idx
            .batch_query(&[vectors[0].clone(), vectors[0].clone()], 4)
            .unwrap();
        assert_eq!(twin[0], twin[1]);
    }

    #[test]
    fn knn_graph_matches_brute_force() {
        let m = random_matrix(50, 8, 11);
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let g = idx.export_knn_graph(5).unwrap();
        assert_eq!(g.k(), 5);
        assert!(g.total_entries() <= 50 * 5);
        for i in 0..50 {
            let list = g.neighbors(i);
            assert_eq!(list.len(), 5);
            let expected: Vec<(u32, f64)> = brute_force_top_k(&m, m.row(i), 6, &vec![false; 50])
                .into_iter()
                .filter(|&(id, _)| id as usize != i)
                .take(5)
                .collect();
            assert_eq!(list, expected.as_slice());
            // No self-loops, sorted descending.
            assert!(list.iter().all(|&(id, _)| id as usize != i));
            assert!(list.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }

    #[test]
    fn knn_graph_identical_rows_weight_one() {
        let mut vals = vec![1.0, 2.0, 3.0, 4.0];
        vals.extend_from_slice(&[1.0, 2.0, 3.0, 4.0]); // row 1 identical to row 0
        vals.extend_from_slice(&[4.0, 1.0, -2.0, 0.5]);
        let m = znormalize(DataMatrix::from_values(3, 4, vals).unwrap());
        let idx = build_index(&m, IndexParams::default()).unwrap();
        let g = idx.export_knn_graph(1).unwrap();
        assert_eq!(g.neighbors(0)[0].0, 1);
        assert!((g.neighbors(0)[0].1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn knn_graph_guards() {
        let m = random_matrix(6, 4, 12);
        let mut idx = build_index(&m, IndexParams::default()).unwrap();
        assert!(matches!(idx.export_knn_graph(6), Err(Error::Size(_))));
        idx.mark_deleted(0).unwrap();
        assert!(matches!(idx.export_knn_graph(2), Err(Error::Parameter(_))));
    }

    #[test]
    fn approximate_mode_recall_against_brute_force() {
        // GMRF-like smooth data; force approximate mode via a zero threshold.
        let m = random_matrix(500, 24, 13);
        let params = IndexParams {
            exact_fallback_threshold: 0,
            rng_seed: 99,
            ..IndexParams::default()
        };
        let idx = build_index(&m, params).unwrap();
        assert_eq!(idx.mode(), IndexMode::Approximate);
        let mut total_hits = 0usize;
        let queries = 50;
        for q in 0..queries {
            let res = idx.query(m.row(q * 7 % 500), 10).unwrap();
            let truth = brute_force_top_k(&m, m.row(q * 7 % 500), 10, &vec![false; 500]);
            let truth_ids: std::collections::HashSet<u32> =
                truth.iter().map(|&(id, _)| id).collect();
            total_hits += res.iter().filter(|&&(id, _)| truth_ids.contains(&id)).count();
        }
        let recall = total_hits as f64 / (queries * 10) as f64;
        assert!(recall >= 0.95, "recall@10 = {recall}");
    }

    #[test]
    fn approximate_deletion_safety() {
        let m = random_matrix(300, 12, 14);
        let params = IndexParams {
            exact_fallback_threshold: 0,
            rng_seed: 5,
            ..IndexParams::default()
        };
        let mut idx = build_index(&m, params).unwrap();
        for id in 0..150u32 {
            idx.mark_deleted(id).unwrap();
        }
        for q in 0..30 {
            let res = idx.query(m.row(q), 8).unwrap();
            assert!(res.iter().all(|&(id, _)| id >= 150));
        }
    }

    #[test]
    fn determinism_across_builds() {
        let m = random_matrix(400, 10, 15);
        let params = IndexParams {
            exact_fallback_threshold: 0,
            rng_seed: 123,
            ..IndexParams::default()
        };
        let a = build_index(&m, params.clone()).unwrap();
        let b = build_index(&m, params).unwrap();
        for q in 0..24 {
            assert_eq!(a.query(m.row(q), 6).unwrap(), b.query(m.row(q), 6).unwrap());
        }
    }
}
