//! Evaluation metrics: edge-set Jaccard similarity, weighted intra-cluster
//! average shortest path, and structural audits.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::EdgeList;

/// Seed of the intra-cluster pair sampler; fixed so repeated evaluations
/// of the same graph agree.
const PAIR_SAMPLE_SEED: u64 = 0x7061697273; // "pairs"

/// Node-to-cluster assignment with contiguous cluster ids from 0.
#[derive(Debug, Clone)]
pub struct Partition {
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

impl Partition {
    pub fn from_labels(labels: Vec<u32>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput("partition has no labels".into()));
        }
        let n_clusters = *labels.iter().max().unwrap() as usize + 1;
        let mut sizes = vec![0usize; n_clusters];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::Structure(
                "cluster ids must be contiguous from 0".into(),
            ));
        }
        Ok(Partition { labels, sizes })
    }

    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn members(&self, cluster: u32) -> Vec<u32> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l == cluster)
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Reads newline-delimited integer labels.
    pub fn read_labels(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut labels = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            labels.push(line.parse::<u32>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("{line:?} is not an unsigned integer"),
            })?);
        }
        Partition::from_labels(labels)
    }

    pub fn write_labels(&self, path: &std::path::Path) -> Result<()> {
        let mut text = String::new();
        for l in &self.labels {
            text.push_str(&l.to_string());
            text.push('\n');
        }
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Jaccard similarity of two unweighted edge sets. Two empty sets count
/// as identical (1.0).
pub fn jaccard(e1: &EdgeList, e2: &EdgeList) -> f64 {
    let (a, b) = (e1.edge_set(), e2.edge_set());
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    intersection as f64 / union as f64
}

/// Per-cluster path statistic.
#[derive(Debug, Clone, Serialize)]
pub struct ClusterPath {
    pub cluster: u32,
    pub size: usize,
    pub mean_path: f64,
    pub sampled: bool,
}

/// Result of [`weighted_intra_cluster_path`]: the size-weighted mean of
/// per-cluster average shortest paths, plus the per-cluster values and
/// any singleton clusters that were skipped.
#[derive(Debug, Clone, Serialize)]
pub struct PathMetrics {
    pub l_weighted: f64,
    pub per_cluster: Vec<ClusterPath>,
    pub skipped_singletons: Vec<u32>,
}

/// Average hop distance between intra-cluster node pairs, aggregated as
/// `sum_k w_k L(C_k)` with `w_k` proportional to cluster size. Distances
/// are measured on the full graph unless `induced` restricts BFS to
/// intra-cluster edges. Clusters whose ordered pair count exceeds
/// `max_pairs_per_cluster` are estimated from a seeded uniform sample.
pub fn weighted_intra_cluster_path(
    edges: &EdgeList,
    partition: &Partition,
    max_pairs_per_cluster: usize,
    induced: bool,
) -> Result<PathMetrics> {
    if partition.n_nodes() != edges.n_nodes() {
        return Err(Error::Inconsistent(format!(
            "partition covers {} nodes, graph has {}",
            partition.n_nodes(),
            edges.n_nodes()
        )));
    }
    if max_pairs_per_cluster == 0 {
        return Err(Error::Parameter("max_pairs_per_cluster must be positive".into()));
    }
    let adj = edges.adjacency();
    let labels = partition.labels();
    let mut per_cluster = Vec::new();
    let mut skipped = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(PAIR_SAMPLE_SEED);

    for cluster in 0..partition.n_clusters() as u32 {
        let members = partition.members(cluster);
        let s = members.len();
        if s < 2 {
            skipped.push(cluster);
            continue;
        }
        let ordered_pairs = s * (s - 1);
        let (total, count, sampled) = if ordered_pairs <= max_pairs_per_cluster {
            let mut total = 0.0f64;
            for &src in &members {
                let dist = bfs(&adj, src, labels, induced.then_some(cluster));
                for &dst in &members {
                    if dst == src {
                        continue;
                    }
                    match dist[dst as usize] {
                        Some(d) => total += d as f64,
                        None => {
                            return Err(Error::Inconsistent(format!(
                                "nodes {src} and {dst} are mutually unreachable"
                            )))
                        }
                    }
                }
            }
            (total, ordered_pairs, false)
        } else {
            // Uniform ordered-pair sample with replacement, grouped by
            // source so each distinct source runs one BFS.
            let mut pairs: Vec<(u32, u32)> = (0..max_pairs_per_cluster)
                .map(|_| {
                    let i = rng.random_range(0..s);
                    let mut j = rng.random_range(0..s - 1);
                    if j >= i {
                        j += 1;
                    }
                    (members[i], members[j])
                })
                .collect();
            pairs.sort_unstable();
            let mut total = 0.0f64;
            let mut cached_src = u32::MAX;
            let mut dist: Vec<Option<u32>> = Vec::new();
            for (src, dst) in pairs {
                if src != cached_src {
                    dist = bfs(&adj, src, labels, induced.then_some(cluster));
                    cached_src = src;
                }
                match dist[dst as usize] {
                    Some(d) => total += d as f64,
                    None => {
                        return Err(Error::Inconsistent(format!(
                            "nodes {src} and {dst} are mutually unreachable"
                        )))
                    }
                }
            }
            (total, max_pairs_per_cluster, true)
        };
        per_cluster.push(ClusterPath {
            cluster,
            size: s,
            mean_path: total / count as f64,
            sampled,
        });
    }

    if per_cluster.is_empty() {
        return Err(Error::Parameter(
            "no cluster with at least 2 nodes".into(),
        ));
    }
    let weight_total: usize = per_cluster.iter().map(|c| c.size).sum();
    let l_weighted = per_cluster
        .iter()
        .map(|c| c.size as f64 / weight_total as f64 * c.mean_path)
        .sum();
    Ok(PathMetrics {
        l_weighted,
        per_cluster,
        skipped_singletons: skipped,
    })
}

fn bfs(adj: &[Vec<u32>], src: u32, labels: &[u32], within: Option<u32>) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    dist[src as usize] = Some(0);
    let mut queue = VecDeque::new();
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize].unwrap();
        for &v in &adj[u as usize] {
            if let Some(c) = within {
                if labels[v as usize] != c {
                    continue;
                }
            }
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Structural audit of an arbitrary edge list.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub n_nodes: usize,
    pub edges: usize,
    pub expected_tmfg_edges: usize,
    pub edge_count_is_3n_minus_6: bool,
    pub components: usize,
    pub min_degree: usize,
    pub max_degree: usize,
    pub degree_histogram: Vec<(usize, usize)>,
}

pub fn graph_audit(edges: &EdgeList) -> AuditReport {
    let n = edges.n_nodes();
    let adj = edges.adjacency();
    let degrees: Vec<usize> = adj.iter().map(|l| l.len()).collect();
    let mut histogram = std::collections::BTreeMap::new();
    for &d in &degrees {
        *histogram.entry(d).or_insert(0usize) += 1;
    }
    let expected = if n >= 4 { 3 * n - 6 } else { 0 };
    AuditReport {
        n_nodes: n,
        edges: edges.len(),
        expected_tmfg_edges: expected,
        edge_count_is_3n_minus_6: n >= 4 && edges.len() == expected,
        components: edges.component_count(),
        min_degree: degrees.iter().copied().min().unwrap_or(0),
        max_degree: degrees.iter().copied().max().unwrap_or(0),
        degree_histogram: histogram.into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_list(n: usize, pairs: &[(u32, u32)]) -> EdgeList {
        let mut e = EdgeList::new(n);
        for &(u, v) in pairs {
            e.add(u, v, 1.0).unwrap();
        }
        e
    }

    #[test]
    fn jaccard_basics() {
        let a = edge_list(5, &[(1, 2), (2, 3)]);
        let b = edge_list(5, &[(2, 3), (3, 4)]);
        assert!((jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(jaccard(&a, &a), 1.0);
        let disjoint = edge_list(5, &[(0, 4)]);
        assert_eq!(jaccard(&a, &disjoint), 0.0);
        let empty = EdgeList::new(5);
        assert_eq!(jaccard(&empty, &empty), 1.0);
    }

    #[test]
    fn path_metric_k4() {
        let k4 = edge_list(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let p = Partition::from_labels(vec![0, 0, 0, 0]).unwrap();
        let m = weighted_intra_cluster_path(&k4, &p, 10_000, false).unwrap();
        assert!((m.l_weighted - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_metric_three_node_path() {
        // Path 0-1-2: ordered-pair distances sum to 8 over 6 pairs.
        let g = edge_list(3, &[(0, 1), (1, 2)]);
        let p = Partition::from_labels(vec![0, 0, 0]).unwrap();
        let m = weighted_intra_cluster_path(&g, &p, 10_000, false).unwrap();
        assert!((m.l_weighted - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn path_metric_skips_singletons_and_renormalizes() {
        let g = edge_list(4, &[(0, 1), (1, 2), (2, 3)]);
        let p = Partition::from_labels(vec![0, 0, 0, 1]).unwrap();
        let m = weighted_intra_cluster_path(&g, &p, 10_000, false).unwrap();
        assert_eq!(m.skipped_singletons, vec![1]);
        assert_eq!(m.per_cluster.len(), 1);
        // Weight renormalizes to the lone surviving cluster.
        assert!((m.l_weighted - m.per_cluster[0].mean_path).abs() < 1e-12);
    }

    #[test]
    fn path_metric_unreachable_pair_errors() {
        let g = edge_list(4, &[(0, 1), (2, 3)]);
        let p = Partition::from_labels(vec![0, 0, 0, 0]).unwrap();
        assert!(matches!(
            weighted_intra_cluster_path(&g, &p, 10_000, false),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn path_metric_sampling_agrees_on_small_clusters() {
        // 12-node ring, one cluster: sampling threshold above the pair
        // count gives the exact value; a tight threshold still lands close.
        let pairs: Vec<(u32, u32)> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
        let g = edge_list(12, &pairs);
        let p = Partition::from_labels(vec![0; 12]).unwrap();
        let exact = weighted_intra_cluster_path(&g, &p, 1000, false).unwrap();
        assert!(!exact.per_cluster[0].sampled);
        let sampled = weighted_intra_cluster_path(&g, &p, 100, false).unwrap();
        assert!(sampled.per_cluster[0].sampled);
        assert!((sampled.l_weighted - exact.l_weighted).abs() < 0.6);
    }

    #[test]
    fn induced_mode_restricts_paths() {
        // Square 0-2-1-3: every intra-cluster pair is bridged only by the
        // other cluster, so the full graph gives distance 2 while the
        // induced subgraphs are disconnected.
        let g = edge_list(4, &[(0, 2), (1, 2), (1, 3), (0, 3)]);
        let p = Partition::from_labels(vec![0, 0, 1, 1]).unwrap();
        let full = weighted_intra_cluster_path(&g, &p, 100, false).unwrap();
        assert!((full.l_weighted - 2.0).abs() < 1e-12);
        assert!(matches!(
            weighted_intra_cluster_path(&g, &p, 100, true),
            Err(Error::Inconsistent(_))
        ));
    }

    #[test]
    fn audit_reports() {
        let k4 = edge_list(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let a = graph_audit(&k4);
        assert_eq!(a.edges, 6);
        assert_eq!(a.components, 1);
        assert_eq!(a.min_degree, 3);
        assert!(a.edge_count_is_3n_minus_6);

        let empty = EdgeList::new(5);
        let a = graph_audit(&empty);
        assert_eq!(a.components, 5);
        assert_eq!(a.max_degree, 0);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::from_labels(vec![0, 2]).is_err()); // gap at 1
        let p = Partition::from_labels(vec![1, 0, 1]).unwrap();
        assert_eq!(p.n_clusters(), 2);
        assert_eq!(p.cluster_sizes(), &[1, 2]);
        assert_eq!(p.members(1), vec![0, 2]);
    }
}
