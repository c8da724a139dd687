//! Synthetic data with known ground truth: the 1-factor Gaussian mixture,
//! random maximal-planar ground-truth graphs, and the GMRF sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::DataMatrix;
use crate::error::{Error, Result};
use crate::graph::EdgeList;

/// 1-factor mixture parameters: `K` non-overlapping clusters, one factor
/// path per cluster, per-cluster loading in (0, 1).
#[derive(Debug, Clone)]
pub struct FactorModelParams {
    pub n: usize,
    pub n_clusters: usize,
    pub loadings: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

impl FactorModelParams {
    /// One scalar loading applied to every cluster.
    pub fn uniform(n: usize, n_clusters: usize, loading: f64, n_samples: usize, seed: u64) -> Self {
        FactorModelParams {
            n,
            n_clusters,
            loadings: vec![loading; n_clusters],
            n_samples,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parameter("n must be positive".into()));
        }
        if self.n_clusters == 0 || self.n_clusters > self.n {
            return Err(Error::Parameter(format!(
                "need 1 <= K <= n, got K = {}, n = {}",
                self.n_clusters, self.n
            )));
        }
        if self.loadings.len() != self.n_clusters {
            return Err(Error::Parameter(format!(
                "expected {} loadings, got {}",
                self.n_clusters,
                self.loadings.len()
            )));
        }
        if self.loadings.iter().any(|&g| g <= 0.0 || g >= 1.0) {
            return Err(Error::Parameter("loadings must lie in (0, 1)".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::Parameter("need at least 2 samples per row".into()));
        }
        Ok(())
    }
}

/// GMRF parameters: ground-truth adjacency, spatial coupling `alpha`,
/// and the number of i.i.d. samples (matrix columns).
#[derive(Debug, Clone)]
pub struct GmrfParams {
    pub adjacency: EdgeList,
    pub alpha: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl GmrfParams {
    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!(
                "alpha must be finite and non-negative, got {}",
                self.alpha
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::Parameter("need at least 2 samples per row".into()));
        }
        if self.adjacency.n_nodes() == 0 {
            return Err(Error::Structure("adjacency has no nodes".into()));
        }
        Ok(())
    }

    /// True when `alpha` leaves the 2-hop suppression regime
    /// (coefficient alpha^2/4 exceeding 1).
    pub fn beyond_two_hop_regime(&self) -> bool {
        two_hop_coefficient(self.alpha) > 1.0
    }
}

/// The coefficient multiplying 2-hop terms in the GMRF covariance.
pub fn two_hop_coefficient(alpha: f64) -> f64 {
    alpha * alpha / 4.0
}

/// Generates the 1-factor mixture: row i in cluster s is
/// `g_s * eta_s + sqrt(1 - g_s^2) * eps_i`, with one standard-normal
/// factor path per cluster. Returns the raw matrix and contiguous block
/// labels of size `ceil(n / K)`.
pub fn gen_factor_model(p: &FactorModelParams) -> Result<(DataMatrix, Vec<u32>)> {
    p.validate()?;
    let (n, k, t) = (p.n, p.n_clusters, p.n_samples);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut factors = vec![0.0f64; k * t];
    for x in factors.iter_mut() {
        *x = rng.sample(StandardNormal);
    }

    let block = n.div_ceil(k);
    let mut values = vec![0.0f64; n * t];
    let mut labels = vec![0u32; n];
    for i in 0..n {
        let s = i / block;
        labels[i] = s as u32;
        let g = p.loadings[s];
        let noise_scale = (1.0 - g * g).sqrt();
        let eta = &factors[s * t..(s + 1) * t];
        let row = &mut values[i * t..(i + 1) * t];
        for (x, e) in row.iter_mut().zip(eta) {
            let eps: f64 = rng.sample(StandardNormal);
            *x = g * e + noise_scale * eps;
        }
    }
    Ok((DataMatrix::from_values(n, t, values)?, labels))
}

/// Random maximal planar ground truth: start from K4 and repeatedly
/// subdivide a uniformly random active face with the next node. Produces
/// `3n - 6` unit-weight edges over a connected graph.
pub fn gen_planar_ground_truth(n: usize, seed: u64) -> Result<EdgeList> {
    if n < 4 {
        return Err(Error::Size(format!(
            "planar ground truth needs at least 4 nodes, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = EdgeList::new(n);
    for i in 0..4u32 {
        for j in (i + 1)..4 {
            edges.add(i, j, 1.0)?;
        }
    }
    let mut faces: Vec<[u32; 3]> = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    for v in 4..n as u32 {
        let pick = rng.random_range(0..faces.len());
        let [a, b, c] = faces[pick];
        edges.add(v, a, 1.0)?;
        edges.add(v, b, 1.0)?;
        edges.add(v, c, 1.0)?;
        faces[pick] = [v, b, c];
        faces.push([a, v, c]);
        faces.push([a, b, v]);
    }
    Ok(edges)
}

/// Samples the GMRF: draws X as n x T standard normal and returns
/// `Y = (I + (alpha/2) A) X`, computed sparsely row by row. Columns of Y
/// are i.i.d. with covariance `I + alpha A + (alpha^2/4) A^2`.
pub fn gen_gmrf(p: &GmrfParams) -> Result<DataMatrix> {
    p.validate()?;
    let n = p.adjacency.n_nodes();
    let t = p.n_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut noise = vec![0.0f64; n * t];
    for x in noise.iter_mut() {
        *x = rng.sample(StandardNormal);
    }

    let adj = p.adjacency.adjacency();
    let half_alpha = p.alpha / 2.0;
    let mut values = vec![0.0f64; n * t];
    for i in 0..n {
        let out = &mut values[i * t..(i + 1) * t];
        out.copy_from_slice(&noise[i * t..(i + 1) * t]);
        for &j in &adj[i] {
            let src = &noise[j as usize * t..(j as usize + 1) * t];
            for (y, x) in out.iter_mut().zip(src) {
                *y += half_alpha * x;
            }
        }
    }
    DataMatrix::from_values(n, t, values)
}

/// Analytic GMRF covariance `I + alpha A + (alpha^2/4) A^2` as a dense
/// row-major n x n matrix.
pub fn gmrf_covariance_analytic(adjacency: &EdgeList, alpha: f64) -> Vec<f64> {
    let n = adjacency.n_nodes();
    let adj = adjacency.adjacency();
    let mut cov = vec![0.0f64; n * n];
    for i in 0..n {
        cov[i * n + i] = 1.0;
    }
    for &(u, v, _) in adjacency.edges() {
        cov[u as usize * n + v as usize] += alpha;
        cov[v as usize * n + u as usize] += alpha;
    }
    let c2 = alpha * alpha / 4.0;
    for i in 0..n {
        for &j in &adj[i] {
            // (A^2)_{i,l} sums over common neighbors; walk two steps.
            for &l in &adj[j as usize] {
                cov[i * n + l as usize] += c2;
            }
        }
    }
    cov
}
