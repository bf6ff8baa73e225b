//! Structural factors of communities: edges inside (EIC), edges out (EOC),
//! the Jensen-Shannon / log-sigmoid abstract distance between communities,
//! and the gravity index computed over the resulting community network.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{CommunityError, Partition};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error("community c{0} has no internal edges; its degree distribution is undefined")]
    DegenerateDistribution(usize),
    #[error("probability sets must share a length and cover at least one node")]
    InvalidProbabilitySets,
    #[error("fitting parameter must be finite and non-negative, got {0}")]
    InvalidPhi(f64),
    #[error("JSD must be finite and non-negative, got {0}")]
    InvalidDivergence(f64),
    #[error("gravity index needs at least two communities, found {0}")]
    TooFewCommunities(usize),
    #[error("invalid community network matrix: {0}")]
    InvalidMatrix(String),
}

/// Number of edges with both endpoints in community `ci`.
pub fn eic(g: &Graph, p: &Partition, ci: usize) -> Result<usize, MetricsError> {
    p.members(ci)?;
    Ok(g.edges()
        .iter()
        .filter(|&&(u, v)| p.community_of(u) == ci && p.community_of(v) == ci)
        .count())
}

/// Number of edges with exactly one endpoint in community `ci`.
pub fn eoc(g: &Graph, p: &Partition, ci: usize) -> Result<usize, MetricsError> {
    p.members(ci)?;
    Ok(g.edges()
        .iter()
        .filter(|&&(u, v)| (p.community_of(u) == ci) != (p.community_of(v) == ci))
        .count())
}

/// EIC and EOC for every community in one pass over the edges.
pub fn edge_factors(g: &Graph, p: &Partition) -> (Vec<usize>, Vec<usize>) {
    let mut inside = vec![0; p.count()];
    let mut outside = vec![0; p.count()];
    for &(u, v) in g.edges() {
        let (cu, cv) = (p.community_of(u), p.community_of(v));
        if cu == cv {
            inside[cu] += 1;
        } else {
            outside[cu] += 1;
            outside[cv] += 1;
        }
    }
    (inside, outside)
}

/// Which node degree feeds a community's probability set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    /// Degree inside the subgraph induced by the community.
    #[default]
    Intra,
    /// Degree in the whole graph.
    Full,
}

fn node_weight(g: &Graph, p: &Partition, ci: usize, v: usize, mode: DegreeMode) -> usize {
    match mode {
        DegreeMode::Intra => g
            .neighbors(v)
            .iter()
            .filter(|&&u| p.community_of(u) == ci)
            .count(),
        DegreeMode::Full => g.degree_of(v),
    }
}

/// Descending, zero-padded degree distribution of one community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilitySet {
    pub community: usize,
    /// Number of member nodes, `|N_ci|`.
    pub size: usize,
    /// Length `kappa` (largest community size), non-increasing.
    pub values: Vec<f64>,
}

pub fn probability_set(
    g: &Graph,
    p: &Partition,
    ci: usize,
    mode: DegreeMode,
) -> Result<ProbabilitySet, MetricsError> {
    let members = p.members(ci)?;
    let kappa = p.communities().iter().map(Vec::len).max().unwrap_or(0);
    let weights: Vec<usize> = members
        .iter()
        .map(|&v| node_weight(g, p, ci, v, mode))
        .collect();
    let total: usize = weights.iter().sum();
    if total == 0 {
        return Err(MetricsError::DegenerateDistribution(ci + 1));
    }
    let mut values: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
    values.resize(kappa, 0.0);
    values.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(ProbabilitySet {
        community: ci,
        size: members.len(),
        values,
    })
}

fn xlogx_ratio(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / y).ln()
    }
}

/// Jensen-Shannon divergence between two probability sets, summed only over
/// the first `min(|N_ci|, |N_cj|)` positions.
pub fn jsd(pi: &ProbabilitySet, pj: &ProbabilitySet) -> Result<f64, MetricsError> {
    let span = pi.size.min(pj.size);
    if span == 0 || pi.values.len() != pj.values.len() || span > pi.values.len() {
        return Err(MetricsError::InvalidProbabilitySets);
    }
    let sum: f64 = pi.values[..span]
        .iter()
        .zip(&pj.values[..span])
        .map(|(&a, &b)| {
            let mid = 0.5 * (a + b);
            // symmetric in (a, b) term by term
            xlogx_ratio(a, mid) + xlogx_ratio(b, mid)
        })
        .sum();
    Ok(0.5 * sum)
}

/// Log-sigmoid transform `1 / (1 + exp(-phi * mu))`.
pub fn abstract_distance(mu: f64, phi: f64) -> Result<f64, MetricsError> {
    if !(phi.is_finite() && phi >= 0.0) {
        return Err(MetricsError::InvalidPhi(phi));
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(MetricsError::InvalidDivergence(mu));
    }
    Ok(1.0 / (1.0 + (-phi * mu).exp()))
}

/// Complete weighted graph over communities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityNetwork {
    size: usize,
    /// Row-major `size x size` abstract distances, zero diagonal.
    distance: Vec<f64>,
    /// Row-major JSD matrix, zero diagonal.
    divergence: Vec<f64>,
    pub phi: f64,
}

impl CommunityNetwork {
    /// Wraps a precomputed distance matrix. The divergence matrix is
    /// recovered by inverting the sigmoid when `phi > 0`, otherwise zero.
    pub fn from_distances(distance: Vec<Vec<f64>>, phi: f64) -> Result<Self, MetricsError> {
        let size = distance.len();
        if distance.iter().any(|r| r.len() != size) {
            return Err(MetricsError::InvalidMatrix("matrix is not square".into()));
        }
        for i in 0..size {
            if distance[i][i] != 0.0 {
                return Err(MetricsError::InvalidMatrix(format!(
                    "nonzero diagonal at {i}"
                )));
            }
            for j in 0..size {
                let d = distance[i][j];
                if d != distance[j][i] {
                    return Err(MetricsError::InvalidMatrix(format!(
                        "asymmetric at ({i}, {j})"
                    )));
                }
                if i != j && !(d.is_finite() && d > 0.0) {
                    return Err(MetricsError::InvalidMatrix(format!(
                        "distance at ({i}, {j}) must be positive, got {d}"
                    )));
                }
            }
        }
        let divergence = distance
            .iter()
            .flatten()
            .map(|&d| {
                if d == 0.0 || phi == 0.0 || d >= 1.0 {
                    0.0
                } else {
                    (d / (1.0 - d)).ln() / phi
                }
            })
            .collect();
        Ok(CommunityNetwork {
            size,
            distance: distance.into_iter().flatten().collect(),
            divergence,
            phi,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance[i * self.size + j]
    }

    pub fn divergence(&self, i: usize, j: usize) -> f64 {
        self.divergence[i * self.size + j]
    }

    pub fn distance_rows(&self) -> Vec<Vec<f64>> {
        self.distance
            .chunks(self.size.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn divergence_rows(&self) -> Vec<Vec<f64>> {
        self.divergence
            .chunks(self.size.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }
}

/// Builds the community network at fitting parameter `phi`.
pub fn community_network(
    g: &Graph,
    p: &Partition,
    phi: f64,
    mode: DegreeMode,
) -> Result<CommunityNetwork, MetricsError> {
    if !(phi.is_finite() && phi >= 0.0) {
        return Err(MetricsError::InvalidPhi(phi));
    }
    let k = p.count();
    if k < 2 {
        return Err(MetricsError::TooFewCommunities(k));
    }
    let sets = (0..k)
        .map(|ci| probability_set(g, p, ci, mode))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mu = jsd(&sets[i], &sets[j])?;
            Ok((mu, abstract_distance(mu, phi)?))
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    let mut distance = vec![0.0; k * k];
    let mut divergence = vec![0.0; k * k];
    for (&(i, j), &(mu, ad)) in pairs.iter().zip(&values) {
        divergence[i * k + j] = mu;
        divergence[j * k + i] = mu;
        distance[i * k + j] = ad;
        distance[j * k + i] = ad;
    }
    Ok(CommunityNetwork {
        size: k,
        distance,
        divergence,
        phi,
    })
}

/// Gravity index `sum_{j != i} |N_i| |N_j| / d_ij^2`.
pub fn gravity_index(p: &Partition, cn: &CommunityNetwork, ci: usize) -> Result<f64, MetricsError> {
    let k = p.count();
    if k < 2 {
        return Err(MetricsError::TooFewCommunities(k));
    }
    if cn.size() != k {
        return Err(MetricsError::InvalidMatrix(format!(
            "network has {} communities, partition has {k}",
            cn.size()
        )));
    }
    let own = p.members(ci)?.len() as f64;
    let sizes = p.sizes();
    Ok((0..k)
        .filter(|&j| j != ci)
        .map(|j| {
            let d = cn.distance(ci, j);
            own * sizes[j] as f64 / (d * d)
        })
        .sum())
}

pub fn gravity_indices(p: &Partition, cn: &CommunityNetwork) -> Result<Vec<f64>, MetricsError> {
    (0..p.count()).map(|ci| gravity_index(p, cn, ci)).collect()
}
