//! End-to-end evaluation: detection, factors, community network, gravity,
//! vulnerability and ranking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{detect_communities, CommunityError, DetectionTrace, Partition};
use crate::graph::Graph;
use crate::metrics::{self, CommunityNetwork, DegreeMode, MetricsError};
use crate::sensitivity::{self, SensitivityError, SobolConfig, SobolResult};
use crate::vulnerability::{self, FuzzyRanking, NormalizedFactors, VulnerabilityError, Weights};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("detection: {0}")]
    Detection(#[from] CommunityError),
    #[error("community network: {0}")]
    Network(MetricsError),
    #[error("gravity: {0}")]
    Gravity(MetricsError),
    #[error("vulnerability: {0}")]
    Vulnerability(VulnerabilityError),
    #[error("ranking: {0}")]
    Ranking(VulnerabilityError),
    #[error("sensitivity: {0}")]
    Sensitivity(#[from] SensitivityError),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Detection(_) => "detection",
            PipelineError::Network(_) => "community network",
            PipelineError::Gravity(_) => "gravity",
            PipelineError::Vulnerability(_) => "vulnerability",
            PipelineError::Ranking(_) => "ranking",
            PipelineError::Sensitivity(_) => "sensitivity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluateOptions {
    pub phi: f64,
    pub weights: Weights,
    pub degree_mode: DegreeMode,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            phi: 3.0,
            weights: Weights::default(),
            degree_mode: DegreeMode::Intra,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityReport {
    pub id: String,
    pub members: Vec<String>,
    pub size: usize,
    pub eta_raw: f64,
    pub sigma_raw: f64,
    pub gamma_raw: f64,
    pub eta: f64,
    pub sigma: f64,
    pub gamma: f64,
    #[serde(with = "crate::serde_inf")]
    pub zeta: f64,
    #[serde(with = "crate::serde_inf")]
    pub xi: f64,
    /// 1 = most vulnerable.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VulnerabilityReport {
    pub phi: f64,
    pub weights: Weights,
    pub degree_mode: DegreeMode,
    pub modularity: f64,
    pub communities: Vec<CommunityReport>,
    pub ranking: FuzzyRanking,
    /// Ranking chain with ASCII relation tokens.
    pub chain: String,
}

/// Everything computed on the way to a report.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub trace: DetectionTrace,
    pub network: CommunityNetwork,
    pub factors: NormalizedFactors,
    pub report: VulnerabilityReport,
}

/// Factors and network for a fixed partition.
pub fn factors(
    g: &Graph,
    p: &Partition,
    opts: &EvaluateOptions,
) -> Result<(CommunityNetwork, NormalizedFactors), PipelineError> {
    let (eta, sigma) = metrics::edge_factors(g, p);
    let network = metrics::community_network(g, p, opts.phi, opts.degree_mode)
        .map_err(PipelineError::Network)?;
    let gamma = metrics::gravity_indices(p, &network).map_err(PipelineError::Gravity)?;
    let to_f64 = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect::<Vec<_>>();
    let normalized = vulnerability::normalize_factors(&to_f64(eta), &to_f64(sigma), &gamma)
        .map_err(PipelineError::Vulnerability)?;
    Ok((network, normalized))
}

/// Scores a fixed partition.
pub fn evaluate_partition(
    g: &Graph,
    p: &Partition,
    opts: &EvaluateOptions,
) -> Result<(CommunityNetwork, NormalizedFactors, VulnerabilityReport), PipelineError> {
    let (network, f) = factors(g, p, opts)?;
    let zeta =
        vulnerability::vulnerability(&f, opts.weights).map_err(PipelineError::Vulnerability)?;
    let xi = vulnerability::relative_vulnerability(&zeta).map_err(PipelineError::Vulnerability)?;
    let ranking = vulnerability::fuzzy_ranking(&xi).map_err(PipelineError::Ranking)?;
    let rank = vulnerability::ranks(&xi);
    let modularity = crate::community::modularity(g, p)?;

    let (eta_raw, sigma_raw, gamma_raw) = f.raw();
    let (eta, sigma, gamma) = (f.eta(), f.sigma(), f.gamma());
    let communities = p
        .communities()
        .iter()
        .enumerate()
        .map(|(c, members)| CommunityReport {
            id: format!("c{}", c + 1),
            members: members.iter().map(|&v| g.label(v).to_owned()).collect(),
            size: members.len(),
            eta_raw: eta_raw[c],
            sigma_raw: sigma_raw[c],
            gamma_raw: gamma_raw[c],
            eta: eta[c],
            sigma: sigma[c],
            gamma: gamma[c],
            zeta: zeta[c],
            xi: xi[c],
            rank: rank[c],
        })
        .collect();
    let report = VulnerabilityReport {
        phi: opts.phi,
        weights: opts.weights,
        degree_mode: opts.degree_mode,
        modularity,
        communities,
        chain: ranking.chain_ascii(),
        ranking,
    };
    Ok((network, f, report))
}

/// Detects communities, then scores them.
pub fn evaluate(g: &Graph, opts: &EvaluateOptions) -> Result<Evaluation, PipelineError> {
    let trace = detect_communities(g)?;
    let (network, factors, report) = evaluate_partition(g, &trace.partition, opts)?;
    Ok(Evaluation {
        trace,
        network,
        factors,
        report,
    })
}

/// Detects communities and estimates Sobol' indices of their vulnerability.
pub fn sensitivity(
    g: &Graph,
    opts: &EvaluateOptions,
    config: &SobolConfig,
) -> Result<SobolResult, PipelineError> {
    let trace = detect_communities(g)?;
    let (_, f) = factors(g, &trace.partition, opts)?;
    Ok(sensitivity::sobol_indices(
        sensitivity::vulnerability_model(&f),
        config,
    )?)
}
