//! Weighted vulnerability score, relative vulnerability and fuzzy ranking.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VulnerabilityError {
    #[error("factor vectors must be non-empty and of equal length")]
    ShapeMismatch,
    #[error("{0} factor has a negative or non-finite entry")]
    InvalidFactor(Factor),
    #[error("{0} factor is zero for every community; cannot normalize")]
    ZeroFactor(Factor),
    #[error("weight {0} must be finite")]
    InvalidWeight(&'static str),
    #[error("vulnerability of c{0} is indeterminate (zero factor under a negative weight)")]
    Indeterminate(usize),
    #[error("every vulnerability score is infinite")]
    AllInfinite,
    #[error("vulnerability scores must be positive, c{0} is not")]
    NonPositive(usize),
    #[error("ranking needs at least two communities, found {0}")]
    NothingToRank(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Eic,
    Eoc,
    Gravity,
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Factor::Eic => "EIC",
            Factor::Eoc => "EOC",
            Factor::Gravity => "gravity",
        })
    }
}

/// Exponents applied to the EIC, EOC and gravity factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub chi: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            alpha: 1.0,
            beta: 1.0,
            chi: 1.0,
        }
    }
}

impl Weights {
    pub fn new(alpha: f64, beta: f64, chi: f64) -> Self {
        Weights { alpha, beta, chi }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.chi]
    }

    fn validate(&self) -> Result<(), VulnerabilityError> {
        for (name, w) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("chi", self.chi),
        ] {
            if !w.is_finite() {
                return Err(VulnerabilityError::InvalidWeight(name));
            }
        }
        Ok(())
    }
}

/// One max-normalized factor. Keeps the raw values so the inverse
/// `max / raw` is available without a second rounding.
#[derive(Debug, Clone, PartialEq)]
struct Scaled {
    raw: Vec<f64>,
    max: f64,
}

impl Scaled {
    fn new(raw: &[f64], factor: Factor) -> Result<Self, VulnerabilityError> {
        if raw.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(VulnerabilityError::InvalidFactor(factor));
        }
        let max = raw.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Err(VulnerabilityError::ZeroFactor(factor));
        }
        Ok(Scaled {
            raw: raw.to_vec(),
            max,
        })
    }

    fn normalized(&self) -> Vec<f64> {
        self.raw.iter().map(|r| r / self.max).collect()
    }

    // 1 / normalized
    fn inverse(&self, i: usize) -> f64 {
        self.max / self.raw[i]
    }
}

/// EIC, EOC and gravity factors, each divided by its maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFactors {
    eta: Scaled,
    sigma: Scaled,
    gamma: Scaled,
}

/// Max-normalizes the three factor vectors.
pub fn normalize_factors(
    eta: &[f64],
    sigma: &[f64],
    gamma: &[f64],
) -> Result<NormalizedFactors, VulnerabilityError> {
    if eta.is_empty() || eta.len() != sigma.len() || eta.len() != gamma.len() {
        return Err(VulnerabilityError::ShapeMismatch);
    }
    Ok(NormalizedFactors {
        eta: Scaled::new(eta, Factor::Eic)?,
        sigma: Scaled::new(sigma, Factor::Eoc)?,
        gamma: Scaled::new(gamma, Factor::Gravity)?,
    })
}

impl NormalizedFactors {
    /// Takes already-normalized factors (entries in `[0, 1]`) as is.
    pub fn from_normalized(
        eta: &[f64],
        sigma: &[f64],
        gamma: &[f64],
    ) -> Result<Self, VulnerabilityError> {
        if eta.is_empty() || eta.len() != sigma.len() || eta.len() != gamma.len() {
            return Err(VulnerabilityError::ShapeMismatch);
        }
        let unit = |v: &[f64], f: Factor| -> Result<Scaled, VulnerabilityError> {
            if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(VulnerabilityError::InvalidFactor(f));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(VulnerabilityError::ZeroFactor(f));
            }
            Ok(Scaled {
                raw: v.to_vec(),
                max: 1.0,
            })
        };
        Ok(NormalizedFactors {
            eta: unit(eta, Factor::Eic)?,
            sigma: unit(sigma, Factor::Eoc)?,
            gamma: unit(gamma, Factor::Gravity)?,
        })
    }

    pub fn len(&self) -> usize {
        self.eta.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn eta(&self) -> Vec<f64> {
        self.eta.normalized()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.sigma.normalized()
    }

    pub fn gamma(&self) -> Vec<f64> {
        self.gamma.normalized()
    }

    pub fn raw(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.eta.raw, &self.sigma.raw, &self.gamma.raw)
    }

    /// Inverse normalized factors `(1/eta, 1/sigma, 1/gamma)` of community `i`;
    /// `+inf` where a factor is zero.
    pub fn inverses(&self, i: usize) -> [f64; 3] {
        [
            self.eta.inverse(i),
            self.sigma.inverse(i),
            self.gamma.inverse(i),
        ]
    }
}

/// Vulnerability of a single community from its inverse factors.
pub(crate) fn score(inverses: [f64; 3], w: [f64; 3]) -> f64 {
    inverses[0].powf(w[0]) * inverses[1].powf(w[1]) * inverses[2].powf(w[2])
}

/// `zeta_i = 1 / (eta^alpha * sigma^beta * gamma^chi)`. A zero factor under a
/// positive weight gives `+inf`.
pub fn vulnerability(f: &NormalizedFactors, w: Weights) -> Result<Vec<f64>, VulnerabilityError> {
    w.validate()?;
    let exps = w.as_array();
    (0..f.len())
        .map(|i| {
            let z = score(f.inverses(i), exps);
            if z.is_nan() {
                Err(VulnerabilityError::Indeterminate(i + 1))
            } else {
                Ok(z)
            }
        })
        .collect()
}

/// Divides every score by the smallest finite score.
pub fn relative_vulnerability(zeta: &[f64]) -> Result<Vec<f64>, VulnerabilityError> {
    let min = zeta
        .iter()
        .copied()
        .filter(|z| z.is_finite())
        .fold(f64::INFINITY, f64::min);
    if min.is_infinite() {
        return Err(VulnerabilityError::AllInfinite);
    }
    if let Some(i) = zeta.iter().position(|&z| !(z > 0.0)) {
        return Err(VulnerabilityError::NonPositive(i + 1));
    }
    Ok(zeta.iter().map(|z| z / min).collect())
}

/// 1-based ranks, 1 = most vulnerable. Ties go to the lower community id.
pub fn ranks(xi: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| xi[b].total_cmp(&xi[a]).then(a.cmp(&b)));
    let mut rank = vec![0; xi.len()];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos + 1;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "~")]
    Approx,
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<<")]
    MuchLess,
}

impl Relation {
    /// Exact threshold hits take the weaker symbol.
    pub fn classify(gap: f64, delta: f64) -> Relation {
        if !gap.is_finite() {
            Relation::MuchLess
        } else if gap <= 0.25 * delta {
            Relation::Approx
        } else if gap <= 0.75 * delta {
            Relation::LessEq
        } else if gap <= 1.5 * delta {
            Relation::Less
        } else {
            Relation::MuchLess
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Approx => "≈",
            Relation::LessEq => "≤",
            Relation::Less => "<",
            Relation::MuchLess => "≪",
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Relation::Approx => "~",
            Relation::LessEq => "<=",
            Relation::Less => "<",
            Relation::MuchLess => "<<",
        }
    }
}

/// Ascending chain of relative vulnerabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRanking {
    /// Community ids, least vulnerable first.
    pub order: Vec<usize>,
    pub relations: Vec<Relation>,
    #[serde(with = "crate::serde_inf::vec")]
    pub gaps: Vec<f64>,
    /// Mean of the finite gaps.
    pub delta: f64,
}

pub fn fuzzy_ranking(xi: &[f64]) -> Result<FuzzyRanking, VulnerabilityError> {
    if xi.len() < 2 {
        return Err(VulnerabilityError::NothingToRank(xi.len()));
    }
    if let Some(i) = xi.iter().position(|x| x.is_nan()) {
        return Err(VulnerabilityError::NonPositive(i + 1));
    }
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| match xi[a].total_cmp(&xi[b]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let gaps: Vec<f64> = order
        .windows(2)
        .map(|w| {
            let (lo, hi) = (xi[w[0]], xi[w[1]]);
            if hi.is_infinite() {
                f64::INFINITY
            } else {
                hi - lo
            }
        })
        .collect();
    let finite: Vec<f64> = gaps.iter().copied().filter(|g| g.is_finite()).collect();
    let delta = if finite.is_empty() {
        0.0
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    let relations = gaps.iter().map(|&g| Relation::classify(g, delta)).collect();
    Ok(FuzzyRanking {
        order,
        relations,
        gaps,
        delta,
    })
}

impl FuzzyRanking {
    fn render(&self, sym: impl Fn(Relation) -> &'static str) -> String {
        let mut out = format!("c{}", self.order[0] + 1);
        for (rel, c) in self.relations.iter().zip(&self.order[1..]) {
            out.push_str(&format!(" {} c{}", sym(*rel), c + 1));
        }
        out
    }

    /// `c3 ≤ c2 ≪ c1`
    pub fn chain(&self) -> String {
        self.render(Relation::symbol)
    }

    /// `c3 <= c2 << c1`
    pub fn chain_ascii(&self) -> String {
        self.render(Relation::token)
    }
}
