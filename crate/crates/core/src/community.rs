//! Modularity and greedy agglomerative community detection.
//!
//! Detection starts from singletons and repeatedly applies the merge with the
//! largest modularity gain until the best available gain is negative. Gains
//! are compared as exact integers (scaled by `4|E|^2`), so tie-breaking never
//! depends on floating-point noise.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommunityError {
    #[error("modularity is undefined for a graph without edges")]
    NoEdges,
    #[error("cannot merge community {0} with itself")]
    InvalidMerge(usize),
    #[error("unknown community {0}")]
    UnknownCommunity(usize),
    #[error("not a partition: {0}")]
    NotAPartition(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Assignment of every node to exactly one community.
///
/// Communities are stored in canonical order: members ascending, communities
/// ordered by their smallest member. Community id `k` is the position in that
/// order and is presented as `c{k+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    communities: Vec<Vec<usize>>,
    assignment: Vec<usize>,
}

impl Partition {
    pub fn new(g: &Graph, communities: Vec<Vec<usize>>) -> Result<Self, CommunityError> {
        let n = g.node_count();
        let mut seen = vec![false; n];
        for c in &communities {
            if c.is_empty() {
                return Err(CommunityError::NotAPartition("empty community".into()));
            }
            for &v in c {
                if v >= n {
                    return Err(GraphError::IndexOutOfRange(v).into());
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(CommunityError::NotAPartition(format!(
                        "node '{}' assigned twice",
                        g.label(v)
                    )));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(CommunityError::NotAPartition(format!(
                "node '{}' unassigned",
                g.label(v)
            )));
        }
        Ok(Self::canonical(n, communities))
    }

    /// Builds a partition from node labels.
    pub fn from_labels<S: AsRef<str>>(g: &Graph, sets: &[Vec<S>]) -> Result<Self, CommunityError> {
        let communities = sets
            .iter()
            .map(|set| {
                set.iter()
                    .map(|l| g.node_index(l.as_ref()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(g, communities)
    }

    pub fn singletons(g: &Graph) -> Self {
        Self::canonical(
            g.node_count(),
            (0..g.node_count()).map(|i| vec![i]).collect(),
        )
    }

    pub fn whole(g: &Graph) -> Self {
        Self::canonical(g.node_count(), vec![(0..g.node_count()).collect()])
    }

    fn canonical(n: usize, mut communities: Vec<Vec<usize>>) -> Self {
        for c in &mut communities {
            c.sort_unstable();
        }
        communities.sort_unstable_by_key(|c| c[0]);
        let mut assignment = vec![0; n];
        for (k, c) in communities.iter().enumerate() {
            for &v in c {
                assignment[v] = k;
            }
        }
        Partition {
            communities,
            assignment,
        }
    }

    /// Number of communities `|C|`.
    pub fn count(&self) -> usize {
        self.communities.len()
    }

    pub fn communities(&self) -> &[Vec<usize>] {
        &self.communities
    }

    pub fn members(&self, ci: usize) -> Result<&[usize], CommunityError> {
        self.communities
            .get(ci)
            .map(Vec::as_slice)
            .ok_or(CommunityError::UnknownCommunity(ci))
    }

    pub fn community_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.communities.iter().map(Vec::len).collect()
    }

    /// The partition obtained by merging communities `a` and `b`.
    pub fn merged(&self, a: usize, b: usize) -> Result<Self, CommunityError> {
        self.check_pair(a, b)?;
        let mut communities = self.communities.clone();
        let (lo, hi) = (a.min(b), a.max(b));
        let moved = communities.remove(hi);
        communities[lo].extend(moved);
        Ok(Self::canonical(self.assignment.len(), communities))
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<(), CommunityError> {
        for c in [a, b] {
            if c >= self.count() {
                return Err(CommunityError::UnknownCommunity(c));
            }
        }
        if a == b {
            return Err(CommunityError::InvalidMerge(a));
        }
        Ok(())
    }

    /// Renders `{1, 2}, {3, 4, 5}` using node labels.
    pub fn describe(&self, g: &Graph) -> String {
        describe_sets(g, &self.communities)
    }
}

pub(crate) fn describe_sets(g: &Graph, sets: &[Vec<usize>]) -> String {
    sets.iter()
        .map(|c| {
            let inner: Vec<&str> = c.iter().map(|&v| g.label(v)).collect();
            format!("{{{}}}", inner.join(", "))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_edges(g: &Graph) -> Result<(), CommunityError> {
    if g.edge_count() == 0 {
        Err(CommunityError::NoEdges)
    } else {
        Ok(())
    }
}

fn check_partition(g: &Graph, p: &Partition) -> Result<(), CommunityError> {
    if p.assignment.len() != g.node_count() {
        return Err(CommunityError::NotAPartition(format!(
            "partition covers {} nodes, graph has {}",
            p.assignment.len(),
            g.node_count()
        )));
    }
    Ok(())
}

/// Modularity `Q = sum_k [ |E_k|/|E| - (D_k / 2|E|)^2 ]`.
pub fn modularity(g: &Graph, p: &Partition) -> Result<f64, CommunityError> {
    check_edges(g)?;
    check_partition(g, p)?;
    let m = g.edge_count() as f64;
    let mut internal = vec![0usize; p.count()];
    for &(u, v) in g.edges() {
        let cu = p.community_of(u);
        if cu == p.community_of(v) {
            internal[cu] += 1;
        }
    }
    let q = p
        .communities()
        .iter()
        .zip(&internal)
        .map(|(members, &e)| {
            let d: usize = members.iter().map(|&v| g.degree_of(v)).sum();
            let share = d as f64 / (2.0 * m);
            e as f64 / m - share * share
        })
        .sum();
    Ok(q)
}

/// Modularity gain of merging communities `a` and `b` of `p`:
/// `E_ab/|E| - 2 D_a D_b / (2|E|)^2`.
pub fn merge_delta_q(g: &Graph, p: &Partition, a: usize, b: usize) -> Result<f64, CommunityError> {
    check_edges(g)?;
    check_partition(g, p)?;
    p.check_pair(a, b)?;
    let between = g
        .edges()
        .iter()
        .filter(|&&(u, v)| {
            let (cu, cv) = (p.community_of(u), p.community_of(v));
            (cu == a && cv == b) || (cu == b && cv == a)
        })
        .count() as i128;
    let total = |c: usize| -> i128 {
        p.communities[c]
            .iter()
            .map(|&v| g.degree_of(v) as i128)
            .sum()
    };
    let m = g.edge_count() as i128;
    Ok(gain_numerator(m, between, total(a), total(b)) as f64 / scale(m))
}

// 4|E|^2 * dQ
fn gain_numerator(m: i128, between: i128, da: i128, db: i128) -> i128 {
    4 * m * between - 2 * da * db
}

fn scale(m: i128) -> f64 {
    (4 * m * m) as f64
}

/// One row of the merge trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t: usize,
    /// Labels (smallest member node index) of the merged communities.
    pub merged: Option<(usize, usize)>,
    pub q: f64,
    pub delta_q: Option<f64>,
    /// `false` only for the terminal row whose best gain was negative.
    pub applied: bool,
    pub communities: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionTrace {
    pub steps: Vec<TraceStep>,
    pub partition: Partition,
    pub final_q: f64,
}

/// Candidate scan used by the greedy loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scan {
    /// Every unordered community pair, every step.
    Exhaustive,
    /// Adjacent pairs first; falls back to the full scan when no adjacent
    /// pair has a strictly positive gain. Non-adjacent gains are never
    /// positive, so this picks the same pair as `Exhaustive`.
    AdjacentFirst,
}

struct Agglomeration {
    m: i128,
    alive: Vec<bool>,
    members: Vec<Vec<usize>>,
    degree: Vec<i128>,
    // slot -> (other slot -> spanning edge count)
    links: Vec<HashMap<usize, i128>>,
    q_num: i128,
}

impl Agglomeration {
    fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let degree: Vec<i128> = (0..n).map(|v| g.degree_of(v) as i128).collect();
        let links = (0..n)
            .map(|v| g.neighbors(v).iter().map(|&u| (u, 1)).collect())
            .collect();
        let q_num = -degree.iter().map(|d| d * d).sum::<i128>();
        Agglomeration {
            m: g.edge_count() as i128,
            alive: vec![true; n],
            members: (0..n).map(|v| vec![v]).collect(),
            degree,
            links,
            q_num,
        }
    }

    fn gain(&self, a: usize, b: usize) -> i128 {
        let between = self.links[a].get(&b).copied().unwrap_or(0);
        gain_numerator(self.m, between, self.degree[a], self.degree[b])
    }

    fn better(best: Option<(i128, usize, usize)>, cand: (i128, usize, usize)) -> bool {
        match best {
            None => true,
            Some((g, a, b)) => cand.0 > g || (cand.0 == g && (cand.1, cand.2) < (a, b)),
        }
    }

    fn best_adjacent(&self) -> Option<(i128, usize, usize)> {
        let mut best = None;
        for a in (0..self.alive.len()).filter(|&a| self.alive[a]) {
            for &b in self.links[a].keys() {
                if b > a {
                    let cand = (self.gain(a, b), a, b);
                    if Self::better(best, cand) {
                        best = Some(cand);
                    }
                }
            }
        }
        best
    }

    fn best_any(&self) -> Option<(i128, usize, usize)> {
        let slots: Vec<usize> = (0..self.alive.len()).filter(|&a| self.alive[a]).collect();
        let mut best = None;
        for (i, &a) in slots.iter().enumerate() {
            for &b in &slots[i + 1..] {
                let cand = (self.gain(a, b), a, b);
                if Self::better(best, cand) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    fn best(&self, scan: Scan) -> Option<(i128, usize, usize)> {
        match scan {
            Scan::Exhaustive => self.best_any(),
            Scan::AdjacentFirst => match self.best_adjacent() {
                Some(c) if c.0 > 0 => Some(c),
                _ => self.best_any(),
            },
        }
    }

    // keeps slot a (the smaller label)
    fn merge(&mut self, a: usize, b: usize, gain: i128) {
        let moved = std::mem::take(&mut self.members[b]);
        self.members[a].extend(moved);
        self.members[a].sort_unstable();
        self.degree[a] += self.degree[b];
        self.alive[b] = false;
        let links_b = std::mem::take(&mut self.links[b]);
        self.links[a].remove(&b);
        for (c, w) in links_b {
            if c == a {
                continue;
            }
            self.links[c].remove(&b);
            *self.links[c].entry(a).or_insert(0) += w;
            *self.links[a].entry(c).or_insert(0) += w;
        }
        self.q_num += gain;
    }

    fn snapshot(&self) -> Vec<Vec<usize>> {
        (0..self.alive.len())
            .filter(|&a| self.alive[a])
            .map(|a| self.members[a].clone())
            .collect()
    }

    fn q(&self) -> f64 {
        self.q_num as f64 / scale(self.m)
    }
}

/// Greedy modularity agglomeration. Ties between equal gains go to the pair
/// with the lexicographically smallest `(min label, max label)`, where a
/// community's label is its smallest node index.
pub fn detect_communities(g: &Graph) -> Result<DetectionTrace, CommunityError> {
    detect_communities_with(g, Scan::AdjacentFirst)
}

pub fn detect_communities_with(g: &Graph, scan: Scan) -> Result<DetectionTrace, CommunityError> {
    check_edges(g)?;
    let mut state = Agglomeration::new(g);
    let mut steps = vec![TraceStep {
        t: 0,
        merged: None,
        q: state.q(),
        delta_q: None,
        applied: true,
        communities: state.snapshot(),
    }];
    while let Some((gain, a, b)) = state.best(scan) {
        let t = steps.len();
        let delta = gain as f64 / scale(state.m);
        if gain < 0 {
            let mut rejected = state.snapshot();
            let ia = rejected.iter().position(|c| c[0] == a).expect("live slot");
            let ib = rejected.iter().position(|c| c[0] == b).expect("live slot");
            let moved = rejected.remove(ib);
            rejected[ia].extend(moved);
            rejected[ia].sort_unstable();
            steps.push(TraceStep {
                t,
                merged: Some((a, b)),
                q: (state.q_num + gain) as f64 / scale(state.m),
                delta_q: Some(delta),
                applied: false,
                communities: rejected,
            });
            break;
        }
        state.merge(a, b, gain);
        steps.push(TraceStep {
            t,
            merged: Some((a, b)),
            q: state.q(),
            delta_q: Some(delta),
            applied: true,
            communities: state.snapshot(),
        });
    }
    let partition = Partition::canonical(g.node_count(), state.snapshot());
    Ok(DetectionTrace {
        steps,
        partition,
        final_q: state.q(),
    })
}

impl DetectionTrace {
    /// Steps whose merge was applied (includes the initial row).
    pub fn applied_steps(&self) -> impl Iterator<Item = &TraceStep> {
        self.steps.iter().filter(|s| s.applied)
    }
}
