//! Brute-force reference implementations used only by tests. Nothing here
//! calls into the library; inputs are plain node counts and edge lists.

#![allow(dead_code)]

/// Dense adjacency over nodes `0..n`.
pub struct Dense {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
    pub m: usize,
}

impl Dense {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![vec![false; n]; n];
        let mut m = 0;
        for &(u, v) in edges {
            assert_ne!(u, v);
            if !adj[u][v] {
                adj[u][v] = true;
                adj[v][u] = true;
                m += 1;
            }
        }
        Dense { n, adj, m }
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&a| a).count()
    }
}

/// Newman's double-sum form: `1/2m * sum_ij (A_ij - k_i k_j / 2m) [c_i == c_j]`.
pub fn modularity(g: &Dense, assignment: &[usize]) -> f64 {
    let two_m = 2.0 * g.m as f64;
    let k: Vec<f64> = (0..g.n).map(|i| g.degree(i) as f64).collect();
    let mut q = 0.0;
    for i in 0..g.n {
        for j in 0..g.n {
            if assignment[i] == assignment[j] {
                let a = if g.adj[i][j] { 1.0 } else { 0.0 };
                q += a - k[i] * k[j] / two_m;
            }
        }
    }
    q / two_m
}

fn assignment_of(n: usize, sets: &[Vec<usize>]) -> Vec<usize> {
    let mut a = vec![0; n];
    for (k, s) in sets.iter().enumerate() {
        for &v in s {
            a[v] = k;
        }
    }
    a
}

pub fn canonical_sets(mut sets: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for s in &mut sets {
        s.sort_unstable();
    }
    sets.sort_unstable_by_key(|s| s[0]);
    sets
}

/// One greedy step recorded by the brute-force agglomeration.
#[derive(Debug, Clone)]
pub struct OracleStep {
    pub sets: Vec<Vec<usize>>,
    pub q: f64,
    pub delta_q: Option<f64>,
    pub applied: bool,
}

/// Greedy agglomeration that re-evaluates full modularity for every
/// candidate merge of every community pair. Gains within `1e-12` of the best
/// count as tied; ties go to the smallest `(min label, max label)`.
pub fn greedy(g: &Dense) -> Vec<OracleStep> {
    let mut sets: Vec<Vec<usize>> = (0..g.n).map(|v| vec![v]).collect();
    let mut q = modularity(g, &assignment_of(g.n, &sets));
    let mut steps = vec![OracleStep {
        sets: sets.clone(),
        q,
        delta_q: None,
        applied: true,
    }];
    while sets.len() > 1 {
        let mut cands = Vec::new();
        for a in 0..sets.len() {
            for b in (a + 1)..sets.len() {
                let mut merged = sets.clone();
                let moved = merged.remove(b);
                merged[a].extend(moved);
                let merged = canonical_sets(merged);
                let qn = modularity(g, &assignment_of(g.n, &merged));
                cands.push((
                    qn - q,
                    sets[a][0].min(sets[b][0]),
                    sets[a][0].max(sets[b][0]),
                    merged,
                    qn,
                ));
            }
        }
        let best = cands.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let (dq, _, _, merged, qn) = cands
            .into_iter()
            .filter(|c| c.0 >= best - 1e-12)
            .min_by_key(|c| (c.1, c.2))
            .unwrap();
        if dq < -1e-12 {
            steps.push(OracleStep {
                sets: merged,
                q: qn,
                delta_q: Some(dq),
                applied: false,
            });
            break;
        }
        sets = merged;
        q = qn;
        steps.push(OracleStep {
            sets: sets.clone(),
            q,
            delta_q: Some(dq),
            applied: true,
        });
    }
    steps
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 0..=max + 1 {
            prefix.push(k);
            rec(prefix, max.max(k), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut prefix = vec![0];
    rec(&mut prefix, 0, n, &mut out);
    out
}

pub fn sets_of(assignment: &[usize]) -> Vec<Vec<usize>> {
    let k = assignment.iter().max().map_or(0, |m| m + 1);
    let mut sets = vec![Vec::new(); k];
    for (v, &c) in assignment.iter().enumerate() {
        sets[c].push(v);
    }
    canonical_sets(sets.into_iter().filter(|s| !s.is_empty()).collect())
}

/// Highest modularity over all partitions, with every maximizer.
pub fn best_partitions(g: &Dense) -> (f64, Vec<Vec<Vec<usize>>>) {
    let all = set_partitions(g.n);
    let qs: Vec<f64> = all.iter().map(|a| modularity(g, a)).collect();
    let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners = all
        .iter()
        .zip(&qs)
        .filter(|(_, &q)| q >= best - 1e-12)
        .map(|(a, _)| sets_of(a))
        .collect();
    (best, winners)
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            let w = if a == v {
                b
            } else if b == v {
                a
            } else {
                continue;
            };
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.iter().all(|&s| s)
}

/// Every connected labeled graph on `n >= 2` nodes.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    (0u64..(1 << pairs.len()))
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect::<Vec<_>>()
        })
        .filter(|e| connected(n, e))
        .collect()
}

/// JSD summed term by term over the first `span` positions.
pub fn jsd_terms(p: &[f64], q: &[f64], span: usize) -> f64 {
    let mut left = 0.0;
    let mut right = 0.0;
    for t in 0..span {
        let mid = (p[t] + q[t]) / 2.0;
        if p[t] > 0.0 {
            left += p[t] * (p[t] / mid).ln();
        }
        if q[t] > 0.0 {
            right += q[t] * (q[t] / mid).ln();
        }
    }
    0.5 * (left + right)
}

/// Sobol' indices by tensor-grid quadrature (composite Simpson, `points`
/// odd) of the conditional-variance definitions, inputs i.i.d. uniform on
/// `[lo, hi]`. Returns `(first_order, total_effect)`; zeros when the output
/// is constant.
pub fn sobol_quadrature(
    f: impl Fn([f64; 3]) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
) -> ([f64; 3], [f64; 3]) {
    assert!(points % 2 == 1 && points >= 3);
    let h = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|k| lo + h * k as f64).collect();
    let mut w: Vec<f64> = (0..points)
        .map(|k| {
            if k == 0 || k == points - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            }
        })
        .collect();
    let wsum: f64 = w.iter().sum();
    for x in &mut w {
        *x /= wsum;
    }
    let p = points;
    let idx = |a: usize, b: usize, c: usize| (a * p + b) * p + c;
    let mut y = vec![0.0; p * p * p];
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                y[idx(a, b, c)] = f([xs[a], xs[b], xs[c]]);
            }
        }
    }
    let mut mean = 0.0;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                mean += w[a] * w[b] * w[c] * y[idx(a, b, c)];
            }
        }
    }
    let mut var = 0.0;
    for a in 0..p {
        for b in 0..p {
            for c in 0..p {
                let d = y[idx(a, b, c)] - mean;
                var += w[a] * w[b] * w[c] * d * d;
            }
        }
    }
    if var < 1e-14 {
        return ([0.0; 3], [0.0; 3]);
    }
    let at = |axis: usize, i: usize, j: usize, k: usize| -> f64 {
        // axis-th coordinate gets i; the other two get j, k in order
        match axis {
            0 => y[idx(i, j, k)],
            1 => y[idx(j, i, k)],
            _ => y[idx(j, k, i)],
        }
    };
    let mut first = [0.0; 3];
    let mut total = [0.0; 3];
    for axis in 0..3 {
        // Var over x_axis of E[Y | x_axis]
        let mut v1 = 0.0;
        for i in 0..p {
            let mut m = 0.0;
            for j in 0..p {
                for k in 0..p {
                    m += w[j] * w[k] * at(axis, i, j, k);
                }
            }
            v1 += w[i] * (m - mean) * (m - mean);
        }
        // E over the rest of Var over x_axis
        let mut vt = 0.0;
        for j in 0..p {
            for k in 0..p {
                let mut m = 0.0;
                for i in 0..p {
                    m += w[i] * at(axis, i, j, k);
                }
                let mut v = 0.0;
                for i in 0..p {
                    let d = at(axis, i, j, k) - m;
                    v += w[i] * d * d;
                }
                vt += w[j] * w[k] * v;
            }
        }
        first[axis] = v1 / var;
        total[axis] = vt / var;
    }
    (first, total)
}

/// Deterministic xorshift for building random test instances.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }
}

/// A random graph with planted communities: each community is a random
/// connected subgraph (a path plus extra chords), joined by a few random
/// bridges. Returns `(n, edges, communities)`.
pub fn planted(seed: u64) -> (usize, Vec<(usize, usize)>, Vec<Vec<usize>>) {
    let mut rng = Lcg(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1);
    let k = 2 + rng.below(5);
    let mut communities = Vec::new();
    let mut edges = Vec::new();
    let mut n = 0;
    for _ in 0..k {
        let size = 2 + rng.below(5);
        let nodes: Vec<usize> = (n..n + size).collect();
        n += size;
        for w in nodes.windows(2) {
            edges.push((w[0], w[1]));
        }
        for _ in 0..rng.below(size + 1) {
            let a = nodes[rng.below(size)];
            let b = nodes[rng.below(size)];
            if a != b {
                edges.push((a.min(b), a.max(b)));
            }
        }
        communities.push(nodes);
    }
    let bridges = 1 + rng.below(2 * k);
    for _ in 0..bridges {
        let ca = rng.below(k);
        let mut cb = rng.below(k);
        if ca == cb {
            cb = (cb + 1) % k;
        }
        let a = communities[ca][rng.below(communities[ca].len())];
        let b = communities[cb][rng.below(communities[cb].len())];
        edges.push((a.min(b), a.max(b)));
    }
    edges.sort_unstable();
    edges.dedup();
    (n, edges, communities)
}
