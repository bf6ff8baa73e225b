//! Text, CSV, JSON and DOT renderings of pipeline results.
//!
//! Table and CSV output use six decimals; JSON keeps full precision.
//! Infinite scores are written as `inf`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::community::{describe_sets, DetectionTrace};
use crate::graph::Graph;
use crate::metrics::CommunityNetwork;
use crate::pipeline::VulnerabilityReport;
use crate::sensitivity::{OutputStatus, SobolResult};

pub fn fmt6(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.6}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect();
        padded.join("  ").trim_end().to_owned()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&line(
        widths
            .iter()
            .map(|&w| "-".repeat(w))
            .collect::<Vec<_>>()
            .iter()
            .map(String::as_str)
            .collect(),
    ));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}

/// Label-based view of one merge step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub structure: String,
    pub communities: Vec<Vec<String>>,
    pub merged: Option<[String; 2]>,
    pub q: f64,
    pub delta_q: Option<f64>,
    pub applied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceDocument {
    pub steps: Vec<TraceRow>,
    pub partition: Vec<Vec<String>>,
    pub final_q: f64,
}

fn labelled(g: &Graph, sets: &[Vec<usize>]) -> Vec<Vec<String>> {
    sets.iter()
        .map(|c| c.iter().map(|&v| g.label(v).to_owned()).collect())
        .collect()
}

pub fn trace_document(g: &Graph, trace: &DetectionTrace) -> TraceDocument {
    TraceDocument {
        steps: trace
            .steps
            .iter()
            .map(|s| TraceRow {
                t: s.t,
                structure: describe_sets(g, &s.communities),
                communities: labelled(g, &s.communities),
                merged: s
                    .merged
                    .map(|(a, b)| [g.label(a).to_owned(), g.label(b).to_owned()]),
                q: s.q,
                delta_q: s.delta_q,
                applied: s.applied,
            })
            .collect(),
        partition: labelled(g, trace.partition.communities()),
        final_q: trace.final_q,
    }
}

fn delta_cell(d: Option<f64>) -> String {
    d.map(fmt6).unwrap_or_else(|| "--".into())
}

pub fn trace_table(g: &Graph, trace: &DetectionTrace) -> String {
    let doc = trace_document(g, trace);
    let rows: Vec<Vec<String>> = doc
        .steps
        .iter()
        .map(|r| {
            vec![
                r.t.to_string(),
                r.structure.clone(),
                fmt6(r.q),
                delta_cell(r.delta_q),
            ]
        })
        .collect();
    let mut out = table(&["t", "communities", "Q", "dQ"], &rows);
    let _ = writeln!(
        out,
        "\nfinal: {} (Q = {})",
        trace.partition.describe(g),
        fmt6(trace.final_q)
    );
    out
}

pub fn trace_csv(g: &Graph, trace: &DetectionTrace) -> String {
    let mut out = String::from("t,communities,q,delta_q,applied\n");
    for r in trace_document(g, trace).steps {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            csv_field(&r.structure),
            fmt6(r.q),
            r.delta_q.map(fmt6).unwrap_or_default(),
            r.applied
        );
    }
    out
}

pub fn trace_json(g: &Graph, trace: &DetectionTrace) -> String {
    to_json(&trace_document(g, trace))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

const REPORT_COLUMNS: [&str; 12] = [
    "community",
    "size",
    "eta_raw",
    "sigma_raw",
    "gamma_raw",
    "eta",
    "sigma",
    "gamma",
    "zeta",
    "xi",
    "rank",
    "members",
];

fn report_rows(r: &VulnerabilityReport) -> Vec<Vec<String>> {
    r.communities
        .iter()
        .map(|c| {
            vec![
                c.id.clone(),
                c.size.to_string(),
                fmt6(c.eta_raw),
                fmt6(c.sigma_raw),
                fmt6(c.gamma_raw),
                fmt6(c.eta),
                fmt6(c.sigma),
                fmt6(c.gamma),
                fmt6(c.zeta),
                fmt6(c.xi),
                c.rank.to_string(),
                c.members.join(" "),
            ]
        })
        .collect()
}

pub fn report_table(r: &VulnerabilityReport) -> String {
    let mut out = table(&REPORT_COLUMNS, &report_rows(r));
    let _ = writeln!(
        out,
        "\nQ = {}  phi = {}  alpha = {}  beta = {}  chi = {}",
        fmt6(r.modularity),
        r.phi,
        r.weights.alpha,
        r.weights.beta,
        r.weights.chi
    );
    let _ = writeln!(out, "delta = {}", fmt6(r.ranking.delta));
    let _ = writeln!(out, "fuzzy ranking: [{}]", r.ranking.chain());
    out
}

pub fn report_csv(r: &VulnerabilityReport) -> String {
    let mut out = REPORT_COLUMNS.join(",");
    out.push('\n');
    for row in report_rows(r) {
        let cells: Vec<String> = row.iter().map(|c| csv_field(c)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn report_json(r: &VulnerabilityReport) -> String {
    to_json(r)
}

fn status_name(s: OutputStatus) -> &'static str {
    match s {
        OutputStatus::Ok => "ok",
        OutputStatus::ZeroVariance => "zero-variance",
        OutputStatus::NonFinite => "non-finite",
    }
}

pub fn sobol_csv(r: &SobolResult) -> String {
    let mut out = String::from(
        "community,parameter,first_order,total_effect,first_order_raw,total_effect_raw,first_order_se,total_effect_se,status,n,seed,range_lo,range_hi\n",
    );
    for c in &r.communities {
        for p in &c.indices {
            let _ = writeln!(
                out,
                "c{},{},{},{},{},{},{},{},{},{},{},{},{}",
                c.community + 1,
                p.parameter.name(),
                fmt6(p.first_order),
                fmt6(p.total_effect),
                fmt6(p.first_order_raw),
                fmt6(p.total_effect_raw),
                fmt6(p.first_order_se),
                fmt6(p.total_effect_se),
                status_name(c.status),
                r.samples,
                r.seed,
                r.range.0,
                r.range.1
            );
        }
    }
    out
}

pub fn sobol_table(r: &SobolResult) -> String {
    let rows: Vec<Vec<String>> = r
        .communities
        .iter()
        .map(|c| {
            let mut row = vec![format!("c{}", c.community + 1)];
            for p in &c.indices {
                row.push(fmt6(p.first_order));
                row.push(fmt6(p.total_effect));
            }
            row.push(status_name(c.status).into());
            row
        })
        .collect();
    let mut out = table(
        &[
            "community",
            "S(alpha)",
            "ST(alpha)",
            "S(beta)",
            "ST(beta)",
            "S(chi)",
            "ST(chi)",
            "status",
        ],
        &rows,
    );
    let _ = writeln!(
        out,
        "\nn = {}  seed = {}  weights ~ {}  evaluations = {}",
        r.samples, r.seed, r.distribution, r.evaluations
    );
    out
}

pub fn sobol_json(r: &SobolResult) -> String {
    to_json(r)
}

/// Complete weighted graph with the abstract distance as edge weight.
pub fn network_dot(cn: &CommunityNetwork) -> String {
    let mut out = String::from("graph community_network {\n");
    for i in 0..cn.size() {
        let _ = writeln!(out, "  c{};", i + 1);
    }
    for i in 0..cn.size() {
        for j in (i + 1)..cn.size() {
            let d = fmt6(cn.distance(i, j));
            let _ = writeln!(
                out,
                "  c{} -- c{} [weight={d}, label=\"{d}\"];",
                i + 1,
                j + 1
            );
        }
    }
    out.push_str("}\n");
    out
}

/// Distance matrix with a header row of community ids.
pub fn network_csv(cn: &CommunityNetwork) -> String {
    let ids: Vec<String> = (1..=cn.size()).map(|i| format!("c{i}")).collect();
    let mut out = format!("community,{}\n", ids.join(","));
    for (i, row) in cn.distance_rows().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|&d| fmt6(d)).collect();
        let _ = writeln!(out, "{},{}", ids[i], cells.join(","));
    }
    out
}

pub fn network_json(cn: &CommunityNetwork) -> String {
    #[derive(Serialize)]
    struct Doc {
        phi: f64,
        communities: Vec<String>,
        distance: Vec<Vec<f64>>,
        divergence: Vec<Vec<f64>>,
    }
    to_json(&Doc {
        phi: cn.phi,
        communities: (1..=cn.size()).map(|i| format!("c{i}")).collect(),
        distance: cn.distance_rows(),
        divergence: cn.divergence_rows(),
    })
}
