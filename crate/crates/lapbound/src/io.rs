//! Text, CSV and JSON formats.
//!
//! Every text reader skips blank lines and lines starting with `#`, and
//! reports errors with the 1-based physical line number.
//!
//! | format       | layout                                            |
//! |--------------|---------------------------------------------------|
//! | graph        | `n m`, then `m` lines `u v` (0-indexed)           |
//! | weighting    | one nonnegative decimal per line, `n` lines       |
//! | flow         | `mass v0 v1 ... vk` per path                      |
//! | subsets      | `prob v0 v1 ... vk` per support set               |
//! | constants    | `key = value` with keys `C1`, `c0`, `c_KT`, `claim_lite_factor` |
//! | spectrum     | CSV `index,eigenvalue`, index starting at 1       |

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path as FsPath;
use std::str::FromStr;

use lapbound_core::bounds::BoundConstants;
use lapbound_core::certify::BoundCertificate;
use lapbound_core::flow::{Flow, Path, SubsetDistribution};
use lapbound_core::spectral::Spectrum;
use lapbound_core::{Graph, VertexWeighting};
use serde_json::Value;

use crate::error::{AppError, Result};

pub fn read_text(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

pub fn write_text(path: &FsPath, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| AppError::io(path, e))
}

/// Nonempty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

struct Source<'a> {
    path: &'a FsPath,
}

impl Source<'_> {
    fn error(&self, line: usize, message: impl Into<String>) -> AppError {
        AppError::Parse { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn number<T: FromStr>(&self, line: usize, token: &str, what: &str) -> Result<T> {
        token.parse().map_err(|_| self.error(line, format!("{what}: cannot parse {token:?}")))
    }
}

pub fn parse_graph(text: &str, path: &FsPath) -> Result<Graph> {
    let src = Source { path };
    let mut lines = content_lines(text);
    let (header_line, header) = lines.next().ok_or_else(|| src.error(1, "missing header \"n m\""))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(src.error(header_line, format!("header must be \"n m\", got {header:?}")));
    }
    let n: usize = src.number(header_line, fields[0], "vertex count")?;
    let m: usize = src.number(header_line, fields[1], "edge count")?;
    let mut edges = Vec::with_capacity(m);
    let mut seen = BTreeSet::new();
    let mut last_line = header_line;
    for (line, l) in lines {
        last_line = line;
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 2 {
            return Err(src.error(line, format!("edge line must be \"u v\", got {l:?}")));
        }
        let u: usize = src.number(line, f[0], "vertex")?;
        let v: usize = src.number(line, f[1], "vertex")?;
        if u >= n || v >= n {
            return Err(src.error(line, format!("vertex out of range 0..{n}")));
        }
        if u == v {
            return Err(src.error(line, format!("self-loop at {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(src.error(line, format!("duplicate edge {u} {v}")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(src.error(last_line, format!("header announces {m} edges, found {}", edges.len())));
    }
    Ok(Graph::from_edges(n, edges)?)
}

pub fn format_graph(graph: &Graph) -> String {
    let mut out = format!("{} {}\n", graph.n(), graph.edge_count());
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn read_graph(path: &FsPath) -> Result<Graph> {
    parse_graph(&read_text(path)?, path)
}

/// Reads a weighting; with `n` set the entry count must match.
pub fn parse_weighting(text: &str, path: &FsPath, n: Option<usize>) -> Result<VertexWeighting> {
    let src = Source { path };
    let mut values = Vec::new();
    let mut last = 0;
    for (line, l) in content_lines(text) {
        last = line;
        let x: f64 = src.number(line, l, "weight")?;
        if !x.is_finite() || x < 0.0 {
            return Err(src.error(line, format!("weight {x} must be finite and nonnegative")));
        }
        values.push(x);
    }
    if let Some(n) = n {
        if values.len() != n {
            return Err(src.error(last.max(1), format!("expected {n} weights, found {}", values.len())));
        }
    }
    Ok(VertexWeighting::new(values)?)
}

pub fn format_weighting(weights: &VertexWeighting) -> String {
    weights.values().iter().map(|x| format!("{x}\n")).collect()
}

/// `lead v0 v1 ... vk` lines.
fn parse_weighted_lists(text: &str, path: &FsPath, what: &str) -> Result<Vec<(usize, f64, Vec<usize>)>> {
    let src = Source { path };
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let mut f = l.split_whitespace();
        let lead: f64 = src.number(line, f.next().unwrap_or_default(), what)?;
        let vertices = f.map(|t| src.number(line, t, "vertex")).collect::<Result<Vec<usize>>>()?;
        if vertices.is_empty() {
            return Err(src.error(line, "expected at least one vertex"));
        }
        out.push((line, lead, vertices));
    }
    Ok(out)
}

pub fn parse_flow(text: &str, path: &FsPath, graph: &Graph) -> Result<Flow> {
    let src = Source { path };
    let mut flow = Flow::new();
    for (line, mass, vertices) in parse_weighted_lists(text, path, "mass")? {
        let p = Path::new(graph, vertices).map_err(|e| src.error(line, e.to_string()))?;
        flow.add(p, mass).map_err(|e| src.error(line, e.to_string()))?;
    }
    Ok(flow)
}

pub fn format_flow(flow: &Flow) -> String {
    let mut out = String::new();
    for (p, mass) in flow.iter() {
        let _ = write!(out, "{mass}");
        for v in p.vertices() {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Reads a subset distribution; with `n` set every vertex must be below it.
pub fn parse_subsets(text: &str, path: &FsPath, n: Option<usize>) -> Result<SubsetDistribution> {
    let src = Source { path };
    let mut support = Vec::new();
    let mut last = 1;
    for (line, p, set) in parse_weighted_lists(text, path, "probability")? {
        last = line;
        if let Some(n) = n {
            if let Some(v) = set.iter().find(|&&v| v >= n) {
                return Err(src.error(line, format!("vertex {v} out of range 0..{n}")));
            }
        }
        support.push((set, p));
    }
    SubsetDistribution::new(support).map_err(|e| src.error(last, e.to_string()))
}

pub fn format_subsets(mu: &SubsetDistribution) -> String {
    let mut out = String::new();
    for (set, p) in mu.support() {
        let _ = write!(out, "{p}");
        for v in set {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// `key = value` lines; missing keys keep their defaults.
pub fn parse_constants(text: &str, path: &FsPath) -> Result<BoundConstants> {
    let src = Source { path };
    let mut c = BoundConstants::default();
    let mut seen = BTreeSet::new();
    for (line, l) in content_lines(text) {
        let (key, value) = l.split_once('=').ok_or_else(|| src.error(line, format!("expected key = value, got {l:?}")))?;
        let key = key.trim();
        let x: f64 = src.number(line, value.trim(), key)?;
        if !x.is_finite() || x < 0.0 {
            return Err(src.error(line, format!("{key} must be finite and nonnegative")));
        }
        let slot = match key {
            "C1" => &mut c.c1,
            "c0" => &mut c.c0,
            "c_KT" => &mut c.c_kt,
            "claim_lite_factor" => &mut c.claim_lite_factor,
            _ => return Err(src.error(line, format!("unknown constant {key:?}"))),
        };
        if !seen.insert(key.to_string()) {
            return Err(src.error(line, format!("{key} given twice")));
        }
        *slot = x;
    }
    Ok(c)
}

pub fn format_constants(c: &BoundConstants) -> String {
    format!("C1 = {}\nc0 = {}\nc_KT = {}\nclaim_lite_factor = {}\n", c.c1, c.c0, c.c_kt, c.claim_lite_factor)
}

pub fn read_constants(path: &FsPath) -> Result<BoundConstants> {
    parse_constants(&read_text(path)?, path)
}

pub fn spectrum_csv(spectrum: &Spectrum) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "eigenvalue"])?;
    for (i, x) in spectrum.eigenvalues.iter().enumerate() {
        w.write_record([(i + 1).to_string(), x.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"))
}

pub fn parse_spectrum_csv(text: &str) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in r.deserialize() {
        let (_, x): (usize, f64) = record?;
        out.push(x);
    }
    Ok(out)
}

/// Certificate JSON: every stored field plus `sets` and `ratios`.
pub fn certificate_json(cert: &BoundCertificate) -> Result<Value> {
    let mut value = serde_json::to_value(cert)?;
    let obj = value.as_object_mut().expect("certificate serializes to an object");
    obj.insert("sets".into(), serde_json::to_value(cert.sets())?);
    obj.insert("ratios".into(), serde_json::to_value(cert.ratios())?);
    if cert.exact_lambda_k.is_none() {
        obj.remove("exact_lambda_k");
    }
    Ok(value)
}

pub fn parse_certificate(text: &str) -> Result<BoundCertificate> {
    Ok(serde_json::from_str(text)?)
}

/// A single certificate or the array written by `certify`. Array entries
/// without a certificate (failed `k`) are skipped.
pub fn parse_certificates(text: &str) -> Result<Vec<BoundCertificate>> {
    match serde_json::from_str::<Value>(text)? {
        Value::Array(items) => items
            .into_iter()
            .filter(|v| v.get("failure").is_none())
            .map(|v| Ok(serde_json::from_value(v)?))
            .collect(),
        single => Ok(vec![serde_json::from_value(single)?]),
    }
}
