//! Plain-text and JSON graph files.
//!
//! ```text
//! # confounded chain
//! nodes: X1 X2 X3
//! X1 -> X2
//! X2 -> X3
//! X2 <-> X3
//! ```
//!
//! `latent:` and `fixed:` headers and `A -- B` edges are only meaningful for
//! graphs with latents, CADMGs and CPDAGs respectively. The JSON form has the
//! same fields, with edges as two-element arrays.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FidError, Result};
use crate::graph::{Admg, Cadmg, Cpdag, DagWithLatents, Mag, MixedGraph};
use crate::node::NodeId;

/// Raw contents of a graph file before it is checked against a graph kind.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub latent: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fixed: Vec<String>,
    #[serde(default)]
    pub directed: Vec<(String, String)>,
    #[serde(default)]
    pub bidirected: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undirected: Vec<(String, String)>,
}

fn labels(ids: impl IntoIterator<Item = NodeId>) -> Vec<String> {
    ids.into_iter().map(|n| n.to_string()).collect()
}

fn pairs(edges: Vec<(NodeId, NodeId)>) -> Vec<(String, String)> {
    edges.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn reject(field: &str, kind: &str, present: bool) -> Result<()> {
    if present {
        return Err(FidError::InvalidGraph(format!("`{field}` is not allowed in a {kind} file")));
    }
    Ok(())
}

impl GraphFile {
    /// Parse either format. Input whose first non-blank character is `{` is JSON.
    pub fn parse(text: &str) -> Result<GraphFile> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| FidError::Parse {
                line: e.line(),
                msg: e.to_string(),
            })
        } else {
            parse_text(text)
        }
    }

    pub fn read(path: impl AsRef<Path>) -> Result<GraphFile> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| FidError::Io(format!("{}: {e}", path.as_ref().display())))?;
        GraphFile::parse(&text)
    }

    pub fn to_admg(&self) -> Result<Admg> {
        reject("latent", "ADMG", !self.latent.is_empty())?;
        reject("fixed", "ADMG", !self.fixed.is_empty())?;
        reject("--", "ADMG", !self.undirected.is_empty())?;
        Admg::new(&self.nodes, &self.directed, &self.bidirected)
    }

    pub fn to_cadmg(&self) -> Result<Cadmg> {
        reject("latent", "CADMG", !self.latent.is_empty())?;
        reject("--", "CADMG", !self.undirected.is_empty())?;
        let random: Vec<&String> = self.nodes.iter().filter(|n| !self.fixed.contains(n)).collect();
        let fixed: Vec<&String> = self.fixed.iter().collect();
        let d: Vec<(&String, &String)> = self.directed.iter().map(|(a, b)| (a, b)).collect();
        let b: Vec<(&String, &String)> = self.bidirected.iter().map(|(a, b)| (a, b)).collect();
        for f in &fixed {
            if !self.nodes.contains(f) {
                return Err(FidError::UnknownNode(f.to_string()));
            }
        }
        Cadmg::new(&random, &fixed, &d, &b)
    }

    /// `nodes` lists the observed nodes only.
    pub fn to_dag_with_latents(&self) -> Result<DagWithLatents> {
        reject("fixed", "latent DAG", !self.fixed.is_empty())?;
        reject("<->", "latent DAG", !self.bidirected.is_empty())?;
        reject("--", "latent DAG", !self.undirected.is_empty())?;
        DagWithLatents::new(&self.nodes, &self.latent, &self.directed)
    }

    pub fn to_mag(&self) -> Result<Mag> {
        reject("latent", "MAG", !self.latent.is_empty())?;
        reject("fixed", "MAG", !self.fixed.is_empty())?;
        reject("--", "MAG", !self.undirected.is_empty())?;
        Mag::new(&self.nodes, &self.directed, &self.bidirected)
    }

    pub fn to_cpdag(&self) -> Result<Cpdag> {
        reject("latent", "CPDAG", !self.latent.is_empty())?;
        reject("fixed", "CPDAG", !self.fixed.is_empty())?;
        reject("<->", "CPDAG", !self.bidirected.is_empty())?;
        Cpdag::new(&self.nodes, &self.directed, &self.undirected)
    }

    pub fn from_admg(g: &Admg) -> GraphFile {
        GraphFile {
            nodes: labels(g.nodes().iter().cloned()),
            directed: pairs(g.directed_edges()),
            bidirected: pairs(g.bidirected_edges()),
            ..GraphFile::default()
        }
    }

    pub fn from_cadmg(g: &Cadmg) -> GraphFile {
        GraphFile {
            nodes: labels(g.nodes().iter().cloned()),
            fixed: labels(g.fixed_nodes()),
            directed: pairs(g.directed_edges()),
            bidirected: pairs(g.bidirected_edges()),
            ..GraphFile::default()
        }
    }

    pub fn from_dag_with_latents(g: &DagWithLatents) -> GraphFile {
        GraphFile {
            nodes: labels(g.observed_nodes()),
            latent: labels(g.latent_nodes()),
            directed: pairs(g.directed_edges()),
            ..GraphFile::default()
        }
    }

    pub fn from_mag(g: &Mag) -> GraphFile {
        GraphFile {
            nodes: labels(g.nodes().iter().cloned()),
            directed: pairs(g.directed_edges()),
            bidirected: pairs(g.bidirected_edges()),
            ..GraphFile::default()
        }
    }

    pub fn from_cpdag(g: &Cpdag) -> GraphFile {
        GraphFile {
            nodes: labels(g.nodes().iter().cloned()),
            directed: pairs(g.directed_edges()),
            undirected: pairs(g.undirected_edges()),
            ..GraphFile::default()
        }
    }

    /// Text form, edges in the order stored.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "nodes: {}", self.nodes.join(" "));
        if !self.latent.is_empty() {
            let _ = writeln!(s, "latent: {}", self.latent.join(" "));
        }
        if !self.fixed.is_empty() {
            let _ = writeln!(s, "fixed: {}", self.fixed.join(" "));
        }
        for (arrow, edges) in [("->", &self.directed), ("<->", &self.bidirected), ("--", &self.undirected)] {
            for (a, b) in edges {
                let _ = writeln!(s, "{a} {arrow} {b}");
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph files always serialize")
    }
}

fn split_names(rest: &str) -> Vec<String> {
    rest.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_text(text: &str) -> Result<GraphFile> {
    let mut out = GraphFile::default();
    let mut saw_nodes = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: String| FidError::Parse { line, msg };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some((key, rest)) = body.split_once(':') {
            let names = split_names(rest);
            match key.trim() {
                "nodes" if saw_nodes => return Err(err("second `nodes:` header".into())),
                "nodes" => {
                    saw_nodes = true;
                    out.nodes = names;
                }
                "latent" => out.latent.extend(names),
                "fixed" => out.fixed.extend(names),
                other => return Err(err(format!("unknown header `{other}`"))),
            }
            continue;
        }
        if !saw_nodes {
            return Err(err("edge before the `nodes:` header".into()));
        }
        // `<->` has to be tried before `->`
        let (arrow, list) = if body.contains("<->") {
            ("<->", &mut out.bidirected)
        } else if body.contains("->") {
            ("->", &mut out.directed)
        } else if body.contains("--") {
            ("--", &mut out.undirected)
        } else {
            return Err(err(format!("expected an edge, got `{body}`")));
        };
        let (a, b) = body.split_once(arrow).expect("arrow present");
        let (a, b) = (a.trim(), b.trim());
        if a.is_empty() || b.is_empty() || b.contains(arrow) || a.contains(char::is_whitespace) || b.contains(char::is_whitespace) {
            return Err(err(format!("malformed edge `{body}`")));
        }
        list.push((a.to_string(), b.to_string()));
    }
    if !saw_nodes {
        return Err(FidError::Parse {
            line: text.lines().count().max(1),
            msg: "missing `nodes:` header".into(),
        });
    }
    Ok(out)
}

pub fn read_admg(path: impl AsRef<Path>) -> Result<Admg> {
    GraphFile::read(path)?.to_admg()
}

pub fn read_cpdag(path: impl AsRef<Path>) -> Result<Cpdag> {
    GraphFile::read(path)?.to_cpdag()
}
