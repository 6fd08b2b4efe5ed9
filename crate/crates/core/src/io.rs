//! Framework files, DOT export and CSV matrix dumps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::decompose::{AssurDecomposition, Block};
use crate::error::{Error, Result};
use crate::graphs::{GainGraph, Kind};
use crate::group::{GroupSpec, Symmetry};
use crate::orbit::{check_configuration, Configuration, OrbitMatrix};
use crate::orient::Orientation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizer: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(default = "identity_name")]
    pub gain: String,
}

fn identity_name() -> String {
    "id".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameworkFile {
    pub dimension: usize,
    pub group: GroupSpec,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<BTreeMap<String, Vec<f64>>>,
    /// Tail vertex of every edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<BTreeMap<String, String>>,
}

/// A validated framework.
#[derive(Clone, Debug)]
pub struct Framework {
    pub spec: GroupSpec,
    pub sym: Symmetry,
    pub graph: GainGraph,
    pub positions: Option<Configuration>,
    pub orientation: Option<Orientation>,
}

pub fn parse_str(text: &str) -> Result<Framework> {
    let file: FrameworkFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Framework::from_file(&file)
}

pub fn parse(path: &Path) -> Result<Framework> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_str(&text)
}

impl Framework {
    pub fn from_file(file: &FrameworkFile) -> Result<Framework> {
        let sym = Symmetry::new(&file.group, file.dimension)?;
        if !file.vertices.iter().any(|v| v.kind == Kind::Inner) {
            return Err(Error::Parse("no inner vertices".into()));
        }
        let mut graph = GainGraph::new();
        for v in &file.vertices {
            let stab = match &v.stabilizer {
                Some(names) => names
                    .iter()
                    .map(|n| sym.grp.element(n))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| Error::Parse(format!("vertex `{}`: {e}", v.id)))?,
                None => Vec::new(),
            };
            graph.add_vertex(&v.id, v.kind, &stab)?;
        }
        graph.check_stabilizers(&sym.grp)?;
        for e in &file.edges {
            let find = |id: &str| {
                graph
                    .vertex(id)
                    .ok_or_else(|| Error::Parse(format!("edge `{}` references unknown vertex `{id}`", e.id)))
            };
            let (t, h) = (find(&e.tail)?, find(&e.head)?);
            let g = sym.grp.element(&e.gain).map_err(|err| Error::Parse(format!("edge `{}`: {err}", e.id)))?;
            graph.add_edge(&sym.grp, &e.id, t, h, g)?;
        }
        let positions = match &file.positions {
            None => None,
            Some(map) => {
                let mut ps = Vec::new();
                for v in &file.vertices {
                    let p = map.get(&v.id).ok_or_else(|| Error::Parse(format!("no position for vertex `{}`", v.id)))?;
                    if p.len() != file.dimension {
                        return Err(Error::Parse(format!("position of `{}` has the wrong dimension", v.id)));
                    }
                    ps.push(DVector::from_column_slice(p));
                }
                if let Some(extra) = map.keys().find(|k| graph.vertex(k).is_none()) {
                    return Err(Error::Parse(format!("position given for unknown vertex `{extra}`")));
                }
                let cfg = Configuration { positions: ps };
                check_configuration(&graph, &sym, &cfg)?;
                Some(cfg)
            }
        };
        let orientation = match &file.orientation {
            None => None,
            Some(map) => {
                let mut forward = Vec::new();
                for e in &graph.edges {
                    let tail =
                        map.get(&e.name).ok_or_else(|| Error::Parse(format!("no direction for edge `{}`", e.name)))?;
                    let t = graph.vertex(tail).ok_or_else(|| {
                        Error::Parse(format!("edge `{}` oriented from unknown vertex `{tail}`", e.name))
                    })?;
                    if t != e.tail && t != e.head {
                        return Err(Error::Parse(format!("`{tail}` is not an end of edge `{}`", e.name)));
                    }
                    forward.push(t == e.tail);
                }
                Some(Orientation { forward })
            }
        };
        Ok(Framework { spec: file.group.clone(), sym, graph, positions, orientation })
    }

    pub fn to_file(&self) -> FrameworkFile {
        let g = &self.graph;
        let grp = &self.sym.grp;
        FrameworkFile {
            dimension: self.sym.dim(),
            group: self.spec.clone(),
            vertices: g
                .vertices
                .iter()
                .map(|v| VertexEntry {
                    id: v.name.clone(),
                    kind: v.kind,
                    stabilizer: (v.stabilizer.len() > 1)
                        .then(|| v.stabilizer.iter().filter(|&&x| x != 0).map(|&x| grp.name(x).to_string()).collect()),
                })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    id: e.name.clone(),
                    tail: g.vertices[e.tail].name.clone(),
                    head: g.vertices[e.head].name.clone(),
                    gain: grp.name(e.gain).to_string(),
                })
                .collect(),
            positions: self.positions.as_ref().map(|c| {
                g.vertices
                    .iter()
                    .zip(&c.positions)
                    .map(|(v, p)| (v.name.clone(), p.iter().copied().collect()))
                    .collect()
            }),
            orientation: self.orientation.as_ref().map(|o| {
                (0..g.edges.len()).map(|e| (g.edges[e].name.clone(), g.vertices[o.tail(g, e)].name.clone())).collect()
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("framework files serialize")
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Gain graph in DOT, with gains on edges and arrowheads per orientation if given.
pub fn gain_graph_dot(gg: &GainGraph, sym: &Symmetry, o: Option<&Orientation>) -> String {
    let mut out = String::from("digraph gain_graph {\n");
    let mut vs: Vec<usize> = (0..gg.vertices.len()).collect();
    vs.sort_by(|&a, &b| gg.vertices[a].name.cmp(&gg.vertices[b].name));
    for v in vs {
        let shape = if gg.is_pin(v) { "box" } else { "circle" };
        let _ = writeln!(out, "  {} [shape={shape}];", quote(&gg.vertices[v].name));
    }
    let mut es: Vec<usize> = (0..gg.edges.len()).collect();
    es.sort_by(|&a, &b| gg.edges[a].name.cmp(&gg.edges[b].name));
    for e in es {
        let edge = &gg.edges[e];
        let (t, h, gain) = match o {
            Some(o) if !o.forward[e] => (edge.head, edge.tail, sym.grp.inv(edge.gain)),
            _ => (edge.tail, edge.head, edge.gain),
        };
        let dir = if o.is_some() { "" } else { ", dir=none" };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}{dir}];",
            quote(&gg.vertices[t].name),
            quote(&gg.vertices[h].name),
            quote(&format!("{}: {}", edge.name, sym.grp.name(gain)))
        );
    }
    out.push_str("}\n");
    out
}

/// Block graph in DOT: components as boxes, the ground as a double circle.
pub fn block_graph_dot(gg: &GainGraph, dec: &AssurDecomposition) -> String {
    let mut out = String::from("digraph assur_blocks {\n  \"Z\" [shape=doublecircle];\n");
    let mut order: Vec<usize> = (0..dec.len()).collect();
    order.sort_by(|&a, &b| dec.components[a].name.cmp(&dec.components[b].name));
    for &c in &order {
        let comp = &dec.components[c];
        let mut names: Vec<&str> = comp.vertices.iter().map(|&v| gg.vertices[v].name.as_str()).collect();
        names.sort_unstable();
        let _ = writeln!(out, "  {} [shape=box, label={}];", quote(&comp.name), quote(&names.join(" ")));
    }
    let name = |b: &Block| match b {
        Block::Ground => "Z".to_string(),
        Block::Component(i) => dec.components[*i].name.clone(),
    };
    let mut edges: Vec<(String, String)> = dec.block_edges.iter().map(|(a, b)| (name(a), name(b))).collect();
    edges.sort();
    for (a, b) in edges {
        let _ = writeln!(out, "  {} -> {};", quote(&a), quote(&b));
    }
    out.push_str("}\n");
    out
}

/// Orbit matrix as CSV: a header naming column blocks, then one row per edge.
pub fn matrix_csv(gg: &GainGraph, m: &OrbitMatrix) -> String {
    let mut header = vec!["edge".to_string()];
    for b in &m.blocks {
        for k in 0..b.width {
            header.push(format!("{}.{k}", gg.vertices[b.vertex].name));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for (r, &e) in m.rows.iter().enumerate() {
        let mut cells = vec![gg.edges[e].name.clone()];
        cells.extend(m.matrix.row(r).iter().map(|x| format!("{x:?}")));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
