//! Inductive constructions on gain graphs and the effect of a 1-extension on the
//! S-Assur decomposition.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decompose::{decompose, AssurDecomposition};
use crate::error::{Error, Result};
use crate::graphs::{EId, GainGraph, Kind, VId};
use crate::group::{Elem, Group, Symmetry};
use crate::orient::Orientation;

/// A 0-, 1- or loop-1-extension. Gains are element names; new edges point
/// from the new vertex to each target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtensionSpec {
    Zero {
        vertex: String,
        targets: Vec<String>,
        gains: Vec<String>,
    },
    One {
        vertex: String,
        /// Edge to subdivide.
        edge: String,
        /// [γ1, γ2] with γ1·γ2 equal to the gain of `edge`.
        split_gains: [String; 2],
        targets: Vec<String>,
        gains: Vec<String>,
    },
    LoopOne {
        vertex: String,
        loop_gain: String,
        targets: Vec<String>,
        gains: Vec<String>,
    },
}

impl ExtensionSpec {
    pub fn vertex(&self) -> &str {
        match self {
            ExtensionSpec::Zero { vertex, .. }
            | ExtensionSpec::One { vertex, .. }
            | ExtensionSpec::LoopOne { vertex, .. } => vertex,
        }
    }

    fn extra(&self) -> (&[String], &[String]) {
        match self {
            ExtensionSpec::Zero { targets, gains, .. }
            | ExtensionSpec::One { targets, gains, .. }
            | ExtensionSpec::LoopOne { targets, gains, .. } => (targets, gains),
        }
    }
}

fn gain_violation(msg: impl Into<String>) -> Error {
    Error::GainViolation(msg.into())
}

fn lookup(gg: &GainGraph, name: &str) -> Result<VId> {
    gg.vertex(name).ok_or_else(|| Error::InvalidGraph(format!("unknown vertex `{name}`")))
}

/// New non-loop edges as (target, gain), all with the new vertex as tail.
fn new_edges(gg: &GainGraph, grp: &Group, spec: &ExtensionSpec) -> Result<Vec<(VId, Elem)>> {
    let (targets, gains) = spec.extra();
    if targets.len() != gains.len() {
        return Err(gain_violation("one gain per target expected"));
    }
    let mut out = Vec::new();
    if let ExtensionSpec::One { edge, split_gains, .. } = spec {
        let e = gg.edge(edge).ok_or_else(|| Error::InvalidGraph(format!("unknown edge `{edge}`")))?;
        let (g1, g2) = (grp.element(&split_gains[0])?, grp.element(&split_gains[1])?);
        let old = &gg.edges[e];
        if grp.mul(g1, g2) != old.gain {
            return Err(gain_violation(format!(
                "{}·{} differs from the gain {} of `{edge}`",
                grp.name(g1),
                grp.name(g2),
                grp.name(old.gain)
            )));
        }
        // tail --g1--> v --g2--> head, stored with the new vertex as tail
        out.push((old.tail, grp.inv(g1)));
        out.push((old.head, g2));
    }
    for (t, g) in targets.iter().zip(gains) {
        out.push((lookup(gg, t)?, grp.element(g)?));
    }
    Ok(out)
}

fn expected_degree(spec: &ExtensionSpec, d: usize) -> usize {
    match spec {
        ExtensionSpec::Zero { .. } => d,
        ExtensionSpec::One { .. } => d + 1,
        ExtensionSpec::LoopOne { .. } => d - 1,
    }
}

/// Apply an extension, returning the new graph and the id of the new vertex.
pub fn apply_extension(gg: &GainGraph, sym: &Symmetry, spec: &ExtensionSpec) -> Result<(GainGraph, VId)> {
    let grp = &sym.grp;
    let edges = new_edges(gg, grp, spec)?;
    if edges.len() != expected_degree(spec, sym.dim()) {
        return Err(gain_violation(format!(
            "the new vertex needs {} non-loop edges in dimension {}",
            expected_degree(spec, sym.dim()),
            sym.dim()
        )));
    }
    for (i, &(a, ga)) in edges.iter().enumerate() {
        for &(b, gb) in &edges[i + 1..] {
            if a == b && gg.vertices[a].stabilizer.contains(&grp.mul(grp.inv(ga), gb)) {
                return Err(gain_violation(format!(
                    "parallel new edges to `{}` form a balanced 2-cycle",
                    gg.vertices[a].name
                )));
            }
        }
    }
    let mut out = GainGraph::new();
    for v in &gg.vertices {
        out.add_vertex(&v.name, v.kind, &v.stabilizer)?;
    }
    let removed: Option<EId> = match spec {
        ExtensionSpec::One { edge, .. } => gg.edge(edge),
        _ => None,
    };
    for (i, e) in gg.edges.iter().enumerate() {
        if Some(i) != removed {
            out.add_edge(grp, &e.name, e.tail, e.head, e.gain)?;
        }
    }
    let name = spec.vertex();
    let v = out.add_vertex(name, Kind::Inner, &[crate::group::IDENTITY])?;
    let mut k = 0;
    let mut next_name = |out: &GainGraph| loop {
        k += 1;
        let n = format!("{name}_{k}");
        if out.edge(&n).is_none() {
            return n;
        }
    };
    if let ExtensionSpec::LoopOne { loop_gain, .. } = spec {
        let g = grp.element(loop_gain)?;
        if g == crate::group::IDENTITY {
            return Err(gain_violation("loop gain must differ from the identity"));
        }
        let n = next_name(&out);
        out.add_edge(grp, &n, v, v, g)?;
    }
    for (t, g) in edges {
        let n = next_name(&out);
        out.add_edge(grp, &n, v, t, g)?;
    }
    Ok((out, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effect {
    Preserved,
    NewSingleton,
    Merged,
    IncomparableMadeComparable,
    Unclassified,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    /// Case label such as "b-ii", one per third-edge target.
    pub cases: Vec<String>,
    pub predicted: Effect,
    pub observed: Effect,
    /// Set when the action is not free or the dimension is not 2.
    pub heuristic: bool,
}

impl Classification {
    pub fn agrees(&self) -> bool {
        self.predicted == self.observed
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Relation {
    Same,
    Above,
    Below,
    Incomparable,
}

/// Component (None = ground) of a vertex.
fn block(dec: &AssurDecomposition, v: VId) -> Option<usize> {
    dec.component_of[v]
}

fn relation(reach: &[Vec<bool>], k: usize, w: Option<usize>) -> Relation {
    match w {
        None => Relation::Below,
        Some(i) if i == k => Relation::Same,
        Some(i) if reach[k][i] => Relation::Below,
        Some(i) if reach[i][k] => Relation::Above,
        Some(_) => Relation::Incomparable,
    }
}

/// Expected effect from the case analysis of a 1-extension deleting x→y (x the
/// current tail) with third edges to `ws`.
fn predict(gg: &GainGraph, dec: &AssurDecomposition, o: &Orientation, e: EId, ws: &[VId]) -> (Vec<String>, Effect) {
    let reach = dec.reachability();
    let (x, y) = (o.tail(gg, e), o.head(gg, e));
    let k = block(dec, x).expect("edges leave inner vertices");
    let j = block(dec, y);
    let same = j == Some(k);
    let rels: Vec<Relation> = ws.iter().map(|&w| relation(&reach, k, block(dec, w))).collect();
    let cases = ws
        .iter()
        .zip(&rels)
        .map(|(&w, r)| {
            let sub = if same {
                match r {
                    Relation::Same => "i",
                    Relation::Above => "ii",
                    Relation::Below => "iii",
                    Relation::Incomparable => "iv",
                }
            } else {
                match r {
                    Relation::Same => "i",
                    _ if block(dec, w) == j => "ii",
                    Relation::Below => "iii",
                    Relation::Above => "iv",
                    Relation::Incomparable => "v",
                }
            };
            format!("{}-{}", if same { "a" } else { "b" }, sub)
        })
        .collect();
    let any = |r: Relation| rels.contains(&r);
    let effect = if any(Relation::Above) {
        Effect::Merged
    } else if same || any(Relation::Same) {
        if any(Relation::Incomparable) {
            Effect::IncomparableMadeComparable
        } else {
            Effect::Preserved
        }
    } else {
        Effect::NewSingleton
    };
    (cases, effect)
}

/// Compare decompositions before and after a 1-extension adding vertex `v`.
pub fn observed_effect(
    old: &GainGraph,
    before: &AssurDecomposition,
    new: &GainGraph,
    after: &AssurDecomposition,
    v: VId,
) -> Effect {
    // new component of each old component, if all its vertices stayed together
    let mut image = Vec::new();
    for c in &before.components {
        let targets: BTreeSet<usize> = c
            .vertices
            .iter()
            .map(|&u| after.component_of[new.vertex(&old.vertices[u].name).unwrap()].unwrap())
            .collect();
        if targets.len() != 1 {
            return Effect::Unclassified;
        }
        image.push(*targets.iter().next().unwrap());
    }
    let vc = after.component_of[v].unwrap();
    let distinct: BTreeSet<usize> = image.iter().copied().collect();
    if distinct.len() < image.len() {
        return Effect::Merged;
    }
    if !image.contains(&vc) {
        return if after.components[vc].vertices.len() == 1 { Effect::NewSingleton } else { Effect::Unclassified };
    }
    let (r0, r1) = (before.reachability(), after.reachability());
    let n = image.len();
    let same_order = (0..n).all(|a| (0..n).all(|b| r0[a][b] == r1[image[a]][image[b]]));
    if same_order {
        Effect::Preserved
    } else {
        Effect::IncomparableMadeComparable
    }
}

/// Predict the effect of a 1-extension from the case analysis and check it
/// against a fresh decomposition of the extended graph.
pub fn classify_one_extension(
    gg: &GainGraph,
    sym: &Symmetry,
    o: &Orientation,
    dec: &AssurDecomposition,
    spec: &ExtensionSpec,
) -> Result<(Classification, GainGraph)> {
    let ExtensionSpec::One { edge, targets, .. } = spec else {
        return Err(gain_violation("classification applies to 1-extensions"));
    };
    let e = gg.edge(edge).ok_or_else(|| Error::InvalidGraph(format!("unknown edge `{edge}`")))?;
    let ws: Vec<VId> = targets.iter().map(|t| lookup(gg, t)).collect::<Result<_>>()?;
    let (new, v) = apply_extension(gg, sym, spec)?;
    let (cases, predicted) = predict(gg, dec, o, e, &ws);
    let (_, after) = decompose(&new, sym)?;
    let observed = observed_effect(gg, dec, &new, &after, v);
    let heuristic = sym.dim() != 2 || !gg.is_free();
    Ok((Classification { cases, predicted, observed, heuristic }, new))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupSpec, Schoenflies};

    fn c3() -> Symmetry {
        Symmetry::new(&GroupSpec { schoenflies: Schoenflies::Cn, n: 3, axis: None, normal: None }, 2).unwrap()
    }

    fn base(sym: &Symmetry) -> GainGraph {
        let mut gg = GainGraph::new();
        let a = gg.add_inner("a").unwrap();
        let p = gg.add_pin("p").unwrap();
        gg.add_edge(&sym.grp, "e1", a, p, 0).unwrap();
        gg.add_edge(&sym.grp, "e2", a, p, 1).unwrap();
        gg
    }

    fn s(x: &str) -> String {
        x.to_string()
    }

    #[test]
    fn zero_extension_adds_vertex_and_edges() {
        let sym = c3();
        let gg = base(&sym);
        let spec = ExtensionSpec::Zero { vertex: s("b"), targets: vec![s("a"), s("p")], gains: vec![s("id"), s("r1")] };
        let (out, v) = apply_extension(&gg, &sym, &spec).unwrap();
        assert_eq!(out.edges.len(), 4);
        assert_eq!(out.inner().len(), 2);
        assert_eq!(out.vertices[v].name, "b");
    }

    #[test]
    fn equal_parallel_gains_are_rejected() {
        let sym = c3();
        let gg = base(&sym);
        let spec = ExtensionSpec::Zero { vertex: s("b"), targets: vec![s("a"), s("a")], gains: vec![s("r1"), s("r1")] };
        assert!(matches!(apply_extension(&gg, &sym, &spec), Err(Error::GainViolation(_))));
    }

    #[test]
    fn split_gains_must_multiply_to_old_gain() {
        let sym = c3();
        let gg = base(&sym);
        let bad = ExtensionSpec::One {
            vertex: s("b"),
            edge: s("e2"),
            split_gains: [s("r1"), s("r1")],
            targets: vec![s("a")],
            gains: vec![s("r2")],
        };
        assert!(matches!(apply_extension(&gg, &sym, &bad), Err(Error::GainViolation(_))));
        let balanced = ExtensionSpec::One {
            vertex: s("b"),
            edge: s("e2"),
            split_gains: [s("r2"), s("r2")],
            targets: vec![s("a")],
            gains: vec![s("r1")],
        };
        // b→a with gain r2⁻¹ = r1 parallels the new third edge
        assert!(matches!(apply_extension(&gg, &sym, &balanced), Err(Error::GainViolation(_))));
    }

    #[test]
    fn identity_loop_is_rejected() {
        let sym = c3();
        let gg = base(&sym);
        let spec =
            ExtensionSpec::LoopOne { vertex: s("b"), loop_gain: s("id"), targets: vec![s("a")], gains: vec![s("id")] };
        assert!(matches!(apply_extension(&gg, &sym, &spec), Err(Error::GainViolation(_))));
    }
}
