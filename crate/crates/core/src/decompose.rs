//! S-Assur decompositions: strongly connected components of an S-directed
//! orientation, the block graph over the ground, block-triangular verification,
//! and lifting/projecting between quotient and covering graphs.

use std::collections::{BTreeSet, HashMap};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphs::{cover, quotient, CoveringGraph, EId, GainGraph, Kind, VId};
use crate::group::{Elem, Symmetry, IDENTITY};
use crate::orbit::{self, Configuration, OrbitMatrix};
use crate::orient::{s_directed_orientation, verify_orientation, Orientation};

const BLOCK_TOL: f64 = 1e-12;

/// Strongly connected components of a digraph given by adjacency lists, computed
/// with an explicit stack. Components are numbered in the order they complete,
/// so every edge goes from a higher or equal number to a lower or equal one.
pub fn strong_components(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_comp = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }
    comp
}

/// Node of the block graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Block {
    Component(usize),
    Ground,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    /// Lexicographically smallest member vertex id.
    pub name: String,
    pub vertices: Vec<VId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssurDecomposition {
    /// Components listed bottom first; this order is a linear extension.
    pub components: Vec<Component>,
    /// Component of each inner vertex; `None` for pins.
    pub component_of: Vec<Option<usize>>,
    /// Deduplicated edges of the block graph, from upper to lower.
    pub block_edges: Vec<(Block, Block)>,
    pub linear_extension: Vec<usize>,
    /// Component owning each edge (the component of its tail).
    pub edge_owner: Vec<usize>,
}

impl AssurDecomposition {
    /// Assemble a decomposition from a vertex labelling and the owner of each edge.
    /// Labels are arbitrary; components are renamed and sorted bottom first.
    pub fn from_labels(gg: &GainGraph, label: &[Option<usize>], owner_vertex: &[VId]) -> Result<AssurDecomposition> {
        let mut groups: HashMap<usize, Vec<VId>> = HashMap::new();
        for v in gg.inner() {
            let l = label[v].ok_or_else(|| Error::InvalidGraph("inner vertex without component".into()))?;
            groups.entry(l).or_default().push(v);
        }
        let mut comps: Vec<Vec<VId>> = groups.into_values().collect();
        let name = |c: &Vec<VId>| c.iter().map(|&v| gg.vertices[v].name.clone()).min().unwrap();
        comps.sort_by_key(name);
        let mut idx = vec![None; gg.vertices.len()];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                idx[v] = Some(i);
            }
        }
        let node = |v: VId| idx[v].map_or(Block::Ground, Block::Component);
        let mut succ: Vec<BTreeSet<Block>> = vec![BTreeSet::new(); comps.len()];
        for (e, &t) in owner_vertex.iter().enumerate() {
            let edge = &gg.edges[e];
            let h = if edge.tail == t { edge.head } else { edge.tail };
            let (a, b) = (node(t), node(h));
            if a != b {
                if let Block::Component(i) = a {
                    succ[i].insert(b);
                } else {
                    return Err(Error::InvalidGraph(format!("edge `{}` leaves the ground", edge.name)));
                }
            }
        }
        // bottom first: repeatedly take the smallest-named component whose successors are placed
        let mut placed = vec![false; comps.len()];
        let mut order = Vec::new();
        while order.len() < comps.len() {
            let next = (0..comps.len()).find(|&i| {
                !placed[i]
                    && succ[i].iter().all(|b| match b {
                        Block::Ground => true,
                        Block::Component(j) => placed[*j],
                    })
            });
            match next {
                Some(i) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => return Err(Error::InvalidGraph("block graph has a cycle".into())),
            }
        }
        let mut pos = vec![0; comps.len()];
        for (k, &i) in order.iter().enumerate() {
            pos[i] = k;
        }
        let components: Vec<Component> =
            order.iter().map(|&i| Component { name: name(&comps[i]), vertices: comps[i].clone() }).collect();
        let remap = |b: &Block| match b {
            Block::Component(i) => Block::Component(pos[*i]),
            Block::Ground => Block::Ground,
        };
        let mut block_edges: Vec<(Block, Block)> = succ
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |b| (Block::Component(i), *b)).collect::<Vec<_>>())
            .map(|(a, b)| (remap(&a), remap(&b)))
            .collect();
        block_edges.sort();
        let component_of = idx.iter().map(|c| c.map(|i| pos[i])).collect();
        let edge_owner =
            owner_vertex.iter().map(|&t| pos[idx[t].expect("edges are owned by inner vertices")]).collect();
        Ok(AssurDecomposition {
            linear_extension: (0..components.len()).collect(),
            components,
            component_of,
            block_edges,
            edge_owner,
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Partition as sorted lists of vertex names, for comparisons.
    pub fn partition(&self, gg: &GainGraph) -> Vec<Vec<String>> {
        let mut p: Vec<Vec<String>> = self
            .components
            .iter()
            .map(|c| {
                let mut names: Vec<String> = c.vertices.iter().map(|&v| gg.vertices[v].name.clone()).collect();
                names.sort();
                names
            })
            .collect();
        p.sort();
        p
    }

    /// `reach[i][j]`: component i lies above component j (a path from i to j exists).
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        let k = self.components.len();
        let mut r = vec![vec![false; k]; k];
        for &(a, b) in &self.block_edges {
            if let (Block::Component(i), Block::Component(j)) = (a, b) {
                r[i][j] = true;
            }
        }
        for m in 0..k {
            for i in 0..k {
                if r[i][m] {
                    for j in 0..k {
                        if r[m][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    /// Reachability between components keyed by component names.
    pub fn order_relation(&self) -> BTreeSet<(String, String)> {
        let r = self.reachability();
        let mut out = BTreeSet::new();
        for (i, row) in r.iter().enumerate() {
            for (j, &above) in row.iter().enumerate() {
                if above {
                    out.insert((self.components[i].name.clone(), self.components[j].name.clone()));
                }
            }
        }
        out
    }
}

/// Components of an oriented gain graph with all pins condensed to the ground.
pub fn scc_decomposition(gg: &GainGraph, o: &Orientation) -> Result<AssurDecomposition> {
    let n = gg.vertices.len();
    let ground = n;
    let node = |v: VId| if gg.is_pin(v) { ground } else { v };
    let mut adj = vec![Vec::new(); n + 1];
    for e in 0..gg.edges.len() {
        if gg.is_pin(o.tail(gg, e)) {
            return Err(Error::InvalidGraph(format!("edge `{}` leaves a pin", gg.edges[e].name)));
        }
        let (t, h) = (node(o.tail(gg, e)), node(o.head(gg, e)));
        if t != h {
            adj[t].push(h);
        }
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let comp = strong_components(&adj);
    let label: Vec<Option<usize>> = (0..n).map(|v| if gg.is_pin(v) { None } else { Some(comp[v]) }).collect();
    if gg.inner().iter().any(|&v| comp[v] == comp[ground]) {
        return Err(Error::InvalidGraph("an inner vertex is strongly connected to the ground".into()));
    }
    let owners: Vec<VId> = (0..gg.edges.len()).map(|e| o.tail(gg, e)).collect();
    AssurDecomposition::from_labels(gg, &label, &owners)
}

/// Orient with the pebble game and decompose.
pub fn decompose(gg: &GainGraph, sym: &Symmetry) -> Result<(Orientation, AssurDecomposition)> {
    let caps = gg.columns(sym)?;
    let o = s_directed_orientation(gg, &caps)?;
    debug_assert!(verify_orientation(gg, &caps, &o));
    let dec = scc_decomposition(gg, &o)?;
    Ok((o, dec))
}

#[derive(Clone, Debug)]
pub struct BlockTriangular {
    pub matrix: DMatrix<f64>,
    /// Original row index per permuted row.
    pub row_order: Vec<usize>,
    /// Original column index per permuted column.
    pub col_order: Vec<usize>,
    /// (rows, cols) of each diagonal block, bottom component first.
    pub block_sizes: Vec<(usize, usize)>,
    /// Largest magnitude strictly above the block diagonal.
    pub max_upper: f64,
}

/// Permute the orbit matrix along the decomposition (bottom component upper-left)
/// and verify that every entry above the block diagonal vanishes.
pub fn block_triangular_form(m: &OrbitMatrix, dec: &AssurDecomposition) -> Result<BlockTriangular> {
    let k = dec.components.len();
    let mut col_order = Vec::new();
    let mut col_block = Vec::new();
    let mut row_order = Vec::new();
    let mut row_block = Vec::new();
    let mut sizes = Vec::new();
    for c in 0..k {
        let mut cols = 0;
        let mut verts = dec.components[c].vertices.clone();
        verts.sort_unstable();
        for v in verts {
            if let Some(b) = m.block_of(v) {
                for j in b.start..b.start + b.width {
                    col_order.push(j);
                    col_block.push(c);
                }
                cols += b.width;
            }
        }
        let mut rows = 0;
        for (r, &e) in m.rows.iter().enumerate() {
            if dec.edge_owner[e] == c {
                row_order.push(r);
                row_block.push(c);
                rows += 1;
            }
        }
        sizes.push((rows, cols));
    }
    let p = DMatrix::from_fn(row_order.len(), col_order.len(), |i, j| m.matrix[(row_order[i], col_order[j])]);
    let mut max_upper: f64 = 0.0;
    let mut offending = None;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            if col_block[j] > row_block[i] {
                let x = p[(i, j)].abs();
                if x > max_upper {
                    max_upper = x;
                }
                if x >= BLOCK_TOL && offending.is_none() {
                    offending = Some((i, j, p[(i, j)]));
                }
            }
        }
    }
    if let Some((row, col, value)) = offending {
        return Err(Error::VerificationFailed { row, col, value });
    }
    if let Some((b, &(rows, cols))) = sizes.iter().enumerate().find(|(_, (r, c))| r != c) {
        return Err(Error::NonSquareBlock { block: b, rows, cols });
    }
    Ok(BlockTriangular { matrix: p, row_order, col_order, block_sizes: sizes, max_upper })
}

/// Options for sampled numerical checks.
#[derive(Clone, Copy, Debug)]
pub struct Sampling {
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for Sampling {
    fn default() -> Sampling {
        Sampling { trials: orbit::DEFAULT_TRIALS, seed: 0, tol: orbit::DEFAULT_TOL }
    }
}

/// A pinned S-isostatic gain graph is S-Assur iff it decomposes into one component.
pub fn is_s_assur(gg: &GainGraph, sym: &Symmetry, s: Sampling) -> Result<bool> {
    if !orbit::is_pinned_s_isostatic(gg, sym, s.trials, s.seed, s.tol)?.isostatic {
        return Err(Error::NotIsostatic);
    }
    Ok(decompose(gg, sym)?.1.len() == 1)
}

/// A component with its outgoing edges; heads outside the component become pins.
/// Also returns the original vertex id of every vertex in the new graph.
pub fn extended_component(
    gg: &GainGraph,
    sym: &Symmetry,
    o: &Orientation,
    dec: &AssurDecomposition,
    c: usize,
) -> Result<(GainGraph, Vec<VId>)> {
    let mut out = GainGraph::new();
    let mut map = HashMap::new();
    let mut origin = Vec::new();
    let mut members = dec.components[c].vertices.clone();
    members.sort_unstable();
    for &v in &members {
        let vert = &gg.vertices[v];
        map.insert(v, out.add_vertex(&vert.name, Kind::Inner, &vert.stabilizer)?);
        origin.push(v);
    }
    for e in 0..gg.edges.len() {
        if dec.edge_owner[e] != c {
            continue;
        }
        let h = o.head(gg, e);
        if let std::collections::hash_map::Entry::Vacant(slot) = map.entry(h) {
            let vert = &gg.vertices[h];
            slot.insert(out.add_vertex(&vert.name, Kind::Pin, &vert.stabilizer)?);
            origin.push(h);
        }
    }
    for e in 0..gg.edges.len() {
        if dec.edge_owner[e] == c {
            let edge = &gg.edges[e];
            out.add_edge(&sym.grp, &edge.name, map[&edge.tail], map[&edge.head], edge.gain)?;
        }
    }
    Ok((out, origin))
}

/// Restrict a configuration to the vertices listed in `origin`.
pub fn restrict_configuration(cfg: &Configuration, origin: &[VId]) -> Configuration {
    Configuration { positions: origin.iter().map(|&v| cfg.positions[v].clone()).collect() }
}

/// Decomposition of the covering graph obtained by lifting an S-directed orientation.
#[derive(Clone, Debug)]
pub struct LiftedDecomposition {
    pub cover: CoveringGraph,
    /// Tail of each covering edge under the lifted orientation.
    pub cover_tails: Vec<usize>,
    /// Covering component of each covering vertex; `None` for pins.
    pub cover_component: Vec<Option<usize>>,
    pub cover_components: Vec<Vec<usize>>,
    /// Quotient component under each covering component.
    pub parent: Vec<usize>,
    /// |S| / |gain subgroup| for each quotient component: the predicted number of lifts.
    pub predicted: Vec<usize>,
}

fn require_free(gg: &GainGraph, sym: &Symmetry) -> Result<()> {
    if let Some(v) = gg.vertices.iter().find(|v| v.stabilizer.len() > 1) {
        return Err(Error::ActionNotFree(format!("vertex `{}` has a nontrivial stabilizer", v.name)));
    }
    if let Some(e) = gg.edges.iter().find(|e| e.is_loop() && sym.grp.mul(e.gain, e.gain) == IDENTITY) {
        return Err(Error::ActionNotFree(format!("loop `{}` has an involution gain", e.name)));
    }
    Ok(())
}

pub fn lift_decomposition(
    gg: &GainGraph,
    sym: &Symmetry,
    o: &Orientation,
    dec: &AssurDecomposition,
) -> Result<LiftedDecomposition> {
    require_free(gg, sym)?;
    let cg = cover(gg, &sym.grp)?;
    let n = cg.graph.names.len();
    let ground = n;
    let mut adj = vec![Vec::new(); n + 1];
    let mut cover_tails = Vec::with_capacity(cg.graph.edges.len());
    for (i, &(a, b)) in cg.graph.edges.iter().enumerate() {
        let e = cg.edge_label[i].0;
        let (t, h) = if o.forward[e] { (a, b) } else { (b, a) };
        cover_tails.push(t);
        let node = |v: usize| if cg.graph.kinds[v] == Kind::Pin { ground } else { v };
        adj[node(t)].push(node(h));
    }
    for a in adj.iter_mut() {
        a.sort_unstable();
        a.dedup();
    }
    let comp = strong_components(&adj);
    let mut ids: Vec<usize> = (0..n).filter(|&v| cg.graph.kinds[v] == Kind::Inner).map(|v| comp[v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut cover_components: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut cover_component = vec![None; n];
    for v in 0..n {
        if cg.graph.kinds[v] == Kind::Inner {
            let k = ids.binary_search(&comp[v]).unwrap();
            cover_components[k].push(v);
            cover_component[v] = Some(k);
        }
    }
    let mut parent = Vec::new();
    for members in &cover_components {
        let qs: BTreeSet<usize> = members.iter().map(|&v| dec.component_of[cg.vertex_label[v].0].unwrap()).collect();
        if qs.len() != 1 {
            return Err(Error::InvalidGraph("a lifted component spans several quotient components".into()));
        }
        parent.push(*qs.iter().next().unwrap());
    }
    let predicted = (0..dec.len())
        .map(|c| {
            let internal: Vec<EId> = (0..gg.edges.len())
                .filter(|&e| {
                    let edge = &gg.edges[e];
                    dec.component_of[edge.tail] == Some(c) && dec.component_of[edge.head] == Some(c)
                })
                .collect();
            sym.order() / crate::graphs::gain_subgroup(gg, &sym.grp, &internal).len()
        })
        .collect();
    Ok(LiftedDecomposition { cover: cg, cover_tails, cover_component, cover_components, parent, predicted })
}

/// Project a covering decomposition to the quotient: orbits of covering components
/// become quotient components and each quotient edge takes the direction of its
/// reference lift.
pub fn project_decomposition(gg: &GainGraph, lifted: &LiftedDecomposition) -> Result<AssurDecomposition> {
    let cg = &lifted.cover;
    let mut label = vec![None; gg.vertices.len()];
    for (v, c) in lifted.cover_component.iter().enumerate() {
        if let Some(c) = c {
            let q = cg.vertex_label[v].0;
            // label each orbit by the smallest covering component over it
            label[q] = Some(label[q].map_or(*c, |l: usize| l.min(*c)));
        }
    }
    // orbits whose lifts fall into different covering components of the same orbit class merge
    let mut union: Vec<usize> = (0..lifted.cover_components.len()).collect();
    fn find(u: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while u[r] != r {
            r = u[r];
        }
        u[x] = r;
        r
    }
    for (v, c) in lifted.cover_component.iter().enumerate() {
        if let (Some(c), Some(l)) = (c, label[cg.vertex_label[v].0]) {
            let (a, b) = (find(&mut union, *c), find(&mut union, l));
            union[a.max(b)] = a.min(b);
        }
    }
    let label: Vec<Option<usize>> = label.iter().map(|l| l.map(|x| find(&mut union, x))).collect();
    let mut owners = vec![usize::MAX; gg.edges.len()];
    for (i, &(e, x)) in cg.edge_label.iter().enumerate() {
        if x == IDENTITY || owners[e] == usize::MAX {
            owners[e] = cg.vertex_label[lifted.cover_tails[i]].0;
        }
    }
    AssurDecomposition::from_labels(gg, &label, &owners)
}

/// Decomposition under a subgroup R of S.
#[derive(Clone, Debug)]
pub struct SubgroupDecomposition {
    pub sym: Symmetry,
    /// Parent element of each subgroup element.
    pub elements: Vec<Elem>,
    pub gain_graph: GainGraph,
    pub orientation: Orientation,
    pub decomposition: AssurDecomposition,
    /// S-component under each R-component.
    pub projection: Vec<usize>,
    pub parent_decomposition: AssurDecomposition,
}

pub fn subgroup_decomposition(gg: &GainGraph, sym: &Symmetry, subgroup: &[Elem]) -> Result<SubgroupDecomposition> {
    let (sub, elements) = sym.subgroup(subgroup)?;
    let cg = cover(gg, &sym.grp)?;
    let full = cg.action(&sym.grp);
    let action: Vec<Vec<usize>> = elements.iter().map(|&x| full[x].clone()).collect();
    let rg = quotient(&cg.graph, &sub.grp, &action)?;
    let (orientation, decomposition) = decompose(&rg, &sub)?;
    let (_, parent_decomposition) = decompose(gg, sym)?;
    let mut projection = Vec::new();
    for c in &decomposition.components {
        let qs: BTreeSet<usize> = c
            .vertices
            .iter()
            .map(|&v| {
                let cv = cg.graph.names.iter().position(|n| *n == rg.vertices[v].name).unwrap();
                parent_decomposition.component_of[cg.vertex_label[cv].0].unwrap()
            })
            .collect();
        if qs.len() != 1 {
            return Err(Error::InvalidGraph("a subgroup component spans several components".into()));
        }
        projection.push(*qs.iter().next().unwrap());
    }
    Ok(SubgroupDecomposition {
        sym: sub,
        elements,
        gain_graph: rg,
        orientation,
        decomposition,
        projection,
        parent_decomposition,
    })
}
