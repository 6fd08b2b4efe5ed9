//! Quotient gain graphs, covering graphs, balance, and gain-sparsity counts.

use std::collections::HashMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{symmetric_trivial_motions, velocity_map_nullity, Elem, Group, Symmetry, IDENTITY};

pub type VId = usize;
pub type EId = usize;

/// Default bound on the number of edges for exhaustive subset enumeration.
pub const EXHAUSTIVE_BOUND: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Inner,
    Pin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub kind: Kind,
    /// Sorted, always contains the identity.
    pub stabilizer: Vec<Elem>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub name: String,
    pub tail: VId,
    pub head: VId,
    pub gain: Elem,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GainGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl GainGraph {
    pub fn new() -> GainGraph {
        GainGraph::default()
    }

    pub fn add_vertex(&mut self, name: &str, kind: Kind, stabilizer: &[Elem]) -> Result<VId> {
        if self.vertex(name).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate vertex id `{name}`")));
        }
        let mut stab = stabilizer.to_vec();
        stab.push(IDENTITY);
        stab.sort_unstable();
        stab.dedup();
        self.vertices.push(Vertex { name: name.to_string(), kind, stabilizer: stab });
        Ok(self.vertices.len() - 1)
    }

    pub fn add_inner(&mut self, name: &str) -> Result<VId> {
        self.add_vertex(name, Kind::Inner, &[])
    }

    pub fn add_pin(&mut self, name: &str) -> Result<VId> {
        self.add_vertex(name, Kind::Pin, &[])
    }

    pub fn add_edge(&mut self, grp: &Group, name: &str, tail: VId, head: VId, gain: Elem) -> Result<EId> {
        if self.edge(name).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate edge id `{name}`")));
        }
        if tail >= self.vertices.len() || head >= self.vertices.len() || gain >= grp.order() {
            return Err(Error::InvalidGraph(format!("edge `{name}` references a missing vertex or element")));
        }
        if self.is_pin(tail) && self.is_pin(head) {
            return Err(Error::InvalidGraph(format!("edge `{name}` joins two pins")));
        }
        if tail == head {
            if gain == IDENTITY {
                return Err(Error::InvalidGraph(format!("loop `{name}` has identity gain")));
            }
            if self.vertices[tail].stabilizer.contains(&gain) {
                return Err(Error::DegenerateLoop(name.to_string()));
            }
        }
        self.edges.push(Edge { name: name.to_string(), tail, head, gain });
        Ok(self.edges.len() - 1)
    }

    pub fn vertex(&self, name: &str) -> Option<VId> {
        self.vertices.iter().position(|v| v.name == name)
    }

    pub fn edge(&self, name: &str) -> Option<EId> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn is_pin(&self, v: VId) -> bool {
        self.vertices[v].kind == Kind::Pin
    }

    pub fn inner(&self) -> Vec<VId> {
        (0..self.vertices.len()).filter(|&v| !self.is_pin(v)).collect()
    }

    pub fn pins(&self) -> Vec<VId> {
        (0..self.vertices.len()).filter(|&v| self.is_pin(v)).collect()
    }

    pub fn is_free(&self) -> bool {
        self.vertices.iter().all(|v| v.stabilizer.len() == 1)
    }

    /// Column count m(v) per vertex; 0 for pins.
    pub fn columns(&self, sym: &Symmetry) -> Result<Vec<usize>> {
        self.vertices
            .iter()
            .map(|v| match v.kind {
                Kind::Pin => Ok(0),
                Kind::Inner => Ok(sym.fixed(&v.stabilizer)?.dim()),
            })
            .collect()
    }

    /// Check that every stabilizer is a subgroup.
    pub fn check_stabilizers(&self, grp: &Group) -> Result<()> {
        for v in &self.vertices {
            if !grp.is_subgroup(&v.stabilizer) {
                return Err(Error::NotSubgroup(format!("stabilizer of `{}`", v.name)));
            }
        }
        Ok(())
    }

    /// Smallest element of the double coset H_t g H_h.
    pub fn canonical_gain(&self, grp: &Group, tail: VId, head: VId, g: Elem) -> Elem {
        let ht = &self.vertices[tail].stabilizer;
        let hh = &self.vertices[head].stabilizer;
        let mut best = g;
        for &a in ht {
            for &b in hh {
                best = best.min(grp.mul(grp.mul(a, g), b));
            }
        }
        best
    }

    /// Edges in a canonical form: (low endpoint, high endpoint, gain), sorted by
    /// vertex names then gain name. Reversing an edge inverts its gain.
    pub fn canonical_edges(&self, grp: &Group) -> Vec<(String, String, String)> {
        let mut out: Vec<(String, String, String)> = self
            .edges
            .iter()
            .map(|e| {
                let (mut t, mut h, mut g) = (e.tail, e.head, e.gain);
                if self.vertices[t].name > self.vertices[h].name {
                    std::mem::swap(&mut t, &mut h);
                    g = grp.inv(g);
                }
                let mut c = self.canonical_gain(grp, t, h, g);
                if t == h {
                    c = c.min(self.canonical_gain(grp, t, h, grp.inv(g)));
                }
                (self.vertices[t].name.clone(), self.vertices[h].name.clone(), grp.name(c).to_string())
            })
            .collect();
        out.sort();
        out
    }
}

/// Whether two gain graphs on the same vertex names differ only by switching,
/// ψ'(e) = φ(tail)⁻¹ ψ(e) φ(head). Assumes free vertices.
pub fn switching_equivalent(a: &GainGraph, b: &GainGraph, grp: &Group) -> bool {
    if a.vertices.len() != b.vertices.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let mut map = vec![0; a.vertices.len()];
    for (i, v) in a.vertices.iter().enumerate() {
        match b.vertex(&v.name) {
            Some(j) if b.vertices[j].kind == v.kind => map[i] = j,
            _ => return false,
        }
    }
    // multiset of gains per ordered vertex pair in b, keyed by a-indices
    let key = |t: VId, h: VId, g: Elem| if t <= h { (t, h, g) } else { (h, t, grp.inv(g)) };
    let mut target: HashMap<(VId, VId), Vec<Elem>> = HashMap::new();
    let inv_map: HashMap<VId, VId> = map.iter().enumerate().map(|(i, &j)| (j, i)).collect();
    for e in &b.edges {
        let (t, h, g) = key(inv_map[&e.tail], inv_map[&e.head], e.gain);
        target.entry((t, h)).or_default().push(g);
    }
    let mut source: HashMap<(VId, VId), Vec<Elem>> = HashMap::new();
    for e in &a.edges {
        let (t, h, g) = key(e.tail, e.head, e.gain);
        source.entry((t, h)).or_default().push(g);
    }
    if source.len() != target.len() || source.iter().any(|(k, v)| target.get(k).map(Vec::len) != Some(v.len())) {
        return false;
    }
    let n = a.vertices.len();
    let mut phi: Vec<Option<Elem>> = vec![None; n];
    fn consistent(
        grp: &Group,
        phi: &[Option<Elem>],
        source: &HashMap<(VId, VId), Vec<Elem>>,
        target: &HashMap<(VId, VId), Vec<Elem>>,
        v: VId,
    ) -> bool {
        for (&(t, h), gains) in source {
            if t != v && h != v {
                continue;
            }
            let (Some(pt), Some(ph)) = (phi[t], phi[h]) else { continue };
            let mut got: Vec<Elem> = gains
                .iter()
                .map(|&g| {
                    let x = grp.mul(grp.mul(grp.inv(pt), g), ph);
                    if t == h {
                        x.min(grp.inv(x))
                    } else {
                        x
                    }
                })
                .collect();
            let mut want: Vec<Elem> =
                target[&(t, h)].iter().map(|&g| if t == h { g.min(grp.inv(g)) } else { g }).collect();
            got.sort_unstable();
            want.sort_unstable();
            if got != want {
                return false;
            }
        }
        true
    }
    fn search(
        grp: &Group,
        phi: &mut Vec<Option<Elem>>,
        source: &HashMap<(VId, VId), Vec<Elem>>,
        target: &HashMap<(VId, VId), Vec<Elem>>,
        v: VId,
    ) -> bool {
        if v == phi.len() {
            return true;
        }
        for x in grp.elements() {
            phi[v] = Some(x);
            if consistent(grp, phi, source, target, v) && search(grp, phi, source, target, v + 1) {
                return true;
            }
        }
        phi[v] = None;
        false
    }
    search(grp, &mut phi, &source, &target, 0)
}

/// Undirected pinned multigraph, e.g. a covering graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PinnedGraph {
    pub names: Vec<String>,
    pub kinds: Vec<Kind>,
    pub edges: Vec<(usize, usize)>,
    pub edge_names: Vec<String>,
}

impl PinnedGraph {
    pub fn inner_count(&self) -> usize {
        self.kinds.iter().filter(|&&k| k == Kind::Inner).count()
    }

    /// The same graph as a gain graph over the identity group.
    pub fn as_gain_graph(&self, trivial: &Group) -> Result<GainGraph> {
        let mut gg = GainGraph::new();
        for (n, &k) in self.names.iter().zip(&self.kinds) {
            gg.add_vertex(n, k, &[])?;
        }
        for (&(a, b), n) in self.edges.iter().zip(&self.edge_names) {
            let (t, h) = if self.kinds[a] == Kind::Pin { (b, a) } else { (a, b) };
            gg.add_edge(trivial, n, t, h, IDENTITY)?;
        }
        Ok(gg)
    }
}

/// Covering graph of a gain graph together with its labelling by orbits.
#[derive(Clone, Debug)]
pub struct CoveringGraph {
    pub graph: PinnedGraph,
    /// (orbit, smallest element of the coset) per covering vertex.
    pub vertex_label: Vec<(VId, Elem)>,
    /// Quotient edge and the shift x with edge = x·(reference edge).
    pub edge_label: Vec<(EId, Elem)>,
    copy: HashMap<(VId, Elem), usize>,
}

impl CoveringGraph {
    /// Covering vertex (v, x H_v).
    pub fn copy(&self, v: VId, x: Elem) -> usize {
        self.copy[&(v, x)]
    }

    /// Permutation of covering vertices for each group element.
    pub fn action(&self, grp: &Group) -> Vec<Vec<usize>> {
        grp.elements().map(|x| self.vertex_label.iter().map(|&(v, c)| self.copy(v, grp.mul(x, c))).collect()).collect()
    }

    pub fn fiber(&self, v: VId) -> Vec<usize> {
        (0..self.vertex_label.len()).filter(|&i| self.vertex_label[i].0 == v).collect()
    }

    pub fn edge_fiber(&self, e: EId) -> Vec<usize> {
        (0..self.edge_label.len()).filter(|&i| self.edge_label[i].0 == e).collect()
    }
}

pub fn cover(gg: &GainGraph, grp: &Group) -> Result<CoveringGraph> {
    gg.check_stabilizers(grp)?;
    let mut graph = PinnedGraph::default();
    let mut vertex_label = Vec::new();
    let mut copy = HashMap::new();
    for (v, vert) in gg.vertices.iter().enumerate() {
        for x in grp.elements() {
            let coset_min = vert.stabilizer.iter().map(|&h| grp.mul(x, h)).min().unwrap();
            if coset_min != x {
                continue;
            }
            let idx = graph.names.len();
            let name = if grp.order() == 1 { vert.name.clone() } else { format!("{}.{}", vert.name, grp.name(x)) };
            graph.names.push(name);
            graph.kinds.push(vert.kind);
            vertex_label.push((v, x));
            for &h in &vert.stabilizer {
                copy.insert((v, grp.mul(x, h)), idx);
            }
        }
    }
    let mut edge_label = Vec::new();
    for (ei, e) in gg.edges.iter().enumerate() {
        if e.is_loop() && gg.vertices[e.tail].stabilizer.contains(&e.gain) {
            return Err(Error::DegenerateLoop(e.name.clone()));
        }
        let mut seen: Vec<(usize, usize)> = Vec::new();
        for x in grp.elements() {
            let a = copy[&(e.tail, x)];
            let b = copy[&(e.head, grp.mul(x, e.gain))];
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            graph.edges.push((a, b));
            let name = if grp.order() == 1 { e.name.clone() } else { format!("{}.{}", e.name, grp.name(x)) };
            graph.edge_names.push(name);
            edge_label.push((ei, x));
        }
    }
    Ok(CoveringGraph { graph, vertex_label, edge_label, copy })
}

/// Quotient of a pinned graph by a group action given as one permutation per element.
/// Orbit representatives are the lowest vertex ids.
pub fn quotient(pg: &PinnedGraph, grp: &Group, action: &[Vec<usize>]) -> Result<GainGraph> {
    let n = pg.names.len();
    if action.len() != grp.order() {
        return Err(Error::InvalidGraph("one permutation per group element expected".into()));
    }
    for perm in action {
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
            return Err(Error::InvalidGraph("action is not a permutation".into()));
        }
    }
    if (0..n).any(|i| action[IDENTITY][i] != i) {
        return Err(Error::InvalidGraph("identity does not act trivially".into()));
    }
    for x in grp.elements() {
        for y in grp.elements() {
            let xy = grp.mul(x, y);
            if (0..n).any(|i| action[x][action[y][i]] != action[xy][i]) {
                return Err(Error::InvalidGraph("action is not a homomorphism".into()));
            }
        }
        if (0..n).any(|i| pg.kinds[action[x][i]] != pg.kinds[i]) {
            return Err(Error::InvalidGraph("action does not preserve the inner/pinned partition".into()));
        }
    }
    let pair = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut mult: HashMap<(usize, usize), usize> = HashMap::new();
    for &(a, b) in &pg.edges {
        if a == b {
            return Err(Error::InvalidGraph("covering graph has a self-loop".into()));
        }
        *mult.entry(pair(a, b)).or_default() += 1;
    }
    for x in grp.elements() {
        for (&(a, b), &c) in &mult {
            if mult.get(&pair(action[x][a], action[x][b])) != Some(&c) {
                return Err(Error::InvalidGraph("action is not edge-compatible".into()));
            }
        }
    }

    let rep: Vec<usize> = (0..n).map(|i| grp.elements().map(|x| action[x][i]).min().unwrap()).collect();
    let shift: Vec<Elem> = (0..n).map(|i| grp.elements().find(|&x| action[x][rep[i]] == i).unwrap()).collect();
    let mut gg = GainGraph::new();
    let mut qid = vec![usize::MAX; n];
    for r in 0..n {
        if rep[r] == r {
            let stab: Vec<Elem> = grp.elements().filter(|&x| action[x][r] == r).collect();
            qid[r] = gg.add_vertex(&pg.names[r], pg.kinds[r], &stab)?;
        }
    }
    let mut assigned: HashMap<(usize, usize), usize> = HashMap::new();
    let mut used = vec![false; pg.edges.len()];
    for (ei, &(a, b)) in pg.edges.iter().enumerate() {
        if used[ei] {
            continue;
        }
        let mut orbit: Vec<(usize, usize)> = grp.elements().map(|x| pair(action[x][a], action[x][b])).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for p in &orbit {
            let k = assigned.entry(*p).or_default();
            let mut count = 0;
            for (j, &(c, d)) in pg.edges.iter().enumerate() {
                if pair(c, d) == *p {
                    if count == *k {
                        used[j] = true;
                        break;
                    }
                    count += 1;
                }
            }
            *k += 1;
        }
        let (t, h) = if pg.kinds[a] == Kind::Pin {
            (b, a)
        } else if pg.kinds[b] == Kind::Pin || rep[a] <= rep[b] {
            (a, b)
        } else {
            (b, a)
        };
        let g = grp.mul(grp.inv(shift[t]), shift[h]);
        let (qt, qh) = (qid[rep[t]], qid[rep[h]]);
        let g = gg.canonical_gain(grp, qt, qh, g);
        gg.add_edge(grp, &pg.edge_names[ei], qt, qh, g)?;
    }
    Ok(gg)
}

/// True iff every cycle in `edges` has gain product the identity.
pub fn is_balanced(gg: &GainGraph, grp: &Group, edges: &[EId]) -> bool {
    let mut phi: HashMap<VId, Elem> = HashMap::new();
    let mut adj: HashMap<VId, Vec<(VId, Elem)>> = HashMap::new();
    for &ei in edges {
        let e = &gg.edges[ei];
        if e.is_loop() {
            if e.gain != IDENTITY {
                return false;
            }
            continue;
        }
        adj.entry(e.tail).or_default().push((e.head, e.gain));
        adj.entry(e.head).or_default().push((e.tail, grp.inv(e.gain)));
    }
    let mut starts: Vec<VId> = adj.keys().copied().collect();
    starts.sort_unstable();
    for s in starts {
        if phi.contains_key(&s) {
            continue;
        }
        phi.insert(s, IDENTITY);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            let pu = phi[&u];
            for &(w, g) in &adj[&u] {
                let want = grp.mul(pu, g);
                match phi.get(&w) {
                    Some(&pw) if pw != want => return false,
                    Some(_) => {}
                    None => {
                        phi.insert(w, want);
                        stack.push(w);
                    }
                }
            }
        }
    }
    true
}

/// Group generated by the cycle gains of `edges`, via spanning-forest potentials.
pub fn gain_subgroup(gg: &GainGraph, grp: &Group, edges: &[EId]) -> Vec<Elem> {
    let mut phi: HashMap<VId, Elem> = HashMap::new();
    let mut adj: HashMap<VId, Vec<(VId, Elem)>> = HashMap::new();
    for &ei in edges {
        let e = &gg.edges[ei];
        adj.entry(e.tail).or_default().push((e.head, e.gain));
        adj.entry(e.head).or_default().push((e.tail, grp.inv(e.gain)));
    }
    let mut starts: Vec<VId> = adj.keys().copied().collect();
    starts.sort_unstable();
    for s in starts {
        if phi.contains_key(&s) {
            continue;
        }
        phi.insert(s, IDENTITY);
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(w, g) in &adj[&u] {
                if !phi.contains_key(&w) {
                    phi.insert(w, grp.mul(phi[&u], g));
                    stack.push(w);
                }
            }
        }
    }
    let gens: Vec<Elem> = edges
        .iter()
        .map(|&ei| {
            let e = &gg.edges[ei];
            grp.mul(grp.mul(phi[&e.tail], e.gain), grp.inv(phi[&e.head]))
        })
        .collect();
    grp.generated(&gens)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub edges: Vec<String>,
    pub edge_count: usize,
    pub vertex_count: usize,
    pub balanced: bool,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparsityVerdict {
    pub satisfied: bool,
    pub tight: bool,
    pub reason: Option<String>,
    pub witness: Option<Witness>,
}

/// Visit every nonempty subset of `0..n` as a bitmask, in order of increasing size.
fn subsets_by_size(n: usize, mut f: impl FnMut(u32) -> bool) {
    for k in 1..=n {
        let mut mask: u32 = (1u32 << k) - 1;
        let limit: u64 = 1u64 << n;
        while (mask as u64) < limit {
            if !f(mask) {
                return;
            }
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            if r == 0 {
                break;
            }
            mask = (((r ^ mask) >> 2) / c) | r;
        }
    }
}

fn mask_edges(ids: &[EId], mask: u32) -> Vec<EId> {
    (0..ids.len()).filter(|&i| mask >> i & 1 == 1).map(|i| ids[i]).collect()
}

fn witness(gg: &GainGraph, grp: &Group, f: &[EId], nv: usize, bound: i64) -> Witness {
    Witness {
        edges: f.iter().map(|&e| gg.edges[e].name.clone()).collect(),
        edge_count: f.len(),
        vertex_count: nv,
        balanced: is_balanced(gg, grp, f),
        bound,
    }
}

/// (k, ℓ, m)-gain-sparsity of the pin-free part, by exhaustive subset enumeration.
pub fn gain_sparse(gg: &GainGraph, grp: &Group, k: i64, l: i64, m: i64, bound: usize) -> Result<SparsityVerdict> {
    if m > l {
        return Err(Error::InvalidGraph("gain sparsity needs m <= l".into()));
    }
    let ids: Vec<EId> =
        (0..gg.edges.len()).filter(|&e| !gg.is_pin(gg.edges[e].tail) && !gg.is_pin(gg.edges[e].head)).collect();
    if ids.len() > bound.min(31) {
        return Err(Error::TooLarge { edges: ids.len(), bound });
    }
    let vmask: Vec<u64> = ids.iter().map(|&e| (1u64 << gg.edges[e].tail) | (1u64 << gg.edges[e].head)).collect();
    let mut found = None;
    subsets_by_size(ids.len(), |mask| {
        let mut vs = 0u64;
        for (i, vm) in vmask.iter().enumerate() {
            if mask >> i & 1 == 1 {
                vs |= vm;
            }
        }
        let nv = vs.count_ones() as i64;
        let ne = mask.count_ones() as i64;
        if ne > k * nv - m {
            found = Some((mask, nv, k * nv - m));
            return false;
        }
        if ne > k * nv - l {
            let f = mask_edges(&ids, mask);
            if is_balanced(gg, grp, &f) {
                found = Some((mask, nv, k * nv - l));
                return false;
            }
        }
        true
    });
    let inner = gg.inner().len() as i64;
    Ok(match found {
        Some((mask, nv, b)) => SparsityVerdict {
            satisfied: false,
            tight: false,
            reason: Some("subset exceeds its count".into()),
            witness: Some(witness(gg, grp, &mask_edges(&ids, mask), nv as usize, b)),
        },
        None => {
            SparsityVerdict { satisfied: true, tight: ids.len() as i64 == k * inner - m, reason: None, witness: None }
        }
    })
}

/// A point in general position inside the fixed subspace of `v`.
fn generic_point(sym: &Symmetry, gg: &GainGraph, v: VId) -> Result<DVector<f64>> {
    let fs = sym.fixed(&gg.vertices[v].stabilizer)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + v as u64);
    let c = DVector::from_fn(fs.dim(), |_, _| rng.gen_range(-1.0..1.0));
    Ok(&fs.basis * c)
}

/// Counting conditions for a pinned S-isostatic gain graph.
///
/// Every edge subset F must satisfy |F| ≤ Σ m(v) − t(F), where t(F) is the number of
/// symmetric trivial motions that keep the pins of F in place but move its inner
/// vertices. Balanced pin-free subsets on free vertices must also satisfy
/// |F| ≤ d|V(F)| − C(d+1, 2), relaxed to the trivial motions that actually move
/// fewer than d generic points. For free plane actions this is the usual
/// (2, 3, triv_S)-gain-sparsity plus |E'| ≤ 2|I'| for pinned subsets.
pub fn pinned_isostatic_counts(gg: &GainGraph, sym: &Symmetry, bound: usize) -> Result<SparsityVerdict> {
    let cols = gg.columns(sym)?;
    let total: usize = cols.iter().sum();
    if gg.edges.len() != total {
        return Ok(SparsityVerdict {
            satisfied: false,
            tight: false,
            reason: Some(format!("{} edges but {} columns", gg.edges.len(), total)),
            witness: None,
        });
    }
    let ne = gg.edges.len();
    if ne > bound.min(31) || gg.vertices.len() > 64 {
        return Err(Error::TooLarge { edges: ne, bound });
    }
    let d = sym.dim() as i64;
    let full = d * (d + 1) / 2;
    let motions = symmetric_trivial_motions(&sym.rep);
    let triv = motions.len() as i64;
    let all_motions = symmetric_trivial_motions(&Symmetry::trivial(sym.dim()).rep);
    let points: Vec<DVector<f64>> = (0..gg.vertices.len()).map(|v| generic_point(sym, gg, v)).collect::<Result<_>>()?;
    let pin_bits: u64 = gg.pins().iter().map(|&p| 1u64 << p).sum();
    let free: Vec<bool> = gg.vertices.iter().map(|v| v.stabilizer.len() == 1).collect();
    let vmask: Vec<u64> = gg.edges.iter().map(|e| (1u64 << e.tail) | (1u64 << e.head)).collect();
    let mut cache: HashMap<u64, i64> = HashMap::new();
    let mut t_of = |vs: u64| -> i64 {
        *cache.entry(vs).or_insert_with(|| {
            let pins: Vec<DVector<f64>> =
                (0..64).filter(|&i| (vs & pin_bits) >> i & 1 == 1).map(|i| points[i].clone()).collect();
            let all: Vec<DVector<f64>> = (0..64).filter(|&i| vs >> i & 1 == 1).map(|i| points[i].clone()).collect();
            (velocity_map_nullity(&motions, &pins) - velocity_map_nullity(&motions, &all)) as i64
        })
    };
    let all_ids: Vec<EId> = (0..ne).collect();
    let mut found = None;
    subsets_by_size(ne, |mask| {
        let mut vs = 0u64;
        for (i, vm) in vmask.iter().enumerate() {
            if mask >> i & 1 == 1 {
                vs |= vm;
            }
        }
        let inner_vs = vs & !pin_bits;
        let sum_m: i64 = (0..64).filter(|&i| inner_vs >> i & 1 == 1).map(|i| cols[i] as i64).sum();
        let nf = mask.count_ones() as i64;
        if nf > sum_m - triv {
            let b = sum_m - t_of(vs);
            if nf > b {
                found = Some((mask, b));
                return false;
            }
        }
        let pinfree = vs & pin_bits == 0;
        let all_free = (0..64).filter(|&i| vs >> i & 1 == 1).all(|i| free[i]);
        if pinfree && all_free && nf > sum_m - full {
            let pts: Vec<DVector<f64>> = (0..64).filter(|&i| vs >> i & 1 == 1).map(|i| points[i].clone()).collect();
            let b = sum_m - (full - velocity_map_nullity(&all_motions, &pts) as i64);
            if nf > b && is_balanced(gg, &sym.grp, &mask_edges(&all_ids, mask)) {
                found = Some((mask, b));
                return false;
            }
        }
        true
    });
    Ok(match found {
        Some((mask, b)) => {
            let f = mask_edges(&all_ids, mask);
            let vs: u64 = f.iter().map(|&e| vmask[e]).fold(0, |a, b| a | b);
            SparsityVerdict {
                satisfied: false,
                tight: false,
                reason: Some("subset exceeds its count".into()),
                witness: Some(witness(gg, &sym.grp, &f, vs.count_ones() as usize, b)),
            }
        }
        None => SparsityVerdict { satisfied: true, tight: true, reason: None, witness: None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupSpec, Schoenflies};

    fn c2() -> Symmetry {
        Symmetry::new(&GroupSpec { schoenflies: Schoenflies::Cn, n: 2, axis: None, normal: None }, 2).unwrap()
    }

    #[test]
    fn parallel_edges_with_distinct_gains_are_unbalanced() {
        let s = c2();
        let mut gg = GainGraph::new();
        let u = gg.add_inner("u").unwrap();
        let v = gg.add_inner("v").unwrap();
        gg.add_edge(&s.grp, "a", u, v, 0).unwrap();
        gg.add_edge(&s.grp, "b", u, v, 1).unwrap();
        assert!(!is_balanced(&gg, &s.grp, &[0, 1]));
        assert!(is_balanced(&gg, &s.grp, &[0]));
    }

    #[test]
    fn rejects_bad_edges() {
        let s = c2();
        let mut gg = GainGraph::new();
        let u = gg.add_inner("u").unwrap();
        let p = gg.add_pin("p").unwrap();
        let q = gg.add_pin("q").unwrap();
        assert!(gg.add_edge(&s.grp, "pq", p, q, 0).is_err());
        assert!(gg.add_edge(&s.grp, "l", u, u, 0).is_err());
        let c = gg.add_vertex("c", Kind::Inner, &[1]).unwrap();
        assert!(matches!(gg.add_edge(&s.grp, "m", c, c, 1), Err(Error::DegenerateLoop(_))));
    }

    #[test]
    fn empty_edge_set_is_sparse() {
        let s = c2();
        let mut gg = GainGraph::new();
        gg.add_inner("u").unwrap();
        let v = gain_sparse(&gg, &s.grp, 2, 3, 1, EXHAUSTIVE_BOUND).unwrap();
        assert!(v.satisfied);
    }

    #[test]
    fn undercounted_graph_fails() {
        let s = c2();
        let mut gg = GainGraph::new();
        let u = gg.add_inner("u").unwrap();
        let p = gg.add_pin("p").unwrap();
        gg.add_edge(&s.grp, "e", u, p, 0).unwrap();
        assert!(!pinned_isostatic_counts(&gg, &s, EXHAUSTIVE_BOUND).unwrap().satisfied);
    }

    #[test]
    fn subsets_come_smallest_first() {
        let mut sizes = Vec::new();
        subsets_by_size(4, |m| {
            sizes.push(m.count_ones());
            true
        });
        assert_eq!(sizes.len(), 15);
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    }
}
