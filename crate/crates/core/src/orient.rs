//! S-directed orientations by pebble-game path reversal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphs::{EId, GainGraph, VId};

/// Direction of every edge relative to its stored reference orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    pub forward: Vec<bool>,
}

impl Orientation {
    pub fn tail(&self, gg: &GainGraph, e: EId) -> VId {
        let edge = &gg.edges[e];
        if self.forward[e] {
            edge.tail
        } else {
            edge.head
        }
    }

    pub fn head(&self, gg: &GainGraph, e: EId) -> VId {
        let edge = &gg.edges[e];
        if self.forward[e] {
            edge.head
        } else {
            edge.tail
        }
    }

    pub fn out_degrees(&self, gg: &GainGraph) -> Vec<usize> {
        let mut deg = vec![0; gg.vertices.len()];
        for e in 0..gg.edges.len() {
            deg[self.tail(gg, e)] += 1;
        }
        deg
    }
}

struct Game<'a> {
    gg: &'a GainGraph,
    free: Vec<usize>,
    /// Current tail of each placed edge.
    tail: Vec<Option<VId>>,
    out: Vec<Vec<EId>>,
    rng: Option<ChaCha8Rng>,
}

impl<'a> Game<'a> {
    fn other(&self, e: EId, v: VId) -> VId {
        let edge = &self.gg.edges[e];
        if edge.tail == v {
            edge.head
        } else {
            edge.tail
        }
    }

    fn place(&mut self, e: EId, t: VId) {
        self.free[t] -= 1;
        self.tail[e] = Some(t);
        self.out[t].push(e);
    }

    fn successors(&mut self, u: VId) -> Vec<(VId, EId)> {
        let mut next: Vec<(VId, EId)> =
            self.out[u].iter().filter(|&&e| !self.gg.edges[e].is_loop()).map(|&e| (self.other(e, u), e)).collect();
        next.sort_unstable();
        if let Some(rng) = self.rng.as_mut() {
            next.shuffle(rng);
        }
        next
    }

    /// Depth-first search along out-edges from `start` for a vertex with a free pebble.
    /// Returns the path as edge ids, or the reached set on failure.
    fn search(&mut self, start: VId) -> std::result::Result<Vec<EId>, Vec<VId>> {
        let n = self.gg.vertices.len();
        let mut seen = vec![false; n];
        let mut parent: Vec<Option<EId>> = vec![None; n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = vec![start];
        while let Some(u) = stack.pop() {
            if u != start && self.free[u] > 0 {
                let mut path = Vec::new();
                let mut w = u;
                while let Some(e) = parent[w] {
                    path.push(e);
                    w = self.other(e, w);
                }
                path.reverse();
                return Ok(path);
            }
            let mut next = self.successors(u);
            next.reverse();
            for (w, e) in next {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    reached.push(w);
                    stack.push(w);
                }
            }
        }
        reached.sort_unstable();
        Err(reached)
    }

    /// Reverse a directed path; the start vertex gains a pebble, the end loses one.
    fn reverse(&mut self, path: &[EId]) {
        let (Some(&first), Some(&last)) = (path.first(), path.last()) else { return };
        let start = self.tail[first].unwrap();
        let end = self.other(last, self.tail[last].unwrap());
        for &e in path {
            let t = self.tail[e].unwrap();
            let h = self.other(e, t);
            self.out[t].retain(|&x| x != e);
            self.out[h].push(e);
            self.tail[e] = Some(h);
        }
        self.free[start] += 1;
        self.free[end] -= 1;
    }

    fn fetch(&mut self, v: VId) -> std::result::Result<(), Vec<VId>> {
        if self.free[v] > 0 {
            return Ok(());
        }
        let path = self.search(v)?;
        self.reverse(&path);
        Ok(())
    }

    fn insert(&mut self, e: EId) -> std::result::Result<(), Vec<VId>> {
        let edge = &self.gg.edges[e];
        let (mut a, mut b) = (edge.tail, edge.head);
        if self.gg.is_pin(a) {
            std::mem::swap(&mut a, &mut b);
        }
        if let Some(rng) = self.rng.as_mut() {
            if !self.gg.is_pin(b) && rng.gen_bool(0.5) {
                std::mem::swap(&mut a, &mut b);
            }
        }
        if a == b {
            self.fetch(a)?;
            self.place(e, a);
            return Ok(());
        }
        if self.free[a] > 0 {
            self.place(e, a);
            return Ok(());
        }
        if !self.gg.is_pin(b) && self.free[b] > 0 {
            self.place(e, b);
            return Ok(());
        }
        let first = self.fetch(a);
        match first {
            Ok(()) => {
                self.place(e, a);
                Ok(())
            }
            Err(mut reached) => {
                if self.gg.is_pin(b) {
                    return Err(reached);
                }
                match self.fetch(b) {
                    Ok(()) => {
                        self.place(e, b);
                        Ok(())
                    }
                    Err(more) => {
                        reached.extend(more);
                        reached.sort_unstable();
                        reached.dedup();
                        Err(reached)
                    }
                }
            }
        }
    }
}

fn run(gg: &GainGraph, capacities: &[usize], order: Vec<EId>, rng: Option<ChaCha8Rng>) -> Result<Orientation> {
    let n = gg.vertices.len();
    if capacities.len() != n {
        return Err(Error::InvalidGraph("one capacity per vertex expected".into()));
    }
    let free = (0..n).map(|v| if gg.is_pin(v) { 0 } else { capacities[v] }).collect();
    let mut game = Game { gg, free, tail: vec![None; gg.edges.len()], out: vec![Vec::new(); n], rng };
    for e in order {
        if let Err(reached) = game.insert(e) {
            let witness = reached.into_iter().filter(|&v| !gg.is_pin(v)).map(|v| gg.vertices[v].name.clone()).collect();
            return Err(Error::NoOrientation { witness });
        }
    }
    let forward = (0..gg.edges.len()).map(|e| game.tail[e] == Some(gg.edges[e].tail)).collect();
    let o = Orientation { forward };
    if game.free.iter().any(|&f| f != 0) {
        let witness = (0..n).filter(|&v| game.free[v] != 0).map(|v| gg.vertices[v].name.clone()).collect();
        return Err(Error::NoOrientation { witness });
    }
    Ok(o)
}

/// Pebble-game orientation with out-degree `capacities[v]` at inner vertices and 0 at pins.
/// Edges are inserted in input order; depth-first search visits lower vertex ids first.
pub fn s_directed_orientation(gg: &GainGraph, capacities: &[usize]) -> Result<Orientation> {
    run(gg, capacities, (0..gg.edges.len()).collect(), None)
}

/// A randomized valid orientation: shuffled insertion order and search order,
/// followed by reversal of random directed cycles.
pub fn random_orientation(gg: &GainGraph, capacities: &[usize], seed: u64) -> Result<Orientation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<EId> = (0..gg.edges.len()).collect();
    order.shuffle(&mut rng);
    let inner_rng = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut o = run(gg, capacities, order, Some(inner_rng))?;
    for _ in 0..gg.edges.len() {
        if gg.edges.is_empty() {
            break;
        }
        let e = rng.gen_range(0..gg.edges.len());
        if let Some(cycle) = cycle_through(gg, &o, e) {
            for c in cycle {
                o.forward[c] = !o.forward[c];
            }
        }
    }
    Ok(o)
}

/// A directed cycle containing `e`, if any.
fn cycle_through(gg: &GainGraph, o: &Orientation, e: EId) -> Option<Vec<EId>> {
    if gg.edges[e].is_loop() {
        return None;
    }
    let (start, goal) = (o.head(gg, e), o.tail(gg, e));
    let n = gg.vertices.len();
    let mut out = vec![Vec::new(); n];
    for f in 0..gg.edges.len() {
        if f != e && !gg.edges[f].is_loop() {
            out[o.tail(gg, f)].push(f);
        }
    }
    let mut parent: Vec<Option<EId>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        if u == goal {
            let mut path = vec![e];
            let mut w = u;
            while let Some(f) = parent[w] {
                path.push(f);
                w = o.tail(gg, f);
            }
            return Some(path);
        }
        for &f in &out[u] {
            let w = o.head(gg, f);
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(f);
                stack.push(w);
            }
        }
    }
    None
}

/// Out-degree m(v) at every inner vertex and 0 at every pin.
pub fn verify_orientation(gg: &GainGraph, capacities: &[usize], o: &Orientation) -> bool {
    if o.forward.len() != gg.edges.len() {
        return false;
    }
    let deg = o.out_degrees(gg);
    (0..gg.vertices.len()).all(|v| deg[v] == if gg.is_pin(v) { 0 } else { capacities[v] })
}

/// Same out-degree at every vertex.
pub fn equivalent(gg: &GainGraph, a: &Orientation, b: &Orientation) -> bool {
    a.out_degrees(gg) == b.out_degrees(gg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Symmetry;

    fn star(pin_edges: usize) -> (GainGraph, Symmetry) {
        let sym = Symmetry::new(
            &crate::group::GroupSpec { schoenflies: crate::group::Schoenflies::Cn, n: 3, axis: None, normal: None },
            2,
        )
        .unwrap();
        let mut gg = GainGraph::new();
        let u = gg.add_inner("u").unwrap();
        let p = gg.add_pin("p").unwrap();
        for i in 0..pin_edges {
            gg.add_edge(&sym.grp, &format!("e{i}"), p, u, i % 3).unwrap();
        }
        (gg, sym)
    }

    #[test]
    fn pin_edges_point_outward() {
        let (gg, _) = star(2);
        let o = s_directed_orientation(&gg, &[2, 0]).unwrap();
        assert_eq!(o.forward, vec![false, false]);
        assert!(verify_orientation(&gg, &[2, 0], &o));
    }

    #[test]
    fn overloaded_vertex_is_reported() {
        let (gg, _) = star(3);
        match s_directed_orientation(&gg, &[2, 0]) {
            Err(Error::NoOrientation { witness }) => assert_eq!(witness, vec!["u".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pin_out_edge_fails_verification() {
        let (gg, _) = star(2);
        let o = Orientation { forward: vec![true, false] };
        assert!(!verify_orientation(&gg, &[2, 0], &o));
    }

    #[test]
    fn reversal_keeps_interior_degrees() {
        let sym = Symmetry::trivial(2);
        let mut gg = GainGraph::new();
        let v: Vec<VId> = (0..4).map(|i| gg.add_inner(&format!("v{i}")).unwrap()).collect();
        for i in 0..3 {
            gg.add_edge(&sym.grp, &format!("e{i}"), v[i], v[i + 1], 0).unwrap();
        }
        let mut game =
            Game { gg: &gg, free: vec![0, 0, 0, 1], tail: vec![None; 3], out: vec![Vec::new(); 4], rng: None };
        for i in 0..3 {
            game.free[i] += 1;
            game.place(i, v[i]);
        }
        let before: Vec<usize> = game.out.iter().map(Vec::len).collect();
        let path = game.search(v[0]).unwrap();
        assert_eq!(path, vec![0, 1, 2]);
        game.reverse(&path);
        let after: Vec<usize> = game.out.iter().map(Vec::len).collect();
        assert_eq!(before[1], after[1]);
        assert_eq!(before[2], after[2]);
        assert_eq!(game.free[0], 1);
        assert_eq!(game.free[3], 0);
    }
}
