//! Random pinned S-isostatic gain graphs in the plane, grown by extensions from a
//! single vertex on two pin edges.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::extend::{apply_extension, ExtensionSpec};
use crate::graphs::GainGraph;
use crate::group::{Elem, GroupSpec, Schoenflies, Symmetry, IDENTITY};

fn names(sym: &Symmetry, xs: &[Elem]) -> Vec<String> {
    xs.iter().map(|&x| sym.grp.name(x).to_string()).collect()
}

/// Group elements usable as loop gains while keeping the action free on edges.
fn loop_gains(sym: &Symmetry) -> Vec<Elem> {
    sym.grp.elements().filter(|&x| x != IDENTITY && sym.grp.mul(x, x) != IDENTITY).collect()
}

fn random_elem(sym: &Symmetry, rng: &mut ChaCha8Rng) -> Elem {
    rng.gen_range(0..sym.order())
}

/// A random 1-extension of `gg` (2D, free vertex) or `None` if the draw was invalid.
pub fn random_one_extension(
    gg: &GainGraph,
    sym: &Symmetry,
    vertex: &str,
    rng: &mut ChaCha8Rng,
) -> Option<ExtensionSpec> {
    let e = &gg.edges[rng.gen_range(0..gg.edges.len())];
    let g1 = random_elem(sym, rng);
    let g2 = sym.grp.mul(sym.grp.inv(g1), e.gain);
    let w = rng.gen_range(0..gg.vertices.len());
    let spec = ExtensionSpec::One {
        vertex: vertex.to_string(),
        edge: e.name.clone(),
        split_gains: [sym.grp.name(g1).to_string(), sym.grp.name(g2).to_string()],
        targets: vec![gg.vertices[w].name.clone()],
        gains: names(sym, &[random_elem(sym, rng)]),
    };
    apply_extension(gg, sym, &spec).ok().map(|_| spec)
}

fn random_step(gg: &GainGraph, sym: &Symmetry, vertex: &str, rng: &mut ChaCha8Rng) -> Option<ExtensionSpec> {
    let lg = loop_gains(sym);
    let kind = rng.gen_range(0..if lg.is_empty() { 2 } else { 3 });
    let pick = |rng: &mut ChaCha8Rng| gg.vertices[rng.gen_range(0..gg.vertices.len())].name.clone();
    let spec = match kind {
        0 => ExtensionSpec::Zero {
            vertex: vertex.to_string(),
            targets: vec![pick(rng), pick(rng)],
            gains: names(sym, &[random_elem(sym, rng), random_elem(sym, rng)]),
        },
        1 => return random_one_extension(gg, sym, vertex, rng),
        _ => ExtensionSpec::LoopOne {
            vertex: vertex.to_string(),
            loop_gain: sym.grp.name(*lg.choose(rng).unwrap()).to_string(),
            targets: vec![pick(rng)],
            gains: names(sym, &[random_elem(sym, rng)]),
        },
    };
    apply_extension(gg, sym, &spec).ok().map(|_| spec)
}

/// Random free-action group in the plane: Cs or Cn with 2 ≤ n ≤ 6.
pub fn random_plane_group(rng: &mut ChaCha8Rng) -> GroupSpec {
    if rng.gen_bool(0.3) {
        GroupSpec { schoenflies: Schoenflies::Cs, n: 1, axis: None, normal: None }
    } else {
        GroupSpec { schoenflies: Schoenflies::Cn, n: rng.gen_range(2..=6), axis: None, normal: None }
    }
}

/// Grow a pinned S-isostatic gain graph with `steps` extensions. Pins are `P0`
/// and `P1`; inner vertices are `v0`, `v1`, ...
pub fn random_isostatic(spec: &GroupSpec, steps: usize, seed: u64) -> Result<(Symmetry, GainGraph)> {
    let sym = Symmetry::new(spec, 2)?;
    if sym.order() < 2 {
        return Err(Error::InvalidGroup("the generator needs a nontrivial group".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gg = GainGraph::new();
    let v0 = gg.add_inner("v0")?;
    let p0 = gg.add_pin("P0")?;
    gg.add_pin("P1")?;
    let g = 1 + rng.gen_range(0..sym.order() - 1);
    gg.add_edge(&sym.grp, "v0_1", v0, p0, IDENTITY)?;
    gg.add_edge(&sym.grp, "v0_2", v0, p0, g)?;
    for i in 1..=steps {
        let name = format!("v{i}");
        let spec = loop {
            if let Some(s) = random_step(&gg, &sym, &name, &mut rng) {
                break s;
            }
        };
        gg = apply_extension(&gg, &sym, &spec)?.0;
    }
    Ok((sym, gg))
}
