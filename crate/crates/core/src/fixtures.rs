//! Worked examples bundled with the library.

use crate::graphs::{Kind, PinnedGraph};
use crate::io::{parse_str, Framework};

macro_rules! fixture {
    ($name:ident, $file:literal) => {
        pub fn $name() -> Framework {
            parse_str(include_str!(concat!("../fixtures/", $file))).expect($file)
        }
    };
}

fixture!(c3_desargues, "c3_desargues.json");
fixture!(fig2b, "fig2b.json");
fixture!(grab_bucket, "grab_bucket.json");
fixture!(fig7_mirror, "fig7_mirror.json");
fixture!(fig6_c3_space, "fig6_c3_space.json");
fixture!(fig8_c6, "fig8_c6.json");
fixture!(fig15_c4, "fig15_c4.json");

/// All framework fixtures by file stem.
pub fn all() -> Vec<(&'static str, Framework)> {
    vec![
        ("c3_desargues", c3_desargues()),
        ("fig2b", fig2b()),
        ("grab_bucket", grab_bucket()),
        ("fig7_mirror", fig7_mirror()),
        ("fig6_c3_space", fig6_c3_space()),
        ("fig8_c6", fig8_c6()),
        ("fig15_c4", fig15_c4()),
    ]
}

fn unpinned(n: usize, edges: &[(usize, usize)]) -> PinnedGraph {
    PinnedGraph {
        names: (1..=n).map(|i| i.to_string()).collect(),
        kinds: vec![Kind::Inner; n],
        edges: edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect(),
        edge_names: edges.iter().map(|&(a, b)| format!("{a}-{b}")).collect(),
    }
}

/// Six-vertex half-turn symmetric graph; the action swaps 1↔4, 2↔5, 3↔6.
pub fn fig2a() -> (PinnedGraph, Vec<Vec<usize>>) {
    let g = unpinned(6, &[(2, 3), (1, 2), (1, 3), (1, 4), (2, 6), (5, 3), (6, 4), (6, 5), (5, 4)]);
    (g, vec![vec![0, 1, 2, 3, 4, 5], vec![3, 4, 5, 0, 1, 2]])
}

/// Four-cycle with the half-turn swapping 1↔3 and 2↔4.
pub fn fig2c() -> (PinnedGraph, Vec<Vec<usize>>) {
    let g = unpinned(4, &[(1, 4), (3, 4), (2, 3), (2, 1)]);
    (g, vec![vec![0, 1, 2, 3], vec![2, 3, 0, 1]])
}
