//! Configurations, the pinned orbit rigidity matrix, symmetric motions and
//! self-stresses, and the pinned S-isostatic test.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphs::{CoveringGraph, EId, GainGraph, Kind, PinnedGraph, VId};
use crate::group::{FixedSubspace, Symmetry};
use crate::linalg;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_TRIALS: usize = 5;
const STAB_TOL: f64 = 1e-12;
const DENOM: i64 = 1_048_573;

/// Representative positions, one per vertex orbit (pins included).
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    pub positions: Vec<DVector<f64>>,
}

/// Seed for trial `i` derived from a base seed.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Random rational coordinates with a large prime denominator in [−10, 10],
/// taken inside each vertex's fixed subspace.
pub fn sample_regular_configuration(gg: &GainGraph, sym: &Symmetry, seed: u64) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = Vec::with_capacity(gg.vertices.len());
    for v in &gg.vertices {
        let fs = sym.fixed(&v.stabilizer)?;
        let c = DVector::from_fn(fs.dim(), |_, _| rng.gen_range(-10 * DENOM..=10 * DENOM) as f64 / DENOM as f64);
        positions.push(&fs.basis * c);
    }
    Ok(Configuration { positions })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColumnBlock {
    pub vertex: VId,
    pub start: usize,
    pub width: usize,
}

#[derive(Clone, Debug)]
pub struct OrbitMatrix {
    pub matrix: DMatrix<f64>,
    /// Gain-graph edge of each row.
    pub rows: Vec<EId>,
    pub blocks: Vec<ColumnBlock>,
    /// Fixed-subspace basis per vertex, used to expand column coordinates.
    pub bases: Vec<DMatrix<f64>>,
}

impl OrbitMatrix {
    pub fn block_of(&self, v: VId) -> Option<&ColumnBlock> {
        self.blocks.iter().find(|b| b.vertex == v)
    }

    pub fn is_square(&self) -> bool {
        self.matrix.nrows() == self.matrix.ncols()
    }

    /// Velocity of `v` in R^d from column coordinates.
    pub fn velocity(&self, coords: &DVector<f64>, v: VId) -> DVector<f64> {
        match self.block_of(v) {
            Some(b) => &self.bases[v] * coords.rows(b.start, b.width),
            None => DVector::zeros(self.bases[v].nrows()),
        }
    }
}

fn fixed_spaces(gg: &GainGraph, sym: &Symmetry) -> Result<Vec<FixedSubspace>> {
    gg.vertices.iter().map(|v| sym.fixed(&v.stabilizer)).collect()
}

/// Check that every position lies in its vertex's fixed subspace.
pub fn check_configuration(gg: &GainGraph, sym: &Symmetry, cfg: &Configuration) -> Result<()> {
    if cfg.positions.len() != gg.vertices.len() || cfg.positions.iter().any(|p| p.len() != sym.dim()) {
        return Err(Error::InvalidGraph("configuration does not match the graph".into()));
    }
    for (v, fs) in fixed_spaces(gg, sym)?.iter().enumerate() {
        let p = &cfg.positions[v];
        let r = fs.residual(p);
        if r > STAB_TOL * p.norm().max(1.0) {
            return Err(Error::StabilizerViolation { vertex: gg.vertices[v].name.clone(), residual: r });
        }
    }
    Ok(())
}

pub fn build_orbit_matrix(gg: &GainGraph, sym: &Symmetry, cfg: &Configuration) -> Result<OrbitMatrix> {
    check_configuration(gg, sym, cfg)?;
    let fixed = fixed_spaces(gg, sym)?;
    let mut blocks = Vec::new();
    let mut start = 0;
    for v in gg.inner() {
        let width = fixed[v].dim();
        blocks.push(ColumnBlock { vertex: v, start, width });
        start += width;
    }
    let mut col = vec![None; gg.vertices.len()];
    for b in &blocks {
        col[b.vertex] = Some((b.start, b.width));
    }
    let p = &cfg.positions;
    let mut m = DMatrix::zeros(gg.edges.len(), start);
    let mut put = |row: usize, v: VId, val: DVector<f64>| {
        if let Some((s, w)) = col[v] {
            let reduced = fixed[v].basis.transpose() * val;
            for k in 0..w {
                m[(row, s + k)] += reduced[k];
            }
        }
    };
    for (row, e) in gg.edges.iter().enumerate() {
        let t = sym.rep.tau(e.gain);
        let ti = sym.rep.tau(sym.grp.inv(e.gain));
        if e.is_loop() {
            let q = &p[e.tail];
            put(row, e.tail, q * 2.0 - t * q - ti * q);
        } else {
            put(row, e.tail, &p[e.tail] - t * &p[e.head]);
            put(row, e.head, &p[e.head] - ti * &p[e.tail]);
        }
    }
    Ok(OrbitMatrix {
        matrix: m,
        rows: (0..gg.edges.len()).collect(),
        blocks,
        bases: fixed.into_iter().map(|f| f.basis).collect(),
    })
}

pub fn rank(m: &OrbitMatrix, tol: f64) -> usize {
    linalg::rank(&m.matrix, tol)
}

/// Basis of fully symmetric infinitesimal motions, in column coordinates.
pub fn motions(m: &OrbitMatrix, tol: f64) -> Vec<DVector<f64>> {
    let ns = linalg::nullspace(&m.matrix, tol);
    (0..ns.ncols()).map(|j| ns.column(j).clone_owned()).collect()
}

/// Basis of fully symmetric self-stresses, one scalar per edge orbit.
pub fn self_stresses(m: &OrbitMatrix, tol: f64) -> Vec<DVector<f64>> {
    let ns = linalg::nullspace(&m.matrix.transpose(), tol);
    (0..ns.ncols()).map(|j| ns.column(j).clone_owned()).collect()
}

#[derive(Clone, Debug)]
pub struct IsostaticVerdict {
    pub isostatic: bool,
    pub rows: usize,
    pub cols: usize,
    pub ranks: Vec<usize>,
    pub witness: Option<Configuration>,
}

/// Square, and full rank for at least one of `trials` sampled configurations.
pub fn is_pinned_s_isostatic(
    gg: &GainGraph,
    sym: &Symmetry,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<IsostaticVerdict> {
    let rows = gg.edges.len();
    let cols: usize = gg.columns(sym)?.iter().sum();
    let mut verdict = IsostaticVerdict { isostatic: false, rows, cols, ranks: Vec::new(), witness: None };
    if rows != cols {
        return Ok(verdict);
    }
    for i in 0..trials.max(1) {
        let cfg = sample_regular_configuration(gg, sym, trial_seed(seed, i))?;
        let r = rank(&build_orbit_matrix(gg, sym, &cfg)?, tol);
        verdict.ranks.push(r);
        if r == cols && verdict.witness.is_none() {
            verdict.isostatic = true;
            verdict.witness = Some(cfg);
        }
    }
    Ok(verdict)
}

/// Pinned rigidity matrix of an undirected pinned graph: d columns per inner vertex.
pub fn pinned_rigidity_matrix(pg: &PinnedGraph, positions: &[DVector<f64>]) -> DMatrix<f64> {
    let d = positions.first().map_or(0, |p| p.len());
    let mut col = vec![None; pg.names.len()];
    let mut next = 0;
    for (v, k) in pg.kinds.iter().enumerate() {
        if *k == Kind::Inner {
            col[v] = Some(next);
            next += d;
        }
    }
    let mut m = DMatrix::zeros(pg.edges.len(), next);
    for (row, &(a, b)) in pg.edges.iter().enumerate() {
        let diff = &positions[a] - &positions[b];
        for (v, sign) in [(a, 1.0), (b, -1.0)] {
            if let Some(s) = col[v] {
                for k in 0..d {
                    m[(row, s + k)] += sign * diff[k];
                }
            }
        }
    }
    m
}

/// Positions of the covering framework: p(v, x) = τ(x) p̃(v).
pub fn cover_positions(cg: &CoveringGraph, sym: &Symmetry, cfg: &Configuration) -> Vec<DVector<f64>> {
    cg.vertex_label.iter().map(|&(v, x)| sym.rep.act(x, &cfg.positions[v])).collect()
}

/// Lift a symmetric motion to the covering framework: u(x v) = τ(x) u(v); pins get 0.
pub fn lift_motion(cg: &CoveringGraph, sym: &Symmetry, m: &OrbitMatrix, coords: &DVector<f64>) -> DVector<f64> {
    let d = sym.dim();
    let inner: Vec<usize> = (0..cg.vertex_label.len()).filter(|&i| cg.graph.kinds[i] == Kind::Inner).collect();
    let mut out = DVector::zeros(inner.len() * d);
    for (k, &i) in inner.iter().enumerate() {
        let (v, x) = cg.vertex_label[i];
        let u = sym.rep.act(x, &m.velocity(coords, v));
        out.rows_mut(k * d, d).copy_from(&u);
    }
    out
}
