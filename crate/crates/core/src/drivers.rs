//! Symmetric drivers: remove one edge orbit and solve for the fully symmetric
//! velocity it generates.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::decompose::{decompose, is_s_assur, AssurDecomposition, Sampling};
use crate::error::{Error, Result};
use crate::graphs::{cover, EId, GainGraph, Kind, VId};
use crate::group::Symmetry;
use crate::linalg;
use crate::orbit::{self, build_orbit_matrix, cover_positions, trial_seed, Configuration};

/// Relative threshold on block norms separating moving from stationary vertices.
pub const MOVING_THRESHOLD: f64 = 1e-7;

#[derive(Clone, Debug, Serialize)]
pub struct DriverReport {
    pub edge: String,
    /// Velocity in orbit-matrix column coordinates.
    pub velocity: Vec<f64>,
    /// (vertex, norm of its velocity block) for every inner vertex.
    pub norms: Vec<(String, f64)>,
    pub moving_vertices: Vec<String>,
    pub stationary_vertices: Vec<String>,
    /// Names of components with at least one moving vertex.
    pub moving: Vec<String>,
    pub stationary: Vec<String>,
}

impl DriverReport {
    pub fn moves(&self, vertex: &str) -> bool {
        self.moving_vertices.iter().any(|v| v == vertex)
    }

    pub fn norm(&self, vertex: &str) -> f64 {
        self.norms.iter().find(|(v, _)| v == vertex).map_or(0.0, |(_, n)| *n)
    }
}

/// Solve O·U = e_k where k is the row of `edge`.
pub fn driven_velocity(m: &DMatrix<f64>, row: usize, tol: f64) -> Result<DVector<f64>> {
    if m.nrows() != m.ncols() || linalg::rank(m, tol) < m.ncols() {
        return Err(Error::SingularMatrix);
    }
    let mut rhs = DVector::zeros(m.nrows());
    rhs[row] = 1.0;
    m.clone().lu().solve(&rhs).ok_or(Error::SingularMatrix)
}

pub fn drive_with(
    gg: &GainGraph,
    sym: &Symmetry,
    cfg: &Configuration,
    edge: EId,
    dec: &AssurDecomposition,
    tol: f64,
) -> Result<DriverReport> {
    let m = build_orbit_matrix(gg, sym, cfg)?;
    let row = m.rows.iter().position(|&e| e == edge).ok_or_else(|| Error::InvalidGraph("unknown edge".into()))?;
    let u = driven_velocity(&m.matrix, row, tol)?;
    let norms: Vec<(VId, f64)> = m.blocks.iter().map(|b| (b.vertex, u.rows(b.start, b.width).norm())).collect();
    let max = norms.iter().map(|&(_, n)| n).fold(0.0, f64::max);
    let mut report = DriverReport {
        edge: gg.edges[edge].name.clone(),
        velocity: u.iter().copied().collect(),
        norms: norms.iter().map(|&(v, n)| (gg.vertices[v].name.clone(), n)).collect(),
        moving_vertices: Vec::new(),
        stationary_vertices: Vec::new(),
        moving: Vec::new(),
        stationary: Vec::new(),
    };
    let mut moving_comp = vec![false; dec.len()];
    for &(v, n) in &norms {
        let name = gg.vertices[v].name.clone();
        if n > MOVING_THRESHOLD * max {
            report.moving_vertices.push(name);
            if let Some(c) = dec.component_of[v] {
                moving_comp[c] = true;
            }
        } else {
            report.stationary_vertices.push(name);
        }
    }
    for (c, comp) in dec.components.iter().enumerate() {
        if moving_comp[c] {
            report.moving.push(comp.name.clone());
        } else {
            report.stationary.push(comp.name.clone());
        }
    }
    Ok(report)
}

/// Driver analysis at a given configuration.
pub fn drive(gg: &GainGraph, sym: &Symmetry, cfg: &Configuration, edge: EId, tol: f64) -> Result<DriverReport> {
    let (_, dec) = decompose(gg, sym)?;
    drive_with(gg, sym, cfg, edge, &dec, tol)
}

/// Per-vertex majority vote over sampled configurations on which the matrix is invertible.
pub fn moving_by_majority(gg: &GainGraph, sym: &Symmetry, edge: EId, s: Sampling) -> Result<Vec<bool>> {
    let (_, dec) = decompose(gg, sym)?;
    let mut votes = vec![0usize; gg.vertices.len()];
    let mut counted = 0;
    for i in 0..s.trials.max(1) {
        let cfg = orbit::sample_regular_configuration(gg, sym, trial_seed(s.seed, i))?;
        let report = match drive_with(gg, sym, &cfg, edge, &dec, s.tol) {
            Ok(r) => r,
            Err(Error::SingularMatrix) => continue,
            Err(e) => return Err(e),
        };
        counted += 1;
        for v in gg.inner() {
            if report.moves(&gg.vertices[v].name) {
                votes[v] += 1;
            }
        }
    }
    if counted == 0 {
        return Err(Error::SingularMatrix);
    }
    Ok((0..gg.vertices.len()).map(|v| !gg.is_pin(v) && 2 * votes[v] > counted).collect())
}

/// Every single edge-orbit removal moves every inner vertex orbit.
pub fn is_strongly_s_assur(gg: &GainGraph, sym: &Symmetry, s: Sampling) -> Result<bool> {
    if !is_s_assur(gg, sym, s)? {
        return Err(Error::NotAssur);
    }
    for e in 0..gg.edges.len() {
        let moving = moving_by_majority(gg, sym, e, s)?;
        if gg.inner().iter().any(|&v| !moving[v]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Dimension of all infinitesimal motions of the covering framework with the
/// driver's edge orbit removed, symmetric or not.
pub fn covering_driver_nullity(
    gg: &GainGraph,
    sym: &Symmetry,
    cfg: &Configuration,
    edge: EId,
    tol: f64,
) -> Result<usize> {
    let cg = cover(gg, &sym.grp)?;
    let pos = cover_positions(&cg, sym, cfg);
    let mut pg = cg.graph.clone();
    let keep: Vec<usize> = (0..pg.edges.len()).filter(|&i| cg.edge_label[i].0 != edge).collect();
    pg.edges = keep.iter().map(|&i| cg.graph.edges[i]).collect();
    pg.edge_names = keep.iter().map(|&i| cg.graph.edge_names[i].clone()).collect();
    let r = orbit::pinned_rigidity_matrix(&pg, &pos);
    let cols = pg.kinds.iter().filter(|&&k| k == Kind::Inner).count() * sym.dim();
    Ok(cols - linalg::rank(&r, tol))
}
