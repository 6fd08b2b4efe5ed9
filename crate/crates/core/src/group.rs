//! Finite point groups, their orthogonal representations, fixed subspaces,
//! and fully symmetric trivial motions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Abstract group element, an index into the group tables. `0` is the identity.
pub type Elem = usize;

pub const IDENTITY: Elem = 0;

const TABLE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schoenflies {
    Cs,
    Cn,
    Cnv,
}

/// How a group is specified in framework files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub schoenflies: Schoenflies,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug)]
pub struct Group {
    label: String,
    names: Vec<String>,
    mul: Vec<Vec<Elem>>,
    inv: Vec<Elem>,
}

impl Group {
    /// Build a group from a multiplication table, verifying the axioms.
    pub fn from_table(label: String, names: Vec<String>, mul: Vec<Vec<Elem>>) -> Result<Group> {
        let n = names.len();
        if n == 0 || mul.len() != n || mul.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidGroup("malformed table".into()));
        }
        for x in 0..n {
            if mul[IDENTITY][x] != x || mul[x][IDENTITY] != x {
                return Err(Error::InvalidGroup("element 0 is not neutral".into()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({}, {}, {})",
                            names[a], names[b], names[c]
                        )));
                    }
                }
            }
        }
        let mut inv = vec![usize::MAX; n];
        for x in 0..n {
            match (0..n).find(|&y| mul[y][x] == IDENTITY && mul[x][y] == IDENTITY) {
                Some(y) => inv[x] = y,
                None => return Err(Error::InvalidGroup(format!("{} has no inverse", names[x]))),
            }
        }
        Ok(Group { label, names, mul, inv })
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a][b]
    }

    pub fn inv(&self, a: Elem) -> Elem {
        self.inv[a]
    }

    pub fn name(&self, a: Elem) -> &str {
        &self.names[a]
    }

    pub fn element(&self, name: &str) -> Result<Elem> {
        let norm = name.trim().replace('*', "·");
        let norm = if norm == "e" || norm == "r0" { "id".to_string() } else { norm };
        self.names.iter().position(|n| *n == norm).ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn element_order(&self, a: Elem) -> usize {
        let mut k = 1;
        let mut x = a;
        while x != IDENTITY {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_subgroup(&self, set: &[Elem]) -> bool {
        !set.is_empty()
            && set.contains(&IDENTITY)
            && set.iter().all(|&a| set.iter().all(|&b| set.contains(&self.mul(a, b))))
    }

    /// Subgroup generated by `gens`, as a sorted element list.
    pub fn generated(&self, gens: &[Elem]) -> Vec<Elem> {
        let mut set = vec![IDENTITY];
        let mut i = 0;
        while i < set.len() {
            for &g in gens {
                let y = self.mul(set[i], g);
                if !set.contains(&y) {
                    set.push(y);
                }
            }
            i += 1;
        }
        set.sort_unstable();
        set
    }

    /// The subgroup on `set` as a group in its own right. Element names are kept,
    /// and the returned vector maps sub-elements to parent elements.
    pub fn subgroup(&self, set: &[Elem]) -> Result<(Group, Vec<Elem>)> {
        let mut elems: Vec<Elem> = set.to_vec();
        elems.sort_unstable();
        elems.dedup();
        if !self.is_subgroup(&elems) {
            let names: Vec<&str> = elems.iter().map(|&e| self.name(e)).collect();
            return Err(Error::NotSubgroup(format!("{{{}}}", names.join(", "))));
        }
        let pos = |x: Elem| elems.iter().position(|&e| e == x).unwrap();
        let mul = elems.iter().map(|&a| elems.iter().map(|&b| pos(self.mul(a, b))).collect()).collect();
        let names = elems.iter().map(|&e| self.names[e].clone()).collect();
        let label = format!("{}<{}>", self.label, elems.len());
        Ok((Group::from_table(label, names, mul)?, elems))
    }
}

/// Orthogonal representation τ of a group on R^d.
#[derive(Clone, Debug)]
pub struct Representation {
    dim: usize,
    mats: Vec<DMatrix<f64>>,
}

impl Representation {
    pub fn new(grp: &Group, dim: usize, mats: Vec<DMatrix<f64>>) -> Result<Representation> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::InvalidGroup(format!("dimension {dim} not supported")));
        }
        if mats.len() != grp.order() || mats.iter().any(|m| m.shape() != (dim, dim)) {
            return Err(Error::InvalidGroup("representation has wrong shape".into()));
        }
        let eye = DMatrix::<f64>::identity(dim, dim);
        if (&mats[IDENTITY] - &eye).amax() > TABLE_TOL {
            return Err(Error::InvalidGroup("tau(id) is not the identity".into()));
        }
        for m in &mats {
            if (m.transpose() * m - &eye).amax() > TABLE_TOL {
                return Err(Error::InvalidGroup("tau is not orthogonal".into()));
            }
        }
        for a in grp.elements() {
            for b in grp.elements() {
                if (&mats[a] * &mats[b] - &mats[grp.mul(a, b)]).amax() > TABLE_TOL {
                    return Err(Error::InvalidGroup(format!(
                        "tau is not a homomorphism at ({}, {})",
                        grp.name(a),
                        grp.name(b)
                    )));
                }
            }
        }
        Ok(Representation { dim, mats })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tau(&self, x: Elem) -> &DMatrix<f64> {
        &self.mats[x]
    }

    pub fn restrict(&self, map: &[Elem]) -> Representation {
        Representation { dim: self.dim, mats: map.iter().map(|&e| self.mats[e].clone()).collect() }
    }

    pub fn act(&self, x: Elem, p: &DVector<f64>) -> DVector<f64> {
        &self.mats[x] * p
    }
}

fn unit(v: &[f64], d: usize, what: &str) -> Result<DVector<f64>> {
    if v.len() != d {
        return Err(Error::InvalidGroup(format!("{what} must have {d} components")));
    }
    let v = DVector::from_column_slice(v);
    if (v.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidGroup(format!("{what} is not a unit vector")));
    }
    Ok(v)
}

fn reflection(normal: &DVector<f64>) -> DMatrix<f64> {
    let d = normal.len();
    DMatrix::identity(d, d) - normal * normal.transpose() * 2.0
}

fn rotation(d: usize, axis: &DVector<f64>, angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    if d == 2 {
        return DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    }
    let k = DMatrix::from_row_slice(3, 3, &[0.0, -axis[2], axis[1], axis[2], 0.0, -axis[0], -axis[1], axis[0], 0.0]);
    DMatrix::identity(3, 3) + &k * s + &k * &k * (1.0 - c)
}

/// Trig constants snapped so that √3/2 and friends come out exactly as f64 literals.
fn snap(m: &mut DMatrix<f64>) {
    for x in m.iter_mut() {
        for t in [0.0, 0.5, 1.0] {
            if (x.abs() - t).abs() < 1e-15 {
                *x = x.signum() * t;
            }
        }
        if x.abs() == 0.0 {
            *x = 0.0;
        }
    }
}

fn perpendicular(axis: &DVector<f64>) -> DVector<f64> {
    let pick = if axis[0].abs() < 0.9 {
        DVector::from_column_slice(&[1.0, 0.0, 0.0])
    } else {
        DVector::from_column_slice(&[0.0, 1.0, 0.0])
    };
    let v = &pick - axis * axis.dot(&pick);
    let n = v.norm();
    v / n
}

/// Build a Schoenflies group with its representation on R^d.
///
/// `Cn` rotates by 2π/n about the origin (2D) or `axis` (3D, default z).
/// `Cs` reflects in the mirror with unit `normal` (default x in 2D, z in 3D).
/// `Cnv` combines both; in 3D the mirror must contain the axis.
pub fn make_schoenflies(spec: &GroupSpec, d: usize) -> Result<(Group, Representation)> {
    if !(d == 2 || d == 3) {
        return Err(Error::InvalidGroup(format!("dimension {d} not supported")));
    }
    if spec.n == 0 {
        return Err(Error::InvalidGroup("n must be positive".into()));
    }
    let axis = match (&spec.axis, d) {
        (Some(a), 3) => unit(a, 3, "axis")?,
        (_, 3) => DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        _ => DVector::zeros(2),
    };
    let default_normal = match (spec.schoenflies, d) {
        (Schoenflies::Cnv, 3) => perpendicular(&axis),
        (_, 3) => DVector::from_column_slice(&[0.0, 0.0, 1.0]),
        _ => DVector::from_column_slice(&[1.0, 0.0]),
    };
    let normal = match &spec.normal {
        Some(v) => unit(v, d, "mirror normal")?,
        None => default_normal,
    };
    let n = spec.n;
    let (label, names, mul, mats) = match spec.schoenflies {
        Schoenflies::Cs => {
            let names = vec!["id".to_string(), "s".to_string()];
            let mul = vec![vec![0, 1], vec![1, 0]];
            let mats = vec![DMatrix::identity(d, d), reflection(&normal)];
            ("Cs".to_string(), names, mul, mats)
        }
        Schoenflies::Cn => {
            let names = (0..n).map(|k| if k == 0 { "id".into() } else { format!("r{k}") }).collect();
            let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
            let mats = (0..n).map(|k| rotation(d, &axis, 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
            (format!("C{n}"), names, mul, mats)
        }
        Schoenflies::Cnv => {
            if d == 3 && axis.dot(&normal).abs() > 1e-9 {
                return Err(Error::InvalidGroup("Cnv mirror must contain the axis".into()));
            }
            let mut names = Vec::with_capacity(2 * n);
            for k in 0..n {
                names.push(if k == 0 { "id".into() } else { format!("r{k}") });
            }
            for k in 0..n {
                names.push(if k == 0 { "s".into() } else { format!("s·r{k}") });
            }
            // s^a r^b · s^c r^e = s^(a+c) r^((-1)^c b + e)
            let mul = (0..2 * n)
                .map(|x| {
                    (0..2 * n)
                        .map(|y| {
                            let (a, b) = (x / n, x % n);
                            let (c, e) = (y / n, y % n);
                            let rb = if c == 1 { (n - b) % n } else { b };
                            ((a + c) % 2) * n + (rb + e) % n
                        })
                        .collect()
                })
                .collect();
            let s = reflection(&normal);
            let mats = (0..2 * n)
                .map(|x| {
                    let r = rotation(d, &axis, 2.0 * std::f64::consts::PI * (x % n) as f64 / n as f64);
                    if x >= n {
                        &s * r
                    } else {
                        r
                    }
                })
                .collect();
            (format!("C{n}v"), names, mul, mats)
        }
    };
    let mut mats: Vec<DMatrix<f64>> = mats;
    mats.iter_mut().for_each(snap);
    let grp = Group::from_table(label, names, mul)?;
    let rep = Representation::new(&grp, d, mats)?;
    Ok((grp, rep))
}

/// A group together with its representation.
#[derive(Clone, Debug)]
pub struct Symmetry {
    pub grp: Group,
    pub rep: Representation,
}

impl Symmetry {
    pub fn new(spec: &GroupSpec, d: usize) -> Result<Symmetry> {
        let (grp, rep) = make_schoenflies(spec, d)?;
        Ok(Symmetry { grp, rep })
    }

    /// The identity group acting on R^d.
    pub fn trivial(d: usize) -> Symmetry {
        let spec = GroupSpec { schoenflies: Schoenflies::Cn, n: 1, axis: None, normal: None };
        Symmetry::new(&spec, d).expect("C1 is always valid")
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn order(&self) -> usize {
        self.grp.order()
    }

    pub fn fixed(&self, stabilizer: &[Elem]) -> Result<FixedSubspace> {
        fixed_subspace(&self.grp, &self.rep, stabilizer)
    }

    pub fn subgroup(&self, set: &[Elem]) -> Result<(Symmetry, Vec<Elem>)> {
        let (grp, map) = self.grp.subgroup(set)?;
        let rep = self.rep.restrict(&map);
        Ok((Symmetry { grp, rep }, map))
    }
}

/// Fixed subspace of a stabilizer: the points every stabilizer element leaves in place.
#[derive(Clone, Debug)]
pub struct FixedSubspace {
    pub stabilizer: Vec<Elem>,
    /// d × m, orthonormal columns.
    pub basis: DMatrix<f64>,
}

impl FixedSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Distance from `p` to the subspace.
    pub fn residual(&self, p: &DVector<f64>) -> f64 {
        (p - &self.basis * (self.basis.transpose() * p)).norm()
    }
}

pub fn fixed_subspace(grp: &Group, rep: &Representation, stabilizer: &[Elem]) -> Result<FixedSubspace> {
    let mut stab = stabilizer.to_vec();
    if !stab.contains(&IDENTITY) {
        stab.push(IDENTITY);
    }
    stab.sort_unstable();
    stab.dedup();
    if !grp.is_subgroup(&stab) {
        let names: Vec<&str> = stab.iter().map(|&e| grp.name(e)).collect();
        return Err(Error::NotSubgroup(format!("stabilizer {{{}}}", names.join(", "))));
    }
    let d = rep.dim();
    let basis = if stab.len() == 1 {
        DMatrix::identity(d, d)
    } else {
        let eye = DMatrix::<f64>::identity(d, d);
        let mut stacked = DMatrix::zeros(d * stab.len(), d);
        for (i, &x) in stab.iter().enumerate() {
            stacked.view_mut((i * d, 0), (d, d)).copy_from(&(rep.tau(x) - &eye));
        }
        linalg::canonical_basis(&linalg::nullspace(&stacked, 1e-10))
    };
    Ok(FixedSubspace { stabilizer: stab, basis })
}

/// Basis of the fully symmetric trivial motions x ↦ A x + t, as (t, A) pairs.
pub fn symmetric_trivial_motions(rep: &Representation) -> Vec<(DVector<f64>, DMatrix<f64>)> {
    let d = rep.dim();
    let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
    let nvar = d + pairs.len();
    let unpack = |x: &DVector<f64>| {
        let t = DVector::from_iterator(d, x.iter().take(d).copied());
        let mut a = DMatrix::zeros(d, d);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            a[(i, j)] = x[d + k];
            a[(j, i)] = -x[d + k];
        }
        (t, a)
    };
    let nelem = rep.mats.len();
    let eqs_per = d + d * d;
    let mut sys = DMatrix::zeros(nelem * eqs_per, nvar);
    for v in 0..nvar {
        let mut x = DVector::zeros(nvar);
        x[v] = 1.0;
        let (t, a) = unpack(&x);
        for (g, m) in rep.mats.iter().enumerate() {
            let dt = m * &t - &t;
            let da = m * &a * m.transpose() - &a;
            for i in 0..d {
                sys[(g * eqs_per + i, v)] = dt[i];
            }
            for (i, val) in da.iter().enumerate() {
                sys[(g * eqs_per + d + i, v)] = *val;
            }
        }
    }
    let ns = linalg::nullspace(&sys, 1e-10);
    (0..ns.ncols()).map(|j| unpack(&ns.column(j).clone_owned())).collect()
}

/// Dimension of the fully symmetric trivial motions. With `has_pins`, only those
/// motions that also keep a generic free pin orbit in place are counted.
pub fn trivial_symmetric_dimension(rep: &Representation, has_pins: bool) -> usize {
    let basis = symmetric_trivial_motions(rep);
    if !has_pins {
        return basis.len();
    }
    let d = rep.dim();
    let p = DVector::from_iterator(d, [0.731, -0.412, 0.289].into_iter().take(d));
    velocity_map_nullity(&basis, &[p])
}

/// Nullity of (t, A) ↦ (A p + t) over the listed points, restricted to `basis`.
pub fn velocity_map_nullity(basis: &[(DVector<f64>, DMatrix<f64>)], points: &[DVector<f64>]) -> usize {
    if basis.is_empty() {
        return 0;
    }
    if points.is_empty() {
        return basis.len();
    }
    let d = points[0].len();
    let mut m = DMatrix::zeros(points.len() * d, basis.len());
    for (j, (t, a)) in basis.iter().enumerate() {
        for (i, p) in points.iter().enumerate() {
            let v = a * p + t;
            for k in 0..d {
                m[(i * d + k, j)] = v[k];
            }
        }
    }
    basis.len() - linalg::rank(&m, 1e-9)
}
