//! Small dense helpers shared by the group and orbit modules.

use nalgebra::DMatrix;

/// Singular values of `m`, largest first.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with threshold `tol * sigma_max`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis of the right nullspace, one column per basis vector.
///
/// Wide matrices are padded with zero rows so the SVD returns a full `V`.
pub fn nullspace(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    let mut sq = DMatrix::zeros(r.max(c), c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let top = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    let cut = if top > 0.0 { tol * top } else { f64::INFINITY };
    let cols: Vec<usize> = (0..c).filter(|&i| top == 0.0 || svd.singular_values[i] <= cut).collect();
    let mut out = DMatrix::zeros(c, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &v_t.row(i).transpose());
    }
    out
}

/// Re-express the column span of `b` in a canonical orthonormal basis
/// (row-reduce the transpose, then Gram-Schmidt).
pub fn canonical_basis(b: &DMatrix<f64>) -> DMatrix<f64> {
    let (d, m) = b.shape();
    if m == 0 {
        return DMatrix::zeros(d, 0);
    }
    let mut a = b.transpose();
    let mut row = 0;
    for col in 0..d {
        if row == m {
            break;
        }
        let piv = (row..m).max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs())).unwrap();
        if a[(piv, col)].abs() < 1e-10 {
            continue;
        }
        a.swap_rows(row, piv);
        let p = a[(row, col)];
        for k in 0..d {
            a[(row, k)] /= p;
        }
        for i in 0..m {
            if i != row {
                let f = a[(i, col)];
                if f != 0.0 {
                    for k in 0..d {
                        a[(i, k)] -= f * a[(row, k)];
                    }
                }
            }
        }
        row += 1;
    }
    let mut q = DMatrix::zeros(d, row);
    for j in 0..row {
        let mut v = a.row(j).transpose();
        for k in 0..j {
            let qk = q.column(k).clone_owned();
            v -= &qk * qk.dot(&v);
        }
        let n = v.norm();
        q.set_column(j, &(v / n));
    }
    for x in q.iter_mut() {
        if x.abs() < 1e-15 {
            *x = 0.0;
        }
    }
    q
}
