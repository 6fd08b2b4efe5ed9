#![allow(dead_code, clippy::needless_range_loop)]

use nalgebra::{DMatrix, DVector};
use sassur::graphs::{Kind, PinnedGraph};

/// Pinned rigidity matrix built directly from bar directions: row (p_a − p_b) under a,
/// (p_b − p_a) under b, pins dropped.
pub fn rigidity_matrix(pg: &PinnedGraph, pos: &[DVector<f64>]) -> DMatrix<f64> {
    let d = pos[0].len();
    let inner: Vec<usize> = (0..pg.names.len()).filter(|&v| pg.kinds[v] == Kind::Inner).collect();
    let mut m = DMatrix::zeros(pg.edges.len(), inner.len() * d);
    for (r, &(a, b)) in pg.edges.iter().enumerate() {
        for (v, w) in [(a, b), (b, a)] {
            if let Some(k) = inner.iter().position(|&x| x == v) {
                for i in 0..d {
                    m[(r, k * d + i)] = pos[v][i] - pos[w][i];
                }
            }
        }
    }
    m
}

/// Gaussian elimination with partial pivoting.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let mut x = b.clone();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().partial_cmp(&m[(j, c)].abs()).unwrap()).unwrap();
        m.swap_rows(c, p);
        x.swap_rows(c, p);
        for r in c + 1..n {
            let f = m[(r, c)] / m[(c, c)];
            for k in c..n {
                m[(r, k)] -= f * m[(c, k)];
            }
            x[r] -= f * x[c];
        }
    }
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[(c, k)] * x[k]).sum();
        x[c] = (x[c] - s) / m[(c, c)];
    }
    x
}

/// Strongly connected classes by transitive closure: class id = smallest member.
pub fn closure_classes(n: usize, arcs: &[(usize, usize)]) -> Vec<usize> {
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
    }
    for &(a, b) in arcs {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n).map(|i| (0..n).find(|&j| r[i][j] && r[j][i]).unwrap()).collect()
}

fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fn rec(i: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for b in 0..=max {
            cur[i] = b;
            rec(i + 1, max.max(b + 1), cur, out);
        }
    }
    if n > 0 {
        rec(1, 1, &mut cur, &mut out);
    }
    out
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

/// Every partition of the column groups (one group per inner vertex) that admits a
/// block lower-triangular arrangement of `m` with square diagonal blocks.
/// `groups[v]` lists the columns of vertex v.
pub fn valid_block_partitions(m: &DMatrix<f64>, groups: &[Vec<usize>], tol: f64) -> Vec<Vec<usize>> {
    let n = groups.len();
    let support: Vec<Vec<usize>> = (0..m.nrows())
        .map(|r| (0..n).filter(|&v| groups[v].iter().any(|&c| m[(r, c)].abs() > tol)).collect())
        .collect();
    let mut valid = Vec::new();
    for part in set_partitions(n) {
        let k = part.iter().max().unwrap() + 1;
        let ok = permutations(k).into_iter().any(|order| {
            // position of each block in the arrangement
            let mut pos = vec![0; k];
            for (i, &b) in order.iter().enumerate() {
                pos[b] = i;
            }
            let mut rows = vec![0usize; k];
            for s in &support {
                if s.is_empty() {
                    return false;
                }
                let top = s.iter().map(|&v| part[v]).max_by_key(|&b| pos[b]).unwrap();
                rows[top] += 1;
            }
            (0..k).all(|b| {
                let cols: usize = (0..n).filter(|&v| part[v] == b).map(|v| groups[v].len()).sum();
                rows[b] == cols
            })
        });
        if ok {
            valid.push(part);
        }
    }
    valid
}

/// `fine` refines `coarse`: vertices together in `fine` are together in `coarse`.
pub fn refines(fine: &[usize], coarse: &[usize]) -> bool {
    (0..fine.len()).all(|i| (0..fine.len()).all(|j| fine[i] != fine[j] || coarse[i] == coarse[j]))
}
