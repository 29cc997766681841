//! Small dense linear algebra over `F_p` and determinants over `Z/mZ`.

use crate::arith::{mul_mod, pow_mod};

fn inv_mod_p(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Row echelon form in place; returns the pivot columns.
fn echelon(rows: &mut [Vec<u64>], cols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = inv_mod_p(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..rows[i].len() {
                    let sub = mul_mod(f, rows[r][j], p);
                    rows[i][j] = (rows[i][j] + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub(crate) fn rank_mod_p(matrix: &[Vec<u64>], p: u64) -> usize {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<u64>> = matrix.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    echelon(&mut rows, cols, p).len()
}

/// All solutions of `A t = b` over `F_p` as a particular solution plus a
/// kernel basis, or `None` when inconsistent. Free variables of the
/// particular solution are zero.
pub(crate) fn solve_mod_p(a: &[Vec<u64>], b: &[u64], cols: usize, p: u64) -> Option<(Vec<u64>, Vec<Vec<u64>>)> {
    let mut rows: Vec<Vec<u64>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r: Vec<u64> = row.iter().map(|x| x % p).collect();
            r.push(bi % p);
            r
        })
        .collect();
    let pivots = echelon(&mut rows, cols, p);
    if rows.iter().skip(pivots.len()).any(|r| r[cols] != 0) {
        return None;
    }
    let mut particular = vec![0u64; cols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = rows[i][cols];
    }
    let mut kernel = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (i, &c) in pivots.iter().enumerate() {
            v[c] = (p - rows[i][free]) % p;
        }
        kernel.push(v);
    }
    Some((particular, kernel))
}

/// Determinant modulo `m` by cofactor expansion; intended for `n <= 6`.
pub(crate) fn det_mod(matrix: &[Vec<u64>], m: u64) -> u64 {
    let n = matrix.len();
    match n {
        0 => 1 % m,
        1 => matrix[0][0] % m,
        2 => {
            let a = mul_mod(matrix[0][0], matrix[1][1], m);
            let b = mul_mod(matrix[0][1], matrix[1][0], m);
            (a + m - b) % m
        }
        _ => {
            let mut acc = 0u64;
            for j in 0..n {
                if matrix[0][j] % m == 0 {
                    continue;
                }
                let minor: Vec<Vec<u64>> = matrix[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect())
                    .collect();
                let term = mul_mod(matrix[0][j] % m, det_mod(&minor, m), m);
                acc = if j % 2 == 0 { (acc + term) % m } else { (acc + m - term) % m };
            }
            acc
        }
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_rank() {
        let a = vec![vec![1, 2, 3], vec![2, 4, 6]];
        assert_eq!(rank_mod_p(&a, 7), 1);
        let (x, ker) = solve_mod_p(&a, &[1, 2], 3, 7).unwrap();
        assert_eq!(ker.len(), 2);
        let check = |v: &[u64], rhs: u64| (v[0] + 2 * v[1] + 3 * v[2]) % 7 == rhs;
        assert!(check(&x, 1));
        for k in &ker {
            assert!(check(k, 0));
        }
        assert!(solve_mod_p(&a, &[1, 3], 3, 7).is_none());
    }

    #[test]
    fn determinants() {
        let m = vec![vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]];
        // 2(3-2) - 0 + 1(1-3) = 0
        assert_eq!(det_mod(&m, 1000), 0);
        let m = vec![vec![4, 1], vec![2, 3]];
        assert_eq!(det_mod(&m, 1000), 10);
        assert_eq!(det_mod(&m, 7), 3);
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }
}
