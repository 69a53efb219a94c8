//! Small dense kernels for the spectral initializer. Matrices are column-major
//! `Vec<Vec<f64>>` (one `Vec` per column) unless noted.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{dot, fabs, sqrt};

/// In-place modified Gram-Schmidt (two passes). A column that vanishes after
/// projection is replaced by the first standard basis vector that survives,
/// so the result always has orthonormal columns when `cols.len() <= n`.
pub(crate) fn orthonormalize(cols: &mut [Vec<f64>]) {
    let n = cols.first().map_or(0, Vec::len);
    let mut next_basis = 0usize;
    for j in 0..cols.len() {
        let scale = sqrt(dot(&cols[j], &cols[j])).max(1.0);
        loop {
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let c = dot(&done[i], &rest[0]);
                    for (x, q) in rest[0].iter_mut().zip(&done[i]) {
                        *x -= c * q;
                    }
                }
            }
            let nrm = sqrt(dot(&cols[j], &cols[j]));
            if nrm > 1e-10 * scale {
                cols[j].iter_mut().for_each(|x| *x /= nrm);
                break;
            }
            if next_basis >= n {
                // more columns than dimensions; leave it zero
                cols[j].iter_mut().for_each(|x| *x = 0.0);
                break;
            }
            cols[j] = vec![0.0; n];
            cols[j][next_basis] = 1.0;
            next_basis += 1;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric `k × k` matrix given
/// row-major. Returns eigenvalues in descending order and the matching
/// eigenvectors as columns.
pub(crate) fn symmetric_eigen(mut a: Vec<f64>, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    debug_assert_eq!(a.len(), k * k);
    let mut v = vec![0.0; k * k];
    for i in 0..k {
        v[i * k + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..k {
            for q in p + 1..k {
                off += a[p * k + q] * a[p * k + q];
            }
        }
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[p * k + q];
                if fabs(apq) < 1e-300 {
                    continue;
                }
                let theta = (a[q * k + q] - a[p * k + p]) / (2.0 * apq);
                let t = theta.signum() / (fabs(theta) + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for r in 0..k {
                    let (arp, arq) = (a[r * k + p], a[r * k + q]);
                    a[r * k + p] = c * arp - s * arq;
                    a[r * k + q] = s * arp + c * arq;
                }
                for r in 0..k {
                    let (apr, aqr) = (a[p * k + r], a[q * k + r]);
                    a[p * k + r] = c * apr - s * aqr;
                    a[q * k + r] = s * apr + c * aqr;
                }
                for r in 0..k {
                    let (vrp, vrq) = (v[r * k + p], v[r * k + q]);
                    v[r * k + p] = c * vrp - s * vrq;
                    v[r * k + q] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| a[j * k + j].total_cmp(&a[i * k + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * k + i]).collect();
    let vectors = order.iter().map(|&j| (0..k).map(|r| v[r * k + j]).collect()).collect();
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_schmidt_replaces_dependent_columns() {
        let mut cols = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 0.0, 0.0]];
        orthonormalize(&mut cols);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&cols[i], &cols[j]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_diagonalizes() {
        let a = vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 1.0];
        let (vals, vecs) = symmetric_eigen(a.clone(), 3);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        for (lam, x) in vals.iter().zip(&vecs) {
            for r in 0..3 {
                let ax: f64 = (0..3).map(|c| a[r * 3 + c] * x[c]).sum();
                assert!((ax - lam * x[r]).abs() < 1e-12);
            }
        }
        assert!((vals.iter().sum::<f64>() - 8.0).abs() < 1e-12);
    }
}
