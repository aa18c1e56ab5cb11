//! Adjacency and Laplacian spectra of trees, for comparison with the
//! shape order.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tree::Tree;

const JACOBI_SWEEPS: usize = 100;
const COSPECTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Adjacency eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub spectral_radius: f64,
    pub estrada_index: f64,
    /// Second smallest eigenvalue of `D - A`.
    pub algebraic_connectivity: f64,
    /// Degrees sorted in decreasing order.
    pub degrees: Vec<usize>,
}

/// Cyclic Jacobi rotations on a dense symmetric matrix.
///
/// Returns ascending eigenvalues and the matching eigenvectors as columns.
pub fn symmetric_eigen(matrix: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(Error::Parameter("matrix is not square".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if (matrix[i][j] - matrix[j][i]).abs() > 1e-12 {
                return Err(Error::Parameter("matrix is not symmetric".into()));
            }
        }
    }
    let mut a = matrix.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let mut converged = n < 2;
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numerical("Jacobi iteration did not converge".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = idx.iter().map(|&i| a[i][i]).collect();
    let vectors = (0..n).map(|r| idx.iter().map(|&i| v[r][i]).collect()).collect();
    Ok((values, vectors))
}

fn adjacency(tree: &Tree) -> Vec<Vec<f64>> {
    let d = tree.d();
    let mut a = vec![vec![0.0; d]; d];
    for &(x, y) in tree.edges() {
        a[x - 1][y - 1] = 1.0;
        a[y - 1][x - 1] = 1.0;
    }
    a
}

pub fn spectrum(tree: &Tree) -> Result<SpectrumReport> {
    let a = adjacency(tree);
    let (eigenvalues, _) = symmetric_eigen(&a)?;
    let mut lap: Vec<Vec<f64>> = a.iter().map(|row| row.iter().map(|x| -x).collect()).collect();
    for v in 1..=tree.d() {
        lap[v - 1][v - 1] = tree.degree(v) as f64;
    }
    let (lap_values, _) = symmetric_eigen(&lap)?;
    let spectral_radius = eigenvalues.last().copied().unwrap_or(0.0);
    let estrada_index = eigenvalues.iter().map(|x| x.exp()).sum();
    let algebraic_connectivity = lap_values.get(1).copied().unwrap_or(0.0).max(0.0);
    Ok(SpectrumReport {
        eigenvalues,
        spectral_radius,
        estrada_index,
        algebraic_connectivity,
        degrees: tree.degree_vector(),
    })
}

/// `b` majorizes `a`: equal totals and every prefix sum of the decreasing
/// rearrangement of `b` at least that of `a`.
pub fn majorizes(a: &[usize], b: &[usize]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Parameter(format!("degree vectors of length {} and {}", a.len(), b.len())));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    b.sort_unstable_by(|x, y| y.cmp(x));
    let (mut sa, mut sb) = (0, 0);
    for (x, y) in a.iter().zip(&b) {
        sa += x;
        sb += y;
        if sb < sa {
            return Ok(false);
        }
    }
    Ok(sa == sb)
}

/// Whether two trees share their adjacency spectrum.
pub fn cospectral_pair_check(t1: &Tree, t2: &Tree) -> Result<bool> {
    if t1.d() != t2.d() {
        return Ok(false);
    }
    let s1 = spectrum(t1)?;
    let s2 = spectrum(t2)?;
    Ok(s1.eigenvalues.iter().zip(&s2.eigenvalues).all(|(x, y)| (x - y).abs() < COSPECTRAL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_spectrum_closed_form() {
        let d = 6;
        let s = spectrum(&Tree::path(d)).unwrap();
        let mut expected: Vec<f64> = (1..=d)
            .map(|j| 2.0 * (j as f64 * std::f64::consts::PI / (d as f64 + 1.0)).cos())
            .collect();
        expected.sort_by(f64::total_cmp);
        for (x, y) in s.eigenvalues.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
        let ac = 2.0 * (1.0 - (std::f64::consts::PI / d as f64).cos());
        assert!((s.algebraic_connectivity - ac).abs() < 1e-12);
    }

    #[test]
    fn star_spectrum() {
        let s = spectrum(&Tree::star(10)).unwrap();
        assert!((s.spectral_radius - 3.0).abs() < 1e-12);
        assert!((s.algebraic_connectivity - 1.0).abs() < 1e-12);
        assert_eq!(s.degrees[0], 9);
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let m = vec![vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]];
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        for (c, &lam) in vals.iter().enumerate() {
            for r in 0..3 {
                let mv: f64 = (0..3).map(|k| m[r][k] * vecs[k][c]).sum();
                assert!((mv - lam * vecs[r][c]).abs() < 1e-12);
            }
        }
        assert!(symmetric_eigen(&[vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
    }

    #[test]
    fn majorization() {
        assert!(majorizes(&[2, 2, 1, 1], &[3, 1, 1, 1]).unwrap());
        assert!(!majorizes(&[3, 1, 1, 1], &[2, 2, 1, 1]).unwrap());
        assert!(majorizes(&[2, 2, 1, 1], &[2, 1, 2, 1]).unwrap());
        assert!(majorizes(&[1, 2], &[1]).is_err());
    }
}
