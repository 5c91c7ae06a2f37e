//! Small dense solvers used by the equilibrium solver and the marching schemes.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::C64;

/// Solves the complex 2×2 system `m·x = rhs`; `None` when `m` is singular
/// relative to the size of its entries.
pub fn solve2(m: [[C64; 2]; 2], rhs: [C64; 2]) -> Option<[C64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if !(det.norm() > 1e-14 * scale * scale) {
        return None;
    }
    Some([
        (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    ])
}

/// Least-squares solution of `a·x ≈ b` by Householder QR.
///
/// `a` is `rows × cols`, row-major, with `rows ≥ cols`. Returns `None` if a
/// diagonal entry of `R` falls below `1e-12` times the largest column norm.
pub fn least_squares(a: &[f64], rows: usize, cols: usize, b: &[f64]) -> Option<Vec<f64>> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    if rows < cols {
        return None;
    }
    let mut r = a.to_vec();
    let mut y = b.to_vec();
    let col_scale = (0..cols)
        .map(|j| math::sqrt((0..rows).map(|i| r[i * cols + j] * r[i * cols + j]).sum()))
        .fold(0.0, f64::max);
    if col_scale == 0.0 {
        return None;
    }
    let mut v = vec![0.0; rows];
    for k in 0..cols {
        let norm = math::sqrt((k..rows).map(|i| r[i * cols + k] * r[i * cols + k]).sum());
        if norm <= 1e-12 * col_scale {
            return None;
        }
        let alpha = if r[k * cols + k] > 0.0 { -norm } else { norm };
        for i in k..rows {
            v[i] = r[i * cols + k];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..rows).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let dot: f64 = (k..rows).map(|i| v[i] * r[i * cols + j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..rows {
                r[i * cols + j] -= f * v[i];
            }
        }
        let dot: f64 = (k..rows).map(|i| v[i] * y[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..rows {
            y[i] -= f * v[i];
        }
    }
    let mut x = vec![0.0; cols];
    for k in (0..cols).rev() {
        let s: f64 = ((k + 1)..cols).map(|j| r[k * cols + j] * x[j]).sum();
        x[k] = (y[k] - s) / r[k * cols + k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve2_complex() {
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        let m = [[one, i], [i * 2.0, one * 3.0]];
        let x = [one * 0.5, C64::new(-1.0, 2.0)];
        let rhs = [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]];
        let got = solve2(m, rhs).unwrap();
        assert!((got[0] - x[0]).norm() < 1e-15);
        assert!((got[1] - x[1]).norm() < 1e-15);
        assert!(solve2([[one, one], [one, one]], rhs).is_none());
    }

    #[test]
    fn least_squares_square_and_overdetermined() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let x = least_squares(&a, 2, 2, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        // fit y = 1 + 2t through exact points
        let a = [1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0];
        let x = least_squares(&a, 4, 2, &[1.0, 3.0, 5.0, 7.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
        assert!(least_squares(&[1.0, 2.0, 2.0, 4.0], 2, 2, &[1.0, 1.0]).is_none());
    }
}
