//! Fixed-size dense linear algebra for the small (≤ 4×4) matrices that occur
//! in pointwise curvature work.

pub type Vec4 = [f64; 4];

#[inline]
pub fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm<const N: usize>(a: &[f64; N]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn scale<const N: usize>(a: &[f64; N], s: f64) -> [f64; N] {
    core::array::from_fn(|i| a[i] * s)
}

#[inline]
pub fn add<const N: usize>(a: &[f64; N], b: &[f64; N]) -> [f64; N] {
    core::array::from_fn(|i| a[i] + b[i])
}

#[inline]
pub fn sub<const N: usize>(a: &[f64; N], b: &[f64; N]) -> [f64; N] {
    core::array::from_fn(|i| a[i] - b[i])
}

/// `a + s * b`
#[inline]
pub fn axpy<const N: usize>(a: &[f64; N], s: f64, b: &[f64; N]) -> [f64; N] {
    core::array::from_fn(|i| a[i] + s * b[i])
}

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of the matrix whose rows are `a, b, c, d`.
pub fn det4(a: &Vec4, b: &Vec4, c: &Vec4, d: &Vec4) -> f64 {
    let rows = [a, b, c, d];
    let mut total = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c2 in 0..4 {
                if c2 != col {
                    minor[r - 1][cc] = rows[r][c2];
                    cc += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * rows[0][col] * det3(&minor);
    }
    total
}

/// Inverse and determinant by Gauss–Jordan elimination with partial pivoting.
/// Returns `None` for an exactly singular matrix.
pub fn inverse<const N: usize>(m: &[[f64; N]; N]) -> Option<([[f64; N]; N], f64)> {
    let mut a = *m;
    let mut inv = [[0.0; N]; N];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..N {
        let pivot = (col..N).max_by(|&i, &j| libm::fabs(a[i][col]).total_cmp(&libm::fabs(a[j][col]))).unwrap_or(col);
        if a[pivot][col] == 0.0 {
            return None;
        }
        if pivot != col {
            a.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for j in 0..N {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..N {
            if i != col {
                let factor = a[i][col];
                if factor != 0.0 {
                    for j in 0..N {
                        a[i][j] -= factor * a[col][j];
                        inv[i][j] -= factor * inv[col][j];
                    }
                }
            }
        }
    }
    Some((inv, det))
}

/// Eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<const N: usize>(m: &[[f64; N]; N]) -> [f64; N] {
    let mut flat = [[0.0; N]; N];
    flat.copy_from_slice(m);
    let ev = symmetric_eigenvalues_flat(flat.as_flattened_mut(), N);
    core::array::from_fn(|i| ev[i])
}

/// Same as [`symmetric_eigenvalues`] for an `n×n` row-major buffer, which is
/// overwritten.
pub fn symmetric_eigenvalues_flat(a: &mut [f64], n: usize) -> alloc::vec::Vec<f64> {
    assert_eq!(a.len(), n * n);
    let at = |i: usize, j: usize| i * n + j;
    for _sweep in 0..64 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    diag += a[at(i, i)] * a[at(i, i)];
                } else {
                    off += a[at(i, j)] * a[at(i, j)];
                }
            }
        }
        if off == 0.0 || off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[at(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[at(q, q)] - a[at(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[at(k, p)];
                    let akq = a[at(k, q)];
                    a[at(k, p)] = c * akp - s * akq;
                    a[at(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[at(p, k)];
                    let aqk = a[at(q, k)];
                    a[at(p, k)] = c * apk - s * aqk;
                    a[at(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: alloc::vec::Vec<f64> = (0..n).map(|i| a[at(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Generalized eigenvalues of the pencil `(a, b)` with `b` symmetric positive
/// definite, i.e. the eigenvalues of `b⁻¹a` measured in the inner product `b`.
pub fn generalized_symmetric_eigenvalues<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> Option<[f64; N]> {
    // Cholesky b = L Lᵀ, then eigenvalues of L⁻¹ a L⁻ᵀ.
    let mut l = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..=i {
            let mut s = b[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = libm::sqrt(s);
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let (linv, _) = inverse(&l)?;
    let mut c = [[0.0; N]; N];
    for i in 0..N {
        for j in 0..N {
            let mut s = 0.0;
            for p in 0..N {
                for q in 0..N {
                    s += linv[i][p] * a[p][q] * linv[j][q];
                }
            }
            c[i][j] = s;
        }
    }
    for i in 0..N {
        for j in (i + 1)..N {
            let avg = 0.5 * (c[i][j] + c[j][i]);
            c[i][j] = avg;
            c[j][i] = avg;
        }
    }
    Some(symmetric_eigenvalues(&c))
}

pub fn max_abs_diff<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..N {
        for j in 0..N {
            m = m.max(libm::fabs(a[i][j] - b[i][j]));
        }
    }
    m
}

pub fn max_abs<const N: usize>(a: &[[f64; N]; N]) -> f64 {
    a.iter().flatten().fold(0.0f64, |m, x| m.max(libm::fabs(*x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, -0.2], [0.5, -0.2, 2.0]];
        let (inv, det) = inverse(&m).unwrap();
        assert!((det - det3(&m)).abs() < 1e-12);
        for i in 0..3 {
            for j in 0..3 {
                let s: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert!((s - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn det4_of_identity_and_swap() {
        let e = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        assert_eq!(det4(&e[0], &e[1], &e[2], &e[3]), 1.0);
        assert_eq!(det4(&e[1], &e[0], &e[2], &e[3]), -1.0);
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        let m = [[2.0, 0.3, -0.1, 0.7], [0.3, 1.0, 0.25, 0.0], [-0.1, 0.25, -0.5, 0.4], [0.7, 0.0, 0.4, 3.0]];
        let ours = symmetric_eigenvalues(&m);
        let na = nalgebra::Matrix4::from_fn(|i, j| m[i][j]);
        let mut theirs: [f64; 4] = core::array::from_fn(|i| na.symmetric_eigenvalues()[i]);
        theirs.sort_by(f64::total_cmp);
        for i in 0..4 {
            assert!((ours[i] - theirs[i]).abs() < 1e-12, "{ours:?} vs {theirs:?}");
        }
    }

    #[test]
    fn generalized_eigenvalues_of_scaled_identity() {
        let a = [[6.0, 0.0], [0.0, 2.0]];
        let b = [[2.0, 0.0], [0.0, 2.0]];
        let ev = generalized_symmetric_eigenvalues(&a, &b).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-15 && (ev[1] - 3.0).abs() < 1e-15);
    }
}
