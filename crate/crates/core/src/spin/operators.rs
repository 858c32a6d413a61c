//! Dense angular-momentum matrices in the |j, m> basis, m = +j ... -j.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Matrix dimension for angular momentum `j` (2j + 1).
pub fn dimension(j: f64) -> usize {
    (2.0 * j + 1.0).round() as usize
}

/// Jx, Jy, Jz for angular momentum `j` (may be half-integer), in units of hbar.
pub fn angular_momentum_matrices(
    j: f64,
) -> (
    DMatrix<Complex64>,
    DMatrix<Complex64>,
    DMatrix<Complex64>,
) {
    let dim = dimension(j);
    let m_of = |k: usize| j - k as f64;

    let mut jz = DMatrix::<Complex64>::zeros(dim, dim);
    let mut jplus = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..dim {
        jz[(k, k)] = Complex64::new(m_of(k), 0.0);
    }
    // J+ |j, m> = sqrt(j(j+1) - m(m+1)) |j, m+1>; column k holds m = m_of(k)
    for k in 1..dim {
        let m = m_of(k);
        jplus[(k - 1, k)] = Complex64::new((j * (j + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let jminus = jplus.adjoint();
    let jx = (&jplus + &jminus).scale(0.5);
    let jy = (&jplus - &jminus) * Complex64::new(0.0, -0.5);
    (jx, jy, jz)
}

/// Identity of the given dimension.
pub fn identity(dim: usize) -> DMatrix<Complex64> {
    DMatrix::identity(dim, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_pauli() {
        let (jx, jy, jz) = angular_momentum_matrices(0.5);
        assert_eq!(jx.nrows(), 2);
        assert!((jx[(0, 1)].re - 0.5).abs() < 1e-15);
        assert!((jy[(0, 1)].im + 0.5).abs() < 1e-15);
        assert!((jz[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((jz[(1, 1)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn commutator_and_casimir() {
        for &j in &[0.5, 1.0, 1.5, 3.5] {
            let (jx, jy, jz) = angular_momentum_matrices(j);
            // [Jx, Jy] = i Jz
            let comm = &jx * &jy - &jy * &jx;
            let expect = jz.clone() * Complex64::new(0.0, 1.0);
            assert!((comm - expect).norm() < 1e-12);
            // J^2 = j(j+1) I
            let j2 = &jx * &jx + &jy * &jy + &jz * &jz;
            let expect = identity(dimension(j)).scale(j * (j + 1.0));
            assert!((j2 - expect).norm() < 1e-12);
        }
    }
}
