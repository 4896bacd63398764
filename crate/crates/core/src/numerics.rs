//! Complex linear-algebra support shared by the whole pipeline: null
//! spaces, PSD projection, log-determinants, and random unitaries.
//!
//! Matrices are dense `nalgebra` matrices over `Complex64` ([`CMat`]) or
//! `f64` ([`RMat`]). All operations are pure functions on immutable inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::rng::SeedStream;

/// Dense complex matrix.
pub type CMat = DMatrix<Complex64>;
/// Dense real matrix.
pub type RMat = DMatrix<f64>;
/// Dense complex vector.
pub type CVec = DVector<Complex64>;

/// Default relative threshold for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NumericsError {
    /// The matrix has no null space: no jamming subspace exists.
    #[error("no jamming subspace: {rows}x{cols} matrix has full column rank")]
    NoJammingSubspace { rows: usize, cols: usize },

    #[error("matrix is not symmetric within tolerance {tol:e} (deviation {dev:e})")]
    NotSymmetric { dev: f64, tol: f64 },

    #[error("matrix is not Hermitian within tolerance {tol:e} (deviation {dev:e})")]
    NotHermitian { dev: f64, tol: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

/// Orthonormal basis of the null space of `a`, as columns of an
/// `N x (N - rank)` matrix.
///
/// The numerical rank is the number of singular values above
/// `tol * sigma_max`. The basis is extracted from the eigenvectors of the
/// projector `I - V_r V_r^H` built from the leading right singular vectors,
/// so the residual `||a * basis||` stays at working precision rather than
/// at the square root of it.
pub fn null_space(a: &CMat, tol: f64) -> Result<CMat> {
    let n = a.ncols();
    let svd = a.clone().svd(false, true);
    let sv = &svd.singular_values;
    let sigma_max = sv.iter().cloned().fold(0.0f64, f64::max);
    let rank = if sigma_max == 0.0 {
        0
    } else {
        sv.iter().filter(|&&s| s > tol * sigma_max).count()
    };
    if rank >= n {
        return Err(NumericsError::NoJammingSubspace {
            rows: a.nrows(),
            cols: n,
        });
    }

    // Projector onto the orthogonal complement of the row space.
    let v_t = svd.v_t.expect("svd requested v_t");
    let mut proj = CMat::identity(n, n);
    for i in 0..rank {
        let vi = v_t.row(i).adjoint(); // i-th right singular vector
        proj -= &vi * vi.adjoint();
    }

    // Hermitian projector: eigenvalues cluster at 0 and 1; the unit
    // eigenvectors are an orthonormal null-space basis.
    let eig = proj.symmetric_eigen();
    let mut cols: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, i))
        .collect();
    cols.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));

    let dim = n - rank;
    let mut basis = CMat::zeros(n, dim);
    for (j, &(_, idx)) in cols.iter().take(dim).enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(idx));
    }
    Ok(basis)
}

/// Nearest (Frobenius) PSD matrix to a real symmetric `s`: eigenvalues are
/// clipped at exactly zero.
pub fn psd_project(s: &RMat) -> Result<RMat> {
    if s.nrows() != s.ncols() {
        return Err(NumericsError::DimensionMismatch(format!(
            "psd_project needs a square matrix, got {}x{}",
            s.nrows(),
            s.ncols()
        )));
    }
    let scale = s.amax().max(1.0);
    let tol = 1e-10;
    let dev = (s - s.transpose()).amax();
    if dev > tol * scale {
        return Err(NumericsError::NotSymmetric {
            dev,
            tol: tol * scale,
        });
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let clipped = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.max(0.0)),
    );
    let out = &eig.eigenvectors * RMat::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    Ok((&out + out.transpose()) * 0.5)
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Natural log of the determinant of a Hermitian positive-definite matrix,
/// via Cholesky. Callers convert bases.
pub fn logdet_hermitian(a: &CMat) -> Result<f64> {
    let scale = max_abs(a).max(1.0);
    let dev = max_abs(&(a - a.adjoint()));
    let tol = 1e-10;
    if dev > tol * scale {
        return Err(NumericsError::NotHermitian {
            dev,
            tol: tol * scale,
        });
    }
    let herm = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(NumericsError::NotPositiveDefinite);
    }
    Ok(eig.eigenvalues.iter().map(|&l| l.ln()).sum())
}

/// Haar-distributed random unitary `T x T` matrix.
///
/// QR of a complex Gaussian matrix with the R-diagonal phases folded into Q.
pub fn random_unitary(t: usize, rng: &mut SeedStream) -> CMat {
    assert!(t >= 1, "unitary size must be at least 1");
    let z = CMat::from_fn(t, t, |_, _| rng.cn(1.0));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..t {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}
