//! Subspaces of R^n held by orthonormal representatives, and the principal
//! angles between them.
//!
//! Three routes to the angles are provided:
//!
//! * [`principal_angles`] takes arccos of the singular values of `UᵀV`;
//! * [`principal_angles_via_eigen`] takes arccos of the square roots of the
//!   eigenvalues of `VᵀUUᵀV`;
//! * [`principal_angles_recursive`] follows the variational definition: find
//!   the best-aligned pair of unit vectors, record their angle, deflate both
//!   subspaces to the orthogonal complements of that pair and repeat.
//!
//! The three share no code path beyond matrix products, which is what makes
//! them useful as cross-checks of one another.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    canonical_sign, clamp_unit, dot, norm, orthonormality_residual, orthonormalize,
    singular_values, symmetric_eigen, Matrix, TolerancePolicy,
};

/// A `k`-dimensional subspace of `R^n`, stored as an `n×k` matrix with
/// orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    rep: Matrix,
}

impl Subspace {
    /// Orthonormalize the columns of `a` (canonical signs) and wrap the result.
    pub fn from_spanning(a: &Matrix, tol: &TolerancePolicy) -> Result<Self> {
        Ok(Self {
            rep: orthonormalize(a, tol)?,
        })
    }

    /// Wrap a matrix that already has orthonormal columns, keeping it as is.
    pub fn from_orthonormal(rep: Matrix, tol: &TolerancePolicy) -> Result<Self> {
        if rep.cols() > rep.rows() {
            return Err(Error::DimensionMismatch(format!(
                "representative is {}x{}, need k <= n",
                rep.rows(),
                rep.cols()
            )));
        }
        let residual = orthonormality_residual(&rep);
        if residual > tol.eps_orth {
            return Err(Error::InvalidArgument(format!(
                "representative is not orthonormal (residual {residual:e})"
            )));
        }
        Ok(Self { rep })
    }

    /// Span of the given standard basis vectors (zero-based indices).
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        if axes.is_empty() || axes.iter().any(|&a| a >= n) {
            return Err(Error::InvalidArgument(format!(
                "axes {axes:?} invalid for R^{n}"
            )));
        }
        let mut rep = Matrix::zeros(n, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            rep[(a, j)] = 1.0;
        }
        Self::from_orthonormal(rep, &TolerancePolicy::default())
    }

    /// Haar-random subspace: orthonormalized standard Gaussian `n×k` matrix.
    pub fn random<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        let tol = TolerancePolicy::default();
        loop {
            let a = gaussian_matrix(n, k, rng);
            match Self::from_spanning(&a, &tol) {
                Ok(s) => return Ok(s),
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.rep.rows()
    }

    pub fn dim(&self) -> usize {
        self.rep.cols()
    }

    pub fn rep(&self) -> &Matrix {
        &self.rep
    }

    pub fn into_rep(self) -> Matrix {
        self.rep
    }

    /// The orthogonal projector `UUᵀ`.
    pub fn projection_matrix(&self) -> Matrix {
        self.rep.matmul(&self.rep.transpose())
    }

    /// Image of the subspace under an orthogonal `n×n` matrix.
    pub fn transformed(&self, q: &Matrix) -> Result<Self> {
        if q.rows() != self.ambient_dim() || !q.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot apply {}x{} matrix to subspace of R^{}",
                q.rows(),
                q.cols(),
                self.ambient_dim()
            )));
        }
        Ok(Self {
            rep: q.matmul(&self.rep),
        })
    }

    /// Same subspace with representative `U·R` for an orthogonal `k×k` matrix `R`.
    pub fn with_basis_change(&self, r: &Matrix) -> Result<Self> {
        if r.rows() != self.dim() || !r.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "basis change must be {0}x{0}",
                self.dim()
            )));
        }
        Ok(Self {
            rep: self.rep.matmul(r),
        })
    }

    /// True when the two projectors agree within `eps_orth`.
    pub fn same_span(&self, other: &Self, tol: &TolerancePolicy) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.dim() == other.dim()
            && self
                .projection_matrix()
                .max_abs_diff(&other.projection_matrix())
                <= tol.eps_orth
    }

    /// Orthogonal complement in `R^n`.
    pub fn complement(&self, tol: &TolerancePolicy) -> Result<Self> {
        let (n, k) = (self.ambient_dim(), self.dim());
        if k == n {
            return Err(Error::FullDimension);
        }
        let mut basis: Vec<Vec<f64>> = self.rep.columns();
        let mut found: Vec<Vec<f64>> = Vec::with_capacity(n - k);
        let mut used = vec![false; n];
        while found.len() < n - k {
            // Pick the standard basis vector least explained by the current basis.
            let mut best: Option<(usize, Vec<f64>, f64)> = None;
            for j in (0..n).filter(|&j| !used[j]) {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                for _ in 0..2 {
                    for q in &basis {
                        let c = dot(q, &e);
                        e.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
                    }
                }
                let r = norm(&e);
                if best.as_ref().is_none_or(|(_, _, br)| r > *br) {
                    best = Some((j, e, r));
                }
            }
            let (j, mut v, r) = best.expect("unused axis available while complement incomplete");
            used[j] = true;
            v.iter_mut().for_each(|x| *x /= r);
            canonical_sign(&mut v, tol.eps_orth);
            basis.push(v.clone());
            found.push(v);
        }
        Self::from_orthonormal(Matrix::from_columns(&found)?, tol)
    }
}

pub(crate) fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data = (0..rows * cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    Matrix::new(rows, cols, data).expect("gaussian samples are finite")
}

/// Haar-random orthogonal `n×n` matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    Subspace::random(n, n, rng)
        .expect("n x n gaussian has full rank almost surely")
        .into_rep()
}

/// Principal angles `0 ≤ θ₁ ≤ … ≤ θ_k ≤ π/2`, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AngleSpectrum {
    angles: Vec<f64>,
}

impl AngleSpectrum {
    pub fn new(mut angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("empty angle spectrum".into()));
        }
        let limit = std::f64::consts::FRAC_PI_2;
        if angles
            .iter()
            .any(|a| !a.is_finite() || *a < 0.0 || *a > limit)
        {
            return Err(Error::InvalidArgument(format!(
                "angles {angles:?} must lie in [0, pi/2]"
            )));
        }
        angles.sort_by(f64::total_cmp);
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.angles[0]
    }

    pub fn max(&self) -> f64 {
        self.angles[self.angles.len() - 1]
    }

    /// Angles strictly above `eps_angle`, ascending.
    pub fn nonzero(&self, eps_angle: f64) -> Vec<f64> {
        self.angles
            .iter()
            .copied()
            .filter(|&a| a > eps_angle)
            .collect()
    }

    /// Largest elementwise difference; infinite when lengths differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.angles
            .iter()
            .zip(&other.angles)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

fn check_pair(u: &Subspace, v: &Subspace) -> Result<()> {
    if u.ambient_dim() != v.ambient_dim() || u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(format!(
            "Gr({},{}) vs Gr({},{})",
            u.dim(),
            u.ambient_dim(),
            v.dim(),
            v.ambient_dim()
        )));
    }
    Ok(())
}

/// `UᵀV` for a compatible pair.
pub fn cross_gram(u: &Subspace, v: &Subspace) -> Result<Matrix> {
    check_pair(u, v)?;
    Ok(u.rep.tr_matmul(&v.rep))
}

/// Spectral route: `θ_i = arccos σ_i(UᵀV)`.
pub fn principal_angles(u: &Subspace, v: &Subspace) -> Result<AngleSpectrum> {
    let m = cross_gram(u, v)?;
    let mut angles = singular_values(&m)
        .into_iter()
        .map(|s| clamp_unit(s).map(f64::acos))
        .collect::<Result<Vec<_>>>()?;
    angles.sort_by(f64::total_cmp);
    Ok(AngleSpectrum { angles })
}

/// Eigenvalue route: `cos² θ_i` are the eigenvalues of `VᵀUUᵀV`.
pub fn principal_angles_via_eigen(
    u: &Subspace,
    v: &Subspace,
    tol: &TolerancePolicy,
) -> Result<AngleSpectrum> {
    let m = cross_gram(u, v)?;
    let gram = m.tr_matmul(&m);
    let mut angles = symmetric_eigen(&gram, tol)?
        .values
        .into_iter()
        .map(|l| clamp_unit(l).map(|c| c.sqrt().acos()))
        .collect::<Result<Vec<_>>>()?;
    angles.sort_by(f64::total_cmp);
    Ok(AngleSpectrum { angles })
}

/// Variational route.
///
/// At each step the maximizer of `⟨Ua, Vb⟩` over unit `a, b` is taken from the
/// top eigenvector `b` of `MᵀM` (`M = UᵀV`) with `a ∝ Mb`; both coordinate
/// spaces are then restricted to the orthogonal complements of `a` and `b`.
/// Meant as an independent check at small sizes, not as a production path.
pub fn principal_angles_recursive(
    u: &Subspace,
    v: &Subspace,
    tol: &TolerancePolicy,
) -> Result<AngleSpectrum> {
    check_pair(u, v)?;
    let mut ub = u.rep.clone();
    let mut vb = v.rep.clone();
    let mut angles = Vec::with_capacity(u.dim());
    loop {
        let m = ub.tr_matmul(&vb);
        let top = symmetric_eigen(&m.tr_matmul(&m), tol)?;
        let b = top.vectors.column(0);
        let mb = m.mul_vec(&b);
        let len = norm(&mb);
        let a: Vec<f64> = if len > 0.0 {
            mb.iter().map(|x| x / len).collect()
        } else {
            let mut e = vec![0.0; m.rows()];
            e[0] = 1.0;
            e
        };
        let x = ub.mul_vec(&a);
        let y = vb.mul_vec(&b);
        let cos = dot(&x, &y);
        angles.push(clamp_unit(cos)?.acos());
        if ub.cols() == 1 {
            break;
        }
        ub = ub.matmul(&coordinate_complement(&a)?);
        vb = vb.matmul(&coordinate_complement(&b)?);
    }
    angles.sort_by(f64::total_cmp);
    Ok(AngleSpectrum { angles })
}

/// `d×(d−1)` orthonormal basis of the complement of the unit vector `w` in R^d.
fn coordinate_complement(w: &[f64]) -> Result<Matrix> {
    let line = Matrix::from_columns(&[w.to_vec()])?;
    let line = Subspace { rep: line };
    Ok(line.complement(&TolerancePolicy::default())?.into_rep())
}

/// Checks that `U⊥, V⊥` have the same nonzero principal angles as `U, V`:
/// both spectra are filtered at `eps_angle`, then compared elementwise within
/// `angle_tol`. Differing counts give `false`.
pub fn complement_duality_check(
    u: &Subspace,
    v: &Subspace,
    tol: &TolerancePolicy,
    angle_tol: f64,
) -> Result<bool> {
    let direct = principal_angles(u, v)?.nonzero(tol.eps_angle);
    let dual = principal_angles(&u.complement(tol)?, &v.complement(tol)?)?.nonzero(tol.eps_angle);
    Ok(direct.len() == dual.len()
        && direct
            .iter()
            .zip(&dual)
            .all(|(a, b)| (a - b).abs() <= angle_tol))
}
