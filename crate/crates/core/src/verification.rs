//! Equiangularity and equi-isoclinicity checks, the polynomial certificate for
//! the angle-distance upper bound, and closed-form bounds.

use serde::{Deserialize, Serialize};

use crate::constructions::{pairs, SubspaceFamily};
use crate::distances::{evaluate, Metric};
use crate::error::{Error, Result};
use crate::grassmann::{cross_gram, Subspace};
use crate::linalg::{determinant, Matrix, TolerancePolicy};

/// Default absolute tolerance on certificate entries, before scaling.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquiangularReport {
    pub metric: Metric,
    /// The mean pairwise distance when the verdict holds.
    pub common_value: Option<f64>,
    pub mean_value: f64,
    pub max_deviation: f64,
    pub pair_count: usize,
    pub tolerance: f64,
    pub verdict: bool,
}

/// Pairwise distances under `metric`, compared against their mean.
pub fn check_equiangular(
    family: &SubspaceFamily,
    metric: Metric,
    tol: &TolerancePolicy,
    equi_tol: f64,
) -> Result<EquiangularReport> {
    let m = family.len();
    if m < 2 {
        return Err(Error::FamilyTooSmall(m));
    }
    let members = family.members();
    let distances = pairs(m)
        .map(|(i, j)| evaluate(metric, &members[i], &members[j], tol))
        .collect::<Result<Vec<_>>>()?;
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    let max_deviation = distances
        .iter()
        .fold(0.0_f64, |d, x| d.max((x - mean).abs()));
    let verdict = max_deviation <= equi_tol;
    Ok(EquiangularReport {
        metric,
        common_value: verdict.then_some(mean),
        mean_value: mean,
        max_deviation,
        pair_count: distances.len(),
        tolerance: equi_tol,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoclinicReport {
    /// Grand mean of the diagonal of `VᵀUUᵀV` over all pairs.
    pub lambda: f64,
    /// Largest `‖VᵀUUᵀV − λI‖_max` over pairs.
    pub max_deviation: f64,
    pub pair_count: usize,
    pub tolerance: f64,
    pub verdict: bool,
}

/// Checks `VᵀUUᵀV = λI` for one `λ ∈ [0, 1)` shared by every distinct pair.
pub fn check_equiisoclinic(family: &SubspaceFamily, equi_tol: f64) -> Result<IsoclinicReport> {
    let m = family.len();
    if m < 2 {
        return Err(Error::FamilyTooSmall(m));
    }
    let k = family.dim();
    let members = family.members();
    let grams = pairs(m)
        .map(|(i, j)| {
            let c = cross_gram(&members[i], &members[j])?;
            Ok(c.tr_matmul(&c))
        })
        .collect::<Result<Vec<Matrix>>>()?;
    let lambda = grams.iter().map(Matrix::trace).sum::<f64>() / (grams.len() * k) as f64;
    let target = Matrix::identity(k).scale(lambda);
    let max_deviation = grams
        .iter()
        .fold(0.0_f64, |d, g| d.max(g.max_abs_diff(&target)));
    Ok(IsoclinicReport {
        lambda,
        max_deviation,
        pair_count: grams.len(),
        tolerance: equi_tol,
        verdict: max_deviation <= equi_tol && lambda < 1.0 - equi_tol,
    })
}

/// `f(X) = det(UᵀXU − (λ tr(X)/k) I_k)`, the degree-`k` polynomial attached to
/// a member `U` in the upper-bound argument.
pub fn certificate_polynomial(u: &Subspace, x: &Matrix, lambda: f64) -> Result<f64> {
    let n = u.ambient_dim();
    if x.rows() != n || x.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "polynomial argument must be {n}x{n}, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    let k = u.dim();
    let compressed = u.rep().tr_matmul(&x.matmul(u.rep()));
    let shift = Matrix::identity(k).scale(lambda * x.trace() / k as f64);
    determinant(&compressed.sub(&shift))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    /// `cos² α`.
    pub lambda: f64,
    /// `(1 − λ)^k`, the value every diagonal entry must take.
    pub expected_diagonal: f64,
    /// Entry `(i, j)` is `f_i(U_j U_jᵀ)`.
    pub eval_matrix: Vec<Vec<f64>>,
    pub max_diagonal_deviation: f64,
    pub max_off_diagonal: f64,
    /// Absolute tolerance actually applied, `tol · (1 + |1 − λ|^k)`.
    pub tolerance: f64,
    pub bound: u64,
    pub verdict: bool,
}

/// Evaluates the certificate polynomials of every member at every member's
/// projector. A diagonal matrix with nonzero diagonal shows the polynomials are
/// linearly independent, so the family size is at most the dimension of the
/// space of degree-`k` forms on symmetric `n×n` matrices.
pub fn certify_theorem1(
    family: &SubspaceFamily,
    alpha: f64,
    tol: &TolerancePolicy,
    cert_tol: f64,
) -> Result<Certificate> {
    if alpha.is_nan() || alpha <= tol.eps_angle {
        return Err(Error::AlphaZero(alpha));
    }
    let m = family.len();
    if m == 0 {
        return Err(Error::FamilyTooSmall(0));
    }
    let (k, n) = (family.dim(), family.ambient_dim());
    let lambda = alpha.cos().powi(2);
    let expected_diagonal = (1.0 - lambda).powi(k as i32);
    let tolerance = cert_tol * (1.0 + (1.0 - lambda).abs().powi(k as i32));
    let bound = bound_theorem1(k as u64, n as u64)?;

    let projectors: Vec<Matrix> = family
        .members()
        .iter()
        .map(Subspace::projection_matrix)
        .collect();
    let eval_matrix = family
        .members()
        .iter()
        .map(|u| {
            projectors
                .iter()
                .map(|p| certificate_polynomial(u, p, lambda))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_diagonal_deviation = 0.0_f64;
    let mut max_off_diagonal = 0.0_f64;
    for (i, row) in eval_matrix.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i == j {
                max_diagonal_deviation = max_diagonal_deviation.max((v - expected_diagonal).abs());
            } else {
                max_off_diagonal = max_off_diagonal.max(v.abs());
            }
        }
    }
    let verdict = max_diagonal_deviation <= tolerance
        && max_off_diagonal <= tolerance
        && (m as u64) <= bound;
    Ok(Certificate {
        m,
        k,
        n,
        alpha,
        lambda,
        expected_diagonal,
        eval_matrix,
        max_diagonal_deviation,
        max_off_diagonal,
        tolerance,
        bound,
        verdict,
    })
}

/// Exact binomial coefficient, `Overflow` when it does not fit in `u64`.
pub fn binomial(n: u64, r: u64) -> Result<u64> {
    if r > n {
        return Ok(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc · (n − i) is divisible by (i + 1) at every step.
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or(Error::Overflow("binomial"))?
            / u128::from(i + 1);
    }
    u64::try_from(acc).map_err(|_| Error::Overflow("binomial"))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg()))
    }
}

fn check_kn(k: u64, n: u64) -> Result<()> {
    require(1 <= k && k <= n, || format!("need 1 <= k <= n, got k={k}, n={n}"))
}

/// Gerzon's bound on equiangular lines: `C(n+1, 2)`.
pub fn bound_gerzon(n: u64) -> Result<u64> {
    require(n >= 1, || "n must be positive".into())?;
    binomial(n + 1, 2)
}

/// de Caen's construction size: for `n = 3·2^{2t−1} − 1`, at least
/// `2(n+1)²/9` equiangular lines. Returns `(n, bound)`.
pub fn bound_decaen(t: u32) -> Result<(u64, u64)> {
    require(t >= 1, || "t must be positive".into())?;
    let n_plus_one = 2u128
        .checked_pow(2 * t - 1)
        .and_then(|p| p.checked_mul(3))
        .ok_or(Error::Overflow("de Caen n"))?;
    let n = u64::try_from(n_plus_one - 1).map_err(|_| Error::Overflow("de Caen n"))?;
    let numerator = n_plus_one
        .checked_mul(n_plus_one)
        .and_then(|s| s.checked_mul(2))
        .ok_or(Error::Overflow("de Caen bound"))?;
    debug_assert_eq!(numerator % 9, 0);
    let bound = u64::try_from(numerator / 9).map_err(|_| Error::Overflow("de Caen bound"))?;
    Ok((n, bound))
}

/// Recognizes `n = 3·2^{2t−1} − 1` and returns `t`.
pub fn decaen_parameter(n: u64) -> Option<u32> {
    let m = n.checked_add(1)?;
    if m % 3 != 0 {
        return None;
    }
    let p = m / 3;
    if !p.is_power_of_two() {
        return None;
    }
    let e = p.trailing_zeros();
    (e % 2 == 1).then_some(e.div_ceil(2))
}

/// Upper bound for any angle distance with positive common angle:
/// `C(C(n+1,2) + k − 1, k)`.
pub fn bound_theorem1(k: u64, n: u64) -> Result<u64> {
    check_kn(k, n)?;
    let vars = binomial(n + 1, 2)?;
    let top = vars
        .checked_add(k - 1)
        .ok_or(Error::Overflow("theorem-1 bound"))?;
    binomial(top, k)
}

/// Blokhuis' bound for planes under `θ₁`: `C(2n+3, 4)`.
pub fn bound_blokhuis(n: u64) -> Result<u64> {
    require(n >= 2, || format!("need n >= 2, got {n}"))?;
    binomial(2 * n + 3, 4)
}

/// Chordal simplex bound: `C(n+1, 2)`.
pub fn bound_chordal(n: u64) -> Result<u64> {
    require(n >= 1, || "n must be positive".into())?;
    binomial(n + 1, 2)
}

/// Fubini–Study bound via Plücker lines: `C(C(n,k)+1, 2)`.
pub fn bound_fubini_study(k: u64, n: u64) -> Result<u64> {
    check_kn(k, n)?;
    let dim = binomial(n, k)?;
    binomial(
        dim.checked_add(1).ok_or(Error::Overflow("Fubini-Study bound"))?,
        2,
    )
}

/// Equi-isoclinic bound: `C(n+1,2) − C(k+1,2) + 1`.
pub fn bound_lemmens_seidel(k: u64, n: u64) -> Result<u64> {
    check_kn(k, n)?;
    Ok(binomial(n + 1, 2)? - binomial(k + 1, 2)? + 1)
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChrssSize {
    pub k: u64,
    pub n: u64,
    pub size: u64,
}

/// Dimensions of the Hadamard-based chordal-equiangular family for an odd
/// prime `p`: `C(p+1, 2)` subspaces of dimension `(p−1)/2` in `R^p`.
pub fn size_chrss(p: u64) -> Result<ChrssSize> {
    if p.is_multiple_of(2) || !is_prime(p) {
        return Err(Error::NotOddPrime(p));
    }
    Ok(ChrssSize {
        k: (p - 1) / 2,
        n: p,
        size: binomial(p + 1, 2)?,
    })
}

/// Every bound applicable to `Gr(k, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsTable {
    pub k: u64,
    pub n: u64,
    pub gerzon: Option<u64>,
    pub theorem1: u64,
    pub blokhuis: Option<u64>,
    pub chordal: u64,
    pub fubini_study: u64,
    pub lemmens_seidel: u64,
    /// `(t, lines)` when `n = 3·2^{2t−1} − 1`.
    pub decaen: Option<(u32, u64)>,
    /// Present when `(k, n) = ((p−1)/2, p)` for an odd prime `p`.
    pub chrss: Option<u64>,
}

pub fn bounds_table(k: u64, n: u64) -> Result<BoundsTable> {
    check_kn(k, n)?;
    let decaen = decaen_parameter(n)
        .map(|t| bound_decaen(t).map(|(_, b)| (t, b)))
        .transpose()?;
    let chrss = match size_chrss(n) {
        Ok(c) if c.k == k => Some(c.size),
        _ => None,
    };
    Ok(BoundsTable {
        k,
        n,
        gerzon: if k == 1 { Some(bound_gerzon(n)?) } else { None },
        theorem1: bound_theorem1(k, n)?,
        blokhuis: if k == 2 { Some(bound_blokhuis(n)?) } else { None },
        chordal: bound_chordal(n)?,
        fubini_study: bound_fubini_study(k, n)?,
        lemmens_seidel: bound_lemmens_seidel(k, n)?,
        decaen,
        chrss,
    })
}
