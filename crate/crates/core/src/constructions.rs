//! Equiangular line sets and the subspace families built from them.
//!
//! The line catalog covers the regular simplex (`n + 1` lines in `R^n`), the
//! six diagonals of the icosahedron in `R^3` and coordinate axes. Families are
//! produced by the block lift of `k`-tuples of lines into `Gr(k, kn)`, the
//! chordal lift `U ↦ span(U, e_{n+1})`, and the Plücker embedding.

use serde::{Deserialize, Serialize};

use crate::distances::Metric;
use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::linalg::{determinant, dot, norm, Matrix, TolerancePolicy};
use crate::verification::check_equiangular;

/// Upper limit on the size of a lifted family.
pub const MAX_LIFT_MEMBERS: usize = 1 << 20;

/// Tolerance on `|⟨u, v⟩|` used when accepting a line set as equiangular.
pub const LINE_SET_TOLERANCE: f64 = 1e-9;

/// Unit vectors, one per line, with a shared `|⟨u, v⟩|` for every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSet {
    n: usize,
    vectors: Vec<Vec<f64>>,
    common_cos: f64,
}

impl LineSet {
    /// Normalizes the vectors and checks equiangularity within `equi_tol`.
    pub fn new(vectors: Vec<Vec<f64>>, equi_tol: f64) -> Result<Self> {
        let n = vectors.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::InvalidArgument("line set needs at least one vector".into()));
        }
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch("line vectors differ in length".into()));
        }
        let vectors = vectors
            .into_iter()
            .map(|v| {
                let len = norm(&v);
                if !(len.is_finite() && len > 0.0) {
                    return Err(Error::InvalidArgument("zero or non-finite line vector".into()));
                }
                Ok(v.into_iter().map(|x| x / len).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;

        let cosines: Vec<f64> = pairs(vectors.len())
            .map(|(i, j)| dot(&vectors[i], &vectors[j]).abs())
            .collect();
        let common_cos = if cosines.is_empty() {
            0.0
        } else {
            cosines.iter().sum::<f64>() / cosines.len() as f64
        };
        let deviation = cosines
            .iter()
            .fold(0.0_f64, |m, c| m.max((c - common_cos).abs()));
        if deviation > equi_tol {
            return Err(Error::NotEquiangular(format!(
                "pairwise |cos| deviates by {deviation:e} from mean {common_cos}"
            )));
        }
        Ok(Self {
            n,
            vectors,
            common_cos: common_cos.min(1.0),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn common_cos(&self) -> f64 {
        self.common_cos
    }

    /// The common angle `arccos(common_cos)`.
    pub fn common_angle(&self) -> f64 {
        self.common_cos.acos()
    }

    /// The lines viewed as members of `Gr(1, n)`.
    pub fn to_family(&self, tol: &TolerancePolicy) -> Result<SubspaceFamily> {
        let members = self
            .vectors
            .iter()
            .map(|v| Subspace::from_orthonormal(Matrix::from_columns(std::slice::from_ref(v))?, tol))
            .collect::<Result<Vec<_>>>()?;
        let mut family = SubspaceFamily::new(1, self.n, members, "lines")?;
        family.common_angle = Some(self.common_angle());
        Ok(family)
    }
}

/// Subspaces sharing `(k, n)`, with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceFamily {
    k: usize,
    n: usize,
    members: Vec<Subspace>,
    pub provenance: String,
    pub metric: Option<Metric>,
    pub common_angle: Option<f64>,
}

impl SubspaceFamily {
    pub fn new(
        k: usize,
        n: usize,
        members: Vec<Subspace>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!(
                "family needs 1 <= k <= n, got k={k}, n={n}"
            )));
        }
        if let Some((i, s)) = members
            .iter()
            .enumerate()
            .find(|(_, s)| s.dim() != k || s.ambient_dim() != n)
        {
            return Err(Error::DimensionMismatch(format!(
                "member {i} lies in Gr({},{}), family is Gr({k},{n})",
                s.dim(),
                s.ambient_dim()
            )));
        }
        Ok(Self {
            k,
            n,
            members,
            provenance: provenance.into(),
            metric: None,
            common_angle: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[Subspace] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<&Subspace> {
        self.members.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.members.len(),
        })
    }

    /// Keep only the members at `indices`, in that order.
    pub fn subfamily(&self, indices: &[usize]) -> Result<Self> {
        let members = indices
            .iter()
            .map(|&i| self.get(i).cloned())
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::new(self.k, self.n, members, self.provenance.clone())?;
        out.metric = self.metric;
        out.common_angle = self.common_angle;
        Ok(out)
    }

    /// True when every pair of projectors differs by more than `eps_orth`.
    pub fn members_distinct(&self, tol: &TolerancePolicy) -> bool {
        let projectors: Vec<Matrix> = self.members.iter().map(Subspace::projection_matrix).collect();
        pairs(projectors.len()).all(|(i, j)| projectors[i].max_abs_diff(&projectors[j]) > tol.eps_orth)
    }

    /// Orthogonal complements of every member, in `Gr(n − k, n)`.
    pub fn complement(&self, tol: &TolerancePolicy) -> Result<Self> {
        if self.k == self.n {
            return Err(Error::FullDimension);
        }
        let members = self
            .members
            .iter()
            .map(|s| s.complement(tol))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::new(
            self.n - self.k,
            self.n,
            members,
            format!("complement({})", self.provenance),
        )?;
        out.metric = self.metric;
        out.common_angle = self.common_angle;
        Ok(out)
    }
}

/// Pairs `(i, j)`, `i < j`, in lexicographic order.
pub(crate) fn pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..m).flat_map(move |i| ((i + 1)..m).map(move |j| (i, j)))
}

/// Vertices of the regular simplex: `n + 1` unit vectors in `R^n` with pairwise
/// inner product `−1/n`.
///
/// The centred basis vectors `e_i − 𝟙/(n+1)` of `R^{n+1}` are expressed in the
/// orthonormal Helmert basis of the hyperplane `Σ x = 0`, then rescaled.
pub fn simplex_lines(n: usize) -> Result<LineSet> {
    if n < 2 {
        return Err(Error::BadParams(format!("simplex lines need n >= 2, got {n}")));
    }
    let scale = ((n + 1) as f64 / n as f64).sqrt();
    let vectors = (0..=n)
        .map(|i| {
            (1..=n)
                .map(|j| {
                    // Helmert row j: (1, …, 1, −j, 0, …) / sqrt(j(j+1)).
                    let h = (j * (j + 1)) as f64;
                    let entry = match i.cmp(&j) {
                        std::cmp::Ordering::Less => 1.0,
                        std::cmp::Ordering::Equal => -(j as f64),
                        std::cmp::Ordering::Greater => 0.0,
                    };
                    scale * entry / h.sqrt()
                })
                .collect()
        })
        .collect();
    LineSet::new(vectors, LINE_SET_TOLERANCE)
}

/// The six diagonals of the icosahedron, at common angle `arccos(1/√5)`.
pub fn icosahedral_lines() -> LineSet {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let vectors = vec![
        vec![0.0, 1.0, phi],
        vec![0.0, 1.0, -phi],
        vec![1.0, phi, 0.0],
        vec![1.0, -phi, 0.0],
        vec![phi, 0.0, 1.0],
        vec![phi, 0.0, -1.0],
    ];
    LineSet::new(vectors, LINE_SET_TOLERANCE).expect("icosahedral diagonals are equiangular")
}

/// The coordinate axes of `R^n`.
pub fn orthonormal_lines(n: usize) -> Result<LineSet> {
    if n == 0 {
        return Err(Error::BadParams("orthonormal lines need n >= 1".into()));
    }
    let vectors = (0..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    LineSet::new(vectors, LINE_SET_TOLERANCE)
}

/// Block column: `u` placed in coordinates `[block·n, (block+1)·n)` of `R^{kn}`.
/// This is the row-major flattening of the `k×n` matrix `e_block uᵀ`.
pub fn flatten_outer(block: usize, k: usize, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; k * n];
    out[block * n..(block + 1) * n].copy_from_slice(u);
    out
}

/// All `N^k` subspaces `W_{u₁…u_k} = span(e_1 u₁ᵀ, …, e_k u_kᵀ) ⊂ R^{kn}`,
/// tuples enumerated lexicographically (first slot most significant).
///
/// Every pair of members has principal angles in `{0, α}` where `α` is the
/// common angle of `lines`.
pub fn lift_lines_to_subspaces(
    lines: &LineSet,
    k: usize,
    tol: &TolerancePolicy,
) -> Result<SubspaceFamily> {
    if k == 0 {
        return Err(Error::BadParams("lift needs k >= 1".into()));
    }
    if lines.common_cos() >= tol.eps_angle.cos() {
        return Err(Error::AngleZero(lines.common_cos()));
    }
    let count = lines.len();
    let total = u32::try_from(k)
        .ok()
        .and_then(|k| count.checked_pow(k))
        .filter(|&t| t <= MAX_LIFT_MEMBERS)
        .ok_or_else(|| {
            Error::BadParams(format!(
                "lift of {count} lines with k={k} exceeds {MAX_LIFT_MEMBERS} members"
            ))
        })?;
    let n = lines.ambient_dim();
    let mut members = Vec::with_capacity(total);
    let mut tuple = vec![0usize; k];
    for _ in 0..total {
        let columns: Vec<Vec<f64>> = tuple
            .iter()
            .enumerate()
            .map(|(block, &line)| flatten_outer(block, k, &lines.vectors()[line]))
            .collect();
        members.push(Subspace::from_orthonormal(Matrix::from_columns(&columns)?, tol)?);
        // Odometer step, last slot fastest.
        for slot in (0..k).rev() {
            tuple[slot] += 1;
            if tuple[slot] < count {
                break;
            }
            tuple[slot] = 0;
        }
    }
    let mut family = SubspaceFamily::new(k, k * n, members, format!("lift(k={k})"))?;
    family.common_angle = Some(lines.common_angle());
    Ok(family)
}

/// `U ↦ span(U, e_{n+1})`: every representative gains a zero row and the new
/// column `e_{n+1}`. Chordal distances are unchanged.
pub fn chordal_lift(family: &SubspaceFamily, tol: &TolerancePolicy) -> Result<SubspaceFamily> {
    let (k, n) = (family.dim(), family.ambient_dim());
    let members = family
        .members()
        .iter()
        .map(|s| {
            let mut rep = Matrix::zeros(n + 1, k + 1);
            for i in 0..n {
                for j in 0..k {
                    rep[(i, j)] = s.rep()[(i, j)];
                }
            }
            rep[(n, k)] = 1.0;
            Subspace::from_orthonormal(rep, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SubspaceFamily::new(
        k + 1,
        n + 1,
        members,
        format!("chordal-lift({})", family.provenance),
    )?;
    out.metric = family.metric;
    out.common_angle = family.common_angle;
    Ok(out)
}

/// `k`-element subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let Some(pos) = (0..k).rev().find(|&i| current[i] < n - k + i) else {
            return out;
        };
        current[pos] += 1;
        for i in pos + 1..k {
            current[i] = current[i - 1] + 1;
        }
    }
}

/// Plücker coordinates of `U`: the `k×k` minors of its representative over
/// row subsets in lexicographic order. `⟨φ(U), φ(V)⟩ = det(UᵀV)`.
pub fn plucker_embed(u: &Subspace) -> Result<Vec<f64>> {
    k_subsets(u.ambient_dim(), u.dim())
        .iter()
        .map(|rows| determinant(&u.rep().select_rows(rows)))
        .collect()
}

/// Lines along `φ(U_i)` for a family equiangular under the Fubini–Study distance.
pub fn plucker_line_family(
    family: &SubspaceFamily,
    tol: &TolerancePolicy,
    equi_tol: f64,
) -> Result<LineSet> {
    if family.is_empty() {
        return Err(Error::FamilyTooSmall(0));
    }
    if family.len() >= 2 {
        let report = check_equiangular(family, Metric::FubiniStudy, tol, equi_tol)?;
        if !report.verdict {
            return Err(Error::NotEquiangular(format!(
                "Fubini-Study distances deviate by {:e}",
                report.max_deviation
            )));
        }
    }
    let vectors = family
        .members()
        .iter()
        .map(plucker_embed)
        .collect::<Result<Vec<_>>>()?;
    LineSet::new(vectors, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::principal_angles;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    /// Explicit simplex vertices: centred basis vectors of R^{n+1}, compared
    /// through their own Gram matrix.
    fn centred_gram(n: usize) -> Vec<Vec<f64>> {
        let m = n + 1;
        let verts: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| if i == j { 1.0 } else { 0.0 } - 1.0 / m as f64)
                    .collect()
            })
            .collect();
        verts
            .iter()
            .map(|a| verts.iter().map(|b| dot(a, b) / dot(a, a)).collect())
            .collect()
    }

    #[test]
    fn simplex_matches_centred_vertices() {
        for n in 2..7 {
            let lines = simplex_lines(n).unwrap();
            assert_eq!(lines.len(), n + 1);
            let gram = centred_gram(n);
            for (i, j) in pairs(n + 1) {
                let d = dot(&lines.vectors()[i], &lines.vectors()[j]);
                assert!((d - gram[i][j]).abs() < 1e-12);
                assert!((d + 1.0 / n as f64).abs() < 1e-12);
            }
            assert!((lines.common_cos() - 1.0 / n as f64).abs() < 1e-12);
        }
        assert!((simplex_lines(2).unwrap().common_angle() - FRAC_PI_3).abs() < 1e-12);
        assert!(simplex_lines(1).is_err());
    }

    #[test]
    fn icosahedral_catalog() {
        let lines = icosahedral_lines();
        assert_eq!(lines.len(), 6);
        for v in lines.vectors() {
            assert!((norm(v) - 1.0).abs() < 1e-12);
        }
        for (i, j) in pairs(6) {
            let d = dot(&lines.vectors()[i], &lines.vectors()[j]).abs();
            assert!((d - 0.4472135955).abs() < 1e-9);
        }
    }

    #[test]
    fn orthonormal_catalog() {
        assert_eq!(orthonormal_lines(1).unwrap().len(), 1);
        let l = orthonormal_lines(3).unwrap();
        assert_eq!(l.len(), 3);
        assert_eq!(l.common_angle(), FRAC_PI_2);
        assert_eq!(orthonormal_lines(5).unwrap().common_cos(), 0.0);
    }

    #[test]
    fn non_equiangular_rejected() {
        let r = LineSet::new(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], 1e-9);
        assert!(matches!(r, Err(Error::NotEquiangular(_))));
    }

    #[test]
    fn lift_simplex_k2() {
        let lines = simplex_lines(2).unwrap();
        let fam = lift_lines_to_subspaces(&lines, 2, &tol()).unwrap();
        assert_eq!(fam.len(), 9);
        assert_eq!((fam.dim(), fam.ambient_dim()), (2, 4));
        assert!(fam.members_distinct(&tol()));
        // Member 5 is the tuple (1, 2).
        let rep = fam.members()[5].rep();
        assert_eq!(rep.column(0), flatten_outer(0, 2, &lines.vectors()[1]));
        assert_eq!(rep.column(1), flatten_outer(1, 2, &lines.vectors()[2]));
        for (i, j) in pairs(9) {
            let s = principal_angles(&fam.members()[i], &fam.members()[j]).unwrap();
            assert!(s
                .angles()
                .iter()
                .all(|a| a.abs() < 1e-7 || (a - FRAC_PI_3).abs() < 1e-8));
            assert!((s.max() - FRAC_PI_3).abs() < 1e-8);
        }
    }

    #[test]
    fn lift_k1_recovers_lines() {
        let lines = icosahedral_lines();
        let fam = lift_lines_to_subspaces(&lines, 1, &tol()).unwrap();
        assert_eq!(fam.len(), 6);
        for (s, v) in fam.members().iter().zip(lines.vectors()) {
            assert_eq!(&s.rep().column(0), v);
        }
    }

    #[test]
    fn lift_errors() {
        let parallel = LineSet::new(vec![vec![1.0, 0.0], vec![2.0, 0.0]], 1e-9).unwrap();
        assert!(matches!(
            lift_lines_to_subspaces(&parallel, 2, &tol()),
            Err(Error::AngleZero(_))
        ));
        let lines = simplex_lines(2).unwrap();
        assert!(lift_lines_to_subspaces(&lines, 0, &tol()).is_err());
        assert!(lift_lines_to_subspaces(&lines, 30, &tol()).is_err());
    }

    #[test]
    fn block_inner_product_identity() {
        let u = [0.3, -0.4, 0.5];
        let v = [0.1, 0.7, -0.2];
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&flatten_outer(i, 3, &u), &flatten_outer(j, 3, &v));
                let expected = if i == j { dot(&u, &v) } else { 0.0 };
                assert!((d - expected).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chordal_lift_examples() {
        let lines = orthonormal_lines(2).unwrap().to_family(&tol()).unwrap();
        let lifted = chordal_lift(&lines, &tol()).unwrap();
        assert_eq!((lifted.dim(), lifted.ambient_dim()), (2, 3));
        let d = crate::distances::evaluate(
            Metric::Chordal,
            &lifted.members()[0],
            &lifted.members()[1],
            &tol(),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-12);

        let empty = SubspaceFamily::new(2, 4, vec![], "empty").unwrap();
        let lifted = chordal_lift(&empty, &tol()).unwrap();
        assert!(lifted.is_empty());
        assert_eq!((lifted.dim(), lifted.ambient_dim()), (3, 5));
    }

    #[test]
    fn subsets_lexicographic() {
        assert_eq!(
            k_subsets(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(k_subsets(5, 3).len(), 10);
        assert_eq!(k_subsets(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn plucker_coordinate_plane() {
        let u = Subspace::coordinate(4, &[0, 1]).unwrap();
        assert_eq!(plucker_embed(&u).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn plucker_lines_for_orthogonal_planes() {
        let fam = SubspaceFamily::new(
            2,
            4,
            vec![
                Subspace::coordinate(4, &[0, 1]).unwrap(),
                Subspace::coordinate(4, &[2, 3]).unwrap(),
            ],
            "test",
        )
        .unwrap();
        let lines = plucker_line_family(&fam, &tol(), 1e-8).unwrap();
        assert_eq!(lines.ambient_dim(), 6);
        assert_eq!(lines.common_cos(), 0.0);
    }

    #[test]
    fn plucker_identity_on_lines() {
        let lines = simplex_lines(2).unwrap();
        let fam = lines.to_family(&tol()).unwrap();
        let out = plucker_line_family(&fam, &tol(), 1e-8).unwrap();
        for (a, b) in out.vectors().iter().zip(lines.vectors()) {
            assert!(a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15));
        }
    }

    #[test]
    fn plucker_rejects_non_equiangular() {
        let fam = SubspaceFamily::new(
            1,
            2,
            vec![
                Subspace::coordinate(2, &[0]).unwrap(),
                Subspace::coordinate(2, &[1]).unwrap(),
                Subspace::from_spanning(&Matrix::from_columns(&[vec![1.0, 1.0]]).unwrap(), &tol())
                    .unwrap(),
            ],
            "test",
        )
        .unwrap();
        assert!(matches!(
            plucker_line_family(&fam, &tol(), 1e-8),
            Err(Error::NotEquiangular(_))
        ));
    }

    #[test]
    fn family_dimension_checks() {
        let r = SubspaceFamily::new(
            2,
            4,
            vec![Subspace::coordinate(4, &[0]).unwrap()],
            "bad",
        );
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        assert!(SubspaceFamily::new(3, 2, vec![], "bad").is_err());
    }
}
