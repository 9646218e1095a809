//! JSON file formats.
//!
//! A family file looks like
//!
//! ```json
//! {
//!   "schema_version": "1",
//!   "kind": "subspaces",
//!   "n": 4,
//!   "k": 2,
//!   "members": [[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]],
//!   "metadata": {"provenance": "lift(k=2)"}
//! }
//! ```
//!
//! Subspace members are row-major `n×k` matrices; line members (`kind =
//! "lines"`, `k = 1`) are plain length-`n` vectors. Floats are written with
//! 17 significant digits.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::constructions::{LineSet, SubspaceFamily};
use crate::distances::Metric;
use crate::error::{Error, Result};
use crate::grassmann::Subspace;
use crate::linalg::{orthonormality_residual, Matrix, TolerancePolicy};
use crate::optimizer::{HistoryPoint, PackingProblem, PackingResult};
use crate::verification::Certificate;

pub const SCHEMA_VERSION: &str = "1";

/// Certificates with more members than this are written without the full
/// evaluation matrix.
pub const CERTIFICATE_MATRIX_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, SerializeDerive, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Lines,
    Subspaces,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
#[serde(untagged)]
pub enum Member {
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct FamilyFile {
    pub schema_version: String,
    pub kind: FamilyKind,
    pub n: usize,
    pub k: usize,
    pub members: Vec<Member>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl FamilyFile {
    /// Families with `k = 1` are written as lines.
    pub fn from_family(family: &SubspaceFamily) -> Self {
        let (k, n) = (family.dim(), family.ambient_dim());
        let kind = if k == 1 {
            FamilyKind::Lines
        } else {
            FamilyKind::Subspaces
        };
        let members = family
            .members()
            .iter()
            .map(|s| match kind {
                FamilyKind::Lines => Member::Vector(s.rep().column(0)),
                FamilyKind::Subspaces => Member::Matrix(s.rep().to_rows()),
            })
            .collect();
        let mut metadata = BTreeMap::new();
        metadata.insert("provenance".into(), Value::from(family.provenance.clone()));
        if let Some(m) = family.metric {
            metadata.insert("metric".into(), Value::from(m.id()));
        }
        if let Some(a) = family.common_angle {
            metadata.insert("common_angle".into(), Value::from(a));
        }
        Self {
            schema_version: SCHEMA_VERSION.into(),
            kind,
            n,
            k,
            members,
            metadata,
        }
    }

    pub fn from_line_set(lines: &LineSet, provenance: &str) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("provenance".into(), Value::from(provenance));
        metadata.insert("common_cos".into(), Value::from(lines.common_cos()));
        metadata.insert("common_angle".into(), Value::from(lines.common_angle()));
        Self {
            schema_version: SCHEMA_VERSION.into(),
            kind: FamilyKind::Lines,
            n: lines.ambient_dim(),
            k: 1,
            members: lines.vectors().iter().cloned().map(Member::Vector).collect(),
            metadata,
        }
    }

    fn validate_header(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedSchema(self.schema_version.clone()));
        }
        if self.kind == FamilyKind::Lines && self.k != 1 {
            return Err(Error::Parse(format!("kind 'lines' requires k = 1, got k = {}", self.k)));
        }
        if self.k == 0 || self.k > self.n {
            return Err(Error::Parse(format!("need 1 <= k <= n, got k={}, n={}", self.k, self.n)));
        }
        Ok(())
    }

    fn member_matrix(&self, index: usize) -> Result<Matrix> {
        let bad = |what: String| Error::Parse(format!("member {index}: {what}"));
        match (&self.members[index], self.kind) {
            (Member::Vector(v), FamilyKind::Lines) => {
                if v.len() != self.n {
                    return Err(bad(format!("vector length {} != n = {}", v.len(), self.n)));
                }
                Matrix::from_columns(std::slice::from_ref(v))
            }
            (Member::Matrix(rows), FamilyKind::Subspaces) => {
                if rows.len() != self.n || rows.iter().any(|r| r.len() != self.k) {
                    return Err(bad(format!("expected a {}x{} matrix", self.n, self.k)));
                }
                Matrix::from_rows(rows)
            }
            (Member::Vector(_), FamilyKind::Subspaces) => Err(bad("expected a matrix".into())),
            (Member::Matrix(_), FamilyKind::Lines) => Err(bad("expected a vector".into())),
        }
    }

    /// Members that are already orthonormal within `eps_orth` are kept exactly;
    /// others are orthonormalized.
    pub fn to_family(&self, tol: &TolerancePolicy) -> Result<SubspaceFamily> {
        self.validate_header()?;
        let members = (0..self.members.len())
            .map(|i| {
                let a = self.member_matrix(i)?;
                if orthonormality_residual(&a) <= tol.eps_orth {
                    Subspace::from_orthonormal(a, tol)
                } else {
                    Subspace::from_spanning(&a, tol)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let provenance = self
            .metadata
            .get("provenance")
            .and_then(Value::as_str)
            .unwrap_or("file");
        let mut family = SubspaceFamily::new(self.k, self.n, members, provenance)?;
        family.metric = self
            .metadata
            .get("metric")
            .and_then(Value::as_str)
            .map(str::parse::<Metric>)
            .transpose()?;
        family.common_angle = self.metadata.get("common_angle").and_then(Value::as_f64);
        Ok(family)
    }

    pub fn to_line_set(&self, equi_tol: f64) -> Result<LineSet> {
        self.validate_header()?;
        if self.kind != FamilyKind::Lines {
            return Err(Error::BadParams("expected a lines file".into()));
        }
        let vectors = (0..self.members.len())
            .map(|i| self.member_matrix(i).map(|m| m.column(0)))
            .collect::<Result<Vec<_>>>()?;
        LineSet::new(vectors, equi_tol)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, to_json_string(self)?)?;
        Ok(())
    }
}

/// Pretty JSON with every float written as `{:.16e}`, i.e. 17 significant
/// digits, which round-trips any `f64`.
struct SigDigitsFormatter<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SigDigitsFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let formatter = SigDigitsFormatter {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// JSON view of a certificate.
#[derive(Debug, SerializeDerive)]
pub struct CertificateRecord<'a> {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub expected_diagonal: f64,
    pub max_diagonal_deviation: f64,
    pub max_off_diagonal: f64,
    pub tolerance: f64,
    pub bound: u64,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_matrix: Option<&'a [Vec<f64>]>,
}

impl<'a> From<&'a Certificate> for CertificateRecord<'a> {
    fn from(c: &'a Certificate) -> Self {
        Self {
            m: c.m,
            k: c.k,
            n: c.n,
            alpha: c.alpha,
            lambda: c.lambda,
            expected_diagonal: c.expected_diagonal,
            max_diagonal_deviation: c.max_diagonal_deviation,
            max_off_diagonal: c.max_off_diagonal,
            tolerance: c.tolerance,
            bound: c.bound,
            verdict: c.verdict,
            eval_matrix: (c.m <= CERTIFICATE_MATRIX_LIMIT).then_some(c.eval_matrix.as_slice()),
        }
    }
}

/// JSON document written by `pack`.
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct PackingRecord {
    pub problem: PackingProblem,
    pub objective_value: f64,
    pub best_restart: usize,
    pub best_iteration: usize,
    pub family: FamilyFile,
    pub history: Vec<HistoryPoint>,
}

impl PackingRecord {
    pub fn new(problem: &PackingProblem, result: &PackingResult) -> Self {
        Self {
            problem: problem.clone(),
            objective_value: result.objective_value,
            best_restart: result.best_restart,
            best_iteration: result.best_iteration,
            family: FamilyFile::from_family(&result.family),
            history: result.history.clone(),
        }
    }
}

/// `iteration,value` CSV with a header row.
pub fn history_csv(history: &[HistoryPoint]) -> String {
    let mut out = String::from("iteration,value\n");
    for h in history {
        out.push_str(&format!("{},{:.16e}\n", h.iteration, h.value));
    }
    out
}
