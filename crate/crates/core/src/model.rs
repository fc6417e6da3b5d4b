//! Risk portfolio description: factor specifications, the binary exposure
//! matrix, and the index sets and aggregated shapes derived from them.
//!
//! Components and factors are indexed from 0 in this API. The model file uses
//! 1-based factor ids, matching the column order of the exposure matrix.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// How the hitting times of a factor's victims are coupled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactorKind {
    /// Every exposed component is hit at the same random time (common shock).
    Comonotone,
    /// Exposed components are hit at conditionally independent times.
    Independent,
}

impl FactorKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "comonotone" => Ok(FactorKind::Comonotone),
            "independent" => Ok(FactorKind::Independent),
            other => Err(Error::UnknownFactorKind(other.to_string())),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FactorKind::Comonotone => "comonotone",
            FactorKind::Independent => "independent",
        }
    }
}

/// One risk factor with frailty `Λ_j ~ Gamma(shape, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskFactorSpec {
    /// 1-based id; must equal the factor's column position + 1.
    pub id: usize,
    pub kind: FactorKind,
    pub shape: f64,
}

impl RiskFactorSpec {
    pub fn comonotone(id: usize, shape: f64) -> Self {
        Self {
            id,
            kind: FactorKind::Comonotone,
            shape,
        }
    }

    pub fn independent(id: usize, shape: f64) -> Self {
        Self {
            id,
            kind: FactorKind::Independent,
            shape,
        }
    }
}

/// Dense binary `n × (l+m)` exposure matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExposureMatrix {
    entries: Vec<bool>,
    rows: usize,
    cols: usize,
}

impl ExposureMatrix {
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "exposure row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => entries.push(false),
                    1 => entries.push(true),
                    _ => {
                        return Err(Error::NonBinaryExposure {
                            row: i,
                            col: j,
                            value: v as i64,
                        })
                    }
                }
            }
        }
        Ok(Self {
            entries,
            rows: rows.len(),
            cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, component: usize, factor: usize) -> bool {
        self.entries[component * self.cols + factor]
    }

    pub fn ones(&self) -> usize {
        self.entries.iter().filter(|&&e| e).count()
    }

    fn to_rows(&self) -> Vec<Vec<u8>> {
        self.entries
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(|r| r.iter().map(|&e| e as u8).collect())
            .collect()
    }
}

/// Validated portfolio. Immutable after [`MrfModel::build`].
#[derive(Debug, Clone)]
pub struct MrfModel {
    factors: Vec<RiskFactorSpec>,
    exposure: ExposureMatrix,
    rf_comonotone: Vec<Vec<usize>>,
    rf_independent: Vec<Vec<usize>>,
    rc: Vec<Vec<usize>>,
    agg_shape: Vec<f64>,
    warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    factors: Vec<RawFactor>,
    exposure: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawFactor {
    id: usize,
    kind: String,
    shape: f64,
}

impl MrfModel {
    /// Validates the inputs and precomputes every row and column index set.
    ///
    /// All problems found are reported: a single one as its own variant,
    /// several as [`Error::InvalidModel`].
    pub fn build(factors: Vec<RiskFactorSpec>, exposure: ExposureMatrix) -> Result<Self> {
        let mut problems = Vec::new();
        if exposure.cols() != factors.len() {
            return Err(Error::DimensionMismatch {
                what: "exposure columns vs factor count",
                expected: factors.len(),
                found: exposure.cols(),
            });
        }
        for (pos, f) in factors.iter().enumerate() {
            if f.id != pos + 1 {
                problems.push(Error::InvalidFactorId {
                    position: pos,
                    id: f.id,
                });
            }
            if !(f.shape > 0.0) || !f.shape.is_finite() {
                problems.push(Error::NonPositiveShape {
                    factor: pos,
                    shape: f.shape,
                });
            }
        }

        let n = exposure.rows();
        let mut rf_comonotone = vec![Vec::new(); n];
        let mut rf_independent = vec![Vec::new(); n];
        let mut rc = vec![Vec::new(); factors.len()];
        for i in 0..n {
            for (j, f) in factors.iter().enumerate() {
                if exposure.get(i, j) {
                    rc[j].push(i);
                    match f.kind {
                        FactorKind::Comonotone => rf_comonotone[i].push(j),
                        FactorKind::Independent => rf_independent[i].push(j),
                    }
                }
            }
            if rf_comonotone[i].is_empty() && rf_independent[i].is_empty() {
                problems.push(Error::EmptyRow { component: i });
            }
        }

        match problems.len() {
            0 => {}
            1 => return Err(problems.pop().unwrap()),
            _ => return Err(Error::InvalidModel(problems)),
        }

        let mut warnings = Vec::new();
        for (j, members) in rc.iter().enumerate() {
            if members.is_empty() {
                let msg = format!("factor {} hits no component and is inert", j + 1);
                warn!("{msg}");
                warnings.push(msg);
            }
        }

        let agg_shape = (0..n)
            .map(|i| {
                rf_comonotone[i]
                    .iter()
                    .chain(&rf_independent[i])
                    .map(|&j| factors[j].shape)
                    .sum()
            })
            .collect();

        Ok(Self {
            factors,
            exposure,
            rf_comonotone,
            rf_independent,
            rc,
            agg_shape,
            warnings,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        let mut factors = Vec::with_capacity(file.factors.len());
        for f in file.factors {
            factors.push(RiskFactorSpec {
                id: f.id,
                kind: FactorKind::parse(&f.kind)?,
                shape: f.shape,
            });
        }
        let mut rows = Vec::with_capacity(file.exposure.len());
        for (i, row) in file.exposure.iter().enumerate() {
            let mut r = Vec::with_capacity(row.len());
            for (j, &v) in row.iter().enumerate() {
                if v != 0 && v != 1 {
                    return Err(Error::NonBinaryExposure {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                r.push(v as u8);
            }
            rows.push(r);
        }
        Self::build(factors, ExposureMatrix::from_rows(&rows)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Canonical JSON form of the model (same schema as the model file).
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            factors: self
                .factors
                .iter()
                .map(|f| RawFactor {
                    id: f.id,
                    kind: f.kind.as_str().to_string(),
                    shape: f.shape,
                })
                .collect(),
            exposure: self
                .exposure
                .to_rows()
                .into_iter()
                .map(|r| r.into_iter().map(i64::from).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    /// Hex SHA-256 of [`MrfModel::to_json`].
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_json().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Number of components `n`.
    pub fn dim(&self) -> usize {
        self.exposure.rows()
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[RiskFactorSpec] {
        &self.factors
    }

    pub fn factor(&self, j: usize) -> &RiskFactorSpec {
        &self.factors[j]
    }

    pub fn exposure(&self) -> &ExposureMatrix {
        &self.exposure
    }

    /// Comonotone factors hitting component `i`.
    pub fn rf_comonotone(&self, i: usize) -> &[usize] {
        &self.rf_comonotone[i]
    }

    /// Independent-kind factors hitting component `i`.
    pub fn rf_independent(&self, i: usize) -> &[usize] {
        &self.rf_independent[i]
    }

    /// Components hit by factor `j`.
    pub fn rc(&self, j: usize) -> &[usize] {
        &self.rc[j]
    }

    /// `ξ_{c,i}`, the summed shape of all factors hitting component `i`.
    pub fn agg_shape(&self, i: usize) -> f64 {
        self.agg_shape[i]
    }

    pub fn agg_shapes(&self) -> &[f64] {
        &self.agg_shape
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.dim(),
            })
        }
    }

    /// Index sets of a sub-portfolio: factors hitting any member, factors
    /// hitting every member, and the remainder.
    pub fn factor_sets(&self, subset: &[usize]) -> Result<SubsetSets> {
        if subset.is_empty() {
            return Err(Error::SubsetTooSmall { min: 1, found: 0 });
        }
        let mut seen = vec![false; self.dim()];
        for &i in subset {
            self.check_index(i)?;
            if seen[i] {
                return Err(Error::DuplicateIndex(i));
            }
            seen[i] = true;
        }

        let mut sets = SubsetSets {
            restricted_cardinality: vec![0; self.factor_count()],
            ..SubsetSets::default()
        };
        for j in 0..self.factor_count() {
            let hits = subset.iter().filter(|&&i| self.exposure.get(i, j)).count();
            sets.restricted_cardinality[j] = hits;
            if hits == 0 {
                continue;
            }
            let kind = self.factors[j].kind;
            sets.all.push(j);
            let (bucket, by_kind) = if hits == subset.len() {
                (&mut sets.common, &mut sets.common_by_kind)
            } else {
                (&mut sets.rest, &mut sets.rest_by_kind)
            };
            bucket.push(j);
            by_kind.push(kind, j);
            sets.all_by_kind.push(kind, j);
        }
        Ok(sets)
    }

    /// Shape parameters of the `(i, k)` bivariate margin.
    pub fn bivariate_params(&self, i: usize, k: usize) -> Result<BivariateParams> {
        self.check_index(i)?;
        self.check_index(k)?;
        if i == k {
            return Err(Error::EqualIndices(i));
        }
        let (mut alpha, mut gamma, mut rest_i, mut rest_k) = (0.0, 0.0, 0.0, 0.0);
        for (j, f) in self.factors.iter().enumerate() {
            match (self.exposure.get(i, j), self.exposure.get(k, j)) {
                (true, true) => match f.kind {
                    FactorKind::Comonotone => alpha += f.shape,
                    FactorKind::Independent => gamma += f.shape,
                },
                (true, false) => rest_i += f.shape,
                (false, true) => rest_k += f.shape,
                (false, false) => {}
            }
        }
        BivariateParams::new(rest_i, rest_k, gamma, alpha)
    }
}

/// Factor indices split by kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ByKind {
    pub comonotone: Vec<usize>,
    pub independent: Vec<usize>,
}

impl ByKind {
    fn push(&mut self, kind: FactorKind, j: usize) {
        match kind {
            FactorKind::Comonotone => self.comonotone.push(j),
            FactorKind::Independent => self.independent.push(j),
        }
    }
}

/// Factor index sets attached to a sub-portfolio.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubsetSets {
    /// Factors hitting at least one member.
    pub all: Vec<usize>,
    /// Factors hitting every member.
    pub common: Vec<usize>,
    /// `all \ common`.
    pub rest: Vec<usize>,
    pub all_by_kind: ByKind,
    pub common_by_kind: ByKind,
    pub rest_by_kind: ByKind,
    /// Per factor, the number of subset members it hits.
    pub restricted_cardinality: Vec<usize>,
}

/// The six shape scalars of a bivariate Clayton MRF margin.
///
/// `xi_i` and `xi_k` are derived as `rest + common`, so additivity holds
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BivariateParams {
    /// Shape of the factors hitting `i` but not `k`.
    pub xi_i_rest: f64,
    /// Shape of the factors hitting `k` but not `i`.
    pub xi_k_rest: f64,
    /// Shared independent-kind shape `γ_{c,(i,k)}`.
    pub gamma_common: f64,
    /// Shared comonotone shape `α_{c,(i,k)}`.
    pub alpha_common: f64,
}

impl BivariateParams {
    pub fn new(xi_i_rest: f64, xi_k_rest: f64, gamma_common: f64, alpha_common: f64) -> Result<Self> {
        for (name, value) in [
            ("xi_i_rest", xi_i_rest),
            ("xi_k_rest", xi_k_rest),
            ("gamma_common", gamma_common),
            ("alpha_common", alpha_common),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        let p = Self {
            xi_i_rest,
            xi_k_rest,
            gamma_common,
            alpha_common,
        };
        if !(p.xi_i() > 0.0) {
            return Err(Error::InvalidParameter {
                name: "xi_i",
                value: p.xi_i(),
            });
        }
        if !(p.xi_k() > 0.0) {
            return Err(Error::InvalidParameter {
                name: "xi_k",
                value: p.xi_k(),
            });
        }
        Ok(p)
    }

    /// `ξ_{c,(i,k)} = α + γ`.
    #[inline]
    pub fn xi_common(&self) -> f64 {
        self.alpha_common + self.gamma_common
    }

    #[inline]
    pub fn xi_i(&self) -> f64 {
        self.xi_i_rest + self.xi_common()
    }

    #[inline]
    pub fn xi_k(&self) -> f64 {
        self.xi_k_rest + self.xi_common()
    }

    /// Same margin with the roles of `i` and `k` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xi_i_rest: self.xi_k_rest,
            xi_k_rest: self.xi_i_rest,
            ..*self
        }
    }

    /// Equal aggregated shapes; for this family that forces equal rests too.
    pub fn is_exchangeable(&self) -> bool {
        self.xi_i_rest == self.xi_k_rest
    }
}
