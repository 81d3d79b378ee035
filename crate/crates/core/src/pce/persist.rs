use serde::{Deserialize, Serialize};

use super::{Metadata, Mode, PceModel};
use crate::basis::{MultiIndex, MultiIndexSet};
use crate::copula::{CvineModel, Family, PairCopula, Rotation};
use crate::error::{Error, Result};
use crate::marginals::{BoundedUniformMarginal, KdeMarginal, Marginal};
use crate::orthopoly::OrthonormalBasis1D;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalDto {
    Kde { centers: Vec<f64>, bandwidth: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDto {
    pub tree: usize,
    pub position: usize,
    pub family: String,
    pub rotation: u32,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaDto {
    pub order: Vec<usize>,
    pub pairs: Vec<PairDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisDto {
    pub recurrence_a: Vec<f64>,
    pub recurrence_b: Vec<f64>,
}

/// On-disk form of a [`PceModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDto {
    #[serde(default = "default_version")]
    pub version: u32,
    pub mode: Mode,
    pub d: usize,
    pub marginals: Vec<MarginalDto>,
    pub copula: Option<CopulaDto>,
    pub bases: Vec<BasisDto>,
    pub index_set: Vec<MultiIndex>,
    pub coefficients: Vec<f64>,
    pub metadata: Metadata,
}

fn default_version() -> u32 {
    MODEL_FORMAT_VERSION
}

impl CopulaDto {
    pub fn from_model(c: &CvineModel) -> Self {
        let pairs = c
            .pairs()
            .iter()
            .enumerate()
            .flat_map(|(t, row)| {
                row.iter().enumerate().map(move |(j, pc)| PairDto {
                    tree: t + 1,
                    position: j + 1,
                    family: pc.family().name().to_string(),
                    rotation: pc.rotation().degrees(),
                    params: pc.params().to_vec(),
                })
            })
            .collect();
        Self { order: c.order().to_vec(), pairs }
    }

    pub fn to_model(&self) -> Result<CvineModel> {
        let d = self.order.len();
        let mut rows: Vec<Vec<Option<PairCopula>>> = (0..d.saturating_sub(1)).map(|t| vec![None; d - 1 - t]).collect();
        for p in &self.pairs {
            let slot = p
                .tree
                .checked_sub(1)
                .and_then(|t| rows.get_mut(t))
                .and_then(|row| p.position.checked_sub(1).and_then(|j| row.get_mut(j)))
                .ok_or_else(|| Error::InvalidInput(format!("pair at tree {} position {} is out of range", p.tree, p.position)))?;
            let pc = PairCopula::new(Family::parse(&p.family)?, Rotation::from_degrees(p.rotation)?, p.params.clone())?;
            if slot.replace(pc).is_some() {
                return Err(Error::InvalidInput(format!("duplicate pair at tree {} position {}", p.tree, p.position)));
            }
        }
        let pairs = rows
            .into_iter()
            .enumerate()
            .map(|(t, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, pc)| pc.ok_or_else(|| Error::InvalidInput(format!("missing pair at tree {} position {}", t + 1, j + 1))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        CvineModel::new(self.order.clone(), pairs)
    }
}

impl ModelDto {
    pub fn from_model(m: &PceModel) -> Self {
        let marginals = m
            .marginals
            .iter()
            .map(|mg| match mg {
                Marginal::Kde(k) => MarginalDto::Kde { centers: k.centers().to_vec(), bandwidth: k.bandwidth() },
                Marginal::Uniform(u) => MarginalDto::Uniform { lo: u.lo(), hi: u.hi() },
            })
            .collect();
        Self {
            version: MODEL_FORMAT_VERSION,
            mode: m.mode,
            d: m.dim(),
            marginals,
            copula: m.copula.as_ref().map(CopulaDto::from_model),
            bases: m
                .bases
                .iter()
                .map(|b| BasisDto { recurrence_a: b.recurrence_a.clone(), recurrence_b: b.recurrence_b.clone() })
                .collect(),
            index_set: m.index_set.indices.clone(),
            coefficients: m.coefficients.clone(),
            metadata: m.metadata.clone(),
        }
    }

    pub fn to_model(&self) -> Result<PceModel> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!("unsupported model format version {}", self.version)));
        }
        let marginals = self
            .marginals
            .iter()
            .map(|m| match m {
                MarginalDto::Kde { centers, bandwidth } => KdeMarginal::with_bandwidth(centers.clone(), *bandwidth).map(Marginal::from),
                MarginalDto::Uniform { lo, hi } => BoundedUniformMarginal::new(*lo, *hi).map(Marginal::from),
            })
            .collect::<Result<Vec<_>>>()?;
        let copula = self.copula.as_ref().map(CopulaDto::to_model).transpose()?;
        let bases = self
            .bases
            .iter()
            .map(|b| OrthonormalBasis1D::from_recurrence(b.recurrence_a.clone(), b.recurrence_b.clone()))
            .collect::<Result<Vec<_>>>()?;
        if self.index_set.iter().any(|a| a.len() != self.d) {
            return Err(Error::InvalidInput(format!("index set entries must have length {}", self.d)));
        }
        let md = &self.metadata;
        let index_set = MultiIndexSet::from_indices(self.d, md.q, md.r.max(1), self.index_set.clone())?;
        PceModel::from_parts(self.mode, marginals, copula, bases, index_set, self.coefficients.clone(), md.clone())
    }
}

impl PceModel {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&ModelDto::from_model(self)).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<PceModel> {
        let dto: ModelDto = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("model JSON: {e}")))?;
        dto.to_model()
    }
}
