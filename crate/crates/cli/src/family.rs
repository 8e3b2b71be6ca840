//! JSON family files.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "matrices": [
//!     { "label": "sB", "entries": [[0.1, 0.1], [0.0, 0.1]] },
//!     { "label": "A1", "entries": [[1.0, 2.0], [0.0, -1.0]] }
//!   ],
//!   "block": { "d1": 1, "d2": 1 }
//! }
//! ```
//!
//! `block` marks the family as block upper triangular with a `d1 x d1`
//! leading block; the couplings are read off the matrices. A file holding
//! only `alpha` (and `dim: 3`) stands for the cubic pair at that angle.
//! Numbers are written in shortest round-trip form, so a saved family
//! re-parses entry for entry.

use std::fs;
use std::path::Path;

use marginal::classifier::BlockFamily;
use marginal::sublinear::{Alpha, CubicPair};
use marginal::{Error, Matrix, MatrixFamily, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub dim: usize,
    #[serde(default)]
    pub matrices: Vec<MatrixEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<BlockSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    #[serde(default)]
    pub label: String,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub d1: usize,
    pub d2: usize,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

impl FamilyFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: FamilyFile = serde_json::from_str(text).map_err(|e| bad(format!("family file: {e}")))?;
        f.validate()?;
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family files serialize") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| bad(format!("cannot write {}: {e}", path.display())))
    }

    pub fn from_family(fam: &MatrixFamily, block: Option<BlockSpec>) -> Self {
        Self {
            dim: fam.dim(),
            matrices: fam
                .matrices()
                .iter()
                .zip(fam.labels())
                .map(|(m, l)| MatrixEntry {
                    label: l.clone(),
                    entries: m.to_rows(),
                })
                .collect(),
            block,
            alpha: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(bad("dim must be positive"));
        }
        if self.matrices.is_empty() && self.alpha.is_none() {
            return Err(bad("family file lists no matrices"));
        }
        for (i, m) in self.matrices.iter().enumerate() {
            if m.entries.len() != self.dim {
                return Err(bad(format!("matrix {i} has {} rows, expected {}", m.entries.len(), self.dim)));
            }
            if let Some(r) = m.entries.iter().position(|row| row.len() != self.dim) {
                return Err(bad(format!("matrix {i} row {r} has {} entries, expected {}", m.entries[r].len(), self.dim)));
            }
        }
        if let Some(b) = self.block {
            if b.d1 == 0 || b.d2 == 0 || b.d1 + b.d2 != self.dim {
                return Err(bad(format!("block sizes {} + {} must be positive and sum to dim {}", b.d1, b.d2, self.dim)));
            }
        }
        if self.alpha.is_some() && !self.matrices.is_empty() {
            return Err(bad("give either matrices or alpha, not both"));
        }
        if self.alpha.is_some() && self.dim != 3 {
            return Err(bad("the cubic pair generated from alpha has dim 3"));
        }
        Ok(())
    }

    pub fn family(&self) -> Result<MatrixFamily> {
        if let Some(a) = &self.alpha {
            return Ok(CubicPair::build_pair(a.parse::<Alpha>()?).family());
        }
        let mats = self
            .matrices
            .iter()
            .map(|m| Matrix::from_rows(&m.entries))
            .collect::<Result<Vec<_>>>()?;
        let labels = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| if m.label.is_empty() { format!("A{i}") } else { m.label.clone() })
            .collect();
        MatrixFamily::with_labels(mats, labels)
    }

    /// Block split from the file, or `d1 = 1` for an `alpha` family.
    pub fn block_family(&self) -> Result<BlockFamily> {
        let d1 = match (self.block, &self.alpha) {
            (Some(b), _) => b.d1,
            (None, Some(_)) => 1,
            (None, None) => return Err(bad("classification needs a \"block\" entry in the family file")),
        };
        BlockFamily::from_family(&self.family()?, d1)
    }
}
