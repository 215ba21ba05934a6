//! The field file: one JSON document holding `omega` on a grid, `null` at
//! singular nodes, plus how the field was produced.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use foliata_core::{GridSpec, ModuliPoint, OmegaField, Provenance};
use serde::{Deserialize, Serialize};

/// Enough to rebuild the closed-form `omega` between grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldOrigin {
    Profiles {
        params: ModuliPoint,
        step: f64,
        tolerance: f64,
        trivial_f: bool,
        trivial_g: bool,
        eps_den: f64,
        overflow_guard: f64,
    },
    Degenerate {
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub c0: f64,
    pub domain: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub provenance: Provenance,
    /// Row-major, `y` outermost.
    pub omega: Vec<Option<f64>>,
    pub mask: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<FieldOrigin>,
}

impl FieldFile {
    pub fn from_field(field: &OmegaField, origin: Option<FieldOrigin>) -> Self {
        let s = &field.spec;
        Self {
            version: None,
            config: None,
            c0: field.c0,
            domain: [s.x0, s.x1, s.y0, s.y1],
            nx: s.nx,
            ny: s.ny,
            provenance: field.provenance,
            omega: field.values(),
            mask: field.singular_mask.clone(),
            origin,
        }
    }

    pub fn to_field(&self) -> Result<OmegaField> {
        let [x0, x1, y0, y1] = self.domain;
        let spec = GridSpec::new(x0, x1, y0, y1, self.nx, self.ny)?;
        if self.omega.len() != spec.len() || self.mask.len() != spec.len() {
            bail!("field file holds {} values and {} mask entries for a {}x{} grid", self.omega.len(), self.mask.len(), self.nx, self.ny);
        }
        let values: Vec<Option<f64>> = self.omega.iter().zip(&self.mask).map(|(v, &m)| if m { None } else { *v }).collect();
        Ok(OmegaField::from_values(spec, self.c0, self.provenance, &values)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing field file {}", path.display()))
    }

    pub fn write<W: Write>(&self, w: W) -> std::io::Result<()> {
        super::json::write(w, self, false)
    }
}
