//! Per-scene p-value grids: anchor codec rates + 4K + REF as rows, test codec
//! rates + 4K + REF as columns.

use serde::{Deserialize, Serialize};

use crate::catalog::{ConfigId, PvsKey, RATE_POINTS};
use crate::subjective::{welch_t_test, ScoreMatrix};
use crate::table::Provenance;
use crate::{Error, Result};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignificanceLayout {
    pub anchor_codec: String,
    pub test_codec: String,
}

impl Default for SignificanceLayout {
    fn default() -> Self {
        SignificanceLayout {
            anchor_codec: "HEVC".into(),
            test_codec: "VVC".into(),
        }
    }
}

impl SignificanceLayout {
    fn axis(codec: &str) -> Vec<ConfigId> {
        (1..=RATE_POINTS)
            .map(|r| ConfigId::coded(codec, r))
            .chain([ConfigId::Downscaled4K, ConfigId::Reference])
            .collect()
    }

    pub fn rows(&self) -> Vec<ConfigId> {
        Self::axis(&self.anchor_codec)
    }

    pub fn columns(&self) -> Vec<ConfigId> {
        Self::axis(&self.test_codec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceCell {
    pub row: ConfigId,
    pub column: ConfigId,
    pub p: f64,
    /// `p` rounded to two decimals, as printed in the report.
    pub p_display: String,
    pub significant: bool,
    #[serde(with = "crate::serde_util::float")]
    pub t: f64,
    pub dof: f64,
    pub degenerate: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceMatrix {
    pub scene_id: String,
    pub anchor_codec: String,
    pub test_codec: String,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
    pub cells: Vec<Vec<SignificanceCell>>,
}

impl SignificanceMatrix {
    pub fn cell(&self, row: &ConfigId, column: &ConfigId) -> Option<&SignificanceCell> {
        self.cells.iter().flatten().find(|c| &c.row == row && &c.column == column)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.cells.len(), self.cells.first().map_or(0, Vec::len))
    }
}

pub fn significance_matrix(matrix: &ScoreMatrix, scene_id: &str, layout: &SignificanceLayout) -> Result<SignificanceMatrix> {
    let population = |config: &ConfigId| {
        matrix
            .population(&PvsKey::new(scene_id, config.clone()))
            .ok_or_else(|| Error::Missing(format!("population for {scene_id}/{config}")))
    };
    let rows = layout.rows();
    let columns = layout.columns();
    let mut cells = Vec::with_capacity(rows.len());
    for row in &rows {
        let a = population(row)?;
        let mut line = Vec::with_capacity(columns.len());
        for column in &columns {
            let b = population(column)?;
            let r = welch_t_test(&a, &b)?;
            line.push(SignificanceCell {
                row: row.clone(),
                column: column.clone(),
                p: r.p,
                p_display: format!("{:.2}", r.p),
                significant: r.p < SIGNIFICANCE_LEVEL,
                t: r.t,
                dof: r.dof,
                degenerate: r.degenerate,
                provenance: Provenance::new("welch_t_test", format!("{scene_id}/{row} vs {scene_id}/{column}")),
            });
        }
        cells.push(line);
    }
    Ok(SignificanceMatrix {
        scene_id: scene_id.to_string(),
        anchor_codec: layout.anchor_codec.clone(),
        test_codec: layout.test_codec.clone(),
        row_labels: rows.iter().map(ConfigId::short_label).collect(),
        column_labels: columns.iter().map(ConfigId::short_label).collect(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_matrix(shift: f64) -> ScoreMatrix {
        let layout = SignificanceLayout::default();
        let mut m = ScoreMatrix::new();
        let mut configs = layout.rows();
        configs.extend(layout.columns().into_iter().take(4));
        for (ci, config) in configs.iter().enumerate() {
            for o in 0..6 {
                let v = 50.0 + ci as f64 * shift + ((o * 7 + ci * 3) % 5) as f64;
                m.insert(PvsKey::new("S", config.clone()), &format!("o{o}"), v).unwrap();
            }
        }
        m
    }

    #[test]
    fn layout_and_diagonals() {
        let sig = significance_matrix(&scene_matrix(3.0), "S", &SignificanceLayout::default()).unwrap();
        assert_eq!(sig.shape(), (6, 6));
        assert_eq!(sig.row_labels, ["R1", "R2", "R3", "R4", "4K", "REF"]);
        let r = sig.cell(&ConfigId::Reference, &ConfigId::Reference).unwrap();
        assert_eq!((r.p, r.p_display.as_str()), (1.0, "1.00"));
        let k = sig.cell(&ConfigId::Downscaled4K, &ConfigId::Downscaled4K).unwrap();
        assert_eq!(k.p, 1.0);
    }

    #[test]
    fn missing_population() {
        let m = scene_matrix(1.0).without_observers(&Default::default()).scene("other");
        assert!(significance_matrix(&m, "S", &SignificanceLayout::default()).is_err());
    }
}
