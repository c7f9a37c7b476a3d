//! Scene metadata, encode manifests and the processed video sequence (PVS) catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::table::{read_rows, Row};
use crate::{Error, Result};

/// Number of rate points per codec in the ladder.
pub const RATE_POINTS: u8 = 4;

/// Number of configurations generated per scene: reference, 4K and two codecs at four rates.
pub const CONFIGS_PER_SCENE: usize = 2 + 2 * RATE_POINTS as usize;

const SCENE_HEADER: &str = "scene_id";
const MANIFEST_HEADER: [&str; 5] = ["scene_id", "codec", "rate_index", "qp", "bitrate_mbps"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMeta {
    pub scene_id: String,
    pub width: usize,
    pub height: usize,
    pub fps: f64,
    pub frame_count: usize,
    pub bit_depth: u8,
    pub color_space: String,
    pub subsampling: String,
}

impl SceneMeta {
    pub fn validate(&self) -> Result<()> {
        if self.scene_id.is_empty() {
            return Err(Error::invalid("scene_id", "empty"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid(
                "dimensions",
                format!("{}x{} must be positive", self.width, self.height),
            ));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::invalid("fps", format!("{} must be positive", self.fps)));
        }
        if self.frame_count == 0 {
            return Err(Error::invalid("frame_count", "must be at least 1"));
        }
        if self.bit_depth != 8 && self.bit_depth != 10 {
            return Err(Error::invalid(
                "bit_depth",
                format!("{} not in {{8, 10}}", self.bit_depth),
            ));
        }
        Ok(())
    }

    /// Convenience constructor for in-memory 4:2:0 material.
    pub fn yuv420(scene_id: &str, width: usize, height: usize, bit_depth: u8) -> Self {
        SceneMeta {
            scene_id: scene_id.to_string(),
            width,
            height,
            fps: 60.0,
            frame_count: 1,
            bit_depth,
            color_space: "BT.2020".to_string(),
            subsampling: "420".to_string(),
        }
    }
}

/// Identity of one of the ten per-scene configurations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConfigId {
    /// The coded variants sort first so tables read R1..R4, 4K, REF.
    Coded { codec: String, rate_index: u8 },
    Downscaled4K,
    Reference,
}

impl ConfigId {
    pub fn coded(codec: &str, rate_index: u8) -> Self {
        ConfigId::Coded {
            codec: codec.to_string(),
            rate_index,
        }
    }

    pub fn is_coded(&self) -> bool {
        matches!(self, ConfigId::Coded { .. })
    }

    pub fn codec(&self) -> Option<&str> {
        match self {
            ConfigId::Coded { codec, .. } => Some(codec),
            _ => None,
        }
    }

    pub fn rate_index(&self) -> Option<u8> {
        match self {
            ConfigId::Coded { rate_index, .. } => Some(*rate_index),
            _ => None,
        }
    }

    /// Short label used in significance tables: `R1`..`R4`, `4K`, `REF`.
    pub fn short_label(&self) -> String {
        match self {
            ConfigId::Coded { rate_index, .. } => format!("R{rate_index}"),
            ConfigId::Downscaled4K => "4K".to_string(),
            ConfigId::Reference => "REF".to_string(),
        }
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigId::Reference => f.write_str("REF"),
            ConfigId::Downscaled4K => f.write_str("4K"),
            ConfigId::Coded { codec, rate_index } => write!(f, "{codec}-R{rate_index}"),
        }
    }
}

impl FromStr for ConfigId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "REF" | "ref" => Ok(ConfigId::Reference),
            "4K" | "4k" => Ok(ConfigId::Downscaled4K),
            other => {
                let (codec, rate) = other
                    .rsplit_once("-R")
                    .ok_or_else(|| Error::invalid("config", format!("`{other}` is not REF, 4K or <codec>-R<i>")))?;
                let rate_index: u8 = rate
                    .parse()
                    .map_err(|_| Error::invalid("config", format!("bad rate index in `{other}`")))?;
                if codec.is_empty() || !(1..=RATE_POINTS).contains(&rate_index) {
                    return Err(Error::invalid("config", format!("`{other}` out of range")));
                }
                Ok(ConfigId::coded(codec, rate_index))
            }
        }
    }
}

impl Serialize for ConfigId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConfigId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A (scene, configuration) pair, the unit every score population is keyed by.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PvsKey {
    pub scene_id: String,
    pub config: ConfigId,
}

impl PvsKey {
    pub fn new(scene_id: &str, config: ConfigId) -> Self {
        PvsKey {
            scene_id: scene_id.to_string(),
            config,
        }
    }
}

impl fmt::Display for PvsKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.scene_id, self.config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub scene_id: String,
    pub codec: String,
    pub rate_index: u8,
    pub qp: u32,
    pub bitrate_mbps: f64,
}

/// Validated encode manifest: unique rate indices and strictly increasing bitrate per (scene, codec).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EncodeManifest {
    rows: Vec<ManifestRow>,
}

impl EncodeManifest {
    pub fn new(rows: Vec<ManifestRow>) -> Result<Self> {
        let mut ladders: BTreeMap<(&str, &str), Vec<&ManifestRow>> = BTreeMap::new();
        for row in &rows {
            if !(row.bitrate_mbps > 0.0 && row.bitrate_mbps.is_finite()) {
                return Err(Error::invalid(
                    "bitrate",
                    format!("{}/{} R{}: {} must be positive", row.scene_id, row.codec, row.rate_index, row.bitrate_mbps),
                ));
            }
            if row.rate_index == 0 {
                return Err(Error::invalid("rate_index", "rate indices start at 1"));
            }
            ladders
                .entry((row.scene_id.as_str(), row.codec.as_str()))
                .or_default()
                .push(row);
        }
        for ((scene, codec), ladder) in &mut ladders {
            ladder.sort_by_key(|r| r.rate_index);
            for pair in ladder.windows(2) {
                if pair[0].rate_index == pair[1].rate_index {
                    return Err(Error::Duplicate(format!(
                        "rate_index {} for {scene}/{codec}",
                        pair[0].rate_index
                    )));
                }
                if pair[1].bitrate_mbps <= pair[0].bitrate_mbps {
                    return Err(Error::invalid(
                        "bitrate",
                        format!(
                            "non-monotone ladder for {scene}/{codec}: R{}={} then R{}={}",
                            pair[0].rate_index, pair[0].bitrate_mbps, pair[1].rate_index, pair[1].bitrate_mbps
                        ),
                    ));
                }
            }
        }
        Ok(EncodeManifest { rows })
    }

    pub fn rows(&self) -> &[ManifestRow] {
        &self.rows
    }

    pub fn row(&self, scene_id: &str, codec: &str, rate_index: u8) -> Option<&ManifestRow> {
        self.rows
            .iter()
            .find(|r| r.scene_id == scene_id && r.codec == codec && r.rate_index == rate_index)
    }

    /// Codecs in order of first appearance.
    pub fn codecs(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for row in &self.rows {
            if !out.contains(&row.codec) {
                out.push(row.codec.clone());
            }
        }
        out
    }

    /// Rows of one (scene, codec) ladder, sorted by rate index.
    pub fn ladder(&self, scene_id: &str, codec: &str) -> Vec<&ManifestRow> {
        let mut rows: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.scene_id == scene_id && r.codec == codec)
            .collect();
        rows.sort_by_key(|r| r.rate_index);
        rows
    }

    pub fn scenes(&self) -> BTreeSet<&str> {
        self.rows.iter().map(|r| r.scene_id.as_str()).collect()
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(MANIFEST_HEADER)?;
        for r in &self.rows {
            out.write_record([
                r.scene_id.clone(),
                r.codec.clone(),
                r.rate_index.to_string(),
                r.qp.to_string(),
                r.bitrate_mbps.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for row in read_rows(reader, source, MANIFEST_HEADER[0])? {
            row.expect_len(MANIFEST_HEADER.len())?;
            let qp: i64 = row.field(3, "qp")?;
            if qp < 0 {
                return Err(row.error("field `qp`: must be >= 0"));
            }
            rows.push(ManifestRow {
                scene_id: row.text(0, "scene_id")?,
                codec: row.text(1, "codec")?,
                rate_index: row.field(2, "rate_index")?,
                qp: qp as u32,
                bitrate_mbps: row.field(4, "bitrate_mbps")?,
            });
        }
        EncodeManifest::new(rows)
    }
}

pub fn load_scene_table(path: impl AsRef<Path>) -> Result<Vec<SceneMeta>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_scene_table(file, &path.display().to_string())
}

pub fn read_scene_table<R: Read>(reader: R, source: &str) -> Result<Vec<SceneMeta>> {
    let mut scenes = Vec::new();
    let mut seen = BTreeSet::new();
    for row in read_rows(reader, source, SCENE_HEADER)? {
        row.expect_len(8)?;
        let scene = SceneMeta {
            scene_id: row.text(0, "scene_id")?,
            width: row.field(1, "width")?,
            height: row.field(2, "height")?,
            fps: row.field(3, "fps")?,
            frame_count: row.field(4, "frames")?,
            bit_depth: row.field(5, "bit_depth")?,
            color_space: row.text(6, "color_space")?,
            subsampling: row.text(7, "subsampling")?,
        };
        scene.validate().map_err(|e| row.error(e.to_string()))?;
        if !seen.insert(scene.scene_id.clone()) {
            return Err(row.error(format!("duplicate scene `{}`", scene.scene_id)));
        }
        scenes.push(scene);
    }
    Ok(scenes)
}

pub fn load_encode_manifest(path: impl AsRef<Path>) -> Result<EncodeManifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    EncodeManifest::read_from(file, &path.display().to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pvs {
    pub scene_id: String,
    pub config: ConfigId,
    pub qp: Option<u32>,
    pub bitrate_mbps: Option<f64>,
    pub media_uri: Option<String>,
}

impl Pvs {
    pub fn key(&self) -> PvsKey {
        PvsKey::new(&self.scene_id, self.config.clone())
    }
}

/// Builds the ten PVSs of every scene: REF, 4K, then each codec's R1..R4.
///
/// The manifest must contain exactly two codecs, each with rate points 1..=4 for every scene.
pub fn build_pvs_catalog(scenes: &[SceneMeta], manifest: &EncodeManifest) -> Result<Vec<Pvs>> {
    let codecs = manifest.codecs();
    if codecs.len() != 2 {
        return Err(Error::invalid(
            "manifest",
            format!("expected exactly 2 codecs, found {:?}", codecs),
        ));
    }
    let mut catalog = Vec::with_capacity(scenes.len() * CONFIGS_PER_SCENE);
    for scene in scenes {
        let mut missing = Vec::new();
        for codec in &codecs {
            for idx in 1..=RATE_POINTS {
                if manifest.row(&scene.scene_id, codec, idx).is_none() {
                    missing.push(format!("({codec}, {idx})"));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::Missing(format!(
                "manifest rows for scene `{}`: {}",
                scene.scene_id,
                missing.join(", ")
            )));
        }
        for config in [ConfigId::Reference, ConfigId::Downscaled4K] {
            catalog.push(Pvs {
                scene_id: scene.scene_id.clone(),
                config,
                qp: None,
                bitrate_mbps: None,
                media_uri: None,
            });
        }
        for codec in &codecs {
            for idx in 1..=RATE_POINTS {
                let row = manifest.row(&scene.scene_id, codec, idx).expect("checked above");
                catalog.push(Pvs {
                    scene_id: scene.scene_id.clone(),
                    config: ConfigId::coded(codec, idx),
                    qp: Some(row.qp),
                    bitrate_mbps: Some(row.bitrate_mbps),
                    media_uri: None,
                });
            }
        }
    }
    Ok(catalog)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LadderWarning {
    /// R_{i+1}/R_i outside the configured band.
    RatioOutOfBand {
        scene_id: String,
        codec: String,
        lower_index: u8,
        ratio: f64,
    },
    /// A codec's bitrate deviates from the anchor codec's bitrate at the same rate index.
    CrossCodecMismatch {
        scene_id: String,
        rate_index: u8,
        anchor_codec: String,
        codec: String,
        relative_deviation: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderRules {
    pub ratio_band: (f64, f64),
    /// Allowed |R_codec - R_anchor| / R_anchor at matching rate indices.
    pub cross_codec_tolerance: f64,
}

impl Default for LadderRules {
    fn default() -> Self {
        LadderRules {
            ratio_band: (1.5, 2.5),
            cross_codec_tolerance: 0.15,
        }
    }
}

pub fn validate_rate_ladder(manifest: &EncodeManifest, rules: LadderRules) -> Vec<LadderWarning> {
    let (low, high) = rules.ratio_band;
    let codecs = manifest.codecs();
    let mut warnings = Vec::new();
    for scene in manifest.scenes() {
        for codec in &codecs {
            for pair in manifest.ladder(scene, codec).windows(2) {
                let ratio = pair[1].bitrate_mbps / pair[0].bitrate_mbps;
                if ratio < low || ratio > high {
                    warnings.push(LadderWarning::RatioOutOfBand {
                        scene_id: scene.to_string(),
                        codec: codec.clone(),
                        lower_index: pair[0].rate_index,
                        ratio,
                    });
                }
            }
        }
        let Some(anchor) = codecs.iter().find(|c| !manifest.ladder(scene, c).is_empty()) else {
            continue;
        };
        for anchor_row in manifest.ladder(scene, anchor) {
            for codec in codecs.iter().filter(|c| *c != anchor) {
                if let Some(row) = manifest.row(scene, codec, anchor_row.rate_index) {
                    let dev = (row.bitrate_mbps - anchor_row.bitrate_mbps).abs() / anchor_row.bitrate_mbps;
                    if dev > rules.cross_codec_tolerance {
                        warnings.push(LadderWarning::CrossCodecMismatch {
                            scene_id: scene.to_string(),
                            rate_index: anchor_row.rate_index,
                            anchor_codec: anchor.clone(),
                            codec: codec.clone(),
                            relative_deviation: dev,
                        });
                    }
                }
            }
        }
    }
    warnings
}

impl Row {
    fn text(&self, idx: usize, name: &str) -> Result<String> {
        let s: String = self.field(idx, name)?;
        if s.is_empty() {
            return Err(self.error(format!("field `{name}`: empty")));
        }
        Ok(s)
    }
}
