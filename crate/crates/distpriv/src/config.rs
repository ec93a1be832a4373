// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use distpriv_core::geo::{BoundingBox, Profile};
use distpriv_core::mechanisms::MechanismSpec;
use distpriv_core::privacy::MIN_MC_SAMPLES;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::ConfigError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub attribute: String,
    pub output_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub grid: GridConfig,
    pub mechanisms: Vec<MechanismSpec>,
    pub tupling: TuplingConfig,
    pub privacy: PrivacyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Synthetic,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileName {
    HomeOutside,
    NorthSouth,
    Bimodal,
}

/// `source = "synthetic"` uses `profile`, `n` (and `sigma`, `centers` for
/// the bimodal profile); `source = "csv"` uses `path` and an optional
/// inclusive `time_range` in epoch seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub source: DataSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<[[f64; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_range: Option<[i64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BoxConfig {
    pub fn to_box(self) -> distpriv_core::Result<BoundingBox> {
        BoundingBox::new(self.min_x, self.min_y, self.max_x, self.max_y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub width_km: f64,
    pub height_km: f64,
    pub rows: usize,
    pub cols: usize,
    /// Quadtree refinement threshold; absent means no refinement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_count: Option<usize>,
    /// Protected inputs are the regions whose centroid lies in this box;
    /// absent means every region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<BoxConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuplingConfig {
    /// Dummy counts for `eps-vs-k`.
    pub k: Vec<usize>,
    /// Dummy count held fixed by the other sweeps.
    pub k_default: usize,
    /// Restricted Laplace ε_A values for the ε_A sweeps.
    pub epsilon_a: Vec<f64>,
    pub epsilon_a_default: f64,
    /// Restricted Laplace radii (km) for `eps-vs-r`.
    pub radius: Vec<f64>,
    pub radius_default: f64,
    /// Dummy counts for the theoretical bound report.
    pub bounds_k: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacyConfig {
    pub delta: Vec<f64>,
    pub samples: usize,
}

fn field(name: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: name.into(),
        reason: reason.into(),
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<(), ConfigError> {
    if v.is_empty() {
        Err(field(name, "must not be empty"))
    } else {
        Ok(())
    }
}

fn nonneg(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_nan() || v < 0.0 {
        Err(field(name, format!("must be nonnegative, got {v}")))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    /// Reads and validates a TOML file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.attribute.is_empty() {
            return Err(field("attribute", "must not be empty"));
        }
        self.validate_dataset()?;
        let g = &self.grid;
        if !(g.width_km.is_finite() && g.width_km > 0.0) {
            return Err(field("grid.width_km", "must be finite and positive"));
        }
        if !(g.height_km.is_finite() && g.height_km > 0.0) {
            return Err(field("grid.height_km", "must be finite and positive"));
        }
        if g.rows == 0 {
            return Err(field("grid.rows", "must be at least 1"));
        }
        if g.cols == 0 {
            return Err(field("grid.cols", "must be at least 1"));
        }
        if g.max_count == Some(0) {
            return Err(field("grid.max_count", "must be at least 1"));
        }
        if let Some(inner) = g.inner {
            inner.to_box().map_err(|e| field("grid.inner", e.to_string()))?;
        }

        nonempty("mechanisms", &self.mechanisms)?;
        for (i, m) in self.mechanisms.iter().enumerate() {
            m.validate()
                .map_err(|e| field(&format!("mechanisms[{i}]"), e.to_string()))?;
        }

        let t = &self.tupling;
        nonempty("tupling.k", &t.k)?;
        if t.k.contains(&0) {
            return Err(field("tupling.k", "dummy counts must be at least 1"));
        }
        if t.k_default == 0 {
            return Err(field("tupling.k_default", "must be at least 1"));
        }
        nonempty("tupling.epsilon_a", &t.epsilon_a)?;
        for &e in &t.epsilon_a {
            nonneg("tupling.epsilon_a", e)?;
        }
        nonneg("tupling.epsilon_a_default", t.epsilon_a_default)?;
        nonempty("tupling.radius", &t.radius)?;
        for &r in &t.radius {
            nonneg("tupling.radius", r)?;
        }
        nonneg("tupling.radius_default", t.radius_default)?;
        nonempty("tupling.bounds_k", &t.bounds_k)?;
        if t.bounds_k.contains(&0) {
            return Err(field("tupling.bounds_k", "dummy counts must be at least 1"));
        }

        let p = &self.privacy;
        nonempty("privacy.delta", &p.delta)?;
        for &d in &p.delta {
            if !(0.0..1.0).contains(&d) {
                return Err(field(
                    "privacy.delta",
                    format!("values must lie in [0, 1), got {d}"),
                ));
            }
        }
        if p.samples < MIN_MC_SAMPLES {
            return Err(field(
                "privacy.samples",
                format!("must be at least {MIN_MC_SAMPLES}"),
            ));
        }
        Ok(())
    }

    fn validate_dataset(&self) -> Result<(), ConfigError> {
        let d = &self.dataset;
        match d.source {
            DataSource::Synthetic => {
                if d.profile.is_none() {
                    return Err(field("dataset.profile", "required for synthetic data"));
                }
                match d.n {
                    None => return Err(field("dataset.n", "required for synthetic data")),
                    Some(0) => return Err(field("dataset.n", "must be at least 1")),
                    _ => {}
                }
                if d.path.is_some() || d.time_range.is_some() {
                    return Err(field("dataset.path", "only valid for csv data"));
                }
                let bimodal = d.profile == Some(ProfileName::Bimodal);
                if bimodal != d.sigma.is_some() {
                    return Err(field(
                        "dataset.sigma",
                        "required for, and only for, the bimodal profile",
                    ));
                }
                if bimodal != d.centers.is_some() {
                    return Err(field(
                        "dataset.centers",
                        "required for, and only for, the bimodal profile",
                    ));
                }
                self.profile()
                    .expect("synthetic")
                    .validate()
                    .map_err(|e| field("dataset", e.to_string()))?;
            }
            DataSource::Csv => {
                if d.path.is_none() {
                    return Err(field("dataset.path", "required for csv data"));
                }
                if d.profile.is_some() || d.n.is_some() || d.sigma.is_some() || d.centers.is_some() {
                    return Err(field("dataset.profile", "only valid for synthetic data"));
                }
                if let Some([a, b]) = d.time_range {
                    if a > b {
                        return Err(field("dataset.time_range", "start must not exceed end"));
                    }
                }
            }
        }
        Ok(())
    }

    /// The synthetic profile, if the dataset is synthetic.
    pub fn profile(&self) -> Option<Profile> {
        let d = &self.dataset;
        Some(match d.profile? {
            ProfileName::HomeOutside => Profile::HomeOutside,
            ProfileName::NorthSouth => Profile::NorthSouth,
            ProfileName::Bimodal => {
                let [a, b] = d.centers?;
                Profile::Bimodal {
                    sigma: d.sigma?,
                    centers: [(a[0], a[1]), (b[0], b[1])],
                }
            }
        })
    }

    pub fn bounding_box(&self) -> BoundingBox {
        BoundingBox::sized(self.grid.width_km, self.grid.height_km).expect("validated")
    }

    /// The desk-scale default: synthetic north/south data on a 6×6 km grid.
    pub fn desk_default() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("bundled default config is valid")
    }
}

/// The bundled default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");
