//! TOML manifests naming a model, a slice source and settings.
//!
//! ```toml
//! model = "r3"
//! convention = "paper-eq2"
//!
//! [slice]
//! catalog = "sheared_unknot"
//! params = { c = -0.5 }
//! # or: mesh_file = "curve.csv", periodic = [true], param_dim = 1
//!
//! [tolerances]
//! closed = 1e-6
//! transverse = 1e-4
//! margin = 0.05
//!
//! [search]
//! max_time = 3.0
//!
//! [collar]
//! grid = 24
//! ```

use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::{catalog_get, Params};
use crate::chords::ChordSearch;
use crate::collar::{Convention, ReportOptions, DEFAULT_MARGIN};
use crate::contact::ContactModel;
use crate::slice::{read_mesh_csv, ParamSlice, DEFAULT_TOL_CLOSED, DEFAULT_TOL_TRANSVERSE};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid manifest: {0}")]
    Invalid(String),
    #[error(transparent)]
    Toolkit(#[from] crate::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub model: String,
    #[serde(default)]
    pub convention: Convention,
    pub slice: SliceSource,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub search: ChordSearch,
    #[serde(default)]
    pub collar: CollarSettings,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceSource {
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    /// Relative paths resolve against the manifest's directory.
    pub mesh_file: Option<PathBuf>,
    pub periodic: Option<Vec<bool>>,
    pub param_dim: Option<usize>,
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub closed: f64,
    pub transverse: f64,
    pub margin: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            closed: DEFAULT_TOL_CLOSED,
            transverse: DEFAULT_TOL_TRANSVERSE,
            margin: DEFAULT_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollarSettings {
    pub grid: usize,
    pub runway: f64,
    pub tube_factor: f64,
    pub epsilon: f64,
}

impl Default for CollarSettings {
    fn default() -> Self {
        let r = ReportOptions::default();
        Self {
            grid: r.grid,
            runway: r.runway,
            tube_factor: r.tube_factor,
            epsilon: r.epsilon,
        }
    }
}

impl Manifest {
    /// Manifest for a catalog entry, with every parameter written out.
    pub fn for_catalog(name: &str, mut params: Params) -> Result<Self, ManifestError> {
        let entry = catalog_get(name, &params)?;
        params = entry.params.clone();
        Ok(Self {
            model: entry.model.name(),
            convention: Convention::default(),
            slice: SliceSource {
                catalog: Some(name.to_string()),
                params,
                ..SliceSource::default()
            },
            tolerances: Tolerances::default(),
            search: ChordSearch::default(),
            collar: CollarSettings::default(),
        })
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let m: Self = toml::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest fields are TOML-representable")
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let bad = |s: String| Err(ManifestError::Invalid(s));
        ContactModel::from_name(&self.model)?;
        let s = &self.slice;
        match (&s.catalog, &s.mesh_file) {
            (Some(_), Some(_)) => return bad("slice has both `catalog` and `mesh_file`".into()),
            (None, None) => return bad("slice needs `catalog` or `mesh_file`".into()),
            (Some(_), None) => {
                if s.periodic.is_some() || s.param_dim.is_some() {
                    return bad("`periodic` and `param_dim` apply to mesh files only".into());
                }
            }
            (None, Some(_)) => {
                let (Some(per), Some(dim)) = (&s.periodic, s.param_dim) else {
                    return bad("a mesh file needs `periodic` and `param_dim`".into());
                };
                if per.len() != dim {
                    return bad(format!("{} periodicity flags for param_dim {dim}", per.len()));
                }
                if !s.params.is_empty() {
                    return bad("`params` apply to catalog entries only".into());
                }
            }
        }
        let t = &self.tolerances;
        for (name, v) in [("closed", t.closed), ("transverse", t.transverse), ("margin", t.margin)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerance `{name}` must be positive, got {v}"));
            }
        }
        if t.margin >= 1.0 {
            return bad(format!("margin must be below 1, got {}", t.margin));
        }
        let c = &self.collar;
        if c.grid < 4 || !(c.runway > 0.0) || !(c.tube_factor > 0.0) || !(c.epsilon > 0.0 && c.epsilon < 1.0) {
            return bad("collar settings out of range".into());
        }
        if !(self.search.max_time > 0.0) || !(self.search.min_length >= 0.0) {
            return bad("search settings out of range".into());
        }
        Ok(())
    }

    /// Builds the model and slice; `base` is the manifest's directory.
    pub fn resolve(&self, base: &Path) -> Result<(ContactModel, ParamSlice), ManifestError> {
        let model = ContactModel::from_name(&self.model)?;
        let s = &self.slice;
        if let Some(name) = &s.catalog {
            let entry = catalog_get(name, &s.params)?;
            if entry.model != model {
                return Err(ManifestError::Invalid(format!(
                    "catalog entry {name} lives in {}, manifest says {model}",
                    entry.model
                )));
            }
            return Ok((model, entry.slice));
        }
        let rel = s.mesh_file.as_ref().expect("validated");
        let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
        let file = File::open(&path).map_err(|source| ManifestError::Io {
            path: path.clone(),
            source,
        })?;
        let name = s.name.clone().unwrap_or_else(|| {
            path.file_stem()
                .map(|x| x.to_string_lossy().into_owned())
                .unwrap_or_else(|| "mesh".into())
        });
        let slice = read_mesh_csv(file, &name, s.periodic.as_deref().expect("validated"), s.param_dim.expect("validated"))?;
        if slice.point(&slice.node_param(0)).len() != model.ambient_dim() {
            return Err(ManifestError::Invalid(format!(
                "mesh has {} ambient columns, {model} needs {}",
                slice.point(&slice.node_param(0)).len(),
                model.ambient_dim()
            )));
        }
        Ok((model, slice))
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            convention: self.convention,
            tol_closed: self.tolerances.closed,
            tol_transverse: self.tolerances.transverse,
            margin: self.tolerances.margin,
            grid: self.collar.grid,
            search: self.search.clone(),
            runway: self.collar.runway,
            tube_factor: self.collar.tube_factor,
            epsilon: self.collar.epsilon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_manifest_round_trips() {
        let mut p = Params::new();
        p.insert("c".into(), -0.5);
        let m = Manifest::for_catalog("sheared_unknot", p).unwrap();
        let text = m.to_toml();
        assert_eq!(Manifest::parse(&text).unwrap(), m);
    }

    #[test]
    fn minimal_manifest_gets_defaults() {
        let m = Manifest::parse("model = \"r3\"\n[slice]\ncatalog = \"unknot\"\n").unwrap();
        assert_eq!(m.tolerances, Tolerances::default());
        assert_eq!(m.convention, Convention::PaperEq2);
    }

    #[test]
    fn rejects_inconsistent_manifests() {
        let cases = [
            "model = \"r3\"\n[slice]\n",
            "model = \"r3\"\n[slice]\ncatalog = \"unknot\"\nmesh_file = \"a.csv\"\n",
            "model = \"r3\"\n[slice]\nmesh_file = \"a.csv\"\n",
            "model = \"q3\"\n[slice]\ncatalog = \"unknot\"\n",
            "model = \"r3\"\n[slice]\ncatalog = \"unknot\"\n[tolerances]\nclosed = -1.0\n",
            "model = \"r3\"\n[slice]\ncatalog = \"unknot\"\ncolour = 1\n",
            "model = \"r3\"\nslice = 3\n",
        ];
        for c in cases {
            assert!(Manifest::parse(c).is_err(), "{c}");
        }
    }

    #[test]
    fn model_must_match_catalog() {
        let m = Manifest::parse("model = \"r5\"\n[slice]\ncatalog = \"unknot\"\n").unwrap();
        assert!(m.resolve(Path::new(".")).is_err());
    }
}
