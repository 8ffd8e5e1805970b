//! Object catalogs: the category vocabulary scenes draw from.
//!
//! A catalog entry gives a category name, its typical extent range per axis
//! (full sizes, meters), the placements it supports, and a salience weight
//! used when sampling which objects to place. The crate ships a builtin
//! household catalog (`data/catalog.json`); external catalogs use the same
//! JSON shape.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// How an object instance may sit in a room.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Resting on the floor.
    Floor,
    /// Resting on top of a floor object (table, counter, ...).
    OnSurface,
    /// Flush against a wall, off the floor.
    WallMounted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub category: String,
    /// Smallest typical full extents, meters, per local axis (depth, width, height).
    pub extents_min: [f64; 3],
    /// Largest typical full extents, meters, per local axis.
    pub extents_max: [f64; 3],
    pub placements: Vec<Placement>,
    /// Relative sampling weight; larger means placed more often.
    pub salience: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectCatalog {
    pub name: String,
    pub entries: Vec<CatalogEntry>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("failed to read catalog {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse catalog {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid catalog: {0}")]
    Invalid(String),
    #[error("unknown catalog reference {0:?} (expected \"builtin\" or a file path)")]
    UnknownRef(String),
}

const BUILTIN_JSON: &str = include_str!("../data/catalog.json");
const MIN_CATEGORIES: usize = 40;

impl ObjectCatalog {
    /// The builtin household catalog shipped with the crate.
    pub fn builtin() -> &'static ObjectCatalog {
        static CACHE: OnceLock<ObjectCatalog> = OnceLock::new();
        CACHE.get_or_init(|| {
            let cat: ObjectCatalog =
                serde_json::from_str(BUILTIN_JSON).expect("builtin catalog parses");
            cat.validate().expect("builtin catalog is valid");
            cat
        })
    }

    /// Resolve a catalog reference: `"builtin"` or a path to a catalog JSON.
    pub fn resolve(reference: &str) -> Result<ObjectCatalog, CatalogError> {
        if reference == "builtin" {
            return Ok(Self::builtin().clone());
        }
        let path = Path::new(reference);
        if !path.exists() {
            return Err(CatalogError::UnknownRef(reference.to_string()));
        }
        Self::load(path)
    }

    pub fn load(path: &Path) -> Result<ObjectCatalog, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cat: ObjectCatalog =
            serde_json::from_str(&text).map_err(|source| CatalogError::Parse {
                path: path.display().to_string(),
                source,
            })?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.entries.len() < MIN_CATEGORIES {
            return Err(CatalogError::Invalid(format!(
                "catalog has {} categories, need at least {MIN_CATEGORIES}",
                self.entries.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if e.category.trim().is_empty() {
                return Err(CatalogError::Invalid("empty category name".into()));
            }
            if !seen.insert(e.category.clone()) {
                return Err(CatalogError::Invalid(format!(
                    "duplicate category {:?}",
                    e.category
                )));
            }
            if e.placements.is_empty() {
                return Err(CatalogError::Invalid(format!(
                    "{}: no placements",
                    e.category
                )));
            }
            for axis in 0..3 {
                if !(e.extents_min[axis] > 0.0) || !(e.extents_max[axis] >= e.extents_min[axis]) {
                    return Err(CatalogError::Invalid(format!(
                        "{}: bad extent range on axis {axis}",
                        e.category
                    )));
                }
            }
            if !(e.salience > 0.0) {
                return Err(CatalogError::Invalid(format!(
                    "{}: salience must be positive",
                    e.category
                )));
            }
        }
        Ok(())
    }

    pub fn entry(&self, category: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.category == category)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_is_valid_and_big_enough() {
        let cat = ObjectCatalog::builtin();
        assert!(cat.entries.len() >= MIN_CATEGORIES, "got {}", cat.entries.len());
        assert!(cat.entry("bed").is_some());
        assert!(cat.entry("painting").unwrap().placements.contains(&Placement::WallMounted));
    }

    #[test]
    fn resolve_builtin_and_reject_garbage() {
        assert!(ObjectCatalog::resolve("builtin").is_ok());
        assert!(matches!(
            ObjectCatalog::resolve("no/such/catalog.json"),
            Err(CatalogError::UnknownRef(_))
        ));
    }

    #[test]
    fn validation_catches_duplicates_and_bad_ranges() {
        let mut cat = ObjectCatalog::builtin().clone();
        cat.entries[1].category = cat.entries[0].category.clone();
        assert!(matches!(cat.validate(), Err(CatalogError::Invalid(_))));

        let mut cat = ObjectCatalog::builtin().clone();
        cat.entries[0].extents_min[2] = 0.0;
        assert!(matches!(cat.validate(), Err(CatalogError::Invalid(_))));
    }
}
