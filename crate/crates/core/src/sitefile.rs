//! Site files: a TOML description of a finite category, optionally with
//! presheaves and subobjects on it. See `docs/FORMAT.md`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{builtin, BUILTIN_NAMES};
use crate::fincat::{validate_category, CategoryDescription, CategoryError, FinCategory};
use crate::presheaf::{validate_presheaf, Presheaf, PresheafDescription, PresheafError, Site, Subobject};

#[derive(Debug, Error)]
pub enum SiteFileError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed site file: {0}")]
    Parse(String),
    #[error("invalid category: {0}")]
    Category(#[from] CategoryError),
    #[error("invalid presheaf `{name}`: {source}")]
    Presheaf { name: String, source: PresheafError },
    #[error("subobject `{subobject}` refers to unknown presheaf `{presheaf}`")]
    UnknownPresheaf { subobject: String, presheaf: String },
    #[error("`{0}` is neither a built-in site ({names}) nor a readable file", names = BUILTIN_NAMES.join(", "))]
    UnknownSite(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismEntry {
    pub name: String,
    pub dom: String,
    pub cod: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubobjectBlock {
    pub name: String,
    pub presheaf: String,
    /// Object name to the selected element names. Must be closed under the
    /// action.
    pub elements: BTreeMap<String, Vec<String>>,
}

/// The on-disk form of a site.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteFile {
    pub name: String,
    pub objects: Vec<String>,
    /// Identity names that differ from the default `id_<object>`.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub identities: BTreeMap<String, String>,
    /// `[g, f, g∘f]` for non-identity `g, f`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compose: Vec<[String; 3]>,
    /// Non-identity morphisms.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub morphisms: Vec<MorphismEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub presheaves: Vec<PresheafDescription>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subobjects: Vec<SubobjectBlock>,
}

/// A validated site with its named presheaves and subobjects.
#[derive(Clone, Debug)]
pub struct LoadedSite {
    pub site: Site,
    pub presheaves: Vec<Presheaf>,
    pub subobjects: Vec<(String, Subobject)>,
}

impl LoadedSite {
    pub fn presheaf(&self, name: &str) -> Option<&Presheaf> {
        self.presheaves.iter().find(|p| p.name() == name)
    }

    pub fn subobject(&self, name: &str) -> Option<&Subobject> {
        self.subobjects.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

impl SiteFile {
    pub fn parse(text: &str) -> Result<SiteFile, SiteFileError> {
        toml::from_str(text).map_err(|e| SiteFileError::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<SiteFile, SiteFileError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| SiteFileError::Io { path: path.display().to_string(), source })?;
        SiteFile::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("site files serialize")
    }

    /// The category description with implicit identities and identity
    /// composites filled in.
    pub fn category_description(&self) -> CategoryDescription {
        let identities: BTreeMap<String, String> = self
            .objects
            .iter()
            .map(|o| (o.clone(), self.identities.get(o).cloned().unwrap_or_else(|| format!("id_{o}"))))
            .collect();
        let mut morphisms: Vec<(String, String, String)> =
            self.objects.iter().map(|o| (identities[o].clone(), o.clone(), o.clone())).collect();
        morphisms.extend(self.morphisms.iter().map(|m| (m.name.clone(), m.dom.clone(), m.cod.clone())));
        CategoryDescription {
            name: self.name.clone(),
            objects: self.objects.clone(),
            morphisms,
            identities,
            compose: self.compose.iter().map(|[g, f, h]| (g.clone(), f.clone(), h.clone())).collect(),
        }
    }

    pub fn load(&self) -> Result<LoadedSite, SiteFileError> {
        let site: Site = Arc::new(validate_category(&self.category_description())?);
        let presheaves = self
            .presheaves
            .iter()
            .map(|d| validate_presheaf(&site, d).map_err(|source| SiteFileError::Presheaf { name: d.name.clone(), source }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut subobjects = Vec::new();
        for block in &self.subobjects {
            let x = presheaves.iter().find(|p| p.name() == block.presheaf).ok_or_else(|| {
                SiteFileError::UnknownPresheaf { subobject: block.name.clone(), presheaf: block.presheaf.clone() }
            })?;
            let sub = subobject_from_block(x, block)
                .map_err(|source| SiteFileError::Presheaf { name: block.name.clone(), source })?;
            subobjects.push((block.name.clone(), sub));
        }
        Ok(LoadedSite { site, presheaves, subobjects })
    }

    /// The sparse form of a category: identities implicit when named
    /// `id_<object>`, composites with an identity omitted.
    pub fn from_category(cat: &FinCategory) -> SiteFile {
        let identities = cat
            .objects()
            .filter(|&c| cat.morphism_name(cat.identity(c)) != format!("id_{}", cat.object_name(c)))
            .map(|c| (cat.object_name(c).to_string(), cat.morphism_name(cat.identity(c)).to_string()))
            .collect();
        let morphisms = cat
            .morphisms()
            .filter(|&f| !cat.is_identity(f))
            .map(|f| MorphismEntry {
                name: cat.morphism_name(f).to_string(),
                dom: cat.object_name(cat.dom(f)).to_string(),
                cod: cat.object_name(cat.cod(f)).to_string(),
            })
            .collect();
        let mut compose = Vec::new();
        for g in cat.morphisms().filter(|&g| !cat.is_identity(g)) {
            for f in cat.morphisms().filter(|&f| !cat.is_identity(f)) {
                if let Some(h) = cat.compose(g, f) {
                    compose.push([g, f, h].map(|m| cat.morphism_name(m).to_string()));
                }
            }
        }
        SiteFile {
            name: cat.name().to_string(),
            objects: cat.objects().map(|c| cat.object_name(c).to_string()).collect(),
            identities,
            compose,
            morphisms,
            presheaves: Vec::new(),
            subobjects: Vec::new(),
        }
    }

    pub fn with_presheaf(mut self, x: &Presheaf) -> Self {
        self.presheaves.push(x.describe());
        self
    }

    pub fn with_subobject(mut self, name: &str, u: &Subobject) -> Self {
        let x = u.ambient();
        let site = x.site();
        let elements = site
            .objects()
            .map(|c| (site.object_name(c).to_string(), u.elements(c).map(|i| x.element_name(c, i).to_string()).collect()))
            .collect();
        self.subobjects.push(SubobjectBlock { name: name.to_string(), presheaf: x.name().to_string(), elements });
        self
    }
}

fn subobject_from_block(x: &Presheaf, block: &SubobjectBlock) -> Result<Subobject, PresheafError> {
    let site = x.site();
    let mut selected: Vec<Vec<bool>> = site.objects().map(|c| vec![false; x.size(c)]).collect();
    for (obj, names) in &block.elements {
        let c = site.object(obj).ok_or_else(|| PresheafError::UnknownObject(obj.clone()))?;
        for n in names {
            let i = x.element_index(c, n).ok_or_else(|| PresheafError::UnknownElement {
                object: obj.clone(),
                element: n.clone(),
            })?;
            selected[c.index()][i as usize] = true;
        }
    }
    Subobject::new(x, selected)
}

/// Resolves a built-in site name or a path to a site file.
pub fn resolve_site(arg: &str) -> Result<LoadedSite, SiteFileError> {
    if let Ok(cat) = builtin(arg) {
        return Ok(LoadedSite { site: Arc::new(cat), presheaves: Vec::new(), subobjects: Vec::new() });
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(SiteFileError::UnknownSite(arg.to_string()));
    }
    SiteFile::read(path)?.load()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn builtins_round_trip() {
        for name in BUILTIN_NAMES {
            let cat = builtin(name).unwrap();
            let text = SiteFile::from_category(&cat).to_toml();
            let back = SiteFile::parse(&text).unwrap().load().unwrap();
            assert_eq!(*back.site, cat, "{name}");
        }
    }

    #[test]
    fn presheaf_and_subobject_blocks_round_trip() {
        let site: Site = Arc::new(catalog::delta1());
        let x = catalog::parallel_edges(&site);
        let u = catalog::edge_subobject(&x, "e1");
        let file = SiteFile::from_category(&site).with_presheaf(&x).with_subobject("u", &u);
        let loaded = SiteFile::parse(&file.to_toml()).unwrap().load().unwrap();
        let x2 = loaded.presheaf("X").unwrap();
        assert_eq!(x2.describe(), x.describe());
        assert_eq!(loaded.subobject("u").unwrap().selection(), u.selection());
    }

    #[test]
    fn broken_files_are_rejected() {
        assert!(matches!(SiteFile::parse("name = 3"), Err(SiteFileError::Parse(_))));
        let text = r#"
name = "bad"
objects = ["A"]
compose = [["f", "f", "id_A"]]
morphisms = [{ name = "f", dom = "A", cod = "B" }]
"#;
        let err = SiteFile::parse(text).unwrap().load().unwrap_err();
        assert!(matches!(err, SiteFileError::Category(CategoryError::DanglingDomCod { .. })));
        assert!(matches!(resolve_site("no-such-site"), Err(SiteFileError::UnknownSite(_))));
    }

    #[test]
    fn open_subobject_is_rejected() {
        let site: Site = Arc::new(catalog::delta1());
        let x = catalog::parallel_edges(&site);
        let mut file = SiteFile::from_category(&site).with_presheaf(&x);
        file.subobjects.push(SubobjectBlock {
            name: "bad".into(),
            presheaf: "X".into(),
            elements: BTreeMap::from([("O1".to_string(), vec!["e1".to_string()])]),
        });
        assert!(matches!(file.load(), Err(SiteFileError::Presheaf { .. })));
    }
}
