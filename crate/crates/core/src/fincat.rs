//! Finite categories given by an explicit composition table.
//!
//! A [`FinCategory`] is the site of a presheaf topos. Objects and morphisms
//! are addressed by small dense indices ([`ObjId`], [`MorId`]) and keep the
//! string names they were declared with. Composition is a dense
//! `morphisms × morphisms` table; `compose(g, f)` is `g ∘ f` and is defined
//! exactly when `cod f = dom g`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sieve::SieveTable;

/// Largest number of morphisms a site may have: a sieve is one `u64`.
pub const MAX_MORPHISMS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjId(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MorId(pub u16);

impl ObjId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl MorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn bit(self) -> u64 {
        1u64 << self.0
    }
}

/// Unvalidated description of a finite category, as read from a site file
/// or assembled by a builder.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryDescription {
    pub name: String,
    pub objects: Vec<String>,
    /// `(name, dom, cod)` for every morphism, identities included.
    pub morphisms: Vec<(String, String, String)>,
    /// Object name to the name of its identity morphism.
    pub identities: BTreeMap<String, String>,
    /// `(g, f, g∘f)` entries. Composites with an identity may be omitted.
    pub compose: Vec<(String, String, String)>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CategoryError {
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("morphism `{morphism}` refers to unknown object `{object}`")]
    DanglingDomCod { morphism: String, object: String },
    #[error("object `{0}` has no identity morphism")]
    MissingIdentity(String),
    #[error("identity `{identity}` of `{object}` is not an endomorphism of it")]
    IdentityNotEndo { object: String, identity: String },
    #[error("composition entry names unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("`{g}` and `{f}` are not composable (cod {f} != dom {g})")]
    NotComposable { g: String, f: String },
    #[error("composite {g}∘{f} given twice with different results")]
    ConflictingComposite { g: String, f: String },
    #[error("composite {g}∘{f} is not defined")]
    MissingComposite { g: String, f: String },
    #[error("identity law fails: {detail}")]
    IdentityLaw { detail: String },
    #[error("associativity fails on ({h}, {g}, {f}): {detail}")]
    NonAssociative { h: String, g: String, f: String, detail: String },
    #[error("composite {g}∘{f} = {result} has the wrong domain or codomain")]
    IllTypedComposite { g: String, f: String, result: String },
    #[error("site has {0} morphisms; at most {MAX_MORPHISMS} are supported")]
    TooManyMorphisms(usize),
    #[error("category has no terminal object")]
    NoTerminal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub dom: ObjId,
    pub cod: ObjId,
}

/// A validated finite category. Immutable once built.
pub struct FinCategory {
    name: String,
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identity: Vec<MorId>,
    table: Vec<Option<MorId>>,
    /// `homs[d * n + c]` = morphisms `d → c`, in index order.
    homs: Vec<Vec<MorId>>,
    /// Morphisms with codomain `c`.
    into: Vec<Vec<MorId>>,
    into_mask: Vec<u64>,
    obj_index: HashMap<String, ObjId>,
    mor_index: HashMap<String, MorId>,
    sieves: OnceLock<SieveTable>,
}

impl Clone for FinCategory {
    fn clone(&self) -> Self {
        FinCategory {
            name: self.name.clone(),
            objects: self.objects.clone(),
            morphisms: self.morphisms.clone(),
            identity: self.identity.clone(),
            table: self.table.clone(),
            homs: self.homs.clone(),
            into: self.into.clone(),
            into_mask: self.into_mask.clone(),
            obj_index: self.obj_index.clone(),
            mor_index: self.mor_index.clone(),
            sieves: OnceLock::new(),
        }
    }
}

impl PartialEq for FinCategory {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.objects == other.objects
            && self.morphisms == other.morphisms
            && self.identity == other.identity
            && self.table == other.table
    }
}

impl Eq for FinCategory {}

impl fmt::Debug for FinCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinCategory")
            .field("name", &self.name)
            .field("objects", &self.objects)
            .field("morphisms", &self.morphisms.len())
            .finish()
    }
}

/// Checks every category law exhaustively and builds the composition table.
pub fn validate_category(raw: &CategoryDescription) -> Result<FinCategory, CategoryError> {
    let mut obj_index = HashMap::new();
    for (i, o) in raw.objects.iter().enumerate() {
        if obj_index.insert(o.clone(), ObjId(i as u16)).is_some() {
            return Err(CategoryError::DuplicateId(o.clone()));
        }
    }
    if raw.morphisms.len() > MAX_MORPHISMS {
        return Err(CategoryError::TooManyMorphisms(raw.morphisms.len()));
    }
    let mut mor_index = HashMap::new();
    let mut morphisms = Vec::with_capacity(raw.morphisms.len());
    for (i, (name, dom, cod)) in raw.morphisms.iter().enumerate() {
        if obj_index.contains_key(name) || mor_index.insert(name.clone(), MorId(i as u16)).is_some() {
            return Err(CategoryError::DuplicateId(name.clone()));
        }
        let lookup = |o: &String| {
            obj_index.get(o).copied().ok_or_else(|| CategoryError::DanglingDomCod {
                morphism: name.clone(),
                object: o.clone(),
            })
        };
        morphisms.push(Morphism { name: name.clone(), dom: lookup(dom)?, cod: lookup(cod)? });
    }

    let mut identity = Vec::with_capacity(raw.objects.len());
    for (i, o) in raw.objects.iter().enumerate() {
        let id_name = raw.identities.get(o).ok_or_else(|| CategoryError::MissingIdentity(o.clone()))?;
        let id = *mor_index.get(id_name).ok_or_else(|| CategoryError::MissingIdentity(o.clone()))?;
        let m = &morphisms[id.index()];
        if m.dom.index() != i || m.cod.index() != i {
            return Err(CategoryError::IdentityNotEndo { object: o.clone(), identity: id_name.clone() });
        }
        identity.push(id);
    }

    let m = morphisms.len();
    let mut table: Vec<Option<MorId>> = vec![None; m * m];
    let mor = |s: &String| mor_index.get(s).copied().ok_or_else(|| CategoryError::UnknownMorphism(s.clone()));
    for (g, f, h) in &raw.compose {
        let (gi, fi, hi) = (mor(g)?, mor(f)?, mor(h)?);
        if morphisms[fi.index()].cod != morphisms[gi.index()].dom {
            return Err(CategoryError::NotComposable { g: g.clone(), f: f.clone() });
        }
        let slot = &mut table[gi.index() * m + fi.index()];
        match slot {
            Some(prev) if *prev != hi => {
                return Err(CategoryError::ConflictingComposite { g: g.clone(), f: f.clone() })
            }
            _ => *slot = Some(hi),
        }
    }
    // Composites with identities are forced unless given explicitly.
    for (fi, f) in morphisms.iter().enumerate() {
        let left = identity[f.cod.index()].index();
        let right = identity[f.dom.index()].index();
        table[left * m + fi].get_or_insert(MorId(fi as u16));
        table[fi * m + right].get_or_insert(MorId(fi as u16));
    }
    for (gi, g) in morphisms.iter().enumerate() {
        for (fi, f) in morphisms.iter().enumerate() {
            if f.cod == g.dom && table[gi * m + fi].is_none() {
                return Err(CategoryError::MissingComposite { g: g.name.clone(), f: f.name.clone() });
            }
        }
    }

    let name_of = |i: usize| morphisms[i].name.clone();
    for (fi, f) in morphisms.iter().enumerate() {
        let left = identity[f.cod.index()].index();
        let right = identity[f.dom.index()].index();
        if table[left * m + fi] != Some(MorId(fi as u16)) {
            return Err(CategoryError::IdentityLaw {
                detail: format!("{}∘{} != {}", name_of(left), f.name, f.name),
            });
        }
        if table[fi * m + right] != Some(MorId(fi as u16)) {
            return Err(CategoryError::IdentityLaw {
                detail: format!("{}∘{} != {}", f.name, name_of(right), f.name),
            });
        }
    }

    let lookup = |g: usize, f: usize| -> Option<usize> {
        if morphisms[f].cod == morphisms[g].dom {
            table[g * m + f].map(MorId::index)
        } else {
            None
        }
    };
    for f in 0..m {
        for g in 0..m {
            if morphisms[f].cod != morphisms[g].dom {
                continue;
            }
            let gf = table[g * m + f].unwrap().index();
            for h in 0..m {
                if morphisms[g].cod != morphisms[h].dom {
                    continue;
                }
                let hg = table[h * m + g].unwrap().index();
                let lhs = lookup(h, gf);
                let rhs = lookup(hg, f);
                if lhs.is_none() || lhs != rhs {
                    let show = |x: Option<usize>| x.map_or_else(|| "undefined".to_string(), name_of);
                    return Err(CategoryError::NonAssociative {
                        h: name_of(h),
                        g: name_of(g),
                        f: name_of(f),
                        detail: format!("h∘(g∘f) = {}, (h∘g)∘f = {}", show(lhs), show(rhs)),
                    });
                }
            }
        }
    }
    for g in 0..m {
        for f in 0..m {
            if let Some(h) = lookup(g, f) {
                if morphisms[h].dom != morphisms[f].dom || morphisms[h].cod != morphisms[g].cod {
                    return Err(CategoryError::IllTypedComposite {
                        g: name_of(g),
                        f: name_of(f),
                        result: name_of(h),
                    });
                }
            }
        }
    }

    let n = raw.objects.len();
    let mut homs = vec![Vec::new(); n * n];
    let mut into = vec![Vec::new(); n];
    let mut into_mask = vec![0u64; n];
    for (i, f) in morphisms.iter().enumerate() {
        homs[f.dom.index() * n + f.cod.index()].push(MorId(i as u16));
        into[f.cod.index()].push(MorId(i as u16));
        into_mask[f.cod.index()] |= 1u64 << i;
    }

    Ok(FinCategory {
        name: raw.name.clone(),
        objects: raw.objects.clone(),
        morphisms,
        identity,
        table,
        homs,
        into,
        into_mask,
        obj_index,
        mor_index,
        sieves: OnceLock::new(),
    })
}

impl FinCategory {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = ObjId> + Clone {
        (0..self.objects.len() as u16).map(ObjId)
    }

    pub fn morphisms(&self) -> impl ExactSizeIterator<Item = MorId> + Clone {
        (0..self.morphisms.len() as u16).map(MorId)
    }

    pub fn object_name(&self, c: ObjId) -> &str {
        &self.objects[c.index()]
    }

    pub fn morphism_name(&self, f: MorId) -> &str {
        &self.morphisms[f.index()].name
    }

    pub fn object(&self, name: &str) -> Option<ObjId> {
        self.obj_index.get(name).copied()
    }

    pub fn morphism(&self, name: &str) -> Option<MorId> {
        self.mor_index.get(name).copied()
    }

    #[inline]
    pub fn dom(&self, f: MorId) -> ObjId {
        self.morphisms[f.index()].dom
    }

    #[inline]
    pub fn cod(&self, f: MorId) -> ObjId {
        self.morphisms[f.index()].cod
    }

    #[inline]
    pub fn identity(&self, c: ObjId) -> MorId {
        self.identity[c.index()]
    }

    pub fn is_identity(&self, f: MorId) -> bool {
        self.identity[self.dom(f).index()] == f
    }

    /// `g ∘ f`, defined when `cod f = dom g`.
    #[inline]
    pub fn compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        if self.cod(f) == self.dom(g) {
            self.table[g.index() * self.morphisms.len() + f.index()]
        } else {
            None
        }
    }

    /// `g ∘ f` for a pair already known to be composable.
    #[inline]
    pub(crate) fn compose_unchecked(&self, g: MorId, f: MorId) -> MorId {
        debug_assert_eq!(self.cod(f), self.dom(g));
        self.table[g.index() * self.morphisms.len() + f.index()].expect("validated table")
    }

    pub fn hom(&self, d: ObjId, c: ObjId) -> &[MorId] {
        &self.homs[d.index() * self.objects.len() + c.index()]
    }

    /// All morphisms with codomain `c`.
    pub fn arrows_into(&self, c: ObjId) -> &[MorId] {
        &self.into[c.index()]
    }

    /// Bitmask of the morphisms with codomain `c`.
    pub fn arrows_into_mask(&self, c: ObjId) -> u64 {
        self.into_mask[c.index()]
    }

    /// Precomputed sieves of this category.
    pub fn sieves(&self) -> &SieveTable {
        self.sieves.get_or_init(|| SieveTable::new(self))
    }

    /// Objects `t` with exactly one morphism `x → t` for every object `x`.
    pub fn terminal_objects(&self) -> Vec<ObjId> {
        self.objects().filter(|&t| self.objects().all(|x| self.hom(x, t).len() == 1)).collect()
    }

    /// The terminal object used throughout: the first by name.
    pub fn chosen_terminal(&self) -> Option<ObjId> {
        self.terminal_objects().into_iter().min_by(|a, b| self.object_name(*a).cmp(self.object_name(*b)))
    }

    /// Points `t → c` out of the chosen terminal object.
    pub fn points(&self, c: ObjId) -> Result<&[MorId], CategoryError> {
        let t = self.chosen_terminal().ok_or(CategoryError::NoTerminal)?;
        Ok(self.hom(t, c))
    }

    /// True when `f : a → b` and `g : b → a` compose to identities both ways.
    pub fn are_inverse(&self, f: MorId, g: MorId) -> bool {
        self.compose(g, f) == Some(self.identity(self.dom(f))) && self.compose(f, g) == Some(self.identity(self.cod(f)))
    }

    /// A generating set: every morphism is an identity or a composite of
    /// these. Chosen greedily in index order, so idempotents that are not
    /// otherwise reachable are kept as generators.
    pub fn generators(&self) -> Vec<MorId> {
        let m = self.num_morphisms();
        let mut gens = Vec::new();
        let mut reach = vec![false; m];
        for c in self.objects() {
            reach[self.identity(c).index()] = true;
        }
        loop {
            // Close the reachable set under composition.
            let mut changed = true;
            while changed {
                changed = false;
                for g in 0..m {
                    if !reach[g] {
                        continue;
                    }
                    for f in 0..m {
                        if reach[f] {
                            if let Some(h) = self.compose(MorId(g as u16), MorId(f as u16)) {
                                if !reach[h.index()] {
                                    reach[h.index()] = true;
                                    changed = true;
                                }
                            }
                        }
                    }
                }
            }
            // Prefer a missing morphism that is not a composite of two
            // non-identity morphisms.
            let missing: Vec<usize> = (0..m).filter(|&i| !reach[i]).collect();
            if missing.is_empty() {
                return gens;
            }
            let irreducible = missing.iter().copied().find(|&h| {
                !self.morphisms().any(|g| {
                    !self.is_identity(g)
                        && self.morphisms().any(|f| {
                            !self.is_identity(f) && self.compose(g, f) == Some(MorId(h as u16)) && f.index() != h && g.index() != h
                        })
                })
            });
            let pick = irreducible.unwrap_or(missing[0]);
            reach[pick] = true;
            gens.push(MorId(pick as u16));
        }
    }

    /// The raw description this category was built from, with the
    /// composition table listed in full.
    pub fn describe(&self) -> CategoryDescription {
        let mut compose = Vec::new();
        for g in self.morphisms() {
            for f in self.morphisms() {
                if let Some(h) = self.compose(g, f) {
                    compose.push((
                        self.morphism_name(g).to_string(),
                        self.morphism_name(f).to_string(),
                        self.morphism_name(h).to_string(),
                    ));
                }
            }
        }
        CategoryDescription {
            name: self.name.clone(),
            objects: self.objects.clone(),
            morphisms: self
                .morphisms
                .iter()
                .map(|m| (m.name.clone(), self.objects[m.dom.index()].clone(), self.objects[m.cod.index()].clone()))
                .collect(),
            identities: self
                .objects()
                .map(|c| (self.object_name(c).to_string(), self.morphism_name(self.identity(c)).to_string()))
                .collect(),
            compose,
        }
    }
}

/// Incremental builder used by the catalog and tests.
#[derive(Default)]
pub struct CategoryBuilder {
    raw: CategoryDescription,
}

impl CategoryBuilder {
    pub fn new(name: &str) -> Self {
        CategoryBuilder { raw: CategoryDescription { name: name.to_string(), ..Default::default() } }
    }

    /// Adds an object together with its identity `id_<name>`.
    pub fn object(mut self, name: &str) -> Self {
        let id = format!("id_{name}");
        self.raw.objects.push(name.to_string());
        self.raw.morphisms.push((id.clone(), name.to_string(), name.to_string()));
        self.raw.identities.insert(name.to_string(), id);
        self
    }

    pub fn morphism(mut self, name: &str, dom: &str, cod: &str) -> Self {
        self.raw.morphisms.push((name.to_string(), dom.to_string(), cod.to_string()));
        self
    }

    /// Records `g ∘ f = h`.
    pub fn compose(mut self, g: &str, f: &str, h: &str) -> Self {
        self.raw.compose.push((g.to_string(), f.to_string(), h.to_string()));
        self
    }

    pub fn description(self) -> CategoryDescription {
        self.raw
    }

    pub fn build(self) -> Result<FinCategory, CategoryError> {
        validate_category(&self.raw)
    }
}
