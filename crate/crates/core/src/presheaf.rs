//! Finite presheaves on a [`FinCategory`] and the calculus needed to test
//! orthogonality: representables, finite products, natural transformations,
//! exponentials, the subobject classifier, connected components and
//! subobjects.
//!
//! A presheaf `X` stores, for every object `c`, a list of named elements
//! `X(c)`, and for every morphism `f : d → c` its action
//! `X(f) : X(c) → X(d)` as a vector of element indices. Elements are
//! addressed by `(object, index)`; a *flat* index `offset(c) + i` numbers all
//! elements at once.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fincat::{FinCategory, MorId, ObjId};

/// Shared handle to a validated site.
pub type Site = Arc<FinCategory>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("presheaves live on different sites")]
    SiteMismatch,
    #[error("expected {expected} {what}, found {found}")]
    ShapeMismatch { what: &'static str, expected: usize, found: usize },
    #[error("action of `{morphism}` sends `{element}` outside the carrier")]
    ActionOutOfRange { morphism: String, element: String },
    #[error("identity action on `{0}` is not the identity")]
    IdentityActionBroken(String),
    #[error("contravariance fails for {g}∘{f} at element `{element}`")]
    ContravarianceBroken { f: String, g: String, element: String },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("unknown element `{element}` of `{object}`")]
    UnknownElement { object: String, element: String },
    #[error("duplicate element `{element}` in `{object}`")]
    DuplicateElement { object: String, element: String },
    #[error("no action given for `{0}` and it is not derivable from composites")]
    MissingAction(String),
    #[error("naturality fails along `{morphism}` at element `{element}`")]
    NotNatural { morphism: String, element: String },
    #[error("selected elements are not closed under `{morphism}` (element `{element}`)")]
    NotClosed { morphism: String, element: String },
    #[error("map codomain is not the ambient presheaf of the subobject")]
    AmbientMismatch,
    #[error("map is not monic")]
    NotMonic,
}

/// Unvalidated presheaf, keyed by names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresheafDescription {
    pub name: String,
    /// Object name to its element names.
    pub elements: BTreeMap<String, Vec<String>>,
    /// Morphism name to `element of cod ↦ element of dom`. Identities may be
    /// omitted, as may any morphism that is a composite of listed ones.
    pub actions: BTreeMap<String, BTreeMap<String, String>>,
}

struct Inner {
    site: Site,
    name: String,
    elements: Vec<Vec<String>>,
    action: Vec<Vec<u32>>,
    offsets: Vec<usize>,
}

/// A finite presheaf. Cloning is cheap.
#[derive(Clone)]
pub struct Presheaf(Arc<Inner>);

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (same_site(&self.0.site, &other.0.site)
                && self.0.elements == other.0.elements
                && self.0.action == other.0.action)
    }
}

impl Eq for Presheaf {}

impl fmt::Debug for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sizes: Vec<_> = self.site().objects().map(|c| self.size(c)).collect();
        write!(f, "Presheaf({} {:?})", self.0.name, sizes)
    }
}

pub(crate) fn same_site(a: &Site, b: &Site) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn check_site(a: &Presheaf, b: &Presheaf) -> Result<(), PresheafError> {
    if same_site(a.site(), b.site()) {
        Ok(())
    } else {
        Err(PresheafError::SiteMismatch)
    }
}

impl Presheaf {
    /// Builds a presheaf from index data and checks functoriality.
    pub fn from_parts(
        site: &Site,
        name: &str,
        elements: Vec<Vec<String>>,
        action: Vec<Vec<u32>>,
    ) -> Result<Presheaf, PresheafError> {
        let x = Presheaf::from_parts_unchecked(site, name, elements, action)?;
        x.check_functoriality()?;
        Ok(x)
    }

    /// Shape-checked only; used for constructions that are functorial by
    /// construction.
    pub(crate) fn from_parts_unchecked(
        site: &Site,
        name: &str,
        elements: Vec<Vec<String>>,
        action: Vec<Vec<u32>>,
    ) -> Result<Presheaf, PresheafError> {
        if elements.len() != site.num_objects() {
            return Err(PresheafError::ShapeMismatch {
                what: "carriers",
                expected: site.num_objects(),
                found: elements.len(),
            });
        }
        if action.len() != site.num_morphisms() {
            return Err(PresheafError::ShapeMismatch {
                what: "actions",
                expected: site.num_morphisms(),
                found: action.len(),
            });
        }
        for f in site.morphisms() {
            let (d, c) = (site.dom(f), site.cod(f));
            let act = &action[f.index()];
            if act.len() != elements[c.index()].len() {
                return Err(PresheafError::ShapeMismatch {
                    what: "action entries",
                    expected: elements[c.index()].len(),
                    found: act.len(),
                });
            }
            if let Some(i) = act.iter().position(|&v| v as usize >= elements[d.index()].len()) {
                return Err(PresheafError::ActionOutOfRange {
                    morphism: site.morphism_name(f).to_string(),
                    element: elements[c.index()][i].clone(),
                });
            }
        }
        let mut offsets = Vec::with_capacity(elements.len() + 1);
        let mut acc = 0;
        for e in &elements {
            offsets.push(acc);
            acc += e.len();
        }
        offsets.push(acc);
        Ok(Presheaf(Arc::new(Inner { site: site.clone(), name: name.to_string(), elements, action, offsets })))
    }

    fn check_functoriality(&self) -> Result<(), PresheafError> {
        let site = self.site();
        for c in site.objects() {
            let id = site.identity(c);
            if self.action(id).iter().enumerate().any(|(i, &v)| v as usize != i) {
                return Err(PresheafError::IdentityActionBroken(site.object_name(c).to_string()));
            }
        }
        for g in site.morphisms() {
            for &f in site.arrows_into(site.dom(g)) {
                let gf = site.compose_unchecked(g, f);
                for (x, &y) in self.action(g).iter().enumerate() {
                    if self.action(gf)[x] != self.action(f)[y as usize] {
                        return Err(PresheafError::ContravarianceBroken {
                            f: site.morphism_name(f).to_string(),
                            g: site.morphism_name(g).to_string(),
                            element: self.0.elements[site.cod(g).index()][x].clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn site(&self) -> &Site {
        &self.0.site
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn renamed(&self, name: &str) -> Presheaf {
        Presheaf(Arc::new(Inner {
            site: self.0.site.clone(),
            name: name.to_string(),
            elements: self.0.elements.clone(),
            action: self.0.action.clone(),
            offsets: self.0.offsets.clone(),
        }))
    }

    #[inline]
    pub fn size(&self, c: ObjId) -> usize {
        self.0.elements[c.index()].len()
    }

    pub fn total_size(&self) -> usize {
        *self.0.offsets.last().unwrap()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.elements.iter().map(Vec::len).collect()
    }

    pub fn elements(&self, c: ObjId) -> &[String] {
        &self.0.elements[c.index()]
    }

    pub fn element_name(&self, c: ObjId, i: u32) -> &str {
        &self.0.elements[c.index()][i as usize]
    }

    pub fn element_index(&self, c: ObjId, name: &str) -> Option<u32> {
        self.0.elements[c.index()].iter().position(|e| e == name).map(|i| i as u32)
    }

    /// `X(f)` for `f : d → c`, indexed by elements of `X(c)`.
    #[inline]
    pub fn action(&self, f: MorId) -> &[u32] {
        &self.0.action[f.index()]
    }

    #[inline]
    pub fn act(&self, f: MorId, i: u32) -> u32 {
        self.0.action[f.index()][i as usize]
    }

    #[inline]
    pub fn offset(&self, c: ObjId) -> usize {
        self.0.offsets[c.index()]
    }

    /// Inverse of the flat numbering.
    pub fn unflatten(&self, flat: usize) -> (ObjId, u32) {
        let c = self.0.offsets.partition_point(|&o| o <= flat) - 1;
        (ObjId(c as u16), (flat - self.0.offsets[c]) as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.total_size() == 0
    }

    /// Name-keyed description with every non-identity action listed.
    pub fn describe(&self) -> PresheafDescription {
        let site = self.site();
        let mut d = PresheafDescription { name: self.name().to_string(), ..Default::default() };
        for c in site.objects() {
            d.elements.insert(site.object_name(c).to_string(), self.elements(c).to_vec());
        }
        for f in site.morphisms().filter(|&f| !site.is_identity(f)) {
            let (dom, cod) = (site.dom(f), site.cod(f));
            let map = self
                .action(f)
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.elements(cod)[i].clone(), self.elements(dom)[j as usize].clone()))
                .collect();
            d.actions.insert(site.morphism_name(f).to_string(), map);
        }
        d
    }
}

/// Resolves names, derives omitted actions from composites, and checks
/// functoriality.
pub fn validate_presheaf(site: &Site, raw: &PresheafDescription) -> Result<Presheaf, PresheafError> {
    for o in raw.elements.keys() {
        site.object(o).ok_or_else(|| PresheafError::UnknownObject(o.clone()))?;
    }
    let mut elements = vec![Vec::new(); site.num_objects()];
    for c in site.objects() {
        let name = site.object_name(c);
        let list = raw.elements.get(name).cloned().unwrap_or_default();
        let mut seen = std::collections::HashSet::new();
        for e in &list {
            if !seen.insert(e) {
                return Err(PresheafError::DuplicateElement { object: name.to_string(), element: e.clone() });
            }
        }
        elements[c.index()] = list;
    }
    let index_of = |c: ObjId, e: &str| -> Result<u32, PresheafError> {
        elements[c.index()].iter().position(|x| x == e).map(|i| i as u32).ok_or_else(|| {
            PresheafError::UnknownElement { object: site.object_name(c).to_string(), element: e.to_string() }
        })
    };

    let mut action: Vec<Option<Vec<u32>>> = vec![None; site.num_morphisms()];
    for c in site.objects() {
        action[site.identity(c).index()] = Some((0..elements[c.index()].len() as u32).collect());
    }
    for (mname, map) in &raw.actions {
        let f = site.morphism(mname).ok_or_else(|| PresheafError::UnknownMorphism(mname.clone()))?;
        let (d, c) = (site.dom(f), site.cod(f));
        let mut act = vec![u32::MAX; elements[c.index()].len()];
        for (from, to) in map {
            act[index_of(c, from)? as usize] = index_of(d, to)?;
        }
        if let Some(i) = act.iter().position(|&v| v == u32::MAX) {
            return Err(PresheafError::ActionOutOfRange {
                morphism: mname.clone(),
                element: elements[c.index()][i].clone(),
            });
        }
        action[f.index()] = Some(act);
    }
    // X(g∘f) = X(f)∘X(g)
    let mut changed = true;
    while changed {
        changed = false;
        for g in site.morphisms() {
            for &f in site.arrows_into(site.dom(g)) {
                let gf = site.compose_unchecked(g, f);
                if action[gf.index()].is_some() {
                    continue;
                }
                if let (Some(ag), Some(af)) = (&action[g.index()], &action[f.index()]) {
                    let derived = ag.iter().map(|&y| af[y as usize]).collect();
                    action[gf.index()] = Some(derived);
                    changed = true;
                }
            }
        }
    }
    let action = action
        .into_iter()
        .enumerate()
        .map(|(i, a)| a.ok_or_else(|| PresheafError::MissingAction(site.morphism_name(MorId(i as u16)).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Presheaf::from_parts(site, &raw.name, elements, action)
}

/// The representable `y(c) = hom(−, c)`, acting by precomposition.
pub fn yoneda(site: &Site, c: ObjId) -> Presheaf {
    let elements: Vec<Vec<String>> = site
        .objects()
        .map(|d| site.hom(d, c).iter().map(|&h| site.morphism_name(h).to_string()).collect())
        .collect();
    let action = site
        .morphisms()
        .map(|f| {
            let (d, e) = (site.dom(f), site.cod(f));
            let target = site.hom(d, c);
            site.hom(e, c)
                .iter()
                .map(|&h| {
                    let hf = site.compose_unchecked(h, f);
                    target.iter().position(|&t| t == hf).expect("composite lands in hom") as u32
                })
                .collect()
        })
        .collect();
    Presheaf::from_parts_unchecked(site, &format!("y({})", site.object_name(c)), elements, action)
        .expect("representable is well formed")
}

/// The constant presheaf on an `n`-element set `{0, …, n-1}`.
pub fn constant(site: &Site, n: usize) -> Presheaf {
    let names: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let elements = vec![names; site.num_objects()];
    let action = site.morphisms().map(|_| (0..n as u32).collect()).collect();
    Presheaf::from_parts_unchecked(site, &format!("const{n}"), elements, action).expect("constant presheaf")
}

pub fn terminal(site: &Site) -> Presheaf {
    constant(site, 1).renamed("1")
}

pub fn initial(site: &Site) -> Presheaf {
    constant(site, 0).renamed("0")
}

/// Pointwise product. Element `(a, b)` of `X × Y` at `c` has index
/// `a * |Y(c)| + b`.
pub fn product(x: &Presheaf, y: &Presheaf) -> Result<Presheaf, PresheafError> {
    check_site(x, y)?;
    let site = x.site();
    let elements = site
        .objects()
        .map(|c| {
            let mut v = Vec::with_capacity(x.size(c) * y.size(c));
            for a in x.elements(c) {
                for b in y.elements(c) {
                    v.push(format!("({a},{b})"));
                }
            }
            v
        })
        .collect();
    let action = site
        .morphisms()
        .map(|f| {
            let (d, c) = (site.dom(f), site.cod(f));
            let ny_d = y.size(d) as u32;
            let mut v = Vec::with_capacity(x.size(c) * y.size(c));
            for &a in x.action(f) {
                for &b in y.action(f) {
                    v.push(a * ny_d + b);
                }
            }
            v
        })
        .collect();
    Presheaf::from_parts_unchecked(site, &format!("{}×{}", x.name(), y.name()), elements, action)
}

/// Disjoint union; elements of `Y` follow those of `X` at every object.
pub fn coproduct(x: &Presheaf, y: &Presheaf) -> Result<Presheaf, PresheafError> {
    check_site(x, y)?;
    let site = x.site();
    let elements = site
        .objects()
        .map(|c| {
            x.elements(c)
                .iter()
                .map(|e| format!("L{e}"))
                .chain(y.elements(c).iter().map(|e| format!("R{e}")))
                .collect()
        })
        .collect();
    let action = site
        .morphisms()
        .map(|f| {
            let shift = x.size(site.dom(f)) as u32;
            x.action(f).iter().copied().chain(y.action(f).iter().map(|&b| b + shift)).collect()
        })
        .collect();
    Presheaf::from_parts_unchecked(site, &format!("{}+{}", x.name(), y.name()), elements, action)
}

/// A natural transformation, stored componentwise.
#[derive(Clone, PartialEq, Eq)]
pub struct NatTransf {
    source: Presheaf,
    target: Presheaf,
    components: Vec<Vec<u32>>,
}

impl fmt::Debug for NatTransf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NatTransf({} → {}: {:?})", self.source.name(), self.target.name(), self.components)
    }
}

impl NatTransf {
    /// Checks ranges and every naturality square.
    pub fn new(source: &Presheaf, target: &Presheaf, components: Vec<Vec<u32>>) -> Result<NatTransf, PresheafError> {
        check_site(source, target)?;
        let site = source.site();
        if components.len() != site.num_objects() {
            return Err(PresheafError::ShapeMismatch {
                what: "components",
                expected: site.num_objects(),
                found: components.len(),
            });
        }
        for c in site.objects() {
            let comp = &components[c.index()];
            if comp.len() != source.size(c) || comp.iter().any(|&v| v as usize >= target.size(c)) {
                return Err(PresheafError::ShapeMismatch {
                    what: "component entries",
                    expected: source.size(c),
                    found: comp.len(),
                });
            }
        }
        for f in site.morphisms() {
            let (d, c) = (site.dom(f), site.cod(f));
            for x in 0..source.size(c) {
                let lhs = components[d.index()][source.act(f, x as u32) as usize];
                let rhs = target.act(f, components[c.index()][x]);
                if lhs != rhs {
                    return Err(PresheafError::NotNatural {
                        morphism: site.morphism_name(f).to_string(),
                        element: source.element_name(c, x as u32).to_string(),
                    });
                }
            }
        }
        Ok(NatTransf { source: source.clone(), target: target.clone(), components })
    }

    pub(crate) fn from_flat(source: &Presheaf, target: &Presheaf, flat: &[u32]) -> NatTransf {
        let components = source
            .site()
            .objects()
            .map(|c| flat[source.offset(c)..source.offset(c) + source.size(c)].to_vec())
            .collect();
        NatTransf { source: source.clone(), target: target.clone(), components }
    }

    pub fn identity(x: &Presheaf) -> NatTransf {
        let components = x.site().objects().map(|c| (0..x.size(c) as u32).collect()).collect();
        NatTransf { source: x.clone(), target: x.clone(), components }
    }

    pub fn source(&self) -> &Presheaf {
        &self.source
    }

    pub fn target(&self) -> &Presheaf {
        &self.target
    }

    pub fn component(&self, c: ObjId) -> &[u32] {
        &self.components[c.index()]
    }

    pub fn components(&self) -> &[Vec<u32>] {
        &self.components
    }

    #[inline]
    pub fn apply(&self, c: ObjId, x: u32) -> u32 {
        self.components[c.index()][x as usize]
    }

    /// Flat image vector, indexed by flat source elements.
    pub fn flat(&self) -> Vec<u32> {
        self.components.iter().flatten().copied().collect()
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &NatTransf) -> Result<NatTransf, PresheafError> {
        if self.target != other.source {
            return Err(PresheafError::AmbientMismatch);
        }
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(c, comp)| comp.iter().map(|&v| other.components[c][v as usize]).collect())
            .collect();
        Ok(NatTransf { source: self.source.clone(), target: other.target.clone(), components })
    }

    /// Componentwise injective, which is monic in a presheaf topos.
    pub fn is_mono(&self) -> bool {
        self.components.iter().enumerate().all(|(c, comp)| {
            let mut seen = vec![false; self.target.size(ObjId(c as u16))];
            comp.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
        })
    }

    pub fn is_epi(&self) -> bool {
        self.components.iter().enumerate().all(|(c, comp)| {
            let mut seen = vec![false; self.target.size(ObjId(c as u16))];
            for &v in comp {
                seen[v as usize] = true;
            }
            seen.into_iter().all(|b| b)
        })
    }

    pub fn is_iso(&self) -> bool {
        self.is_mono() && self.is_epi()
    }
}

/// Backtracking search over natural transformations `X ⇒ Z`.
///
/// Choosing a value for an element forces the value of each of its
/// restrictions; a clash with an earlier forced value prunes the branch.
/// Elements are visited object by object, objects with the most incoming
/// morphisms first, so most elements end up forced rather than chosen.
struct NatSearch<'a> {
    x: &'a Presheaf,
    z: &'a Presheaf,
    order: Vec<(ObjId, u32)>,
    /// Non-identity morphisms into each object.
    restrictions: Vec<Vec<MorId>>,
    val: Vec<u32>,
    trail: Vec<usize>,
}

const UNSET: u32 = u32::MAX;

impl<'a> NatSearch<'a> {
    fn new(x: &'a Presheaf, z: &'a Presheaf) -> Self {
        let site = x.site();
        let mut objs: Vec<ObjId> = site.objects().collect();
        objs.sort_by_key(|&c| std::cmp::Reverse(site.arrows_into(c).len()));
        let order = objs.iter().flat_map(|&c| (0..x.size(c) as u32).map(move |i| (c, i))).collect();
        let restrictions = site
            .objects()
            .map(|c| site.arrows_into(c).iter().copied().filter(|&f| !site.is_identity(f)).collect())
            .collect();
        NatSearch { x, z, order, restrictions, val: vec![UNSET; x.total_size()], trail: Vec::new() }
    }

    fn assign(&mut self, c: ObjId, i: u32, v: u32) -> bool {
        let site = self.x.site();
        let k = self.x.offset(c) + i as usize;
        self.val[k] = v;
        self.trail.push(k);
        for &f in &self.restrictions[c.index()] {
            let d = site.dom(f);
            let j = self.x.offset(d) + self.x.act(f, i) as usize;
            let w = self.z.act(f, v);
            match self.val[j] {
                UNSET => {
                    self.val[j] = w;
                    self.trail.push(j);
                }
                existing if existing != w => return false,
                _ => {}
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        for k in self.trail.drain(mark..) {
            self.val[k] = UNSET;
        }
    }

    fn run<F: FnMut(&[u32]) -> ControlFlow<()>>(&mut self, pos: usize, visit: &mut F) -> ControlFlow<()> {
        if pos == self.order.len() {
            return visit(&self.val);
        }
        let (c, i) = self.order[pos];
        if self.val[self.x.offset(c) + i as usize] != UNSET {
            return self.run(pos + 1, visit);
        }
        for v in 0..self.z.size(c) as u32 {
            let mark = self.trail.len();
            if self.assign(c, i, v) {
                self.run(pos + 1, visit)?;
            }
            self.undo(mark);
        }
        ControlFlow::Continue(())
    }
}

/// Calls `visit` on every natural transformation `X ⇒ Z`, given as a flat
/// vector over the elements of `X`. Stops early on `Break`.
pub fn for_each_nat<F>(x: &Presheaf, z: &Presheaf, mut visit: F) -> Result<(), PresheafError>
where
    F: FnMut(&[u32]) -> ControlFlow<()>,
{
    check_site(x, z)?;
    let mut search = NatSearch::new(x, z);
    let _ = search.run(0, &mut visit);
    Ok(())
}

/// All natural transformations `X ⇒ Z`, in the order the search finds them.
pub fn nat_transformations(x: &Presheaf, z: &Presheaf) -> Result<Vec<NatTransf>, PresheafError> {
    let mut out = Vec::new();
    for_each_nat(x, z, |flat| {
        out.push(NatTransf::from_flat(x, z, flat));
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub(crate) fn nat_flats(x: &Presheaf, z: &Presheaf) -> Result<Vec<Vec<u32>>, PresheafError> {
    let mut out = Vec::new();
    for_each_nat(x, z, |flat| {
        out.push(flat.to_vec());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count_nat(x: &Presheaf, z: &Presheaf) -> Result<usize, PresheafError> {
    let mut n = 0;
    for_each_nat(x, z, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// The map `y(c) → X` picking the element `i ∈ X(c)`.
pub fn yoneda_map(x: &Presheaf, c: ObjId, i: u32) -> NatTransf {
    let site = x.site();
    let y = yoneda(site, c);
    let components = site.objects().map(|d| site.hom(d, c).iter().map(|&h| x.act(h, i)).collect()).collect();
    NatTransf { source: y, target: x.clone(), components }
}

/// The exponential `Z^X` with `Z^X(c) = Nat(y(c) × X, Z)`.
pub struct Exponential {
    base: Presheaf,
    exponent: Presheaf,
    object: Presheaf,
    /// `y(c) × X` for every `c`.
    probes: Vec<Presheaf>,
    /// Flat transformations `y(c) × X ⇒ Z` naming each element of `Z^X(c)`.
    members: Vec<Vec<Vec<u32>>>,
    index: Vec<HashMap<Vec<u32>, u32>>,
}

impl Exponential {
    pub fn object(&self) -> &Presheaf {
        &self.object
    }

    pub fn base(&self) -> &Presheaf {
        &self.base
    }

    pub fn exponent(&self) -> &Presheaf {
        &self.exponent
    }

    /// The transformation `y(c) × X ⇒ Z` that element `i` of `Z^X(c)` stands for.
    pub fn member(&self, c: ObjId, i: u32) -> NatTransf {
        NatTransf::from_flat(&self.probes[c.index()], &self.base, &self.members[c.index()][i as usize])
    }

    /// `Z^f : Z^X → Z^W` for `f : W → X`, where `self = Z^X` and
    /// `other = Z^W`.
    pub fn precompose(&self, f: &NatTransf, other: &Exponential) -> Result<NatTransf, PresheafError> {
        if f.target() != &self.exponent || f.source() != &other.exponent || self.base != other.base {
            return Err(PresheafError::AmbientMismatch);
        }
        let site = self.base.site();
        let x = &self.exponent;
        let w = &other.exponent;
        let mut components = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let (px, pw) = (&self.probes[c.index()], &other.probes[c.index()]);
            // flat element of y(c)×W ↦ flat element of y(c)×X under id × f
            let mut along = vec![0usize; pw.total_size()];
            for k in site.objects() {
                let hk = site.hom(k, c).len();
                for h in 0..hk {
                    for wi in 0..w.size(k) {
                        let xi = f.apply(k, wi as u32) as usize;
                        along[pw.offset(k) + h * w.size(k) + wi] = px.offset(k) + h * x.size(k) + xi;
                    }
                }
            }
            let comp = self.members[c.index()]
                .iter()
                .map(|phi| {
                    let psi: Vec<u32> = along.iter().map(|&j| phi[j]).collect();
                    other.index[c.index()][&psi]
                })
                .collect();
            components.push(comp);
        }
        Ok(NatTransf { source: self.object.clone(), target: other.object.clone(), components })
    }
}

/// Computes `Z^X` by enumerating `Nat(y(c) × X, Z)` once per object.
pub fn exponential(z: &Presheaf, x: &Presheaf) -> Result<Exponential, PresheafError> {
    check_site(z, x)?;
    let site = x.site();
    let mut probes = Vec::with_capacity(site.num_objects());
    let mut members = Vec::with_capacity(site.num_objects());
    let mut index = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let probe = product(&yoneda(site, c), x)?;
        let list = nat_flats(&probe, z)?;
        let idx: HashMap<Vec<u32>, u32> = list.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect();
        probes.push(probe);
        members.push(list);
        index.push(idx);
    }
    let elements: Vec<Vec<String>> =
        site.objects().map(|c| (0..members[c.index()].len()).map(|i| format!("φ{i}")).collect()).collect();
    let mut action = Vec::with_capacity(site.num_morphisms());
    for g in site.morphisms() {
        let (d, c) = (site.dom(g), site.cod(g));
        let (pc, pd) = (&probes[c.index()], &probes[d.index()]);
        // (h : k → d, x) ↦ (g∘h : k → c, x)
        let mut along = vec![0usize; pd.total_size()];
        for k in site.objects() {
            let hom_c = site.hom(k, c);
            for (hpos, &h) in site.hom(k, d).iter().enumerate() {
                let gh = site.compose_unchecked(g, h);
                let gpos = hom_c.iter().position(|&t| t == gh).expect("composite in hom");
                for xi in 0..x.size(k) {
                    along[pd.offset(k) + hpos * x.size(k) + xi] = pc.offset(k) + gpos * x.size(k) + xi;
                }
            }
        }
        let act = members[c.index()]
            .iter()
            .map(|phi| {
                let psi: Vec<u32> = along.iter().map(|&j| phi[j]).collect();
                index[d.index()][&psi]
            })
            .collect();
        action.push(act);
    }
    let object = Presheaf::from_parts_unchecked(site, &format!("{}^{}", z.name(), x.name()), elements, action)?;
    Ok(Exponential { base: z.clone(), exponent: x.clone(), object, probes, members, index })
}

/// `Ω`, with `Ω(c)` the sieves on `c` and action by pullback.
pub fn subobject_classifier(site: &Site) -> Presheaf {
    let table = site.sieves();
    let elements = site
        .objects()
        .map(|c| table.on(c).iter().map(|&m| crate::sieve::Sieve::new(c, m).display(site)).collect())
        .collect();
    let action = site.morphisms().map(|f| table.pull_row(f).to_vec()).collect();
    Presheaf::from_parts_unchecked(site, "Ω", elements, action).expect("subobject classifier")
}

/// Connected components of the category of elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// `of[c][i]` is the component of element `i ∈ X(c)`.
    pub of: Vec<Vec<u32>>,
}

/// `π₀(X)`: elements modulo the equivalence generated by `x ∼ X(f)(x)`.
/// Components are numbered by first appearance in the flat order.
pub fn pi0(x: &Presheaf) -> Components {
    let site = x.site();
    let mut uf = UnionFind::<u32>::new(x.total_size());
    for f in site.morphisms() {
        let (d, c) = (site.dom(f), site.cod(f));
        for (i, &j) in x.action(f).iter().enumerate() {
            uf.union((x.offset(c) + i) as u32, (x.offset(d) + j as usize) as u32);
        }
    }
    let mut label: HashMap<u32, u32> = HashMap::new();
    let mut of = Vec::with_capacity(site.num_objects());
    for c in site.objects() {
        let comp = (0..x.size(c))
            .map(|i| {
                let root = uf.find((x.offset(c) + i) as u32);
                let next = label.len() as u32;
                *label.entry(root).or_insert(next)
            })
            .collect();
        of.push(comp);
    }
    Components { count: label.len(), of }
}

/// A subfunctor of an ambient presheaf.
#[derive(Clone, PartialEq, Eq)]
pub struct Subobject {
    ambient: Presheaf,
    selected: Vec<Vec<bool>>,
}

impl fmt::Debug for Subobject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let site = self.ambient.site();
        let mut m = f.debug_map();
        for c in site.objects() {
            let names: Vec<_> = self.elements(c).map(|i| self.ambient.element_name(c, i)).collect();
            m.entry(&site.object_name(c), &names);
        }
        m.finish()
    }
}

impl Subobject {
    pub fn new(ambient: &Presheaf, selected: Vec<Vec<bool>>) -> Result<Subobject, PresheafError> {
        let site = ambient.site();
        if selected.len() != site.num_objects()
            || site.objects().any(|c| selected[c.index()].len() != ambient.size(c))
        {
            return Err(PresheafError::ShapeMismatch {
                what: "selection entries",
                expected: ambient.total_size(),
                found: selected.iter().map(Vec::len).sum(),
            });
        }
        for f in site.morphisms() {
            let (d, c) = (site.dom(f), site.cod(f));
            for (i, &j) in ambient.action(f).iter().enumerate() {
                if selected[c.index()][i] && !selected[d.index()][j as usize] {
                    return Err(PresheafError::NotClosed {
                        morphism: site.morphism_name(f).to_string(),
                        element: ambient.element_name(c, i as u32).to_string(),
                    });
                }
            }
        }
        Ok(Subobject { ambient: ambient.clone(), selected })
    }

    pub fn full(x: &Presheaf) -> Subobject {
        Subobject { ambient: x.clone(), selected: x.sizes().into_iter().map(|n| vec![true; n]).collect() }
    }

    pub fn empty(x: &Presheaf) -> Subobject {
        Subobject { ambient: x.clone(), selected: x.sizes().into_iter().map(|n| vec![false; n]).collect() }
    }

    /// The least subobject containing the given elements.
    pub fn generated_by(x: &Presheaf, gens: &[(ObjId, u32)]) -> Subobject {
        let site = x.site();
        let mut selected: Vec<Vec<bool>> = x.sizes().into_iter().map(|n| vec![false; n]).collect();
        for &(c, i) in gens {
            for &f in site.arrows_into(c) {
                selected[site.dom(f).index()][x.act(f, i) as usize] = true;
            }
        }
        Subobject { ambient: x.clone(), selected }
    }

    /// The image of a monic map, as a subobject of its codomain.
    pub fn image_of(m: &NatTransf) -> Result<Subobject, PresheafError> {
        if !m.is_mono() {
            return Err(PresheafError::NotMonic);
        }
        let x = m.target();
        let mut selected: Vec<Vec<bool>> = x.sizes().into_iter().map(|n| vec![false; n]).collect();
        for (c, comp) in m.components().iter().enumerate() {
            for &v in comp {
                selected[c][v as usize] = true;
            }
        }
        Ok(Subobject { ambient: x.clone(), selected })
    }

    pub fn ambient(&self) -> &Presheaf {
        &self.ambient
    }

    pub fn contains(&self, c: ObjId, i: u32) -> bool {
        self.selected[c.index()][i as usize]
    }

    pub fn elements(&self, c: ObjId) -> impl Iterator<Item = u32> + '_ {
        self.selected[c.index()].iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32)
    }

    pub fn selection(&self) -> &[Vec<bool>] {
        &self.selected
    }

    pub fn size(&self, c: ObjId) -> usize {
        self.selected[c.index()].iter().filter(|&&b| b).count()
    }

    pub fn total_size(&self) -> usize {
        self.selected.iter().flatten().filter(|&&b| b).count()
    }

    pub fn is_full(&self) -> bool {
        self.selected.iter().flatten().all(|&b| b)
    }

    pub fn intersection(&self, other: &Subobject) -> Result<Subobject, PresheafError> {
        if self.ambient != other.ambient {
            return Err(PresheafError::AmbientMismatch);
        }
        let selected = self
            .selected
            .iter()
            .zip(&other.selected)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x && *y).collect())
            .collect();
        Ok(Subobject { ambient: self.ambient.clone(), selected })
    }

    /// The subobject as a presheaf in its own right, with its inclusion.
    pub fn as_presheaf(&self) -> (Presheaf, NatTransf) {
        let x = &self.ambient;
        let site = x.site();
        let mut renumber: Vec<Vec<u32>> = Vec::with_capacity(site.num_objects());
        let mut elements = Vec::with_capacity(site.num_objects());
        let mut inclusion = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let mut map = vec![u32::MAX; x.size(c)];
            let mut names = Vec::new();
            let mut inc = Vec::new();
            for i in self.elements(c) {
                map[i as usize] = names.len() as u32;
                names.push(x.element_name(c, i).to_string());
                inc.push(i);
            }
            renumber.push(map);
            elements.push(names);
            inclusion.push(inc);
        }
        let action = site
            .morphisms()
            .map(|f| {
                let (d, c) = (site.dom(f), site.cod(f));
                inclusion[c.index()].iter().map(|&i| renumber[d.index()][x.act(f, i) as usize]).collect()
            })
            .collect();
        let sub = Presheaf::from_parts_unchecked(site, &format!("sub({})", x.name()), elements, action)
            .expect("subfunctor is a presheaf");
        let inc = NatTransf { source: sub.clone(), target: x.clone(), components: inclusion };
        (sub, inc)
    }
}

/// `g*u ↪ Y` for a subobject `u ↪ X` and a map `g : Y → X`.
pub fn pullback_subobject(u: &Subobject, g: &NatTransf) -> Result<Subobject, PresheafError> {
    if g.target() != u.ambient() {
        return Err(PresheafError::AmbientMismatch);
    }
    let y = g.source();
    let selected =
        y.site().objects().map(|c| (0..y.size(c) as u32).map(|i| u.contains(c, g.apply(c, i))).collect()).collect();
    Ok(Subobject { ambient: y.clone(), selected })
}

/// Some isomorphism `X ≅ Y`, if one exists.
pub fn find_isomorphism(x: &Presheaf, y: &Presheaf) -> Result<Option<NatTransf>, PresheafError> {
    check_site(x, y)?;
    if x.sizes() != y.sizes() {
        return Ok(None);
    }
    let mut found = None;
    for_each_nat(x, y, |flat| {
        let t = NatTransf::from_flat(x, y, flat);
        if t.is_mono() {
            found = Some(t);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    Ok(found)
}

pub fn is_isomorphic(x: &Presheaf, y: &Presheaf) -> Result<bool, PresheafError> {
    Ok(find_isomorphism(x, y)?.is_some())
}
