//! Sieves, Grothendieck topologies and the sheaf condition.
//!
//! A sieve on `c` is a `u64` bitmask over the global morphism index, all of
//! whose members have codomain `c`. Every site precomputes its
//! [`SieveTable`]: the sieves on each object, a global numbering, and the
//! pullback of every sieve along every morphism. A [`Topology`] is then a
//! bitset over the global sieve numbering.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fincat::{FinCategory, MorId, ObjId};
use crate::presheaf::{for_each_nat, same_site, yoneda, Presheaf, PresheafError, Site, Subobject};

/// Environment variable overriding [`DEFAULT_BUDGET`].
pub const BUDGET_ENV: &str = "TOPOS_ENVELOPE_BUDGET";

/// Closure computations allowed while enumerating topologies.
pub const DEFAULT_BUDGET: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("topologies or presheaves live on different sites")]
    SiteMismatch,
    #[error("`{morphism}` does not have codomain `{object}`")]
    CodomainMismatch { morphism: String, object: String },
    #[error("{members} is not a sieve on `{object}`")]
    NotASieve { object: String, members: String },
    #[error("maximal sieve on `{0}` does not cover")]
    MissingMaximal(String),
    #[error("covering sieve {sieve} pulled back along `{morphism}` does not cover")]
    UnstableUnder { morphism: String, sieve: String },
    #[error("on `{object}`: {sieve} is locally covering along the cover {covering} but does not cover")]
    TransitivityFail { object: String, covering: String, sieve: String },
    #[error("topology enumeration exceeded the budget of {budget} closure computations")]
    TooLarge { budget: usize },
    #[error("join closure did not reach a fixpoint")]
    JoinClosureDiverged,
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
}

/// A sieve: a set of morphisms into `base` closed under precomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Sieve {
    pub base: ObjId,
    pub members: u64,
}

impl Sieve {
    pub fn new(base: ObjId, members: u64) -> Sieve {
        Sieve { base, members }
    }

    pub fn maximal(site: &FinCategory, c: ObjId) -> Sieve {
        Sieve { base: c, members: site.arrows_into_mask(c) }
    }

    pub fn empty(c: ObjId) -> Sieve {
        Sieve { base: c, members: 0 }
    }

    /// The sieve generated by one morphism.
    pub fn principal(site: &FinCategory, f: MorId) -> Sieve {
        let members = site.arrows_into(site.dom(f)).iter().fold(0u64, |m, &g| m | site.compose_unchecked(f, g).bit());
        Sieve { base: site.cod(f), members }
    }

    /// Right-composition closure of an arbitrary set of morphisms into `c`.
    pub fn closure_of(site: &FinCategory, c: ObjId, generators: u64) -> Sieve {
        let mut members = 0;
        for f in site.arrows_into(c) {
            if generators & f.bit() != 0 {
                members |= Sieve::principal(site, *f).members;
            }
        }
        Sieve { base: c, members }
    }

    pub fn contains(&self, f: MorId) -> bool {
        self.members & f.bit() != 0
    }

    pub fn is_maximal(&self, site: &FinCategory) -> bool {
        self.members == site.arrows_into_mask(self.base)
    }

    pub fn is_empty(&self) -> bool {
        self.members == 0
    }

    pub fn len(&self) -> usize {
        self.members.count_ones() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = MorId> + '_ {
        (0..64u16).filter(move |i| self.members >> i & 1 == 1).map(MorId)
    }

    /// True if `members` is closed under precomposition.
    pub fn is_sieve(site: &FinCategory, c: ObjId, members: u64) -> bool {
        members & !site.arrows_into_mask(c) == 0 && Sieve::closure_of(site, c, members).members == members
    }

    /// Member names in index order, e.g. `{d0,e0}`.
    pub fn display(&self, site: &FinCategory) -> String {
        let names: Vec<_> = self.iter().map(|f| site.morphism_name(f)).collect();
        format!("{{{}}}", names.join(","))
    }

    /// The sieve as a subobject of the representable on its base.
    pub fn as_subobject(&self, site: &Site) -> Subobject {
        let y = yoneda(site, self.base);
        let selected = site.objects().map(|d| site.hom(d, self.base).iter().map(|&h| self.contains(h)).collect()).collect();
        Subobject::new(&y, selected).expect("a sieve is a subfunctor of its representable")
    }
}

/// `f*R = { g : f∘g ∈ R }` for `f : d → c` and a sieve `R` on `c`.
pub fn pullback_sieve(site: &FinCategory, f: MorId, r: Sieve) -> Result<Sieve, TopologyError> {
    if site.cod(f) != r.base {
        return Err(TopologyError::CodomainMismatch {
            morphism: site.morphism_name(f).to_string(),
            object: site.object_name(r.base).to_string(),
        });
    }
    Ok(pullback_mask(site, f, r))
}

fn pullback_mask(site: &FinCategory, f: MorId, r: Sieve) -> Sieve {
    let d = site.dom(f);
    let members = site.arrows_into(d).iter().filter(|&&g| r.contains(site.compose_unchecked(f, g))).fold(0, |m, g| m | g.bit());
    Sieve { base: d, members }
}

/// All sieves of a site with a global numbering and pullback tables.
pub struct SieveTable {
    on: Vec<Vec<u64>>,
    offsets: Vec<usize>,
    index: Vec<HashMap<u64, u32>>,
    /// `pull[f][local index on cod f]` = local index on `dom f`.
    pull: Vec<Vec<u32>>,
    /// Per global index: base object.
    base: Vec<ObjId>,
}

impl SieveTable {
    pub fn new(site: &FinCategory) -> SieveTable {
        let mut on = Vec::with_capacity(site.num_objects());
        for c in site.objects() {
            let principals: Vec<u64> = site.arrows_into(c).iter().map(|&f| Sieve::principal(site, f).members).collect();
            // Every sieve is a union of principal sieves.
            let mut seen: HashSet<u64> = HashSet::from([0]);
            let mut list = vec![0u64];
            let mut i = 0;
            while i < list.len() {
                let s = list[i];
                for &p in &principals {
                    let t = s | p;
                    if seen.insert(t) {
                        list.push(t);
                    }
                }
                i += 1;
            }
            list.sort_by_key(|&m| (m.count_ones(), m));
            on.push(list);
        }
        let mut offsets = Vec::with_capacity(on.len() + 1);
        let mut base = Vec::new();
        let mut acc = 0;
        for (c, l) in on.iter().enumerate() {
            offsets.push(acc);
            acc += l.len();
            base.extend(std::iter::repeat_n(ObjId(c as u16), l.len()));
        }
        offsets.push(acc);
        let index: Vec<HashMap<u64, u32>> =
            on.iter().map(|l| l.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect()).collect();
        let pull = site
            .morphisms()
            .map(|f| {
                let (c, d) = (site.cod(f), site.dom(f));
                on[c.index()]
                    .iter()
                    .map(|&m| index[d.index()][&pullback_mask(site, f, Sieve::new(c, m)).members])
                    .collect()
            })
            .collect();
        SieveTable { on, offsets, index, pull, base }
    }

    /// Sieves on `c`, ordered by size then mask.
    pub fn on(&self, c: ObjId) -> &[u64] {
        &self.on[c.index()]
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn global(&self, c: ObjId, local: u32) -> usize {
        self.offsets[c.index()] + local as usize
    }

    pub fn local(&self, s: Sieve) -> Option<u32> {
        self.index[s.base.index()].get(&s.members).copied()
    }

    pub fn global_of(&self, s: Sieve) -> Option<usize> {
        self.local(s).map(|l| self.global(s.base, l))
    }

    pub fn sieve(&self, global: usize) -> Sieve {
        let c = self.base[global];
        Sieve::new(c, self.on[c.index()][global - self.offsets[c.index()]])
    }

    pub fn base_of(&self, global: usize) -> ObjId {
        self.base[global]
    }

    pub fn maximal_local(&self, c: ObjId) -> u32 {
        (self.on[c.index()].len() - 1) as u32
    }

    pub fn pull_local(&self, f: MorId, local: u32) -> u32 {
        self.pull[f.index()][local as usize]
    }

    pub fn pull_row(&self, f: MorId) -> &[u32] {
        &self.pull[f.index()]
    }

    pub fn globals_on(&self, c: ObjId) -> std::ops::Range<usize> {
        self.offsets[c.index()]..self.offsets[c.index() + 1]
    }
}

/// All sieves on `c`.
pub fn sieves_on(site: &FinCategory, c: ObjId) -> Vec<Sieve> {
    site.sieves().on(c).iter().map(|&m| Sieve::new(c, m)).collect()
}

/// A Grothendieck topology: the set of covering sieves.
#[derive(Clone)]
pub struct Topology {
    site: Site,
    covers: FixedBitSet,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.covers == other.covers && same_site(&self.site, &other.site)
    }
}

impl Eq for Topology {}

impl Hash for Topology {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.covers.hash(state);
    }
}

impl fmt::Debug for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Topology({})", self)
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .site
            .objects()
            .map(|c| {
                let cs: Vec<String> = self.covers(c).iter().map(|s| self.show(*s)).collect();
                format!("{}: [{}]", self.site.object_name(c), cs.join(", "))
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl Topology {
    pub(crate) fn from_bits(site: &Site, covers: FixedBitSet) -> Topology {
        Topology { site: site.clone(), covers }
    }

    /// Only maximal sieves cover: the whole topos.
    pub fn trivial(site: &Site) -> Topology {
        let t = site.sieves();
        let mut bits = FixedBitSet::with_capacity(t.total());
        for c in site.objects() {
            bits.insert(t.global(c, t.maximal_local(c)));
        }
        Topology::from_bits(site, bits)
    }

    /// Every sieve covers: the degenerate subtopos.
    pub fn degenerate(site: &Site) -> Topology {
        let mut bits = FixedBitSet::with_capacity(site.sieves().total());
        bits.insert_range(..);
        Topology::from_bits(site, bits)
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.covers
    }

    pub fn covers(&self, c: ObjId) -> Vec<Sieve> {
        let t = self.site.sieves();
        t.globals_on(c).filter(|&g| self.covers.contains(g)).map(|g| t.sieve(g)).collect()
    }

    pub fn is_cover(&self, s: Sieve) -> bool {
        self.site.sieves().global_of(s).is_some_and(|g| self.covers.contains(g))
    }

    pub fn cover_count(&self) -> usize {
        self.covers.count_ones(..)
    }

    /// `self ≤ other`: every cover of `self` covers for `other`, i.e. the
    /// subtopos of `self` contains that of `other`.
    pub fn le(&self, other: &Topology) -> bool {
        self.covers.is_subset(&other.covers)
    }

    pub fn is_trivial(&self) -> bool {
        *self == Topology::trivial(&self.site)
    }

    pub fn is_degenerate(&self) -> bool {
        self.cover_count() == self.site.sieves().total()
    }

    /// `max` and `∅` render by name; other sieves by their members.
    pub fn show(&self, s: Sieve) -> String {
        show_sieve(&self.site, s)
    }

    /// Covers per object, as displayed strings.
    pub fn cover_table(&self) -> Vec<(String, Vec<String>)> {
        self.site
            .objects()
            .map(|c| (self.site.object_name(c).to_string(), self.covers(c).iter().map(|s| self.show(*s)).collect()))
            .collect()
    }
}

pub fn show_sieve(site: &FinCategory, s: Sieve) -> String {
    if s.is_maximal(site) {
        "max".to_string()
    } else if s.is_empty() {
        "∅".to_string()
    } else {
        s.display(site)
    }
}

/// Checks the three axioms exhaustively. `covers[c]` lists the covering
/// sieves on object `c`.
pub fn validate_topology(site: &Site, covers: &[Vec<Sieve>]) -> Result<Topology, TopologyError> {
    let t = site.sieves();
    let mut bits = FixedBitSet::with_capacity(t.total());
    for c in site.objects() {
        for s in covers.get(c.index()).map(Vec::as_slice).unwrap_or(&[]) {
            let g = (s.base == c).then(|| t.global_of(*s)).flatten().ok_or_else(|| TopologyError::NotASieve {
                object: site.object_name(c).to_string(),
                members: s.display(site),
            })?;
            bits.insert(g);
        }
    }
    check_axioms(site, &bits)?;
    Ok(Topology::from_bits(site, bits))
}

pub(crate) fn check_axioms(site: &Site, bits: &FixedBitSet) -> Result<(), TopologyError> {
    let t = site.sieves();
    for c in site.objects() {
        if !bits.contains(t.global(c, t.maximal_local(c))) {
            return Err(TopologyError::MissingMaximal(site.object_name(c).to_string()));
        }
    }
    for g in bits.ones() {
        let c = t.base_of(g);
        let local = (g - t.globals_on(c).start) as u32;
        for &f in site.arrows_into(c) {
            let p = t.global(site.dom(f), t.pull_local(f, local));
            if !bits.contains(p) {
                return Err(TopologyError::UnstableUnder {
                    morphism: site.morphism_name(f).to_string(),
                    sieve: show_sieve(site, t.sieve(g)),
                });
            }
        }
    }
    for c in site.objects() {
        for s_g in t.globals_on(c).filter(|&g| bits.contains(g)) {
            let s = t.sieve(s_g);
            for r_local in 0..t.on(c).len() as u32 {
                let r_g = t.global(c, r_local);
                if bits.contains(r_g) {
                    continue;
                }
                if locally_covers(site, bits, s, r_local) {
                    return Err(TopologyError::TransitivityFail {
                        object: site.object_name(c).to_string(),
                        covering: show_sieve(site, s),
                        sieve: show_sieve(site, t.sieve(r_g)),
                    });
                }
            }
        }
    }
    Ok(())
}

/// `f*R` covers for every `f ∈ S`.
fn locally_covers(site: &FinCategory, bits: &FixedBitSet, s: Sieve, r_local: u32) -> bool {
    let t = site.sieves();
    s.iter().all(|f| bits.contains(t.global(site.dom(f), t.pull_local(f, r_local))))
}

/// Least topology containing the given sieves.
pub(crate) fn close(site: &FinCategory, seed: &FixedBitSet) -> FixedBitSet {
    let t = site.sieves();
    let mut bits = seed.clone();
    bits.grow(t.total());
    for c in site.objects() {
        bits.insert(t.global(c, t.maximal_local(c)));
    }
    loop {
        let before = bits.count_ones(..);
        // stability
        let mut stack: Vec<usize> = bits.ones().collect();
        while let Some(g) = stack.pop() {
            let c = t.base_of(g);
            let local = (g - t.globals_on(c).start) as u32;
            for &f in site.arrows_into(c) {
                let p = t.global(site.dom(f), t.pull_local(f, local));
                if !bits.put(p) {
                    stack.push(p);
                }
            }
        }
        // transitivity
        for c in site.objects() {
            let covering: Vec<Sieve> = t.globals_on(c).filter(|&g| bits.contains(g)).map(|g| t.sieve(g)).collect();
            for r_local in 0..t.on(c).len() as u32 {
                let r_g = t.global(c, r_local);
                if bits.contains(r_g) {
                    continue;
                }
                if covering.iter().any(|&s| locally_covers(site, &bits, s, r_local)) {
                    bits.insert(r_g);
                }
            }
        }
        if bits.count_ones(..) == before {
            return bits;
        }
    }
}

/// The enumeration budget, read from [`BUDGET_ENV`] when set.
pub fn enumeration_budget() -> usize {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

/// Every topology on the site, sorted by number of covering sieves.
pub fn enumerate_topologies(site: &Site) -> Result<Vec<Topology>, TopologyError> {
    enumerate_topologies_with_budget(site, enumeration_budget())
}

/// Closed sets of the topology closure operator, found breadth first:
/// each known topology is extended by one more sieve and re-closed.
pub fn enumerate_topologies_with_budget(site: &Site, budget: usize) -> Result<Vec<Topology>, TopologyError> {
    let t = site.sieves();
    let n = t.total();
    let bottom = close(site, &FixedBitSet::with_capacity(n));
    let mut seen: HashSet<FixedBitSet> = HashSet::from([bottom.clone()]);
    let mut frontier = vec![bottom];
    let mut spent = 1usize;
    while !frontier.is_empty() {
        let seeds: Vec<(usize, usize)> = frontier
            .iter()
            .enumerate()
            .flat_map(|(i, b)| (0..n).filter(|&s| !b.contains(s)).map(move |s| (i, s)))
            .collect();
        spent += seeds.len();
        if spent > budget {
            return Err(TopologyError::TooLarge { budget });
        }
        let mut next: Vec<FixedBitSet> = seeds
            .par_iter()
            .map(|&(i, s)| {
                let mut b = frontier[i].clone();
                b.insert(s);
                close(site, &b)
            })
            .collect();
        next.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
        next.dedup();
        frontier = next.into_iter().filter(|b| seen.insert(b.clone())).collect();
    }
    let mut all: Vec<FixedBitSet> = seen.into_iter().collect();
    all.sort_by(|a, b| a.count_ones(..).cmp(&b.count_ones(..)).then_with(|| a.ones().cmp(b.ones())));
    Ok(all.into_iter().map(|b| Topology::from_bits(site, b)).collect())
}

/// Coverwise intersection.
pub fn meet_topologies(j: &Topology, k: &Topology) -> Result<Topology, TopologyError> {
    if !same_site(&j.site, &k.site) {
        return Err(TopologyError::SiteMismatch);
    }
    let mut bits = j.covers.clone();
    bits.intersect_with(&k.covers);
    Ok(Topology::from_bits(&j.site, bits))
}

/// Least topology containing both.
pub fn join_topologies(j: &Topology, k: &Topology) -> Result<Topology, TopologyError> {
    if !same_site(&j.site, &k.site) {
        return Err(TopologyError::SiteMismatch);
    }
    let mut bits = j.covers.clone();
    bits.union_with(&k.covers);
    let closed = close(&j.site, &bits);
    check_axioms(&j.site, &closed).map_err(|_| TopologyError::JoinClosureDiverged)?;
    Ok(Topology::from_bits(&j.site, closed))
}

/// Covers are the dense sieves: every `f` into `c` has some `f∘g ∈ R`,
/// i.e. every pullback `f*R` is nonempty.
pub fn double_negation(site: &Site) -> Topology {
    let t = site.sieves();
    let mut bits = FixedBitSet::with_capacity(t.total());
    for c in site.objects() {
        for local in 0..t.on(c).len() as u32 {
            let dense = site.arrows_into(c).iter().all(|&f| t.on(site.dom(f))[t.pull_local(f, local) as usize] != 0);
            if dense {
                bits.insert(t.global(c, local));
            }
        }
    }
    Topology::from_bits(site, bits)
}

/// How a sieve `R ↪ y(c)` compares against an object `Z`: sections
/// `Z(c) = Nat(y(c), Z)` versus matching families `Nat(R, Z)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SieveComparison {
    pub sections: usize,
    pub matching_families: usize,
    /// Distinct sections restrict to distinct families.
    pub restriction_injective: bool,
}

impl SieveComparison {
    /// Restriction `Nat(y(c), Z) → Nat(R, Z)` is a bijection, i.e. the
    /// inclusion is orthogonal to `Z`.
    pub fn bijective(&self) -> bool {
        self.restriction_injective && self.sections == self.matching_families
    }
}

/// Compares sections with matching families for one sieve.
pub fn compare_sieve(site: &Site, r: Sieve, z: &Presheaf) -> Result<SieveComparison, TopologyError> {
    if !same_site(site, z.site()) {
        return Err(TopologyError::SiteMismatch);
    }
    let c = r.base;
    let members: Vec<MorId> = site.objects().flat_map(|k| site.hom(k, c).iter().copied().filter(|&h| r.contains(h))).collect();
    let mut restrictions = HashSet::new();
    let mut injective = true;
    for s in 0..z.size(c) as u32 {
        let family: Vec<u32> = members.iter().map(|&h| z.act(h, s)).collect();
        injective &= restrictions.insert(family);
    }
    let (rhat, _) = r.as_subobject(site).as_presheaf();
    let mut families = 0;
    for_each_nat(&rhat, z, |_| {
        families += 1;
        ControlFlow::Continue(())
    })?;
    Ok(SieveComparison { sections: z.size(c), matching_families: families, restriction_injective: injective })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SheafWitness {
    pub object: String,
    pub sieve: String,
    pub comparison: SieveComparison,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SheafVerdict {
    pub holds: bool,
    pub witness: Option<SheafWitness>,
}

/// Sheaf condition against every covering sieve of `j`; on failure the
/// first offending `(c, R)` is returned with its counts.
pub fn is_sheaf(x: &Presheaf, j: &Topology) -> Result<SheafVerdict, TopologyError> {
    let site = j.site();
    if !same_site(site, x.site()) {
        return Err(TopologyError::SiteMismatch);
    }
    for c in site.objects() {
        for r in j.covers(c) {
            if r.is_maximal(site) {
                continue;
            }
            let cmp = compare_sieve(site, r, x)?;
            if !cmp.bijective() {
                return Ok(SheafVerdict {
                    holds: false,
                    witness: Some(SheafWitness {
                        object: site.object_name(c).to_string(),
                        sieve: show_sieve(site, r),
                        comparison: cmp,
                    }),
                });
            }
        }
    }
    Ok(SheafVerdict { holds: true, witness: None })
}

/// Join of a list of topologies; the trivial topology for an empty list.
pub(crate) fn join_all(site: &Site, ts: &[Topology]) -> Result<Topology, TopologyError> {
    ts.iter().try_fold(Topology::trivial(site), |acc, t| join_topologies(&acc, t))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::catalog;
    use crate::presheaf::{constant, initial, terminal};

    fn delta1() -> Site {
        Arc::new(catalog::delta1())
    }

    fn names(site: &FinCategory, ss: &[Sieve]) -> Vec<String> {
        ss.iter().map(|s| s.display(site)).collect()
    }

    /// Closes every subset of `hom(−, c)`.
    fn sieves_by_subset_closure(site: &FinCategory, c: ObjId) -> Vec<Sieve> {
        let into = site.arrows_into(c);
        let mut out: Vec<u64> = (0u64..1 << into.len())
            .map(|bits| {
                let gens = into.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).fold(0, |m, (_, f)| m | f.bit());
                Sieve::closure_of(site, c, gens).members
            })
            .collect();
        out.sort_by_key(|&m| (m.count_ones(), m));
        out.dedup();
        out.into_iter().map(|m| Sieve::new(c, m)).collect()
    }

    /// Filters every set of sieves through the axiom check.
    fn topologies_by_brute_force(site: &Site) -> Vec<Topology> {
        let n = site.sieves().total();
        assert!(n <= 16);
        let mut out = Vec::new();
        for mask in 0u32..1 << n {
            let mut bits = FixedBitSet::with_capacity(n);
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    bits.insert(i);
                }
            }
            if check_axioms(site, &bits).is_ok() {
                out.push(Topology::from_bits(site, bits));
            }
        }
        out
    }

    #[test]
    fn sieves_on_delta1() {
        let site = delta1();
        let o0 = site.object("O0").unwrap();
        let o1 = site.object("O1").unwrap();
        assert_eq!(names(&site, &sieves_on(&site, o0)), ["{}", "{id_O0,s}"]);
        assert_eq!(
            names(&site, &sieves_on(&site, o1)),
            ["{}", "{d0,e0}", "{d1,e1}", "{d0,d1,e0,e1}", "{id_O1,d0,d1,e0,e1}"]
        );
        let t = Arc::new(catalog::terminal_category());
        assert_eq!(sieves_on(&t, ObjId(0)).len(), 2);
    }

    #[test]
    fn union_of_principals_matches_subset_closure() {
        for site in catalog::catalog_sites() {
            for c in site.objects() {
                if site.arrows_into(c).len() > 20 {
                    continue;
                }
                assert_eq!(sieves_on(&site, c), sieves_by_subset_closure(&site, c), "{}", site.name());
            }
        }
    }

    #[test]
    fn delta_trunc2_sieve_counts() {
        let site = catalog::delta_trunc(2).unwrap();
        let counts: Vec<usize> = site.objects().map(|c| sieves_on(&site, c).len()).collect();
        // subcomplexes of the 0-, 1- and 2-simplex
        assert_eq!(counts, [2, 5, 19]);
    }

    #[test]
    fn pullback_examples() {
        let site = delta1();
        let o1 = site.object("O1").unwrap();
        let d1 = site.morphism("d1").unwrap();
        let r = Sieve::closure_of(&site, o1, site.morphism("d0").unwrap().bit());
        assert!(pullback_sieve(&site, d1, r).unwrap().is_empty());
        assert_eq!(pullback_sieve(&site, site.identity(o1), r).unwrap(), r);
        for f in site.morphisms() {
            let max = Sieve::maximal(&site, site.cod(f));
            assert!(pullback_sieve(&site, f, max).unwrap().is_maximal(&site));
        }
        let s = site.morphism("s").unwrap();
        assert!(pullback_sieve(&site, s, r).is_err());
    }

    #[test]
    fn pullback_is_functorial_and_detects_membership() {
        for site in catalog::catalog_sites() {
            for c in site.objects() {
                for r in sieves_on(&site, c) {
                    for &f in site.arrows_into(c) {
                        let fr = pullback_sieve(&site, f, r).unwrap();
                        assert!(Sieve::is_sieve(&site, site.dom(f), fr.members));
                        assert_eq!(r.contains(f), fr.is_maximal(&site));
                        for &g in site.arrows_into(site.dom(f)) {
                            let lhs = pullback_sieve(&site, g, fr).unwrap();
                            let rhs = pullback_sieve(&site, site.compose(f, g).unwrap(), r).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn validate_topology_examples() {
        let site = delta1();
        let o0 = site.object("O0").unwrap();
        let o1 = site.object("O1").unwrap();
        let max0 = Sieve::maximal(&site, o0);
        let max1 = Sieve::maximal(&site, o1);
        assert!(validate_topology(&site, &[vec![max0], vec![max1]]).unwrap().is_trivial());

        let r = Sieve::closure_of(&site, o1, site.morphism("d0").unwrap().bit());
        let err = validate_topology(&site, &[vec![max0], vec![max1, r]]).unwrap_err();
        assert_eq!(err, TopologyError::UnstableUnder { morphism: "d1".into(), sieve: "{d0,e0}".into() });

        let nn = double_negation(&site);
        assert!(validate_topology(&site, &[nn.covers(o0), nn.covers(o1)]).is_ok());
        assert_eq!(
            validate_topology(&site, &[vec![], vec![max1]]).unwrap_err(),
            TopologyError::MissingMaximal("O0".into())
        );
    }

    #[test]
    fn transitivity_failure_is_reported() {
        // ∅ covers, so every sieve locally covers and must cover.
        let site = delta1();
        let o0 = site.object("O0").unwrap();
        let o1 = site.object("O1").unwrap();
        let covers = vec![vec![Sieve::empty(o0), Sieve::maximal(&site, o0)], vec![Sieve::empty(o1), Sieve::maximal(&site, o1)]];
        assert!(matches!(validate_topology(&site, &covers), Err(TopologyError::TransitivityFail { .. })));
    }

    #[test]
    fn delta1_has_three_topologies() {
        let site = delta1();
        let ts = enumerate_topologies(&site).unwrap();
        assert_eq!(ts.len(), 3);
        assert!(ts[0].is_trivial());
        assert_eq!(ts[1], double_negation(&site));
        assert!(ts[2].is_degenerate());
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let sites: Vec<Site> = vec![
            delta1(),
            Arc::new(catalog::terminal_category()),
            Arc::new(catalog::discrete2()),
            Arc::new(catalog::two_point_cone()),
            Arc::new(catalog::pointless()),
        ];
        for site in sites {
            let mut fast: Vec<_> = enumerate_topologies(&site).unwrap();
            let mut slow = topologies_by_brute_force(&site);
            let key = |t: &Topology| t.bits().ones().collect::<Vec<_>>();
            fast.sort_by_key(key);
            slow.sort_by_key(key);
            assert_eq!(fast, slow, "{}", site.name());
        }
        assert_eq!(enumerate_topologies(&Arc::new(catalog::terminal_category())).unwrap().len(), 2);
        assert_eq!(enumerate_topologies(&Arc::new(catalog::discrete2())).unwrap().len(), 4);
    }

    #[test]
    fn budget_is_enforced() {
        let site = Arc::new(catalog::delta_trunc(2).unwrap());
        assert_eq!(enumerate_topologies_with_budget(&site, 10).unwrap_err(), TopologyError::TooLarge { budget: 10 });
    }

    #[test]
    fn lattice_operations() {
        let site = delta1();
        let ts = enumerate_topologies(&site).unwrap();
        let bottom = Topology::trivial(&site);
        let top = Topology::degenerate(&site);
        for j in &ts {
            assert_eq!(meet_topologies(j, &bottom).unwrap(), bottom);
            assert_eq!(join_topologies(j, &top).unwrap(), top);
            for k in &ts {
                let m = meet_topologies(j, k).unwrap();
                let jn = join_topologies(j, k).unwrap();
                // greatest lower / least upper bounds in the enumerated poset
                let lower: Vec<_> = ts.iter().filter(|t| t.le(j) && t.le(k)).collect();
                let upper: Vec<_> = ts.iter().filter(|t| j.le(t) && k.le(t)).collect();
                assert!(lower.iter().all(|t| t.le(&m)) && lower.contains(&&m));
                assert!(upper.iter().all(|t| jn.le(t)) && upper.contains(&&jn));
            }
        }
        assert_eq!(join_topologies(&bottom, &double_negation(&site)).unwrap(), double_negation(&site));
    }

    #[test]
    fn double_negation_examples() {
        let site = delta1();
        let nn = double_negation(&site);
        assert_eq!(
            nn.cover_table(),
            vec![("O0".to_string(), vec!["max".to_string()]), ("O1".to_string(), vec!["{d0,d1,e0,e1}".to_string(), "max".to_string()])]
        );
        let t = Arc::new(catalog::terminal_category());
        assert!(double_negation(&t).is_trivial());
        for site in catalog::catalog_sites() {
            let nn = double_negation(&site);
            assert!(check_axioms(&site, nn.bits()).is_ok());
        }
    }

    #[test]
    fn double_negation_is_largest_with_initial_sheaf() {
        for site in [delta1(), Arc::new(catalog::two_point_cone()), Arc::new(catalog::delta_trunc(2).unwrap())] {
            let zero = initial(&site);
            let nn = double_negation(&site);
            for j in enumerate_topologies(&site).unwrap() {
                assert_eq!(is_sheaf(&zero, &j).unwrap().holds, j.le(&nn));
            }
        }
    }

    #[test]
    fn sheaf_examples() {
        let site = delta1();
        let x = catalog::parallel_edges(&site);
        assert!(is_sheaf(&x, &Topology::trivial(&site)).unwrap().holds);
        let top = Topology::degenerate(&site);
        assert!(is_sheaf(&terminal(&site), &top).unwrap().holds);
        assert!(!is_sheaf(&x, &top).unwrap().holds);

        let v = is_sheaf(&constant(&site, 2), &double_negation(&site)).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.object, "O1");
        assert_eq!(w.sieve, "{d0,d1,e0,e1}");
        assert_eq!(w.comparison.sections, 2);
        assert_eq!(w.comparison.matching_families, 4);
    }
}
