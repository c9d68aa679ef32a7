//! Exhaustive generators: small presheaves up to isomorphism, subobjects,
//! and a named corpus of objects per site.

use std::collections::{BTreeMap, HashSet};

use crate::cohesion::{p_upperstar, CohesiveStructure};
use crate::fincat::{FinCategory, MorId};
use crate::presheaf::{
    find_isomorphism, initial, pi0, subobject_classifier, terminal, yoneda, Presheaf, Site, Subobject,
};

/// Every presheaf with total size at most `max_total`, one per
/// isomorphism class, ordered by size vector.
pub fn small_presheaves(site: &Site, max_total: usize) -> Vec<Presheaf> {
    let plan = Plan::new(site);
    let mut out: Vec<Presheaf> = Vec::new();
    let mut buckets: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    for sizes in size_vectors(site.num_objects(), max_total) {
        plan.enumerate(&sizes, &mut |actions| {
            let elements = sizes.iter().map(|&n| (0..n).map(|i| i.to_string()).collect()).collect();
            let x = Presheaf::from_parts_unchecked(site, "gen", elements, actions).expect("checked relations");
            let key = invariant(site, &x);
            let bucket = buckets.entry(key).or_default();
            let known = bucket.iter().any(|&k| find_isomorphism(&out[k], &x).expect("same site").is_some());
            if !known {
                bucket.push(out.len());
                let name = format!("P{}", out.len());
                out.push(x.renamed(&name));
            }
        });
    }
    out
}

/// All size vectors over `n` objects with sum at most `max_total`.
fn size_vectors(n: usize, max_total: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                let used: usize = v.iter().sum();
                (0..=max_total - used).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
    out
}

/// Isomorphism invariants: sizes, component count, image sizes and fixed
/// points of every morphism.
fn invariant(site: &FinCategory, x: &Presheaf) -> Vec<usize> {
    let mut key = x.sizes();
    key.push(pi0(x).count);
    for f in site.morphisms() {
        let act = x.action(f);
        let image: HashSet<u32> = act.iter().copied().collect();
        key.push(image.len());
        if site.dom(f) == site.cod(f) {
            key.push(act.iter().enumerate().filter(|&(i, &v)| i as u32 == v).count());
        }
    }
    key
}

/// How to build every action from the actions of the generators.
struct Plan<'a> {
    site: &'a FinCategory,
    gens: Vec<MorId>,
    /// `(f, g, m)` with `f = g∘m` and `g` a generator, in an order where
    /// `m` is always available before `f`.
    derived: Vec<(MorId, MorId, MorId)>,
}

impl<'a> Plan<'a> {
    fn new(site: &'a FinCategory) -> Self {
        let gens = site.generators();
        let mut known = vec![false; site.num_morphisms()];
        for c in site.objects() {
            known[site.identity(c).index()] = true;
        }
        for &g in &gens {
            known[g.index()] = true;
        }
        let mut derived = Vec::new();
        let mut changed = true;
        while changed {
            changed = false;
            for m in site.morphisms() {
                if !known[m.index()] {
                    continue;
                }
                for &g in &gens {
                    if let Some(f) = site.compose(g, m) {
                        if !known[f.index()] {
                            known[f.index()] = true;
                            derived.push((f, g, m));
                            changed = true;
                        }
                    }
                }
            }
        }
        debug_assert!(known.iter().all(|&k| k), "generators generate");
        Plan { site, gens, derived }
    }

    fn enumerate(&self, sizes: &[usize], visit: &mut dyn FnMut(Vec<Vec<u32>>)) {
        let site = self.site;
        let mut actions: Vec<Option<Vec<u32>>> = vec![None; site.num_morphisms()];
        for c in site.objects() {
            actions[site.identity(c).index()] = Some((0..sizes[c.index()] as u32).collect());
        }
        self.step(0, sizes, &mut actions, visit);
    }

    fn step(&self, k: usize, sizes: &[usize], actions: &mut Vec<Option<Vec<u32>>>, visit: &mut dyn FnMut(Vec<Vec<u32>>)) {
        if k == self.gens.len() {
            visit(actions.iter().map(|a| a.clone().expect("all actions derived")).collect());
            return;
        }
        let site = self.site;
        let g = self.gens[k];
        let (nd, nc) = (sizes[site.dom(g).index()], sizes[site.cod(g).index()]);
        if nc > 0 && nd == 0 {
            return;
        }
        let total = nd.pow(nc as u32);
        for code in 0..total {
            let mut act = Vec::with_capacity(nc);
            let mut rest = code;
            for _ in 0..nc {
                act.push((rest % nd) as u32);
                rest /= nd.max(1);
            }
            actions[g.index()] = Some(act);
            let added = self.derive(actions);
            if self.consistent(actions) {
                self.step(k + 1, sizes, actions, visit);
            }
            for f in added {
                actions[f.index()] = None;
            }
        }
        actions[g.index()] = None;
    }

    /// Fills in every derivable action; returns the morphisms filled.
    fn derive(&self, actions: &mut [Option<Vec<u32>>]) -> Vec<MorId> {
        let mut added = Vec::new();
        for &(f, g, m) in &self.derived {
            if actions[f.index()].is_some() {
                continue;
            }
            if let (Some(ag), Some(am)) = (&actions[g.index()], &actions[m.index()]) {
                let af = ag.iter().map(|&x| am[x as usize]).collect();
                actions[f.index()] = Some(af);
                added.push(f);
            }
        }
        added
    }

    /// Contravariance on every pair whose actions are all known.
    fn consistent(&self, actions: &[Option<Vec<u32>>]) -> bool {
        let site = self.site;
        for g in site.morphisms() {
            let Some(ag) = &actions[g.index()] else { continue };
            for f in site.arrows_into(site.dom(g)).iter().copied() {
                let Some(af) = &actions[f.index()] else { continue };
                let Some(agf) = &actions[site.compose_unchecked(g, f).index()] else { continue };
                if ag.iter().zip(agf).any(|(&x, &y)| af[x as usize] != y) {
                    return false;
                }
            }
        }
        true
    }
}

/// Every subobject of `x`, starting with the empty one.
pub fn all_subobjects(x: &Presheaf) -> Vec<Subobject> {
    let site = x.site();
    let elems: Vec<(crate::fincat::ObjId, u32)> =
        site.objects().flat_map(|c| (0..x.size(c) as u32).map(move |i| (c, i))).collect();
    let principal: Vec<Vec<bool>> = elems
        .iter()
        .map(|&e| Subobject::generated_by(x, &[e]).selection().iter().flatten().copied().collect())
        .collect();
    let empty = vec![false; elems.len()];
    let mut seen: HashSet<Vec<bool>> = HashSet::from([empty.clone()]);
    let mut order = vec![empty];
    let mut i = 0;
    while i < order.len() {
        let cur = order[i].clone();
        for (k, p) in principal.iter().enumerate() {
            if cur[k] {
                continue;
            }
            let next: Vec<bool> = cur.iter().zip(p).map(|(a, b)| *a || *b).collect();
            if seen.insert(next.clone()) {
                order.push(next);
            }
        }
        i += 1;
    }
    order
        .into_iter()
        .map(|flat| {
            let selected = site.objects().map(|c| flat[x.offset(c)..x.offset(c) + x.size(c)].to_vec()).collect();
            Subobject::new(x, selected).expect("union of subfunctors")
        })
        .collect()
}

/// Named objects every site carries: initial, terminal, the discrete and
/// codiscrete two-element objects (on pre-cohesive sites), the subobject
/// classifier and the representables.
pub fn catalog_presheaves(site: &Site) -> Vec<Presheaf> {
    let mut out = vec![initial(site), terminal(site), p_upperstar(site, 2)];
    if let Ok(s) = CohesiveStructure::new(site) {
        out.push(s.p_uppershriek(2));
    }
    out.push(subobject_classifier(site));
    out.extend(site.objects().map(|c| yoneda(site, c)));
    if site.name() == "delta1" {
        out.push(crate::catalog::parallel_edges(site));
    }
    out
}
