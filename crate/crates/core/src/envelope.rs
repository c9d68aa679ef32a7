//! Orthogonality of maps against objects, and envelopes.
//!
//! The envelope of a family of presheaves is the least subtopos containing
//! all of them, i.e. the largest topology for which every member is a sheaf.
//! Its covering sieves are exactly the sieves `R` on `c` whose pullbacks
//! `f*R ↪ y(d)`, for every `f : d → c`, are orthogonal to every member.
//! [`oracle_envelope`] recomputes it independently by enumerating the
//! lattice of topologies.
//!
//! Stable orthogonality of a subobject `U ↪ X` is tested on pullbacks along
//! maps out of representables only. A pullback along an arbitrary
//! `Y → X` is a colimit of such pullbacks, and homming into `Z` turns that
//! colimit into a limit of bijections. [`stable_orthogonality_brute_force`]
//! checks the reduction against every map out of a supplied list of objects.

use std::collections::HashMap;
use std::ops::ControlFlow;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cohesion::check_precohesive;
use crate::fincat::ObjId;
use crate::presheaf::{
    exponential, for_each_nat, nat_flats, pi0, product, pullback_subobject, same_site, yoneda, Exponential, NatTransf,
    Presheaf, PresheafError, Site, Subobject,
};
use crate::sieve::{
    check_axioms, compare_sieve, enumerate_topologies, is_sheaf, join_all, show_sieve, Sieve, SieveComparison,
    Topology, TopologyError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvelopeError {
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("subobject inclusion is not monic")]
    NotMonic,
    #[error("envelope of an empty family requested")]
    EmptyFamily,
    #[error("computed cover assignment is not a topology: {0}")]
    AxiomViolation(String),
    #[error("envelope {fast} disagrees with the lattice oracle {oracle}")]
    OracleMismatch { fast: String, oracle: String },
    #[error("site is not pre-cohesive: {0}")]
    NotPrecohesive(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OrthogonalityKind {
    Plain,
    Internal,
    Stable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OrthogonalityWitness {
    /// A map `W → Z` with no extension along `f`.
    Unliftable { map: Vec<u32> },
    /// A map `W → Z` with several extensions along `f`.
    MultipleLifts { map: Vec<u32>, lifts: usize },
    /// `Z^f` is not a bijection at this object.
    ExponentialNotBijective { object: String, source_size: usize, target_size: usize },
    /// The pullback of the subobject along the element `element ∈ X(object)`
    /// is the sieve `sieve`, which is not orthogonal.
    Pullback { object: String, element: String, sieve: String, comparison: SieveComparison },
    /// Pulling back subobjects along `y(c) × f` is not a bijection.
    SubobjectPullbackNotBijective { object: String, reason: String },
    /// Same, for a pullback along an arbitrary map out of `source`.
    PullbackAlongMap { source: String, map: Vec<u32>, hom_sizes: (usize, usize) },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrthogonalityVerdict {
    pub kind: OrthogonalityKind,
    pub holds: bool,
    pub witness: Option<OrthogonalityWitness>,
}

impl OrthogonalityVerdict {
    fn pass(kind: OrthogonalityKind) -> Self {
        OrthogonalityVerdict { kind, holds: true, witness: None }
    }

    fn fail(kind: OrthogonalityKind, witness: OrthogonalityWitness) -> Self {
        OrthogonalityVerdict { kind, holds: false, witness: Some(witness) }
    }
}

/// `f : W → X` is orthogonal to `Z` when `E(X, Z) → E(W, Z)`, `g ↦ g∘f`,
/// is a bijection.
pub fn is_orthogonal(f: &NatTransf, z: &Presheaf) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let (w, x) = (f.source(), f.target());
    let from_w = nat_flats(w, z)?;
    let index: HashMap<&[u32], usize> = from_w.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
    let mut hits = vec![0usize; from_w.len()];
    let flat_f: Vec<usize> =
        w.site().objects().flat_map(|c| f.component(c).iter().map(move |&v| x.offset(c) + v as usize)).collect();
    for_each_nat(x, z, |g| {
        let gf: Vec<u32> = flat_f.iter().map(|&j| g[j]).collect();
        hits[index[gf.as_slice()]] += 1;
        ControlFlow::Continue(())
    })?;
    if let Some(i) = hits.iter().position(|&h| h != 1) {
        let map = from_w[i].clone();
        let witness = if hits[i] == 0 {
            OrthogonalityWitness::Unliftable { map }
        } else {
            OrthogonalityWitness::MultipleLifts { map, lifts: hits[i] }
        };
        return Ok(OrthogonalityVerdict::fail(OrthogonalityKind::Plain, witness));
    }
    Ok(OrthogonalityVerdict::pass(OrthogonalityKind::Plain))
}

/// `Z^f : Z^X → Z^W` is an isomorphism.
pub fn is_internally_orthogonal(f: &NatTransf, z: &Presheaf) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let zx = exponential(z, f.target())?;
    let zw = exponential(z, f.source())?;
    is_internally_orthogonal_with(f, &zx, &zw)
}

/// As [`is_internally_orthogonal`], with both exponentials supplied so
/// callers can reuse them across maps.
pub fn is_internally_orthogonal_with(
    f: &NatTransf,
    zx: &Exponential,
    zw: &Exponential,
) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let site = f.source().site();
    // Different cardinalities settle it without building the map.
    for c in site.objects() {
        let (a, b) = (zx.object().size(c), zw.object().size(c));
        if a != b {
            return Ok(OrthogonalityVerdict::fail(
                OrthogonalityKind::Internal,
                OrthogonalityWitness::ExponentialNotBijective {
                    object: site.object_name(c).to_string(),
                    source_size: a,
                    target_size: b,
                },
            ));
        }
    }
    let zf = zx.precompose(f, zw)?;
    for c in site.objects() {
        let mut seen = vec![false; zw.object().size(c)];
        if zf.component(c).iter().any(|&v| std::mem::replace(&mut seen[v as usize], true)) {
            return Ok(OrthogonalityVerdict::fail(
                OrthogonalityKind::Internal,
                OrthogonalityWitness::ExponentialNotBijective {
                    object: site.object_name(c).to_string(),
                    source_size: zx.object().size(c),
                    target_size: zw.object().size(c),
                },
            ));
        }
    }
    Ok(OrthogonalityVerdict::pass(OrthogonalityKind::Internal))
}

/// Internal orthogonality to `Ω`, decided on subobject lattices instead
/// of by building `Ω^X`.
///
/// `Ω^X(c)` is `Sub(y(c) × X)` and `Ω^f` at `c` is pullback along
/// `g = y(c) × f`. Pullback along `g` is injective iff `g` is epi, and
/// surjective iff every principal subobject `S` of the source satisfies
/// `g⁻¹(g(S)) = S`.
pub fn is_internally_orthogonal_to_omega(f: &NatTransf) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let (w, x) = (f.source(), f.target());
    let site = w.site();
    for c in site.objects() {
        let yc = yoneda(site, c);
        let q = product(&yc, w)?;
        let p = product(&yc, x)?;
        // (h, v) ↦ (h, f(v))
        let g: Vec<Vec<u32>> = site
            .objects()
            .map(|d| {
                (0..q.size(d) as u32)
                    .map(|i| {
                        let (h, v) = (i / w.size(d) as u32, i % w.size(d) as u32);
                        h * x.size(d) as u32 + f.apply(d, v)
                    })
                    .collect()
            })
            .collect();
        let fail = |reason: String| {
            Ok(OrthogonalityVerdict::fail(
                OrthogonalityKind::Internal,
                OrthogonalityWitness::SubobjectPullbackNotBijective { object: site.object_name(c).to_string(), reason },
            ))
        };
        for d in site.objects() {
            let mut hit = vec![false; p.size(d)];
            for &v in &g[d.index()] {
                hit[v as usize] = true;
            }
            if let Some(i) = hit.iter().position(|&b| !b) {
                return fail(format!("y(c) × f misses {} at {}", p.element_name(d, i as u32), site.object_name(d)));
            }
        }
        for d in site.objects() {
            for i in 0..q.size(d) as u32 {
                let s = Subobject::generated_by(&q, &[(d, i)]);
                let image = Subobject::generated_by(&p, &[(d, g[d.index()][i as usize])]);
                let saturated = site.objects().all(|k| {
                    g[k.index()].iter().enumerate().all(|(j, &v)| s.contains(k, j as u32) || !image.contains(k, v))
                });
                if !saturated {
                    return fail(format!("the subobject generated by {} is not a pullback", q.element_name(d, i)));
                }
            }
        }
    }
    Ok(OrthogonalityVerdict::pass(OrthogonalityKind::Internal))
}

/// The sieve `{ h : X(h)(x) ∈ U }` on `c`: the pullback of `U ↪ X` along
/// the map `y(c) → X` picking `x ∈ X(c)`.
pub fn pulled_back_sieve(u: &Subobject, c: ObjId, x: u32) -> Sieve {
    let amb = u.ambient();
    let site = amb.site();
    let members = site
        .arrows_into(c)
        .iter()
        .filter(|&&h| u.contains(site.dom(h), amb.act(h, x)))
        .fold(0u64, |m, h| m | h.bit());
    Sieve::new(c, members)
}

/// Every pullback of `u` along a map out of a representable is orthogonal
/// to `Z`.
pub fn is_stably_orthogonal(u: &Subobject, z: &Presheaf) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let x = u.ambient();
    let site = x.site();
    if !same_site(site, z.site()) {
        return Err(PresheafError::SiteMismatch.into());
    }
    let mut memo: HashMap<Sieve, SieveComparison> = HashMap::new();
    for c in site.objects() {
        for i in 0..x.size(c) as u32 {
            let r = pulled_back_sieve(u, c, i);
            if r.is_maximal(site) {
                continue;
            }
            let cmp = match memo.get(&r) {
                Some(cmp) => cmp.clone(),
                None => {
                    let cmp = compare_sieve(site, r, z)?;
                    memo.insert(r, cmp.clone());
                    cmp
                }
            };
            if !cmp.bijective() {
                return Ok(OrthogonalityVerdict::fail(
                    OrthogonalityKind::Stable,
                    OrthogonalityWitness::Pullback {
                        object: site.object_name(c).to_string(),
                        element: x.element_name(c, i).to_string(),
                        sieve: show_sieve(site, r),
                        comparison: cmp,
                    },
                ));
            }
        }
    }
    Ok(OrthogonalityVerdict::pass(OrthogonalityKind::Stable))
}

/// Stable orthogonality of a monic map, via its image.
pub fn is_stably_orthogonal_map(f: &NatTransf, z: &Presheaf) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let u = Subobject::image_of(f).map_err(|_| EnvelopeError::NotMonic)?;
    is_stably_orthogonal(&u, z)
}

/// Stable orthogonality checked on pullbacks along every map `Y → X` for
/// each `Y` in `probes`.
pub fn stable_orthogonality_brute_force(
    u: &Subobject,
    z: &Presheaf,
    probes: &[Presheaf],
) -> Result<OrthogonalityVerdict, EnvelopeError> {
    let x = u.ambient();
    for y in probes {
        for g in nat_flats(y, x)? {
            let g = NatTransf::new(y, x, unflat(y, &g))?;
            let pb = pullback_subobject(u, &g)?;
            if pb.is_full() {
                continue;
            }
            let (_, incl) = pb.as_presheaf();
            if !is_orthogonal(&incl, z)?.holds {
                let hom_sizes = (crate::presheaf::count_nat(y, z)?, crate::presheaf::count_nat(incl.source(), z)?);
                return Ok(OrthogonalityVerdict::fail(
                    OrthogonalityKind::Stable,
                    OrthogonalityWitness::PullbackAlongMap { source: y.name().to_string(), map: g.flat(), hom_sizes },
                ));
            }
        }
    }
    Ok(OrthogonalityVerdict::pass(OrthogonalityKind::Stable))
}

fn unflat(x: &Presheaf, flat: &[u32]) -> Vec<Vec<u32>> {
    x.site().objects().map(|c| flat[x.offset(c)..x.offset(c) + x.size(c)].to_vec()).collect()
}

fn family_site(family: &[Presheaf]) -> Result<&Site, EnvelopeError> {
    let site = family.first().ok_or(EnvelopeError::EmptyFamily)?.site();
    if family.iter().any(|z| !same_site(site, z.site())) {
        return Err(PresheafError::SiteMismatch.into());
    }
    Ok(site)
}

/// Builds the topology whose covers on `c` are the sieves all of whose
/// pullbacks satisfy `good` (indexed by global sieve number).
fn topology_from_stable_predicate(site: &Site, good: &[bool]) -> Result<Topology, EnvelopeError> {
    let t = site.sieves();
    let mut bits = FixedBitSet::with_capacity(t.total());
    for c in site.objects() {
        for local in 0..t.on(c).len() as u32 {
            if site.arrows_into(c).iter().all(|&f| good[t.global(site.dom(f), t.pull_local(f, local))]) {
                bits.insert(t.global(c, local));
            }
        }
    }
    check_axioms(site, &bits).map_err(|e| EnvelopeError::AxiomViolation(e.to_string()))?;
    Ok(Topology::from_bits(site, bits))
}

/// The least subtopos containing every member of `family`.
pub fn envelope_topology(family: &[Presheaf]) -> Result<Topology, EnvelopeError> {
    let site = family_site(family)?;
    let t = site.sieves();
    let good = (0..t.total())
        .into_par_iter()
        .map(|g| {
            let r = t.sieve(g);
            if r.is_maximal(site) {
                return Ok(true);
            }
            for z in family {
                if !compare_sieve(site, r, z)?.bijective() {
                    return Ok(false);
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<bool>, TopologyError>>()?;
    topology_from_stable_predicate(site, &good)
}

pub fn envelope_of(z: &Presheaf) -> Result<Topology, EnvelopeError> {
    envelope_topology(std::slice::from_ref(z))
}

/// Envelope recomputed from the enumerated lattice: the join of every
/// topology for which each member is a sheaf. Fails with
/// [`EnvelopeError::OracleMismatch`] if it differs from
/// [`envelope_topology`].
pub fn oracle_envelope(family: &[Presheaf]) -> Result<Topology, EnvelopeError> {
    let site = family_site(family)?;
    oracle_envelope_from(&enumerate_topologies(site)?, family)
}

/// As [`oracle_envelope`], against an already enumerated lattice.
pub fn oracle_envelope_from(lattice: &[Topology], family: &[Presheaf]) -> Result<Topology, EnvelopeError> {
    let site = family_site(family)?;
    let mut keep = Vec::new();
    for j in lattice.iter().cloned() {
        let mut ok = true;
        for z in family {
            if !is_sheaf(z, &j)?.holds {
                ok = false;
                break;
            }
        }
        if ok {
            keep.push(j);
        }
    }
    let joined = join_all(site, &keep)?;
    for z in family {
        if !is_sheaf(z, &joined)?.holds {
            return Err(EnvelopeError::OracleMismatch {
                fast: "(not computed)".to_string(),
                oracle: format!("{joined} (member {} is not a sheaf for it)", z.name()),
            });
        }
    }
    let fast = envelope_topology(family)?;
    if fast != joined {
        return Err(EnvelopeError::OracleMismatch { fast: fast.to_string(), oracle: joined.to_string() });
    }
    Ok(joined)
}

/// Covers are the sieves all of whose pullbacks `f*R` are connected.
pub fn connectivity_covering_criterion(site: &Site) -> Result<Topology, EnvelopeError> {
    let report = check_precohesive(site);
    if !report.verdict {
        return Err(EnvelopeError::NotPrecohesive(report.summary()));
    }
    let t = site.sieves();
    let good: Vec<bool> = (0..t.total())
        .map(|g| {
            let (p, _) = t.sieve(g).as_subobject(site).as_presheaf();
            pi0(&p).count == 1
        })
        .collect();
    topology_from_stable_predicate(site, &good)
}
