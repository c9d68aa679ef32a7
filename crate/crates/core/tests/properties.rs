//! Randomized structural properties over small presheaves on the catalog sites.

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use topos_envelope::catalog;
use topos_envelope::envelope::{
    envelope_of, envelope_topology, is_internally_orthogonal, is_orthogonal, is_stably_orthogonal,
};
use topos_envelope::generate::{all_subobjects, small_presheaves};
use topos_envelope::cohesion::{p_upperstar, CohesiveStructure};
use topos_envelope::presheaf::{initial, product, terminal, yoneda, Presheaf};
use topos_envelope::sieve::{is_sheaf, meet_topologies, Topology};
use topos_envelope::Site;

struct Corpus {
    site: Site,
    objects: Vec<Presheaf>,
    envelopes: Vec<Topology>,
    /// Targets small enough for explicit exponentials.
    targets: Vec<Presheaf>,
}

fn corpora() -> &'static [Corpus] {
    static C: OnceLock<Vec<Corpus>> = OnceLock::new();
    C.get_or_init(|| {
        catalog::catalog_sites()
            .into_iter()
            .map(|site| {
                let objects = small_presheaves(&site, 5);
                let envelopes = objects.iter().map(|z| envelope_of(z).unwrap()).collect();
                let mut targets = vec![initial(&site), terminal(&site), p_upperstar(&site, 2), p_upperstar(&site, 3)];
                targets.extend(CohesiveStructure::new(&site).ok().map(|s| s.p_uppershriek(2)));
                targets.extend(site.objects().map(|c| yoneda(&site, c)));
                Corpus { site: Arc::clone(&site), objects, envelopes, targets }
            })
            .collect()
    })
}

fn pick() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (0..3usize, any::<usize>(), any::<usize>(), any::<usize>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn stable_implies_internal_implies_plain((s, a, b, k) in pick()) {
        let c = &corpora()[s];
        let x = &c.objects[a % c.objects.len()];
        let z = &c.targets[b % c.targets.len()];
        let subs = all_subobjects(x);
        let u = &subs[k % subs.len()];
        let (_, incl) = u.as_presheaf();
        let stable = is_stably_orthogonal(u, z).unwrap().holds;
        let internal = is_internally_orthogonal(&incl, z).unwrap().holds;
        let plain = is_orthogonal(&incl, z).unwrap().holds;
        prop_assert!(!stable || internal);
        prop_assert!(!internal || plain);
    }

    #[test]
    fn covers_of_envelope_are_stably_orthogonal((s, a, k, _) in pick()) {
        let c = &corpora()[s];
        let i = a % c.objects.len();
        let (z, j) = (&c.objects[i], &c.envelopes[i]);
        let covers: Vec<_> = c.site.objects().flat_map(|o| j.covers(o)).collect();
        let r = covers[k % covers.len()];
        prop_assert!(is_stably_orthogonal(&r.as_subobject(&c.site), z).unwrap().holds);
        prop_assert!(is_sheaf(z, j).unwrap().holds);
    }

    #[test]
    fn family_envelope_is_meet((s, a, b, _) in pick()) {
        let c = &corpora()[s];
        let (i, k) = (a % c.objects.len(), b % c.objects.len());
        let family = [c.objects[i].clone(), c.objects[k].clone()];
        let meet = meet_topologies(&c.envelopes[i], &c.envelopes[k]).unwrap();
        prop_assert_eq!(envelope_topology(&family).unwrap(), meet);
    }

    #[test]
    fn envelope_shrinks_under_products((s, a, b, _) in pick()) {
        let c = &corpora()[s];
        let (i, k) = (a % c.objects.len(), b % c.objects.len());
        let p = product(&c.objects[i], &c.objects[k]).unwrap();
        let j = envelope_of(&p).unwrap();
        let both = meet_topologies(&c.envelopes[i], &c.envelopes[k]).unwrap();
        prop_assert!(both.le(&j));
    }
}
