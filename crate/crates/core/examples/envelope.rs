//! Envelopes (least subtoposes containing an object) of standard objects,
//! checked against the lattice oracle.

use topos_envelope::catalog;
use topos_envelope::cohesion::{p_upperstar, CohesiveStructure};
use topos_envelope::envelope::{envelope_of, envelope_topology, oracle_envelope};
use topos_envelope::presheaf::{initial, subobject_classifier, terminal};

fn main() {
    for site in catalog::catalog_sites() {
        println!("{}", site.name());
        let s = CohesiveStructure::new(&site).unwrap();
        let objects = [
            initial(&site),
            terminal(&site),
            subobject_classifier(&site),
            p_upperstar(&site, 2),
            s.p_uppershriek(2),
        ];
        for z in &objects {
            let j = envelope_of(z).unwrap();
            let oracle = oracle_envelope(std::slice::from_ref(z)).unwrap();
            assert_eq!(j, oracle);
            let kind = if j.is_trivial() {
                "whole topos"
            } else if j.is_degenerate() {
                "degenerate"
            } else {
                "proper"
            };
            println!("  envelope({}) : {kind}, {} covering sieves", z.name(), j.cover_count());
        }
        let both = envelope_topology(&objects[3..]).unwrap();
        println!("  envelope(p*2, p^!2) = envelope(p*2): {}", both == envelope_of(&objects[3]).unwrap());
    }
}
