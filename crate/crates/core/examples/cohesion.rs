//! The adjoint string p_! ⊣ p* ⊣ p_* ⊣ p^! on the reflexive-graph site:
//! pre-cohesion flags, components, points, codiscrete objects, skeleta and
//! the connected-components equivalence.

use std::sync::Arc;

use topos_envelope::catalog;
use topos_envelope::cohesion::{check_precohesive, p_shriek, CohesiveStructure};
use topos_envelope::Site;

fn main() {
    for site in [catalog::delta1(), catalog::discrete2(), catalog::pointless()] {
        println!("{}", check_precohesive(&Arc::new(site)).summary());
    }

    let site: Site = Arc::new(catalog::delta1());
    let s = CohesiveStructure::new(&site).unwrap();
    let x = catalog::parallel_edges(&site);
    println!("p_! X has {} component(s)", p_shriek(&x).count);
    println!("p_* X = {:?}", s.p_star_direct(&x).unwrap());
    println!("p^!2 sizes {:?}", s.p_uppershriek(2).sizes());

    let skeleton = s.discrete_skeleton(&x).unwrap();
    let o1 = site.object("O1").unwrap();
    let kept: Vec<&str> = skeleton.elements(o1).map(|i| x.element_name(o1, i)).collect();
    println!("discrete skeleton keeps edges {kept:?}");

    let (_, u) = catalog::edge_subobject(&x, "e1").as_presheaf();
    print!("{}", s.check_lemma_pi0(&u, &[0, 1, 2, 3]).unwrap());
}
