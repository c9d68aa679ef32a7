//! Building presheaves on the reflexive-graph site and computing with them:
//! representables, products, natural transformations, exponentials,
//! connected components and the subobject classifier.

use std::sync::Arc;

use topos_envelope::catalog;
use topos_envelope::presheaf::{count_nat, exponential, pi0, product, subobject_classifier, yoneda};
use topos_envelope::Site;

fn main() {
    let site: Site = Arc::new(catalog::delta1());
    let (o0, o1) = (site.object("O0").unwrap(), site.object("O1").unwrap());

    let x = catalog::parallel_edges(&site);
    println!("X: nodes {:?}, edges {:?}", x.elements(o0), x.elements(o1));

    let edge = yoneda(&site, o1);
    println!("y(O1): {:?} over (O0, O1)", edge.sizes());
    println!("edges of X = |Nat(y(O1), X)| = {}", count_nat(&edge, &x).unwrap());

    let sq = product(&edge, &edge).unwrap();
    println!("y(O1)×y(O1): sizes {:?}, {} component(s)", sq.sizes(), pi0(&sq).count);

    let omega = subobject_classifier(&site);
    for c in site.objects() {
        println!("Ω({}) = {}", site.object_name(c), omega.elements(c).join(" "));
    }

    let exp = exponential(&omega, &x).unwrap();
    println!("Ω^X: sizes {:?}", exp.object().sizes());
}
