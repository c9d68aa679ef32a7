//! Plain, internal and stable orthogonality of the one-edge subgraph of the
//! parallel-edges graph against the discrete two-element graph.

use std::sync::Arc;

use topos_envelope::catalog;
use topos_envelope::cohesion::p_upperstar;
use topos_envelope::envelope::{is_internally_orthogonal, is_orthogonal, is_stably_orthogonal};
use topos_envelope::Site;

fn main() {
    let site: Site = Arc::new(catalog::delta1());
    let x = catalog::parallel_edges(&site);
    let u = catalog::edge_subobject(&x, "e1");
    let (_, incl) = u.as_presheaf();
    let two = p_upperstar(&site, 2);

    println!("plain:    {:?}", is_orthogonal(&incl, &two).unwrap());
    println!("internal: {:?}", is_internally_orthogonal(&incl, &two).unwrap());
    let stable = is_stably_orthogonal(&u, &two).unwrap();
    println!("stable:   holds = {}", stable.holds);
    if let Some(w) = stable.witness {
        println!("          witness {w:?}");
    }
}
