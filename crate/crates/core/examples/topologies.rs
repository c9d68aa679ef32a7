//! Enumerating every Grothendieck topology on the catalog sites, with the
//! double-negation topology and lattice operations.

use topos_envelope::catalog;
use topos_envelope::sieve::{double_negation, enumerate_topologies, join_topologies, meet_topologies};

fn main() {
    for site in catalog::catalog_sites() {
        let all = enumerate_topologies(&site).expect("within the enumeration budget");
        let sieves: Vec<usize> = site.objects().map(|c| site.sieves().on(c).len()).collect();
        println!("{}: sieves per object {:?}, {} topologies", site.name(), sieves, all.len());
        let nn = double_negation(&site);
        for (i, j) in all.iter().enumerate() {
            let tag = if *j == nn { "  (double negation)" } else { "" };
            println!("  J{i}: {} covering sieves{tag}", j.cover_count());
        }
        let top = all.iter().fold(all[0].clone(), |acc, j| join_topologies(&acc, j).unwrap());
        let bottom = all.iter().fold(top.clone(), |acc, j| meet_topologies(&acc, j).unwrap());
        println!("  join of all is degenerate: {}, meet of all is trivial: {}", top.is_degenerate(), bottom.is_trivial());
    }
}
