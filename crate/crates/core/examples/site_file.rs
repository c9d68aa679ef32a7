//! Defining a site in code, writing it as a site file, and reading it back
//! together with a presheaf.

use std::sync::Arc;

use topos_envelope::envelope::envelope_of;
use topos_envelope::fincat::CategoryBuilder;
use topos_envelope::presheaf::{constant, initial};
use topos_envelope::sitefile::SiteFile;
use topos_envelope::Site;

fn main() {
    // An arrow category: two objects and one map between them.
    let arrow = CategoryBuilder::new("arrow").object("A").object("B").morphism("f", "A", "B").build().unwrap();
    let site: Site = Arc::new(arrow);

    let text = SiteFile::from_category(&site).with_presheaf(&constant(&site, 2)).to_toml();
    println!("{text}");

    let loaded = SiteFile::parse(&text).unwrap().load().unwrap();
    assert_eq!(*loaded.site, *site);
    let two = loaded.presheaf("const2").unwrap();
    println!("envelope(const2) = {}", envelope_of(two).unwrap());
    println!("envelope(0)      = {}", envelope_of(&initial(&loaded.site)).unwrap());
}
