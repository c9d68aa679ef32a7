use std::path::{Path, PathBuf};
use std::sync::Arc;

use topos_envelope::catalog;
use topos_envelope::sitefile::{SiteFile, SiteFileError};
use topos_envelope::Site;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// The toml code blocks of the format document, in order.
fn doc_blocks() -> Vec<String> {
    let text = std::fs::read_to_string(repo().join("docs/FORMAT.md")).unwrap();
    let mut blocks = Vec::new();
    let mut current: Option<String> = None;
    for line in text.lines() {
        match (&mut current, line.trim_start()) {
            (None, "```toml") => current = Some(String::new()),
            (Some(_), "```") => blocks.push(current.take().unwrap()),
            (Some(b), _) => {
                b.push_str(line);
                b.push('\n');
            }
            _ => {}
        }
    }
    blocks
}

#[test]
fn format_examples_parse_cumulatively() {
    let blocks = doc_blocks();
    assert!(blocks.len() >= 3);
    let mut text = String::new();
    for b in &blocks {
        text.push_str(b);
        SiteFile::parse(&text).unwrap().load().unwrap();
    }
    let loaded = SiteFile::parse(&text).unwrap().load().unwrap();
    assert_eq!(*loaded.site, catalog::delta1());
    let x = catalog::parallel_edges(&loaded.site);
    assert_eq!(loaded.presheaf("X").unwrap().describe(), x.describe());
    assert_eq!(loaded.subobject("u").unwrap().selection(), catalog::edge_subobject(&x, "e1").selection());
}

#[test]
fn shipped_sites() {
    let load = |f: &str| SiteFile::read(&repo().join("sites").join(f)).and_then(|s| s.load());
    assert_eq!(*load("delta1.toml").unwrap().site, catalog::delta1());
    let pe = load("parallel_edges.toml").unwrap();
    let site: Site = Arc::new(catalog::delta1());
    assert_eq!(pe.presheaf("X").unwrap().describe(), catalog::parallel_edges(&site).describe());
    assert!(matches!(load("broken.toml"), Err(SiteFileError::Category(_))));
}

#[test]
fn catalog_presheaves_round_trip() {
    for site in catalog::catalog_sites() {
        let xs = topos_envelope::generate::catalog_presheaves(&site);
        let file = xs.iter().fold(SiteFile::from_category(&site), |f, x| f.with_presheaf(x));
        let loaded = SiteFile::parse(&file.to_toml()).unwrap().load().unwrap();
        assert_eq!(*loaded.site, *site);
        for x in &xs {
            assert_eq!(loaded.presheaf(x.name()).unwrap().describe(), x.describe(), "{}", x.name());
        }
    }
}
