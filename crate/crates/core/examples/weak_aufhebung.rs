//! The envelope of the discrete two-element object on each catalog site,
//! checked against all discrete and codiscrete objects up to a size bound.

use topos_envelope::catalog;
use topos_envelope::report::ReportBundle;
use topos_envelope::verify::{sweep_nontrivial_envelope, verify_weak_aufhebung, DEFAULT_MAX_A};

fn main() {
    let sites = catalog::catalog_sites();
    let mut reports: Vec<_> = sites.iter().map(|s| verify_weak_aufhebung(s, DEFAULT_MAX_A).unwrap()).collect();
    reports.push(sweep_nontrivial_envelope(&sites).unwrap());
    let bundle = ReportBundle::new(reports);
    print!("{}", bundle.to_text());
    std::process::exit(if bundle.verdict { 0 } else { 1 });
}
