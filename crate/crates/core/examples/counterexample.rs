//! Two parallel edges: the one-edge subgraph is invisible to components and
//! to points, yet it is not dense for the envelope of the discrete
//! two-element graph.

use topos_envelope::verify::reproduce_counterexample;

fn main() {
    let report = reproduce_counterexample();
    print!("{report}");
    std::process::exit(if report.verdict { 0 } else { 1 });
}
