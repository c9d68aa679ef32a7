//! Built-in sites.

use std::sync::Arc;

use thiserror::Error;

use crate::fincat::{CategoryBuilder, FinCategory};
use crate::presheaf::{Presheaf, Site, Subobject};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogError {
    #[error("truncation level {0} exceeds the morphism budget (at most 2)")]
    BudgetExceeded(usize),
    #[error("unknown built-in site `{0}`")]
    UnknownSite(String),
}

/// The site of reflexive graphs: a node object `O0`, an edge object `O1`,
/// source/target `d0, d1 : O0 → O1`, the loop map `s : O1 → O0`, and the
/// two idempotents `e0 = d0∘s`, `e1 = d1∘s`.
pub fn delta1() -> FinCategory {
    let mut b = CategoryBuilder::new("delta1")
        .object("O0")
        .object("O1")
        .morphism("d0", "O0", "O1")
        .morphism("d1", "O0", "O1")
        .morphism("s", "O1", "O0")
        .morphism("e0", "O1", "O1")
        .morphism("e1", "O1", "O1")
        .compose("s", "d0", "id_O0")
        .compose("s", "d1", "id_O0")
        .compose("d0", "s", "e0")
        .compose("d1", "s", "e1")
        .compose("s", "e0", "s")
        .compose("s", "e1", "s");
    for (i, ei) in ["e0", "e1"].iter().enumerate() {
        let di = ["d0", "d1"][i];
        for dj in ["d0", "d1"] {
            b = b.compose(ei, dj, di);
        }
        for ej in ["e0", "e1"] {
            b = b.compose(ei, ej, ei);
        }
    }
    b.build().expect("delta1 is a category")
}

/// One object, one morphism.
pub fn terminal_category() -> FinCategory {
    CategoryBuilder::new("terminal").object("T").build().expect("terminal category")
}

/// Two objects and only their identities.
pub fn discrete2() -> FinCategory {
    CategoryBuilder::new("discrete2").object("A").object("B").build().expect("discrete category")
}

/// A terminal object `T` and an object `Q` with no point `T → Q`.
pub fn pointless() -> FinCategory {
    CategoryBuilder::new("pointless")
        .object("T")
        .object("Q")
        .morphism("q", "Q", "T")
        .build()
        .expect("pointless site")
}

/// Builds the full subcategory of finite sets (or finite ordinals with
/// monotone maps) spanned by the given carrier sizes.
fn function_category(name: &str, sizes: &[usize], monotone: bool) -> FinCategory {
    let obj = |i: usize| format!("D{i}");
    let maps = |a: usize, b: usize| -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..sizes[a] {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    let lo = if monotone { prefix.last().copied().unwrap_or(0) } else { 0 };
                    (lo..sizes[b]).map(move |v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        out
    };
    let label = |a: usize, b: usize, m: &[usize]| -> String {
        if a == b && m.iter().enumerate().all(|(i, &v)| i == v) {
            format!("id_{}", obj(a))
        } else {
            let img: String = m.iter().map(|v| v.to_string()).collect();
            format!("m{a}{b}_{img}")
        }
    };

    let mut b = CategoryBuilder::new(name);
    for i in 0..sizes.len() {
        b = b.object(&obj(i));
    }
    let mut all = Vec::new();
    for a in 0..sizes.len() {
        for c in 0..sizes.len() {
            for m in maps(a, c) {
                let l = label(a, c, &m);
                if !l.starts_with("id_") {
                    b = b.morphism(&l, &obj(a), &obj(c));
                }
                all.push((a, c, m, l));
            }
        }
    }
    for (a, bb, f, fname) in &all {
        for (b2, c, g, gname) in &all {
            if b2 != bb {
                continue;
            }
            let gf: Vec<usize> = f.iter().map(|&x| g[x]).collect();
            b = b.compose(gname, fname, &label(*a, *c, &gf));
        }
    }
    b.build().expect("function category")
}

/// The full subcategory of the simplex category on `[0], …, [n]`.
pub fn delta_trunc(n: usize) -> Result<FinCategory, CatalogError> {
    if n > 2 {
        return Err(CatalogError::BudgetExceeded(n));
    }
    let sizes: Vec<usize> = (1..=n + 1).collect();
    Ok(function_category(&format!("delta_trunc{n}"), &sizes, true))
}

/// The full subcategory of finite sets on a one-element and a two-element
/// set: a terminal object `D0` and an object `D1` with two points, its two
/// constant endomaps and the swap.
pub fn two_point_cone() -> FinCategory {
    function_category("two_point_cone", &[1, 2], false)
}

/// Sites used by catalog-wide sweeps.
pub fn catalog_sites() -> Vec<Site> {
    vec![
        Arc::new(delta1()),
        Arc::new(delta_trunc(2).expect("within budget")),
        Arc::new(two_point_cone()),
    ]
}

pub const BUILTIN_NAMES: &[&str] =
    &["delta1", "delta_trunc1", "delta_trunc2", "two_point_cone", "terminal", "discrete2", "pointless"];

pub fn builtin(name: &str) -> Result<FinCategory, CatalogError> {
    match name {
        "delta1" => Ok(delta1()),
        "delta_trunc1" => delta_trunc(1),
        "delta_trunc2" => delta_trunc(2),
        "two_point_cone" => Ok(two_point_cone()),
        "terminal" => Ok(terminal_category()),
        "discrete2" => Ok(discrete2()),
        "pointless" => Ok(pointless()),
        other => Err(CatalogError::UnknownSite(other.to_string())),
    }
}

/// The reflexive graph with nodes `a, b`, their loops `la, lb`, and two
/// parallel edges `e1, e2 : a → b`.
pub fn parallel_edges(site: &Site) -> Presheaf {
    parallel_edges_with(site, &["e1", "e2"])
}

fn parallel_edges_with(site: &Site, edges: &[&str]) -> Presheaf {
    let o0 = site.object("O0").expect("reflexive-graph site");
    let o1 = site.object("O1").expect("reflexive-graph site");
    let mut carriers = vec![Vec::new(); site.num_objects()];
    carriers[o0.index()] = vec!["a".to_string(), "b".to_string()];
    let mut edge_names = vec!["la".to_string(), "lb".to_string()];
    edge_names.extend(edges.iter().map(|e| e.to_string()));
    carriers[o1.index()] = edge_names;
    let k = edges.len();
    // source, target per edge
    let mut src = vec![0u32, 1];
    let mut tgt = vec![0u32, 1];
    src.extend(std::iter::repeat_n(0, k));
    tgt.extend(std::iter::repeat_n(1, k));
    let mut actions = Vec::new();
    for f in site.morphisms() {
        let act = match site.morphism_name(f) {
            "id_O0" => vec![0, 1],
            "id_O1" => (0..(2 + k) as u32).collect(),
            "d0" => src.clone(),
            "d1" => tgt.clone(),
            "s" => vec![0, 1],
            // loop at the source (target); loop i sits at index i
            "e0" => src.clone(),
            "e1" => tgt.clone(),
            other => panic!("unexpected morphism {other}"),
        };
        actions.push(act);
    }
    Presheaf::from_parts(site, "X", carriers, actions).expect("parallel edges graph")
}

/// The subgraph of [`parallel_edges`] spanned by one of its edges.
pub fn edge_subobject(x: &Presheaf, edge: &str) -> Subobject {
    let site = x.site();
    let o1 = site.object("O1").expect("reflexive-graph site");
    let e = x.element_index(o1, edge).expect("edge exists");
    Subobject::generated_by(x, &[(o1, e)])
}

/// [`parallel_edges`] with its second edge deleted.
pub fn single_edge(site: &Site) -> Presheaf {
    parallel_edges_with(site, &["e1"])
}
