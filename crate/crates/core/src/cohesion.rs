//! The adjoint string `p_! ⊣ p* ⊣ p_* ⊣ p^!` between presheaves on a site
//! and finite sets.
//!
//! `p_!` is connected components, `p*` the constant presheaf, `p_*` global
//! points (evaluation at the terminal object) and `p^!` the codiscrete
//! presheaf of functions from points into a set. Hyperconnectedness is
//! checked through the site-level proxy "every object has a point"; the two
//! consequences used downstream (monic skeleton counit, `p_* p* ≅ id`) are
//! verified separately.

use std::ops::ControlFlow;

use serde::Serialize;
use thiserror::Error;

use crate::envelope::{is_internally_orthogonal_with, EnvelopeError};
use crate::fincat::{MorId, ObjId};
use crate::presheaf::{
    constant, exponential, for_each_nat, pi0, product, terminal, yoneda, Components, NatTransf, Presheaf,
    PresheafError, Site, Subobject,
};
use crate::report::{Report, ReportBuilder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohesionError {
    #[error("site is not pre-cohesive: {0}")]
    NotPrecohesive(String),
    #[error("skeleton counit is not monic at object {object}")]
    SkeletonNotMonic { object: String },
    #[error("global points disagree with evaluation at the terminal object: {0}")]
    GlobalPointsMismatch(String),
    #[error("equivalence broken: {leg} disagrees ({detail})")]
    EquivalenceBroken { leg: String, detail: String },
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrecohesionReport {
    pub site: String,
    /// A terminal object exists.
    pub local: bool,
    /// Every object has a point.
    pub hyperconnected: bool,
    /// Every `y(c) × y(d)` is connected.
    pub pi0_preserves_products: bool,
    /// The terminal presheaf is connected.
    pub connected_unit: bool,
    pub verdict: bool,
    pub terminal: Option<String>,
    pub pointless: Vec<String>,
    pub disconnected_products: Vec<(String, String)>,
}

impl PrecohesionReport {
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: local={} hyperconnected={} pi0_preserves_products={} connected_unit={}",
            self.site, self.local, self.hyperconnected, self.pi0_preserves_products, self.connected_unit
        );
        if !self.pointless.is_empty() {
            out.push_str(&format!("; pointless objects {:?}", self.pointless));
        }
        if let Some((c, d)) = self.disconnected_products.first() {
            out.push_str(&format!("; y({c})×y({d}) disconnected"));
        }
        out
    }
}

pub fn check_precohesive(site: &Site) -> PrecohesionReport {
    let terminal_obj = site.chosen_terminal();
    let local = terminal_obj.is_some();
    let pointless: Vec<String> = match terminal_obj {
        Some(t) => site.objects().filter(|&c| site.hom(t, c).is_empty()).map(|c| site.object_name(c).to_string()).collect(),
        None => site.objects().map(|c| site.object_name(c).to_string()).collect(),
    };
    let hyperconnected = local && pointless.is_empty();
    let mut disconnected_products = Vec::new();
    for c in site.objects() {
        for d in site.objects().filter(|&d| d >= c) {
            let p = product(&yoneda(site, c), &yoneda(site, d)).expect("same site");
            if pi0(&p).count != 1 {
                disconnected_products.push((site.object_name(c).to_string(), site.object_name(d).to_string()));
            }
        }
    }
    let pi0_preserves_products = disconnected_products.is_empty();
    let connected_unit = pi0(&terminal(site)).count == 1;
    PrecohesionReport {
        site: site.name().to_string(),
        local,
        hyperconnected,
        pi0_preserves_products,
        connected_unit,
        verdict: local && hyperconnected && pi0_preserves_products && connected_unit,
        terminal: terminal_obj.map(|t| site.object_name(t).to_string()),
        pointless,
        disconnected_products,
    }
}

/// `|B|^|A|`, the number of functions `A → B`.
pub fn function_count(a: usize, b: usize) -> usize {
    b.pow(a as u32)
}

/// `p_!`: connected components.
pub fn p_shriek(x: &Presheaf) -> Components {
    pi0(x)
}

/// `p*`: the constant presheaf on an `n`-element set.
pub fn p_upperstar(site: &Site, n: usize) -> Presheaf {
    constant(site, n)
}

/// The map `p_! W → p_! X` induced by `f`.
pub fn pi0_map(f: &NatTransf) -> Vec<u32> {
    let (cw, cx) = (pi0(f.source()), pi0(f.target()));
    let mut out = vec![u32::MAX; cw.count];
    for c in f.source().site().objects() {
        for (i, &comp) in cw.of[c.index()].iter().enumerate() {
            out[comp as usize] = cx.of[c.index()][f.apply(c, i as u32) as usize];
        }
    }
    out
}

fn is_bijection(map: &[u32], target_size: usize) -> bool {
    let mut seen = vec![false; target_size];
    map.len() == target_size && map.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
}

/// A pre-cohesive site with its chosen terminal object and point sets.
#[derive(Clone, Debug)]
pub struct CohesiveStructure {
    site: Site,
    terminal: ObjId,
    report: PrecohesionReport,
}

impl CohesiveStructure {
    pub fn new(site: &Site) -> Result<Self, CohesionError> {
        let report = check_precohesive(site);
        if !report.verdict {
            return Err(CohesionError::NotPrecohesive(report.summary()));
        }
        let terminal = site.chosen_terminal().expect("local site");
        Ok(CohesiveStructure { site: site.clone(), terminal, report })
    }

    pub fn site(&self) -> &Site {
        &self.site
    }

    pub fn terminal(&self) -> ObjId {
        self.terminal
    }

    pub fn report(&self) -> &PrecohesionReport {
        &self.report
    }

    /// `hom(terminal, c)`.
    pub fn points(&self, c: ObjId) -> &[MorId] {
        self.site.hom(self.terminal, c)
    }

    /// The unique map `c → terminal`.
    fn bang(&self, c: ObjId) -> MorId {
        self.site.hom(c, self.terminal)[0]
    }

    /// `p_*`: global points of `X`, computed as `Nat(1, X)` and checked to
    /// match `X(terminal)` element for element.
    pub fn p_star_direct(&self, x: &Presheaf) -> Result<Vec<String>, CohesionError> {
        let one = terminal(&self.site);
        let t = self.terminal;
        let mut hit = vec![0usize; x.size(t)];
        let mut total = 0;
        for_each_nat(&one, x, |g| {
            hit[g[x.offset(t)] as usize] += 1;
            total += 1;
            ControlFlow::Continue(())
        })?;
        if let Some(i) = hit.iter().position(|&h| h != 1) {
            return Err(CohesionError::GlobalPointsMismatch(format!(
                "element {} of {}({}) is hit {} times",
                x.element_name(t, i as u32),
                x.name(),
                self.site.object_name(t),
                hit[i]
            )));
        }
        debug_assert_eq!(total, x.size(t));
        Ok(x.elements(t).to_vec())
    }

    /// Is `p_* f = f_terminal` a bijection?
    pub fn p_star_iso(&self, f: &NatTransf) -> bool {
        is_bijection(f.component(self.terminal), f.target().size(self.terminal))
    }

    /// Is `p_! f` a bijection?
    pub fn p_shriek_iso(&self, f: &NatTransf) -> bool {
        is_bijection(&pi0_map(f), pi0(f.target()).count)
    }

    /// `p^!`: at `c`, functions `points(c) → n`, acting by precomposition
    /// with `f ∘ −`.
    pub fn p_uppershriek(&self, n: usize) -> Presheaf {
        let site = &self.site;
        let sep = if n > 10 { "." } else { "" };
        let encode = |c: ObjId, phi: usize| -> Vec<usize> {
            let mut digits = Vec::with_capacity(self.points(c).len());
            let mut rest = phi;
            for _ in self.points(c) {
                digits.push(rest % n.max(1));
                rest /= n.max(1);
            }
            digits
        };
        let elements: Vec<Vec<String>> = site
            .objects()
            .map(|c| {
                (0..function_count(self.points(c).len(), n))
                    .map(|phi| encode(c, phi).iter().map(|d| d.to_string()).collect::<Vec<_>>().join(sep))
                    .collect()
            })
            .collect();
        let action = site
            .morphisms()
            .map(|f| {
                let (d, c) = (site.dom(f), site.cod(f));
                (0..function_count(self.points(c).len(), n))
                    .map(|phi| {
                        let digits = encode(c, phi);
                        let mut out = 0usize;
                        for &q in self.points(d).iter().rev() {
                            let fq = site.compose_unchecked(f, q);
                            let k = self.points(c).iter().position(|&p| p == fq).expect("f∘q is a point");
                            out = out * n + digits[k];
                        }
                        out as u32
                    })
                    .collect()
            })
            .collect();
        Presheaf::from_parts(site, &format!("codisc{n}"), elements, action).expect("codiscrete presheaf")
    }

    /// The image of the counit `p*(p_* X) → X`: at each object, the
    /// restrictions of global points.
    pub fn discrete_skeleton(&self, x: &Presheaf) -> Result<Subobject, CohesionError> {
        let t = self.terminal;
        let mut selected = Vec::with_capacity(self.site.num_objects());
        for c in self.site.objects() {
            let bang = self.bang(c);
            let mut sel = vec![false; x.size(c)];
            for g in 0..x.size(t) as u32 {
                if std::mem::replace(&mut sel[x.act(bang, g) as usize], true) {
                    return Err(CohesionError::SkeletonNotMonic { object: self.site.object_name(c).to_string() });
                }
            }
            selected.push(sel);
        }
        Ok(Subobject::new(x, selected)?)
    }

    /// Checks that internal orthogonality to `p*2`, bijectivity of `p_! f`
    /// and internal orthogonality to `p*A` for every listed size agree.
    pub fn check_lemma_pi0(&self, f: &NatTransf, sizes: &[usize]) -> Result<Report, CohesionError> {
        let mut b = ReportBuilder::new(
            "lemma-pi0",
            self.site.name(),
            "a map is internally orthogonal to the discrete two-element object iff it induces a bijection on connected components, iff it is internally orthogonal to every discrete object",
        );
        let internal = |n: usize| -> Result<bool, CohesionError> {
            let z = p_upperstar(&self.site, n);
            let zx = exponential(&z, f.target())?;
            let zw = exponential(&z, f.source())?;
            Ok(is_internally_orthogonal_with(f, &zx, &zw)?.holds)
        };
        let two = internal(2)?;
        let iso = self.p_shriek_iso(f);
        b.witness("internal orthogonality to p*2", two);
        b.witness("p_! f bijective", format!("{iso} ({:?})", pi0_map(f)));
        let mut all = true;
        for &n in sizes {
            let leg = if n == 2 { two } else { internal(n)? };
            b.witness(format!("internal orthogonality to p*{n}"), leg);
            all &= leg;
        }
        if two != iso {
            return Err(CohesionError::EquivalenceBroken {
                leg: "p_! f bijective".to_string(),
                detail: format!("internal to p*2 is {two}, p_! f bijective is {iso}"),
            });
        }
        if all != two {
            return Err(CohesionError::EquivalenceBroken {
                leg: format!("internal orthogonality to p*A for |A| in {sizes:?}"),
                detail: format!("conjunction is {all}, internal to p*2 is {two}"),
            });
        }
        Ok(b.finish())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::catalog;
    use crate::presheaf::{count_nat, initial, is_isomorphic, subobject_classifier};

    fn delta1() -> Site {
        Arc::new(catalog::delta1())
    }

    #[test]
    fn precohesion_flags() {
        let r = check_precohesive(&delta1());
        assert!(r.local && r.hyperconnected && r.pi0_preserves_products && r.connected_unit && r.verdict);
        assert_eq!(r.terminal.as_deref(), Some("O0"));
        let r = check_precohesive(&Arc::new(catalog::discrete2()));
        assert!(!r.local && !r.verdict);
        let r = check_precohesive(&Arc::new(catalog::pointless()));
        assert!(r.local && !r.hyperconnected && !r.verdict);
        assert_eq!(r.pointless, vec!["Q".to_string()]);
        for site in catalog::catalog_sites() {
            assert!(check_precohesive(&site).verdict, "{}", site.name());
        }
    }

    #[test]
    fn global_points() {
        let site = delta1();
        let s = CohesiveStructure::new(&site).unwrap();
        let x = catalog::parallel_edges(&site);
        assert_eq!(s.p_star_direct(&x).unwrap(), vec!["a", "b"]);
        assert_eq!(s.p_star_direct(&terminal(&site)).unwrap().len(), 1);
        assert!(s.p_star_direct(&initial(&site)).unwrap().is_empty());
        assert!(CohesiveStructure::new(&Arc::new(catalog::pointless())).is_err());
    }

    #[test]
    fn discrete_and_codiscrete() {
        let site = delta1();
        let s = CohesiveStructure::new(&site).unwrap();
        let two = p_upperstar(&site, 2);
        assert_eq!(two.sizes(), vec![2, 2]);
        assert!(is_isomorphic(&p_upperstar(&site, 0), &initial(&site)).unwrap());
        assert!(is_isomorphic(&p_upperstar(&site, 1), &terminal(&site)).unwrap());
        let codisc = s.p_uppershriek(2);
        assert_eq!(codisc.sizes(), vec![2, 4]);
        assert!(is_isomorphic(&s.p_uppershriek(1), &terminal(&site)).unwrap());
    }

    #[test]
    fn skeleta() {
        let site = delta1();
        let s = CohesiveStructure::new(&site).unwrap();
        let x = catalog::parallel_edges(&site);
        let sk = s.discrete_skeleton(&x).unwrap();
        let o1 = site.object("O1").unwrap();
        let names: Vec<&str> = sk.elements(o1).map(|i| x.element_name(o1, i)).collect();
        assert_eq!(names, vec!["la", "lb"]);
        assert_eq!(sk.size(site.object("O0").unwrap()), 2);
        assert!(s.discrete_skeleton(&p_upperstar(&site, 3)).unwrap().is_full());
        let y1 = yoneda(&site, o1);
        assert_eq!(s.discrete_skeleton(&y1).unwrap().total_size(), 4);
    }

    #[test]
    fn lemma_on_examples() {
        let site = delta1();
        let s = CohesiveStructure::new(&site).unwrap();
        let x = catalog::parallel_edges(&site);
        let (_, u) = catalog::edge_subobject(&x, "e1").as_presheaf();
        let r = s.check_lemma_pi0(&u, &[0, 1, 2, 3]).unwrap();
        assert!(r.verdict);
        assert_eq!(r.witness("internal orthogonality to p*2"), Some("true"));

        let two = p_upperstar(&site, 2);
        let one_node = Subobject::generated_by(&two, &[(site.object("O0").unwrap(), 0)]);
        let (_, incl) = one_node.as_presheaf();
        let r = s.check_lemma_pi0(&incl, &[0, 1, 2, 3]).unwrap();
        assert_eq!(r.witness("internal orthogonality to p*2"), Some("false"));
        assert_eq!(r.witness("internal orthogonality to p*3"), Some("false"));

        let id = NatTransf::identity(&x);
        assert_eq!(s.check_lemma_pi0(&id, &[0, 1, 2, 3]).unwrap().witness("internal orthogonality to p*2"), Some("true"));
    }

    fn catalog_objects(s: &CohesiveStructure) -> Vec<Presheaf> {
        let site = s.site();
        let mut xs = vec![initial(site), terminal(site), p_upperstar(site, 2), s.p_uppershriek(2), subobject_classifier(site)];
        xs.extend(site.objects().map(|c| yoneda(site, c)));
        xs
    }

    #[test]
    fn adjunction_cardinalities() {
        for site in [delta1(), Arc::new(catalog::two_point_cone())] {
            let s = CohesiveStructure::new(&site).unwrap();
            for x in catalog_objects(&s) {
                let shriek = p_shriek(&x).count;
                let star = x.size(s.terminal());
                for a in 0..=4 {
                    let disc = p_upperstar(&site, a);
                    assert_eq!(count_nat(&x, &disc).unwrap(), function_count(shriek, a), "(i) {}", x.name());
                    assert_eq!(count_nat(&x, &s.p_uppershriek(a)).unwrap(), function_count(star, a), "(ii) {}", x.name());
                    assert_eq!(count_nat(&disc, &x).unwrap(), function_count(a, star), "(iii) {}", x.name());
                }
            }
        }
    }

    #[test]
    fn discrete_and_codiscrete_are_fully_faithful() {
        let site = delta1();
        let s = CohesiveStructure::new(&site).unwrap();
        for a in 0..=3 {
            for b in 0..=3 {
                let n = function_count(a, b);
                assert_eq!(count_nat(&p_upperstar(&site, a), &p_upperstar(&site, b)).unwrap(), n);
                assert_eq!(count_nat(&s.p_uppershriek(a), &s.p_uppershriek(b)).unwrap(), n);
            }
        }
        for a in 0..=4 {
            let disc = p_upperstar(&site, a);
            assert_eq!(p_shriek(&disc).count, a);
            assert_eq!(s.p_star_direct(&disc).unwrap().len(), a);
        }
    }

    #[test]
    fn pi0_preserves_products_of_catalog_objects() {
        for site in catalog::catalog_sites() {
            let s = CohesiveStructure::new(&site).unwrap();
            let xs = catalog_objects(&s);
            for x in &xs {
                for y in &xs {
                    let p = product(x, y).unwrap();
                    assert_eq!(pi0(&p).count, pi0(x).count * pi0(y).count, "{} × {}", x.name(), y.name());
                }
            }
        }
    }
}
