use crate::ontology::{TermId, TermIdx};

use super::{AncestorRule, IcMeasure, Result, Semsim, SemsimError, TermMeasure};

impl Semsim<'_> {
    fn ic_of(&self, t: TermIdx) -> Result<f64> {
        self.ic
            .get(t)
            .ok_or_else(|| SemsimError::UnknownIC(self.graph.term(t).id.clone()))
    }

    fn check_namespace(&self, a: TermIdx, b: TermIdx) -> Result<()> {
        let (ta, tb) = (self.graph.term(a), self.graph.term(b));
        if ta.namespace != tb.namespace {
            return Err(SemsimError::NamespaceMismatch(ta.id.clone(), tb.id.clone()));
        }
        Ok(())
    }

    fn informative_common(&self, a: TermIdx, b: TermIdx) -> Result<Vec<TermIdx>> {
        self.check_namespace(a, b)?;
        let common: Vec<TermIdx> = self
            .graph
            .common_ancestor_indices(a, b)
            .into_iter()
            .filter(|t| self.ic.contains(*t))
            .collect();
        if common.is_empty() {
            return Err(SemsimError::NoInformativeAncestor(
                self.graph.term(a).id.clone(),
                self.graph.term(b).id.clone(),
            ));
        }
        Ok(common)
    }

    /// Most informative common ancestor; ties go to the smallest term id.
    pub fn mica(&self, a: TermIdx, b: TermIdx) -> Result<TermIdx> {
        let common = self.informative_common(a, b)?;
        let mut best = common[0];
        let mut best_ic = self.ic_of(best)?;
        for &t in &common[1..] {
            let v = self.ic_of(t)?;
            if v > best_ic {
                best = t;
                best_ic = v;
            }
        }
        Ok(best)
    }

    /// Disjoint common ancestors: the common ancestors that are not a strict
    /// ancestor of another common ancestor. Sorted by term id.
    pub fn dca(&self, a: TermIdx, b: TermIdx) -> Result<Vec<TermIdx>> {
        let common = self.informative_common(a, b)?;
        Ok(common
            .iter()
            .copied()
            .filter(|&c| {
                !common
                    .iter()
                    .any(|&d| d != c && self.graph.is_ancestor(c, d))
            })
            .collect())
    }

    /// IC of the shared ancestor under `rule`.
    pub fn shared_ic(&self, a: TermIdx, b: TermIdx, rule: AncestorRule) -> Result<f64> {
        match rule {
            AncestorRule::Mica => self.ic_of(self.mica(a, b)?),
            AncestorRule::Grasm => {
                let set = self.dca(a, b)?;
                let mut sum = 0.0;
                for t in &set {
                    sum += self.ic_of(*t)?;
                }
                Ok(sum / set.len() as f64)
            }
        }
    }

    pub fn term_sim(&self, m: TermMeasure, a: TermIdx, b: TermIdx) -> Result<f64> {
        let ic_a = self.ic_of(a)?;
        let ic_b = self.ic_of(b)?;
        let value = match m.measure {
            IcMeasure::Resnik => {
                let shared = self.shared_ic(a, b, m.rule)?;
                let max = self.ic.max_ic();
                if max > 0.0 {
                    shared / max
                } else {
                    0.0
                }
            }
            IcMeasure::Lin => self.lin(a, b, ic_a, ic_b, m.rule)?,
            IcMeasure::JiangConrath => {
                let shared = self.shared_ic(a, b, m.rule)?;
                let distance = (ic_a + ic_b - 2.0 * shared).max(0.0);
                1.0 / (1.0 + distance)
            }
            IcMeasure::Relevance => self.relevance_with(a, b, ic_a, ic_b)?,
        };
        Ok(value.clamp(0.0, 1.0))
    }

    fn lin(&self, a: TermIdx, b: TermIdx, ic_a: f64, ic_b: f64, rule: AncestorRule) -> Result<f64> {
        if a == b {
            return Ok(1.0);
        }
        let shared = self.shared_ic(a, b, rule)?;
        let denom = ic_a + ic_b;
        if denom == 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * shared / denom)
    }

    fn relevance_with(&self, a: TermIdx, b: TermIdx, ic_a: f64, ic_b: f64) -> Result<f64> {
        let lin = self.lin(a, b, ic_a, ic_b, AncestorRule::Mica)?;
        let p_mica = (-self.ic_of(self.mica(a, b)?)?).exp();
        Ok(lin * (1.0 - p_mica))
    }

    /// Lin similarity scaled by the improbability of the MICA.
    pub fn relevance(&self, a: TermIdx, b: TermIdx) -> Result<f64> {
        self.term_sim(
            TermMeasure {
                measure: IcMeasure::Relevance,
                rule: AncestorRule::Mica,
            },
            a,
            b,
        )
    }

    fn resolve(&self, id: &TermId) -> Result<TermIdx> {
        self.graph
            .lookup(id)
            .ok_or_else(|| SemsimError::UnknownIC(id.clone()))
    }

    pub fn mica_by_id(&self, a: &TermId, b: &TermId) -> Result<TermId> {
        let t = self.mica(self.resolve(a)?, self.resolve(b)?)?;
        Ok(self.graph.term(t).id.clone())
    }

    pub fn dca_by_id(&self, a: &TermId, b: &TermId) -> Result<Vec<TermId>> {
        Ok(self
            .dca(self.resolve(a)?, self.resolve(b)?)?
            .into_iter()
            .map(|t| self.graph.term(t).id.clone())
            .collect())
    }

    pub fn term_sim_by_id(&self, m: TermMeasure, a: &TermId, b: &TermId) -> Result<f64> {
        self.term_sim(m, self.resolve(a)?, self.resolve(b)?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use crate::annotations::{AnnotationCorpus, GeneProductId, ICTable};
    use crate::ontology::{parse_obo, OntologyGraph, TermId};

    const A: &str = "GO:0000001";
    const B: &str = "GO:0000002";
    const C: &str = "GO:0000003";
    const D: &str = "GO:0000004";
    const E: &str = "GO:0000005";
    const X: &str = "GO:0000006";

    fn tid(s: &str) -> TermId {
        TermId::new(s).unwrap()
    }

    /// A at the top, B and C below it, D and E below both B and C, X below B.
    fn diamond() -> OntologyGraph {
        let mut text = String::new();
        for (id, parents) in [
            (A, vec![]),
            (B, vec![A]),
            (C, vec![A]),
            (D, vec![B, C]),
            (E, vec![B, C]),
            (X, vec![B]),
        ] {
            text += &format!("[Term]\nid: {id}\nnamespace: biological_process\n");
            for p in parents {
                text += &format!("is_a: {p}\n");
            }
            text += "\n";
        }
        parse_obo(text.as_bytes()).unwrap()
    }

    fn fixture_ic(g: &OntologyGraph) -> ICTable {
        let ix = |s: &str| g.lookup(&tid(s)).unwrap();
        ICTable::from_values(
            Namespace::BiologicalProcess,
            [
                (ix(A), 0.0),
                (ix(B), 1.2),
                (ix(C), 0.9),
                (ix(D), 2.5),
                (ix(E), 2.0),
                (ix(X), 1.7),
            ],
        )
    }

    fn corpus(g: &OntologyGraph) -> AnnotationCorpus {
        AnnotationCorpus::from_direct(
            Namespace::BiologicalProcess,
            g,
            [(
                GeneProductId {
                    accession: "P".into(),
                    organism: String::new(),
                },
                vec![tid(D)],
            )],
        )
        .unwrap()
    }

    fn tm(measure: IcMeasure, rule: AncestorRule) -> TermMeasure {
        TermMeasure { measure, rule }
    }

    #[test]
    fn mica_cases() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        assert_eq!(s.mica_by_id(&tid(B), &tid(B)).unwrap(), tid(B));
        assert_eq!(s.mica_by_id(&tid(D), &tid(D)).unwrap(), tid(D));
        assert_eq!(s.mica_by_id(&tid(B), &tid(C)).unwrap(), tid(A));
        // D and E share A, B, C; B carries the larger IC
        assert_eq!(s.mica_by_id(&tid(D), &tid(E)).unwrap(), tid(B));
    }

    #[test]
    fn mica_ties_go_to_smallest_id() {
        let g = diamond();
        let ix = |s: &str| g.lookup(&tid(s)).unwrap();
        let ic = ICTable::from_values(
            Namespace::BiologicalProcess,
            [(ix(A), 0.0), (ix(B), 1.0), (ix(C), 1.0), (ix(D), 2.0), (ix(E), 2.0)],
        );
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        assert_eq!(s.mica_by_id(&tid(D), &tid(E)).unwrap(), tid(B));
    }

    #[test]
    fn missing_ic_everywhere_is_no_informative_ancestor() {
        let g = diamond();
        let ix = |s: &str| g.lookup(&tid(s)).unwrap();
        let ic = ICTable::from_values(Namespace::BiologicalProcess, [(ix(B), 1.0), (ix(C), 1.0)]);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        assert!(matches!(
            s.mica_by_id(&tid(B), &tid(C)),
            Err(SemsimError::NoInformativeAncestor(..))
        ));
    }

    #[test]
    fn dca_cases() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        assert_eq!(s.dca_by_id(&tid(D), &tid(D)).unwrap(), vec![tid(D)]);
        assert_eq!(s.dca_by_id(&tid(D), &tid(E)).unwrap(), vec![tid(B), tid(C)]);
        // X and D share the chain {B, A}
        assert_eq!(s.dca_by_id(&tid(X), &tid(D)).unwrap(), vec![tid(B)]);
    }

    #[test]
    fn identity_values() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        for t in [A, B, C, D, E, X] {
            for rule in [AncestorRule::Mica, AncestorRule::Grasm] {
                assert_eq!(s.term_sim_by_id(tm(IcMeasure::Lin, rule), &tid(t), &tid(t)).unwrap(), 1.0);
                assert_eq!(
                    s.term_sim_by_id(tm(IcMeasure::JiangConrath, rule), &tid(t), &tid(t)).unwrap(),
                    1.0
                );
            }
        }
        let resnik_d = s
            .term_sim_by_id(tm(IcMeasure::Resnik, AncestorRule::Mica), &tid(D), &tid(D))
            .unwrap();
        assert_eq!(resnik_d, 2.5 / 2.5);
        let resnik_b = s
            .term_sim_by_id(tm(IcMeasure::Resnik, AncestorRule::Mica), &tid(B), &tid(B))
            .unwrap();
        assert_eq!(resnik_b, 1.2 / 2.5);
    }

    #[test]
    fn resnik_through_root_is_zero() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        let v = s
            .term_sim_by_id(tm(IcMeasure::Resnik, AncestorRule::Mica), &tid(B), &tid(C))
            .unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn lin_with_root_is_zero() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        for t in [B, C, D, E, X] {
            let v = s
                .term_sim_by_id(tm(IcMeasure::Lin, AncestorRule::Mica), &tid(A), &tid(t))
                .unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn lin_jc_grasm_on_diamond() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        let lin = s
            .term_sim_by_id(tm(IcMeasure::Lin, AncestorRule::Mica), &tid(D), &tid(E))
            .unwrap();
        assert!((lin - 2.0 * 1.2 / 4.5).abs() < 1e-12);
        let lin_g = s
            .term_sim_by_id(tm(IcMeasure::Lin, AncestorRule::Grasm), &tid(D), &tid(E))
            .unwrap();
        assert!((lin_g - 2.0 * 1.05 / 4.5).abs() < 1e-12);
        let jc = s
            .term_sim_by_id(tm(IcMeasure::JiangConrath, AncestorRule::Mica), &tid(D), &tid(E))
            .unwrap();
        assert!((jc - 1.0 / (1.0 + 4.5 - 2.4)).abs() < 1e-12);
        let jc_g = s
            .term_sim_by_id(tm(IcMeasure::JiangConrath, AncestorRule::Grasm), &tid(D), &tid(E))
            .unwrap();
        assert!((jc_g - 1.0 / (1.0 + 4.5 - 2.1)).abs() < 1e-12);
        // singleton DCA: GraSM equals MICA exactly
        for m in [IcMeasure::Resnik, IcMeasure::Lin, IcMeasure::JiangConrath] {
            let plain = s.term_sim_by_id(tm(m, AncestorRule::Mica), &tid(X), &tid(D)).unwrap();
            let grasm = s.term_sim_by_id(tm(m, AncestorRule::Grasm), &tid(X), &tid(D)).unwrap();
            assert_eq!(plain, grasm);
        }
    }

    #[test]
    fn relevance_cases() {
        let g = diamond();
        let ic = fixture_ic(&g);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        let ix = |t: &str| g.lookup(&tid(t)).unwrap();
        assert_eq!(s.relevance(ix(A), ix(A)).unwrap(), 0.0);
        let rb = s.relevance(ix(B), ix(B)).unwrap();
        assert_eq!(rb, 1.0 - (-1.2f64).exp());
        assert!((rb - 0.6988).abs() < 1e-4);
        let rd = s.relevance(ix(D), ix(D)).unwrap();
        assert_eq!(rd, 1.0 - (-2.5f64).exp());
    }

    #[test]
    fn unknown_ic_for_term_measure() {
        let g = diamond();
        let ix = |s: &str| g.lookup(&tid(s)).unwrap();
        let ic = ICTable::from_values(Namespace::BiologicalProcess, [(ix(A), 0.0), (ix(B), 1.0)]);
        let c = corpus(&g);
        let s = Semsim::new(&g, &c, &ic).unwrap();
        assert!(matches!(
            s.term_sim_by_id(tm(IcMeasure::Lin, AncestorRule::Mica), &tid(B), &tid(C)),
            Err(SemsimError::UnknownIC(_))
        ));
    }
}
