//! Brute-force semantic similarity over plain string sets.
//!
//! Reads the OBO and GAF text itself and recomputes every ancestor set by
//! explicit traversal, so it shares no code with the library.

use std::collections::{BTreeMap, BTreeSet};

pub type Set = BTreeSet<String>;

pub struct Oracle {
    parents: BTreeMap<String, Vec<String>>,
    pub products: BTreeMap<String, Set>,
    pub ic: BTreeMap<String, f64>,
    pub max_ic: f64,
}

impl Oracle {
    /// `namespace` is the OBO namespace name, `aspect` the GAF column 9 code.
    pub fn new(obo: &str, gaf: &str, namespace: &str, aspect: &str) -> Oracle {
        let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut in_ns = BTreeSet::new();
        for stanza in obo.split("[Term]").skip(1) {
            let mut id = None;
            let mut ps = Vec::new();
            let mut ns = None;
            for line in stanza.lines() {
                let line = line.split(" ! ").next().unwrap().trim();
                if let Some(v) = line.strip_prefix("id: ") {
                    id = Some(v.to_string());
                } else if let Some(v) = line.strip_prefix("is_a: ") {
                    ps.push(v.to_string());
                } else if let Some(v) = line.strip_prefix("relationship: part_of ") {
                    ps.push(v.to_string());
                } else if let Some(v) = line.strip_prefix("namespace: ") {
                    ns = Some(v.to_string());
                }
            }
            let id = id.expect("term id");
            if ns.as_deref() == Some(namespace) {
                in_ns.insert(id.clone());
            }
            parents.insert(id, ps);
        }
        let mut products: BTreeMap<String, Set> = BTreeMap::new();
        for line in gaf.lines() {
            if line.starts_with('!') || line.trim().is_empty() {
                continue;
            }
            let c: Vec<&str> = line.split('\t').collect();
            if c[3].split('|').any(|q| q == "NOT") || c[8] != aspect || !in_ns.contains(c[4]) {
                continue;
            }
            products
                .entry(c[1].to_string())
                .or_default()
                .insert(c[4].to_string());
        }
        let mut o = Oracle {
            parents,
            products,
            ic: BTreeMap::new(),
            max_ic: 0.0,
        };
        let n = o.products.len() as f64;
        for term in o.parents.keys() {
            let count = o
                .products
                .values()
                .filter(|terms| terms.iter().any(|t| o.ancestors(t).contains(term)))
                .count();
            if count > 0 {
                o.ic.insert(term.clone(), -(count as f64 / n).ln());
            }
        }
        o.max_ic = o.ic.values().cloned().fold(0.0, f64::max);
        o
    }

    /// Reflexive ancestors by depth-first traversal.
    pub fn ancestors(&self, t: &str) -> Set {
        let mut seen = Set::new();
        let mut stack = vec![t.to_string()];
        while let Some(x) = stack.pop() {
            if seen.insert(x.clone()) {
                stack.extend(self.parents[&x].iter().cloned());
            }
        }
        seen
    }

    pub fn terms(&self) -> Vec<String> {
        self.parents.keys().cloned().collect()
    }

    pub fn edges(&self) -> Vec<(String, String)> {
        self.parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c.clone(), p.clone())))
            .collect()
    }

    fn ic(&self, t: &str) -> f64 {
        self.ic[t]
    }

    pub fn common(&self, a: &str, b: &str) -> Set {
        self.ancestors(a)
            .intersection(&self.ancestors(b))
            .cloned()
            .collect()
    }

    pub fn mica_ic(&self, a: &str, b: &str) -> f64 {
        self.common(a, b)
            .iter()
            .map(|c| self.ic(c))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Common ancestors that are not a strict ancestor of another common ancestor.
    pub fn dca(&self, a: &str, b: &str) -> Set {
        let common = self.common(a, b);
        common
            .iter()
            .filter(|c| {
                !common
                    .iter()
                    .any(|d| d != *c && self.ancestors(d).contains(*c))
            })
            .cloned()
            .collect()
    }

    pub fn grasm_ic(&self, a: &str, b: &str) -> f64 {
        let d = self.dca(a, b);
        d.iter().map(|c| self.ic(c)).sum::<f64>() / d.len() as f64
    }

    /// Term measure by name: Resnik, Lin, JiangConrath, Relevance, with optional GraSM suffix.
    pub fn term_sim(&self, measure: &str, a: &str, b: &str) -> f64 {
        let grasm = measure.ends_with("GraSM");
        let shared = if grasm {
            self.grasm_ic(a, b)
        } else {
            self.mica_ic(a, b)
        };
        let (ia, ib) = (self.ic(a), self.ic(b));
        let lin = |shared: f64| {
            if a == b {
                1.0
            } else if ia + ib == 0.0 {
                0.0
            } else {
                2.0 * shared / (ia + ib)
            }
        };
        match measure.trim_end_matches("GraSM") {
            "Resnik" => {
                if self.max_ic == 0.0 {
                    0.0
                } else {
                    shared / self.max_ic
                }
            }
            "Lin" => lin(shared),
            "JiangConrath" => 1.0 / (1.0 + (ia + ib - 2.0 * shared).max(0.0)),
            "Relevance" => {
                let m = self.mica_ic(a, b);
                lin(m) * (1.0 - (-m).exp())
            }
            other => panic!("not a term measure: {other}"),
        }
    }

    fn closed(&self, p: &str) -> Set {
        self.products[p]
            .iter()
            .flat_map(|t| self.ancestors(t))
            .filter(|t| self.ic.contains_key(t))
            .collect()
    }

    /// Gene-level similarity for any of the eleven measures.
    pub fn gene_sim(&self, measure: &str, mixer: &str, p: &str, q: &str) -> f64 {
        let value = match measure {
            "WeightedJaccard" | "CzekanowskiDice" | "Cosine" | "Kappa" => {
                self.setwise(measure, &self.closed(p), &self.closed(q))
            }
            _ => {
                let (tp, tq) = (&self.products[p], &self.products[q]);
                let grid: Vec<Vec<f64>> = tp
                    .iter()
                    .map(|a| tq.iter().map(|b| self.term_sim(measure, a, b)).collect())
                    .collect();
                let all: Vec<f64> = grid.iter().flatten().cloned().collect();
                match mixer {
                    "Max" => all.iter().cloned().fold(0.0, f64::max),
                    "Avg" => all.iter().sum::<f64>() / all.len() as f64,
                    "BMA" => {
                        let rows: Vec<f64> =
                            grid.iter().map(|r| r.iter().cloned().fold(0.0, f64::max)).collect();
                        let cols: Vec<f64> = (0..tq.len())
                            .map(|j| grid.iter().map(|r| r[j]).fold(0.0, f64::max))
                            .collect();
                        (rows.iter().sum::<f64>() + cols.iter().sum::<f64>())
                            / (rows.len() + cols.len()) as f64
                    }
                    other => panic!("unknown mixer {other}"),
                }
            }
        };
        value.clamp(0.0, 1.0)
    }

    fn setwise(&self, measure: &str, a: &Set, b: &Set) -> f64 {
        let inter: Set = a.intersection(b).cloned().collect();
        let union: Set = a.union(b).cloned().collect();
        let w = |s: &Set| s.iter().map(|t| self.ic(t)).sum::<f64>();
        let w2 = |s: &Set| s.iter().map(|t| self.ic(t).powi(2)).sum::<f64>();
        match measure {
            "WeightedJaccard" => {
                if w(&union) == 0.0 {
                    (a == b) as u8 as f64
                } else {
                    w(&inter) / w(&union)
                }
            }
            "CzekanowskiDice" => {
                let sym = union.len() - inter.len();
                1.0 - sym as f64 / (union.len() + inter.len()) as f64
            }
            "Cosine" => {
                let (na, nb) = (w2(a), w2(b));
                if na == 0.0 || nb == 0.0 {
                    (a == b) as u8 as f64
                } else {
                    w2(&inter) / (na * nb).sqrt()
                }
            }
            "Kappa" => {
                // 2x2 agreement table over every IC-bearing term
                let n = self.ic.len() as f64;
                let (mut both, mut neither, mut only_a, mut only_b) = (0.0, 0.0, 0.0, 0.0);
                for t in self.ic.keys() {
                    match (a.contains(t), b.contains(t)) {
                        (true, true) => both += 1.0,
                        (false, false) => neither += 1.0,
                        (true, false) => only_a += 1.0,
                        (false, true) => only_b += 1.0,
                    }
                }
                let po = (both + neither) / n;
                let pa = (both + only_a) / n;
                let pb = (both + only_b) / n;
                let pe = pa * pb + (1.0 - pa) * (1.0 - pb);
                if pe >= 1.0 {
                    (a == b) as u8 as f64
                } else {
                    ((po - pe) / (1.0 - pe)).max(0.0)
                }
            }
            other => panic!("not a set-wise measure: {other}"),
        }
    }
}
