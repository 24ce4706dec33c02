use std::collections::BTreeSet;

use crate::ontology::{intersect_sorted, TermIdx};

use super::{MeasureId, MixerId, Result, Semsim, SemsimError, TermMeasure};

/// Gene-pair score with the flags raised while computing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScore {
    pub value: f64,
    /// A negative Kappa was raised to 0.
    pub clamped: bool,
    /// A zero-norm vector forced the equal-sets fallback.
    pub degenerate: bool,
}

impl PairScore {
    fn plain(value: f64) -> Self {
        PairScore {
            value,
            clamped: false,
            degenerate: false,
        }
    }

    fn degenerate(equal: bool) -> Self {
        PairScore {
            value: if equal { 1.0 } else { 0.0 },
            clamped: false,
            degenerate: true,
        }
    }
}

impl Semsim<'_> {
    /// Direct annotations of `accession` that carry an IC value.
    pub fn usable_terms(&self, accession: &str) -> Result<Vec<TermIdx>> {
        let terms: Vec<TermIdx> = self
            .corpus
            .product(accession)
            .map(|(_, terms)| {
                terms
                    .iter()
                    .copied()
                    .filter(|t| self.ic.contains(*t))
                    .collect()
            })
            .unwrap_or_default();
        if terms.is_empty() {
            return Err(SemsimError::NoAnnotations(accession.to_string()));
        }
        Ok(terms)
    }

    /// Sorted union of the IC-bearing ancestor closures of `terms`.
    pub fn closed_set(&self, terms: &[TermIdx]) -> Vec<TermIdx> {
        let mut set = BTreeSet::new();
        for t in terms {
            set.extend(
                self.graph
                    .closure(*t)
                    .iter()
                    .copied()
                    .filter(|a| self.ic.contains(*a)),
            );
        }
        set.into_iter().collect()
    }

    pub fn gene_sim(&self, measure: MeasureId, mixer: MixerId, p1: &str, p2: &str) -> Result<f64> {
        Ok(self.gene_score(measure, mixer, p1, p2)?.value)
    }

    pub fn gene_score(
        &self,
        measure: MeasureId,
        mixer: MixerId,
        p1: &str,
        p2: &str,
    ) -> Result<PairScore> {
        let a = self.usable_terms(p1)?;
        let b = self.usable_terms(p2)?;
        self.score_term_sets(measure, mixer, &a, &b)
    }

    pub(crate) fn score_term_sets(
        &self,
        measure: MeasureId,
        mixer: MixerId,
        a: &[TermIdx],
        b: &[TermIdx],
    ) -> Result<PairScore> {
        match measure.term_measure() {
            Some(tm) => Ok(PairScore::plain(self.mixed(tm, mixer, a, b)?)),
            None => self.setwise(measure, a, b),
        }
    }

    /// Pairwise measure mixed over the |A|×|B| term matrix.
    pub fn gene_sim_pairwise(
        &self,
        measure: MeasureId,
        mixer: MixerId,
        p1: &str,
        p2: &str,
    ) -> Result<f64> {
        let tm = measure
            .term_measure()
            .ok_or(SemsimError::WrongMeasureKind(measure, "pairwise"))?;
        let a = self.usable_terms(p1)?;
        let b = self.usable_terms(p2)?;
        self.mixed(tm, mixer, &a, &b)
    }

    /// Set-based measure on the ancestor-closed annotation sets.
    pub fn gene_sim_setwise(&self, measure: MeasureId, p1: &str, p2: &str) -> Result<f64> {
        if measure.is_pairwise() {
            return Err(SemsimError::WrongMeasureKind(measure, "set-wise"));
        }
        let a = self.usable_terms(p1)?;
        let b = self.usable_terms(p2)?;
        Ok(self.setwise(measure, &a, &b)?.value)
    }

    fn mixed(&self, tm: TermMeasure, mixer: MixerId, a: &[TermIdx], b: &[TermIdx]) -> Result<f64> {
        // Fixed operand order keeps every mixer bit-for-bit symmetric.
        let (rows, cols) = if a <= b { (a, b) } else { (b, a) };
        let mut grid = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                grid.push(self.term_sim(tm, r, c)?);
            }
        }
        let ncols = cols.len();
        let value = match mixer {
            MixerId::Max => grid.iter().copied().fold(0.0, f64::max),
            MixerId::Avg => grid.iter().sum::<f64>() / grid.len() as f64,
            MixerId::BMA => {
                let row_best: f64 = grid
                    .chunks(ncols)
                    .map(|row| row.iter().copied().fold(0.0, f64::max))
                    .sum();
                let col_best: f64 = (0..ncols)
                    .map(|j| {
                        grid.iter()
                            .skip(j)
                            .step_by(ncols)
                            .copied()
                            .fold(0.0, f64::max)
                    })
                    .sum();
                (row_best + col_best) / (rows.len() + cols.len()) as f64
            }
        };
        Ok(value.clamp(0.0, 1.0))
    }

    fn setwise(&self, measure: MeasureId, a: &[TermIdx], b: &[TermIdx]) -> Result<PairScore> {
        let ca = self.closed_set(a);
        let cb = self.closed_set(b);
        let inter = intersect_sorted(&ca, &cb);
        let union_len = ca.len() + cb.len() - inter.len();
        let score = match measure {
            MeasureId::WeightedJaccard => {
                let shared: f64 = inter.iter().map(|t| self.ic_value(*t)).sum();
                let all: f64 = union_sorted(&ca, &cb).iter().map(|t| self.ic_value(*t)).sum();
                if all == 0.0 {
                    PairScore::degenerate(ca == cb)
                } else {
                    PairScore::plain(shared / all)
                }
            }
            MeasureId::CzekanowskiDice => {
                let (sa, sb, n_inter, n_union) = if self.options.dice_on_closure {
                    (&ca[..], &cb[..], inter.len(), union_len)
                } else {
                    let i = intersect_sorted(a, b).len();
                    (a, b, i, a.len() + b.len() - i)
                };
                let sym = sa.len() + sb.len() - 2 * n_inter;
                PairScore::plain(1.0 - sym as f64 / (n_union + n_inter) as f64)
            }
            MeasureId::Cosine => {
                let weight = |t: TermIdx| {
                    if self.options.cosine_binary {
                        1.0
                    } else {
                        self.ic_value(t)
                    }
                };
                let dot: f64 = inter.iter().map(|t| weight(*t).powi(2)).sum();
                let na: f64 = ca.iter().map(|t| weight(*t).powi(2)).sum();
                let nb: f64 = cb.iter().map(|t| weight(*t).powi(2)).sum();
                if na == 0.0 || nb == 0.0 {
                    PairScore::degenerate(ca == cb)
                } else {
                    PairScore::plain(dot / (na * nb).sqrt())
                }
            }
            MeasureId::Kappa => {
                let dims = self.ic.len() as f64;
                let sym = (ca.len() + cb.len() - 2 * inter.len()) as f64;
                let observed = (dims - sym) / dims;
                let pa = ca.len() as f64 / dims;
                let pb = cb.len() as f64 / dims;
                let expected = pa * pb + (1.0 - pa) * (1.0 - pb);
                if expected >= 1.0 {
                    PairScore::degenerate(ca == cb)
                } else {
                    let kappa = (observed - expected) / (1.0 - expected);
                    PairScore {
                        value: kappa.max(0.0),
                        clamped: kappa < 0.0,
                        degenerate: false,
                    }
                }
            }
            other => return Err(SemsimError::WrongMeasureKind(other, "set-wise")),
        };
        Ok(PairScore {
            value: score.value.clamp(0.0, 1.0),
            ..score
        })
    }

    fn ic_value(&self, t: TermIdx) -> f64 {
        self.ic.get(t).unwrap_or(0.0)
    }
}

fn union_sorted(a: &[TermIdx], b: &[TermIdx]) -> Vec<TermIdx> {
    let mut out: Vec<TermIdx> = a.iter().chain(b).copied().collect();
    out.sort_unstable();
    out.dedup();
    out
}
