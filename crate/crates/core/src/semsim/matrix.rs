use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::format_g;
use crate::ontology::{Namespace, TermIdx};

use super::{MeasureId, MixerId, PairScore, Result, Semsim, SemsimError};

#[derive(Debug, Error)]
pub enum MatrixIoError {
    #[error("matrix is not square: {rows} rows for {ids} ids")]
    NotSquare { rows: usize, ids: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(String, String),
    #[error("matrix value {value} at ({row}, {col}) is outside [0, 1]")]
    OutOfRange { row: String, col: String, value: f64 },
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("matrix is empty")]
    Empty,
    #[error("bad matrix value {0:?}")]
    BadValue(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Symmetric gene-by-gene similarity matrix with values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
    measure: Option<MeasureId>,
    mixer: Option<MixerId>,
    namespace: Option<Namespace>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    ids: Vec<String>,
    measure: Option<MeasureId>,
    mixer: Option<MixerId>,
    namespace: Option<Namespace>,
    values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Validated matrix from row-major rows.
    pub fn from_rows(ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, MatrixIoError> {
        let n = ids.len();
        if n == 0 {
            return Err(MatrixIoError::Empty);
        }
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(MatrixIoError::NotSquare {
                rows: rows.len(),
                ids: n,
            });
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(MatrixIoError::DuplicateId(id.clone()));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let v = rows[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return Err(MatrixIoError::OutOfRange {
                        row: ids[i].clone(),
                        col: ids[j].clone(),
                        value: v,
                    });
                }
                if v != rows[j][i] {
                    return Err(MatrixIoError::NotSymmetric(ids[i].clone(), ids[j].clone()));
                }
            }
        }
        Ok(SimilarityMatrix {
            ids,
            values: rows.into_iter().flatten().collect(),
            measure: None,
            mixer: None,
            namespace: None,
        })
    }

    pub fn with_provenance(
        mut self,
        measure: Option<MeasureId>,
        mixer: Option<MixerId>,
        namespace: Option<Namespace>,
    ) -> Self {
        self.measure = measure;
        self.mixer = mixer;
        self.namespace = namespace;
        self
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn measure(&self) -> Option<MeasureId> {
        self.measure
    }

    pub fn mixer(&self) -> Option<MixerId> {
        self.mixer
    }

    pub fn namespace(&self) -> Option<Namespace> {
        self.namespace
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// CSV with a header row and column of ids; values printed as `%.10g`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MatrixIoError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.ids.len() + 1);
            rec.push(id.clone());
            rec.extend(self.row(i).iter().map(|v| format_g(*v, 10)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, MatrixIoError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(input);
        let mut records = r.records();
        let header = match records.next() {
            Some(h) => h?,
            None => return Err(MatrixIoError::Empty),
        };
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::with_capacity(ids.len());
        for (i, rec) in records.enumerate() {
            let rec = rec?;
            if rec.get(0) != ids.get(i).map(String::as_str) {
                return Err(MatrixIoError::NotSquare {
                    rows: i + 1,
                    ids: ids.len(),
                });
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| MatrixIoError::BadValue(s.to_string()))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(ids, rows)
    }

    pub fn to_json(&self) -> String {
        let env = Envelope {
            ids: self.ids.clone(),
            measure: self.measure,
            mixer: self.mixer,
            namespace: self.namespace,
            values: (0..self.len()).map(|i| self.row(i).to_vec()).collect(),
        };
        serde_json::to_string(&env).expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, MatrixIoError> {
        let env: Envelope = serde_json::from_str(text)?;
        Ok(Self::from_rows(env.ids, env.values)?.with_provenance(
            env.measure,
            env.mixer,
            env.namespace,
        ))
    }
}

/// A computed matrix plus the bookkeeping gathered while building it.
#[derive(Debug, Clone)]
pub struct MatrixBuild {
    pub matrix: SimilarityMatrix,
    /// Requested products without usable annotations.
    pub dropped: Vec<String>,
    /// Pairs whose Kappa was clamped to 0.
    pub clamped: Vec<(String, String)>,
    /// Pairs resolved by the zero-norm fallback.
    pub degenerate: Vec<(String, String)>,
}

impl Semsim<'_> {
    /// Score every product pair. Products without usable annotations are
    /// dropped; the diagonal is fixed at 1.
    pub fn build_matrix(
        &self,
        products: &[String],
        measure: MeasureId,
        mixer: MixerId,
    ) -> Result<MatrixBuild> {
        let mut ids = Vec::new();
        let mut terms: Vec<Vec<TermIdx>> = Vec::new();
        let mut dropped = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in products {
            if !seen.insert(p.as_str()) {
                continue;
            }
            match self.usable_terms(p) {
                Ok(t) => {
                    ids.push(p.clone());
                    terms.push(t);
                }
                Err(SemsimError::NoAnnotations(_)) => dropped.push(p.clone()),
                Err(e) => return Err(e),
            }
        }
        let n = ids.len();
        if n < 2 {
            return Err(SemsimError::TooFewProducts { usable: n });
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let scores: Vec<PairScore> = pairs
            .par_iter()
            .map(|&(i, j)| self.score_term_sets(measure, mixer, &terms[i], &terms[j]))
            .collect::<Result<_>>()?;

        let mut values = vec![0.0; n * n];
        let mut clamped = Vec::new();
        let mut degenerate = Vec::new();
        for (&(i, j), s) in pairs.iter().zip(&scores) {
            let v = s.value.clamp(0.0, 1.0);
            values[i * n + j] = v;
            values[j * n + i] = v;
            if s.clamped {
                clamped.push((ids[i].clone(), ids[j].clone()));
            }
            if s.degenerate {
                degenerate.push((ids[i].clone(), ids[j].clone()));
            }
        }
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        let mixer = measure.is_pairwise().then_some(mixer);
        Ok(MatrixBuild {
            matrix: SimilarityMatrix {
                ids,
                values,
                measure: Some(measure),
                mixer,
                namespace: Some(self.namespace()),
            },
            dropped,
            clamped,
            degenerate,
        })
    }

    /// All annotated products of the corpus, in accession order.
    pub fn all_products(&self) -> Vec<String> {
        self.corpus.products().map(|p| p.accession.clone()).collect()
    }
}
