//! Bounded job queue drained by a fixed number of workers.

use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use ssn_core::pipeline::{analyze, Dataset};
use tokio::sync::{mpsc, Mutex};

use crate::store::{run_key, JobRecord, JobState, RunSummary, SkippedRun, Store};

/// Artifact file names inside a run directory.
pub mod artifact {
    pub const MATRIX_CSV: &str = "matrix.csv";
    pub const MATRIX_JSON: &str = "matrix.json";
    pub const RAW_JSON: &str = "network_raw.json";
    pub const RAW_TSV: &str = "network_raw.tsv";
    pub const PRUNED_JSON: &str = "network_pruned.json";
    pub const PRUNED_TSV: &str = "network_pruned.tsv";
    pub const SPECTRA: &str = "spectra.json";
    pub const RAW_COMMUNITIES_JSON: &str = "communities_raw.json";
    pub const RAW_COMMUNITIES_CSV: &str = "communities_raw.csv";
    pub const PRUNED_COMMUNITIES_JSON: &str = "communities_pruned.json";
    pub const PRUNED_COMMUNITIES_CSV: &str = "communities_pruned.csv";
}

#[derive(Clone)]
pub struct Queue {
    tx: mpsc::Sender<String>,
}

impl Queue {
    /// Starts `workers` tasks sharing a queue of `capacity` pending jobs.
    /// With no workers, jobs stay queued.
    pub fn start(store: Arc<Store>, workers: usize, capacity: usize) -> Queue {
        let (tx, rx) = mpsc::channel::<String>(capacity.max(1));
        let rx = Arc::new(Mutex::new(rx));
        for _ in 0..workers {
            let (rx, store) = (rx.clone(), store.clone());
            tokio::spawn(async move {
                loop {
                    let next = rx.lock().await.recv().await;
                    let Some(id) = next else { break };
                    let store = store.clone();
                    let outcome = tokio::task::spawn_blocking(move || execute(&store, &id)).await;
                    if let Err(e) = outcome {
                        eprintln!("ssn-service: worker panicked: {e}");
                    }
                }
            });
        }
        Queue { tx }
    }

    /// False when the queue is full.
    pub fn try_push(&self, id: String) -> bool {
        self.tx.try_send(id).is_ok()
    }

    /// Waits for room; used when re-queueing after a restart.
    pub async fn push(&self, id: String) {
        let _ = self.tx.send(id).await;
    }
}

/// Runs one job to completion and records the outcome.
pub fn execute(store: &Store, id: &str) {
    let job = match store.update_job(id, |j| j.state = JobState::Running) {
        Ok(job) => job,
        Err(e) => {
            eprintln!("ssn-service: {e}");
            return;
        }
    };
    let result = compute(store, &job);
    let update = store.update_job(id, |j| match result {
        Ok((runs, skipped)) => {
            j.state = JobState::Done;
            j.runs = runs;
            j.skipped = skipped;
        }
        Err(message) => {
            j.state = JobState::Failed;
            j.error = Some(message);
        }
    });
    if let Err(e) = update {
        eprintln!("ssn-service: {e}");
    }
}

type Outcome = (Vec<RunSummary>, Vec<SkippedRun>);

fn compute(store: &Store, job: &JobRecord) -> Result<Outcome, String> {
    let record = store
        .dataset(&job.params.dataset_id)
        .ok_or_else(|| format!("dataset {} is gone", job.params.dataset_id))?;
    let dir = store.dataset_dir(&record.id);
    let obo = fs::read(dir.join(&record.ontology_ref)).map_err(|e| e.to_string())?;
    let gaf = fs::read(dir.join(&record.annotation_ref)).map_err(|e| e.to_string())?;
    let organism = Some(record.organism.as_str()).filter(|o| !o.is_empty());
    let data = Dataset::load(&obo[..], &gaf[..], organism).map_err(|e| e.to_string())?;

    let partial = store.partial_dir(&job.id);
    let _ = fs::remove_dir_all(&partial);
    fs::create_dir_all(&partial).map_err(|e| e.to_string())?;

    let namespaces = job.params.namespaces(&data.namespaces());
    let measures = job.params.measures();
    let fan_out = namespaces.len() * measures.len() > 1 || job.params.namespace == "ALL";
    let (mut runs, mut skipped) = (Vec::new(), Vec::new());
    for &namespace in &namespaces {
        for &measure in &measures {
            match run_one(&data, job, namespace, measure, &partial) {
                Ok(summary) => runs.push(summary),
                Err(reason) if fan_out => skipped.push(SkippedRun {
                    namespace,
                    measure,
                    reason,
                }),
                Err(reason) => return Err(reason),
            }
        }
    }
    if runs.is_empty() {
        let _ = fs::remove_dir_all(&partial);
        return Err(match skipped.first() {
            Some(s) => format!("no run succeeded; first failure: {}", s.reason),
            None => format!("no annotations in namespace {}", job.params.namespace),
        });
    }
    fs::rename(&partial, store.job_dir(&job.id)).map_err(|e| e.to_string())?;
    Ok((runs, skipped))
}

fn run_one(
    data: &Dataset,
    job: &JobRecord,
    namespace: ssn_core::Namespace,
    measure: ssn_core::MeasureId,
    root: &Path,
) -> Result<RunSummary, String> {
    use artifact::*;
    let build = data
        .matrix(namespace, measure, job.params.mixer)
        .map_err(|e| e.to_string())?;
    let m = &build.matrix;
    let a = analyze(m, &job.params.threshold_config, job.params.seed).map_err(|e| e.to_string())?;
    let key = run_key(namespace, measure);
    let dir = root.join(&key);
    let write = |name: &str, text: String| -> io::Result<()> { fs::write(dir.join(name), text) };
    let written = (|| -> io::Result<()> {
        fs::create_dir_all(&dir)?;
        write(MATRIX_CSV, m.to_csv())?;
        write(MATRIX_JSON, m.to_json())?;
        write(RAW_JSON, a.raw.to_json())?;
        write(RAW_TSV, a.raw.to_tsv())?;
        write(PRUNED_JSON, a.prune.pruned.to_json())?;
        write(PRUNED_TSV, a.prune.pruned.to_tsv())?;
        write(SPECTRA, a.prune.to_json())?;
        write(RAW_COMMUNITIES_JSON, a.raw_communities.to_json())?;
        write(RAW_COMMUNITIES_CSV, a.raw_communities.to_csv())?;
        if let Some(c) = &a.pruned_communities {
            write(PRUNED_COMMUNITIES_JSON, c.to_json())?;
            write(PRUNED_COMMUNITIES_CSV, c.to_csv())?;
        }
        Ok(())
    })();
    written.map_err(|e| e.to_string())?;
    Ok(RunSummary {
        key,
        namespace,
        measure,
        products: m.len(),
        dropped: build.dropped,
        raw_edges: a.raw.edge_count(),
        pruned_nodes: a.prune.pruned.node_count(),
        pruned_edges: a.prune.pruned.edge_count(),
        converged: a.prune.converged,
        final_alpha: a.prune.final_alpha,
    })
}
