//! Flat files under the data directory plus one JSON index.
//!
//! Layout:
//! `index.json`, `datasets/<id>/{ontology.obo,annotations.gaf}`,
//! `jobs/<id>/<NS>_<Measure>/<artifact>`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ssn_core::{GafDiagnostics, MeasureId, MixerId, Namespace, ThresholdConfig};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DatasetRecord {
    pub id: String,
    pub organism: String,
    pub ontology_ref: String,
    pub annotation_ref: String,
    pub created_at: String,
    pub namespaces: Vec<Namespace>,
    pub diagnostics: GafDiagnostics,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

/// Everything that determines a job's output; hashed into its id.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JobParams {
    pub dataset_id: String,
    /// A namespace code or `ALL`.
    pub namespace: String,
    /// A measure name or `ALL`.
    pub measure: String,
    pub mixer: MixerId,
    pub threshold_config: ThresholdConfig,
    pub seed: u64,
}

impl JobParams {
    pub fn namespaces(&self, available: &[Namespace]) -> Vec<Namespace> {
        if self.namespace == "ALL" {
            Namespace::ALL.into_iter().filter(|n| available.contains(n)).collect()
        } else {
            self.namespace.parse().into_iter().collect()
        }
    }

    pub fn measures(&self) -> Vec<MeasureId> {
        if self.measure == "ALL" {
            MeasureId::ALL.to_vec()
        } else {
            self.measure.parse().into_iter().collect()
        }
    }

    pub fn job_id(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("params serialize");
        format!("job-{}", short_hash(&[&canonical]))
    }
}

/// One (namespace, measure) result of a job.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunSummary {
    pub key: String,
    pub namespace: Namespace,
    pub measure: MeasureId,
    pub products: usize,
    pub dropped: Vec<String>,
    pub raw_edges: usize,
    pub pruned_nodes: usize,
    pub pruned_edges: usize,
    pub converged: bool,
    pub final_alpha: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SkippedRun {
    pub namespace: Namespace,
    pub measure: MeasureId,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JobRecord {
    pub id: String,
    #[serde(flatten)]
    pub params: JobParams,
    pub state: JobState,
    pub error: Option<String>,
    pub runs: Vec<RunSummary>,
    pub skipped: Vec<SkippedRun>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Index {
    datasets: BTreeMap<String, DatasetRecord>,
    jobs: BTreeMap<String, JobRecord>,
}

pub fn run_key(namespace: Namespace, measure: MeasureId) -> String {
    format!("{}_{}", namespace.code(), measure.name())
}

/// First 16 bytes of the SHA-256 of the parts, each length-prefixed.
pub fn short_hash(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(&h.finalize()[..16])
}

/// The index is the only mutable state; every change goes through one lock
/// and is written out before the lock is released.
pub struct Store {
    root: PathBuf,
    index: Mutex<Index>,
}

impl Store {
    /// Opens or creates the data directory. Jobs caught mid-run by a restart
    /// are failed; the ids of still-queued jobs are returned for re-queueing.
    pub fn open(root: impl Into<PathBuf>) -> io::Result<(Store, Vec<String>)> {
        let root = root.into();
        fs::create_dir_all(root.join("datasets"))?;
        fs::create_dir_all(root.join("jobs"))?;
        let path = root.join("index.json");
        let mut index: Index = match fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(io::Error::other)?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Index::default(),
            Err(e) => return Err(e),
        };
        let mut queued = Vec::new();
        for job in index.jobs.values_mut() {
            match job.state {
                JobState::Running => {
                    job.state = JobState::Failed;
                    job.error = Some("interrupted by a service restart".into());
                }
                JobState::Queued => queued.push(job.id.clone()),
                _ => {}
            }
        }
        let store = Store {
            root,
            index: Mutex::new(index),
        };
        store.persist(&store.index.lock().unwrap())?;
        for id in &queued {
            let _ = fs::remove_dir_all(store.partial_dir(id));
        }
        Ok((store, queued))
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn persist(&self, index: &Index) -> io::Result<()> {
        let tmp = self.root.join("index.json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(index).map_err(io::Error::other)?)?;
        fs::rename(tmp, self.root.join("index.json"))
    }

    pub fn dataset_dir(&self, id: &str) -> PathBuf {
        self.root.join("datasets").join(id)
    }

    pub fn job_dir(&self, id: &str) -> PathBuf {
        self.root.join("jobs").join(id)
    }

    pub fn partial_dir(&self, id: &str) -> PathBuf {
        self.root.join("jobs").join(format!("{id}.partial"))
    }

    pub fn dataset(&self, id: &str) -> Option<DatasetRecord> {
        self.index.lock().unwrap().datasets.get(id).cloned()
    }

    pub fn job(&self, id: &str) -> Option<JobRecord> {
        self.index.lock().unwrap().jobs.get(id).cloned()
    }

    /// Stores the uploaded files unless a dataset with the same content exists.
    /// Returns the stored record and whether it was new.
    pub fn insert_dataset(
        &self,
        record: DatasetRecord,
        obo: &[u8],
        gaf: &[u8],
    ) -> io::Result<(DatasetRecord, bool)> {
        let mut index = self.index.lock().unwrap();
        if let Some(existing) = index.datasets.get(&record.id) {
            return Ok((existing.clone(), false));
        }
        let dir = self.dataset_dir(&record.id);
        fs::create_dir_all(&dir)?;
        fs::write(dir.join(&record.ontology_ref), obo)?;
        fs::write(dir.join(&record.annotation_ref), gaf)?;
        index.datasets.insert(record.id.clone(), record.clone());
        self.persist(&index)?;
        Ok((record, true))
    }

    /// Registers a queued job unless the same job exists already.
    pub fn insert_job(&self, job: JobRecord) -> io::Result<(JobRecord, bool)> {
        let mut index = self.index.lock().unwrap();
        if let Some(existing) = index.jobs.get(&job.id) {
            return Ok((existing.clone(), false));
        }
        index.jobs.insert(job.id.clone(), job.clone());
        self.persist(&index)?;
        Ok((job, true))
    }

    pub fn remove_job(&self, id: &str) -> io::Result<()> {
        let mut index = self.index.lock().unwrap();
        index.jobs.remove(id);
        self.persist(&index)
    }

    /// Applies `f` to the job and persists. Transitions other than
    /// queued to running and running to done or failed are refused.
    pub fn update_job(&self, id: &str, f: impl FnOnce(&mut JobRecord)) -> io::Result<JobRecord> {
        let mut index = self.index.lock().unwrap();
        let job = index
            .jobs
            .get_mut(id)
            .ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, format!("unknown job {id}")))?;
        let before = job.state;
        let mut next = job.clone();
        f(&mut next);
        let allowed = matches!(
            (before, next.state),
            (JobState::Queued, JobState::Running)
                | (JobState::Running, JobState::Done)
                | (JobState::Running, JobState::Failed)
        ) || before == next.state;
        if !allowed {
            return Err(io::Error::other(format!(
                "job {id}: refusing transition {before:?} -> {:?}",
                next.state
            )));
        }
        *job = next.clone();
        self.persist(&index)?;
        Ok(next)
    }
}
