use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc::{channel, Sender};
use std::thread::JoinHandle;

use super::PipelineError;

pub const METRICS_FILE: &str = "metrics.json";

pub(crate) enum Job {
    /// Create several files in order; the last one marks completion.
    Cell {
        dir: PathBuf,
        files: Vec<(&'static str, Vec<u8>)>,
    },
    Append {
        path: PathBuf,
        line: String,
    },
}

/// The only thread that touches the archive while cells run.
pub(crate) struct Writer {
    tx: Sender<Job>,
    handle: JoinHandle<Vec<String>>,
}

fn create_new(path: &Path, bytes: &[u8]) -> Result<(), String> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
    }
    let mut f = OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    f.write_all(bytes)
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn append(path: &Path, line: &str) -> Result<(), String> {
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| format!("{}: {e}", path.display()))?;
    writeln!(f, "{line}").map_err(|e| format!("{}: {e}", path.display()))
}

impl Writer {
    pub fn spawn() -> Writer {
        let (tx, rx) = channel::<Job>();
        let handle = std::thread::spawn(move || {
            let mut errors = Vec::new();
            for job in rx {
                let r = match job {
                    Job::Cell { dir, files } => files
                        .iter()
                        .try_for_each(|(name, bytes)| create_new(&dir.join(name), bytes)),
                    Job::Append { path, line } => append(&path, &line),
                };
                if let Err(e) = r {
                    log::error!("archive write failed: {e}");
                    errors.push(e);
                }
            }
            errors
        });
        Writer { tx, handle }
    }

    pub fn sender(&self) -> Sender<Job> {
        self.tx.clone()
    }

    /// Flush all queued writes; returns the write errors.
    pub fn finish(self) -> Vec<String> {
        drop(self.tx);
        self.handle
            .join()
            .unwrap_or_else(|_| vec!["writer thread panicked".into()])
    }
}

pub(crate) fn cell_dir(out: &Path, dataset: &str, split: &str, estimator: &str) -> PathBuf {
    out.join(dataset).join(split).join(estimator)
}

pub(crate) fn is_complete(dir: &Path) -> bool {
    dir.join(METRICS_FILE).is_file()
}

/// Remove leftovers of an interrupted cell so it can be redone.
pub(crate) fn clear_partial(dir: &Path) -> Result<(), PipelineError> {
    if dir.is_dir() && !is_complete(dir) {
        log::warn!("removing partial cell output in {}", dir.display());
        fs::remove_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    Ok(())
}

/// Write `bytes` to `path`, or check that an existing file is identical.
pub(crate) fn write_or_verify(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    match fs::read(path) {
        Ok(existing) if existing == bytes => Ok(()),
        Ok(_) => Err(PipelineError::Archive(format!(
            "{} exists with different content",
            path.display()
        ))),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            create_new(path, bytes).map_err(PipelineError::Archive)
        }
        Err(e) => Err(PipelineError::io(path, e)),
    }
}
