use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::de::DeserializeOwned;

use super::{io_err, CellFailure, HarnessError, RunRecord};

pub const RUNS_FILE: &str = "runs.jsonl";
pub const FAILURES_FILE: &str = "failures.jsonl";
pub const TRACES_DIR: &str = "traces";

/// Append-only run log in an output directory. Writers on several threads
/// are serialized through one lock, and each record goes out as a single
/// `write_all` of a complete line.
pub struct RunLog {
    dir: PathBuf,
    runs: Mutex<File>,
    failures: Mutex<File>,
}

impl RunLog {
    /// Opens (creating if needed) the log in `dir`. A trailing partial line
    /// left by an interrupted run is cut off.
    pub fn open(dir: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir.join(TRACES_DIR)).map_err(io_err(dir))?;
        let runs_path = dir.join(RUNS_FILE);
        let failures_path = dir.join(FAILURES_FILE);
        drop_partial_line(&runs_path)?;
        drop_partial_line(&failures_path)?;
        let open = |p: &Path| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(io_err(p))
        };
        Ok(Self {
            dir: dir.to_path_buf(),
            runs: Mutex::new(open(&runs_path)?),
            failures: Mutex::new(open(&failures_path)?),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn runs_path(&self) -> PathBuf {
        self.dir.join(RUNS_FILE)
    }

    pub fn trace_path(&self, record: &RunRecord) -> PathBuf {
        self.dir.join(TRACES_DIR).join(format!("{}.csv", record.key().file_stem()))
    }

    /// Writes the trace sidecar, then appends the record.
    pub fn append(&self, record: &RunRecord) -> Result<(), HarnessError> {
        let trace_path = self.trace_path(record);
        super::write_trace_csv(&trace_path, &record.trace)?;
        let mut line = serde_json::to_string(record).expect("record serialization is infallible");
        line.push('\n');
        let mut f = self.runs.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(io_err(self.runs_path()))
    }

    pub fn append_failure(&self, failure: &CellFailure) -> Result<(), HarnessError> {
        let mut line = serde_json::to_string(failure).expect("failure serialization is infallible");
        line.push('\n');
        let mut f = self.failures.lock().unwrap_or_else(|e| e.into_inner());
        f.write_all(line.as_bytes())
            .and_then(|_| f.flush())
            .map_err(io_err(self.dir.join(FAILURES_FILE)))
    }
}

fn drop_partial_line(path: &Path) -> Result<(), HarnessError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_err(path)(e)),
    };
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let f = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
    f.set_len(keep as u64).map_err(io_err(path))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            // an unterminated last line is an interrupted write, not corruption
            Err(_) if i + 1 == lines.len() && !complete => break,
            Err(e) => {
                return Err(HarnessError::Corrupt {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

/// Records from a run directory's (or a file's) run log.
pub fn read_records(path: &Path) -> Result<Vec<RunRecord>, HarnessError> {
    let file = if path.is_dir() { path.join(RUNS_FILE) } else { path.to_path_buf() };
    if !file.is_file() {
        return Err(io_err(&file)(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            "run log not found",
        )));
    }
    read_jsonl(&file)
}

pub fn read_failures(dir: &Path) -> Result<Vec<CellFailure>, HarnessError> {
    read_jsonl(&dir.join(FAILURES_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_line_is_dropped_and_corruption_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join(RUNS_FILE);
        fs::write(&p, "{\"a\":1}\n{\"a\":").unwrap();
        let v: Vec<serde_json::Value> = read_jsonl(&p).unwrap();
        assert_eq!(v.len(), 1);
        drop_partial_line(&p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "{\"a\":1}\n");

        fs::write(&p, "{\"a\":1}\nnot json\n{\"a\":2}\n").unwrap();
        let err = read_jsonl::<serde_json::Value>(&p).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }
}
