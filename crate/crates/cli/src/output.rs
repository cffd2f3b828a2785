//! Output files. Everything is rendered in memory first and written only
//! once the command has succeeded, so a failing run leaves no partial files.

use std::io::Write;
use std::path::{Path, PathBuf};

use mibn_core::{BooleanState, RealMatrix};

#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) {
        let mut text = serde_json::to_string_pretty(value).expect("json values always serialize");
        text.push('\n');
        self.add(name, text);
    }

    /// Writes every file under `dir`, each through a temporary file renamed
    /// into place. On failure the files already placed are removed.
    pub fn commit(self, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
        let mut placed = Vec::new();
        let result = (|| {
            for (name, contents) in &self.files {
                let target = dir.join(name);
                let parent = target.parent().unwrap_or(dir);
                std::fs::create_dir_all(parent)?;
                let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
                tmp.write_all(contents)?;
                tmp.persist(&target).map_err(|e| e.error)?;
                placed.push(target);
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(placed),
            Err(e) => {
                for p in &placed {
                    let _ = std::fs::remove_file(p);
                }
                Err(e)
            }
        }
    }
}

pub fn label(i: usize, n: usize) -> String {
    BooleanState::from_index(i, n).map(|b| b.to_string()).unwrap_or_else(|_| i.to_string())
}

pub fn labels(n: usize) -> Vec<String> {
    (0..1usize << n).map(|i| label(i, n)).collect()
}

/// 17 significant digits, enough to read back the identical `f64`.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Square matrix with bit-string row and column headers; `None` rows are
/// written as `NA`.
pub fn matrix_csv(rows: &[Option<Vec<f64>>], n: usize) -> String {
    let names = labels(n);
    let mut out = format!("from,{}\n", names.join(","));
    for (name, row) in names.iter().zip(rows) {
        out.push_str(name);
        for j in 0..names.len() {
            out.push(',');
            match row {
                Some(r) => out.push_str(&float(r[j])),
                None => out.push_str("NA"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn rows_of(m: &RealMatrix) -> Vec<Option<Vec<f64>>> {
    m.row_iter().map(|r| Some(r.iter().copied().collect())).collect()
}
