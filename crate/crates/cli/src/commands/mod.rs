pub mod analyze;
pub mod oracle;
pub mod simulate;
pub mod sweep;

use std::path::Path;

use crate::error::AppError;
use crate::io::write_atomic;

/// Files a command has produced, written atomically and listed in the
/// manifest by name.
#[derive(Default)]
pub(crate) struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn write_all(&self, dir: &Path) -> Result<(), AppError> {
        for (name, contents) in &self.files {
            write_atomic(&dir.join(name), contents.as_bytes())?;
        }
        Ok(())
    }
}
