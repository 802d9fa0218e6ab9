use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use mgtd_core::corpus::{parse_dataset, DatasetFormat};
use mgtd_core::prediction::{read_predictions, PredictionRecord};
use mgtd_core::{Dataset, Split};

use crate::error::{CliError, CliResult};

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path.display(), e))
}

/// Writes through a temporary file in the target directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir.display(), e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).map_err(|e| CliError::io(path.display(), e))?;
        buf.flush().map_err(|e| CliError::io(path.display(), e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path.display(), e.error))?;
    Ok(())
}

pub fn load_dataset(path: &Path, split: Split) -> CliResult<Dataset> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => DatasetFormat::Csv,
        Some("tsv") => DatasetFormat::Tsv,
        _ => DatasetFormat::JsonLines,
    };
    parse_dataset(open(path)?, format, split).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn load_predictions(path: &Path) -> CliResult<Vec<PredictionRecord>> {
    read_predictions(open(path)?).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
