pub mod field_file;
pub mod json;
pub mod obj;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// Buffered writer to `path`, or to standard output.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Scientific notation with 17 significant digits, enough to round-trip
/// every finite `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
