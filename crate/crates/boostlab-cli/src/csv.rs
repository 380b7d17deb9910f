//! CSV emission with a stable schema: fixed header per command, `\n` line
//! endings, and locale-independent scientific notation with 17 significant
//! digits so values round-trip exactly.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use crate::CliError;

/// Formats a value with 17 significant digits (1 leading + 16 fractional),
/// enough to reproduce any f64 bit pattern on parse.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvFile {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl CsvFile {
    pub fn create(path: PathBuf, header: &str) -> Result<Self, CliError> {
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "{header}").map_err(|e| CliError::io(&path, e))?;
        Ok(CsvFile { path, writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        writeln!(self.writer, "{}", fields.join(",")).map_err(|e| CliError::io(&self.path, e))
    }

    /// Flushes and reports the file written.
    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-17, 6.02e23, 0.0, 1.0] {
            let text = num(x);
            let back: f64 = text.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{text} does not round-trip");
        }
    }

    #[test]
    fn format_has_seventeen_significant_digits() {
        let text = num(std::f64::consts::PI);
        assert_eq!(text, "3.1415926535897931e0");
    }

    #[test]
    fn file_layout_is_header_then_rows() {
        let dir = std::env::temp_dir().join("boostlab-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("layout.csv");
        let mut csv = CsvFile::create(path.clone(), "a,b").unwrap();
        csv.row(&[num(1.0), num(2.0)]).unwrap();
        csv.finish().unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000000e0,2.0000000000000000e0\n");
    }
}
