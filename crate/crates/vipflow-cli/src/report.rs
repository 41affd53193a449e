//! Deterministic CSV and manifest emission.  Every byte written here
//! must reproduce exactly on a rerun: floats use the shortest
//! round-tripping decimal form, nothing records wall time, and the
//! manifest hashes each emitted file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use vipflow::error::{Error, Result};

/// Shortest decimal that parses back to the same f64, with the sign of
/// a negative zero dropped so equal values print equally.
pub fn fmt_float(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn check_cell(cell: &str) -> Result<()> {
    if cell.contains([',', '\n', '\r', '"']) {
        return Err(Error::Config(format!(
            "CSV cell '{cell}' needs quoting, which the plain format does not carry"
        )));
    }
    Ok(())
}

/// Render rows under a header, comma-separated with a trailing newline.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut text = String::new();
    for cell in header {
        check_cell(cell)?;
    }
    writeln!(text, "{}", header.join(",")).expect("string writes are infallible");
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::SizeMismatch(format!(
                "CSV row holds {} cells under a {}-column header",
                row.len(),
                header.len()
            )));
        }
        for cell in row {
            check_cell(cell)?;
        }
        writeln!(text, "{}", row.join(",")).expect("string writes are infallible");
    }
    Ok(text)
}

/// Parse CSV text back into header and rows; inverse of [`csv_text`].
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok((header, rows))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        write!(hex, "{b:02x}").expect("string writes are infallible");
    }
    hex
}

/// Collects emitted files so the manifest can list them with hashes.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        fs::write(self.dir.join(name), text)?;
        self.written.push((name.to_string(), sha256_hex(text.as_bytes())));
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let text = csv_text(header, rows)?;
        self.write_text(name, &text)
    }

    /// Write `manifest.txt`: the resolved config verbatim, then one
    /// `name = sha256` line per emitted file.
    pub fn write_manifest(&mut self, resolved_config: &str) -> Result<()> {
        let mut text = String::from(resolved_config);
        text.push_str("\n[outputs]\n");
        for (name, hash) in &self.written {
            writeln!(text, "{name} = {hash}").expect("string writes are infallible");
        }
        fs::write(self.dir.join("manifest.txt"), &text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_shortest_form() {
        for &v in &[
            0.125,
            1.0 / 3.0,
            -0.9637405441957689,
            1e-8,
            12345.678901234567,
            f64::MIN_POSITIVE,
        ] {
            let printed = fmt_float(v);
            assert_eq!(printed.parse::<f64>().unwrap(), v, "{printed}");
        }
        assert_eq!(fmt_float(-0.0), "0");
    }

    #[test]
    fn csv_round_trips() {
        let header = ["h", "e_DU"];
        let rows = vec![
            vec!["0.125".to_string(), "0.0625".to_string()],
            vec!["1e-300".to_string(), String::new()],
        ];
        let text = csv_text(&header, &rows).unwrap();
        let (h2, r2) = parse_csv(&text).unwrap();
        assert_eq!(h2, header);
        assert_eq!(r2, rows);
    }

    #[test]
    fn csv_rejects_cells_needing_quotes() {
        assert!(csv_text(&["a"], &[vec!["x,y".into()]]).is_err());
        assert!(csv_text(&["a"], &[vec!["x\ny".into()]]).is_err());
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(csv_text(&["a", "b"], &[vec!["1".into()]]).is_err());
    }

    #[test]
    fn sha256_matches_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
