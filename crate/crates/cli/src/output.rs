use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Tab-separated table with a `#` header naming the table, the config
/// digest and any extra notes, then a column line with units in the names.
pub struct Table {
    name: String,
    notes: Vec<String>,
    columns: Vec<String>,
    rows: String,
}

pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::I(v as i64)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}

/// 17 significant digits: enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), notes: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: String::new() }
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        let line: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::F(v) => fmt_f64(v),
                Cell::I(v) => v.to_string(),
                Cell::S(s) => s,
            })
            .collect();
        self.rows.push_str(&line.join("\t"));
        self.rows.push('\n');
    }

    pub fn render(&self, digest: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# table: {}", self.name);
        let _ = writeln!(s, "# config_sha256: {digest}");
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "{}", self.columns.join("\t"));
        s.push_str(&self.rows);
        s
    }
}

pub struct Written {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Collects emitted files in order; written atomically per file.
pub struct OutputDir {
    dir: PathBuf,
    pub files: Vec<Written>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(OutputDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents)?;
        fs::rename(&tmp, self.dir.join(name))?;
        self.files.push(Written { file: name.into(), sha256: hex::encode(Sha256::digest(contents.as_bytes())), bytes: contents.len() });
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }
}

/// Splits a table file into its `#` notes, column names and rows.
pub fn read_table(text: &str) -> Result<(Vec<String>, Vec<String>, Vec<Vec<String>>), String> {
    let mut notes = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(n) = line.strip_prefix("# ") {
            notes.push(n.to_string());
        } else if line.is_empty() {
            continue;
        } else if columns.is_none() {
            columns = Some(line.split('\t').map(String::from).collect::<Vec<_>>());
        } else {
            let cells: Vec<String> = line.split('\t').map(String::from).collect();
            if Some(cells.len()) != columns.as_ref().map(Vec::len) {
                return Err(format!("row {:?} does not match the column count", line));
            }
            rows.push(cells);
        }
    }
    Ok((notes, columns.ok_or("table has no column line")?, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -5.88e6, 1e-300, f64::MAX, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new("demo", &["a_hz", "n"]);
        t.note("units: Hz");
        t.row(vec![1.5.into(), 3usize.into()]);
        let text = t.render("abc");
        assert_eq!(text, "# table: demo\n# config_sha256: abc\n# units: Hz\na_hz\tn\n1.5000000000000000e0\t3\n");
        let (notes, cols, rows) = read_table(&text).unwrap();
        assert_eq!(notes.len(), 3);
        assert_eq!(cols, ["a_hz", "n"]);
        assert_eq!(rows[0][1], "3");
    }
}
