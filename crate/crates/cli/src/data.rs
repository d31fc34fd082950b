//! Delimited text input with a header row.

use std::path::Path;

use beast_core::Sample;

use crate::CliError;

pub struct Table {
    pub headers: Vec<String>,
    records: Vec<csv::StringRecord>,
}

impl Table {
    pub fn read(path: &Path, delimiter: char) -> Result<Self, CliError> {
        if !delimiter.is_ascii() {
            return Err(format!("delimiter '{delimiter}' is not a single ASCII character").into());
        }
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter as u8)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let headers = reader
            .headers()
            .map_err(|e| format!("{}: {e}", path.display()))?
            .iter()
            .map(str::to_string)
            .collect();
        let records = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("{}: {e}", path.display()))?;
        if records.is_empty() {
            return Err(format!("{} has no data rows", path.display()).into());
        }
        Ok(Self { headers, records })
    }

    /// Resolves a selector such as `age,3,5-7` to 0-based column indices.
    /// Header names take precedence over numbers.
    pub fn select(&self, selector: &str) -> Result<Vec<usize>, CliError> {
        let mut out = Vec::new();
        for item in selector.split(',').map(str::trim) {
            if item.is_empty() {
                return Err(format!("empty item in column selector '{selector}'").into());
            }
            if let Some(i) = self.headers.iter().position(|h| h == item) {
                out.push(i);
                continue;
            }
            let (lo, hi) = match item.split_once('-') {
                Some((a, b)) => (self.index(a, item)?, self.index(b, item)?),
                None => {
                    let i = self.index(item, item)?;
                    (i, i)
                }
            };
            if lo > hi {
                return Err(format!("empty column range '{item}'").into());
            }
            out.extend(lo..=hi);
        }
        let mut seen = out.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != out.len() {
            return Err(format!("column selector '{selector}' repeats a column").into());
        }
        Ok(out)
    }

    fn index(&self, s: &str, item: &str) -> Result<usize, CliError> {
        let k: usize = s.trim().parse().map_err(|_| {
            format!(
                "no column named '{item}' (columns: {})",
                self.headers.join(", ")
            )
        })?;
        if k == 0 || k > self.headers.len() {
            return Err(format!(
                "column {k} out of range, the table has {} columns",
                self.headers.len()
            )
            .into());
        }
        Ok(k - 1)
    }

    /// Numeric sample made of `columns`, in order.
    pub fn sample(&self, columns: &[usize]) -> Result<Sample, CliError> {
        let mut data = Vec::with_capacity(self.records.len() * columns.len());
        for (row, rec) in self.records.iter().enumerate() {
            for &j in columns {
                let cell = rec.get(j).unwrap_or("");
                let v: f64 = cell.parse().map_err(|_| {
                    format!(
                        "row {}, column '{}': '{cell}' is not a number",
                        row + 1,
                        self.headers[j]
                    )
                })?;
                if !v.is_finite() {
                    return Err(format!(
                        "row {}, column '{}': value {cell} is not finite",
                        row + 1,
                        self.headers[j]
                    )
                    .into());
                }
                data.push(v);
            }
        }
        Ok(Sample::from_flat(self.records.len(), columns.len(), data)?)
    }

    pub fn names(&self, columns: &[usize]) -> Vec<String> {
        columns.iter().map(|&j| self.headers[j].clone()).collect()
    }
}
