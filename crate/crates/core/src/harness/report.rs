use std::path::Path;

use crate::error::{Error, Result};
use crate::vqls::fmt_f64;

/// Lower nearest-rank percentiles: the value of rank `max(1, ceil(q/100 * n))`
/// in ascending order, so `q = 0` is the minimum and `q = 100` the maximum.
pub fn report_percentiles(values: &[f64], percentiles: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::Size("percentiles of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    percentiles
        .iter()
        .map(|&q| {
            if !(0.0..=100.0).contains(&q) {
                return Err(Error::Domain(format!("percentile {q} outside [0, 100]")));
            }
            let rank = ((q / 100.0 * n as f64).ceil() as usize).clamp(1, n);
            Ok((q, sorted[rank - 1]))
        })
        .collect()
}

/// A CSV table held as strings, exactly as written to disk.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column {name:?}"),
            })
    }

    pub fn to_csv(&self) -> String {
        let mut s = write_records(std::iter::once(&self.header));
        s.push_str(&self.rows_csv());
        s
    }

    /// The rows alone, without the header line.
    pub fn rows_csv(&self) -> String {
        write_records(&self.rows)
    }

    /// Parse CSV text, ignoring a trailing line without its newline.
    pub fn from_csv(text: &str) -> Result<Self> {
        let complete = match text.rfind('\n') {
            Some(i) => &text[..=i],
            None => "",
        };
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(complete.as_bytes());
        let header = rdr
            .headers()
            .map_err(|e| csv_error(e, 1))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| csv_error(e, i + 2))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        Ok(Table { header, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

fn write_records<'a>(records: impl IntoIterator<Item = &'a Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in records {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

pub(crate) fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {s:?}"),
    })
}

/// Percentile column label: `p5`, `p50`, `p2.5`.
pub fn percentile_label(q: f64) -> String {
    format!("p{q}")
}

/// `count`, `excluded`, `mean`, `median` and the requested percentiles of
/// one group. Non-finite values are counted in `excluded` and left out of
/// the statistics.
pub(crate) fn describe(all: &[f64], percentiles: &[f64]) -> Result<Vec<(String, String)>> {
    let values: Vec<f64> = all.iter().copied().filter(|v| v.is_finite()).collect();
    let excluded = ("excluded".to_string(), (all.len() - values.len()).to_string());
    if values.is_empty() {
        return Ok(vec![("count".to_string(), "0".to_string()), excluded]);
    }
    let values = &values[..];
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let mut out = vec![
        ("count".to_string(), values.len().to_string()),
        excluded,
        ("mean".to_string(), fmt_f64(mean)),
        ("median".to_string(), fmt_f64(report_percentiles(values, &[50.0])?[0].1)),
    ];
    for (q, v) in report_percentiles(values, percentiles)? {
        out.push((percentile_label(q), fmt_f64(v)));
    }
    Ok(out)
}

/// Group `value_col` by the `group_cols` key (in order of first appearance)
/// and describe each group. Output columns: `group, statistic, value`.
pub fn summarize_groups(raw: &Table, group_cols: &[&str], value_col: &str, percentiles: &[f64]) -> Result<Table> {
    let gidx: Vec<usize> = group_cols.iter().map(|c| raw.column(c)).collect::<Result<_>>()?;
    let vidx = raw.column(value_col)?;
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, row) in raw.rows.iter().enumerate() {
        let key = group_cols
            .iter()
            .zip(&gidx)
            .map(|(c, &j)| format!("{c}={}", row[j]))
            .collect::<Vec<_>>()
            .join(";");
        let v = parse_f64(&row[vidx], i + 2)?;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vals)) => vals.push(v),
            None => groups.push((key, vec![v])),
        }
    }
    let mut out = Table::new(&["group", "statistic", "value"]);
    for (key, vals) in groups {
        for (stat, v) in describe(&vals, percentiles)? {
            out.rows.push(vec![key.clone(), stat, v]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_nearest_rank() {
        let p = report_percentiles(&[4.0, 1.0, 3.0, 2.0], &[0.0, 25.0, 50.0, 75.0, 100.0]).unwrap();
        let v: Vec<f64> = p.iter().map(|x| x.1).collect();
        assert_eq!(v, vec![1.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn empty_is_size_error() {
        assert!(matches!(report_percentiles(&[], &[50.0]), Err(Error::Size(_))));
    }

    #[test]
    fn csv_round_trip_drops_partial_line() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec!["1".into(), "".into()]);
        let mut text = t.to_csv();
        assert_eq!(Table::from_csv(&text).unwrap(), t);
        text.push_str("2,x");
        assert_eq!(Table::from_csv(&text).unwrap(), t);
    }
}
