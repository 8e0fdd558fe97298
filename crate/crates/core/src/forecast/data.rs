//! Monthly macro panels in the FRED-MD layout and their stationarity transforms.
//!
//! File layout: row 1 holds the date header followed by series names, row 2 a
//! blank cell followed by integer transformation codes, and every later row a
//! date label followed by values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub dates: Vec<String>,
    pub names: Vec<String>,
    /// Transformation code per column, each in `1..=7`.
    pub tcodes: Vec<u8>,
    /// Rows are months, columns follow `names`.
    pub values: Matrix,
}

#[derive(Clone, Debug)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    /// Columns removed because at least one cell was blank.
    pub dropped: Vec<String>,
}

impl Dataset {
    pub fn new(dates: Vec<String>, names: Vec<String>, tcodes: Vec<u8>, values: Matrix) -> Result<Self> {
        if values.rows() != dates.len() || values.cols() != names.len() || tcodes.len() != names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} dates, {} names, {} tcodes for a {}x{} panel",
                dates.len(),
                names.len(),
                tcodes.len(),
                values.rows(),
                values.cols()
            )));
        }
        if let Some(&c) = tcodes.iter().find(|&&c| !(1..=7).contains(&c)) {
            return Err(Error::InvalidConfig(format!("transformation code {c} outside 1..=7")));
        }
        if values.rows() == 0 || values.cols() == 0 {
            return Err(Error::EmptyDataset);
        }
        Ok(Self {
            dates,
            names,
            tcodes,
            values,
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.values.col(j)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let mut header = vec!["sasdate".to_string()];
        header.extend(self.names.iter().cloned());
        wr.write_record(&header)?;
        let mut codes = vec![String::new()];
        codes.extend(self.tcodes.iter().map(u8::to_string));
        wr.write_record(&codes)?;
        for (i, d) in self.dates.iter().enumerate() {
            let mut rec = vec![d.clone()];
            rec.extend((0..self.names.len()).map(|j| format!("{:?}", self.values[(i, j)])));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LoadedDataset> {
    read_csv(File::open(path)?)
}

/// Parses a panel; columns with any blank cell are dropped and listed.
pub fn read_csv<R: Read>(input: R) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyDataset),
    };
    let names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    let width = names.len();
    let check_width = |rec: &csv::StringRecord, row: usize| {
        if rec.len() != width + 1 {
            Err(Error::Parse {
                row,
                column: rec.len().min(width + 1),
                message: format!("expected {} cells, found {}", width + 1, rec.len()),
            })
        } else {
            Ok(())
        }
    };

    let code_row = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyDataset),
    };
    check_width(&code_row, 2)?;
    let tcodes = code_row
        .iter()
        .skip(1)
        .enumerate()
        .map(|(j, cell)| {
            let bad = |message: String| Error::Parse {
                row: 2,
                column: j + 2,
                message,
            };
            let c: u8 = cell.trim().parse().map_err(|_| bad(format!("transformation code '{cell}' is not an integer")))?;
            if (1..=7).contains(&c) {
                Ok(c)
            } else {
                Err(bad(format!("transformation code {c} outside 1..=7")))
            }
        })
        .collect::<Result<Vec<u8>>>()?;

    let mut dates = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); width];
    let mut missing = vec![false; width];
    for (k, rec) in records.enumerate() {
        let rec = rec?;
        let row = k + 3;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        check_width(&rec, row)?;
        dates.push(rec[0].trim().to_string());
        for (j, cell) in rec.iter().skip(1).enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                missing[j] = true;
                columns[j].push(f64::NAN);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                column: j + 2,
                message: format!("'{cell}' is not a number"),
            })?;
            columns[j].push(v);
        }
    }
    if dates.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let keep: Vec<usize> = (0..width).filter(|&j| !missing[j]).collect();
    let dropped = (0..width).filter(|&j| missing[j]).map(|j| names[j].clone()).collect();
    let values = Matrix::from_columns(&keep.iter().map(|&j| columns[j].clone()).collect::<Vec<_>>())
        .unwrap_or_else(|_| Matrix::zeros(dates.len(), 0));
    let dataset = Dataset::new(
        dates,
        keep.iter().map(|&j| names[j].clone()).collect(),
        keep.iter().map(|&j| tcodes[j]).collect(),
        values,
    )?;
    Ok(LoadedDataset { dataset, dropped })
}

/// Rows consumed at the start of the sample by transformation `code`.
pub fn tcode_lag(code: u8) -> Result<usize> {
    match code {
        1 | 4 => Ok(0),
        2 | 5 => Ok(1),
        3 | 6 | 7 => Ok(2),
        c => Err(Error::InvalidConfig(format!("transformation code {c} outside 1..=7"))),
    }
}

fn diff(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

fn logs(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 {
                Ok(value.ln())
            } else {
                Err(Error::NonPositiveValue { index, value })
            }
        })
        .collect()
}

/// Codes: 1 level, 2 `Δw`, 3 `Δ²w`, 4 `ln w`, 5 `Δ ln w`, 6 `Δ² ln w`,
/// 7 `Δ(w_t/w_{t−1} − 1)`.
pub fn apply_tcode(series: &[f64], code: u8) -> Result<Vec<f64>> {
    match code {
        1 => Ok(series.to_vec()),
        2 => Ok(diff(series)),
        3 => Ok(diff(&diff(series))),
        4 => logs(series),
        5 => Ok(diff(&logs(series)?)),
        6 => Ok(diff(&diff(&logs(series)?))),
        7 => {
            if let Some(index) = series.iter().position(|&v| v == 0.0) {
                return Err(Error::NonPositiveValue { index, value: 0.0 });
            }
            let growth: Vec<f64> = series.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
            Ok(diff(&growth))
        }
        c => Err(Error::InvalidConfig(format!("transformation code {c} outside 1..=7"))),
    }
}

fn cumulate(start: f64, d: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len() + 1);
    out.push(start);
    for &v in d {
        let last = *out.last().unwrap();
        out.push(last + v);
    }
    out
}

fn cumulate_twice(x0: f64, x1: f64, d2: &[f64]) -> Vec<f64> {
    let d1 = cumulate(x1 - x0, d2);
    cumulate(x0, &d1)
}

/// Rebuilds the original series from `apply_tcode` output and the first
/// `tcode_lag(code)` original values.
pub fn invert_tcode(transformed: &[f64], initial: &[f64], code: u8) -> Result<Vec<f64>> {
    let lag = tcode_lag(code)?;
    if initial.len() != lag {
        return Err(Error::InvalidConfig(format!(
            "code {code} needs {lag} initial values, got {}",
            initial.len()
        )));
    }
    let exp = |v: Vec<f64>| v.into_iter().map(f64::exp).collect();
    Ok(match code {
        1 => transformed.to_vec(),
        2 => cumulate(initial[0], transformed),
        3 => cumulate_twice(initial[0], initial[1], transformed),
        4 => exp(transformed.to_vec()),
        5 => exp(cumulate(initial[0].ln(), transformed)),
        6 => exp(cumulate_twice(initial[0].ln(), initial[1].ln(), transformed)),
        _ => {
            let growth = cumulate(initial[1] / initial[0] - 1.0, transformed);
            let mut out = vec![initial[0]];
            for g in growth {
                let last = *out.last().unwrap();
                out.push(last * (1.0 + g));
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "sasdate,A,B,C\n,1,5,2\n2000-01,1.0,2.0,3.0\n2000-02,1.5,2.5,3.5\n2000-03,2.0,3.0,4.5\n";

    #[test]
    fn parses_toy_file() {
        let d = read_csv(TOY.as_bytes()).unwrap();
        assert!(d.dropped.is_empty());
        let ds = d.dataset;
        assert_eq!(ds.names, vec!["A", "B", "C"]);
        assert_eq!(ds.tcodes, vec![1, 5, 2]);
        assert_eq!(ds.dates.len(), 3);
        assert_eq!(ds.values[(2, 2)], 4.5);
    }

    #[test]
    fn blank_cell_drops_column() {
        let text = "sasdate,A,B,C\n,1,5,2\n2000-01,1.0,,3.0\n2000-02,1.5,2.5,3.5\n";
        let d = read_csv(text.as_bytes()).unwrap();
        assert_eq!(d.dropped, vec!["B"]);
        assert_eq!(d.dataset.names, vec!["A", "C"]);
        assert_eq!(d.dataset.tcodes, vec![1, 2]);
    }

    #[test]
    fn parse_errors_are_located() {
        let text = "sasdate,A,B\n,1,x\n2000-01,1,2\n";
        match read_csv(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (2, 3)),
            other => panic!("unexpected {other:?}"),
        }
        let text = "sasdate,A,B\n,1,2\n2000-01,1,abc\n";
        match read_csv(text.as_bytes()) {
            Err(Error::Parse { row, column, .. }) => assert_eq!((row, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(read_csv("sasdate,A\n,1\n".as_bytes()), Err(Error::EmptyDataset)));
        assert!(matches!(read_csv("".as_bytes()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn csv_round_trip() {
        let ds = read_csv(TOY.as_bytes()).unwrap().dataset;
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap().dataset, ds);
    }

    #[test]
    fn tcode_examples() {
        assert_eq!(apply_tcode(&[1.0, 3.0, 6.0], 2).unwrap(), vec![2.0, 3.0]);
        let e = std::f64::consts::E;
        let v = apply_tcode(&[1.0, e, e * e], 5).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
        assert_eq!(apply_tcode(&[1.0, 2.0, 4.0, 8.0], 7).unwrap(), vec![0.0, 0.0]);
        assert_eq!(apply_tcode(&[1.0, 2.0, 4.0, 8.0], 3).unwrap(), vec![1.0, 2.0]);
        assert!(matches!(apply_tcode(&[1.0, -2.0], 4), Err(Error::NonPositiveValue { index: 1, .. })));
        assert!(apply_tcode(&[1.0], 8).is_err());
    }

    #[test]
    fn output_lengths() {
        let x: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        for code in 1..=7u8 {
            let out = apply_tcode(&x, code).unwrap();
            assert_eq!(out.len(), 10 - tcode_lag(code).unwrap(), "code {code}");
        }
    }

    #[test]
    fn inverses_reconstruct() {
        let x = vec![2.0, 2.5, 2.25, 3.0, 4.5, 4.0, 5.5];
        for code in 1..=7u8 {
            let lag = tcode_lag(code).unwrap();
            let back = invert_tcode(&apply_tcode(&x, code).unwrap(), &x[..lag], code).unwrap();
            assert_eq!(back.len(), x.len());
            for (a, b) in back.iter().zip(&x) {
                assert!((a - b).abs() <= 1e-10 * b.abs(), "code {code}: {a} vs {b}");
            }
        }
    }
}
