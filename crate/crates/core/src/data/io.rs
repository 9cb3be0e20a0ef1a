//! Dataset CSV: a header line `n,m,noise_bound`, one line with those values,
//! then one line `x_1..x_n,y_1..y_m` per sample.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Tensor;
use crate::Scalar;

pub fn write_dataset<T: Scalar, W: Write>(ds: &LabeledDataset<T>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["n", "m", "noise_bound"]).map_err(csv_err)?;
    w.write_record([
        ds.input_dim().to_string(),
        ds.output_dim().to_string(),
        ds.noise_bound().to_string(),
    ])
    .map_err(csv_err)?;
    for i in 0..ds.len() {
        let row = ds
            .inputs()
            .row(i)
            .iter()
            .chain(ds.outputs().row(i))
            .map(|v| v.to_string());
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset<T: Scalar, R: Read>(input: R) -> Result<LabeledDataset<T>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let headers = r.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "m", "noise_bound"] {
        return Err(Error::Format("dataset header must be 'n,m,noise_bound'".into()));
    }
    let mut records = r.records();
    let meta = records
        .next()
        .ok_or_else(|| Error::Format("missing dataset size line".into()))?
        .map_err(|e| Error::Format(e.to_string()))?;
    let field = |i: usize| meta.get(i).map(str::trim).unwrap_or("");
    let n: usize = field(0).parse().map_err(|_| Error::Format(format!("line 2: bad n '{}'", field(0))))?;
    let m: usize = field(1).parse().map_err(|_| Error::Format(format!("line 2: bad m '{}'", field(1))))?;
    let noise: f64 = field(2)
        .parse()
        .map_err(|_| Error::Format(format!("line 2: bad noise bound '{}'", field(2))))?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, rec) in records.enumerate() {
        let line = k + 3;
        let rec = rec.map_err(|e| Error::Format(format!("line {line}: {e}")))?;
        if rec.len() != n + m {
            return Err(Error::Format(format!("line {line}: expected {} fields, got {}", n + m, rec.len())));
        }
        for (j, f) in rec.iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {line}: bad number '{f}'")))?;
            if j < n {
                xs.push(T::of(v));
            } else {
                ys.push(T::of(v));
            }
        }
    }
    let rows = xs.len() / n.max(1);
    LabeledDataset::new(Tensor::matrix(rows, n, xs)?, Tensor::matrix(rows, m, ys)?, T::of(noise))
}

pub fn write_dataset_file<T: Scalar>(ds: &LabeledDataset<T>, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(ds, BufWriter::new(File::create(path)?))
}

pub fn read_dataset_file<T: Scalar>(path: impl AsRef<Path>) -> Result<LabeledDataset<T>> {
    read_dataset(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_exact() {
        let x = Tensor::from_fn(4, 2, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0));
        let y = Tensor::from_fn(4, 1, |i, _| (i as f64).sin());
        let ds = LabeledDataset::new(x, y, 0.05).unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,m,noise_bound\n2,1,0.05\n"));
        let back: LabeledDataset<f64> = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = "n,m,noise_bound\n1,1,0\n0.5,1\n0.7\n";
        match read_dataset::<f64, _>(text.as_bytes()) {
            Err(Error::Format(msg)) => assert!(msg.contains("line 4"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
