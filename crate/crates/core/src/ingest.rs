//! Trade flows to binary matrices, plus matrix and series file formats.
//!
//! Formats:
//! - flows: CSV with header `exporter,product,value`; duplicate pairs are summed.
//! - dense matrix: CSV of `0`/`1` with an optional header row of product
//!   labels and an optional first column of country labels.
//! - sparse matrix: one `country,product` pair per line. Optional `#rows`
//!   and `#cols` lines declare the label order (and lines without any ones);
//!   other `#` lines and blank lines are ignored.
//! - trajectory: CSV `iteration,entity_id,log10_fitness`.
//! - crossing counts: CSV `iteration,crossings`.
//! - heatmap: CSV `row_rank,col_rank,value`.
//!
//! Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::engine::{RankAxis, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::OrderedMatrix;
use crate::matrix::{BipartiteMatrix, Sanitation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct FlowRecord {
    pub exporter: String,
    pub product: String,
    pub value: f64,
}

impl FlowRecord {
    pub fn new(exporter: impl Into<String>, product: impl Into<String>, value: f64) -> Self {
        Self {
            exporter: exporter.into(),
            product: product.into(),
            value,
        }
    }
}

/// Revealed comparative advantage, row-major, with labels in first-seen order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RcaMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// Aggregated flows `X`, same layout as `values`.
    pub flows: Vec<f64>,
    pub sanitation: RcaSanitation,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
pub struct RcaSanitation {
    /// Countries with zero total exports; their RCA is set to 0.
    pub zero_rows: Vec<String>,
    /// Products with zero world exports; their RCA is set to 0.
    pub zero_cols: Vec<String>,
    /// Records merged into an earlier record for the same pair.
    pub duplicates_merged: usize,
}

impl RcaMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }
}

/// Balassa index `(X_cp / X_c) / (X_p / X)` over aggregated flows.
pub fn compute_rca(flows: &[FlowRecord]) -> Result<RcaMatrix> {
    if flows.is_empty() {
        return Err(Error::NoFlows);
    }
    let mut rows: IndexMap<&str, ()> = IndexMap::new();
    let mut cols: IndexMap<&str, ()> = IndexMap::new();
    let mut cells: IndexMap<(usize, usize), f64> = IndexMap::new();
    let mut duplicates = 0;
    for f in flows {
        if !(f.value.is_finite() && f.value >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "flow {}->{} has value {}",
                f.exporter, f.product, f.value
            )));
        }
        let r = rows.insert_full(&f.exporter, ()).0;
        let c = cols.insert_full(&f.product, ()).0;
        match cells.get_mut(&(r, c)) {
            Some(v) => {
                *v += f.value;
                duplicates += 1;
            }
            None => {
                cells.insert((r, c), f.value);
            }
        }
    }
    let (n_rows, n_cols) = (rows.len(), cols.len());
    let mut x = vec![0.0; n_rows * n_cols];
    for (&(r, c), &v) in &cells {
        x[r * n_cols + c] = v;
    }
    let row_tot: Vec<f64> = (0..n_rows).map(|r| x[r * n_cols..(r + 1) * n_cols].iter().sum()).collect();
    let col_tot: Vec<f64> = (0..n_cols).map(|c| (0..n_rows).map(|r| x[r * n_cols + c]).sum()).collect();
    let total: f64 = row_tot.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroFlows);
    }
    let mut values = vec![0.0; n_rows * n_cols];
    for r in 0..n_rows {
        for c in 0..n_cols {
            if row_tot[r] > 0.0 && col_tot[c] > 0.0 {
                values[r * n_cols + c] = (x[r * n_cols + c] / row_tot[r]) / (col_tot[c] / total);
            }
        }
    }
    let row_labels: Vec<String> = rows.keys().map(|s| s.to_string()).collect();
    let col_labels: Vec<String> = cols.keys().map(|s| s.to_string()).collect();
    let sanitation = RcaSanitation {
        zero_rows: (0..n_rows).filter(|&r| row_tot[r] == 0.0).map(|r| row_labels[r].clone()).collect(),
        zero_cols: (0..n_cols).filter(|&c| col_tot[c] == 0.0).map(|c| col_labels[c].clone()).collect(),
        duplicates_merged: duplicates,
    };
    Ok(RcaMatrix {
        n_rows,
        n_cols,
        values,
        row_labels,
        col_labels,
        flows: x,
        sanitation,
    })
}

/// How [`binarize`] compares RCA with the threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `RCA >= threshold`
    #[default]
    AtLeast,
    /// `RCA > threshold`
    Above,
}

/// `M_cp = 1` where RCA passes the threshold. The sanitation report lists
/// the all-zero lines, which must be dropped before iterating.
pub fn binarize(rca: &RcaMatrix, threshold: f64, rule: ThresholdRule) -> Result<(BipartiteMatrix, Sanitation)> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::InvalidParams(format!("RCA threshold must be positive, got {threshold}")));
    }
    let cells = rca
        .values
        .iter()
        .map(|&v| match rule {
            ThresholdRule::AtLeast => v >= threshold,
            ThresholdRule::Above => v > threshold,
        })
        .collect();
    let m = BipartiteMatrix::from_cells(rca.n_rows, rca.n_cols, cells)?
        .with_labels(rca.row_labels.clone(), rca.col_labels.clone())?;
    let report = m.empty_lines();
    Ok((m, report))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::Deserialize { err, .. } => Error::Parse {
            line,
            msg: err.to_string(),
        },
        other => Error::Parse {
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Reads `exporter,product,value` records (header required).
pub fn read_flows<R: Read>(reader: R) -> Result<Vec<FlowRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let expected = ["exporter", "product", "value"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header exporter,product,value, found {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for raw in rdr.records() {
        let raw = raw.map_err(csv_error)?;
        let line = raw.position().map_or(0, |p| p.line() as usize);
        let rec: FlowRecord = raw.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if !(rec.value.is_finite() && rec.value >= 0.0) {
            return Err(Error::Parse {
                line,
                msg: format!("flow value must be finite and non-negative, got {}", rec.value),
            });
        }
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::NoFlows);
    }
    Ok(out)
}

pub fn load_flows(path: &Path) -> Result<Vec<FlowRecord>> {
    read_flows(File::open(path)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[cfg_attr(feature = "schema", derive(schemars::JsonSchema))]
#[serde(rename_all = "snake_case")]
pub enum MatrixFormat {
    Dense,
    Sparse,
}

impl MatrixFormat {
    /// `.csv` is dense; anything else is a sparse pair list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::Dense,
            _ => Self::Sparse,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Self::Dense),
            "sparse" => Ok(Self::Sparse),
            other => Err(Error::InvalidParams(format!("unknown matrix format {other:?}"))),
        }
    }
}

fn is_number(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

/// Reads a dense 0/1 CSV. A first row containing any non-numeric field is a
/// header; a first column containing any non-numeric field holds labels.
pub fn read_dense<R: Read>(reader: R) -> Result<BipartiteMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(records.len() + 1, |p| p.line() as usize);
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push((line, fields));
    }
    if records.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let header = if records[0].1.iter().any(|f| !is_number(f)) {
        Some(records.remove(0))
    } else {
        None
    };
    if records.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let labelled = records.iter().any(|(_, f)| !is_number(&f[0]));
    let skip = usize::from(labelled);
    let n_cols = records[0].1.len() - skip;
    if n_cols == 0 {
        return Err(Error::EmptyMatrix);
    }

    let mut cells = Vec::with_capacity(records.len() * n_cols);
    let mut row_labels = Vec::new();
    for (i, (line, fields)) in records.iter().enumerate() {
        if fields.len() != n_cols + skip {
            return Err(Error::Parse {
                line: *line,
                msg: format!("expected {} fields, found {}", n_cols + skip, fields.len()),
            });
        }
        row_labels.push(if labelled { fields[0].clone() } else { format!("c{}", i + 1) });
        for (j, f) in fields[skip..].iter().enumerate() {
            cells.push(match f.as_str() {
                "1" => true,
                "0" => false,
                other => {
                    return Err(Error::Parse {
                        line: *line,
                        msg: format!("cell in column {} holds {other:?}, expected 0 or 1", j + 1),
                    })
                }
            });
        }
    }
    let col_labels = match header {
        None => (1..=n_cols).map(|j| format!("p{j}")).collect(),
        Some((line, fields)) => {
            // The header may or may not carry a corner cell above the labels.
            let fields = if fields.len() == n_cols + 1 {
                fields[1..].to_vec()
            } else if fields.len() == n_cols {
                fields
            } else {
                return Err(Error::Parse {
                    line,
                    msg: format!("header has {} fields for {n_cols} columns", fields.len()),
                });
            };
            fields
        }
    };
    BipartiteMatrix::from_cells(records.len(), n_cols, cells)?.with_labels(row_labels, col_labels)
}

/// Dense CSV with a header row (empty corner) and a label column.
pub fn write_dense<W: Write>(m: &BipartiteMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![String::new()];
    header.extend(m.col_labels().iter().cloned());
    w.write_record(&header).map_err(csv_error)?;
    for r in 0..m.n_rows() {
        let mut rec = vec![m.row_labels()[r].clone()];
        rec.extend(m.row(r).iter().map(|&v| if v { "1" } else { "0" }.to_string()));
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let (a, b) = line.split_once(',')?;
    let (a, b) = (a.trim(), b.trim());
    (!a.is_empty() && !b.is_empty() && !b.contains(',')).then_some((a, b))
}

fn declared(rest: &str) -> Vec<String> {
    rest.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

/// Reads a sparse `country,product` pair list. Duplicate pairs are harmless.
pub fn read_sparse<R: Read>(reader: R) -> Result<BipartiteMatrix> {
    let mut rows: IndexMap<String, ()> = IndexMap::new();
    let mut cols: IndexMap<String, ()> = IndexMap::new();
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let lineno = i + 1;
        if let Some(rest) = line.strip_prefix("#rows") {
            for l in declared(rest) {
                rows.insert(l, ());
            }
        } else if let Some(rest) = line.strip_prefix("#cols") {
            for l in declared(rest) {
                cols.insert(l, ());
            }
        } else if line.is_empty() || line.starts_with('#') {
            continue;
        } else {
            let (a, b) = split_pair(line).ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected `country,product`, found {line:?}"),
            })?;
            let r = rows.insert_full(a.to_string(), ()).0;
            let c = cols.insert_full(b.to_string(), ()).0;
            pairs.push((r, c));
        }
    }
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let mut m = BipartiteMatrix::from_cells(rows.len(), cols.len(), vec![false; rows.len() * cols.len()])?
        .with_labels(rows.into_keys().collect(), cols.into_keys().collect())?;
    for (r, c) in pairs {
        m.set(r, c, true);
    }
    Ok(m)
}

/// Sparse pair list preceded by `#rows` / `#cols` declarations, so label
/// order and empty lines survive a round trip.
pub fn write_sparse<W: Write>(m: &BipartiteMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "#rows {}", m.row_labels().join(","))?;
    writeln!(w, "#cols {}", m.col_labels().join(","))?;
    for r in 0..m.n_rows() {
        for c in 0..m.n_cols() {
            if m.get(r, c) {
                writeln!(w, "{},{}", m.row_labels()[r], m.col_labels()[c])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_matrix(path: &Path, format: MatrixFormat) -> Result<BipartiteMatrix> {
    let file = File::open(path)?;
    match format {
        MatrixFormat::Dense => read_dense(file),
        MatrixFormat::Sparse => read_sparse(file),
    }
}

pub fn save_matrix(m: &BipartiteMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    let file = File::create(path)?;
    match format {
        MatrixFormat::Dense => write_dense(m, file),
        MatrixFormat::Sparse => write_sparse(m, file),
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Long-format trajectory: one line per recorded iteration and entity.
pub fn write_trajectory<W: Write>(traj: &Trajectory, labels: &[String], axis: RankAxis, writer: W) -> Result<()> {
    let series = match axis {
        RankAxis::Countries => &traj.ln_fitness,
        RankAxis::Products => &traj.ln_complexity,
    };
    let value_name = match axis {
        RankAxis::Countries => "log10_fitness",
        RankAxis::Products => "log10_complexity",
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iteration", "entity_id", value_name]).map_err(csv_error)?;
    for (n, row) in traj.iterations.iter().zip(series) {
        for (label, &ln) in labels.iter().zip(row) {
            w.write_record([n.to_string(), label.clone(), fmt_f64(ln / std::f64::consts::LN_10)])
                .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_crossing_counts<W: Write>(counts: &[(u64, usize)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["iteration", "crossings"]).map_err(csv_error)?;
    for (n, k) in counts {
        w.write_record([n.to_string(), k.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Every cell of the ordered matrix, rank 0 at the top-left.
pub fn write_heatmap<W: Write>(om: &OrderedMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row_rank", "col_rank", "value"]).map_err(csv_error)?;
    for r in 0..om.matrix.n_rows() {
        for c in 0..om.matrix.n_cols() {
            w.write_record([r.to_string(), c.to_string(), u8::from(om.matrix.get(r, c)).to_string()])
                .map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_records() -> Vec<FlowRecord> {
        vec![
            FlowRecord::new("c1", "p1", 10.0),
            FlowRecord::new("c1", "p2", 10.0),
            FlowRecord::new("c2", "p1", 20.0),
        ]
    }

    #[test]
    fn balassa_hand_example() {
        let rca = compute_rca(&three_records()).unwrap();
        assert!((rca.get(0, 0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((rca.get(0, 1) - 2.0).abs() < 1e-12);
        assert!((rca.get(1, 0) - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(rca.get(1, 1), 0.0);
        let (m, report) = binarize(&rca, 1.0, ThresholdRule::AtLeast).unwrap();
        assert_eq!(m.to_pattern(), "01 10");
        assert!(report.is_clean());
    }

    #[test]
    fn single_record_and_uniform_flows() {
        let rca = compute_rca(&[FlowRecord::new("a", "x", 3.5)]).unwrap();
        assert_eq!(rca.values, vec![1.0]);
        let mut flows = Vec::new();
        for c in 0..4 {
            for p in 0..3 {
                flows.push(FlowRecord::new(format!("c{c}"), format!("p{p}"), 7.0));
            }
        }
        let rca = compute_rca(&flows).unwrap();
        assert!(rca.values.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn thresholds_at_the_extremes() {
        let rca = compute_rca(&three_records()).unwrap();
        let (m, _) = binarize(&rca, f64::MIN_POSITIVE, ThresholdRule::AtLeast).unwrap();
        assert_eq!(m.to_pattern(), "11 10");
        let (m, report) = binarize(&rca, 10.0, ThresholdRule::AtLeast).unwrap();
        assert_eq!(m.ones(), 0);
        assert_eq!(report.empty_rows.len(), 2);
        assert_eq!(report.empty_cols.len(), 2);
        assert!(binarize(&rca, 0.0, ThresholdRule::AtLeast).is_err());

        let flat = compute_rca(&[FlowRecord::new("a", "x", 1.0), FlowRecord::new("b", "x", 1.0)]).unwrap();
        assert_eq!(binarize(&flat, 1.0, ThresholdRule::AtLeast).unwrap().0.ones(), 2);
        assert_eq!(binarize(&flat, 1.0, ThresholdRule::Above).unwrap().0.ones(), 0);
    }

    #[test]
    fn flows_errors() {
        assert!(matches!(compute_rca(&[]), Err(Error::NoFlows)));
        assert!(matches!(compute_rca(&[FlowRecord::new("a", "x", 0.0)]), Err(Error::ZeroFlows)));
        let zero_row = compute_rca(&[FlowRecord::new("a", "x", 1.0), FlowRecord::new("b", "y", 0.0)]).unwrap();
        assert_eq!(zero_row.sanitation.zero_rows, vec!["b"]);
        assert_eq!(zero_row.sanitation.zero_cols, vec!["y"]);
    }

    #[test]
    fn flows_csv_sums_duplicates() {
        let text = "exporter,product,value\nc1,p1,10\nc1,p2,10\nc2,p1,5\nc2,p1,15\n";
        let flows = read_flows(text.as_bytes()).unwrap();
        let rca = compute_rca(&flows).unwrap();
        assert_eq!(rca.sanitation.duplicates_merged, 1);
        assert!((rca.get(1, 0) - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn flows_csv_errors_carry_lines() {
        let err = read_flows("exporter,product,value\nc1,p1,10\nc1,p2,abc\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_flows("exporter,product,value\nc1,p1,-1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(matches!(read_flows("a,b\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_flows("exporter,product,value\n".as_bytes()), Err(Error::NoFlows)));
    }

    #[test]
    fn dense_variants() {
        let c = "1,1,1,1,1\n1,1,1,1,1\n1,1,1,1,0\n1,1,1,0,0\n1,1,0,0,0\n";
        let m = read_dense(c.as_bytes()).unwrap();
        assert_eq!(m.to_pattern(), "11111 11111 11110 11100 11000");

        let labelled = ",x,y\na,1,0\nb,0,1\n";
        let m = read_dense(labelled.as_bytes()).unwrap();
        assert_eq!(m.row_labels(), &["a", "b"]);
        assert_eq!(m.col_labels(), &["x", "y"]);

        let header_only = "x,y\n1,0\n0,1\n";
        let m = read_dense(header_only.as_bytes()).unwrap();
        assert_eq!(m.col_labels(), &["x", "y"]);
        assert_eq!(m.row_labels(), &["c1", "c2"]);
    }

    #[test]
    fn dense_errors() {
        assert!(matches!(read_dense("".as_bytes()), Err(Error::EmptyMatrix)));
        let err = read_dense("1,0\n0,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = read_dense("1,0\n0,1,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn sparse_reading() {
        let m = read_sparse("# comment\na,x\na,y\nb,x\na,x\n\n".as_bytes()).unwrap();
        assert_eq!(m.to_pattern(), "11 10");
        assert!(matches!(read_sparse("".as_bytes()), Err(Error::EmptyMatrix)));
        assert!(matches!(read_sparse("a,x\nbad\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn trajectory_csv_layout() {
        let traj = Trajectory {
            iterations: vec![0, 1],
            ln_fitness: vec![vec![0.0, 0.0], vec![1.5f64.ln(), 0.5f64.ln()]],
            ..Trajectory::default()
        };
        let mut buf = Vec::new();
        write_trajectory(&traj, &["c1".into(), "c2".into()], RankAxis::Countries, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,entity_id,log10_fitness");
        assert_eq!(lines.len(), 5);
        let v: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 1.5f64.log10()).abs() < 1e-15);
        assert_eq!(lines[3].split(',').nth(2).unwrap().split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    }
}
