//! File formats: the `LGG1` binary matrix container and the CSV
//! side-car formats (edge lists, label columns, partial labels,
//! pseudo-labels, index pairs).
//!
//! Matrix inputs are auto-detected: files starting with the 4-byte magic
//! `LGG1` parse as binary (`rows: u32 LE`, `cols: u32 LE`, then
//! `rows * cols` IEEE-754 f64 LE values, row-major); anything else
//! parses as headerless numeric CSV.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use lgg_core::denoise::{PartialLabels, PseudoLabelResult};
use lgg_core::SparseGraph;

use crate::error::{CliError, Result};

pub const MATRIX_MAGIC: [u8; 4] = *b"LGG1";

/// Writes a matrix in the binary container, bit-exact.
pub fn write_matrix(path: &Path, values: &Array2<f64>) -> Result<()> {
    let rows = u32::try_from(values.nrows())
        .map_err(|_| CliError::Parameter("matrix has too many rows for the container".into()))?;
    let cols = u32::try_from(values.ncols())
        .map_err(|_| CliError::Parameter("matrix has too many columns for the container".into()))?;
    let mut bytes = Vec::with_capacity(12 + values.len() * 8);
    bytes.extend_from_slice(&MATRIX_MAGIC);
    bytes.extend_from_slice(&rows.to_le_bytes());
    bytes.extend_from_slice(&cols.to_le_bytes());
    for row in values.rows() {
        for &v in row {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a matrix, auto-detecting binary container vs numeric CSV.
pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    if bytes.starts_with(&MATRIX_MAGIC) {
        return parse_binary_matrix(&bytes, path);
    }
    parse_csv_matrix(&bytes, path)
}

fn parse_binary_matrix(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    if bytes.len() < 12 {
        return Err(CliError::input_at(
            format!(
                "{}: binary matrix header truncated ({} bytes, need 12)",
                path.display(),
                bytes.len()
            ),
            bytes.len() as u64,
        ));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| CliError::input_at("matrix dimensions overflow", 4))?;
    let payload = &bytes[12..];
    if payload.len() != expected {
        return Err(CliError::input_at(
            format!(
                "{}: payload is {} bytes but {rows}x{cols} needs {expected}",
                path.display(),
                payload.len()
            ),
            12,
        ));
    }
    let mut values = Vec::with_capacity(rows * cols);
    for chunk in payload.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Array2::from_shape_vec((rows, cols), values)
        .map_err(|e| CliError::input(format!("{}: bad shape: {e}", path.display())))
}

fn parse_csv_matrix(bytes: &[u8], path: &Path) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let offset = record.position().map(|p| p.byte()).unwrap_or(0);
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                CliError::input_at(
                    format!("{}: not a number: {field:?}", path.display()),
                    offset,
                )
            })?;
            if !v.is_finite() {
                return Err(CliError::input_at(
                    format!("{}: non-finite value {v}", path.display()),
                    offset,
                ));
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input_at(
            format!("{}: no rows", path.display()),
            0,
        ));
    }
    let cols = rows[0].len();
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), cols), flat)
        .map_err(|e| CliError::input(format!("{}: bad shape: {e}", path.display())))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let offset = e.position().map(|p| p.byte()).unwrap_or(0);
    CliError::input_at(format!("{}: {e}", path.display()), offset)
}

/// Reads a single-column matrix of nonnegative integers (class labels).
pub fn read_label_column(path: &Path) -> Result<Vec<usize>> {
    let m = read_matrix(path)?;
    if m.ncols() != 1 {
        return Err(CliError::input(format!(
            "{}: labels must be a single column, got {} columns",
            path.display(),
            m.ncols()
        )));
    }
    m.column(0)
        .iter()
        .map(|&v| {
            if v < 0.0 || v.fract() != 0.0 {
                Err(CliError::input(format!(
                    "{}: label {v} is not a nonnegative integer",
                    path.display()
                )))
            } else {
                Ok(v as usize)
            }
        })
        .collect()
}

/// Writes the edge list as CSV `i,j,w`, one undirected edge per line,
/// sorted by `(i, j)`.
pub fn write_edge_csv(path: &Path, graph: &SparseGraph) -> Result<()> {
    let mut out = String::new();
    for e in graph.edges() {
        out.push_str(&format!("{},{},{:?}\n", e.i, e.j, e.weight));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads an `i,j,w` edge CSV into a graph over `n` vertices.
pub fn read_edge_csv(path: &Path, n: usize) -> Result<SparseGraph> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let offset = record.position().map(|p| p.byte()).unwrap_or(0);
        if record.len() != 3 {
            return Err(CliError::input_at(
                format!(
                    "{}: edge rows need 3 fields i,j,w, got {}",
                    path.display(),
                    record.len()
                ),
                offset,
            ));
        }
        let i: usize = parse_index(&record[0], path, offset)?;
        let j: usize = parse_index(&record[1], path, offset)?;
        let w: f64 = record[2].parse().map_err(|_| {
            CliError::input_at(
                format!("{}: not a number: {:?}", path.display(), &record[2]),
                offset,
            )
        })?;
        edges.push((i, j, w));
    }
    SparseGraph::new(n, edges).map_err(CliError::from)
}

fn parse_index(field: &str, path: &Path, offset: u64) -> Result<usize> {
    field.parse().map_err(|_| {
        CliError::input_at(
            format!("{}: not an index: {field:?}", path.display()),
            offset,
        )
    })
}

/// Reads a partial-label CSV of `index,class` rows.
///
/// `num_classes` defaults to one more than the largest class seen.
pub fn read_partial_labels(
    path: &Path,
    n: usize,
    num_classes: Option<usize>,
) -> Result<PartialLabels> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut labeled = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let offset = record.position().map(|p| p.byte()).unwrap_or(0);
        if record.len() != 2 {
            return Err(CliError::input_at(
                format!(
                    "{}: partial labels need 2 fields index,class, got {}",
                    path.display(),
                    record.len()
                ),
                offset,
            ));
        }
        let i = parse_index(&record[0], path, offset)?;
        let c = parse_index(&record[1], path, offset)?;
        labeled.push((i, c));
    }
    let c = num_classes
        .unwrap_or_else(|| labeled.iter().map(|&(_, c)| c + 1).max().unwrap_or(1));
    PartialLabels::new(n, labeled, c).map_err(CliError::from)
}

/// Writes the pseudo-label CSV `index,class,omega`, one row per sample.
pub fn write_pseudo_csv(path: &Path, result: &PseudoLabelResult) -> Result<()> {
    let mut out = String::new();
    for (i, (&label, &omega)) in result
        .pseudo_labels
        .iter()
        .zip(result.omega.iter())
        .enumerate()
    {
        out.push_str(&format!("{i},{label},{omega:?}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads an `i,j` pair CSV (affinity targets).
pub fn read_pairs_csv(path: &Path) -> Result<Vec<(usize, usize)>> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut pairs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let offset = record.position().map(|p| p.byte()).unwrap_or(0);
        if record.len() != 2 {
            return Err(CliError::input_at(
                format!(
                    "{}: pair rows need 2 fields i,j, got {}",
                    path.display(),
                    record.len()
                ),
                offset,
            ));
        }
        pairs.push((
            parse_index(&record[0], path, offset)?,
            parse_index(&record[1], path, offset)?,
        ));
    }
    Ok(pairs)
}

/// Reads a flat vector from a matrix file (single row or single column).
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.ncols() == 1 || m.nrows() == 1 {
        Ok(m.iter().copied().collect())
    } else {
        Err(CliError::input(format!(
            "{}: expected a vector, got {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )))
    }
}
