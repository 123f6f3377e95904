//! File formats: CSV datasets, TSV edge lists, and atomic output files.
//!
//! * Dataset: comma-separated, header row of node names, one observation
//!   per line, values printed with 17 significant digits.
//! * Edge list: `source<TAB>target<TAB>value`, 1-based nodes, no header.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{Dataset, Edge, WeightedDag};

/// Writes `contents` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn dataset_to_csv(ds: &Dataset) -> String {
    let mut out = ds.names().join(",");
    out.push('\n');
    for row in ds.x().rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    write_atomic(path, dataset_to_csv(ds).as_bytes())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let malformed = |row: Option<usize>, column: Option<usize>, msg: String| Error::MalformedCsv {
        path: path.to_path_buf(),
        row,
        column,
        msg,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(malformed(None, None, "empty file".into())),
        Some(r) => r.map_err(|e| malformed(Some(1), None, e.to_string()))?,
    };
    let names: Vec<String> = header.iter().map(str::to_owned).collect();
    let p = names.len();
    if p < 2 {
        return Err(malformed(
            Some(1),
            None,
            format!("header names {p} node(s), need at least 2"),
        ));
    }

    let mut values = Vec::new();
    let mut n = 0;
    for (idx, record) in records.enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| malformed(Some(line), None, e.to_string()))?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != p {
            return Err(malformed(
                Some(line),
                None,
                format!("expected {p} columns, found {}", record.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                malformed(
                    Some(line),
                    Some(j + 1),
                    format!("non-numeric value {cell:?}"),
                )
            })?;
            if !v.is_finite() {
                return Err(malformed(
                    Some(line),
                    Some(j + 1),
                    format!("non-finite value {cell:?}"),
                ));
            }
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(malformed(None, None, "no data rows".into()));
    }
    let x = Array2::from_shape_vec((n, p), values).expect("row lengths checked");
    Dataset::with_names(x, names).map_err(|e| malformed(None, None, e.to_string()))
}

/// Edge list text; weights use the shortest representation that round-trips.
pub fn edges_to_tsv(edges: &[Edge]) -> String {
    edges
        .iter()
        .map(|e| format!("{}\t{}\t{}\n", e.source + 1, e.target + 1, e.weight))
        .collect()
}

pub fn write_edges(edges: &[Edge], path: &Path) -> Result<()> {
    write_atomic(path, edges_to_tsv(edges).as_bytes())
}

/// Parses an edge list. Node indices must be in `1..=p` when `p` is given;
/// self-loops and repeated pairs are rejected with the offending line number.
pub fn read_edges(path: &Path, p: Option<usize>) -> Result<Vec<Edge>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edges(&text, p).map_err(|(line, msg)| Error::MalformedEdgeList {
        path: path.to_path_buf(),
        line,
        msg,
    })
}

fn parse_edges(text: &str, p: Option<usize>) -> std::result::Result<Vec<Edge>, (usize, String)> {
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if fields.len() != 3 {
            return Err((
                line,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let node = |s: &str| -> std::result::Result<usize, (usize, String)> {
            let v: usize = s
                .parse()
                .map_err(|_| (line, format!("bad node index {s:?}")))?;
            if v == 0 || p.is_some_and(|p| v > p) {
                return Err((line, format!("node index {v} out of range")));
            }
            Ok(v - 1)
        };
        let source = node(fields[0])?;
        let target = node(fields[1])?;
        let weight: f64 = fields[2]
            .parse()
            .map_err(|_| (line, format!("bad numeric value {:?}", fields[2])))?;
        if !weight.is_finite() {
            return Err((line, format!("non-finite value {:?}", fields[2])));
        }
        if source == target {
            return Err((line, format!("self-loop on node {}", source + 1)));
        }
        if !seen.insert((source, target)) {
            return Err((
                line,
                format!("duplicate edge {} -> {}", source + 1, target + 1),
            ));
        }
        edges.push(Edge {
            source,
            target,
            weight,
        });
    }
    Ok(edges)
}

/// Reads a ground-truth edge list over `p` nodes.
pub fn read_truth(path: &Path, p: usize) -> Result<WeightedDag> {
    let edges = read_edges(path, Some(p))?;
    if let Some((i, _)) = edges.iter().enumerate().find(|(_, e)| e.weight == 0.0) {
        return Err(Error::MalformedEdgeList {
            path: path.to_path_buf(),
            line: i + 1,
            msg: "zero weight in ground truth".into(),
        });
    }
    WeightedDag::from_edges(p, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn dataset_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let x = array![
            [0.1, -1.0 / 3.0, 1e-300],
            [std::f64::consts::PI, 2.5e17, -0.0]
        ];
        let ds = Dataset::new(x).unwrap();
        write_dataset(&ds, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back, ds);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("V1,V2,V3\n"));
    }

    #[test]
    fn ragged_row_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "V1,V2\n1,2\n3\n").unwrap();
        match read_dataset(&path) {
            Err(Error::MalformedCsv { row: Some(3), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "V1,V2\n1,2\n3,x\n").unwrap();
        match read_dataset(&path) {
            Err(Error::MalformedCsv {
                row: Some(3),
                column: Some(2),
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_missing_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        fs::write(&path, "").unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(Error::MalformedCsv { .. })
        ));
        fs::write(&path, "V1,V2\n").unwrap();
        assert!(matches!(
            read_dataset(&path),
            Err(Error::MalformedCsv { .. })
        ));
        let missing = dir.path().join("nope.csv");
        assert!(matches!(read_dataset(&missing), Err(Error::Io { .. })));
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        assert_eq!(
            parse_edges("1\t2\t0.5\n3\t3\t0.5\n", None).unwrap_err().0,
            2
        );
        assert_eq!(
            parse_edges("1\t2\t0.5\n\n1\t2\t0.1\n", None).unwrap_err().0,
            3
        );
        assert_eq!(parse_edges("1\t5\t0.5\n", Some(4)).unwrap_err().0, 1);
        assert_eq!(parse_edges("0\t1\t0.5\n", None).unwrap_err().0, 1);
        assert_eq!(parse_edges("1 2 0.5\n", None).unwrap_err().0, 1);
        let ok = parse_edges("1\t2\t0.5\n2\t3\t-1e-3\n", Some(3)).unwrap();
        assert_eq!(ok.len(), 2);
        assert_eq!((ok[1].source, ok[1].target), (1, 2));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.tsv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
