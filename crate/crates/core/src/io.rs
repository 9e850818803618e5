//! Text formats read by the command-line front end.
//!
//! * matrices: CSV, one row per line, no header, `.` decimal separator;
//! * vectors: a single CSV row or a single CSV column;
//! * edge lists: `tail head weight prob [block]` per line, `#` comments;
//! * noise: a single CSV row of variances or a full CSV covariance matrix.

use std::path::Path;

use crate::doptimal::Noise;
use crate::error::{Error, Result};
use crate::graphs::{Edge, WeightedGraph};
use crate::linalg::Matrix;

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        message: message.into(),
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Parses a headerless CSV matrix. Ragged rows are rejected.
pub fn parse_matrix_csv(text: &str, source: &str) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cols = None;
    let mut rows = 0;
    let mut data = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_err(
                    source,
                    line,
                    format!("row has {} fields, expected {c}", record.len()),
                ))
            }
            _ => {}
        }
        for field in record.iter() {
            let x: f64 = field
                .parse()
                .map_err(|_| parse_err(source, line, format!("not a number: {field:?}")))?;
            if !x.is_finite() {
                return Err(parse_err(
                    source,
                    line,
                    format!("non-finite value {field:?}"),
                ));
            }
            data.push(x);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(source, 1, "no data"))?;
    Matrix::new(rows, cols, data)
}

/// Parses a vector stored as one CSV row or one CSV column.
pub fn parse_vector_csv(text: &str, source: &str) -> Result<Vec<f64>> {
    let m = parse_matrix_csv(text, source)?;
    if m.rows() == 1 || m.cols() == 1 {
        Ok(m.as_slice().to_vec())
    } else {
        Err(parse_err(
            source,
            1,
            format!(
                "expected a single row or column, got {}x{}",
                m.rows(),
                m.cols()
            ),
        ))
    }
}

/// Parses a noise file for `sensors` sensors: one row of variances, or a full
/// `sensors x sensors` covariance.
pub fn parse_noise_csv(text: &str, source: &str, sensors: usize) -> Result<Noise> {
    let m = parse_matrix_csv(text, source)?;
    if m.rows() == 1 && m.cols() == sensors {
        Ok(Noise::Diagonal(m.as_slice().to_vec()))
    } else if m.rows() == sensors && m.cols() == sensors {
        Ok(Noise::Full(m))
    } else {
        Err(Error::dim(format!(
            "{source}: noise is {}x{}, expected 1x{sensors} or {sensors}x{sensors}",
            m.rows(),
            m.cols()
        )))
    }
}

/// Parses a whitespace-separated edge list `tail head weight prob [block]`.
pub fn parse_edge_list(text: &str, source: &str) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut blocks = Vec::new();
    let mut has_blocks = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 4 && fields.len() != 5 {
            return Err(parse_err(
                source,
                line,
                format!(
                    "expected `tail head weight prob [block]`, got {} fields",
                    fields.len()
                ),
            ));
        }
        let with_block = fields.len() == 5;
        match has_blocks {
            None => has_blocks = Some(with_block),
            Some(b) if b != with_block => {
                return Err(parse_err(
                    source,
                    line,
                    "block column must be present on every edge or on none",
                ))
            }
            _ => {}
        }
        let vertex = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| parse_err(source, line, format!("bad vertex id {s:?}")))
        };
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(source, line, format!("bad number {s:?}")))
        };
        let (tail, head) = (vertex(fields[0])?, vertex(fields[1])?);
        let (weight, prob) = (real(fields[2])?, real(fields[3])?);
        if tail == head {
            return Err(parse_err(
                source,
                line,
                format!("self-loop at vertex {tail}"),
            ));
        }
        if weight <= 0.0 {
            return Err(parse_err(
                source,
                line,
                format!("weight {weight} is not positive"),
            ));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(parse_err(
                source,
                line,
                format!("probability {prob} outside [0, 1]"),
            ));
        }
        if with_block {
            blocks.push(
                fields[4].parse::<usize>().map_err(|_| {
                    parse_err(source, line, format!("bad block id {:?}", fields[4]))
                })?,
            );
        }
        edges.push(Edge::new(tail, head, weight, prob));
    }
    if edges.is_empty() {
        return Err(parse_err(source, 1, "no edges"));
    }
    let vertex_count = edges.iter().map(|e| e.tail.max(e.head)).max().unwrap_or(0) + 1;
    let g = WeightedGraph::new(vertex_count, edges)?;
    if has_blocks == Some(true) {
        g.with_blocks(&blocks)
    } else {
        Ok(g)
    }
}

pub fn load_matrix(path: &Path) -> Result<Matrix> {
    parse_matrix_csv(&read_to_string(path)?, &path.display().to_string())
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector_csv(&read_to_string(path)?, &path.display().to_string())
}

pub fn load_noise(path: &Path, sensors: usize) -> Result<Noise> {
    parse_noise_csv(&read_to_string(path)?, &path.display().to_string(), sensors)
}

pub fn load_edge_list(path: &Path) -> Result<WeightedGraph> {
    parse_edge_list(&read_to_string(path)?, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_csv() {
        let m = parse_matrix_csv("1, 2.5\n-3,4e-1\n", "m").unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.5], [-3.0, 0.4]]).unwrap());
        match parse_matrix_csv("1,2\n3\n", "m") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_matrix_csv("1,x\n", "m"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_matrix_csv("", "m"),
            Err(Error::Parse { .. })
        ));
        assert!(parse_matrix_csv("1,NaN\n", "m").is_err());
    }

    #[test]
    fn vector_csv_row_or_column() {
        assert_eq!(
            parse_vector_csv("0.5,0.25\n", "p").unwrap(),
            vec![0.5, 0.25]
        );
        assert_eq!(
            parse_vector_csv("0.5\n0.25\n", "p").unwrap(),
            vec![0.5, 0.25]
        );
        assert!(parse_vector_csv("1,2\n3,4\n", "p").is_err());
    }

    #[test]
    fn noise_shapes() {
        assert_eq!(
            parse_noise_csv("1,2,3\n", "n", 3).unwrap(),
            Noise::Diagonal(vec![1.0, 2.0, 3.0])
        );
        assert!(matches!(
            parse_noise_csv("1,0\n0,1\n", "n", 2).unwrap(),
            Noise::Full(_)
        ));
        assert!(parse_noise_csv("1,2\n", "n", 3).is_err());
    }

    #[test]
    fn edge_list() {
        let g =
            parse_edge_list("# K3\n0 1 1 0.5\n1 2 1 0.5 # comment\n\n0 2 1 0.5\n", "g").unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 3));
        assert!(!g.has_blocks());

        let g = parse_edge_list("0 1 1 0.5 0\n1 2 1 0.5 0\n0 2 1 0.5 1\n", "g").unwrap();
        assert_eq!(g.block_count(), Some(2));

        for (bad, line) in [
            ("0 1 1 0.5 0\n1 2 1 0.5\n", 2),
            ("0 1 1\n", 1),
            ("0 0 1 0.5\n", 1),
            ("0 1 -1 0.5\n", 1),
            ("0 1 1 1.5\n", 1),
            ("0 a 1 0.5\n", 1),
            ("# only a comment\n", 1),
        ] {
            match parse_edge_list(bad, "g") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("{bad:?}: {other:?}"),
            }
        }
    }
}
