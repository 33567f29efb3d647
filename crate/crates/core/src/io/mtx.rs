//! Matrix Market coordinate files as weighted directed graphs.
//!
//! Entry `(i, j, w)` becomes the edge `i → j` with weight `|w|`. Diagonal and
//! zero entries are skipped, duplicates are summed, and symmetric files are
//! expanded to both orientations.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Edge};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(Field, Symmetry)> {
    let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_error(1, "expected a %%MatrixMarket header with five fields"));
    }
    if tokens[1] != "matrix" || tokens[2] != "coordinate" {
        return Err(parse_error(1, "only 'matrix coordinate' files are supported"));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_error(1, format!("unsupported field type '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_error(1, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

fn parse_index(token: Option<&str>, bound: usize, line: usize) -> Result<usize> {
    let token = token.ok_or_else(|| parse_error(line, "missing index"))?;
    let i: usize = token
        .parse()
        .map_err(|_| parse_error(line, format!("invalid index '{token}'")))?;
    if i == 0 || i > bound {
        return Err(parse_error(line, format!("index {i} outside 1..={bound}")));
    }
    Ok(i - 1)
}

pub fn read_matrix_market_from<R: BufRead>(reader: R) -> Result<DirectedGraph> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_error(1, "empty file"))?;
    let (field, symmetry) = parse_header(&header?)?;

    let mut size: Option<(usize, usize)> = None;
    let mut declared = 0usize;
    let mut seen = 0usize;
    let mut negatives = 0usize;
    let mut edges = Vec::new();
    let mut last_line = 1;
    for (no, line) in lines {
        let line = line?;
        last_line = no;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        let mut tok = text.split_whitespace();
        let Some((rows, cols)) = size else {
            let mut dims = [0usize; 3];
            for d in dims.iter_mut() {
                let t = tok.next().ok_or_else(|| parse_error(no, "size line needs three integers"))?;
                *d = t
                    .parse()
                    .map_err(|_| parse_error(no, format!("invalid size field '{t}'")))?;
            }
            if tok.next().is_some() {
                return Err(parse_error(no, "size line needs three integers"));
            }
            if dims[0] != dims[1] {
                return Err(parse_error(no, format!("matrix is {}x{}, not square", dims[0], dims[1])));
            }
            size = Some((dims[0], dims[1]));
            declared = dims[2];
            continue;
        };
        let i = parse_index(tok.next(), rows, no)?;
        let j = parse_index(tok.next(), cols, no)?;
        let w = match field {
            Field::Pattern => 1.0,
            Field::Real | Field::Integer => {
                let t = tok.next().ok_or_else(|| parse_error(no, "missing value"))?;
                let v: f64 = t
                    .parse()
                    .map_err(|_| parse_error(no, format!("invalid value '{t}'")))?;
                if !v.is_finite() {
                    return Err(parse_error(no, format!("non-finite value '{t}'")));
                }
                if field == Field::Integer && v.fract() != 0.0 {
                    return Err(parse_error(no, format!("non-integer value '{t}'")));
                }
                v
            }
        };
        if tok.next().is_some() {
            return Err(parse_error(no, "trailing fields"));
        }
        seen += 1;
        if seen > declared {
            return Err(parse_error(no, format!("more than the declared {declared} entries")));
        }
        if w < 0.0 {
            negatives += 1;
        }
        if i == j || w == 0.0 {
            continue;
        }
        edges.push(Edge::new(i, j, w.abs()));
        if symmetry != Symmetry::General {
            edges.push(Edge::new(j, i, w.abs()));
        }
    }
    let Some((n, _)) = size else {
        return Err(parse_error(1, "missing size line"));
    };
    if seen != declared {
        return Err(parse_error(last_line, format!("declared {declared} entries, found {seen}")));
    }
    if negatives > 0 {
        warn!("{negatives} negative entries replaced by their absolute values");
    }
    DirectedGraph::new(n, edges)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DirectedGraph> {
    read_matrix_market_from(BufReader::new(File::open(path)?))
}

/// Writes `g` as `coordinate real general`, 1-based, sorted by (row, column).
pub fn write_matrix_market_to<W: Write>(g: &DirectedGraph, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", g.node_count(), g.node_count(), g.edge_count())?;
    for e in g.edges() {
        writeln!(out, "{} {} {:.16e}", e.tail + 1, e.head + 1, e.weight)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_matrix_market(g: &DirectedGraph, path: impl AsRef<Path>) -> Result<()> {
    write_matrix_market_to(g, BufWriter::new(File::create(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<DirectedGraph> {
        read_matrix_market_from(s.as_bytes())
    }

    #[test]
    fn reads_general_real() {
        let g = read("%%MatrixMarket matrix coordinate real general\n% note\n2 2 1\n1 2 3.0\n").unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1, 3.0)]);
    }

    #[test]
    fn reads_pattern() {
        let g = read("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 1\n").unwrap();
        assert_eq!(g.edges(), &[Edge::new(1, 0, 1.0)]);
    }

    #[test]
    fn merges_duplicates_and_drops_diagonal() {
        let g = read("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 2 1.0\n1 2 1.0\n2 2 5\n").unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1, 2.0)]);
    }

    #[test]
    fn symmetric_and_negative() {
        let g = read("%%MatrixMarket matrix coordinate integer symmetric\n3 3 2\n2 1 -4\n3 3 1\n").unwrap();
        assert_eq!(g.edges(), &[Edge::new(0, 1, 4.0), Edge::new(1, 0, 4.0)]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad_header = read("%%MatrixMarket matrix array real general\n");
        assert!(matches!(bad_header, Err(Error::Parse { line: 1, .. })));
        let out_of_range = read("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
        assert!(matches!(out_of_range, Err(Error::Parse { line: 3, .. })));
        let nonnumeric = read("%%MatrixMarket matrix coordinate real general\n%c\n2 2 1\n1 2 x\n");
        assert!(matches!(nonnumeric, Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn write_then_read_is_identity() {
        let g = DirectedGraph::from_triples(4, &[(0, 1, 0.1), (3, 2, 1.0 / 3.0), (2, 0, 7e-9)]).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2 + 3);
        assert_eq!(read_matrix_market_from(buf.as_slice()).unwrap(), g);

        let empty = DirectedGraph::new(3, []).unwrap();
        let mut buf = Vec::new();
        write_matrix_market_to(&empty, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "%%MatrixMarket matrix coordinate real general\n3 3 0\n"
        );
    }
}
