//! Plain-text edge lists: a header line `n m` followed by `m` lines `i j`.
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::fmt::Write;

use super::Graph;
use crate::error::{Error, Result};

fn parse_pair(line_no: usize, line: &str, what: &str) -> Result<(usize, usize)> {
    let mut fields = line.split_whitespace();
    let mut next = |name: &str| -> Result<usize> {
        let tok = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("missing {name} in {what}"),
        })?;
        tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("invalid {name} `{tok}` in {what}"),
        })
    };
    let a = next("first field")?;
    let b = next("second field")?;
    if let Some(extra) = fields.next() {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("unexpected trailing field `{extra}` in {what}"),
        });
    }
    Ok((a, b))
}

pub fn read_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing `n m` header".into(),
    })?;
    let (n, m) = parse_pair(header_line, header, "header")?;
    if n == 0 {
        return Err(Error::Parse {
            line: header_line,
            msg: "vertex count must be positive".into(),
        });
    }

    let mut edges = Vec::with_capacity(m);
    let mut seen = HashSet::with_capacity(m);
    let mut last_line = header_line;
    for (line_no, line) in lines {
        last_line = line_no;
        let (u, v) = parse_pair(line_no, line, "edge")?;
        if u >= n || v >= n {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("vertex out of range: ({u}, {v}) with n = {n}"),
            });
        }
        if u == v {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("self-loop at vertex {u}"),
            });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate edge ({u}, {v})"),
            });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    Graph::new(n, edges)
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", g.n(), g.edge_count());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const K4: &str = "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3";

    #[test]
    fn reads_k4() {
        let g = read_edge_list(K4).unwrap();
        assert_eq!(g, Graph::complete(4).unwrap());
    }

    #[test]
    fn write_normalizes() {
        let g = read_edge_list("3 2\n2 0\n1 0\n").unwrap();
        assert_eq!(write_edge_list(&g), "3 2\n0 1\n0 2\n");
        assert_eq!(write_edge_list(&read_edge_list(K4).unwrap()), format!("{K4}\n"));
    }

    #[test]
    fn out_of_range_reports_line() {
        match read_edge_list("4 1\n0 4") {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("out of range"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_garbage_report_lines() {
        assert!(matches!(
            read_edge_list("3 2\n0 1\n1 0"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(read_edge_list("3 1\n0 x"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_edge_list(""), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_edge_list("3 2\n0 1"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let g = read_edge_list("# cubic\n4 6\n\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
        assert_eq!(g.edge_count(), 6);
    }
}
