//! Instance files.
//!
//! The native format is line based:
//!
//! ```text
//! n m c
//! u v w      (m lines, 1-based nodes)
//! i j        (c lines, 1-based edge indices)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. The benchmark
//! readers ([`Format::Zkp`], [`Format::Ccpr`]) accept the common layouts of
//! the distributed archives; see [`parse_benchmark_str`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{Edge, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    Zkp,
    Ccpr,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "native" => Ok(Format::Native),
            "zkp" => Ok(Format::Zkp),
            "ccpr" => Ok(Format::Ccpr),
            other => Err(Error::InvalidInput(format!("unknown format '{other}'"))),
        }
    }
}

/// Reads an instance file.
pub fn parse_instance(path: &Path, format: Format) -> Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    let parsed = match format {
        Format::Native => parse_native_str(&text),
        Format::Zkp | Format::Ccpr => parse_benchmark_str(&text),
    };
    parsed.map_err(|e| match e {
        Error::Parse { line, msg, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        },
        other => other,
    })
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next nonblank, non-comment line as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (k, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Some((k + 1, t.split_whitespace().collect()));
        }
        None
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from("<input>"),
        line,
        msg: msg.into(),
    }
}

fn num<T: FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| perr(line, format!("expected {what}, found '{tok}'")))
}

fn weight(line: usize, tok: &str) -> Result<f64> {
    let w: f64 = num(line, tok, "a weight")?;
    if !w.is_finite() || w < 0.0 {
        return Err(perr(
            line,
            format!("weight must be finite and nonnegative, found '{tok}'"),
        ));
    }
    Ok(w)
}

/// Builds the instance, reporting model errors at `line`.
fn finish(
    line: usize,
    n: usize,
    edges: Vec<Edge>,
    conflicts: Vec<(usize, usize)>,
) -> Result<Instance> {
    Instance::new(n, edges, conflicts).map_err(|e| match e {
        Error::InvalidInstance(msg) => perr(line, msg),
        other => other,
    })
}

/// Parses the native format.
pub fn parse_native_str(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (hl, header) = lines
        .next_tokens()
        .ok_or_else(|| perr(1, "missing header"))?;
    if header.len() != 3 {
        return Err(perr(hl, "header must be 'n m c'"));
    }
    let n: usize = num(hl, header[0], "node count")?;
    let m: usize = num(hl, header[1], "edge count")?;
    let c: usize = num(hl, header[2], "conflict count")?;
    if n == 0 {
        return Err(perr(hl, "instance needs at least one node"));
    }

    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    let mut last = hl;
    for k in 0..m {
        let (ln, t) = lines
            .next_tokens()
            .ok_or_else(|| perr(last + 1, format!("expected {m} edges, found {k}")))?;
        last = ln;
        if t.len() != 3 {
            return Err(perr(ln, "edge line must be 'u v w'"));
        }
        let u: usize = num(ln, t[0], "a node")?;
        let v: usize = num(ln, t[1], "a node")?;
        if u == 0 || v == 0 || u > n || v > n {
            return Err(perr(ln, format!("node out of range 1..={n}")));
        }
        if u == v {
            return Err(perr(ln, format!("self-loop at node {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(perr(ln, format!("duplicate edge {u}-{v}")));
        }
        edges.push(Edge {
            u: u - 1,
            v: v - 1,
            w: weight(ln, t[2])?,
        });
    }

    let mut conflicts = Vec::with_capacity(c);
    for k in 0..c {
        let (ln, t) = lines
            .next_tokens()
            .ok_or_else(|| perr(last + 1, format!("expected {c} conflicts, found {k}")))?;
        last = ln;
        if t.len() != 2 {
            return Err(perr(ln, "conflict line must be 'i j'"));
        }
        let i: usize = num(ln, t[0], "an edge index")?;
        let j: usize = num(ln, t[1], "an edge index")?;
        if i == 0 || j == 0 || i > m || j > m {
            return Err(perr(ln, format!("edge index out of range 1..={m}")));
        }
        if i == j {
            return Err(perr(ln, format!("edge {i} conflicts with itself")));
        }
        conflicts.push((i - 1, j - 1));
    }
    if let Some((ln, _)) = lines.next_tokens() {
        return Err(perr(ln, "unexpected content after the last conflict"));
    }
    finish(last, n, edges, conflicts)
}

/// Writes the native format. Weights use the shortest exact decimal form.
pub fn write_native(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", inst.n(), inst.m(), inst.conflicts().len());
    for e in inst.edges() {
        let _ = writeln!(out, "{} {} {}", e.u + 1, e.v + 1, e.w);
    }
    for &(i, j) in inst.conflicts() {
        let _ = writeln!(out, "{} {}", i + 1, j + 1);
    }
    out
}

pub fn write_native_file(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, write_native(inst))?;
    Ok(())
}

/// Parses a benchmark archive file.
///
/// Accepted layouts, all whitespace separated:
///
/// * header `n m c` or `n m` (with `c` on its own line after the edges);
/// * edge lines `u v w` or `k u v w` where `k` is the running edge number;
/// * conflict lines `i j` (edge numbers) or `u1 v1 u2 v2` (endpoints).
///
/// Node and edge numbers may be 0- or 1-based: numbering is taken as
/// 0-based when any node or edge number 0 occurs.
pub fn parse_benchmark_str(text: &str) -> Result<Instance> {
    let mut lines = Lines::new(text);
    let (hl, header) = lines
        .next_tokens()
        .ok_or_else(|| perr(1, "missing header"))?;
    if header.len() != 2 && header.len() != 3 {
        return Err(perr(hl, "header must be 'n m' or 'n m c'"));
    }
    let n: usize = num(hl, header[0], "node count")?;
    let m: usize = num(hl, header[1], "edge count")?;
    let mut c: Option<usize> = match header.get(2) {
        Some(t) => Some(num(hl, t, "conflict count")?),
        None => None,
    };

    let mut raw_edges = Vec::with_capacity(m);
    let mut last = hl;
    for k in 0..m {
        let (ln, t) = lines
            .next_tokens()
            .ok_or_else(|| perr(last + 1, format!("expected {m} edges, found {k}")))?;
        last = ln;
        let (u, v, w) = match t.len() {
            3 => (t[0], t[1], t[2]),
            4 => (t[1], t[2], t[3]),
            _ => return Err(perr(ln, "edge line must be 'u v w' or 'k u v w'")),
        };
        let u: usize = num(ln, u, "a node")?;
        let v: usize = num(ln, v, "a node")?;
        raw_edges.push((ln, u, v, weight(ln, w)?));
    }
    if c.is_none() {
        let (ln, t) = lines
            .next_tokens()
            .ok_or_else(|| perr(last + 1, "missing conflict count"))?;
        if t.len() != 1 {
            return Err(perr(ln, "expected the conflict count"));
        }
        c = Some(num(ln, t[0], "conflict count")?);
        last = ln;
    }
    let c = c.unwrap_or(0);
    let mut raw_conflicts = Vec::with_capacity(c);
    for k in 0..c {
        let (ln, t) = lines
            .next_tokens()
            .ok_or_else(|| perr(last + 1, format!("expected {c} conflicts, found {k}")))?;
        last = ln;
        if t.len() != 2 && t.len() != 4 {
            return Err(perr(ln, "conflict line must be 'i j' or 'u1 v1 u2 v2'"));
        }
        let vals = t
            .iter()
            .map(|tok| num::<usize>(ln, tok, "an index"))
            .collect::<Result<Vec<_>>>()?;
        raw_conflicts.push((ln, vals));
    }

    let node_base = usize::from(!raw_edges.iter().any(|&(_, u, v, _)| u == 0 || v == 0));
    let mut by_ends = std::collections::HashMap::new();
    let mut edges = Vec::with_capacity(m);
    for (k, &(ln, u, v, w)) in raw_edges.iter().enumerate() {
        if u < node_base || v < node_base || u - node_base >= n || v - node_base >= n {
            return Err(perr(ln, format!("node out of range for n = {n}")));
        }
        let (u, v) = (u - node_base, v - node_base);
        if u == v {
            return Err(perr(ln, format!("self-loop at node {}", u + node_base)));
        }
        if by_ends.insert((u.min(v), u.max(v)), k).is_some() {
            return Err(perr(ln, "duplicate edge"));
        }
        edges.push(Edge { u, v, w });
    }
    let edge_base = usize::from(
        !raw_conflicts
            .iter()
            .any(|(_, vals)| vals.len() == 2 && vals.contains(&0)),
    );
    let mut conflicts = Vec::with_capacity(c);
    for (ln, vals) in &raw_conflicts {
        let ln = *ln;
        let pair = if vals.len() == 2 {
            let (i, j) = (vals[0], vals[1]);
            if i < edge_base || j < edge_base || i - edge_base >= m || j - edge_base >= m {
                return Err(perr(ln, format!("edge index out of range for m = {m}")));
            }
            (i - edge_base, j - edge_base)
        } else {
            let find = |a: usize, b: usize| -> Result<usize> {
                if a < node_base || b < node_base {
                    return Err(perr(ln, "node out of range"));
                }
                let (a, b) = (a - node_base, b - node_base);
                by_ends
                    .get(&(a.min(b), a.max(b)))
                    .copied()
                    .ok_or_else(|| perr(ln, format!("no edge {}-{}", a + node_base, b + node_base)))
            };
            (find(vals[0], vals[1])?, find(vals[2], vals[3])?)
        };
        if pair.0 == pair.1 {
            return Err(perr(ln, "edge conflicts with itself"));
        }
        conflicts.push(pair);
    }
    finish(last, n, edges, conflicts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_triangle() {
        let g = parse_native_str("3 3 1\n1 2 1\n2 3 2\n1 3 3\n1 3\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert_eq!(g.conflicts(), &[(0, 2)]);
        assert_eq!(g.edge(2).w, 3.0);
    }

    #[test]
    fn empty_conflict_section() {
        let g = parse_native_str("2 1 0\n1 2 5\n").unwrap();
        assert!(g.conflicts().is_empty());
    }

    #[test]
    fn reports_line_numbers() {
        let cases = [
            ("3 3 0\n1 2 1\n2 2 1\n1 3 1\n", 3, "self-loop"),
            ("3 2 0\n1 2 1\n2 1 4\n", 3, "duplicate"),
            ("3 2 1\n1 2 1\n2 3 1\n1 5\n", 4, "out of range"),
            ("3 2 0\n1 2 1\n", 3, "expected 2 edges"),
            ("3 1 0\n1 4 1\n", 2, "out of range"),
            ("3 1 0\n1 2 -1\n", 2, "nonnegative"),
            ("3 1 0\n1 2 x\n", 2, "weight"),
            ("2 1 0\n1 2 1\n1 2 1\n", 3, "unexpected"),
        ];
        for (text, line, needle) in cases {
            match parse_native_str(text) {
                Err(Error::Parse { line: l, msg, .. }) => {
                    assert_eq!(l, line, "{text:?}: {msg}");
                    assert!(msg.contains(needle), "{text:?}: {msg}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn native_round_trip() {
        let text = "4 4 2\n1 2 1.5\n2 3 2\n3 4 0\n1 4 7\n1 3\n2 4\n";
        let g = parse_native_str(text).unwrap();
        assert_eq!(write_native(&g), text);
        assert_eq!(parse_native_str(&write_native(&g)).unwrap(), g);
    }

    #[test]
    fn benchmark_layouts_agree() {
        let native = parse_native_str("4 4 2\n1 2 3\n2 3 4\n3 4 5\n1 4 6\n1 3\n2 4\n").unwrap();
        let variants = [
            "4 4 2\n1 2 3\n2 3 4\n3 4 5\n1 4 6\n1 3\n2 4\n",
            "4 4\n1 2 3\n2 3 4\n3 4 5\n1 4 6\n2\n1 3\n2 4\n",
            "4 4 2\n0 1 3\n1 2 4\n2 3 5\n0 3 6\n0 2\n1 3\n",
            "4 4 2\n1 1 2 3\n2 2 3 4\n3 3 4 5\n4 1 4 6\n1 2 3 4\n2 3 1 4\n",
            "4 4 2\n0 1 3\n1 2 4\n2 3 5\n0 3 6\n1 0 3 2\n1 2 0 3\n",
        ];
        for v in variants {
            assert_eq!(parse_benchmark_str(v).unwrap(), native, "{v:?}");
        }
    }

    #[test]
    fn benchmark_errors_name_the_line() {
        match parse_benchmark_str("3 2 1\n1 2 1\n2 3 1\n1 2 3 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn file_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.txt");
        std::fs::write(&p, "3 1 0\n1 9 1\n").unwrap();
        match parse_instance(&p, Format::Native) {
            Err(Error::Parse { path, line, .. }) => {
                assert_eq!(path, p);
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
    }
}
