//! The `.hmtx` text format.
//!
//! Line 1 holds `n m`; each of the `m` records that follow is
//! `w k v₁ … v_k`, space separated. Lines starting with `#` are comments and
//! blank lines are ignored. Serialization renders weights with the shortest
//! decimal that round-trips, so `parse(serialize(h)) == h` bit for bit.

use crate::error::{Error, Result};
use crate::hypergraph::{Diagnostics, Hypergraph};

pub fn parse(text: &str) -> Result<(Hypergraph, Diagnostics)> {
    let mut records: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut header: Option<(usize, usize)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let mut fields = content.split_ascii_whitespace();
        match header {
            None => {
                let n = parse_field::<usize>(fields.next(), line, "vertex count")?;
                let m = parse_field::<usize>(fields.next(), line, "hyperedge count")?;
                if fields.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: "trailing fields after header".into(),
                    });
                }
                header = Some((n, m));
            }
            Some((n, m)) => {
                if records.len() == m {
                    return Err(Error::Parse {
                        line,
                        msg: format!("more than the declared {m} records"),
                    });
                }
                let w = parse_field::<f64>(fields.next(), line, "weight")?;
                if !w.is_finite() || w <= 0.0 {
                    return Err(Error::Parse {
                        line,
                        msg: format!("weight must be a finite positive decimal, got {w}"),
                    });
                }
                let k = parse_field::<usize>(fields.next(), line, "vertex count")?;
                let mut vs = Vec::with_capacity(k);
                for _ in 0..k {
                    let v = parse_field::<usize>(fields.next(), line, "vertex id")?;
                    if v >= n {
                        return Err(Error::Parse {
                            line,
                            msg: format!("vertex id {v} out of range (n = {n})"),
                        });
                    }
                    vs.push(v);
                }
                if fields.next().is_some() {
                    return Err(Error::Parse {
                        line,
                        msg: format!("record lists more than {k} vertices"),
                    });
                }
                records.push((vs, w));
            }
        }
    }
    let (n, m) = header.ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    if records.len() != m {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {m} records, found {}", records.len()),
        });
    }
    Hypergraph::from_records(n, &records)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let s = field.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    s.parse::<T>().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} '{s}'"),
    })
}

pub fn serialize(h: &Hypergraph) -> String {
    let mut out = format!("{} {}\n", h.n, h.edges.len());
    for e in &h.edges {
        out.push_str(&format!("{} {}", e.weight, e.arity()));
        for v in &e.vertices {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}
