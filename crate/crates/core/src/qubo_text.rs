//! Line-oriented QUBO text format.
//!
//! ```text
//! # comment
//! n 4
//! offset_cost 0
//! offset_penalty 2
//! c 0 0 3
//! p 0 1 2
//! ```
//!
//! `c`/`p` lines carry cost and penalty entries with `u <= v`. Values are
//! written with shortest round-trip precision. The encoding descriptor, when
//! present, rides along in a `#! descriptor <json>` comment so that plain
//! readers can ignore it.

use std::fmt::Write as _;

use crate::encode::{EncodingDescriptor, QuadraticForm, QuboPair};
use crate::error::{Error, Result};

const DESCRIPTOR_TAG: &str = "#! descriptor ";

pub fn export_qubo(q: &QuboPair) -> String {
    let mut out = String::new();
    if let Some(d) = q.descriptor() {
        let json = serde_json::to_string(d).expect("descriptor serializes");
        writeln!(out, "{DESCRIPTOR_TAG}{json}").unwrap();
    }
    writeln!(out, "n {}", q.n()).unwrap();
    writeln!(out, "offset_cost {}", q.cost().offset()).unwrap();
    writeln!(out, "offset_penalty {}", q.penalty().offset()).unwrap();
    for (tag, form) in [("c", q.cost()), ("p", q.penalty())] {
        for (&(u, v), w) in form.terms() {
            writeln!(out, "{tag} {u} {v} {w}").unwrap();
        }
    }
    out
}

pub fn import_qubo(text: &str) -> Result<QuboPair> {
    let mut n = None;
    let mut offset_cost = None;
    let mut offset_penalty = None;
    let mut descriptor = None;
    let mut cost = QuadraticForm::new();
    let mut penalty = QuadraticForm::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let line = raw.trim();
        if let Some(json) = line.strip_prefix(DESCRIPTOR_TAG) {
            let d: EncodingDescriptor =
                serde_json::from_str(json).map_err(|e| err(format!("bad descriptor: {e}")))?;
            descriptor = Some(d);
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "n" | "offset_cost" | "offset_penalty" => {
                if fields.len() != 2 {
                    return Err(err(format!("expected `{} <value>`", fields[0])));
                }
                let slot_taken = match fields[0] {
                    "n" => n.replace(parse_usize(fields[1]).map_err(&err)?).is_some(),
                    "offset_cost" => offset_cost
                        .replace(parse_f64(fields[1]).map_err(&err)?)
                        .is_some(),
                    _ => offset_penalty
                        .replace(parse_f64(fields[1]).map_err(&err)?)
                        .is_some(),
                };
                if slot_taken {
                    return Err(err(format!("repeated `{}` header", fields[0])));
                }
            }
            tag @ ("c" | "p") => {
                let Some(n) = n else {
                    return Err(err("entry before `n` header".into()));
                };
                if fields.len() != 4 {
                    return Err(err(format!("expected `{tag} <u> <v> <value>`")));
                }
                let u = parse_usize(fields[1]).map_err(&err)?;
                let v = parse_usize(fields[2]).map_err(&err)?;
                let w = parse_f64(fields[3]).map_err(&err)?;
                if u > v {
                    return Err(err(format!("entry ({u}, {v}) is not canonical: need u <= v")));
                }
                if v >= n {
                    return Err(err(format!("index {v} out of range for n = {n}")));
                }
                let form = if tag == "c" { &mut cost } else { &mut penalty };
                if !form.insert_new(u, v, w) {
                    return Err(err(format!("duplicate {tag} entry ({u}, {v})")));
                }
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }

    let missing = |what: &str| Error::Parse {
        line: text.lines().count().max(1),
        message: format!("missing `{what}` header"),
    };
    let n = n.ok_or_else(|| missing("n"))?;
    cost.set_offset(offset_cost.ok_or_else(|| missing("offset_cost"))?);
    penalty.set_offset(offset_penalty.ok_or_else(|| missing("offset_penalty"))?);
    QuboPair::from_parts(n, cost, penalty, descriptor).map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })
}

fn parse_usize(s: &str) -> std::result::Result<usize, String> {
    s.parse().map_err(|_| format!("expected a non-negative integer, got `{s}`"))
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite decimal, got `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{encode_domain_wall, encode_one_hot};
    use crate::model::DqmInstance;

    #[test]
    fn round_trip_keeps_descriptor_and_values() {
        let dqm = DqmInstance::random_uniform(2, 3, -1.0, 1.0, 3).unwrap();
        for q in [
            encode_one_hot(&dqm, None).unwrap(),
            encode_domain_wall(&dqm, Some(vec![vec![1, 2, 0], vec![0, 1, 2]])).unwrap(),
        ] {
            let back = import_qubo(&export_qubo(&q)).unwrap();
            assert_eq!(back, q);
        }
    }

    #[test]
    fn cost_entries_precede_penalty_entries_in_sorted_order() {
        let q = encode_one_hot(&DqmInstance::random(2, 2, 1, 10, 0).unwrap(), None).unwrap();
        let text = export_qubo(&q);
        let entries: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("c ") || l.starts_with("p "))
            .collect();
        let first_p = entries.iter().position(|l| l.starts_with("p ")).unwrap();
        assert!(entries[..first_p].iter().all(|l| l.starts_with("c ")));
        assert!(entries[first_p..].iter().all(|l| l.starts_with("p ")));
        let keys: Vec<(usize, usize)> = entries[..first_p]
            .iter()
            .map(|l| {
                let f: Vec<&str> = l.split(' ').collect();
                (f[1].parse().unwrap(), f[2].parse().unwrap())
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn header_only_document() {
        let q = import_qubo("n 3\noffset_cost 0\noffset_penalty 0\n").unwrap();
        assert_eq!(q.n(), 3);
        assert!(q.cost().terms().is_empty() && q.penalty().terms().is_empty());
        assert!(q.descriptor().is_none());
        assert_eq!(import_qubo(&export_qubo(&q)).unwrap(), q);
    }

    #[test]
    fn rejects_bad_documents() {
        let cases = [
            ("n 3\noffset_cost 0\noffset_penalty 0\nc 2 1 1.0\n", 4, "canonical"),
            ("n 3\noffset_cost 0\noffset_penalty 0\nc 0 3 1.0\n", 4, "out of range"),
            ("n 3\noffset_cost 0\noffset_penalty 0\np 0 1 1\np 0 1 2\n", 5, "duplicate"),
            ("# hi\nn 3\noffset_cost zero\noffset_penalty 0\n", 3, "decimal"),
            ("n 3\noffset_cost 0\noffset_penalty 0\nq 0 1 1\n", 4, "unknown"),
            ("c 0 1 1\n", 1, "before"),
            ("n 3\noffset_cost 0\noffset_penalty 0\nc 0 1\n", 4, "expected"),
            ("n 3\noffset_cost inf\noffset_penalty 0\n", 2, "finite"),
        ];
        for (text, want_line, needle) in cases {
            match import_qubo(text) {
                Err(Error::Parse { line, message }) => {
                    assert_eq!(line, want_line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{text:?}: {message}");
                }
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
        assert!(import_qubo("offset_cost 0\noffset_penalty 0\n").is_err());
    }
}
