//! JSON and TSV rendering of run reports.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::run::RunReport;

/// Pretty JSON with every float written as 17 significant digits.
struct Precise<'a> {
    pretty: PrettyFormatter<'a>,
}

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let formatter = Precise {
        pretty: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value
        .serialize(&mut ser)
        .expect("reports serialize into memory");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Flat projection: one row per solution tuple when there are solutions,
/// otherwise `key<TAB>value` rows of the headline numbers.
pub fn to_tsv(report: &RunReport) -> String {
    let mut out = String::new();
    if let Some(set) = &report.solutions {
        let n = set.expected.trailing_zeros() as usize;
        let mut header: Vec<String> = vec!["index".into()];
        header.extend((1..=n).map(|i| format!("r_{i}")));
        header.extend(["residual_norm".into(), "branch".into(), "oracle_distance".into()]);
        out.push_str(&header.join("\t"));
        out.push('\n');
        for (k, t) in set.tuples.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(t.r.iter().map(|&x| num(x)));
            row.push(num(t.residual_norm));
            row.push(
                t.branch_tag
                    .as_ref()
                    .map(|s| s.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect())
                    .unwrap_or_default(),
            );
            let distance = report.matching.as_ref().and_then(|m| {
                m.pairs.iter().find(|p| p.solver == t.r).map(|p| num(p.distance))
            });
            row.push(distance.unwrap_or_default());
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        return out;
    }

    let mut line = |key: String, value: String| {
        out.push_str(&key);
        out.push('\t');
        out.push_str(&value);
        out.push('\n');
    };
    line("passed".into(), report.passed.to_string());
    if let Some(r) = &report.integrability {
        line("max_field_residual".into(), num(r.max_field_residual));
        line("max_gaudin_residual".into(), num(r.max_gaudin_residual));
        if let Some(c) = r.max_commutator_norm {
            line("max_commutator_norm".into(), num(c));
        }
        line("violations".into(), r.violations.len().to_string());
    }
    if let Some(q) = &report.quadratic_system {
        for i in 0..q.n_spins() {
            line(format!("K_{}", i + 1), num(q.k(i)));
        }
        for i in 0..q.n_spins() {
            for j in (0..q.n_spins()).filter(|&j| j != i) {
                line(format!("C_{}_{}", i + 1, j + 1), num(q.c(i, j)));
            }
        }
    }
    if let Some(r) = &report.operator_identity {
        for (i, x) in r.residuals.iter().enumerate() {
            line(format!("operator_residual_{}", i + 1), num(*x));
        }
    }
    out
}
