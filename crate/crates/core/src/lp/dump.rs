use std::fmt::Write;

use super::{LinearProgram, RowKind};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| match c {
            '[' => '(',
            ']' => ')',
            '+' => 'p',
            '-' => 'm',
            ',' => '.',
            c if c.is_ascii_alphanumeric() || "_().".contains(c) => c,
            _ => '_',
        })
        .collect()
}

fn term(out: &mut String, coef: f64, name: &str, first: bool) {
    if coef < 0.0 {
        out.push_str(" -");
    } else if !first {
        out.push_str(" +");
    }
    let _ = write!(out, " {} {}", coef.abs(), sanitize(name));
}

/// Renders `lp` in CPLEX LP text format for cross-checking with external
/// solvers. Names are rewritten into the format's identifier alphabet.
pub fn write_lp_format(lp: &LinearProgram) -> String {
    let cols = lp.columns();
    let mut out = String::from("\\ generated by vlink\nMaximize\n obj:");
    let mut first = true;
    for c in cols.iter().filter(|c| c.objective != 0.0) {
        term(&mut out, c.objective, &c.name, first);
        first = false;
    }
    if first {
        let _ = write!(out, " 0 {}", sanitize(&cols[0].name));
    }
    out.push_str("\nSubject To\n");
    for row in lp.rows() {
        let _ = write!(out, " {}:", sanitize(&row.name));
        if row.coeffs.is_empty() {
            let _ = write!(out, " 0 {}", sanitize(&cols[0].name));
        }
        for (k, &(c, a)) in row.coeffs.iter().enumerate() {
            term(&mut out, a, &cols[c.0].name, k == 0);
        }
        let op = match row.kind {
            RowKind::Eq => "=",
            RowKind::Le => "<=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for c in cols {
        let name = sanitize(&c.name);
        match (c.lower.is_finite(), c.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", c.lower, c.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", c.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", c.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    out.push_str("End\n");
    out
}
