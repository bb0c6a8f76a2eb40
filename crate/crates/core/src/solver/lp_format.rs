//! CPLEX-style LP text dump, for debugging models with external tools.

use std::fmt::Write;

use super::model::{Comparator, MixedIntegerProgram, Sense, VarKind};

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    if first {
        if coef < 0.0 {
            let _ = write!(out, "- {} {name}", -coef);
        } else {
            let _ = write!(out, "{coef} {name}");
        }
    } else if coef < 0.0 {
        let _ = write!(out, " - {} {name}", -coef);
    } else {
        let _ = write!(out, " + {coef} {name}");
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' }).collect()
}

/// Renders `mip` in LP format. Pure LPs can be wrapped with
/// [`MixedIntegerProgram::from_lp`].
pub fn write_lp_format(mip: &MixedIntegerProgram) -> String {
    let lp = &mip.lp;
    let names: Vec<String> = lp.names.iter().map(|n| sanitize(n)).collect();
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Maximize => "Maximize\n",
        Sense::Minimize => "Minimize\n",
    });
    out.push_str(" obj: ");
    let mut first = true;
    for (j, &c) in lp.objective.iter().enumerate() {
        if c != 0.0 {
            term(&mut out, first, c, &names[j]);
            first = false;
        }
    }
    if first {
        out.push('0');
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows.iter().enumerate() {
        let _ = write!(out, " r{i}: ");
        if row.coeffs.is_empty() {
            out.push('0');
        }
        for (k, &(j, a)) in row.coeffs.iter().enumerate() {
            term(&mut out, k == 0, a, &names[j]);
        }
        let cmp = match row.cmp {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        };
        let _ = writeln!(out, " {cmp} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        match (lo.is_finite(), hi.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) if lo == hi => {
                let _ = writeln!(out, " {name} = {lo}");
            }
            (true, true) => {
                let _ = writeln!(out, " {lo} <= {name} <= {hi}");
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {lo}");
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {hi}");
            }
        }
    }
    for (header, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
        let listed: Vec<&str> = names
            .iter()
            .zip(&mip.kinds)
            .filter(|(_, k)| **k == kind)
            .map(|(n, _)| n.as_str())
            .collect();
        if !listed.is_empty() {
            let _ = writeln!(out, "{header}\n {}", listed.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
