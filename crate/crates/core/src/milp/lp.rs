//! Writer for the LP text format read by common MILP solvers.

use std::fmt::Write;

use super::model::{MilpModel, Sense, VarKind};

/// Maximum line length before a row is continued on the next line.
const WRAP: usize = 200;

/// LP-safe form of a canonical variable name: `x[3,e1,2]` becomes
/// `x_3_e1_2`.
pub fn lp_name(canonical: &str) -> String {
    canonical.chars().filter(|&c| c != ']').map(|c| if c == '[' || c == ',' { '_' } else { c }).collect()
}

/// Formats a coefficient so that it parses back to the same double:
/// integral values as integers, everything else in shortest round-trip form.
pub fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else if (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn push_terms(out: &mut String, head: &str, terms: impl Iterator<Item = (f64, String)>) {
    let mut line = String::from(head);
    let mut first = true;
    for (c, name) in terms {
        let sign = if c < 0.0 { "-" } else { "+" };
        let mag = c.abs();
        let coef = if mag == 1.0 { String::new() } else { format!("{} ", fmt_num(mag)) };
        let piece = if first && sign == "+" { format!("{coef}{name}") } else { format!("{sign} {coef}{name}") };
        first = false;
        if line.len() + piece.len() + 1 > WRAP {
            out.push_str(line.trim_end());
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(&piece);
    }
    out.push_str(&line);
}

/// Renders the model; the output is a deterministic function of the model.
pub fn write_lp(model: &MilpModel) -> String {
    let names: Vec<String> = model.variables().iter().map(|v| lp_name(&v.name)).collect();
    let mut out = String::new();
    out.push_str("\\ makespan minimization over an extended task graph\n");
    let _ = writeln!(out, "\\ big-M {} epsilon {}", fmt_num(model.big_m()), fmt_num(model.epsilon()));
    out.push_str("Minimize\n");
    let _ = writeln!(out, " obj: {}", names[model.objective()]);
    out.push_str("Subject To\n");
    for c in model.constraints() {
        push_terms(&mut out, &format!(" {}:", c.name), c.terms.iter().map(|&(k, v)| (k, names[v].clone())));
        let sense = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {sense} {}", fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (k, v) in model.variables().iter().enumerate() {
        if v.kind == VarKind::Binary {
            continue;
        }
        match v.upper {
            Some(u) => {
                let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lower), names[k], fmt_num(u));
            }
            None => {
                let _ = writeln!(out, " {} >= {}", names[k], fmt_num(v.lower));
            }
        }
    }
    out.push_str("Binaries\n");
    let mut line = String::new();
    for (k, v) in model.variables().iter().enumerate() {
        if v.kind != VarKind::Binary {
            continue;
        }
        if line.len() + names[k].len() + 1 > WRAP {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(&names[k]);
    }
    if !line.is_empty() {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("End\n");
    out
}
