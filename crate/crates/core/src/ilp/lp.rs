//! CPLEX-LP serialization of the region-collapsed program, for cross-checking
//! with external solvers.
//!
//! Variables: `v_r{region}_l{label}` (binary), `a_k{gt}_l{label}` (binary,
//! only for pairs some region can realize), `s_k{gt}` and `m_l{label}`
//! (general integers), and the totals `s` and `m`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::TedModel;
use crate::error::Result;
use crate::volume::Label;

const WRAP: usize = 100;

fn v(r: usize, l: Label) -> String {
    format!("v_r{r}_l{l}")
}

fn a(k: Label, l: Label) -> String {
    format!("a_k{k}_l{l}")
}

/// Writes `name: terms op rhs`, wrapping long rows onto continuation lines.
fn row<W: Write>(w: &mut W, name: &str, terms: &[String], op: &str, rhs: f64) -> io::Result<()> {
    let mut line = format!(" {name}:");
    for (i, t) in terms.iter().enumerate() {
        let piece = if i == 0 {
            format!(" {t}")
        } else if let Some(neg) = t.strip_prefix('-') {
            format!(" - {neg}")
        } else {
            format!(" + {t}")
        };
        if line.len() + piece.len() > WRAP {
            writeln!(w, "{line}")?;
            line = "   ".to_string();
        }
        line.push_str(&piece);
    }
    writeln!(w, "{line} {op} {rhs}")
}

pub fn write_lp<W: Write>(model: &TedModel, mut w: W) -> io::Result<()> {
    // (k, l) -> regions with gt k that admit l
    let mut pairs: BTreeMap<(Label, Label), Vec<usize>> = BTreeMap::new();
    for (r, reg) in model.regions.iter().enumerate() {
        for &l in &reg.candidates {
            pairs.entry((reg.gt_label, l)).or_default().push(r);
        }
    }

    writeln!(w, "\\ tolerant edit distance: {} regions", model.regions.len())?;
    writeln!(w, "Minimize")?;
    writeln!(w, " obj: {} s + {} m", model.alpha, model.beta)?;
    writeln!(w, "Subject To")?;
    for (r, reg) in model.regions.iter().enumerate() {
        let terms: Vec<String> = reg.candidates.iter().map(|&l| v(r, l)).collect();
        row(&mut w, &format!("assign_r{r}"), &terms, "=", 1.0)?;
    }
    for &l in &model.prop_labels {
        let terms: Vec<String> = model
            .regions
            .iter()
            .enumerate()
            .filter(|(_, reg)| reg.candidates.contains(&l))
            .map(|(r, _)| v(r, l))
            .collect();
        row(&mut w, &format!("cover_l{l}"), &terms, ">=", 1.0)?;
    }
    for (&(k, l), regions) in &pairs {
        for &r in regions {
            row(&mut w, &format!("pair_lo_r{r}_l{l}"), &[a(k, l), format!("-{}", v(r, l))], ">=", 0.0)?;
        }
        let mut terms = vec![a(k, l)];
        terms.extend(regions.iter().map(|&r| format!("-{}", v(r, l))));
        row(&mut w, &format!("pair_hi_k{k}_l{l}"), &terms, "<=", 0.0)?;
    }
    for &k in &model.gt_labels {
        let mut terms = vec![format!("s_k{k}")];
        terms.extend(pairs.keys().filter(|p| p.0 == k).map(|&(k, l)| format!("-{}", a(k, l))));
        row(&mut w, &format!("split_k{k}"), &terms, "=", -1.0)?;
    }
    for &l in &model.prop_labels {
        let mut terms = vec![format!("m_l{l}")];
        terms.extend(pairs.keys().filter(|p| p.1 == l).map(|&(k, l)| format!("-{}", a(k, l))));
        row(&mut w, &format!("merge_l{l}"), &terms, "=", -1.0)?;
    }
    let mut terms = vec!["s".to_string()];
    terms.extend(model.gt_labels.iter().map(|k| format!("-s_k{k}")));
    row(&mut w, "splits", &terms, "=", 0.0)?;
    let mut terms = vec!["m".to_string()];
    terms.extend(model.prop_labels.iter().map(|l| format!("-m_l{l}")));
    row(&mut w, "merges", &terms, "=", 0.0)?;

    writeln!(w, "Binary")?;
    for (r, reg) in model.regions.iter().enumerate() {
        for &l in &reg.candidates {
            writeln!(w, " {}", v(r, l))?;
        }
    }
    for &(k, l) in pairs.keys() {
        writeln!(w, " {}", a(k, l))?;
    }
    writeln!(w, "General")?;
    for &k in &model.gt_labels {
        writeln!(w, " s_k{k}")?;
    }
    for &l in &model.prop_labels {
        writeln!(w, " m_l{l}")?;
    }
    writeln!(w, " s\n m")?;
    writeln!(w, "End")
}

pub fn export_lp(model: &TedModel, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_lp(model, &mut w)?;
    w.flush()?;
    Ok(())
}
