//! CSV, plot-script and summary-table rendering.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::run::{ExperimentResult, ResultRow};

pub const CSV_HEADER: &str =
    "scheme,M,ue,se_mean,se_stderr,sinr_mean,asym_pred,est_mults,comb_mults";

/// `x` with nine significant digits, in the style of C's `%.9g`.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round once in scientific form to learn the post-rounding exponent.
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_fraction(&format!("{x:.decimals$}")).to_string()
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_line(row: &ResultRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        row.scheme,
        row.antennas,
        row.ue,
        format_sig9(row.se_mean),
        format_sig9(row.se_stderr),
        format_sig9(row.sinr_mean),
        row.asym_pred.map(format_sig9).unwrap_or_default(),
        row.complexity.estimation_mults,
        row.complexity.combiner_mults,
    )
}

/// The whole CSV file, header included, newline-terminated.
pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    out
}

/// Sibling path for the plot script: `results.csv` -> `results_plot.py`.
pub fn plot_script_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    csv_path.with_file_name(format!("{stem}_plot.py"))
}

/// A matplotlib script that draws the UE-averaged SE against `M`, one curve
/// per scheme.
pub fn plot_script(csv_file_name: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
"""Average SE per UE against antennas per BS, one curve per scheme."""
import csv
import os
from collections import defaultdict

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSV = os.path.join(HERE, "{csv_file_name}")

curves = defaultdict(lambda: defaultdict(list))
with open(CSV, newline="") as f:
    for row in csv.DictReader(f):
        curves[row["scheme"]][int(row["M"])].append(float(row["se_mean"]))

fig, ax = plt.subplots(figsize=(6, 4.5))
for scheme, by_m in curves.items():
    ms = sorted(by_m)
    ax.plot(ms, [sum(by_m[m]) / len(by_m[m]) for m in ms], marker="o", label=scheme)
ax.set_xlabel("Antennas per BS, M")
ax.set_ylabel("Average SE per UE [bit/s/Hz/UE]")
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
out = os.path.splitext(CSV)[0] + ".png"
fig.savefig(out, dpi=150)
print("wrote", out)
"#
    )
}

/// Writes the CSV and its plot script; returns the script path.
pub fn write_outputs(result: &ExperimentResult, csv_path: &Path) -> io::Result<PathBuf> {
    fs::write(csv_path, to_csv(&result.rows))?;
    let script = plot_script_path(csv_path);
    let name = csv_path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or("results.csv");
    fs::write(&script, plot_script(name))?;
    Ok(script)
}

/// Human-readable table of the UE-averaged SE per scheme and `M`.
pub fn summary_table(result: &ExperimentResult) -> String {
    let cfg = &result.config;
    let mut out = String::new();
    let net = &cfg.network;
    let _ = writeln!(
        out,
        "N = {}, K = {}, tau_p = {}, tau_c = {}, r = {}, drops = {}, blocks_per_drop = {}, seed = {}",
        net.num_bs,
        net.num_ue,
        net.pilot_length,
        net.coherence_block,
        net.correlation_factor,
        cfg.drops,
        cfg.blocks_per_drop,
        cfg.seed()
    );
    let _ = writeln!(out, "average SE per UE [bit/s/Hz/UE]");
    let _ = write!(out, "{:<10}", "scheme");
    for m in &cfg.antenna_grid {
        let _ = write!(out, "{:>10}", format!("M={m}"));
    }
    let _ = writeln!(out, "  trend (SE slope per doubling of M)");
    for scheme in &cfg.schemes {
        let _ = write!(out, "{scheme:<10}");
        for &m in &cfg.antenna_grid {
            let se = result.mean_se(scheme, m).unwrap_or(f64::NAN);
            let _ = write!(out, "{se:>10.4}");
        }
        let trend = result
            .growth(scheme)
            .map(|g| format!("{} ({:+.3})", g.class, g.se_slope_per_doubling))
            .unwrap_or_else(|_| "-".into());
        let _ = writeln!(out, "  {trend}");
    }
    out
}
