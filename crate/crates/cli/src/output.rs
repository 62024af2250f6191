//! Result files: `summary.json`, `branch.csv` and `solution_<kappa>.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use halfspace::continuation::Branch;
use halfspace::discretization::Field;
use halfspace::kernels::Dimension;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const BRANCH_HEADER: &str = "index,kappa,sup_norm,lq_alpha_norm,lambda,arclength,fold_flag";

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Serialize)]
pub struct Summary<'a, R: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: Option<&'a RunConfig>,
    pub results: R,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn write_summary<R: Serialize>(dir: &Path, summary: &Summary<'_, R>) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write(dir, "summary.json", &text)
}

pub fn branch_csv(branch: &Branch) -> String {
    let mut out = String::from(BRANCH_HEADER);
    out.push('\n');
    for (i, pt) in branch.points.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{}",
            num(pt.kappa),
            num(pt.sup_norm),
            num(pt.lq_alpha_norm),
            num(pt.lambda),
            num(pt.arclength),
            pt.fold_flag
        );
    }
    out
}

pub fn write_branch(dir: &Path, branch: &Branch) -> Result<PathBuf, CliError> {
    write(dir, "branch.csv", &branch_csv(branch))
}

pub fn solution_csv(field: &Field) -> String {
    let grid = field.grid();
    let mut out = String::from(if grid.dimension() == Dimension::One { "x_N,u\n" } else { "radius,x_N,u\n" });
    for (x, v) in grid.nodes().iter().zip(field.values()) {
        if grid.dimension() == Dimension::One {
            let _ = writeln!(out, "{},{}", num(x.height), num(*v));
        } else {
            let _ = writeln!(out, "{},{},{}", num(x.lateral[0].hypot(x.lateral[1])), num(x.height), num(*v));
        }
    }
    out
}

pub fn write_solution(dir: &Path, kappa: f64, field: &Field) -> Result<PathBuf, CliError> {
    write(dir, &format!("solution_{kappa}.csv"), &solution_csv(field))
}

pub fn write_reports<R: Serialize>(dir: &Path, reports: &R) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(reports).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    write(dir, "verify.json", &text)
}
