//! CSV rows and JSON summaries written under `--out`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

/// 12 significant digits, printed in the shortest form that reads back to
/// the rounded value.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let mag = rounded.abs();
    if rounded != 0.0 && !(1e-5..1e15).contains(&mag) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub t_pol: usize,
    pub r_pol: usize,
    pub grid: Vec<f64>,
    pub se: f64,
    pub dof: Option<f64>,
    pub n_active: usize,
    pub eigenvalues: Vec<f64>,
    pub lambda_star: Option<f64>,
}

/// Renders records with a fixed column order. `grid_columns` names the
/// swept coordinates; eigenvalue columns are padded to the longest row.
pub fn records_csv(hash: &str, grid_columns: &[&str], rows: &[ResultRecord]) -> String {
    let n_eig = rows.iter().map(|r| r.eigenvalues.len()).max().unwrap_or(0);
    let mut out = String::from("scenario_hash,t_pol,r_pol");
    for c in grid_columns {
        out.push(',');
        out.push_str(c);
    }
    out.push_str(",se_bits_per_hz,dof_effective,n_active");
    for i in 1..=n_eig {
        write!(out, ",eig{i}").unwrap();
    }
    out.push_str(",lambda_star\n");
    let opt = |v: Option<f64>| v.map(fmt12).unwrap_or_default();
    for r in rows {
        write!(out, "{hash},{},{}", r.t_pol, r.r_pol).unwrap();
        for g in &r.grid {
            write!(out, ",{}", fmt12(*g)).unwrap();
        }
        write!(out, ",{},{},{}", fmt12(r.se), opt(r.dof), r.n_active).unwrap();
        for i in 0..n_eig {
            write!(out, ",{}", opt(r.eigenvalues.get(i).copied())).unwrap();
        }
        writeln!(out, ",{}", opt(r.lambda_star)).unwrap();
    }
    out
}

pub fn write_outputs<S: Serialize>(dir: &Path, csv: &str, summary: &S) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), csv)?;
    let mut json = serde_json::to_string_pretty(summary).expect("summary serializes");
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(1.812_000_000_000_4), "1.812");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(-2.5e-20), "-2.5e-20");
        assert_eq!(fmt12(0.0), "0");
        assert_eq!(fmt12(123_456_789.123_456_79), "123456789.123");
    }

    #[test]
    fn header_and_padding() {
        let rows = vec![
            ResultRecord {
                t_pol: 3,
                r_pol: 3,
                grid: vec![0.5],
                se: 1.0,
                dof: None,
                n_active: 1,
                eigenvalues: vec![1.0],
                lambda_star: None,
            },
            ResultRecord {
                t_pol: 3,
                r_pol: 3,
                grid: vec![1.0],
                se: 2.0,
                dof: Some(0.5),
                n_active: 2,
                eigenvalues: vec![1.0, 0.5],
                lambda_star: Some(1.0),
            },
        ];
        let csv = records_csv("abc", &["aperture_m"], &rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "scenario_hash,t_pol,r_pol,aperture_m,se_bits_per_hz,dof_effective,n_active,eig1,eig2,lambda_star"
        );
        assert_eq!(lines[1], "abc,3,3,0.5,1,,1,1,,");
        assert_eq!(lines[2], "abc,3,3,1,2,0.5,2,1,0.5,1");
    }
}
