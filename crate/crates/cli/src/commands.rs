//! Subcommands: each returns the human summary, the CSV text and the JSON
//! summary, and the caller decides where they go.

use holomimo::capacity::{eig_sorted, spectral_efficiency, RateReport};
use holomimo::channel::finite_gramian;
use holomimo::geometry::{Polarizations, UpaGeometry};
use holomimo::holographic::{ula_gramian, ula_gramian_offset, upa_gramian};
use holomimo::sweep::{
    optimal_aperture_ula, rx_separation_sweep, upa_aperture_sweep, FiniteLink, SweepGrid, SweepResult, SweepVariable,
};
use holomimo::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt::Write as _;

use crate::config::{ScenarioConfig, SweepModel, SweepVar};
use crate::error::{CliError, CliResult};
use crate::output::{fmt12, records_csv, ResultRecord};

/// Everything a subcommand produces.
pub struct Output {
    pub text: String,
    pub csv: String,
    pub summary: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GramianMode {
    /// Element-by-element sum over the configured array.
    Finite,
    /// Continuous-aperture closed form over the same extent.
    Asymptotic,
    /// Both, with the relative eigenvalue gap.
    Compare,
}

fn to_complex(w: &DMatrix<f64>) -> DMatrix<Complex64> {
    w.map(Complex64::from)
}

/// Distance from the array centre to the receive-array centre.
fn link_distance(cfg: &ScenarioConfig) -> CliResult<f64> {
    Ok(cfg.receiver()?.norm())
}

fn finite_w(cfg: &ScenarioConfig) -> CliResult<DMatrix<Complex64>> {
    let d = link_distance(cfg)?;
    Ok(finite_gramian(&cfg.array()?, &cfg.rx_spec()?, cfg.constants.lambda_m, d)?.w)
}

/// Closed form over the configured extent: a line when `k_half = 0`,
/// a rectangle otherwise.
fn asymptotic_w(cfg: &ScenarioConfig) -> CliResult<DMatrix<Complex64>> {
    if cfg.rx.n_r > 1 {
        return Err(Error::Domain("continuous-aperture closed forms assume a single receive antenna".into()).into());
    }
    let rx = cfg.receiver()?;
    let d = rx.norm();
    let (l_x, l_y) = cfg.array()?.half_extents();
    let (t, r) = (cfg.t_pol(), cfg.r_pol());
    let w = if cfg.tx.k_half == 0 {
        if !(l_y > 0.0) {
            return Err(Error::Domain("closed forms need a non-zero aperture (m_half ≥ 1)".into()).into());
        }
        if rx.x == 0.0 {
            ula_gramian(t, r, l_y / d, rx.y.atan2(rx.z), d)?.w
        } else {
            ula_gramian_offset(t, r, l_y, rx, d)?.w
        }
    } else {
        if !(l_y > 0.0) {
            return Err(Error::Domain("closed forms need m_half ≥ 1 when k_half ≥ 1".into()).into());
        }
        upa_gramian(&UpaGeometry::new(l_x, l_y, rx)?, d, t, r)?.w
    };
    Ok(to_complex(&w))
}

#[derive(Serialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn matrix_json(w: &DMatrix<Complex64>) -> MatrixJson {
    let rows = |f: fn(&Complex64) -> f64| {
        (0..w.nrows())
            .map(|i| (0..w.ncols()).map(|j| f(&w[(i, j)])).collect())
            .collect()
    };
    MatrixJson {
        re: rows(|z| z.re),
        im: rows(|z| z.im),
    }
}

fn print_matrix(out: &mut String, label: &str, w: &DMatrix<Complex64>) {
    let real = w.iter().all(|z| z.im == 0.0);
    writeln!(out, "{label} ({}x{}):", w.nrows(), w.ncols()).unwrap();
    for i in 0..w.nrows() {
        let cells: Vec<String> = (0..w.ncols())
            .map(|j| {
                let z = w[(i, j)];
                if real {
                    format!("{:>20}", fmt12(z.re))
                } else {
                    format!("{:>20}{:+}j", fmt12(z.re), fmt12(z.im))
                }
            })
            .collect();
        writeln!(out, "  {}", cells.join(" ")).unwrap();
    }
}

fn matrix_csv_rows(out: &mut String, hash: &str, mode: &str, w: &DMatrix<Complex64>) {
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            let z = w[(i, j)];
            writeln!(out, "{hash},{mode},{i},{j},{},{}", fmt12(z.re), fmt12(z.im)).unwrap();
        }
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
fn rel_gap(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

pub fn cmd_gramian(cfg: &ScenarioConfig, mode: GramianMode) -> CliResult<Output> {
    let hash = cfg.hash();
    let d = link_distance(cfg)?;
    let mut text = String::new();
    let mut csv = String::from("scenario_hash,mode,row,col,re,im\n");
    writeln!(
        text,
        "scenario {hash}: t_pol={} r_pol={} N_r={} D={} m",
        cfg.tx.t_pol,
        cfg.rx.r_pol,
        cfg.rx.n_r,
        fmt12(d)
    )
    .unwrap();
    let mut summary = serde_json::json!({
        "command": "gramian",
        "scenario_hash": hash,
        "d_m": d,
    });
    let mut eigs = Vec::new();
    for (name, build) in [
        (
            "finite",
            finite_w as fn(&ScenarioConfig) -> CliResult<DMatrix<Complex64>>,
        ),
        ("asymptotic", asymptotic_w),
    ] {
        let wanted = match mode {
            GramianMode::Finite => name == "finite",
            GramianMode::Asymptotic => name == "asymptotic",
            GramianMode::Compare => true,
        };
        if !wanted {
            continue;
        }
        let w = build(cfg)?;
        let e = eig_sorted(&w)?;
        print_matrix(&mut text, name, &w);
        let listed: Vec<String> = e.iter().map(|v| fmt12(*v)).collect();
        writeln!(text, "  eigenvalues: {}", listed.join(", ")).unwrap();
        matrix_csv_rows(&mut csv, &hash, name, &w);
        summary[name] = serde_json::json!({ "matrix": matrix_json(&w), "eigenvalues": e });
        eigs.push(e);
    }
    if let [a, b] = eigs.as_slice() {
        let gaps: Vec<f64> = a.iter().zip(b).map(|(x, y)| rel_gap(*x, *y)).collect();
        writeln!(
            text,
            "{:>6} {:>20} {:>20} {:>14}",
            "index", "finite", "asymptotic", "rel_gap"
        )
        .unwrap();
        for (i, ((x, y), g)) in a.iter().zip(b).zip(&gaps).enumerate() {
            writeln!(
                text,
                "{:>6} {:>20} {:>20} {:>14}",
                i + 1,
                fmt12(*x),
                fmt12(*y),
                fmt12(*g)
            )
            .unwrap();
        }
        summary["rel_gap"] = serde_json::json!(gaps);
    }
    Ok(Output { text, csv, summary })
}

fn describe_rate(out: &mut String, r: &RateReport, ratio: f64) {
    writeln!(out, "  SNR0            {}", fmt12(r.snr0)).unwrap();
    writeln!(out, "  SE              {} bit/s/Hz", fmt12(r.se)).unwrap();
    if let Some(nu) = r.effective_dof_at(ratio) {
        writeln!(out, "  effective DoF   {}", fmt12(nu)).unwrap();
    }
    writeln!(out, "  active streams  {}", r.active_count()).unwrap();
    let th: Vec<String> = r.thresholds.iter().map(|v| fmt12(*v)).collect();
    writeln!(out, "  thresholds      [{}]", th.join(", ")).unwrap();
    let p: Vec<String> = r.allocation.powers.iter().map(|v| fmt12(*v)).collect();
    writeln!(out, "  allocation      [{}]", p.join(", ")).unwrap();
}

pub fn cmd_capacity(cfg: &ScenarioConfig, mode: GramianMode) -> CliResult<Output> {
    if cfg.constants.xi_abs == 0.0 {
        return Err(Error::NoUsableChannel.into());
    }
    let hash = cfg.hash();
    let d = link_distance(cfg)?;
    let snr = cfg.snr()?;
    let snr0 = snr.snr0(cfg.tx.t_pol as usize, d);
    let w = match mode {
        GramianMode::Finite => finite_w(cfg)?,
        GramianMode::Asymptotic => asymptotic_w(cfg)?,
        GramianMode::Compare => return Err(CliError::Config("capacity takes --mode finite or asymptotic".into())),
    };
    let r = spectral_efficiency(&w, snr0)?;
    let mut text = String::new();
    writeln!(
        text,
        "scenario {hash}: t_pol={} r_pol={} N_r={} D={} m",
        cfg.tx.t_pol,
        cfg.rx.r_pol,
        cfg.rx.n_r,
        fmt12(d)
    )
    .unwrap();
    describe_rate(&mut text, &r, snr.ratio);
    let record = ResultRecord {
        t_pol: cfg.tx.t_pol as usize,
        r_pol: cfg.rx.r_pol as usize,
        grid: vec![],
        se: r.se,
        dof: r.effective_dof_at(snr.ratio),
        n_active: r.active_count(),
        eigenvalues: r.eigenvalues.clone(),
        lambda_star: None,
    };
    let csv = records_csv(&hash, &[], &[record]);
    let summary = serde_json::json!({
        "command": "capacity",
        "scenario_hash": hash,
        "mode": format!("{mode:?}").to_lowercase(),
        "d_m": d,
        "snr_ratio": snr.ratio,
        "convention": snr.convention,
        "dof_effective": r.effective_dof_at(snr.ratio),
        "report": r,
    });
    Ok(Output { text, csv, summary })
}

#[derive(Serialize)]
struct FractionJson {
    fraction: f64,
    point: Vec<f64>,
    se: f64,
    aperture_over_d: f64,
}

#[derive(Serialize)]
struct PairJson {
    t_pol: usize,
    r_pol: usize,
    argmax: Vec<f64>,
    se_max: f64,
    lambda_star_m: f64,
    lambda_star_over_d: f64,
    fractions: Vec<FractionJson>,
}

fn run_pair(cfg: &ScenarioConfig, t: Polarizations, r: Polarizations) -> CliResult<SweepResult> {
    let s = cfg.sweep()?;
    let snr = cfg.snr()?;
    let lambda = cfg.constants.lambda_m;
    let link = |d: f64, theta: f64| FiniteLink {
        t_pol: t,
        r_pol: r,
        m_half: cfg.tx.m_half,
        n_r: cfg.rx.n_r,
        d,
        theta,
        lambda,
        rx_axis: cfg.rx.axis,
    };
    let (d, theta) = cfg.polar()?;
    let in_lambda =
        |a: f64, b: f64, n: usize| SweepGrid::linspace(SweepVariable::RxSeparation, a * lambda, b * lambda, n);
    Ok(match s.variable {
        SweepVar::Aperture => {
            let grid = SweepGrid::linspace(SweepVariable::Aperture, s.start, s.stop, s.points)?;
            match s.model {
                SweepModel::Ula => optimal_aperture_ula(t, r, theta, d, &snr, &grid, &s.fractions)?,
                SweepModel::Upa => upa_aperture_sweep(t, r, theta, d, &snr, s.aspect, &grid, &s.fractions)?,
                SweepModel::Finite => {
                    let dr = SweepGrid::new(SweepVariable::RxSeparation, vec![cfg.delta_r_m()])?;
                    rx_separation_sweep(&link(d, theta), &grid, &dr, &snr, &s.fractions)?
                }
            }
        }
        SweepVar::RxSeparation => {
            let aperture = 2.0 * cfg.tx.m_half as f64 * cfg.tx.delta_t_m;
            let ap = SweepGrid::new(SweepVariable::Aperture, vec![aperture])?;
            let dr = in_lambda(s.start, s.stop, s.points)?;
            rx_separation_sweep(&link(d, theta), &ap, &dr, &snr, &s.fractions)?
        }
        SweepVar::ApertureRxSeparation => {
            let ap = SweepGrid::linspace(SweepVariable::Aperture, s.start, s.stop, s.points)?;
            let dr = in_lambda(
                s.rx_start_in_lambda.unwrap(),
                s.rx_stop_in_lambda.unwrap(),
                s.rx_points.unwrap(),
            )?;
            rx_separation_sweep(&link(d, theta), &ap, &dr, &snr, &s.fractions)?
        }
    })
}

/// Maps a sweep point `(Λ, Δ_R)` and `λ` to the CSV grid columns.
type GridColumns = fn(&[f64], f64) -> Vec<f64>;

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| fmt12(*v)).collect();
    format!("({})", parts.join(", "))
}

pub fn cmd_sweep(cfg: &ScenarioConfig) -> CliResult<Output> {
    let s = cfg.sweep()?;
    if s.variable != SweepVar::Aperture && s.model != SweepModel::Finite {
        return Err(CliError::Config(
            "receive-separation sweeps need sweep.model = \"finite\"".into(),
        ));
    }
    let hash = cfg.hash();
    let (d, theta) = cfg.polar()?;
    let lambda = cfg.constants.lambda_m;
    let (columns, pick): (&[&str], GridColumns) = match s.variable {
        SweepVar::Aperture => (&["aperture_m"], |p, _| vec![p[0]]),
        SweepVar::RxSeparation => (&["delta_r_in_lambda"], |p, l| vec![p[1] / l]),
        SweepVar::ApertureRxSeparation => (&["aperture_m", "delta_r_in_lambda"], |p, l| vec![p[0], p[1] / l]),
    };
    let convention = cfg.convention();
    let mut text = String::new();
    writeln!(
        text,
        "scenario {hash}: sweep {:?} ({:?}), D={} m, theta={} deg, P/sigma2={} dB, convention {:?}",
        s.variable,
        s.model,
        fmt12(d),
        fmt12(theta.to_degrees()),
        fmt12(cfg.snr.value_db),
        convention
    )
    .unwrap();
    let mut records = Vec::new();
    let mut pairs = Vec::new();
    for (t, r) in cfg.pairs()? {
        let res = run_pair(cfg, t, r)?;
        let best = res
            .rows
            .iter()
            .enumerate()
            .fold(0, |b, (i, row)| if row.se > res.rows[b].se { i } else { b });
        let lambda_star = res.argmax.point[0];
        for (i, row) in res.rows.iter().enumerate() {
            records.push(ResultRecord {
                t_pol: t.count(),
                r_pol: r.count(),
                grid: pick(&row.point, lambda),
                se: row.se,
                dof: row.dof,
                n_active: row.n_active,
                eigenvalues: row.eigenvalues.clone(),
                lambda_star: (i == best).then_some(lambda_star),
            });
        }
        writeln!(
            text,
            "  {}x{}: max SE {} bit/s/Hz at {} (Lambda*/D = {})",
            t.count(),
            r.count(),
            fmt12(res.argmax.se),
            fmt_point(&res.argmax.point),
            fmt12(lambda_star / d)
        )
        .unwrap();
        let fractions = res
            .fractions
            .iter()
            .map(|f| {
                writeln!(
                    text,
                    "    {}% of max: {} (Lambda/D = {}, SE {})",
                    fmt12(100.0 * f.fraction),
                    fmt_point(&f.point),
                    fmt12(f.point[0] / d),
                    fmt12(f.se)
                )
                .unwrap();
                FractionJson {
                    fraction: f.fraction,
                    point: f.point.clone(),
                    se: f.se,
                    aperture_over_d: f.point[0] / d,
                }
            })
            .collect();
        pairs.push(PairJson {
            t_pol: t.count(),
            r_pol: r.count(),
            argmax: res.argmax.point.clone(),
            se_max: res.argmax.se,
            lambda_star_m: lambda_star,
            lambda_star_over_d: lambda_star / d,
            fractions,
        });
    }
    let csv = records_csv(&hash, columns, &records);
    let summary = serde_json::json!({
        "command": "sweep",
        "scenario_hash": hash,
        "variable": s.variable,
        "model": s.model,
        "d_m": d,
        "theta_deg": theta.to_degrees(),
        "snr_db": cfg.snr.value_db,
        "convention": convention,
        "results": pairs,
    });
    Ok(Output { text, csv, summary })
}
