//! Scenario files: TOML with one table per concern and unit-suffixed keys.

use std::path::Path;

use holomimo::capacity::{SnrConfig, SnrConvention};
use holomimo::channel::PhysicalConstants;
use holomimo::geometry::{ArraySpec, Point, PolarPlacement, Polarizations, RxAxis, RxSpec};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub constants: Constants,
    pub tx: Tx,
    pub rx: Rx,
    pub snr: Snr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub lambda_m: f64,
    #[serde(default = "one")]
    pub xi_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tx {
    pub delta_t_m: f64,
    pub m_half: usize,
    #[serde(default)]
    pub k_half: usize,
    pub t_pol: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RxMode {
    Polar,
    Cartesian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rx {
    pub mode: RxMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0_m: Option<f64>,
    #[serde(default = "one_usize")]
    pub n_r: usize,
    #[serde(default = "half")]
    pub delta_r_in_lambda: f64,
    pub r_pol: u8,
    #[serde(default)]
    pub axis: RxAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionName {
    Direct,
    PerTpol,
    ReferenceDistance,
    PerEq6,
    LinkBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snr {
    pub value_db: f64,
    pub convention: ConventionName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_ref_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Aperture,
    RxSeparation,
    ApertureRxSeparation,
}

/// Transmit model used by aperture sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepModel {
    /// Continuous linear aperture along y.
    #[default]
    Ula,
    /// Continuous rectangular aperture with `L_x/L_y = aspect`.
    Upa,
    /// `2M+1` elements along y spread over the swept aperture.
    Finite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVar,
    /// Aperture in meters, or `Δ_R/λ` for `rx_separation`.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub fractions: Vec<f64>,
    #[serde(default = "one")]
    pub aspect: f64,
    #[serde(default)]
    pub model: SweepModel,
    /// Polarization pairs such as `"3x3"`; defaults to `tx.t_pol × rx.r_pol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<String>>,
    /// Second axis of the joint sweep, in wavelengths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_start_in_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_stop_in_lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_points: Option<usize>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn half() -> f64 {
    0.5
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn pol(n: u8, key: &str) -> CliResult<Polarizations> {
    Polarizations::new(n).map_err(|_| config_err(format!("{key} must be 1, 2 or 3, got {n}")))
}

/// Parses `"3x3"`-style pairs into `(t_pol, r_pol)`.
pub fn parse_pair(s: &str) -> CliResult<(Polarizations, Polarizations)> {
    let (t, r) = s
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| config_err(format!("sweep.pairs: expected \"TxR\", got {s:?}")))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u8>()
            .map_err(|_| config_err(format!("sweep.pairs: bad polarization count in {s:?}")))
    };
    Ok((pol(parse(t)?, "sweep.pairs")?, pol(parse(r)?, "sweep.pairs")?))
}

impl ScenarioConfig {
    pub fn load(path: &Path, overrides: &[String]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> CliResult<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> CliResult<()> {
        if !(self.constants.lambda_m > 0.0) {
            return Err(config_err("constants.lambda_m must be positive"));
        }
        if !(self.constants.xi_abs >= 0.0) {
            return Err(config_err("constants.xi_abs must be non-negative"));
        }
        pol(self.tx.t_pol, "tx.t_pol")?;
        pol(self.rx.r_pol, "rx.r_pol")?;
        if self.rx.n_r == 0 {
            return Err(config_err("rx.n_r must be at least 1"));
        }
        match self.rx.mode {
            RxMode::Polar => {
                if self.rx.d_m.is_none() || self.rx.theta_deg.is_none() {
                    return Err(config_err("rx.mode = \"polar\" needs rx.d_m and rx.theta_deg"));
                }
                if self.rx.x0_m.is_some() || self.rx.y0_m.is_some() || self.rx.z0_m.is_some() {
                    return Err(config_err("rx.mode = \"polar\" does not take x0_m/y0_m/z0_m"));
                }
            }
            RxMode::Cartesian => {
                if self.rx.x0_m.is_none() || self.rx.y0_m.is_none() || self.rx.z0_m.is_none() {
                    return Err(config_err("rx.mode = \"cartesian\" needs rx.x0_m, rx.y0_m and rx.z0_m"));
                }
                if self.rx.d_m.is_some() || self.rx.theta_deg.is_some() {
                    return Err(config_err("rx.mode = \"cartesian\" does not take d_m/theta_deg"));
                }
            }
        }
        match (self.snr.convention, self.snr.d_ref_m) {
            (ConventionName::ReferenceDistance, None) => {
                return Err(config_err("snr.convention = \"reference_distance\" needs snr.d_ref_m"));
            }
            (ConventionName::ReferenceDistance, Some(_)) | (_, None) => {}
            (_, Some(_)) => return Err(config_err("snr.d_ref_m only applies to \"reference_distance\"")),
        }
        if let Some(s) = &self.sweep {
            if let Some(pairs) = &s.pairs {
                for p in pairs {
                    parse_pair(p)?;
                }
            }
            let joint = [
                s.rx_start_in_lambda.is_some(),
                s.rx_stop_in_lambda.is_some(),
                s.rx_points.is_some(),
            ];
            match s.variable {
                SweepVar::ApertureRxSeparation if joint.iter().any(|b| !b) => {
                    return Err(config_err(
                        "sweep.variable = \"aperture_rx_separation\" needs rx_start_in_lambda, rx_stop_in_lambda and rx_points",
                    ));
                }
                SweepVar::Aperture | SweepVar::RxSeparation if joint.iter().any(|&b| b) => {
                    return Err(config_err("sweep.rx_* keys only apply to \"aperture_rx_separation\""));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))[..16].to_string()
    }

    pub fn t_pol(&self) -> Polarizations {
        Polarizations::new(self.tx.t_pol).expect("checked on load")
    }

    pub fn r_pol(&self) -> Polarizations {
        Polarizations::new(self.rx.r_pol).expect("checked on load")
    }

    pub fn array(&self) -> CliResult<ArraySpec> {
        Ok(ArraySpec::new(
            self.tx.delta_t_m,
            self.tx.m_half,
            self.tx.k_half,
            self.t_pol(),
        )?)
    }

    /// Centre of the receive array.
    pub fn receiver(&self) -> CliResult<Point> {
        let r = &self.rx;
        Ok(match r.mode {
            RxMode::Polar => PolarPlacement::new(r.d_m.unwrap(), r.theta_deg.unwrap().to_radians())?.to_cartesian(),
            RxMode::Cartesian => Point::new(r.x0_m.unwrap(), r.y0_m.unwrap(), r.z0_m.unwrap()),
        })
    }

    /// `(D, θ)` of a receiver in the y-z plane.
    pub fn polar(&self) -> CliResult<(f64, f64)> {
        let r = &self.rx;
        match r.mode {
            RxMode::Polar => Ok((r.d_m.unwrap(), r.theta_deg.unwrap().to_radians())),
            RxMode::Cartesian => {
                if r.x0_m.unwrap() != 0.0 {
                    return Err(config_err(
                        "this model needs the receiver in the y-z plane (rx.x0_m = 0)",
                    ));
                }
                let (y, z) = (r.y0_m.unwrap(), r.z0_m.unwrap());
                Ok((y.hypot(z), y.atan2(z)))
            }
        }
    }

    pub fn delta_r_m(&self) -> f64 {
        self.rx.delta_r_in_lambda * self.constants.lambda_m
    }

    pub fn rx_spec(&self) -> CliResult<RxSpec> {
        Ok(RxSpec::line(
            self.receiver()?,
            self.rx.n_r,
            self.delta_r_m(),
            self.rx.axis,
            self.r_pol(),
        )?)
    }

    pub fn constants(&self) -> CliResult<PhysicalConstants> {
        Ok(PhysicalConstants::new(
            self.constants.lambda_m,
            Complex64::new(self.constants.xi_abs, 0.0),
        )?)
    }

    pub fn convention(&self) -> SnrConvention {
        let (xi_abs, lambda) = (self.constants.xi_abs, self.constants.lambda_m);
        match self.snr.convention {
            ConventionName::Direct => SnrConvention::Direct,
            ConventionName::PerTpol => SnrConvention::PerTpol,
            ConventionName::ReferenceDistance => SnrConvention::ReferenceDistance {
                d_ref: self.snr.d_ref_m.unwrap(),
            },
            ConventionName::PerEq6 => SnrConvention::PerEq6 { xi_abs, lambda },
            ConventionName::LinkBudget => SnrConvention::LinkBudget { xi_abs, lambda },
        }
    }

    pub fn snr(&self) -> CliResult<SnrConfig> {
        Ok(SnrConfig::from_db(self.snr.value_db, self.convention())?)
    }

    pub fn sweep(&self) -> CliResult<&Sweep> {
        self.sweep
            .as_ref()
            .ok_or_else(|| config_err("this command needs a [sweep] table"))
    }

    /// Polarization pairs to sweep.
    pub fn pairs(&self) -> CliResult<Vec<(Polarizations, Polarizations)>> {
        match self.sweep.as_ref().and_then(|s| s.pairs.as_ref()) {
            Some(p) => p.iter().map(|s| parse_pair(s)).collect(),
            None => Ok(vec![(self.t_pol(), self.r_pol())]),
        }
    }
}

/// Applies `section.key=value`; the value is read as a TOML literal, falling
/// back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> CliResult<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("--set expects key=value, got {spec:?}")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields at least one item");
    let mut cur = table;
    for k in parents {
        cur = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| config_err(format!("--set {path}: {k} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}
