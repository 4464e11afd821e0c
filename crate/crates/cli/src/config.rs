//! Run configuration: one TOML document with optional sections.
//!
//! ```toml
//! [system]
//! dipolar_hz = 1.0e6
//! rabi_hz = 1.0e8
//! norm = "spectral"
//! [[system.nucleus]]
//! hyperfine_hz = [2.0e7, 0.0, 6.0e7]
//! zeeman_hz = 1.0e6
//!
//! [noise]
//! t1_s = 1.0e-4
//! t2_s = 1.0e-4
//!
//! [sweep]
//! t_min_s = 1.0e-7
//! t_max_s = 1.0e-2
//! points = 25
//! fidelity = "relative"
//!
//! [outputs]
//! dir = "out"
//!
//! [verify]
//! checks = ["double-commutator", "bch-scaling"]
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use toml::Spanned;
use wqc::analysis::{log_grid, FidelityMeasure, DEFAULT_POINTS, DEFAULT_T_MAX, DEFAULT_T_MIN};
use wqc::spin_system::{NoiseParams, SystemFile, SystemSpec};
use wqc::verification::Check;
use wqc::Error;

const DEFAULT_NOISE_T: f64 = 100e-6;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<SystemFile>,
    noise: Option<RawNoise>,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    outputs: RawOutputs,
    #[serde(default)]
    verify: RawVerify,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    t1_s: Spanned<f64>,
    t2_s: Spanned<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    t_min_s: Option<Spanned<f64>>,
    t_max_s: Option<Spanned<f64>>,
    points: Option<Spanned<usize>>,
    #[serde(default)]
    fidelity: FidelityMeasure,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    checks: Option<Vec<Check>>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub fidelity: FidelityMeasure,
}

impl SweepConfig {
    pub fn grid(&self) -> Result<Vec<f64>> {
        Ok(log_grid(self.t_min, self.t_max, self.points)?)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: SystemSpec,
    /// Relaxation times for the verification checks.
    pub noise: NoiseParams,
    pub sweep: SweepConfig,
    pub output_dir: PathBuf,
    pub checks: Vec<Check>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_toml_str("").expect("empty config is valid")
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn at<T>(src: &str, field: &str, v: &Spanned<T>) -> String {
    format!("`{field}` (line {})", line_of(src, v.span().start))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Self::from_toml_str(&src).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn from_toml_str(src: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(src).map_err(|e| anyhow!("{e}"))?;

        let system = match raw.system {
            Some(f) => SystemSpec::try_from(f).context("in section [system]")?,
            None => SystemSpec::default(),
        };

        let noise = match &raw.noise {
            Some(n) => {
                let params = NoiseParams {
                    t1: *n.t1_s.get_ref(),
                    t2: *n.t2_s.get_ref(),
                };
                if let Err(Error::InvalidNoise { field, reason }) = params.validate() {
                    let span = if field == "t1" { &n.t1_s } else { &n.t2_s };
                    bail!(
                        "invalid noise field {}: {reason}",
                        at(src, &format!("noise.{field}_s"), span)
                    );
                }
                params
            }
            None => NoiseParams::uniform(DEFAULT_NOISE_T)?,
        };

        let sweep = SweepConfig {
            t_min: raw
                .sweep
                .t_min_s
                .as_ref()
                .map_or(DEFAULT_T_MIN, |v| *v.get_ref()),
            t_max: raw
                .sweep
                .t_max_s
                .as_ref()
                .map_or(DEFAULT_T_MAX, |v| *v.get_ref()),
            points: raw
                .sweep
                .points
                .as_ref()
                .map_or(DEFAULT_POINTS, |v| *v.get_ref()),
            fidelity: raw.sweep.fidelity,
        };
        if !(sweep.t_min > 0.0 && sweep.t_min.is_finite()) {
            let field = raw
                .sweep
                .t_min_s
                .as_ref()
                .map(|v| at(src, "sweep.t_min_s", v));
            bail!("{} must be positive and finite", field.unwrap_or_default());
        }
        if !(sweep.t_max >= sweep.t_min && sweep.t_max.is_finite()) {
            let field = raw
                .sweep
                .t_max_s
                .as_ref()
                .map_or("`sweep.t_max_s`".into(), |v| at(src, "sweep.t_max_s", v));
            bail!("{field} must be finite and at least sweep.t_min_s");
        }
        if sweep.points == 0 {
            let field = raw
                .sweep
                .points
                .as_ref()
                .map_or("`sweep.points`".into(), |v| at(src, "sweep.points", v));
            bail!("{field} must be at least 1");
        }

        Ok(Self {
            system,
            noise,
            sweep,
            output_dir: raw.outputs.dir.unwrap_or_else(|| PathBuf::from("out")),
            checks: raw.verify.checks.unwrap_or_else(|| Check::ALL.to_vec()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.system, SystemSpec::default());
        assert_eq!(c.sweep.grid().unwrap().len(), 25);
        assert_eq!(c.checks.len(), Check::ALL.len());
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert_eq!(c.sweep.fidelity, FidelityMeasure::Relative);
    }

    #[test]
    fn full_document() {
        let src = r#"
[system]
dipolar_hz = 2.0e6
rabi_hz = 5.0e7
[[system.nucleus]]
hyperfine_hz = [1.0e7, 0.0, 3.0e7]

[noise]
t1_s = 2.0e-5
t2_s = 1.0e-5

[sweep]
points = 3
fidelity = "hilbert-schmidt"

[verify]
checks = ["cptp", "serial-swap"]
"#;
        let c = RunConfig::from_toml_str(src).unwrap();
        assert!((c.system.dipolar - 2.0e6 * std::f64::consts::TAU).abs() < 1e-6);
        assert_eq!(
            c.noise,
            NoiseParams {
                t1: 2.0e-5,
                t2: 1.0e-5
            }
        );
        assert_eq!(c.sweep.points, 3);
        assert_eq!(c.sweep.fidelity, FidelityMeasure::HilbertSchmidt);
        assert_eq!(c.checks, vec![Check::Cptp, Check::SerialSwap]);
    }

    #[test]
    fn noise_error_names_field_and_line() {
        let src = "[noise]\nt1_s = 1.0e-6\nt2_s = 5.0e-6\n";
        let msg = format!("{:#}", RunConfig::from_toml_str(src).unwrap_err());
        assert!(msg.contains("noise.t2_s"), "{msg}");
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let msg = format!(
            "{:#}",
            RunConfig::from_toml_str("[sweep]\npoints = \"many\"\n").unwrap_err()
        );
        assert!(msg.contains("line 2"), "{msg}");
        let msg = format!(
            "{:#}",
            RunConfig::from_toml_str("[sweep]\nbogus = 1\n").unwrap_err()
        );
        assert!(msg.contains("bogus"), "{msg}");
        let msg = format!(
            "{:#}",
            RunConfig::from_toml_str("[verify]\nchecks = [\"nope\"]\n").unwrap_err()
        );
        assert!(msg.contains("nope"), "{msg}");
        let msg = format!(
            "{:#}",
            RunConfig::from_toml_str("[sweep]\npoints = 0\n").unwrap_err()
        );
        assert!(msg.contains("sweep.points"), "{msg}");
    }
}
