//! Run configuration: a sectioned `key = value` file (TOML), overridable
//! from the command line.

use serde::{Deserialize, Serialize};

use bubblekit::numerics::{QuadratureMethod, QuadratureSpec};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub potential: PotentialSection,
    pub ring: RingSection,
    pub quadrature: QuadratureSection,
    pub audit: AuditSection,
    pub scaling: ScalingSection,
    pub residual: ResidualSection,
    pub pohozaev: PohozaevSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub dim: usize,
    pub seed: u64,
    pub out: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSection {
    /// `builtin:appendix_d` or polynomial text such as `V = 2 - r`.
    pub spec: String,
    /// `four_dim` or `two_dim`.
    pub symmetry: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RingSection {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    /// Absent means the critical scale μ* of the n-ring.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Absent means r₀/4.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub method: String,
    pub order: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditSection {
    pub face: String,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResidualSection {
    pub mu_ladder: usize,
    pub far_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PohozaevSection {
    pub preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run: RunSection::default(),
            potential: PotentialSection::default(),
            ring: RingSection::default(),
            quadrature: QuadratureSection::default(),
            audit: AuditSection::default(),
            scaling: ScalingSection::default(),
            residual: ResidualSection::default(),
            pohozaev: PohozaevSection::default(),
        }
    }
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            dim: 7,
            seed: 0,
            out: "out".into(),
        }
    }
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            spec: "builtin:appendix_d".into(),
            symmetry: "four_dim".into(),
            guess: None,
        }
    }
}

impl Default for RingSection {
    fn default() -> Self {
        RingSection {
            m: 8,
            n: 8,
            lambda: 30.0,
            mu: None,
            delta: None,
        }
    }
}

impl Default for QuadratureSection {
    fn default() -> Self {
        QuadratureSection {
            method: "radial_gauss".into(),
            order: 48,
            samples: 1 << 20,
        }
    }
}

impl Default for AuditSection {
    fn default() -> Self {
        AuditSection {
            face: "plus".into(),
            m: 8,
        }
    }
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection { n_min: 64, n_max: 4096 }
    }
}

impl Default for ResidualSection {
    fn default() -> Self {
        ResidualSection {
            mu_ladder: 4,
            far_radius: 1.0,
        }
    }
}

impl Default for PohozaevSection {
    fn default() -> Self {
        PohozaevSection {
            preset: "gaussian-ball-3d".into(),
            order: None,
        }
    }
}

/// 1-based line of the byte offset `pos` in `text`.
fn line_of(text: &str, pos: usize) -> usize {
    text[..pos.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| line_of(text, s.start));
            CliError::Usage(format!("config line {line}: {}", e.message()))
        })
    }

    /// Line of `key` inside `[section]` in the source text, for error reports.
    pub fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
        let mut current = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                current = name.trim().to_string();
            } else if current == section {
                if let Some((k, _)) = line.split_once('=') {
                    if k.trim() == key {
                        return Some(i + 1);
                    }
                }
            }
        }
        None
    }

    pub fn quadrature_spec(&self) -> Result<QuadratureSpec, CliError> {
        let method = QuadratureMethod::parse(&self.quadrature.method)
            .ok_or_else(|| CliError::Usage(format!("unknown quadrature method `{}`", self.quadrature.method)))?;
        Ok(match method {
            QuadratureMethod::MonteCarlo => QuadratureSpec::monte_carlo(self.quadrature.samples, self.run.seed),
            QuadratureMethod::RadialGauss => QuadratureSpec::radial_gauss(self.quadrature.order),
            QuadratureMethod::TensorGauss => QuadratureSpec::tensor_gauss(self.quadrature.order),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let c = RunConfig::parse("[run]\ndim = 8\n").unwrap();
        assert_eq!(c.run.dim, 8);
        assert_eq!(c.potential.spec, "builtin:appendix_d");
        assert_eq!(c.ring.mu, None);
    }

    #[test]
    fn full_file_with_comments() {
        let text = "# study\n[potential]\nspec = \"V = 2 - r\"  # linear\nsymmetry = \"four_dim\"\n\n[ring]\nmu = 40.0\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.potential.spec, "V = 2 - r");
        assert_eq!(c.ring.mu, Some(40.0));
        assert_eq!(RunConfig::locate(text, "potential", "spec"), Some(3));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::parse("[run]\ndim = 7\nbogus = 1\n").unwrap_err();
        match err {
            CliError::Usage(m) => assert!(m.contains("line 3"), "{m}"),
            other => panic!("{other:?}"),
        }
        let err = RunConfig::parse("[run]\n\ndim = \"seven\"\n").unwrap_err();
        assert!(format!("{err:?}").contains("line 3"));
    }

    #[test]
    fn serialization_round_trips() {
        let mut c = RunConfig::default();
        c.ring.delta = Some(0.05);
        let text = toml::to_string(&c).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}
