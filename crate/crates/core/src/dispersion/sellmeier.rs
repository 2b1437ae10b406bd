//! Sellmeier coefficient sets and their plain-text data file.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_DATA: &str = include_str!("../../data/sellmeier.txt");

/// Functional form identifier of a coefficient set. Wavelengths in µm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FunctionalForm {
    /// `n² = A − F·λ² + Σ Bᵢ·λ²/(λ² − Cᵢ)`
    Sellmeier,
    /// `n² = A − F·λ² + Σ Bᵢ/(λ² − Cᵢ)`
    PoleFraction,
}

impl FunctionalForm {
    pub fn id(self) -> &'static str {
        match self {
            FunctionalForm::Sellmeier => "sellmeier",
            FunctionalForm::PoleFraction => "pole-fraction",
        }
    }
}

impl fmt::Display for FunctionalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for FunctionalForm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sellmeier" => Ok(FunctionalForm::Sellmeier),
            "pole-fraction" => Ok(FunctionalForm::PoleFraction),
            other => Err(format!("unknown functional form `{other}`")),
        }
    }
}

/// Dispersion of one crystal axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierModel {
    pub name: String,
    pub form: FunctionalForm,
    /// `A, F, B₁, C₁, B₂, C₂, …`
    pub coefficients: Vec<f64>,
    /// Validity interval in µm.
    pub validity_um: (f64, f64),
}

impl SellmeierModel {
    pub fn new(
        name: impl Into<String>,
        form: FunctionalForm,
        coefficients: Vec<f64>,
        validity_um: (f64, f64),
    ) -> Result<Self> {
        let model = SellmeierModel {
            name: name.into(),
            form,
            coefficients,
            validity_um,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let (lo, hi) = self.validity_um;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::Config(format!(
                "model `{}`: invalid validity range [{lo}, {hi}] um",
                self.name
            )));
        }
        let c = &self.coefficients;
        if c.len() < 4 || !c.len().is_multiple_of(2) || c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!(
                "model `{}`: expected A, F followed by (B, C) pairs, got {} coefficients",
                self.name,
                c.len()
            )));
        }
        for pole in c[2..].chunks_exact(2).map(|bc| bc[1]) {
            if pole > 0.0 {
                let pole_um = pole.sqrt();
                if pole_um >= lo && pole_um <= hi {
                    return Err(Error::Config(format!(
                        "model `{}`: pole at {pole_um} um inside validity range",
                        self.name
                    )));
                }
            }
        }
        // Coarse scan for the 1 < n < 3 contract.
        for i in 0..=200 {
            let um = lo + (hi - lo) * i as f64 / 200.0;
            let n = self.eval_um(um);
            if !(n > 1.0 && n < 3.0) {
                return Err(Error::Config(format!(
                    "model `{}`: index {n} at {um} um outside (1, 3)",
                    self.name
                )));
            }
        }
        Ok(())
    }

    fn eval_um(&self, um: f64) -> f64 {
        let l2 = um * um;
        let c = &self.coefficients;
        let mut n2 = c[0] - c[1] * l2;
        for bc in c[2..].chunks_exact(2) {
            n2 += match self.form {
                FunctionalForm::Sellmeier => bc[0] * l2 / (l2 - bc[1]),
                FunctionalForm::PoleFraction => bc[0] / (l2 - bc[1]),
            };
        }
        n2.sqrt()
    }

    pub fn contains_nm(&self, wavelength_nm: f64) -> bool {
        let um = wavelength_nm * 1e-3;
        um >= self.validity_um.0 && um <= self.validity_um.1
    }

    /// Refractive index at a vacuum wavelength given in nm.
    pub fn refractive_index(&self, wavelength_nm: f64) -> Result<f64> {
        let um = wavelength_nm * 1e-3;
        if !self.contains_nm(wavelength_nm) {
            return Err(Error::Range {
                model: self.name.clone(),
                wavelength_um: um,
                min_um: self.validity_um.0,
                max_um: self.validity_um.1,
            });
        }
        Ok(self.eval_um(um))
    }

    /// Group index `n − λ·dn/dλ` by central difference.
    pub fn group_index(&self, wavelength_nm: f64) -> Result<f64> {
        let h = 1e-3 * wavelength_nm.max(1.0) * 1e-3;
        let n = self.refractive_index(wavelength_nm)?;
        let up = self.refractive_index(wavelength_nm + h)?;
        let down = self.refractive_index(wavelength_nm - h)?;
        Ok(n - wavelength_nm * (up - down) / (2.0 * h))
    }
}

/// Free function form of [`SellmeierModel::refractive_index`].
pub fn refractive_index(model: &SellmeierModel, wavelength_nm: f64) -> Result<f64> {
    model.refractive_index(wavelength_nm)
}

/// A named collection of coefficient sets with one default.
#[derive(Debug, Clone)]
pub struct SellmeierRegistry {
    models: Vec<SellmeierModel>,
    default: usize,
}

impl SellmeierRegistry {
    /// Coefficient sets compiled into the binary.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_DATA, Path::new("<builtin sellmeier.txt>"))
            .expect("builtin Sellmeier data is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses the key-value data format documented in `data/sellmeier.txt`.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        #[derive(Default)]
        struct Block {
            line: usize,
            name: Option<String>,
            form: Option<FunctionalForm>,
            coefficients: Option<Vec<f64>>,
            range: Option<(f64, f64)>,
            default: bool,
        }

        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let floats = |line: usize, value: &str| -> Result<Vec<f64>> {
            value
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| parse_err(line, format!("bad number `{}`: {e}", v.trim())))
                })
                .collect()
        };

        let mut blocks: Vec<Block> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| {
                    parse_err(line, format!("expected `key = value`, got `{content}`"))
                })?;
            if key == "name" {
                blocks.push(Block {
                    line,
                    name: Some(value.to_string()),
                    ..Block::default()
                });
                continue;
            }
            let block = blocks
                .last_mut()
                .ok_or_else(|| parse_err(line, format!("`{key}` before any `name`")))?;
            match key {
                "form" => block.form = Some(value.parse().map_err(|e| parse_err(line, e))?),
                "coefficients" => block.coefficients = Some(floats(line, value)?),
                "range_um" => {
                    let r = floats(line, value)?;
                    if r.len() != 2 {
                        return Err(parse_err(line, "range_um needs two values".into()));
                    }
                    block.range = Some((r[0], r[1]));
                }
                "default" => {
                    block.default = value
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad boolean `{value}`")))?
                }
                other => return Err(parse_err(line, format!("unknown key `{other}`"))),
            }
        }

        let mut models = Vec::with_capacity(blocks.len());
        let mut default = None;
        for b in blocks {
            let name = b.name.unwrap_or_default();
            let missing =
                |what: &str| parse_err(b.line, format!("model `{name}` missing `{what}`"));
            let form = b.form.ok_or_else(|| missing("form"))?;
            let coefficients = b
                .coefficients
                .clone()
                .ok_or_else(|| missing("coefficients"))?;
            let range = b.range.ok_or_else(|| missing("range_um"))?;
            if models.iter().any(|m: &SellmeierModel| m.name == name) {
                return Err(parse_err(b.line, format!("duplicate model `{name}`")));
            }
            if b.default {
                if default.is_some() {
                    return Err(parse_err(b.line, "more than one default model".into()));
                }
                default = Some(models.len());
            }
            models.push(SellmeierModel::new(name, form, coefficients, range)?);
        }
        if models.is_empty() {
            return Err(parse_err(0, "no models defined".into()));
        }
        Ok(SellmeierRegistry {
            models,
            default: default.unwrap_or(0),
        })
    }

    pub fn default_model(&self) -> &SellmeierModel {
        &self.models[self.default]
    }

    pub fn get(&self, name: &str) -> Result<&SellmeierModel> {
        self.models.iter().find(|m| m.name == name).ok_or_else(|| {
            Error::Config(format!(
                "unknown Sellmeier model `{name}` (available: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&str> {
        self.models.iter().map(|m| m.name.as_str()).collect()
    }

    pub fn models(&self) -> &[SellmeierModel] {
        &self.models
    }
}

/// The default KTP z-axis model.
pub fn default_model() -> SellmeierModel {
    SellmeierRegistry::builtin().default_model().clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_registry() {
        let reg = SellmeierRegistry::builtin();
        assert_eq!(reg.default_model().name, "ktp-z-fradkin1999");
        assert_eq!(reg.names().len(), 3);
        assert!(reg.get("ktp-z-kato2002").is_ok());
        assert!(matches!(reg.get("bk7"), Err(Error::Config(_))));
    }

    #[test]
    fn pump_index_regression() {
        let n = default_model().refractive_index(1064.5).unwrap();
        assert!((1.7..=1.95).contains(&n));
        // Frozen from direct evaluation of the Fradkin coefficients.
        assert!((n - 1.830_131_943_962_484_6).abs() < 1e-12, "{n}");
    }

    #[test]
    fn normal_dispersion() {
        let m = default_model();
        assert!(m.refractive_index(1589.0).unwrap() < m.refractive_index(637.5).unwrap());
    }

    #[test]
    fn out_of_range() {
        let m = default_model();
        let err = m.refractive_index(300.0).unwrap_err();
        assert!(err.to_string().contains("ktp-z-fradkin1999"));
        assert!(m.refractive_index(5000.0).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "name = a\nform = sellmeier\ncoefficients = 2.0, 0.0, 1.0, x\n";
        match SellmeierRegistry::parse(text, Path::new("t.txt")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "form = sellmeier\n";
        assert!(matches!(
            SellmeierRegistry::parse(text, Path::new("t.txt")),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn pole_inside_range_rejected() {
        let r = SellmeierModel::new(
            "bad",
            FunctionalForm::PoleFraction,
            vec![2.0, 0.0, 0.1, 1.0],
            (0.5, 2.0),
        );
        assert!(r.is_err());
    }
}
