//! Efficiency spectra and their CSV/JSON forms.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    WavelengthNm,
    DetuningX,
}

impl AxisKind {
    pub fn column(self) -> &'static str {
        match self {
            AxisKind::WavelengthNm => "wavelength_nm",
            AxisKind::DetuningX => "detuning_x",
        }
    }
}

impl std::str::FromStr for AxisKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "wavelength_nm" | "wavelength" => Ok(AxisKind::WavelengthNm),
            "detuning_x" | "detuning" => Ok(AxisKind::DetuningX),
            other => Err(format!("unknown axis `{other}` (wavelength_nm|detuning_x)")),
        }
    }
}

/// Ordered `(axis, efficiency)` samples.
///
/// The axis is strictly increasing and efficiencies are non-negative. A
/// normalized spectrum has its maximum at exactly 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencySpectrum {
    pub axis_kind: AxisKind,
    axis: Vec<f64>,
    efficiency: Vec<f64>,
    pub normalized: bool,
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl EfficiencySpectrum {
    /// Sorts by axis; duplicate axis values, non-finite values and negative
    /// efficiencies are data errors.
    pub fn new(axis_kind: AxisKind, mut points: Vec<(f64, f64)>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Data(format!("non-finite point ({}, {})", p.0, p.1)));
        }
        if let Some(p) = points.iter().find(|p| p.1 < 0.0) {
            return Err(Error::Data(format!(
                "negative efficiency {} at {}",
                p.1, p.0
            )));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = points.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Data(format!("duplicate axis value {}", w[0].0)));
        }
        let (axis, efficiency) = points.into_iter().unzip();
        Ok(EfficiencySpectrum {
            axis_kind,
            axis,
            efficiency,
            normalized: false,
            meta: BTreeMap::new(),
        })
    }

    pub fn empty(axis_kind: AxisKind) -> Self {
        EfficiencySpectrum {
            axis_kind,
            axis: Vec::new(),
            efficiency: Vec::new(),
            normalized: false,
            meta: BTreeMap::new(),
        }
    }

    /// Same axis, new values. Callers guarantee non-negative, equal length.
    pub(crate) fn with_values(&self, efficiency: Vec<f64>) -> Self {
        debug_assert_eq!(efficiency.len(), self.axis.len());
        EfficiencySpectrum {
            axis_kind: self.axis_kind,
            axis: self.axis.clone(),
            efficiency,
            normalized: false,
            meta: self.meta.clone(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn efficiency(&self) -> &[f64] {
        &self.efficiency
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.axis
            .iter()
            .copied()
            .zip(self.efficiency.iter().copied())
    }

    /// Index range of points with axis in `[lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let start = self.axis.partition_point(|&a| a < lo);
        let end = self.axis.partition_point(|&a| a <= hi);
        start..end.max(start)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = format!("{},efficiency\n", self.axis_kind.column());
        for (a, e) in self.points() {
            let _ = writeln!(out, "{},{}", fmt_f64(a), fmt_f64(e));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e15) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Reads a two-column spectrum CSV.
///
/// The header's first column may be `axis` (kind taken from `axis_kind`) or
/// one of `wavelength_nm`/`detuning_x`, which must then agree with it.
pub fn load_spectrum(path: &Path, axis_kind: AxisKind) -> Result<EfficiencySpectrum> {
    let text = std::fs::read_to_string(path)?;
    parse_spectrum(&text, path, axis_kind)
}

pub fn parse_spectrum(
    text: &str,
    origin: &Path,
    axis_kind: AxisKind,
) -> Result<EfficiencySpectrum> {
    let err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[1] != "efficiency" {
        return Err(err(
            1,
            format!("expected header `axis,efficiency`, got `{header}`"),
        ));
    }
    match cols[0] {
        "axis" => {}
        other => {
            let declared: AxisKind = other.parse().map_err(|e| err(1, e))?;
            if declared != axis_kind {
                return Err(Error::Data(format!(
                    "file axis `{}` does not match requested `{}`",
                    declared.column(),
                    axis_kind.column()
                )));
            }
        }
    }
    let mut points = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(err(lineno, format!("expected two columns, got `{line}`")));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| err(lineno, format!("bad number `{s}`: {e}")))
        };
        points.push((num(fields[0])?, num(fields[1])?));
    }
    let spectrum = EfficiencySpectrum::new(axis_kind, points)?;
    Ok(spectrum.with_meta("source", origin.display().to_string()))
}
