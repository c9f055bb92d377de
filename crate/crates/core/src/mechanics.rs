//! Linear-elastic force model of the silicone slab and hysteresis of
//! loading/unloading force curves.
//!
//! The slab behaves as a spring of stiffness `k = E·A/D`, so an indentation of
//! `d` millimetres produces `F = E·A·d/D` newtons. `E` is stored in pascals;
//! the force law converts it to N/mm² so that `A` (mm²), `D` and `d` (mm) can
//! stay in millimetres.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pascals per N/mm².
const PA_PER_N_PER_MM2: f64 = 1e6;

/// JSON form of [`MechanicsParams`]. When `effective_area_mm2` is absent it is
/// calibrated from the `max_force_n` / `max_depth_mm` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanicsConfig {
    pub youngs_modulus_pa: f64,
    pub effective_area_mm2: Option<f64>,
    pub max_force_n: f64,
    pub max_depth_mm: f64,
}

impl Default for MechanicsConfig {
    fn default() -> Self {
        MechanicsConfig {
            youngs_modulus_pa: 5.9e6,
            effective_area_mm2: None,
            max_force_n: 18.0,
            max_depth_mm: 3.0,
        }
    }
}

impl MechanicsConfig {
    pub fn build(&self, slab_thickness_mm: f64) -> Result<MechanicsParams> {
        let area = match self.effective_area_mm2 {
            Some(a) => a,
            None => effective_area_from_calibration(
                self.youngs_modulus_pa,
                slab_thickness_mm,
                self.max_force_n,
                self.max_depth_mm,
            )?,
        };
        MechanicsParams::new(
            self.youngs_modulus_pa,
            slab_thickness_mm,
            area,
            self.max_depth_mm,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicsParams {
    youngs_modulus_pa: f64,
    slab_thickness_mm: f64,
    effective_area_mm2: f64,
    max_depth_mm: f64,
}

impl Default for MechanicsParams {
    fn default() -> Self {
        MechanicsConfig::default()
            .build(5.0)
            .expect("default mechanics are valid")
    }
}

impl MechanicsParams {
    pub fn new(
        youngs_modulus_pa: f64,
        slab_thickness_mm: f64,
        effective_area_mm2: f64,
        max_depth_mm: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("youngs_modulus_pa", youngs_modulus_pa),
            ("slab_thickness_mm", slab_thickness_mm),
            ("effective_area_mm2", effective_area_mm2),
            ("max_depth_mm", max_depth_mm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(MechanicsParams {
            youngs_modulus_pa,
            slab_thickness_mm,
            effective_area_mm2,
            max_depth_mm,
        })
    }

    pub fn youngs_modulus_pa(&self) -> f64 {
        self.youngs_modulus_pa
    }

    pub fn slab_thickness_mm(&self) -> f64 {
        self.slab_thickness_mm
    }

    pub fn effective_area_mm2(&self) -> f64 {
        self.effective_area_mm2
    }

    pub fn max_depth_mm(&self) -> f64 {
        self.max_depth_mm
    }

    /// Spring constant in N/mm.
    pub fn stiffness(&self) -> f64 {
        self.youngs_modulus_pa * self.effective_area_mm2
            / (self.slab_thickness_mm * PA_PER_N_PER_MM2)
    }

    pub fn force_from_depth(&self, depth_mm: f64) -> Result<f64> {
        if !(0.0..=self.max_depth_mm).contains(&depth_mm) {
            return Err(Error::range("depth_mm", depth_mm, 0.0, self.max_depth_mm));
        }
        // The unit conversion is applied last; with the default parameters this
        // reproduces 18 N at 3 mm and 3.6 N at 0.6 mm to the last bit.
        Ok(self.youngs_modulus_pa * self.effective_area_mm2 * depth_mm
            / (self.slab_thickness_mm * PA_PER_N_PER_MM2))
    }
}

/// Solves `F_max = E·A·d_max/D` for the contact area `A` in mm².
pub fn effective_area_from_calibration(
    youngs_modulus_pa: f64,
    slab_thickness_mm: f64,
    max_force_n: f64,
    max_depth_mm: f64,
) -> Result<f64> {
    for (name, v) in [
        ("youngs_modulus_pa", youngs_modulus_pa),
        ("slab_thickness_mm", slab_thickness_mm),
        ("max_depth_mm", max_depth_mm),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    if !(max_force_n.is_finite() && max_force_n >= 0.0) {
        return Err(Error::Domain(format!(
            "max_force_n must be non-negative, got {max_force_n}"
        )));
    }
    Ok(max_force_n * slab_thickness_mm * PA_PER_N_PER_MM2 / (youngs_modulus_pa * max_depth_mm))
}

/// Force–depth samples of one compression or release stroke.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceCurve {
    samples: Vec<(f64, f64)>,
}

impl ForceCurve {
    /// Depths must be strictly increasing and forces non-negative.
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Domain(
                "a force curve needs at least two samples".into(),
            ));
        }
        for (i, &(d, f)) in samples.iter().enumerate() {
            if !d.is_finite() || !f.is_finite() || f < 0.0 {
                return Err(Error::Domain(format!(
                    "sample {i} ({d} mm, {f} N) is not a finite non-negative force"
                )));
            }
            if i > 0 && d <= samples[i - 1].0 {
                return Err(Error::Domain(format!(
                    "depth at sample {i} does not increase"
                )));
            }
        }
        Ok(ForceCurve { samples })
    }

    pub fn from_fn(depths: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(depths.iter().map(|&d| (d, f(d))).collect())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn depth_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Trapezoidal integral of force over depth, in N·mm.
    pub fn work(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
            .sum()
    }

    /// Reads a `depth_mm,force_N` CSV with a header row.
    pub fn read_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["depth_mm", "force_N"] {
            return Err(Error::Parse {
                line: 1,
                message: "expected header depth_mm,force_N".into(),
            });
        }
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            let parse = |i: usize| -> Result<f64> {
                record[i].trim().parse().map_err(|e| Error::Parse {
                    line,
                    message: format!("column {i}: {e}"),
                })
            };
            samples.push((parse(0)?, parse(1)?));
        }
        Self::new(samples)
    }

    pub fn write_csv(&self, mut writer: impl Write) -> std::io::Result<()> {
        writeln!(writer, "depth_mm,force_N")?;
        for (d, f) in &self.samples {
            writeln!(writer, "{d},{f}")?;
        }
        Ok(())
    }

    /// A linear compression stroke and a power-law release stroke
    /// `F_max·(d/d_max)^(p+1)` whose enclosed area is `target_area` N·mm.
    /// Requires `0 <= target_area < F_max·d_max/2`.
    pub fn synthetic_loop(
        params: &MechanicsParams,
        n_samples: usize,
        target_area: f64,
    ) -> Result<(ForceCurve, ForceCurve)> {
        let d_max = params.max_depth_mm();
        let f_max = params.force_from_depth(d_max)?;
        let half_work = f_max * d_max / 2.0;
        if !(0.0..half_work).contains(&target_area) || n_samples < 2 {
            return Err(Error::Domain(format!(
                "hysteresis area {target_area} must lie in [0, {half_work})"
            )));
        }
        // Release work is f_max·d_max/(p+2).
        let exponent = 1.0 / (0.5 - target_area / (f_max * d_max)) - 2.0;
        let depths: Vec<f64> = (0..n_samples)
            .map(|i| d_max * i as f64 / (n_samples - 1) as f64)
            .collect();
        let loading = ForceCurve::from_fn(&depths, |d| {
            params.force_from_depth(d.min(d_max)).unwrap_or(f_max)
        })?;
        let unloading = ForceCurve::from_fn(&depths, |d| f_max * (d / d_max).powf(exponent + 1.0))?;
        Ok((loading, unloading))
    }
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Area between the loading and unloading strokes, in N·mm. Each curve is
/// integrated with the trapezoid rule on its own samples.
pub fn hysteresis_area(loading: &ForceCurve, unloading: &ForceCurve) -> Result<f64> {
    let (a0, a1) = loading.depth_range();
    let (b0, b1) = unloading.depth_range();
    let tol = 1e-12 * (a1 - a0).abs().max(1.0);
    if (a0 - b0).abs() > tol || (a1 - b1).abs() > tol {
        return Err(Error::Domain(format!(
            "loading spans [{a0}, {a1}] mm but unloading spans [{b0}, {b1}] mm"
        )));
    }
    Ok(loading.work() - unloading.work())
}
