//! Forward model from a contact state to the light each receiver fiber sees,
//! and a flat-disc renderer for the camera view of the fiber bundle.
//!
//! Each emitter–receiver pair contributes a Gaussian-beam term
//! `I0·exp(-2r²/ω²)` where `r` is the in-plane path length between the two
//! ports. Indentation of depth `d` modulates that term by two factors:
//!
//! * path absorption `exp(-α·d·g_seg)`, where `g_seg` is a Gaussian kernel of
//!   the contact's distance to the emitter→receiver segment;
//! * reflection gain `1 + β·d·g_rec`, where `g_rec` is the same kernel of the
//!   contact's distance to the receiver.
//!
//! A receiver's channel `c` is the sum over the emitters of color `c`, clamped
//! to `[0, 1]`.

use std::path::Path;

use image::{Rgb, RgbImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ContactState, Point, SensorGeometry, N_RECEIVERS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OpticsParams {
    /// Emitted intensity in normalized camera units.
    pub source_intensity: f64,
    /// Beam spot size ω at the receiver, mm.
    pub beam_spot_mm: f64,
    /// Absorption gain α, per mm of indentation.
    pub absorption_gain: f64,
    /// Reflection gain β, per mm of indentation.
    pub reflection_gain: f64,
    /// Width σ_c of the contact influence kernel, mm.
    pub contact_radius_mm: f64,
    /// Standard deviation of additive per-channel noise.
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for OpticsParams {
    fn default() -> Self {
        OpticsParams {
            source_intensity: 1.0,
            beam_spot_mm: 20.0,
            absorption_gain: 0.5,
            reflection_gain: 0.3,
            contact_radius_mm: 4.0,
            noise_sigma: 0.01,
            rng_seed: 0,
        }
    }
}

impl OpticsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("source_intensity", self.source_intensity),
            ("beam_spot_mm", self.beam_spot_mm),
            ("contact_radius_mm", self.contact_radius_mm),
        ];
        let non_negative = [
            ("absorption_gain", self.absorption_gain),
            ("reflection_gain", self.reflection_gain),
            ("noise_sigma", self.noise_sigma),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    fn kernel(&self, distance: f64) -> f64 {
        let s = self.contact_radius_mm;
        (-distance * distance / (2.0 * s * s)).exp()
    }
}

/// Intensity after a beam path of `r` mm.
pub fn gaussian_intensity(r: f64, params: &OpticsParams) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(format!(
            "beam path must be non-negative, got {r}"
        )));
    }
    let w = params.beam_spot_mm;
    Ok(params.source_intensity * (-2.0 * r * r / (w * w)).exp())
}

/// Per-receiver RGB intensities, receiver-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverResponse(pub [[f64; 3]; N_RECEIVERS]);

impl ReceiverResponse {
    pub fn zeros() -> Self {
        ReceiverResponse([[0.0; 3]; N_RECEIVERS])
    }

    pub fn channels(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flatten().copied()
    }

    /// Builds a response from 27 receiver-major values; every value must be
    /// in `[0, 1]`.
    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != 3 * N_RECEIVERS {
            return Err(Error::Dimension {
                expected: 3 * N_RECEIVERS,
                got: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::range("channel", *v, 0.0, 1.0));
        }
        Ok(ReceiverResponse(std::array::from_fn(|j| {
            [values[3 * j], values[3 * j + 1], values[3 * j + 2]]
        })))
    }

    fn clamped(mut self) -> Self {
        for v in self.0.iter_mut().flatten() {
            *v = v.clamp(0.0, 1.0);
        }
        self
    }
}

/// Light reaching each receiver from an undeformed slab.
pub fn baseline_response(
    geometry: &SensorGeometry,
    params: &OpticsParams,
) -> Result<ReceiverResponse> {
    params.validate()?;
    Ok(accumulate(geometry, params, |_, _| 1.0))
}

/// Light reaching each receiver while the slab is indented at `contact`.
pub fn deformed_response(
    geometry: &SensorGeometry,
    params: &OpticsParams,
    contact: &ContactState,
) -> Result<ReceiverResponse> {
    params.validate()?;
    let d = contact.depth_mm;
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::range("depth_mm", d, 0.0, f64::INFINITY));
    }
    let c = contact.position;
    Ok(accumulate(geometry, params, |emitter, receiver| {
        let g_seg = params.kernel(c.distance_to_segment(emitter, receiver));
        let g_rec = params.kernel(c.distance(receiver));
        (-params.absorption_gain * d * g_seg).exp() * (1.0 + params.reflection_gain * d * g_rec)
    }))
}

fn accumulate(
    geometry: &SensorGeometry,
    params: &OpticsParams,
    modulation: impl Fn(Point, Point) -> f64,
) -> ReceiverResponse {
    let mut out = ReceiverResponse::zeros();
    for (j, &receiver) in geometry.receivers().iter().enumerate() {
        for e in geometry.emitters() {
            let r = e.position.distance(receiver);
            let base = gaussian_intensity(r, params).expect("distances are non-negative");
            out.0[j][e.color.channel()] += base * modulation(e.position, receiver);
        }
    }
    out.clamped()
}

/// Adds independent N(0, σ²) noise to every channel and clamps to `[0, 1]`.
/// The generator is seeded from `seed` alone, so equal inputs give equal
/// outputs.
pub fn add_noise(response: &ReceiverResponse, sigma: f64, seed: u64) -> Result<ReceiverResponse> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::Domain(format!(
            "noise sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return Ok(*response);
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = *response;
    for v in out.0.iter_mut().flatten() {
        *v += normal.sample(&mut rng);
    }
    Ok(out.clamped())
}

/// Pixel layout of the rendered camera view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSpec {
    pub width: u32,
    pub height: u32,
    pub disc_radius: u32,
    /// Disc center in pixels for each receiver, receiver-major.
    pub disc_centers: [[u32; 2]; N_RECEIVERS],
}

impl Default for FrameSpec {
    /// Receivers imaged on a 100 px grid around the frame center; receiver row
    /// 0 (the `-y` row of the slab) is at the bottom of the image.
    fn default() -> Self {
        FrameSpec {
            width: 640,
            height: 480,
            disc_radius: 18,
            disc_centers: std::array::from_fn(|j| {
                let col = (j % 3) as u32;
                let row = (j / 3) as u32;
                [220 + 100 * col, 340 - 100 * row]
            }),
        }
    }
}

impl FrameSpec {
    pub fn validate(&self) -> Result<()> {
        let r = self.disc_radius;
        for (j, &[x, y]) in self.disc_centers.iter().enumerate() {
            if x < r || y < r || x + r >= self.width || y + r >= self.height {
                return Err(Error::Config(format!(
                    "disc {j} at ({x}, {y}) with radius {r} leaves the {}x{} frame",
                    self.width, self.height
                )));
            }
        }
        for a in 0..N_RECEIVERS {
            for b in a + 1..N_RECEIVERS {
                let [ax, ay] = self.disc_centers[a].map(i64::from);
                let [bx, by] = self.disc_centers[b].map(i64::from);
                let d2 = (ax - bx).pow(2) + (ay - by).pow(2);
                if d2 <= (2 * i64::from(r)).pow(2) {
                    return Err(Error::Config(format!("discs {a} and {b} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// An 8-bit RGB camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub image: RgbImage,
}

impl Frame {
    pub fn width(&self) -> u32 {
        self.image.width()
    }

    pub fn height(&self) -> u32 {
        self.image.height()
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.image.get_pixel(x, y).0
    }

    /// Writes a binary (P6) PPM.
    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let encoder = image::codecs::pnm::PnmEncoder::new(std::io::BufWriter::new(file))
            .with_subtype(image::codecs::pnm::PnmSubtype::Pixmap(
                image::codecs::pnm::SampleEncoding::Binary,
            ));
        self.image.write_with_encoder(encoder)?;
        Ok(())
    }

    pub fn read_ppm(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = image::ImageReader::with_format(
            std::io::BufReader::new(std::fs::File::open(path).map_err(|e| Error::io(path, e))?),
            image::ImageFormat::Pnm,
        );
        Ok(Frame {
            image: reader.decode()?.into_rgb8(),
        })
    }
}

/// Draws each receiver as a filled disc of color `round(255·channel)` on a
/// black background.
pub fn render_frame(response: &ReceiverResponse, spec: &FrameSpec) -> Result<Frame> {
    spec.validate()?;
    let mut image = RgbImage::new(spec.width, spec.height);
    let r = i64::from(spec.disc_radius);
    for (j, &[cx, cy]) in spec.disc_centers.iter().enumerate() {
        let color = Rgb(response.0[j].map(|c| (c.clamp(0.0, 1.0) * 255.0).round() as u8));
        for dy in -r..=r {
            for dx in -r..=r {
                if dx * dx + dy * dy <= r * r {
                    let x = (i64::from(cx) + dx) as u32;
                    let y = (i64::from(cy) + dy) as u32;
                    image.put_pixel(x, y, color);
                }
            }
        }
    }
    Ok(Frame { image })
}
