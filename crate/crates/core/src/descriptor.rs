//! The 27-value feature vector: per-ROI, per-channel means of the non-black
//! pixels, normalized to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::N_RECEIVERS;
use crate::optics::{Frame, FrameSpec, ReceiverResponse};

pub const N_FEATURES: usize = 3 * N_RECEIVERS;

/// Receiver-major, then R, G, B: index `3·receiver + channel`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; N_FEATURES] = values.try_into().map_err(|_| Error::Dimension {
            expected: N_FEATURES,
            got: values.len(),
        })?;
        Ok(FeatureVector(arr))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub center: [u32; 2],
    pub width: u32,
    pub height: u32,
}

impl Roi {
    /// Half-open pixel bounds `(x0, y0, x1, y1)`; `None` if the rectangle
    /// would start left of or above the frame.
    fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let x0 = self.center[0].checked_sub(self.width / 2)?;
        let y0 = self.center[1].checked_sub(self.height / 2)?;
        Some((x0, y0, x0 + self.width, y0 + self.height))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoiSpec {
    pub rois: [Roi; N_RECEIVERS],
    /// A pixel is black when its largest channel is at most this level.
    pub black_threshold: u8,
}

impl Default for RoiSpec {
    fn default() -> Self {
        RoiSpec::around_discs(&FrameSpec::default(), 40, 40)
    }
}

impl RoiSpec {
    /// One `width`×`height` ROI centered on each rendered disc.
    pub fn around_discs(frame: &FrameSpec, width: u32, height: u32) -> Self {
        RoiSpec {
            rois: frame.disc_centers.map(|center| Roi {
                center,
                width,
                height,
            }),
            black_threshold: 10,
        }
    }

    pub fn validate(&self, frame_width: u32, frame_height: u32) -> Result<()> {
        let mut bounds = Vec::with_capacity(N_RECEIVERS);
        for (i, roi) in self.rois.iter().enumerate() {
            match roi.bounds() {
                Some(b @ (_, _, x1, y1))
                    if roi.width > 0
                        && roi.height > 0
                        && x1 <= frame_width
                        && y1 <= frame_height =>
                {
                    bounds.push(b)
                }
                _ => {
                    return Err(Error::Config(format!(
                        "ROI {i} is empty or outside the {frame_width}x{frame_height} frame"
                    )))
                }
            }
        }
        for a in 0..N_RECEIVERS {
            for b in a + 1..N_RECEIVERS {
                let (ax0, ay0, ax1, ay1) = bounds[a];
                let (bx0, by0, bx1, by1) = bounds[b];
                if ax0 < bx1 && bx0 < ax1 && ay0 < by1 && by0 < ay1 {
                    return Err(Error::Config(format!("ROIs {a} and {b} overlap")));
                }
            }
        }
        Ok(())
    }
}

/// Mean normalized color of the non-black pixels inside each ROI.
pub fn extract_roi_means(frame: &Frame, spec: &RoiSpec) -> Result<FeatureVector> {
    spec.validate(frame.width(), frame.height())?;
    let mut out = [0.0; N_FEATURES];
    for (i, roi) in spec.rois.iter().enumerate() {
        let (x0, y0, x1, y1) = roi.bounds().expect("validated");
        // Integer sums make the mean independent of pixel order.
        let mut sums = [0u64; 3];
        let mut count = 0u64;
        for y in y0..y1 {
            for x in x0..x1 {
                let px = frame.pixel(x, y);
                if px.iter().copied().max().unwrap_or(0) <= spec.black_threshold {
                    continue;
                }
                for (s, v) in sums.iter_mut().zip(px) {
                    *s += u64::from(v);
                }
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::EmptyRoi { roi: i });
        }
        for (c, s) in sums.iter().enumerate() {
            out[3 * i + c] = *s as f64 / (255.0 * count as f64);
        }
    }
    Ok(FeatureVector(out))
}

/// The feature vector a perfect 8-bit-free camera would report.
pub fn features_from_response(response: &ReceiverResponse) -> FeatureVector {
    let mut out = [0.0; N_FEATURES];
    for (slot, v) in out.iter_mut().zip(response.channels()) {
        *slot = v;
    }
    FeatureVector(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};

    fn blank() -> Frame {
        Frame {
            image: RgbImage::new(640, 480),
        }
    }

    fn fill(frame: &mut Frame, roi: &Roi, f: impl Fn(u32, u32) -> [u8; 3]) {
        let (x0, y0, x1, y1) = roi.bounds().unwrap();
        for y in y0..y1 {
            for x in x0..x1 {
                frame.image.put_pixel(x, y, Rgb(f(x - x0, y - y0)));
            }
        }
    }

    fn all_rois_lit(frame: &mut Frame, spec: &RoiSpec) {
        for roi in &spec.rois {
            fill(frame, roi, |_, _| [50, 50, 50]);
        }
    }

    #[test]
    fn uniform_red_roi() {
        let spec = RoiSpec::default();
        let mut f = blank();
        all_rois_lit(&mut f, &spec);
        fill(&mut f, &spec.rois[3], |_, _| [255, 0, 0]);
        let s = extract_roi_means(&f, &spec).unwrap();
        assert_eq!(&s.0[9..12], &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn black_half_is_excluded() {
        let spec = RoiSpec::default();
        let mut f = blank();
        all_rois_lit(&mut f, &spec);
        fill(&mut f, &spec.rois[0], |x, _| {
            if x < 20 {
                [0, 0, 0]
            } else {
                [128, 64, 32]
            }
        });
        let s = extract_roi_means(&f, &spec).unwrap();
        assert_eq!(&s.0[0..3], &[128.0 / 255.0, 64.0 / 255.0, 32.0 / 255.0]);
    }

    #[test]
    fn threshold_is_inclusive_on_max_channel() {
        let spec = RoiSpec::default();
        let mut f = blank();
        all_rois_lit(&mut f, &spec);
        // (10, 10, 10) is black; (11, 0, 0) is not.
        fill(&mut f, &spec.rois[1], |x, _| {
            if x % 2 == 0 {
                [10, 10, 10]
            } else {
                [11, 0, 0]
            }
        });
        let s = extract_roi_means(&f, &spec).unwrap();
        assert_eq!(&s.0[3..6], &[11.0 / 255.0, 0.0, 0.0]);
    }

    #[test]
    fn fully_black_roi_is_an_error() {
        let spec = RoiSpec::default();
        let mut f = blank();
        all_rois_lit(&mut f, &spec);
        fill(&mut f, &spec.rois[7], |_, _| [3, 2, 1]);
        match extract_roi_means(&f, &spec) {
            Err(Error::EmptyRoi { roi }) => assert_eq!(roi, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn roi_outside_frame_is_config_error() {
        let mut spec = RoiSpec::default();
        spec.rois[0].center = [630, 10];
        assert!(matches!(
            extract_roi_means(&blank(), &spec),
            Err(Error::Config(_))
        ));
        let mut spec = RoiSpec::default();
        spec.rois[1].center = spec.rois[0].center;
        assert!(matches!(spec.validate(640, 480), Err(Error::Config(_))));
    }

    #[test]
    fn feature_ordering() {
        let mut r = ReceiverResponse::zeros();
        r.0[0] = [0.1, 0.2, 0.3];
        r.0[8] = [0.7, 0.8, 0.9];
        let s = features_from_response(&r);
        assert_eq!(s.0[1], 0.2);
        assert_eq!(&s.0[24..27], &[0.7, 0.8, 0.9]);
        assert_eq!(
            features_from_response(&ReceiverResponse::zeros()).0,
            [0.0; N_FEATURES]
        );
    }
}
