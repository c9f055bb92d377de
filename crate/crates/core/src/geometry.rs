//! Sensor layout: the silicone slab, its receiver and emitter fiber ports, and
//! the 5×5 grid of calibration contact locations.
//!
//! All coordinates are millimetres in the slab plane, measured from the slab
//! center. `+x` points to the right edge and `+y` to the top edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_RECEIVERS: usize = 9;
pub const N_EMITTERS: usize = 3;
pub const N_LOCATIONS: usize = 25;
pub const N_DEPTH_LEVELS: usize = 5;
pub const N_CLASSES: usize = N_LOCATIONS * N_DEPTH_LEVELS;
/// Indentation added by each depth level.
pub const DEPTH_STEP_MM: f64 = 0.6;

const GRID_SIDE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Euclidean distance from `self` to the closed segment `a`–`b`.
    pub fn distance_to_segment(self, a: Point, b: Point) -> f64 {
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let len2 = dx * dx + dy * dy;
        if len2 == 0.0 {
            return self.distance(a);
        }
        let t = (((self.x - a.x) * dx + (self.y - a.y) * dy) / len2).clamp(0.0, 1.0);
        self.distance(Point::new(a.x + t * dx, a.y + t * dy))
    }
}

/// Color carried by an emitter fiber, and the camera channel it lands in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
}

impl Color {
    pub const ALL: [Color; 3] = [Color::Red, Color::Green, Color::Blue];

    /// Position of this color within an RGB triple.
    pub fn channel(self) -> usize {
        match self {
            Color::Red => 0,
            Color::Green => 1,
            Color::Blue => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Top,
    Right,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emitter {
    pub position: Point,
    pub color: Color,
}

/// Edge placement of one emitter in the JSON configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterPlacement {
    pub edge: Edge,
    pub color: Color,
}

/// Serializable description of the layout. Emitters sit at edge midpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub slab_width_mm: f64,
    pub slab_height_mm: f64,
    pub slab_thickness_mm: f64,
    pub receiver_pitch_mm: f64,
    pub emitters: [EmitterPlacement; N_EMITTERS],
    pub grid_pitch_mm: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            slab_width_mm: 40.0,
            slab_height_mm: 40.0,
            slab_thickness_mm: 5.0,
            receiver_pitch_mm: 5.0,
            emitters: [
                EmitterPlacement {
                    edge: Edge::Left,
                    color: Color::Red,
                },
                EmitterPlacement {
                    edge: Edge::Top,
                    color: Color::Green,
                },
                EmitterPlacement {
                    edge: Edge::Right,
                    color: Color::Blue,
                },
            ],
            grid_pitch_mm: 8.0,
        }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> Result<(SensorGeometry, ContactGrid)> {
        let half_w = self.slab_width_mm / 2.0;
        let half_h = self.slab_height_mm / 2.0;
        let emitters = self.emitters.map(|p| Emitter {
            position: match p.edge {
                Edge::Left => Point::new(-half_w, 0.0),
                Edge::Right => Point::new(half_w, 0.0),
                Edge::Top => Point::new(0.0, half_h),
                Edge::Bottom => Point::new(0.0, -half_h),
            },
            color: p.color,
        });
        let geometry = SensorGeometry::new(
            self.slab_width_mm,
            self.slab_height_mm,
            self.slab_thickness_mm,
            self.receiver_pitch_mm,
            emitters,
        )?;
        let grid = ContactGrid::new(&geometry, self.grid_pitch_mm, Point::default())?;
        Ok((geometry, grid))
    }
}

/// The slab with its nine receiver ports (3×3 grid on the bottom face) and
/// three colored emitter ports.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorGeometry {
    slab_width: f64,
    slab_height: f64,
    slab_thickness: f64,
    receiver_pitch: f64,
    receivers: [Point; N_RECEIVERS],
    emitters: [Emitter; N_EMITTERS],
}

impl Default for SensorGeometry {
    fn default() -> Self {
        GeometryConfig::default()
            .build()
            .expect("default geometry is valid")
            .0
    }
}

impl SensorGeometry {
    /// Builds a layout with receivers on a centered 3×3 grid of the given
    /// pitch (row-major, starting at the bottom-left receiver).
    pub fn new(
        slab_width: f64,
        slab_height: f64,
        slab_thickness: f64,
        receiver_pitch: f64,
        emitters: [Emitter; N_EMITTERS],
    ) -> Result<Self> {
        for (name, v) in [
            ("slab_width_mm", slab_width),
            ("slab_height_mm", slab_height),
            ("slab_thickness_mm", slab_thickness),
            ("receiver_pitch_mm", receiver_pitch),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let receivers = std::array::from_fn(|j| {
            let col = (j % 3) as f64 - 1.0;
            let row = (j / 3) as f64 - 1.0;
            Point::new(col * receiver_pitch, row * receiver_pitch)
        });
        let geometry = SensorGeometry {
            slab_width,
            slab_height,
            slab_thickness,
            receiver_pitch,
            receivers,
            emitters,
        };
        if let Some(p) = geometry.receivers.iter().find(|p| !geometry.contains(**p)) {
            return Err(Error::Config(format!(
                "receiver at ({}, {}) lies outside the slab",
                p.x, p.y
            )));
        }
        for (i, e) in emitters.iter().enumerate() {
            if !geometry.contains(e.position) {
                return Err(Error::Config(format!("emitter {i} lies outside the slab")));
            }
            if emitters[..i].iter().any(|other| other.color == e.color) {
                return Err(Error::Config(format!(
                    "emitter {i} repeats color {:?}",
                    e.color
                )));
            }
        }
        Ok(geometry)
    }

    pub fn slab_width(&self) -> f64 {
        self.slab_width
    }

    pub fn slab_height(&self) -> f64 {
        self.slab_height
    }

    pub fn slab_thickness(&self) -> f64 {
        self.slab_thickness
    }

    pub fn receiver_pitch(&self) -> f64 {
        self.receiver_pitch
    }

    pub fn receivers(&self) -> &[Point; N_RECEIVERS] {
        &self.receivers
    }

    pub fn emitters(&self) -> &[Emitter; N_EMITTERS] {
        &self.emitters
    }

    /// Closed slab rectangle test.
    pub fn contains(&self, p: Point) -> bool {
        p.x.abs() <= self.slab_width / 2.0 && p.y.abs() <= self.slab_height / 2.0
    }

    fn contains_strictly(&self, p: Point) -> bool {
        p.x.abs() < self.slab_width / 2.0 && p.y.abs() < self.slab_height / 2.0
    }
}

/// The 5×5 calibration grid. Location `i` sits at column `i % 5`, row `i / 5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactGrid {
    pitch: f64,
    origin: Point,
}

impl Default for ContactGrid {
    fn default() -> Self {
        GeometryConfig::default()
            .build()
            .expect("default geometry is valid")
            .1
    }
}

impl ContactGrid {
    /// `origin` is the grid center relative to the slab center.
    pub fn new(geometry: &SensorGeometry, pitch: f64, origin: Point) -> Result<Self> {
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::Config(format!(
                "grid_pitch_mm must be positive, got {pitch}"
            )));
        }
        let grid = ContactGrid { pitch, origin };
        for i in 0..N_LOCATIONS {
            let p = grid.coords_unchecked(i);
            if !geometry.contains_strictly(p) {
                return Err(Error::Config(format!(
                    "contact location {i} at ({}, {}) is not inside the slab",
                    p.x, p.y
                )));
            }
        }
        Ok(grid)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn len(&self) -> usize {
        N_LOCATIONS
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn location_coords(&self, index: usize) -> Result<Point> {
        check_location(index)?;
        Ok(self.coords_unchecked(index))
    }

    fn coords_unchecked(&self, index: usize) -> Point {
        let half_span = self.pitch * (GRID_SIDE - 1) as f64 / 2.0;
        let col = (index % GRID_SIDE) as f64;
        let row = (index / GRID_SIDE) as f64;
        Point::new(
            self.origin.x - half_span + self.pitch * col,
            self.origin.y - half_span + self.pitch * row,
        )
    }
}

pub(crate) fn check_location(index: usize) -> Result<()> {
    if index >= N_LOCATIONS {
        return Err(Error::range(
            "location",
            index as f64,
            0.0,
            (N_LOCATIONS - 1) as f64,
        ));
    }
    Ok(())
}

pub(crate) fn check_depth_level(level: usize) -> Result<()> {
    if !(1..=N_DEPTH_LEVELS).contains(&level) {
        return Err(Error::range(
            "depth_level",
            level as f64,
            1.0,
            N_DEPTH_LEVELS as f64,
        ));
    }
    Ok(())
}

/// Indentation depth in millimetres for a 1-based depth level.
pub fn depth_of_level(level: usize) -> Result<f64> {
    check_depth_level(level)?;
    Ok(DEPTH_STEP_MM * level as f64)
}

/// Flat class index in `0..125`: `location * 5 + (depth_level - 1)`.
pub fn class_index(location: usize, depth_level: usize) -> Result<usize> {
    check_location(location)?;
    check_depth_level(depth_level)?;
    Ok(location * N_DEPTH_LEVELS + depth_level - 1)
}

/// Inverse of [`class_index`].
pub fn split_class_index(class: usize) -> Result<(usize, usize)> {
    if class >= N_CLASSES {
        return Err(Error::range(
            "class",
            class as f64,
            0.0,
            (N_CLASSES - 1) as f64,
        ));
    }
    Ok((class / N_DEPTH_LEVELS, class % N_DEPTH_LEVELS + 1))
}

/// One indentation of the calibration sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactState {
    pub location: usize,
    pub depth_level: usize,
    pub depth_mm: f64,
    pub position: Point,
}

impl ContactState {
    pub fn new(grid: &ContactGrid, location: usize, depth_level: usize) -> Result<Self> {
        Ok(ContactState {
            location,
            depth_level,
            depth_mm: depth_of_level(depth_level)?,
            position: grid.location_coords(location)?,
        })
    }

    /// A contact at an arbitrary point and depth; used for continuity checks
    /// and off-grid probing. The labels are those of the nearest grid state.
    pub fn at(position: Point, depth_mm: f64, location: usize, depth_level: usize) -> Result<Self> {
        check_location(location)?;
        check_depth_level(depth_level)?;
        if !(depth_mm.is_finite() && depth_mm >= 0.0) {
            return Err(Error::range("depth_mm", depth_mm, 0.0, f64::INFINITY));
        }
        Ok(ContactState {
            location,
            depth_level,
            depth_mm,
            position,
        })
    }

    pub fn flat_class(&self) -> usize {
        self.location * N_DEPTH_LEVELS + self.depth_level - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn default_layout() {
        let g = SensorGeometry::default();
        assert_eq!(g.receivers()[0], Point::new(-5.0, -5.0));
        assert_eq!(g.receivers()[4], Point::new(0.0, 0.0));
        assert_eq!(g.receivers()[8], Point::new(5.0, 5.0));
        let e = g.emitters();
        assert_eq!(
            (e[0].position, e[0].color),
            (Point::new(-20.0, 0.0), Color::Red)
        );
        assert_eq!(
            (e[1].position, e[1].color),
            (Point::new(0.0, 20.0), Color::Green)
        );
        assert_eq!(
            (e[2].position, e[2].color),
            (Point::new(20.0, 0.0), Color::Blue)
        );
    }

    #[test]
    fn receivers_have_five_mm_pitch() {
        let g = SensorGeometry::default();
        let r = g.receivers();
        for j in 0..N_RECEIVERS {
            if j % 3 < 2 {
                assert_eq!(r[j].distance(r[j + 1]), 5.0);
            }
            if j < 6 {
                assert_eq!(r[j].distance(r[j + 3]), 5.0);
            }
        }
    }

    #[test]
    fn location_coords_examples() {
        let grid = ContactGrid::default();
        assert_eq!(grid.location_coords(12).unwrap(), Point::new(0.0, 0.0));
        assert!(matches!(grid.location_coords(25), Err(Error::Range { .. })));
    }

    #[test]
    fn location_coords_match_enumerated_grid() {
        // 5 columns at 8 mm pitch span 32 mm, centered in a 40 mm slab.
        let grid = ContactGrid::default();
        let mut expected = Vec::new();
        for row in 0..5 {
            for col in 0..5 {
                expected.push(Point::new(
                    -16.0 + 8.0 * col as f64,
                    -16.0 + 8.0 * row as f64,
                ));
            }
        }
        assert_eq!(expected[0], Point::new(-16.0, -16.0));
        for (i, p) in expected.iter().enumerate() {
            assert_eq!(grid.location_coords(i).unwrap(), *p);
        }
    }

    #[test]
    fn locations_distinct_and_strictly_inside() {
        let g = SensorGeometry::default();
        let grid = ContactGrid::default();
        let pts: Vec<Point> = (0..N_LOCATIONS)
            .map(|i| grid.location_coords(i).unwrap())
            .collect();
        for (i, a) in pts.iter().enumerate() {
            assert!(a.x.abs() < g.slab_width() / 2.0 && a.y.abs() < g.slab_height() / 2.0);
            for b in &pts[i + 1..] {
                assert!(a.distance(*b) > 0.0);
            }
        }
    }

    #[test]
    fn depth_levels() {
        assert_eq!(depth_of_level(5).unwrap(), 3.0);
        assert_eq!(depth_of_level(1).unwrap(), 0.6);
        assert!(depth_of_level(0).is_err());
        assert!(depth_of_level(6).is_err());
        let depths: Vec<f64> = (1..=5).map(|l| depth_of_level(l).unwrap()).collect();
        assert!(depths.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn class_index_is_bijection() {
        assert_eq!(class_index(0, 1).unwrap(), 0);
        assert_eq!(class_index(24, 5).unwrap(), 124);
        assert_eq!(class_index(12, 3).unwrap(), 62);
        let mut seen = HashSet::new();
        for loc in 0..N_LOCATIONS {
            for lvl in 1..=N_DEPTH_LEVELS {
                let c = class_index(loc, lvl).unwrap();
                assert!(c < N_CLASSES);
                assert!(seen.insert(c));
                assert_eq!(split_class_index(c).unwrap(), (loc, lvl));
            }
        }
        assert_eq!(seen.len(), N_CLASSES);
        assert!(class_index(25, 1).is_err());
        assert!(class_index(0, 0).is_err());
    }

    #[test]
    fn duplicate_emitter_color_rejected() {
        let mut cfg = GeometryConfig::default();
        cfg.emitters[2].color = Color::Red;
        assert!(matches!(cfg.build(), Err(Error::Config(_))));
    }

    #[test]
    fn grid_outside_slab_rejected() {
        let cfg = GeometryConfig {
            grid_pitch_mm: 10.0,
            ..Default::default()
        };
        assert!(matches!(cfg.build(), Err(Error::Config(_))));
    }

    #[test]
    fn segment_distance() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert_eq!(Point::new(5.0, 3.0).distance_to_segment(a, b), 3.0);
        assert_eq!(Point::new(-4.0, 3.0).distance_to_segment(a, b), 5.0);
        assert_eq!(Point::new(13.0, 4.0).distance_to_segment(a, b), 5.0);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: GeometryConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, GeometryConfig::default());
        let cfg: GeometryConfig =
            serde_json::from_str(r#"{"emitters":[{"edge":"bottom","color":"blue"},{"edge":"top","color":"green"},{"edge":"left","color":"red"}]}"#)
                .unwrap();
        let (g, _) = cfg.build().unwrap();
        assert_eq!(g.emitters()[0].position, Point::new(0.0, -20.0));
    }
}
