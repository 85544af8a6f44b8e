//! Element trajectories and target distances.
//!
//! Element `n` of the moving ULA sits at `(0, ybar[l][n])` during symbol `l`,
//! with `ybar[l][n] = l * T_s * v + n * delta` (0-based indices).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Moving-platform ULA description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    n_elements: usize,
    spacing: f64,
    speed: f64,
    symbol_duration: f64,
    n_symbols: usize,
}

impl ArrayConfig {
    pub fn new(n_elements: usize, spacing: f64, speed: f64, symbol_duration: f64, n_symbols: usize) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::Domain("n_elements must be at least 1".into()));
        }
        if n_symbols == 0 {
            return Err(Error::Domain("n_symbols must be at least 1".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Domain(format!("spacing must be positive, got {spacing}")));
        }
        if !(symbol_duration.is_finite() && symbol_duration > 0.0) {
            return Err(Error::Domain(format!(
                "symbol_duration must be positive, got {symbol_duration}"
            )));
        }
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(Error::Domain(format!("speed must be non-negative, got {speed}")));
        }
        Ok(Self {
            n_elements,
            spacing,
            speed,
            symbol_duration,
            n_symbols,
        })
    }

    /// N = 16 elements at 2.5 cm, 5 m/s, L = 1000 symbols of 1 ms.
    pub fn default_scenario() -> Self {
        Self::new(16, 0.025, 5.0, 1e-3, 1000).expect("default array config is valid")
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }
    pub fn spacing(&self) -> f64 {
        self.spacing
    }
    pub fn speed(&self) -> f64 {
        self.speed
    }
    pub fn symbol_duration(&self) -> f64 {
        self.symbol_duration
    }
    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn with_elements(self, n_elements: usize) -> Result<Self> {
        Self::new(
            n_elements,
            self.spacing,
            self.speed,
            self.symbol_duration,
            self.n_symbols,
        )
    }
    pub fn with_symbols(self, n_symbols: usize) -> Result<Self> {
        Self::new(
            self.n_elements,
            self.spacing,
            self.speed,
            self.symbol_duration,
            n_symbols,
        )
    }
    pub fn with_speed(self, speed: f64) -> Result<Self> {
        Self::new(
            self.n_elements,
            self.spacing,
            speed,
            self.symbol_duration,
            self.n_symbols,
        )
    }

    /// Distance travelled by the platform between consecutive symbols.
    pub fn step(&self) -> f64 {
        self.symbol_duration * self.speed
    }
}

/// Target and link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    target_x: f64,
    target_y: f64,
    reflection: C64,
    noise_power: f64,
    tx_power: f64,
    wavelength: f64,
}

impl Scene {
    pub fn new(
        target_x: f64,
        target_y: f64,
        reflection: C64,
        noise_power: f64,
        tx_power: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(target_x.is_finite() && target_x > 0.0) {
            return Err(Error::Domain(format!(
                "target_x must be positive (off the array axis), got {target_x}"
            )));
        }
        if !target_y.is_finite() {
            return Err(Error::Domain(format!("target_y must be finite, got {target_y}")));
        }
        if !(reflection.re.is_finite() && reflection.im.is_finite()) {
            return Err(Error::Domain("reflection must be finite".into()));
        }
        for (name, value) in [
            ("noise_power", noise_power),
            ("tx_power", tx_power),
            ("wavelength", wavelength),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(Self {
            target_x,
            target_y,
            reflection,
            noise_power,
            tx_power,
            wavelength,
        })
    }

    /// Target at (10, 0) m, b = 1, sigma^2 = -70 dBm, P_0 = 30 dBm, 6 GHz carrier.
    pub fn default_scenario() -> Self {
        Self::new(
            10.0,
            0.0,
            C64::new(1.0, 0.0),
            dbm_to_watts(-70.0),
            dbm_to_watts(30.0),
            0.05,
        )
        .expect("default scene is valid")
    }

    pub fn target_x(&self) -> f64 {
        self.target_x
    }
    pub fn target_y(&self) -> f64 {
        self.target_y
    }
    pub fn target(&self) -> (f64, f64) {
        (self.target_x, self.target_y)
    }
    pub fn reflection(&self) -> C64 {
        self.reflection
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn with_target(self, x: f64, y: f64) -> Result<Self> {
        Self::new(x, y, self.reflection, self.noise_power, self.tx_power, self.wavelength)
    }
    pub fn with_reflection(self, b: C64) -> Result<Self> {
        Self::new(
            self.target_x,
            self.target_y,
            b,
            self.noise_power,
            self.tx_power,
            self.wavelength,
        )
    }
    pub fn with_noise_power(self, noise_power: f64) -> Result<Self> {
        Self::new(
            self.target_x,
            self.target_y,
            self.reflection,
            noise_power,
            self.tx_power,
            self.wavelength,
        )
    }
    pub fn with_tx_power(self, tx_power: f64) -> Result<Self> {
        Self::new(
            self.target_x,
            self.target_y,
            self.reflection,
            self.noise_power,
            tx_power,
            self.wavelength,
        )
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// y-coordinate of element `n` during symbol `l`.
pub fn antenna_position(cfg: &ArrayConfig, l: usize, n: usize) -> Result<f64> {
    if l >= cfg.n_symbols {
        return Err(Error::Index {
            what: "symbol",
            index: l,
            len: cfg.n_symbols,
        });
    }
    if n >= cfg.n_elements {
        return Err(Error::Index {
            what: "element",
            index: n,
            len: cfg.n_elements,
        });
    }
    Ok(position_unchecked(cfg, l, n))
}

#[inline]
fn position_unchecked(cfg: &ArrayConfig, l: usize, n: usize) -> f64 {
    l as f64 * cfg.symbol_duration * cfg.speed + n as f64 * cfg.spacing
}

/// Length of the track swept during the observation, `L * T_s * v`.
pub fn platform_size(cfg: &ArrayConfig) -> f64 {
    cfg.n_symbols as f64 * cfg.symbol_duration * cfg.speed
}

/// Physical aperture of the ULA, `N * delta`.
pub fn array_size(cfg: &ArrayConfig) -> f64 {
    cfg.n_elements as f64 * cfg.spacing
}

/// Fraunhofer distance `2 D^2 / lambda`.
pub fn rayleigh_distance(aperture: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(aperture >= 0.0) {
        return Err(Error::Domain(format!("aperture must be non-negative, got {aperture}")));
    }
    Ok(2.0 * aperture * (aperture / wavelength))
}

/// Positions of the stationary L-element array spanning the platform track,
/// i.e. the trajectory of element 0.
pub fn extended_array_positions(cfg: &ArrayConfig) -> Vec<f64> {
    (0..cfg.n_symbols).map(|l| position_unchecked(cfg, l, 0)).collect()
}

/// Per-symbol target offsets `y - ybar` and distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    /// `distances[l][n]`
    pub distances: Vec<Vec<f64>>,
    /// `y_offsets[l][n] = y - ybar[l][n]`
    pub y_offsets: Vec<Vec<f64>>,
}

pub fn distance_field(cfg: &ArrayConfig, scene: &Scene) -> DistanceField {
    Architecture::Moving
        .layout(cfg)
        .distance_field(scene.target_x, scene.target_y)
}

/// Which array is doing the sensing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// N-element ULA moving along the track.
    Moving,
    /// N-element ULA parked at the start of the track.
    Fixed,
    /// Stationary L-element ULA occupying the whole track.
    Extended,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Moving, Architecture::Fixed, Architecture::Extended];

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Moving => "moving",
            Architecture::Fixed => "fixed",
            Architecture::Extended => "extended",
        }
    }

    pub fn layout(self, cfg: &ArrayConfig) -> Layout {
        let n_symbols = cfg.n_symbols;
        match self {
            Architecture::Moving => Layout {
                rows: (0..n_symbols)
                    .map(|l| (0..cfg.n_elements).map(|n| position_unchecked(cfg, l, n)).collect())
                    .collect(),
                n_symbols,
            },
            Architecture::Fixed => Layout {
                rows: vec![(0..cfg.n_elements).map(|n| position_unchecked(cfg, 0, n)).collect()],
                n_symbols,
            },
            Architecture::Extended => Layout {
                rows: vec![extended_array_positions(cfg)],
                n_symbols,
            },
        }
    }

    /// Elements per snapshot.
    pub fn dimension(self, cfg: &ArrayConfig) -> usize {
        match self {
            Architecture::Moving | Architecture::Fixed => cfg.n_elements,
            Architecture::Extended => cfg.n_symbols,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "moving" => Ok(Architecture::Moving),
            "fixed" | "conventional" => Ok(Architecture::Fixed),
            "extended" => Ok(Architecture::Extended),
            other => Err(Error::Config(format!("unknown architecture '{other}'"))),
        }
    }
}

/// Element y-positions for every symbol of an observation.
///
/// Stationary arrays store a single row shared by all symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    rows: Vec<Vec<f64>>,
    n_symbols: usize,
}

impl Layout {
    /// Arbitrary per-symbol rows (all of equal length).
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Contract("layout needs at least one symbol".into()));
        };
        let width = first.len();
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Contract("layout rows must be non-empty and equally long".into()));
        }
        let n_symbols = rows.len();
        Ok(Self { rows, n_symbols })
    }

    /// One set of positions reused for `n_symbols` symbols.
    pub fn stationary(positions: Vec<f64>, n_symbols: usize) -> Result<Self> {
        if positions.is_empty() || n_symbols == 0 {
            return Err(Error::Contract("stationary layout needs elements and symbols".into()));
        }
        Ok(Self {
            rows: vec![positions],
            n_symbols,
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn n_elements(&self) -> usize {
        self.rows[0].len()
    }

    pub fn is_stationary(&self) -> bool {
        self.rows.len() == 1
    }

    #[inline]
    pub fn positions(&self, l: usize) -> &[f64] {
        if self.rows.len() == 1 {
            &self.rows[0]
        } else {
            &self.rows[l]
        }
    }

    /// Extent covered by all element positions over all symbols.
    pub fn span(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.rows {
            for &p in row {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        hi - lo
    }

    pub fn distance_field(&self, x: f64, y: f64) -> DistanceField {
        let mut distances = Vec::with_capacity(self.n_symbols);
        let mut y_offsets = Vec::with_capacity(self.n_symbols);
        for l in 0..self.n_symbols {
            let offs: Vec<f64> = self.positions(l).iter().map(|&p| y - p).collect();
            distances.push(offs.iter().map(|&dy| x.hypot(dy)).collect());
            y_offsets.push(offs);
        }
        DistanceField { distances, y_offsets }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ArrayConfig {
        ArrayConfig::default_scenario()
    }

    #[test]
    fn first_element_starts_at_origin() {
        assert_eq!(antenna_position(&cfg(), 0, 0).unwrap(), 0.0);
    }

    #[test]
    fn one_symbol_step() {
        let p = antenna_position(&cfg(), 1, 0).unwrap();
        assert!((p - 0.005).abs() < 1e-15);
    }

    #[test]
    fn last_symbol_last_element() {
        // 999 * 0.005 + 15 * 0.025
        let p = antenna_position(&cfg(), 999, 15).unwrap();
        assert!((p - 5.370).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_indices() {
        assert!(matches!(
            antenna_position(&cfg(), 1000, 0),
            Err(Error::Index { what: "symbol", .. })
        ));
        assert!(matches!(
            antenna_position(&cfg(), 0, 16),
            Err(Error::Index { what: "element", .. })
        ));
    }

    #[test]
    fn platform_sizes() {
        assert!((platform_size(&cfg()) - 5.0).abs() < 1e-12);
        let still = ArrayConfig::new(4, 0.025, 0.0, 1e-3, 1).unwrap();
        assert_eq!(platform_size(&still), 0.0);
        let short = cfg().with_symbols(100).unwrap();
        assert!((platform_size(&short) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_distances() {
        assert!((rayleigh_distance(0.4, 0.05).unwrap() - 6.4).abs() < 1e-12);
        assert!((rayleigh_distance(5.0, 0.05).unwrap() - 1000.0).abs() < 1e-9);
        assert_eq!(rayleigh_distance(0.0, 0.05).unwrap(), 0.0);
        assert!(matches!(rayleigh_distance(1.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(rayleigh_distance(1.0, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn extended_positions() {
        let c = ArrayConfig::new(16, 0.025, 5.0, 1e-3, 3).unwrap();
        let p = extended_array_positions(&c);
        assert_eq!(p.len(), 3);
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.005).abs() < 1e-15);
        assert!((p[2] - 0.010).abs() < 1e-15);
        assert!((extended_array_positions(&cfg())[999] - 4.995).abs() < 1e-12);
        let single = cfg().with_symbols(1).unwrap();
        assert_eq!(extended_array_positions(&single), vec![0.0]);
    }

    #[test]
    fn extended_positions_equal_first_column() {
        let c = cfg();
        let moving = Architecture::Moving.layout(&c);
        let ext = extended_array_positions(&c);
        for (l, p) in ext.iter().enumerate() {
            assert_eq!(moving.positions(l)[0].to_bits(), p.to_bits());
        }
    }

    #[test]
    fn distances_for_axial_target() {
        let scene = Scene::default_scenario();
        let field = distance_field(&cfg(), &scene);
        assert_eq!(field.distances[0][0], 10.0);
        assert_eq!(field.y_offsets[0][0], 0.0);
        // element at ybar = 5 m: symbol 0, which does not exist at delta = 0.025 with N = 16,
        // so use a dedicated layout.
        let layout = Layout::stationary(vec![5.0], 1).unwrap();
        let d = layout.distance_field(10.0, 0.0).distances[0][0];
        assert!((d - 125f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn distance_identity_over_default_grid() {
        let scene = Scene::default_scenario();
        let field = distance_field(&cfg(), &scene);
        let x = scene.target_x();
        for (drow, yrow) in field.distances.iter().zip(&field.y_offsets) {
            for (&d, &dy) in drow.iter().zip(yrow) {
                assert!(d >= x);
                let rel = (d * d - x * x - dy * dy).abs() / (d * d);
                assert!(rel < 1e-12, "rel {rel}");
            }
        }
    }

    #[test]
    fn positions_increase_with_symbol() {
        let layout = Architecture::Moving.layout(&cfg());
        for n in 0..16 {
            for l in 1..1000 {
                assert!(layout.positions(l)[n] > layout.positions(l - 1)[n]);
            }
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(ArrayConfig::new(0, 0.025, 5.0, 1e-3, 10).is_err());
        assert!(ArrayConfig::new(4, 0.025, 5.0, 1e-3, 0).is_err());
        assert!(ArrayConfig::new(4, 0.0, 5.0, 1e-3, 10).is_err());
        assert!(ArrayConfig::new(4, 0.025, -1.0, 1e-3, 10).is_err());
        assert!(ArrayConfig::new(4, 0.025, 5.0, 0.0, 10).is_err());
        let s = Scene::default_scenario();
        assert!(s.with_target(0.0, 1.0).is_err());
        assert!(s.with_target(-1.0, 1.0).is_err());
        assert!(s.with_noise_power(0.0).is_err());
        assert!(s.with_tx_power(-1.0).is_err());
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(40.0) - 10.0).abs() < 1e-12);
        assert!((dbm_to_watts(-70.0) - 1e-10).abs() < 1e-24);
        assert!((watts_to_dbm(10.0) - 40.0).abs() < 1e-12);
    }
}
