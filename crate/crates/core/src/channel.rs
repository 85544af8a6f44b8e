//! Spherical-wavefront steering vectors and their spatial derivatives.
//!
//! Element `n` responds as `a_n = lambda / (4 pi d_n) * exp(-j 2 pi d_n / lambda)`
//! where `d_n` is the distance from the element to the target. Derivatives are
//! the exact chain rule through `d_n`:
//!
//! ```text
//! da_n/dp = a_n * (-1/d_n - j 2 pi / lambda) * dd_n/dp,   dd_n/dx = x / d_n,  dd_n/dy = (y - ybar_n) / d_n
//! ```

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{extended_array_positions, Architecture, ArrayConfig, Layout, Scene};
use crate::C64;

/// Target coordinate a derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Steering vector of one snapshot plus its derivatives w.r.t. the target coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringBundle {
    pub a: Vec<C64>,
    pub da_dx: Vec<C64>,
    pub da_dy: Vec<C64>,
}

impl SteeringBundle {
    pub fn derivative(&self, axis: Axis) -> &[C64] {
        match axis {
            Axis::X => &self.da_dx,
            Axis::Y => &self.da_dy,
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// `A = a a^T` and its derivatives `dA/dp = da_p a^T + a da_p^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponsePair {
    pub a: DMatrix<C64>,
    pub da_dx: DMatrix<C64>,
    pub da_dy: DMatrix<C64>,
}

/// Single steering entry for an element at distance `d`.
#[inline]
pub fn element_response(d: f64, wavelength: f64) -> C64 {
    // reduce d / lambda before scaling by 2 pi so whole wavelengths cancel exactly
    let cycles = (d / wavelength).rem_euclid(1.0);
    C64::from_polar(wavelength / (4.0 * PI * d), -2.0 * PI * cycles)
}

/// Steering vector for elements at `(0, positions[n])` and a target at `(x, y)`.
pub fn steering_at(positions: &[f64], x: f64, y: f64, wavelength: f64) -> Vec<C64> {
    positions
        .iter()
        .map(|&p| element_response(x.hypot(y - p), wavelength))
        .collect()
}

/// Steering vector and exact derivatives for elements at `(0, positions[n])`.
pub fn bundle_at(positions: &[f64], x: f64, y: f64, wavelength: f64) -> SteeringBundle {
    let k = 2.0 * PI / wavelength;
    let mut a = Vec::with_capacity(positions.len());
    let mut da_dx = Vec::with_capacity(positions.len());
    let mut da_dy = Vec::with_capacity(positions.len());
    for &p in positions {
        let dy = y - p;
        let d = x.hypot(dy);
        let entry = element_response(d, wavelength);
        let dd = entry * C64::new(-1.0 / d, -k);
        a.push(entry);
        da_dx.push(dd * (x / d));
        da_dy.push(dd * (dy / d));
    }
    SteeringBundle { a, da_dx, da_dy }
}

fn check_symbol(cfg: &ArrayConfig, l: usize) -> Result<()> {
    if l >= cfg.n_symbols() {
        return Err(Error::Index {
            what: "symbol",
            index: l,
            len: cfg.n_symbols(),
        });
    }
    Ok(())
}

fn moving_positions(cfg: &ArrayConfig, l: usize) -> Vec<f64> {
    let base = l as f64 * cfg.step();
    (0..cfg.n_elements()).map(|n| base + n as f64 * cfg.spacing()).collect()
}

/// Moving-array steering vector at symbol `l` (0-based).
pub fn steering(cfg: &ArrayConfig, scene: &Scene, l: usize) -> Result<Vec<C64>> {
    check_symbol(cfg, l)?;
    Ok(steering_at(
        &moving_positions(cfg, l),
        scene.target_x(),
        scene.target_y(),
        scene.wavelength(),
    ))
}

pub fn steering_derivative(cfg: &ArrayConfig, scene: &Scene, l: usize, axis: Axis) -> Result<Vec<C64>> {
    let bundle = steering_bundle(cfg, scene, l)?;
    Ok(match axis {
        Axis::X => bundle.da_dx,
        Axis::Y => bundle.da_dy,
    })
}

pub fn steering_bundle(cfg: &ArrayConfig, scene: &Scene, l: usize) -> Result<SteeringBundle> {
    check_symbol(cfg, l)?;
    Ok(bundle_at(
        &moving_positions(cfg, l),
        scene.target_x(),
        scene.target_y(),
        scene.wavelength(),
    ))
}

/// Steering bundles for every symbol of a layout. Stationary layouts yield a
/// single bundle shared by all symbols.
pub fn steering_batch(layout: &Layout, scene: &Scene) -> Vec<SteeringBundle> {
    let rows = if layout.is_stationary() { 1 } else { layout.n_symbols() };
    (0..rows)
        .map(|l| {
            bundle_at(
                layout.positions(l),
                scene.target_x(),
                scene.target_y(),
                scene.wavelength(),
            )
        })
        .collect()
}

fn outer_t(u: &[C64], v: &[C64]) -> DMatrix<C64> {
    DMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j])
}

/// Response matrices of the moving array at symbol `l`.
pub fn response_pair(cfg: &ArrayConfig, scene: &Scene, l: usize) -> Result<ResponsePair> {
    Ok(response_from_bundle(&steering_bundle(cfg, scene, l)?))
}

pub fn response_from_bundle(bundle: &SteeringBundle) -> ResponsePair {
    let a = &bundle.a;
    let sym = |da: &[C64]| outer_t(da, a) + outer_t(a, da);
    ResponsePair {
        a: outer_t(a, a),
        da_dx: sym(&bundle.da_dx),
        da_dy: sym(&bundle.da_dy),
    }
}

/// Steering bundle of the stationary L-element array along the platform track.
pub fn extended_steering(cfg: &ArrayConfig, scene: &Scene) -> SteeringBundle {
    bundle_at(
        &extended_array_positions(cfg),
        scene.target_x(),
        scene.target_y(),
        scene.wavelength(),
    )
}

/// Steering bundle of the first snapshot of `arch` (the only one for fixed arrays).
pub fn reference_steering(arch: Architecture, cfg: &ArrayConfig, scene: &Scene) -> SteeringBundle {
    match arch {
        Architecture::Extended => extended_steering(cfg, scene),
        Architecture::Moving | Architecture::Fixed => bundle_at(
            &moving_positions(cfg, 0),
            scene.target_x(),
            scene.target_y(),
            scene.wavelength(),
        ),
    }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `u^H v`
pub fn dot_h(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `u^T v` (no conjugation)
pub fn dot_t(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}
