#![allow(dead_code)]

pub mod dd;

use moving_array::channel::{self, SteeringBundle};
use moving_array::waveform::WaveformSet;
use moving_array::{Layout, Scene, C64};
use proptest::prelude::*;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn bundles(layout: &Layout, scene: &Scene) -> Vec<SteeringBundle> {
    channel::steering_batch(layout, scene)
}

/// Echo `A_l s_l` of one symbol for a target at `(x, y)`.
pub fn echo(positions: &[f64], x: f64, y: f64, wavelength: f64, s: &[C64]) -> Vec<C64> {
    let a = channel::steering_at(positions, x, y, wavelength);
    let t = channel::dot_t(&a, s);
    a.iter().map(|z| z * t).collect()
}

/// Received-signal mean for the parameter vector `(x, y, Re b, Im b)`.
pub fn mean_of(layout: &Layout, wavelength: f64, ws: &WaveformSet, theta: [f64; 4]) -> Vec<C64> {
    let b = C64::new(theta[2], theta[3]);
    (0..layout.n_symbols())
        .flat_map(|l| echo(layout.positions(l), theta[0], theta[1], wavelength, &ws.symbols[l]))
        .map(|z| z * b)
        .collect()
}

pub fn print_criterion(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "[criterion {id:>2}] {} {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

prop_compose! {
    pub fn small_scene()(
        x in 2.0f64..100.0,
        y in -10.0f64..10.0,
        n in 1usize..=8,
        l in 2usize..=64,
    ) -> (f64, f64, usize, usize) {
        (x, y, n, l)
    }
}
