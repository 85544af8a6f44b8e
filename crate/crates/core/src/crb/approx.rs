//! Closed-form SEM approximations of the `G` terms.
//!
//! These keep only the phase part of the steering derivative
//! (`da/dp ~ -j 2 pi / lambda * a * dd/dp`) and, for the moving array, treat
//! all elements of one snapshot as equidistant from the target (`d_{l,n} ~ d_l`).
//! Everything is then a function of distances:
//!
//! ```text
//! fixed / extended:  G_xx = P0 lambda^2 x^2 / (64 pi^2) * sum_{i<j} e_ij^2
//! moving:            G_xx = N^2 P0 lambda^2 x^2 / (16 pi^2) * sum_{i<j} e_ij^2 / (d_i^2 d_j^2) / sum_l d_l^-4
//! with               e_ij = 1/(d_i^2 d_j) - 1/(d_j^2 d_i)
//! ```
//!
//! `G_yy` replaces `e_ij` by `y_i/(d_i^2 d_j) - y_j/(d_j^2 d_i)` and drops `x^2`;
//! `G_xy` is the bilinear cross term of the two.

use std::f64::consts::PI;

use super::{bound, CrbReport, GTerms};
use crate::channel::{self, dot_h, norm_sqr, SteeringBundle};
use crate::error::Result;
use crate::geometry::{extended_array_positions, Architecture, ArrayConfig, Layout, Scene};
use crate::waveform::Scheme;
use crate::C64;

struct PairSums {
    xx: f64,
    yy: f64,
    xy: f64,
}

/// Pair sums over `i < j`, optionally weighted by `1/(d_i^2 d_j^2)`.
fn pair_sums(d: &[f64], y: &[f64], weighted: bool) -> PairSums {
    let mut s = PairSums {
        xx: 0.0,
        yy: 0.0,
        xy: 0.0,
    };
    for i in 0..d.len() {
        let di2 = d[i] * d[i];
        for j in i + 1..d.len() {
            let dj2 = d[j] * d[j];
            let ex = 1.0 / (di2 * d[j]) - 1.0 / (dj2 * d[i]);
            let ey = y[i] / (di2 * d[j]) - y[j] / (dj2 * d[i]);
            let w = if weighted { 1.0 / (di2 * dj2) } else { 1.0 };
            s.xx += w * ex * ex;
            s.yy += w * ey * ey;
            s.xy += w * ex * ey;
        }
    }
    s
}

fn offsets(positions: &[f64], x: f64, y: f64) -> (Vec<f64>, Vec<f64>) {
    let yo: Vec<f64> = positions.iter().map(|p| y - p).collect();
    let d = yo.iter().map(|dy| x.hypot(*dy)).collect();
    (d, yo)
}

/// Approximate SEM `G` terms from target distances only.
pub fn gterms_sem_approx(cfg: &ArrayConfig, scene: &Scene, arch: Architecture) -> GTerms {
    let (x, y) = scene.target();
    let lambda = scene.wavelength();
    let p0 = scene.tx_power();
    match arch {
        Architecture::Fixed | Architecture::Extended => {
            let layout = arch.layout(cfg);
            let (d, yo) = offsets(layout.positions(0), x, y);
            let s = pair_sums(&d, &yo, false);
            let c = p0 * lambda * lambda / (64.0 * PI * PI);
            GTerms::new(c * x * x * s.xx, c * s.yy, C64::new(c * x * s.xy, 0.0))
        }
        Architecture::Moving => {
            // each snapshot collapses onto its first element
            let (d, yo) = offsets(&extended_array_positions(cfg), x, y);
            let s = pair_sums(&d, &yo, true);
            let inv4: f64 = d.iter().map(|d| d.powi(-4)).sum();
            let n = cfg.n_elements() as f64;
            let c = n * n * p0 * lambda * lambda / (16.0 * PI * PI) / inv4;
            GTerms::new(c * x * x * s.xx, c * s.yy, C64::new(c * x * s.xy, 0.0))
        }
    }
}

/// Approximate SEM bound; `1 / (1 - alpha) * (1/G_xx + 1/G_yy)` up to the noise prefactor.
pub fn crb_sem_approx(cfg: &ArrayConfig, scene: &Scene, arch: Architecture) -> Result<CrbReport> {
    let g = gterms_sem_approx(cfg, scene, arch);
    let prefactor = match arch {
        Architecture::Moving => 1.0,
        Architecture::Fixed | Architecture::Extended => cfg.n_symbols() as f64,
    };
    bound(scene, prefactor, g, arch, Scheme::Sem)
}

/// Large-distance limit of `CRB_moving / CRB_extended` under SEM, `L^2 / (4 N^2)`.
pub fn asymptotic_ratio(cfg: &ArrayConfig) -> f64 {
    let l = cfg.n_symbols() as f64;
    let n = cfg.n_elements() as f64;
    l * l / (4.0 * n * n)
}

/// SEM `G` terms written through `||a||`, `||da_p||` and `a^H da_p` of the
/// exact steering vectors:
///
/// ```text
/// stationary: G_pq = P0 (||a||^2 da_p^H da_q - (da_p^H a)(a^H da_q))
/// moving:     G_pq = P0 sum_l (||a_l||^2 da_p^H da_q + 3 (da_p^H a_l)(a_l^H da_q))
///                    - 4 P0 (sum_l ||a_l||^2 da_p^H a_l)(sum_l ||a_l||^2 a_l^H da_q) / sum_l ||a_l||^4
/// ```
///
/// No distance approximation is involved, so these agree with the exact
/// terms up to rounding.
pub fn gterms_sem_inner(cfg: &ArrayConfig, scene: &Scene, arch: Architecture) -> GTerms {
    let p0 = scene.tx_power();
    match arch {
        Architecture::Fixed | Architecture::Extended => {
            let b = channel::reference_steering(arch, cfg, scene);
            let a2 = norm_sqr(&b.a);
            let g = |p: &[C64], q: &[C64]| (dot_h(p, q) * a2 - dot_h(p, &b.a) * dot_h(&b.a, q)) * p0;
            GTerms::new(
                g(&b.da_dx, &b.da_dx).re,
                g(&b.da_dy, &b.da_dy).re,
                g(&b.da_dx, &b.da_dy),
            )
        }
        Architecture::Moving => {
            let layout = Architecture::Moving.layout(cfg);
            moving_inner(&layout, scene)
        }
    }
}

fn moving_inner(layout: &Layout, scene: &Scene) -> GTerms {
    let p0 = scene.tx_power();
    let bundles: Vec<SteeringBundle> = channel::steering_batch(layout, scene);
    let mut first = [[C64::new(0.0, 0.0); 2]; 2];
    let mut weighted = [C64::new(0.0, 0.0); 2];
    let mut a4 = 0.0;
    for b in &bundles {
        let a2 = norm_sqr(&b.a);
        let da = [&b.da_dx, &b.da_dy];
        let c: [C64; 2] = da.map(|d| dot_h(d, &b.a));
        for p in 0..2 {
            for q in 0..2 {
                first[p][q] += dot_h(da[p], da[q]) * a2 + c[p] * c[q].conj() * 3.0;
            }
            weighted[p] += c[p] * a2;
        }
        a4 += a2 * a2;
    }
    let g = |p: usize, q: usize| (first[p][q] - weighted[p] * weighted[q].conj() * (4.0 / a4)) * p0;
    GTerms::new(g(0, 0).re, g(1, 1).re, g(0, 1))
}
