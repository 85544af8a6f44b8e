//! Fisher information and Cramér-Rao bounds on the target coordinate.
//!
//! The observation is `r_l = b A_l s_l + z_l` with `A_l = a_l a_l^T` and white
//! noise of power `sigma^2`. The unknowns are `(x, y, Re b, Im b)`; `b` is a
//! nuisance parameter. Three routes lead to the position bound:
//!
//! 1. [`fim`] assembles the 4x4 Fisher information and [`crb_from_fim`]
//!    inverts it through the Schur complement of the `b` block;
//! 2. [`gterms_waveform`] evaluates that Schur complement directly as the
//!    2x2 matrix `2|b|^2/sigma^2 [[G_xx, Re G_xy], [Re G_xy, G_yy]]`;
//! 3. [`gterms_covariance`] does the same for a stationary array from its
//!    sample covariance alone.
//!
//! The bound reported everywhere is `var(x) + var(y)` in m^2.

use nalgebra::{Matrix2, Matrix4};

use crate::channel::{self, dot_h, dot_t, SteeringBundle};
use crate::error::{Error, Result};
use crate::geometry::{Architecture, ArrayConfig, Layout, Scene};
use crate::waveform::{self, Covariance, CovarianceSpec, Scheme, WaveformSet};
use crate::C64;

pub mod approx;

pub use approx::{asymptotic_ratio, crb_sem_approx, gterms_sem_approx, gterms_sem_inner};

/// Equilibrated condition numbers above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Fisher information over `(x, y, Re b, Im b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fim {
    pub matrix: Matrix4<f64>,
}

impl Fim {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix * factor,
        }
    }

    /// 2-norm condition number of `D^-1/2 F D^-1/2` with `D = diag(F)`.
    ///
    /// The raw matrix mixes 1/m^2 and dimensionless entries, so its plain
    /// condition number depends on the unit of length; the equilibrated one
    /// does not.
    pub fn condition(&self) -> f64 {
        let diag = self.matrix.diagonal();
        if diag.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
            return f64::INFINITY;
        }
        let scale = diag.map(|d| 1.0 / d.sqrt());
        let eq = Matrix4::from_fn(|i, j| self.matrix[(i, j)] * scale[i] * scale[j]);
        let sv = eq.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// `G_xx`, `G_yy`, `G_xy` and the offset parameter `alpha = Re{G_xy}^2 / (G_xx G_yy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GTerms {
    pub g_xx: f64,
    pub g_yy: f64,
    pub g_xy: C64,
    pub alpha: f64,
    /// `G_xx G_yy - Re{G_xy}^2`
    pub det: f64,
}

impl GTerms {
    pub fn new(g_xx: f64, g_yy: f64, g_xy: C64) -> Self {
        Self::with_det(g_xx, g_yy, g_xy, g_xx * g_yy - g_xy.re * g_xy.re)
    }

    /// Terms with a separately computed determinant.
    pub fn with_det(g_xx: f64, g_yy: f64, g_xy: C64, det: f64) -> Self {
        let denom = g_xx * g_yy;
        let alpha = if denom > 0.0 {
            g_xy.re * g_xy.re / denom
        } else {
            f64::NAN
        };
        Self {
            g_xx,
            g_yy,
            g_xy,
            alpha,
            det,
        }
    }

    /// `(G_xx + G_yy) / (G_xx G_yy - Re{G_xy}^2)`, the geometry factor of the bound.
    pub fn geometry_factor(&self) -> Result<f64> {
        let det = self.det;
        if !(det > 0.0) || !(self.g_xx > 0.0) || !(self.g_yy > 0.0) {
            return Err(Error::Degenerate(format!(
                "G_xx = {:.3e}, G_yy = {:.3e}, det = {:.3e}",
                self.g_xx, self.g_yy, det
            )));
        }
        Ok((self.g_xx + self.g_yy) / det)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbReport {
    /// `var(x) + var(y)` lower bound, m^2.
    pub crb_position: f64,
    pub gterms: GTerms,
    pub architecture: Architecture,
    pub scheme: Scheme,
}

impl CrbReport {
    /// Square root of the bound, in meters.
    pub fn rmse_lower_bound(&self) -> f64 {
        self.crb_position.sqrt()
    }
}

fn check_waveforms(layout: &Layout, ws: &WaveformSet) -> Result<()> {
    if ws.n_symbols() != layout.n_symbols() {
        return Err(Error::Contract(format!(
            "waveform set has {} symbols, layout expects {}",
            ws.n_symbols(),
            layout.n_symbols()
        )));
    }
    if ws.symbols.iter().any(|s| s.len() != layout.n_elements()) {
        return Err(Error::Contract(format!(
            "waveform symbols must have dimension {}",
            layout.n_elements()
        )));
    }
    Ok(())
}

/// Iterate `(bundle, s_l)` over all symbols, computing bundles once per row.
fn for_each_symbol<F: FnMut(&SteeringBundle, &[C64])>(layout: &Layout, scene: &Scene, ws: &WaveformSet, mut f: F) {
    let bundles = channel::steering_batch(layout, scene);
    for (l, s) in ws.symbols.iter().enumerate() {
        let bundle = if bundles.len() == 1 { &bundles[0] } else { &bundles[l] };
        f(bundle, s);
    }
}

/// Fisher information of the observation, assembled term by term.
pub fn fim(layout: &Layout, scene: &Scene, ws: &WaveformSet) -> Result<Fim> {
    check_waveforms(layout, ws)?;
    let mut f_pq = [[C64::new(0.0, 0.0); 2]; 2];
    let mut f_pb = [C64::new(0.0, 0.0); 2];
    let mut f_bb = 0.0;
    for_each_symbol(layout, scene, ws, |bundle, s| {
        let t = dot_t(&bundle.a, s);
        let w: Vec<C64> = bundle.a.iter().map(|z| z * t).collect();
        let u: [Vec<C64>; 2] = [&bundle.da_dx, &bundle.da_dy].map(|da| {
            let tp = dot_t(da, s);
            da.iter().zip(&bundle.a).map(|(d, a)| d * t + a * tp).collect()
        });
        for p in 0..2 {
            for q in 0..2 {
                f_pq[p][q] += dot_h(&u[p], &u[q]);
            }
            f_pb[p] += dot_h(&u[p], &w);
        }
        f_bb += channel::norm_sqr(&w);
    });
    let b = scene.reflection();
    let inv_noise = 1.0 / scene.noise_power();
    let b2 = b.norm_sqr() * inv_noise;
    let fpq = |p: usize, q: usize| f_pq[p][q].re * b2;
    let fpb: [C64; 2] = f_pb.map(|v| v * b.conj() * inv_noise);
    let fbb = f_bb * inv_noise;
    #[rustfmt::skip]
    let matrix = Matrix4::new(
        fpq(0, 0),   fpq(0, 1),   fpb[0].re,  -fpb[0].im,
        fpq(1, 0),   fpq(1, 1),   fpb[1].re,  -fpb[1].im,
        fpb[0].re,   fpb[1].re,   fbb,         0.0,
        -fpb[0].im,  -fpb[1].im,  0.0,         fbb,
    ) * 2.0;
    Ok(Fim { matrix })
}

pub fn fim_moving(cfg: &ArrayConfig, scene: &Scene, ws: &WaveformSet) -> Result<Fim> {
    fim(&Architecture::Moving.layout(cfg), scene, ws)
}

fn check_invertible(f: &Fim) -> Result<()> {
    let condition = f.condition();
    if !(condition <= SINGULAR_CONDITION) {
        return Err(Error::Singular { condition });
    }
    Ok(())
}

/// `[F^-1]_11 + [F^-1]_22` through the Schur complement of the `b` block.
pub fn crb_from_fim(f: &Fim) -> Result<f64> {
    check_invertible(f)?;
    let m = &f.matrix;
    let pos: Matrix2<f64> = m.fixed_view::<2, 2>(0, 0).into();
    let cross: Matrix2<f64> = m.fixed_view::<2, 2>(0, 2).into();
    let nuisance: Matrix2<f64> = m.fixed_view::<2, 2>(2, 2).into();
    let nuisance_inv = nuisance.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    let schur = pos - cross * nuisance_inv * cross.transpose();
    let det = schur[(0, 0)] * schur[(1, 1)] - schur[(0, 1)] * schur[(1, 0)];
    if !(det > 0.0) {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    Ok((schur[(0, 0)] + schur[(1, 1)]) / det)
}

/// Same quantity from a full LU inverse; a cross-check for [`crb_from_fim`].
pub fn crb_from_fim_full(f: &Fim) -> Result<f64> {
    check_invertible(f)?;
    let inv = f.matrix.try_inverse().ok_or(Error::Singular {
        condition: f64::INFINITY,
    })?;
    Ok(inv[(0, 0)] + inv[(1, 1)])
}

/// Covariance seen by one snapshot: a per-symbol rank-one `s s^H` or a
/// sample covariance.
#[derive(Clone, Copy)]
enum SnapshotCov<'a> {
    Symbol(&'a [C64]),
    Spec(&'a CovarianceSpec),
}

impl SnapshotCov<'_> {
    /// `q^T R conj(v)`
    fn form(&self, q: &[C64], v: &[C64]) -> C64 {
        match self {
            SnapshotCov::Symbol(s) => dot_t(q, s) * dot_t(v, s).conj(),
            SnapshotCov::Spec(cov) => cov.form(q, v),
        }
    }

    /// `tr(X^H Y R)` for `X = f a^T + a f^T`, `Y = g a^T + a g^T`.
    fn trace_sym(&self, a: &[C64], f: &[C64], g: &[C64]) -> C64 {
        match self {
            SnapshotCov::Symbol(s) => rank_one_trace(a, f, g, s),
            SnapshotCov::Spec(CovarianceSpec {
                r: Covariance::RankOne(v),
                ..
            }) => rank_one_trace(a, f, g, v),
            SnapshotCov::Spec(_) => self.expanded_trace(a, f, g),
        }
    }

    fn expanded_trace(&self, a: &[C64], f: &[C64], g: &[C64]) -> C64 {
        dot_h(f, g) * self.form(a, a)
            + dot_h(f, a) * self.form(g, a)
            + dot_h(a, g) * self.form(a, f)
            + dot_h(a, a) * self.form(g, f)
    }
}

/// `(X v)^H (Y v)` for `X = f a^T + a f^T`, `Y = g a^T + a g^T`.
fn rank_one_trace(a: &[C64], f: &[C64], g: &[C64], v: &[C64]) -> C64 {
    let ta = dot_t(a, v);
    let image = |h: &[C64]| -> Vec<C64> {
        let th = dot_t(h, v);
        h.iter().zip(a).map(|(h, z)| h * ta + z * th).collect()
    };
    dot_h(&image(f), &image(g))
}

fn half(a: &[C64]) -> Vec<C64> {
    a.iter().map(|z| z * 0.5).collect()
}

/// Schur-complement terms summed over snapshots, in the projected form
/// `G_pq = sum tr(X_p^H X_q R)` with `X_p = dA_p - beta_p A`. The
/// determinant is evaluated as `G_xx * G_yy|x`, where `G_yy|x` comes from
/// the y-direction with its real projection on the x-direction removed.
fn gterms_from_snapshots<'a, I>(snapshots: I) -> GTerms
where
    I: Iterator<Item = (&'a SteeringBundle, SnapshotCov<'a>)> + Clone,
{
    let mut t_aa = 0.0;
    let mut t_ap = [C64::new(0.0, 0.0); 2];
    for (bundle, cov) in snapshots.clone() {
        let a = &bundle.a;
        let ha = half(a);
        t_aa += cov.trace_sym(a, &ha, &ha).re;
        t_ap[0] += cov.trace_sym(a, &ha, &bundle.da_dx);
        t_ap[1] += cov.trace_sym(a, &ha, &bundle.da_dy);
    }
    let beta = t_ap.map(|t| t / t_aa);

    let projected = |bundle: &SteeringBundle| -> [Vec<C64>; 2] {
        let a = &bundle.a;
        [(&bundle.da_dx, beta[0]), (&bundle.da_dy, beta[1])]
            .map(|(da, b)| da.iter().zip(a).map(|(d, z)| d - z * (b * 0.5)).collect())
    };

    let mut g = [[C64::new(0.0, 0.0); 2]; 2];
    for (bundle, cov) in snapshots.clone() {
        let f = projected(bundle);
        for p in 0..2 {
            for q in p..2 {
                g[p][q] += cov.trace_sym(&bundle.a, &f[p], &f[q]);
            }
        }
    }
    let (g_xx, g_yy, g_xy) = (g[0][0].re, g[1][1].re, g[0][1]);
    if !(g_xx > 0.0) {
        return GTerms::new(g_xx, g_yy, g_xy);
    }

    let gamma = g_xy.re / g_xx;
    let mut g_yy_x = 0.0;
    for (bundle, cov) in snapshots {
        let [fx, fy] = projected(bundle);
        let r: Vec<C64> = fy.iter().zip(&fx).map(|(y, x)| y - x * gamma).collect();
        g_yy_x += cov.trace_sym(&bundle.a, &r, &r).re;
    }
    GTerms::with_det(g_xx, g_yy, g_xy, g_xx * g_yy_x)
}

/// `G` terms of an observation with per-symbol waveforms.
pub fn gterms_waveform(layout: &Layout, scene: &Scene, ws: &WaveformSet) -> Result<GTerms> {
    check_waveforms(layout, ws)?;
    let bundles = channel::steering_batch(layout, scene);
    let shared = bundles.len() == 1;
    let snapshots = ws.symbols.iter().enumerate().map(|(l, s)| {
        let bundle = if shared { &bundles[0] } else { &bundles[l] };
        (bundle, SnapshotCov::Symbol(s.as_slice()))
    });
    Ok(gterms_from_snapshots(snapshots))
}

/// `G` terms of a stationary array with steering `bundle` and sample covariance `cov`.
pub fn gterms_covariance(bundle: &SteeringBundle, cov: &CovarianceSpec) -> Result<GTerms> {
    if cov.dim() != bundle.len() {
        return Err(Error::Contract(format!(
            "covariance is {0}x{0}, array has {1} elements",
            cov.dim(),
            bundle.len()
        )));
    }
    Ok(gterms_from_snapshots(std::iter::once((bundle, SnapshotCov::Spec(cov)))))
}

fn bound(
    scene: &Scene,
    prefactor: f64,
    gterms: GTerms,
    architecture: Architecture,
    scheme: Scheme,
) -> Result<CrbReport> {
    let geometry = gterms.geometry_factor()?;
    let b2 = scene.reflection().norm_sqr();
    if !(b2 > 0.0) {
        return Err(Error::Degenerate("reflection coefficient is zero".into()));
    }
    Ok(CrbReport {
        crb_position: scene.noise_power() / (2.0 * b2 * prefactor) * geometry,
        gterms,
        architecture,
        scheme,
    })
}

/// Closed-form bound for any layout driven by per-symbol waveforms.
pub fn crb_waveform_closed(layout: &Layout, scene: &Scene, ws: &WaveformSet) -> Result<CrbReport> {
    let g = gterms_waveform(layout, scene, ws)?;
    bound(scene, 1.0, g, ws.architecture, ws.scheme)
}

/// Closed-form bound of the moving array.
pub fn crb_moving_closed(cfg: &ArrayConfig, scene: &Scene, ws: &WaveformSet) -> Result<CrbReport> {
    let mut report = crb_waveform_closed(&Architecture::Moving.layout(cfg), scene, ws)?;
    report.architecture = Architecture::Moving;
    Ok(report)
}

/// Bound of the N-element array parked at the track start; depends on the
/// waveforms only through `R`.
pub fn crb_fixed(cfg: &ArrayConfig, scene: &Scene, r: &CovarianceSpec) -> Result<CrbReport> {
    let bundle = channel::reference_steering(Architecture::Fixed, cfg, scene);
    let g = gterms_covariance(&bundle, r)?;
    bound(scene, cfg.n_symbols() as f64, g, Architecture::Fixed, r.scheme)
}

/// Bound of the stationary L-element array spanning the track.
pub fn crb_extended(cfg: &ArrayConfig, scene: &Scene, r_hat: &CovarianceSpec) -> Result<CrbReport> {
    let bundle = channel::extended_steering(cfg, scene);
    let g = gterms_covariance(&bundle, r_hat)?;
    bound(scene, cfg.n_symbols() as f64, g, Architecture::Extended, r_hat.scheme)
}

/// Exact bound for an architecture and scheme with the matching standard
/// transmission. `seed` selects the isotropic moving-array realization.
pub fn crb(arch: Architecture, scheme: Scheme, cfg: &ArrayConfig, scene: &Scene, seed: u64) -> Result<CrbReport> {
    match arch {
        Architecture::Moving => {
            let ws = waveform::transmission(arch, scheme, cfg, scene, seed)?;
            crb_moving_closed(cfg, scene, &ws)
        }
        Architecture::Fixed => crb_fixed(cfg, scene, &waveform::fixed_covariance(arch, scheme, cfg, scene)?),
        Architecture::Extended => crb_extended(cfg, scene, &waveform::fixed_covariance(arch, scheme, cfg, scene)?),
    }
}
