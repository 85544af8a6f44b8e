//! Transmit waveforms and their sample covariances.
//!
//! Two schemes are supported for every architecture:
//!
//! - **SEM** (strongest eigenmode): beam the full budget along the conjugate
//!   steering vector, `s = sqrt(P_0) / ||a|| * conj(a)`. The moving array
//!   re-steers at every symbol; the fixed arrays use a rank-one covariance.
//! - **Isotropic**: `R = (P_0 / M) I_M`. The moving array draws i.i.d.
//!   `CN(0, (P_0/N) I_N)` symbols from a seeded stream.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{self, norm_sqr};
use crate::error::{Error, Result};
use crate::geometry::{Architecture, ArrayConfig, Scene};
use crate::rng::{self, Domain};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sem,
    Isotropic,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Sem, Scheme::Isotropic];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Sem => "sem",
            Scheme::Isotropic => "isotropic",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sem" => Ok(Scheme::Sem),
            "iso" | "isotropic" => Ok(Scheme::Isotropic),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Per-symbol transmit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSet {
    pub symbols: Vec<Vec<C64>>,
    pub scheme: Scheme,
    pub architecture: Architecture,
}

impl WaveformSet {
    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    /// Transmit dimension (0 for an empty set).
    pub fn dimension(&self) -> usize {
        self.symbols.first().map_or(0, Vec::len)
    }

    /// Same symbols in reverse order; leaves the sample covariance unchanged.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.symbols.reverse();
        out
    }

    /// Multiply every symbol by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.symbols {
            for z in s.iter_mut() {
                *z *= factor;
            }
        }
        out
    }

    /// Average transmit power `tr(R) = (1/L) sum ||s_l||^2`.
    pub fn mean_power(&self) -> f64 {
        self.symbols.iter().map(|s| norm_sqr(s)).sum::<f64>() / self.symbols.len() as f64
    }
}

/// A covariance matrix stored in the cheapest exact form.
#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// `scale * I_dim`
    ScaledIdentity {
        dim: usize,
        scale: f64,
    },
    /// `v v^H`
    RankOne(Vec<C64>),
    Dense(DMatrix<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpec {
    pub r: Covariance,
    pub scheme: Scheme,
}

impl CovarianceSpec {
    pub fn dim(&self) -> usize {
        match &self.r {
            Covariance::ScaledIdentity { dim, .. } => *dim,
            Covariance::RankOne(v) => v.len(),
            Covariance::Dense(m) => m.nrows(),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.r {
            Covariance::ScaledIdentity { dim, scale } => *dim as f64 * scale,
            Covariance::RankOne(v) => norm_sqr(v),
            Covariance::Dense(m) => m.trace().re,
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.r {
            Covariance::ScaledIdentity { dim, scale } => {
                DMatrix::from_diagonal_element(*dim, *dim, C64::new(*scale, 0.0))
            }
            Covariance::RankOne(v) => DMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj()),
            Covariance::Dense(m) => m.clone(),
        }
    }

    /// `q^T R conj(v)`, the building block of every trace expression in the
    /// bounds.
    pub fn form(&self, q: &[C64], v: &[C64]) -> C64 {
        match &self.r {
            Covariance::ScaledIdentity { scale, .. } => {
                q.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<C64>() * *scale
            }
            Covariance::RankOne(s) => channel::dot_t(q, s) * channel::dot_t(v, s).conj(),
            Covariance::Dense(m) => {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..m.nrows() {
                    let row: C64 = (0..m.ncols()).map(|j| m[(i, j)] * v[j].conj()).sum();
                    acc += q[i] * row;
                }
                acc
            }
        }
    }
}

fn sem_vector(a: &[C64], tx_power: f64) -> Vec<C64> {
    let scale = tx_power.sqrt() / norm_sqr(a).sqrt();
    a.iter().map(|z| z.conj() * scale).collect()
}

/// Conjugate steering vector of every symbol, scaled to `P_0`.
pub fn sem_moving(cfg: &ArrayConfig, scene: &Scene) -> WaveformSet {
    let layout = Architecture::Moving.layout(cfg);
    let symbols = (0..cfg.n_symbols())
        .map(|l| {
            let a = channel::steering_at(
                layout.positions(l),
                scene.target_x(),
                scene.target_y(),
                scene.wavelength(),
            );
            sem_vector(&a, scene.tx_power())
        })
        .collect();
    WaveformSet {
        symbols,
        scheme: Scheme::Sem,
        architecture: Architecture::Moving,
    }
}

/// `R = P_0 / ||a_1||^2 * conj(a_1) a_1^T` for the array parked at the track start.
pub fn sem_fixed(cfg: &ArrayConfig, scene: &Scene) -> CovarianceSpec {
    let a = channel::steering_at(
        Architecture::Fixed.layout(cfg).positions(0),
        scene.target_x(),
        scene.target_y(),
        scene.wavelength(),
    );
    CovarianceSpec {
        r: Covariance::RankOne(sem_vector(&a, scene.tx_power())),
        scheme: Scheme::Sem,
    }
}

/// Rank-one SEM covariance of the L-element track-long array.
pub fn sem_extended(cfg: &ArrayConfig, scene: &Scene) -> CovarianceSpec {
    let a = channel::extended_steering(cfg, scene).a;
    CovarianceSpec {
        r: Covariance::RankOne(sem_vector(&a, scene.tx_power())),
        scheme: Scheme::Sem,
    }
}

pub fn iso_fixed(cfg: &ArrayConfig, scene: &Scene) -> CovarianceSpec {
    let dim = cfg.n_elements();
    CovarianceSpec {
        r: Covariance::ScaledIdentity {
            dim,
            scale: scene.tx_power() / dim as f64,
        },
        scheme: Scheme::Isotropic,
    }
}

pub fn iso_extended(cfg: &ArrayConfig, scene: &Scene) -> CovarianceSpec {
    let dim = cfg.n_symbols();
    CovarianceSpec {
        r: Covariance::ScaledIdentity {
            dim,
            scale: scene.tx_power() / dim as f64,
        },
        scheme: Scheme::Isotropic,
    }
}

/// i.i.d. `CN(0, (P_0/N) I_N)` symbols; symbol `l` comes from substream `l`
/// of `(seed, waveform)`.
///
/// A realization whose average power overshoots the budget is scaled back
/// onto `tr(R) = P_0`, so every set is feasible.
pub fn iso_moving(cfg: &ArrayConfig, scene: &Scene, seed: u64) -> WaveformSet {
    let n = cfg.n_elements();
    let variance = scene.tx_power() / n as f64;
    let symbols = (0..cfg.n_symbols())
        .map(|l| {
            let mut rng = rng::substream(seed, Domain::Waveform, 0, l as u64);
            rng::cscg_vec(&mut rng, n, variance)
        })
        .collect();
    let ws = WaveformSet {
        symbols,
        scheme: Scheme::Isotropic,
        architecture: Architecture::Moving,
    };
    let power = ws.mean_power();
    if power > scene.tx_power() {
        ws.scaled((scene.tx_power() / power).sqrt())
    } else {
        ws
    }
}

fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

/// `(1/L) sum s_l s_l^H`, summed in sorted order so that any permutation of
/// the symbols gives a bit-identical result.
pub fn sample_covariance(ws: &WaveformSet) -> Result<CovarianceSpec> {
    let l = ws.n_symbols();
    if l == 0 {
        return Err(Error::Contract("sample covariance of an empty waveform set".into()));
    }
    let m = ws.dimension();
    if ws.symbols.iter().any(|s| s.len() != m) {
        return Err(Error::Contract("waveform symbols have inconsistent dimensions".into()));
    }
    let mut re = vec![0.0; l];
    let mut im = vec![0.0; l];
    let mut r = DMatrix::<C64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            for (k, s) in ws.symbols.iter().enumerate() {
                let z = s[i] * s[j].conj();
                re[k] = z.re;
                im[k] = z.im;
            }
            r[(i, j)] = C64::new(sorted_sum(&mut re), sorted_sum(&mut im)) / l as f64;
        }
    }
    Ok(CovarianceSpec {
        r: Covariance::Dense(r),
        scheme: ws.scheme,
    })
}

/// Covariance used by a stationary array under `scheme`.
pub fn fixed_covariance(
    arch: Architecture,
    scheme: Scheme,
    cfg: &ArrayConfig,
    scene: &Scene,
) -> Result<CovarianceSpec> {
    match (arch, scheme) {
        (Architecture::Fixed, Scheme::Sem) => Ok(sem_fixed(cfg, scene)),
        (Architecture::Fixed, Scheme::Isotropic) => Ok(iso_fixed(cfg, scene)),
        (Architecture::Extended, Scheme::Sem) => Ok(sem_extended(cfg, scene)),
        (Architecture::Extended, Scheme::Isotropic) => Ok(iso_extended(cfg, scene)),
        (Architecture::Moving, _) => Err(Error::Contract(
            "the moving array is described by per-symbol waveforms, not a covariance".into(),
        )),
    }
}

/// Per-symbol waveforms whose sample covariance equals `cov` exactly.
///
/// Rank-one covariances repeat their vector every symbol. Scaled identities
/// use orthogonal tones `s_l[m] = sqrt(scale) exp(j 2 pi m l / L)`, which need
/// `dim <= L`. Dense covariances are not realizable this way.
pub fn realize_covariance(cov: &CovarianceSpec, n_symbols: usize, architecture: Architecture) -> Result<WaveformSet> {
    let symbols = match &cov.r {
        Covariance::RankOne(v) => vec![v.clone(); n_symbols],
        Covariance::ScaledIdentity { dim, scale } => {
            if *dim > n_symbols {
                return Err(Error::Contract(format!(
                    "cannot realize a rank-{dim} covariance with {n_symbols} symbols"
                )));
            }
            let amp = scale.sqrt();
            (0..n_symbols)
                .map(|l| {
                    (0..*dim)
                        .map(|m| {
                            let turns = ((m * l) % n_symbols) as f64 / n_symbols as f64;
                            C64::from_polar(amp, 2.0 * PI * turns)
                        })
                        .collect()
                })
                .collect()
        }
        Covariance::Dense(_) => return Err(Error::Contract("dense covariances have no canonical waveform".into())),
    };
    Ok(WaveformSet {
        symbols,
        scheme: cov.scheme,
        architecture,
    })
}

/// Waveforms for any architecture and scheme. `seed` only matters for the
/// isotropic moving array.
pub fn transmission(
    arch: Architecture,
    scheme: Scheme,
    cfg: &ArrayConfig,
    scene: &Scene,
    seed: u64,
) -> Result<WaveformSet> {
    match (arch, scheme) {
        (Architecture::Moving, Scheme::Sem) => Ok(sem_moving(cfg, scene)),
        (Architecture::Moving, Scheme::Isotropic) => Ok(iso_moving(cfg, scene, seed)),
        _ => realize_covariance(&fixed_covariance(arch, scheme, cfg, scene)?, cfg.n_symbols(), arch),
    }
}
