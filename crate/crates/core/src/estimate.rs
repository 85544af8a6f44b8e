//! Concentrated maximum-likelihood localization.
//!
//! For a hypothesized target `(x, y)` the reflection coefficient has the
//! closed-form least-squares estimate
//!
//! ```text
//! b~ = sum_l s_l^H conj(a_l) a_l^H r_l / sum_l ||a_l a_l^T s_l||^2
//! ```
//!
//! and, with `b` and the noise power profiled out, the log-likelihood becomes
//!
//! ```text
//! f~(x, y) = -LN (ln(pi / LN) + 1 + ln sum_l ||r_l - b~ a_l a_l^T s_l||^2)
//! ```
//!
//! The target is located by an exhaustive search of `f~` on a uniform grid,
//! optionally polished by a derivative-free pattern search.

use std::f64::consts::PI;
use std::io::Write;

use crate::channel::{self, dot_h, dot_t, norm_sqr};
use crate::crb;
use crate::error::{Error, Result};
use crate::geometry::{Architecture, ArrayConfig, Layout, Scene};
use crate::rng;
use crate::simulate::{self, Components, Observation};
use crate::waveform::{self, Scheme, WaveformSet};
use crate::C64;

/// Floor applied to the residual inside the logarithm.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Pattern search stops once its step falls below this (meters).
pub const REFINE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// x in [5, 15] m, y in [-5, 5] m.
    pub fn default_search() -> Self {
        Self {
            x_min: 5.0,
            x_max: 15.0,
            y_min: -5.0,
            y_max: 5.0,
        }
    }

    /// Square of half-width `half` around `(x, y)`, clipped to `x > 0`.
    pub fn around(x: f64, y: f64, half: f64) -> Result<Self> {
        Self::new((x - half).max(half * 1e-3), x + half, y - half, y + half)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_min > 0.0) || self.x_max < self.x_min || self.y_max < self.y_min {
            return Err(Error::Contract(format!("invalid search region {self:?}")));
        }
        Ok(())
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * step).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodMap {
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    /// `values[ix * y_grid.len() + iy]`
    pub values: Vec<f64>,
    pub argmax: (f64, f64),
    pub argmax_value: f64,
    pub b_at_argmax: C64,
}

impl LikelihoodMap {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.y_grid.len() + iy]
    }

    pub fn resolution(&self) -> f64 {
        match (self.x_grid.len(), self.y_grid.len()) {
            (nx, _) if nx > 1 => self.x_grid[1] - self.x_grid[0],
            (_, ny) if ny > 1 => self.y_grid[1] - self.y_grid[0],
            _ => 0.0,
        }
    }

    /// CSV with columns `x, y, loglik`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "y", "loglik"])?;
        for (ix, x) in self.x_grid.iter().enumerate() {
            for (iy, y) in self.y_grid.iter().enumerate() {
                out.write_record([fmt_f64(*x), fmt_f64(*y), fmt_f64(self.value(ix, iy))])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub position: (f64, f64),
    pub reflection: C64,
    pub objective: f64,
    /// The pattern search moved away from the grid argmax.
    pub refined: bool,
}

/// Value of the concentrated objective at one hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub reflection: C64,
    pub residual: f64,
}

fn objective_from_residual(residual: f64, samples: f64) -> f64 {
    -samples * ((PI / samples).ln() + 1.0 + residual.max(RESIDUAL_FLOOR).ln())
}

fn check(layout: &Layout, ws: &WaveformSet, obs: &Observation) -> Result<()> {
    let (l, m) = (layout.n_symbols(), layout.n_elements());
    let ok = ws.n_symbols() == l
        && obs.n_symbols() == l
        && ws.symbols.iter().all(|s| s.len() == m)
        && obs.per_symbol.iter().all(|r| r.len() == m);
    if !ok {
        return Err(Error::Contract(
            "layout, waveforms and observation disagree in shape".into(),
        ));
    }
    Ok(())
}

/// Closed-form reflection estimate at `hypothesis`, evaluated term by term.
pub fn b_tilde(
    layout: &Layout,
    wavelength: f64,
    ws: &WaveformSet,
    obs: &Observation,
    hypothesis: (f64, f64),
) -> Result<C64> {
    check(layout, ws, obs)?;
    let (x, y) = hypothesis;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("hypothesis x must be positive, got {x}")));
    }
    let mut num = C64::new(0.0, 0.0);
    let mut den = 0.0;
    for l in 0..layout.n_symbols() {
        let a = channel::steering_at(layout.positions(l), x, y, wavelength);
        let s = &ws.symbols[l];
        // s^H conj(a) = conj(a^T s)
        num += dot_t(&a, s).conj() * dot_h(&a, &obs.per_symbol[l]);
        let response: Vec<C64> = {
            let t = dot_t(&a, s);
            a.iter().map(|z| z * t).collect()
        };
        den += norm_sqr(&response);
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!("no echo energy at hypothesis ({x}, {y})")));
    }
    Ok(num / den)
}

/// `f~(x, y)` evaluated directly from the residual `sum_l ||r_l - b~ A_l s_l||^2`.
pub fn concentrated_loglik(
    layout: &Layout,
    wavelength: f64,
    ws: &WaveformSet,
    obs: &Observation,
    hypothesis: (f64, f64),
) -> Result<Evaluation> {
    let b = b_tilde(layout, wavelength, ws, obs, hypothesis)?;
    let (x, y) = hypothesis;
    let mut residual = 0.0;
    for l in 0..layout.n_symbols() {
        let a = channel::steering_at(layout.positions(l), x, y, wavelength);
        let gain = b * dot_t(&a, &ws.symbols[l]);
        residual += obs.per_symbol[l]
            .iter()
            .zip(&a)
            .map(|(r, z)| (r - z * gain).norm_sqr())
            .sum::<f64>();
    }
    let samples = (layout.n_symbols() * layout.n_elements()) as f64;
    Ok(Evaluation {
        objective: objective_from_residual(residual, samples),
        reflection: b,
        residual,
    })
}

/// Consecutive symbols with the same element positions and the same
/// waveform, collapsed onto the sum of their received vectors.
struct Block {
    index: Vec<usize>,
    s: Vec<C64>,
    r_sum: Vec<C64>,
    count: f64,
}

/// Blocks whose element `n` always maps to distinct position
/// `offsets[n] + block`, stored element-major so that every element
/// contributes one contiguous run of distinct positions.
struct Columns {
    offsets: Vec<usize>,
    s_re: Vec<Vec<f64>>,
    s_im: Vec<Vec<f64>>,
    r_re: Vec<Vec<f64>>,
    r_im: Vec<Vec<f64>>,
    count: Vec<f64>,
}

enum Blocks {
    Columns(Columns),
    General(Vec<Block>),
}

impl Blocks {
    fn build(blocks: Vec<Block>) -> Self {
        let n = blocks[0].index.len();
        let offsets = blocks[0].index.clone();
        let affine = blocks
            .iter()
            .enumerate()
            .all(|(b, blk)| blk.index.iter().zip(&offsets).all(|(&i, &o)| i == o + b));
        if !affine {
            return Blocks::General(blocks);
        }
        let column = |f: &dyn Fn(&Block, usize) -> f64| -> Vec<Vec<f64>> {
            (0..n).map(|e| blocks.iter().map(|blk| f(blk, e)).collect()).collect()
        };
        Blocks::Columns(Columns {
            s_re: column(&|blk, e| blk.s[e].re),
            s_im: column(&|blk, e| blk.s[e].im),
            r_re: column(&|blk, e| blk.r_sum[e].re),
            r_im: column(&|blk, e| blk.r_sum[e].im),
            count: blocks.iter().map(|blk| blk.count).collect(),
            offsets,
        })
    }
}

/// Distinct positions written as `origin + k_u * step` with integer `k_u`.
struct Lattice {
    origin: f64,
    step: f64,
    k: Vec<i64>,
}

impl Lattice {
    fn detect(positions: &[f64]) -> Option<Self> {
        let origin = positions[0];
        let step = positions.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if positions.len() == 1 {
            return Some(Self {
                origin,
                step: f64::NAN,
                k: vec![0],
            });
        }
        if !(step > 0.0 && step.is_finite()) {
            return None;
        }
        let mut k = Vec::with_capacity(positions.len());
        for &p in positions {
            let t = (p - origin) / step;
            if (t - t.round()).abs() > 1e-6 {
                return None;
            }
            k.push(t.round() as i64);
        }
        Some(Self { origin, step, k })
    }
}

/// Precomputed form of `f~` for fast repeated evaluation.
///
/// Element positions shared between symbols are evaluated once per
/// hypothesis, and the residual is computed as `||r||^2 - |c|^2 / D` with
/// `c = sum_l (A_l s_l)^H r_l`, `D = sum_l ||A_l s_l||^2`.
pub struct Likelihood {
    wavelength: f64,
    positions: Vec<f64>,
    lattice: Option<Lattice>,
    blocks: Blocks,
    energy: f64,
    samples: f64,
}

impl Likelihood {
    pub fn new(layout: &Layout, wavelength: f64, ws: &WaveformSet, obs: &Observation) -> Result<Self> {
        check(layout, ws, obs)?;
        let mut positions: Vec<f64> = (0..if layout.is_stationary() { 1 } else { layout.n_symbols() })
            .flat_map(|l| layout.positions(l).iter().copied())
            .collect();
        positions.sort_by(f64::total_cmp);
        positions.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        let lookup = |p: f64| -> usize {
            let i = positions.partition_point(|&q| q < p - 1e-12 * p.abs().max(1.0));
            i.min(positions.len() - 1)
        };

        let mut blocks: Vec<Block> = Vec::new();
        for l in 0..layout.n_symbols() {
            let s = &ws.symbols[l];
            let r = &obs.per_symbol[l];
            let same_geometry = layout.is_stationary() || (l > 0 && layout.positions(l) == layout.positions(l - 1));
            if let Some(last) = blocks.last_mut() {
                if same_geometry && last.s == *s {
                    for (acc, z) in last.r_sum.iter_mut().zip(r) {
                        *acc += z;
                    }
                    last.count += 1.0;
                    continue;
                }
            }
            blocks.push(Block {
                index: layout.positions(l).iter().map(|&p| lookup(p)).collect(),
                s: s.clone(),
                r_sum: r.clone(),
                count: 1.0,
            });
        }
        let energy = obs.per_symbol.iter().map(|r| norm_sqr(r)).sum();
        Ok(Self {
            wavelength,
            lattice: Lattice::detect(&positions),
            positions,
            blocks: Blocks::build(blocks),
            energy,
            samples: (layout.n_symbols() * layout.n_elements()) as f64,
        })
    }

    /// Distinct element positions evaluated per hypothesis.
    pub fn distinct_positions(&self) -> usize {
        self.positions.len()
    }

    pub fn evaluate(&self, x: f64, y: f64) -> Evaluation {
        let mut a_re = Vec::with_capacity(self.positions.len());
        let mut a_im = Vec::with_capacity(self.positions.len());
        for &p in &self.positions {
            let z = channel::element_response(x.hypot(y - p), self.wavelength);
            a_re.push(z.re);
            a_im.push(z.im);
        }
        self.evaluate_with(&a_re, &a_im)
    }

    /// Objective along `y = y0 + j * dy`, `j = 0..count`, at fixed `x`.
    pub fn evaluate_column(&self, x: f64, y0: f64, dy: f64, count: usize) -> Vec<Evaluation> {
        let m = self.lattice.as_ref().and_then(|lat| {
            if lat.k.len() == 1 {
                return Some((lat, 0i64));
            }
            let m = dy / lat.step;
            (m.round() >= 1.0 && (m - m.round()).abs() <= 1e-6).then(|| (lat, m.round() as i64))
        });
        let Some((lat, m)) = m.filter(|_| count > 1) else {
            return (0..count).map(|j| self.evaluate(x, y0 + j as f64 * dy)).collect();
        };
        if lat.k.len() == 1 {
            return (0..count).map(|j| self.evaluate(x, y0 + j as f64 * dy)).collect();
        }
        let k_min = *lat.k.iter().min().expect("non-empty");
        let k_max = *lat.k.iter().max().expect("non-empty");
        let lo = -k_max;
        let hi = m * (count as i64 - 1) - k_min;
        let base = y0 - lat.origin;
        let table: Vec<C64> = (lo..=hi)
            .map(|i| channel::element_response(x.hypot(base + i as f64 * lat.step), self.wavelength))
            .collect();
        let mut a_re = vec![0.0; lat.k.len()];
        let mut a_im = vec![0.0; lat.k.len()];
        (0..count as i64)
            .map(|j| {
                for (u, &k) in lat.k.iter().enumerate() {
                    let z = table[(m * j - k - lo) as usize];
                    a_re[u] = z.re;
                    a_im[u] = z.im;
                }
                self.evaluate_with(&a_re, &a_im)
            })
            .collect()
    }

    fn evaluate_with(&self, a_re: &[f64], a_im: &[f64]) -> Evaluation {
        let (c, den) = match &self.blocks {
            Blocks::Columns(cols) => Self::accumulate_columns(cols, a_re, a_im),
            Blocks::General(blocks) => Self::accumulate_general(blocks, a_re, a_im),
        };
        if !(den > 0.0) {
            return Evaluation {
                objective: f64::NEG_INFINITY,
                reflection: C64::new(f64::NAN, f64::NAN),
                residual: f64::NAN,
            };
        }
        let residual = self.energy - c.norm_sqr() / den;
        Evaluation {
            objective: objective_from_residual(residual, self.samples),
            reflection: c / den,
            residual,
        }
    }

    fn accumulate_columns(cols: &Columns, a_re: &[f64], a_im: &[f64]) -> (C64, f64) {
        let nb = cols.count.len();
        let mut g_re = vec![0.0; nb];
        let mut g_im = vec![0.0; nb];
        let mut h_re = vec![0.0; nb];
        let mut h_im = vec![0.0; nb];
        let mut nrm = vec![0.0; nb];
        for (e, &o) in cols.offsets.iter().enumerate() {
            let (ar, ai) = (&a_re[o..o + nb], &a_im[o..o + nb]);
            let (sr, si) = (&cols.s_re[e][..nb], &cols.s_im[e][..nb]);
            let (rr, ri) = (&cols.r_re[e][..nb], &cols.r_im[e][..nb]);
            for b in 0..nb {
                let (x, y) = (ar[b], ai[b]);
                g_re[b] += x * sr[b] - y * si[b];
                g_im[b] += x * si[b] + y * sr[b];
                h_re[b] += x * rr[b] + y * ri[b];
                h_im[b] += x * ri[b] - y * rr[b];
                nrm[b] += x * x + y * y;
            }
        }
        let mut c_re = 0.0;
        let mut c_im = 0.0;
        let mut den = 0.0;
        for b in 0..nb {
            c_re += g_re[b] * h_re[b] + g_im[b] * h_im[b];
            c_im += g_re[b] * h_im[b] - g_im[b] * h_re[b];
            den += cols.count[b] * (g_re[b] * g_re[b] + g_im[b] * g_im[b]) * nrm[b];
        }
        (C64::new(c_re, c_im), den)
    }

    fn accumulate_general(blocks: &[Block], a_re: &[f64], a_im: &[f64]) -> (C64, f64) {
        let mut c = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for b in blocks {
            let mut g = C64::new(0.0, 0.0);
            let mut h = C64::new(0.0, 0.0);
            let mut nrm = 0.0;
            for ((&i, s), r) in b.index.iter().zip(&b.s).zip(&b.r_sum) {
                let z = C64::new(a_re[i], a_im[i]);
                g += z * s;
                h += z.conj() * r;
                nrm += z.norm_sqr();
            }
            c += g.conj() * h;
            den += b.count * g.norm_sqr() * nrm;
        }
        (c, den)
    }
}

/// Exhaustive search of `f~` over a uniform grid. Ties go to the smallest
/// `x`, then the smallest `y`.
pub fn grid_search(lik: &Likelihood, region: &Region, resolution: f64) -> Result<LikelihoodMap> {
    region.validate()?;
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Contract(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let x_grid = axis(region.x_min, region.x_max, resolution);
    let y_grid = axis(region.y_min, region.y_max, resolution);
    if x_grid.is_empty() || y_grid.is_empty() {
        return Err(Error::Contract("empty search grid".into()));
    }
    let mut values = Vec::with_capacity(x_grid.len() * y_grid.len());
    let mut best: Option<(f64, (f64, f64), C64)> = None;
    for &x in &x_grid {
        let column = lik.evaluate_column(x, y_grid[0], resolution, y_grid.len());
        for (&y, e) in y_grid.iter().zip(column) {
            let v = if e.objective.is_nan() {
                f64::NEG_INFINITY
            } else {
                e.objective
            };
            values.push(v);
            if best.is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v, (x, y), e.reflection));
            }
        }
    }
    let (argmax_value, argmax, b_at_argmax) = best.expect("grid is non-empty");
    Ok(LikelihoodMap {
        x_grid,
        y_grid,
        values,
        argmax,
        argmax_value,
        b_at_argmax,
    })
}

struct Probe<'a> {
    lik: &'a Likelihood,
    evaluations: usize,
}

impl Probe<'_> {
    fn at(&mut self, p: (f64, f64)) -> Evaluation {
        self.evaluations += 1;
        if p.0 > 0.0 {
            self.lik.evaluate(p.0, p.1)
        } else {
            Evaluation {
                objective: f64::NEG_INFINITY,
                reflection: C64::new(f64::NAN, f64::NAN),
                residual: f64::NAN,
            }
        }
    }

    /// One coordinate sweep around `p`, keeping strict improvements.
    fn explore(&mut self, mut p: (f64, f64), mut best: Evaluation, step: f64) -> ((f64, f64), Evaluation) {
        for axis in 0..2 {
            for sign in [1.0, -1.0] {
                let mut cand = p;
                if axis == 0 {
                    cand.0 += sign * step;
                } else {
                    cand.1 += sign * step;
                }
                let e = self.at(cand);
                if e.objective > best.objective {
                    p = cand;
                    best = e;
                    break;
                }
            }
        }
        (p, best)
    }
}

/// Hooke-Jeeves pattern search from the grid argmax. The step starts at one
/// grid cell and halves whenever neither exploration nor a pattern move
/// improves, down to [`REFINE_TOLERANCE`]. Only strict improvements are
/// accepted, so the objective never decreases.
pub fn refine(map: &LikelihoodMap, lik: &Likelihood) -> EstimateResult {
    let start = map.argmax;
    let mut probe = Probe { lik, evaluations: 0 };
    let mut base = start;
    let mut best = probe.at(base);
    if !best.objective.is_finite() {
        return EstimateResult {
            position: start,
            reflection: map.b_at_argmax,
            objective: map.argmax_value,
            refined: false,
        };
    }
    let mut step = map.resolution();
    if !(step > 0.0) {
        step = 1e-2;
    }
    while step >= REFINE_TOLERANCE && probe.evaluations < 20_000 {
        let (mut next, mut next_eval) = probe.explore(base, best, step);
        if next_eval.objective > best.objective {
            loop {
                let pattern = (2.0 * next.0 - base.0, 2.0 * next.1 - base.1);
                base = next;
                best = next_eval;
                let anchor = probe.at(pattern);
                let (cand, cand_eval) = probe.explore(pattern, anchor, step);
                if cand_eval.objective > best.objective {
                    next = cand;
                    next_eval = cand_eval;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
        }
    }
    EstimateResult {
        position: base,
        reflection: best.reflection,
        objective: best.objective,
        refined: base != start,
    }
}

/// Search settings shared by the Monte-Carlo harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchSpec {
    pub region: Region,
    pub resolution: f64,
    pub refine: bool,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            region: Region::default_search(),
            resolution: 0.04,
            refine: true,
        }
    }
}

/// Grid search plus optional refinement.
pub fn locate(lik: &Likelihood, search: &SearchSpec) -> Result<(LikelihoodMap, EstimateResult)> {
    let map = grid_search(lik, &search.region, search.resolution)?;
    let est = if search.refine {
        refine(&map, lik)
    } else {
        EstimateResult {
            position: map.argmax,
            reflection: map.b_at_argmax,
            objective: map.argmax_value,
            refined: false,
        }
    };
    Ok((map, est))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialEstimate {
    pub trial: usize,
    pub seed: u64,
    pub x_hat: f64,
    pub y_hat: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub rmse: f64,
    pub crb_rmse: f64,
    pub trials: Vec<TrialEstimate>,
}

/// Monte-Carlo settings beyond the scene itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloSpec {
    pub architecture: Architecture,
    pub scheme: Scheme,
    pub trials: usize,
    pub seed: u64,
    pub search: SearchSpec,
    /// Disable receiver noise (for convergence checks).
    pub noiseless: bool,
}

/// Position RMSE of the ML estimator over seeded trials, next to the bound.
///
/// The waveform set is drawn once from `seed`; trial `t` uses noise seed
/// `child_seed(seed, t)`.
pub fn monte_carlo_rmse(cfg: &ArrayConfig, scene: &Scene, spec: &MonteCarloSpec) -> Result<MonteCarloResult> {
    if spec.trials == 0 {
        return Err(Error::Contract("at least one trial is required".into()));
    }
    let arch = spec.architecture;
    let ws = waveform::transmission(arch, spec.scheme, cfg, scene, spec.seed)?;
    let layout = arch.layout(cfg);
    let bound = match arch {
        Architecture::Moving => crb::crb_moving_closed(cfg, scene, &ws)?,
        _ => crb::crb(arch, spec.scheme, cfg, scene, spec.seed)?,
    };
    let components = if spec.noiseless {
        Components::SignalOnly
    } else {
        Components::SignalAndNoise
    };
    let (tx, ty) = scene.target();
    let mut trials = Vec::with_capacity(spec.trials);
    let mut sq = 0.0;
    for t in 0..spec.trials {
        let seed = rng::child_seed(spec.seed, t as u64);
        let obs = simulate::synthesize_on(&layout, scene, &ws, seed, components)?;
        let lik = Likelihood::new(&layout, scene.wavelength(), &ws, &obs)?;
        let (_, est) = locate(&lik, &spec.search)?;
        let (x_hat, y_hat) = est.position;
        let error = (x_hat - tx).hypot(y_hat - ty);
        sq += error * error;
        trials.push(TrialEstimate {
            trial: t,
            seed,
            x_hat,
            y_hat,
            error,
        });
    }
    Ok(MonteCarloResult {
        rmse: (sq / spec.trials as f64).sqrt(),
        crb_rmse: bound.rmse_lower_bound(),
        trials,
    })
}
