mod common;

use common::{bundles, dd, rel, small_scene};
use moving_array::channel::{self, dot_h, norm_sqr, steering_at};
use moving_array::crb::{self, approx};
use moving_array::estimate::{self, concentrated_loglik, Likelihood, MonteCarloSpec, Region, SearchSpec};
use moving_array::geometry::{self, antenna_position, distance_field, extended_array_positions};
use moving_array::simulate::{self, Components};
use moving_array::waveform::{self, sample_covariance, sem_fixed, sem_moving, Scheme};
use moving_array::{Architecture, ArrayConfig, Layout, Scene, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn scene_at(x: f64, y: f64) -> Scene {
    Scene::default_scenario().with_target(x, y).unwrap()
}

fn small_config(n: usize, l: usize) -> ArrayConfig {
    ArrayConfig::new(n, 0.025, 5.0, 1e-3, l).unwrap()
}

/// Central difference with step `h`, refined by two Richardson levels.
fn richardson<F: Fn(f64) -> Vec<C64>>(f: F, at: f64, h: f64) -> Vec<C64> {
    let central = |h: f64| -> Vec<C64> {
        let p = f(at + h);
        let m = f(at - h);
        p.iter().zip(&m).map(|(p, m)| (p - m) / (2.0 * h)).collect()
    };
    let combine = |fine: &[C64], coarse: &[C64], k: f64| -> Vec<C64> {
        fine.iter().zip(coarse).map(|(f, c)| (f * k - c) / (k - 1.0)).collect()
    };
    let (d1, d2, d4) = (central(h), central(h / 2.0), central(h / 4.0));
    let r1 = combine(&d2, &d1, 4.0);
    let r2 = combine(&d4, &d2, 4.0);
    combine(&r2, &r1, 16.0)
}

fn vec_rel(a: &[C64], b: &[C64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    (diff / norm_sqr(b)).sqrt()
}

/// Double-precision rounding stays well below 1e-9 after amplification by
/// the cancellation inside the `G` terms and their Schur complement.
fn resolvable(arch: Architecture, cfg: &ArrayConfig, scene: &Scene, g: &crb::GTerms) -> bool {
    (g.g_xx + g.g_yy).powi(2) / g.det < 1e5 && cancellation(arch, cfg, scene, g) < 1e5
}

prop_compose! {
    fn near_field_scene()(
        x in 2.0f64..30.0,
        y in -5.0f64..5.0,
        n in 2usize..=16,
        l in 16usize..=256,
    ) -> (f64, f64, usize, usize) {
        (x, y, n, l)
    }
}

/// Ratio of the uncancelled SEM sums to the smaller diagonal `G` term; the
/// factor by which rounding in the inputs is amplified.
fn cancellation(arch: Architecture, cfg: &ArrayConfig, scene: &Scene, g: &crb::GTerms) -> f64 {
    let snapshots = match arch {
        Architecture::Moving => bundles(&arch.layout(cfg), scene),
        _ => vec![channel::reference_steering(arch, cfg, scene)],
    };
    let mut total: f64 = 0.0;
    for b in &snapshots {
        let a2 = norm_sqr(&b.a);
        for da in [&b.da_dx, &b.da_dy] {
            total = total.max(a2 * norm_sqr(da) + 3.0 * dot_h(da, &b.a).norm_sqr());
        }
    }
    total * snapshots.len() as f64 * scene.tx_power() / g.g_xx.min(g.g_yy)
}

fn outer(u: &[C64]) -> Vec<C64> {
    u.iter().flat_map(|a| u.iter().map(move |b| a * b)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn positions_increase_and_distances_exceed_range(
        (x, y, n, l) in small_scene(),
        v in 0.1f64..20.0,
    ) {
        let cfg = ArrayConfig::new(n, 0.025, v, 1e-3, l).unwrap();
        for k in 0..n {
            for s in 1..l {
                prop_assert!(antenna_position(&cfg, s, k).unwrap() > antenna_position(&cfg, s - 1, k).unwrap());
            }
        }
        let field = distance_field(&cfg, &scene_at(x, y));
        prop_assert!(field.distances.iter().flatten().all(|&d| d >= x));
    }

    #[test]
    fn extended_positions_are_the_first_column((_, _, n, l) in small_scene(), v in 0.1f64..20.0) {
        let cfg = ArrayConfig::new(n, 0.025, v, 1e-3, l).unwrap();
        let ext = extended_array_positions(&cfg);
        for (s, p) in ext.iter().enumerate() {
            prop_assert_eq!(*p, antenna_position(&cfg, s, 0).unwrap());
        }
    }

    #[test]
    fn steering_derivatives_match_central_differences(
        x in 1.0f64..100.0,
        y in -10.0f64..10.0,
        n in 1usize..=16,
    ) {
        let positions: Vec<f64> = (0..n).map(|k| k as f64 * 0.025).collect();
        let lambda = 0.05;
        let bundle = channel::bundle_at(&positions, x, y, lambda);
        let hx = 1e-5 * x.abs().max(1.0);
        let hy = 1e-5 * y.abs().max(1.0);
        let fd_x = richardson(|t| steering_at(&positions, t, y, lambda), x, hx);
        let fd_y = richardson(|t| steering_at(&positions, x, t, lambda), y, hy);
        let jacobian = |dx: &[C64], dy: &[C64]| -> Vec<C64> { dx.iter().chain(dy).copied().collect() };
        prop_assert!(vec_rel(&jacobian(&bundle.da_dx, &bundle.da_dy), &jacobian(&fd_x, &fd_y)) <= 1e-6);
        let pair = channel::response_from_bundle(&bundle);
        let fd_ax = richardson(|t| outer(&steering_at(&positions, t, y, lambda)), x, hx);
        let fd_ay = richardson(|t| outer(&steering_at(&positions, x, t, lambda)), y, hy);
        let flat = |m: &nalgebra::DMatrix<C64>| -> Vec<C64> { (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])).collect() };
        prop_assert!(
            vec_rel(&jacobian(&flat(&pair.da_dx), &flat(&pair.da_dy)), &jacobian(&fd_ax, &fd_ay)) <= 1e-6
        );
    }

    #[test]
    fn normalized_steering_flattens_with_range(x in 10.0f64..1e4, y in -10.0f64..10.0, n in 2usize..=16) {
        let positions: Vec<f64> = (0..n).map(|k| k as f64 * 0.025).collect();
        let spread = |x: f64| {
            let a = steering_at(&positions, x, y, 0.05);
            let norm = norm_sqr(&a).sqrt();
            let mags: Vec<f64> = a.iter().map(|z| z.norm() / norm).collect();
            mags.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mags.iter().copied().fold(f64::INFINITY, f64::min)
        };
        prop_assert!(spread(10.0 * x) <= spread(x));
        prop_assert!(spread(1e3 * x) < 1e-3 / x);
    }

    #[test]
    fn inner_products_match_phase_only_forms(
        x in 1.0f64..100.0,
        y in -10.0f64..10.0,
        n in 1usize..=16,
    ) {
        let lambda = 0.05;
        let k = 2.0 * PI / lambda;
        let positions: Vec<f64> = (0..n).map(|i| i as f64 * 0.025).collect();
        let b = channel::bundle_at(&positions, x, y, lambda);
        let d: Vec<f64> = positions.iter().map(|p| x.hypot(y - p)).collect();
        let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
        let tol = lambda / (2.0 * PI * dmin) + 1e-9;
        let amp2: Vec<f64> = d.iter().map(|d| (lambda / (4.0 * PI * d)).powi(2)).collect();
        let a2: f64 = amp2.iter().sum();
        prop_assert!(rel(norm_sqr(&b.a), a2) <= 1e-9);
        let partials = [
            d.iter().map(|d| x / d).collect::<Vec<f64>>(),
            d.iter().zip(&positions).map(|(d, p)| (y - p) / d).collect(),
        ];
        for (da, dd) in [&b.da_dx, &b.da_dy].into_iter().zip(&partials) {
            let norm_approx: f64 = k * k * amp2.iter().zip(dd).map(|(w, g)| w * g * g).sum::<f64>();
            let cross_approx = C64::new(0.0, k * amp2.iter().zip(dd).map(|(w, g)| w * g).sum::<f64>());
            let cross_scale = k * amp2.iter().zip(dd).map(|(w, g)| w * g.abs()).sum::<f64>();
            if norm_approx > 0.0 {
                prop_assert!(rel(norm_sqr(da), norm_approx) <= tol);
            }
            if cross_scale > 0.0 {
                prop_assert!((dot_h(da, &b.a) - cross_approx).norm() / cross_scale <= tol);
            }
        }
    }

    #[test]
    fn every_transmission_respects_the_power_budget(
        (x, y, n, l) in small_scene(),
        p0_dbm in 0.0f64..40.0,
        seed in any::<u64>(),
    ) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y).with_tx_power(geometry::dbm_to_watts(p0_dbm)).unwrap();
        for arch in Architecture::ALL {
            for scheme in Scheme::ALL {
                let ws = match waveform::transmission(arch, scheme, &cfg, &scene, seed) {
                    Ok(ws) => ws,
                    Err(moving_array::Error::Contract(_)) => continue,
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                prop_assert!(ws.mean_power() <= scene.tx_power() + 1e-9);
                if arch != Architecture::Moving {
                    let cov = waveform::fixed_covariance(arch, scheme, &cfg, &scene).unwrap();
                    prop_assert!(cov.trace() <= scene.tx_power() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn sem_fixed_has_conjugate_steering_as_top_eigenvector((x, y, n, l) in small_scene()) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y);
        let r = sem_fixed(&cfg, &scene).to_dense();
        let a: Vec<C64> = steering_at(Architecture::Fixed.layout(&cfg).positions(0), x, y, scene.wavelength())
            .iter()
            .map(|z| z.conj())
            .collect();
        let ra = &r * nalgebra::DVector::from_vec(a.clone());
        let expect: Vec<C64> = a.iter().map(|z| z * scene.tx_power()).collect();
        prop_assert!(vec_rel(ra.as_slice(), &expect) <= 1e-12);
    }

    #[test]
    fn fisher_information_is_positive_semidefinite((x, y, n, l) in small_scene(), seed in any::<u64>()) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y);
        for scheme in Scheme::ALL {
            let ws = waveform::transmission(Architecture::Moving, scheme, &cfg, &scene, seed).unwrap();
            let f = crb::fim_moving(&cfg, &scene, &ws).unwrap().matrix;
            let min = f.symmetric_eigen().eigenvalues.min();
            prop_assert!(min >= -1e-9 * f.trace());
        }
    }

    #[test]
    fn closed_form_equals_inversion_when_well_conditioned((x, y, n, l) in small_scene(), seed in any::<u64>()) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y);
        for scheme in Scheme::ALL {
            let ws = waveform::transmission(Architecture::Moving, scheme, &cfg, &scene, seed).unwrap();
            let layout = Architecture::Moving.layout(&cfg);
            if crb::fim(&layout, &scene, &ws).unwrap().condition() >= 1e10 {
                continue;
            }
            let oracle = dd::position_bound(&dd::fim(&bundles(&layout, &scene), &layout, &scene, &ws));
            let closed = crb::crb_moving_closed(&cfg, &scene, &ws).unwrap().crb_position;
            prop_assert!(rel(closed, oracle) <= 1e-10, "closed {closed} oracle {oracle}");
        }
    }

    #[test]
    fn bound_is_homogeneous_in_power_and_noise((x, y, n, l) in near_field_scene(), c in 0.01f64..100.0) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y);
        let mut checked = 0;
        for arch in Architecture::ALL {
            let report = crb::crb(arch, Scheme::Sem, &cfg, &scene, 1).unwrap();
            if !resolvable(arch, &cfg, &scene, &report.gterms) {
                continue;
            }
            checked += 1;
            let base = report.crb_position;
            let bound = |s: &Scene| crb::crb(arch, Scheme::Sem, &cfg, s, 1).unwrap().crb_position;
            let power = bound(&scene.with_tx_power(c * scene.tx_power()).unwrap());
            let noise = bound(&scene.with_noise_power(c * scene.noise_power()).unwrap());
            prop_assert!(rel(power * c, base) <= 1e-9, "{arch}: {} vs {base}", power * c);
            prop_assert!(rel(noise / c, base) <= 1e-9, "{arch}: {} vs {base}", noise / c);
        }
        prop_assume!(checked > 0);
    }

    #[test]
    fn reversing_symbols_keeps_the_covariance_and_fixed_bound((x, y, n, l) in small_scene()) {
        let cfg = small_config(n.max(2), l);
        let scene = scene_at(x, y);
        let ws = sem_moving(&cfg, &scene);
        let r = sample_covariance(&ws).unwrap();
        let r_rev = sample_covariance(&ws.reversed()).unwrap();
        prop_assert!((r.to_dense() - r_rev.to_dense()).norm() <= 1e-12 * r.trace());
        let fixed = crb::crb_fixed(&cfg, &scene, &r).map(|b| b.crb_position.to_bits());
        let fixed_rev = crb::crb_fixed(&cfg, &scene, &r_rev).map(|b| b.crb_position.to_bits());
        prop_assert_eq!(fixed.ok(), fixed_rev.ok());
    }

    #[test]
    fn inner_product_g_terms_equal_exact_ones((x, y, n, l) in near_field_scene()) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y);
        let mut checked = 0;
        for arch in Architecture::ALL {
            let exact = crb::crb(arch, Scheme::Sem, &cfg, &scene, 1).unwrap().gterms;
            if !resolvable(arch, &cfg, &scene, &exact) {
                continue;
            }
            checked += 1;
            let inner = approx::gterms_sem_inner(&cfg, &scene, arch);
            let scale = (exact.g_xx * exact.g_yy).sqrt();
            prop_assert!(rel(inner.g_xx, exact.g_xx) <= 1e-9, "{arch} g_xx {} vs {}", inner.g_xx, exact.g_xx);
            prop_assert!(rel(inner.g_yy, exact.g_yy) <= 1e-9, "{arch} g_yy {} vs {}", inner.g_yy, exact.g_yy);
            prop_assert!((inner.g_xy - exact.g_xy).norm() <= 1e-9 * scale);
        }
        prop_assume!(checked > 0);
    }

    #[test]
    fn sem_echo_power_is_p0_times_fourth_power_of_gain((x, y, n, l) in small_scene()) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y).with_reflection(C64::new(0.3, -0.7)).unwrap();
        let ws = sem_moving(&cfg, &scene);
        let obs = simulate::synthesize(&cfg, &scene, &ws, 0).unwrap();
        let signal = simulate::synthesize_on(&Architecture::Moving.layout(&cfg), &scene, &ws, 0, Components::SignalOnly).unwrap();
        prop_assert_eq!(obs.n_symbols(), l);
        let layout = Architecture::Moving.layout(&cfg);
        for s in 0..l {
            let a = steering_at(layout.positions(s), x, y, scene.wavelength());
            let expect = scene.reflection().norm_sqr() * scene.tx_power() * norm_sqr(&a).powi(2);
            prop_assert!(rel(norm_sqr(&signal.per_symbol[s]), expect) <= 1e-9);
        }
    }

    #[test]
    fn profiled_likelihood_is_the_full_likelihood_at_the_estimates(
        (x, y, n, l) in small_scene(),
        hx in 2.0f64..100.0,
        hy in -10.0f64..10.0,
        seed in any::<u64>(),
    ) {
        let cfg = small_config(n, l);
        let scene = scene_at(x, y);
        let ws = sem_moving(&cfg, &scene);
        let layout = Architecture::Moving.layout(&cfg);
        let obs = simulate::synthesize(&cfg, &scene, &ws, seed).unwrap();
        let e = concentrated_loglik(&layout, scene.wavelength(), &ws, &obs, (hx, hy)).unwrap();
        let samples = (n * l) as f64;
        let mut residual = 0.0;
        for s in 0..l {
            let a = steering_at(layout.positions(s), hx, hy, scene.wavelength());
            let gain = e.reflection * channel::dot_t(&a, &ws.symbols[s]);
            residual += obs.per_symbol[s].iter().zip(&a).map(|(r, z)| (r - z * gain).norm_sqr()).sum::<f64>();
        }
        let sigma2 = residual / samples;
        let ln_f = -samples * (PI * sigma2).ln() - residual / sigma2;
        prop_assert!((ln_f - e.objective).abs() <= 1e-9 * e.objective.abs().max(1.0));
        let fast = Likelihood::new(&layout, scene.wavelength(), &ws, &obs).unwrap().evaluate(hx, hy);
        prop_assert!((fast.objective - e.objective).abs() <= 1e-9 * e.objective.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noiseless_grid_search_recovers_an_on_grid_target(
        n in 1usize..=4,
        l in 8usize..=32,
        ix in 0usize..=20,
        iy in 0usize..=20,
    ) {
        let cfg = ArrayConfig::new(n, 0.025, 5.0, 1e-2, l).unwrap();
        let (x, y) = (2.0 + 0.1 * ix as f64, -1.0 + 0.1 * iy as f64);
        let scene = scene_at(x, y);
        let ws = sem_moving(&cfg, &scene);
        let layout = Architecture::Moving.layout(&cfg);
        let obs = simulate::synthesize_on(&layout, &scene, &ws, 0, Components::SignalOnly).unwrap();
        let lik = Likelihood::new(&layout, scene.wavelength(), &ws, &obs).unwrap();
        let map = estimate::grid_search(&lik, &Region::new(2.0, 4.0, -1.0, 1.0).unwrap(), 0.1).unwrap();
        prop_assert!((map.argmax.0 - x).abs() < 1e-9 && (map.argmax.1 - y).abs() < 1e-9, "{:?} vs ({x}, {y})", map.argmax);
    }
}

#[test]
fn architectures_are_ordered_at_the_reference_scenario() {
    let cfg = ArrayConfig::default_scenario();
    let scene = Scene::default_scenario();
    let b = |arch| crb::crb(arch, Scheme::Sem, &cfg, &scene, 1).unwrap().crb_position;
    let (moving, fixed, extended) = (
        b(Architecture::Moving),
        b(Architecture::Fixed),
        b(Architecture::Extended),
    );
    assert!(extended < moving && moving < fixed);
    assert!(fixed / moving > 1e4);
}

#[test]
fn sem_moving_waveforms_change_along_the_track() {
    let cfg = ArrayConfig::default_scenario();
    let ws = sem_moving(&cfg, &Scene::default_scenario());
    let first = &ws.symbols[0];
    let last = &ws.symbols[cfg.n_symbols() - 1];
    let cos = dot_h(first, last).norm() / (norm_sqr(first) * norm_sqr(last)).sqrt();
    assert!(cos < 1.0 - 1e-6);
}

#[test]
fn noise_quadratures_have_half_the_noise_power() {
    let cfg = ArrayConfig::new(10, 0.025, 5.0, 1e-3, 1000).unwrap();
    let scene = Scene::default_scenario();
    let ws = sem_moving(&cfg, &scene);
    let obs = simulate::synthesize_on(
        &Architecture::Moving.layout(&cfg),
        &scene,
        &ws,
        42,
        Components::NoiseOnly,
    )
    .unwrap();
    let samples = obs.stacked();
    assert_eq!(samples.len(), 10_000);
    let half = scene.noise_power() / 2.0;
    let var_re = samples.iter().map(|z| z.re * z.re).sum::<f64>() / samples.len() as f64;
    let var_im = samples.iter().map(|z| z.im * z.im).sum::<f64>() / samples.len() as f64;
    assert!(rel(var_re, half) <= 0.05, "{var_re} vs {half}");
    assert!(rel(var_im, half) <= 0.05, "{var_im} vs {half}");
}

#[test]
fn rmse_falls_with_noise_power() {
    let cfg = ArrayConfig::default_scenario();
    let scene = Scene::default_scenario();
    let search = SearchSpec {
        region: Region::around(10.0, 0.0, 0.4).unwrap(),
        resolution: 0.01,
        refine: true,
    };
    let rmse = |noise: f64| {
        let spec = MonteCarloSpec {
            architecture: Architecture::Moving,
            scheme: Scheme::Sem,
            trials: 30,
            seed: 5,
            search,
            noiseless: false,
        };
        estimate::monte_carlo_rmse(&cfg, &scene.with_noise_power(noise).unwrap(), &spec)
            .unwrap()
            .rmse
    };
    let loud = rmse(scene.noise_power());
    let quiet = rmse(scene.noise_power() / 100.0);
    let gain_db = 20.0 * (loud / quiet).log10();
    assert!(
        gain_db >= 9.0,
        "RMSE improved by {gain_db:.2} dB ({loud:.3e} -> {quiet:.3e})"
    );
}

#[test]
fn halving_the_grid_step_keeps_the_noiseless_argmax() {
    let cfg = ArrayConfig::default_scenario();
    let scene = Scene::default_scenario();
    for arch in Architecture::ALL {
        let ws = waveform::transmission(arch, Scheme::Sem, &cfg, &scene, 1).unwrap();
        let layout: Layout = arch.layout(&cfg);
        let obs = simulate::synthesize_on(&layout, &scene, &ws, 1, Components::SignalOnly).unwrap();
        let lik = Likelihood::new(&layout, scene.wavelength(), &ws, &obs).unwrap();
        let region = Region::around(10.0, 0.0, 1.0).unwrap();
        let coarse = estimate::grid_search(&lik, &region, 0.04).unwrap().argmax;
        let fine = estimate::grid_search(&lik, &region, 0.02).unwrap().argmax;
        assert!(
            (coarse.0 - fine.0).abs() <= 0.04 + 1e-9 && (coarse.1 - fine.1).abs() <= 0.04 + 1e-9,
            "{arch}: {coarse:?} vs {fine:?}"
        );
    }
}
