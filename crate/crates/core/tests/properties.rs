use proptest::prelude::*;

use hmcf::engine::{InitContour, Model, RunConfig};
use hmcf::eval::{
    apply_noise, dice, modified_hausdorff, BinaryMask, ContourPointSet, NoiseKind, NoiseSpec,
};
use hmcf::field::{
    curvature, dirac_eps, gaussian_convolve, heaviside_eps, make_circle_sdf, reinitialize_sdf,
    Grid2D, LevelSetState, ScalarField,
};
use hmcf::io::{parse_config_str, serialize_config};
use hmcf::velocity::{
    cv_means, cv_velocity, dual_mode_coefficient, edge_stopping_g, lpf_prefit, multiphase_means,
    multiphase_velocities, EdgeParams, Image,
};
use hmcf::wave::{
    evolve_wave, nine_point_laplacian, rk4_weighted_step, BCoeff, WaveParams, WaveState,
};

fn grid(n: usize) -> Grid2D {
    Grid2D::new(n, n).unwrap()
}

fn random_field(n: usize) -> impl Strategy<Value = ScalarField> {
    prop::collection::vec(-5.0..5.0f64, n * n)
        .prop_map(move |v| ScalarField::new(grid(n), v).unwrap())
}

fn random_image(n: usize) -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0..=1.0f64, n * n)
        .prop_map(move |v| Image::new(ScalarField::new(grid(n), v).unwrap()).unwrap())
}

fn circle_params() -> impl Strategy<Value = (f64, f64, f64)> {
    (22.0..26.0f64, 22.0..26.0f64, 14.0..18.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reinit_recovers_distance_and_is_idempotent((cx, cy, r) in circle_params(), scale in 0.2..5.0f64) {
        let g = grid(48);
        // Same zero set as the circle, but far from a distance function.
        let phi = ScalarField::from_fn(g, |x, y| {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            scale * (r - d2.sqrt())
        });
        let once = reinitialize_sdf(&LevelSetState::new(phi)).unwrap();
        let twice = reinitialize_sdf(&once).unwrap();
        for (a, b) in once.phi().values().iter().zip(twice.phi().values()) {
            prop_assert!((a - b).abs() <= 0.05);
        }
        let v = once.phi();
        for y in 2..46 {
            for x in 2..46 {
                let d = (x as f64 - cx).hypot(y as f64 - cy);
                if d < 3.0 {
                    continue; // medial skeleton at the centre
                }
                let gx = (v.get(x + 1, y) - v.get(x - 1, y)) / 2.0;
                let gy = (v.get(x, y + 1) - v.get(x, y - 1)) / 2.0;
                let m = gx.hypot(gy);
                // Central differences of the exact distance also drop below 1 near the centre.
                let exact = |x: usize, y: usize| r - (x as f64 - cx).hypot(y as f64 - cy);
                let ex = (exact(x + 1, y) - exact(x - 1, y)) / 2.0;
                let ey = (exact(x, y + 1) - exact(x, y - 1)) / 2.0;
                let m_exact = ex.hypot(ey);
                prop_assert!((m - m_exact).abs() < 0.01, "|grad| {} vs {} at ({}, {})", m, m_exact, x, y);
                if d >= 6.0 {
                    prop_assert!((0.99..=1.01).contains(&m), "|grad| {} at ({}, {})", m, x, y);
                }
                prop_assert!((v.get(x, y) - (r - d)).abs() < 0.01, "phi {} vs {}", v.get(x, y), r - d);
            }
        }
    }

    #[test]
    fn curvature_is_scale_invariant((cx, cy, r) in circle_params(), c in 0.1..10.0f64) {
        let sdf = make_circle_sdf(grid(48), cx, cy, r).unwrap();
        let k1 = curvature(sdf.phi());
        let k2 = curvature(&sdf.phi().scale(c));
        for (a, b) in k1.values().iter().zip(k2.values()) {
            prop_assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{} vs {}", a, b);
        }
    }

    #[test]
    fn heaviside_complement_is_exact(f in random_field(6), eps in 0.05..4.0f64) {
        let h = heaviside_eps(&f, eps).unwrap();
        let hn = heaviside_eps(&f.scale(-1.0), eps).unwrap();
        for (a, b) in h.values().iter().zip(hn.values()) {
            prop_assert_eq!(a + b, 1.0);
        }
    }

    #[test]
    fn dirac_is_derivative_of_heaviside(f in random_field(5), eps in 0.2..4.0f64) {
        let step = 1e-4;
        let hp = heaviside_eps(&f.map(|v| v + step), eps).unwrap();
        let hm = heaviside_eps(&f.map(|v| v - step), eps).unwrap();
        let d = dirac_eps(&f, eps).unwrap();
        for i in 0..f.values().len() {
            let fd = (hp.values()[i] - hm.values()[i]) / (2.0 * step);
            prop_assert!((fd - d.values()[i]).abs() <= 1e-6);
        }
    }

    #[test]
    fn gaussian_preserves_mean(f in random_field(24), sigma in 0.3..3.0f64) {
        let out = gaussian_convolve(&f, sigma).unwrap();
        prop_assert!((out.mean() - f.mean()).abs() <= 1e-10);
    }

    #[test]
    fn stencil_is_exact_on_cubics(c in prop::collection::vec(-2.0..2.0f64, 10), b in 0.1..10.0f64) {
        let g = grid(12);
        let p = |x: f64, y: f64| {
            c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
                + c[6] * x * x * x + c[7] * x * x * y + c[8] * x * y * y + c[9] * y * y * y
        };
        let lap = |x: f64, y: f64| {
            2.0 * c[3] + 2.0 * c[5] + 6.0 * c[6] * x + 2.0 * c[7] * y + 2.0 * c[8] * x + 6.0 * c[9] * y
        };
        let f = ScalarField::from_fn(g, |x, y| p(x as f64, y as f64));
        let out = nine_point_laplacian(&f, &BCoeff::Scalar(b)).unwrap();
        for y in 1..11 {
            for x in 1..11 {
                let exact = b * lap(x as f64, y as f64);
                let scale = exact.abs().max(f.max_abs() * b * 1e-3).max(1.0);
                prop_assert!((out.get(x, y) - exact).abs() <= 1e-12 * scale * 100.0,
                    "{} vs {}", out.get(x, y), exact);
            }
        }
    }

    #[test]
    fn wave_is_linear(
        phi in random_field(10),
        v in random_field(10),
        a in 0.25..4.0f64,
        c in -3.0..3.0f64,
    ) {
        let params = WaveParams::new(2.0, 0.1);
        let base = evolve_wave(&LevelSetState::new(phi.clone()), &v, &params).unwrap();
        let shifted = evolve_wave(
            &LevelSetState::new(phi.map(|p| a * p + c)),
            &v.scale(a),
            &params,
        )
        .unwrap();
        for (s, o) in shifted.phi.values().iter().zip(base.phi.values()) {
            prop_assert!((s - (a * o + c)).abs() <= 1e-10 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn wave_commutes_with_mirroring(phi in random_field(9), v in random_field(9)) {
        let params = WaveParams::new(3.0, 0.1);
        let direct = evolve_wave(&LevelSetState::new(phi.clone()), &v, &params).unwrap();
        let mirrored = evolve_wave(&LevelSetState::new(phi.flip_x()), &v.flip_x(), &params).unwrap();
        for (a, b) in direct.phi.flip_x().values().iter().zip(mirrored.phi.values()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn cv_means_are_bounded_and_velocity_antisymmetric(
        img in random_image(8),
        phi in random_field(8),
        eps in 0.1..3.0f64,
        lambda in 0.1..30.0f64,
    ) {
        let state = LevelSetState::new(phi);
        let (lo, hi) = (img.intensity().min(), img.intensity().max());
        for c in cv_means(&img, &state, eps).unwrap().into_iter().flatten() {
            prop_assert!(c >= lo && c <= hi);
        }
        let v = cv_velocity(&img, &state, 0.2, 0.7, lambda, eps).unwrap();
        let w = cv_velocity(&img, &state, 0.7, 0.2, lambda, eps).unwrap();
        for (a, b) in v.values().iter().zip(w.values()) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn multiphase_reduces_to_two_phase(
        img in random_image(8),
        phi in random_field(8),
        eps in 0.2..3.0f64,
        lambda in 0.1..10.0f64,
    ) {
        let p1 = LevelSetState::new(phi);
        let p2 = LevelSetState::new(ScalarField::filled(grid(8), 1e6));
        let means = multiphase_means(&img, &p1, &p2, eps).unwrap();
        let c = means.map(|m| m.unwrap_or(0.5));
        let (v1, _) = multiphase_velocities(&img, &p1, &p2, c, lambda, eps).unwrap();
        let two = cv_velocity(&img, &p1, c[0], c[2], lambda, eps).unwrap();
        for (a, b) in v1.values().iter().zip(two.values()) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn lpf_fits_are_ordered(img in random_image(12), sigma in 0.5..2.0f64, half in 1usize..4) {
        let pre = lpf_prefit(&img, sigma, 2 * half + 1).unwrap();
        for (s, l) in pre.f_s.values().iter().zip(pre.f_l.values()) {
            prop_assert!(s <= l);
        }
    }

    #[test]
    fn edge_map_range_and_dual_mode_monotone(
        img in random_image(12),
        b in 1.0..500.0f64,
        n in 0.05..0.95f64,
        alpha in 0.05..1.0f64,
    ) {
        let g = edge_stopping_g(&img, &EdgeParams::default()).unwrap();
        prop_assert!(g.values().iter().all(|v| *v > 0.0 && *v <= 1.0));
        prop_assert_eq!(g.max(), 1.0);
        let gs = ScalarField::new(grid(2), vec![0.1, 0.3, 0.6, 0.9]).unwrap();
        let d = dual_mode_coefficient(b, &gs, n, alpha).unwrap();
        prop_assert!(d.values().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn dice_and_hausdorff_are_symmetric(
        a in prop::collection::vec(any::<bool>(), 36),
        b in prop::collection::vec(any::<bool>(), 36),
        p in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..20),
        q in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..20),
    ) {
        let ma = BinaryMask::new(grid(6), a).unwrap();
        let mb = BinaryMask::new(grid(6), b).unwrap();
        let d = dice(&ma, &mb).unwrap();
        prop_assert_eq!(d, dice(&mb, &ma).unwrap());
        prop_assert!((0.0..=1.0).contains(&d));
        let (sp, sq) = (ContourPointSet::new(p.clone()), ContourPointSet::new(q));
        prop_assert_eq!(
            modified_hausdorff(&sp, &sq).unwrap(),
            modified_hausdorff(&sq, &sp).unwrap()
        );
        prop_assert_eq!(modified_hausdorff(&sp, &ContourPointSet::new(p)).unwrap(), 0.0);
    }

    #[test]
    fn noise_is_clamped_and_pure(img in random_image(10), kind in 0usize..4, s in 0.0..1.0f64, seed in any::<u64>()) {
        let spec = NoiseSpec { kind: NoiseKind::ALL[kind], strength: s, seed };
        let a = apply_noise(&img, &spec).unwrap();
        let b = apply_noise(&img, &spec).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.intensity().values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn config_round_trips(
        model in 0usize..6,
        b in 0.01..1e4f64,
        tau in 0.001..1.0f64,
        eta in 0.5..=1.0f64,
        lambda in 0.01..100.0f64,
        mu in 0.0..1e3f64,
        eps in 0.01..5.0f64,
        iters in 1usize..5000,
        circle in (0.0..200.0f64, 0.0..200.0f64, 0.1..100.0f64),
        seed in any::<u64>(),
        substeps in prop::option::of(1usize..50),
    ) {
        let mut cfg = RunConfig::new(Model::ALL[model]);
        cfg.wave.b = b.into();
        cfg.wave.tau = tau;
        cfg.wave.eta = eta;
        cfg.wave.substeps = substeps;
        cfg.modelp.lambda = lambda;
        cfg.modelp.mu = mu;
        cfg.reg.epsilon = eps;
        cfg.max_iters = iters;
        cfg.init = Some(InitContour::Circle { cx: circle.0, cy: circle.1, r: circle.2 });
        cfg.seed = seed;
        let back = parse_config_str(&serialize_config(&cfg)).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn dice_matches_bit_count_oracle_exhaustively() {
    let g = grid(4);
    let mask = |bits: u32| BinaryMask::from_fn(g, |x, y| bits >> (y * 4 + x) & 1 == 1);
    let partners: Vec<u32> = vec![0, 0xffff, 0x00ff, 0x0f0f, 0x8421, 0x1234, 0xbeef, 0x7fff];
    let pm: Vec<BinaryMask> = partners.iter().map(|p| mask(*p)).collect();
    for a in 0u32..1 << 16 {
        let ma = mask(a);
        for (p, mp) in partners.iter().zip(&pm) {
            let inter = (a & p).count_ones() as f64;
            let total = (a.count_ones() + p.count_ones()) as f64;
            let oracle = if total == 0.0 {
                1.0
            } else {
                2.0 * inter / total
            };
            assert_eq!(dice(&ma, mp).unwrap(), oracle, "{a:04x} vs {p:04x}");
        }
    }
}

#[test]
fn standing_wave_energy_is_bounded() {
    let n = 65;
    let g = grid(n);
    let b: f64 = 1.0;
    let k = 2.0 * std::f64::consts::PI / (n - 1) as f64;
    let phi = ScalarField::from_fn(g, |x, _| (k * x as f64).cos());
    let mut state = WaveState::new(ScalarField::zeros(g), phi).unwrap();
    let s = 0.5 / b.sqrt();
    let energy = |st: &WaveState| {
        let mut e = 0.0;
        for y in 0..n {
            for x in 1..n - 1 {
                let gx = (st.phi.get(x + 1, y) - st.phi.get(x - 1, y)) / 2.0;
                e += st.z.get(x, y).powi(2) + b * gx * gx;
            }
        }
        e
    };
    let e0 = energy(&state);
    for _ in 0..200 {
        state = rk4_weighted_step(&state, &BCoeff::Scalar(b), 0.7, s);
        let e = energy(&state);
        assert!((e - e0).abs() <= 0.1 * e0, "energy drift {e} vs {e0}");
    }
}
