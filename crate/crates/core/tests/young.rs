use pathwise_core::grid_paths::{generate_fbm, mollify_path, InnerProduct, SampledPath, TimeGrid};
use pathwise_core::sewing::{fit_slope, SewOptions};
use pathwise_core::young::{
    abstract_young, bochner_identify, chain_rule_residual, energy_identity_residual, pair_sew, weighted_pairing_bound,
    young_pairing, young_stability_audit, ChainRuleMap, MultiplierProduct, NemytskiiMap, YoungPairInput,
};
use proptest::prelude::*;

fn opts() -> SewOptions {
    SewOptions::default()
}

fn euclid() -> InnerProduct {
    InnerProduct::euclidean(1)
}

/// Composite trapezoid rule of `f` on `[a, b]` with `m` cells.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|k| f(a + k as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

#[test]
fn constant_integrand_gives_inner_product_with_increment() {
    let g = TimeGrid::unit(512).unwrap();
    let ip = InnerProduct::lumped(3, 0.25).unwrap();
    let c = [0.5, -1.0, 2.0];
    let i = generate_fbm(5, 0.7, g).unwrap().map(3, |_, r, out| {
        out[0] = r[0];
        out[1] = 2.0 * r[0];
        out[2] = r[0] * r[0];
    });
    let i = i.unwrap();
    let u = SampledPath::constant(g, &c).unwrap();
    let input = YoungPairInput::new(u, i.clone(), ip.clone(), (0.99, f64::INFINITY), (0.6, 4.0)).unwrap();
    let s = young_pairing(&input, opts()).unwrap().integral;
    for k in 0..=512 {
        let inc: Vec<f64> = i.row(k).iter().zip(i.first()).map(|(a, b)| a - b).collect();
        assert!((s.row(k)[0] - ip.inner(&c, &inc)).abs() < 1e-12);
    }
}

#[test]
fn smooth_self_pairing_matches_trapezoid_oracle() {
    let w = |t: f64| (3.0 * t).sin() + t * t;
    let dw = |t: f64| 3.0 * (3.0 * t).cos() + 2.0 * t;
    let g = TimeGrid::unit(4096).unwrap();
    let p = SampledPath::scalar_fn(g, w).unwrap();
    let input = YoungPairInput::new(p.clone(), p, euclid(), (0.99, 4.0), (0.99, 4.0)).unwrap();
    let s = young_pairing(&input, opts()).unwrap().integral.last()[0];
    let oracle = trapezoid(|t| w(t) * dw(t), 0.0, 1.0, 1 << 20);
    assert!((s - oracle).abs() < 1e-6, "{s} vs {oracle}");
    assert!((oracle - w(1.0).powi(2) / 2.0).abs() < 1e-9);
}

#[test]
fn fbm_self_pairing_obeys_chain_rule() {
    let g = TimeGrid::unit(1 << 14).unwrap();
    for seed in 0..10 {
        let x = generate_fbm(seed, 0.75, g).unwrap();
        let input = YoungPairInput::new(x.clone(), x.clone(), euclid(), (0.7, 4.0), (0.7, 4.0)).unwrap();
        let s = young_pairing(&input, opts()).unwrap().integral.last()[0];
        let want = 0.5 * (x.last()[0].powi(2) - x.first()[0].powi(2));
        assert!(
            (s - want).abs() <= 1e-3 * want.abs().max(x.max_abs().powi(2)),
            "seed {seed}: {s} vs {want}"
        );
    }
}

#[test]
fn young_stability_constant_is_moderate() {
    let g = TimeGrid::unit(1024).unwrap();
    for seed in 0..5 {
        let x = generate_fbm(seed, 0.75, g).unwrap();
        let u = x.map(1, |t, r, o| o[0] = (r[0]).sin() + t).unwrap();
        let input = YoungPairInput::new(u, x, euclid(), (0.7, 4.0), (0.7, 4.0)).unwrap();
        let s = young_pairing(&input, opts()).unwrap().integral;
        let audit = young_stability_audit(&input, &s).unwrap();
        assert!(audit.ratio.is_finite() && audit.ratio < 10.0, "seed {seed}: {audit:?}");
    }
}

#[test]
fn ineligible_indices_are_rejected() {
    let g = TimeGrid::unit(16).unwrap();
    let p = SampledPath::scalar_fn(g, |t| t).unwrap();
    let input = YoungPairInput::new(p.clone(), p.clone(), euclid(), (0.3, 4.0), (0.4, 4.0)).unwrap();
    assert!(young_pairing(&input, opts()).is_err());
    let other = SampledPath::scalar_fn(TimeGrid::unit(32).unwrap(), |t| t).unwrap();
    assert!(YoungPairInput::new(p, other, euclid(), (0.6, 4.0), (0.6, 4.0)).is_err());
}

#[test]
fn constant_sigma_returns_driver_increment() {
    let g = TimeGrid::unit(256).unwrap();
    let x = generate_fbm(2, 0.8, g).unwrap();
    let u = SampledPath::scalar_fn(g, |t| 3.0 * t).unwrap();
    let r = abstract_young(
        &NemytskiiMap::constant(vec![1.0], 1.0),
        &u,
        &x,
        MultiplierProduct::Scalar,
        4.0,
        0.8,
        opts(),
    )
    .unwrap();
    assert!(r.sewn.sub(&x.pinned()).unwrap().max_abs() < 1e-13);
}

#[test]
fn identity_sigma_matches_quadrature_oracle() {
    let beta = |t: f64| (2.0 * t).sin() + 0.5 * t;
    let dbeta = |t: f64| 2.0 * (2.0 * t).cos() + 0.5;
    let uf = |t: f64| (1.0 + t).ln() + (5.0 * t).cos();
    let g = TimeGrid::unit(4096).unwrap();
    let u = SampledPath::scalar_fn(g, uf).unwrap();
    let b = SampledPath::scalar_fn(g, beta).unwrap();
    let r = abstract_young(
        &NemytskiiMap::identity(),
        &u,
        &b,
        MultiplierProduct::Scalar,
        4.0,
        0.8,
        opts(),
    )
    .unwrap();
    let oracle = trapezoid(|t| uf(t) * dbeta(t), 0.0, 1.0, 1 << 20);
    assert!(
        (r.sewn.last()[0] - oracle).abs() < 1e-6,
        "{} vs {oracle}",
        r.sewn.last()[0]
    );
    // Same integral through the left-point pairing germ.
    let s = pair_sew(&u, &b, &euclid(), 2.0, opts()).unwrap().integral;
    assert!(s.sub(&r.sewn).unwrap().max_abs() < 1e-8);
}

#[test]
fn sine_nemytskii_against_bochner_sum() {
    let d = 16;
    let g = TimeGrid::unit(4096).unwrap();
    let ip = InnerProduct::lumped(d, 1.0 / (d + 1) as f64).unwrap();
    let x = mollify_path(&generate_fbm(7, 0.75, g).unwrap(), 6).unwrap();
    let u = SampledPath::from_fn(g, d, |t, r| {
        for (i, v) in r.iter_mut().enumerate() {
            *v = (i as f64 + 1.0) * t + (3.0 * t + i as f64).sin();
        }
    })
    .unwrap();
    let sigma = NemytskiiMap::pointwise(1.0, 1.0, f64::sin);
    let r = abstract_young(&sigma, &u, &x, MultiplierProduct::Scalar, 4.0, 0.8, opts()).unwrap();
    // Ẋ is constant on every cell, so ∫σ(u)Ẋ is a trapezoid sum per cell.
    let mut acc = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for k in 0..g.n() {
        let dx = x.row(k + 1)[0] - x.row(k)[0];
        for (c, a) in acc.iter_mut().enumerate() {
            *a += 0.5 * (u.row(k)[c].sin() + u.row(k + 1)[c].sin()) * dx;
        }
        let diff: Vec<f64> = acc.iter().zip(r.sewn.row(k + 1)).map(|(a, b)| a - b).collect();
        worst = worst.max(ip.norm(&diff));
    }
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn bochner_identification_examples() {
    let ip = InnerProduct::lumped(2, 0.5).unwrap();
    let g = TimeGrid::unit(4096).unwrap();
    let u = SampledPath::from_fn(g, 2, |t, r| {
        r[0] = (4.0 * t).cos();
        r[1] = 1.0 + t;
    })
    .unwrap();
    let i = SampledPath::from_fn(g, 2, |t, r| {
        r[0] = t * t;
        r[1] = (2.0 * t).sin();
    })
    .unwrap();
    assert!(bochner_identify(&u, &i, &ip, opts()).unwrap().gap < 1e-5);

    let pts: Vec<(f64, f64)> = [256usize, 512, 1024, 2048]
        .iter()
        .map(|&n| {
            let g = TimeGrid::unit(n).unwrap();
            let u = SampledPath::scalar_fn(g, |t| (4.0 * t).cos()).unwrap();
            let i = SampledPath::scalar_fn(g, |t| (3.0 * t).sin() * t).unwrap();
            let gap = bochner_identify(&u, &i, &euclid(), opts()).unwrap().gap;
            (g.dt().ln(), gap.ln())
        })
        .collect();
    let slope = fit_slope(&pts).unwrap();
    assert!((0.9..=2.1).contains(&slope), "{slope}");
}

#[test]
fn energy_residual_vanishes_without_forcing() {
    let g = TimeGrid::unit(128).unwrap();
    let ip = InnerProduct::lumped(2, 0.5).unwrap();
    let x = SampledPath::constant(g, &[1.0, -3.0]).unwrap();
    let zero = SampledPath::zeros(g, 2);
    let pair = |a: &[f64], b: &[f64]| ip.inner(a, b);
    let r = energy_identity_residual(&[1.0, -3.0], &zero, &zero, &x, &ip, &pair, 2.0, opts()).unwrap();
    assert_eq!(r.max_abs(), 0.0);
}

#[test]
fn energy_residual_for_fbm_self_driven() {
    let g = TimeGrid::unit(1 << 14).unwrap();
    let x = generate_fbm(3, 0.75, g).unwrap();
    let zero = SampledPath::zeros(g, 1);
    let pair = |a: &[f64], b: &[f64]| a[0] * b[0];
    let r = energy_identity_residual(&[0.0], &zero, &x, &x, &euclid(), &pair, 1.5, opts()).unwrap();
    assert!(r.last()[0].abs() <= 1e-3 * x.max_abs().powi(2));
}

/// `X_t = e^{-λ₁t} sin(πx)` on the lumped grid, with `Y = Δ_h X`.
fn heat_energy_residual(n: usize) -> f64 {
    let d = 16;
    let dx = 1.0 / (d + 1) as f64;
    let lam = 4.0 / (dx * dx) * (std::f64::consts::PI * dx / 2.0).sin().powi(2);
    let g = TimeGrid::new(0.0, 0.05, n).unwrap();
    let ip = InnerProduct::lumped(d, dx).unwrap();
    let mode: Vec<f64> = (0..d)
        .map(|i| (std::f64::consts::PI * (i + 1) as f64 * dx).sin())
        .collect();
    let x = SampledPath::from_fn(g, d, |t, r| {
        for (v, m) in r.iter_mut().zip(&mode) {
            *v = (-lam * t).exp() * m;
        }
    })
    .unwrap();
    let y = x.scaled(-lam);
    let zero = SampledPath::zeros(g, d);
    let pair = |a: &[f64], b: &[f64]| ip.inner(a, b);
    energy_identity_residual(x.first(), &y, &zero, &x, &ip, &pair, 2.0, opts())
        .unwrap()
        .max_abs()
}

#[test]
fn heat_energy_residual_converges() {
    let pts: Vec<(f64, f64)> = [64usize, 128, 256, 512]
        .iter()
        .map(|&n| ((1.0 / n as f64).ln(), heat_energy_residual(n).ln()))
        .collect();
    let slope = fit_slope(&pts).unwrap();
    assert!((0.9..=2.1).contains(&slope), "{slope}");
}

#[test]
fn identity_chain_rule_is_exact() {
    let g = TimeGrid::unit(512).unwrap();
    let i = generate_fbm(1, 0.8, g).unwrap();
    let b = SampledPath::scalar_fn(g, |t| t.cos()).unwrap();
    let u = SampledPath::scalar_fn(g, |t| 2.0 + t).unwrap();
    let rep = chain_rule_residual(&ChainRuleMap::identity(), 1.0, &b, &u, &i, &euclid(), 1.6, opts()).unwrap();
    assert!(rep.max_abs_residual < 1e-12);
}

#[test]
fn exponential_weight_chain_rule_on_fbm() {
    let g = TimeGrid::unit(1 << 14).unwrap();
    let i = generate_fbm(4, 0.8, g).unwrap();
    let zero = SampledPath::zeros(g, 1);
    let one = SampledPath::constant(g, &[1.0]).unwrap();
    let rep = chain_rule_residual(
        &ChainRuleMap::exp_weight(1.5),
        0.0,
        &zero,
        &one,
        &i,
        &euclid(),
        1.6,
        opts(),
    )
    .unwrap();
    assert!(rep.residual.last()[0].abs() <= 1e-3, "{}", rep.residual.last()[0]);
    // y_t = I_t - I_0 when u = 1 and b = 0.
    assert!(rep.y.sub(&i.pinned()).unwrap().max_abs() < 1e-12);
}

#[test]
fn duhamel_closed_form() {
    let g = TimeGrid::unit(4096).unwrap();
    let y0 = 0.7;
    let b = SampledPath::scalar_fn(g, f64::cos).unwrap();
    let zero = SampledPath::zeros(g, 1);
    let f = ChainRuleMap::exp_weight(1.0);
    let rep = chain_rule_residual(&f, y0, &b, &zero, &zero, &euclid(), 2.0, opts()).unwrap();
    for (k, t) in g.nodes().enumerate() {
        let closed = (-t).exp() * (y0 + t.sin());
        assert!((f.eval(t, rep.y.row(k)[0]) - closed).abs() < 1e-6);
    }
    assert!(rep.max_abs_residual < 1e-6);
}

#[test]
fn energy_identity_is_chain_rule_of_the_square() {
    let g = TimeGrid::unit(256).unwrap();
    let ip = InnerProduct::lumped(2, 0.5).unwrap();
    let i = SampledPath::from_fn(g, 2, |t, r| {
        r[0] = (6.0 * t).sin();
        r[1] = t * t;
    })
    .unwrap();
    let y = SampledPath::from_fn(g, 2, |t, r| {
        r[0] = -t;
        r[1] = (2.0 * t).cos();
    })
    .unwrap();
    let x = SampledPath::from_fn(g, 2, |t, r| {
        r[0] = 1.0 + (6.0 * t).sin() - 0.5 * t * t;
        r[1] = -1.0 + t * t + 0.5 * (2.0 * t).sin();
    })
    .unwrap();
    let pair = |a: &[f64], b: &[f64]| ip.inner(a, b);
    let energy = energy_identity_residual(x.first(), &y, &i, &x, &ip, &pair, 2.0, opts()).unwrap();
    let b = SampledPath::scalar(g, (0..=256).map(|k| 2.0 * ip.inner(y.row(k), x.row(k))).collect()).unwrap();
    let chain = chain_rule_residual(
        &ChainRuleMap::identity(),
        ip.norm_sq(x.first()),
        &b,
        &x.scaled(2.0),
        &i,
        &ip,
        2.0,
        opts(),
    )
    .unwrap();
    for k in 0..=256 {
        let via_chain = ip.norm_sq(x.row(k)) - chain.y.row(k)[0];
        assert!((energy.row(k)[0] - via_chain).abs() < 1e-12);
    }
}

#[test]
fn weighted_pairing_examples() {
    let g = TimeGrid::unit(2048).unwrap();
    let uf = |t: f64| 1.0 + (3.0 * t).sin();
    let i_f = |t: f64| t * t + (2.0 * t).cos();
    let di = |t: f64| 2.0 * t - 2.0 * (2.0 * t).sin();
    let u = SampledPath::scalar_fn(g, uf).unwrap();
    let i = SampledPath::scalar_fn(g, i_f).unwrap();

    let zero = weighted_pairing_bound(&SampledPath::zeros(g, 1), &i, &euclid(), 2.0, 4.0, 0.8).unwrap();
    assert_eq!(zero.value, 0.0);

    let flat = weighted_pairing_bound(&u, &i, &euclid(), 0.0, 4.0, 0.8).unwrap();
    let sewn = pair_sew(&u, &i, &euclid(), 2.0, opts()).unwrap().integral;
    assert!(flat.path.sub(&sewn).unwrap().max_abs() < 1e-6);

    let lam = 2.0;
    let rep = weighted_pairing_bound(&u, &i, &euclid(), lam, 4.0, 0.8).unwrap();
    for k in [512usize, 1024, 2048] {
        let t = g.node(k);
        let oracle = trapezoid(|s| (lam * (t - s)).exp() * di(s) * uf(s), 0.0, t, 1 << 18);
        assert!(
            (rep.path.row(k)[0] - oracle).abs() < 1e-6,
            "t={t}: {} vs {oracle}",
            rep.path.row(k)[0]
        );
    }
}

#[test]
fn weighted_constant_is_stable_under_mollification() {
    let g = TimeGrid::unit(2048).unwrap();
    let x = generate_fbm(6, 0.8, g).unwrap();
    let u = SampledPath::scalar_fn(g, |t| (4.0 * t).cos()).unwrap();
    let constants: Vec<f64> = (4..=9)
        .map(|l| {
            let xl = mollify_path(&x, l).unwrap();
            weighted_pairing_bound(&u, &xl, &euclid(), 1.0, 4.0, 0.8)
                .unwrap()
                .realized_constant
        })
        .collect();
    let (lo, hi) = constants
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
    assert!(lo > 0.0 && hi / lo <= 3.0, "{constants:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pairing_is_bilinear(a in -2.0f64..2.0, b in -2.0f64..2.0, w in 1.0f64..8.0, seed in 0u64..100) {
        let g = TimeGrid::unit(128).unwrap();
        let ip = euclid();
        let i = generate_fbm(seed, 0.8, g).unwrap();
        let j = SampledPath::scalar_fn(g, move |t| (w * t).sin()).unwrap();
        let u = SampledPath::scalar_fn(g, move |t| (w * t).cos() + t).unwrap();
        let v = SampledPath::scalar_fn(g, |t| t * t).unwrap();
        let s = |x: &SampledPath, y: &SampledPath| pair_sew(x, y, &ip, 1.6, opts()).unwrap().integral;
        let left = s(&u.lincomb(a, &v, b).unwrap(), &i);
        let left_want = s(&u, &i).lincomb(a, &s(&v, &i), b).unwrap();
        prop_assert!(left.sub(&left_want).unwrap().max_abs() <= 1e-8 * (1.0 + left_want.max_abs()));
        let right = s(&u, &i.lincomb(a, &j, b).unwrap());
        let right_want = s(&u, &i).lincomb(a, &s(&u, &j), b).unwrap();
        prop_assert!(right.sub(&right_want).unwrap().max_abs() <= 1e-8 * (1.0 + right_want.max_abs()));
    }

    #[test]
    fn multiplier_is_bilinear_and_bounded(h in prop::collection::vec(-3.0f64..3.0, 5), k in prop::collection::vec(-3.0f64..3.0, 5),
                                          e in prop::collection::vec(-3.0f64..3.0, 5), a in -2.0f64..2.0) {
        let ip = InnerProduct::lumped(5, 0.2).unwrap();
        let prod = MultiplierProduct::Pointwise;
        let mut x = vec![0.0; 5];
        let mut y = vec![0.0; 5];
        let mut z = vec![0.0; 5];
        let lin: Vec<f64> = h.iter().zip(&k).map(|(p, q)| a * p + q).collect();
        prod.apply(&lin, &e, &mut x);
        prod.apply(&h, &e, &mut y);
        prod.apply(&k, &e, &mut z);
        for c in 0..5 {
            prop_assert!((x[c] - (a * y[c] + z[c])).abs() < 1e-12);
        }
        prop_assert!(ip.norm(&y) <= prod.constant() * ip.norm(&h) * prod.e_norm(&e) * (1.0 + 1e-12));
    }
}

#[test]
fn nemytskii_spot_checks() {
    let ip = InnerProduct::lumped(8, 1.0 / 9.0).unwrap();
    assert!(NemytskiiMap::pointwise(1.0, 1.0, f64::sin)
        .spot_check(&ip, 300, 3.0, 1)
        .passed());
    assert!(NemytskiiMap::identity().spot_check(&ip, 300, 3.0, 2).passed());
    // sin(2s) is 2-Lipschitz; declaring 1 must be caught.
    assert!(!NemytskiiMap::pointwise(1.0, 1.0, |s| (2.0 * s).sin())
        .spot_check(&ip, 300, 0.05, 3)
        .passed());
}
