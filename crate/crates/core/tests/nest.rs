use proptest::prelude::*;
use renorm_core::nest::*;
use renorm_core::tuner::saddle_node_parameter;
use renorm_core::*;

const B_STAR: f64 = -1.618_033_988_749_895;
const B_F: f64 = -1.784_972_835_943_783_5;

fn settings() -> Settings {
    Settings::default()
}

fn ext(b: f64) -> ExtendedMap<f64> {
    extend(&build_quadratic_family(&[b]).unwrap(), &settings()).unwrap()
}

/// Superstable period-3 parameter: P_b is conjugate to z² + c with
/// c = −b(b + 1) and c the real root of c³ + 2c² + c + 1.
fn superstable_period_three() -> f64 {
    let c = -1.754_877_666_246_692_7;
    (-1.0 - (1.0f64 - 4.0 * c).sqrt()) / 2.0
}

#[test]
fn golden_parameter_nest_is_superstable() {
    let s = settings();
    let f = ext(B_STAR);
    let nest = principal_nest(&f, 10, &s).unwrap();
    let alpha = (1.0 - (1.0 + 4.0 * B_STAR * (B_STAR + 1.0)).sqrt()) / (2.0 * B_STAR);
    assert!((nest.levels[0].hi() - alpha.abs()).abs() < 1e-12);
    assert_eq!(nest.return_times[0], 2);
    assert_eq!(nest.status, NestStatus::Superstable);
    let cd = cascade_decomposition(&f, &nest, &s).unwrap();
    assert_eq!(cd.height, 0);
    assert!(cd.cascades.is_empty() && cd.non_central_moments.is_empty());
}

#[test]
fn feigenbaum_nest_has_doubling_returns() {
    let s = settings();
    let f = ext(B_F);
    let nest = principal_nest(&f, 8, &s).unwrap();
    assert!(nest.depth() >= 8, "{:?}", nest.status);
    for (k, &r) in nest.return_times.iter().enumerate() {
        assert!(r.is_power_of_two(), "level {k}: return time {r}");
    }
    for w in nest.levels.windows(2) {
        assert!(w[0].contains_interval(&w[1], 0.0) && w[1].length() < w[0].length());
        assert!(w[1].is_symmetric(1e-12));
    }
    assert!(nest.scaling_factors.iter().all(|&l| l > 1.0));
}

#[test]
fn chebyshev_nest_has_no_entry() {
    let s = settings();
    let f = ext(-2.0);
    match principal_nest(&f, 4, &s) {
        Ok(nest) => {
            assert_eq!(nest.depth(), 0);
            assert_eq!(nest.status, NestStatus::EntryNotFound);
        }
        Err(e) => assert!(matches!(e, Error::EntryNotFound { .. }), "{e:?}"),
    }
}

#[test]
fn feigenbaum_returns_are_all_non_central() {
    let s = settings();
    let f = ext(B_F);
    let nest = principal_nest(&f, 8, &s).unwrap();
    let cd = cascade_decomposition(&f, &nest, &s).unwrap();
    assert_eq!(cd.height, nest.depth());
    assert!(cd.cascades.iter().all(|c| c.len() <= 2), "{:?}", cd.cascades);
    for &m in &cd.non_central_moments {
        assert_eq!(nest.is_central(m - 1), Some(false));
    }
}

#[test]
fn saddle_node_cascade_is_long() {
    let s = settings();
    let sn = saddle_node_parameter::<f64>(3, &s).unwrap();
    let b = sn.b + 1e-6;
    let f = ext(b);
    let nest = principal_nest(&f, 300, &s).unwrap();
    let cd = cascade_decomposition(&f, &nest, &s).unwrap();
    let longest = cd.cascades.iter().max_by_key(|c| c.len()).unwrap();
    assert!(longest.len() >= 20, "{longest:?}");
    assert_eq!(longest.kind, CascadeKind::SaddleNode);
    // The cascades partition the levels, sharing boundary levels.
    for w in cd.cascades.windows(2) {
        assert_eq!(w[0].end, w[1].start);
    }
    assert_eq!(cd.cascades.first().unwrap().start, 0);
    assert_eq!(cd.cascades.last().unwrap().end, nest.depth());
    let levels = &nest.levels[longest.start..=longest.end];
    let profile = yoccoz_profile(levels, 20.0).unwrap();
    assert!(profile.ratio_sum <= 1.0);
    let total: f64 = profile.rows.iter().map(|r| r.ratio).sum();
    assert!((total - profile.ratio_sum).abs() < 1e-12);
}

#[test]
fn short_profile_arithmetic() {
    let levels: Vec<FiberInterval<f64>> = [1.0, 0.6, 0.4, 0.3]
        .iter()
        .map(|&w| FiberInterval::symmetric(w, 0).unwrap())
        .collect();
    let p = yoccoz_profile(&levels, 20.0).unwrap();
    assert_eq!(p.rows.len(), 3);
    let weights: Vec<f64> = p.rows.iter().map(|r| r.normalized / r.ratio).collect();
    assert_eq!(weights, vec![1.0, 4.0, 1.0]);
    assert!((p.rows[0].ratio - 0.4).abs() < 1e-15);
    assert!(matches!(
        yoccoz_profile(&levels[..3], 20.0),
        Err(Error::InsufficientLevels { have: 3, need: 4 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn yoccoz_ratios_tile_the_top_level(mut widths in prop::collection::vec(1e-6..1.0f64, 4..40)) {
        widths.sort_by(|a, b| b.total_cmp(a));
        widths.dedup();
        prop_assume!(widths.len() >= 4);
        let levels: Vec<_> = widths.iter().map(|&w| FiberInterval::symmetric(w, 0).unwrap()).collect();
        let p = yoccoz_profile(&levels, 20.0).unwrap();
        prop_assert!(p.ratio_sum <= 1.0);
        let sum: f64 = p.rows.iter().map(|r| r.ratio).sum();
        prop_assert!(sum <= 1.0 + 1e-12);
        prop_assert!(p.rows.iter().all(|r| r.ratio > 0.0));
    }
}

#[test]
fn successor_of_a_periodic_level_does_not_exist() {
    // At the accumulation parameter every principal level is a restrictive
    // interval: its only kid is itself.
    let s = settings();
    let f = ext(B_F);
    let nest = principal_nest(&f, 4, &s).unwrap();
    assert!(matches!(successor(&f, &nest.levels[1], &s), Err(Error::NoSuccessor { .. })));
    assert_eq!(nest.restarts, vec![1, 2, 3, 4]);
}

#[test]
fn successor_is_a_strictly_smaller_pullback() {
    // The smallest successor is as deep as the fold at the critical point
    // can resolve, so its endpoints carry only a few digits: work in
    // double-double and allow for the fold's rounding.
    let s = settings();
    for b in [-1.9, -1.95, -1.99] {
        let f = extend(&build_quadratic_family(&[DoubleDouble::from_f64(b)]).unwrap(), &s).unwrap();
        let t = f.i0();
        let g = successor(&f, &t, &s).unwrap();
        assert!(g.interval.length() < t.length());
        assert!(t.contains_interval(&g.interval, DoubleDouble::from_f64(0.0)));
        assert!(g.interval.contains_critical());
        let tol = 1e-4 * t.length().to_f64();
        for end in [g.interval.lo(), g.interval.hi()] {
            let (y, fiber) = f.base().iterate(0, end, g.time);
            assert_eq!(fiber, 0);
            let miss = (y.abs() - t.hi()).abs().to_f64();
            assert!(miss <= tol, "b={b}: miss {miss}");
        }
    }
}

#[test]
fn successor_at_superstable_period_three() {
    let s = settings();
    let f = ext(superstable_period_three());
    let t = f.i0();
    let g = successor(&f, &t, &s).unwrap();
    assert_eq!(g.time, 3);
    // F^3 sends the successor onto T boundary to boundary, and the critical
    // orbit returns to 0 inside it.
    for end in [g.interval.lo(), g.interval.hi()] {
        let (y, _) = f.base().iterate(0, end, 3);
        assert!((y.abs() - t.hi()).abs() < 1e-9);
    }
    let (c3, _) = f.base().iterate(0, 0.0, 3);
    assert!(c3.abs() < 1e-12 && g.interval.contains_x(c3));
}

#[test]
fn enhanced_nest_at_doubling_parameters() {
    let s = settings();
    for b in [B_F, -1.749_280_944_028_492, -1.778_616_621_155_4] {
        let f = ext(b);
        let report = enhanced_nest(&f, 2, 8, &s).unwrap();
        assert_eq!(report.r[0], 2);
        assert_eq!(report.chi, Some(0));
        let doubling = report.check_transfer_doubling();
        let ret = report.check_return_bound();
        assert!(doubling.holds() && ret.holds());
        assert_eq!((doubling.checked, ret.checked), (0, 0));
        assert_eq!(report.check_period_bound(), None);
        // E_χ ⊆ I_{m(κ)−1}: no non-central return precedes the period-2
        // restrictive interval, so the bound is the convention I_{−1} = [−1, 1].
        let nest = principal_nest(&f, 1, &s).unwrap();
        let kappa = nest.return_times.iter().take_while(|&&r| r < 2).count();
        assert_eq!(kappa, 0);
        let e = report.e_levels[0];
        assert!(e.lo() >= -1.0 && e.hi() <= 1.0);
        assert_eq!(e, f.i0());
    }
}

#[test]
fn enhanced_nest_rejects_bad_period() {
    let s = Settings::for_type(2);
    let f = extend(&build_quadratic_family(&[-1.8, -1.8]).unwrap(), &s).unwrap();
    assert!(matches!(enhanced_nest(&f, 3, 4, &s), Err(Error::InvalidArgument(_))));
}

#[test]
fn enhanced_inequalities_are_integer_checks() {
    let report = EnhancedNestReport::<f64> {
        e_levels: Vec::new(),
        l_levels: Vec::new(),
        r: vec![2, 3, 5, 9, 20, 40, 90, 200],
        m: vec![2, 4, 9, 17, 40, 80, 200],
        np: 200,
        chi: Some(7),
        stopped: None,
    };
    let d = report.check_transfer_doubling();
    assert_eq!(d.checked, 6);
    assert_eq!(d.violations, vec![2]);
    let r = report.check_return_bound();
    assert!(r.holds(), "{r:?}");
    // Σ_{j ≤ 2} m_j = 15 ≤ 200.
    assert_eq!(report.check_period_bound(), Some(true));
}

#[test]
fn limit_scaling_estimate_is_monotone_and_stabilizes() {
    let s = settings();
    let f = ext(B_F);
    let deep = principal_nest(&f, 10, &s).unwrap();
    let mut prev = 0.0;
    let mut values = Vec::new();
    for depth in 1..=deep.depth() {
        let nest = principal_nest(&f, depth, &s).unwrap();
        let est = limit_scaling_estimate(&nest).unwrap();
        assert!(est >= prev);
        prev = est;
        values.push(est);
    }
    let single = principal_nest(&f, 1, &s).unwrap();
    assert_eq!(limit_scaling_estimate(&single), Some(single.scaling_factors[0]));
    let tail: Vec<f64> = deep.scaling_factors[deep.scaling_factors.len() - 3..].to_vec();
    assert!((tail[2] - tail[1]).abs() < 1e-3, "{tail:?}");
}

#[test]
fn nest_agrees_at_double_double_precision() {
    let s = settings();
    let f = ext(B_F);
    let g = extend(&build_quadratic_family(&[DoubleDouble::from_f64(B_F)]).unwrap(), &s).unwrap();
    let a = principal_nest(&f, 6, &s).unwrap();
    let b = principal_nest(&g, 6, &s).unwrap();
    assert_eq!(a.return_times, b.return_times);
    assert_eq!(a.restarts, b.restarts);
    for (x, y) in a.levels.iter().zip(&b.levels) {
        let rel = (x.hi() - y.hi().to_f64()).abs() / x.hi();
        assert!(rel < 1e-9, "{} vs {}", x.hi(), y.hi().to_f64());
    }
}
