use renorm_core::combinatorics::enumerate_valid;
use renorm_core::renorm::{find_periodic_interval, periodic_interval_with_period};
use renorm_core::tuner::{superstable_parameter, FamilySpec};
use renorm_core::*;

const B_STAR: f64 = -1.618_033_988_749_895;
const B_2: f64 = -1.749_280_944_028_492;
const B_F: f64 = -1.784_972_835_943_783_5;

fn settings() -> Settings {
    Settings::default()
}

fn quad(b: f64) -> MultimodalMap<f64> {
    build_quadratic_family(&[b]).unwrap()
}

#[test]
fn golden_parameter_has_period_two() {
    let s = settings();
    let f = extend(&quad(B_STAR), &s).unwrap();
    let pi = find_periodic_interval(&f, 16, &s).unwrap().unwrap();
    assert_eq!((pi.p(), pi.k()), (2, 2));
    assert!(pi.j().contains_x(0.0));
    // F(J) ends at the critical value 0.618034.
    assert!((pi.orbit()[1].hi() - 0.618_034).abs() < 1e-6);
    assert!(pi.j().is_symmetric(1e-12));
}

#[test]
fn chebyshev_map_is_not_renormalizable() {
    let s = settings();
    let f = extend(&quad(-2.0), &s).unwrap();
    assert!(find_periodic_interval(&f, 16, &s).unwrap().is_none());
    let tower = renorm_tower(&quad(-2.0), 4, &s);
    assert!(tower.levels.is_empty());
    assert!(matches!(tower.stopped, Some(Error::NotRenormalizable { .. })));
}

#[test]
fn superstable_period_four_tower_stops_at_two() {
    let s = settings();
    let r = renormalize(&quad(B_2), &s).unwrap();
    assert_eq!(r.periodic.p(), 2);
    let again = renormalize(&r.renormalized, &s).unwrap();
    assert_eq!(again.periodic.p(), 2);
    let tower = renorm_tower(&quad(B_2), 6, &s);
    assert_eq!(tower.levels.len(), 2);
    assert!(tower.stopped.is_some());
}

#[test]
fn feigenbaum_tower_is_doubling_to_depth_eight() {
    let s = settings();
    let tower = renorm_tower(&quad(B_F), 8, &s);
    assert_eq!(tower.levels.len(), 8, "{:?}", tower.stopped);
    for level in &tower.levels {
        assert_eq!(level.periodic.p(), 2);
        assert_eq!(level.combinatorics, Combinatorics::doubling());
    }
}

fn check_result(r: &RenormResult<f64>, s: &Settings) {
    assert!(validate(&r.renormalized, s).passed());
    assert!((r.renormalized.value(-1.0) + 1.0).abs() < 1e-12);
    let a0 = r.normalizers[0];
    let k = r.periodic.k();
    for i in 0..256 {
        let x = -1.0 + 2.0 * i as f64 / 255.0;
        let (y, fiber) = r.source.iterate(0, a0.apply_inverse(x), k);
        assert_eq!(fiber, 0);
        let want = a0.apply(y);
        let got = r.renormalized.value(x);
        assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "x={x}: {got} vs {want}");
    }
    let f = extend(&r.source, s).unwrap();
    for q in 2..r.periodic.p() {
        assert!(periodic_interval_with_period(&f, q, s).is_none(), "smaller period {q} passes");
    }
}

#[test]
fn renormalized_map_is_the_normalized_return_map() {
    let s = settings();
    for b in [B_STAR, B_2, -1.76, -1.77, B_F, -1.755, -1.7549] {
        check_result(&renormalize(&quad(b), &s).unwrap(), &s);
    }
    for r in &renorm_tower(&quad(B_F), 4, &s).levels {
        check_result(r, &s);
    }
}

#[test]
fn period_three_window_is_not_period_two() {
    let s = settings();
    let b = (-1.0 - (1.0f64 + 4.0 * 1.754_877_666_246_692_7).sqrt()) / 2.0;
    let r = renormalize(&quad(b), &s).unwrap();
    assert_eq!(r.periodic.p(), 3);
    check_result(&r, &s);
}

#[test]
fn tower_levels_are_consistent() {
    let s = settings();
    let tower = renorm_tower(&quad(B_F), 5, &s);
    for d in 0..tower.levels.len() {
        let direct = renormalize(tower.level_map(d).unwrap(), &s).unwrap();
        assert_eq!(direct.combinatorics.canonical(), tower.levels[d].combinatorics.canonical());
    }
}

#[test]
fn renormalization_is_injective_near_feigenbaum_parameter() {
    let s = settings();
    let maps: Vec<_> = (0..8)
        .map(|i| renormalize(&quad(B_F + (i as f64 - 4.0) * 1e-4), &s).unwrap().renormalized)
        .collect();
    for i in 0..maps.len() {
        for j in i + 1..maps.len() {
            let d = (0..256)
                .map(|t| {
                    let x = -1.0 + 2.0 * t as f64 / 255.0;
                    (maps[i].value(x) - maps[j].value(x)).abs()
                })
                .fold(0.0, f64::max);
            assert!(d > 0.0, "R identifies parameters {i} and {j}");
        }
    }
}

#[test]
fn period_two_window_is_contiguous() {
    let s = settings();
    let hits: Vec<bool> = (0..120)
        .map(|i| {
            let b = -1.5 - 0.4 * i as f64 / 119.0;
            let f = extend(&quad(b), &s).unwrap();
            periodic_interval_with_period(&f, 2, &s).is_some()
        })
        .collect();
    let first = hits.iter().position(|&h| h).unwrap();
    let last = hits.iter().rposition(|&h| h).unwrap();
    assert!(hits[first..=last].iter().all(|&h| h));
    assert!(last > first);
}

#[test]
fn type_two_period_two_renormalization() {
    let s = Settings::for_type(2);
    let family = FamilySpec::standard(2);
    let mut tuned = 0;
    for m in enumerate_valid(2, 2).unwrap() {
        let Ok(t) = superstable_parameter::<f64>(&family, &[m.clone()], &s) else { continue };
        let map = build_quadratic_family(&t.b).unwrap();
        let r = renormalize(&map, &s).unwrap();
        assert_eq!(r.periodic.p(), 2);
        assert_eq!(r.periodic.k(), 4);
        let mut fibers: Vec<usize> = r.periodic.visit_times().iter().map(|t| t % 2).collect();
        fibers.sort_unstable();
        assert_eq!(fibers, vec![0, 1]);
        assert_eq!(r.combinatorics, m);
        check_result(&r, &s);
        tuned += 1;
    }
    assert!(tuned > 0);
}
