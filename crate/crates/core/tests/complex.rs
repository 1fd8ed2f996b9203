use num_complex::Complex64;
use renorm_core::complex::*;
use renorm_core::*;

const B_STAR: f64 = -1.618_033_988_749_895;
const B_F: f64 = -1.784_972_835_943_783_5;

fn grid(p: &ComplexPolynomial, center: (f64, f64), width: f64, height: f64, cols: usize, rows: usize, max_iter: u32) -> RasterGrid {
    RasterGrid {
        center,
        width,
        height,
        cols,
        rows,
        escape_radius: p.escape_radius_bound(),
        max_iter,
    }
}

#[test]
fn chebyshev_interval_does_not_escape() {
    let p = ComplexPolynomial::quadratic_family(&[-2.0]).unwrap();
    let r = julia_raster(&p, &grid(&p, (0.0, 0.0), 2.0, 1e-9, 101, 1, 500)).unwrap();
    assert!(r.data.iter().all(|t| t.is_none()));
    // Just off the interval the orbit escapes.
    assert!(escape_time(&p, Complex64::new(0.0, 0.1), p.escape_radius_bound(), 500).is_some());
}

#[test]
fn golden_parameter_raster_points() {
    let p = ComplexPolynomial::quadratic_family(&[B_STAR]).unwrap();
    let radius = p.escape_radius_bound();
    assert_eq!(escape_time(&p, Complex64::new(0.0, 0.0), radius, 1000), None);
    let t = escape_time(&p, Complex64::new(2.0, 0.0), radius, 1000).unwrap();
    assert!((1..=5).contains(&t));
}

#[test]
fn empty_and_invalid_windows() {
    let p = ComplexPolynomial::quadratic_family(&[-1.5]).unwrap();
    let r = julia_raster(&p, &grid(&p, (0.0, 0.0), 0.0, 1.0, 10, 10, 10)).unwrap();
    assert_eq!((r.cols, r.rows, r.data.len()), (0, 0, 0));
    let mut g = grid(&p, (0.0, 0.0), 1.0, 1.0, 4, 4, 10);
    g.escape_radius = 1.0;
    assert!(matches!(julia_raster(&p, &g), Err(Error::InvalidGrid(_))));
    g.escape_radius = p.escape_radius_bound();
    g.width = f64::NAN;
    assert!(matches!(julia_raster(&p, &g), Err(Error::InvalidGrid(_))));
}

#[test]
fn escape_times_survive_more_iterations() {
    for b in [-1.3, B_STAR, B_F, -2.0] {
        let p = ComplexPolynomial::quadratic_family(&[b]).unwrap();
        let short = julia_raster(&p, &grid(&p, (0.0, 0.0), 3.0, 2.0, 48, 32, 30)).unwrap();
        let long = julia_raster(&p, &grid(&p, (0.0, 0.0), 3.0, 2.0, 48, 32, 60)).unwrap();
        for (a, b) in short.data.iter().zip(&long.data) {
            if a.is_some() {
                assert_eq!(a, b);
            }
        }
    }
}

#[test]
fn raster_rows_run_top_down() {
    let p = ComplexPolynomial::quadratic_family(&[-1.5]).unwrap();
    let g = grid(&p, (1.0, 2.0), 4.0, 2.0, 4, 2, 10);
    let top = g.pixel(0, 0);
    assert!((top.re + 0.5).abs() < 1e-15 && (top.im - 2.5).abs() < 1e-15);
    assert!(g.pixel(0, 1).im < top.im);
}

#[test]
fn external_maps_are_angle_doubling() {
    for i in 0..10 {
        let b = -1.0 - (i as f64 + 0.5) / 10.0;
        let p = ComplexPolynomial::quadratic_family(&[b]).unwrap();
        let s = external_map_samples(&p, 256).unwrap();
        assert_eq!(s.winding, 2, "b={b}");
        assert!(s.max_deviation < 1e-6, "b={b}: {}", s.max_deviation);
        assert_eq!(s.pairs.len(), 256);
        // The lift only moves forward.
        for w in s.pairs.windows(2) {
            let step = (w[1].1 - w[0].1).rem_euclid(1.0);
            assert!(step > 0.0 && step < 0.5);
        }
    }
}

#[test]
fn type_two_external_map_has_degree_four() {
    let p = ComplexPolynomial::quadratic_family(&[-1.7, -1.4]).unwrap();
    assert_eq!(p.degree(), 4);
    let s = external_map_samples(&p, 256).unwrap();
    assert_eq!(s.winding, 4);
    assert!(s.max_deviation < 1e-6);
}

#[test]
fn escaping_critical_orbit_is_reported() {
    // b = −2.5 lies outside the admissible box: P(0) = 1.5 escapes.
    let p = ComplexPolynomial::new(vec![vec![1.5, -2.5]]).unwrap();
    assert_eq!(escaping_critical_point(&p), Some(0));
    assert!(matches!(
        external_map_samples(&p, 64),
        Err(Error::DisconnectedJulia { critical: 0 })
    ));
    let q = ComplexPolynomial::quadratic_family(&[-1.5]).unwrap();
    assert!(matches!(external_map_samples(&q, 4), Err(Error::InvalidArgument(_))));
}

#[test]
fn polynomials_have_unbounded_modulus() {
    let map = build_quadratic_family(&[B_F]).unwrap();
    let search = DomainSearch::default();
    assert_eq!(modulus_lower_bound(&map, &search).unwrap(), AnnulusBound::Unbounded);
    assert_eq!(ComplexPolynomial::from_map(&map).unwrap().modulus(), AnnulusBound::Unbounded);
    assert_eq!(AnnulusBound::Unbounded.value(), f64::INFINITY);
}

#[test]
fn huge_ellipses_around_a_polynomial() {
    let map = build_quadratic_family(&[-1.9]).unwrap();
    let search = DomainSearch {
        semi_axis_min: 4.0,
        semi_axis_max: 16.0,
        steps: 3,
        boundary_points: 512,
    };
    let d = polylike_domains(&map, &search).unwrap();
    assert_eq!(d.candidates_valid, d.candidates_tried);
    assert_eq!((d.degree, d.critical_points), (2, 1));
}

#[test]
fn level_one_domains_at_accumulation_parameter() {
    let s = Settings::default();
    let tower = renorm_tower(&build_quadratic_family(&[B_F]).unwrap(), 1, &s);
    let d = level_domains(&tower, 1, &DomainSearch::default()).unwrap();
    assert_eq!(d.degree, 2);
    assert_eq!(d.critical_points, 1);
    assert!(d.bound > 0.0);
    let (sa, sb) = d.v_axes;
    assert!(d.u_boundary.iter().all(|&(x, y)| (x / sa).powi(2) + (y / sb).powi(2) < 1.0));
    match level_modulus_bound(&tower, 1, &DomainSearch::default()).unwrap() {
        AnnulusBound::Finite { value, degenerate, .. } => {
            assert!(value > 0.0 && !degenerate);
            assert!((value - d.bound).abs() < 1e-15);
        }
        AnnulusBound::Unbounded => panic!("tower level is not a polynomial"),
    }
    assert!(ComplexPolynomial::from_map(tower.level_map(1).unwrap()).is_err());
}

#[test]
fn non_renormalizable_level_has_no_domains() {
    let s = Settings::default();
    let tower = renorm_tower(&build_quadratic_family(&[-2.0]).unwrap(), 1, &s);
    assert!(matches!(level_domains(&tower, 1, &DomainSearch::default()), Err(Error::DomainsNotFound(_))));
    assert!(matches!(
        level_modulus_bound(&tower, 1, &DomainSearch::default()),
        Err(Error::DomainsNotFound(_))
    ));
}

#[test]
fn enlarging_the_search_never_lowers_the_bound() {
    let s = Settings::default();
    let tower = renorm_tower(&build_quadratic_family(&[B_F]).unwrap(), 2, &s);
    let map = tower.level_map(2).unwrap();
    let base = DomainSearch {
        steps: 6,
        ..DomainSearch::default()
    };
    let ratio = (base.semi_axis_max / base.semi_axis_min).powf(1.0 / 5.0);
    let finer = DomainSearch {
        steps: 11,
        ..base.clone()
    };
    let wider = DomainSearch {
        semi_axis_max: base.semi_axis_max * ratio * ratio,
        steps: 8,
        ..base.clone()
    };
    let b0 = modulus_lower_bound(map, &base).unwrap().value();
    let b1 = modulus_lower_bound(map, &finer).unwrap().value();
    let b2 = modulus_lower_bound(map, &wider).unwrap().value();
    assert!(b1 >= b0 - 1e-12, "{b1} < {b0}");
    assert!(b2 >= b0 - 1e-12, "{b2} < {b0}");
}

#[test]
fn annulus_bounds() {
    let (v, degenerate) = round_annulus_bound(1.0, std::f64::consts::E);
    assert!((v - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15 && !degenerate);
    assert_eq!(round_annulus_bound(2.0, 1.0), (0.0, true));
    assert_eq!(round_annulus_bound(1.0, 1.0), (0.0, true));
}

#[test]
fn invalid_polynomials() {
    assert!(ComplexPolynomial::new(vec![]).is_err());
    assert!(ComplexPolynomial::new(vec![vec![1.0, 0.0]]).is_err());
    assert!(ComplexPolynomial::new(vec![vec![f64::NAN, 1.0]]).is_err());
    let p = ComplexPolynomial::quadratic_family(&[-1.5, -1.5]).unwrap();
    // Leading coefficient of b₁(b₀z²)² is b₁b₀².
    assert!((p.leading() + 1.5 * 2.25).abs() < 1e-15);
}
