use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use starhairs::cli_io::{parse_config, serialize, MapSpec, RunConfig, Style, ViewportSpec};
use starhairs::escape::{classify_point, EscapeParams, Status};
use starhairs::logspace::{LogTransform, TractId};
use starhairs::rays::{geometric_grid, min_parameter, speed_compare, trace_point, RayConfig};
use starhairs::symbolic::{itinerary_of_address, HeadStartProfile, Sequence, Side};
use starhairs::Complex64;
use std::sync::OnceLock;

fn lt(name: &str) -> LogTransform {
    LogTransform::new(MapSpec::Preset { name: name.into(), params: vec![] }.build().unwrap()).unwrap()
}

fn broken() -> &'static LogTransform {
    static L: OnceLock<LogTransform> = OnceLock::new();
    L.get_or_init(|| lt("broken"))
}

fn landing() -> &'static LogTransform {
    static L: OnceLock<LogTransform> = OnceLock::new();
    L.get_or_init(|| lt("landing"))
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Infinity), Just(Side::Zero)]
}

fn tract() -> impl Strategy<Value = TractId> {
    (side(), 0usize..2, -2i64..3).prop_map(|(s, b, k)| TractId::new(s, b, k))
}

fn seq() -> impl Strategy<Value = (Vec<TractId>, Vec<TractId>)> {
    (prop::collection::vec(tract(), 0..4), prop::collection::vec(tract(), 1..5))
}

fn raw_get<T: Clone>(pre: &[T], per: &[T], n: usize) -> T {
    if n < pre.len() {
        pre[n].clone()
    } else {
        per[(n - pre.len()) % per.len()].clone()
    }
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    let map = prop_oneof![
        (prop::sample::select(vec![("arnold", 2), ("disjoint", 1), ("broken", 0), ("landing", 0), ("quadratic", 0)]),
         prop::collection::vec(0.05f64..0.95, 0..3))
            .prop_map(|((n, arity), mut p)| {
                p.truncate(arity);
                MapSpec::Preset { name: n.into(), params: p }
            }),
        (-3i64..4, prop::collection::vec(any::<[i8; 2]>(), 2..5), prop::collection::vec(any::<[i8; 2]>(), 1..4))
            .prop_map(|(n, p, q)| {
                let lift = |v: Vec<[i8; 2]>| -> Vec<[f64; 2]> {
                    let mut v: Vec<[f64; 2]> = v.into_iter().map(|[a, b]| [a as f64 / 8.0, b as f64 / 8.0]).collect();
                    *v.last_mut().unwrap() = [1.0, 0.5];
                    v
                };
                MapSpec::Explicit { n, p: lift(p), q: lift(q) }
            }),
    ];
    (
        map,
        prop::option::of(1u32..1000),
        prop::option::of(1usize..64),
        prop::option::of(prop_oneof![Just(Style::Itinerary), Just(Style::Phase)]),
        prop::option::of((-5.0f64..5.0, 0.5f64..20.0, 1usize..600)),
        prop::option::of(1usize..9),
        prop::option::of(any::<u64>()),
        prop::option::of("\\[\\] \\(\\[\\(inf,0,[01]\\)\\]\\)"),
    )
        .prop_map(|(map, max_iter, prefix_len, style, vp, period, rng_seed, address)| {
            let mut c = RunConfig::new(map);
            c.max_iter = max_iter;
            c.prefix_len = prefix_len;
            c.style = style;
            c.viewport = vp.map(|(x, h, px)| ViewportSpec { center: [x, -x], half_width: h, half_height: h, width: px, height: px });
            c.period = period;
            c.rng_seed = rng_seed;
            c.address = address;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn config_round_trip(cfg in run_config()) {
        let text = serialize(&cfg);
        prop_assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn canonical_form_preserves_symbols_and_is_stable((pre, per) in seq()) {
        let s = Sequence::new(pre.clone(), per.clone()).unwrap();
        for n in 0..3 * (pre.len() + per.len()) {
            prop_assert_eq!(s.get(n), &raw_get(&pre, &per, n));
        }
        prop_assert!(s.preperiod().len() <= pre.len() && s.period().len() <= per.len());
        let again = Sequence::new(s.preperiod().to_vec(), s.period().to_vec()).unwrap();
        prop_assert_eq!(&again, &s);
    }

    #[test]
    fn shift_drops_symbols((pre, per) in seq(), k in 0usize..10) {
        let s = Sequence::new(pre, per).unwrap();
        let t = s.shift(k);
        for n in 0..20 {
            prop_assert_eq!(t.get(n), s.get(n + k));
        }
        prop_assert_eq!(itinerary_of_address(&t), itinerary_of_address(&s).shift(k));
    }

    #[test]
    fn classification_is_deterministic(re in -6.0f64..6.0, im in -6.0f64..6.0) {
        let l = landing();
        let p = EscapeParams::with_radius(l.r_norm());
        let a = classify_point(l.map(), Complex64::new(re, im), &p);
        let b = classify_point(l.map(), Complex64::new(re, im), &p);
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.itinerary_prefix, b.itinerary_prefix);
        prop_assert_eq!(a.last_log_modulus.to_bits(), b.last_log_modulus.to_bits());
    }

    #[test]
    fn escape_is_monotone_in_max_iter(re in -6.0f64..6.0, im in -6.0f64..6.0, m in 1u32..64, extra in 0u32..64) {
        let l = broken();
        let z = Complex64::new(re, im);
        let lo = EscapeParams { max_iter: m, ..EscapeParams::with_radius(l.r_norm()) };
        let hi = EscapeParams { max_iter: m + extra, ..lo };
        let a = classify_point(l.map(), z, &lo);
        let b = classify_point(l.map(), z, &hi);
        if a.status == Status::Escaped {
            prop_assert_eq!(b.status, Status::Escaped);
            prop_assert_eq!(a.first_escape_iter, b.first_escape_iter);
            prop_assert_eq!(a.itinerary_prefix, b.itinerary_prefix);
        }
    }

    #[test]
    fn ray_points_do_not_depend_on_the_seed(
        which in 0usize..3,
        frac in 0.0f64..1.0,
        offs in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 10),
    ) {
        let (l, addr) = example_ray(which);
        let cfg = RayConfig::default();
        let t0 = min_parameter(l, &addr, &cfg).unwrap();
        let t = t0 * (60.0 / t0).powf(frac);
        let base = trace_point(l, &addr, t, &cfg).unwrap();
        prop_assert!(base.converged);
        for (x, y) in offs {
            let c = RayConfig { seed_offset: Complex64::new(x, y), ..cfg.clone() };
            if let Ok(s) = trace_point(l, &addr, t, &c) {
                if s.converged {
                    prop_assert!((s.w - base.w).norm() <= 10.0 * cfg.tol, "t = {t}, offset {x},{y}: {} vs {}", s.w, base.w);
                }
            }
        }
    }

    #[test]
    fn ray_points_escape_along_their_itinerary(which in 0usize..3, frac in 0.0f64..1.0) {
        let (l, addr) = example_ray(which);
        let cfg = RayConfig::default();
        let t0 = min_parameter(l, &addr, &cfg).unwrap();
        let t = t0 * (6.0 / t0).max(1.0).powf(frac);
        let s = trace_point(l, &addr, t, &cfg).unwrap();
        let p = EscapeParams::with_radius(l.r_norm());
        let c = classify_point(l.map(), s.z, &p);
        prop_assert_ne!(c.status, Status::Bounded);
        let e = itinerary_of_address(&addr);
        for (i, sym) in c.itinerary_prefix.symbols().into_iter().enumerate() {
            prop_assert_eq!(sym, *e.get(i), "t = {}, prefix {}", t, c.itinerary_prefix);
        }
    }

    #[test]
    fn speed_comparison_never_flips(seed in any::<u64>(), which in 0usize..2) {
        let l = if which == 0 { broken() } else { landing() };
        let t = TractId::new(Side::Infinity, 0, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = l.sample_tract(t, 2, &mut rng, true);
        let profile = HeadStartProfile::new(1.25, 1.0).unwrap();
        prop_assert!(speed_compare(l, pts[0].0, pts[1].0, &profile, 4).is_ok());
    }
}

fn example_ray(which: usize) -> (&'static LogTransform, starhairs::symbolic::ExternalAddress) {
    let i = TractId::new(Side::Infinity, 0, 0);
    let o = TractId::new(Side::Zero, 0, 0);
    match which {
        0 => (broken(), Sequence::periodic(vec![i]).unwrap()),
        1 => (landing(), Sequence::periodic(vec![i, o]).unwrap()),
        _ => (landing(), Sequence::periodic(vec![o, i]).unwrap()),
    }
}

#[test]
fn geometric_grid_is_increasing() {
    let g = geometric_grid(2.0, 50.0, 9);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
    assert!((g[8] - 50.0).abs() < 1e-12);
}
