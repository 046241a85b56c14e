use starhairs::cli_io::MapSpec;
use starhairs::escape::{classify_grid, EscapeParams, Raster, Status, Viewport};
use starhairs::logspace::{LogTransform, TractId};
use starhairs::rays::{geometric_grid, min_parameter, trace_ray_tail, RayConfig, RayTail};
use starhairs::symbolic::{itinerary_of_address, ExternalAddress, Sequence, Side};
use starhairs::Complex64;

fn lt(name: &str) -> LogTransform {
    LogTransform::new(MapSpec::Preset { name: name.into(), params: vec![] }.build().unwrap()).unwrap()
}

fn tail(l: &LogTransform, addr: &ExternalAddress, t_max: f64) -> RayTail {
    let cfg = RayConfig::default();
    let t0 = min_parameter(l, addr, &cfg).unwrap();
    let r = trace_ray_tail(l, addr, &geometric_grid(t0, t_max.max(t0 * 1.5), 200), &cfg).unwrap();
    assert!(r.converged);
    r
}

/// Every pixel within one pixel diagonal of a ray sample escapes, and its symbols before the
/// escape iteration follow the ray's itinerary. From the escape step on, the symbol is set by
/// the argument of the previous iterate, where the pixel offset has been magnified.
fn check_neighbourhood(l: &LogTransform, rays: &[RayTail], vp: &Viewport) -> usize {
    let params = EscapeParams::with_radius(l.r_norm());
    let raster = classify_grid(l.map(), vp, &params, None).unwrap();
    let diag = vp.pixel_diagonal();
    let mut checked = 0;
    for ray in rays {
        let e = itinerary_of_address(&ray.address);
        for s in &ray.samples {
            for row in 0..vp.height() {
                for col in 0..vp.width() {
                    if (vp.pixel_center(col, row) - s.z).norm() > diag {
                        continue;
                    }
                    let p = raster.at(col, row);
                    assert_eq!(p.status, Status::Escaped, "pixel ({col},{row}) near {} on {}", s.z, ray.address);
                    let n = p.first_escape_iter.unwrap() as usize;
                    let syms: Vec<Side> = p.itinerary_prefix.symbols().into_iter().take(n).collect();
                    let want: Vec<Side> = (0..syms.len()).map(|i| *e.get(i)).collect();
                    assert_eq!(syms, want, "pixel ({col},{row}) near {} on {}", s.z, ray.address);
                    checked += 1;
                }
            }
        }
    }
    checked
}

#[test]
fn pixels_along_the_broken_ray_escape_to_infinity() {
    let l = lt("broken");
    let addr = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0)]).unwrap();
    let vp = Viewport::square(Complex64::new(24.0, 0.0), 24.0, 512).unwrap();
    let ray = tail(&l, &addr, 48f64.ln());
    assert!(check_neighbourhood(&l, &[ray], &vp) > 50);
}

#[test]
fn pixels_along_the_landing_rays_alternate() {
    let l = lt("landing");
    let a = Sequence::periodic(vec![TractId::new(Side::Infinity, 0, 0), TractId::new(Side::Zero, 0, 0)]).unwrap();
    let vp = Viewport::square(Complex64::new(0.0, 0.0), 4.0, 512).unwrap();
    let rays = [tail(&l, &a, 4f64.ln()), tail(&l, &a.shift(1), 10.0)];
    assert!(check_neighbourhood(&l, &rays, &vp) > 50);
}

fn bounded_near(r: &Raster, col: usize, row: usize, z0: Complex64) -> bool {
    let p = r.at(col, row);
    p.status == Status::Bounded && (p.last_point() - z0).norm() < 1e-6
}

#[test]
fn escaping_pixels_never_sit_inside_the_basin() {
    let l = lt("disjoint");
    let z0 = l.map().find_periodic_orbit(1, Complex64::new(2.0, 0.0)).unwrap().points[0];
    let vp = Viewport::square(Complex64::new(0.0, 0.0), 16.0, 512).unwrap();
    let r = classify_grid(l.map(), &vp, &EscapeParams::with_radius(l.r_norm()), None).unwrap();
    let mut basin = 0;
    for row in 1..vp.height() - 1 {
        for col in 1..vp.width() - 1 {
            if bounded_near(&r, col, row, z0) {
                basin += 1;
            }
            if r.at(col, row).status != Status::Escaped {
                continue;
            }
            let enclosed = (-1i64..=1)
                .flat_map(|dy| (-1i64..=1).map(move |dx| (dx, dy)))
                .filter(|&d| d != (0, 0))
                .all(|(dx, dy)| bounded_near(&r, (col as i64 + dx) as usize, (row as i64 + dy) as usize, z0));
            assert!(!enclosed, "escaped pixel ({col},{row}) enclosed by the basin");
        }
    }
    assert!(basin > 1000);
}
