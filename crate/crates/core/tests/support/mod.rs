//! Invariant suites shared by the `invariants` test target and the
//! acceptance report. Each suite returns a one-line note on success.

use casimir_core::error::CasimirError;
use casimir_core::fd::*;
use casimir_core::lifshitz::{
    default_plate_rule, lifshitz_pressure, perfect_metal_pressure, PerfectMetalOptions, PlateOptions, PlateSystem,
};
use casimir_core::materials::MaterialModel;
use casimir_core::quadrature::{matsubara_sum, FrequencyRule};
use casimir_core::scattering::*;
use casimir_core::units;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub type Outcome = Result<String, String>;

/// Read by the acceptance report.
#[allow(dead_code)]
pub const SUITES: &[(&str, fn() -> Outcome)] = &[
    ("materials monotone, deterministic, drude(gamma=0) = plasma", materials),
    ("quadrature exactness", quadrature_exactness),
    ("quadrature linearity and nested error estimates", quadrature_linearity),
    ("matsubara sum is O(T^2) trapezoid", matsubara_order),
    ("lifshitz swap symmetry and positivity", lifshitz_symmetry_positivity),
    ("perfect-metal pressure falls with separation", perfect_metal_monotone),
    ("lifshitz T -> 0 limit", lifshitz_low_temperature),
    ("fd operator SPD on random grids, singular static periodic", fd_spd),
    ("fd reciprocity and solver agreement", fd_reciprocity),
    ("fd stress-surface independence", fd_surface_independence),
    ("scattering swap and scale symmetries", scattering_symmetries),
    ("scattering m-block exactness", m_blocks),
    ("translation blocks vs surface projection", translation_oracle),
];

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn drude_or_plasma() -> impl Strategy<Value = MaterialModel> {
    prop_oneof![
        (0.01f64..100.0, 0.0f64..10.0).prop_map(|(omega_p, gamma)| MaterialModel::Drude { omega_p, gamma }),
        (0.01f64..100.0).prop_map(|omega_p| MaterialModel::Plasma { omega_p }),
    ]
}

pub fn materials() -> Outcome {
    let pairs = (drude_or_plasma(), -4.0f64..4.0, -4.0f64..4.0);
    runner(1000)
        .run(&pairs, |(m, l1, l2)| {
            let (x1, x2) = (10f64.powf(l1.min(l2)), 10f64.powf(l1.max(l2)));
            let (e1, e2) = (m.permittivity(x1).unwrap(), m.permittivity(x2).unwrap());
            prop_assert!(e1 >= e2 && e2 >= 1.0, "{m:?}: eps({x1}) = {e1}, eps({x2}) = {e2}");
            prop_assert_eq!(e1.to_bits(), m.permittivity(x1).unwrap().to_bits());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    runner(1000)
        .run(&(0.01f64..100.0, -4.0f64..4.0), |(omega_p, l)| {
            let xi = 10f64.powf(l);
            let d = MaterialModel::Drude { omega_p, gamma: 0.0 }.permittivity(xi).unwrap();
            let p = MaterialModel::Plasma { omega_p }.permittivity(xi).unwrap();
            prop_assert!((d - p).abs() <= f64::EPSILON * p, "{d} vs {p}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    check(MaterialModel::PerfectMetal.permittivity(1.0).is_err(), || "perfect metal evaluated numerically".into())?;
    Ok("1000 random pairs and 1000 gamma = 0 probes".into())
}

pub fn quadrature_exactness() -> Outcome {
    // Int x^k e^{-x/s} dx = k! s^{k+1}
    for n in 1..=5 {
        for scale in [0.3, 1.0, 2.5] {
            let rule = FrequencyRule::gauss_laguerre(n, scale).map_err(|e| e.to_string())?;
            for k in 0..2 * n {
                let got = rule.integrate(|x| Ok(x.powi(k as i32) * (-x / scale).exp())).unwrap().value;
                let want = (1..=k).map(|j| j as f64).product::<f64>() * scale.powi(k as i32 + 1);
                check(rel(got, want) < 1e-12, || format!("laguerre n = {n}, scale {scale}, degree {k}: {got} vs {want}"))?;
            }
        }
    }
    let cc = FrequencyRule::clenshaw_curtis(64, 1.0).unwrap().integrate(|x| Ok((-2.0 * x).exp())).unwrap().value;
    check((cc - 0.5).abs() < 1e-10, || format!("clenshaw-curtis e^-2x: {cc}"))?;
    let gl = FrequencyRule::gauss_laguerre(16, 1.0).unwrap().integrate(|x| Ok(x.powi(3) * (-2.0 * x).exp())).unwrap();
    check((gl.value - 0.375).abs() < 1e-8, || format!("x^3 e^-2x: {}", gl.value))?;
    for kelvin in [1.0, 300.0] {
        let rule = FrequencyRule::matsubara(kelvin, 10).unwrap();
        let h = units::matsubara_spacing(kelvin);
        for (n, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let want_w = if n == 0 { 0.5 * h } else { h };
            check(rel(x, n as f64 * h) < 1e-15 || (n == 0 && x == 0.0), || format!("matsubara node {n}: {x}"))?;
            check(rel(w, want_w) < 1e-15, || format!("matsubara weight {n}: {w}"))?;
        }
    }
    // f(0) = 1 and zero elsewhere picks out the half weight
    let h = units::matsubara_spacing(10.0);
    let s = matsubara_sum(10.0, |x| Ok(if x == 0.0 { 1.0 } else { 0.0 }), 10, 1e-8).unwrap();
    check(rel(s.value, 0.5 * h) < 1e-15, || format!("half-weight zero term: {}", s.value))?;
    // f = e^{-xi lambda_T / 2pi} = q^n: geometric series h (1/2 + q/(1-q))
    let kelvin = 50.0;
    let h = units::matsubara_spacing(kelvin);
    let q = (-1.0f64).exp();
    let s = matsubara_sum(kelvin, |x| Ok((-x / h).exp()), 1000, 1e-15).unwrap();
    let want = h * (0.5 + q / (1.0 - q));
    check(rel(s.value, want) < 1e-12, || format!("geometric series: {} vs {want}", s.value))?;
    Ok("laguerre degree <= 2n-1 for n <= 5, clenshaw-curtis, matsubara nodes and weights".into())
}

pub fn quadrature_linearity() -> Outcome {
    let rules = [FrequencyRule::gauss_laguerre(24, 0.7).unwrap(), FrequencyRule::clenshaw_curtis(65, 0.7).unwrap()];
    runner(200)
        .run(&(-5.0f64..5.0, -5.0f64..5.0, 0.2f64..3.0), |(alpha, beta, c)| {
            let f = |x: f64| (-c * x).exp() / (1.0 + x);
            let g = |x: f64| x * (-x).exp();
            for rule in &rules {
                let lhs = rule.integrate(|x| Ok(alpha * f(x) + beta * g(x))).unwrap().value;
                let rhs = alpha * rule.integrate(|x| Ok(f(x))).unwrap().value
                    + beta * rule.integrate(|x| Ok(g(x))).unwrap().value;
                let scale = alpha.abs() + beta.abs();
                prop_assert!((lhs - rhs).abs() <= 1e-14 * scale, "{lhs} vs {rhs}");
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let f = |x: f64| Ok((-x).exp() / (1.0 + x));
    for (name, make) in [
        ("laguerre", FrequencyRule::gauss_laguerre as fn(usize, f64) -> casimir_core::error::Result<FrequencyRule>),
        ("clenshaw-curtis", FrequencyRule::clenshaw_curtis),
    ] {
        for n in [17, 33] {
            let coarse = make(n, 1.0).unwrap().integrate_with_error(f).unwrap();
            let fine = make(2 * n - 1, 1.0).unwrap().integrate(f).unwrap();
            check((fine.value - coarse.value).abs() <= coarse.error, || {
                format!("{name} n = {n}: change {} exceeds estimate {}", (fine.value - coarse.value).abs(), coarse.error)
            })?;
        }
    }
    Ok("200 random combinations, nested estimates bound the refinement".into())
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|p| (p.0.ln(), p.1.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn matsubara_order() -> Outcome {
    // e^{-xi} has slope -1 at 0+, so the trapezoid error is -h^2/12 + O(h^4)
    let pts: Vec<(f64, f64)> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let s = matsubara_sum(units::temperature_for_spacing(h), |x| Ok((-x).exp()), 100_000, 1e-14).unwrap();
            (h, (s.value - 1.0).abs())
        })
        .collect();
    let slope = log_log_slope(&pts);
    check((slope - 2.0).abs() <= 0.2, || format!("fitted order {slope}: {pts:?}"))?;
    Ok(format!("fitted order {slope:.3}"))
}

fn plate_material() -> impl Strategy<Value = MaterialModel> {
    prop_oneof![
        Just(MaterialModel::PerfectMetal),
        (1.5f64..100.0).prop_map(|eps| MaterialModel::Constant { eps }),
        (0.5f64..50.0, 0.0f64..2.0).prop_map(|(omega_p, gamma)| MaterialModel::Drude { omega_p, gamma }),
        (0.5f64..50.0).prop_map(|omega_p| MaterialModel::Plasma { omega_p }),
    ]
}

pub fn lifshitz_symmetry_positivity() -> Outcome {
    runner(64)
        .run(&(plate_material(), plate_material(), 0.05f64..5.0), |(m1, m2, a)| {
            let rule = default_plate_rule(a).unwrap();
            let p = |x: &MaterialModel, y: &MaterialModel| {
                lifshitz_pressure(&PlateSystem::new(x.clone(), y.clone(), a), &rule, PlateOptions::default()).unwrap().value
            };
            prop_assert_eq!(p(&m1, &m2), p(&m2, &m1));
            let same = p(&m1, &m1);
            prop_assert!(same > 0.0, "{m1:?} at a = {a}: {same}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("64 random material pairs and separations".into())
}

pub fn perfect_metal_monotone() -> Outcome {
    let p = |a: f64| perfect_metal_pressure(a, PerfectMetalOptions::default()).unwrap().value;
    for a in [0.1, 0.3, 1.0, 3.0, 10.0] {
        let h = 1e-3 * a;
        let slope = (p(a + h) - p(a - h)) / (2.0 * h);
        check(slope < 0.0, || format!("dP/da = {slope} at a = {a}"))?;
    }
    Ok("dP/da < 0 at a = 0.1, 0.3, 1, 3, 10".into())
}

/// Drude plates have a linear slope at xi = 0+, so the Matsubara sum leaves
/// the T = 0 integral as Delta_xi^2.
pub fn drude_plates_at_spacing(h: f64) -> f64 {
    let sys = PlateSystem::new(drude_unit(), drude_unit(), 1.0);
    let opts = PlateOptions { tail_tol: 1e-13, ..PlateOptions::default() };
    if h == 0.0 {
        let rule = FrequencyRule::gauss_laguerre(120, 0.5).unwrap();
        return lifshitz_pressure(&sys, &rule, opts).unwrap().value;
    }
    let sys = sys.with_temperature(units::temperature_for_spacing(h));
    let rule = FrequencyRule::matsubara(sys.kelvin, 1).unwrap();
    lifshitz_pressure(&sys, &rule, opts).unwrap().value
}

fn drude_unit() -> MaterialModel {
    MaterialModel::Drude { omega_p: 1.0, gamma: 1.0 }
}

pub fn lifshitz_low_temperature() -> Outcome {
    let p0 = drude_plates_at_spacing(0.0);
    let d1 = (drude_plates_at_spacing(0.05) - p0).abs();
    let d2 = (drude_plates_at_spacing(0.025) - p0).abs();
    let ratio = d1 / d2;
    check((3.4..=4.6).contains(&ratio), || format!("halving the spacing shrank the deviation by {ratio}"))?;
    Ok(format!("deviation ratio {ratio:.3} on halving T"))
}

fn material() -> impl Strategy<Value = MaterialModel> {
    prop_oneof![
        Just(MaterialModel::PerfectMetal),
        (1.0f64..50.0).prop_map(|eps| MaterialModel::Constant { eps }),
        (0.1f64..10.0, 0.01f64..2.0).prop_map(|(omega_p, gamma)| MaterialModel::Drude { omega_p, gamma }),
        (0.1f64..10.0).prop_map(|omega_p| MaterialModel::Plasma { omega_p }),
    ]
}

fn random_grid() -> impl Strategy<Value = FdGrid> {
    (
        1usize..=2,
        8usize..24,
        8usize..20,
        0.02f64..0.5,
        any::<[bool; 2]>(),
        prop::option::of((2usize..4, 0.5f64..10.0)),
        any::<bool>(),
        prop::collection::vec((material(), 0.0f64..1.0, 0.0f64..1.0, 0.05f64..0.4), 0..3),
    )
        .prop_map(|(dim, nx, ny, dx, periodic, stretch, staircase, bodies)| {
            let mut boundary = [Boundary::Dirichlet; 2];
            let mut st = [None; 2];
            for ax in 0..dim {
                if periodic[ax] && stretch.is_none() {
                    boundary[ax] = Boundary::Periodic;
                }
                st[ax] = stretch.map(|(cells, strength)| Stretch { cells, strength });
            }
            let extents = [nx, if dim == 2 { ny } else { 1 }];
            let spec = GridSpec {
                dim,
                dx,
                extents,
                origin: [0.0, 0.0],
                boundary,
                stretch: st,
                scheme: if staircase { BoundaryScheme::Staircase } else { BoundaryScheme::CutCell },
            };
            let len = [nx as f64 * dx, ny as f64 * dx];
            let bodies = bodies
                .into_iter()
                .map(|(material, u, v, frac)| {
                    let c = [u * len[0], v * len[1]];
                    let shape = if dim == 1 {
                        let half = frac * len[0] * 0.5;
                        if material.is_perfect_metal() && frac < 0.2 {
                            Shape::Point { x: c[0] }
                        } else {
                            Shape::Interval { x0: c[0] - half, x1: c[0] + half }
                        }
                    } else if frac < 0.25 {
                        Shape::Circle { center: c, radius: frac * len[0].min(len[1]) }
                    } else {
                        let h = [frac * len[0] * 0.5, frac * len[1] * 0.3];
                        Shape::Rect { min: [c[0] - h[0], c[1] - h[1]], max: [c[0] + h[0], c[1] + h[1]] }
                    };
                    Body { shape, material }
                })
                .collect();
            FdGrid::new(spec, bodies).unwrap()
        })
}

pub fn fd_spd() -> Outcome {
    runner(1000)
        .run(&(random_grid(), -3.0f64..2.0), |(grid, log_xi)| {
            let op = build_operator(&grid, 10f64.powf(log_xi)).unwrap();
            prop_assert!(op.asymmetry() < 1e-12);
            prop_assert!(op.factor().is_ok());
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let spec = GridSpec {
        dim: 2,
        dx: 0.2,
        extents: [10, 12],
        origin: [0.0, 0.0],
        boundary: [Boundary::Periodic; 2],
        stretch: [None; 2],
        scheme: BoundaryScheme::CutCell,
    };
    let g = FdGrid::new(spec, vec![]).unwrap();
    let op = build_static_operator(&g).unwrap();
    let ones = vec![1.0; op.n];
    let mut y = vec![1.0; op.n];
    op.apply(&ones, &mut y);
    check(y.iter().all(|v| v.abs() < 1e-12), || "constant vector is not in the static null space".into())?;
    check(matches!(op.factor().unwrap_err(), CasimirError::Consistency(_)), || "static operator factored".into())?;
    check(build_operator(&g, 1e-3).unwrap().factor().is_ok(), || "xi = 1e-3 did not lift the null space".into())?;
    Ok("1000 random (grid, xi) factorizations".into())
}

pub fn fd_reciprocity() -> Outcome {
    let g = circle_pair_grid(0.5, 0.4, 1.6, 0.1, 0.5, Some(Stretch { cells: 8, strength: 6.0 })).unwrap();
    let op = build_operator(&g, 0.9).unwrap();
    let sources = [op.n / 3, op.n / 2, 2 * op.n / 3 + 5];
    let cols: Vec<Vec<f64>> = sources.iter().map(|&s| green_column(&op, s, Solver::Direct).unwrap()).collect();
    let scale = cols.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for (a, &sa) in sources.iter().enumerate() {
        for (b, &sb) in sources.iter().enumerate() {
            worst = worst.max((cols[a][sb] - cols[b][sa]).abs() / scale);
        }
        let cg = green_column(&op, sa, Solver::cg()).unwrap();
        for (x, y) in cols[a].iter().zip(&cg) {
            check((x - y).abs() < 1e-8 * scale, || format!("cg and direct solves differ by {}", (x - y).abs()))?;
        }
    }
    check(worst < 1e-12, || format!("G(n, n') - G(n', n) = {worst} relative"))?;
    let z = op.factor().unwrap().selected_inverse();
    for (a, &s) in sources.iter().enumerate() {
        for q in s.saturating_sub(z.b)..(s + z.b + 1).min(op.n) {
            let d = (z.get(s, q) / op.cell_volume - cols[a][q]).abs();
            check(d < 1e-11 * scale, || format!("selected inverse differs by {d}"))?;
        }
    }
    Ok(format!("max asymmetry {worst:.1e}"))
}

pub fn fd_surface_independence() -> Outcome {
    let rule = FrequencyRule::gauss_laguerre(12, 0.5).unwrap();
    let cache = VacuumCache::new();
    let dx = 0.125;
    let stretch = Some(Stretch { cells: 12, strength: 8.0 });
    let g = circle_pair_grid(1.0, 1.0, 3.0, dx, 1.0, stretch).unwrap();
    let surfaces: Vec<StressSurface> =
        [0.25, 0.375, 0.5, 0.625].iter().map(|&c| StressSurface::enclosing(&g, 1, c).unwrap()).collect();
    let f = stress_forces_2d(&g, &surfaces, &rule, &cache).unwrap();
    // discretization error estimate from one halving of dx
    let fine = circle_pair_grid(1.0, 1.0, 3.0, dx / 2.0, 1.0, stretch).unwrap();
    let f_fine = stress_force_2d(&fine, StressSurface::enclosing(&fine, 1, 0.25).unwrap(), &rule).unwrap();
    let estimate = (f[0].force[0] - f_fine.force[0]).abs();
    let worst = f[1..].iter().map(|r| (r.force[0] - f[0].force[0]).abs()).fold(0.0, f64::max);
    check(worst < 1e-3 * estimate, || format!("surfaces differ by {worst}, estimate {estimate}"))?;
    Ok(format!("4 nested surfaces within {:.1e} relative", worst / f[0].force[0].abs()))
}

fn cutoff(l: usize) -> PartialWaveCutoff {
    PartialWaveCutoff::new(l).unwrap()
}

pub fn scattering_symmetries() -> Outcome {
    let dims = (0.3f64..2.0, 0.3f64..2.0, 0.3f64..3.0, any::<bool>());
    runner(24)
        .run(&dims, |(r1, r2, gap, three)| {
            let dim = if three { Dim::Three } else { Dim::Two };
            let g = TwoBodyGeometry::new(dim, r1, r2, r1 + r2 + gap).unwrap();
            let swapped = TwoBodyGeometry::new(dim, r2, r1, r1 + r2 + gap).unwrap();
            let big = TwoBodyGeometry::new(dim, 2.0 * r1, 2.0 * r2, 2.0 * g.d).unwrap();
            let rule = FrequencyRule::gauss_laguerre(12, 1.0 / (2.0 * gap)).unwrap();
            let a = energy(&g, cutoff(5), &rule).unwrap().value;
            let b = energy(&swapped, cutoff(5), &rule).unwrap().value;
            prop_assert!(((a - b) / a).abs() < 1e-12, "swap: {a} vs {b}");
            let big_rule = FrequencyRule::gauss_laguerre(12, 1.0 / (4.0 * gap)).unwrap();
            let c = energy(&big, cutoff(5), &big_rule).unwrap().value;
            // both energies go as 1/length
            prop_assert!((2.0 * c / a - 1.0).abs() < 1e-8, "scale: {a} vs {c}");
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("24 random pairs (2d and 3d)".into())
}

/// ln det(I - T1 U21 T2 U12) from the unblocked, unsymmetrized matrices.
fn dense_log_det(g: &TwoBodyGeometry, l_max: usize, xi: f64) -> f64 {
    use nalgebra::DMatrix;
    let f = translation_dense_3d(xi, g.d, l_max).unwrap();
    let idx: Vec<(usize, i64)> = (0..=l_max).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| (l, m))).collect();
    let n = idx.len();
    let parity = DMatrix::from_fn(n, n, |i, j| if i == j { if idx[i].0.is_multiple_of(2) { 1.0 } else { -1.0 } } else { 0.0 });
    let t = |r: f64| DMatrix::from_fn(n, n, |i, j| if i == j { tmatrix_element(Dim::Three, idx[i].0, xi, r).unwrap() } else { 0.0 });
    let u21 = &f * &parity;
    let u12 = &parity * &f;
    let round_trip = t(g.r1) * u21 * t(g.r2) * u12;
    (DMatrix::identity(n, n) - round_trip).determinant().ln()
}

pub fn m_blocks() -> Outcome {
    for l_max in 1..=4 {
        let a = translation_dense_3d(1.3, 3.0, l_max).unwrap();
        let v = m_block_violations(&a, l_max);
        check(v.is_empty(), || format!("l_max = {l_max}: m != m' entries at {v:?}"))?;
    }
    let mut broken = translation_dense_3d(1.3, 3.0, 2).unwrap();
    broken[(1, 2)] = 1e-3;
    check(m_block_violations(&broken, 2) == vec![(1, 2)], || "planted violation not found".into())?;
    let g = TwoBodyGeometry::new(Dim::Three, 1.0, 0.7, 2.4).unwrap();
    for l_max in 1..=3 {
        let sys = PartialWaveSystem::new(g, cutoff(l_max)).unwrap();
        for &xi in &[0.05, 0.4, 1.5, 4.0] {
            let blocked = sys.log_det(xi).unwrap();
            let dense = dense_log_det(&g, l_max, xi);
            check((blocked - dense).abs() < 1e-12 * dense.abs().max(1e-3), || {
                format!("l_max = {l_max}, xi = {xi}: blocked {blocked} vs dense {dense}")
            })?;
        }
    }
    Ok("no m != m' entries for l <= 4, blocked = dense for l <= 3".into())
}

struct ProjectionRow {
    dim: usize,
    xi: f64,
    d: f64,
    m: usize,
    lp: i64,
    l: i64,
    w: f64,
}

fn projection_rows() -> Vec<ProjectionRow> {
    include_str!("../data/translation_projection.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split_whitespace().collect();
            ProjectionRow {
                dim: f[0].parse().unwrap(),
                xi: f[1].parse().unwrap(),
                d: f[2].parse().unwrap(),
                m: f[3].parse().unwrap(),
                lp: f[4].parse().unwrap(),
                l: f[5].parse().unwrap(),
                w: f[6].parse().unwrap(),
            }
        })
        .collect()
}

pub fn translation_oracle() -> Outcome {
    let rows = projection_rows();
    check(rows.len() > 150, || format!("only {} oracle rows", rows.len()))?;
    let mut worst = 0.0f64;
    for r in &rows {
        let got = if r.dim == 3 {
            let TranslationBlock::Spheres(b) = translation_block(Dim::Three, r.xi, r.d, cutoff(4)).unwrap().u21(4) else {
                unreachable!()
            };
            b[r.m][(r.lp as usize - r.m, r.l as usize - r.m)]
        } else {
            let TranslationBlock::Cylinders(b) = translation_block(Dim::Two, r.xi, r.d, cutoff(3)).unwrap().u21(3) else {
                unreachable!()
            };
            b[((r.lp + 3) as usize, (r.l + 3) as usize)]
        };
        let err = (got - r.w).abs() / r.w.abs().max(1.0);
        worst = worst.max(err);
        check(err < 1e-8, || format!("dim {} m {} l' {} l {}: {got} vs {}", r.dim, r.m, r.lp, r.l, r.w))?;
    }
    Ok(format!("{} entries, l <= 4, worst {worst:.1e}", rows.len()))
}
