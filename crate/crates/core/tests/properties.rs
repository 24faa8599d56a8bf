use std::collections::HashMap;
use std::sync::OnceLock;

use proptest::prelude::*;

use itrans::analysis::{delta_corner, fit_angle_law, fit_power_law, spectral_checks, Classification, SLOPE_MIN};
use itrans::assembly::{element_mass, element_stiffness, Coefficient};
use itrans::bessel::bessel_j;
use itrans::geometry::{builtin_domain, mesh_domain, partition_dofs, DomainSpec2D, Mesh};
use itrans::problem::RefractiveIndex;
use itrans::radial::{Geometry, RadialDeterminant};
use itrans::sparse::SparseMatrix;
use itrans::C64;

fn triangle_fixture() -> &'static (DomainSpec2D, Mesh) {
    static MESH: OnceLock<(DomainSpec2D, Mesh)> = OnceLock::new();
    MESH.get_or_init(|| {
        let spec = builtin_domain("arrow", &[]).unwrap();
        let mesh = mesh_domain(&spec, 0.08).unwrap();
        (spec, mesh)
    })
}

fn point3() -> impl Strategy<Value = [f64; 3]> {
    [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64]
}

/// Unsigned measure; reorders `points` to positive orientation.
fn orient(points: &mut [[f64; 3]]) -> f64 {
    let d = |i: usize, k: usize| points[i][k] - points[0][k];
    let signed = if points.len() == 3 {
        0.5 * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0))
    } else {
        let det = d(1, 0) * (d(2, 1) * d(3, 2) - d(2, 2) * d(3, 1)) - d(1, 1) * (d(2, 0) * d(3, 2) - d(2, 2) * d(3, 0))
            + d(1, 2) * (d(2, 0) * d(3, 1) - d(2, 1) * d(3, 0));
        det / 6.0
    };
    if signed < 0.0 {
        points.swap(1, 2);
    }
    signed.abs()
}

proptest! {
    #[test]
    fn power_law_is_recovered(
        s in -3.0..14.0f64,
        c in 1e-2..1e2f64,
        r0 in 0.1..1.0f64,
        ratio in 0.3..0.8f64,
        n in 4usize..9,
    ) {
        prop_assume!(s.abs() * ratio.ln().abs() * (n - 1) as f64 <= 18.0);
        let samples: Vec<(f64, f64)> = (0..n).map(|i| {
            let r = r0 * ratio.powi(i as i32);
            (r, c * r.powf(s))
        }).collect();
        let fit = fit_power_law(&samples).unwrap();
        prop_assert!((fit.slope - s).abs() <= 1e-10, "{} vs {s}", fit.slope);
        prop_assert!((fit.amplitude - c).abs() <= 1e-8 * c);
        prop_assert_eq!(fit.class, Classification::of(s));
    }

    #[test]
    fn slope_ignores_mode_scaling(
        deltas in proptest::collection::vec(1e-6..1e2f64, 4..8),
        scale in 1e-3..1e3f64,
    ) {
        let samples: Vec<(f64, f64)> = deltas.iter().enumerate().map(|(i, &d)| (0.5f64.powi(i as i32), d)).collect();
        let scaled: Vec<(f64, f64)> = samples.iter().map(|&(r, d)| (r, d * scale)).collect();
        let (a, b) = (fit_power_law(&samples).unwrap(), fit_power_law(&scaled).unwrap());
        prop_assert!((a.slope - b.slope).abs() <= 1e-12 * a.slope.abs().max(1.0));
        prop_assert!((b.amplitude - scale * a.amplitude).abs() <= 1e-9 * b.amplitude);
        prop_assert!((0.0..=1.0).contains(&a.r2));
    }

    #[test]
    fn classification_threshold(s in -5.0..5.0f64) {
        let class = Classification::of(s);
        let expected = if s > SLOPE_MIN {
            Classification::Vanishing
        } else if s < -SLOPE_MIN {
            Classification::Localizing
        } else {
            Classification::Indeterminate
        };
        prop_assert_eq!(class, expected);
    }

    #[test]
    fn angle_law_is_recovered(a in -5.0..5.0f64, b in -3.0..3.0f64) {
        let omegas = [0.3, 0.9, 2.0, 4.5, 5.9];
        let points: Vec<(f64, f64)> = omegas.iter().map(|&w| (w, a / w + b)).collect();
        let law = fit_angle_law(&points).unwrap();
        prop_assert!((law.a - a).abs() <= 1e-10 && (law.b - b).abs() <= 1e-10);
        prop_assert!(law.residual <= 1e-10);
    }

    #[test]
    fn triangle_element_identities(p in proptest::collection::vec(point3(), 3), c in 0.1..50.0f64) {
        let mut pts: Vec<[f64; 3]> = p.iter().map(|q| [q[0], q[1], 0.0]).collect();
        let area = orient(&mut pts);
        prop_assume!(area > 1e-2);
        let s = element_stiffness(&pts).unwrap();
        for (i, row) in s.iter().enumerate() {
            prop_assert!(row.iter().sum::<f64>().abs() <= 1e-10 * row[i].abs().max(1.0));
            prop_assert!(row[i] >= 0.0);
            for (j, v) in row.iter().enumerate() {
                prop_assert!((v - s[j][i]).abs() <= 1e-12 * row[i].abs().max(1.0));
            }
        }
        let m = element_mass(&pts, Coefficient::Unit).unwrap();
        let total: f64 = m.iter().flatten().sum();
        prop_assert!((total - area).abs() <= 1e-12 * area);
        let index = RefractiveIndex::constant(c);
        let w = element_mass(&pts, Coefficient::Index(&index)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(w[i][j], c * m[i][j]);
            }
        }
    }

    #[test]
    fn tetrahedron_element_identities(mut pts in proptest::collection::vec(point3(), 4)) {
        let vol = orient(&mut pts);
        prop_assume!(vol > 1e-2);
        let s = element_stiffness(&pts).unwrap();
        for row in &s {
            prop_assert!(row.iter().sum::<f64>().abs() <= 1e-10 * row.iter().map(|v| v.abs()).sum::<f64>().max(1.0));
        }
        let m = element_mass(&pts, Coefficient::Unit).unwrap();
        prop_assert!((m.iter().flatten().sum::<f64>() - vol).abs() <= 1e-12 * vol);
    }

    #[test]
    fn constant_field_delta_is_its_modulus(
        corner in 0usize..4,
        r in 0.05..1.0f64,
        re in -10.0..10.0f64,
        im in -10.0..10.0f64,
    ) {
        let (spec, mesh) = triangle_fixture();
        let c = C64::new(re, im);
        prop_assume!(c.norm() > 1e-6);
        let p = spec.corners[corner].point;
        let values = vec![c; mesh.n_vertices()];
        let d = delta_corner(&values, mesh, [p[0], p[1], 0.0], r).unwrap();
        prop_assert!((d - c.norm()).abs() <= 1e-12 * c.norm());
        let ones = vec![C64::new(1.0, 0.0); mesh.n_vertices()];
        prop_assert_eq!(delta_corner(&ones, mesh, [p[0], p[1], 0.0], r).unwrap(), 1.0);
    }

    #[test]
    fn bessel_recurrence(m in 1usize..40, x in 0.1..50.0f64) {
        let (jm, djm) = bessel_j(m, x).unwrap();
        let (jp, _) = bessel_j(m + 1, x).unwrap();
        prop_assert!((jp - (m as f64 / x * jm - djm)).abs() <= 1e-10);
    }

    #[test]
    fn unit_index_determinant_vanishes(m in 0usize..12, k in 0.1..20.0f64, ball in any::<bool>()) {
        let g = if ball { Geometry::Ball } else { Geometry::Disk };
        prop_assert!(RadialDeterminant::new(g, m, 1.0).eval(k).abs() <= 1e-12);
    }

    #[test]
    fn conjugate_pairs_are_matched(
        reals in proptest::collection::vec(0.5..5.0f64, 0..4),
        complex in proptest::collection::vec((0.5..5.0f64, 0.05..2.0f64), 1..4),
    ) {
        let mut ks: Vec<C64> = reals.iter().map(|&r| C64::new(r, 0.0)).collect();
        for &(re, im) in &complex {
            ks.push(C64::new(re, im));
            ks.push(C64::new(re, -im));
        }
        let report = spectral_checks(&ks);
        prop_assert!(report.is_clean(), "{:?}", report);
        prop_assert_eq!(report.conjugate_pairs.len(), complex.len());
        prop_assert_eq!(report.real.len(), reals.len());
        ks.pop();
        prop_assert!(!spectral_checks(&ks).unmatched.is_empty());
    }

    #[test]
    fn triplets_consolidate(entries in proptest::collection::vec((0usize..6, 0usize..5, -3.0..3.0f64), 0..40)) {
        let m = SparseMatrix::from_triplets(6, 5, entries.clone()).unwrap();
        let mut sums: HashMap<(usize, usize), f64> = HashMap::new();
        for &(r, c, v) in &entries {
            *sums.entry((r, c)).or_default() += v;
        }
        prop_assert!(m.nnz() <= sums.len());
        for (&(r, c), &v) in &sums {
            prop_assert!((m.get(r, c) - v).abs() <= 1e-12);
        }
        let mut seen = std::collections::HashSet::new();
        for (r, c, _) in m.triplets() {
            prop_assert!(seen.insert((r, c)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn partition_is_a_bijection(h in 0.15..0.5f64, which in 0usize..4) {
        let name = ["equilateral_triangle", "right_triangle", "moon", "arrow"][which];
        let spec = builtin_domain(name, &[]).unwrap();
        let mesh = mesh_domain(&spec, h).unwrap();
        let part = partition_dofs(&mesh);
        let mut all: Vec<usize> = part.interior.iter().chain(&part.boundary).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..mesh.n_vertices()).collect::<Vec<_>>());
        prop_assert!(part.interior.iter().all(|&v| !mesh.is_boundary(v)));
        prop_assert!(part.boundary.iter().all(|&v| mesh.is_boundary(v)));
        prop_assert!(part.n_interior() >= 1 && part.n_boundary() >= 3);
        prop_assert_eq!(partition_dofs(&mesh), part);
    }
}
