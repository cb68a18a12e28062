use num_complex::Complex64;
use proptest::prelude::*;
use starlab::function_space::{parity_decompose, random_bandlimited, ParityFilter};
use starlab::geometry::{
    classify_triple, midpoints_from_vertices, signed_area_from_vertices, triangle_area_s, vertices_from_midpoints,
    DomainLabel, SpherePoint, EPS_DET, EPS_SIGN,
};
use starlab::io::{read_coefficients_csv, write_coefficients_csv};
use starlab::kernels::global_kernel;
use starlab::quadrature::QuadratureGrid;

fn point() -> impl Strategy<Value = SpherePoint> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| SpherePoint::from_angles(z.acos(), phi))
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-12 * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_is_cyclic_and_reflection_conjugate(a in point(), b in point(), c in point(), n in 1u32..7) {
        let k = |x, y, z| global_kernel(&classify_triple(x, y, z, EPS_SIGN), n, EPS_DET);
        let k0 = k(a, b, c);
        prop_assume!(k0.skipped.is_none());
        let k1 = k(c, a, b);
        let k2 = k(c, b, a);
        prop_assert!(close(k0.value, k1.value));
        prop_assert!(close(k0.value, k2.value.conj()));
    }

    #[test]
    fn single_flip_multiplies_by_parity_sign(a in point(), b in point(), c in point(), n in 1u32..7, which in 0usize..3) {
        let mut p = [a, b, c];
        let k0 = global_kernel(&classify_triple(p[0], p[1], p[2], EPS_SIGN), n, EPS_DET);
        prop_assume!(k0.skipped.is_none());
        p[which] = -p[which];
        let k1 = global_kernel(&classify_triple(p[0], p[1], p[2], EPS_SIGN), n, EPS_DET);
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(close(k0.value * s, k1.value));
    }

    #[test]
    fn standard_triples_round_trip_through_vertices(a in point(), b in point(), c in point()) {
        let t = classify_triple(a, b, c, EPS_SIGN);
        prop_assume!(t.label() == DomainLabel::W000 && t.one_minus_det_sq() > 1e-6);
        let v = vertices_from_midpoints(&t, EPS_DET).unwrap();
        let back = midpoints_from_vertices(&v, EPS_SIGN).unwrap();
        for (x, y) in t.points().iter().zip(back.points().iter()) {
            prop_assert!((x.dot(y) - 1.0).abs() < 1e-9);
        }
        let s = triangle_area_s(&t).unwrap();
        let excess = signed_area_from_vertices(&v).unwrap();
        prop_assert!((s - excess).abs() < 1e-8, "{} vs {}", s, excess);
    }

    #[test]
    fn parity_parts_sum_and_are_orthogonal(seed in any::<u64>(), n in 1u32..5, real in any::<bool>()) {
        let f = random_bandlimited(4, seed, ParityFilter::None, real);
        let (plus, minus) = parity_decompose(&f, n);
        let sum = plus.add(&minus);
        prop_assert_eq!(sum.coeffs(), f.coeffs());
        prop_assert!(plus.inner(&minus).norm() < 1e-15);
        prop_assert!((f.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_node_values_match_parity_flip(seed in any::<u64>(), n in 1u32..5) {
        let grid = QuadratureGrid::new(6, 12).unwrap();
        let f = random_bandlimited(3, seed, ParityFilter::None, false);
        let composed = grid.compose_antipode(&f.evaluate(&grid));
        let flipped = f.antipodal().evaluate(&grid);
        for (x, y) in composed.iter().zip(&flipped) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        let (plus, _) = parity_decompose(&f, n);
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        let pv = plus.evaluate(&grid);
        for (i, &j) in grid.antipode_index().iter().enumerate() {
            prop_assert!((pv[j] - pv[i] * s).norm() < 1e-12);
        }
    }

    #[test]
    fn coefficient_files_round_trip(seed in any::<u64>(), l in 0usize..6) {
        let f = random_bandlimited(l, seed, ParityFilter::None, false);
        let mut buf = Vec::new();
        write_coefficients_csv(&mut buf, &f).unwrap();
        let g = read_coefficients_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(f.coeffs(), g.coeffs());
    }
}
