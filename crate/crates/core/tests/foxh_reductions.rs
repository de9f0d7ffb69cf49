//! Cross-checks of the Mellin-Barnes engine against unit-slope
//! reductions and special functions.
//!
//! Any kernel with rational slope k/l can be rewritten, through the
//! Gauss multiplication theorem, as a unit-slope transform in z^l with
//! the slope absorbed into blocks of shifted parameters. The engine
//! must produce identical values through both routes.

use egkcap::foxh::{eval_foxh, eval_meijer_g, validate_foxh, ContourSpec, FoxHSpec};
use egkcap::special::{cosine_integral, exp_integral_ei, hyp2f2, EULER_MASCHERONI};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[test]
fn unit_slope_special_cases_match_references() {
    // Exponential: single lower parameter at zero.
    let hv = eval_meijer_g(1, 0, &[], &[0.0], 2.0, 1e-12).unwrap();
    assert!((hv.value - 0.13533528323661269).abs() < 1e-13);
    // Exponential integral in transform clothing.
    let hv = eval_meijer_g(0, 2, &[1.0, 1.0], &[0.0], 2.0, 1e-12).unwrap();
    assert!((hv.value - 0.55977359477616081).abs() < 1e-12);
}

#[test]
fn rational_slope_kernels_reduce_to_unit_slope() {
    // Slope 1 kernel of the sum combiner: both sides equal -Ei(-1/z).
    for z in [0.5, 2.0, 10.0] {
        let g = eval_meijer_g(
            1,
            3,
            &[0.0, 1.0, 1.0, 1.0],
            &[1.0, 0.0, 0.0],
            z,
            1e-11,
        )
        .unwrap();
        let reference = -exp_integral_ei(-1.0 / z).unwrap();
        assert!(
            (g.value - reference).abs() < 1e-9 * (reference.abs() + 1e-3),
            "sum kernel, z={z}: {} vs {reference}",
            g.value
        );
    }
    // Slope 2 kernel (k=2, l=1): sqrt(pi) G[4z] = -2 Ci(1/sqrt(z)).
    for z in [0.5, 2.0] {
        let g = eval_meijer_g(
            1,
            3,
            &[0.0, 1.0, 1.0, 0.5, 1.0],
            &[1.0, 0.0, 0.0],
            4.0 * z,
            1e-11,
        )
        .unwrap();
        let reference = -2.0 * cosine_integral(1.0 / z.sqrt()).unwrap();
        let lhs = std::f64::consts::PI.sqrt() * g.value;
        assert!(
            (lhs - reference).abs() < 1e-8 * (reference.abs() + 1e-3),
            "square kernel, z={z}: {lhs} vs {reference}"
        );
    }
    // Slope 1/2 kernel (k=1, l=2): G[z^2]/(2 pi) at argument z^2 equals
    // the hypergeometric closed form at s = 1/z^2.
    for z in [0.5, 2.0] {
        let g = eval_meijer_g(
            2,
            4,
            &[0.5, 0.0, 1.0, 1.0, 1.0],
            &[0.5, 1.0, 0.0, 0.0],
            z * z,
            1e-11,
        )
        .unwrap();
        let s = 1.0 / (z * z);
        let f = hyp2f2(0.5, 1.0, 1.5, 1.5, s).unwrap();
        let reference = -0.5
            * (exp_integral_ei(s).unwrap() - (16.0 * s / std::f64::consts::PI).sqrt() * f);
        let lhs = g.value / TAU;
        assert!(
            (lhs - reference).abs() < 1e-8 * (reference.abs() + 1e-3),
            "root kernel, z={z}: {lhs} vs {reference}"
        );
    }
    // Slope -1 kernel of the relay combiner.
    for z in [0.5, 1.0, 2.0] {
        let g = eval_meijer_g(
            1,
            3,
            &[0.0, 1.0, 1.0],
            &[1.0, 0.0, 0.0, 0.0],
            z,
            1e-11,
        )
        .unwrap();
        let reference = -(exp_integral_ei(-z).unwrap() - z.ln() - EULER_MASCHERONI);
        assert!(
            (g.value - reference).abs() < 1e-9 * (reference.abs() + 1e-3),
            "relay kernel, z={z}: {} vs {reference}",
            g.value
        );
    }
}

/// The sum-combiner kernel as a raw spec: strip between the rightmost
/// lower pole at -1 and the leftmost upper pole at 0.
fn sum_kernel_spec() -> FoxHSpec {
    FoxHSpec {
        m: 1,
        n: 2,
        upper: vec![(1.0, 1.0), (1.0, 1.0), (1.0, 1.0)],
        lower: vec![(1.0, 1.0), (0.0, 1.0)],
    }
}

#[test]
fn value_is_invariant_to_contour_placement() {
    let h = validate_foxh(&sum_kernel_spec()).unwrap();
    let z = 2.0;
    let reference = -exp_integral_ei(-0.5).unwrap();
    let mut values = Vec::new();
    for offset in [-0.7, -0.5, -0.3] {
        let contour = ContourSpec {
            offset,
            half_extent: 40.0,
            node_count: 1280,
        };
        let hv = eval_foxh(&h, z, &contour, 1e-11).unwrap();
        assert!(
            (hv.value - reference).abs() < 1e-9 * reference.abs(),
            "offset {offset}: {} vs {reference}",
            hv.value
        );
        values.push(hv.value);
    }
    let spread = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    assert!(spread.1 - spread.0 < 1e-9 * reference.abs());
}

#[test]
fn halving_the_node_spacing_stays_inside_the_estimate() {
    let h = validate_foxh(&sum_kernel_spec()).unwrap();
    for z in [0.7, 3.0] {
        let coarse = eval_foxh(
            &h,
            z,
            &ContourSpec {
                offset: -0.5,
                half_extent: 40.0,
                node_count: 640,
            },
            1e-9,
        )
        .unwrap();
        let fine = eval_foxh(
            &h,
            z,
            &ContourSpec {
                offset: -0.5,
                half_extent: 40.0,
                node_count: 1280,
            },
            1e-9,
        )
        .unwrap();
        assert!(
            (coarse.value - fine.value).abs() <= 2.0 * coarse.error_estimate + 1e-13,
            "z={z}: drift {} vs estimate {}",
            (coarse.value - fine.value).abs(),
            coarse.error_estimate
        );
    }
}
