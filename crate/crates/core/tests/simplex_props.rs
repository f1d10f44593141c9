mod common;

use common::{interior, vec_close, with_zeros};
use egr::simplex::{closure, composite, normalize, perturb, power, subtract};
use egr::{CompositeSpec, Weights};
use proptest::prelude::*;

proptest! {
    #[test]
    fn perturbation_is_an_abelian_group((x, y, z) in (2usize..7).prop_flat_map(|n| (interior(n), interior(n), interior(n)))) {
        let e = Weights::barycenter(x.len()).unwrap();
        let xy = perturb(&x, &y, &e).unwrap();
        prop_assert!(vec_close(&xy, &perturb(&y, &x, &e).unwrap(), 1e-14));
        let left = perturb(&xy, &z, &e).unwrap();
        let right = perturb(&x, &perturb(&y, &z, &e).unwrap(), &e).unwrap();
        prop_assert!(vec_close(&left, &right, 1e-13));
        prop_assert!(vec_close(&perturb(&x, &e, &e).unwrap(), &x, 1e-14));
        let back = perturb(&subtract(&x, &y, &e).unwrap(), &y, &e).unwrap();
        prop_assert!(vec_close(&back, &x, 1e-13));
        prop_assert!(vec_close(&subtract(&x, &x, &e).unwrap(), &e, 1e-14));
    }

    #[test]
    fn powering_distributes((x, y) in (2usize..6).prop_flat_map(|n| (interior(n), interior(n))), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let e = Weights::barycenter(x.len()).unwrap();
        let lhs = power(a + b, &x).unwrap();
        let rhs = perturb(&power(a, &x).unwrap(), &power(b, &x).unwrap(), &e).unwrap();
        prop_assert!(vec_close(&lhs, &rhs, 1e-12));
        let lhs = power(a, &perturb(&x, &y, &e).unwrap()).unwrap();
        let rhs = perturb(&power(a, &x).unwrap(), &power(a, &y).unwrap(), &e).unwrap();
        prop_assert!(vec_close(&lhs, &rhs, 1e-12));
        prop_assert!(vec_close(&power(a * b, &x).unwrap(), &power(a, &power(b, &x).unwrap()).unwrap(), 1e-12));
        prop_assert!(vec_close(&power(1.0, &x).unwrap(), &x, 1e-14));
        prop_assert!(vec_close(&power(0.0, &x).unwrap(), &e, 1e-15));
    }

    #[test]
    fn closure_is_idempotent_and_scale_free(
        (pi, x) in (1usize..8).prop_flat_map(|n| (with_zeros(n), prop::collection::vec(0.01f64..10.0, n))),
        c in 0.1f64..10.0,
    ) {
        let once = closure(&x, &pi).unwrap();
        prop_assert!(vec_close(&closure(&once, &pi).unwrap(), &once, 1e-15));
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        prop_assert!(vec_close(&closure(&scaled, &pi).unwrap(), &once, 1e-15));
        prop_assert_eq!(once.support(), pi.support());
        prop_assert!((once.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composite_block_masses(
        (outer, blocks) in (1usize..5).prop_flat_map(|n| {
            (with_zeros(n), prop::collection::vec((1usize..5).prop_flat_map(interior), n))
        }),
    ) {
        let spec = CompositeSpec::new(outer.clone(), blocks.clone(), None).unwrap();
        let c = composite(&spec).unwrap();
        prop_assert_eq!(c.len(), blocks.iter().map(|b| b.len()).sum::<usize>());
        let mut offset = 0;
        for (i, b) in blocks.iter().enumerate() {
            let mass: f64 = c[offset..offset + b.len()].iter().sum();
            prop_assert!((mass - outer[i]).abs() < 1e-14);
            offset += b.len();
        }
    }
}

#[test]
fn closure_rejects_zero_on_support() {
    let pi = normalize(&[1.0, 1.0]).unwrap();
    assert!(matches!(
        closure(&[1.0, 0.0], &pi),
        Err(egr::Error::ZeroOnSupport { index: 1 })
    ));
}
