use lorentz2d::hardy::{midpoints, Operator};
use lorentz2d::norms::{lambda2_norm, mixed_norm, MixedOrder};
use lorentz2d::rearrange::{equimeasurable, rearrange_x, rearrange_y, rearrange_yx};
use lorentz2d::staircase::{enumerate_staircases, staircase_count};
use lorentz2d::{GridFunction2D, Weight1D, Weight2D};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = GridFunction2D> {
    (
        1usize..6,
        1usize..6,
        prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
    )
        .prop_flat_map(|(m, n, h)| {
            prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..5.0], m * n)
                .prop_map(move |v| GridFunction2D::new(h, 1.0, m, n, v).unwrap())
        })
}

fn grid_pair() -> impl Strategy<Value = (GridFunction2D, GridFunction2D)> {
    grid().prop_flat_map(|f| {
        let (m, n) = f.shape();
        (Just(f), prop::collection::vec(0.0f64..5.0, m * n)).prop_map(|(f, v)| {
            let g = f.with_values(v).unwrap();
            (f, g)
        })
    })
}

proptest! {
    #[test]
    fn rearrangements_are_equimeasurable_and_decreasing(f in grid()) {
        let r = rearrange_yx(&f);
        prop_assert!(equimeasurable(&f, &r).unwrap());
        prop_assert!(r.is_doubly_decreasing());
        prop_assert_eq!(rearrange_yx(&r), r.clone());
        prop_assert_eq!(rearrange_x(&rearrange_y(&f)), r);
    }

    #[test]
    fn hardy_chain_at_midpoints((f, g) in grid_pair()) {
        let (a, b) = f.extent();
        let (m, n) = f.shape();
        let h = f.add(&g).unwrap();
        let r = rearrange_yx(&f);
        let (ss, sy) = (Operator::FStarStar.evaluator(&f), Operator::S21.evaluator(&f));
        let sy_g = Operator::S21.evaluator(&g);
        let sy_h = Operator::S21.evaluator(&h);
        for (k, (s, t)) in midpoints(a, b, m, n).into_iter().enumerate() {
            let yx = sy.eval(s, t);
            prop_assert!(r.get(k / n, k % n) <= yx * (1.0 + 1e-12));
            prop_assert!(yx <= ss.eval(s, t) * (1.0 + 1e-12));
            prop_assert!(sy_h.eval(s, t) <= (yx + sy_g.eval(s, t)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lambda2_is_homogeneous(f in grid(), c in 0.1f64..10.0, p in 0.5f64..3.0) {
        let w = Weight2D::product(Weight1D::power(1.0, -0.5).unwrap(), Weight1D::one());
        let a = lambda2_norm(&f.scale(c).unwrap(), &w, p).unwrap();
        let b = c * lambda2_norm(&f, &w, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0));
    }

    #[test]
    fn mixed_norm_below_lorentz_for_decreasing_outer_weight(f in grid(), p in 1.0f64..3.0) {
        let u = Weight1D::indicator(1.5).unwrap();
        let v = Weight1D::power(1.0, 0.5).unwrap();
        let mixed = mixed_norm(&f, &u, &v, p, p, MixedOrder::YThenX).unwrap();
        let l2 = lambda2_norm(&f, &Weight2D::product(u, v), p).unwrap();
        prop_assert!(mixed <= l2 * (1.0 + 1e-9));
    }

    #[test]
    fn staircase_enumeration_count(m in 1usize..7, n in 1usize..7) {
        prop_assert_eq!(enumerate_staircases(m, n).count() as u128, staircase_count(m, n));
    }
}
