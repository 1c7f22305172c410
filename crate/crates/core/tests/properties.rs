use std::collections::BTreeMap;

use proptest::prelude::*;
use refvw::scalar::{quantum_integer, Param, ParamPoly, RatFunc};
use refvw::wallcross::{pairs_from_vw, vw_from_pairs, ChargeProfile};

/// `(sum c_i s^e_i + k g) / prod [n_j]`
fn ratfunc() -> impl Strategy<Value = RatFunc> {
    ratfunc_with_g(-2..=2)
}

fn ratfunc_with_g(g: std::ops::RangeInclusive<i64>) -> impl Strategy<Value = RatFunc> {
    (
        prop::collection::vec((-4i64..=4, -5i64..=5), 0..4),
        g,
        prop::collection::vec(1i64..=4, 0..3),
    )
        .prop_map(|(terms, k, dens)| {
            let mut num = &RatFunc::from_param(ParamPoly::var(Param::G)) * &RatFunc::from_int(k);
            for (c, e) in terms {
                num = &num + &(&RatFunc::from_int(c) * &RatFunc::s_pow(e));
            }
            dens.into_iter().fold(num, |acc, n| acc.checked_div(&quantum_integer(n)).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms_and_bar(a in ratfunc(), b in ratfunc(), c in ratfunc(), d in ratfunc_with_g(0..=0)) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if !d.is_zero() {
            prop_assert_eq!(&a.checked_div(&d).unwrap() * &d, a.clone());
        }
        prop_assert_eq!(a.bar().bar(), a.clone());
        prop_assert_eq!((&a * &b).bar(), &a.bar() * &b.bar());
        prop_assert_eq!((&a + &b).bar(), &a.bar() + &b.bar());
        prop_assert_eq!((&a * &a.bar()).is_symmetric(), true);
    }

    #[test]
    fn wall_crossing_inverts(
        chis in prop::collection::vec(prop_oneof![-6i64..=-1, 1i64..=6], 1..=4),
        vws in prop::collection::vec(ratfunc(), 4),
    ) {
        let n = chis.len() as u32;
        let chi: BTreeMap<u32, i64> = (1..=n).zip(chis).collect();
        let vw: BTreeMap<u32, RatFunc> = (1..=n).zip(vws).collect();
        let mut pairs = BTreeMap::new();
        for level in 1..=n {
            let p = ChargeProfile { divisibility: level, chi_of_multiple: chi.clone(), hzero: true };
            pairs.insert(level, pairs_from_vw(&p, &vw).unwrap());
        }
        let top = ChargeProfile { divisibility: n, chi_of_multiple: chi, hzero: true };
        prop_assert_eq!(vw_from_pairs(&top, &pairs).unwrap(), vw);
    }
}
