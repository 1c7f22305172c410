//! Independent re-derivations of values the library computes another way.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refvw::lambdaring::{en_lhs, en_rhs};
use refvw::qseries::{delta_tilde, hilb_chi};
use refvw::scalar::{quantum_integer, sign_pow, ParamPoly, RatFunc, Q};
use refvw::wallcross::{pairs_from_vw, ChargeProfile};

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn elementary(xs: &[Q], k: usize) -> Q {
    let mut e = vec![Q::zero(); k + 1];
    e[0] = Q::one();
    for x in xs {
        for j in (1..=k).rev() {
            let prev = e[j - 1].clone();
            e[j] += prev * x;
        }
    }
    e[k].clone()
}

fn complete(xs: &[Q], k: usize) -> Q {
    let mut h = vec![Q::zero(); k + 1];
    h[0] = Q::one();
    for x in xs {
        for j in 1..=k {
            let prev = h[j - 1].clone();
            h[j] += prev * x;
        }
    }
    h[k].clone()
}

/// Both sides of the degeneracy-locus identity evaluated directly on numeric roots.
fn en_numeric(x: &[Q], y: &[Q]) -> (Q, Q) {
    let (r0, r1) = (x.len(), y.len());
    let det0: Q = x.iter().fold(Q::one(), |a, b| a * b);
    let det1: Q = y.iter().fold(Q::one(), |a, b| a * b);
    let yinv: Vec<Q> = y.iter().map(|v| Q::one() / v).collect();
    let mut lhs = Q::zero();
    for i in 0..=r1 {
        let push = if i == 0 {
            Q::one()
        } else if i < r0 {
            Q::zero()
        } else {
            qi(sign_pow(r0 as i64 - 1)) * complete(x, i - r0) * &det0
        };
        lhs += qi(sign_pow(i as i64)) * elementary(&yinv, i) * push;
    }
    // [u^r] prod(1 + u y) / prod(1 + u x)
    let r = r1 - r0;
    let mut lam = Q::zero();
    for j in 0..=r {
        lam += elementary(y, r - j) * qi(sign_pow(j as i64)) * complete(x, j);
    }
    (lhs, Q::one() - det0 / det1 * lam)
}

#[test]
fn degeneracy_locus_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r1 in 1..=4 {
        for r0 in 1..=r1 {
            let lhs_poly = en_lhs(r0, r1);
            let rhs_poly = en_rhs(r0, r1);
            for _ in 0..3 {
                let pt: Vec<Q> = (0..r0 + r1)
                    .map(|_| Q::new(rng.gen_range(1..=9).into(), rng.gen_range(1..=7).into()))
                    .collect();
                let (l, r) = en_numeric(&pt[..r0], &pt[r0..]);
                assert_eq!(l, r, "numeric identity r0={r0} r1={r1}");
                assert_eq!(lhs_poly.eval(&pt), l, "lhs r0={r0} r1={r1}");
                assert_eq!(rhs_poly.eval(&pt), r, "rhs r0={r0} r1={r1}");
            }
        }
    }
}

/// Integer expansion of `q prod (1-q^k)^20 (1-t q^k)^2 (1-t^-1 q^k)^2`, keyed by `(q, t)`.
fn delta_brute(max_q: i64) -> BTreeMap<(i64, i64), i64> {
    let mut acc: BTreeMap<(i64, i64), i64> = BTreeMap::from([((1, 0), 1)]);
    let mul = |acc: &BTreeMap<(i64, i64), i64>, k: i64, te: i64| {
        let mut out = acc.clone();
        for (&(qe, tx), &c) in acc {
            if qe + k <= max_q {
                *out.entry((qe + k, tx + te)).or_insert(0) -= c;
            }
        }
        out.retain(|_, v| *v != 0);
        out
    };
    for k in 1..max_q {
        for _ in 0..20 {
            acc = mul(&acc, k, 0);
        }
        for _ in 0..2 {
            acc = mul(&acc, k, 1);
            acc = mul(&acc, k, -1);
        }
    }
    acc
}

#[test]
fn jacobi_form_by_brute_force() {
    let order = 7;
    let brute = delta_brute(order);
    let d = delta_tilde(order).unwrap();
    for e in 1..=order {
        let mut want = RatFunc::zero();
        for (&(qe, tx), &c) in &brute {
            if qe == e {
                want = &want + &(&RatFunc::from_int(c) * &RatFunc::t_pow(tx));
            }
        }
        assert_eq!(d.coeff(e).unwrap(), want, "q^{e}");
    }
    let q2: RatFunc = "-(20 + 2*t + 2/t)".parse().unwrap();
    assert_eq!(d.coeff(2).unwrap(), q2);
}

#[test]
fn hilbert_square_of_k3_from_hodge_numbers() {
    // h^{p,q} of the Hilbert square of a K3 surface
    let h: [[i64; 5]; 5] = [
        [1, 0, 1, 0, 1],
        [0, 21, 0, 21, 0],
        [1, 0, 232, 0, 1],
        [0, 21, 0, 21, 0],
        [1, 0, 1, 0, 1],
    ];
    let mut want = RatFunc::zero();
    for (p, row) in h.iter().enumerate() {
        let chi_p: i64 = row.iter().enumerate().map(|(q, x)| sign_pow(q as i64) * x).sum();
        want = &want + &(&RatFunc::from_int(sign_pow(p as i64) * chi_p) * &RatFunc::t_pow(p as i64));
    }
    // chi_{-t} = sum (-t)^p chi(Omega^p)
    assert_eq!(hilb_chi(2, 2).unwrap(), want);
    assert_eq!(want.eval_at_t1().unwrap(), ParamPoly::from_int(324));
}

#[test]
fn bar_is_substitution() {
    let f: RatFunc = "(2*g - s^3 + 5*s^-1)/(qint(3)*(1 + t))".parse().unwrap();
    let by_hand: RatFunc = "(2*g - s^-3 + 5*s)/(qint(3)*(1 + 1/t))".parse().unwrap();
    assert_eq!(f.bar(), by_hand);
    assert_eq!(f.bar().bar(), f);
}

#[test]
fn three_charges_by_hand() {
    let chi = BTreeMap::from([(1, 2), (2, 3), (3, -4)]);
    let profile = ChargeProfile { divisibility: 3, chi_of_multiple: chi.clone(), hzero: true };
    let vw: BTreeMap<u32, RatFunc> = BTreeMap::from([
        (1, "g".parse().unwrap()),
        (2, "1/qint(2)".parse().unwrap()),
        (3, "t".parse().unwrap()),
    ]);
    let signed = |m: u32| &(&RatFunc::from_int(sign_pow(chi[&m])) * &quantum_integer(chi[&m])) * &vw[&m];
    let (a, b, c) = (signed(1), signed(2), signed(3));
    // (3), (1,2), (2,1), (1,1,1)
    let half = RatFunc::from_q(Q::new(1.into(), 2.into()));
    let sixth = RatFunc::from_q(Q::new(1.into(), 6.into()));
    let want = &(&(-c) + &(&half * &(&RatFunc::from_int(2) * &(&a * &b)))) - &(&sixth * &(&(&a * &a) * &a));
    assert_eq!(pairs_from_vw(&profile, &vw).unwrap(), want);
}
