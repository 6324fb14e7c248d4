use proptest::prelude::*;

use hurwitz::algebra::{as_reduce, is_exact, residue_at, wp, Field, Point, Poly, RatFunc};
use hurwitz::forms::{exact_form_exists, normalize_type, FormConfig, FormType};
use hurwitz::swan::{degeneration_type_of, Cover};
use hurwitz::valuation::{gauss_valuation, BivRat, Place, TPoly};
use hurwitz::Q;

fn field() -> impl Strategy<Value = Field> {
    prop_oneof![Just((2, 1)), Just((3, 1)), Just((5, 1)), Just((7, 1)), Just((2, 2)), Just((3, 2))]
        .prop_map(|(p, m)| Field::new(p, m).unwrap())
}

fn poly(f: Field, codes: &[u32]) -> Poly {
    Poly::new(f, codes.iter().map(|&c| f.from_code(c % f.q())).collect())
}

prop_compose! {
    fn ratfunc()(f in field(), num in prop::collection::vec(any::<u32>(), 0..7), den in prop::collection::vec(any::<u32>(), 1..6))
        -> RatFunc {
        let mut d = den;
        let top = d.len() - 1;
        d[top] = d[top] % (f.q() - 1) + 1;
        RatFunc::new(poly(f, &num), poly(f, &d))
    }
}

// Denominators that split over the field, so every residue is at a rational point.
prop_compose! {
    fn split_ratfunc()(f in field(), num in prop::collection::vec(any::<u32>(), 0..8), roots in prop::collection::vec((any::<u32>(), 1u64..4), 1..4))
        -> (RatFunc, Vec<u32>) {
        let mut den = Poly::one(f);
        for &(a, e) in &roots {
            den = &den * &Poly::linear(f, f.from_code(a % f.q())).pow(e);
        }
        (RatFunc::new(poly(f, &num), den), roots.iter().map(|r| r.0 % f.q()).collect())
    }
}

fn bivariate(p: u32, terms: &[(u32, u32, u32)]) -> String {
    let body: Vec<String> = terms.iter().filter(|t| t.0 % p != 0).map(|&(c, k, i)| format!("{}*t^{k}*X^{i}", c % p)).collect();
    if body.is_empty() {
        "1".into()
    } else {
        body.join("+")
    }
}

fn place(f: Field, num: i64, den: i64, z: Option<(u32, usize)>) -> Place {
    let z = z.map_or(Poly::zero(f), |(c, k)| Poly::monomial(f, f.from_code(c % f.q()), k));
    Place::new(TPoly::new(1, z), Q::new(num, den)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn derivatives_are_exact(g in ratfunc()) {
        let w = g.derivative();
        let e = is_exact(&w);
        prop_assert!(e.exact);
        prop_assert_eq!(e.antiderivative.unwrap().derivative(), w);
    }

    #[test]
    fn residues_sum_to_zero((r, roots) in split_ratfunc()) {
        let f = r.field();
        let mut total = residue_at(&r, Point::Infinity);
        let mut seen = std::collections::BTreeSet::new();
        for c in roots {
            if seen.insert(c) {
                total = f.add(total, residue_at(&r, Point::Finite(f.from_code(c))));
            }
        }
        prop_assert!(total.is_zero());
    }

    #[test]
    fn reduction_changes_f_by_wp(g in ratfunc()) {
        let r = as_reduce(&g);
        let back = &(&r.reduced - &wp(&r.witness)) + &RatFunc::constant(g.field(), r.dropped_constant);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn gauss_valuation_is_multiplicative(
        p in prop::sample::select(vec![2u32, 3, 5, 7]),
        a in prop::collection::vec((1u32..7, 0u32..4, 0u32..4), 1..4),
        b in prop::collection::vec((1u32..7, 0u32..4, 0u32..3), 1..4),
        s in (0i64..13, 1i64..4),
        z in prop::option::of((1u32..7, 1usize..4)),
    ) {
        let f = Field::prime(p).unwrap();
        let x = BivRat::parse(&bivariate(p, &a), f).unwrap();
        let y = BivRat::parse(&bivariate(p, &b), f).unwrap();
        prop_assume!(!x.is_zero() && !y.is_zero());
        let pl = place(f, s.0, s.1, z);
        let (vx, vy) = (gauss_valuation(&x, &pl).unwrap(), gauss_valuation(&y, &pl).unwrap());
        prop_assert_eq!(gauss_valuation(&x.mul(&y), &pl).unwrap(), vx + vy);
        prop_assert_eq!(gauss_valuation(&x.div(&y), &pl).unwrap(), vx - vy);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn degeneration_is_wp_invariant(
        cover in prop::sample::select(vec![
            "p=5; F=(-2*X+t^10)/((-2)*X^5*(X-t^10)^2*(X-t^5)^5)",
            "p=2; F=1/(X*(X-t^2))",
            "p=3; F=1/(X^2*(X-t)^2*(X+t))",
        ]),
        lin in prop::collection::vec((1u32..5, 0u32..3, 0u32..2), 1..3),
        pole in (1u32..5, 0u32..3, 1u32..3),
        s in (0i64..13, 1i64..3),
    ) {
        let c = Cover::parse(cover).unwrap();
        let f = c.field();
        let p = f.p();
        let w = format!("{}+{}/X^{}", bivariate(p, &lin), bivariate(p, &[(pole.0, pole.1, 0)]), pole.2);
        let w = BivRat::parse(&w, f).unwrap();
        let pl = place(f, s.0, s.1, None);
        let a = degeneration_type_of(c.rhs(), &pl).unwrap();
        let b = degeneration_type_of(&c.rhs().add(&w.wp()), &pl).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn exactness_ignores_order_and_p_shifts(
        p in prop::sample::select(vec![3u32, 5, 7]),
        entries in prop::collection::vec(2u64..7, 1..5),
        shifts in prop::collection::vec(0u64..2, 5),
        rotate in 0usize..5,
    ) {
        let entries: Vec<u64> = entries.into_iter().filter(|h| h % p as u64 != 1).collect();
        prop_assume!(!entries.is_empty());
        let cfg = FormConfig::default();
        let base = exact_form_exists(&FormType::new(p, &entries).unwrap(), &cfg).unwrap().exists;
        let mut moved: Vec<u64> = entries.iter().zip(&shifts).map(|(h, k)| h + k * p as u64).collect();
        let n = moved.len();
        moved.rotate_left(rotate % n);
        let t = FormType::new(p, &moved).unwrap();
        prop_assert_eq!(normalize_type(&t), normalize_type(&FormType::new(p, &entries).unwrap()));
        prop_assert_eq!(exact_form_exists(&t, &cfg).unwrap().exists, base);
    }
}
