//! Helpers shared by the integration suites.
#![allow(dead_code)]

use num::BigRational;
use rand::Rng;
use vlam_core::quantale::Ext;
use vlam_core::{QValue, QuantaleKind};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// A random value of `kind`, biased towards small denominators and the
/// lattice extremes.
pub fn sample_value(rng: &mut impl Rng, kind: QuantaleKind) -> QValue {
    let roll = rng.gen_range(0..20);
    match kind {
        QuantaleKind::Boolean => QValue::boolean(rng.gen_bool(0.5)),
        QuantaleKind::Lawvere | QuantaleKind::Ultrametric => {
            let v = match roll {
                0 => Ext::Inf,
                1 => Ext::zero(),
                _ => Ext::Fin(rat(rng.gen_range(0..60), rng.gen_range(1..13))),
            };
            QValue::new(kind, v).unwrap()
        }
        QuantaleKind::Goedel => {
            let v = match roll {
                0 => Ext::zero(),
                1 => Ext::one(),
                _ => {
                    let d = rng.gen_range(1..13);
                    Ext::Fin(rat(rng.gen_range(0..=d), d))
                }
            };
            QValue::new(kind, v).unwrap()
        }
    }
}

/// Every quantale law on one sample: three values and a finite set.
pub fn check_laws(a: &QValue, b: &QValue, c: &QValue, set: &[QValue]) -> Result<(), String> {
    let kind = a.kind();
    let t = |x: &QValue, y: &QValue| x.tensor(y).unwrap();
    let le = |x: &QValue, y: &QValue| x.leq(y).unwrap();
    let fail = |what: &str| Err(format!("{}: {what} fails at a={a}, b={b}, c={c}, S={set:?}", kind.name()));

    if t(a, &t(b, c)) != t(&t(a, b), c) {
        return fail("associativity");
    }
    if t(a, b) != t(b, a) {
        return fail("commutativity");
    }
    if t(a, &kind.unit()) != *a {
        return fail("unit");
    }
    if kind.unit() != kind.top() {
        return fail("integrality");
    }
    if le(a, b) && !le(&t(a, c), &t(b, c)) {
        return fail("monotonicity");
    }
    if a.way_below(b).unwrap() && !le(a, b) {
        return fail("way-below implies below");
    }
    if !le(&kind.bottom(), a) || !le(a, &kind.top()) {
        return fail("bounds");
    }
    let j = kind.join(set.iter()).unwrap();
    if !set.iter().all(|x| le(x, &j)) {
        return fail("join is an upper bound");
    }
    // least among sampled upper bounds
    for u in set.iter().chain([a, b, c]) {
        if set.iter().all(|x| le(x, u)) && !le(&j, u) {
            return fail("join is least");
        }
    }
    let lhs = t(a, &j);
    let products: Vec<QValue> = set.iter().map(|x| t(a, x)).collect();
    if lhs != kind.join(products.iter()).unwrap() {
        return fail("distributivity over joins");
    }
    Ok(())
}
