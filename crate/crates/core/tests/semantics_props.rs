use num::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlam_core::gen::{gen_theory, TermGen};
use vlam_core::quantum::{c, CMatrix, DiamondOpts};
use vlam_core::semantics::{exch, Backend, Distance, FinVCat, Interpretation, MeasL1, QChan, SemError, Space, Stinespring, Support};
use vlam_core::typing::{derive, exchange};
use vlam_core::{QuantaleKind, Theory};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn is_top(d: &Distance, tol: f64) -> bool {
    match d {
        Distance::Exact(q) => q.is_top(),
        Distance::Approx(x) => *x <= tol,
    }
}

/// `a ⊗ b ≤ d` in the quantale order.
fn tensor_below(a: &Distance, b: &Distance, d: &Distance, tol: f64) -> bool {
    match (a, b, d) {
        (Distance::Exact(a), Distance::Exact(b), Distance::Exact(d)) => a.tensor(b).unwrap().leq(d).unwrap(),
        _ => d.to_f64() <= a.to_f64() + b.to_f64() + tol,
    }
}

/// Parallel `f : A -> B` (three of them), `g : B -> C` (two), and `h : C -> D`.
struct Triple<M> {
    f: [M; 3],
    g: [M; 2],
    h: M,
}

/// Equal morphisms, decided by the backend's distance.
fn same_by_distance<B: Backend>(b: &B, tol: f64) -> impl Fn(&B::Mor, &B::Mor) -> bool + '_ {
    move |x, y| is_top(&b.distance(x, y).unwrap(), tol)
}

/// The Choi matrix `Σ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, which determines the channel.
fn choi(f: &Stinespring) -> CMatrix {
    let (n, m, e) = (f.n, f.m, f.env);
    CMatrix::from_fn(n * m, n * m, |r, s| {
        let (i, a, j, b) = (r / m, r % m, s / m, s % m);
        (0..e).map(|x| f.v[(a * e + x, i)] * f.v[(b * e + x, j)].conj()).sum()
    })
}

fn same_channel(x: &Stinespring, y: &Stinespring) -> bool {
    (x.n, x.m) == (y.n, y.m) && (choi(x) - choi(y)).norm() <= 1e-9
}

fn check_laws<B: Backend>(b: &B, t: &Triple<B::Mor>, same: &dyn Fn(&B::Mor, &B::Mor) -> bool, tol: f64) -> Result<(), String> {
    let comp = |x: &B::Mor, y: &B::Mor| b.compose(x, y).unwrap();
    let dist = |x: &B::Mor, y: &B::Mor| b.distance(x, y).unwrap();
    let [f0, f1, f2] = &t.f;
    let [g0, g1] = &t.g;
    let (a, bo) = (b.dom(f0), b.cod(f0));
    let eq = |what: &str, x: B::Mor, y: &B::Mor| if same(&x, y) { Ok(()) } else { Err(format!("{}: {what} fails", b.name())) };

    eq("left identity", comp(&b.id(&a), f0), f0)?;
    eq("right identity", comp(f0, &b.id(&bo)), f0)?;
    eq("associativity", comp(&comp(f0, g0), &t.h), &comp(f0, &comp(g0, &t.h)))?;
    eq("tensor of composites", b.tensor(&comp(f0, g0), &comp(f1, g1)), &comp(&b.tensor(f0, f1), &b.tensor(g0, g1)))?;
    eq("tensor of identities", b.tensor(&b.id(&a), &b.id(&bo)), &b.id(&b.tensor_obj(&a, &bo)))?;
    if !is_top(&dist(f1, f1), tol) {
        return Err(format!("{}: nonzero self distance", b.name()));
    }

    let (df, dg, dgf) = (dist(f0, f1), dist(g0, g1), dist(&comp(f0, g0), &comp(f1, g1)));
    if !tensor_below(&df, &dg, &dgf, tol) {
        return Err(format!("{}: composition is not nonexpansive: {df} and {dg} but {dgf}", b.name()));
    }
    let (d01, d12, d02) = (dist(f0, f1), dist(f1, f2), dist(f0, f2));
    if !tensor_below(&d01, &d12, &d02, tol) {
        return Err(format!("{}: triangle fails: {d01}, {d12}, {d02}", b.name()));
    }
    Ok(())
}

/// A random V-functor between chains: unit steps for metrics, monotone
/// steps for posets.
fn chain_map(b: &FinVCat, rng: &mut ChaCha8Rng, n: usize, m: usize, poset: bool) -> vlam_core::semantics::finvcat::FinMap {
    let mut table = Vec::with_capacity(n);
    let mut cur = rng.gen_range(0..m) as i64;
    for _ in 0..n {
        table.push(cur as usize);
        let step: i64 = if poset { rng.gen_range(0..=1) } else { rng.gen_range(-1..=1) };
        cur = (cur + step).clamp(0, m as i64 - 1);
    }
    let f = b.map(&Space::chain(n), &Space::chain(m), |i| table[i]);
    assert!(b.is_nonexpansive(&f));
    f
}

fn fin_triple(b: &FinVCat, seed: u64, poset: bool) -> Triple<vlam_core::semantics::finvcat::FinMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=5)).collect();
    let mut map = |i: usize| chain_map(b, &mut rng, dims[i], dims[i + 1], poset);
    Triple { f: [map(0), map(0), map(0)], g: [map(1), map(1)], h: map(2) }
}

fn support(n: usize) -> Support {
    Support::base((0..n).map(|i| format!("s{i}")).collect())
}

fn kernel(rng: &mut ChaCha8Rng, n: usize, m: usize) -> vlam_core::semantics::Kernel {
    let cols = (0..n)
        .map(|_| {
            let mut w: Vec<i64> = (0..m).map(|_| rng.gen_range(0..4)).collect();
            if w.iter().all(|&x| x == 0) {
                w[rng.gen_range(0..m)] = 1;
            }
            let total: i64 = w.iter().sum();
            w.into_iter().enumerate().map(|(i, x)| (i, BigRational::new(x.into(), total.into()))).collect()
        })
        .collect();
    let k = MeasL1.kernel(&support(n), &support(m), cols).unwrap();
    assert!(MeasL1.is_stochastic(&k));
    k
}

fn meas_triple(seed: u64) -> Triple<vlam_core::semantics::Kernel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=4)).collect();
    let mut k = |i: usize| kernel(&mut rng, dims[i], dims[i + 1]);
    Triple { f: [k(0), k(0), k(0)], g: [k(1), k(1)], h: k(2) }
}

/// A random `n x k` matrix with orthonormal columns.
fn isometry(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, k, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a.qr().q()
}

/// A qubit channel; one time in three it has a qubit of environment.
fn qubit_channel(rng: &mut ChaCha8Rng) -> Stinespring {
    if rng.gen_range(0..3) == 0 {
        Stinespring { n: 2, m: 2, env: 2, v: isometry(rng, 4, 2) }
    } else {
        Stinespring::isometry(isometry(rng, 2, 2)).unwrap()
    }
}

fn qchan() -> QChan {
    QChan { opts: DiamondOpts { starts: 3, seed: 7, tol: 1e-6 }, tol: 1e-6 }
}

fn qchan_triple(seed: u64) -> Triple<Stinespring> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = || qubit_channel(&mut rng);
    Triple { f: [q(), q(), q()], g: [q(), q()], h: q() }
}

#[test]
fn finmet_laws() {
    let b = FinVCat::metric();
    for seed in 0..1000 {
        check_laws(&b, &fin_triple(&b, seed, false), &same_by_distance(&b, 0.0), 0.0).unwrap();
    }
}

#[test]
fn finpos_laws() {
    let b = FinVCat::posets();
    for seed in 0..1000 {
        check_laws(&b, &fin_triple(&b, seed, true), &same_by_distance(&b, 0.0), 0.0).unwrap();
    }
}

#[test]
fn meas_laws() {
    for seed in 0..1000 {
        check_laws(&MeasL1, &meas_triple(seed), &same_by_distance(&MeasL1, 0.0), 0.0).unwrap();
    }
}

#[test]
fn qchan_laws() {
    let b = qchan();
    for seed in 0..1000 {
        check_laws(&b, &qchan_triple(seed), &same_channel, 1e-6).unwrap();
    }
}

/// The generator's signature over `chain(3)` or a three point support.
fn fin_model(th: &Theory) -> Interpretation<FinVCat> {
    let mut i = Interpretation::new(FinVCat::new(th.quantale));
    let x = Space::chain(3);
    i.grounds.insert("X".into(), x.clone());
    let ops = [
        ("k", i.backend.point(&x, 1)),
        ("m", i.backend.map(&Space::tensor(&x, &x), &x, |k| (k / 3).min(k % 3))),
        ("g", i.backend.map(&x, &x, |k| (k + 1).min(2))),
        ("e", i.backend.map(&x, &Space::unit(), |_| 0)),
    ];
    for (name, f) in ops {
        i.ops.insert(name.into(), f);
    }
    i.validate(th).unwrap();
    i
}

fn meas_model(th: &Theory, seed: u64) -> Interpretation<MeasL1> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut i = Interpretation::new(MeasL1);
    let x = support(3);
    i.grounds.insert("X".into(), x.clone());
    let mut k = kernel(&mut rng, 1, 3);
    k.dom = Support::Unit;
    let mut m = kernel(&mut rng, 9, 3);
    m.dom = Support::Tensor(Box::new(x.clone()), Box::new(x.clone()));
    i.ops.insert("k".into(), k);
    i.ops.insert("m".into(), m);
    i.ops.insert("g".into(), kernel(&mut rng, 3, 3));
    i.ops.insert("e".into(), MeasL1.discard(&x).unwrap());
    i.validate(th).unwrap();
    i
}

/// `[[Γ, y, x, Δ |- t]] ∘ exch = [[Γ, x, y, Δ |- t]]`, up to the backend's
/// tolerance. `Ok(false)` when the backend cannot interpret the term.
fn exchange_holds<B: Backend>(
    i: &Interpretation<B>,
    th: &Theory,
    seed: u64,
    affine: bool,
    same: &dyn Fn(&B::Mor, &B::Mor) -> bool,
) -> Result<bool, String> {
    let mut g = TermGen::new(seed);
    g.affine = affine;
    g.type_depth = 1;
    let (ctx, t, _) = g.judgement(4, 6);
    if ctx.len() < 2 {
        return Ok(false);
    }
    let d = derive(th, &ctx, &t).unwrap();
    let k = seed as usize % (ctx.len() - 1);
    let swapped = exchange(&d, k).unwrap();
    let run = || -> Result<(B::Mor, B::Mor), SemError> {
        let direct = i.interpret(&d)?;
        let via = i.backend.compose(&i.plan(&exch(&ctx, k))?, &i.interpret(&swapped)?)?;
        Ok((direct, via))
    };
    match run() {
        Ok((direct, via)) if same(&direct, &via) => Ok(true),
        Ok(_) => Err(format!("{ctx} |- {t}: exchange at {k} fails")),
        Err(SemError::Missing { .. } | SemError::Limit(_)) => Ok(false),
        Err(e) => Err(format!("{ctx} |- {t}: {e}")),
    }
}

#[test]
fn exchange_is_sound_in_every_backend() {
    let mut interpreted = [0; 3];
    for affine in [false, true] {
        for kind in [QuantaleKind::Lawvere, QuantaleKind::Boolean] {
            let th = gen_theory(kind, affine);
            let fin = fin_model(&th);
            for seed in 0..300 {
                interpreted[0] += exchange_holds(&fin, &th, seed, affine, &same_by_distance(&fin.backend, 0.0)).unwrap() as usize;
            }
        }
        let th = gen_theory(QuantaleKind::Lawvere, affine);
        for seed in 0..300 {
            let meas = meas_model(&th, seed);
            interpreted[1] += exchange_holds(&meas, &th, seed, affine, &same_by_distance(&MeasL1, 0.0)).unwrap() as usize;
        }
    }
    // qchan lacks internal homs, so only first-order judgements get through
    let th = gen_theory(QuantaleKind::Lawvere, true);
    let mut q = Interpretation::new(qchan());
    q.grounds.insert("X".into(), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    q.ops.insert("k".into(), Stinespring::isometry(isometry(&mut rng, 2, 1)).unwrap());
    q.ops.insert("m".into(), Stinespring { n: 4, m: 2, env: 2, v: isometry(&mut rng, 4, 4) });
    q.ops.insert("g".into(), qubit_channel(&mut rng));
    q.ops.insert("e".into(), q.backend.discard(&2).unwrap());
    q.validate(&th).unwrap();
    for seed in 0..150 {
        interpreted[2] += exchange_holds(&q, &th, seed, true, &same_channel).unwrap() as usize;
    }
    assert!(interpreted.iter().all(|&n| n >= 20), "too few interpretable judgements: {interpreted:?}");
}

proptest! {
    #![proptest_config(config(200))]

    /// Every morphism into `I` is the discard map.
    #[test]
    fn unit_is_terminal_in_affine_backends(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let fin = FinVCat::metric();
        let n = rng.gen_range(1..6);
        let f = fin.map(&Space::chain(n), &Space::unit(), |_| 0);
        prop_assert!(is_top(&fin.distance(&f, &fin.discard(&Space::chain(n)).unwrap()).unwrap(), 0.0));

        let mut k = kernel(&mut rng, n, 1);
        k.cod = Support::Unit;
        prop_assert!(is_top(&MeasL1.distance(&k, &MeasL1.discard(&support(n)).unwrap()).unwrap(), 0.0));
        let g = kernel(&mut rng, 3, n);
        let through = MeasL1.compose(&g, &MeasL1.discard(&support(n)).unwrap()).unwrap();
        prop_assert!(is_top(&MeasL1.distance(&through, &MeasL1.discard(&support(3)).unwrap()).unwrap(), 0.0));

        let q = qchan();
        let e = rng.gen_range(1..4);
        let to_unit = Stinespring { n: 2, m: 1, env: 2 * e, v: isometry(&mut rng, 2 * e, 2) };
        prop_assert!(q.distance(&to_unit, &q.discard(&2).unwrap()).unwrap().to_f64() <= 1e-6);
        let ch = qubit_channel(&mut rng);
        let through = q.compose(&ch, &q.discard(&2).unwrap()).unwrap();
        prop_assert!(q.distance(&through, &q.discard(&2).unwrap()).unwrap().to_f64() <= 1e-6);
    }
}
