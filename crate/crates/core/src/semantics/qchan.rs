//! Quantum channels between finite-dimensional systems.
//!
//! A channel `n → m` is kept as a Stinespring isometry `V : C^n → C^m ⊗ C^e`
//! with the environment traced out; isometry channels have `e = 1`, and
//! discarding a system moves it into the environment.

use super::{Backend, Distance, Result, SemError};
use crate::quantale::QuantaleKind;
use crate::quantum::{c, diamond_distance_stinespring, is_isometry, CMatrix, DiamondOpts};

#[derive(Clone, Debug)]
pub struct Stinespring {
    pub n: usize,
    pub m: usize,
    pub env: usize,
    pub v: CMatrix,
}

impl Stinespring {
    /// The channel `ρ ↦ TρT†`.
    pub fn isometry(t: CMatrix) -> Result<Stinespring> {
        if !is_isometry(&t, 1e-9) {
            return Err(SemError::Other("matrix is not an isometry".into()));
        }
        Ok(Stinespring { n: t.ncols(), m: t.nrows(), env: 1, v: t })
    }
}

#[derive(Clone, Debug)]
pub struct QChan {
    pub opts: DiamondOpts,
    pub tol: f64,
}

impl Default for QChan {
    fn default() -> Self {
        QChan { opts: DiamondOpts::default(), tol: 1e-6 }
    }
}

fn permutation(n: usize, map: impl Fn(usize) -> usize) -> CMatrix {
    let mut p = CMatrix::zeros(n, n);
    for i in 0..n {
        p[(map(i), i)] = c(1.0, 0.0);
    }
    p
}

impl Backend for QChan {
    type Obj = usize;
    type Mor = Stinespring;

    fn name(&self) -> &'static str {
        "qchan"
    }

    fn quantale(&self) -> QuantaleKind {
        QuantaleKind::Lawvere
    }

    fn tolerance(&self) -> f64 {
        self.tol
    }

    fn unit(&self) -> usize {
        1
    }

    fn tensor_obj(&self, a: &usize, b: &usize) -> usize {
        a * b
    }

    fn size(&self, a: &usize) -> usize {
        *a
    }

    fn dom(&self, f: &Stinespring) -> usize {
        f.n
    }

    fn cod(&self, f: &Stinespring) -> usize {
        f.m
    }

    fn relabel(&self, src: &usize, dst: &usize, map: &[usize]) -> Stinespring {
        debug_assert_eq!(src, dst);
        Stinespring { n: *src, m: *dst, env: 1, v: permutation(*src, |i| map[i]) }
    }

    fn compose(&self, f: &Stinespring, g: &Stinespring) -> Result<Stinespring> {
        if f.m != g.n {
            return Err(SemError::Compose(format!("{} -> {} with {} -> {}", f.n, f.m, g.n, g.m)));
        }
        let lifted = if f.env == 1 { g.v.clone() } else { g.v.kronecker(&CMatrix::identity(f.env, f.env)) };
        Ok(Stinespring { n: f.n, m: g.m, env: g.env * f.env, v: lifted * &f.v })
    }

    fn tensor(&self, f: &Stinespring, g: &Stinespring) -> Stinespring {
        let raw = f.v.kronecker(&g.v);
        let (m1, e1, m2, e2) = (f.m, f.env, g.m, g.env);
        let v = if e1 == 1 || m2 == 1 {
            raw
        } else {
            // (m1 e1)(m2 e2) -> (m1 m2)(e1 e2)
            let p = permutation(m1 * e1 * m2 * e2, |row| {
                let (a, b) = (row / (m2 * e2), row % (m2 * e2));
                let (o1, x1) = (a / e1, a % e1);
                let (o2, x2) = (b / e2, b % e2);
                (o1 * m2 + o2) * (e1 * e2) + x1 * e2 + x2
            });
            p * raw
        };
        Stinespring { n: f.n * g.n, m: m1 * m2, env: e1 * e2, v }
    }

    fn discard(&self, a: &usize) -> Result<Stinespring> {
        Ok(Stinespring { n: *a, m: 1, env: *a, v: CMatrix::identity(*a, *a) })
    }

    fn distance(&self, f: &Stinespring, g: &Stinespring) -> Result<Distance> {
        if f.n != g.n || f.m != g.m {
            return Err(SemError::Other("distance between channels of different types".into()));
        }
        let d = diamond_distance_stinespring(&f.v, f.env, &g.v, g.env, self.opts).map_err(|e| SemError::Other(e.to_string()))?;
        Ok(Distance::Approx(d))
    }

    fn describe(&self, f: &Stinespring) -> String {
        let mut out = format!("{} -> {} (environment {})\n", f.n, f.m, f.env);
        for r in 0..f.v.nrows().min(16) {
            let row: Vec<String> = (0..f.v.ncols()).map(|k| format!("{:.4}{:+.4}i", f.v[(r, k)].re, f.v[(r, k)].im)).collect();
            out.push_str(&format!("  [{}]\n", row.join(", ")));
        }
        out
    }
}
