//! Signed measures on finite supports, with kernels as exact sparse
//! matrices.
//!
//! The norm of a signed measure is `sup_A |μ(A)|`, the larger of its
//! positive and negative mass. The distance between two kernels is the
//! largest such norm over Dirac inputs.

use std::collections::BTreeMap;
use std::sync::Arc;

use num::{BigRational, One, Signed, Zero};

use super::{Backend, Distance, Result, SemError};
use crate::quantale::{QValue, QuantaleKind};

#[derive(Clone, Debug, PartialEq)]
pub enum Support {
    Unit,
    Base(Arc<Vec<String>>),
    Tensor(Box<Support>, Box<Support>),
}

impl Support {
    pub fn base(labels: Vec<String>) -> Support {
        Support::Base(Arc::new(labels))
    }

    pub fn size(&self) -> usize {
        match self {
            Support::Unit => 1,
            Support::Base(l) => l.len(),
            Support::Tensor(a, b) => a.size() * b.size(),
        }
    }

    pub fn label(&self, i: usize) -> String {
        match self {
            Support::Unit => "*".into(),
            Support::Base(l) => l[i].clone(),
            Support::Tensor(a, b) => {
                let nb = b.size();
                format!("({}, {})", a.label(i / nb), b.label(i % nb))
            }
        }
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        match self {
            Support::Base(l) => l.iter().position(|x| x == label),
            Support::Unit => (label == "*").then_some(0),
            Support::Tensor(..) => (0..self.size()).find(|&i| self.label(i) == label),
        }
    }
}

impl std::fmt::Display for Support {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Support::Unit => write!(f, "I"),
            Support::Base(l) => write!(f, "{{{}}}", l.join(", ")),
            Support::Tensor(a, b) => write!(f, "({a} * {b})"),
        }
    }
}

pub type Column = Vec<(usize, BigRational)>;

#[derive(Clone, Debug)]
pub struct Kernel {
    pub dom: Support,
    pub cod: Support,
    /// One sparse column per basis point of `dom`, sorted, without zeros.
    pub cols: Arc<Vec<Column>>,
}

fn clean(m: BTreeMap<usize, BigRational>) -> Column {
    m.into_iter().filter(|(_, w)| !w.is_zero()).collect()
}

/// Largest of positive and negative mass of `a − b`.
pub fn column_norm(a: &Column, b: &Column) -> BigRational {
    let mut diff: BTreeMap<usize, BigRational> = BTreeMap::new();
    for (i, w) in a {
        *diff.entry(*i).or_insert_with(BigRational::zero) += w;
    }
    for (i, w) in b {
        *diff.entry(*i).or_insert_with(BigRational::zero) -= w;
    }
    let mut pos = BigRational::zero();
    let mut neg = BigRational::zero();
    for w in diff.into_values() {
        if w.is_positive() {
            pos += w;
        } else {
            neg -= w;
        }
    }
    pos.max(neg)
}

#[derive(Clone, Debug, Default)]
pub struct MeasL1;

impl MeasL1 {
    pub fn kernel(&self, dom: &Support, cod: &Support, cols: Vec<Column>) -> Result<Kernel> {
        if cols.len() != dom.size() {
            return Err(SemError::Other(format!("{} columns for a support of size {}", cols.len(), dom.size())));
        }
        let n = cod.size();
        let mut out = Vec::with_capacity(cols.len());
        for c in cols {
            let mut m = BTreeMap::new();
            for (i, w) in c {
                if i >= n {
                    return Err(SemError::Other(format!("row {i} outside a support of size {n}")));
                }
                *m.entry(i).or_insert_with(BigRational::zero) += w;
            }
            out.push(clean(m));
        }
        Ok(Kernel { dom: dom.clone(), cod: cod.clone(), cols: Arc::new(out) })
    }

    pub fn deterministic(&self, dom: &Support, cod: &Support, f: impl Fn(usize) -> usize) -> Kernel {
        let cols = (0..dom.size()).map(|i| vec![(f(i), BigRational::one())]).collect();
        Kernel { dom: dom.clone(), cod: cod.clone(), cols: Arc::new(cols) }
    }

    /// Every column is a probability distribution.
    pub fn is_stochastic(&self, k: &Kernel) -> bool {
        k.cols.iter().all(|c| {
            c.iter().all(|(_, w)| !w.is_negative()) && c.iter().map(|(_, w)| w.clone()).sum::<BigRational>() == BigRational::one()
        })
    }
}

impl Backend for MeasL1 {
    type Obj = Support;
    type Mor = Kernel;

    fn name(&self) -> &'static str {
        "meas"
    }

    fn quantale(&self) -> QuantaleKind {
        QuantaleKind::Lawvere
    }

    fn unit(&self) -> Support {
        Support::Unit
    }

    fn tensor_obj(&self, a: &Support, b: &Support) -> Support {
        Support::Tensor(Box::new(a.clone()), Box::new(b.clone()))
    }

    fn size(&self, a: &Support) -> usize {
        a.size()
    }

    fn dom(&self, f: &Kernel) -> Support {
        f.dom.clone()
    }

    fn cod(&self, f: &Kernel) -> Support {
        f.cod.clone()
    }

    fn relabel(&self, src: &Support, dst: &Support, map: &[usize]) -> Kernel {
        self.deterministic(src, dst, |i| map[i])
    }

    fn compose(&self, f: &Kernel, g: &Kernel) -> Result<Kernel> {
        if f.cod != g.dom {
            return Err(SemError::Compose(format!("{:?} with {:?}", f.cod, g.dom)));
        }
        let cols = f
            .cols
            .iter()
            .map(|c| {
                let mut m: BTreeMap<usize, BigRational> = BTreeMap::new();
                for (k, w) in c {
                    for (i, v) in &g.cols[*k] {
                        *m.entry(*i).or_insert_with(BigRational::zero) += w * v;
                    }
                }
                clean(m)
            })
            .collect();
        Ok(Kernel { dom: f.dom.clone(), cod: g.cod.clone(), cols: Arc::new(cols) })
    }

    fn tensor(&self, f: &Kernel, g: &Kernel) -> Kernel {
        let nc = g.cod.size();
        let mut cols = Vec::with_capacity(f.cols.len() * g.cols.len());
        for a in f.cols.iter() {
            for b in g.cols.iter() {
                let mut c: Column = Vec::with_capacity(a.len() * b.len());
                for (i, w) in a {
                    for (j, v) in b {
                        c.push((i * nc + j, w * v));
                    }
                }
                cols.push(c);
            }
        }
        Kernel { dom: self.tensor_obj(&f.dom, &g.dom), cod: self.tensor_obj(&f.cod, &g.cod), cols: Arc::new(cols) }
    }

    fn discard(&self, a: &Support) -> Result<Kernel> {
        Ok(self.deterministic(a, &Support::Unit, |_| 0))
    }

    fn distance(&self, f: &Kernel, g: &Kernel) -> Result<Distance> {
        if f.dom != g.dom || f.cod != g.cod {
            return Err(SemError::Other("distance between kernels of different types".into()));
        }
        let d = f.cols.iter().zip(g.cols.iter()).map(|(a, b)| column_norm(a, b)).max().unwrap_or_else(BigRational::zero);
        Ok(Distance::Exact(QValue::lawvere(d).expect("nonnegative")))
    }

    fn describe(&self, f: &Kernel) -> String {
        let mut out = format!("{} -> {}\n", f.dom, f.cod);
        for (j, c) in f.cols.iter().enumerate().take(64) {
            let parts: Vec<String> = c.iter().map(|(i, w)| format!("{w} {}", f.cod.label(*i))).collect();
            out.push_str(&format!("  {} |-> {}\n", f.dom.label(j), parts.join(" + ")));
        }
        if f.cols.len() > 64 {
            out.push_str(&format!("  ... {} more\n", f.cols.len() - 64));
        }
        out
    }
}
