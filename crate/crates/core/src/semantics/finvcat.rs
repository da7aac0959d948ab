//! Finite V-categories: posets for the boolean quantale, metric spaces for
//! the lawvere quantale.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{Backend, Distance, Result, SemError};
use crate::quantale::{Ext, QValue, QuantaleKind};

pub const DEFAULT_HOM_LIMIT: usize = 200_000;

#[derive(Clone)]
pub struct Space(Arc<SpaceNode>);

pub enum SpaceNode {
    Unit,
    Points { names: Vec<String>, dist: Vec<Vec<QValue>> },
    /// `0..n` with `|i − j|` (lawvere) or `i ≤ j` (boolean); discrete otherwise.
    Chain(usize),
    Tensor(Space, Space),
    /// All V-functors `dom → cod`, with the pointwise hom-distance.
    Hom { dom: Space, cod: Space, maps: Vec<Vec<usize>>, index: HashMap<Vec<usize>, usize> },
}

/// A Lawvere space whose distances are all integers or infinite, with
/// infinity stored as `u64::MAX`.
enum IntMetric {
    Unit,
    Chain,
    Table(usize, Vec<u64>),
    Tensor(Box<IntMetric>, Box<IntMetric>, usize),
}

impl IntMetric {
    fn of(s: &Space) -> Option<IntMetric> {
        Some(match &*s.0 {
            SpaceNode::Unit => IntMetric::Unit,
            SpaceNode::Chain(_) => IntMetric::Chain,
            SpaceNode::Points { dist, names } => {
                let mut t = Vec::with_capacity(names.len() * names.len());
                for q in dist.iter().flatten() {
                    t.push(match q.payload() {
                        Ext::Inf => u64::MAX,
                        Ext::Fin(r) if r.is_integer() => u64::try_from(r.to_integer()).ok().filter(|&v| v < u64::MAX / 2)?,
                        Ext::Fin(_) => return None,
                    });
                }
                IntMetric::Table(names.len(), t)
            }
            SpaceNode::Tensor(a, b) => IntMetric::Tensor(Box::new(IntMetric::of(a)?), Box::new(IntMetric::of(b)?), b.size()),
            SpaceNode::Hom { .. } => return None,
        })
    }

    fn dist(&self, i: usize, j: usize) -> u64 {
        match self {
            IntMetric::Unit => 0,
            IntMetric::Chain => i.abs_diff(j) as u64,
            IntMetric::Table(n, t) => t[i * n + j],
            IntMetric::Tensor(a, b, nb) => a.dist(i / nb, j / nb).saturating_add(b.dist(i % nb, j % nb)),
        }
    }
}

impl Space {
    pub fn unit() -> Space {
        Space(Arc::new(SpaceNode::Unit))
    }

    pub fn chain(n: usize) -> Space {
        Space(Arc::new(SpaceNode::Chain(n)))
    }

    pub fn points(names: Vec<String>, dist: Vec<Vec<QValue>>) -> Space {
        Space(Arc::new(SpaceNode::Points { names, dist }))
    }

    /// The discrete space on `n` named points.
    pub fn discrete(kind: QuantaleKind, names: Vec<String>) -> Space {
        let n = names.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { kind.top() } else { kind.bottom() }).collect())
            .collect();
        Space::points(names, dist)
    }

    pub fn tensor(a: &Space, b: &Space) -> Space {
        Space(Arc::new(SpaceNode::Tensor(a.clone(), b.clone())))
    }

    pub fn node(&self) -> &SpaceNode {
        &self.0
    }

    pub fn size(&self) -> usize {
        match &*self.0 {
            SpaceNode::Unit => 1,
            SpaceNode::Points { names, .. } => names.len(),
            SpaceNode::Chain(n) => *n,
            SpaceNode::Tensor(a, b) => a.size() * b.size(),
            SpaceNode::Hom { maps, .. } => maps.len(),
        }
    }

    pub fn dist(&self, kind: QuantaleKind, i: usize, j: usize) -> QValue {
        match &*self.0 {
            SpaceNode::Unit => kind.top(),
            SpaceNode::Points { dist, .. } => dist[i][j].clone(),
            SpaceNode::Chain(_) => match kind {
                QuantaleKind::Lawvere => QValue::new(kind, Ext::int((i as i64 - j as i64).abs())).unwrap(),
                QuantaleKind::Boolean => QValue::boolean(i <= j),
                _ => {
                    if i == j {
                        kind.top()
                    } else {
                        kind.bottom()
                    }
                }
            },
            SpaceNode::Tensor(a, b) => {
                let nb = b.size();
                a.dist(kind, i / nb, j / nb).tensor(&b.dist(kind, i % nb, j % nb)).expect("one quantale")
            }
            SpaceNode::Hom { cod, maps, .. } => pointwise(kind, cod, &maps[i], &maps[j]),
        }
    }

    pub fn label(&self, i: usize) -> String {
        match &*self.0 {
            SpaceNode::Unit => "*".into(),
            SpaceNode::Points { names, .. } => names[i].clone(),
            SpaceNode::Chain(_) => i.to_string(),
            SpaceNode::Tensor(a, b) => {
                let nb = b.size();
                format!("({}, {})", a.label(i / nb), b.label(i % nb))
            }
            SpaceNode::Hom { dom, cod, maps, .. } => {
                let parts: Vec<String> =
                    maps[i].iter().enumerate().map(|(x, y)| format!("{}->{}", dom.label(x), cod.label(*y))).collect();
                format!("[{}]", parts.join(", "))
            }
        }
    }
}

fn pointwise(kind: QuantaleKind, cod: &Space, f: &[usize], g: &[usize]) -> QValue {
    let ds: Vec<QValue> = f.iter().zip(g).map(|(a, b)| cod.dist(kind, *a, *b)).collect();
    kind.meet(&ds).expect("one quantale")
}

impl PartialEq for Space {
    fn eq(&self, other: &Space) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        match (&*self.0, &*other.0) {
            (SpaceNode::Unit, SpaceNode::Unit) => true,
            (SpaceNode::Points { names: a, dist: da }, SpaceNode::Points { names: b, dist: db }) => a == b && da == db,
            (SpaceNode::Chain(a), SpaceNode::Chain(b)) => a == b,
            (SpaceNode::Tensor(a, b), SpaceNode::Tensor(c, d)) => a == c && b == d,
            (SpaceNode::Hom { dom: a, cod: b, .. }, SpaceNode::Hom { dom: c, cod: d, .. }) => a == c && b == d,
            _ => false,
        }
    }
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            SpaceNode::Unit => f.write_str("I"),
            SpaceNode::Points { names, .. } => write!(f, "{{{}}}", names.join(",")),
            SpaceNode::Chain(n) => write!(f, "chain({n})"),
            SpaceNode::Tensor(a, b) => write!(f, "({a:?} * {b:?})"),
            SpaceNode::Hom { dom, cod, .. } => write!(f, "({dom:?} -o {cod:?})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FinMap {
    pub dom: Space,
    pub cod: Space,
    pub table: Arc<Vec<usize>>,
}

/// Finite V-categories and V-functors between them.
pub struct FinVCat {
    kind: QuantaleKind,
    pub hom_limit: usize,
    homs: Mutex<Vec<(Space, Space, Space)>>,
}

impl Clone for FinVCat {
    fn clone(&self) -> Self {
        FinVCat { kind: self.kind, hom_limit: self.hom_limit, homs: Mutex::new(self.homs.lock().unwrap().clone()) }
    }
}

impl fmt::Debug for FinVCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinVCat({})", self.kind)
    }
}

impl FinVCat {
    pub fn new(kind: QuantaleKind) -> FinVCat {
        FinVCat { kind, hom_limit: DEFAULT_HOM_LIMIT, homs: Mutex::new(Vec::new()) }
    }

    /// Finite posets.
    pub fn posets() -> FinVCat {
        FinVCat::new(QuantaleKind::Boolean)
    }

    /// Finite metric spaces.
    pub fn metric() -> FinVCat {
        FinVCat::new(QuantaleKind::Lawvere)
    }

    pub fn map(&self, dom: &Space, cod: &Space, f: impl Fn(usize) -> usize) -> FinMap {
        let table = (0..dom.size()).map(f).collect();
        FinMap { dom: dom.clone(), cod: cod.clone(), table: Arc::new(table) }
    }

    /// The constant `I → A` at point `p`.
    pub fn point(&self, cod: &Space, p: usize) -> FinMap {
        self.map(&Space::unit(), cod, |_| p)
    }

    /// `a(x, y) ≤ b(f x, f y)` for all pairs.
    pub fn is_nonexpansive(&self, f: &FinMap) -> bool {
        let n = f.dom.size();
        if self.kind == QuantaleKind::Lawvere {
            if let (Some(d), Some(c)) = (IntMetric::of(&f.dom), IntMetric::of(&f.cod)) {
                return (0..n).all(|x| (0..n).all(|y| c.dist(f.table[x], f.table[y]) <= d.dist(x, y)));
            }
        }
        self.nonexpansive_generic(f)
    }

    fn nonexpansive_generic(&self, f: &FinMap) -> bool {
        let n = f.dom.size();
        (0..n).all(|x| {
            (0..n).all(|y| {
                let lhs = f.dom.dist(self.kind, x, y);
                let rhs = f.cod.dist(self.kind, f.table[x], f.table[y]);
                lhs.leq(&rhs).unwrap_or(false)
            })
        })
    }

    /// `k ≤ a(x, x)` and `a(x, y) ⊗ a(y, z) ≤ a(x, z)`.
    pub fn is_vcategory(&self, s: &Space) -> bool {
        let n = s.size();
        let k = self.kind.unit();
        let d: Vec<Vec<QValue>> = (0..n).map(|i| (0..n).map(|j| s.dist(self.kind, i, j)).collect()).collect();
        (0..n).all(|x| k.leq(&d[x][x]).unwrap_or(false))
            && (0..n).all(|x| {
                (0..n).all(|y| (0..n).all(|z| d[x][y].tensor(&d[y][z]).and_then(|t| t.leq(&d[x][z])).unwrap_or(false)))
            })
    }

    fn enumerate_hom(&self, a: &Space, b: &Space) -> Result<Space> {
        let (na, nb) = (a.size(), b.size());
        if na > 64 || nb > 512 {
            return Err(SemError::Limit(format!("internal hom {a:?} -o {b:?} is too large to enumerate")));
        }
        let da: Vec<Vec<QValue>> = (0..na).map(|i| (0..na).map(|j| a.dist(self.kind, i, j)).collect()).collect();
        let db: Vec<Vec<QValue>> = (0..nb).map(|i| (0..nb).map(|j| b.dist(self.kind, i, j)).collect()).collect();
        let mut maps = Vec::new();
        let mut cur = Vec::with_capacity(na);
        let limit = self.hom_limit;
        fn go(
            cur: &mut Vec<usize>,
            na: usize,
            nb: usize,
            da: &[Vec<QValue>],
            db: &[Vec<QValue>],
            maps: &mut Vec<Vec<usize>>,
            limit: usize,
        ) -> bool {
            let x = cur.len();
            if x == na {
                maps.push(cur.clone());
                return maps.len() <= limit;
            }
            for v in 0..nb {
                let ok = (0..x).all(|y| {
                    da[x][y].leq(&db[v][cur[y]]).unwrap_or(false) && da[y][x].leq(&db[cur[y]][v]).unwrap_or(false)
                }) && da[x][x].leq(&db[v][v]).unwrap_or(false);
                if ok {
                    cur.push(v);
                    let more = go(cur, na, nb, da, db, maps, limit);
                    cur.pop();
                    if !more {
                        return false;
                    }
                }
            }
            true
        }
        if !go(&mut cur, na, nb, &da, &db, &mut maps, limit) {
            return Err(SemError::Limit(format!("internal hom {a:?} -o {b:?} has more than {limit} points")));
        }
        let index = maps.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Ok(Space(Arc::new(SpaceNode::Hom { dom: a.clone(), cod: b.clone(), maps, index })))
    }
}

impl Backend for FinVCat {
    type Obj = Space;
    type Mor = FinMap;

    fn name(&self) -> &'static str {
        match self.kind {
            QuantaleKind::Boolean => "finpos",
            QuantaleKind::Lawvere => "finmet",
            _ => "finvcat",
        }
    }

    fn quantale(&self) -> QuantaleKind {
        self.kind
    }

    fn unit(&self) -> Space {
        Space::unit()
    }

    fn tensor_obj(&self, a: &Space, b: &Space) -> Space {
        Space::tensor(a, b)
    }

    fn hom_obj(&self, a: &Space, b: &Space) -> Result<Space> {
        if let Some((_, _, h)) = self.homs.lock().unwrap().iter().find(|(x, y, _)| x == a && y == b) {
            return Ok(h.clone());
        }
        let h = self.enumerate_hom(a, b)?;
        self.homs.lock().unwrap().push((a.clone(), b.clone(), h.clone()));
        Ok(h)
    }

    fn size(&self, a: &Space) -> usize {
        a.size()
    }

    fn dom(&self, f: &FinMap) -> Space {
        f.dom.clone()
    }

    fn cod(&self, f: &FinMap) -> Space {
        f.cod.clone()
    }

    fn relabel(&self, src: &Space, dst: &Space, map: &[usize]) -> FinMap {
        FinMap { dom: src.clone(), cod: dst.clone(), table: Arc::new(map.to_vec()) }
    }

    fn compose(&self, f: &FinMap, g: &FinMap) -> Result<FinMap> {
        if f.cod != g.dom {
            return Err(SemError::Compose(format!("{:?} -> {:?} with {:?} -> {:?}", f.dom, f.cod, g.dom, g.cod)));
        }
        let table = f.table.iter().map(|&i| g.table[i]).collect();
        Ok(FinMap { dom: f.dom.clone(), cod: g.cod.clone(), table: Arc::new(table) })
    }

    fn tensor(&self, f: &FinMap, g: &FinMap) -> FinMap {
        let (nd, nc) = (g.dom.size(), g.cod.size());
        let mut table = Vec::with_capacity(f.table.len() * nd);
        for &a in f.table.iter() {
            for &b in g.table.iter() {
                table.push(a * nc + b);
            }
        }
        FinMap { dom: Space::tensor(&f.dom, &g.dom), cod: Space::tensor(&f.cod, &g.cod), table: Arc::new(table) }
    }

    fn curry(&self, f: &FinMap, a: &Space, b: &Space) -> Result<FinMap> {
        let h = self.hom_obj(b, &f.cod)?;
        let SpaceNode::Hom { index, .. } = h.node() else { unreachable!() };
        let nb = b.size();
        let mut table = Vec::with_capacity(a.size());
        for x in 0..a.size() {
            let row: Vec<usize> = (0..nb).map(|y| f.table[x * nb + y]).collect();
            let i = index.get(&row).ok_or_else(|| SemError::Other("curried map is not a V-functor".into()))?;
            table.push(*i);
        }
        Ok(FinMap { dom: a.clone(), cod: h, table: Arc::new(table) })
    }

    fn app(&self, b: &Space, c: &Space) -> Result<FinMap> {
        let h = self.hom_obj(b, c)?;
        let SpaceNode::Hom { maps, .. } = h.node() else { unreachable!() };
        let table = maps.iter().flat_map(|m| m.iter().copied()).collect();
        Ok(FinMap { dom: Space::tensor(&h, b), cod: c.clone(), table: Arc::new(table) })
    }

    fn discard(&self, a: &Space) -> Result<FinMap> {
        Ok(self.map(a, &Space::unit(), |_| 0))
    }

    fn distance(&self, f: &FinMap, g: &FinMap) -> Result<Distance> {
        if f.dom != g.dom || f.cod != g.cod {
            return Err(SemError::Other("distance between morphisms of different hom-sets".into()));
        }
        Ok(Distance::Exact(pointwise(self.kind, &f.cod, &f.table, &g.table)))
    }

    fn describe(&self, f: &FinMap) -> String {
        let mut out = format!("{:?} -> {:?}\n", f.dom, f.cod);
        for (x, y) in f.table.iter().enumerate().take(64) {
            out.push_str(&format!("  {} |-> {}\n", f.dom.label(x), f.cod.label(*y)));
        }
        if f.table.len() > 64 {
            out.push_str(&format!("  ... {} more\n", f.table.len() - 64));
        }
        out
    }
}
