//! Small-scale quantum numerics: states, gates, isometry channels and their
//! diamond distance.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const PRED_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("matrix is not an isometry")]
    NotIsometry,
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("dimension mismatch: {0}")]
    Dims(String),
}

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn is_hermitian(a: &CMatrix, tol: f64) -> bool {
    a.is_square() && (a - a.adjoint()).iter().all(|z| z.norm() <= tol)
}

/// `T†T = I` entrywise to `tol`.
pub fn is_isometry(t: &CMatrix, tol: f64) -> bool {
    let g = t.adjoint() * t;
    let id = CMatrix::identity(t.ncols(), t.ncols());
    (g - id).iter().all(|z| z.norm() <= tol)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(a: &CMatrix) -> Result<f64, QuantumError> {
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if !is_hermitian(a, 1e-9 * scale) {
        return Err(QuantumError::NotHermitian);
    }
    let h = (a + a.adjoint()).scale(0.5);
    Ok(h.symmetric_eigenvalues().iter().map(|l| l.abs()).sum())
}

pub fn basis(n: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(n);
    v[i] = c(1.0, 0.0);
    v
}

/// `v v†`
pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

/// Bloch vector of a qubit state; invariant under global phase.
pub fn bloch(v: &CVector) -> Result<[f64; 3], QuantumError> {
    if v.len() != 2 {
        return Err(QuantumError::Dims(format!("expected a qubit, got dimension {}", v.len())));
    }
    let n = v.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(QuantumError::NotUnit(n));
    }
    let (a, b) = (v[0], v[1]);
    let ab = a.conj() * b;
    Ok([2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()])
}

pub fn phase(phi: f64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), C64::from_polar(1.0, phi)])
}

pub fn ry(phi: f64) -> CMatrix {
    let (s, co) = (phi / 2.0).sin_cos();
    CMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn hadamard() -> CMatrix {
    ry(std::f64::consts::FRAC_PI_2) * phase(std::f64::consts::PI)
}

/// Conditional shift on `C^2 ⊗ C^n`: the qubit picks the direction around
/// the circle of `n` positions.
pub fn shift(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(((i + n - 1) % n), i)] = c(1.0, 0.0);
        m[(n + (i + 1) % n, n + i)] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A channel generated by isometries.
#[derive(Clone, Debug, PartialEq)]
pub enum Channel {
    Isometry(CMatrix),
    /// Applied left to right.
    Composite(Vec<Channel>),
    TensorPair(Box<Channel>, Box<Channel>),
}

impl Channel {
    /// The isometry generating the channel.
    pub fn isometry(&self) -> Result<CMatrix, QuantumError> {
        match self {
            Channel::Isometry(t) => {
                if is_isometry(t, 1e-9) {
                    Ok(t.clone())
                } else {
                    Err(QuantumError::NotIsometry)
                }
            }
            Channel::Composite(cs) => {
                let mut it = cs.iter();
                let first = it.next().ok_or_else(|| QuantumError::Dims("empty composite".into()))?;
                let mut acc = first.isometry()?;
                for ch in it {
                    let t = ch.isometry()?;
                    if t.ncols() != acc.nrows() {
                        return Err(QuantumError::Dims(format!("{} -> {} after {}", t.ncols(), t.nrows(), acc.nrows())));
                    }
                    acc = t * acc;
                }
                Ok(acc)
            }
            Channel::TensorPair(a, b) => Ok(kron(&a.isometry()?, &b.isometry()?)),
        }
    }

    pub fn input_dim(&self) -> Result<usize, QuantumError> {
        Ok(self.isometry()?.ncols())
    }

    pub fn output_dim(&self) -> Result<usize, QuantumError> {
        Ok(self.isometry()?.nrows())
    }
}

/// `ρ ↦ T ρ T†`
pub fn channel_apply(ch: &Channel, rho: &CMatrix) -> Result<CMatrix, QuantumError> {
    let t = ch.isometry()?;
    if rho.nrows() != t.ncols() || !rho.is_square() {
        return Err(QuantumError::Dims(format!("state of size {} for input {}", rho.nrows(), t.ncols())));
    }
    Ok(&t * rho * t.adjoint())
}

#[derive(Clone, Copy, Debug)]
pub struct DiamondOpts {
    pub starts: usize,
    pub seed: u64,
    /// Pattern-search step at which refinement stops.
    pub tol: f64,
}

impl Default for DiamondOpts {
    fn default() -> Self {
        DiamondOpts { starts: 32, seed: 0x5eed, tol: 1e-8 }
    }
}

/// Unit vector in `C^n` from `2n - 2` angles: `n - 1` hyperspherical angles
/// for the moduli and `n - 1` relative phases.
pub fn unit_vector(angles: &[f64], n: usize) -> CVector {
    debug_assert_eq!(angles.len(), 2 * n - 2);
    let (mags, phases) = angles.split_at(n - 1);
    let mut v = CVector::zeros(n);
    let mut rest = 1.0;
    for i in 0..n {
        let m = if i + 1 < n { rest * mags[i].cos() } else { rest };
        if i + 1 < n {
            rest *= mags[i].sin();
        }
        let ph = if i == 0 { 0.0 } else { phases[i - 1] };
        v[i] = C64::from_polar(m, ph);
    }
    v
}

/// `‖a a† − b b†‖₁` for unit vectors; the difference has rank two, so this
/// equals `2 √(1 − |⟨a,b⟩|²)`.
pub fn pure_distance(a: &CVector, b: &CVector) -> f64 {
    // 1 − r² = ‖a − u b‖² (1 + r) / 2 with u the phase of ⟨b,a⟩; no cancellation near a = b
    let ip = b.dotc(a);
    let r = ip.norm().min(1.0);
    let u = if r > 0.0 { ip / r } else { c(1.0, 0.0) };
    let d2 = (a - b * u).norm_squared();
    2.0 * (0.5 * d2 * (1.0 + r)).min(1.0).sqrt()
}

/// Diamond distance between the channels induced by two isometries.
///
/// The maximum over unit input vectors is located by seeded multi-start
/// pattern search; the result is the best value found.
pub fn diamond_distance_iso(t: &CMatrix, s: &CMatrix, opts: DiamondOpts) -> Result<f64, QuantumError> {
    if t.shape() != s.shape() {
        return Err(QuantumError::Dims(format!("{:?} vs {:?}", t.shape(), s.shape())));
    }
    if !is_isometry(t, 1e-9) || !is_isometry(s, 1e-9) {
        return Err(QuantumError::NotIsometry);
    }
    let n = t.ncols();
    if n == 1 {
        return Ok(pure_distance(&t.column(0).into_owned(), &s.column(0).into_owned()));
    }
    let f = |x: &[f64]| {
        let v = unit_vector(x, n);
        pure_distance(&(t * &v), &(s * &v))
    };
    Ok(maximize(2 * n - 2, &f, opts))
}

/// Diamond distance between channels in Stinespring form `ρ ↦ Tr_E(VρV†)`,
/// where `V : n → m·e` with the environment as the right tensor factor.
///
/// With trivial environments this is `diamond_distance_iso`; otherwise the
/// input is extended by an `n`-dimensional ancilla.
pub fn diamond_distance_stinespring(
    v1: &CMatrix,
    e1: usize,
    v2: &CMatrix,
    e2: usize,
    opts: DiamondOpts,
) -> Result<f64, QuantumError> {
    if e1 == 1 && e2 == 1 {
        return diamond_distance_iso(v1, v2, opts);
    }
    let n = v1.ncols();
    if v2.ncols() != n || v1.nrows() / e1 != v2.nrows() / e2 {
        return Err(QuantumError::Dims("channel shapes differ".into()));
    }
    let m = v1.nrows() / e1;
    let id = CMatrix::identity(n, n);
    let w1 = kron(v1, &id);
    let w2 = kron(v2, &id);
    let f = |x: &[f64]| {
        let v = unit_vector(x, n * n);
        let a = reduce(&(&w1 * &v), m, e1, n);
        let b = reduce(&(&w2 * &v), m, e2, n);
        trace_norm(&(a - b)).unwrap_or(0.0)
    };
    Ok(maximize(2 * n * n - 2, &f, opts))
}

/// Traces the environment out of `|w⟩⟨w|` for `w ∈ C^m ⊗ C^e ⊗ C^a`.
fn reduce(w: &CVector, m: usize, e: usize, a: usize) -> CMatrix {
    let d = m * a;
    let mut out = CMatrix::zeros(d, d);
    for i in 0..m {
        for k in 0..a {
            for j in 0..m {
                for l in 0..a {
                    let mut acc = c(0.0, 0.0);
                    for x in 0..e {
                        acc += w[(i * e + x) * a + k] * w[(j * e + x) * a + l].conj();
                    }
                    out[(i * a + k, j * a + l)] = acc;
                }
            }
        }
    }
    out
}

fn maximize(dim: usize, f: &(dyn Fn(&[f64]) -> f64 + Sync), opts: DiamondOpts) -> f64 {
    let starts: Vec<Vec<f64>> = {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        (0..opts.starts.max(1))
            .map(|_| (0..dim).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect())
            .collect()
    };
    starts
        .into_par_iter()
        .map(|x| pattern_search(x, f, opts.tol))
        .reduce(|| 0.0, f64::max)
}

fn pattern_search(mut x: Vec<f64>, f: &(dyn Fn(&[f64]) -> f64 + Sync), tol: f64) -> f64 {
    let mut best = f(&x);
    let mut h = 0.5;
    while h > tol {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [h, -h] {
                let old = x[i];
                x[i] = old + dir;
                let v = f(&x);
                if v > best {
                    best = v;
                    improved = true;
                    break;
                }
                x[i] = old;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(close(trace_norm(&d).unwrap(), 2.0, 1e-12));
        let nh = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(trace_norm(&nh), Err(QuantumError::NotHermitian));
    }

    #[test]
    fn bloch_examples() {
        let b = bloch(&basis(2, 0)).unwrap();
        assert!(close(b[2], 1.0, 1e-12) && close(b[0], 0.0, 1e-12));
        let plus = CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        let b = bloch(&plus).unwrap();
        assert!(close(b[0], 1.0, 1e-12) && close(b[1], 0.0, 1e-12) && close(b[2], 0.0, 1e-12));
        for a in [0.0, 0.3, 2.0, -1.1] {
            let v = basis(2, 1) * C64::from_polar(1.0, a);
            let b = bloch(&v).unwrap();
            assert!(close(b[2], -1.0, 1e-12));
        }
        assert!(matches!(bloch(&(basis(2, 0) * c(2.0, 0.0))), Err(QuantumError::NotUnit(_))));
    }

    #[test]
    fn gates() {
        assert!((phase(0.0) - CMatrix::identity(2, 2)).norm() < 1e-15);
        // H|0> by explicit matrix arithmetic
        let h0 = hadamard() * basis(2, 0);
        assert!(close(h0[0].re, FRAC_1_SQRT_2, 1e-12) && close(h0[1].re, FRAC_1_SQRT_2, 1e-12));
        let s = shift(3);
        assert!(is_isometry(&s, PRED_TOL));
        for col in 0..6 {
            let ones: Vec<_> = (0..6).filter(|&r| s[(r, col)] != c(0.0, 0.0)).collect();
            assert_eq!(ones.len(), 1);
        }
        // |0>|0> goes to |0>|2>, |1>|2> goes to |1>|0>
        assert_eq!(s[(2, 0)], c(1.0, 0.0));
        assert_eq!(s[(3, 5)], c(1.0, 0.0));
        for g in [phase(0.4), ry(1.3), hadamard()] {
            assert!(is_isometry(&g, PRED_TOL));
        }
    }

    #[test]
    fn channel_examples() {
        let rho = projector(&CVector::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]));
        let id = Channel::Isometry(CMatrix::identity(2, 2));
        assert!((channel_apply(&id, &rho).unwrap() - &rho).norm() < 1e-15);
        let z = projector(&basis(2, 0));
        let p = channel_apply(&Channel::Isometry(phase(0.9)), &z).unwrap();
        assert!((p - &z).norm() < 1e-15);
        let h = channel_apply(&Channel::Isometry(hadamard()), &z).unwrap();
        let plus = CVector::from_vec(vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]);
        assert!((h - projector(&plus)).norm() < 1e-12);
        let comp = Channel::Composite(vec![Channel::Isometry(hadamard()), Channel::Isometry(phase(0.2))]);
        let out = channel_apply(&comp, &rho).unwrap();
        assert!(close(out.trace().re, 1.0, 1e-10));
        assert!(channel_apply(&id, &CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn pure_distance_is_trace_norm() {
        let a = unit_vector(&[0.3, 1.2], 2);
        let b = unit_vector(&[1.9, -0.4], 2);
        let tn = trace_norm(&(projector(&a) - projector(&b))).unwrap();
        assert!(close(pure_distance(&a, &b), tn, 1e-12));
    }

    #[test]
    fn phase_gate_distance() {
        let opts = DiamondOpts::default();
        assert!(diamond_distance_iso(&hadamard(), &hadamard(), opts).unwrap() < 1e-12);
        for eps in [0.5, 0.1, 0.01] {
            let d = diamond_distance_iso(&phase(0.3), &phase(0.3 + eps), opts).unwrap();
            assert!(close(d, 2.0 * (eps / 2.0).sin(), 1e-6), "{eps}: {d}");
        }
        let d = diamond_distance_iso(&phase(PI), &phase(0.0), opts).unwrap();
        assert!(close(d, 2.0, 1e-6));
    }

    #[test]
    fn stinespring_matches_iso_case() {
        let opts = DiamondOpts { starts: 8, ..Default::default() };
        let a = diamond_distance_iso(&phase(0.0), &phase(0.7), opts).unwrap();
        let b = diamond_distance_stinespring(&phase(0.0), 1, &phase(0.7), 1, opts).unwrap();
        assert_eq!(a, b);
        // discarding a qubit vs measuring it out into the environment
        let trace_out = CMatrix::identity(2, 2);
        let d = diamond_distance_stinespring(&trace_out, 2, &trace_out, 2, opts).unwrap();
        assert!(d < 1e-9);
    }
}
