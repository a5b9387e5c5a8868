//! Pointwise graded multilinear algebra in dimension `n ≤ 6`.
//!
//! Basis blades are indexed by bitmasks over the axes; a homogeneous
//! element of degree `k` is stored in lexicographic multi-index order
//! ([`GradedCoefficients`]), while the working representation
//! [`Blades`] keeps all `2^n` coefficients indexed by mask.
//!
//! Contraction conventions are fixed by the pairing:
//!
//! * right contraction `α ⌟ P`: `⟨α ⌟ P, Q⟩ = ⟨α, P ∧ Q⟩`;
//! * left contraction `P ⌞ α`: `⟨P ⌞ α, R⟩ = ⟨α, P̃ ∧ R⟩` with `P̃` the
//!   reversion of `P`, so that `∂_i ⌞` is the usual interior product and
//!   `(P ∧ Q) ⌞ = P ⌞ Q ⌞`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;

pub const MAX_DIM: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variance {
    /// Multivectors (sections of `ΛTM`).
    Vector,
    /// Differential forms (sections of `ΛT*M`).
    Form,
}

/// Strictly increasing axis indices naming a basis element of `Λ^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(n: usize, entries: &[usize]) -> Result<MultiIndex> {
        if entries.len() > n {
            return Err(Error::InvalidOperand(format!("multi-index {entries:?} longer than n = {n}")));
        }
        for w in entries.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidOperand(format!("multi-index {entries:?} not strictly increasing")));
            }
        }
        if entries.iter().any(|&e| e >= n) {
            return Err(Error::InvalidOperand(format!("multi-index {entries:?} out of range for n = {n}")));
        }
        Ok(MultiIndex(entries.to_vec()))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn mask(&self) -> u32 {
        self.0.iter().fold(0, |m, &i| m | (1 << i))
    }

    pub fn from_mask(mask: u32) -> MultiIndex {
        MultiIndex((0..32).filter(|i| mask & (1 << i) != 0).collect())
    }
}

/// Lexicographic ordering of the basis masks of each grade.
#[derive(Debug)]
pub struct Basis {
    n: usize,
    by_grade: Vec<Vec<u32>>,
    position: Vec<usize>,
}

static BASES: [OnceLock<Basis>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];

impl Basis {
    pub fn get(n: usize) -> &'static Basis {
        assert!(n <= MAX_DIM, "dimension {n} exceeds {MAX_DIM}");
        BASES[n].get_or_init(|| {
            let mut by_grade = vec![Vec::new(); n + 1];
            let mut masks: Vec<(Vec<usize>, u32)> = (0u32..(1 << n))
                .map(|m| (MultiIndex::from_mask(m).0, m))
                .collect();
            masks.sort();
            for (idx, m) in masks {
                by_grade[idx.len()].push(m);
            }
            let mut position = vec![0; 1 << n];
            for grade in &by_grade {
                for (p, &m) in grade.iter().enumerate() {
                    position[m as usize] = p;
                }
            }
            Basis { n, by_grade, position }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grade(&self, k: usize) -> &[u32] {
        &self.by_grade[k]
    }

    pub fn position(&self, mask: u32) -> usize {
        self.position[mask as usize]
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign of `e_a ∧ e_b` relative to `e_{a ∪ b}` (masks disjoint).
pub fn wedge_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        swaps += (a >> (j + 1)).count_ones();
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of the reversion on grade `k`: `(-1)^{k(k-1)/2}`.
pub fn reversion_sign(k: usize) -> f64 {
    if (k * k.saturating_sub(1) / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Scalar-like coefficient types carried by blades: plain values or jets.
pub trait Coeff: Clone + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn mul_c(&self, other: &Self) -> Self;
    fn add_scaled_c(&mut self, other: &Self, s: f64);
    fn scale_c(&self, s: f64) -> Self;
    fn is_zero_c(&self) -> bool;
    fn exp_c(&self) -> Self;
    fn value_c(&self) -> f64;
}

impl Coeff for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn one_like(&self) -> f64 {
        1.0
    }
    fn mul_c(&self, other: &f64) -> f64 {
        self * other
    }
    fn add_scaled_c(&mut self, other: &f64, s: f64) {
        *self += s * other;
    }
    fn scale_c(&self, s: f64) -> f64 {
        self * s
    }
    fn is_zero_c(&self) -> bool {
        *self == 0.0
    }
    fn exp_c(&self) -> f64 {
        self.exp()
    }
    fn value_c(&self) -> f64 {
        *self
    }
}

impl Coeff for Jet {
    fn zero_like(&self) -> Jet {
        Jet::zero_like(self)
    }
    fn one_like(&self) -> Jet {
        self.constant_like(1.0)
    }
    fn mul_c(&self, other: &Jet) -> Jet {
        self.mul_jet(other)
    }
    fn add_scaled_c(&mut self, other: &Jet, s: f64) {
        self.add_scaled(other, s);
    }
    fn scale_c(&self, s: f64) -> Jet {
        self.scale(s)
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn exp_c(&self) -> Jet {
        self.exp()
    }
    fn value_c(&self) -> f64 {
        self.value()
    }
}

/// Dense mixed-degree element: all `2^n` blade coefficients indexed by mask.
#[derive(Clone, Debug)]
pub struct Blades<T> {
    pub n: usize,
    pub variance: Variance,
    pub c: Vec<T>,
}

impl<T: Coeff> Blades<T> {
    pub fn zeros(n: usize, variance: Variance, template: &T) -> Blades<T> {
        Blades {
            n,
            variance,
            c: vec![template.zero_like(); 1 << n],
        }
    }

    pub fn scalar(n: usize, variance: Variance, value: T) -> Blades<T> {
        let mut b = Blades::zeros(n, variance, &value);
        b.c[0] = value;
        b
    }

    pub fn template(&self) -> &T {
        &self.c[0]
    }

    pub fn get(&self, mask: u32) -> &T {
        &self.c[mask as usize]
    }

    pub fn set(&mut self, mask: u32, value: T) {
        self.c[mask as usize] = value;
    }

    /// Degree-`k` part only.
    pub fn grade(&self, k: usize) -> Blades<T> {
        let mut out = Blades::zeros(self.n, self.variance, self.template());
        for &m in Basis::get(self.n).grade(k) {
            out.c[m as usize] = self.c[m as usize].clone();
        }
        out
    }

    pub fn without_scalar(&self) -> Blades<T> {
        let mut out = self.clone();
        out.c[0] = out.c[0].zero_like();
        out
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> Blades<U> {
        Blades {
            n: self.n,
            variance: self.variance,
            c: self.c.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Blades<T> {
        self.map(|x| x.scale_c(s))
    }

    pub fn mul_scalar(&self, s: &T) -> Blades<T> {
        self.map(|x| x.mul_c(s))
    }

    pub fn add(&self, other: &Blades<T>) -> Blades<T> {
        let mut out = self.clone();
        out.add_scaled(other, 1.0);
        out
    }

    pub fn sub(&self, other: &Blades<T>) -> Blades<T> {
        let mut out = self.clone();
        out.add_scaled(other, -1.0);
        out
    }

    pub fn add_scaled(&mut self, other: &Blades<T>, s: f64) {
        assert_eq!(self.n, other.n, "blades: dimension mismatch");
        for (a, b) in self.c.iter_mut().zip(other.c.iter()) {
            a.add_scaled_c(b, s);
        }
    }

    fn support(&self) -> Vec<u32> {
        (0..self.c.len() as u32)
            .filter(|&m| !self.c[m as usize].is_zero_c())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero_c())
    }

    pub fn wedge(&self, other: &Blades<T>) -> Blades<T> {
        assert_eq!(self.n, other.n, "wedge: dimension mismatch");
        let mut out = Blades::zeros(self.n, self.variance, self.template());
        let sb = other.support();
        for a in self.support() {
            for &b in &sb {
                if a & b != 0 {
                    continue;
                }
                let prod = self.c[a as usize].mul_c(&other.c[b as usize]);
                out.c[(a | b) as usize].add_scaled_c(&prod, wedge_sign(a, b));
            }
        }
        out
    }

    /// `self ⌞ form` for a vector-type `self`.
    pub fn left_contract(&self, form: &Blades<T>) -> Blades<T> {
        let mut out = Blades::zeros(self.n, Variance::Form, form.template());
        let sf = form.support();
        for i in self.support() {
            let rev = reversion_sign(i.count_ones() as usize);
            for &k in &sf {
                if i & !k != 0 {
                    continue;
                }
                let rest = k & !i;
                let prod = self.c[i as usize].mul_c(&form.c[k as usize]);
                out.c[rest as usize].add_scaled_c(&prod, rev * wedge_sign(i, rest));
            }
        }
        out
    }

    /// `self ⌟ vector` for a form-type `self`.
    pub fn right_contract(&self, vector: &Blades<T>) -> Blades<T> {
        let mut out = Blades::zeros(self.n, Variance::Form, self.template());
        let sk = self.support();
        for i in vector.support() {
            for &k in &sk {
                if i & !k != 0 {
                    continue;
                }
                let rest = k & !i;
                let prod = vector.c[i as usize].mul_c(&self.c[k as usize]);
                out.c[rest as usize].add_scaled_c(&prod, wedge_sign(i, rest));
            }
        }
        out
    }

    /// Full pairing `Σ_I α_I P_I` over all grades.
    pub fn pair(&self, other: &Blades<T>) -> T {
        let mut acc = self.template().zero_like();
        for (a, b) in self.c.iter().zip(other.c.iter()) {
            if !a.is_zero_c() && !b.is_zero_c() {
                acc.add_scaled_c(&a.mul_c(b), 1.0);
            }
        }
        acc
    }

    /// `e^{scalar} · Σ_j x^j / j!` for `x` without degree-0 part.
    pub fn exp_nilpotent(&self, scalar: &T) -> Blades<T> {
        let x = self.without_scalar();
        let mut term = Blades::scalar(self.n, self.variance, scalar.one_like());
        let mut sum = term.clone();
        for j in 1..=self.n {
            term = term.wedge(&x).scale(1.0 / j as f64);
            if term.is_zero() {
                break;
            }
            sum.add_scaled(&term, 1.0);
        }
        sum.mul_scalar(&scalar.exp_c())
    }

    /// Exponential of a full element: degree-0 part handled separately.
    pub fn exp(&self) -> Blades<T> {
        let s = self.c[0].clone();
        self.exp_nilpotent(&s)
    }

    /// Largest degree with a nonzero coefficient.
    pub fn max_degree(&self) -> Option<usize> {
        self.support().iter().map(|m| m.count_ones() as usize).max()
    }
}

impl Blades<f64> {
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn from_graded(g: &GradedCoefficients) -> Blades<f64> {
        let mut out = Blades::zeros(g.n, g.variance, &0.0);
        for (p, &m) in Basis::get(g.n).grade(g.k).iter().enumerate() {
            out.c[m as usize] = g.coeffs[p];
        }
        out
    }

    pub fn to_graded(&self, k: usize) -> GradedCoefficients {
        let basis = Basis::get(self.n);
        GradedCoefficients {
            n: self.n,
            k,
            variance: self.variance,
            coeffs: basis.grade(k).iter().map(|&m| self.c[m as usize]).collect(),
        }
    }
}

impl Blades<Jet> {
    pub fn values(&self) -> Blades<f64> {
        self.map(|j| j.value())
    }

    pub fn truncate(&self, order: usize) -> Blades<Jet> {
        self.map(|j| j.truncate(order))
    }

    pub fn partial(&self, var: usize) -> Blades<Jet> {
        self.map(|j| j.partial(var))
    }
}

/// Homogeneous degree-`k` coefficients in lexicographic multi-index order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedCoefficients {
    pub n: usize,
    pub k: usize,
    pub variance: Variance,
    pub coeffs: Vec<f64>,
}

impl GradedCoefficients {
    pub fn new(n: usize, k: usize, variance: Variance, coeffs: Vec<f64>) -> Result<GradedCoefficients> {
        if n > MAX_DIM || k > n {
            return Err(Error::InvalidOperand(format!("degree {k} invalid in dimension {n}")));
        }
        if coeffs.len() != binomial(n, k) {
            return Err(Error::InvalidOperand(format!(
                "expected {} coefficients for degree {k} in dimension {n}, got {}",
                binomial(n, k),
                coeffs.len()
            )));
        }
        Ok(GradedCoefficients { n, k, variance, coeffs })
    }

    pub fn zero(n: usize, k: usize, variance: Variance) -> GradedCoefficients {
        GradedCoefficients {
            n,
            k,
            variance,
            coeffs: vec![0.0; binomial(n, k)],
        }
    }

    /// Single basis element `e_I` with coefficient `value`.
    pub fn basis(n: usize, variance: Variance, index: &[usize], value: f64) -> Result<GradedCoefficients> {
        let mi = MultiIndex::new(n, index)?;
        let mut g = GradedCoefficients::zero(n, index.len(), variance);
        g.coeffs[Basis::get(n).position(mi.mask())] = value;
        Ok(g)
    }

    pub fn coefficient(&self, index: &[usize]) -> Result<f64> {
        let mi = MultiIndex::new(self.n, index)?;
        if index.len() != self.k {
            return Err(Error::InvalidOperand(format!("index {index:?} has wrong degree for k = {}", self.k)));
        }
        Ok(self.coeffs[Basis::get(self.n).position(mi.mask())])
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn scale(&self, s: f64) -> GradedCoefficients {
        GradedCoefficients {
            coeffs: self.coeffs.iter().map(|x| x * s).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub fn wedge(a: &GradedCoefficients, b: &GradedCoefficients) -> Result<GradedCoefficients> {
    if a.n != b.n || a.variance != b.variance {
        return Err(Error::InvalidOperand("wedge: dimension or variance mismatch".into()));
    }
    if a.k + b.k > a.n {
        return Err(Error::InvalidOperand(format!("wedge: degree {} exceeds n = {}", a.k + b.k, a.n)));
    }
    let p = Blades::from_graded(a).wedge(&Blades::from_graded(b));
    Ok(p.to_graded(a.k + b.k))
}

/// Orthonormal pairing `⟨α, P⟩` of a form and a multivector of equal degree.
pub fn pair(alpha: &GradedCoefficients, p: &GradedCoefficients) -> Result<f64> {
    if alpha.variance != Variance::Form || p.variance != Variance::Vector {
        return Err(Error::InvalidOperand("pair: expects (form, multivector)".into()));
    }
    if alpha.n != p.n || alpha.k != p.k {
        return Err(Error::InvalidOperand(format!(
            "pair: degree mismatch ({}, {}) vs ({}, {})",
            alpha.n, alpha.k, p.n, p.k
        )));
    }
    Ok(alpha.coeffs.iter().zip(&p.coeffs).map(|(a, b)| a * b).sum())
}

fn check_contraction(p: &GradedCoefficients, alpha: &GradedCoefficients) -> Result<()> {
    if alpha.variance != Variance::Form || p.variance != Variance::Vector {
        return Err(Error::InvalidOperand("contraction: expects a multivector and a form".into()));
    }
    if alpha.n != p.n {
        return Err(Error::InvalidOperand("contraction: dimension mismatch".into()));
    }
    if p.k > alpha.k {
        return Err(Error::InvalidOperand(format!(
            "contraction: multivector degree {} exceeds form degree {}",
            p.k, alpha.k
        )));
    }
    Ok(())
}

/// Left contraction `P ⌞ α`.
pub fn contract_left(p: &GradedCoefficients, alpha: &GradedCoefficients) -> Result<GradedCoefficients> {
    check_contraction(p, alpha)?;
    let out = Blades::from_graded(p).left_contract(&Blades::from_graded(alpha));
    Ok(out.to_graded(alpha.k - p.k))
}

/// Right contraction `α ⌟ P`.
pub fn contract_right(alpha: &GradedCoefficients, p: &GradedCoefficients) -> Result<GradedCoefficients> {
    check_contraction(p, alpha)?;
    let out = Blades::from_graded(alpha).right_contract(&Blades::from_graded(p));
    Ok(out.to_graded(alpha.k - p.k))
}

/// Mixed-degree multivector or form; absent degrees are zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousElement {
    pub n: usize,
    pub variance: Variance,
    pub parts: BTreeMap<usize, GradedCoefficients>,
}

impl InhomogeneousElement {
    pub fn new(n: usize, variance: Variance) -> InhomogeneousElement {
        InhomogeneousElement {
            n,
            variance,
            parts: BTreeMap::new(),
        }
    }

    pub fn with_part(mut self, part: GradedCoefficients) -> Result<InhomogeneousElement> {
        if part.n != self.n || part.variance != self.variance {
            return Err(Error::InvalidOperand("inhomogeneous element: part mismatch".into()));
        }
        self.parts.insert(part.k, part);
        Ok(self)
    }

    pub fn part(&self, k: usize) -> GradedCoefficients {
        self.parts
            .get(&k)
            .cloned()
            .unwrap_or_else(|| GradedCoefficients::zero(self.n, k, self.variance))
    }

    pub fn to_blades(&self) -> Blades<f64> {
        let mut out = Blades::zeros(self.n, self.variance, &0.0);
        for g in self.parts.values() {
            out.add_scaled(&Blades::from_graded(g), 1.0);
        }
        out
    }

    pub fn from_blades(b: &Blades<f64>) -> InhomogeneousElement {
        let mut out = InhomogeneousElement::new(b.n, b.variance);
        for k in 0..=b.n {
            let g = b.to_graded(k);
            if g.coeffs.iter().any(|&x| x != 0.0) {
                out.parts.insert(k, g);
            }
        }
        out
    }

    pub fn wedge(&self, other: &InhomogeneousElement) -> InhomogeneousElement {
        InhomogeneousElement::from_blades(&self.to_blades().wedge(&other.to_blades()))
    }
}

/// `e^{scalar_part} · Σ_j x^{∧j} / j!`; `x` must have no degree-0 part.
pub fn exp_nilpotent(x: &InhomogeneousElement, scalar_part: f64) -> Result<InhomogeneousElement> {
    if x.parts.get(&0).is_some_and(|g| g.coeffs[0] != 0.0) {
        return Err(Error::InvalidOperand("exp_nilpotent: pass the scalar part separately".into()));
    }
    Ok(InhomogeneousElement::from_blades(&x.to_blades().exp_nilpotent(&scalar_part)))
}

/// Tolerance for the skew-symmetry check in [`pfaffian`].
pub const SKEW_TOLERANCE: f64 = 1e-10;

/// Pfaffian of an even skew-symmetric matrix of size at most 6.
pub fn pfaffian(a: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::InvalidOperand("pfaffian: matrix not square".into()));
    }
    if n % 2 == 1 {
        return Err(Error::InvalidOperand(format!("pfaffian: odd size {n}")));
    }
    if n > MAX_DIM {
        return Err(Error::InvalidOperand(format!("pfaffian: size {n} exceeds {MAX_DIM}")));
    }
    let sym = (a + a.transpose()) * 0.5;
    let asym = sym.amax();
    if asym > SKEW_TOLERANCE {
        return Err(Error::InvalidOperand(format!("pfaffian: symmetric part {asym:e} exceeds tolerance")));
    }
    let skew = (a - a.transpose()) * 0.5;
    let idx: Vec<usize> = (0..n).collect();
    Ok(pfaffian_rec(&skew, &idx))
}

fn pfaffian_rec(a: &DMatrix<f64>, idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 1.0;
    }
    let first = idx[0];
    let mut acc = 0.0;
    for j in 1..idx.len() {
        let entry = a[(first, idx[j])];
        if entry == 0.0 {
            continue;
        }
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&x| x != idx[j]).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * entry * pfaffian_rec(a, &rest);
    }
    acc
}
