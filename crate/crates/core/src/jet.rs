//! Truncated multivariate Taylor polynomials.
//!
//! A [`Jet`] in `n` variables of order `K` stores the Taylor coefficients
//! `c_α` of every monomial `δ^α` with `|α| ≤ K`. Arithmetic is exact up to
//! truncation, so evaluating a smooth formula on variable jets yields its
//! value and all partial derivatives through order `K` at the expansion
//! point. Partial derivatives of a jet drop one order.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::OnceLock;

use smallvec::SmallVec;

/// Largest number of variables supported by the jet tables.
pub const MAX_VARS: usize = 6;
/// Largest truncation order supported by the jet tables.
pub const MAX_ORDER: usize = 5;

type Coeffs = SmallVec<[f64; 16]>;

/// Monomial tables for a fixed `(nvars, order)` pair.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    exps: Vec<[u8; MAX_VARS]>,
    /// `(i, j, k)` with `exps[i] + exps[j] == exps[k]`, all within the order.
    mul: Vec<(u16, u16, u16)>,
    /// Per variable: `(dst, src, factor)` mapping into the `order - 1` space.
    deriv: Vec<Vec<(u16, u16, f64)>>,
}

static SPACES: [[OnceLock<JetSpace>; MAX_ORDER + 1]; MAX_VARS + 1] =
    [const { [const { OnceLock::new() }; MAX_ORDER + 1] }; MAX_VARS + 1];

fn monomials(nvars: usize, order: usize) -> Vec<[u8; MAX_VARS]> {
    let mut out = Vec::new();
    for deg in 0..=order {
        let mut cur = [0u8; MAX_VARS];
        collect_degree(nvars, 0, deg, &mut cur, &mut out);
    }
    out
}

fn collect_degree(
    nvars: usize,
    var: usize,
    remaining: usize,
    cur: &mut [u8; MAX_VARS],
    out: &mut Vec<[u8; MAX_VARS]>,
) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(*cur);
        }
        return;
    }
    if var == nvars - 1 {
        cur[var] = remaining as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[var] = e as u8;
        collect_degree(nvars, var + 1, remaining - e, cur, out);
    }
    cur[var] = 0;
}

impl JetSpace {
    /// Shared tables for `nvars` variables truncated at `order`.
    pub fn get(nvars: usize, order: usize) -> &'static JetSpace {
        assert!(nvars <= MAX_VARS, "jet: at most {MAX_VARS} variables");
        assert!(order <= MAX_ORDER, "jet: order at most {MAX_ORDER}");
        SPACES[nvars][order].get_or_init(|| JetSpace::build(nvars, order))
    }

    fn build(nvars: usize, order: usize) -> JetSpace {
        let exps = monomials(nvars, order);
        let degree: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .collect();
        let find = |e: &[u8; MAX_VARS], table: &[[u8; MAX_VARS]]| table.iter().position(|x| x == e);
        let mut mul = Vec::new();
        for (i, a) in exps.iter().enumerate() {
            for (j, b) in exps.iter().enumerate() {
                if degree[i] + degree[j] > order {
                    continue;
                }
                let mut s = [0u8; MAX_VARS];
                for v in 0..MAX_VARS {
                    s[v] = a[v] + b[v];
                }
                let k = find(&s, &exps).expect("monomial closed under product");
                mul.push((i as u16, j as u16, k as u16));
            }
        }
        let mut deriv = Vec::with_capacity(nvars);
        if order > 0 {
            let lower = monomials(nvars, order - 1);
            for v in 0..nvars {
                let mut entries = Vec::new();
                for (dst, e) in lower.iter().enumerate() {
                    let mut src = *e;
                    src[v] += 1;
                    let s = find(&src, &exps).expect("raised monomial present");
                    entries.push((dst as u16, s as u16, src[v] as f64));
                }
                deriv.push(entries);
            }
        }
        JetSpace {
            nvars,
            order,
            exps,
            mul,
            deriv,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored Taylor coefficients.
    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Position of the monomial with the given exponents, if within the order.
    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.exps
            .iter()
            .position(|e| e[..self.nvars] == exps[..self.nvars] && e[self.nvars..].iter().all(|&x| x == 0))
    }
}

/// Truncated Taylor polynomial around an expansion point.
#[derive(Clone, Debug)]
pub struct Jet {
    space: &'static JetSpace,
    c: Coeffs,
}

impl Jet {
    pub fn constant(space: &'static JetSpace, value: f64) -> Jet {
        let mut c: Coeffs = SmallVec::from_elem(0.0, space.len());
        c[0] = value;
        Jet { space, c }
    }

    pub fn zero(space: &'static JetSpace) -> Jet {
        Jet::constant(space, 0.0)
    }

    /// The coordinate function `x_var` expanded at `value`.
    pub fn variable(space: &'static JetSpace, var: usize, value: f64) -> Jet {
        let mut j = Jet::constant(space, value);
        if space.order > 0 {
            let mut e = [0u8; MAX_VARS];
            e[var] = 1;
            let idx = space.index_of(&e).expect("linear monomial");
            j.c[idx] = 1.0;
        }
        j
    }

    /// Variable jets for every coordinate of `point`.
    pub fn variables(point: &[f64], order: usize) -> Vec<Jet> {
        let space = JetSpace::get(point.len(), order);
        point
            .iter()
            .enumerate()
            .map(|(i, &x)| Jet::variable(space, i, x))
            .collect()
    }

    pub fn space(&self) -> &'static JetSpace {
        self.space
    }

    pub fn order(&self) -> usize {
        self.space.order
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn zero_like(&self) -> Jet {
        Jet::zero(self.space)
    }

    pub fn constant_like(&self, value: f64) -> Jet {
        Jet::constant(self.space, value)
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn derivative(&self, exps: &[u8]) -> f64 {
        match self.space.index_of(exps) {
            Some(i) => {
                let fact: f64 = exps.iter().map(|&e| factorial(e as usize)).product();
                self.c[i] * fact
            }
            None => panic!("jet: derivative beyond truncation order"),
        }
    }

    pub fn gradient(&self) -> Vec<f64> {
        let n = self.nvars();
        (0..n)
            .map(|i| {
                let mut e = [0u8; MAX_VARS];
                e[i] = 1;
                self.derivative(&e)
            })
            .collect()
    }

    pub fn hessian(&self) -> Vec<Vec<f64>> {
        let n = self.nvars();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut e = [0u8; MAX_VARS];
                e[i] += 1;
                e[j] += 1;
                h[i][j] = self.derivative(&e);
            }
        }
        h
    }

    /// Drop all coefficients above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.space.order {
            return self.clone();
        }
        let space = JetSpace::get(self.space.nvars, order);
        Jet {
            space,
            c: self.c[..space.len()].iter().copied().collect(),
        }
    }

    /// `∂f/∂x_var` as a jet of one lower order.
    pub fn partial(&self, var: usize) -> Jet {
        assert!(self.space.order > 0, "jet: cannot differentiate an order-0 jet");
        let lower = JetSpace::get(self.space.nvars, self.space.order - 1);
        let mut out = Jet::zero(lower);
        for &(dst, src, f) in &self.space.deriv[var] {
            out.c[dst as usize] = f * self.c[src as usize];
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space,
            c: self.c.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }

    /// `self += s * other`, truncating to the common order.
    pub fn add_scaled(&mut self, other: &Jet, s: f64) {
        if other.space.order < self.space.order {
            *self = self.truncate(other.space.order);
        }
        for (a, b) in self.c.iter_mut().zip(other.c.iter()) {
            *a += s * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    fn align<'a>(a: &'a Jet, b: &'a Jet) -> (std::borrow::Cow<'a, Jet>, std::borrow::Cow<'a, Jet>) {
        use std::borrow::Cow;
        assert_eq!(a.space.nvars, b.space.nvars, "jet: variable count mismatch");
        match a.space.order.cmp(&b.space.order) {
            std::cmp::Ordering::Equal => (Cow::Borrowed(a), Cow::Borrowed(b)),
            std::cmp::Ordering::Less => (Cow::Borrowed(a), Cow::Owned(b.truncate(a.space.order))),
            std::cmp::Ordering::Greater => (Cow::Owned(a.truncate(b.space.order)), Cow::Borrowed(b)),
        }
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        let (a, b) = Jet::align(self, other);
        let space = a.space;
        let mut out = Jet::zero(space);
        if a.c[1..].iter().all(|&x| x == 0.0) {
            let s = a.c[0];
            for (o, y) in out.c.iter_mut().zip(b.c.iter()) {
                *o = s * y;
            }
            return out;
        }
        for &(i, j, k) in &space.mul {
            let x = a.c[i as usize];
            if x != 0.0 {
                out.c[k as usize] += x * b.c[j as usize];
            }
        }
        out
    }

    /// Compose with a univariate function given its derivatives at the
    /// constant term: `derivs[j] = g^{(j)}(value)` for `j ≤ order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let order = self.space.order;
        let mut out = Jet::constant(self.space, derivs[0]);
        if order == 0 {
            return out;
        }
        let mut delta = self.clone();
        delta.c[0] = 0.0;
        let mut power = delta.clone();
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().take(order + 1).skip(1) {
            fact *= j as f64;
            out.add_scaled(&power, d / fact);
            if j < order {
                power = power.mul_jet(&delta);
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order() + 1])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order()).map(|j| cycle[j % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order()).map(|j| cycle[j % 4]).collect();
        self.compose(&d)
    }

    pub fn ln(&self) -> Jet {
        let a = self.value();
        let mut d = vec![a.ln()];
        for j in 1..=self.order() {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign * factorial(j - 1) / a.powi(j as i32));
        }
        self.compose(&d)
    }

    /// Real power `x^p` (requires a positive constant term unless `p` is integral).
    pub fn powf(&self, p: f64) -> Jet {
        let a = self.value();
        let mut d = Vec::with_capacity(self.order() + 1);
        let mut falling = 1.0;
        for j in 0..=self.order() {
            d.push(falling * a.powf(p - j as f64));
            falling *= p - j as f64;
        }
        self.compose(&d)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn recip(&self) -> Jet {
        let a = self.value();
        let d: Vec<f64> = (0..=self.order())
            .map(|j| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(j) / a.powi(j as i32 + 1)
            })
            .collect();
        self.compose(&d)
    }

    pub fn div_jet(&self, other: &Jet) -> Jet {
        self.mul_jet(&other.recip())
    }

    pub fn powi(&self, p: i32) -> Jet {
        if p == 0 {
            return self.constant_like(1.0);
        }
        if p < 0 {
            return self.powi(-p).recip();
        }
        let mut out = self.clone();
        for _ in 1..p {
            out = out.mul_jet(self);
        }
        out
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

impl Add<&Jet> for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(rhs, 1.0);
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.add_scaled(rhs, 1.0);
    }
}

impl Sub<&Jet> for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<&Jet> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_jet(rhs)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.mul_jet(&rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(JetSpace::get(2, 2).len(), 6);
        assert_eq!(JetSpace::get(4, 3).len(), 35);
        assert_eq!(JetSpace::get(3, 0).len(), 1);
    }

    #[test]
    fn product_rule_and_hessian() {
        let v = Jet::variables(&[0.3, -0.7], 2);
        let f = &(&v[0] * &v[0]) * &v[1];
        assert!((f.value() - 0.09 * -0.7).abs() < 1e-15);
        let g = f.gradient();
        assert!((g[0] - 2.0 * 0.3 * -0.7).abs() < 1e-14);
        assert!((g[1] - 0.09).abs() < 1e-14);
        let h = f.hessian();
        assert!((h[0][0] - 2.0 * -0.7).abs() < 1e-14);
        assert!((h[0][1] - 0.6).abs() < 1e-14);
        assert!((h[1][0] - 0.6).abs() < 1e-14);
        assert_eq!(h[1][1], 0.0);
    }

    #[test]
    fn elementary_functions_match_finite_differences() {
        let x = [0.4, 1.3];
        let f = |p: &[f64]| (p[0].sin() * p[1].exp()).sqrt() + (p[1] * p[0]).cos() / (1.0 + p[0] * p[0]).ln();
        let v = Jet::variables(&x, 1);
        let one = v[0].constant_like(1.0);
        let j = (&v[0].sin() * &v[1].exp()).sqrt() + (&v[1] * &v[0]).cos().div_jet(&(&one + &(&v[0] * &v[0])).ln());
        assert!((j.value() - f(&x)).abs() < 1e-13);
        let fd = fd_gradient(f, &x, 1e-6);
        for (a, b) in j.gradient().iter().zip(fd) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
    }

    #[test]
    fn partial_lowers_order() {
        let v = Jet::variables(&[0.5, 0.2, 0.1], 3);
        let f = (&(&v[0] * &v[1]) * &v[2]).exp();
        let fx = f.partial(0);
        assert_eq!(fx.order(), 2);
        let fxy = fx.partial(1);
        let direct = f.derivative(&[1, 1, 0]);
        assert!((fxy.value() - direct).abs() < 1e-13);
    }

    #[test]
    fn third_derivative_of_power() {
        let v = Jet::variables(&[1.7], 3);
        let f = v[0].powi(4);
        assert!((f.derivative(&[3]) - 24.0 * 1.7).abs() < 1e-12);
    }
}
