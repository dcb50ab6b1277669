//! Dense real polynomials in the absolute variable, plus the quadrature and
//! root-isolation helpers the rest of the crate builds on.

use std::sync::OnceLock;

/// Polynomial `c[0] + c[1] t + c[2] t^2 + ...`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    pub c: Vec<f64>,
}

impl Poly {
    pub fn new(c: Vec<f64>) -> Self {
        let mut p = Poly { c };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(v: f64) -> Self {
        Poly::new(vec![v])
    }

    fn trim(&mut self) {
        while matches!(self.c.last(), Some(v) if *v == 0.0) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &k| acc * t + k)
    }

    pub fn deriv(&self) -> Poly {
        if self.c.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &v)| v * k as f64)
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antideriv(&self) -> Poly {
        let mut c = Vec::with_capacity(self.c.len() + 1);
        c.push(0.0);
        for (k, &v) in self.c.iter().enumerate() {
            c.push(v / (k as f64 + 1.0));
        }
        Poly::new(c)
    }

    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let p = self.antideriv();
        p.eval(b) - p.eval(a)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.c.iter().map(|v| v * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.c.len().max(other.c.len());
        let c = (0..n)
            .map(|k| self.c.get(k).copied().unwrap_or(0.0) + other.c.get(k).copied().unwrap_or(0.0))
            .collect();
        Poly::new(c)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    /// `t -> p(s * t)`.
    pub fn rescale_arg(&self, s: f64) -> Poly {
        let mut f = 1.0;
        let mut c = Vec::with_capacity(self.c.len());
        for &v in &self.c {
            c.push(v * f);
            f *= s;
        }
        Poly::new(c)
    }

    /// `t -> p(t) * t`.
    pub fn times_t(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0];
        c.extend_from_slice(&self.c);
        Poly::new(c)
    }

    /// Largest coefficient magnitude, used to scale zero tests.
    pub fn norm(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Real roots in the closed interval `[lo, hi]`, sorted. Roots are isolated
    /// recursively on the monotone pieces between critical points; touching
    /// roots (even multiplicity) are reported when `|p| <= ztol` at a
    /// critical point.
    pub fn roots_in(&self, lo: f64, hi: f64, ztol: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if self.is_zero() || hi < lo {
            return out;
        }
        if self.degree() == 0 {
            return out;
        }
        let mut marks = vec![lo];
        marks.extend(self.deriv().roots_in(lo, hi, ztol).into_iter().filter(|&r| r > lo && r < hi));
        marks.push(hi);
        for &m in &marks {
            if self.eval(m).abs() <= ztol {
                out.push(m);
            }
        }
        for w in marks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (self.eval(a), self.eval(b));
            if fa.abs() <= ztol || fb.abs() <= ztol {
                continue;
            }
            if (fa < 0.0) != (fb < 0.0) {
                out.push(bisect(|t| self.eval(t), a, b, fa < 0.0));
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * (1.0 + b.abs()));
        out
    }
}

/// Bisection to machine resolution for a function known to change sign on
/// `[a, b]`; `rising` says whether it goes from negative to positive.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rising: bool) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let v = f(m);
        if (v < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Root of a monotone function on `[a, b]`: bisection until the bracket is
/// narrower than `tol`, then one Newton step that is kept only if it stays
/// inside the bracket and improves the residual.
pub fn monotone_root(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> f64 {
    let fa = f(a);
    let rising = fa < 0.0;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        let v = f(m);
        if v == 0.0 {
            return m;
        }
        if (v < 0.0) == rising {
            a = m;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    let v = f(m);
    let d = df(m);
    if d != 0.0 && d.is_finite() {
        let x = m - v / d;
        if x >= a && x <= b && f(x).abs() <= v.abs() {
            return x;
        }
    }
    m
}

fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

const GL_N: usize = 20;

fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GL_N))
}

/// 20-point Gauss-Legendre on `[a, b]`; exact for polynomials up to degree 39.
pub fn gauss(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl20();
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut s = 0.0;
    for i in 0..GL_N {
        s += w[i] * f(c + h * x[i]);
    }
    s * h
}

/// Adaptive Gauss-Legendre: splits until the two halves agree with the whole.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let whole = gauss(&f, a, b);
    adapt(&f, a, b, whole, tol, 0)
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let l = gauss(f, a, m);
    let r = gauss(f, m, b);
    if (l + r - whole).abs() <= tol.max(1e-15 * (l + r).abs()) || depth >= 40 {
        return l + r;
    }
    adapt(f, a, m, l, 0.5 * tol, depth + 1) + adapt(f, m, b, r, 0.5 * tol, depth + 1)
}

/// Adaptive integration over `[a, b]` split at the supplied breakpoints.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    let mut s = 0.0;
    for w in pts.windows(2) {
        s += integrate(&f, w[0], w[1], tol);
    }
    s
}
