//! Truncated Taylor jets in the three chart variables `(x, y, t)`.
//!
//! A [`Jet`] stores the Taylor coefficients `∂ˣ∂ʸ∂ᵗ f / (i! j! k!)` of a scalar
//! up to total order four at a base point. Jets also carry the order up to
//! which their coefficients are trustworthy: taking a partial derivative
//! lowers it by one, and arithmetic keeps the minimum of its operands. Every
//! derivative needed by the geometric layers is read off a jet, so asking for
//! more derivatives than a pipeline produced is an error instead of a silent
//! zero.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use thiserror::Error;

/// Maximal total order.
pub const ORDER: usize = 4;
/// Number of monomials `x^i y^j t^k` with `i + j + k <= 4`.
pub const NCOEFF: usize = 35;

/// Multi-index `(i, j, k)` over `(x, y, t)`.
pub type MultiIndex = [u8; 3];
/// A point `(x, y, t)` of a chart.
pub type Point = [f64; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet with zero constant term")]
    DegenerateJet,
    #[error("{func} is not defined at {value}")]
    Domain { func: &'static str, value: f64 },
    #[error("derivative of order {needed} requested but only {available} orders are valid")]
    OrderExhausted { needed: usize, available: usize },
}

struct Tables {
    monos: [MultiIndex; NCOEFF],
    degree: [u8; NCOEFF],
    lookup: [[[u8; ORDER + 1]; ORDER + 1]; ORDER + 1],
    /// `(a, b, c)` with `mono[a] + mono[b] = mono[c]`.
    products: Vec<(u8, u8, u8)>,
}

const NONE: u8 = u8::MAX;

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut monos = [[0u8; 3]; NCOEFF];
        let mut degree = [0u8; NCOEFF];
        let mut lookup = [[[NONE; ORDER + 1]; ORDER + 1]; ORDER + 1];
        let mut n = 0;
        for d in 0..=ORDER {
            for i in (0..=d).rev() {
                for j in (0..=d - i).rev() {
                    let k = d - i - j;
                    monos[n] = [i as u8, j as u8, k as u8];
                    degree[n] = d as u8;
                    lookup[i][j][k] = n as u8;
                    n += 1;
                }
            }
        }
        debug_assert_eq!(n, NCOEFF);
        let mut products = Vec::new();
        for a in 0..NCOEFF {
            for b in 0..NCOEFF {
                if degree[a] + degree[b] <= ORDER as u8 {
                    let m = [
                        monos[a][0] + monos[b][0],
                        monos[a][1] + monos[b][1],
                        monos[a][2] + monos[b][2],
                    ];
                    let c = lookup[m[0] as usize][m[1] as usize][m[2] as usize];
                    products.push((a as u8, b as u8, c));
                }
            }
        }
        Tables {
            monos,
            degree,
            lookup,
            products,
        }
    })
}

/// Position of a multi-index in the coefficient array, if `|m| <= 4`.
pub fn index_of(m: MultiIndex) -> Option<usize> {
    if m.iter().map(|&v| v as usize).sum::<usize>() > ORDER {
        return None;
    }
    let i = tables().lookup[m[0] as usize][m[1] as usize][m[2] as usize];
    (i != NONE).then_some(i as usize)
}

/// Multi-index stored at position `i`.
pub fn multi_index(i: usize) -> MultiIndex {
    tables().monos[i]
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

/// Order-4 truncated Taylor expansion of a scalar at a base point.
#[derive(Clone, PartialEq)]
pub struct Jet {
    coeffs: [f64; NCOEFF],
    order: u8,
    base: Point,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.coeffs[0])
            .field("order", &self.order)
            .field("base", &self.base)
            .finish()
    }
}

impl Jet {
    pub fn constant(base: Point, value: f64) -> Self {
        let mut coeffs = [0.0; NCOEFF];
        coeffs[0] = value;
        Self {
            coeffs,
            order: ORDER as u8,
            base,
        }
    }

    /// The coordinate function `axis` (0 = x, 1 = y, 2 = t) seeded at `base`.
    pub fn variable(base: Point, axis: usize) -> Self {
        let mut jet = Self::constant(base, base[axis]);
        let mut m = [0u8; 3];
        m[axis] = 1;
        jet.coeffs[index_of(m).unwrap()] = 1.0;
        jet
    }

    /// Seeds for all three coordinates at `base`.
    pub fn seeds(base: Point) -> [Jet; 3] {
        [
            Self::variable(base, 0),
            Self::variable(base, 1),
            Self::variable(base, 2),
        ]
    }

    /// Builds a jet from raw Taylor coefficients (graded order, see [`multi_index`]).
    pub fn from_coeffs(base: Point, coeffs: [f64; NCOEFF], order: usize) -> Self {
        let mut jet = Self {
            coeffs,
            order: order.min(ORDER) as u8,
            base,
        };
        jet.truncate();
        jet
    }

    fn truncate(&mut self) {
        let t = tables();
        for (c, &d) in self.coeffs.iter_mut().zip(t.degree.iter()) {
            if d > self.order {
                *c = 0.0;
            }
        }
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn base(&self) -> Point {
        self.base
    }

    /// Highest total order whose coefficients are valid.
    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn coeffs(&self) -> &[f64; NCOEFF] {
        &self.coeffs
    }

    /// Taylor coefficient `∂^m f / m!`.
    pub fn coeff(&self, m: MultiIndex) -> Result<f64, JetError> {
        let needed = m.iter().map(|&v| v as usize).sum::<usize>();
        if needed > self.order() {
            return Err(JetError::OrderExhausted {
                needed,
                available: self.order(),
            });
        }
        Ok(self.coeffs[index_of(m).unwrap()])
    }

    /// Partial derivative `∂^m f` at the base point.
    pub fn derivative(&self, m: MultiIndex) -> Result<f64, JetError> {
        let scale: f64 = m.iter().map(|&v| factorial(v)).product();
        Ok(self.coeff(m)? * scale)
    }

    /// The jet of `∂f/∂axis`, valid to one order less.
    pub fn partial(&self, axis: usize) -> Result<Jet, JetError> {
        if self.order == 0 {
            return Err(JetError::OrderExhausted {
                needed: 1,
                available: 0,
            });
        }
        let t = tables();
        let mut out = [0.0; NCOEFF];
        for (n, m) in t.monos.iter().enumerate() {
            if t.degree[n] + 1 > self.order {
                continue;
            }
            let mut up = *m;
            up[axis] += 1;
            let src = t.lookup[up[0] as usize][up[1] as usize][up[2] as usize];
            out[n] = f64::from(up[axis]) * self.coeffs[src as usize];
        }
        Ok(Jet {
            coeffs: out,
            order: self.order - 1,
            base: self.base,
        })
    }

    /// The jet of `ξ ↦ ∫_0^ξ f` along `axis`, measured from the base point.
    ///
    /// The result vanishes on the hyperplane `axis = base[axis]` and is valid
    /// to one order more than `self` (capped at four).
    pub fn integrate(&self, axis: usize) -> Jet {
        let t = tables();
        let order = (self.order + 1).min(ORDER as u8);
        let mut out = [0.0; NCOEFF];
        for (n, m) in t.monos.iter().enumerate() {
            if m[axis] == 0 || t.degree[n] > order {
                continue;
            }
            let mut down = *m;
            down[axis] -= 1;
            let src = t.lookup[down[0] as usize][down[1] as usize][down[2] as usize];
            out[n] = self.coeffs[src as usize] / f64::from(m[axis]);
        }
        Jet {
            coeffs: out,
            order,
            base: self.base,
        }
    }

    fn zip_order(&self, other: &Jet) -> u8 {
        debug_assert_eq!(self.base, other.base, "jets expanded at different points");
        self.order.min(other.order)
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn add_const(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// `self / other` by the graded quotient recursion.
    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(JetError::DegenerateJet);
        }
        let order = self.zip_order(other);
        let t = tables();
        let mut q = [0.0; NCOEFF];
        for n in 0..NCOEFF {
            if t.degree[n] > order {
                break;
            }
            if n == 0 {
                q[0] = self.coeffs[0] / b0;
                continue;
            }
            let target = t.monos[n];
            let mut acc = self.coeffs[n];
            for m in 1..=n {
                let mm = t.monos[m];
                if mm[0] > target[0] || mm[1] > target[1] || mm[2] > target[2] {
                    continue;
                }
                let rest = [target[0] - mm[0], target[1] - mm[1], target[2] - mm[2]];
                let r = t.lookup[rest[0] as usize][rest[1] as usize][rest[2] as usize];
                acc -= other.coeffs[m] * q[r as usize];
            }
            q[n] = acc / b0;
        }
        Ok(Jet {
            coeffs: q,
            order,
            base: self.base,
        })
    }

    /// Composes a univariate function with the jet, given the function's
    /// derivatives `f^(n)(a0)` for `n = 0..=4` at `a0 = self.value()`.
    pub fn compose(&self, derivs: [f64; ORDER + 1]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut out = Jet::constant(self.base, derivs[0]);
        out.order = self.order;
        let mut power = delta.clone();
        let mut fact = 1.0;
        for (n, d) in derivs.iter().enumerate().skip(1) {
            if n > self.order() {
                break;
            }
            fact *= n as f64;
            let c = d / fact;
            for (o, p) in out.coeffs.iter_mut().zip(power.coeffs.iter()).skip(1) {
                *o += c * p;
            }
            if n < ORDER {
                power = &power * &delta;
            }
        }
        out.truncate();
        out
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e; 5])
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain {
                func: "log",
                value: a,
            });
        }
        let r = 1.0 / a;
        Ok(self.compose([a.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 || !a.is_finite() {
            return Err(JetError::Domain {
                func: "sqrt",
                value: a,
            });
        }
        let s = a.sqrt();
        let r = 1.0 / a;
        Ok(self.compose([
            s,
            0.5 * s * r,
            -0.25 * s * r * r,
            0.375 * s * r * r * r,
            -0.9375 * s * r * r * r * r,
        ]))
    }

    pub fn abs(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if a > 0.0 {
            Ok(self.clone())
        } else if a < 0.0 {
            Ok(-self)
        } else {
            Err(JetError::Domain {
                func: "abs",
                value: a,
            })
        }
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: i32) -> Result<Jet, JetError> {
        let mut acc = Jet::constant(self.base, 1.0);
        acc.order = self.order;
        for _ in 0..n.unsigned_abs() {
            acc = &acc * self;
        }
        if n < 0 {
            Jet::constant(self.base, 1.0).div(&acc)
        } else {
            Ok(acc)
        }
    }

    /// Real power `exp(p log a)`; requires a positive value.
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let a = self.value();
        if a <= 0.0 {
            return Err(JetError::Domain {
                func: "pow",
                value: a,
            });
        }
        Ok(self.ln()?.scale(p).exp())
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        let order = self.zip_order(rhs);
        let mut out = self.clone();
        out.order = order;
        out.coeffs
            .iter_mut()
            .zip(rhs.coeffs.iter())
            .for_each(|(a, b)| *a += b);
        out.truncate();
        out
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        let order = self.zip_order(rhs);
        let mut out = self.clone();
        out.order = order;
        out.coeffs
            .iter_mut()
            .zip(rhs.coeffs.iter())
            .for_each(|(a, b)| *a -= b);
        out.truncate();
        out
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let order = self.zip_order(rhs);
        let t = tables();
        let mut out = [0.0; NCOEFF];
        for &(a, b, c) in &t.products {
            if t.degree[c as usize] <= order {
                out[c as usize] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
            }
        }
        Jet {
            coeffs: out,
            order,
            base: self.base,
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `Σ aᵢ bᵢ` over jets.
pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let mut it = a.iter().zip(b.iter());
    let (a0, b0) = it.next().expect("empty dot product");
    it.fold(a0 * b0, |acc, (x, y)| acc + x * y)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: Point = [0.3, -0.2, 0.5];

    #[test]
    fn layout_has_35_graded_entries() {
        assert_eq!(multi_index(0), [0, 0, 0]);
        assert_eq!(index_of([4, 0, 0]).map(multi_index), Some([4, 0, 0]));
        assert_eq!(index_of([2, 2, 1]), None);
        for i in 0..NCOEFF {
            assert_eq!(index_of(multi_index(i)), Some(i));
        }
    }

    #[test]
    fn square_of_seed() {
        let x = Jet::variable([3.0, 0.0, 0.0], 0);
        let sq = &x * &x;
        assert_eq!(sq.value(), 9.0);
        assert_eq!(sq.derivative([1, 0, 0]).unwrap(), 6.0);
        assert_eq!(sq.coeff([2, 0, 0]).unwrap(), 1.0);
        assert_eq!(sq.coeff([3, 0, 0]).unwrap(), 0.0);
    }

    #[test]
    fn one_over_one_is_identity() {
        let one = Jet::constant(P, 1.0);
        assert_eq!(one.div(&one).unwrap(), one);
    }

    #[test]
    fn geometric_series() {
        // (1+x)^-1 = Σ (-x)^n: oracle is the series itself.
        let x = Jet::variable([0.0; 3], 0);
        let q = Jet::constant([0.0; 3], 1.0).div(&x.add_const(1.0)).unwrap();
        for n in 0..=4u8 {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(q.coeff([n, 0, 0]).unwrap(), expected);
        }
    }

    #[test]
    fn division_by_zero_constant_term() {
        let x = Jet::variable([0.0; 3], 0);
        assert_eq!(x.div(&x), Err(JetError::DegenerateJet));
    }

    #[test]
    fn elementary_examples() {
        let zero = Jet::constant(P, 0.0);
        assert_eq!(zero.exp(), Jet::constant(P, 1.0));

        let x = Jet::variable([0.7, 0.0, 0.0], 0);
        let back = x.exp().ln().unwrap();
        for i in 0..NCOEFF {
            assert!((back.coeffs()[i] - x.coeffs()[i]).abs() < 1e-14);
        }

        let pi6 = std::f64::consts::PI / 6.0;
        let s = Jet::variable([pi6, 0.0, 0.0], 0).sin();
        assert!((s.value() - 0.5).abs() < 1e-15);
        assert!((s.derivative([1, 0, 0]).unwrap() - pi6.cos()).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_report_value() {
        let j = Jet::constant(P, -2.0);
        assert_eq!(
            j.ln(),
            Err(JetError::Domain {
                func: "log",
                value: -2.0
            })
        );
        assert!(j.sqrt().is_err());
        assert!(j.powf(0.5).is_err());
        assert!(Jet::constant(P, 0.0).abs().is_err());
    }

    #[test]
    fn partial_lowers_order() {
        let x = Jet::variable(P, 0);
        let y = Jet::variable(P, 1);
        let f = (&x * &x) * &y;
        let fx = f.partial(0).unwrap();
        assert_eq!(fx.order(), 3);
        assert!((fx.value() - 2.0 * P[0] * P[1]).abs() < 1e-15);
        let fxxxxx = fx
            .partial(0)
            .and_then(|j| j.partial(0))
            .and_then(|j| j.partial(0))
            .and_then(|j| j.partial(0));
        assert!(fxxxxx.is_err());
        assert!(matches!(
            fx.derivative([4, 0, 0]),
            Err(JetError::OrderExhausted { .. })
        ));
    }

    #[test]
    fn integrate_inverts_partial() {
        let [x, y, _] = Jet::seeds(P);
        let f = (&x * &y).sin();
        let g = f.integrate(0);
        assert_eq!(g.value(), 0.0);
        let back = g.partial(0).unwrap();
        for n in 0..NCOEFF {
            if tables().degree[n] as usize <= back.order() {
                assert!((back.coeffs()[n] - f.coeffs()[n]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn powers_agree() {
        let [x, y, _] = Jet::seeds([1.3, 0.4, 0.0]);
        let b = &x + &y;
        let cube = &(&b * &b) * &b;
        let p3 = b.powi(3).unwrap();
        let pf = b.powf(3.0).unwrap();
        for i in 0..NCOEFF {
            assert!((cube.coeffs()[i] - p3.coeffs()[i]).abs() < 1e-13);
            assert!((cube.coeffs()[i] - pf.coeffs()[i]).abs() < 1e-12);
        }
        let inv = b.powi(-2).unwrap();
        assert!((inv.value() - 1.0 / (1.7f64 * 1.7)).abs() < 1e-15);
    }
}
