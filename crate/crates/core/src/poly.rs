//! Dense univariate polynomials with rational coefficients.

use num_traits::{One, Zero};

use crate::linalg::Q;

/// Coefficients stored lowest degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn one() -> Self {
        Poly(vec![Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    /// Coefficients from the leading term down to the constant.
    pub fn coeffs_high_to_low(&self) -> Vec<Q> {
        self.0.iter().rev().cloned().collect()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `self · (X − a)`
    pub fn mul_linear(&self, a: &Q) -> Poly {
        let mut out = vec![Q::zero(); self.0.len() + 1];
        for (i, c) in self.0.iter().enumerate() {
            out[i + 1] += c;
            if !a.is_zero() {
                out[i] -= c * a;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &Q) -> Poly {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let out = (0..n)
            .map(|i| {
                let a = self.0.get(i).cloned().unwrap_or_else(Q::zero);
                match other.0.get(i) {
                    Some(b) => a - b,
                    None => a,
                }
            })
            .collect();
        Poly::new(out)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    /// Monic polynomial with the given roots, repeated by multiplicity.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Q>) -> Poly {
        roots.into_iter().fold(Poly::one(), |p, r| p.mul_linear(r))
    }

    /// Exact quotient by `X − r`, or `None` when `r` is not a root.
    pub fn div_linear(&self, r: &Q) -> Option<Poly> {
        let n = self.0.len();
        if n == 0 {
            return Some(Poly::zero());
        }
        let mut quot = vec![Q::zero(); n - 1];
        let mut carry = Q::zero();
        for i in (0..n).rev() {
            let v = &self.0[i] + &carry * r;
            if i == 0 {
                return v.is_zero().then(|| Poly::new(quot));
            }
            quot[i - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{q, q_frac};

    #[test]
    fn roots_round_trip() {
        let roots = [q(0), q(1), q(1), q_frac(1, 2)];
        let p = Poly::from_roots(roots.iter());
        assert_eq!(p.degree(), Some(4));
        for r in &roots {
            assert!(p.eval(r).is_zero());
        }
        let d = p.div_linear(&q_frac(1, 2)).unwrap();
        assert_eq!(d, Poly::from_roots([q(0), q(1), q(1)].iter()));
        assert!(p.div_linear(&q(2)).is_none());
    }

    #[test]
    fn subtraction_trims() {
        let a = Poly::new(vec![q(1), q(2)]);
        assert!(a.sub(&a).is_zero());
        assert_eq!(a.coeffs_high_to_low(), vec![q(2), q(1)]);
    }
}
