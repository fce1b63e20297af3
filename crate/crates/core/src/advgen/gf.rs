//! Small finite fields: prime orders and GF(2^k) for k ≤ 8, as lookup tables.

use super::GenError;

/// Irreducible polynomials over GF(2), indexed by degree.
const IRREDUCIBLE: [u32; 9] = [0, 0b11, 0b111, 0b1011, 0b1_0011, 0b10_0101, 0b100_0011, 0b1000_0011, 0b1_0001_1011];

pub const MAX_ORDER: u32 = 256;

#[derive(Clone, Debug)]
pub struct GaloisField {
    q: u32,
    add: Vec<u16>,
    mul: Vec<u16>,
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn carryless_mul_mod(mut a: u32, mut b: u32, poly: u32, k: u32) -> u32 {
    let mut acc = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> k & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

impl GaloisField {
    /// Builds GF(q) for prime `q ≤ 256` or `q = 2^k` with `k ≤ 8`.
    pub fn new(q: u32) -> Result<Self, GenError> {
        if !(2..=MAX_ORDER).contains(&q) {
            return Err(GenError::Domain(format!("field order {q} outside [2, {MAX_ORDER}]")));
        }
        let size = (q * q) as usize;
        let mut add = Vec::with_capacity(size);
        let mut mul = Vec::with_capacity(size);
        if is_prime(q) {
            for a in 0..q {
                for b in 0..q {
                    add.push(((a + b) % q) as u16);
                    mul.push(((a * b) % q) as u16);
                }
            }
        } else if q.is_power_of_two() {
            let k = q.trailing_zeros();
            let poly = IRREDUCIBLE[k as usize];
            for a in 0..q {
                for b in 0..q {
                    add.push((a ^ b) as u16);
                    mul.push(carryless_mul_mod(a, b, poly, k) as u16);
                }
            }
        } else {
            return Err(GenError::Domain(format!("field order {q} is neither prime nor a power of two")));
        }
        Ok(GaloisField { q, add, mul })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.add[(a * self.q + b) as usize] as u32
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.mul[(a * self.q + b) as usize] as u32
    }

    /// Exhaustive check of the field axioms; `Err` names the first failure.
    pub fn check_axioms(&self) -> Result<(), String> {
        let q = self.q;
        for a in 0..q {
            if self.add(a, 0) != a || self.mul(a, 1) != a {
                return Err(format!("identity fails at {a}"));
            }
            if !(0..q).any(|b| self.add(a, b) == 0) {
                return Err(format!("{a} has no additive inverse"));
            }
            if a != 0 && !(0..q).any(|b| self.mul(a, b) == 1) {
                return Err(format!("{a} has no multiplicative inverse"));
            }
            for b in 0..q {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return Err(format!("commutativity fails at ({a}, {b})"));
                }
                for c in 0..q {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return Err(format!("additive associativity fails at ({a}, {b}, {c})"));
                    }
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return Err(format!("multiplicative associativity fails at ({a}, {b}, {c})"));
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return Err(format!("distributivity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fields_satisfy_axioms() {
        for q in [2, 3, 4, 5, 7, 8, 11, 13, 16] {
            GaloisField::new(q).unwrap().check_axioms().unwrap_or_else(|e| panic!("GF({q}): {e}"));
        }
    }

    #[test]
    fn large_binary_fields_have_inverses() {
        for q in [32, 64, 128, 256] {
            let f = GaloisField::new(q).unwrap();
            for a in 1..q {
                assert!((1..q).any(|b| f.mul(a, b) == 1), "GF({q}): {a}");
            }
        }
    }

    #[test]
    fn unsupported_orders() {
        for q in [0, 1, 6, 9, 12, 257, 512] {
            assert!(GaloisField::new(q).is_err(), "{q}");
        }
    }

    #[test]
    fn gf4_multiplication() {
        // x·x = x + 1 modulo x² + x + 1
        let f = GaloisField::new(4).unwrap();
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(2, 3), 1);
    }
}
