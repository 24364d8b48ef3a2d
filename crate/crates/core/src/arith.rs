//! Integer primality and factorization.
//!
//! Support-place computation needs the prime factorization of numerators and
//! denominators. Values up to `u64` range go through deterministic
//! Miller-Rabin plus Pollard rho; larger inputs are first stripped of small
//! primes and the remaining cofactor is split with a big-integer rho under an
//! iteration cap.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Witness set that makes Miller-Rabin deterministic for all `u64` inputs.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &MR_WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho with Floyd cycle detection; returns a nontrivial factor of a
/// composite `n`.
fn pollard_rho_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Full factorization of a `u64`; keys are prime, values are exponents.
pub fn factor_u64(mut n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    if n <= 1 {
        return out;
    }
    for p in [2u64, 3, 5] {
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            *out.entry(m).or_insert(0) += 1;
            continue;
        }
        let d = pollard_rho_u64(m);
        stack.push(d);
        stack.push(m / d);
    }
    out
}

/// Probabilistic Miller-Rabin for big integers (fixed witnesses; exact for
/// anything reachable through `u64` recursion, overwhelming confidence
/// beyond).
fn is_prime_big(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &MR_WITNESSES {
        let a = BigUint::from(a);
        let mut x = a.modpow(&d, n);
        if x == one || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho_big(n: &BigUint, max_iter: u64) -> Option<BigUint> {
    let one = BigUint::one();
    if n.is_even() {
        return Some(BigUint::from(2u32));
    }
    let mut c = BigUint::one();
    for _ in 0..8 {
        let mut x = BigUint::from(2u32);
        let mut y = x.clone();
        let mut d = BigUint::one();
        let mut iter = 0u64;
        while d == one {
            x = (&x * &x + &c) % n;
            y = (&y * &y + &c) % n;
            y = (&y * &y + &c) % n;
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
            iter += 1;
            if iter >= max_iter {
                break;
            }
        }
        if !d.is_zero() && d != one && &d != n {
            return Some(d);
        }
        c += 1u32;
    }
    None
}

/// Factor an arbitrary-precision natural number. Prime factors must fit in
/// `u64` (they become finite places); anything bigger is reported as a
/// resource failure rather than silently truncated.
pub fn factor_biguint(n: &BigUint) -> Result<BTreeMap<u64, u32>> {
    let mut out = BTreeMap::new();
    if n <= &BigUint::one() {
        return Ok(out);
    }
    let mut rest = n.clone();
    // Strip small primes first; smooth inputs (powers of small bases) never
    // reach the rho stage.
    for p in 2u64..1000 {
        if !is_prime_u64(p) {
            continue;
        }
        let pb = BigUint::from(p);
        while (&rest % &pb).is_zero() {
            *out.entry(p).or_insert(0) += 1;
            rest /= &pb;
        }
        if rest.is_one() {
            return Ok(out);
        }
    }
    let mut stack = vec![rest];
    while let Some(m) = stack.pop() {
        if m.is_one() {
            continue;
        }
        if let Some(small) = m.to_u64() {
            for (p, e) in factor_u64(small) {
                *out.entry(p).or_insert(0) += e;
            }
            continue;
        }
        if is_prime_big(&m) {
            return Err(Error::ResourceLimit(format!(
                "prime factor {m} does not fit in 64 bits"
            )));
        }
        match pollard_rho_big(&m, 1 << 22) {
            Some(d) => {
                stack.push(&m / &d);
                stack.push(d);
            }
            None => {
                return Err(Error::ResourceLimit(format!(
                    "failed to split composite cofactor {m}"
                )));
            }
        }
    }
    Ok(out)
}
