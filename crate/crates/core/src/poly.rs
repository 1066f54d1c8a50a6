//! Polynomial roots via eigenvalues of the balanced companion matrix.
//!
//! The QR iteration is the classic Francis double-shift scheme on an upper
//! Hessenberg matrix, which the companion matrix already is.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{abs, sqrt};

/// Evaluates `sum c_i x^i` (ascending coefficients) by Horner's rule.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Roots of `sum c_i x^i`, coefficients in ascending order. Trailing zero
/// coefficients are dropped; a constant polynomial has no roots.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == 0.0 {
        deg -= 1;
    }
    if deg <= 1 {
        return Ok(Vec::new());
    }
    let n = deg - 1;
    let lead = coeffs[n];
    let mut a = vec![vec![0.0; n]; n];
    for (j, c) in coeffs[..n].iter().enumerate() {
        a[0][n - 1 - j] = -c / lead;
    }
    for i in 1..n {
        a[i][i - 1] = 1.0;
    }
    balance(&mut a);
    hqr(a)
}

fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += abs(a[j][i]);
                    r += abs(a[i][j]);
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[i][j] /= f;
                    a[j][i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix. Destroys `a`.
fn hqr(mut a: Vec<Vec<f64>>) -> Result<Vec<Complex64>> {
    let n = a.len() as isize;
    let mut out = vec![Complex64::new(0.0, 0.0); n as usize];
    let mut anorm = 0.0;
    for i in 0..n as usize {
        for j in i.saturating_sub(1)..n as usize {
            anorm += abs(a[i][j]);
        }
    }
    macro_rules! at {
        ($i:expr, $j:expr) => {
            a[($i) as usize][($j) as usize]
        };
    }
    let sign = |x: f64, s: f64| if s >= 0.0 { abs(x) } else { -abs(x) };
    let mut nn = n - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l > 0 {
                let mut s = abs(at!(l - 1, l - 1)) + abs(at!(l, l));
                if s == 0.0 {
                    s = anorm;
                }
                if abs(at!(l, l - 1)) <= f64::EPSILON * s {
                    at!(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = at!(nn, nn);
            if l == nn {
                out[nn as usize] = Complex64::new(x + t, 0.0);
                nn -= 1;
                break;
            }
            let mut y = at!(nn - 1, nn - 1);
            let mut w = at!(nn, nn - 1) * at!(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = sqrt(abs(q));
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    let hi = x + z;
                    out[nn as usize - 1] = Complex64::new(hi, 0.0);
                    out[nn as usize] = Complex64::new(if z != 0.0 { x - w / z } else { hi }, 0.0);
                } else {
                    out[nn as usize] = Complex64::new(x + p, -z);
                    out[nn as usize - 1] = Complex64::new(x + p, z);
                }
                nn -= 2;
                break;
            }
            if its == 120 {
                return Err(Error::NonFinite {
                    what: "eigenvalue iteration",
                    index: nn as usize,
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nn {
                    at!(i, i) -= x;
                }
                let s = abs(at!(nn, nn - 1)) + abs(at!(nn - 1, nn - 2));
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let (mut p, mut q, mut r);
            let mut m = nn - 2;
            loop {
                let z = at!(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / at!(m + 1, m) + at!(m, m + 1);
                q = at!(m + 1, m + 1) - z - rr - ss;
                r = at!(m + 2, m + 1);
                let s = abs(p) + abs(q) + abs(r);
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = abs(at!(m, m - 1)) * (abs(q) + abs(r));
                let v = abs(p) * (abs(at!(m - 1, m - 1)) + abs(z) + abs(at!(m + 1, m + 1)));
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m..nn - 1 {
                at!(i + 2, i) = 0.0;
                if i != m {
                    at!(i + 2, i - 1) = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = at!(k, k - 1);
                    q = at!(k + 1, k - 1);
                    r = if k + 1 != nn { at!(k + 2, k - 1) } else { 0.0 };
                    x = abs(p) + abs(q) + abs(r);
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign(sqrt(p * p + q * q + r * r), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            at!(k, k - 1) = -at!(k, k - 1);
                        }
                    } else {
                        at!(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = at!(k, j) + q * at!(k + 1, j);
                        if k + 1 != nn {
                            pp += r * at!(k + 2, j);
                            at!(k + 2, j) -= pp * z;
                        }
                        at!(k + 1, j) -= pp * y;
                        at!(k, j) -= pp * x;
                    }
                    let mmin = if nn < k + 3 { nn } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * at!(i, k) + y * at!(i, k + 1);
                        if k + 1 != nn {
                            pp += z * at!(i, k + 2);
                            at!(i, k + 2) -= pp * r;
                        }
                        at!(i, k + 1) -= pp * q;
                        at!(i, k) -= pp;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok(out)
}

/// Pairs each of `a` with a distinct nearest member of `b` (greedy) and
/// returns the largest distance relative to `max(1, |b_j|)`.
pub fn max_relative_mismatch(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for za in a {
        let mut best = None;
        for (j, zb) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (za - zb).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        match best {
            Some((j, d)) => {
                used[j] = true;
                let scale = b[j].norm().max(1.0);
                worst = worst.max(d / scale);
            }
            None => return f64::INFINITY,
        }
    }
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    worst
}
