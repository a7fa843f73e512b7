//! Small numeric helpers shared across modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

pub type Rng = ChaCha8Rng;

/// Seeded stream; `stream` separates replicas that share a base seed.
pub fn rng(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// log(e^a + e^b)
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// log(e^a - e^b), a >= b.
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    let d = 1.0 - (b - a).exp();
    if d <= 0.0 {
        f64::NEG_INFINITY
    } else {
        a + d.ln()
    }
}

pub fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_binom(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// log (2m-1)!! for 2m half-edges; (-1)!! = 1.
pub fn ln_double_factorial_odd(two_m: u64) -> f64 {
    debug_assert!(two_m % 2 == 0);
    let m = two_m / 2;
    ln_gamma(2.0 * m as f64 + 1.0) - m as f64 * std::f64::consts::LN_2 - ln_gamma(m as f64 + 1.0)
}

pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// All k-subsets of `items` as sorted vectors, lexicographic order.
pub fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn mask_of(vs: &[usize]) -> u64 {
    vs.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

pub fn members(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        out.push(v);
        m &= m - 1;
    }
    out
}

/// Round to 12 significant digits so serialized output is platform-stable.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.11e}", x).parse().unwrap_or(x)
}

/// 12-significant-digit text form.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..12).contains(&e) {
        let decimals = (11 - e).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{:.11e}", x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        let items: Vec<usize> = (0..6).collect();
        for k in 0..=6 {
            assert_eq!(combinations(&items, k).len() as f64, binom(6, k));
        }
        assert!(combinations(&items, 7).is_empty());
    }

    #[test]
    fn double_factorial() {
        assert!((ln_double_factorial_odd(0)).abs() < 1e-12);
        assert!((ln_double_factorial_odd(6) - 15f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn lse() {
        let v = [0.0, 0.0f64.ln_1p(), 1.0];
        let direct = v.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-14);
        assert!((log_sub(2f64.ln(), 0.0) - 0.0).abs() < 1e-14);
    }

    #[test]
    fn sig_format() {
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(24.5325301787), "24.5325301787");
        assert_eq!(fmt_sig(1e-9), "1.00000000000e-9");
    }
}
