//! Negacyclic number-theoretic transform over Z_q for the ring
//! Z_q[x]/(x^N + 1): coefficient i is pre-twisted by psi^i, then a
//! length-N cyclic NTT with omega = psi^2 is applied (bit-reversal first,
//! so both directions consume and produce natural coefficient order).

pub fn mul_mod(a: u32, b: u32, q: u32) -> u32 {
    ((a as u64 * b as u64) % q as u64) as u32
}

pub fn add_mod(a: u32, b: u32, q: u32) -> u32 {
    let s = a + b;
    if s >= q {
        s - q
    } else {
        s
    }
}

pub fn sub_mod(a: u32, b: u32, q: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        a + q - b
    }
}

pub fn pow_mod(mut base: u32, mut exp: u64, q: u32) -> u32 {
    let mut acc: u32 = 1;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u32, q: u32) -> u32 {
    // q prime: a^(q-2)
    pow_mod(a, (q - 2) as u64, q)
}

/// Smallest generator of Z_q^* for prime q, by trial over the prime
/// factors of q－1.
pub(crate) fn find_generator(q: u32) -> u32 {
    let phi = q - 1;
    let mut factors = Vec::new();
    let mut m = phi;
    let mut f = 2;
    while f * f <= m {
        if m % f == 0 {
            factors.push(f);
            while m % f == 0 {
                m /= f;
            }
        }
        f += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    'cand: for g in 2..q {
        for &f in &factors {
            if pow_mod(g, (phi / f) as u64, q) == 1 {
                continue 'cand;
            }
        }
        return g;
    }
    unreachable!("no generator for prime modulus")
}

fn bit_reverse_permute(data: &mut [u32]) {
    let n = data.len();
    let log_n = n.trailing_zeros();
    for i in 0..n {
        let j = (i as u32).reverse_bits() >> (32 - log_n);
        let j = j as usize;
        if i < j {
            data.swap(i, j);
        }
    }
}

/// In-place iterative Cooley-Tukey cyclic NTT. `twiddles[k]` must hold
/// omega^k (or omega^-k for the inverse direction).
fn cyclic_ntt(data: &mut [u32], twiddles: &[u32], q: u32) {
    let n = data.len();
    bit_reverse_permute(data);
    let mut m = 2;
    while m <= n {
        let half = m / 2;
        let step = n / m;
        for base in (0..n).step_by(m) {
            for j in 0..half {
                let w = twiddles[j * step];
                let lo = data[base + j];
                let hi = mul_mod(data[base + j + half], w, q);
                data[base + j] = add_mod(lo, hi, q);
                data[base + j + half] = sub_mod(lo, hi, q);
            }
        }
        m *= 2;
    }
}

/// Precomputed twist and twiddle tables for one (N, q, psi) choice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct NttTables {
    pub n: usize,
    pub q: u32,
    pub psi: u32,
    psi_pows: Vec<u32>,
    psi_inv_pows: Vec<u32>,
    omega_pows: Vec<u32>,
    omega_inv_pows: Vec<u32>,
    n_inv: u32,
}

impl NttTables {
    pub fn new(n: usize, q: u32, psi: u32) -> NttTables {
        assert!(n.is_power_of_two());
        debug_assert_eq!(pow_mod(psi, n as u64, q), q - 1, "psi^N must be -1");
        let psi_inv = inv_mod(psi, q);
        let omega = mul_mod(psi, psi, q);
        let omega_inv = inv_mod(omega, q);
        let table = |b: u32| -> Vec<u32> {
            let mut v = Vec::with_capacity(n);
            let mut cur = 1u32;
            for _ in 0..n {
                v.push(cur);
                cur = mul_mod(cur, b, q);
            }
            v
        };
        NttTables {
            n,
            q,
            psi,
            psi_pows: table(psi),
            psi_inv_pows: table(psi_inv),
            omega_pows: table(omega),
            omega_inv_pows: table(omega_inv),
            n_inv: inv_mod(n as u32, q),
        }
    }

    /// Negacyclic forward transform, natural order in and out.
    pub fn forward(&self, coeffs: &[u32]) -> Vec<u32> {
        assert_eq!(coeffs.len(), self.n);
        let mut data: Vec<u32> = coeffs
            .iter()
            .zip(self.psi_pows.iter())
            .map(|(&c, &t)| mul_mod(c, t, self.q))
            .collect();
        cyclic_ntt(&mut data, &self.omega_pows, self.q);
        data
    }

    /// Exact inverse of [`forward`], including 1/N scaling and untwist.
    pub fn inverse(&self, values: &[u32]) -> Vec<u32> {
        assert_eq!(values.len(), self.n);
        let mut data = values.to_vec();
        cyclic_ntt(&mut data, &self.omega_inv_pows, self.q);
        for (i, v) in data.iter_mut().enumerate() {
            *v = mul_mod(mul_mod(*v, self.n_inv, self.q), self.psi_inv_pows[i], self.q);
        }
        data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_orders() {
        for q in [7681u32, 12289] {
            let g = find_generator(q);
            assert_eq!(pow_mod(g, (q - 1) as u64, q), 1);
            assert_ne!(pow_mod(g, ((q - 1) / 2) as u64, q), 1);
        }
    }

    #[test]
    fn forward_of_unit_impulse_is_all_ones() {
        let q = 7681;
        let g = find_generator(q);
        let psi = pow_mod(g, ((q - 1) / 512) as u64, q);
        let t = NttTables::new(256, q, psi);
        let mut delta = vec![0u32; 256];
        delta[0] = 1;
        assert_eq!(t.forward(&delta), vec![1u32; 256]);
        assert_eq!(t.inverse(&vec![1u32; 256]), delta);
    }

    #[test]
    fn round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let q = 12289;
        let g = find_generator(q);
        let psi = pow_mod(g, ((q - 1) / 1024) as u64, q);
        let t = NttTables::new(512, q, psi);
        for _ in 0..50 {
            let x: Vec<u32> = (0..512).map(|_| rng.gen_range(0..q)).collect();
            assert_eq!(t.inverse(&t.forward(&x)), x);
        }
    }
}
