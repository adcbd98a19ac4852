//! Small numerical helpers shared by the engines: compensated summation,
//! simplex projection, lattice and composition enumeration, and sample
//! statistics.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i as f64 + 1.0);
        if u - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    renormalize(&mut out);
    out
}

/// Rescale a nonnegative vector so it sums to one. Leaves an all-zero
/// vector untouched.
pub fn renormalize(v: &mut [f64]) {
    let s = compensated_sum(v.iter().copied());
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    }
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Binomial coefficient as `u128`, saturating.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// `base^exp` as `u128`, saturating.
pub fn pow_saturating(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Multinomial coefficient `(Σc)! / Π c_i!`, saturating.
pub fn multinomial_coefficient(counts: &[usize]) -> u128 {
    let mut remaining: usize = counts.iter().sum();
    let mut acc: u128 = 1;
    for &c in counts {
        acc = acc.saturating_mul(binomial(remaining as u64, c as u64));
        remaining -= c;
    }
    acc
}

/// Number of weak compositions of `total` into `parts` parts.
pub fn composition_count(total: usize, parts: usize) -> u128 {
    if parts == 0 {
        return if total == 0 { 1 } else { 0 };
    }
    binomial((total + parts - 1) as u64, (parts - 1) as u64)
}

/// Visit every weak composition of `total` into `parts` nonnegative parts
/// in lexicographic order.
pub fn for_each_composition(total: usize, parts: usize, mut visit: impl FnMut(&[usize])) {
    if parts == 0 {
        if total == 0 {
            visit(&[]);
        }
        return;
    }
    let mut counts = vec![0usize; parts];
    fn rec(idx: usize, remaining: usize, counts: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        let last = counts.len() - 1;
        if idx == last {
            counts[idx] = remaining;
            visit(counts);
            return;
        }
        for c in (0..=remaining).rev() {
            counts[idx] = c;
            rec(idx + 1, remaining - c, counts, visit);
        }
    }
    rec(0, total, &mut counts, &mut visit);
}

/// `ln k!` for `k = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Multinomial probability of `counts` under cell probabilities `p`.
pub fn multinomial_pmf(counts: &[usize], p: &[f64], ln_fact: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    let mut log_prob = ln_fact[total];
    for (&c, &pi) in counts.iter().zip(p) {
        if c == 0 {
            continue;
        }
        if pi <= 0.0 {
            return 0.0;
        }
        log_prob += c as f64 * pi.ln() - ln_fact[c];
    }
    log_prob.exp()
}

/// Points of the simplex lattice `{k / resolution}` in `dim` coordinates.
pub fn simplex_lattice(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for_each_composition(resolution, dim, |c| {
        out.push(c.iter().map(|&k| k as f64 / resolution as f64).collect());
    });
    out
}

/// Uniform (Dirichlet(1,...,1)) draw from the simplex.
pub fn random_simplex_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    renormalize(&mut v);
    v
}

/// Draw an index with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl MeanEstimate {
    /// Exact value, zero standard error.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            samples: 0,
        }
    }

    /// Mean and standard error computed in fixed order, shifted by the first
    /// sample so identical samples yield a standard error of exactly zero.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let shift = xs[0];
        let mut s = NeumaierSum::new();
        for &x in xs {
            s.add(x - shift);
        }
        let mean_shifted = s.value() / n as f64;
        let stderr = if n > 1 {
            let mut ss = NeumaierSum::new();
            for &x in xs {
                let d = (x - shift) - mean_shifted;
                ss.add(d * d);
            }
            (ss.value() / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean: shift + mean_shifted,
            stderr,
            samples: n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_lands_on_simplex() {
        let p = project_to_simplex(&[0.9, 0.8, -0.3]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|&x| x >= 0.0));
        assert!((p[0] - 0.55).abs() < 1e-12 && (p[1] - 0.45).abs() < 1e-12);
        assert_eq!(project_to_simplex(&[0.25, 0.75]), vec![0.25, 0.75]);
    }

    #[test]
    fn compositions_are_counted() {
        let mut n = 0;
        for_each_composition(4, 3, |c| {
            assert_eq!(c.iter().sum::<usize>(), 4);
            n += 1;
        });
        assert_eq!(n as u128, composition_count(4, 3));
        assert_eq!(composition_count(4, 3), 15);
    }

    #[test]
    fn multinomial_sums_to_one() {
        let lf = ln_factorials(6);
        let p = [0.2, 0.5, 0.3];
        let mut total = 0.0;
        for_each_composition(6, 3, |c| total += multinomial_pmf(c, &p, &lf));
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_samples_have_zero_stderr() {
        let est = MeanEstimate::from_samples(&[0.1; 37]);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.mean, 0.1);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let s = compensated_sum([1e16, 1.0, -1e16]);
        assert_eq!(s, 1.0);
    }
}
