//! The Gaussian process indexed by centered losses on the exposed face of
//! the negated loss set, its expected supremum, and the exact empirical
//! fluctuation it approximates.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};

use crate::engine::pregret::p_regret_exact;
use crate::error::{Error, Result};
use crate::game::{Game, SimplexDist, DEFAULT_TIE_TOL};
use crate::games::experts::experts_simple_game_with_centroid;
use crate::numerics::{
    composition_count, for_each_composition, ln_factorials, multinomial_pmf, pow_saturating,
    MeanEstimate, NeumaierSum,
};
use crate::rng::parallel_samples;
use crate::strategy::IidStrategy;

/// Eigenvalues below `-PSD_TOL` are reported as a repair.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianLbConfig {
    pub horizon: usize,
    /// Antithetic pairs drawn.
    pub samples: usize,
    pub seed: u64,
    /// Cap on enumerated count vectors and sequences for the exact parts.
    pub cap: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianLbResult {
    /// Covariance of `ℓ(Z, f) - ℓ(Z, f*)` over the index set, in its order.
    pub covariance: Vec<Vec<f64>>,
    /// A negative eigenvalue beyond [`PSD_TOL`] was clipped.
    pub repaired: bool,
    /// `E sup_f G_f`.
    pub sup_expectation: MeanEstimate,
    /// `E sup_f G_f / √T`, the reported per-round scale.
    pub scale: f64,
    /// Closed form of `E sup` when the index set has two elements.
    pub two_point_oracle: Option<f64>,
    /// `E sup_f [E_p ℓ_f - (1/T)Σ_t ℓ(Z_t, f)]` over the index set.
    pub exact_fluctuation: Option<f64>,
    /// `Reg(p^T)/T` by sequence enumeration.
    pub iid_regret_over_t: Option<f64>,
}

/// `Cov(X_f, X_g)` under `p` for `X_f = ℓ(Z, f) - ℓ(Z, center)`.
pub fn centered_covariance(
    game: &Game,
    p: &SimplexDist,
    index: &[usize],
    center: usize,
) -> Vec<Vec<f64>> {
    let x = |f: usize, z: usize| game.loss(z, f) - game.loss(z, center);
    let means: Vec<f64> = index
        .iter()
        .map(|&f| (0..p.len()).map(|z| p[z] * x(f, z)).sum())
        .collect();
    index
        .iter()
        .enumerate()
        .map(|(a, &f)| {
            index
                .iter()
                .enumerate()
                .map(|(b, &g)| {
                    let m: f64 = (0..p.len()).map(|z| p[z] * x(f, z) * x(g, z)).sum();
                    m - means[a] * means[b]
                })
                .collect()
        })
        .collect()
}

/// Factor `A` with `A Aᵀ = C` after clipping negative eigenvalues.
fn sampling_factor(cov: &[Vec<f64>]) -> (DMatrix<f64>, bool) {
    let k = cov.len();
    let m = DMatrix::from_fn(k, k, |i, j| 0.5 * (cov[i][j] + cov[j][i]));
    let eig = SymmetricEigen::new(m);
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let repaired = min < -PSD_TOL;
    if repaired {
        log::warn!("covariance has eigenvalue {min:e}; clipping to zero");
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    (eig.eigenvectors * DMatrix::from_diagonal(&roots), repaired)
}

/// Antithetic Monte Carlo estimate of `E max_i G_i` for `G ~ N(0, C)`.
pub fn expected_sup(cov: &[Vec<f64>], samples: usize, seed: u64, op: &str) -> (MeanEstimate, bool) {
    let (a, repaired) = sampling_factor(cov);
    let k = cov.len();
    let xs = parallel_samples(seed, op, samples, |rng| {
        let w: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::NEG_INFINITY;
        for i in 0..k {
            let g: f64 = (0..k).map(|j| a[(i, j)] * w[j]).sum();
            hi = hi.max(g);
            lo = lo.max(-g);
        }
        0.5 * (hi + lo)
    });
    (MeanEstimate::from_samples(&xs), repaired)
}

/// Gaussian lower-bound scale at `p` over the index set `index ⊆ F*`,
/// centered at `center ∈ index`.
pub fn gaussian_lb_estimate(
    game: &Game,
    p: &SimplexDist,
    index: &[usize],
    center: usize,
    config: &GaussianLbConfig,
) -> Result<GaussianLbResult> {
    if p.len() != game.n_outcomes() {
        return Err(Error::invalid(
            "distribution dimension does not match the game",
        ));
    }
    if config.horizon == 0 || config.samples < 2 {
        return Err(Error::invalid("need T >= 1 and at least 2 samples"));
    }
    let face = game.phi(p, DEFAULT_TIE_TOL).argmin_indices;
    if face.len() < 2 {
        return Err(Error::NotApplicable(
            "Φ is differentiable at p: the minimizer is unique".into(),
        ));
    }
    if let Some(f) = index.iter().find(|f| !face.contains(f)) {
        return Err(Error::invalid(format!(
            "action {f} does not minimize the expected loss at p"
        )));
    }
    if !index.contains(&center) {
        return Err(Error::invalid("the center must belong to the index set"));
    }
    let covariance = centered_covariance(game, p, index, center);
    let (sup, repaired) = expected_sup(&covariance, config.samples, config.seed, "gaussian-lb");
    let two_point_oracle = (index.len() == 2).then(|| {
        let v = covariance[0][0] + covariance[1][1] - 2.0 * covariance[0][1];
        v.max(0.0).sqrt() / (2.0 * std::f64::consts::PI).sqrt()
    });

    let n = game.n_outcomes();
    let horizon = config.horizon;
    let t = horizon as f64;
    let exact_fluctuation = (composition_count(horizon, n) <= config.cap as u128).then(|| {
        let lf = ln_factorials(horizon);
        let means: Vec<f64> = game.expected_losses(p.weights());
        let mut acc = NeumaierSum::new();
        for_each_composition(horizon, n, |c| {
            let w = multinomial_pmf(c, p.weights(), &lf);
            if w > 0.0 {
                let best = index
                    .iter()
                    .map(|&f| {
                        let emp: f64 = c
                            .iter()
                            .enumerate()
                            .map(|(z, &k)| k as f64 * game.loss(z, f))
                            .sum();
                        means[f] - emp / t
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                acc.add(w * best);
            }
        });
        acc.value()
    });
    let iid_regret_over_t = if pow_saturating(n, horizon) <= config.cap as u128 {
        let s = IidStrategy::new(p.clone(), horizon)?;
        Some(p_regret_exact(game, &s, config.cap)?.value / t)
    } else {
        None
    };
    Ok(GaussianLbResult {
        covariance,
        repaired,
        sup_expectation: sup,
        scale: sup.mean / t.sqrt(),
        two_point_oracle,
        exact_fluctuation,
        iid_regret_over_t,
    })
}

/// Covariance of the experts process at the uniform distribution, indexed
/// by the `N` vertices and centered at the simplex centroid.
pub fn experts_covariance(n: usize) -> Result<Vec<Vec<f64>>> {
    let game = experts_simple_game_with_centroid(n)?;
    let vertices: Vec<usize> = (0..n).collect();
    Ok(centered_covariance(
        &game,
        &SimplexDist::uniform(n),
        &vertices,
        n,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlepianResult {
    /// `E sup X` for the experts process.
    pub sup_x: MeanEstimate,
    /// `E sup Y` for independent `N(0, 2/N)` coordinates.
    pub sup_y: MeanEstimate,
    /// `E sup X ≤ 2·E sup Y` within four combined standard errors.
    pub holds: bool,
}

/// Compares the experts process with independent Gaussians of variance
/// `2/N`, whose increments dominate.
pub fn slepian_check(n: usize, samples: usize, seed: u64) -> Result<SlepianResult> {
    if samples < 2 {
        return Err(Error::invalid("Monte Carlo needs at least 2 samples"));
    }
    let cov = experts_covariance(n)?;
    let (sup_x, _) = expected_sup(&cov, samples, seed, "slepian-x");
    let diag: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 2.0 / n as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    let (sup_y, _) = expected_sup(&diag, samples, seed, "slepian-y");
    let se = (sup_x.stderr.powi(2) + 4.0 * sup_y.stderr.powi(2)).sqrt();
    Ok(SlepianResult {
        sup_x,
        sup_y,
        holds: sup_x.mean <= 2.0 * sup_y.mean + 4.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::experts_simple_game;

    #[test]
    fn experts_covariance_entries() {
        for n in [2, 3, 5] {
            let c = experts_covariance(n).unwrap();
            let nf = n as f64;
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j {
                        (nf - 1.0) / (nf * nf)
                    } else {
                        -1.0 / (nf * nf)
                    };
                    assert!((c[i][j] - want).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn singleton_face_is_rejected() {
        let g = experts_simple_game(2).unwrap();
        let p = SimplexDist::new(vec![0.7, 0.3]).unwrap();
        let cfg = GaussianLbConfig {
            horizon: 2,
            samples: 10,
            seed: 0,
            cap: 1000,
        };
        assert!(matches!(
            gaussian_lb_estimate(&g, &p, &[1], 1, &cfg),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn two_point_oracle_and_equality_chain() {
        let g = experts_simple_game(2).unwrap();
        let cfg = GaussianLbConfig {
            horizon: 6,
            samples: 50_000,
            seed: 2,
            cap: 100_000,
        };
        let r = gaussian_lb_estimate(&g, &SimplexDist::uniform(2), &[0, 1], 0, &cfg).unwrap();
        let oracle = r.two_point_oracle.unwrap();
        assert!((oracle - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        assert!((r.sup_expectation.mean - oracle).abs() < 4.0 * r.sup_expectation.stderr);
        let (a, b) = (r.exact_fluctuation.unwrap(), r.iid_regret_over_t.unwrap());
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }
}
