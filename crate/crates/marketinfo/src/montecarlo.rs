//! Simulation harness: sample the estimated information under the
//! efficient-market null and under biased generators, compare the empirical
//! law against the asymptotic gamma law with a Kolmogorov-Smirnov statistic,
//! and measure test size and power.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::asymptotic::{gamma_params, GammaParams};
use crate::error::{Error, Result};
use crate::symbolic::BinarySequence;

/// Bit-trajectory generator. `FairCoin`, `BiasedCoin(0.5)`, and
/// `Markov { pi_0: 0.5, pi_1: 0.5 }` all generate the same process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    FairCoin,
    BiasedCoin { p: f64 },
    /// First-order Markov chain on bits: `pi_0` is the probability of a 1
    /// after a 0, `pi_1` after a 1. The initial bit is a fair draw.
    Markov { pi_0: f64, pi_1: f64 },
}

impl GeneratorKind {
    /// Reduce the aliases of the fair coin to `FairCoin`.
    pub fn canonical(self) -> Self {
        let is_fair = match self {
            Self::FairCoin => true,
            Self::BiasedCoin { p } => p == 0.5,
            Self::Markov { pi_0, pi_1 } => pi_0 == 0.5 && pi_1 == 0.5,
        };
        if is_fair {
            Self::FairCoin
        } else {
            self
        }
    }

    fn validate(&self) -> Result<()> {
        let check = |p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Domain(format!("probability {p} outside [0, 1]")))
            }
        };
        match self {
            Self::FairCoin => Ok(()),
            Self::BiasedCoin { p } => check(*p),
            Self::Markov { pi_0, pi_1 } => check(*pi_0).and(check(*pi_1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    /// Bits per trajectory.
    pub n: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize) -> Result<Self> {
        kind.validate()?;
        if n == 0 {
            return Err(Error::Domain("trajectory length must be positive".into()));
        }
        Ok(Self { kind, n })
    }

    fn generate(&self, rng: &mut ChaCha8Rng) -> BinarySequence {
        let mut bits = Vec::with_capacity(self.n);
        match self.kind {
            GeneratorKind::FairCoin => {
                for _ in 0..self.n {
                    bits.push(u8::from(rng.gen_bool(0.5)));
                }
            }
            GeneratorKind::BiasedCoin { p } => {
                for _ in 0..self.n {
                    bits.push(u8::from(rng.gen_bool(p)));
                }
            }
            GeneratorKind::Markov { pi_0, pi_1 } => {
                let mut prev = u8::from(rng.gen_bool(0.5));
                bits.push(prev);
                for _ in 1..self.n {
                    let p = if prev == 1 { pi_1 } else { pi_0 };
                    prev = u8::from(rng.gen_bool(p));
                    bits.push(prev);
                }
            }
        }
        BinarySequence::new(bits).expect("generator emits only 0/1")
    }
}

/// Deterministic per-trial RNG: one ChaCha stream per trial index, so the
/// result is independent of scheduling and worker count.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Information estimates, ordered by trial index, excluding trials whose
    /// trajectory left some prefix unobserved.
    pub samples: Vec<f64>,
    /// Per-trial p-values, aligned with `samples`.
    pub p_values: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_pvalue: f64,
    /// Rejection rate at each confidence level (0.95, 0.99, 0.999), over
    /// the valid trials.
    pub rejection_rates: Vec<(f64, f64)>,
    /// Trials dropped because a prefix was never observed.
    pub unobserved_prefix_trials: usize,
    pub params: GammaParams,
    pub seed: u64,
    pub trials: usize,
}

pub const CONFIDENCE_LEVELS: [f64; 3] = [0.95, 0.99, 0.999];

/// Run `trials` independent trajectories and test each one.
pub fn simulate(spec: &GeneratorSpec, l: u32, trials: usize, seed: u64) -> Result<SimulationReport> {
    spec.kind.validate()?;
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if spec.n < l as usize + 1 {
        return Err(Error::InputTooShort {
            needed: l as usize + 1,
            got: spec.n,
        });
    }
    let params = gamma_params(l, spec.n - l as usize)?;
    let per_trial: Vec<Option<(f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let bits = spec.generate(&mut rng);
            match crate::efficiency::test_efficiency(&bits, l) {
                Ok(r) => Some((r.estimate.info, r.p_value)),
                Err(_) => None,
            }
        })
        .collect();

    let unobserved = per_trial.iter().filter(|t| t.is_none()).count();
    let (samples, p_values): (Vec<f64>, Vec<f64>) = per_trial.into_iter().flatten().unzip();

    let (ks, ks_p) = if samples.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let d = ks_statistic(&samples, &params)?;
        (d, ks_pvalue(d, samples.len()))
    };
    let m = samples.len().max(1) as f64;
    let rejection_rates = CONFIDENCE_LEVELS
        .iter()
        .map(|&level| {
            let alpha = 1.0 - level;
            let hits = p_values.iter().filter(|&&p| p < alpha).count();
            (level, hits as f64 / m)
        })
        .collect();

    Ok(SimulationReport {
        samples,
        p_values,
        ks_statistic: ks,
        ks_pvalue: ks_p,
        rejection_rates,
        unobserved_prefix_trials: unobserved,
        params,
        seed,
        trials,
    })
}

/// Two-sided Kolmogorov-Smirnov distance between the sample and the gamma
/// law: D = max_i max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m).
pub fn ks_statistic(samples: &[f64], params: &GammaParams) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("KS statistic needs a nonempty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = 1.0 - crate::asymptotic::survival(x.max(0.0), params)?;
        let upper = (i as f64 + 1.0) / m - cdf;
        let lower = cdf - i as f64 / m;
        d = d.max(upper).max(lower);
    }
    Ok(d)
}

/// Asymptotic Kolmogorov tail probability Q(sqrt(m) d), with
/// Q(z) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 z^2), truncated at 1e-12.
pub fn ks_pvalue(d: f64, m: usize) -> f64 {
    if d <= 0.0 {
        return 1.0;
    }
    let z = (m as f64).sqrt() * d;
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..1000u64 {
        let term = (-2.0 * (j * j) as f64 * z * z).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Fair-coin calibration across trajectory lengths: one row per n.
pub fn calibration_curve(
    l: u32,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<(usize, f64, f64, usize)>> {
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let spec = GeneratorSpec::new(GeneratorKind::FairCoin, n)?;
        let report = simulate(&spec, l, trials, seed)?;
        rows.push((
            n,
            report.ks_statistic,
            report.ks_pvalue,
            report.unobserved_prefix_trials,
        ));
    }
    Ok(rows)
}

/// Sample the gamma law by inverse transform through the tail quantile.
/// Used by self-tests so the reference sampler shares the survival code
/// it validates against, not a second sampling algorithm.
pub fn gamma_inverse_cdf_sample(params: &GammaParams, rng: &mut ChaCha8Rng) -> Result<f64> {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    crate::asymptotic::critical_value(u, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_equality() {
        assert_eq!(
            GeneratorKind::BiasedCoin { p: 0.5 }.canonical(),
            GeneratorKind::FairCoin
        );
        assert_eq!(
            GeneratorKind::Markov { pi_0: 0.5, pi_1: 0.5 }.canonical(),
            GeneratorKind::FairCoin
        );
        assert_ne!(
            GeneratorKind::BiasedCoin { p: 0.6 }.canonical(),
            GeneratorKind::FairCoin
        );
    }

    #[test]
    fn determinism_across_worker_counts() {
        let spec = GeneratorSpec::new(GeneratorKind::FairCoin, 100).unwrap();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = pool1.install(|| simulate(&spec, 1, 200, 9).unwrap());
        let b = pool4.install(|| simulate(&spec, 1, 200, 9).unwrap());
        assert_eq!(a, b);
        let c = pool4.install(|| simulate(&spec, 1, 200, 9).unwrap());
        assert_eq!(b, c);
    }

    #[test]
    fn fair_coin_ks_below_threshold() {
        let spec = GeneratorSpec::new(GeneratorKind::FairCoin, 100).unwrap();
        let report = simulate(&spec, 1, 1000, 20210521).unwrap();
        assert!(report.ks_statistic < 1.358 / (1000f64).sqrt(), "D = {}", report.ks_statistic);
        assert_eq!(report.unobserved_prefix_trials, 0);
    }

    #[test]
    fn degenerate_generator_all_unobserved() {
        let spec = GeneratorSpec::new(GeneratorKind::BiasedCoin { p: 1.0 }, 100).unwrap();
        let report = simulate(&spec, 1, 10, 5).unwrap();
        assert_eq!(report.unobserved_prefix_trials, 10);
        assert!(report.samples.is_empty());
    }

    #[test]
    fn markov_power_exceeds_fair_size() {
        let n = 100;
        let fair = simulate(&GeneratorSpec::new(GeneratorKind::FairCoin, n).unwrap(), 1, 1000, 77)
            .unwrap();
        let markov = simulate(
            &GeneratorSpec::new(GeneratorKind::Markov { pi_0: 0.3, pi_1: 0.7 }, n).unwrap(),
            1,
            1000,
            77,
        )
        .unwrap();
        assert!(markov.rejection_rates[0].1 > fair.rejection_rates[0].1);
    }

    #[test]
    fn ks_on_quantile_grid() {
        let params = gamma_params(1, 100).unwrap();
        let m = 64;
        let samples: Vec<f64> = (1..=m)
            .map(|i| {
                let tail = 1.0 - (i as f64 - 0.5) / m as f64;
                crate::asymptotic::critical_value(tail, &params).unwrap()
            })
            .collect();
        let d = ks_statistic(&samples, &params).unwrap();
        assert!((d - 1.0 / (2.0 * m as f64)).abs() < 1e-6, "D = {d}");
    }

    #[test]
    fn ks_self_consistency_draw() {
        let params = gamma_params(1, 100).unwrap();
        let mut rng = trial_rng(123, 0);
        let samples: Vec<f64> = (0..1000)
            .map(|_| gamma_inverse_cdf_sample(&params, &mut rng).unwrap())
            .collect();
        let d = ks_statistic(&samples, &params).unwrap();
        assert!(d < 1.358 / (1000f64).sqrt());
        assert!(ks_pvalue(d, 1000) > 0.05);
    }

    #[test]
    fn ks_degenerate_pileup() {
        let params = gamma_params(1, 100).unwrap();
        let d = ks_statistic(&vec![0.0; 50], &params).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_pvalue_reference_points() {
        assert_eq!(ks_pvalue(0.0, 100), 1.0);
        assert!((ks_pvalue(1.358, 1) - 0.05).abs() < 5e-4);
        assert!((ks_pvalue(1.949, 1) - 0.001).abs() < 5e-5);
    }

    #[test]
    fn calibration_matches_direct_simulate() {
        let rows = calibration_curve(1, &[60], 100, 4).unwrap();
        let direct = simulate(&GeneratorSpec::new(GeneratorKind::FairCoin, 60).unwrap(), 1, 100, 4)
            .unwrap();
        assert_eq!(rows[0].1, direct.ks_statistic);
        assert_eq!(rows[0].2, direct.ks_pvalue);
    }

    #[test]
    fn short_l2_grid_reports_unobserved() {
        let rows = calibration_curve(2, &[10], 200, 8).unwrap();
        assert!(rows[0].3 > 0);
    }

    #[test]
    fn sample_mean_matches_exact() {
        use crate::exact::{mean_exact, ConditionalSetup};
        let n = 128;
        let report =
            simulate(&GeneratorSpec::new(GeneratorKind::FairCoin, n + 1).unwrap(), 1, 2000, 31)
                .unwrap();
        let sample_mean: f64 =
            report.samples.iter().sum::<f64>() / report.samples.len() as f64;
        let exact = mean_exact(&ConditionalSetup::from_counts(1, vec![64, 64]).unwrap());
        let sample_var: f64 = report
            .samples
            .iter()
            .map(|x| (x - sample_mean).powi(2))
            .sum::<f64>()
            / (report.samples.len() - 1) as f64;
        let se = (sample_var / report.samples.len() as f64).sqrt();
        assert!(
            (sample_mean - exact).abs() < 3.0 * se + 0.002,
            "mean {sample_mean} vs exact {exact} (se {se})"
        );
    }
}
