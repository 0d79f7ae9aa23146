//! Randomized property suites behind `entinv verify`.

use entinv::channel::{apply_damping, excitations, DampingParameter};
use entinv::experiment::sagnac_transform;
use entinv::ghz::{evolve_and_check, GhzConfig};
use entinv::invariants::{excitation_from_purity, purity_from_excitation, Branch, LambdaParam};
use entinv::qstate::C64;
use entinv::tripartite::{build_initial, run_sweep, uniform_grid, PurificationAmplitudes, RESERVOIR, SYSTEM};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use entinv::experiment::substream;

pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
}

type Suite = fn(usize, &mut ChaCha8Rng) -> entinv::Result<(usize, f64)>;

const SUITES: [(&str, Suite); 5] = [
    ("tripartite conservation", tripartite),
    ("excitation conservation", excitation),
    ("sagnac equals damping", sagnac),
    ("ghz averaged law", ghz),
    ("purity round trip", round_trip),
];

/// Each suite draws from its own stream of `seed`.
pub fn run_all(draws: usize, seed: u64) -> entinv::Result<Vec<SuiteOutcome>> {
    SUITES
        .iter()
        .enumerate()
        .map(|(i, &(name, suite))| {
            let (cases, max_error) = suite(draws, &mut substream(seed, i as u64))?;
            Ok(SuiteOutcome { name, cases, max_error })
        })
        .collect()
}

fn tripartite(draws: usize, rng: &mut ChaCha8Rng) -> entinv::Result<(usize, f64)> {
    let grid = uniform_grid(11);
    let mut worst = 0.0f64;
    for _ in 0..draws {
        worst = worst.max(run_sweep(&PurificationAmplitudes::random(rng), &grid)?.max_residual);
    }
    Ok((draws * grid.len(), worst))
}

fn excitation(draws: usize, rng: &mut ChaCha8Rng) -> entinv::Result<(usize, f64)> {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let rho0 = PurificationAmplitudes::random(rng).system_density();
        let e = excitations(&rho0, DampingParameter::new(rng.random())?);
        worst = worst.max((e.total - rho0.rho_ee()).abs());
    }
    Ok((draws, worst))
}

fn sagnac(draws: usize, rng: &mut ChaCha8Rng) -> entinv::Result<(usize, f64)> {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let initial = build_initial(&PurificationAmplitudes::random(rng))?;
        let theta = rng.random::<f64>() * std::f64::consts::FRAC_PI_2;
        let optical = sagnac_transform(&initial, theta)?;
        let damped = apply_damping(&initial, SYSTEM, RESERVOIR, DampingParameter::new(theta.sin().powi(2))?)?;
        worst = worst.max(optical.max_abs_diff(&damped)?);
    }
    Ok((draws, worst))
}

fn ghz(draws: usize, rng: &mut ChaCha8Rng) -> entinv::Result<(usize, f64)> {
    let cases = draws.div_ceil(10);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.random_range(1..=4);
        let alpha2 = 0.5 * rng.random::<f64>();
        let alpha = C64::from_polar(alpha2.sqrt(), rng.random::<f64>() * std::f64::consts::TAU);
        let beta = C64::new((1.0 - alpha2).sqrt(), 0.0);
        let ps = (0..n).map(|_| rng.random()).collect();
        worst = worst.max(evolve_and_check(&GhzConfig::new(alpha, beta, ps)?)?.residual);
    }
    Ok((cases, worst))
}

fn round_trip(draws: usize, rng: &mut ChaCha8Rng) -> entinv::Result<(usize, f64)> {
    let mut worst = 0.0f64;
    for _ in 0..draws {
        let lambda = LambdaParam::new(rng.random_range(1e-3..=1.0))?;
        let n = rng.random_range(0.0..=lambda.value());
        let branch = if n >= lambda.value() / 2.0 { Branch::Upper } else { Branch::Lower };
        let purity = purity_from_excitation(n, lambda);
        let back = excitation_from_purity(purity, lambda, branch)?;
        worst = worst.max((back - n).abs()).max((purity_from_excitation(back, lambda) - purity).abs());
    }
    Ok((draws, worst))
}
