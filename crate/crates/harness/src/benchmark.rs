//! Static/Varying sweeps over missions, repeat seeds and planners.

use rand::seq::IteratorRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BenchmarkConfig, FeatureKind, MissionConfig, PlannerKind, Protocol};
use crate::error::{HarnessError, Result};
use crate::mission::{run_mission, EpisodeLog};
use crate::seeds;

/// Position of one episode in the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EpisodeKey {
    pub planner: PlannerKind,
    pub repeat: usize,
    pub mission: usize,
}

impl EpisodeKey {
    pub fn file_stem(&self, protocol: Protocol) -> String {
        format!("{}_{}_r{}_m{:03}", self.planner.name(), protocol.name(), self.repeat, self.mission)
    }
}

/// Per-planner aggregate; metric arrays follow `MetricsRecord::CSV_HEADER`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub planner: PlannerKind,
    pub protocol: Protocol,
    pub mean: [Option<f64>; 6],
    /// Population std of the per-repeat means.
    pub std: [Option<f64>; 6],
    pub replan_time_s: f64,
    pub replan_time_max_s: f64,
    pub valid: usize,
    pub invalid: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkRun {
    pub config: BenchmarkConfig,
    pub summary: Vec<SummaryRow>,
    pub episodes: Vec<(EpisodeKey, EpisodeLog)>,
}

/// Mission config for one (repeat, mission) slot. Every planner gets the
/// same world, hyperparameters and sensor noise stream.
pub fn mission_config(cfg: &BenchmarkConfig, planner: PlannerKind, repeat: usize, mission: usize) -> MissionConfig {
    let repeat_seed = seeds::derive(cfg.seed, repeat as u64);
    let seed = seeds::derive(repeat_seed, mission as u64);
    let mut m = cfg.mission.clone();
    m.seed = seed;
    m.planner = planner;
    match cfg.protocol {
        Protocol::Static => {
            m.threshold = cfg.static_threshold;
            m.gp.lengthscale = cfg.static_lengthscale;
            m.interesting_classes = vec![1];
        }
        Protocol::Varying => {
            let mut rng = seeds::stream(seed, seeds::HYPERPARAMS);
            let (t0, t1) = cfg.threshold_range;
            let (l0, l1) = cfg.lengthscale_range;
            m.threshold = rng.random_range(t0..=t1);
            m.gp.lengthscale = rng.random_range(l0..=l1);
            let k = m.occupancy.classes;
            let size = rng.random_range(1..=k as usize);
            let mut classes: Vec<u16> = (1..=k).choose_multiple(&mut rng, size);
            classes.sort_unstable();
            m.interesting_classes = classes;
        }
    }
    if m.kind == FeatureKind::Continuous {
        m.interesting_classes = vec![1];
    }
    m
}

/// Runs the sweep on `threads` workers (1 runs inline). Results do not
/// depend on the thread count.
pub fn run_benchmark(cfg: &BenchmarkConfig, threads: usize) -> Result<BenchmarkRun> {
    cfg.validate()?;
    let mut keys = Vec::new();
    for &planner in &cfg.planners {
        for repeat in 0..cfg.repeats {
            for mission in 0..cfg.missions {
                keys.push(EpisodeKey { planner, repeat, mission });
            }
        }
    }
    let run = |k: &EpisodeKey| -> Result<(EpisodeKey, EpisodeLog)> {
        let m = mission_config(cfg, k.planner, k.repeat, k.mission);
        Ok((*k, run_mission(&m)?))
    };
    let mut episodes: Vec<(EpisodeKey, EpisodeLog)> = if threads <= 1 {
        keys.iter().map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| keys.par_iter().map(run).collect::<Result<_>>())?
    };
    episodes.sort_by_key(|(k, _)| *k);
    let summary = summarize(cfg.protocol, &cfg.planners, cfg.repeats, &episodes);
    Ok(BenchmarkRun { config: cfg.clone(), summary, episodes })
}

/// Mean over valid episodes and std across repeat means, per planner.
pub fn summarize(
    protocol: Protocol,
    planners: &[PlannerKind],
    repeats: usize,
    episodes: &[(EpisodeKey, EpisodeLog)],
) -> Vec<SummaryRow> {
    let mut sorted: Vec<&(EpisodeKey, EpisodeLog)> = episodes.iter().collect();
    sorted.sort_by_key(|(k, _)| *k);
    planners
        .iter()
        .map(|&planner| {
            let mine: Vec<&(EpisodeKey, EpisodeLog)> = sorted.iter().copied().filter(|(k, _)| k.planner == planner).collect();
            let valid: Vec<&(EpisodeKey, EpisodeLog)> = mine.iter().copied().filter(|(_, l)| l.valid).collect();
            let mut mean = [None; 6];
            let mut std = [None; 6];
            for j in 0..6 {
                let all: Vec<f64> = valid.iter().filter_map(|(_, l)| l.metrics.as_ref()?.values()[j]).collect();
                mean[j] = average(&all);
                let per_repeat: Vec<f64> = (0..repeats)
                    .filter_map(|r| {
                        let v: Vec<f64> = valid
                            .iter()
                            .filter(|(k, _)| k.repeat == r)
                            .filter_map(|(_, l)| l.metrics.as_ref()?.values()[j])
                            .collect();
                        average(&v)
                    })
                    .collect();
                std[j] = population_std(&per_repeat);
            }
            let times: Vec<f64> = mine.iter().flat_map(|(_, l)| l.replan_seconds.iter().copied()).collect();
            SummaryRow {
                planner,
                protocol,
                mean,
                std,
                replan_time_s: average(&times).unwrap_or(0.0),
                replan_time_max_s: times.iter().copied().fold(0.0, f64::max),
                valid: valid.len(),
                invalid: mine.len() - valid.len(),
            }
        })
        .collect()
}

pub fn average(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn population_std(v: &[f64]) -> Option<f64> {
    let m = average(v)?;
    Some((v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use unified_ipp::metrics::MetricsRecord;

    fn log(ii: f64) -> EpisodeLog {
        EpisodeLog {
            config: MissionConfig::default(),
            steps: Vec::new(),
            metrics: Some(MetricsRecord { ii, unc: 2.0 * ii, rmse: Some(1.0), ..Default::default() }),
            replan_seconds: vec![0.5],
            valid: true,
            error: None,
        }
    }

    fn key(repeat: usize, mission: usize) -> EpisodeKey {
        EpisodeKey { planner: PlannerKind::Greedy, repeat, mission }
    }

    #[test]
    fn manual_average_and_zero_std() {
        let eps = vec![(key(0, 0), log(10.0)), (key(1, 0), log(10.0)), (key(2, 0), log(10.0))];
        let row = &summarize(Protocol::Static, &[PlannerKind::Greedy], 3, &eps)[0];
        assert_eq!(row.mean[0], Some(10.0));
        assert_eq!(row.std[0], Some(0.0));
        assert_eq!(row.mean[4], None);

        let eps = vec![(key(0, 0), log(1.5)), (key(0, 1), log(2.25)), (key(0, 2), log(7.125))];
        let row = &summarize(Protocol::Static, &[PlannerKind::Greedy], 1, &eps)[0];
        let manual = (1.5 + 2.25 + 7.125) / 3.0;
        assert!((row.mean[0].unwrap() - manual).abs() < 1e-12);
        assert!((row.mean[1].unwrap() - 2.0 * manual).abs() < 1e-12);
    }

    #[test]
    fn invalid_episodes_are_counted_not_averaged() {
        let mut bad = log(99.0);
        bad.valid = false;
        let eps = vec![(key(0, 0), log(4.0)), (key(0, 1), bad)];
        let row = &summarize(Protocol::Varying, &[PlannerKind::Greedy], 1, &eps)[0];
        assert_eq!(row.mean[0], Some(4.0));
        assert_eq!((row.valid, row.invalid), (1, 1));
    }

    #[test]
    fn varying_samples_stay_in_range_and_planners_share_worlds() {
        let cfg = BenchmarkConfig { protocol: Protocol::Varying, ..Default::default() };
        for m in 0..50 {
            let a = mission_config(&cfg, PlannerKind::Greedy, 1, m);
            let b = mission_config(&cfg, PlannerKind::Coverage, 1, m);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.threshold, b.threshold);
            assert!((0.0..=0.8).contains(&a.threshold));
            assert!((0.15..=0.55).contains(&a.gp.lengthscale));
        }
    }

    proptest::proptest! {
        #[test]
        fn aggregation_ignores_order(seed in 0u64..1000) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut eps: Vec<(EpisodeKey, EpisodeLog)> = (0..12)
                .map(|i| (key(i % 3, i / 3), log((i * 7 % 5) as f64 + 0.1 * i as f64)))
                .collect();
            let base = summarize(Protocol::Static, &[PlannerKind::Greedy], 3, &eps);
            eps.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            proptest::prop_assert_eq!(summarize(Protocol::Static, &[PlannerKind::Greedy], 3, &eps), base);
        }
    }
}
