// SPDX-License-Identifier: Apache-2.0

//! Experiment runner: data preparation, sweep curves, the mechanism
//! comparison, and the dummy-count bound report.
//!
//! Streams are named, never shared through a generator: the data uses
//! `root.labeled("dataset")` and every point of a curve replays
//! `root.labeled(curve)`, so results do not depend on worker scheduling.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use distpriv_core::geo::{self, CheckinRecord, Region};
use distpriv_core::mechanisms::{restricted_laplace, MechanismSpec};
use distpriv_core::privacy::{attack_success_rate, distp_epsilon_exact, AsrMechanism, PrivacyLossSamples};
use distpriv_core::rng::SeedStream;
use distpriv_core::stats::Estimate;
use distpriv_core::tupling::{
    best_dummy_count_bound, channel_expected_loss, expected_loss, EvalMode, TuplingMechanism,
};
use distpriv_core::{Extended, FiniteSpace, ProbDist};
use rayon::prelude::*;

use crate::config::{DataSource, ExperimentConfig};
use crate::error::RunError;
use crate::io::{self, num, Table, TableHeader};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Curve {
    EpsVsK,
    EpsVsEpsA,
    EpsVsR,
    LossVsEpsA,
    Comparison,
    DistpVsAsr,
    Bounds,
}

impl Curve {
    pub const ALL: [Curve; 7] = [
        Curve::EpsVsK,
        Curve::EpsVsEpsA,
        Curve::EpsVsR,
        Curve::LossVsEpsA,
        Curve::Comparison,
        Curve::DistpVsAsr,
        Curve::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Curve::EpsVsK => "eps-vs-k",
            Curve::EpsVsEpsA => "eps-vs-epsA",
            Curve::EpsVsR => "eps-vs-r",
            Curve::LossVsEpsA => "loss-vs-epsA",
            Curve::Comparison => "eps-vs-loss-comparison",
            Curve::DistpVsAsr => "distp-vs-asr",
            Curve::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Curve {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        Curve::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| RunError::UnknownCurve(s.into()))
    }
}

/// Parses a curve name; `all` selects every curve.
pub fn parse_curves(name: &str) -> Result<Vec<Curve>, RunError> {
    if name == "all" {
        Ok(Curve::ALL.to_vec())
    } else {
        Ok(vec![name.parse()?])
    }
}

/// Prepared data: regions, the region space, and the attribute pair.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub regions: Vec<Region>,
    /// Set when quadtree refinement hit its depth limit.
    pub depth_limited: bool,
    pub space: Arc<FiniteSpace>,
    /// Protected input regions (indices into `regions`).
    pub inner: Vec<usize>,
    /// Location distributions of records with the attribute true / false.
    pub lambda_true: ProbDist,
    pub lambda_false: ProbDist,
    /// Location distribution of all records with the attribute.
    pub pooled: ProbDist,
    root: SeedStream,
}

/// One tupling configuration evaluated by Monte Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct TuplingPoint {
    pub k: usize,
    pub epsilon_a: f64,
    pub radius: f64,
    /// `(δ, ε̂, standard error)` per configured δ.
    pub epsilon: Vec<(f64, Extended, f64)>,
    pub loss: Estimate,
    pub asr: Estimate,
    pub samples: usize,
    pub seed: u64,
}

impl TuplingPoint {
    pub fn epsilon_at(&self, delta: f64) -> Option<(Extended, f64)> {
        self.epsilon.iter().find(|e| e.0 == delta).map(|e| (e.1, e.2))
    }
}

/// One obfuscation mechanism evaluated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPoint {
    pub mechanism: MechanismSpec,
    pub epsilon: Vec<(f64, Extended)>,
    pub loss: f64,
    pub asr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub channels: Vec<ComparisonPoint>,
    pub tupling: Vec<TuplingPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub delta: f64,
    pub beta: f64,
    pub eta: f64,
    pub alpha: Option<f64>,
    pub epsilon_theory: Extended,
    pub epsilon_empirical: Extended,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl BoundRow {
    pub fn dominates(&self) -> bool {
        self.epsilon_theory >= self.epsilon_empirical
    }
}

fn parallel<T, F>(n: usize, f: F) -> Result<Vec<T>, RunError>
where
    T: Send,
    F: Fn(usize) -> Result<T, RunError> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

impl Experiment {
    /// Loads or synthesizes records and builds the region space. Relative
    /// CSV paths resolve against `base_dir`.
    pub fn prepare(config: ExperimentConfig, base_dir: &Path) -> Result<Self, RunError> {
        config.validate()?;
        let root = SeedStream::new(config.seed);
        let bbox = config.bounding_box();
        let records = match config.dataset.source {
            DataSource::Synthetic => {
                let profile = config.profile().expect("validated");
                let n = config.dataset.n.expect("validated");
                geo::synth_attribute_population(&bbox, profile, n, root.labeled("dataset"))
                    .map_err(RunError::estimation("synthetic data"))?
            }
            DataSource::Csv => {
                let rel = config.dataset.path.as_ref().expect("validated");
                let path: PathBuf = if rel.is_absolute() {
                    rel.clone()
                } else {
                    base_dir.join(rel)
                };
                io::read_checkins(&path, config.dataset.time_range)?
            }
        };
        Self::from_records(config, &records)
    }

    pub fn from_records(config: ExperimentConfig, records: &[CheckinRecord]) -> Result<Self, RunError> {
        let root = SeedStream::new(config.seed);
        let g = &config.grid;
        let bbox = config.bounding_box();
        let grid = geo::base_grid(&bbox, g.rows, g.cols).map_err(RunError::estimation("grid"))?;
        let (regions, depth_limited) = match g.max_count {
            Some(max_count) => {
                let points: Vec<(f64, f64)> = records.iter().map(|r| (r.x_km, r.y_km)).collect();
                let p = geo::adaptive_partition(&grid, &points, max_count)
                    .map_err(RunError::estimation("partition"))?;
                (p.regions, p.depth_limited)
            }
            None => (grid, false),
        };
        let space = Arc::new(geo::regions_to_space(&regions).map_err(RunError::estimation("region space"))?);
        let inner = match g.inner {
            Some(b) => geo::inner_indices(&regions, &b.to_box().expect("validated")),
            None => (0..regions.len()).collect(),
        };
        if inner.is_empty() {
            return Err(crate::error::ConfigError::Invalid {
                field: "grid.inner".into(),
                reason: "no region centroid lies inside the inner box".into(),
            }
            .into());
        }
        let mut in_x = vec![false; regions.len()];
        for &i in &inner {
            in_x[i] = true;
        }
        let kept: Vec<CheckinRecord> = records
            .iter()
            .filter(|r| geo::locate(&regions, r.x_km, r.y_km).is_some_and(|i| in_x[i]))
            .cloned()
            .collect();
        let (lambda_true, lambda_false) =
            geo::empirical_attribute_dists(&kept, &regions, &space, &config.attribute)
                .map_err(RunError::estimation("attribute distributions"))?;
        let mut counts = vec![0.0; regions.len()];
        for r in kept
            .iter()
            .filter(|r| r.attributes.contains_key(&config.attribute))
        {
            if let Some(i) = geo::locate(&regions, r.x_km, r.y_km) {
                counts[i] += 1.0;
            }
        }
        let pooled = ProbDist::from_weights(space.clone(), &counts)
            .map_err(RunError::estimation("pooled distribution"))?;
        Ok(Self {
            config,
            regions,
            depth_limited,
            space,
            inner,
            lambda_true,
            lambda_false,
            pooled,
            root,
        })
    }

    /// The tupling mechanism with uniform dummies over all regions and a
    /// restricted Laplace inner mechanism.
    pub fn tupling(&self, k: usize, epsilon_a: f64, radius: f64) -> Result<TuplingMechanism, RunError> {
        let inner = restricted_laplace(&self.space, epsilon_a, radius)
            .map_err(RunError::estimation("restricted laplace"))?;
        TuplingMechanism::uniform(k, inner).map_err(RunError::estimation("tupling mechanism"))
    }

    /// Monte-Carlo DistP, expected loss, and ASR of one tupling configuration.
    pub fn tupling_point(
        &self,
        k: usize,
        epsilon_a: f64,
        radius: f64,
        stream: SeedStream,
    ) -> Result<TuplingPoint, RunError> {
        let ctx = format!("tupling k={k} epsilon_a={epsilon_a} r={radius}");
        let tp = self.tupling(k, epsilon_a, radius)?;
        let samples = self.config.privacy.samples;
        let losses = PrivacyLossSamples::draw(
            &tp,
            &self.lambda_true,
            &self.lambda_false,
            samples,
            stream.substream(0),
        )
        .map_err(RunError::estimation(ctx.clone()))?;
        let epsilon = self
            .config
            .privacy
            .delta
            .iter()
            .map(|&d| {
                let (e, se) = losses.epsilon_at(d);
                (d, e, se)
            })
            .collect();
        let loss = expected_loss(
            &tp,
            &self.pooled,
            EvalMode::MonteCarlo {
                samples,
                stream: stream.substream(1),
            },
        )
        .map_err(RunError::estimation(ctx.clone()))?;
        let asr = attack_success_rate(
            AsrMechanism::Tupling(&tp),
            &[self.lambda_true.clone(), self.lambda_false.clone()],
            &[0.5, 0.5],
            EvalMode::MonteCarlo {
                samples,
                stream: stream.substream(2),
            },
        )
        .map_err(RunError::estimation(ctx))?;
        Ok(TuplingPoint {
            k,
            epsilon_a,
            radius,
            epsilon,
            loss,
            asr,
            samples,
            seed: self.config.seed,
        })
    }

    fn sweep(&self, curve: Curve, params: &[(usize, f64, f64)]) -> Result<Vec<TuplingPoint>, RunError> {
        // Common random numbers: every point of a sweep replays the same
        // stream, so near-identical configurations get near-identical
        // estimates and trend comparisons are not decided by sampling noise.
        let stream = self.root.labeled(curve.name());
        parallel(params.len(), |i| {
            let (k, e, r) = params[i];
            self.tupling_point(k, e, r, stream)
        })
    }

    pub fn eps_vs_k(&self) -> Result<Vec<TuplingPoint>, RunError> {
        let t = &self.config.tupling;
        let params: Vec<_> =
            t.k.iter()
                .map(|&k| (k, t.epsilon_a_default, t.radius_default))
                .collect();
        self.sweep(Curve::EpsVsK, &params)
    }

    pub fn eps_vs_eps_a(&self) -> Result<Vec<TuplingPoint>, RunError> {
        let t = &self.config.tupling;
        let params: Vec<_> = t
            .epsilon_a
            .iter()
            .map(|&e| (t.k_default, e, t.radius_default))
            .collect();
        self.sweep(Curve::EpsVsEpsA, &params)
    }

    pub fn eps_vs_r(&self) -> Result<Vec<TuplingPoint>, RunError> {
        let t = &self.config.tupling;
        let params: Vec<_> = t
            .radius
            .iter()
            .map(|&r| (t.k_default, t.epsilon_a_default, r))
            .collect();
        self.sweep(Curve::EpsVsR, &params)
    }

    /// Every `(k, ε_A)` combination at the default radius, k-major.
    fn k_eps_grid(&self, curve: Curve) -> Result<Vec<TuplingPoint>, RunError> {
        let t = &self.config.tupling;
        let params: Vec<_> =
            t.k.iter()
                .flat_map(|&k| t.epsilon_a.iter().map(move |&e| (k, e, t.radius_default)))
                .collect();
        self.sweep(curve, &params)
    }

    pub fn loss_vs_eps_a(&self) -> Result<Vec<TuplingPoint>, RunError> {
        self.k_eps_grid(Curve::LossVsEpsA)
    }

    pub fn distp_vs_asr(&self) -> Result<Vec<TuplingPoint>, RunError> {
        self.k_eps_grid(Curve::DistpVsAsr)
    }

    /// Exact DistP (both orders of the attribute pair), expected loss, and
    /// ASR of each configured mechanism, plus tupling points over ε_A.
    pub fn comparison(&self) -> Result<Comparison, RunError> {
        let pairs = [
            (self.lambda_true.clone(), self.lambda_false.clone()),
            (self.lambda_false.clone(), self.lambda_true.clone()),
        ];
        let mechanisms = &self.config.mechanisms;
        let channels = parallel(mechanisms.len(), |i| {
            let spec = mechanisms[i];
            let ctx = format!("mechanisms[{i}] ({})", spec.kind());
            let ch = spec
                .build(&self.space)
                .map_err(RunError::estimation(ctx.clone()))?;
            let epsilon = self
                .config
                .privacy
                .delta
                .iter()
                .map(|&d| {
                    let r = distp_epsilon_exact(&ch, &pairs, d).map_err(RunError::estimation(ctx.clone()))?;
                    Ok((d, r.epsilon()))
                })
                .collect::<Result<_, RunError>>()?;
            let loss = channel_expected_loss(&ch, &self.pooled).map_err(RunError::estimation(ctx.clone()))?;
            let asr = attack_success_rate(
                AsrMechanism::Channel(&ch),
                &[self.lambda_true.clone(), self.lambda_false.clone()],
                &[0.5, 0.5],
                EvalMode::Exact,
            )
            .map_err(RunError::estimation(ctx))?;
            Ok(ComparisonPoint {
                mechanism: spec,
                epsilon,
                loss,
                asr: asr.value,
            })
        })?;
        let t = &self.config.tupling;
        let params: Vec<_> = t
            .epsilon_a
            .iter()
            .map(|&e| (t.k_default, e, t.radius_default))
            .collect();
        let tupling = self.sweep(Curve::Comparison, &params)?;
        Ok(Comparison { channels, tupling })
    }

    /// Dummy-count bound against the Monte-Carlo estimate for each bound k.
    pub fn bounds(&self) -> Result<Vec<BoundRow>, RunError> {
        let t = &self.config.tupling;
        let stream = self.root.labeled(Curve::Bounds.name());
        let samples = self.config.privacy.samples;
        let per_k = parallel(t.bounds_k.len(), |i| {
            let k = t.bounds_k[i];
            let ctx = format!("bounds k={k}");
            let tp = self.tupling(k, t.epsilon_a_default, t.radius_default)?;
            let losses =
                PrivacyLossSamples::draw(&tp, &self.lambda_true, &self.lambda_false, samples, stream)
                    .map_err(RunError::estimation(ctx.clone()))?;
            self.config
                .privacy
                .delta
                .iter()
                .map(|&delta| {
                    let search = best_dummy_count_bound(&tp, &self.lambda_true, &self.lambda_false, delta)
                        .map_err(RunError::estimation(ctx.clone()))?;
                    let (emp, se) = losses.epsilon_at(delta);
                    Ok(BoundRow {
                        k,
                        delta,
                        beta: search.beta,
                        eta: search.eta,
                        alpha: search.bound.map(|b| b.alpha),
                        epsilon_theory: search
                            .bound
                            .map_or(Extended::Infinite, |b| Extended::Finite(b.epsilon_alpha)),
                        epsilon_empirical: emp,
                        stderr: se,
                        samples,
                        seed: self.config.seed,
                    })
                })
                .collect::<Result<Vec<_>, RunError>>()
        })?;
        Ok(per_k.into_iter().flatten().collect())
    }

    /// Computes one curve as a result table.
    pub fn table(&self, curve: Curve) -> Result<Table, RunError> {
        Ok(match curve {
            Curve::EpsVsK => tupling_table(&["k"], &self.eps_vs_k()?, |p| vec![p.k.to_string()]),
            Curve::EpsVsEpsA => {
                tupling_table(&["epsilon_a"], &self.eps_vs_eps_a()?, |p| vec![num(p.epsilon_a)])
            }
            Curve::EpsVsR => tupling_table(&["radius"], &self.eps_vs_r()?, |p| vec![num(p.radius)]),
            Curve::LossVsEpsA => tupling_table(&["epsilon_a", "k"], &self.loss_vs_eps_a()?, |p| {
                vec![num(p.epsilon_a), p.k.to_string()]
            }),
            Curve::DistpVsAsr => tupling_table(&["k", "epsilon_a"], &self.distp_vs_asr()?, |p| {
                vec![p.k.to_string(), num(p.epsilon_a)]
            }),
            Curve::Comparison => comparison_table(&self.comparison()?, self.config.tupling.k_default),
            Curve::Bounds => bounds_table(&self.bounds()?),
        })
    }

    pub fn header(&self, curve: Curve) -> TableHeader {
        TableHeader {
            curve: curve.name().into(),
            config_hash: self.config.hash(),
            seed: self.config.seed,
            samples: self.config.privacy.samples,
        }
    }
}

const RESULT_COLUMNS: [&str; 10] = [
    "epsilon",
    "delta",
    "loss",
    "asr",
    "stderr",
    "n",
    "seed",
    "loss_stderr",
    "asr_stderr",
    "unbounded",
];

fn tupling_table(
    params: &[&'static str],
    points: &[TuplingPoint],
    key: impl Fn(&TuplingPoint) -> Vec<String>,
) -> Table {
    let mut table = Table::new(params.iter().copied().chain(RESULT_COLUMNS).collect());
    for p in points {
        for &(delta, eps, se) in &p.epsilon {
            let mut row = key(p);
            row.extend(result_cells(
                eps,
                delta,
                p.loss.value,
                p.asr.value,
                se,
                p.samples,
                p.seed,
            ));
            row.extend([
                num(p.loss.stderr),
                num(p.asr.stderr),
                (!eps.is_finite()).to_string(),
            ]);
            table.push(row);
        }
    }
    table
}

fn result_cells(eps: Extended, delta: f64, loss: f64, asr: f64, se: f64, n: usize, seed: u64) -> [String; 7] {
    [
        num(eps.to_f64()),
        num(delta),
        num(loss),
        num(asr),
        num(se),
        n.to_string(),
        seed.to_string(),
    ]
}

fn comparison_table(c: &Comparison, k: usize) -> Table {
    let mut table = Table::new(
        ["mechanism", "parameter", "k"]
            .into_iter()
            .chain(RESULT_COLUMNS)
            .collect(),
    );
    for p in &c.channels {
        for &(delta, eps) in &p.epsilon {
            let mut row = vec![
                p.mechanism.short_name().to_string(),
                num(p.mechanism.parameter()),
                "0".into(),
            ];
            row.extend(result_cells(eps, delta, p.loss, p.asr, 0.0, 0, 0));
            row.extend(["0".into(), "0".into(), (!eps.is_finite()).to_string()]);
            table.push(row);
        }
    }
    for p in &c.tupling {
        for &(delta, eps, se) in &p.epsilon {
            let mut row = vec!["TM".to_string(), num(p.epsilon_a), k.to_string()];
            row.extend(result_cells(
                eps,
                delta,
                p.loss.value,
                p.asr.value,
                se,
                p.samples,
                p.seed,
            ));
            row.extend([
                num(p.loss.stderr),
                num(p.asr.stderr),
                (!eps.is_finite()).to_string(),
            ]);
            table.push(row);
        }
    }
    table
}

fn bounds_table(rows: &[BoundRow]) -> Table {
    let mut table = Table::new(vec![
        "k",
        "delta",
        "beta",
        "eta",
        "alpha",
        "epsilon_theory",
        "epsilon_empirical",
        "stderr",
        "dominates",
        "n",
        "seed",
    ]);
    for r in rows {
        table.push(vec![
            r.k.to_string(),
            num(r.delta),
            num(r.beta),
            num(r.eta),
            r.alpha.map(num).unwrap_or_default(),
            num(r.epsilon_theory.to_f64()),
            num(r.epsilon_empirical.to_f64()),
            num(r.stderr),
            r.dominates().to_string(),
            r.samples.to_string(),
            r.seed.to_string(),
        ]);
    }
    table
}

/// Runtime overrides from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub threads: Option<usize>,
}

/// Runs `curves` and writes `<curve>.csv` plus `regions.csv` into `out_dir`.
/// Returns the written paths in curve order.
pub fn run(
    mut config: ExperimentConfig,
    base_dir: &Path,
    curves: &[Curve],
    out_dir: &Path,
    overrides: Overrides,
) -> Result<Vec<PathBuf>, RunError> {
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(samples) = overrides.samples {
        config.privacy.samples = samples;
    }
    config.validate()?;
    let work = || -> Result<Vec<PathBuf>, RunError> {
        let exp = Experiment::prepare(config, base_dir)?;
        std::fs::create_dir_all(out_dir).map_err(RunError::io(out_dir))?;
        let mut written = Vec::with_capacity(curves.len() + 1);
        let regions = out_dir.join("regions.csv");
        io::write_regions(&regions, &exp.regions)?;
        written.push(regions);
        for &curve in curves {
            let table = exp.table(curve)?;
            let path = out_dir.join(format!("{}.csv", curve.name()));
            io::write_table(&path, &exp.header(curve), &table)?;
            written.push(path);
        }
        Ok(written)
    };
    match overrides.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Io {
                    path: out_dir.to_path_buf(),
                    source: std::io::Error::other(e),
                })?;
            pool.install(work)
        }
        None => work(),
    }
}
