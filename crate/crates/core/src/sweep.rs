//! Perturbation sweeps over random ADMGs and their tabulated summaries.
//!
//! Every reference graph owns four ChaCha8 streams of the configured seed
//! (graph, single edits, multi edits, MAG comparison), so results do not
//! depend on the worker count or on scheduling.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{fid_with, MissPolicy};
use crate::error::{FidError, Result};
use crate::fixing::Cap;
use crate::graph::Admg;
use crate::identify::{all_pairs, Identifier};
use crate::mag::project_checked;
use crate::perturb::{apply_edit, apply_k_edits, apply_target, gen_er_admg_with, legal_edits, shd, EditType};

/// Where single edits are applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locations {
    /// One uniformly drawn legal target per graph and edit type.
    #[default]
    One,
    /// Every legal target.
    All,
}

fn default_n_vars() -> usize {
    5
}
fn default_p_dir() -> Vec<f64> {
    vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]
}
fn default_n_bi() -> Vec<usize> {
    vec![1, 2, 3]
}
fn default_graphs() -> usize {
    20
}
fn default_k() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}
fn default_types() -> Vec<EditType> {
    EditType::ALL.to_vec()
}
fn default_true() -> bool {
    true
}
fn default_one() -> usize {
    1
}
fn default_cap() -> usize {
    10_000
}
fn default_timeout() -> f64 {
    60.0
}

/// Sweep configuration, read from TOML. Every key is optional; the defaults
/// give the 7 x 3 x 20 grid on five nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_n_vars")]
    pub n_vars: usize,
    #[serde(default = "default_p_dir")]
    pub p_dir: Vec<f64>,
    #[serde(default = "default_n_bi")]
    pub n_bi: Vec<usize>,
    #[serde(default = "default_graphs")]
    pub graphs_per_cell: usize,
    /// Edit counts for the multi-edit runs; empty disables them.
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default = "default_one")]
    pub reps_per_k: usize,
    #[serde(default = "default_types")]
    pub edit_types: Vec<EditType>,
    #[serde(default = "default_true")]
    pub single_edits: bool,
    #[serde(default)]
    pub single_edit_locations: Locations,
    /// Edit counts for the MAG comparison; empty disables it.
    #[serde(default)]
    pub mag_k: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Fixing sequences per district; 0 means unlimited.
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub miss_policy: MissPolicy,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// 0 means the available parallelism.
    #[serde(default)]
    pub workers: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        toml::from_str("").expect("all keys have defaults")
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<SweepConfig> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| FidError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<SweepConfig> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| FidError::Io(format!("{}: {e}", path.as_ref().display())))?;
        SweepConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FidError::Config(m));
        if let Some(p) = self.p_dir.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return bad(format!("p_dir {p} outside [0, 1]"));
        }
        let max_bi = self.n_vars * self.n_vars.saturating_sub(1) / 2;
        if let Some(b) = self.n_bi.iter().find(|&&b| b > max_bi) {
            return bad(format!("n_bi {b} exceeds the {max_bi} pairs of {} nodes", self.n_vars));
        }
        if self.k.contains(&0) || self.mag_k.contains(&0) {
            return bad("edit counts must be at least 1".into());
        }
        if self.edit_types.is_empty() {
            return bad("edit_types is empty".into());
        }
        if !(self.timeout_secs > 0.0) {
            return bad("timeout_secs must be positive".into());
        }
        Ok(())
    }

    fn cap(&self) -> Cap {
        if self.cap == 0 {
            Cap::Unlimited
        } else {
            Cap::Limited(self.cap)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunKind {
    Single,
    Multi,
}

/// One reference/candidate pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceRow {
    pub kind: RunKind,
    /// Index of the reference graph over the whole grid; also its stream id.
    pub graph: usize,
    pub p_dir: f64,
    pub n_bi: usize,
    pub k: usize,
    pub edits: Vec<EditType>,
    pub fid_gh: f64,
    pub fid_hg: f64,
    pub fid_sym: f64,
    pub shd: usize,
    pub truncated: bool,
    pub timed_out: bool,
}

/// One reference/candidate pair of projected MAGs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MagRow {
    pub graph: usize,
    pub p_dir: f64,
    pub n_bi: usize,
    pub k: usize,
    pub shd: usize,
    pub fid_sym: f64,
    /// false when the candidate has no Markov equivalent MAG; its projection
    /// is scored anyway.
    pub cand_projectable: bool,
    pub truncated: bool,
    pub timed_out: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepOutput {
    pub instances: Vec<InstanceRow>,
    pub mags: Vec<MagRow>,
    /// Reference graphs skipped in the MAG comparison because no Markov
    /// equivalent MAG exists.
    pub mag_discarded: usize,
    pub mag_references: usize,
}

struct Cell {
    graph: usize,
    p_dir: f64,
    n_bi: usize,
}

const STREAMS: u64 = 4;

fn stream(cfg: &SweepConfig, graph: usize, phase: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(graph as u64 * STREAMS + phase);
    rng
}

struct Scored {
    gh: f64,
    hg: f64,
    truncated: bool,
    timed_out: bool,
}

fn score(ig: &mut Identifier<'_>, h: &Admg, cfg: &SweepConfig, timeout: Duration) -> Result<Scored> {
    let start = Instant::now();
    let mut ih = Identifier::new(h, cfg.cap());
    let pairs = all_pairs(h);
    let gh = fid_with(ig, &mut ih, &pairs, cfg.miss_policy)?;
    let hg = fid_with(&mut ih, ig, &pairs, cfg.miss_policy)?;
    Ok(Scored {
        gh: gh.normalized,
        hg: hg.normalized,
        truncated: gh.truncated || hg.truncated,
        timed_out: start.elapsed() > timeout,
    })
}

fn run_graph(cfg: &SweepConfig, cell: &Cell) -> Result<(Vec<InstanceRow>, Vec<MagRow>, bool)> {
    let timeout = Duration::from_secs_f64(cfg.timeout_secs);
    let g = gen_er_admg_with(cfg.n_vars, cell.p_dir, cell.n_bi, &mut stream(cfg, cell.graph, 0))?;
    let mut ig = Identifier::new(&g, cfg.cap());
    let mut rows = Vec::new();
    let mut push = |kind, k, edits: Vec<EditType>, h: &Admg, ig: &mut Identifier<'_>| -> Result<()> {
        let s = score(ig, h, cfg, timeout)?;
        rows.push(InstanceRow {
            kind,
            graph: cell.graph,
            p_dir: cell.p_dir,
            n_bi: cell.n_bi,
            k,
            edits,
            fid_gh: s.gh,
            fid_hg: s.hg,
            fid_sym: (s.gh + s.hg) / 2.0,
            shd: shd(&g, h)?,
            truncated: s.truncated,
            timed_out: s.timed_out,
        });
        Ok(())
    };

    if cfg.single_edits {
        let mut rng = stream(cfg, cell.graph, 1);
        for &t in &cfg.edit_types {
            match cfg.single_edit_locations {
                Locations::One => {
                    if let Some(h) = apply_edit(&g, t, &mut rng) {
                        push(RunKind::Single, 1, vec![t], &h, &mut ig)?;
                    }
                }
                Locations::All => {
                    for e in legal_edits(&g, t) {
                        push(RunKind::Single, 1, vec![t], &apply_target(&g, e)?, &mut ig)?;
                    }
                }
            }
        }
    }

    let mut rng = stream(cfg, cell.graph, 2);
    for &k in &cfg.k {
        for _ in 0..cfg.reps_per_k {
            let (h, applied) = apply_k_edits(&g, k, &cfg.edit_types, &mut rng)?;
            push(RunKind::Multi, k, applied, &h, &mut ig)?;
        }
    }

    let mut mags = Vec::new();
    let mut discarded = false;
    if !cfg.mag_k.is_empty() {
        let reference = project_checked(&g)?;
        if reference.equivalent == Some(false) {
            discarded = true;
        } else {
            let gm = reference.mag.to_admg();
            let mut igm = Identifier::new(&gm, cfg.cap());
            let mut rng = stream(cfg, cell.graph, 3);
            for &k in &cfg.mag_k {
                let (h, _) = apply_k_edits(&g, k, &cfg.edit_types, &mut rng)?;
                let cand = project_checked(&h)?;
                let hm = cand.mag.to_admg();
                let s = score(&mut igm, &hm, cfg, timeout)?;
                mags.push(MagRow {
                    graph: cell.graph,
                    p_dir: cell.p_dir,
                    n_bi: cell.n_bi,
                    k,
                    shd: shd(&gm, &hm)?,
                    fid_sym: (s.gh + s.hg) / 2.0,
                    cand_projectable: cand.equivalent != Some(false),
                    truncated: s.truncated,
                    timed_out: s.timed_out,
                });
            }
        }
    }
    Ok((rows, mags, discarded))
}

/// Run every configured instance. Output order is the grid order
/// (n_bi, then p_dir, then graph), independent of the worker count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &n_bi in &cfg.n_bi {
        for &p_dir in &cfg.p_dir {
            for _ in 0..cfg.graphs_per_cell {
                cells.push(Cell {
                    graph: cells.len(),
                    p_dir,
                    n_bi,
                });
            }
        }
    }
    let work = || -> Vec<Result<(Vec<InstanceRow>, Vec<MagRow>, bool)>> {
        cells.par_iter().map(|c| run_graph(cfg, c)).collect()
    };
    let results = if cfg.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| FidError::Internal(e.to_string()))?
            .install(work)
    };
    let mut out = SweepOutput::default();
    for r in results {
        let (rows, mags, discarded) = r?;
        out.instances.extend(rows);
        out.mags.extend(mags);
        if !cfg.mag_k.is_empty() {
            out.mag_references += 1;
            out.mag_discarded += discarded as usize;
        }
    }
    Ok(out)
}

/// Mean, spread and quartiles of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Summary {
            count: n,
            mean,
            std: var.sqrt(),
            std_error: (var / n as f64).sqrt(),
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: sorted[n - 1],
        })
    }
}

/// Sample Pearson correlation; `None` when either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// reference to candidate
    Forward,
    Backward,
    Symmetric,
}

impl Direction {
    fn pick(self, r: &InstanceRow) -> f64 {
        match self {
            Direction::Forward => r.fid_gh,
            Direction::Backward => r.fid_hg,
            Direction::Symmetric => r.fid_sym,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "gh",
            Direction::Backward => "hg",
            Direction::Symmetric => "sym",
        }
    }
}

fn fmt6(x: f64) -> String {
    format!("{x:.6}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_default()
}

fn mean(v: &[f64]) -> Option<f64> {
    Summary::of(v).map(|s| s.mean)
}

impl SweepOutput {
    fn kept(&self, kind: RunKind) -> impl Iterator<Item = &InstanceRow> {
        self.instances.iter().filter(move |r| r.kind == kind && !r.timed_out)
    }

    pub fn timed_out(&self) -> usize {
        self.instances.iter().filter(|r| r.timed_out).count() + self.mags.iter().filter(|r| r.timed_out).count()
    }

    /// Mean single-edit FID per (n_bi, p_dir) cell and edit type.
    pub fn single_edit_table(&self, cfg: &SweepConfig, dir: Direction) -> Vec<(usize, f64, Vec<Option<f64>>)> {
        let mut out = Vec::new();
        for &b in &cfg.n_bi {
            for &p in &cfg.p_dir {
                let cols = cfg
                    .edit_types
                    .iter()
                    .map(|&t| {
                        let v: Vec<f64> = self
                            .kept(RunKind::Single)
                            .filter(|r| r.n_bi == b && r.p_dir == p && r.edits == [t])
                            .map(|r| dir.pick(r))
                            .collect();
                        mean(&v)
                    })
                    .collect();
                out.push((b, p, cols));
            }
        }
        out
    }

    /// Mean multi-edit FID per (n_bi, p_dir) cell and edit count.
    pub fn edit_count_table(&self, cfg: &SweepConfig, dir: Direction) -> Vec<(usize, f64, Vec<Option<f64>>)> {
        let mut out = Vec::new();
        for &b in &cfg.n_bi {
            for &p in &cfg.p_dir {
                let cols = cfg
                    .k
                    .iter()
                    .map(|&k| {
                        let v: Vec<f64> = self
                            .kept(RunKind::Multi)
                            .filter(|r| r.n_bi == b && r.p_dir == p && r.k == k)
                            .map(|r| dir.pick(r))
                            .collect();
                        mean(&v)
                    })
                    .collect();
                out.push((b, p, cols));
            }
        }
        out
    }

    /// Single-edit FID pooled over every cell, per edit type.
    pub fn edit_type_summary(&self, cfg: &SweepConfig, dir: Direction) -> Vec<(EditType, Option<Summary>)> {
        cfg.edit_types
            .iter()
            .map(|&t| {
                let v: Vec<f64> = self.kept(RunKind::Single).filter(|r| r.edits == [t]).map(|r| dir.pick(r)).collect();
                (t, Summary::of(&v))
            })
            .collect()
    }

    /// Multi-edit FID grouped by a key, pooled over everything else.
    pub fn grouped<K: PartialEq + Copy>(&self, keys: &[K], key: impl Fn(&InstanceRow) -> K, dir: Direction) -> Vec<(K, Option<Summary>)> {
        keys.iter()
            .map(|&k| {
                let v: Vec<f64> = self.kept(RunKind::Multi).filter(|r| key(r) == k).map(|r| dir.pick(r)).collect();
                (k, Summary::of(&v))
            })
            .collect()
    }

    pub fn mag_pearson(&self) -> Option<f64> {
        let kept: Vec<&MagRow> = self.mags.iter().filter(|r| !r.timed_out).collect();
        let x: Vec<f64> = kept.iter().map(|r| r.fid_sym).collect();
        let y: Vec<f64> = kept.iter().map(|r| r.shd as f64).collect();
        pearson(&x, &y)
    }

    /// Write `instances.csv`, the tables, the groupings and, when present,
    /// `mag_comparison.csv` and `summary.csv` into `dir`.
    pub fn write_dir(&self, cfg: &SweepConfig, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("instances.csv"))?;
        w.write_record([
            "kind", "graph", "p_dir", "n_bi", "k", "edits", "fid_gh", "fid_hg", "fid_sym", "shd", "truncated", "timed_out",
        ])?;
        for r in &self.instances {
            let kind = match r.kind {
                RunKind::Single => "single",
                RunKind::Multi => "multi",
            };
            let edits: Vec<&str> = r.edits.iter().map(|e| e.name()).collect();
            w.write_record([
                kind.to_string(),
                r.graph.to_string(),
                format!("{}", r.p_dir),
                r.n_bi.to_string(),
                r.k.to_string(),
                edits.join(";"),
                fmt6(r.fid_gh),
                fmt6(r.fid_hg),
                fmt6(r.fid_sym),
                r.shd.to_string(),
                r.truncated.to_string(),
                r.timed_out.to_string(),
            ])?;
        }
        w.flush()?;

        let type_names: Vec<String> = cfg.edit_types.iter().map(|t| t.name().to_string()).collect();
        let k_names: Vec<String> = cfg.k.iter().map(|k| format!("k{k}")).collect();
        for (dir_, suffix) in [(Direction::Forward, "gh"), (Direction::Backward, "hg")] {
            write_table(&dir.join(format!("table_single_{suffix}.csv")), &type_names, self.single_edit_table(cfg, dir_))?;
            write_table(&dir.join(format!("table_k_{suffix}.csv")), &k_names, self.edit_count_table(cfg, dir_))?;
        }

        let mut w = csv::Writer::from_path(dir.join("table_edit_types.csv"))?;
        w.write_record(["edit_type", "direction", "count", "mean", "std_error"])?;
        for d in [Direction::Forward, Direction::Backward, Direction::Symmetric] {
            for (t, s) in self.edit_type_summary(cfg, d) {
                w.write_record([
                    t.name().to_string(),
                    d.name().to_string(),
                    s.map(|s| s.count).unwrap_or(0).to_string(),
                    opt6(s.map(|s| s.mean)),
                    opt6(s.map(|s| s.std_error)),
                ])?;
            }
        }
        w.flush()?;

        let fmt_p = |p: f64| format!("{p}");
        write_groups(&dir.join("by_nbi.csv"), "n_bi", self, &cfg.n_bi, |r| r.n_bi, |b| b.to_string())?;
        write_groups(&dir.join("by_k.csv"), "k", self, &cfg.k, |r| r.k, |k| k.to_string())?;
        write_groups(&dir.join("by_pdir.csv"), "p_dir", self, &cfg.p_dir, |r| r.p_dir, fmt_p)?;

        if !cfg.mag_k.is_empty() {
            let mut w = csv::Writer::from_path(dir.join("mag_comparison.csv"))?;
            w.write_record(["graph", "p_dir", "n_bi", "k", "shd", "fid_sym", "cand_projectable", "truncated", "timed_out"])?;
            for r in &self.mags {
                w.write_record([
                    r.graph.to_string(),
                    format!("{}", r.p_dir),
                    r.n_bi.to_string(),
                    r.k.to_string(),
                    r.shd.to_string(),
                    fmt6(r.fid_sym),
                    r.cand_projectable.to_string(),
                    r.truncated.to_string(),
                    r.timed_out.to_string(),
                ])?;
            }
            w.flush()?;
        }

        let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
        w.write_record(["key", "value"])?;
        w.write_record(["instances", &self.instances.len().to_string()])?;
        w.write_record(["timed_out_excluded", &self.timed_out().to_string()])?;
        w.write_record(["mag_references", &self.mag_references.to_string()])?;
        w.write_record(["mag_discarded", &self.mag_discarded.to_string()])?;
        w.write_record(["mag_pearson_fid_shd", &opt6(self.mag_pearson())])?;
        w.flush()?;
        Ok(())
    }
}

fn write_table(path: &Path, columns: &[String], rows: Vec<(usize, f64, Vec<Option<f64>>)>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["n_bi".to_string(), "p_dir".to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for (b, p, cols) in rows {
        let mut rec = vec![b.to_string(), format!("{p}")];
        rec.extend(cols.into_iter().map(opt6));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_groups<K: PartialEq + Copy>(
    path: &Path,
    name: &str,
    out: &SweepOutput,
    keys: &[K],
    key: impl Fn(&InstanceRow) -> K + Copy,
    show: impl Fn(K) -> String,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([name, "direction", "count", "mean", "std", "min", "q1", "median", "q3", "max"])?;
    for d in [Direction::Forward, Direction::Backward, Direction::Symmetric] {
        for (k, s) in out.grouped(keys, key, d) {
            let mut rec = vec![show(k), d.name().to_string(), s.map(|s| s.count).unwrap_or(0).to_string()];
            let stats = s.map(|s| [s.mean, s.std, s.min, s.q1, s.median, s.q3, s.max]);
            rec.extend((0..7).map(|i| opt6(stats.map(|a| a[i]))));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SweepConfig {
        SweepConfig::from_toml(
            "n_vars = 4\np_dir = [0.3, 0.6]\nn_bi = [1]\ngraphs_per_cell = 2\nk = [1, 2]\nmag_k = [1]\nseed = 9\n",
        )
        .unwrap()
    }

    #[test]
    fn defaults_give_the_full_grid() {
        let c = SweepConfig::default();
        assert_eq!(c.p_dir.len() * c.n_bi.len() * c.graphs_per_cell, 420);
        assert_eq!(c.edit_types.len(), 7);
        assert_eq!(c.cap(), Cap::DEFAULT);
    }

    #[test]
    fn bad_configs() {
        assert!(SweepConfig::from_toml("p_dir = [1.5]").is_err());
        assert!(SweepConfig::from_toml("n_vars = 3\nn_bi = [4]").is_err());
        assert!(SweepConfig::from_toml("k = [0]").is_err());
        assert!(SweepConfig::from_toml("colour = 1").is_err());
        assert!(SweepConfig::from_toml("edit_types = [\"flip\"]").is_err());
    }

    #[test]
    fn rows_are_deterministic_and_ordered() {
        let cfg = small();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&SweepConfig { workers: 1, ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        // 4 graphs x (7 single + 2 multi)
        let singles = a.instances.iter().filter(|r| r.kind == RunKind::Single).count();
        assert!(singles <= 28 && singles >= 4 * 5);
        assert_eq!(a.instances.iter().filter(|r| r.kind == RunKind::Multi).count(), 8);
        assert!(a.instances.windows(2).all(|w| w[0].graph <= w[1].graph));
        for r in &a.instances {
            assert!((0.0..=1.0).contains(&r.fid_gh) && (0.0..=1.0).contains(&r.fid_hg));
            assert_eq!(r.edits.len(), r.k);
        }
        assert_eq!(a.mag_references, 4);
        assert_eq!(a.mags.len() + a.mag_discarded, 4);
    }

    #[test]
    fn all_locations_enumerates_targets() {
        let cfg = SweepConfig {
            single_edit_locations: Locations::All,
            k: vec![],
            mag_k: vec![],
            ..small()
        };
        let one = run_sweep(&SweepConfig { single_edit_locations: Locations::One, ..cfg.clone() }).unwrap();
        let all = run_sweep(&cfg).unwrap();
        assert!(all.instances.len() >= one.instances.len());
    }

    #[test]
    fn summaries() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert!((s.std - 1.2909944487358056).abs() < 1e-12);
        assert!(Summary::of(&[]).is_none());
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]).unwrap() - 0.9986).abs() < 1e-3);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), None);
    }

    #[test]
    fn files_are_written() {
        let cfg = small();
        let out = run_sweep(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        out.write_dir(&cfg, dir.path()).unwrap();
        for f in [
            "instances.csv",
            "table_single_gh.csv",
            "table_single_hg.csv",
            "table_k_gh.csv",
            "table_k_hg.csv",
            "table_edit_types.csv",
            "by_nbi.csv",
            "by_k.csv",
            "by_pdir.csv",
            "mag_comparison.csv",
            "summary.csv",
        ] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let t = fs::read_to_string(dir.path().join("table_single_gh.csv")).unwrap();
        assert!(t.starts_with("n_bi,p_dir,reverse_dir,dir_to_bi,add_dir,del_dir,bi_to_dir,add_bi,del_bi"));
        assert_eq!(t.lines().count(), 3);
    }

    #[test]
    fn empty_grid_gives_header_only() {
        let cfg = SweepConfig { graphs_per_cell: 0, ..small() };
        let out = run_sweep(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        out.write_dir(&cfg, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("instances.csv")).unwrap();
        assert_eq!(text.lines().count(), 1);
    }
}
