use std::collections::BTreeMap;
use std::path::Path;

use super::cluster::{cluster_states_mdl, ClusterConfig};
use super::duration::{estimate_gv, state_runs};
use super::em::{
    accumulate_corpus, clone_to_fullcontext, flat_start, reestimate, score_corpus, ModelKey,
};
use super::fb::{forward_backward_scaled, viterbi_align};
use super::stats::{duration_from_stats, GaussStats, MsdStats};
use super::TrainingUtterance;
use crate::corpus::{load_corpus, FeatureCache};
use crate::frontend::{build_context_labels, format_label, parse_label, ContextLabel};
use crate::model::{
    generate_question_set, msd_log_prob, save_model_set, MSDGaussian, ModelSet, Stream,
    StreamGaussian, NUM_STATES, SELF_LOOP_MAX, SELF_LOOP_MIN, VARIANCE_FLOOR,
};
use crate::par::ordered_map;
use crate::signal::{AnalysisConfig, DeltaWindows};
use crate::util::write_atomic;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub monophone_iters: usize,
    pub fullcontext_iters: usize,
    pub tied_iters: usize,
    pub lambda_mdl: f64,
    pub min_occupancy: f64,
    pub variance_floor: f64,
    pub seed: u64,
    pub analysis: AnalysisConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            monophone_iters: 5,
            fullcontext_iters: 2,
            tied_iters: 2,
            lambda_mdl: 1.0,
            min_occupancy: 10.0,
            variance_floor: VARIANCE_FLOOR,
            seed: 42,
            analysis: AnalysisConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.analysis.validate()?;
        if self.lambda_mdl < 0.0 {
            return Err(Error::Train("lambda_mdl must be non-negative".into()));
        }
        if self.min_occupancy < 0.0 {
            return Err(Error::Train("min_occupancy must be non-negative".into()));
        }
        if !(self.variance_floor > 0.0) {
            return Err(Error::Train("variance_floor must be positive".into()));
        }
        Ok(())
    }
}

/// Line-oriented `key = value` training configuration; unknown keys are
/// rejected, `#` starts a comment, analysis settings keep their defaults.
pub fn parse_train_config(text: &str) -> Result<TrainConfig> {
    let mut cfg = TrainConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| Error::Train(format!("config line {}: {msg}", i + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected 'key = value'".into()))?;
        let key = key.trim();
        let value = value.trim();
        macro_rules! parse {
            ($ty:ty) => {
                value
                    .parse::<$ty>()
                    .map_err(|e| bad(format!("invalid value '{value}' for {key}: {e}")))?
            };
        }
        match key {
            "monophone_iters" => cfg.monophone_iters = parse!(usize),
            "fullcontext_iters" => cfg.fullcontext_iters = parse!(usize),
            "tied_iters" => cfg.tied_iters = parse!(usize),
            "lambda_mdl" => cfg.lambda_mdl = parse!(f64),
            "min_occupancy" => cfg.min_occupancy = parse!(f64),
            "variance_floor" => cfg.variance_floor = parse!(f64),
            "seed" => cfg.seed = parse!(u64),
            other => return Err(bad(format!("unknown key '{other}'"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRow {
    pub stage: &'static str,
    pub iteration: usize,
    pub total_ll: f64,
    pub frames: usize,
}

pub fn stats_csv(rows: &[StageRow]) -> String {
    let mut out = String::from("stage,iteration,total_LL,frames\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.6},{}\n",
            r.stage, r.iteration, r.total_ll, r.frames
        ));
    }
    out
}

fn in_stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Train(format!("stage {name}: {e}")))
}

/// Trains a complete model set from an annotated corpus directory and saves
/// it to `model_path`, with `stats.csv` and a feature cache alongside.
pub fn train_pipeline(
    corpus_dir: &Path,
    model_path: &Path,
    config: &TrainConfig,
) -> Result<(ModelSet, Vec<StageRow>)> {
    config.validate()?;
    let windows = DeltaWindows::default();
    let corpus = in_stage("load", load_corpus(corpus_dir, &config.analysis))?;

    let out_dir = model_path.parent().filter(|p| !p.as_os_str().is_empty());
    let cache_dir = out_dir.map_or_else(|| Path::new("feature_cache").to_path_buf(), |d| d.join("feature_cache"));
    let cache = in_stage("features", FeatureCache::new(&cache_dir, &config.analysis))?;
    let records = in_stage("features", cache.load_all(&corpus, &config.analysis))?;

    let mut utterances = Vec::with_capacity(corpus.len());
    let mut total_frames = 0usize;
    for (entry, record) in corpus.iter().zip(&records) {
        let labels = in_stage("labels", build_context_labels(&entry.annotation))?;
        let obs = in_stage("labels", record.to_observations(&windows))?;
        total_frames += obs.spectral.len();
        utterances.push(TrainingUtterance {
            id: entry.id.clone(),
            labels,
            obs,
        });
    }

    let mut rows: Vec<StageRow> = Vec::new();
    let mut log = |stage: &'static str, iteration: usize, total_ll: f64| {
        println!("[train] {stage} iteration {iteration}: log-likelihood {total_ll:.4} over {total_frames} frames");
        rows.push(StageRow {
            stage,
            iteration,
            total_ll,
            frames: total_frames,
        });
    };

    let mut set = in_stage(
        "flat_start",
        flat_start(&utterances, &config.analysis, &windows),
    )?;

    for i in 0..config.monophone_iters {
        let ll = in_stage(
            "monophone_em",
            reestimate(
                &mut set.monophones,
                ModelKey::Monophone,
                &utterances,
                config.variance_floor,
            ),
        )?;
        log("monophone", i + 1, ll);
    }

    let label_refs: Vec<&ContextLabel> =
        utterances.iter().flat_map(|u| u.labels.iter()).collect();
    set.fullcontext = in_stage("clone", clone_to_fullcontext(&set.monophones, &label_refs))?;

    for i in 0..config.fullcontext_iters {
        let ll = in_stage(
            "fullcontext_em",
            reestimate(
                &mut set.fullcontext,
                ModelKey::FullContext,
                &utterances,
                config.variance_floor,
            ),
        )?;
        log("fullcontext", i + 1, ll);
    }

    // One extra pass so clustering statistics and duration runs reflect the
    // final full-context parameters.
    let (cluster_stats, align_ll) = in_stage(
        "alignment",
        accumulate_corpus(&set.fullcontext, ModelKey::FullContext, &utterances),
    )?;
    log("alignment", 1, align_ll);
    let duration_stats = in_stage(
        "alignment",
        viterbi_duration_stats(&set, &utterances),
    )?;

    let parsed: BTreeMap<&String, ContextLabel> = cluster_stats
        .keys()
        .map(|k| parse_label(k).map(|l| (k, l)))
        .collect::<Result<_>>()?;
    let questions = generate_question_set(crate::frontend::phoneme_inventory());
    let cluster_cfg = ClusterConfig {
        lambda_mdl: config.lambda_mdl,
        min_occupancy: config.min_occupancy,
    };

    let mut spectrum_leaves: Vec<GaussStats> = Vec::new();
    let mut duration_leaves: Vec<GaussStats> = Vec::new();
    let mut excitation_leaf_count = 0u32;
    for s in 0..NUM_STATES {
        let spectrum_entries: Vec<(&ContextLabel, &GaussStats)> = cluster_stats
            .iter()
            .map(|(k, st)| (&parsed[k], &st[s].spectrum))
            .collect();
        let (tree, leaves) = in_stage(
            "cluster",
            cluster_states_mdl(
                &spectrum_entries,
                &questions,
                &cluster_cfg,
                config.variance_floor,
                spectrum_leaves.len() as u32,
            ),
        )?;
        set.trees.insert((s as u8, Stream::Spectrum), tree);
        spectrum_leaves.extend(leaves);

        let excitation_entries: Vec<(&ContextLabel, &GaussStats)> = cluster_stats
            .iter()
            .map(|(k, st)| (&parsed[k], &st[s].excitation.voiced))
            .collect();
        let (tree, leaves) = in_stage(
            "cluster",
            cluster_states_mdl(
                &excitation_entries,
                &questions,
                &cluster_cfg,
                config.variance_floor,
                excitation_leaf_count,
            ),
        )?;
        set.trees.insert((s as u8, Stream::Excitation), tree);
        excitation_leaf_count += leaves.len() as u32;

        let duration_entries: Vec<(&ContextLabel, &GaussStats)> = duration_stats
            .iter()
            .map(|(k, per_state)| (&parsed[k], &per_state[s]))
            .collect();
        let (tree, leaves) = in_stage(
            "cluster",
            cluster_states_mdl(
                &duration_entries,
                &questions,
                &cluster_cfg,
                crate::model::DURATION_VARIANCE_FLOOR,
                duration_leaves.len() as u32,
            ),
        )?;
        set.trees.insert((s as u8, Stream::Duration), tree);
        duration_leaves.extend(leaves);
    }

    set.tied.spectrum = spectrum_leaves
        .iter()
        .map(|st| st.to_gaussian(config.variance_floor))
        .collect();

    // Excitation leaves need the voiced/unvoiced mass split, which the
    // clustering stats alone do not carry; pool the MSD stats per leaf.
    let mut excitation_pool: Vec<MsdStats> =
        (0..excitation_leaf_count).map(|_| MsdStats::zeros(3)).collect();
    for (k, st) in &cluster_stats {
        let label = &parsed[k];
        for s in 0..NUM_STATES {
            let leaf = set.trees[&(s as u8, Stream::Excitation)].traverse(label) as usize;
            excitation_pool[leaf].merge(&st[s].excitation);
        }
    }
    let fallback = MSDGaussian::new(0.5, StreamGaussian::new(vec![0.0; 3], vec![1.0; 3]));
    set.tied.excitation = excitation_pool
        .iter()
        .map(|st| st.to_msd(config.variance_floor, &fallback))
        .collect();

    set.tied.duration = duration_leaves.iter().map(duration_from_stats).collect();

    // Tied-state leaf indices per label, in fullcontext table order.
    let leaf_map: BTreeMap<String, Vec<(usize, usize)>> = cluster_stats
        .keys()
        .map(|k| {
            let label = &parsed[k];
            let per_state = (0..NUM_STATES)
                .map(|s| {
                    let spec = set.trees[&(s as u8, Stream::Spectrum)].traverse(label) as usize;
                    let exc = set.trees[&(s as u8, Stream::Excitation)].traverse(label) as usize;
                    (spec, exc)
                })
                .collect();
            (k.to_string(), per_state)
        })
        .collect();

    for i in 0..config.tied_iters {
        let ll = in_stage(
            "tied_em",
            tied_reestimate(&mut set, &leaf_map, &utterances, config.variance_floor),
        )?;
        log("tied", i + 1, ll);
    }

    // Write the tied distributions back through the trees so the
    // full-context table and the pools agree.
    for (key, hmm) in set.fullcontext.iter_mut() {
        let label = &parsed[key];
        for s in 0..NUM_STATES {
            let spec = set.trees[&(s as u8, Stream::Spectrum)].traverse(label) as usize;
            let exc = set.trees[&(s as u8, Stream::Excitation)].traverse(label) as usize;
            let dur = set.trees[&(s as u8, Stream::Duration)].traverse(label) as usize;
            hmm.states[s].spectrum = set.tied.spectrum[spec].clone();
            hmm.states[s].excitation = set.tied.excitation[exc].clone();
            hmm.durations[s] = set.tied.duration[dur].clone();
        }
    }

    let final_ll = in_stage(
        "final_score",
        score_corpus(&set.fullcontext, ModelKey::FullContext, &utterances),
    )?;
    log("final", 1, final_ll);

    let statics: Vec<Vec<Vec<f64>>> = records.iter().map(|r| r.mcep.clone()).collect();
    set.gv = Some(in_stage("gv", estimate_gv(&statics))?);

    in_stage("save", set.validate())?;
    in_stage("save", save_model_set(&set, model_path))?;
    let stats_path = out_dir.map_or_else(|| Path::new("stats.csv").to_path_buf(), |d| d.join("stats.csv"));
    in_stage("save", write_atomic(&stats_path, stats_csv(&rows).as_bytes()))?;

    Ok((set, rows))
}

/// Viterbi state-duration statistics per (label, state): one observation per
/// consecutive run, weight 1, value the run length in frames.
fn viterbi_duration_stats(
    set: &ModelSet,
    utterances: &[TrainingUtterance],
) -> Result<BTreeMap<String, Vec<GaussStats>>> {
    let per_utt = ordered_map(utterances, |utt| -> Result<BTreeMap<String, Vec<GaussStats>>> {
        let keys: Vec<String> = utt.labels.iter().map(format_label).collect();
        let mut chain = Vec::with_capacity(keys.len() * NUM_STATES);
        for key in &keys {
            let hmm = set
                .fullcontext
                .get(key)
                .ok_or_else(|| Error::Train(format!("utterance {}: no model for '{key}'", utt.id)))?;
            chain.extend(hmm.states.iter());
        }
        let (path, _) = viterbi_align(&utt.obs, &chain)
            .map_err(|e| Error::Train(format!("utterance {}: {e}", utt.id)))?;
        let runs = state_runs(&path, chain.len());
        let mut stats: BTreeMap<String, Vec<GaussStats>> = BTreeMap::new();
        for (k, key) in keys.iter().enumerate() {
            let entry = stats
                .entry(key.clone())
                .or_insert_with(|| vec![GaussStats::zeros(1); NUM_STATES]);
            for s in 0..NUM_STATES {
                for &len in &runs[k * NUM_STATES + s] {
                    entry[s].add(1.0, &[len as f64]);
                }
            }
        }
        Ok(stats)
    });

    let mut merged: BTreeMap<String, Vec<GaussStats>> = BTreeMap::new();
    for result in per_utt {
        for (key, per_state) in result? {
            match merged.get_mut(&key) {
                Some(acc) => {
                    for (a, b) in acc.iter_mut().zip(&per_state) {
                        a.merge(b);
                    }
                }
                None => {
                    merged.insert(key, per_state);
                }
            }
        }
    }
    Ok(merged)
}

/// One EM iteration with emissions tied through the decision trees. Updates
/// the pools and the per-label self-loops; returns the pre-update LL.
fn tied_reestimate(
    set: &mut ModelSet,
    leaf_map: &BTreeMap<String, Vec<(usize, usize)>>,
    utterances: &[TrainingUtterance],
    variance_floor: f64,
) -> Result<f64> {
    let spectral_dim = utterances
        .first()
        .and_then(|u| u.obs.spectral.first())
        .map_or(0, Vec::len);
    let spectrum_pool = &set.tied.spectrum;
    let excitation_pool = &set.tied.excitation;
    let fullcontext = &set.fullcontext;

    type UttAcc = (Vec<GaussStats>, Vec<MsdStats>, BTreeMap<String, Vec<(f64, f64)>>, f64);
    let per_utt = ordered_map(utterances, |utt| -> Result<UttAcc> {
        let keys: Vec<String> = utt.labels.iter().map(format_label).collect();
        let mut leaves = Vec::with_capacity(keys.len() * NUM_STATES);
        let mut self_loops = Vec::with_capacity(keys.len() * NUM_STATES);
        for key in &keys {
            let per_state = leaf_map
                .get(key)
                .ok_or_else(|| Error::Train(format!("utterance {}: no tied entry for '{key}'", utt.id)))?;
            let hmm = fullcontext
                .get(key)
                .ok_or_else(|| Error::Train(format!("utterance {}: no model for '{key}'", utt.id)))?;
            for s in 0..NUM_STATES {
                leaves.push(per_state[s]);
                self_loops.push(hmm.states[s].self_loop);
            }
        }

        let log_emissions: Vec<Vec<f64>> = utt
            .obs
            .spectral
            .iter()
            .zip(&utt.obs.excitation)
            .map(|(spec, exc)| {
                let exc = exc.as_ref().map(|a| a.as_slice());
                leaves
                    .iter()
                    .map(|&(spec_leaf, exc_leaf)| {
                        spectrum_pool[spec_leaf].log_density(spec)
                            + msd_log_prob(exc, &excitation_pool[exc_leaf])
                    })
                    .collect()
            })
            .collect();
        let (occ, ll) = forward_backward_scaled(&log_emissions, &self_loops)
            .map_err(|e| Error::Train(format!("utterance {}: {e}", utt.id)))?;

        let mut spec_acc: Vec<GaussStats> =
            (0..spectrum_pool.len()).map(|_| GaussStats::zeros(spectral_dim)).collect();
        let mut exc_acc: Vec<MsdStats> =
            (0..excitation_pool.len()).map(|_| MsdStats::zeros(3)).collect();
        let mut loop_acc: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();

        for (k, key) in keys.iter().enumerate() {
            let entry = loop_acc
                .entry(key.clone())
                .or_insert_with(|| vec![(0.0, 0.0); NUM_STATES]);
            for s in 0..NUM_STATES {
                let j = k * NUM_STATES + s;
                let (spec_leaf, exc_leaf) = leaves[j];
                for (t, (spec, exc)) in
                    utt.obs.spectral.iter().zip(&utt.obs.excitation).enumerate()
                {
                    let g = occ.gamma[t][j];
                    if g > 0.0 {
                        spec_acc[spec_leaf].add(g, spec);
                        exc_acc[exc_leaf].add(g, exc.as_ref().map(|a| a.as_slice()));
                    }
                }
                entry[s].0 += occ.xi_self[j];
                entry[s].1 += occ.xi_total[j];
            }
        }
        Ok((spec_acc, exc_acc, loop_acc, ll))
    });

    let mut spec_merged: Vec<GaussStats> =
        (0..set.tied.spectrum.len()).map(|_| GaussStats::zeros(spectral_dim)).collect();
    let mut exc_merged: Vec<MsdStats> =
        (0..set.tied.excitation.len()).map(|_| MsdStats::zeros(3)).collect();
    let mut loop_merged: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut total_ll = 0.0;
    for result in per_utt {
        let (spec_acc, exc_acc, loop_acc, ll) = result?;
        total_ll += ll;
        for (a, b) in spec_merged.iter_mut().zip(&spec_acc) {
            a.merge(b);
        }
        for (a, b) in exc_merged.iter_mut().zip(&exc_acc) {
            a.merge(b);
        }
        for (key, per_state) in loop_acc {
            match loop_merged.get_mut(&key) {
                Some(acc) => {
                    for (a, b) in acc.iter_mut().zip(&per_state) {
                        a.0 += b.0;
                        a.1 += b.1;
                    }
                }
                None => {
                    loop_merged.insert(key, per_state);
                }
            }
        }
    }

    for (pool, stats) in set.tied.spectrum.iter_mut().zip(&spec_merged) {
        if stats.occ > 0.0 {
            *pool = stats.to_gaussian(variance_floor);
        }
    }
    for (pool, stats) in set.tied.excitation.iter_mut().zip(&exc_merged) {
        if stats.total_occ > 0.0 {
            *pool = stats.to_msd(variance_floor, pool);
        }
    }
    for (key, per_state) in &loop_merged {
        let hmm = set.fullcontext.get_mut(key).expect("accumulated key exists");
        for (state, &(num, den)) in hmm.states.iter_mut().zip(per_state) {
            if den > 0.0 {
                state.self_loop = (num / den).clamp(SELF_LOOP_MIN, SELF_LOOP_MAX);
            }
        }
    }
    Ok(total_ll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_synthetic_corpus, SyntheticCorpusSpec};
    use crate::model::load_model_set;

    #[test]
    fn config_parsing_round_trips_and_rejects_junk() {
        let cfg = parse_train_config(
            "# comment\n\nmonophone_iters = 3\nlambda_mdl = 0.5\nseed = 9\nvariance_floor = 1e-5\n",
        )
        .unwrap();
        assert_eq!(cfg.monophone_iters, 3);
        assert_eq!(cfg.fullcontext_iters, 2);
        assert!((cfg.lambda_mdl - 0.5).abs() < 1e-12);
        assert_eq!(cfg.seed, 9);
        assert!((cfg.variance_floor - 1e-5).abs() < 1e-18);

        let err = parse_train_config("mystery = 1\n").unwrap_err();
        assert!(err.to_string().contains("unknown key 'mystery'"), "{err}");
        let err = parse_train_config("monophone_iters: 3\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = parse_train_config("lambda_mdl = -2\n").unwrap_err();
        assert!(err.to_string().contains("non-negative"), "{err}");
    }

    #[test]
    fn full_pipeline_trains_validates_and_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_dir = dir.path().join("corpus");
        let spec = SyntheticCorpusSpec::new(8, 11);
        generate_synthetic_corpus(&spec, &corpus_dir).unwrap();

        let model_path = dir.path().join("out").join("model.bhtsm1");
        std::fs::create_dir_all(model_path.parent().unwrap()).unwrap();
        let config = TrainConfig {
            monophone_iters: 3,
            fullcontext_iters: 2,
            tied_iters: 2,
            ..TrainConfig::default()
        };
        let (set, rows) = train_pipeline(&corpus_dir, &model_path, &config).unwrap();
        set.validate().unwrap();
        assert!(set.has_trees());
        assert_eq!(set.trees.len(), NUM_STATES * 3);
        assert!(set.gv.is_some());
        assert!(!set.tied.spectrum.is_empty());

        let reloaded = load_model_set(&model_path).unwrap();
        assert_eq!(reloaded, set);

        let monophone: Vec<&StageRow> = rows.iter().filter(|r| r.stage == "monophone").collect();
        assert_eq!(monophone.len(), 3);
        for w in monophone.windows(2) {
            assert!(w[1].total_ll >= w[0].total_ll - 1e-6, "monophone LL fell");
        }
        let tied: Vec<&StageRow> = rows.iter().filter(|r| r.stage == "tied").collect();
        for w in tied.windows(2) {
            assert!(w[1].total_ll >= w[0].total_ll - 1e-6, "tied LL fell");
        }

        let stats_text = std::fs::read_to_string(dir.path().join("out").join("stats.csv")).unwrap();
        assert!(stats_text.starts_with("stage,iteration,total_LL,frames\n"));
        assert_eq!(stats_text.lines().count(), rows.len() + 1);
    }

    #[test]
    fn training_twice_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let corpus_dir = dir.path().join("corpus");
        generate_synthetic_corpus(&SyntheticCorpusSpec::new(6, 21), &corpus_dir).unwrap();

        let config = TrainConfig {
            monophone_iters: 2,
            fullcontext_iters: 1,
            tied_iters: 1,
            ..TrainConfig::default()
        };
        let mut bytes = Vec::new();
        for run in 0..2 {
            let model_path = dir.path().join(format!("run{run}")).join("model.bhtsm1");
            std::fs::create_dir_all(model_path.parent().unwrap()).unwrap();
            train_pipeline(&corpus_dir, &model_path, &config).unwrap();
            bytes.push(std::fs::read(&model_path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1], "model files differ between runs");
    }
}
