use super::stats::GaussStats;
use crate::frontend::ContextLabel;
use crate::model::{DecisionTree, Question, TreeNode};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ClusterConfig {
    pub lambda_mdl: f64,
    /// Minimum frames of occupancy a split may leave in either child;
    /// 0 disables the check.
    pub min_occupancy: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            lambda_mdl: 1.0,
            min_occupancy: 10.0,
        }
    }
}

/// Log-likelihood of pooled stats under a single diagonal Gaussian fit.
fn node_ll(stats: &GaussStats, floor: f64) -> f64 {
    if stats.occ <= 0.0 {
        return 0.0;
    }
    let d = stats.dim() as f64;
    let (_, variance) = stats.mean_variance(floor);
    let log_det: f64 = variance.iter().map(|v| v.ln()).sum();
    -0.5 * stats.occ * (d * (2.0 * std::f64::consts::PI).ln() + log_det + d)
}

struct Candidate {
    question: usize,
    gain: f64,
    yes_items: Vec<usize>,
    no_items: Vec<usize>,
    yes_stats: GaussStats,
    no_stats: GaussStats,
}

struct Leaf {
    node: usize,
    stats: GaussStats,
    best: Option<Candidate>,
}

fn best_split(
    items: &[usize],
    leaf_ll: f64,
    labels: &[&ContextLabel],
    stats: &[&GaussStats],
    questions: &[Question],
    cfg: &ClusterConfig,
    floor: f64,
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    let dim = stats[items[0]].dim();
    for (qi, question) in questions.iter().enumerate() {
        let mut yes_stats = GaussStats::zeros(dim);
        let mut no_stats = GaussStats::zeros(dim);
        let mut yes_items = Vec::new();
        let mut no_items = Vec::new();
        for &i in items {
            if question.answer(labels[i]) {
                yes_stats.merge(stats[i]);
                yes_items.push(i);
            } else {
                no_stats.merge(stats[i]);
                no_items.push(i);
            }
        }
        if yes_items.is_empty() || no_items.is_empty() {
            continue;
        }
        if yes_stats.occ < cfg.min_occupancy || no_stats.occ < cfg.min_occupancy {
            continue;
        }
        let gain = node_ll(&yes_stats, floor) + node_ll(&no_stats, floor) - leaf_ll;
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(Candidate {
                question: qi,
                gain,
                yes_items,
                no_items,
                yes_stats,
                no_stats,
            });
        }
    }
    best
}

/// Greedy top-down MDL clustering of one (state, stream) family. Leaf ids
/// start at `leaf_id_base`; the returned stats are indexed by id minus base.
pub fn cluster_states_mdl(
    entries: &[(&ContextLabel, &GaussStats)],
    questions: &[Question],
    cfg: &ClusterConfig,
    variance_floor: f64,
    leaf_id_base: u32,
) -> Result<(DecisionTree, Vec<GaussStats>)> {
    if cfg.lambda_mdl < 0.0 {
        return Err(Error::Train("lambda_mdl must be non-negative".into()));
    }
    if entries.is_empty() {
        return Err(Error::Train("no statistics to cluster".into()));
    }
    let labels: Vec<&ContextLabel> = entries.iter().map(|(l, _)| *l).collect();
    let stats: Vec<&GaussStats> = entries.iter().map(|(_, s)| *s).collect();
    let dim = stats[0].dim();
    if stats.iter().any(|s| s.dim() != dim) {
        return Err(Error::Train("mixed dimensions in clustering stats".into()));
    }

    let mut root_stats = GaussStats::zeros(dim);
    for s in &stats {
        root_stats.merge(s);
    }
    if root_stats.occ <= 0.0 {
        return Err(Error::Train("no occupancy in clustering stats".into()));
    }
    // Description-length penalty per extra leaf: mean + variance per dim.
    let threshold = cfg.lambda_mdl * 0.5 * (2 * dim) as f64 * root_stats.occ.ln();

    let mut nodes: Vec<TreeNode> = vec![TreeNode::Leaf { id: 0 }];
    let root_items: Vec<usize> = (0..stats.len()).collect();
    let mut leaves = vec![new_leaf(
        0,
        root_items,
        root_stats,
        &labels,
        &stats,
        questions,
        cfg,
        variance_floor,
    )];

    loop {
        let mut pick: Option<usize> = None;
        for (li, leaf) in leaves.iter().enumerate() {
            if let Some(c) = &leaf.best {
                if c.gain > threshold
                    && pick.is_none_or(|p| c.gain > leaves[p].best.as_ref().unwrap().gain)
                {
                    pick = Some(li);
                }
            }
        }
        let Some(li) = pick else { break };

        let parent_node = leaves[li].node;
        let cand = leaves[li].best.take().unwrap();
        let question = questions[cand.question].clone();
        let yes_node = nodes.len();
        let no_node = nodes.len() + 1;
        nodes.push(TreeNode::Leaf { id: 0 });
        nodes.push(TreeNode::Leaf { id: 0 });
        nodes[parent_node] = TreeNode::Internal {
            question,
            yes: yes_node as u32,
            no: no_node as u32,
        };

        let yes_leaf = new_leaf(
            yes_node,
            cand.yes_items,
            cand.yes_stats,
            &labels,
            &stats,
            questions,
            cfg,
            variance_floor,
        );
        let no_leaf = new_leaf(
            no_node,
            cand.no_items,
            cand.no_stats,
            &labels,
            &stats,
            questions,
            cfg,
            variance_floor,
        );
        leaves[li] = yes_leaf;
        leaves.push(no_leaf);
    }

    // Leaf ids follow node order so serialization and pools line up.
    let mut leaf_stats: Vec<GaussStats> = Vec::new();
    let mut by_node: std::collections::BTreeMap<usize, GaussStats> = leaves
        .into_iter()
        .map(|l| (l.node, l.stats))
        .collect();
    for (i, node) in nodes.iter_mut().enumerate() {
        if let TreeNode::Leaf { id } = node {
            *id = leaf_id_base + leaf_stats.len() as u32;
            leaf_stats.push(by_node.remove(&i).expect("leaf bookkeeping"));
        }
    }

    let tree = DecisionTree { nodes };
    tree.validate()?;
    Ok((tree, leaf_stats))
}

#[allow(clippy::too_many_arguments)]
fn new_leaf(
    node: usize,
    items: Vec<usize>,
    stats: GaussStats,
    labels: &[&ContextLabel],
    all_stats: &[&GaussStats],
    questions: &[Question],
    cfg: &ClusterConfig,
    floor: f64,
) -> Leaf {
    let ll = node_ll(&stats, floor);
    let best = best_split(&items, ll, labels, all_stats, questions, cfg, floor);
    Leaf { node, stats, best }
}
