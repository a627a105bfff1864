use super::question::Question;
use crate::frontend::ContextLabel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf { id: u32 },
    Internal { question: Question, yes: u32, no: u32 },
}

/// Binary question tree; node 0 is the root and children always follow their
/// parent in the node list, so traversal cannot cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn single_leaf(id: u32) -> Self {
        DecisionTree {
            nodes: vec![TreeNode::Leaf { id }],
        }
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::ModelFile("decision tree has no nodes".into()));
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if let TreeNode::Internal { yes, no, .. } = node {
                for child in [*yes, *no] {
                    if child as usize <= i || child as usize >= self.nodes.len() {
                        return Err(Error::ModelFile(format!(
                            "tree node {i} references invalid child {child}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Deterministic root-to-leaf descent; returns the leaf distribution id.
    pub fn traverse(&self, label: &ContextLabel) -> u32 {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                TreeNode::Leaf { id } => return *id,
                TreeNode::Internal { question, yes, no } => {
                    idx = if question.answer(label) { *yes } else { *no } as usize;
                }
            }
        }
    }
}

pub fn tree_traverse(label: &ContextLabel, tree: &DecisionTree) -> u32 {
    tree.traverse(label)
}
