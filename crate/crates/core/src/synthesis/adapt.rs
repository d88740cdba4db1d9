use super::{first_pi_pair, require_for_y, SynthesisError};
use crate::structure::{Node, NodeId, NodeKind, Structure};

/// Variable-node form: `y_1` becomes the fold of all inputs, computed by one node joining
/// the first minimum-height complement pair (skipping pairs that contain the old `y_1`).
/// The old `y_1` node and any computation it alone kept alive are removed.
///
/// The result no longer computes `y` in the leave-one-out sense, so it is not expected to
/// pass [`Structure::validate`] for outputs.
pub fn adapt_variable_node(s: &Structure) -> Result<Structure, SynthesisError> {
    require_for_y(s)?;
    let old = s.output_node(1).expect("validated");
    let mut nodes: Vec<Node> = s.nodes().to_vec();
    nodes[old.0].output = None;
    if !nodes[old.0].is_computation() {
        // n = 2: y_1 sits on input x_2
        let [a, b] = [s.input_node(1), s.input_node(2)].map(|x| x.expect("validated"));
        nodes.push(Node::computation(a, b).with_output(1));
        return Ok(Structure::from_nodes(s.n(), nodes)?);
    }
    let pair = first_pi_pair(s, |p| p.contains(old)).ok_or_else(|| {
        SynthesisError::Invalid("no minimum-height complement pair avoids y1".into())
    })?;
    nodes.push(Node::computation(pair.a, pair.b).with_output(1));
    let interim = Structure::from_nodes(s.n(), nodes)?;

    let mut dead = vec![false; interim.len()];
    let mut consumers: Vec<usize> = interim.ids().map(|id| interim.consumers(id).len()).collect();
    let mut work = vec![old];
    while let Some(id) = work.pop() {
        let node = &interim.nodes()[id.0];
        if dead[id.0] || consumers[id.0] > 0 || node.output.is_some() || !node.is_computation() {
            continue;
        }
        dead[id.0] = true;
        for op in node.operands().expect("computation") {
            consumers[op.0] -= 1;
            work.push(op);
        }
    }
    let mut remap = vec![NodeId(usize::MAX); interim.len()];
    let mut kept = Vec::new();
    for id in interim.ids().filter(|id| !dead[id.0]) {
        remap[id.0] = NodeId(kept.len());
        kept.push(interim.nodes()[id.0].clone());
    }
    for node in &mut kept {
        if let NodeKind::Computation([a, b]) = node.kind {
            node.kind = NodeKind::Computation([remap[a.0], remap[b.0]]);
        }
    }
    Ok(Structure::from_nodes(s.n(), kept)?)
}
