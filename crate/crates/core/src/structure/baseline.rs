use super::{Node, Structure, StructureBuilder, StructureError};

/// The classical prefix/suffix structure: `f_j = f_{j-1} + x_j`, `b_j = b_{j+1} + x_j`,
/// `y_j = f_{j-1} + b_{j+1}`. Complexity `3n - 6`, latency `n - 2`.
pub fn forward_backward(n: usize) -> Result<Structure, StructureError> {
    if n < 3 {
        return Err(StructureError::TooFewInputs { n, min: 3 });
    }
    let mut b = StructureBuilder::new(n);
    let x: Vec<_> = (1..=n).map(|j| b.input(j)).collect();
    // prefix[j] folds x_1..x_{j+1}, suffix[j] folds x_{j+1}..x_n (0-based positions)
    let mut prefix = vec![x[0]];
    for j in 1..n - 1 {
        let next = b.combine(prefix[j - 1], x[j]);
        prefix.push(next);
    }
    let mut suffix = vec![x[n - 1]; n];
    for j in (1..n - 1).rev() {
        suffix[j] = b.combine(suffix[j + 1], x[j]);
    }
    b.label_output(suffix[1], 1)?;
    b.label_output(prefix[n - 2], n)?;
    for j in 1..n - 1 {
        let y = b.combine(prefix[j - 1], suffix[j + 1]);
        b.label_output(y, j + 1)?;
    }
    Ok(b.build())
}

/// The only structure for two inputs: no computation, `y_1 = x_2` and `y_2 = x_1`.
pub fn two_input() -> Structure {
    Structure::from_nodes(2, vec![Node::input(1).with_output(2), Node::input(2).with_output(1)])
        .expect("static structure")
}
