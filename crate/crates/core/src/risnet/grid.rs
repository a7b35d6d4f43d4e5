use super::arch::EXPANSION_FILTERS;
use crate::{Error, Result};

/// Element indices (row-major, `col + row * cols`) whose features exist at
/// `stage`: stage 0 keeps the centre of every 9×9 block, stage 1 the centre
/// of every 3×3 block, stage 2 every element.
pub fn anchor_grid(stage: usize, rows: usize, cols: usize) -> Result<Vec<usize>> {
    if rows % 9 != 0 || cols % 9 != 0 || rows == 0 || cols == 0 {
        return Err(Error::config(format!(
            "anchor grid needs dims divisible by 9, got {rows}x{cols}"
        )));
    }
    let (step, offset) = match stage {
        0 => (9, 4),
        1 => (3, 1),
        2 => (1, 0),
        _ => return Err(Error::config(format!("anchor stage {stage} not in 0..=2"))),
    };
    let mut out = Vec::with_capacity((rows / step) * (cols / step));
    for r in (offset..rows).step_by(step) {
        for c in (offset..cols).step_by(step) {
            out.push(c + r * cols);
        }
    }
    Ok(out)
}

/// Element receiving filter `j` (1..=9) of the block centred on `n`.
///
/// Indices are 1-based and row-major with `cols` columns; filters run over
/// the 3×3 neighbourhood row by row, `j = 5` being the centre itself.
pub fn nu(n: usize, j: usize, cols: usize) -> Result<usize> {
    if !(1..=EXPANSION_FILTERS).contains(&j) || n == 0 || cols == 0 {
        return Err(Error::contract(format!("nu({n}, {j}) with {cols} columns")));
    }
    let col = (n - 1) % cols + 1;
    let dc = (j - 1) % 3;
    if (col == 1 && dc == 0) || (col == cols && dc == 2) {
        return Err(Error::contract(format!(
            "filter {j} of element {n} falls off the grid edge"
        )));
    }
    let out = match j {
        1..=3 => (n + j).checked_sub(cols + 2),
        4..=6 => (n + j).checked_sub(5),
        _ => Some(n + cols + j - 8),
    };
    match out {
        Some(v) if v >= 1 => Ok(v),
        _ => Err(Error::contract(format!("filter {j} of element {n} falls above the grid"))),
    }
}

/// Index tables for one expansion layer (stage `s` → `s + 1`).
#[derive(Debug, Clone)]
pub struct ExpansionPlan {
    inputs: usize,
    /// For every output anchor (in output order): `(filter j - 1, input anchor)`.
    source: Vec<(usize, usize)>,
}

impl ExpansionPlan {
    pub fn new(stage_in: usize, rows: usize, cols: usize) -> Result<Self> {
        if stage_in > 1 {
            return Err(Error::config(format!("cannot expand beyond stage 2 (from {stage_in})")));
        }
        let inputs = anchor_grid(stage_in, rows, cols)?;
        // Logical grid of the output stage: one cell per output anchor.
        let factor = if stage_in == 0 { 3 } else { 1 };
        let (out_rows, out_cols) = (rows / factor, cols / factor);
        let mut source = vec![None; out_rows * out_cols];
        for (i, &elem) in inputs.iter().enumerate() {
            let (r, c) = (elem / cols / factor, elem % cols / factor);
            if r % 3 != 1 || c % 3 != 1 {
                return Err(Error::config(format!("anchor {elem} is not a block centre")));
            }
            let centre = r * out_cols + c + 1;
            for j in 1..=EXPANSION_FILTERS {
                let target = nu(centre, j, out_cols)? - 1;
                let slot = source
                    .get_mut(target)
                    .ok_or_else(|| Error::config(format!("expansion target {target} off grid")))?;
                if slot.replace((j - 1, i)).is_some() {
                    return Err(Error::config(format!("expansion writes element {target} twice")));
                }
            }
        }
        let source = source
            .into_iter()
            .enumerate()
            .map(|(m, s)| s.ok_or_else(|| Error::config(format!("expansion leaves element {m} empty"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExpansionPlan {
            inputs: inputs.len(),
            source,
        })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.source.len()
    }

    /// `(filter index 0..9, input anchor)` feeding output anchor `m`.
    pub fn source(&self, m: usize) -> (usize, usize) {
        self.source[m]
    }

    /// Gather table mapping `[classes·9·width, users, inputs]` (rows ordered
    /// class, filter, feature) to `[classes·width, users, outputs]`.
    pub fn gather_index(&self, classes: usize, width: usize, users: usize) -> Vec<usize> {
        let (n_in, n_out) = (self.inputs, self.outputs());
        let mut index = Vec::with_capacity(classes * width * users * n_out);
        for class in 0..classes {
            for q in 0..width {
                for u in 0..users {
                    for &(j, n) in &self.source {
                        let row = (class * EXPANSION_FILTERS + j) * width + q;
                        index.push((row * users + u) * n_in + n);
                    }
                }
            }
        }
        index
    }
}
