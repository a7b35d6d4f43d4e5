use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Which channel knowledge the network consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsiMode {
    /// Features of every RIS element.
    Full,
    /// Features of the 1/81 anchor subset only; expansion layers fill in the rest.
    Partial,
}

impl CsiMode {
    pub fn tag(self) -> &'static str {
        match self {
            CsiMode::Full => "full",
            CsiMode::Partial => "partial",
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(CsiMode::Full),
            "partial" => Ok(CsiMode::Partial),
            other => Err(Error::config(format!("unknown CSI mode {other:?}"))),
        }
    }
}

/// Number of filter classes per layer (cc, ca, oc, oa).
pub const CLASSES: usize = 4;
/// Width of the raw per-(user, element) channel feature.
pub const INPUT_WIDTH: usize = 4;
/// Filters per class in an expansion layer (one per 3×3 neighbour).
pub const EXPANSION_FILTERS: usize = 9;

/// Network shape. Layers are numbered from 1; layers `1..num_layers` process
/// features and layer `num_layers` is the user-summing output layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchConfig {
    pub csi_mode: CsiMode,
    pub num_layers: usize,
    /// Output width `Q_i` of every filter in non-final layers.
    pub hidden_q: usize,
    /// 1-based indices of expansion layers (partial CSI only).
    pub expansion_layers: Vec<usize>,
    pub ris_rows: usize,
    pub ris_cols: usize,
}

impl ArchConfig {
    pub fn full(ris_rows: usize, ris_cols: usize) -> Self {
        ArchConfig {
            csi_mode: CsiMode::Full,
            num_layers: 8,
            hidden_q: 16,
            expansion_layers: Vec::new(),
            ris_rows,
            ris_cols,
        }
    }

    pub fn partial(ris_rows: usize, ris_cols: usize) -> Self {
        ArchConfig {
            csi_mode: CsiMode::Partial,
            expansion_layers: vec![3, 6],
            ..ArchConfig::full(ris_rows, ris_cols)
        }
    }

    pub fn for_mode(mode: CsiMode, ris_rows: usize, ris_cols: usize) -> Self {
        match mode {
            CsiMode::Full => ArchConfig::full(ris_rows, ris_cols),
            CsiMode::Partial => ArchConfig::partial(ris_rows, ris_cols),
        }
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_layers < 2 || self.hidden_q == 0 {
            return Err(Error::config("need at least 2 layers and a positive hidden width"));
        }
        if self.ris_rows == 0 || self.ris_cols == 0 {
            return Err(Error::config("empty RIS grid"));
        }
        let last = self.num_layers - 1;
        if self
            .expansion_layers
            .iter()
            .any(|&l| l == 0 || l > last)
            || self.expansion_layers.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::config(format!(
                "expansion layers {:?} must be increasing indices in 1..={last}",
                self.expansion_layers
            )));
        }
        match self.csi_mode {
            CsiMode::Full if !self.expansion_layers.is_empty() => {
                Err(Error::config("full-CSI networks have no expansion layers"))
            }
            CsiMode::Partial if self.expansion_layers.len() != 2 => {
                Err(Error::config("partial-CSI networks need exactly 2 expansion layers"))
            }
            CsiMode::Partial if self.ris_rows % 9 != 0 || self.ris_cols % 9 != 0 => {
                Err(Error::config(format!(
                    "partial CSI needs grid dims divisible by 9, got {}x{}",
                    self.ris_rows, self.ris_cols
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn is_expansion(&self, layer: usize) -> bool {
        self.expansion_layers.contains(&layer)
    }

    /// Filters per class in `layer`.
    pub fn filters(&self, layer: usize) -> usize {
        if self.is_expansion(layer) {
            EXPANSION_FILTERS
        } else {
            1
        }
    }

    /// Input width `P_i` of `layer` (1-based).
    pub fn input_width(&self, layer: usize) -> usize {
        if layer == 1 {
            INPUT_WIDTH
        } else {
            CLASSES * self.hidden_q
        }
    }

    /// Anchor stage (0, 1 or 2) of the features entering `layer`.
    pub fn stage_before(&self, layer: usize) -> usize {
        match self.csi_mode {
            CsiMode::Full => 2,
            CsiMode::Partial => self.expansion_layers.iter().filter(|&&l| l < layer).count(),
        }
    }

    /// Trainable scalar count; depends on the layer structure only.
    pub fn parameter_count(&self) -> usize {
        let q = self.hidden_q;
        let hidden: usize = (1..self.num_layers)
            .map(|l| CLASSES * self.filters(l) * (q * self.input_width(l) + q))
            .sum();
        hidden + self.input_width(self.num_layers) + 1
    }
}
