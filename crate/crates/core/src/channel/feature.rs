use super::generate::ChannelSample;
use super::linalg::rank_truncated_pseudo_inverse;
use crate::adgraph::Tensor;
use crate::{CMatrix, Error, Result, C64};

/// Real feature tensor `Γ` of shape `[4, U, N]`.
///
/// Channel 0/1 hold amplitude and phase of the RIS→user gain `g_un`;
/// channel 2/3 hold amplitude and phase of `j_un` from `J = D·H⁺`, which
/// re-expresses the direct link as if it were routed through element `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFeature {
    gamma: Tensor,
    anchors: Option<Vec<usize>>,
}

impl ChannelFeature {
    pub fn new(gamma: Tensor, anchors: Option<Vec<usize>>) -> Result<Self> {
        let s = gamma.shape();
        if s.len() != 3 || s[0] != 4 {
            return Err(Error::dim(format!("feature tensor must be [4, U, N], got {s:?}")));
        }
        if let Some(a) = &anchors {
            if a.len() != s[2] {
                return Err(Error::dim(format!(
                    "{} anchors for {} feature columns",
                    a.len(),
                    s[2]
                )));
            }
        }
        Ok(ChannelFeature { gamma, anchors })
    }

    pub fn gamma(&self) -> &Tensor {
        &self.gamma
    }

    pub fn anchors(&self) -> Option<&[usize]> {
        self.anchors.as_deref()
    }

    pub fn users(&self) -> usize {
        self.gamma.shape()[1]
    }

    /// Number of element columns currently held.
    pub fn columns(&self) -> usize {
        self.gamma.shape()[2]
    }

    /// Keeps only the listed columns, in order; anchors compose with any
    /// restriction already applied.
    pub fn restrict_to_anchors(&self, anchors: &[usize]) -> Result<Self> {
        let n = self.columns();
        if let Some(bad) = anchors.iter().find(|&&a| a >= n) {
            return Err(Error::contract(format!("anchor {bad} out of {n} elements")));
        }
        if anchors.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("anchors must be strictly increasing"));
        }
        let u = self.users();
        let src = self.gamma.data();
        let mut data = Vec::with_capacity(4 * u * anchors.len());
        for row in 0..4 * u {
            data.extend(anchors.iter().map(|&a| src[row * n + a]));
        }
        let recorded = match &self.anchors {
            Some(prev) => anchors.iter().map(|&a| prev[a]).collect(),
            None => anchors.to_vec(),
        };
        ChannelFeature::new(
            Tensor::new(vec![4, u, anchors.len()], data)?,
            Some(recorded),
        )
    }
}

/// Builds `Γ` from a channel sample.
pub fn channel_feature(sample: &ChannelSample) -> Result<ChannelFeature> {
    let j = &sample.d * rank_truncated_pseudo_inverse(&sample.h)?;
    feature_from(&sample.g, &j)
}

/// Builds `Γ` from `G` and a precomputed `J`.
pub fn feature_from(g: &CMatrix, j: &CMatrix) -> Result<ChannelFeature> {
    if g.shape() != j.shape() {
        return Err(Error::dim(format!("G {:?} vs J {:?}", g.shape(), j.shape())));
    }
    let (u, n) = g.shape();
    let mut data = vec![0.0; 4 * u * n];
    let mut put = |channel: usize, m: &CMatrix, f: fn(&C64) -> f64| {
        for r in 0..u {
            for c in 0..n {
                data[(channel * u + r) * n + c] = f(&m[(r, c)]);
            }
        }
    };
    put(0, g, |z| z.norm());
    put(1, g, |z| z.arg());
    put(2, j, |z| z.norm());
    put(3, j, |z| z.arg());
    ChannelFeature::new(Tensor::new(vec![4, u, n], data)?, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample(n: usize) -> ChannelSample {
        ChannelSample {
            h: CMatrix::identity(n, n),
            g: CMatrix::from_fn(2, n, |r, c| C64::new(r as f64 - 1.0, c as f64 * 0.5)),
            d: CMatrix::from_fn(2, n, |r, c| C64::new(0.1 * c as f64, 0.2 * r as f64 - 0.1)),
        }
    }

    #[test]
    fn identity_channel_maps_direct_link() {
        let s = sample(3);
        let f = channel_feature(&s).unwrap();
        let gm = f.gamma();
        for u in 0..2 {
            for n in 0..3 {
                assert!((gm.at(&[2, u, n]) - s.d[(u, n)].norm()).abs() < 1e-12);
                assert!((gm.at(&[3, u, n]) - s.d[(u, n)].arg()).abs() < 1e-12);
            }
        }
        // g_00 = -1 → amplitude 1, phase π
        assert_eq!(gm.at(&[0, 0, 0]), 1.0);
        assert_eq!(gm.at(&[1, 0, 0]), PI);
    }

    #[test]
    fn anchors_slice_columns() {
        let f = channel_feature(&sample(4)).unwrap();
        let all = f.restrict_to_anchors(&[0, 1, 2, 3]).unwrap();
        assert_eq!(all.gamma(), f.gamma());
        let one = f.restrict_to_anchors(&[2]).unwrap();
        assert_eq!(one.gamma().shape(), &[4, 2, 1]);
        assert_eq!(one.gamma().at(&[1, 1, 0]), f.gamma().at(&[1, 1, 2]));
        assert_eq!(one.anchors(), Some(&[2usize][..]));
        assert!(f.restrict_to_anchors(&[4]).is_err());
        assert!(f.restrict_to_anchors(&[2, 1]).is_err());
    }
}
