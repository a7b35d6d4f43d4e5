use super::{Graph, Tensor, Var};
use crate::{CMatrix, Error, Result, C64};

/// Complex tensor stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    pub re: Tensor,
    pub im: Tensor,
}

impl ComplexTensor {
    pub fn new(re: Tensor, im: Tensor) -> Result<Self> {
        if re.shape() != im.shape() {
            return Err(Error::dim(format!(
                "complex parts differ: {:?} vs {:?}",
                re.shape(),
                im.shape()
            )));
        }
        Ok(ComplexTensor { re, im })
    }

    pub fn shape(&self) -> &[usize] {
        self.re.shape()
    }

    /// Row-major split of a dense complex matrix.
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let z = m[(r, c)];
                re.push(z.re);
                im.push(z.im);
            }
        }
        ComplexTensor {
            re: Tensor::matrix(rows, cols, re).expect("shape"),
            im: Tensor::matrix(rows, cols, im).expect("shape"),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let s = self.shape();
        if s.len() != 2 {
            return Err(Error::dim(format!("to_matrix on shape {s:?}")));
        }
        let (rows, cols) = (s[0], s[1]);
        Ok(CMatrix::from_fn(rows, cols, |r, c| {
            C64::new(self.re.data()[r * cols + c], self.im.data()[r * cols + c])
        }))
    }
}

/// Complex value living on a [`Graph`] as a pair of real nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexVar {
    pub re: Var,
    pub im: Var,
}

impl ComplexVar {
    pub fn constant(graph: &mut Graph, value: &ComplexTensor) -> Self {
        ComplexVar {
            re: graph.constant(value.re.clone()),
            im: graph.constant(value.im.clone()),
        }
    }

    pub fn value(&self, graph: &Graph) -> ComplexTensor {
        ComplexTensor {
            re: graph.value(self.re).clone(),
            im: graph.value(self.im).clone(),
        }
    }
}

/// Complex matrix product `(Ar·Br − Ai·Bi) + j(Ar·Bi + Ai·Br)`.
pub fn cmatmul(graph: &mut Graph, a: ComplexVar, b: ComplexVar) -> Result<ComplexVar> {
    let rr = graph.matmul(a.re, b.re)?;
    let ii = graph.matmul(a.im, b.im)?;
    let ri = graph.matmul(a.re, b.im)?;
    let ir = graph.matmul(a.im, b.re)?;
    Ok(ComplexVar {
        re: graph.sub(rr, ii)?,
        im: graph.add(ri, ir)?,
    })
}

/// Elementwise complex product.
pub fn cmul(graph: &mut Graph, a: ComplexVar, b: ComplexVar) -> Result<ComplexVar> {
    let rr = graph.mul(a.re, b.re)?;
    let ii = graph.mul(a.im, b.im)?;
    let ri = graph.mul(a.re, b.im)?;
    let ir = graph.mul(a.im, b.re)?;
    Ok(ComplexVar {
        re: graph.sub(rr, ii)?,
        im: graph.add(ri, ir)?,
    })
}

pub fn cadd(graph: &mut Graph, a: ComplexVar, b: ComplexVar) -> Result<ComplexVar> {
    Ok(ComplexVar {
        re: graph.add(a.re, b.re)?,
        im: graph.add(a.im, b.im)?,
    })
}

/// Elementwise squared magnitude `re² + im²`.
pub fn abs2(graph: &mut Graph, a: ComplexVar) -> Result<Var> {
    let rr = graph.mul(a.re, a.re)?;
    let ii = graph.mul(a.im, a.im)?;
    graph.add(rr, ii)
}

/// `e^{jψ}` for every entry of `psi`.
pub fn unit_phasor(graph: &mut Graph, psi: Var) -> ComplexVar {
    ComplexVar {
        re: graph.cos(psi),
        im: graph.sin(psi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ct(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> ComplexTensor {
        ComplexTensor::new(
            Tensor::matrix(rows, cols, re.to_vec()).unwrap(),
            Tensor::matrix(rows, cols, im.to_vec()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn j_squared_is_minus_one() {
        let mut g = Graph::new();
        let j = ComplexVar::constant(&mut g, &ct(1, 1, &[0.0], &[1.0]));
        let p = cmatmul(&mut g, j, j).unwrap().value(&g);
        assert_eq!(p.re.data(), &[-1.0]);
        assert_eq!(p.im.data(), &[0.0]);
    }

    #[test]
    fn identity_is_neutral() {
        let mut g = Graph::new();
        let eye = ComplexVar::constant(&mut g, &ct(2, 2, &[1.0, 0.0, 0.0, 1.0], &[0.0; 4]));
        let b_val = ct(2, 3, &[1.0, -2.0, 0.5, 3.0, 4.0, -1.0], &[0.1, 0.2, 0.3, -0.4, 0.5, 0.6]);
        let b = ComplexVar::constant(&mut g, &b_val);
        let out = cmatmul(&mut g, eye, b).unwrap().value(&g);
        assert_eq!(out, b_val);
    }

    #[test]
    fn phasor_special_angles() {
        use std::f64::consts::{FRAC_PI_2, PI};
        let mut g = Graph::new();
        let psi = g.constant(Tensor::vector(vec![0.0, PI, FRAC_PI_2]));
        let z = unit_phasor(&mut g, psi).value(&g);
        assert_eq!((z.re.data()[0], z.im.data()[0]), (1.0, 0.0));
        assert!((z.re.data()[1] + 1.0).abs() < 1e-12 && z.im.data()[1].abs() < 1e-12);
        assert!(z.re.data()[2].abs() < 1e-12 && (z.im.data()[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_fn(2, 3, |r, c| C64::new(r as f64, c as f64 - 1.0));
        assert_eq!(ComplexTensor::from_matrix(&m).to_matrix().unwrap(), m);
    }
}
