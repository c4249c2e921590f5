use crate::error::{Error, Result};
use crate::par;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values for a {rows}x{cols} tensor",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn fill(&mut self, x: f64) {
        self.data.iter_mut().for_each(|v| *v = x);
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `self · b`
    pub fn matmul(&self, b: &Tensor) -> Result<Tensor> {
        if self.cols != b.rows {
            return Err(Error::Shape(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut out = Tensor::zeros(self.rows, b.cols);
        par::for_each_row(&mut out.data, b.cols, |i, row| {
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &bv) in row.iter_mut().zip(b.row(k)) {
                    *o += a * bv;
                }
            }
        });
        Ok(out)
    }

    /// `selfᵀ · b`
    pub fn t_matmul(&self, b: &Tensor) -> Result<Tensor> {
        if self.rows != b.rows {
            return Err(Error::Shape(format!(
                "t_matmul {}x{}ᵀ by {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut out = Tensor::zeros(self.cols, b.cols);
        par::for_each_row(&mut out.data, b.cols, |i, row| {
            for k in 0..self.rows {
                let a = self.data[k * self.cols + i];
                if a == 0.0 {
                    continue;
                }
                for (o, &bv) in row.iter_mut().zip(b.row(k)) {
                    *o += a * bv;
                }
            }
        });
        Ok(out)
    }

    /// `self · bᵀ`
    pub fn matmul_t(&self, b: &Tensor) -> Result<Tensor> {
        if self.cols != b.cols {
            return Err(Error::Shape(format!(
                "matmul_t {}x{} by {}x{}ᵀ",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut out = Tensor::zeros(self.rows, b.rows);
        par::for_each_row(&mut out.data, b.rows, |i, row| {
            let a = self.row(i);
            for (j, o) in row.iter_mut().enumerate() {
                *o = a.iter().zip(b.row(j)).map(|(x, y)| x * y).sum();
            }
        });
        Ok(out)
    }

    /// Horizontal concatenation `[a | b]`.
    pub fn hconcat(a: &Tensor, b: &Tensor) -> Result<Tensor> {
        if a.rows != b.rows {
            return Err(Error::Shape(format!("hconcat of {} and {} rows", a.rows, b.rows)));
        }
        let cols = a.cols + b.cols;
        let mut out = Tensor::zeros(a.rows, cols);
        for i in 0..a.rows {
            out.row_mut(i)[..a.cols].copy_from_slice(a.row(i));
            out.row_mut(i)[a.cols..].copy_from_slice(b.row(i));
        }
        Ok(out)
    }

    /// Columns `start..start + width` as a new tensor.
    pub fn column_slice(&self, start: usize, width: usize) -> Tensor {
        let mut out = Tensor::zeros(self.rows, width);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[start..start + width]);
        }
        out
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.data.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    pub fn from_le_bytes(rows: usize, cols: usize, bytes: &[u8]) -> Result<Tensor> {
        if bytes.len() != rows * cols * 8 {
            return Err(Error::Shape(format!(
                "{} bytes for a {rows}x{cols} f64 tensor",
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Tensor { rows, cols, data })
    }
}

/// A trainable tensor with its gradient accumulator.
///
/// `row_sparse` marks lookup tables (node and heuristic embeddings) whose
/// untouched rows must not move during an optimizer step.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
    pub row_sparse: bool,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let grad = Tensor::zeros(value.rows, value.cols);
        Self {
            name: name.into(),
            value,
            grad,
            row_sparse: false,
        }
    }

    pub fn table(name: impl Into<String>, value: Tensor) -> Self {
        Self {
            row_sparse: true,
            ..Self::new(name, value)
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(rows: usize, cols: usize, data: &[f64]) -> Tensor {
        Tensor::from_vec(rows, cols, data.to_vec()).unwrap()
    }

    #[test]
    fn products_agree() {
        let a = t(2, 3, &[1., 2., 3., 4., 5., 6.]);
        let b = t(3, 2, &[7., 8., 9., 10., 11., 12.]);
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab.data, vec![58., 64., 139., 154.]);
        let at = t(3, 2, &[1., 4., 2., 5., 3., 6.]);
        assert_eq!(at.t_matmul(&b).unwrap(), ab);
        let bt = t(2, 3, &[7., 9., 11., 8., 10., 12.]);
        assert_eq!(a.matmul_t(&bt).unwrap(), ab);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn byte_round_trip() {
        let a = t(2, 2, &[1.5, -0.0, f64::MIN_POSITIVE, 1e300]);
        let back = Tensor::from_le_bytes(2, 2, &a.to_le_bytes()).unwrap();
        assert_eq!(
            a.data.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            back.data.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn concat_and_slice() {
        let a = t(2, 1, &[1., 2.]);
        let b = t(2, 2, &[3., 4., 5., 6.]);
        let c = Tensor::hconcat(&a, &b).unwrap();
        assert_eq!(c.data, vec![1., 3., 4., 2., 5., 6.]);
        assert_eq!(c.column_slice(1, 2), b);
    }
}
