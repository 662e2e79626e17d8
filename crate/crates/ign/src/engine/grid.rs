use crate::engine::element::Element;
use crate::error::{IgnError, Result};

/// Dense ND array of scalars. Carries both data batches
/// (batch, channels, height, width) and flat feature batches (batch, features);
/// parameters and per-channel statistics reuse the same container.
///
/// The shape of a value never changes after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Element> Grid<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Grid {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        }
    }

    pub fn filled(shape: &[usize], v: T) -> Self {
        let n = shape.iter().product();
        Grid {
            shape: shape.to_vec(),
            data: vec![v; n],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "grid shape {:?} does not match data length {}",
            shape,
            data.len()
        );
        Grid {
            shape: shape.to_vec(),
            data,
        }
    }

    /// 1-element grid holding a scalar.
    pub fn scalar(v: T) -> Self {
        Grid {
            shape: vec![1],
            data: vec![v],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Leading dimension, by convention the batch.
    pub fn batch(&self) -> usize {
        self.shape[0]
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn scalar_value(&self) -> T {
        assert!(self.is_scalar(), "grid of shape {:?} is not a scalar", self.shape);
        self.data[0]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.shape, other.shape, "zip_map shape mismatch");
        Grid {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// In-place self += other * c.
    pub fn add_scaled(&mut self, other: &Self, c: T) {
        assert_eq!(self.shape, other.shape, "add_scaled shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a = *a + b * c;
        }
    }

    pub fn scale_in_place(&mut self, c: T) {
        for a in self.data.iter_mut() {
            *a = *a * c;
        }
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|&v| {
                let x = v.to_f64();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(IgnError::NonFinite {
                context: context.to_string(),
            })
        }
    }

    /// View a batch slice [start, start+count) along the leading dimension.
    pub fn batch_slice(&self, start: usize, count: usize) -> Grid<T> {
        let stride: usize = self.shape[1..].iter().product();
        let mut shape = self.shape.clone();
        shape[0] = count;
        Grid {
            shape,
            data: self.data[start * stride..(start + count) * stride].to_vec(),
        }
    }

    /// Gather rows along the leading dimension.
    pub fn batch_select(&self, indices: &[usize]) -> Grid<T> {
        let stride: usize = self.shape[1..].iter().product();
        let mut shape = self.shape.clone();
        shape[0] = indices.len();
        let mut data = Vec::with_capacity(indices.len() * stride);
        for &i in indices {
            data.extend_from_slice(&self.data[i * stride..(i + 1) * stride]);
        }
        Grid { shape, data }
    }

    pub fn to_f64(&self) -> Grid<f64> {
        Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v.to_f64()).collect(),
        }
    }

    pub fn from_f64_grid(g: &Grid<f64>) -> Grid<T> {
        Grid {
            shape: g.shape.clone(),
            data: g.data.iter().map(|&v| T::from_f64(v)).collect(),
        }
    }
}

pub fn shape_string(shape: &[usize]) -> String {
    let parts: Vec<String> = shape.iter().map(|d| d.to_string()).collect();
    parts.join("x")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_data_round_trip() {
        let g = Grid::from_vec(&[2, 3], vec![1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(g.shape(), &[2, 3]);
        assert_eq!(g.batch(), 2);
        let s = g.batch_slice(1, 1);
        assert_eq!(s.shape(), &[1, 3]);
        assert_eq!(s.data(), &[4.0, 5.0, 6.0]);
    }

    #[test]
    fn finite_check_flags_nan() {
        let g = Grid::from_vec(&[2], vec![1.0f32, f32::NAN]);
        assert!(g.check_finite("test").is_err());
        let ok = Grid::from_vec(&[2], vec![1.0f32, 2.0]);
        assert!(ok.check_finite("test").is_ok());
    }

    #[test]
    fn batch_select_gathers_rows() {
        let g = Grid::from_vec(&[3, 2], vec![0.0f32, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let sel = g.batch_select(&[2, 0]);
        assert_eq!(sel.data(), &[4.0, 5.0, 0.0, 1.0]);
    }
}
