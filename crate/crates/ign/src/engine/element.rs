use num_traits::Float;

/// Storage dtype tag used by the checkpoint container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32 = 1,
    F64 = 2,
}

impl Dtype {
    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            1 => Some(Dtype::F32),
            2 => Some(Dtype::F64),
            _ => None,
        }
    }

    pub fn size_bytes(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// Scalar element the engine is generic over. Training runs in f32,
/// gradient checking in f64.
pub trait Element: Float + std::fmt::Debug + Send + Sync + 'static {
    const DTYPE: Dtype;

    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    /// C := alpha * A * B + beta * C with explicit row/column strides,
    /// matrixmultiply convention. A is m x k, B is k x n, C is m x n.
    #[allow(clippy::too_many_arguments)]
    fn gemm_strided(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Element for f32 {
    const DTYPE: Dtype = Dtype::F32;

    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    #[allow(clippy::too_many_arguments)]
    fn gemm_strided(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        unsafe {
            matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
        }
    }
}

impl Element for f64 {
    const DTYPE: Dtype = Dtype::F64;

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }

    #[allow(clippy::too_many_arguments)]
    fn gemm_strided(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        unsafe {
            matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
        }
    }
}

/// C := alpha * A * B + beta * C, all row-major. A: m x k, B: k x n, C: m x n.
pub fn gemm_nn<T: Element>(m: usize, k: usize, n: usize, alpha: T, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    T::gemm_strided(
        m,
        k,
        n,
        alpha,
        a.as_ptr(),
        k as isize,
        1,
        b.as_ptr(),
        n as isize,
        1,
        beta,
        c.as_mut_ptr(),
        n as isize,
        1,
    );
}

/// C := alpha * A * B^T + beta * C. A: m x k, B: n x k (row-major), C: m x n.
pub fn gemm_nt<T: Element>(m: usize, k: usize, n: usize, alpha: T, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), n * k);
    assert_eq!(c.len(), m * n);
    T::gemm_strided(
        m,
        k,
        n,
        alpha,
        a.as_ptr(),
        k as isize,
        1,
        b.as_ptr(),
        1,
        k as isize,
        beta,
        c.as_mut_ptr(),
        n as isize,
        1,
    );
}

/// C := alpha * A^T * B + beta * C. A: k x m (row-major), B: k x n, C: m x n.
pub fn gemm_tn<T: Element>(m: usize, k: usize, n: usize, alpha: T, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    assert_eq!(a.len(), k * m);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    T::gemm_strided(
        m,
        k,
        n,
        alpha,
        a.as_ptr(),
        1,
        m as isize,
        b.as_ptr(),
        n as isize,
        1,
        beta,
        c.as_mut_ptr(),
        n as isize,
        1,
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gemm_variants_agree_with_naive() {
        let a = vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let b = vec![7.0f64, 8.0, 9.0, 10.0, 11.0, 12.0]; // 3x2
        let mut c = vec![0.0f64; 4];
        gemm_nn(2, 3, 2, 1.0, &a, &b, 0.0, &mut c);
        assert_eq!(c, vec![58.0, 64.0, 139.0, 154.0]);

        // A * B^T with B stored as 2x3
        let bt = vec![7.0f64, 9.0, 11.0, 8.0, 10.0, 12.0]; // 2x3, transpose of b
        let mut c2 = vec![0.0f64; 4];
        gemm_nt(2, 3, 2, 1.0, &a, &bt, 0.0, &mut c2);
        assert_eq!(c2, c);

        // A^T * B with A stored as 3x2
        let at = vec![1.0f64, 4.0, 2.0, 5.0, 3.0, 6.0]; // 3x2, transpose of a
        let mut c3 = vec![0.0f64; 4];
        gemm_tn(2, 3, 2, 1.0, &at, &b, 0.0, &mut c3);
        assert_eq!(c3, c);
    }
}
