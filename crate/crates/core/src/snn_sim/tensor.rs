use crate::error::{Error, Result};

/// Dense real tensor of shape `(t, n, d)`, row-major with `d` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    t: usize,
    n: usize,
    d: usize,
    data: Vec<f32>,
}

impl Tensor3 {
    pub fn zeros(t: usize, n: usize, d: usize) -> Self {
        Self {
            t,
            n,
            d,
            data: vec![0.0; t * n * d],
        }
    }

    pub fn from_vec(t: usize, n: usize, d: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != t * n * d {
            return Err(Error::ShapeMismatch {
                context: "tensor construction",
                expected: format!("{} values for ({t}, {n}, {d})", t * n * d),
                got: data.len().to_string(),
            });
        }
        Ok(Self { t, n, d, data })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.t, self.n, self.d)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    /// `n x d` slab of timestep `t`.
    pub fn step(&self, t: usize) -> &[f32] {
        let len = self.n * self.d;
        &self.data[t * len..(t + 1) * len]
    }

    pub fn step_mut(&mut self, t: usize) -> &mut [f32] {
        let len = self.n * self.d;
        &mut self.data[t * len..(t + 1) * len]
    }

    pub fn row(&self, t: usize, i: usize) -> &[f32] {
        let start = (t * self.n + i) * self.d;
        &self.data[start..start + self.d]
    }

    pub fn add_assign(&mut self, other: &Tensor3) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                context: "residual addition",
                expected: format!("{:?}", self.shape()),
                got: format!("{:?}", other.shape()),
            });
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f32) {
        for v in &mut self.data {
            *v *= factor;
        }
    }
}

/// Binary activation tensor of shape `(T, N, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTensor(Tensor3);

impl SpikeTensor {
    pub fn zeros(t: usize, n: usize, d: usize) -> Self {
        Self(Tensor3::zeros(t, n, d))
    }

    pub fn new(t: usize, n: usize, d: usize, data: Vec<f32>) -> Result<Self> {
        Self::try_from(Tensor3::from_vec(t, n, d, data)?)
    }

    /// Wraps values the caller has produced as spikes.
    pub(crate) fn from_binary_unchecked(inner: Tensor3) -> Self {
        debug_assert!(inner.data().iter().all(|&v| v == 0.0 || v == 1.0));
        Self(inner)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.0.shape()
    }

    pub fn data(&self) -> &[f32] {
        self.0.data()
    }

    pub fn as_real(&self) -> &Tensor3 {
        &self.0
    }

    pub fn into_real(self) -> Tensor3 {
        self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.data().iter().filter(|&&v| v != 0.0).count()
    }

    pub fn is_binary(&self) -> bool {
        self.0.data().iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

impl TryFrom<Tensor3> for SpikeTensor {
    type Error = Error;

    fn try_from(t: Tensor3) -> Result<Self> {
        if let Some((index, &value)) = t.data().iter().enumerate().find(|(_, &v)| v != 0.0 && v != 1.0) {
            return Err(Error::NonBinary { index, value });
        }
        Ok(Self(t))
    }
}

/// Input image sequence of shape `(T, C, H, W)`, channel-major per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSeq {
    pub t: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f32>,
}

impl ImageSeq {
    pub fn zeros(t: usize, c: usize, h: usize, w: usize) -> Self {
        Self {
            t,
            c,
            h,
            w,
            data: vec![0.0; t * c * h * w],
        }
    }

    pub fn new(t: usize, c: usize, h: usize, w: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != t * c * h * w {
            return Err(Error::ShapeMismatch {
                context: "image sequence",
                expected: format!("{} values for ({t}, {c}, {h}, {w})", t * c * h * w),
                got: data.len().to_string(),
            });
        }
        Ok(Self { t, c, h, w, data })
    }

    /// Same frame repeated `t` times, the usual static-image encoding.
    pub fn repeat_frame(t: usize, c: usize, h: usize, w: usize, frame: &[f32]) -> Result<Self> {
        let mut data = Vec::with_capacity(t * frame.len());
        for _ in 0..t {
            data.extend_from_slice(frame);
        }
        Self::new(t, c, h, w, data)
    }

    /// Re-lays each frame as `(H * W, C)` pixels-major.
    pub(crate) fn to_pixels(&self) -> Tensor3 {
        let hw = self.h * self.w;
        let mut out = Tensor3::zeros(self.t, hw, self.c);
        for t in 0..self.t {
            let frame = &self.data[t * self.c * hw..(t + 1) * self.c * hw];
            let dst = out.step_mut(t);
            for c in 0..self.c {
                for p in 0..hw {
                    dst[p * self.c + c] = frame[c * hw + p];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_binary_values_rejected() {
        assert!(SpikeTensor::new(1, 1, 3, vec![0.0, 1.0, 0.0]).is_ok());
        match SpikeTensor::new(1, 1, 3, vec![0.0, 0.5, 1.0]) {
            Err(Error::NonBinary { index: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(SpikeTensor::new(1, 1, 3, vec![0.0; 2]).is_err());
    }

    #[test]
    fn step_and_row_views() {
        let t = Tensor3::from_vec(2, 2, 2, (0..8).map(|v| v as f32).collect()).unwrap();
        assert_eq!(t.step(1), &[4.0, 5.0, 6.0, 7.0]);
        assert_eq!(t.row(1, 0), &[4.0, 5.0]);
    }
}
