use crate::error::{Error, Result};

use super::tensor::{SpikeTensor, Tensor3};

/// Leaky integrate-and-fire parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams {
    pub tau: f32,
    pub v_th: f32,
    pub v_reset: f32,
}

impl Default for LifParams {
    fn default() -> Self {
        Self {
            tau: 2.0,
            v_th: 1.0,
            v_reset: 0.0,
        }
    }
}

impl LifParams {
    pub fn new(tau: f32, v_th: f32, v_reset: f32) -> Result<Self> {
        if tau <= 0.0 || !tau.is_finite() {
            return Err(Error::InvalidConfig(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { tau, v_th, v_reset })
    }
}

/// Unit step with `heaviside(0) == 1`.
pub fn heaviside(v: f32) -> Result<u8> {
    if v.is_nan() {
        return Err(Error::NotANumber("heaviside"));
    }
    Ok(u8::from(v >= 0.0))
}

/// Membrane potentials of a population of LIF neurons.
#[derive(Debug, Clone, PartialEq)]
pub struct LifState {
    pub v: Vec<f32>,
}

impl LifState {
    pub fn new(v: Vec<f32>) -> Self {
        Self { v }
    }

    pub fn resting(len: usize, p: &LifParams) -> Self {
        Self {
            v: vec![p.v_reset; len],
        }
    }

    /// Advances one timestep in place, writing 0/1 spikes into `spikes`.
    ///
    /// `H = V + (X - (V - V_reset)) / tau`, `S = step(H - V_th)`,
    /// `V' = H (1 - S) + V_reset S`.
    pub(crate) fn advance(&mut self, input: &[f32], spikes: &mut [f32], p: &LifParams) -> Result<()> {
        if input.len() != self.v.len() || spikes.len() != self.v.len() {
            return Err(Error::ShapeMismatch {
                context: "LIF step",
                expected: self.v.len().to_string(),
                got: format!("input {}, output {}", input.len(), spikes.len()),
            });
        }
        for ((v, &x), s) in self.v.iter_mut().zip(input).zip(spikes.iter_mut()) {
            let h = *v + (x - (*v - p.v_reset)) / p.tau;
            if heaviside(h - p.v_th)? == 1 {
                *s = 1.0;
                *v = p.v_reset;
            } else {
                *s = 0.0;
                *v = h;
            }
        }
        Ok(())
    }
}

/// One LIF update; returns the spike vector and the new state.
pub fn lif_step(state: &LifState, input: &[f32], p: &LifParams) -> Result<(Vec<u8>, LifState)> {
    let mut next = state.clone();
    let mut spikes = vec![0.0; input.len()];
    next.advance(input, &mut spikes, p)?;
    Ok((spikes.into_iter().map(|s| s as u8).collect(), next))
}

/// Runs one neuron per `(n, d)` site over the time axis of `pre`, starting
/// from rest.
pub fn lif_over_time(pre: &Tensor3, p: &LifParams) -> Result<SpikeTensor> {
    let (t, n, d) = pre.shape();
    let mut state = LifState::resting(n * d, p);
    let mut out = Tensor3::zeros(t, n, d);
    for step in 0..t {
        state.advance(pre.step(step), out.step_mut(step), p)?;
    }
    Ok(SpikeTensor::from_binary_unchecked(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> LifParams {
        LifParams::new(2.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn heaviside_examples() {
        assert_eq!(heaviside(0.0).unwrap(), 1);
        assert_eq!(heaviside(-0.001).unwrap(), 0);
        assert_eq!(heaviside(5.0).unwrap(), 1);
        assert!(heaviside(f32::NAN).is_err());
    }

    #[test]
    fn lif_step_examples() {
        let (s, v) = lif_step(&LifState::new(vec![0.0]), &[0.0], &p()).unwrap();
        assert_eq!((s[0], v.v[0]), (0, 0.0));

        let (s, v) = lif_step(&LifState::new(vec![0.0]), &[1.0], &p()).unwrap();
        assert_eq!((s[0], v.v[0]), (0, 0.5));

        // H = 0.9 + (2 - 0.9) / 2 = 1.45
        let (s, v) = lif_step(&LifState::new(vec![0.9]), &[2.0], &p()).unwrap();
        assert_eq!((s[0], v.v[0]), (1, 0.0));
    }

    #[test]
    fn threshold_crossing_exactly_fires() {
        // H = 0 + (2 - 0) / 2 = 1 = V_th
        let (s, v) = lif_step(&LifState::new(vec![0.0]), &[2.0], &p()).unwrap();
        assert_eq!((s[0], v.v[0]), (1, 0.0));
    }

    #[test]
    fn errors() {
        assert!(lif_step(&LifState::new(vec![0.0; 2]), &[0.0], &p()).is_err());
        assert!(lif_step(&LifState::new(vec![0.0]), &[f32::NAN], &p()).is_err());
        assert!(LifParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn constant_drive_fires_periodically() {
        let pre = Tensor3::from_vec(6, 1, 1, vec![1.5; 6]).unwrap();
        // V: 0.75, 1.125 -> spike, 0.75, 1.125 -> spike, ...
        let s = lif_over_time(&pre, &p()).unwrap();
        assert_eq!(s.data(), &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }
}
