use crate::error::{Error, Result};
use crate::genome::{ArchGenome, RunConfig, SPE_DOWNSAMPLE};

use super::lif::{lif_over_time, LifParams};
use super::tensor::{ImageSeq, SpikeTensor, Tensor3};
use super::weights::{BlockWeights, Conv3x3, Linear, SpeWeights};
use super::MacCounter;

/// Fixed scale on the attention product before its LIF layer.
pub const ATTENTION_SCALE: f32 = 0.125;

#[inline]
fn axpy(acc: &mut [f32], alpha: f32, x: &[f32]) {
    for (a, &b) in acc.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

fn mismatch(context: &'static str, expected: impl ToString, got: impl ToString) -> Error {
    Error::ShapeMismatch {
        context,
        expected: expected.to_string(),
        got: got.to_string(),
    }
}

/// `x @ W` over every `(t, n)` row; zero inputs are skipped. Returns the
/// output and the dense MAC count.
fn linear(x: &Tensor3, lin: &Linear) -> (Tensor3, u64) {
    let (t, n, d) = x.shape();
    debug_assert_eq!(d, lin.d_in);
    let mut out = Tensor3::zeros(t, n, lin.d_out);
    let rows = t * n;
    let (src, dst) = (x.data(), out.data_mut());
    for r in 0..rows {
        let xr = &src[r * d..(r + 1) * d];
        let or = &mut dst[r * lin.d_out..(r + 1) * lin.d_out];
        for (i, &v) in xr.iter().enumerate() {
            if v != 0.0 {
                axpy(or, v, lin.row(i));
            }
        }
    }
    (out, (rows * lin.d_in * lin.d_out) as u64)
}

/// Same-padded 3x3 convolution over `(T, h*w, c_in)` maps laid out
/// pixel-major. Returns the output and the dense MAC count.
fn conv3x3(x: &Tensor3, h: usize, w: usize, conv: &Conv3x3) -> (Tensor3, u64) {
    let (t, hw, c_in) = x.shape();
    debug_assert_eq!((hw, c_in), (h * w, conv.c_in));
    let c_out = conv.c_out;
    let mut out = Tensor3::zeros(t, hw, c_out);
    for step in 0..t {
        let src = x.step(step);
        let dst = out.step_mut(step);
        for y in 0..h {
            for xx in 0..w {
                let pix = &src[(y * w + xx) * c_in..(y * w + xx + 1) * c_in];
                for (c, &v) in pix.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    // Input (y, x) feeds output (y + 1 - ky, x + 1 - kx).
                    for ky in 0..3 {
                        let Some(oy) = (y + 1).checked_sub(ky).filter(|&oy| oy < h) else {
                            continue;
                        };
                        for kx in 0..3 {
                            let Some(ox) = (xx + 1).checked_sub(kx).filter(|&ox| ox < w) else {
                                continue;
                            };
                            let o = (oy * w + ox) * c_out;
                            axpy(&mut dst[o..o + c_out], v, conv.tap(ky, kx, c));
                        }
                    }
                }
            }
        }
    }
    (out, (t * hw * 9 * c_in * c_out) as u64)
}

/// 2x2 stride-2 max pooling of spike maps.
fn max_pool2(x: &SpikeTensor, h: usize, w: usize) -> SpikeTensor {
    let (t, _, c) = x.shape();
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor3::zeros(t, oh * ow, c);
    for step in 0..t {
        let src = x.as_real().step(step);
        let dst = out.step_mut(step);
        for oy in 0..oh {
            for ox in 0..ow {
                let o = &mut dst[(oy * ow + ox) * c..(oy * ow + ox + 1) * c];
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let p = ((2 * oy + dy) * w + 2 * ox + dx) * c;
                    for (a, &b) in o.iter_mut().zip(&src[p..p + c]) {
                        *a = a.max(b);
                    }
                }
            }
        }
    }
    SpikeTensor::from_binary_unchecked(out)
}

/// Spiking patch embedding: four conv+LIF stages with two 2x poolings, then
/// a relative-position convolution whose output is added to its input and
/// passed through a final LIF layer. Output shape `(T, (H/4)(W/4), d)`.
pub fn spe_forward(
    images: &ImageSeq,
    g: &ArchGenome,
    cfg: &RunConfig,
    weights: &SpeWeights,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<SpikeTensor> {
    spe_stage(images, g, cfg, weights, lif, ctr).map(|(_, s)| s)
}

/// Pre-activation and spike output of a layer.
pub(crate) type Staged = (Tensor3, SpikeTensor);

fn fire(pre: Tensor3, lif: &LifParams) -> Result<Staged> {
    let s = lif_over_time(&pre, lif)?;
    Ok((pre, s))
}

pub(crate) fn spe_stage(
    images: &ImageSeq,
    g: &ArchGenome,
    cfg: &RunConfig,
    weights: &SpeWeights,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<Staged> {
    let (h, w) = (cfg.image_size.0 as usize, cfg.image_size.1 as usize);
    let expected = (cfg.timesteps as usize, cfg.in_channels as usize, h, w);
    let got = (images.t, images.c, images.h, images.w);
    if got != expected {
        return Err(mismatch(
            "patch-embedding input",
            format!("{expected:?}"),
            format!("{got:?}"),
        ));
    }
    let ds = SPE_DOWNSAMPLE as usize;
    if h % ds != 0 || w % ds != 0 {
        return Err(mismatch(
            "patch-embedding input",
            "H and W divisible by 4",
            format!("{h}x{w}"),
        ));
    }
    let d = g.embed_dim as usize;
    if !d.is_multiple_of(8) {
        return Err(mismatch("patch-embedding width", "embed_dim divisible by 8", d));
    }
    weights.check(images.c, d)?;

    let mut stage = |x: &Tensor3, hh: usize, ww: usize, conv: &Conv3x3| -> Result<SpikeTensor> {
        let (pre, macs) = conv3x3(x, hh, ww, conv);
        ctr.add_spe(macs);
        lif_over_time(&pre, lif)
    };

    let x = images.to_pixels();
    let s = stage(&x, h, w, &weights.convs[0])?;
    let s = stage(s.as_real(), h, w, &weights.convs[1])?;
    let s = stage(s.as_real(), h, w, &weights.convs[2])?;
    let s = max_pool2(&s, h, w);
    let s = stage(s.as_real(), h / 2, w / 2, &weights.convs[3])?;
    let feat = max_pool2(&s, h / 2, w / 2);

    let (mut pre, macs) = conv3x3(feat.as_real(), h / 4, w / 4, &weights.rpe);
    ctr.add_spe(macs);
    pre.add_assign(feat.as_real())?;
    fire(pre, lif)
}

fn check_tokens(x: &SpikeTensor, g: &ArchGenome, context: &'static str) -> Result<()> {
    let (_, _, d) = x.shape();
    if d != g.embed_dim as usize {
        return Err(mismatch(context, format!("{} channels", g.embed_dim), d));
    }
    if !x.is_binary() {
        let (index, &value) = x
            .data()
            .iter()
            .enumerate()
            .find(|(_, &v)| v != 0.0 && v != 1.0)
            .expect("non-binary element exists");
        return Err(Error::NonBinary { index, value });
    }
    Ok(())
}

/// Spiking self-attention.
///
/// Q, K and V are linear maps of the input spikes followed by LIF. Per head,
/// `(Q K^T) V` is computed without softmax, scaled by [`ATTENTION_SCALE`],
/// passed through LIF, projected, and passed through LIF again. The
/// residual is added by the caller.
pub fn ssa_forward(
    x: &SpikeTensor,
    g: &ArchGenome,
    w: &BlockWeights,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<SpikeTensor> {
    ssa_stage(x, g, w, lif, ctr).map(|(_, s)| s)
}

pub(crate) fn ssa_stage(
    x: &SpikeTensor,
    g: &ArchGenome,
    w: &BlockWeights,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<Staged> {
    check_tokens(x, g, "self-attention input")?;
    let (t, n, d) = x.shape();
    w.check_attention(d)?;
    let heads = g.num_heads as usize;
    if heads == 0 || d % heads != 0 {
        return Err(mismatch("attention heads", format!("divisor of {d}"), heads));
    }
    let dh = d / heads;

    let mut project = |lin: &Linear| -> Result<SpikeTensor> {
        let (pre, macs) = linear(x.as_real(), lin);
        ctr.add_sa(macs);
        lif_over_time(&pre, lif)
    };
    let q = project(&w.q)?;
    let k = project(&w.k)?;
    let v = project(&w.v)?;

    let mut attn = Tensor3::zeros(t, n, d);
    let mut scores = vec![0.0f32; n * n];
    let mut k_cols = vec![0.0f32; dh * n];
    for step in 0..t {
        let (qs, ks, vs) = (q.as_real().step(step), k.as_real().step(step), v.as_real().step(step));
        let out = attn.step_mut(step);
        for head in 0..heads {
            let off = head * dh;
            for j in 0..n {
                for c in 0..dh {
                    k_cols[c * n + j] = ks[j * d + off + c];
                }
            }
            scores.fill(0.0);
            for i in 0..n {
                let row = &mut scores[i * n..(i + 1) * n];
                for c in 0..dh {
                    if qs[i * d + off + c] != 0.0 {
                        axpy(row, 1.0, &k_cols[c * n..(c + 1) * n]);
                    }
                }
            }
            for i in 0..n {
                let o = &mut out[i * d + off..i * d + off + dh];
                for j in 0..n {
                    let s = scores[i * n + j];
                    if s != 0.0 {
                        axpy(o, s, &vs[j * d + off..j * d + off + dh]);
                    }
                }
            }
            ctr.add_sa(2 * (n * n * dh) as u64);
        }
    }
    attn.scale(ATTENTION_SCALE);
    let a = lif_over_time(&attn, lif)?;

    let (pre, macs) = linear(a.as_real(), &w.proj);
    ctr.add_sa(macs);
    fire(pre, lif)
}

/// Spiking MLP: `d -> d * ratio -> d`, each linear followed by LIF.
pub fn smlp_forward(
    x: &SpikeTensor,
    g: &ArchGenome,
    w: &BlockWeights,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<SpikeTensor> {
    smlp_stage(x, g, w, lif, ctr).map(|(_, s)| s)
}

pub(crate) fn smlp_stage(
    x: &SpikeTensor,
    g: &ArchGenome,
    w: &BlockWeights,
    lif: &LifParams,
    ctr: &mut MacCounter,
) -> Result<Staged> {
    check_tokens(x, g, "MLP input")?;
    let d = g.embed_dim as usize;
    w.check_mlp(d, g.hidden_dim() as usize)?;
    let (pre, macs) = linear(x.as_real(), &w.fc1);
    ctr.add_mlp(macs);
    let hidden = lif_over_time(&pre, lif)?;
    let (pre, macs) = linear(hidden.as_real(), &w.fc2);
    ctr.add_mlp(macs);
    fire(pre, lif)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost_model::{flops_mlp, flops_sa};
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn random_spikes(t: usize, n: usize, d: usize, rate: f64, seed: u64) -> SpikeTensor {
        let mut rng = seeded_rng(seed);
        let data = (0..t * n * d)
            .map(|_| if rng.random_bool(rate) { 1.0 } else { 0.0 })
            .collect();
        SpikeTensor::new(t, n, d, data).unwrap()
    }

    fn dense_linear_oracle(x: &Tensor3, lin: &Linear) -> Vec<f32> {
        let (t, n, d) = x.shape();
        let mut out = vec![0.0; t * n * lin.d_out];
        for r in 0..t * n {
            for o in 0..lin.d_out {
                let mut acc = 0.0;
                for i in 0..d {
                    acc += x.data()[r * d + i] * lin.w[i * lin.d_out + o];
                }
                out[r * lin.d_out + o] = acc;
            }
        }
        out
    }

    #[test]
    fn sparse_linear_matches_dense() {
        let x = random_spikes(2, 5, 16, 0.3, 1);
        let lin = Linear::random(16, 8, &mut seeded_rng(2));
        let (y, macs) = linear(x.as_real(), &lin);
        assert_eq!(macs, 2 * 5 * 16 * 8);
        for (a, b) in y.data().iter().zip(dense_linear_oracle(x.as_real(), &lin)) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn conv_matches_direct_definition() {
        let (h, w, c_in, c_out) = (4, 5, 3, 2);
        let mut rng = seeded_rng(3);
        let x = Tensor3::from_vec(1, h * w, c_in, (0..h * w * c_in).map(|_| rng.random::<f32>()).collect()).unwrap();
        let conv = Conv3x3::random(c_in, c_out, &mut rng);
        let (y, macs) = conv3x3(&x, h, w, &conv);
        assert_eq!(macs, (h * w * 9 * c_in * c_out) as u64);
        for oy in 0..h {
            for ox in 0..w {
                for o in 0..c_out {
                    let mut acc = 0.0f32;
                    for ky in 0..3 {
                        for kx in 0..3 {
                            let (iy, ix) = (oy as isize + ky as isize - 1, ox as isize + kx as isize - 1);
                            if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                continue;
                            }
                            for c in 0..c_in {
                                acc += x.row(0, iy as usize * w + ix as usize)[c] * conv.tap(ky, kx, c)[o];
                            }
                        }
                    }
                    assert!((acc - y.row(0, oy * w + ox)[o]).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn ssa_shape_binarity_and_count() {
        let g = ArchGenome::new(256, 4, 4, 1);
        let w = BlockWeights::random(256, 1024, &mut seeded_rng(4));
        let x = random_spikes(4, 64, 256, 0.5, 5);
        let mut ctr = MacCounter::new();
        let y = ssa_forward(&x, &g, &w, &LifParams::default(), &mut ctr).unwrap();
        assert_eq!(y.shape(), (4, 64, 256));
        assert!(y.is_binary());
        assert_eq!(ctr.sa_macs, 4 * 2 * flops_sa(1, 64, 256).unwrap());

        let x1 = random_spikes(1, 64, 256, 0.5, 6);
        let mut ctr = MacCounter::new();
        ssa_forward(&x1, &g, &w, &LifParams::default(), &mut ctr).unwrap();
        assert_eq!(ctr.sa_macs, 4 * 64 * 256 * 256 + 2 * 64 * 64 * 256);
        assert_eq!(ctr.sa_macs, 18_874_368);
        assert_eq!(ctr.sa_macs, 2 * flops_sa(1, 64, 256).unwrap());
    }

    #[test]
    fn attention_product_matches_dense_oracle() {
        // Diagonal weights of 4 make every projection copy its input spikes
        // on a single timestep (H = 4 / tau = 2 >= V_th).
        let g = ArchGenome::new(8, 1, 2, 1);
        let mut w = BlockWeights::zeros(8, 8);
        for lin in [&mut w.q, &mut w.k, &mut w.v, &mut w.proj] {
            for i in 0..8 {
                lin.w[i * 8 + i] = 4.0;
            }
        }
        let x = random_spikes(1, 6, 8, 0.5, 9);
        let mut ctr = MacCounter::new();
        let y = ssa_forward(&x, &g, &w, &LifParams::default(), &mut ctr).unwrap();
        // Q = K = V = x, so per head A = (x_h x_h^T) x_h / 8, and the LIF
        // fires where A / tau >= 1.
        let xs = x.as_real();
        let mut expected = [0.0f32; 6 * 8];
        for head in 0..2 {
            for i in 0..6 {
                for c in 0..4 {
                    let mut acc = 0.0;
                    for j in 0..6 {
                        let s: f32 = (0..4)
                            .map(|e| xs.row(0, i)[head * 4 + e] * xs.row(0, j)[head * 4 + e])
                            .sum();
                        acc += s * xs.row(0, j)[head * 4 + c];
                    }
                    let a = if acc * ATTENTION_SCALE / 2.0 >= 1.0 { 1.0 } else { 0.0 };
                    expected[i * 8 + head * 4 + c] = a;
                }
            }
        }
        assert_eq!(y.data(), &expected[..]);
    }

    #[test]
    fn smlp_count_and_shape() {
        let g = ArchGenome::new(192, 4, 4, 1);
        let w = BlockWeights::random(192, 768, &mut seeded_rng(7));
        let x = random_spikes(1, 64, 192, 0.4, 8);
        let mut ctr = MacCounter::new();
        let y = smlp_forward(&x, &g, &w, &LifParams::default(), &mut ctr).unwrap();
        assert_eq!(y.shape(), x.shape());
        assert!(y.is_binary());
        assert_eq!(ctr.mlp_macs, 18_874_368);
        assert_eq!(ctr.mlp_macs, flops_mlp(1, 64, 192, 768).unwrap());
        assert_eq!(ctr.sa_macs, 0);
    }

    #[test]
    fn zero_input_stays_silent() {
        let g = ArchGenome::new(64, 2, 4, 1);
        let w = BlockWeights::random(64, 128, &mut seeded_rng(1));
        let x = SpikeTensor::zeros(3, 16, 64);
        let lif = LifParams::default();
        let mut ctr = MacCounter::new();
        assert_eq!(ssa_forward(&x, &g, &w, &lif, &mut ctr).unwrap().count_ones(), 0);
        assert_eq!(smlp_forward(&x, &g, &w, &lif, &mut ctr).unwrap().count_ones(), 0);
    }

    #[test]
    fn spe_shape_and_silence() {
        let g = ArchGenome::new(192, 4, 4, 1);
        let cfg = RunConfig::default();
        let lif = LifParams::default();
        let images = ImageSeq::zeros(4, 3, 32, 32);
        let mut ctr = MacCounter::new();
        let out = spe_forward(&images, &g, &cfg, &SpeWeights::zeros(3, 192), &lif, &mut ctr).unwrap();
        assert_eq!(out.shape(), (4, 64, 192));
        assert_eq!(out.count_ones(), 0);
        assert_eq!(
            ctr.spe_macs,
            4 * crate::cost_model::spe_macs_per_timestep(&g, &cfg).unwrap()
        );
    }

    #[test]
    fn spe_is_deterministic_and_binary() {
        let g = ArchGenome::new(64, 2, 4, 1);
        let cfg = RunConfig::default();
        let lif = LifParams::default();
        let mut rng = seeded_rng(12);
        let frame: Vec<f32> = (0..3 * 32 * 32).map(|_| rng.random_range(0.0..8.0)).collect();
        let images = ImageSeq::repeat_frame(4, 3, 32, 32, &frame).unwrap();
        let w = SpeWeights::random(3, 64, &mut seeded_rng(13));
        let run = || spe_forward(&images, &g, &cfg, &w, &lif, &mut MacCounter::new()).unwrap();
        let a = run();
        assert!(a.is_binary());
        assert!(a.count_ones() > 0);
        assert_eq!(a, run());
    }

    #[test]
    fn shape_errors() {
        let g = ArchGenome::new(64, 2, 4, 1);
        let cfg = RunConfig::default();
        let lif = LifParams::default();
        let mut ctr = MacCounter::new();
        let bad = ImageSeq::zeros(4, 3, 28, 32);
        assert!(spe_forward(&bad, &g, &cfg, &SpeWeights::zeros(3, 64), &lif, &mut ctr).is_err());
        let good = ImageSeq::zeros(4, 3, 32, 32);
        assert!(spe_forward(&good, &g, &cfg, &SpeWeights::zeros(3, 128), &lif, &mut ctr).is_err());
        let x = SpikeTensor::zeros(1, 4, 32);
        assert!(ssa_forward(&x, &g, &BlockWeights::zeros(64, 128), &lif, &mut ctr).is_err());
    }
}
