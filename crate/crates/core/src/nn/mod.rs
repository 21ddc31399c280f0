//! Small fully-connected policy/value network with hand-written gradients.
//!
//! The trunk has two tanh layers; a linear policy head produces one logit
//! per action and a linear value head a scalar. The network is generic over
//! the float type so gradients can be checked in double precision; training
//! and checkpoints use `f32`.

mod adam;
mod checkpoint;

pub use adam::Adam;
pub use checkpoint::{CheckpointError, PolicyCheckpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use num_traits::Float;
use rand::Rng;

pub const HIDDEN: usize = 64;
/// Replacement logit for illegal actions.
pub const MASKED_LOGIT: f64 = -1e9;
/// Probabilities below this are set to zero before renormalizing.
pub const PROB_FLOOR: f64 = 1e-12;

/// Dense layer `y = W x + b` with `W` stored row-major (`rows` outputs,
/// `cols` inputs).
#[derive(Clone, Debug, PartialEq)]
pub struct Linear<T> {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Float> Linear<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            w: vec![T::zero(); rows * cols],
            b: vec![T::zero(); rows],
        }
    }

    fn forward(&self, x: &[T], out: &mut [T]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.b[r].to_f64().unwrap();
            for (w, v) in row.iter().zip(x) {
                acc += w.to_f64().unwrap() * v.to_f64().unwrap();
            }
            *o = T::from(acc).unwrap();
        }
    }

    /// Accumulates parameter gradients for output gradient `dy` at input
    /// `x`, and adds the input gradient into `dx` when given.
    fn backward(&self, x: &[T], dy: &[T], grad: &mut Linear<T>, dx: Option<&mut [T]>) {
        for (r, &g) in dy.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            grad.b[r] = grad.b[r] + g;
            let row = &mut grad.w[r * self.cols..(r + 1) * self.cols];
            for (w, &v) in row.iter_mut().zip(x) {
                *w = *w + g * v;
            }
        }
        if let Some(dx) = dx {
            for (c, d) in dx.iter_mut().enumerate() {
                let mut acc = 0.0f64;
                for (r, &g) in dy.iter().enumerate() {
                    acc += (self.w[r * self.cols + c] * g).to_f64().unwrap();
                }
                *d = *d + T::from(acc).unwrap();
            }
        }
    }

    fn cast<U: Float>(&self) -> Linear<U> {
        let c = |v: &T| U::from(*v).unwrap();
        Linear {
            rows: self.rows,
            cols: self.cols,
            w: self.w.iter().map(c).collect(),
            b: self.b.iter().map(c).collect(),
        }
    }
}

/// Shared trunk plus policy and value heads.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp<T> {
    /// Layers in file order: trunk 1, trunk 2, policy head, value head.
    pub layers: Vec<Linear<T>>,
}

/// Intermediate values of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Activations<T> {
    pub h1: Vec<T>,
    pub h2: Vec<T>,
    pub logits: Vec<T>,
    pub value: T,
}

/// Masked policy output.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyOutput<T> {
    pub probs: Vec<T>,
    pub value: T,
}

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Matrix with orthonormal rows or columns (whichever is fewer), scaled by
/// `gain`.
fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (k, len) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(k);
    while vs.len() < k {
        let mut v: Vec<f64> = (0..len).map(|_| standard_normal(rng)).collect();
        for u in &vs {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            vs.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    let mut w = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            w[r * cols + c] = gain * if rows <= cols { vs[r][c] } else { vs[c][r] };
        }
    }
    w
}

impl<T: Float> Mlp<T> {
    /// Orthogonal initialization: gain sqrt(2) for the trunk, 0.01 for the
    /// policy head and 1 for the value head; zero biases.
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, action_dim: usize, hidden: usize, rng: &mut R) -> Self {
        let shapes = [
            (hidden, obs_dim, std::f64::consts::SQRT_2),
            (hidden, hidden, std::f64::consts::SQRT_2),
            (action_dim, hidden, 0.01),
            (1, hidden, 1.0),
        ];
        let layers = shapes
            .iter()
            .map(|&(r, c, gain)| {
                let mut l = Linear::zeros(r, c);
                l.w = orthogonal(r, c, gain, rng)
                    .into_iter()
                    .map(|v| T::from(v).unwrap())
                    .collect();
                l
            })
            .collect();
        Self { layers }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self
                .layers
                .iter()
                .map(|l| Linear::zeros(l.rows, l.cols))
                .collect(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn action_dim(&self) -> usize {
        self.layers[2].rows
    }

    pub fn hidden(&self) -> usize {
        self.layers[0].rows
    }

    /// Checks that the four layers chain together.
    pub fn is_consistent(&self) -> bool {
        let l = &self.layers;
        l.len() == 4
            && l[1].cols == l[0].rows
            && l[2].cols == l[1].rows
            && l[3].cols == l[1].rows
            && l[3].rows == 1
            && l.iter().all(|x| x.w.len() == x.rows * x.cols && x.b.len() == x.rows)
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn flat(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            v.extend_from_slice(&l.w);
            v.extend_from_slice(&l.b);
        }
        v
    }

    pub fn set_flat(&mut self, values: &[T]) {
        assert_eq!(values.len(), self.num_params());
        let mut i = 0;
        for l in &mut self.layers {
            for p in l.w.iter_mut().chain(l.b.iter_mut()) {
                *p = values[i];
                i += 1;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|v| v.is_finite()))
    }

    pub fn cast<U: Float>(&self) -> Mlp<U> {
        Mlp {
            layers: self.layers.iter().map(|l| l.cast()).collect(),
        }
    }

    pub fn activations(&self, obs: &[T]) -> Activations<T> {
        assert_eq!(obs.len(), self.obs_dim(), "observation length");
        let h = self.hidden();
        let mut h1 = vec![T::zero(); h];
        self.layers[0].forward(obs, &mut h1);
        h1.iter_mut().for_each(|v| *v = v.tanh());
        let mut h2 = vec![T::zero(); h];
        self.layers[1].forward(&h1, &mut h2);
        h2.iter_mut().for_each(|v| *v = v.tanh());
        let mut logits = vec![T::zero(); self.action_dim()];
        self.layers[2].forward(&h2, &mut logits);
        let mut value = [T::zero()];
        self.layers[3].forward(&h2, &mut value);
        Activations {
            h1,
            h2,
            logits,
            value: value[0],
        }
    }

    pub fn forward(&self, obs: &[T], mask: &[bool]) -> PolicyOutput<T> {
        let act = self.activations(obs);
        PolicyOutput {
            probs: masked_softmax(&act.logits, mask),
            value: act.value,
        }
    }

    /// Accumulates into `grad` the parameter gradient for the given logit
    /// and value gradients at the recorded activations.
    pub fn backward(&self, obs: &[T], act: &Activations<T>, dlogits: &[T], dvalue: T, grad: &mut Mlp<T>) {
        let h = self.hidden();
        let one = T::one();
        let mut dh2 = vec![T::zero(); h];
        self.layers[2].backward(&act.h2, dlogits, &mut grad.layers[2], Some(&mut dh2));
        self.layers[3].backward(&act.h2, &[dvalue], &mut grad.layers[3], Some(&mut dh2));
        let dz2: Vec<T> = dh2.iter().zip(&act.h2).map(|(&d, &y)| d * (one - y * y)).collect();
        let mut dh1 = vec![T::zero(); h];
        self.layers[1].backward(&act.h1, &dz2, &mut grad.layers[1], Some(&mut dh1));
        let dz1: Vec<T> = dh1.iter().zip(&act.h1).map(|(&d, &y)| d * (one - y * y)).collect();
        self.layers[0].backward(obs, &dz1, &mut grad.layers[0], None);
    }
}

/// Softmax over legal entries; illegal logits are replaced by
/// [`MASKED_LOGIT`] and tiny probabilities are truncated so illegal mass is
/// exactly zero.
pub fn masked_softmax<T: Float>(logits: &[T], mask: &[bool]) -> Vec<T> {
    assert_eq!(logits.len(), mask.len(), "mask length");
    let masked: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(l, &m)| if m { l.to_f64().unwrap() } else { MASKED_LOGIT })
        .collect();
    let max = masked.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = masked.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    p.iter_mut().for_each(|v| {
        if *v < PROB_FLOOR {
            *v = 0.0
        }
    });
    let sum: f64 = p.iter().sum();
    p.into_iter().map(|v| T::from(v / sum).unwrap()).collect()
}

/// Entropy of a distribution, ignoring zero entries.
pub fn entropy<T: Float>(probs: &[T]) -> f64 {
    -probs
        .iter()
        .map(|p| p.to_f64().unwrap())
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Inverse-CDF draw from `probs`; never returns a zero-probability entry.
pub fn sample<T: Float, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = None;
    for (i, p) in probs.iter().enumerate() {
        let p = p.to_f64().unwrap();
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(i);
        if u < acc {
            return i;
        }
    }
    last.expect("distribution has positive mass")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn masked_softmax_cases() {
        let p = masked_softmax(&[0.0f32; 4], &[true, false, true, false]);
        assert_eq!(p, vec![0.5, 0.0, 0.5, 0.0]);
        let p = masked_softmax(&[3.0f32, -2.0, 9.0], &[false, true, false]);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
        let p = masked_softmax(&[0.0f64, 0.0], &[true, true]);
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let w = orthogonal(4, 9, 1.0, &mut rng);
        for i in 0..4 {
            for j in 0..4 {
                let d: f64 = (0..9).map(|c| w[i * 9 + c] * w[j * 9 + c]).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampling_never_picks_masked_actions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net: Mlp<f32> = Mlp::new(6, 5, 8, &mut rng);
        let mask = [true, false, false, true, false];
        let obs = [0.5f32, -1.0, 3.0, 0.0, 1.0, 2.0];
        let out = net.forward(&obs, &mask);
        for _ in 0..100_000 {
            let a = sample(&out.probs, &mut rng);
            assert!(mask[a]);
        }
    }

    #[test]
    fn large_inputs_stay_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net: Mlp<f32> = Mlp::new(3, 4, 16, &mut rng);
        let out = net.forward(&[1e3, -1e3, 1e3], &[true; 4]);
        assert!(out.value.is_finite() && out.probs.iter().all(|p| p.is_finite()));
        let mut g = net.zeros_like();
        let act = net.activations(&[1e3, -1e3, 1e3]);
        net.backward(&[1e3, -1e3, 1e3], &act, &[1.0, -1.0, 0.5, 0.0], 2.0, &mut g);
        assert!(g.is_finite());
    }

    #[test]
    fn flat_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net: Mlp<f32> = Mlp::new(3, 4, 5, &mut rng);
        let mut other = net.zeros_like();
        other.set_flat(&net.flat());
        assert_eq!(other, net);
        assert_eq!(net.num_params(), 3 * 5 + 5 + 25 + 5 + 20 + 4 + 5 + 1);
    }
}
