use num_traits::Float;

use super::Mlp;

/// Adam with global gradient-norm clipping.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_grad_norm: Option<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-5,
            max_grad_norm: None,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn with_max_grad_norm(mut self, norm: f64) -> Self {
        self.max_grad_norm = Some(norm);
        self
    }

    /// Applies one step and returns the gradient norm before clipping.
    pub fn step<T: Float>(&mut self, params: &mut Mlp<T>, grad: &Mlp<T>) -> f64 {
        let g: Vec<f64> = grad.flat().iter().map(|v| v.to_f64().unwrap()).collect();
        assert_eq!(g.len(), self.m.len(), "optimizer sized for another network");
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = match self.max_grad_norm {
            Some(max) if norm > max => max / (norm + 1e-6),
            _ => 1.0,
        };
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut p: Vec<f64> = params.flat().iter().map(|v| v.to_f64().unwrap()).collect();
        for i in 0..p.len() {
            let gi = g[i] * scale;
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * gi;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * gi * gi;
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            p[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
        let p: Vec<T> = p.into_iter().map(|v| T::from(v).unwrap()).collect();
        params.set_flat(&p);
        norm
    }
}
