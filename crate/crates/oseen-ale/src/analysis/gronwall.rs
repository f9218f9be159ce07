//! Discrete Gronwall lemma: if nonnegative sequences satisfy
//! `a_n + dt sum_{i<=n} b_i <= dt sum_{i<=n} g_i a_i + dt sum_{i<=n} c_i + f`
//! and `dt g_i < 1` for all `i`, then with `s_i = (1 - dt g_i)^{-1}`
//! `a_n + dt sum b_i <= exp(dt sum_{i<=n} s_i g_i) (dt sum_{i<=n} c_i + f)`.

#[derive(Debug, Clone)]
pub struct GronwallEnvelope {
    /// Bound for each index `n`.
    pub bounds: Vec<f64>,
    /// False if any `dt * g_i >= 1`; the bounds are then meaningless.
    pub valid: bool,
}

/// Conclusion bound of the lemma for every prefix of the sequences.
pub fn gronwall_envelope(dt: f64, gammas: &[f64], cs: &[f64], f0: f64) -> GronwallEnvelope {
    assert_eq!(gammas.len(), cs.len());
    let valid = gammas.iter().all(|&g| dt * g < 1.0);
    let mut exponent = 0.0;
    let mut c_sum = 0.0;
    let mut bounds = Vec::with_capacity(gammas.len());
    for (&g, &c) in gammas.iter().zip(cs.iter()) {
        let sigma = 1.0 / (1.0 - dt * g);
        exponent += dt * sigma * g;
        c_sum += dt * c;
        bounds.push(exponent.exp() * (c_sum + f0));
    }
    GronwallEnvelope { bounds, valid }
}

/// One randomly generated instance satisfying the lemma's hypothesis, used
/// by the property tests: sequences `a`, `b` built forward so that the
/// hypothesis inequality holds for every prefix.
#[derive(Debug, Clone)]
pub struct GronwallInstance {
    pub dt: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub gammas: Vec<f64>,
    pub cs: Vec<f64>,
    pub f0: f64,
}

impl GronwallInstance {
    /// Draws an instance from the hypothesis set: given `gammas`, `cs`,
    /// `f0`, picks `b_i` small enough that the slack stays nonnegative and
    /// sets `a_n` to a random fraction of its largest admissible value.
    pub fn sample(rng: &mut impl rand::Rng, n: usize) -> Self {
        let dt = 0.01 + rng.gen::<f64>() * 0.2;
        let f0 = rng.gen::<f64>() * 5.0;
        let gammas: Vec<f64> = (0..n)
            // keep dt * g < 1 with margin
            .map(|_| rng.gen::<f64>() * 0.9 / dt)
            .collect();
        let cs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 3.0).collect();
        let b_cap = f0 / (n as f64 * dt);
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * b_cap).collect();
        let mut a = Vec::with_capacity(n);
        for k in 0..n {
            // slack of the hypothesis at index k, excluding the a_k terms
            let mut x = f0;
            for i in 0..=k {
                x += dt * (cs[i] - b[i]);
            }
            for (i, &ai) in a.iter().enumerate().take(k) {
                x += dt * gammas[i] * ai;
            }
            debug_assert!(x >= 0.0);
            let r: f64 = rng.gen();
            a.push(r * x / (1.0 - dt * gammas[k]));
        }
        Self {
            dt,
            a,
            b,
            gammas,
            cs,
            f0,
        }
    }

    /// Checks the hypothesis inequality at every index (sanity guard for
    /// the generator itself).
    pub fn hypothesis_holds(&self) -> bool {
        let n = self.a.len();
        for k in 0..n {
            let mut lhs = self.a[k];
            let mut rhs = self.f0;
            for i in 0..=k {
                lhs += self.dt * self.b[i];
                rhs += self.dt * (self.gammas[i] * self.a[i] + self.cs[i]);
            }
            if lhs > rhs * (1.0 + 1e-12) + 1e-12 {
                return false;
            }
        }
        true
    }

    /// Checks the conclusion against the envelope at every index.
    pub fn conclusion_holds(&self) -> bool {
        let env = gronwall_envelope(self.dt, &self.gammas, &self.cs, self.f0);
        if !env.valid {
            return false;
        }
        let mut b_sum = 0.0;
        for (k, &bound) in env.bounds.iter().enumerate() {
            b_sum += self.dt * self.b[k];
            if self.a[k] + b_sum > bound * (1.0 + 1e-12) + 1e-12 {
                return false;
            }
        }
        true
    }
}
