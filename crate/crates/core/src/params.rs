use crate::error::{Error, Result};

/// Absolute values for the constants of the hierarchy `ν′ ≤ ν ≤ τ`, `ε ≤ ε′`, `γ ≤ 1/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub eps: f64,
    pub eps_prime: f64,
    pub gamma: f64,
    pub nu: f64,
    pub nu_prime: f64,
    pub tau: f64,
}

impl Default for Params {
    fn default() -> Self {
        Params { eps: 0.1, eps_prime: 0.2, gamma: 0.25, nu: 0.05, nu_prime: 0.01, tau: 0.3 }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("eps", self.eps),
            ("eps_prime", self.eps_prime),
            ("gamma", self.gamma),
            ("nu", self.nu),
            ("nu_prime", self.nu_prime),
            ("tau", self.tau),
        ];
        for (name, x) in all {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::invalid(format!("{name}={x} is not in (0,1)")));
            }
        }
        if !(self.nu_prime <= self.nu && self.nu <= self.tau) {
            return Err(Error::invalid("need nu_prime <= nu <= tau"));
        }
        if self.eps > self.eps_prime {
            return Err(Error::invalid("need eps <= eps_prime"));
        }
        if self.gamma > 0.5 {
            return Err(Error::invalid("need gamma <= 1/2"));
        }
        Ok(())
    }
}
