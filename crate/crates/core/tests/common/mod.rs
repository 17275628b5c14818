use cogpower::{beta_star, EfficiencyFunction, NetworkConfig};
use rand::rngs::StdRng;
use rand::Rng;

/// A random heterogeneous configuration whose Nash equilibrium exists and
/// stays away from the load limit.
pub fn random_config(
    rng: &mut StdRng,
    k: usize,
    alpha: f64,
) -> (NetworkConfig, EfficiencyFunction) {
    loop {
        let f = if rng.gen_bool(0.75) {
            EfficiencyFunction::exp_outage(rng.gen_range(0.2..3.0)).unwrap()
        } else {
            EfficiencyFunction::goodman(rng.gen_range(2..20)).unwrap()
        };
        let beta = beta_star(&f).unwrap();
        let spreading = rng.gen_range(2..64u32);
        if (k as f64 - 1.0) * beta / spreading as f64 > 0.8 {
            continue;
        }
        let mut cfg = NetworkConfig::symmetric(k, spreading, alpha);
        cfg.sigma2 = rng.gen_range(0.1..2.0);
        cfg.gains = (0..k).map(|_| rng.gen_range(0.2..5.0)).collect();
        cfg.rates = (0..k).map(|_| rng.gen_range(0.5..3.0)).collect();
        return (cfg, f);
    }
}
