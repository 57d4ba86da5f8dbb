#![allow(dead_code)]

use backsec::{EhParams, NakagamiLink, SystemParams};

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// `∫_a^b f` by double-exponential quadrature. The crate's tolerance is
/// absolute, so a coarse first pass sets the scale for a relative one.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let scale = quadrature::integrate(&f, a, b, 1e-6).integral.abs();
    if scale == 0.0 || !scale.is_finite() {
        return quadrature::integrate(f, a, b, 1e-15).integral;
    }
    scale * quadrature::integrate(|x| f(x) / scale, a, b, 1e-15).integral
}

/// `∫_a^b f` summed over pieces of at most `width`.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, width: f64) -> f64 {
    let n = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    (0..n).map(|i| integrate(&f, a + i as f64 * h, a + (i + 1) as f64 * h)).sum()
}

/// `∫_a^∞ f` through `t = a + s / (1 - s)`.
pub fn integrate_to_inf(f: impl Fn(f64) -> f64, a: f64) -> f64 {
    integrate(
        |s| {
            if s >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - s;
            let v = f(a + s / w) / (w * w);
            if v.is_finite() { v } else { 0.0 }
        },
        0.0,
        1.0,
    )
}

/// Default scenario with all shapes set to `m`.
pub fn scenario(m: u32, n_tags: u32, gamma_t_db: f64) -> SystemParams {
    SystemParams {
        noise_power: 1e-5,
        gamma_t: db(gamma_t_db),
        gamma_p: db(5.0),
        zeta: 2.2,
        n_tags,
        rate_threshold: 0.5,
        link_s: NakagamiLink::from_lambda(m, db(2.0), 1.0, 2.0).unwrap(),
        link_d: NakagamiLink::from_lambda(m, db(3.0), 2.0, 2.0).unwrap(),
        link_e: NakagamiLink::from_lambda(m, db(5.0), 4.0, 2.0).unwrap(),
        eh: EhParams::default_curve(100e-6).unwrap(),
    }
}
