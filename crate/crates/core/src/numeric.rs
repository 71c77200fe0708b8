//! Small numerical helpers: fixed-order Gauss-Legendre panels and a
//! composite rule with geometric refinement towards the panel endpoints,
//! used for expectations of transformed jump laws via the quantile
//! representation E[g(X)] = ∫_0^1 g(Q(u)) du.

/// 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half; the
/// rule is symmetric).
const GL16_NODES: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// ∫_a^b f(x) dx by 16-point Gauss-Legendre on a single panel.
pub fn gauss_legendre_16(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for i in 0..8 {
        let dx = half * GL16_NODES[i];
        sum += GL16_WEIGHTS[i] * (f(mid - dx) + f(mid + dx));
    }
    sum * half
}

/// ∫_a^b f(x) dx with panels refined geometrically towards both endpoints.
///
/// Handles integrable endpoint singularities (log-type) that show up when
/// integrating over the quantile domain of heavy-tailed or edge-supported
/// laws. `levels` dyadic panels are carved off each end.
pub fn integrate_refined(f: &impl Fn(f64) -> f64, a: f64, b: f64, levels: u32) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let len = b - a;
    let mut cuts = Vec::with_capacity(2 * levels as usize + 2);
    cuts.push(a);
    for k in (1..=levels).rev() {
        cuts.push(a + len * 0.5f64.powi(k as i32 + 1));
    }
    for k in 1..=levels {
        cuts.push(b - len * 0.5f64.powi(k as i32 + 1));
    }
    cuts.push(b);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += gauss_legendre_16(f, w[0], w[1]);
    }
    total
}

/// ∫_lo^hi g(Q(u)) du on the open unit interval, clipping the endpoints to
/// keep quantile evaluations finite.
pub fn integrate_quantile(g: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const EPS: f64 = 1e-13;
    let lo = lo.max(EPS);
    let hi = hi.min(1.0 - EPS);
    if hi <= lo {
        return 0.0;
    }
    integrate_refined(g, lo, hi, 14)
}
