//! Five-point Gauss–Legendre rule (exact for polynomials of degree 9).

const NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];

const WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// `∫_a^b f(x) dx`.
pub fn gauss5<F: Fn(f64) -> f64>(a: f64, b: f64, f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    NODES
        .iter()
        .zip(&WEIGHTS)
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
        * half
}

/// Mean of `f` along the segment `p → q`.
pub fn segment_mean<F: Fn([f64; 2]) -> f64>(p: [f64; 2], q: [f64; 2], f: F) -> f64 {
    0.5 * gauss5(-1.0, 1.0, |s| {
        let t = 0.5 * (s + 1.0);
        f([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])])
    })
}
