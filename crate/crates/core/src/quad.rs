//! Gauss-Legendre nodes and weights, computed by Newton iteration on the
//! Legendre recurrence. Used by the neuron-density and Radon quadratures,
//! always paired with a node-doubling self-convergence check at the call
//! site.

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be >= 1");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights rescaled to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Uniform panels over `[a, b]` with a 2-point Gauss rule per panel;
/// exact for piecewise cubics on the panel grid.
pub fn panel_rule(panels: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(panels >= 1);
    let h = (b - a) / panels as f64;
    let offset = h / (2.0 * 3.0f64.sqrt());
    let mut nodes = Vec::with_capacity(2 * panels);
    let mut weights = Vec::with_capacity(2 * panels);
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        nodes.push(mid - offset);
        nodes.push(mid + offset);
        weights.push(h / 2.0);
        weights.push(h / 2.0);
    }
    (nodes, weights)
}
