//! Gauss–Legendre rules and composite panel quadrature.

use crate::num::{lit, Real};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    // Nodes are computed in f64 and converted; Newton on P_n converges in a
    // handful of iterations from the Tricomi initial guess.
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (
        nodes.into_iter().map(lit).collect(),
        weights.into_iter().map(lit).collect(),
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A flattened composite rule: nodes and weights over a union of panels.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> CompositeRule<T> {
    /// Applies a fixed-order rule on each of the panels `[edges[i], edges[i+1]]`.
    pub fn from_edges(edges: &[T], order: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(order);
        let half = lit::<T>(0.5);
        let mut nodes = Vec::with_capacity(order * edges.len().saturating_sub(1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if !(b > a) {
                continue;
            }
            let mid = (a + b) * half;
            let hw = (b - a) * half;
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + hw * *xi);
                weights.push(hw * *wi);
            }
        }
        CompositeRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (x, w)| acc + *w * f(*x))
    }
}

/// Panel edges over `[a, b]`: `panels` equal panels, with every interior
/// breakpoint inserted as an edge and the neighbourhood of each breakpoint
/// graded geometrically (`grading` extra panels shrinking by 4× per level).
pub fn panel_edges<T: Real>(a: T, b: T, panels: usize, breakpoints: &[T], grading: usize) -> Vec<T> {
    let panels = panels.max(1);
    let width = (b - a) / T::from_usize(panels).unwrap();
    let mut edges: Vec<T> = (0..=panels)
        .map(|i| a + width * T::from_usize(i).unwrap())
        .collect();
    *edges.last_mut().unwrap() = b;
    let quarter = lit::<T>(0.25);
    for &bp in breakpoints {
        if !(bp > a && bp < b) {
            continue;
        }
        edges.push(bp);
        let mut d = width;
        for _ in 0..grading {
            d = d * quarter;
            for cand in [bp - d, bp + d] {
                if cand > a && cand < b {
                    edges.push(cand);
                }
            }
        }
    }
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    edges.dedup_by(|x, y| (*x - *y).abs() <= T::epsilon() * (x.abs() + y.abs()));
    edges
}
