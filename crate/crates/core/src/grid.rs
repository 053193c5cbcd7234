//! Functions sampled on a grid of `[0, 1]`, interpolated by a natural cubic
//! spline.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("a grid function needs at least 4 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("{nodes} nodes but {values} values")]
    LengthMismatch { nodes: usize, values: usize },
    #[error("nodes must ascend strictly from 0 to 1")]
    BadNodes,
    #[error("value at node {0} is not finite")]
    NonFinite(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// Spline second derivatives at the nodes (zero at both ends).
    second: Vec<f64>,
}

/// `n + 1` equally spaced nodes on `[0, 1]`.
pub fn uniform_nodes(n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { 1.0 } else { i as f64 / n as f64 }).collect()
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self, GridError> {
        if nodes.len() != values.len() {
            return Err(GridError::LengthMismatch { nodes: nodes.len(), values: values.len() });
        }
        if nodes.len() < 4 {
            return Err(GridError::TooFewNodes(nodes.len()));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 || !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(GridError::BadNodes);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        let second = natural_spline(&nodes, &values);
        Ok(GridFunction { nodes, values, second })
    }

    /// Samples `f` at `n + 1` uniform nodes.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let nodes = uniform_nodes(n);
        let values = nodes.iter().map(|&t| f(t)).collect();
        GridFunction::new(nodes, values)
    }

    pub fn zeros(n: usize) -> Result<Self, GridError> {
        GridFunction::from_fn(n, |_| 0.0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// `max |self - other|` over the nodes; `None` if the node sets differ.
    pub fn distance(&self, other: &GridFunction) -> Option<f64> {
        if self.nodes != other.nodes {
            return None;
        }
        Some(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Index `i` of the cell `[nodes[i], nodes[i+1]]` containing `t`
    /// (clamped to the end cells).
    fn cell(&self, t: f64) -> usize {
        let i = self.nodes.partition_point(|&x| x <= t);
        i.clamp(1, self.nodes.len() - 1) - 1
    }

    fn local(&self, t: f64) -> (usize, f64, f64) {
        let i = self.cell(t);
        let h = self.nodes[i + 1] - self.nodes[i];
        (i, h, (t - self.nodes[i]) / h)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (i, h, b) = self.local(t);
        let a = 1.0 - b;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        a * self.values[i] + b * self.values[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let (i, _, b) = self.local(t);
        (1.0 - b) * self.second[i] + b * self.second[i + 1]
    }

    /// `∫₀^x` of the spline over cell `i`, from its left node, with `b = (x - x_i)/h`.
    fn cell_partial(&self, i: usize, b: f64) -> f64 {
        let h = self.nodes[i + 1] - self.nodes[i];
        let a = 1.0 - b;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let lin = y0 * (b - 0.5 * b * b) + y1 * 0.5 * b * b;
        let cub0 = -0.25 * a.powi(4) + 0.5 * a * a - 0.25;
        let cub1 = 0.25 * b.powi(4) - 0.5 * b * b;
        h * (lin + (m0 * cub0 + m1 * cub1) * h * h / 6.0)
    }

    /// Exact integral of the spline over `[0, x]`, `x ∈ [0, 1]`.
    pub fn integral_to(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let (i, _, b) = self.local(x);
        let whole: f64 = (0..i).map(|k| self.cell_partial(k, 1.0)).sum();
        whole + self.cell_partial(i, b)
    }

    /// Minimum of the spline over `[a, b]`: nodes inside plus both ends.
    pub fn min_on(&self, a: f64, b: f64) -> f64 {
        let inner = self
            .nodes
            .iter()
            .zip(&self.values)
            .filter(|(&t, _)| t >= a && t <= b)
            .fold(f64::INFINITY, |m, (_, &v)| m.min(v));
        inner.min(self.eval(a)).min(self.eval(b))
    }
}

/// Second derivatives of the natural cubic spline (Thomas algorithm).
fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    // interior unknowns m[1..n-1]
    let k = n - 2;
    let mut diag = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    let mut sub = vec![0.0; k];
    for j in 0..k {
        let i = j + 1;
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag[j] = (h0 + h1) / 3.0;
        sub[j] = h0 / 6.0;
        rhs[j] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
    }
    // super-diagonal of row j equals sub-diagonal of row j+1
    for j in 1..k {
        let w = sub[j] / diag[j - 1];
        diag[j] -= w * sub[j];
        rhs[j] -= w * rhs[j - 1];
    }
    for j in (0..k).rev() {
        let upper = if j + 1 < k { sub[j + 1] * m[j + 2] } else { 0.0 };
        m[j + 1] = (rhs[j] - upper) / diag[j];
    }
    m
}
