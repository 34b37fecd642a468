/// Uniform 1-D grid sample of a real function: node `i` sits at
/// `origin + i * spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub origin: f64,
    pub spacing: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(origin: f64, spacing: f64, values: Vec<f64>) -> Self {
        Self { origin, spacing, values }
    }

    pub fn from_fn(origin: f64, spacing: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|i| f(origin + i as f64 * spacing)).collect();
        Self { origin, spacing, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinate of node `i`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn last_node(&self) -> f64 {
        self.node(self.len().saturating_sub(1))
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }

    /// Piecewise-linear interpolation, clamped to the end values outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.len();
        if n == 0 {
            return f64::NAN;
        }
        let s = (x - self.origin) / self.spacing;
        if s <= 0.0 {
            return self.values[0];
        }
        let i = s.floor() as usize;
        if i + 1 >= n {
            return self.values[n - 1];
        }
        let theta = s - i as f64;
        self.values[i] * (1.0 - theta) + self.values[i + 1] * theta
    }

    /// True when both functions live on the same nodes.
    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.len() == other.len()
            && self.origin == other.origin
            && self.spacing == other.spacing
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
