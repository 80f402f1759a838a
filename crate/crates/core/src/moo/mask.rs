use std::fmt;

/// Binary selection vector over the sensors of a field; `true` transmits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SelectionMask {
    genes: Vec<bool>,
}

impl SelectionMask {
    pub fn new(genes: Vec<bool>) -> Self {
        Self { genes }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        Self::new(vec![true; n])
    }

    pub fn from_indices(n: usize, selected: &[usize]) -> Self {
        let mut genes = vec![false; n];
        for &i in selected {
            genes[i] = true;
        }
        Self::new(genes)
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn genes(&self) -> &[bool] {
        &self.genes
    }

    pub fn get(&self, i: usize) -> bool {
        self.genes[i]
    }

    pub fn set(&mut self, i: usize, on: bool) {
        self.genes[i] = on;
    }

    pub fn flip(&mut self, i: usize) {
        self.genes[i] = !self.genes[i];
    }

    pub fn count(&self) -> usize {
        self.genes.iter().filter(|&&g| g).count()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.genes
            .iter()
            .enumerate()
            .filter_map(|(i, &g)| g.then_some(i))
    }

    /// Hex of `Σ gᵢ·2ⁱ`, most significant digit first, `⌈N/4⌉` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.genes.len().div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = (0..4)
                    .filter(|b| self.genes.get(4 * d + b).copied().unwrap_or(false))
                    .fold(0u32, |acc, b| acc | (1 << b));
                char::from_digit(nibble, 16).expect("nibble")
            })
            .collect()
    }
}

impl fmt::Display for SelectionMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &g in &self.genes {
            f.write_str(if g { "1" } else { "0" })?;
        }
        Ok(())
    }
}
