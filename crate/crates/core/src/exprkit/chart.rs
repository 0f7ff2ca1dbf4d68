use super::ExprError;

/// Ordered coordinate names. The first `n_base` are base coordinates `x^i`,
/// the rest are fiber coordinates `y^a`, each optionally tagged with a shell.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Vec<String>,
    n_base: usize,
    shells: Vec<u8>,
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    /// General chart; fibers get shell tag 0.
    pub fn new<S: AsRef<str>>(base: &[S], fiber: &[S]) -> Result<Chart, ExprError> {
        let shells = vec![0; fiber.len()];
        Chart::with_shells(base, fiber, &shells)
    }

    pub fn with_shells<S: AsRef<str>>(
        base: &[S],
        fiber: &[S],
        shells: &[u8],
    ) -> Result<Chart, ExprError> {
        if shells.len() != fiber.len() {
            return Err(ExprError::Chart(format!(
                "{} shell tags for {} fiber coordinates",
                shells.len(),
                fiber.len()
            )));
        }
        let names: Vec<String> = base
            .iter()
            .chain(fiber.iter())
            .map(|s| s.as_ref().to_string())
            .collect();
        for (i, n) in names.iter().enumerate() {
            if !valid_ident(n) || super::expr::is_function_name(n) {
                return Err(ExprError::Chart(format!("invalid coordinate name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(ExprError::Chart(format!("duplicate coordinate `{n}`")));
            }
        }
        Ok(Chart {
            names,
            n_base: base.len(),
            shells: shells.to_vec(),
        })
    }

    /// The 4+4 tangent-bundle chart `x1..x4 | y1..y4`.
    ///
    /// `y1..y4` stand for the fiber block `y^5..y^8`; the first pair belongs
    /// to shell 1 and the second to shell 2.
    pub fn finsler() -> Chart {
        Chart::with_shells(
            &["x1", "x2", "x3", "x4"],
            &["y1", "y2", "y3", "y4"],
            &[1, 1, 2, 2],
        )
        .expect("static chart")
    }

    /// Chart of the 2+2+2+2 shell ansatz: `x1, x2 | y3, y4 | y5, y6 | y7, y8`,
    /// where `(y3, y4)` is shell 0.
    pub fn shell() -> Chart {
        Chart::with_shells(
            &["x1", "x2"],
            &["y3", "y4", "y5", "y6", "y7", "y8"],
            &[0, 0, 1, 1, 2, 2],
        )
        .expect("static chart")
    }

    /// Checks the 4 base plus 4 fiber layout with fibers paired into shells.
    pub fn validate_tangent_bundle(&self) -> Result<(), ExprError> {
        if self.n_base != 4 || self.n_fiber() != 4 {
            return Err(ExprError::Chart(format!(
                "expected 4 base and 4 fiber coordinates, got {} and {}",
                self.n_base,
                self.n_fiber()
            )));
        }
        for pair in self.shells.chunks(2) {
            if pair[0] != pair[1] || pair[0] > 2 {
                return Err(ExprError::Chart(format!(
                    "fiber shells must come in pairs tagged 0..=2, got {:?}",
                    self.shells
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn n_fiber(&self) -> usize {
        self.names.len() - self.n_base
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn base_indices(&self) -> std::ops::Range<usize> {
        0..self.n_base
    }

    pub fn fiber_indices(&self) -> std::ops::Range<usize> {
        self.n_base..self.names.len()
    }

    /// Shell tag of fiber coordinate `a` (0-based within the fiber block).
    pub fn shell_of(&self, a: usize) -> u8 {
        self.shells[a]
    }

    /// Builds a dense point from `(name, value)` pairs; missing names are an error.
    pub fn point(&self, values: &[(&str, f64)]) -> Result<Vec<f64>, ExprError> {
        let mut out = vec![f64::NAN; self.len()];
        for (n, v) in values {
            let i = self
                .index(n)
                .ok_or_else(|| ExprError::Undeclared(n.to_string()))?;
            out[i] = *v;
        }
        if let Some(i) = out.iter().position(|v| v.is_nan()) {
            return Err(ExprError::Unbound(self.names[i].clone()));
        }
        Ok(out)
    }
}
