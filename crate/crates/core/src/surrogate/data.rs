use super::SurrogateError;

/// Parameter vectors paired with their cost values.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, SurrogateError> {
        if inputs.is_empty() {
            return Err(SurrogateError::EmptyData);
        }
        if inputs.len() != targets.len() {
            return Err(SurrogateError::Dimension {
                expected: inputs.len(),
                found: targets.len(),
            });
        }
        let d = inputs[0].len();
        if let Some(bad) = inputs.iter().find(|x| x.len() != d) {
            return Err(SurrogateError::Dimension {
                expected: d,
                found: bad.len(),
            });
        }
        if inputs.iter().flatten().chain(&targets).any(|v| !v.is_finite()) {
            return Err(SurrogateError::NonFinite);
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn push(&mut self, x: Vec<f64>, t: f64) -> Result<(), SurrogateError> {
        self.validate_row(&x, t)?;
        self.inputs.push(x);
        self.targets.push(t);
        Ok(())
    }

    /// First index holding the largest target.
    pub fn worst(&self) -> usize {
        let mut w = 0;
        for (i, &t) in self.targets.iter().enumerate() {
            if t > self.targets[w] {
                w = i;
            }
        }
        w
    }

    pub fn replace(&mut self, index: usize, x: Vec<f64>, t: f64) -> Result<(), SurrogateError> {
        self.validate_row(&x, t)?;
        self.inputs[index] = x;
        self.targets[index] = t;
        Ok(())
    }

    fn validate_row(&self, x: &[f64], t: f64) -> Result<(), SurrogateError> {
        if x.len() != self.dim() {
            return Err(SurrogateError::Dimension {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if x.iter().chain([&t]).any(|v| !v.is_finite()) {
            return Err(SurrogateError::NonFinite);
        }
        Ok(())
    }
}
