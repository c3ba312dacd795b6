//! Named parameter tensors.

use std::collections::HashMap;

use ndarray::{Array2, NdFloat};
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("duplicate parameter {0}")]
    Duplicate(String),
    #[error("unknown parameter {0}")]
    Unknown(String),
    #[error("parameter {name}: expected shape {expected:?}, got {got:?}")]
    Shape {
        name: String,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("missing parameter {0}")]
    Missing(String),
}

/// Ordered collection of named 2-D tensors. Order is insertion order and is
/// what checkpoints and gradients use.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamStore<T> {
    names: Vec<String>,
    values: Vec<Array2<T>>,
    index: HashMap<String, usize>,
}

impl<T> Default for ParamStore<T> {
    fn default() -> Self {
        ParamStore {
            names: Vec::new(),
            values: Vec::new(),
            index: HashMap::new(),
        }
    }
}

impl<T: NdFloat> ParamStore<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Array2<T>) -> Result<usize, ParamError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(ParamError::Duplicate(name));
        }
        let id = self.values.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.values.push(value);
        Ok(id)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn value(&self, id: usize) -> &Array2<T> {
        &self.values[id]
    }

    pub fn value_mut(&mut self, id: usize) -> &mut Array2<T> {
        &mut self.values[id]
    }

    pub fn get(&self, name: &str) -> Option<&Array2<T>> {
        self.id(name).map(|i| &self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Array2<T>)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    /// Total scalar count.
    pub fn numel(&self) -> usize {
        self.values.iter().map(Array2::len).sum()
    }

    /// Overwrites a tensor, checking its shape.
    pub fn assign(&mut self, name: &str, value: Array2<T>) -> Result<(), ParamError> {
        let id = self.id(name).ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        let expected = self.values[id].dim();
        if value.dim() != expected {
            return Err(ParamError::Shape {
                name: name.to_string(),
                expected,
                got: value.dim(),
            });
        }
        self.values[id] = value;
        Ok(())
    }

    /// Same names and shapes, values converted through f64.
    pub fn cast<U: NdFloat>(&self) -> ParamStore<U> {
        ParamStore {
            names: self.names.clone(),
            values: self
                .values
                .iter()
                .map(|a| a.mapv(|x| U::from(x.to_f64().expect("finite")).expect("representable")))
                .collect(),
            index: self.index.clone(),
        }
    }
}

fn from_f64<T: NdFloat>(x: f64) -> T {
    T::from(x).expect("representable")
}

/// Glorot uniform scaled by `gain`.
pub fn xavier<T: NdFloat, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, gain: f64) -> Array2<T> {
    let a = gain * (6.0 / (rows + cols) as f64).sqrt();
    let d = Uniform::new_inclusive(-a, a).expect("finite bound");
    Array2::from_shape_simple_fn((rows, cols), || from_f64(d.sample(rng)))
}

pub fn normal<T: NdFloat, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, std: f64) -> Array2<T> {
    let d = Normal::new(0.0, std).expect("valid std");
    Array2::from_shape_simple_fn((rows, cols), || from_f64(d.sample(rng)))
}

pub fn zeros<T: NdFloat>(rows: usize, cols: usize) -> Array2<T> {
    Array2::zeros((rows, cols))
}
