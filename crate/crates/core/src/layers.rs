//! Layered CSV: named grid layers followed by an optional scalar row.
//!
//! ```text
//! # layer <name>
//! v,v,...          (height rows of width values)
//! # scalars <key>,<key>,...
//! v,v,...
//! ```

use std::fmt::Write as _;

use crate::error::{IppError, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub name: String,
    pub width: usize,
    pub values: Vec<T>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LayeredGrid<T> {
    pub layers: Vec<Layer<T>>,
    /// Keys and raw text values; empty text encodes "not applicable".
    pub scalars: Vec<(String, String)>,
}

impl<T: Real> LayeredGrid<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for layer in &self.layers {
            writeln!(out, "# layer {}", layer.name).unwrap();
            for row in layer.values.chunks(layer.width) {
                let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        if !self.scalars.is_empty() {
            let keys: Vec<&str> = self.scalars.iter().map(|(k, _)| k.as_str()).collect();
            let vals: Vec<&str> = self.scalars.iter().map(|(_, v)| v.as_str()).collect();
            writeln!(out, "# scalars {}", keys.join(",")).unwrap();
            writeln!(out, "{}", vals.join(",")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut grid = LayeredGrid { layers: Vec::new(), scalars: Vec::new() };
        let mut scalar_keys: Option<Vec<String>> = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(name) = line.strip_prefix("# layer ") {
                grid.layers.push(Layer { name: name.trim().to_string(), width: 0, values: Vec::new() });
            } else if let Some(keys) = line.strip_prefix("# scalars ") {
                scalar_keys = Some(keys.split(',').map(|k| k.trim().to_string()).collect());
            } else if let Some(keys) = scalar_keys.take() {
                let vals: Vec<&str> = line.split(',').collect();
                if vals.len() != keys.len() {
                    return Err(IppError::ingestion("scalar row does not match its keys"));
                }
                grid.scalars = keys.into_iter().zip(vals.into_iter().map(|v| v.trim().to_string())).collect();
            } else {
                let layer = grid
                    .layers
                    .last_mut()
                    .ok_or_else(|| IppError::ingestion("grid row before any layer header"))?;
                let row = line
                    .split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map(T::lit)
                            .map_err(|_| IppError::ingestion(format!("bad number {v:?}")))
                    })
                    .collect::<Result<Vec<T>>>()?;
                if layer.width == 0 {
                    layer.width = row.len();
                } else if layer.width != row.len() {
                    return Err(IppError::ingestion(format!("ragged row in layer {}", layer.name)));
                }
                layer.values.extend(row);
            }
        }
        Ok(grid)
    }

    pub fn layer(&self, name: &str) -> Option<&Layer<T>> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn scalar(&self, key: &str) -> Option<&str> {
        self.scalars.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}
