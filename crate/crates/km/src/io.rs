//! JSON file formats for sets, Bohr sets and integer sets.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use km_core::{BohrSet, Element, GSet, Group};
use serde::{Deserialize, Serialize};

/// `{"group":"Z5xZ5","elements":[[0,1],...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetFile {
    pub group: String,
    pub elements: Vec<Vec<u32>>,
}

/// `{"group":"Z101","freqs":[[1]],"widths":[0.5]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohrFile {
    pub group: String,
    pub freqs: Vec<Vec<u32>>,
    pub widths: Vec<f64>,
}

/// `{"n":100,"elements":[1,2,4]}`, a subset of `[1, n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntSetFile {
    pub n: u64,
    pub elements: Vec<u64>,
}

fn read<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

impl SetFile {
    pub fn load(path: &Path) -> Result<Self> {
        read(path)
    }

    /// Elements in index order, so equal sets serialize identically.
    pub fn from_set(set: &GSet) -> Self {
        SetFile {
            group: set.group().to_string(),
            elements: set.elements().into_iter().map(|e| e.0).collect(),
        }
    }

    pub fn to_set(&self, cap: usize) -> Result<GSet> {
        let g = Group::parse_with_cap(&self.group, cap)?;
        let elems: Vec<Element> = self.elements.iter().cloned().map(Element).collect();
        Ok(GSet::from_elements(&g, &elems)?)
    }
}

impl BohrFile {
    pub fn load(path: &Path) -> Result<Self> {
        read(path)
    }

    pub fn from_bohr(b: &BohrSet) -> Self {
        let g = b.group();
        BohrFile {
            group: g.to_string(),
            freqs: b.freqs().iter().map(|&f| g.element(f).0).collect(),
            widths: b.widths().to_vec(),
        }
    }

    pub fn to_bohr(&self, cap: usize) -> Result<BohrSet> {
        let g = Group::parse_with_cap(&self.group, cap)?;
        let freqs = self
            .freqs
            .iter()
            .map(|c| g.index_of(&Element(c.clone())))
            .collect::<km_core::Result<Vec<_>>>()?;
        Ok(BohrSet::new(&g, freqs, self.widths.clone())?)
    }
}

impl IntSetFile {
    pub fn load(path: &Path) -> Result<Self> {
        let f: IntSetFile = read(path)?;
        f.validated()
    }

    /// Sorted, deduplicated and checked against `[1, n]`.
    pub fn new(n: u64, mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        IntSetFile { n, elements }.validated()
    }

    fn validated(mut self) -> Result<Self> {
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        self.elements.sort_unstable();
        self.elements.dedup();
        if let Some(&v) = self.elements.iter().find(|&&v| v == 0 || v > self.n) {
            bail!("element {v} outside [1, {}]", self.n);
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_round_trip() {
        let f = SetFile {
            group: "Z5^2".into(),
            elements: vec![vec![0, 1], vec![2, 3]],
        };
        let s = f.to_set(1 << 20).unwrap();
        assert_eq!(SetFile::from_set(&s), f);
        let long = SetFile { group: "Z5xZ5".into(), ..f };
        assert_eq!(long.to_set(1 << 20).unwrap(), s);
    }

    #[test]
    fn bohr_round_trip() {
        let f = BohrFile {
            group: "Z101".into(),
            freqs: vec![vec![1]],
            widths: vec![0.5],
        };
        let b = f.to_bohr(1 << 20).unwrap();
        assert_eq!(b.size(), 17);
        assert_eq!(BohrFile::from_bohr(&b), f);
    }

    #[test]
    fn int_sets_are_checked() {
        assert!(IntSetFile::new(5, vec![0]).is_err());
        assert_eq!(IntSetFile::new(5, vec![3, 1, 3]).unwrap().elements, vec![1, 3]);
    }
}
