use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{DataElement, DicomError, Tag};

/// Ordered set of data elements, at most one per tag.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    elements: BTreeMap<Tag, DataElement>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts, replacing any element with the same tag.
    pub fn insert(&mut self, element: DataElement) -> Option<DataElement> {
        self.elements.insert(element.tag(), element)
    }

    pub fn get(&self, tag: Tag) -> Option<&DataElement> {
        self.elements.get(&tag)
    }

    pub fn get_mut(&mut self, tag: Tag) -> Option<&mut DataElement> {
        self.elements.get_mut(&tag)
    }

    pub fn remove(&mut self, tag: Tag) -> Option<DataElement> {
        self.elements.remove(&tag)
    }

    pub fn contains(&self, tag: Tag) -> bool {
        self.elements.contains_key(&tag)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Elements in ascending tag order.
    pub fn iter(&self) -> impl Iterator<Item = &DataElement> {
        self.elements.values()
    }

    pub fn tags(&self) -> impl Iterator<Item = Tag> + '_ {
        self.elements.keys().copied()
    }

    /// Text value of a top-level element, if present and non-empty.
    pub fn text(&self, tag: Tag) -> Option<&str> {
        self.get(tag).and_then(DataElement::as_str)
    }

    /// Depth-first visit of every element, sequence items included.
    pub fn walk(&self) -> Vec<(ElementPath, &DataElement)> {
        let mut out = Vec::new();
        walk_into(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn get_path(&self, path: &ElementPath) -> Option<&DataElement> {
        let mut ds = self;
        for &(sq, item) in &path.ancestors {
            ds = ds.get(sq)?.items()?.get(item)?;
        }
        ds.get(path.tag)
    }

    pub fn get_path_mut(&mut self, path: &ElementPath) -> Option<&mut DataElement> {
        let mut ds = self;
        for &(sq, item) in &path.ancestors {
            ds = ds.get_mut(sq)?.items_mut()?.get_mut(item)?;
        }
        ds.get_mut(path.tag)
    }

    /// Removes the element at `path`; the enclosing items are left in place.
    pub fn remove_path(&mut self, path: &ElementPath) -> Option<DataElement> {
        let mut ds = self;
        for &(sq, item) in &path.ancestors {
            ds = ds.get_mut(sq)?.items_mut()?.get_mut(item)?;
        }
        ds.remove(path.tag)
    }
}

impl FromIterator<DataElement> for Dataset {
    fn from_iter<I: IntoIterator<Item = DataElement>>(iter: I) -> Self {
        let mut ds = Dataset::new();
        for e in iter {
            ds.insert(e);
        }
        ds
    }
}

fn walk_into<'a>(
    ds: &'a Dataset,
    ancestors: &mut Vec<(Tag, usize)>,
    out: &mut Vec<(ElementPath, &'a DataElement)>,
) {
    for e in ds.iter() {
        out.push((
            ElementPath {
                ancestors: ancestors.clone(),
                tag: e.tag(),
            },
            e,
        ));
        if let Some(items) = e.items() {
            for (i, item) in items.iter().enumerate() {
                ancestors.push((e.tag(), i));
                walk_into(item, ancestors, out);
                ancestors.pop();
            }
        }
    }
}

/// Location of an element: the enclosing sequence tags with item indices,
/// then the element tag. Text form is `(0040,0275)[0].(0032,1060)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementPath {
    pub ancestors: Vec<(Tag, usize)>,
    pub tag: Tag,
}

impl ElementPath {
    pub fn top(tag: Tag) -> Self {
        ElementPath {
            ancestors: Vec::new(),
            tag,
        }
    }

    pub fn nested(ancestors: Vec<(Tag, usize)>, tag: Tag) -> Self {
        ElementPath { ancestors, tag }
    }

    pub fn is_top_level(&self) -> bool {
        self.ancestors.is_empty()
    }
}

impl From<Tag> for ElementPath {
    fn from(tag: Tag) -> Self {
        ElementPath::top(tag)
    }
}

impl fmt::Display for ElementPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (sq, item) in &self.ancestors {
            write!(f, "{sq}[{item}].")?;
        }
        write!(f, "{}", self.tag)
    }
}

impl FromStr for ElementPath {
    type Err = DicomError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DicomError::BadTag(s.to_string());
        let mut parts: Vec<&str> = s.trim().split('.').collect();
        let leaf = parts.pop().ok_or_else(bad)?;
        let mut ancestors = Vec::with_capacity(parts.len());
        for p in parts {
            let (tag, rest) = p.split_once('[').ok_or_else(bad)?;
            let idx = rest.strip_suffix(']').ok_or_else(bad)?;
            ancestors.push((tag.parse()?, idx.parse().map_err(|_| bad())?));
        }
        Ok(ElementPath {
            ancestors,
            tag: leaf.parse()?,
        })
    }
}
