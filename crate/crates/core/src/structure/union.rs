use super::{Structure, StructureBuilder, StructureError};

impl Structure {
    /// Union keeping one copy of each subtree. Labels from both sides are kept.
    ///
    /// Fails when the input counts differ or when a merged node would carry two
    /// different output labels (or one label would land on two nodes).
    pub fn union(&self, other: &Structure) -> Result<Structure, StructureError> {
        if self.n != other.n {
            return Err(StructureError::InputCountMismatch(self.n, other.n));
        }
        let mut b = StructureBuilder::new(self.n);
        b.absorb(self)?;
        b.absorb(other)?;
        Ok(b.build())
    }
}
