use super::{OpSet, SearchSpaceError, CELL_EDGES, NUM_EDGES};

/// A discrete architecture: one op index per cell edge, in the fixed edge
/// order `0→1, 0→2, 1→2, 0→3, 1→3, 2→3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genotype {
    ops: [usize; NUM_EDGES],
}

impl Genotype {
    pub fn new(ops: [usize; NUM_EDGES]) -> Self {
        Self { ops }
    }

    pub fn uniform(op: usize) -> Self {
        Self { ops: [op; NUM_EDGES] }
    }

    pub fn ops(&self) -> &[usize; NUM_EDGES] {
        &self.ops
    }

    pub fn op(&self, edge: usize) -> usize {
        self.ops[edge]
    }

    /// Number of genotypes over `num_ops` candidate ops.
    pub fn space_size(num_ops: usize) -> usize {
        num_ops.pow(NUM_EDGES as u32)
    }

    /// Mixed-radix decoding of `index`; edge 0 is the most significant digit.
    pub fn from_index(mut index: usize, num_ops: usize) -> Self {
        let mut ops = [0; NUM_EDGES];
        for slot in ops.iter_mut().rev() {
            *slot = index % num_ops;
            index /= num_ops;
        }
        Self { ops }
    }

    pub fn index(&self, num_ops: usize) -> usize {
        self.ops.iter().fold(0, |acc, &o| acc * num_ops + o)
    }

    pub fn all(num_ops: usize) -> impl Iterator<Item = Genotype> {
        (0..Self::space_size(num_ops)).map(move |i| Self::from_index(i, num_ops))
    }

    pub fn validate(&self, ops: &OpSet) -> Result<(), SearchSpaceError> {
        match self.ops.iter().position(|&o| o >= ops.len()) {
            Some(edge) => Err(SearchSpaceError::OpIndexOutOfRange {
                edge,
                index: self.ops[edge],
                num_ops: ops.len(),
            }),
            None => Ok(()),
        }
    }
}

/// Serialize to the `|op~0|+|op~0|op~1|+|op~0|op~1|op~2|` arch string.
pub fn genotype_to_string(g: &Genotype, ops: &OpSet) -> Result<String, SearchSpaceError> {
    g.validate(ops)?;
    let mut out = String::with_capacity(64);
    let mut edge = 0;
    for target in 1..=3 {
        if target > 1 {
            out.push('+');
        }
        out.push('|');
        for source in 0..target {
            debug_assert_eq!(CELL_EDGES[edge], (source, target));
            let op = ops.get(g.op(edge)).expect("validated");
            out.push_str(op.name());
            out.push('~');
            out.push_str(&source.to_string());
            out.push('|');
            edge += 1;
        }
    }
    Ok(out)
}

/// Parse an arch string produced by [`genotype_to_string`].
pub fn string_to_genotype(s: &str, ops: &OpSet) -> Result<Genotype, SearchSpaceError> {
    Parser { s, pos: 0, ops }.parse()
}

struct Parser<'a> {
    s: &'a str,
    pos: usize,
    ops: &'a OpSet,
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, SearchSpaceError> {
        Err(SearchSpaceError::Parse {
            position: self.pos,
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), SearchSpaceError> {
        match self.s[self.pos..].chars().next() {
            Some(found) if found == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(found) => self.fail(format!("expected `{c}`, found `{found}`")),
            None => self.fail(format!("expected `{c}`, found end of input")),
        }
    }

    fn take_until(&mut self, stop: char) -> &'a str {
        let s: &'a str = self.s;
        let rest = &s[self.pos..];
        let len = rest.find(stop).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn parse(mut self) -> Result<Genotype, SearchSpaceError> {
        let mut ops = [0; NUM_EDGES];
        let mut edge = 0;
        for target in 1..=3usize {
            if target > 1 {
                self.expect('+')?;
            }
            self.expect('|')?;
            for source in 0..target {
                let start = self.pos;
                let name = self.take_until('~');
                let Some(index) = self.ops.position_by_name(name) else {
                    return Err(SearchSpaceError::UnknownOp {
                        name: name.to_string(),
                        position: start,
                    });
                };
                self.expect('~')?;
                let digits_at = self.pos;
                let digits = self.take_until('|');
                if digits != source.to_string() {
                    self.pos = digits_at;
                    return self.fail(format!(
                        "expected source node {source} for an edge into node {target}, found `{digits}`"
                    ));
                }
                self.expect('|')?;
                ops[edge] = index;
                edge += 1;
            }
        }
        if self.pos != self.s.len() {
            return self.fail("trailing characters after genotype");
        }
        Ok(Genotype { ops })
    }
}
