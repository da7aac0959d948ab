//! Order-preserving interleavings of context blocks.

use std::collections::HashSet;

use thiserror::Error;

use super::term::Context;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("variable `{0}` occurs in more than one block")]
pub struct OverlapError(pub String);

/// All shuffles of `blocks`. Earlier blocks are preferred at each position,
/// which fixes the enumeration order.
pub fn shuffles(blocks: &[Context]) -> Result<Vec<Context>, OverlapError> {
    let mut seen = HashSet::new();
    for b in blocks {
        for n in b.names() {
            if !seen.insert(n.to_string()) {
                return Err(OverlapError(n.to_string()));
            }
        }
    }
    let mut out = Vec::new();
    let mut idx = vec![0; blocks.len()];
    let mut cur = Context::empty();
    rec(blocks, &mut idx, &mut cur, &mut out);
    Ok(out)
}

fn rec(blocks: &[Context], idx: &mut [usize], cur: &mut Context, out: &mut Vec<Context>) {
    let mut any = false;
    for b in 0..blocks.len() {
        if idx[b] < blocks[b].len() {
            any = true;
            cur.0.push(blocks[b].0[idx[b]].clone());
            idx[b] += 1;
            rec(blocks, idx, cur, out);
            idx[b] -= 1;
            cur.0.pop();
        }
    }
    if !any {
        out.push(cur.clone());
    }
}

/// Whether `e` is one of the shuffles of `blocks`, without enumerating them.
pub fn is_shuffle(e: &Context, blocks: &[&Context]) -> bool {
    let total: usize = blocks.iter().map(|b| b.len()).sum();
    if total != e.len() {
        return false;
    }
    let mut idx = vec![0; blocks.len()];
    for entry in &e.0 {
        let hit = blocks
            .iter()
            .enumerate()
            .find(|(b, blk)| idx[*b] < blk.len() && blk.0[idx[*b]] == *entry);
        match hit {
            Some((b, _)) => idx[b] += 1,
            None => return false,
        }
    }
    e.duplicate().is_none()
}
