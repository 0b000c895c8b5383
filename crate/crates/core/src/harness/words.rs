//! Brute-force enumeration of weighted words over `{c_1..c_m, d_1..d_m}`.
//!
//! Letter `i < m` is the collection `c_{i+1}` with weight `(1-p)/m`, letter
//! `m + i` the drop `d_{i+1}` with weight `p/m`.

use crate::error::Result;
use crate::params::ModelParams;
use crate::scalar::Scalar;

/// The last letter of each coupon type, if any: `Some(true)` for a collection.
fn last_letters(word: &[usize], m: usize) -> Vec<Option<bool>> {
    let mut last = vec![None; m];
    for &a in word {
        if a < m {
            last[a] = Some(true);
        } else {
            last[a - m] = Some(false);
        }
    }
    last
}

/// Every type is present and its last letter is a collection.
pub fn in_h(word: &[usize], m: usize) -> bool {
    last_letters(word, m).iter().all(|l| *l == Some(true))
}

/// Every dropped type is collected again afterwards.
pub fn in_g(word: &[usize], m: usize) -> bool {
    last_letters(word, m).iter().all(|l| *l != Some(false))
}

/// In `H`, and no proper prefix is in `H`.
pub fn in_j(word: &[usize], m: usize) -> bool {
    in_h(word, m) && (0..word.len()).all(|k| !in_h(&word[..k], m))
}

/// Total weight per length `0..=max_len` of the words accepted by `member`.
pub fn weights_by_length<S: Scalar>(
    params: &ModelParams,
    max_len: usize,
    member: impl Fn(&[usize], usize) -> bool,
) -> Result<Vec<S>> {
    let m = params.m() as usize;
    let p = params.p_as::<S>()?;
    let mm = S::from_u64(m as u64);
    let mut letter = vec![(S::one() - p.clone()) / mm.clone(); m];
    letter.extend(vec![p / mm; m]);
    let mut totals = vec![S::zero(); max_len + 1];
    let mut word = Vec::with_capacity(max_len);
    visit(&mut word, S::one(), max_len, &letter, &mut |w, weight| {
        if member(w, m) {
            totals[w.len()] = totals[w.len()].clone() + weight.clone();
        }
    });
    Ok(totals)
}

fn visit<S: Scalar>(
    word: &mut Vec<usize>,
    weight: S,
    max_len: usize,
    letter: &[S],
    f: &mut impl FnMut(&[usize], &S),
) {
    f(word, &weight);
    if word.len() == max_len {
        return;
    }
    for (a, w) in letter.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        word.push(a);
        visit(word, weight.clone() * w.clone(), max_len, letter, f);
        word.pop();
    }
}
