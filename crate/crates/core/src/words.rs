//! Finite words over a family's alphabet.
//!
//! A word `w = w_1 w_2 ... w_k` stands for the product `A_{w_1} A_{w_2} ... A_{w_k}`;
//! the empty word is the identity.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Sequence of letter indices. Letters print as base-36 digits.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// `letter` repeated `k` times.
    pub fn repeat_letter(letter: u8, k: usize) -> Self {
        Word(vec![letter; k])
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pow(&self, k: usize) -> Word {
        Word(self.0.repeat(k))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Left rotation by `s` positions.
    pub fn rotate(&self, s: usize) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let mut v = self.0.clone();
        v.rotate_left(s % self.0.len());
        Word(v)
    }

    /// Lexicographically least rotation.
    pub fn canonical_rotation(&self) -> Word {
        (0..self.len().max(1))
            .map(|s| self.rotate(s))
            .min()
            .unwrap_or_default()
    }

    /// Largest letter plus one (0 for the empty word).
    pub fn alphabet_size(&self) -> usize {
        self.0.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    /// Length of the shortest `u` with `self = u^j`.
    pub fn primitive_root_len(&self) -> usize {
        let n = self.len();
        (1..=n)
            .filter(|d| n % d == 0)
            .find(|&d| (d..n).all(|i| self.0[i] == self.0[i - d]))
            .unwrap_or(0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            let c = char::from_digit(l as u32, 36).unwrap_or('?');
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidInput(format!("invalid letter {c:?} in word {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

/// True iff `w` is not a proper power of a shorter word.
pub fn is_simple(w: &Word) -> Result<bool> {
    if w.is_empty() {
        return invalid("the empty word has no simplicity");
    }
    Ok(w.primitive_root_len() == w.len())
}

/// True iff `w2` is a rotation of `w1`.
pub fn cyclically_equal(w1: &Word, w2: &Word) -> bool {
    if w1.len() != w2.len() {
        return false;
    }
    if w1.is_empty() {
        return true;
    }
    let doubled = w1.concat(w1);
    doubled.0.windows(w2.len()).any(|win| win == w2.letters())
}

/// True iff `w` is a (nonempty) power of some rotation of the simple word `pi`.
pub fn is_power_of_rotation(w: &Word, pi: &Word) -> bool {
    let n = pi.len();
    if n == 0 || w.is_empty() || w.len() % n != 0 {
        return false;
    }
    let head = Word(w.0[..n].to_vec());
    cyclically_equal(&head, pi) && (n..w.len()).all(|i| w.0[i] == w.0[i - n])
}

/// Number of consecutive copies of `pi` at the start of `w`.
pub(crate) fn leading_power(w: &[u8], pi: &[u8]) -> usize {
    let n = pi.len();
    let mut k = 0;
    while (k + 1) * n <= w.len() && &w[k * n..(k + 1) * n] == pi {
        k += 1;
    }
    k
}

/// Outcome of [`classify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Color {
    /// `w = a pi^k b` with `|a| < |pi|` and `|b| <= M`.
    White { a: Word, k: usize, b: Word },
    Black,
}

impl Color {
    pub fn is_white(&self) -> bool {
        matches!(self, Color::White { .. })
    }
}

/// White/black classification relative to the dominant word `pi`.
///
/// The witness uses the shortest admissible prefix `a` and, for it, the
/// largest power `k`.
pub fn classify(w: &Word, pi: &Word, m: usize) -> Result<Color> {
    if !is_simple(pi)? {
        return invalid(format!("dominant word {pi} is not simple"));
    }
    let n = pi.len();
    for a_len in 0..=(n - 1).min(w.len()) {
        let rest = &w.0[a_len..];
        let k = leading_power(rest, &pi.0);
        if rest.len() - k * n <= m {
            return Ok(Color::White {
                a: Word(w.0[..a_len].to_vec()),
                k,
                b: Word(rest[k * n..].to_vec()),
            });
        }
    }
    Ok(Color::Black)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentColor {
    White,
    Black,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub word: Word,
    pub color: SegmentColor,
}

/// Splitting of a word into white powers of `pi` and black separators.
#[derive(Clone, Debug)]
pub struct Partition {
    pub segments: Vec<Segment>,
    /// `|pi|`
    pub n: usize,
    pub m: usize,
    /// Smallest integer with `l n > 2n + M`.
    pub l: usize,
    /// `(l + 1) n + M`
    pub big_n: usize,
    /// The last segment is a short tail following the last long power; it is
    /// held to no length or color condition.
    pub trailing_exempt: bool,
    pi: Word,
}

/// Result of [`Partition::check`]: one flag per structural condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCheck {
    pub reassembles: bool,
    /// First segment has length at most `2N` unless it is a white power.
    pub first_bounded: bool,
    /// White segments are powers of `pi` and never adjacent.
    pub whites_are_powers: bool,
    /// Non-exempt black segments have length in `[n + M, 2N]`.
    pub blacks_bounded: bool,
}

impl PartitionCheck {
    pub fn all(&self) -> bool {
        self.reassembles && self.first_bounded && self.whites_are_powers && self.blacks_bounded
    }
}

impl Partition {
    pub fn pi(&self) -> &Word {
        &self.pi
    }

    pub fn concatenation(&self) -> Word {
        Word(self.segments.iter().flat_map(|s| s.word.0.iter().copied()).collect())
    }

    pub fn check(&self, original: &Word) -> PartitionCheck {
        let segs = &self.segments;
        let last = segs.len().saturating_sub(1);
        let exempt = |i: usize| i == 0 || (self.trailing_exempt && i == last);
        let is_pi_power = |w: &Word| {
            !w.is_empty() && w.len() % self.n == 0 && leading_power(&w.0, &self.pi.0) * self.n == w.len()
        };

        let first_bounded = segs.first().map_or(true, |s| {
            (s.color == SegmentColor::White && is_pi_power(&s.word)) || s.word.len() <= 2 * self.big_n
        });
        let whites_are_powers = segs.iter().enumerate().all(|(i, s)| {
            if s.color != SegmentColor::White || exempt(i) {
                return true;
            }
            let prev_white = i > 0 && segs[i - 1].color == SegmentColor::White && !exempt(i - 1);
            let next_white = i < last && segs[i + 1].color == SegmentColor::White && !exempt(i + 1);
            is_pi_power(&s.word) && !prev_white && !next_white
        });
        let blacks_bounded = segs.iter().enumerate().all(|(i, s)| {
            s.color != SegmentColor::Black
                || exempt(i)
                || (self.n + self.m..=2 * self.big_n).contains(&s.word.len())
        });
        PartitionCheck {
            reassembles: &self.concatenation() == original,
            first_bounded,
            whites_are_powers,
            blacks_bounded,
        }
    }
}

/// Partition of a finite word into maximal powers of `pi` separated by black
/// words of controlled length.
///
/// Powers `pi^k` with `k >= l` are spotted greedily from the left and extended
/// maximally. A gap of length at least `N` is cut into blocks of length in
/// `[N, 2N]`. A shorter gap `x` between two powers becomes `pi x pi^(l-1)`,
/// taking one copy of `pi` from the left power and `l - 1` from the right one
/// (a power may be used up entirely). The leading gap and a short trailing gap
/// keep their own color.
pub fn partition(w: &Word, pi: &Word, m: usize) -> Result<Partition> {
    if !is_simple(pi)? {
        return invalid(format!("dominant word {pi} is not simple"));
    }
    let n = pi.len();
    let l = (2 * n + m) / n + 1;
    let big_n = (l + 1) * n + m;
    let letters = w.letters();

    // maximal runs (start, k) with k >= l
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i + l * n <= letters.len() {
        let k = leading_power(&letters[i..], &pi.0);
        if k >= l {
            runs.push((i, k));
            i += k * n;
        } else {
            i += 1;
        }
    }

    let mut segments = Vec::new();
    let push = |segments: &mut Vec<Segment>, word: &[u8], color: SegmentColor| {
        if !word.is_empty() {
            segments.push(Segment {
                word: Word(word.to_vec()),
                color,
            });
        }
    };
    let own_color = |word: &[u8]| -> Result<SegmentColor> {
        Ok(if classify(&Word(word.to_vec()), pi, m)?.is_white() {
            SegmentColor::White
        } else {
            SegmentColor::Black
        })
    };

    if runs.is_empty() {
        if letters.len() <= 2 * big_n {
            if !letters.is_empty() {
                let c = own_color(letters)?;
                push(&mut segments, letters, c);
            }
        } else {
            for (s, e) in split_blocks(0, letters.len(), big_n) {
                push(&mut segments, &letters[s..e], SegmentColor::Black);
            }
        }
        return Ok(Partition {
            segments,
            n,
            m,
            l,
            big_n,
            trailing_exempt: false,
            pi: pi.clone(),
        });
    }

    // leading gap
    let first = runs[0].0;
    if first > 2 * big_n {
        for (s, e) in split_blocks(0, first, big_n) {
            push(&mut segments, &letters[s..e], SegmentColor::Black);
        }
    } else if first > 0 {
        let c = own_color(&letters[..first])?;
        push(&mut segments, &letters[..first], c);
    }

    // `cursor` is where the current run's unconsumed part begins
    let mut cursor = first;
    let mut trailing_exempt = false;
    for (idx, &(start, k)) in runs.iter().enumerate() {
        let run_end = start + k * n;
        let next = runs.get(idx + 1);
        let gap_end = next.map_or(letters.len(), |r| r.0);
        let gap_len = gap_end - run_end;
        let short_interior = next.is_some() && gap_len < big_n;
        let white_end = if short_interior { run_end - n } else { run_end };
        push(&mut segments, &letters[cursor..white_end], SegmentColor::White);

        if short_interior {
            let pad_end = gap_end + (l - 1) * n;
            push(&mut segments, &letters[white_end..pad_end], SegmentColor::Black);
            cursor = pad_end;
        } else if gap_len >= big_n {
            for (s, e) in split_blocks(run_end, gap_end, big_n) {
                push(&mut segments, &letters[s..e], SegmentColor::Black);
            }
            cursor = gap_end;
        } else if gap_len > 0 {
            let c = own_color(&letters[run_end..gap_end])?;
            push(&mut segments, &letters[run_end..gap_end], c);
            trailing_exempt = true;
            cursor = gap_end;
        } else {
            cursor = gap_end;
        }
    }

    Ok(Partition {
        segments,
        n,
        m,
        l,
        big_n,
        trailing_exempt,
        pi: pi.clone(),
    })
}

/// Cuts `[s, e)` with `e - s >= big_n` into consecutive blocks of length in
/// `[big_n, 2 big_n]`.
fn split_blocks(s: usize, e: usize, big_n: usize) -> Vec<(usize, usize)> {
    let len = e - s;
    let count = len / big_n;
    let (base, extra) = (len / count, len % count);
    let mut out = Vec::with_capacity(count);
    let mut pos = s;
    for j in 0..count {
        let sz = base + usize::from(j < extra);
        out.push((pos, pos + sz));
        pos += sz;
    }
    out
}

/// All Lyndon words over `{0, ..., alphabet - 1}` of length at most `max_len`,
/// in increasing length, then lexicographic order.
///
/// Lyndon words are exactly the simple words that are least in their cyclic
/// class, so they index the cyclic classes of simple words.
pub fn lyndon_words(alphabet: usize, max_len: usize) -> Vec<Word> {
    let mut out: Vec<Word> = Vec::new();
    if alphabet == 0 || max_len == 0 {
        return out;
    }
    // Duval's generation of all Lyndon words of length <= max_len, in lexicographic order
    let top = (alphabet - 1) as u8;
    let mut w: Vec<u8> = vec![0];
    loop {
        out.push(Word(w.clone()));
        let len = w.len();
        while w.len() < max_len {
            let c = w[w.len() - len];
            w.push(c);
        }
        while w.last() == Some(&top) {
            w.pop();
        }
        match w.last_mut() {
            Some(c) => *c += 1,
            None => break,
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Number of words of each length `1..=max_len` is `alphabet^len`; this
/// returns the total, saturating.
pub fn word_count(alphabet: usize, max_len: usize) -> u64 {
    let mut total: u64 = 0;
    let mut layer: u64 = 1;
    for _ in 0..max_len {
        layer = layer.saturating_mul(alphabet as u64);
        total = total.saturating_add(layer);
    }
    total
}

/// Calls `f` on every word of length exactly `len` in lexicographic order.
pub fn for_each_word(alphabet: usize, len: usize, mut f: impl FnMut(&[u8])) {
    if alphabet == 0 {
        return;
    }
    let mut w = vec![0u8; len];
    loop {
        f(&w);
        let mut i = len;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if (w[i] as usize) + 1 < alphabet {
                w[i] += 1;
                break;
            }
            w[i] = 0;
        }
    }
}
