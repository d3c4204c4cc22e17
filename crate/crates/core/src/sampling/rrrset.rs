use crate::graph::VertexId;

/// Default density at which a set switches to a bitmap: `|R| >= n / 64`.
///
/// An `n`-bit bitmap costs `n / 8` bytes against `4 |R|` bytes for a list of
/// 32-bit ids, so at this density the bitmap is at most twice the list size
/// and gains constant-time membership.
pub const DEFAULT_BITMAP_DENSITY: f64 = 1.0 / 64.0;

/// Chooses between the two set encodings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReprPolicy {
    /// A set of size `s` over `n` vertices is a bitmap iff `s >= bitmap_density * n`.
    /// `0.0` forces bitmaps, anything above `1.0` forces sorted lists.
    pub bitmap_density: f64,
}

impl Default for ReprPolicy {
    fn default() -> Self {
        ReprPolicy { bitmap_density: DEFAULT_BITMAP_DENSITY }
    }
}

impl ReprPolicy {
    pub fn always_list() -> Self {
        ReprPolicy { bitmap_density: f64::INFINITY }
    }

    pub fn always_bitmap() -> Self {
        ReprPolicy { bitmap_density: 0.0 }
    }

    #[inline]
    pub fn use_bitmap(&self, size: usize, n: usize) -> bool {
        size as f64 >= self.bitmap_density * n as f64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Members {
    /// Strictly ascending vertex ids.
    Sorted(Box<[VertexId]>),
    /// `ceil(n / 64)` words; bit `v % 64` of word `v / 64` marks vertex `v`.
    Bitmap(Box<[u64]>),
}

/// One random reverse-reachable set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RRRSet {
    root: VertexId,
    size: u32,
    members: Members,
}

/// Builds a set from distinct `members` whose first element is the root,
/// using the default [`ReprPolicy`].
pub fn make_repr(members: Vec<VertexId>, n: usize) -> RRRSet {
    make_repr_with(members, n, ReprPolicy::default())
}

/// [`make_repr`] with an explicit representation policy.
///
/// # Panics
/// If `members` is empty.
pub fn make_repr_with(mut members: Vec<VertexId>, n: usize, policy: ReprPolicy) -> RRRSet {
    let root = *members.first().expect("an RRR set always contains its root");
    let size = members.len();
    let repr = if policy.use_bitmap(size, n) {
        let mut words = vec![0u64; n.div_ceil(64)];
        for &v in &members {
            words[v as usize / 64] |= 1u64 << (v % 64);
        }
        Members::Bitmap(words.into_boxed_slice())
    } else {
        members.sort_unstable();
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]), "duplicate members");
        Members::Sorted(members.into_boxed_slice())
    };
    let set = RRRSet { root, size: size as u32, members: repr };
    debug_assert_eq!(set.count_members(), size, "duplicate members");
    set
}

/// Number of comparisons performed by a lower-bound search over `len` items.
#[inline]
fn lower_bound(list: &[VertexId], key: VertexId, touches: &mut u64) -> usize {
    let (mut lo, mut hi) = (0usize, list.len());
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        *touches += 1;
        if list[mid] < key {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[inline]
fn for_each_bit(words: &[u64], first_word: usize, mut f: impl FnMut(VertexId)) {
    for (i, &word) in words.iter().enumerate() {
        let mut w = word;
        let base = (first_word + i) * 64;
        while w != 0 {
            f((base + w.trailing_zeros() as usize) as VertexId);
            w &= w - 1;
        }
    }
}

impl RRRSet {
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.size as usize
    }

    /// Always false: the root is a member.
    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn is_bitmap(&self) -> bool {
        matches!(self.members, Members::Bitmap(_))
    }

    pub fn members(&self) -> &Members {
        &self.members
    }

    /// Membership: binary search on a list, a bit test on a bitmap.
    #[inline]
    pub fn contains(&self, v: VertexId) -> bool {
        match &self.members {
            Members::Sorted(list) => list.binary_search(&v).is_ok(),
            Members::Bitmap(words) => words.get(v as usize / 64).is_some_and(|w| w & (1u64 << (v % 64)) != 0),
        }
    }

    /// [`RRRSet::contains`] that also adds the number of storage reads to `touches`.
    #[inline]
    pub(crate) fn probe(&self, v: VertexId, touches: &mut u64) -> bool {
        match &self.members {
            Members::Sorted(list) => {
                let i = lower_bound(list, v, touches);
                i < list.len() && list[i] == v
            }
            Members::Bitmap(_) => {
                *touches += 1;
                self.contains(v)
            }
        }
    }

    /// Visits every member in ascending order.
    #[inline]
    pub fn for_each(&self, f: impl FnMut(VertexId)) {
        let mut t = 0;
        self.for_each_counted(f, &mut t);
    }

    /// [`RRRSet::for_each`], adding one touch per list element or bitmap word.
    #[inline]
    pub(crate) fn for_each_counted(&self, mut f: impl FnMut(VertexId), touches: &mut u64) {
        match &self.members {
            Members::Sorted(list) => {
                *touches += list.len() as u64;
                list.iter().for_each(|&v| f(v));
            }
            Members::Bitmap(words) => {
                *touches += words.len() as u64;
                for_each_bit(words, 0, f);
            }
        }
    }

    /// Visits the members in `lo..hi`, locating the start by binary search on
    /// lists and by word offset on bitmaps.
    pub(crate) fn for_each_in_range(&self, lo: VertexId, hi: VertexId, mut f: impl FnMut(VertexId), touches: &mut u64) {
        if lo >= hi {
            return;
        }
        match &self.members {
            Members::Sorted(list) => {
                let start = lower_bound(list, lo, touches);
                for &v in &list[start..] {
                    *touches += 1;
                    if v >= hi {
                        break;
                    }
                    f(v);
                }
            }
            Members::Bitmap(words) => {
                let first = lo as usize / 64;
                let last = ((hi as usize - 1) / 64).min(words.len().saturating_sub(1));
                if first > last {
                    return;
                }
                *touches += (last - first + 1) as u64;
                for_each_bit(&words[first..=last], first, |v| {
                    if v >= lo && v < hi {
                        f(v)
                    }
                });
            }
        }
    }

    /// Members in ascending order.
    pub fn to_vec(&self) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.len());
        self.for_each(|v| out.push(v));
        out
    }

    fn count_members(&self) -> usize {
        match &self.members {
            Members::Sorted(list) => list.len(),
            Members::Bitmap(words) => words.iter().map(|w| w.count_ones() as usize).sum(),
        }
    }
}
