//! Partitions of small vertex sets and the lattice operators used by the
//! dynamic-programming recurrences: meet (connectivity merge), projections,
//! cuts and cut refinement, and the multiplicative block fingerprint used as
//! a hash hint.

use std::fmt;
use std::hash::{Hash, Hasher};

use smallvec::SmallVec;

use crate::graph::VertexId;

/// Modulus for partition fingerprints: the Mersenne prime 2^31 - 1.
pub const FINGERPRINT_PRIME: u64 = (1 << 31) - 1;

type Ground = SmallVec<[VertexId; 12]>;
type Labels = SmallVec<[u8; 12]>;

/// A partition of an ordered set of vertices (the ground set).
///
/// Stored in canonical form: `block_of[i]` is the position of the smallest
/// element of the block containing position `i`, so two partitions over the
/// same ground set are equal iff their representations are identical.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition {
    ground: Ground,
    block_of: Labels,
}

impl Partition {
    /// The unique partition of the empty set.
    pub fn empty() -> Self {
        Partition {
            ground: SmallVec::new(),
            block_of: SmallVec::new(),
        }
    }

    /// The all-singletons partition of `ground`.
    pub fn singletons(ground: &[VertexId]) -> Self {
        let ground = sorted_ground(ground);
        let block_of = (0..ground.len() as u8).collect();
        Partition { ground, block_of }
    }

    /// The partition of `ground` with `block` as one block and singletons
    /// for everything else.
    pub fn block_partition(ground: &[VertexId], block: &[VertexId]) -> Self {
        let ground = sorted_ground(ground);
        let positions: SmallVec<[u8; 12]> = block
            .iter()
            .map(|v| position_of(&ground, *v).expect("block element not in ground set"))
            .collect();
        let min = positions.iter().copied().min();
        let mut block_of: Labels = (0..ground.len() as u8).collect();
        if let Some(min) = min {
            for &p in &positions {
                block_of[p as usize] = min;
            }
        }
        Partition { ground, block_of }
    }

    /// Builds a partition from explicit blocks. Blocks must be nonempty,
    /// disjoint, and cover the ground set they imply.
    pub fn from_blocks(blocks: &[&[VertexId]]) -> Self {
        let mut ground: Ground = SmallVec::new();
        for b in blocks {
            assert!(!b.is_empty(), "empty block");
            ground.extend_from_slice(b);
        }
        let before = ground.len();
        let ground = sorted_ground(&ground);
        assert_eq!(ground.len(), before, "blocks overlap");
        let mut block_of: Labels = SmallVec::from_elem(0, ground.len());
        for b in blocks {
            let positions: SmallVec<[u8; 12]> = b
                .iter()
                .map(|v| position_of(&ground, *v).unwrap())
                .collect();
            let min = *positions.iter().min().unwrap();
            for &p in &positions {
                block_of[p as usize] = min;
            }
        }
        Partition { ground, block_of }
    }

    pub fn ground(&self) -> &[VertexId] {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    /// Canonical block labels, indexed by ground position.
    pub fn block_labels(&self) -> &[u8] {
        &self.block_of
    }

    /// Number of blocks.
    pub fn block_count(&self) -> usize {
        self.block_of
            .iter()
            .enumerate()
            .filter(|(i, b)| **b as usize == *i)
            .count()
    }

    /// Blocks as sorted vertex lists, ordered by their minimum element.
    pub fn blocks(&self) -> Vec<Vec<VertexId>> {
        let mut out: Vec<(u8, Vec<VertexId>)> = Vec::new();
        for (i, &label) in self.block_of.iter().enumerate() {
            match out.iter_mut().find(|(l, _)| *l == label) {
                Some((_, members)) => members.push(self.ground[i]),
                None => out.push((label, vec![self.ground[i]])),
            }
        }
        out.into_iter().map(|(_, members)| members).collect()
    }

    /// True iff `u` and `v` are in the same block.
    pub fn same_block(&self, u: VertexId, v: VertexId) -> bool {
        let pu = position_of(&self.ground, u).expect("vertex not in ground set");
        let pv = position_of(&self.ground, v).expect("vertex not in ground set");
        self.block_of[pu as usize] == self.block_of[pv as usize]
    }

    /// True iff `v` forms a block on its own.
    pub fn is_singleton(&self, v: VertexId) -> bool {
        let p = position_of(&self.ground, v).expect("vertex not in ground set");
        let label = self.block_of[p as usize];
        self.block_of
            .iter()
            .enumerate()
            .all(|(i, &b)| i == p as usize || b != label)
    }

    /// Finest common coarsening of `self` and `other`: vertices share a block
    /// iff they are connected through alternating blocks of the two inputs.
    /// Computed as a breadth-first closure over the ground set, where the
    /// neighbours of an element are its co-block members in either input.
    pub fn meet(&self, other: &Partition) -> Partition {
        assert_eq!(
            self.ground, other.ground,
            "meet over different ground sets"
        );
        let n = self.ground.len();
        let mut label: Labels = SmallVec::from_elem(u8::MAX, n);
        // blocks already absorbed into the current closure, per input
        let mut done = [
            SmallVec::<[bool; 12]>::from_elem(false, n),
            SmallVec::<[bool; 12]>::from_elem(false, n),
        ];
        let mut queue: SmallVec<[u8; 12]> = SmallVec::new();
        for start in 0..n {
            if label[start] != u8::MAX {
                continue;
            }
            // start is the minimum of its merged block: canonical for free
            label[start] = start as u8;
            queue.clear();
            queue.push(start as u8);
            let mut head = 0;
            while head < queue.len() {
                let i = queue[head] as usize;
                head += 1;
                for (part, done) in [self, other].into_iter().zip(done.iter_mut()) {
                    let b = part.block_of[i] as usize;
                    if done[b] {
                        continue;
                    }
                    done[b] = true;
                    // members of block b all sit at positions >= b
                    for j in b..n {
                        if part.block_of[j] as usize == b && label[j] == u8::MAX {
                            label[j] = start as u8;
                            queue.push(j as u8);
                        }
                    }
                }
            }
        }
        Partition {
            ground: self.ground.clone(),
            block_of: label,
        }
    }

    /// Restriction to `keep`: drops all other elements, preserving
    /// co-block relations.
    pub fn project_down(&self, keep: &[VertexId]) -> Partition {
        let keep = sorted_ground(keep);
        let mut block_of: Labels = SmallVec::with_capacity(keep.len());
        // old block label -> new canonical label (position of first kept member)
        let mut relabel: SmallVec<[(u8, u8); 12]> = SmallVec::new();
        for (new_pos, v) in keep.iter().enumerate() {
            let old_pos = position_of(&self.ground, *v).expect("projection outside ground set");
            let old_label = self.block_of[old_pos as usize];
            let new_label = match relabel.iter().find(|(o, _)| *o == old_label) {
                Some((_, n)) => *n,
                None => {
                    relabel.push((old_label, new_pos as u8));
                    new_pos as u8
                }
            };
            block_of.push(new_label);
        }
        Partition {
            ground: keep,
            block_of,
        }
    }

    /// Extension to the superset `sup`: elements outside the current ground
    /// set become singletons.
    pub fn project_up(&self, sup: &[VertexId]) -> Partition {
        let sup = sorted_ground(sup);
        // position in sup of each old ground element
        let mut new_pos_of_old: SmallVec<[u8; 12]> = SmallVec::with_capacity(self.ground.len());
        for v in &self.ground {
            let p = position_of(&sup, *v).expect("extension must contain the ground set");
            new_pos_of_old.push(p);
        }
        let mut block_of: Labels = (0..sup.len() as u8).collect();
        for (old_pos, &new_pos) in new_pos_of_old.iter().enumerate() {
            let old_label = self.block_of[old_pos] as usize;
            block_of[new_pos as usize] = new_pos_of_old[old_label];
        }
        Partition {
            ground: sup,
            block_of,
        }
    }

    /// Sum over blocks of the product of vertex indexes within the block,
    /// everything modulo [`FINGERPRINT_PRIME`]. Equal partitions get equal
    /// fingerprints; collisions are possible and tolerated — structural
    /// equality stays authoritative.
    pub fn fingerprint(&self) -> u64 {
        let mut products: SmallVec<[u64; 12]> = SmallVec::from_elem(0, self.ground.len());
        for (i, &label) in self.block_of.iter().enumerate() {
            let b = label as usize;
            if products[b] == 0 {
                products[b] = 1;
            }
            products[b] = products[b] * u64::from(self.ground[i].get()) % FINGERPRINT_PRIME;
        }
        let mut sum = 0u64;
        for p in products {
            sum = (sum + p) % FINGERPRINT_PRIME;
        }
        sum
    }
}

impl Hash for Partition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.fingerprint());
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, block) in self.blocks().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, v) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", v.get())?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// An ordered bipartition (side1, side2) of a ground set, with the first
/// (smallest) element fixed to side1. The two sides are disjoint and cover
/// the ground set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cut {
    ground: Ground,
    side2_mask: u64,
}

impl Cut {
    /// Builds a cut from its side2; every other ground element is in side1.
    /// The smallest ground element must not be in side2.
    pub fn new(ground: &[VertexId], side2: &[VertexId]) -> Self {
        let ground = sorted_ground(ground);
        let mut mask = 0u64;
        for v in side2 {
            let p = position_of(&ground, *v).expect("cut side outside ground set");
            mask |= 1 << p;
        }
        assert!(mask & 1 == 0, "fixed first element must stay in side1");
        Cut {
            ground,
            side2_mask: mask,
        }
    }

    pub fn ground(&self) -> &[VertexId] {
        &self.ground
    }

    pub fn side1(&self) -> Vec<VertexId> {
        self.side(false)
    }

    pub fn side2(&self) -> Vec<VertexId> {
        self.side(true)
    }

    fn side(&self, second: bool) -> Vec<VertexId> {
        self.ground
            .iter()
            .enumerate()
            .filter(|(i, _)| (self.side2_mask >> i) & 1 == u64::from(second))
            .map(|(_, v)| *v)
            .collect()
    }
}

/// All cuts of `ground`: a binary counter over the elements after the first,
/// so exactly 2^(|U|-1) cuts, starting with (U, ∅). The empty ground set
/// yields the single empty cut.
pub fn enumerate_cuts(ground: &[VertexId]) -> Vec<Cut> {
    let ground = sorted_ground(ground);
    let n = ground.len();
    assert!(n <= 24, "cut enumeration over {n} elements is not practical");
    if n == 0 {
        return vec![Cut {
            ground,
            side2_mask: 0,
        }];
    }
    (0..1u64 << (n - 1))
        .map(|counter| Cut {
            ground: ground.clone(),
            side2_mask: counter << 1,
        })
        .collect()
}

/// 1 iff no block of `p` is split by the cut, i.e. every block lies entirely
/// in side1 or entirely in side2.
pub fn cut_refines(cut: &Cut, p: &Partition) -> bool {
    assert_eq!(cut.ground, p.ground, "cut over different ground set");
    let mask = cut.side2_mask;
    p.block_of
        .iter()
        .enumerate()
        .all(|(i, &b)| (mask >> i) & 1 == (mask >> b) & 1)
}

/// Every partition of `ground`, enumerated via restricted growth strings.
/// Intended for test oracles on small ground sets.
pub fn enumerate_partitions(ground: &[VertexId]) -> Vec<Partition> {
    let ground = sorted_ground(ground);
    let n = ground.len();
    let mut out = Vec::new();
    let mut rgs: Vec<u8> = vec![0; n];
    fn rec(rgs: &mut Vec<u8>, i: usize, max: u8, ground: &Ground, out: &mut Vec<Partition>) {
        if i == rgs.len() {
            // first occurrence position of each growth-string value is the
            // minimum of its block, so labels are canonical by construction
            let mut first: SmallVec<[u8; 12]> = SmallVec::from_elem(u8::MAX, rgs.len() + 1);
            let mut block_of: Labels = SmallVec::with_capacity(rgs.len());
            for (pos, &id) in rgs.iter().enumerate() {
                if first[id as usize] == u8::MAX {
                    first[id as usize] = pos as u8;
                }
                block_of.push(first[id as usize]);
            }
            out.push(Partition {
                ground: ground.clone(),
                block_of,
            });
            return;
        }
        for id in 0..=max {
            rgs[i] = id;
            let next_max = max.max(id + 1);
            rec(rgs, i + 1, next_max, ground, out);
        }
    }
    if n == 0 {
        return vec![Partition::empty()];
    }
    rec(&mut rgs, 0, 0, &ground, &mut out);
    out
}

fn sorted_ground(vs: &[VertexId]) -> Ground {
    let mut g: Ground = vs.iter().copied().collect();
    g.sort_unstable();
    g.dedup();
    assert!(g.len() <= u8::MAX as usize, "ground set too large");
    g
}

fn position_of(ground: &Ground, v: VertexId) -> Option<u8> {
    ground.binary_search(&v).ok().map(|p| p as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> VertexId {
        VertexId::new(i)
    }

    fn vs(is: &[u32]) -> Vec<VertexId> {
        is.iter().map(|&i| v(i)).collect()
    }

    #[test]
    fn meet_is_transitive_closure() {
        let p = Partition::from_blocks(&[&vs(&[1, 2]), &vs(&[3])]);
        let q = Partition::from_blocks(&[&vs(&[1]), &vs(&[2, 3])]);
        assert_eq!(p.meet(&q), Partition::from_blocks(&[&vs(&[1, 2, 3])]));
    }

    #[test]
    fn meet_with_singletons_is_identity() {
        let p = Partition::from_blocks(&[&vs(&[1, 3]), &vs(&[2])]);
        assert_eq!(p.meet(&Partition::singletons(&vs(&[1, 2, 3]))), p);
    }

    #[test]
    fn meet_idempotent() {
        let p = Partition::from_blocks(&[&vs(&[1, 3]), &vs(&[2, 4])]);
        assert_eq!(p.meet(&p), p);
    }

    #[test]
    fn project_down_examples() {
        let p = Partition::from_blocks(&[&vs(&[1, 2]), &vs(&[3])]);
        assert_eq!(
            p.project_down(&vs(&[1, 3])),
            Partition::singletons(&vs(&[1, 3]))
        );
        assert_eq!(p.project_down(&vs(&[1, 2, 3])), p);
        let one = Partition::from_blocks(&[&vs(&[1, 2, 3])]);
        assert_eq!(
            one.project_down(&vs(&[1, 2])),
            Partition::from_blocks(&[&vs(&[1, 2])])
        );
    }

    #[test]
    fn project_up_examples() {
        let p = Partition::from_blocks(&[&vs(&[1, 2])]);
        assert_eq!(
            p.project_up(&vs(&[1, 2, 3])),
            Partition::from_blocks(&[&vs(&[1, 2]), &vs(&[3])])
        );
        assert_eq!(p.project_up(&vs(&[1, 2])), p);
    }

    #[test]
    fn block_partition_examples() {
        assert_eq!(
            Partition::block_partition(&vs(&[1, 2, 3]), &vs(&[1, 2])),
            Partition::from_blocks(&[&vs(&[1, 2]), &vs(&[3])])
        );
        assert_eq!(
            Partition::block_partition(&vs(&[1, 2]), &vs(&[1, 2])),
            Partition::from_blocks(&[&vs(&[1, 2])])
        );
        assert_eq!(
            Partition::block_partition(&vs(&[1, 2, 3]), &vs(&[2])),
            Partition::singletons(&vs(&[1, 2, 3]))
        );
    }

    #[test]
    fn block_count_examples() {
        assert_eq!(Partition::singletons(&vs(&[1, 2, 3])).block_count(), 3);
        assert_eq!(Partition::from_blocks(&[&vs(&[1, 2, 3])]).block_count(), 1);
        assert_eq!(Partition::empty().block_count(), 0);
    }

    #[test]
    fn cut_refines_examples() {
        let u = vs(&[1, 2, 3]);
        let c = Cut::new(&u, &vs(&[3]));
        assert!(cut_refines(&c, &Partition::singletons(&u)));
        let c = Cut::new(&u, &vs(&[2]));
        assert!(!cut_refines(
            &c,
            &Partition::from_blocks(&[&vs(&[1, 2]), &vs(&[3])])
        ));
        let c = Cut::new(&u, &[]);
        for p in enumerate_partitions(&u) {
            assert!(cut_refines(&c, &p));
        }
    }

    #[test]
    fn enumerate_cuts_counts_and_order() {
        assert_eq!(enumerate_cuts(&vs(&[1, 2, 3])).len(), 4);
        let single = enumerate_cuts(&vs(&[7]));
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].side1(), vs(&[7]));
        assert!(single[0].side2().is_empty());
        let two = enumerate_cuts(&vs(&[1, 2]));
        assert_eq!(two[0].side1(), vs(&[1, 2]));
        assert!(two[0].side2().is_empty());
        assert_eq!(two[1].side1(), vs(&[1]));
        assert_eq!(two[1].side2(), vs(&[2]));
    }

    #[test]
    fn empty_ground_conventions() {
        assert_eq!(enumerate_cuts(&[]).len(), 1);
        assert!(cut_refines(&enumerate_cuts(&[])[0], &Partition::empty()));
        assert_eq!(enumerate_partitions(&[]), vec![Partition::empty()]);
    }

    #[test]
    fn fingerprint_examples() {
        let p = Partition::from_blocks(&[&vs(&[1, 2]), &vs(&[3])]);
        let q = Partition::from_blocks(&[&vs(&[1, 3]), &vs(&[2])]);
        assert_eq!(p.fingerprint(), p.clone().fingerprint());
        // 1*2 + 3 = 1*3 + 2: a tolerated collision between unequal partitions
        assert_eq!(p.fingerprint(), q.fingerprint());
        assert_ne!(p, q);
        let s = Partition::singletons(&vs(&[17]));
        assert_eq!(s.fingerprint(), 17 % FINGERPRINT_PRIME);
    }

    #[test]
    fn enumerate_partitions_bell_numbers() {
        for (n, bell) in [(0usize, 1usize), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let ground: Vec<VertexId> = (1..=n as u32).map(v).collect();
            let all = enumerate_partitions(&ground);
            assert_eq!(all.len(), bell, "Bell({n})");
            let mut dedup = all.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), all.len());
        }
    }

    prop_compose! {
        fn arb_partition(max_n: usize)
            (n in 1..=max_n)
            (labels in proptest::collection::vec(0..n as u8, n), n in Just(n))
            -> Partition
        {
            let ground: Vec<VertexId> = (1..=n as u32).map(VertexId::new).collect();
            // use the raw labels as a block relation, canonicalized through from_blocks
            let mut blocks: Vec<Vec<VertexId>> = Vec::new();
            let mut seen: Vec<u8> = Vec::new();
            for (i, &l) in labels.iter().enumerate() {
                match seen.iter().position(|&s| s == l) {
                    Some(b) => blocks[b].push(ground[i]),
                    None => {
                        seen.push(l);
                        blocks.push(vec![ground[i]]);
                    }
                }
            }
            let refs: Vec<&[VertexId]> = blocks.iter().map(|b| b.as_slice()).collect();
            Partition::from_blocks(&refs)
        }
    }

    proptest! {
        #[test]
        fn meet_commutative_associative_idempotent(
            p in arb_partition(8), q in arb_partition(8), r in arb_partition(8)
        ) {
            let n = p.len().min(q.len()).min(r.len());
            let ground: Vec<VertexId> = (1..=n as u32).map(VertexId::new).collect();
            let p = p.project_down(&ground);
            let q = q.project_down(&ground);
            let r = r.project_down(&ground);
            prop_assert_eq!(p.meet(&q), q.meet(&p));
            prop_assert_eq!(p.meet(&q).meet(&r), p.meet(&q.meet(&r)));
            prop_assert_eq!(p.meet(&p), p);
        }

        #[test]
        fn meet_consistent_with_cuts(p in arb_partition(5), q in arb_partition(5)) {
            let n = p.len().min(q.len());
            let ground: Vec<VertexId> = (1..=n as u32).map(VertexId::new).collect();
            let p = p.project_down(&ground);
            let q = q.project_down(&ground);
            let m = p.meet(&q);
            for c in enumerate_cuts(&ground) {
                prop_assert_eq!(
                    cut_refines(&c, &m),
                    cut_refines(&c, &p) && cut_refines(&c, &q)
                );
            }
        }

        #[test]
        fn cut_enumeration_has_no_duplicates(n in 1usize..=12) {
            let ground: Vec<VertexId> = (1..=n as u32).map(VertexId::new).collect();
            let cuts = enumerate_cuts(&ground);
            prop_assert_eq!(cuts.len(), 1 << (n - 1));
            let mut masks: Vec<u64> = cuts.iter().map(|c| c.side2_mask).collect();
            masks.sort_unstable();
            masks.dedup();
            prop_assert_eq!(masks.len(), 1 << (n - 1));
        }

        #[test]
        fn projection_section_law(p in arb_partition(8), extra in 9u32..=12) {
            let mut sup: Vec<VertexId> = p.ground().to_vec();
            sup.extend((9..=extra).map(VertexId::new));
            let up = p.project_up(&sup);
            prop_assert_eq!(up.project_down(p.ground()), p.clone());
            for x in (9..=extra).map(VertexId::new) {
                prop_assert!(up.is_singleton(x));
            }
        }

        #[test]
        fn block_count_matches_blocks(p in arb_partition(8)) {
            prop_assert_eq!(p.block_count(), p.blocks().len());
        }
    }
}
