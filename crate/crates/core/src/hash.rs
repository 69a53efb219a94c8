use rustc_hash::FxBuildHasher;

pub(crate) type FxHashMap<K, V> = hashbrown::HashMap<K, V, FxBuildHasher>;
pub(crate) type FxHashSet<K> = hashbrown::HashSet<K, FxBuildHasher>;

pub(crate) fn map_with_capacity<K, V>(capacity: usize) -> FxHashMap<K, V> {
    FxHashMap::with_capacity_and_hasher(capacity, FxBuildHasher)
}

pub(crate) fn set_with_capacity<K>(capacity: usize) -> FxHashSet<K> {
    FxHashSet::with_capacity_and_hasher(capacity, FxBuildHasher)
}
