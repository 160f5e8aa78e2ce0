// SPDX-License-Identifier: Apache-2.0 OR MIT
//! Least-recently-used content cache shared by both router types.

use core::num::NonZeroUsize;

use lru::LruCache;

use crate::message::{Content, Name};

/// Bounded store of content objects keyed by exact name. A capacity of
/// zero disables caching entirely.
pub struct ContentStore {
    inner: Option<LruCache<Name, Content>>,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        ContentStore {
            inner: NonZeroUsize::new(capacity).map(LruCache::new),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.inner.is_some()
    }

    pub fn capacity(&self) -> usize {
        self.inner.as_ref().map_or(0, |c| c.cap().get())
    }

    pub fn len(&self) -> usize {
        self.inner.as_ref().map_or(0, LruCache::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inserts or refreshes `name`; returns the evicted victim, if any.
    pub fn insert(&mut self, name: Name, content: Content) -> Option<Name> {
        let cache = self.inner.as_mut()?;
        match cache.push(name, content) {
            Some((evicted, _)) if evicted != name => Some(evicted),
            _ => None,
        }
    }

    /// Looks up `name`, marking it as most recently used.
    pub fn get(&mut self, name: &Name) -> Option<Content> {
        self.inner.as_mut()?.get(name).cloned()
    }

    pub fn contains(&self, name: &Name) -> bool {
        self.inner.as_ref().is_some_and(|c| c.contains(name))
    }
}

impl core::fmt::Debug for ContentStore {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ContentStore")
            .field("capacity", &self.capacity())
            .field("len", &self.len())
            .finish()
    }
}
