// Copyright 2026 The sublora Authors.
// SPDX-License-Identifier: Apache-2.0

#include "sublora/alloc_tracker.hpp"

#include <atomic>
#include <cstdlib>

// Counting is done by interposing the C allocator, so operator new, Eigen's
// aligned storage and plain malloc are all seen. glibc exports its own
// implementations under __libc_* names.
#if defined(__GLIBC__)
#include <malloc.h>

extern "C" {
void* __libc_malloc(std::size_t);
void* __libc_calloc(std::size_t, std::size_t);
void* __libc_realloc(void*, std::size_t);
void* __libc_memalign(std::size_t, std::size_t);
void __libc_free(void*);
}

namespace {

std::atomic<std::size_t> g_current{0};
std::atomic<std::size_t> g_peak{0};

void note_alloc(void* p) noexcept {
  if (!p) return;
  const std::size_t size = malloc_usable_size(p);
  const std::size_t now = g_current.fetch_add(size, std::memory_order_relaxed) + size;
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void note_free(void* p) noexcept {
  if (p) g_current.fetch_sub(malloc_usable_size(p), std::memory_order_relaxed);
}

}  // namespace

extern "C" {

void* malloc(std::size_t size) {
  void* p = __libc_malloc(size);
  note_alloc(p);
  return p;
}

void* calloc(std::size_t count, std::size_t size) {
  void* p = __libc_calloc(count, size);
  note_alloc(p);
  return p;
}

void* realloc(void* old, std::size_t size) {
  note_free(old);
  void* p = __libc_realloc(old, size);
  if (p) {
    note_alloc(p);
  } else if (old && size != 0) {
    note_alloc(old);
  }
  return p;
}

void free(void* p) {
  note_free(p);
  __libc_free(p);
}

void* memalign(std::size_t align, std::size_t size) {
  void* p = __libc_memalign(align, size);
  note_alloc(p);
  return p;
}

void* aligned_alloc(std::size_t align, std::size_t size) { return memalign(align, size); }

int posix_memalign(void** out, std::size_t align, std::size_t size) {
  if (align < sizeof(void*) || (align & (align - 1)) != 0) return 22;  // EINVAL
  void* p = memalign(align, size);
  if (!p) return 12;  // ENOMEM
  *out = p;
  return 0;
}

void* valloc(std::size_t size) { return memalign(4096, size); }

}  // extern "C"

namespace sublora::alloc {

std::size_t current_bytes() noexcept { return g_current.load(std::memory_order_relaxed); }
std::size_t peak_bytes() noexcept { return g_peak.load(std::memory_order_relaxed); }
void reset_peak() noexcept { g_peak.store(current_bytes(), std::memory_order_relaxed); }

}  // namespace sublora::alloc

#else

namespace sublora::alloc {

std::size_t current_bytes() noexcept { return 0; }
std::size_t peak_bytes() noexcept { return 0; }
void reset_peak() noexcept {}

}  // namespace sublora::alloc

#endif
