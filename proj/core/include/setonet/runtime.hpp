#pragma once

namespace setonet {

// Keeps freed heap memory in the process instead of returning it to the OS.
// Training allocates the same large tape buffers every step, and fresh pages
// from mmap cost more than the arithmetic on them. Process-wide and
// idempotent; a no-op outside glibc.
void retain_heap_memory();

}  // namespace setonet
