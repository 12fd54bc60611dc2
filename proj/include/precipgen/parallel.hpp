#pragma once

#include <cstddef>
#include <functional>

namespace precipgen {

// Reductions are split over a fixed number of virtual partitions whose
// boundaries depend only on the item count, never on the worker count.
// Per-partition results are combined in partition order, so any thread count
// produces bitwise-identical output.
inline constexpr int kReductionPartitions = 32;

// Thread budget: PRECIPGEN_THREADS env override, else hardware concurrency.
int default_thread_count();

struct PartitionRange {
  int index;
  std::size_t begin;
  std::size_t end;
};

// Invokes fn once per partition of [0, n) using up to `threads` workers.
// fn must touch only state owned by its partition.
void for_each_partition(std::size_t n, int threads,
                        const std::function<void(const PartitionRange&)>& fn);

}  // namespace precipgen
