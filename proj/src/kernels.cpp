#include "precipgen/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "precipgen/errors.hpp"

namespace precipgen::kernels {

#if defined(PRECIPGEN_HAVE_AVX2)
const KernelTable* avx2_table_if_supported();  // defined in kernels_avx2.cpp
#endif

const KernelTable* avx2_kernels_or_null() {
#if defined(PRECIPGEN_HAVE_AVX2)
  return avx2_table_if_supported();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* find_table(std::string_view name) {
  if (name == "scalar") return &scalar_kernels();
  if (name == "avx2") return avx2_kernels_or_null();
  return nullptr;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("PRECIPGEN_KERNELS")) {
    const KernelTable* t = find_table(env);
    if (!t)
      throw ConfigError(std::string("PRECIPGEN_KERNELS names an unknown or unsupported kernel "
                                    "variant: ") +
                        env);
    return t;
  }
  if (const KernelTable* t = avx2_kernels_or_null()) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> s{pick_default()};
  return s;
}

}  // namespace

std::vector<std::string> available_kernels() {
  std::vector<std::string> names{"scalar"};
  if (avx2_kernels_or_null()) names.emplace_back("avx2");
  return names;
}

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

void select(std::string_view name) {
  const KernelTable* t = find_table(name);
  if (!t)
    throw ConfigError("unknown or unsupported kernel variant: " + std::string(name));
  slot().store(t, std::memory_order_relaxed);
}

}  // namespace precipgen::kernels
