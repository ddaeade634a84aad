#include <atomic>
#include <cstdlib>
#include <string_view>

#include "typescore/kernels.hpp"

namespace typescore::kernels {
namespace {

constexpr KernelTable kScalar{Isa::Scalar, &scalar::levenshtein, &scalar::lcs_length,
                              &scalar::local_alignment};

#if defined(TYPESCORE_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::levenshtein, &avx2::lcs_length,
                            &avx2::local_alignment};

bool cpu_has_avx2() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
}
#endif

const KernelTable* detect() {
  const KernelTable* best = &kScalar;
  if (const KernelTable* fast = avx2_table()) best = fast;
  if (const char* env = std::getenv("TYPESCORE_KERNELS")) {
    const std::string_view want(env);
    if (want == "scalar") best = &kScalar;
  }
  return best;
}

std::atomic<const KernelTable*>& selected() {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

const KernelTable* avx2_table() {
#if defined(TYPESCORE_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *selected().load(std::memory_order_acquire); }

Isa active_isa() { return active().isa; }

bool force_isa(Isa isa) {
  const KernelTable* table = isa == Isa::Scalar ? &kScalar : avx2_table();
  if (table == nullptr) return false;
  selected().store(table, std::memory_order_release);
  return true;
}

}  // namespace typescore::kernels
