#pragma once

#include <cstdint>
#include <span>
#include <string_view>

// Integer dynamic-programming kernels behind the string metrics.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds,
// an AVX2 implementation that sweeps the DP matrix along anti-diagonals
// eight cells at a time. The variant is chosen once at startup from CPUID
// and can be pinned with TYPESCORE_KERNELS=scalar|avx2 or force_isa().
namespace typescore::kernels {

using Sequence = std::span<const char32_t>;

// Linear-gap local alignment scoring. match > 0, mismatch <= 0, gap <= 0.
struct AlignmentParams {
  std::int32_t match = 2;
  std::int32_t mismatch = -1;
  std::int32_t gap = -1;

  // Throws PreconditionError when the sign constraints are violated.
  void validate() const;
  friend bool operator==(const AlignmentParams&, const AlignmentParams&) = default;
};

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  std::int32_t (*levenshtein)(Sequence a, Sequence b);
  std::int32_t (*lcs_length)(Sequence a, Sequence b);
  std::int32_t (*local_alignment)(Sequence a, Sequence b, const AlignmentParams& params);
};

const KernelTable& scalar_table();

// Null when the build has no AVX2 kernels or the CPU lacks AVX2.
const KernelTable* avx2_table();

// Currently selected table.
const KernelTable& active();
Isa active_isa();

// Returns false (and changes nothing) if `isa` is unavailable here.
bool force_isa(Isa isa);

inline std::int32_t levenshtein(Sequence a, Sequence b) { return active().levenshtein(a, b); }
inline std::int32_t lcs_length(Sequence a, Sequence b) { return active().lcs_length(a, b); }
inline std::int32_t local_alignment(Sequence a, Sequence b, const AlignmentParams& p) {
  return active().local_alignment(a, b, p);
}

namespace scalar {
std::int32_t levenshtein(Sequence a, Sequence b);
std::int32_t lcs_length(Sequence a, Sequence b);
std::int32_t local_alignment(Sequence a, Sequence b, const AlignmentParams& params);
}  // namespace scalar

#if defined(TYPESCORE_HAVE_AVX2)
namespace avx2 {
std::int32_t levenshtein(Sequence a, Sequence b);
std::int32_t lcs_length(Sequence a, Sequence b);
std::int32_t local_alignment(Sequence a, Sequence b, const AlignmentParams& params);
}  // namespace avx2
#endif

}  // namespace typescore::kernels
