#pragma once

// On-disk index format.
//
//   magic        8 bytes  "GSANSS01"
//   header       u32 D, u32 m, u32 N_sub, u32 backend tag, u32 section count
//   sections     u32 kind, u64 byte length, payload
//
// All integers and doubles are little-endian. The bases section holds
// N_sub * D * m doubles (each basis column-major, subspaces in id order).

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gsanss/anss.hpp"
#include "gsanss/baselines.hpp"
#include "gsanss/bytes.hpp"

namespace gsanss {

inline constexpr char kIndexMagic[8] = {'G', 'S', 'A', 'N', 'S', 'S', '0', '1'};

enum class IndexTag : std::uint32_t {
  kApkExact = 1,
  kApkHash = 2,
  kBhz = 3,
  kGlh = 4,
};

enum class SectionKind : std::uint32_t {
  kBases = 1,
  kLabels = 2,
  kHashParams = 3,
  kHyperplanes = 4,
  kHashBuckets = 5,
  kGlhParams = 6,
  kGlhVectors = 7,
  kGlhBuckets = 8,
};

/// A database plus whichever search structure was built over it.
struct StoredIndex {
  IndexTag tag = IndexTag::kApkExact;
  std::shared_ptr<const SubspaceDB> db;
  std::vector<std::string> labels;  // one per subspace, id order
  std::shared_ptr<const AnssIndex> anss;
  std::shared_ptr<const LiftedDb> lifted;
  std::shared_ptr<const GlhIndex> glh;
};

Bytes serialize_index(const StoredIndex& index);
/// Throws kFormatError on any structural problem.
StoredIndex deserialize_index(std::span<const std::uint8_t> bytes);

void save_index(const std::string& path, const StoredIndex& index);
StoredIndex load_index(const std::string& path);

std::string index_tag_name(IndexTag tag);

}  // namespace gsanss
