#include "gsanss/index_file.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <utility>

#include "gsanss/error.hpp"

namespace gsanss {
namespace {

struct Section {
  SectionKind kind;
  Bytes payload;
};

Bytes bases_section(const SubspaceDB& db) {
  ByteWriter w;
  for (const Subspace& s : db) w.f64s(s.basis().data());
  return w.take();
}

Bytes labels_section(const std::vector<std::string>& labels) {
  ByteWriter w;
  for (const std::string& l : labels) w.str(l);
  return w.take();
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffULL) throw Error(Errc::kFormatError, std::string(what) + " exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string index_tag_name(IndexTag tag) {
  switch (tag) {
    case IndexTag::kApkExact: return "apk/exact";
    case IndexTag::kApkHash: return "apk/hash";
    case IndexTag::kBhz: return "bhz";
    case IndexTag::kGlh: return "glh";
  }
  return "unknown";
}

Bytes serialize_index(const StoredIndex& index) {
  if (!index.db) throw Error(Errc::kInvalidParams, "index without database");
  const SubspaceDB& db = *index.db;
  if (index.labels.size() != db.size()) {
    throw Error(Errc::kInvalidParams, "one label per subspace required");
  }
  std::vector<Section> sections;
  sections.push_back({SectionKind::kBases, bases_section(db)});
  sections.push_back({SectionKind::kLabels, labels_section(index.labels)});
  switch (index.tag) {
    case IndexTag::kApkExact:
      if (!index.anss || index.anss->backend().backend() != BackendKind::kExact) {
        throw Error(Errc::kInvalidParams, "apk/exact index without exact backend");
      }
      break;
    case IndexTag::kApkHash: {
      const auto* hash = index.anss ? dynamic_cast<const HashIndex*>(&index.anss->backend()) : nullptr;
      if (hash == nullptr) throw Error(Errc::kInvalidParams, "apk/hash index without hash backend");
      sections.push_back({SectionKind::kHashParams, HashIndex::serialize_params(hash->params())});
      sections.push_back({SectionKind::kHyperplanes, hash->serialize_hyperplanes()});
      sections.push_back({SectionKind::kHashBuckets, hash->serialize_buckets()});
      break;
    }
    case IndexTag::kBhz:
      break;
    case IndexTag::kGlh:
      if (!index.glh) throw Error(Errc::kInvalidParams, "glh index without GLH structure");
      sections.push_back({SectionKind::kGlhParams, index.glh->serialize_params()});
      sections.push_back({SectionKind::kGlhVectors, index.glh->serialize_vectors()});
      sections.push_back({SectionKind::kGlhBuckets, index.glh->serialize_buckets()});
      break;
  }

  ByteWriter w;
  w.raw({reinterpret_cast<const std::uint8_t*>(kIndexMagic), sizeof(kIndexMagic)});
  w.u32(checked_u32(db.dim(), "D"));
  w.u32(checked_u32(db.m(), "m"));
  w.u32(checked_u32(db.size(), "N_sub"));
  w.u32(static_cast<std::uint32_t>(index.tag));
  w.u32(checked_u32(sections.size(), "section count"));
  for (const Section& s : sections) {
    w.u32(static_cast<std::uint32_t>(s.kind));
    w.u64(s.payload.size());
    w.raw(s.payload);
  }
  return w.take();
}

StoredIndex deserialize_index(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.raw(sizeof(kIndexMagic));
  if (!std::equal(magic.begin(), magic.end(), reinterpret_cast<const std::uint8_t*>(kIndexMagic))) {
    throw Error(Errc::kFormatError, "bad magic");
  }
  const std::size_t dim = r.u32();
  const std::size_t m = r.u32();
  const std::size_t nsub = r.u32();
  const std::uint32_t tag_raw = r.u32();
  if (tag_raw < 1 || tag_raw > 4) throw Error(Errc::kFormatError, "unknown backend tag");
  const auto tag = static_cast<IndexTag>(tag_raw);
  const std::uint32_t count = r.u32();
  if (dim == 0 || m == 0 || m > dim || nsub == 0) {
    throw Error(Errc::kFormatError, "invalid header dimensions");
  }

  std::vector<std::pair<SectionKind, std::span<const std::uint8_t>>> sections;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto kind = static_cast<SectionKind>(r.u32());
    const std::uint64_t len = r.u64();
    if (len > r.remaining()) throw Error(Errc::kFormatError, "section length exceeds file");
    sections.emplace_back(kind, r.raw(static_cast<std::size_t>(len)));
  }
  r.expect_done("index file");

  std::vector<SectionKind> expected = {SectionKind::kBases, SectionKind::kLabels};
  if (tag == IndexTag::kApkHash) {
    expected.insert(expected.end(),
                    {SectionKind::kHashParams, SectionKind::kHyperplanes, SectionKind::kHashBuckets});
  } else if (tag == IndexTag::kGlh) {
    expected.insert(expected.end(),
                    {SectionKind::kGlhParams, SectionKind::kGlhVectors, SectionKind::kGlhBuckets});
  }
  if (sections.size() != expected.size()) throw Error(Errc::kFormatError, "unexpected section count");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (sections[i].first != expected[i]) throw Error(Errc::kFormatError, "unexpected section order");
  }

  const auto bases = sections[0].second;
  if (bases.size() != nsub * dim * m * 8) {
    throw Error(Errc::kFormatError, "bases section has " + std::to_string(bases.size()) +
                                        " bytes, expected " + std::to_string(nsub * dim * m * 8));
  }
  ByteReader br(bases);
  std::vector<Subspace> subspaces;
  subspaces.reserve(nsub);
  for (std::size_t i = 0; i < nsub; ++i) {
    std::vector<double> data(dim * m);
    for (double& x : data) x = br.f64();
    try {
      subspaces.emplace_back(static_cast<SubspaceId>(i + 1), Matrix(dim, m, std::move(data)));
    } catch (const Error& e) {
      throw Error(Errc::kFormatError, std::string("stored basis invalid: ") + e.what());
    }
  }
  StoredIndex out;
  out.tag = tag;
  out.db = std::make_shared<const SubspaceDB>(dim, m, std::move(subspaces));

  ByteReader lr(sections[1].second);
  for (std::size_t i = 0; i < nsub; ++i) out.labels.push_back(lr.str());
  lr.expect_done("labels");

  switch (tag) {
    case IndexTag::kApkExact:
      out.anss = std::make_shared<const AnssIndex>(out.db, build_exact(basis_records(*out.db)));
      break;
    case IndexTag::kApkHash: {
      try {
        auto hash = HashIndex::restore(basis_records(*out.db), sections[2].second,
                                       sections[3].second, sections[4].second);
        out.anss = std::make_shared<const AnssIndex>(out.db, std::move(hash));
      } catch (const Error& e) {
        if (e.code() == Errc::kFormatError) throw;
        throw Error(Errc::kFormatError, e.what());
      }
      break;
    }
    case IndexTag::kBhz:
      out.lifted = std::make_shared<const LiftedDb>(bhz_lift_database(*out.db));
      break;
    case IndexTag::kGlh:
      out.glh = GlhIndex::restore(out.db, sections[2].second, sections[3].second,
                                  sections[4].second);
      break;
  }
  return out;
}

void save_index(const std::string& path, const StoredIndex& index) {
  const Bytes bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIoError, "write failed for " + path);
}

StoredIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIoError, "cannot open " + path);
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

}  // namespace gsanss
