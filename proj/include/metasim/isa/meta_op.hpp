#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "metasim/common.hpp"

namespace metasim {

/// CREATE ClientID, TagID, Metadata
struct CreateOp {
  ClientId client;
  TagId tag;
  std::vector<std::uint8_t> metadata;
  friend bool operator==(const CreateOp&, const CreateOp&) = default;
};

/// (UN)MAP TagID, start_addr, size. UNMAP is a MAP with tag 0.
struct MapOp {
  TagId tag;
  Addr vstart = 0;
  std::uint64_t size = 0;
  friend bool operator==(const MapOp&, const MapOp&) = default;
};

/// (UN)MAP2D TagID, start_addr, lenX, sizeX, sizeY:
/// `len_x` bytes per row, row pitch `size_x`, `size_y` rows.
struct Map2DOp {
  TagId tag;
  Addr vstart = 0;
  std::uint64_t len_x = 0;
  std::uint64_t size_x = 0;
  std::uint64_t size_y = 0;
  friend bool operator==(const Map2DOp&, const Map2DOp&) = default;
};

/// (UN)MAP3D TagID, start_addr, lenX, lenY, sizeX, sizeY, sizeZ:
/// `size_z` planes of pitch size_y*size_x; in each plane the first `len_y`
/// rows of pitch `size_x` contribute `len_x` bytes.
struct Map3DOp {
  TagId tag;
  Addr vstart = 0;
  std::uint64_t len_x = 0;
  std::uint64_t len_y = 0;
  std::uint64_t size_x = 0;
  std::uint64_t size_y = 0;
  std::uint64_t size_z = 0;
  friend bool operator==(const Map3DOp&, const Map3DOp&) = default;
};

using MetaOp = std::variant<CreateOp, MapOp, Map2DOp, Map3DOp>;

struct VRange {
  Addr start = 0;
  std::uint64_t len = 0;
  friend bool operator==(const VRange&, const VRange&) = default;
};

inline bool is_map(const MetaOp& op) { return !std::holds_alternative<CreateOp>(op); }

inline TagId op_tag(const MetaOp& op) {
  return std::visit([](const auto& o) { return o.tag; }, op);
}

/// Flattens a MAP-family operator into the 1D virtual ranges it tags.
inline std::vector<VRange> decompose(const MetaOp& op) {
  std::vector<VRange> out;
  if (const auto* m = std::get_if<MapOp>(&op)) {
    if (m->size) out.push_back({m->vstart, m->size});
  } else if (const auto* m2 = std::get_if<Map2DOp>(&op)) {
    if (m2->len_x)
      for (std::uint64_t r = 0; r < m2->size_y; ++r) out.push_back({m2->vstart + r * m2->size_x, m2->len_x});
  } else if (const auto* m3 = std::get_if<Map3DOp>(&op)) {
    if (m3->len_x)
      for (std::uint64_t q = 0; q < m3->size_z; ++q)
        for (std::uint64_t r = 0; r < m3->len_y; ++r)
          out.push_back({m3->vstart + q * m3->size_y * m3->size_x + r * m3->size_x, m3->len_x});
  }
  return out;
}

}  // namespace metasim
