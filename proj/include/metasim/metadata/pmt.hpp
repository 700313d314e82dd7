#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "metasim/common.hpp"

namespace metasim {

/// Private Metadata Table: 256 opaque slots indexed by tag, owned by one client.
class Pmt {
 public:
  static constexpr std::size_t kSlots = 256;

  Pmt(ClientId owner, std::size_t entry_bytes) : owner_(owner), entry_bytes_(entry_bytes) {
    if (entry_bytes == 0) throw ConfigError("pmt_entry_bytes must be >= 1");
    data_.assign(kSlots * entry_bytes, 0);
  }

  void write(TagId tag, std::span<const std::uint8_t> metadata) {
    if (tag.untagged()) throw MetadataError("tag 0 is reserved for untagged memory");
    if (metadata.size() > entry_bytes_)
      throw MetadataError("metadata of " + std::to_string(metadata.size()) +
                          " bytes exceeds PMT entry size " + std::to_string(entry_bytes_));
    auto slot = mutable_slot(tag);
    std::fill(slot.begin(), slot.end(), std::uint8_t{0});
    std::copy(metadata.begin(), metadata.end(), slot.begin());
  }

  std::span<const std::uint8_t> read(TagId tag) const {
    if (tag.untagged()) throw MetadataError("tag 0 is reserved for untagged memory");
    return {data_.data() + tag.value * entry_bytes_, entry_bytes_};
  }

  void clear() { std::fill(data_.begin(), data_.end(), std::uint8_t{0}); }

  ClientId owner() const { return owner_; }
  std::size_t entry_bytes() const { return entry_bytes_; }

 private:
  std::span<std::uint8_t> mutable_slot(TagId tag) {
    return {data_.data() + tag.value * entry_bytes_, entry_bytes_};
  }

  ClientId owner_;
  std::size_t entry_bytes_;
  std::vector<std::uint8_t> data_;
};

}  // namespace metasim
