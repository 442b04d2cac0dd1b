#pragma once

#include <cstdint>
#include <istream>
#include <ostream>

#include "walkforge/binary_io.hpp"

namespace walkforge {

/// Model kinds stored in the shared "WFNN" checkpoint container.
enum class ModelTag : std::uint16_t {
  BiLstm = 1,
  Lstm = 2,
  Linear = 3,
  Svr = 4,
};

inline constexpr std::uint16_t kCheckpointVersion = 1;

inline void write_checkpoint_header(std::ostream& os, ModelTag tag) {
  binio::write_magic(os, "WFNN");
  binio::write<std::uint16_t>(os, kCheckpointVersion);
  binio::write<std::uint16_t>(os, static_cast<std::uint16_t>(tag));
}

inline ModelTag read_checkpoint_header(std::istream& is) {
  binio::expect_magic(is, "WFNN");
  if (binio::read<std::uint16_t>(is) != kCheckpointVersion) {
    throw Error(Errc::BadArtifact, "unsupported checkpoint version");
  }
  return static_cast<ModelTag>(binio::read<std::uint16_t>(is));
}

}  // namespace walkforge
