#pragma once

// Little-endian primitives shared by the feature cache and model checkpoints.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "walkforge/error.hpp"

namespace walkforge::binio {

static_assert(std::endian::native == std::endian::little,
              "binary artifacts assume a little-endian host");

inline void write_magic(std::ostream& os, const char (&magic)[5]) { os.write(magic, 4); }

inline void expect_magic(std::istream& is, const char (&magic)[5]) {
  std::array<char, 4> got{};
  is.read(got.data(), 4);
  if (!is || std::memcmp(got.data(), magic, 4) != 0) {
    throw Error(Errc::BadArtifact, std::string("expected magic ") + magic);
  }
}

template <typename T>
void write(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error(Errc::BadArtifact, "truncated binary artifact");
  return value;
}

inline void write_doubles(std::ostream& os, std::span<const double> values) {
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(double)));
}

inline void read_doubles(std::istream& is, std::span<double> out) {
  is.read(reinterpret_cast<char*>(out.data()),
          static_cast<std::streamsize>(out.size() * sizeof(double)));
  if (!is) throw Error(Errc::BadArtifact, "truncated binary artifact");
}

inline void write_string(std::ostream& os, const std::string& s) {
  write<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  const auto len = read<std::uint32_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  if (!is) throw Error(Errc::BadArtifact, "truncated binary artifact");
  return s;
}

}  // namespace walkforge::binio
