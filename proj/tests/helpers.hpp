#pragma once

#include <cstdint>
#include <vector>

#include "doctest.h"
#include "walkforge/error.hpp"
#include "walkforge/ingest.hpp"

#define CHECK_ERRC(expr, errc)                                   \
  do {                                                           \
    bool caught_ = false;                                        \
    try {                                                        \
      (void)(expr);                                              \
    } catch (const walkforge::Error& e_) {                       \
      caught_ = true;                                            \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());             \
    }                                                            \
    CHECK_MESSAGE(caught_, "expected walkforge::Error: " #expr); \
  } while (0)

namespace testing {

// Series over the default schema: OHLC all equal to `close`, aux columns 1.
inline walkforge::ingest::RawSeries flat_series(const std::vector<std::int64_t>& dates,
                                                const std::vector<double>& close) {
  walkforge::ingest::RawSeries s;
  s.dates = dates;
  s.names = walkforge::ingest::default_schema();
  s.columns.assign(s.names.size(), std::vector<double>(dates.size(), 1.0));
  for (std::size_t j = 0; j < 4; ++j) s.columns[j] = close;
  return s;
}

inline std::vector<std::int64_t> consecutive_dates(std::size_t n, std::int64_t start = 15706) {
  std::vector<std::int64_t> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = start + static_cast<std::int64_t>(i);
  return d;
}

}  // namespace testing
