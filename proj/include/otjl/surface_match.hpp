#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "otjl/concepts.hpp"

namespace otjl {

template <class V>
struct SurfaceMatch {
  Span span;
  V value;
};

// All maximal dictionary hits in `tokens`, longest first and then leftmost,
// keeping only matches that do not overlap an already chosen one. `lookup`
// maps a space-joined surface to an optional value. Results are ordered by
// position.
template <class V, class Lookup>
std::vector<SurfaceMatch<V>> longest_matches(const Tokens& tokens, std::size_t max_len,
                                             Lookup&& lookup) {
  std::vector<SurfaceMatch<V>> candidates;
  const std::size_t n = tokens.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::string key;
    for (std::size_t len = 1; len <= max_len && i + len <= n; ++len) {
      if (len > 1) key += ' ';
      key += tokens[i + len - 1];
      if (std::optional<V> v = lookup(key)) candidates.push_back({{i, i + len}, *v});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
    if (a.span.size() != b.span.size()) return a.span.size() > b.span.size();
    return a.span.begin < b.span.begin;
  });
  std::vector<SurfaceMatch<V>> chosen;
  for (auto& c : candidates) {
    bool clash = std::any_of(chosen.begin(), chosen.end(),
                             [&](const auto& k) { return k.span.overlaps(c.span); });
    if (!clash) chosen.push_back(std::move(c));
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const auto& a, const auto& b) { return a.span.begin < b.span.begin; });
  return chosen;
}

}  // namespace otjl
