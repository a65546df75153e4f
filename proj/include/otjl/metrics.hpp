#pragma once

#include <algorithm>
#include <span>
#include <tuple>
#include <vector>

#include "otjl/concepts.hpp"
#include "otjl/error.hpp"

namespace otjl {

struct ChunkScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t gold = 0;
};

inline ChunkScores scores_from_counts(std::size_t correct, std::size_t predicted, std::size_t gold) {
  ChunkScores s{0, 0, 0, correct, predicted, gold};
  if (predicted == 0 && gold == 0) {
    s.precision = s.recall = s.f1 = 100.0;
    return s;
  }
  s.precision = predicted ? 100.0 * static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  s.recall = gold ? 100.0 * static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

// Number of chunks in `pred` matching a chunk of `gold` on exact span and type.
inline std::size_t count_correct(std::span<const Concept> gold, std::span<const Concept> pred) {
  using Key = std::tuple<std::size_t, std::size_t, std::size_t>;
  std::vector<Key> g, p;
  for (const auto& c : gold) g.emplace_back(c.span.begin, c.span.end, c.type.index());
  for (const auto& c : pred) p.emplace_back(c.span.begin, c.span.end, c.type.index());
  std::sort(g.begin(), g.end());
  std::sort(p.begin(), p.end());
  std::vector<Key> both;
  std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(both));
  return both.size();
}

// conlleval-style corpus scores: a chunk is correct only if both its span and
// its type match. Percentages; an empty-vs-empty corpus scores 100.
inline ChunkScores chunk_prf(std::span<const std::vector<Concept>> gold,
                             std::span<const std::vector<Concept>> pred) {
  if (gold.size() != pred.size()) throw ContractViolation("chunk_prf: corpora not aligned");
  std::size_t correct = 0, n_pred = 0, n_gold = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    correct += count_correct(gold[i], pred[i]);
    n_pred += pred[i].size();
    n_gold += gold[i].size();
  }
  return scores_from_counts(correct, n_pred, n_gold);
}

inline ChunkScores chunk_prf(std::span<const TaggedUtterance> gold, std::span<const std::vector<Concept>> pred) {
  std::vector<std::vector<Concept>> g;
  g.reserve(gold.size());
  for (const auto& u : gold) g.push_back(u.concepts());
  return chunk_prf(g, pred);
}

}  // namespace otjl
