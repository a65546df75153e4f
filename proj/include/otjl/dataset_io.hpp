#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otjl/concepts.hpp"
#include "otjl/error.hpp"
#include "otjl/text.hpp"

namespace otjl {

// CoNLL-style two-column blocks: token<TAB>tag, one blank line after each
// utterance.
inline void write_conll(std::ostream& out, const std::vector<TaggedUtterance>& data) {
  for (const auto& u : data) {
    for (std::size_t i = 0; i < u.tokens.size(); ++i) out << u.tokens[i] << '\t' << u.tags[i].str() << '\n';
    out << '\n';
  }
}

inline std::vector<TaggedUtterance> read_conll(std::istream& in, const std::string& name,
                                               Provenance provenance = Provenance::generated) {
  std::vector<TaggedUtterance> out;
  TaggedUtterance cur;
  cur.provenance = provenance;
  std::size_t block_start = 1;
  auto flush = [&](std::size_t lineno) {
    if (cur.tokens.empty()) return;
    if (!is_legal_bio(cur.tags))
      throw DataError(located(name, block_start, "illegal BIO sequence in utterance ending at line " +
                                                     std::to_string(lineno)));
    out.push_back(std::move(cur));
    cur = TaggedUtterance{};
    cur.provenance = provenance;
  };
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush(lineno);
      block_start = lineno + 1;
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 2 || cols[0].empty())
      throw DataError(located(name, lineno, "expected token<TAB>tag"));
    try {
      cur.tags.push_back(Tag::parse(cols[1]));
    } catch (const DataError& e) {
      throw DataError(located(name, lineno, e.what()));
    }
    cur.tokens.push_back(cols[0]);
  }
  flush(lineno);
  return out;
}

inline void write_conll_file(const std::filesystem::path& path, const std::vector<TaggedUtterance>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_conll(out, data);
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::vector<TaggedUtterance> read_conll_file(const std::filesystem::path& path,
                                                    Provenance provenance = Provenance::generated) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read dataset " + path.string());
  return read_conll(in, path.string(), provenance);
}

// Provenance sidecar: index, provenance, pattern id, pattern split,
// comma-separated mention ids, comma-separated mention splits.
inline void write_provenance(std::ostream& out, const std::vector<TaggedUtterance>& data) {
  out << "# index\tprovenance\tpattern\tpattern_split\tmentions\tmention_splits\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& o = data[i].origin;
    std::vector<std::string> splits;
    for (auto s : o.mention_splits) splits.emplace_back(name_of(s));
    out << i << '\t' << name_of(data[i].provenance) << '\t' << (o.pattern_id.empty() ? "-" : o.pattern_id)
        << '\t' << name_of(o.pattern_split) << '\t' << (o.mention_ids.empty() ? "-" : join(o.mention_ids, ","))
        << '\t' << (splits.empty() ? "-" : join(splits, ",")) << '\n';
  }
}

inline void read_provenance(std::istream& in, const std::string& name, std::vector<TaggedUtterance>& data) {
  std::string line;
  std::size_t lineno = 0, count = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() != 6) throw DataError(located(name, lineno, "expected 6 provenance columns"));
    std::size_t idx = 0;
    try {
      idx = std::stoul(cols[0]);
    } catch (const std::exception&) {
      throw DataError(located(name, lineno, "bad index"));
    }
    if (idx != count || idx >= data.size())
      throw DataError(located(name, lineno, "provenance index out of sequence"));
    auto& u = data[idx];
    try {
      u.provenance = parse_provenance(cols[1]);
      u.origin.pattern_id = cols[2] == "-" ? "" : cols[2];
      u.origin.pattern_split = parse_split(cols[3]);
      u.origin.mention_ids = cols[4] == "-" ? std::vector<std::string>{} : split(cols[4], ',');
      u.origin.mention_splits.clear();
      if (cols[5] != "-")
        for (const auto& s : split(cols[5], ',')) u.origin.mention_splits.push_back(parse_split(s));
    } catch (const DataError& e) {
      throw DataError(located(name, lineno, e.what()));
    }
    ++count;
  }
  if (count != data.size()) throw DataError(name + ": provenance covers " + std::to_string(count) +
                                            " of " + std::to_string(data.size()) + " utterances");
}

inline std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot hash " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return to_hex(fnv1a(ss.str()));
}

}  // namespace otjl
