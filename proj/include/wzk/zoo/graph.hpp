#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wzk/dist/bitstring.hpp"
#include "wzk/errors.hpp"

namespace wzk {

inline constexpr std::size_t kMaxGraphVertices = 8;

using Permutation = std::vector<std::uint8_t>;

class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : n_(n), rows_(n, 0) {
    if (n > kMaxGraphVertices) {
      throw DomainError("graphs are limited to " + std::to_string(kMaxGraphVertices) + " vertices");
    }
  }

  std::size_t size() const noexcept { return n_; }

  bool has_edge(std::size_t u, std::size_t v) const { return (rows_.at(u) >> v) & 1U; }

  void add_edge(std::size_t u, std::size_t v) {
    if (u == v) throw DomainError("self-loop on vertex " + std::to_string(u));
    if (u >= n_ || v >= n_) throw DomainError("edge endpoint out of range");
    rows_[u] |= static_cast<std::uint8_t>(1U << v);
    rows_[v] |= static_cast<std::uint8_t>(1U << u);
  }

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (auto r : rows_) c += static_cast<std::size_t>(__builtin_popcount(r));
    return c / 2;
  }

  // Edge (u, v) of this graph becomes (perm[u], perm[v]).
  Graph permuted(const Permutation& perm) const {
    Graph out(n_);
    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t v = u + 1; v < n_; ++v) {
        if (has_edge(u, v)) out.add_edge(perm[u], perm[v]);
      }
    }
    return out;
  }

  // Upper triangle, row by row: (0,1), (0,2), ..., (n-2,n-1).
  BitString encode() const {
    BitString out(pair_count(n_));
    std::size_t i = 0;
    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t v = u + 1; v < n_; ++v) out.set(i++, has_edge(u, v));
    }
    return out;
  }

  static Graph decode(const BitString& bits, std::size_t n) {
    if (bits.size() != pair_count(n)) throw DomainError("adjacency length does not match n");
    Graph g(n);
    std::size_t i = 0;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        if (bits.get(i++)) g.add_edge(u, v);
      }
    }
    return g;
  }

  static std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> rows_;
};

inline std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

// Lehmer-code unranking; index 0 is the identity.
inline Permutation unrank_permutation(std::uint64_t index, std::size_t n) {
  Permutation pool(n);
  std::iota(pool.begin(), pool.end(), std::uint8_t{0});
  Permutation out;
  out.reserve(n);
  for (std::size_t i = n; i > 0; --i) {
    const std::uint64_t f = factorial(i - 1);
    const std::size_t pick = static_cast<std::size_t>(index / f);
    index %= f;
    out.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

// (a o b)(v) = a[b[v]]
inline Permutation compose(const Permutation& a, const Permutation& b) {
  Permutation out(b.size());
  for (std::size_t v = 0; v < b.size(); ++v) out[v] = a[b[v]];
  return out;
}

inline std::size_t permutation_field_bits(std::size_t n) {
  std::size_t w = 1;
  while ((std::size_t{1} << w) < n) ++w;
  return w;
}

inline BitString encode_permutation(const Permutation& perm) {
  const std::size_t w = permutation_field_bits(perm.size());
  BitString out;
  for (auto v : perm) out = out.concat(BitString::from_uint(v, w));
  return out;
}

inline std::optional<Permutation> decode_permutation(const BitString& bits, std::size_t n) {
  const std::size_t w = permutation_field_bits(n);
  if (bits.size() != n * w) return std::nullopt;
  Permutation out;
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = bits.slice(i * w, w).to_uint();
    if (v >= n || seen[v]) return std::nullopt;
    seen[v] = true;
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

// Some perm with g0.permuted(perm) == g1, by brute force.
inline std::optional<Permutation> find_isomorphism(const Graph& g0, const Graph& g1) {
  if (g0.size() != g1.size() || g0.edge_count() != g1.edge_count()) return std::nullopt;
  Permutation perm(g0.size());
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  do {
    if (g0.permuted(perm) == g1) return perm;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::nullopt;
}

// Edge-list text: "n <count>", then "e <u> <v>" lines; "--" separates the two
// graphs; lines starting with '#' are comments.
inline std::pair<Graph, Graph> parse_graph_pair(std::istream& in) {
  std::vector<Graph> graphs;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> seen;
  bool expect_header = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line.substr(first));
    std::string tag;
    fields >> tag;
    if (tag == "--") {
      if (expect_header) throw ParseError(lineno, "separator before any graph header");
      if (graphs.size() == 2) throw ParseError(lineno, "more than two graphs");
      expect_header = true;
      continue;
    }
    if (expect_header) {
      long long n = -1;
      if (tag != "n" || !(fields >> n)) throw ParseError(lineno, "expected 'n <vertex-count>'");
      if (n < 2 || n > static_cast<long long>(kMaxGraphVertices)) {
        throw ParseError(lineno, "vertex count must be in [2, " +
                                     std::to_string(kMaxGraphVertices) + "]");
      }
      if (graphs.size() == 2) throw ParseError(lineno, "more than two graphs");
      graphs.emplace_back(static_cast<std::size_t>(n));
      seen.emplace_back();
      expect_header = false;
    } else {
      long long u = -1, v = -1;
      if (tag != "e" || !(fields >> u >> v)) throw ParseError(lineno, "expected 'e <u> <v>'");
      Graph& g = graphs.back();
      if (u < 0 || v < 0 || u >= static_cast<long long>(g.size()) ||
          v >= static_cast<long long>(g.size())) {
        throw ParseError(lineno, "vertex out of range");
      }
      if (u == v) throw ParseError(lineno, "self-loop on vertex " + std::to_string(u));
      const std::pair<std::size_t, std::size_t> key{static_cast<std::size_t>(std::min(u, v)),
                                                    static_cast<std::size_t>(std::max(u, v))};
      auto& s = seen.back();
      if (std::find(s.begin(), s.end(), key) != s.end()) {
        throw ParseError(lineno, "edge " + std::to_string(u) + "-" + std::to_string(v) +
                                     " declared twice");
      }
      s.push_back(key);
      g.add_edge(key.first, key.second);
    }
    std::string extra;
    if (fields >> extra) throw ParseError(lineno, "trailing text '" + extra + "'");
  }
  if (graphs.size() != 2) throw ParseError(lineno, "expected two graphs separated by '--'");
  if (graphs[0].size() != graphs[1].size()) throw ParseError(lineno, "graphs differ in vertex count");
  return {graphs[0], graphs[1]};
}

inline std::pair<Graph, Graph> load_graph_pair(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path);
  return parse_graph_pair(in);
}

inline Graph cycle_graph(std::size_t n) {
  Graph g(n);
  for (std::size_t v = 0; v < n; ++v) g.add_edge(v, (v + 1) % n);
  return g;
}

}  // namespace wzk
