#pragma once

#include <optional>
#include <utility>

#include "wzk/protocol/spec.hpp"
#include "wzk/zoo/graph.hpp"

namespace wzk {

// Instance bits: 4-bit vertex count, then both upper triangles.
inline BitString encode_graph_pair(const Graph& g0, const Graph& g1) {
  return BitString::from_uint(g0.size(), 4).concat(g0.encode()).concat(g1.encode());
}

inline std::pair<Graph, Graph> decode_graph_pair(const BitString& x) {
  if (x.size() < 4) throw DomainError("graph instance too short");
  const std::size_t n = x.slice(0, 4).to_uint();
  const std::size_t e = Graph::pair_count(n);
  if (x.size() != 4 + 2 * e) throw DomainError("graph instance length does not match n");
  return {Graph::decode(x.slice(4, e), n), Graph::decode(x.slice(4 + e, e), n)};
}

inline BitString encode_witness(const Permutation& phi) { return encode_permutation(phi); }

// Three-message sigma protocol with an empty first verifier message:
// pi_1 = H = sigma(g1), r_2 = b, pi_2 maps g_b onto H.
inline PublicCoinSpec make_graph_iso(const Graph& g0, const Graph& g1) {
  if (g0.size() != g1.size()) throw DomainError("graph pair has mismatched vertex counts");
  const std::size_t n = g0.size();
  if (n < 2 || n > kMaxGraphVertices) {
    throw DomainError("graph isomorphism needs between 2 and " +
                      std::to_string(kMaxGraphVertices) + " vertices");
  }
  const std::uint64_t perms = factorial(n);

  PublicCoinSpec spec;
  spec.name = "graph-iso";
  spec.n = encode_graph_pair(g0, g1).size();
  spec.k = 2;
  spec.coin_bits = {0, 1};
  spec.proof_bits = {Graph::pair_count(n), n * permutation_field_bits(n)};
  spec.sim_coins = 2 * perms;
  spec.prover_coins = perms;
  spec.membership = [](const BitString& x) {
    auto [a, b] = decode_graph_pair(x);
    return find_isomorphism(a, b).has_value();
  };
  spec.relation = [](const BitString& x, const BitString& w) {
    auto [a, b] = decode_graph_pair(x);
    auto phi = decode_permutation(w, a.size());
    return phi && a.permuted(*phi) == b;
  };
  spec.prover = [](const BitString& x, const BitString& w, const Transcript& prefix,
                   std::uint64_t coin) {
    auto [a, b] = decode_graph_pair(x);
    const auto sigma = unrank_permutation(coin, a.size());
    if (prefix.size() == 1) return b.permuted(sigma).encode();
    const bool challenge = prefix[2].get(0);
    if (challenge) return encode_permutation(sigma);
    auto phi = decode_permutation(w, a.size());
    if (!phi) throw RelationError("graph-iso: malformed witness");
    return encode_permutation(compose(sigma, *phi));
  };
  spec.verifier = [](const BitString& x, const Transcript& t) {
    auto [a, b] = decode_graph_pair(x);
    auto perm = decode_permutation(t[3], a.size());
    if (!perm) return false;
    const Graph& gb = t[2].get(0) ? b : a;
    return gb.permuted(*perm).encode() == t[1];
  };
  spec.simulator = [perms](const BitString& x, std::uint64_t rho) {
    auto [a, b] = decode_graph_pair(x);
    const bool challenge = rho / perms == 1;
    const auto tau = unrank_permutation(rho % perms, a.size());
    const Graph& gb = challenge ? b : a;
    return Transcript({BitString(), gb.permuted(tau).encode(), BitString::from_uint(challenge, 1),
                       encode_permutation(tau)});
  };
  spec.analytic_soundness = [](const BitString& x) -> std::optional<Probability> {
    auto [a, b] = decode_graph_pair(x);
    if (find_isomorphism(a, b)) return std::nullopt;
    return Probability::ratio(1, 2);
  };
  return spec;
}

// C_4 together with the paw (triangle plus pendant edge): both have 4 edges.
inline std::pair<Graph, Graph> non_isomorphic_c4_pair() {
  Graph paw(4);
  paw.add_edge(0, 1);
  paw.add_edge(1, 2);
  paw.add_edge(2, 0);
  paw.add_edge(2, 3);
  return {cycle_graph(4), paw};
}

inline std::pair<Graph, Graph> isomorphic_c4_pair() {
  return {cycle_graph(4), cycle_graph(4).permuted({2, 0, 3, 1})};
}

}  // namespace wzk
