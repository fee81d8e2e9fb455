#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "wzk/dist/encoding.hpp"
#include "wzk/dist/rational.hpp"
#include "wzk/dist/rng.hpp"
#include "wzk/protocol/spec.hpp"

namespace wzk {

// Synthetic protocol whose error profile is set exactly. The verifier
// reads the CRS (or the concatenated public coins) as an integer c:
//   c <  eps_c * 2^m                       completeness-failure region
//   eps_c * 2^m <= c < (eps_c+eps_s) * 2^m  free-accept region for x not in L
struct DialProfile {
  Probability eps_c;
  Probability eps_s;
  Probability eps_z;
  std::size_t m = 10;      // CRS bits (for the public-coin dial: total coin bits)
  std::size_t ell_z = 4;   // simulator corruption bits
  std::uint64_t tag_seed = 0x7a11ab1e;
  std::size_t tag_bits = 8;
};

namespace detail {

inline std::uint64_t grid_count(const Probability& p, std::size_t bits, const char* what) {
  Rational scaled = p.value() * Rational(mpz_class(1) << static_cast<unsigned long>(bits));
  if (scaled.get_den() != 1) {
    throw GridError(std::string(what) + " = " + p.str() + " is not a multiple of 2^-" +
                    std::to_string(bits));
  }
  return scaled.get_num().get_ui();
}

struct DialRegions {
  std::uint64_t fail_end = 0;    // eps_c * 2^m
  std::uint64_t accept_end = 0;  // (eps_c + eps_s) * 2^m
  std::uint64_t corrupt = 0;     // eps_z * 2^ell_z

  bool verdict(bool member, std::uint64_t c, bool tags_ok) const {
    if (member) return tags_ok && c >= fail_end;
    return c >= fail_end && c < accept_end;
  }
};

inline DialRegions dial_regions(const DialProfile& p, std::size_t coin_bits) {
  if (coin_bits > 62 || p.ell_z > 62) throw GridError("dial coin lengths must be at most 62 bits");
  if (p.tag_bits == 0 || p.tag_bits > 16) throw GridError("dial tag length must be in [1, 16]");
  if (p.eps_c.value() + p.eps_s.value() > 1) throw GridError("eps_c + eps_s exceeds 1");
  DialRegions r;
  r.fail_end = grid_count(p.eps_c, coin_bits, "eps_c");
  r.accept_end = r.fail_end + grid_count(p.eps_s, coin_bits, "eps_s");
  r.corrupt = grid_count(p.eps_z, p.ell_z, "eps_z");
  return r;
}

inline BitString dial_tag(std::uint64_t seed, const BitString& x, std::size_t round,
                          const BitString& coins, std::size_t bits) {
  Encoder enc;
  enc.bits(x).uint(round).bits(coins);
  std::uint64_t h = mix64(seed ^ fnv1a(enc.peek()));
  return BitString::from_uint(h >> (64 - bits), bits);
}

}  // namespace detail

inline bool dial_member(const BitString& x) { return !x.empty() && x.get(0); }

// Yes/no instances used throughout: first bit set or clear.
inline BitString dial_yes_instance() { return BitString::from_string("1000"); }
inline BitString dial_no_instance() { return BitString::from_string("0000"); }

inline NizkSpec make_dial_nizk(const DialProfile& profile) {
  const auto regions = detail::dial_regions(profile, profile.m);
  NizkSpec spec;
  spec.name = "dial-nizk";
  spec.n = 4;
  spec.crs_bits = profile.m;
  spec.proof_bits = profile.tag_bits;
  spec.sim_coins = std::uint64_t{1} << (profile.m + profile.ell_z);
  spec.membership = dial_member;
  spec.relation = [](const BitString& x, const BitString& w) { return dial_member(x) && w == x; };
  spec.prover = [profile](const BitString& x, const BitString&, const BitString& r) {
    return detail::dial_tag(profile.tag_seed, x, 1, r, profile.tag_bits);
  };
  spec.verifier = [profile, regions](const BitString& x, const BitString& r, const BitString& pi,
                                     std::uint64_t) {
    const bool tags_ok = pi == detail::dial_tag(profile.tag_seed, x, 1, r, profile.tag_bits);
    return regions.verdict(dial_member(x), r.to_uint(), tags_ok);
  };
  spec.simulator = [profile, regions](const BitString& x, std::uint64_t rho) {
    const std::uint64_t rho_z = rho & ((std::uint64_t{1} << profile.ell_z) - 1);
    auto r = BitString::from_uint(rho >> profile.ell_z, profile.m);
    auto pi = detail::dial_tag(profile.tag_seed, x, 1, r, profile.tag_bits);
    if (rho_z < regions.corrupt) pi = pi.with_flipped(profile.tag_bits - 1);
    return std::make_pair(std::move(r), std::move(pi));
  };
  return spec;
}

// Dial NIZK whose verifier also reads v coins and flips its decision when
// they fall below noise * 2^v.
inline NizkSpec make_dial_nizk_noisy(const DialProfile& profile, const Probability& noise,
                                     std::size_t v) {
  if (v == 0) throw GridError("noisy verifier needs at least one coin bit");
  const std::uint64_t flips = detail::grid_count(noise, v, "verifier noise");
  NizkSpec spec = make_dial_nizk(profile);
  spec.name = "dial-nizk-noisy";
  spec.verifier_coin_bits = v;
  spec.verifier = [base = spec.verifier, flips](const BitString& x, const BitString& r,
                                                const BitString& pi, std::uint64_t sigma) {
    return base(x, r, pi, 0) != (sigma < flips);
  };
  return spec;
}

inline PublicCoinSpec make_dial_pc(const DialProfile& profile, std::size_t k,
                                   std::vector<std::size_t> m_list) {
  if (k == 0 || m_list.size() != k) throw ScheduleError("dial-pc: m_list must have k entries");
  const std::size_t total = std::accumulate(m_list.begin(), m_list.end(), std::size_t{0});
  const auto regions = detail::dial_regions(profile, total);

  PublicCoinSpec spec;
  spec.name = "dial-pc";
  spec.n = 4;
  spec.k = k;
  spec.coin_bits = m_list;
  spec.proof_bits.assign(k, profile.tag_bits);
  spec.sim_coins = std::uint64_t{1} << (total + profile.ell_z);
  spec.membership = dial_member;
  spec.relation = [](const BitString& x, const BitString& w) { return dial_member(x) && w == x; };
  spec.prover = [profile](const BitString& x, const BitString&, const Transcript& prefix,
                          std::uint64_t) {
    return detail::dial_tag(profile.tag_seed, x, prefix.size() / 2 + 1, prefix.coins(),
                            profile.tag_bits);
  };
  spec.verifier = [profile, regions](const BitString& x, const Transcript& t) {
    bool tags_ok = true;
    for (std::size_t j = 1; j < t.size() && tags_ok; j += 2) {
      tags_ok = t[j] == detail::dial_tag(profile.tag_seed, x, j / 2 + 1, t.prefix(j).coins(),
                                         profile.tag_bits);
    }
    return regions.verdict(dial_member(x), t.coins().to_uint(), tags_ok);
  };
  spec.simulator = [profile, regions, m_list, total](const BitString& x, std::uint64_t rho) {
    const std::uint64_t rho_z = rho & ((std::uint64_t{1} << profile.ell_z) - 1);
    const auto coins = BitString::from_uint(rho >> profile.ell_z, total);
    Transcript t;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < m_list.size(); ++i) {
      t.push(coins.slice(offset, m_list[i]));
      offset += m_list[i];
      auto pi = detail::dial_tag(profile.tag_seed, x, i + 1, t.coins(), profile.tag_bits);
      if (i == 0 && rho_z < regions.corrupt) pi = pi.with_flipped(profile.tag_bits - 1);
      t.push(std::move(pi));
    }
    return t;
  };
  return spec;
}

}  // namespace wzk
