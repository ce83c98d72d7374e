#pragma once

#include <string_view>

#include "braidauth/braid.hpp"
#include "braidauth/sampling.hpp"

namespace braidauth::test {

inline BraidWord w(std::string_view text, int n) { return parse_word(text, n); }
inline CanonicalForm nf(std::string_view text, int n) { return normalize(parse_word(text, n)); }

inline CanonicalForm random_braid(int n, int len, CoinStream& rng) {
  std::vector<int> gens;
  for (int i = 1; i < n; ++i) gens.push_back(i);
  return normalize(sample_reduced_word(n, gens, len, rng));
}

}  // namespace braidauth::test
