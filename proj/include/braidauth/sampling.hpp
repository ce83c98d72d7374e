#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "braidauth/braid.hpp"
#include "braidauth/error.hpp"
#include "braidauth/hash.hpp"

namespace braidauth {

// Deterministic random stream: SHA-256(domain | seed | counter) blocks cut
// into big-endian 64-bit words. Platform-independent, so a seed replays an
// experiment bit for bit. Satisfies UniformRandomBitGenerator.
class CoinStream {
 public:
  using result_type = std::uint64_t;

  explicit CoinStream(std::uint64_t seed, std::string_view domain = "braidauth")
      : seed_(seed), domain_(domain) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (used_ == kWordsPerBlock) refill();
    const std::size_t at = used_++ * 8;
    result_type v = 0;
    for (std::size_t k = 0; k < 8; ++k) v = v << 8 | block_.bytes[at + k];
    return v;
  }

  // Uniform integer in [0, bound), by rejection so no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw InvalidParameter("empty range");
    const std::uint64_t limit = max() - max() % bound;
    for (;;) {
      const std::uint64_t v = (*this)();
      if (v < limit) return v % bound;
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static constexpr std::size_t kWordsPerBlock = Digest::kSize / 8;

  void refill() {
    Bytes input(domain_.begin(), domain_.end());
    input.push_back(0);
    detail::put_be(input, seed_, 8);
    detail::put_be(input, counter_++, 8);
    block_ = sha256(input);
    used_ = 0;
  }

  std::uint64_t seed_;
  std::string domain_;
  std::uint64_t counter_ = 0;
  Digest block_{};
  std::size_t used_ = kWordsPerBlock;
};

// Lower: sigma_1 .. sigma_{n/2-1}. Upper: sigma_{n/2+1} .. sigma_{n-1}.
// The two generator sets commute elementwise; sigma_{n/2} is in neither.
enum class SubgroupSide { lower, upper };

inline const char* to_string(SubgroupSide side) { return side == SubgroupSide::lower ? "lower" : "upper"; }

struct SamplerConfig {
  int n = 16;
  int word_length = 128;
  int min_canonical_length = 8;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 4 || n % 2 != 0) throw InvalidParameter("n must be even and >= 4, got " + std::to_string(n));
    check_strand_count(n);
    if (word_length < 0) throw InvalidParameter("word length must be non-negative");
    if (min_canonical_length < 1) throw InvalidParameter("min canonical length must be positive");
    if (word_length < min_canonical_length)
      throw InvalidParameter("word length must be >= min canonical length");
  }
};

inline std::string to_string(const SamplerConfig& cfg) {
  return "n=" + std::to_string(cfg.n) + " L=" + std::to_string(cfg.word_length) +
         " minlen=" + std::to_string(cfg.min_canonical_length) + " seed=" + std::to_string(cfg.seed);
}

// Generator indices a side may use.
inline std::vector<int> subgroup_generators(SubgroupSide side, int n) {
  if (n % 2 != 0) throw InvalidParameter("subgroups need an even strand count, got n=" + std::to_string(n));
  check_strand_count(n);
  std::vector<int> out;
  const int half = n / 2;
  if (side == SubgroupSide::lower)
    for (int i = 1; i <= half - 1; ++i) out.push_back(i);
  else
    for (int i = half + 1; i <= n - 1; ++i) out.push_back(i);
  return out;
}

inline bool word_in_subgroup(const BraidWord& w, SubgroupSide side) {
  const int half = w.strands() / 2;
  for (const auto& l : w.letters()) {
    if (side == SubgroupSide::lower && l.index >= half) return false;
    if (side == SubgroupSide::upper && l.index <= half) return false;
  }
  return true;
}

// Freely reduced word of exactly `length` letters drawn uniformly from
// sigma_i^{+-1}, i in `generators`; a letter that would cancel its
// predecessor is redrawn.
inline BraidWord sample_reduced_word(int n, const std::vector<int>& generators, int length, CoinStream& rng) {
  if (generators.empty()) throw InvalidParameter("no generators to sample from");
  BraidWord w(n);
  const std::uint64_t letters = 2 * generators.size();
  while (static_cast<int>(w.size()) < length) {
    const std::uint64_t pick = rng.below(letters);
    const GeneratorLetter l{generators[pick / 2], pick % 2 == 0 ? 1 : -1};
    if (!w.empty() && w.letters().back() == l.inverse()) continue;
    w.push_back(l);
  }
  return w;
}

// Any n >= 2 is accepted here; only the subgroup samplers need n even.
inline BraidWord sample_word(const SamplerConfig& cfg, CoinStream& rng) {
  check_strand_count(cfg.n);
  std::vector<int> all;
  for (int i = 1; i < cfg.n; ++i) all.push_back(i);
  return sample_reduced_word(cfg.n, all, cfg.word_length, rng);
}

inline BraidWord sample_subgroup_word(SubgroupSide side, const SamplerConfig& cfg, CoinStream& rng) {
  return sample_reduced_word(cfg.n, subgroup_generators(side, cfg.n), cfg.word_length, rng);
}

inline bool is_hard_instance(const CanonicalForm& x, const SamplerConfig& cfg) {
  return !is_delta_power(x) && canonical_length(x) >= static_cast<std::size_t>(cfg.min_canonical_length);
}

inline constexpr int kMaxHardnessRejections = 100;

// Draws words from `draw` until the canonical form passes is_hard_instance.
template <class Draw>
CanonicalForm sample_hard(const SamplerConfig& cfg, Draw&& draw, std::string_view what) {
  for (int attempt = 0; attempt < kMaxHardnessRejections; ++attempt) {
    CanonicalForm x = normalize(draw());
    if (is_hard_instance(x, cfg)) return x;
  }
  throw SamplingFailure(std::string(what) + ": " + std::to_string(kMaxHardnessRejections) +
                        " consecutive samples below canonical length " +
                        std::to_string(cfg.min_canonical_length));
}

inline CanonicalForm sample_hard_subgroup(SubgroupSide side, const SamplerConfig& cfg, CoinStream& rng) {
  return sample_hard(cfg, [&] { return sample_subgroup_word(side, cfg, rng); },
                     side == SubgroupSide::lower ? "lower subgroup" : "upper subgroup");
}

}  // namespace braidauth
