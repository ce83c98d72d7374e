#pragma once

// Two-pass identification schemes over B_n built on the root problem.
//
// Scheme I:  public X = a^r b^s with a lower, b upper. The verifier sends
//            Y = c^r d^s (c upper, d lower); the prover answers H(a^r Y b^s)
//            and the verifier compares with H(c^r X d^s).
// Scheme II: public (base, X = a^e base a^f) with a lower. The verifier sends
//            Y = b^e base b^f (b upper); the prover answers H(a^e Y a^f) and
//            the verifier compares with H(b^e X b^f).
//
// Both verifications hold because lower and upper braids commute. Sessions
// repeat the exchange for k rounds with fresh challenges.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "braidauth/braid.hpp"
#include "braidauth/error.hpp"
#include "braidauth/hash.hpp"
#include "braidauth/sampling.hpp"

namespace braidauth {

struct Response {
  Digest digest;
  friend bool operator==(const Response&, const Response&) = default;
};

// Exponents are public and arrive over the wire; a verifier computes powers
// of that size, so keep them small.
inline constexpr int kMaxExponent = 64;

struct SessionConfig {
  int scheme = 1;
  int rounds = 1;
  SamplerConfig sampler;
  // r and s in scheme I, e and f in scheme II.
  int left_exponent = 2;
  int right_exponent = 2;

  void validate() const {
    if (scheme != 1 && scheme != 2) throw InvalidParameter("scheme must be 1 or 2");
    if (rounds < 1) throw InvalidParameter("rounds must be >= 1");
    sampler.validate();
    check_exponents(scheme, left_exponent, right_exponent);
  }

  static void check_exponents(int scheme, int left, int right) {
    const char* l = scheme == 1 ? "r" : "e";
    const char* r = scheme == 1 ? "s" : "f";
    if (left < 2) throw InvalidParameter(std::string(l) + " must be >= 2");
    if (right < 2) throw InvalidParameter(std::string(r) + " must be >= 2");
    if (left > kMaxExponent || right > kMaxExponent)
      throw InvalidParameter(std::string(l) + " and " + r + " must be <= " + std::to_string(kMaxExponent));
  }
};

namespace detail {

inline void require_even(int n) {
  if (n < 4 || n % 2 != 0) throw InvalidParameter("n must be even and >= 4, got " + std::to_string(n));
}

inline void require_strands(const CanonicalForm& x, int n, const char* what) {
  if (x.strands() != n)
    throw InvalidParameter(std::string(what) + " has " + std::to_string(x.strands()) +
                           " strands, expected " + std::to_string(n));
}

inline CanonicalForm product(std::initializer_list<CanonicalForm> parts) {
  auto it = parts.begin();
  CanonicalFormBuilder b(*it);
  for (++it; it != parts.end(); ++it) b.append(*it);
  return std::move(b).finish();
}

inline SamplerConfig sampler_for(const SamplerConfig& cfg, int n) {
  SamplerConfig out = cfg;
  out.n = n;
  return out;
}

inline CanonicalForm from_subgroup_word(const BraidWord& w, SubgroupSide side, const char* what) {
  if (!word_in_subgroup(w, side))
    throw InvalidParameter(std::string(what) + " must use only " + to_string(side) + "-block generators");
  return normalize(w);
}

}  // namespace detail

// ---------------------------------------------------------------- Scheme I

struct SchemeIPublic {
  int n = 0;
  int r = 2;
  int s = 2;
  CanonicalForm public_braid = identity(2);  // a^r b^s
  friend bool operator==(const SchemeIPublic&, const SchemeIPublic&) = default;
};

struct SchemeISecret {
  CanonicalForm lower = identity(2);  // a
  CanonicalForm upper = identity(2);  // b
  friend bool operator==(const SchemeISecret&, const SchemeISecret&) = default;
};

struct SchemeIKeys {
  SchemeIPublic pub;
  SchemeISecret secret;
};

struct VerifierSecretI {
  CanonicalForm upper = identity(2);  // c
  CanonicalForm lower = identity(2);  // d
};

struct ChallengeI {
  CanonicalForm braid = identity(2);  // c^r d^s
  VerifierSecretI verifier_secret;
};

inline SchemeIKeys make_scheme1_keys(int r, int s, CanonicalForm lower, CanonicalForm upper) {
  const int n = lower.strands();
  detail::require_even(n);
  detail::require_strands(upper, n, "upper secret");
  SessionConfig::check_exponents(1, r, s);
  SchemeIKeys keys;
  keys.pub.n = n;
  keys.pub.r = r;
  keys.pub.s = s;
  keys.pub.public_braid = multiply(power(lower, r), power(upper, s));
  keys.secret.lower = std::move(lower);
  keys.secret.upper = std::move(upper);
  return keys;
}

// Fixed secrets given as words; each word must stay on its side.
inline SchemeIKeys make_scheme1_keys(int r, int s, const BraidWord& lower, const BraidWord& upper) {
  detail::require_even(lower.strands());
  return make_scheme1_keys(r, s, detail::from_subgroup_word(lower, SubgroupSide::lower, "a"),
                           detail::from_subgroup_word(upper, SubgroupSide::upper, "b"));
}

inline SchemeIKeys keygen1(const SessionConfig& cfg, CoinStream& rng) {
  cfg.sampler.validate();
  SessionConfig::check_exponents(1, cfg.left_exponent, cfg.right_exponent);
  CanonicalForm a = sample_hard_subgroup(SubgroupSide::lower, cfg.sampler, rng);
  CanonicalForm b = sample_hard_subgroup(SubgroupSide::upper, cfg.sampler, rng);
  return make_scheme1_keys(cfg.left_exponent, cfg.right_exponent, std::move(a), std::move(b));
}

inline ChallengeI make_challenge1(const SchemeIPublic& pub, CanonicalForm upper, CanonicalForm lower) {
  detail::require_strands(upper, pub.n, "c");
  detail::require_strands(lower, pub.n, "d");
  ChallengeI ch;
  ch.braid = multiply(power(upper, pub.r), power(lower, pub.s));
  ch.verifier_secret.upper = std::move(upper);
  ch.verifier_secret.lower = std::move(lower);
  return ch;
}

// Fresh c (upper) and d (lower), drawn in that order.
inline ChallengeI challenge1(const SchemeIPublic& pub, const SamplerConfig& cfg, CoinStream& rng) {
  const SamplerConfig local = detail::sampler_for(cfg, pub.n);
  CanonicalForm c = normalize(sample_subgroup_word(SubgroupSide::upper, local, rng));
  CanonicalForm d = normalize(sample_subgroup_word(SubgroupSide::lower, local, rng));
  return make_challenge1(pub, std::move(c), std::move(d));
}

// a^r Y b^s, the braid the prover hashes.
inline CanonicalForm prover_braid1(const SchemeIKeys& keys, const CanonicalForm& challenge) {
  detail::require_strands(challenge, keys.pub.n, "challenge");
  return detail::product({power(keys.secret.lower, keys.pub.r), challenge, power(keys.secret.upper, keys.pub.s)});
}

// c^r X d^s, the braid the verifier hashes. Reads no prover secret.
inline CanonicalForm verifier_braid1(const SchemeIPublic& pub, const VerifierSecretI& v) {
  return detail::product({power(v.upper, pub.r), pub.public_braid, power(v.lower, pub.s)});
}

inline Response respond1(const SchemeIKeys& keys, const CanonicalForm& challenge) {
  return {hash_braid(prover_braid1(keys, challenge))};
}

inline bool verify1(const SchemeIPublic& pub, const VerifierSecretI& v, const Response& z) {
  return hash_braid(verifier_braid1(pub, v)) == z.digest;
}

// --------------------------------------------------------------- Scheme II

struct SchemeIIPublic {
  int n = 0;
  int e = 2;
  int f = 2;
  CanonicalForm base = identity(2);          // s
  CanonicalForm public_braid = identity(2);  // a^e s a^f
  friend bool operator==(const SchemeIIPublic&, const SchemeIIPublic&) = default;
};

struct SchemeIISecret {
  CanonicalForm lower = identity(2);  // a
  friend bool operator==(const SchemeIISecret&, const SchemeIISecret&) = default;
};

struct SchemeIIKeys {
  SchemeIIPublic pub;
  SchemeIISecret secret;
};

struct VerifierSecretII {
  CanonicalForm upper = identity(2);  // b
};

struct ChallengeII {
  CanonicalForm braid = identity(2);  // b^e s b^f
  VerifierSecretII verifier_secret;
};

inline SchemeIIKeys make_scheme2_keys(int e, int f, CanonicalForm base, CanonicalForm lower) {
  const int n = lower.strands();
  detail::require_even(n);
  detail::require_strands(base, n, "base braid");
  SessionConfig::check_exponents(2, e, f);
  SchemeIIKeys keys;
  keys.pub.n = n;
  keys.pub.e = e;
  keys.pub.f = f;
  keys.pub.public_braid = detail::product({power(lower, e), base, power(lower, f)});
  keys.pub.base = std::move(base);
  keys.secret.lower = std::move(lower);
  return keys;
}

inline SchemeIIKeys make_scheme2_keys(int e, int f, const BraidWord& base, const BraidWord& lower) {
  detail::require_even(lower.strands());
  return make_scheme2_keys(e, f, normalize(base), detail::from_subgroup_word(lower, SubgroupSide::lower, "a"));
}

// The base braid is drawn from all of B_n, then a from the lower block.
inline SchemeIIKeys keygen2(const SessionConfig& cfg, CoinStream& rng) {
  cfg.sampler.validate();
  SessionConfig::check_exponents(2, cfg.left_exponent, cfg.right_exponent);
  CanonicalForm base = sample_hard(cfg.sampler, [&] { return sample_word(cfg.sampler, rng); }, "base braid");
  CanonicalForm a = sample_hard_subgroup(SubgroupSide::lower, cfg.sampler, rng);
  return make_scheme2_keys(cfg.left_exponent, cfg.right_exponent, std::move(base), std::move(a));
}

inline ChallengeII make_challenge2(const SchemeIIPublic& pub, CanonicalForm upper) {
  detail::require_strands(upper, pub.n, "b");
  ChallengeII ch;
  ch.braid = detail::product({power(upper, pub.e), pub.base, power(upper, pub.f)});
  ch.verifier_secret.upper = std::move(upper);
  return ch;
}

inline ChallengeII challenge2(const SchemeIIPublic& pub, const SamplerConfig& cfg, CoinStream& rng) {
  const SamplerConfig local = detail::sampler_for(cfg, pub.n);
  return make_challenge2(pub, normalize(sample_subgroup_word(SubgroupSide::upper, local, rng)));
}

inline CanonicalForm prover_braid2(const SchemeIIKeys& keys, const CanonicalForm& challenge) {
  detail::require_strands(challenge, keys.pub.n, "challenge");
  return detail::product({power(keys.secret.lower, keys.pub.e), challenge, power(keys.secret.lower, keys.pub.f)});
}

inline CanonicalForm verifier_braid2(const SchemeIIPublic& pub, const VerifierSecretII& v) {
  return detail::product({power(v.upper, pub.e), pub.public_braid, power(v.upper, pub.f)});
}

inline Response respond2(const SchemeIIKeys& keys, const CanonicalForm& challenge) {
  return {hash_braid(prover_braid2(keys, challenge))};
}

inline bool verify2(const SchemeIIPublic& pub, const VerifierSecretII& v, const Response& z) {
  return hash_braid(verifier_braid2(pub, v)) == z.digest;
}

// ------------------------------------------------------- scheme traits

struct SchemeI {
  static constexpr int id = 1;
  using Public = SchemeIPublic;
  using Keys = SchemeIKeys;
  using Challenge = ChallengeI;

  static Keys keygen(const SessionConfig& cfg, CoinStream& rng) { return keygen1(cfg, rng); }
  static Challenge challenge(const Public& pub, const SamplerConfig& cfg, CoinStream& rng) {
    return challenge1(pub, cfg, rng);
  }
  static Response respond(const Keys& keys, const CanonicalForm& y) { return respond1(keys, y); }
  static bool verify(const Public& pub, const Challenge& ch, const Response& z) {
    return verify1(pub, ch.verifier_secret, z);
  }
  static Digest expected_digest(const Public& pub, const Challenge& ch) {
    return hash_braid(verifier_braid1(pub, ch.verifier_secret));
  }
};

struct SchemeII {
  static constexpr int id = 2;
  using Public = SchemeIIPublic;
  using Keys = SchemeIIKeys;
  using Challenge = ChallengeII;

  static Keys keygen(const SessionConfig& cfg, CoinStream& rng) { return keygen2(cfg, rng); }
  static Challenge challenge(const Public& pub, const SamplerConfig& cfg, CoinStream& rng) {
    return challenge2(pub, cfg, rng);
  }
  static Response respond(const Keys& keys, const CanonicalForm& y) { return respond2(keys, y); }
  static bool verify(const Public& pub, const Challenge& ch, const Response& z) {
    return verify2(pub, ch.verifier_secret, z);
  }
  static Digest expected_digest(const Public& pub, const Challenge& ch) {
    return hash_braid(verifier_braid2(pub, ch.verifier_secret));
  }
};

// ------------------------------------------------------------ sessions

struct TranscriptRound {
  CanonicalForm challenge = identity(2);
  Digest response;
  bool verdict = false;
  friend bool operator==(const TranscriptRound&, const TranscriptRound&) = default;
};

struct Transcript {
  std::vector<TranscriptRound> rounds;
  bool accepted = false;
  // Set when the prover's channel failed; holds the 0-based round index.
  std::optional<std::size_t> aborted_at;
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

// One line per round: Y=<hex> Z=<hex> verdict=<0|1>
inline std::string format_transcript(const Transcript& t) {
  std::string out;
  for (const auto& r : t.rounds) {
    out += "Y=" + to_hex(serialize(r.challenge)) + " Z=" + to_hex(r.response) +
           " verdict=" + (r.verdict ? "1" : "0") + "\n";
  }
  return out;
}

// Runs up to `rounds` challenge/response exchanges. `prover` maps a
// challenge braid to a Response and may throw TransportError. The verifier
// draws all of its randomness from `verifier_coins` and stops at the first
// rejected round.
template <class Scheme, class Prover>
Transcript run_session(const typename Scheme::Public& pub, Prover&& prover, const SamplerConfig& verifier_cfg,
                       int rounds, CoinStream& verifier_coins) {
  if (rounds < 1) throw InvalidParameter("rounds must be >= 1");
  Transcript t;
  for (int k = 0; k < rounds; ++k) {
    const auto ch = Scheme::challenge(pub, verifier_cfg, verifier_coins);
    Response z;
    try {
      z = prover(ch.braid);
    } catch (const TransportError&) {
      t.aborted_at = static_cast<std::size_t>(k);
      t.accepted = false;
      return t;
    }
    const bool ok = Scheme::verify(pub, ch, z);
    t.rounds.push_back({ch.braid, z.digest, ok});
    if (!ok) {
      t.accepted = false;
      return t;
    }
  }
  t.accepted = true;
  return t;
}

template <class Scheme>
Transcript run_honest_session(const typename Scheme::Keys& keys, const SamplerConfig& verifier_cfg, int rounds,
                              CoinStream& verifier_coins) {
  return run_session<Scheme>(
      keys.pub, [&](const CanonicalForm& y) { return Scheme::respond(keys, y); }, verifier_cfg, rounds,
      verifier_coins);
}

// Honest-verifier simulator: draws the verifier's coins exactly as a real
// session does and answers each challenge with the digest the verifier
// would compute. Only public data goes in.
template <class Scheme>
Transcript simulate_transcript(const typename Scheme::Public& pub, const SamplerConfig& verifier_cfg, int rounds,
                               CoinStream& verifier_coins) {
  if (rounds < 1) throw InvalidParameter("rounds must be >= 1");
  Transcript t;
  for (int k = 0; k < rounds; ++k) {
    const auto ch = Scheme::challenge(pub, verifier_cfg, verifier_coins);
    t.rounds.push_back({ch.braid, Scheme::expected_digest(pub, ch), true});
  }
  t.accepted = true;
  return t;
}

}  // namespace braidauth
