#include <gtest/gtest.h>

#include <set>

#include "braidauth/protocol.hpp"
#include "helpers.hpp"

using namespace braidauth;
using braidauth::test::nf;
using braidauth::test::w;

namespace {

SessionConfig config(int scheme, int n, int len, int left = 2, int right = 3, int rounds = 1) {
  return SessionConfig{scheme, rounds, SamplerConfig{n, len, std::min(3, len), 0}, left, right};
}

}  // namespace

TEST(SchemeI, TinyFixture) {
  const auto keys = make_scheme1_keys(2, 2, w("s1", 4), w("s3", 4));
  EXPECT_EQ(keys.pub.public_braid, nf("s1 s1 s3 s3", 4));
  EXPECT_EQ(multiply(power(keys.secret.lower, 2), power(keys.secret.upper, 2)), keys.pub.public_braid);

  const auto ch = make_challenge1(keys.pub, nf("s3", 4), nf("s1", 4));
  EXPECT_EQ(ch.braid, nf("s3 s3 s1 s1", 4));
  const Response z = respond1(keys, ch.braid);
  EXPECT_EQ(z.digest, hash_braid(verifier_braid1(keys.pub, ch.verifier_secret)));
  EXPECT_TRUE(verify1(keys.pub, ch.verifier_secret, z));
}

TEST(SchemeI, RejectsBadParameters) {
  EXPECT_THROW(make_scheme1_keys(1, 2, w("s1", 4), w("s3", 4)), InvalidParameter);
  EXPECT_THROW(make_scheme1_keys(2, 1, w("s1", 4), w("s3", 4)), InvalidParameter);
  EXPECT_THROW(make_scheme1_keys(2, 2, w("s3", 4), w("s3", 4)), InvalidParameter);
  EXPECT_THROW(make_scheme1_keys(2, 2, w("s1", 4), w("s2", 4)), InvalidParameter);
  CoinStream rng(1);
  EXPECT_THROW(keygen1(config(1, 7, 8), rng), InvalidParameter);
  EXPECT_THROW(keygen1(config(1, 8, 8, 1, 2), rng), InvalidParameter);
  EXPECT_THROW(keygen1(config(1, 8, 8, 2, kMaxExponent + 1), rng), InvalidParameter);
  try {
    keygen1(config(1, 8, 8, 1, 2), rng);
  } catch (const InvalidParameter& e) {
    EXPECT_STREQ(e.what(), "r must be >= 2");
  }
}

TEST(SchemeI, DegenerateChallenge) {
  CoinStream rng(2);
  const auto keys = keygen1(config(1, 8, 16), rng);
  EXPECT_EQ(respond1(keys, identity(8)).digest, hash_braid(keys.pub.public_braid));
  EXPECT_EQ(respond1(keys, nf("s2 S5", 8)), respond1(keys, nf("s2 S5", 8)));
  EXPECT_THROW(respond1(keys, identity(6)), InvalidParameter);
}

TEST(SchemeI, ChallengesComeFromTheRightSides) {
  CoinStream rng(3);
  const auto keys = keygen1(config(1, 8, 16), rng);
  for (int k = 0; k < 20; ++k) {
    const auto ch = challenge1(keys.pub, keys.pub.n == 8 ? SamplerConfig{8, 16, 3, 0} : SamplerConfig{}, rng);
    // d is lower: commutes with every upper generator.
    EXPECT_EQ(multiply(ch.verifier_secret.lower, nf("s6", 8)), multiply(nf("s6", 8), ch.verifier_secret.lower));
    EXPECT_EQ(multiply(ch.verifier_secret.upper, nf("s2", 8)), multiply(nf("s2", 8), ch.verifier_secret.upper));
    EXPECT_EQ(ch.braid, multiply(power(ch.verifier_secret.upper, 2), power(ch.verifier_secret.lower, 3)));
  }
}

TEST(SchemeI, CrossKeyResponsesFail) {
  CoinStream rng(4);
  const auto mine = keygen1(config(1, 8, 16), rng);
  const auto other = keygen1(config(1, 8, 16), rng);
  const auto ch = challenge1(mine.pub, SamplerConfig{8, 16, 3, 0}, rng);
  EXPECT_FALSE(verify1(mine.pub, ch.verifier_secret, respond1(other, ch.braid)));
  EXPECT_TRUE(verify1(mine.pub, ch.verifier_secret, respond1(mine, ch.braid)));
}

TEST(SchemeII, TinyFixture) {
  const auto keys = make_scheme2_keys(2, 2, w("s2", 4), w("s1", 4));
  EXPECT_EQ(keys.pub.public_braid, nf("s1 s1 s2 s1 s1", 4));
  const auto ch = make_challenge2(keys.pub, nf("s3", 4));
  EXPECT_EQ(ch.braid, nf("s3 s3 s2 s3 s3", 4));
  const Response z = respond2(keys, ch.braid);
  EXPECT_EQ(z.digest, hash_braid(verifier_braid2(keys.pub, ch.verifier_secret)));
  EXPECT_TRUE(verify2(keys.pub, ch.verifier_secret, z));
  EXPECT_EQ(respond2(keys, keys.pub.base).digest, hash_braid(keys.pub.public_braid));
}

TEST(SchemeII, RejectsBadParameters) {
  EXPECT_THROW(make_scheme2_keys(1, 2, w("s2", 4), w("s1", 4)), InvalidParameter);
  EXPECT_THROW(make_scheme2_keys(2, 1, w("s2", 4), w("s1", 4)), InvalidParameter);
  EXPECT_THROW(make_scheme2_keys(2, 2, w("s2", 4), w("s2", 4)), InvalidParameter);
  CoinStream rng(5);
  try {
    keygen2(config(2, 8, 8, 1, 2), rng);
    ADD_FAILURE();
  } catch (const InvalidParameter& e) {
    EXPECT_STREQ(e.what(), "e must be >= 2");
  }
}

TEST(SchemeII, KeysSatisfyTheirRelation) {
  CoinStream rng(6);
  for (int k = 0; k < 10; ++k) {
    const auto keys = keygen2(config(2, 8, 16), rng);
    const auto& a = keys.secret.lower;
    EXPECT_EQ(multiply(multiply(power(a, 2), keys.pub.base), power(a, 3)), keys.pub.public_braid);
    EXPECT_GE(canonical_length(a), 3u);
    EXPECT_GE(canonical_length(keys.pub.base), 3u);
  }
}

TEST(SchemeII, TamperedChallengeFails) {
  CoinStream rng(7);
  const auto keys = keygen2(config(2, 8, 16), rng);
  const auto ch = challenge2(keys.pub, SamplerConfig{8, 16, 3, 0}, rng);
  const CanonicalForm tampered = multiply(ch.braid, nf("s4", 8));
  EXPECT_FALSE(verify2(keys.pub, ch.verifier_secret, respond2(keys, tampered)));
}

TEST(Session, HonestSessionsAccept) {
  CoinStream rng(8);
  for (int n : {4, 8, 16}) {
    for (int left : {2, 3}) {
      for (int right : {2, 3}) {
        const auto c1 = config(1, n, 8, left, right, 3);
        const auto k1 = keygen1(c1, rng);
        EXPECT_TRUE(run_honest_session<SchemeI>(k1, c1.sampler, 3, rng).accepted);
        const auto c2 = config(2, n, 8, left, right, 5);
        const auto k2 = keygen2(c2, rng);
        const Transcript t = run_honest_session<SchemeII>(k2, c2.sampler, 5, rng);
        EXPECT_TRUE(t.accepted);
        EXPECT_EQ(t.rounds.size(), 5u);
      }
    }
  }
}

TEST(Session, RandomResponderIsRejectedAtTheFirstRound) {
  CoinStream rng(9);
  const auto c = config(1, 8, 16, 2, 2, 4);
  const auto keys = keygen1(c, rng);
  const Transcript t = run_session<SchemeI>(
      keys.pub, [](const CanonicalForm&) { return Response{}; }, c.sampler, 4, rng);
  EXPECT_FALSE(t.accepted);
  EXPECT_EQ(t.rounds.size(), 1u);
  EXPECT_FALSE(t.rounds[0].verdict);
}

TEST(Session, TransportFailureAborts) {
  CoinStream rng(10);
  const auto c = config(2, 8, 16, 2, 2, 4);
  const auto keys = keygen2(c, rng);
  int calls = 0;
  const Transcript t = run_session<SchemeII>(
      keys.pub,
      [&](const CanonicalForm& y) {
        if (++calls == 3) throw TransportError("gone");
        return respond2(keys, y);
      },
      c.sampler, 4, rng);
  EXPECT_FALSE(t.accepted);
  ASSERT_TRUE(t.aborted_at.has_value());
  EXPECT_EQ(*t.aborted_at, 2u);
  EXPECT_EQ(t.rounds.size(), 2u);
}

TEST(Session, ZeroRoundsIsInvalid) {
  CoinStream rng(11);
  const auto c = config(1, 4, 8);
  const auto keys = keygen1(c, rng);
  EXPECT_THROW(run_honest_session<SchemeI>(keys, c.sampler, 0, rng), InvalidParameter);
  SessionConfig bad = c;
  bad.rounds = 0;
  EXPECT_THROW(bad.validate(), InvalidParameter);
}

TEST(Simulator, MatchesRealTranscriptsUnderSharedCoins) {
  CoinStream keys_rng(12);
  for (int k = 0; k < 10; ++k) {
    const auto c = config(1, 8, 16);
    const auto k1 = keygen1(c, keys_rng);
    CoinStream real(100 + k, "verifier"), sim(100 + k, "verifier");
    const Transcript a = run_honest_session<SchemeI>(k1, c.sampler, 3, real);
    const Transcript b = simulate_transcript<SchemeI>(k1.pub, c.sampler, 3, sim);
    EXPECT_EQ(a, b);
    EXPECT_EQ(format_transcript(a), format_transcript(b));

    const auto k2 = keygen2(config(2, 8, 16), keys_rng);
    CoinStream real2(200 + k, "verifier"), sim2(200 + k, "verifier");
    EXPECT_EQ(run_honest_session<SchemeII>(k2, c.sampler, 3, real2),
              simulate_transcript<SchemeII>(k2.pub, c.sampler, 3, sim2));
  }
}

TEST(Transcript, LineFormat) {
  const auto keys = make_scheme1_keys(2, 2, w("s1", 4), w("s3", 4));
  CoinStream rng(13);
  const Transcript t = run_honest_session<SchemeI>(keys, SamplerConfig{4, 4, 1, 0}, 2, rng);
  const std::string text = format_transcript(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.rfind("Y=42434631", 0), 0u);
  EXPECT_NE(text.find(" Z="), std::string::npos);
  EXPECT_NE(text.find(" verdict=1\n"), std::string::npos);
}

TEST(Challenges, FreshAcrossSessions) {
  CoinStream rng(14);
  const auto c = config(1, 8, 32);
  const auto keys = keygen1(c, rng);
  std::set<Bytes> seen;
  for (int k = 0; k < 1000; ++k) EXPECT_TRUE(seen.insert(serialize(challenge1(keys.pub, c.sampler, rng).braid)).second);
  const auto k2 = keygen2(config(2, 8, 32), rng);
  seen.clear();
  for (int k = 0; k < 1000; ++k) EXPECT_TRUE(seen.insert(serialize(challenge2(k2.pub, c.sampler, rng).braid)).second);
}
