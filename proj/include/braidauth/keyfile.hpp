#pragma once

// Key files are `field = value` lines. Integers are decimal; braids are the
// lowercase hex of their serialized canonical form. Blank lines and lines
// starting with '#' are ignored.
//
//   scheme 1 public: scheme n r s X        secret: scheme n a b
//   scheme 2 public: scheme n e f base X   secret: scheme n a

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>

#include "braidauth/error.hpp"
#include "braidauth/hash.hpp"
#include "braidauth/protocol.hpp"

namespace braidauth {

using PublicKey = std::variant<SchemeIPublic, SchemeIIPublic>;
using KeyPair = std::variant<SchemeIKeys, SchemeIIKeys>;

inline int scheme_of(const PublicKey& k) { return k.index() == 0 ? 1 : 2; }

namespace keyfile {

using Fields = std::map<std::string, std::string>;

inline Fields read_fields(std::istream& in) {
  Fields out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(ParseErrorCode::bad_syntax, "line " + std::to_string(lineno) + ": expected field = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (out.contains(key))
      throw ParseError(ParseErrorCode::bad_syntax, "line " + std::to_string(lineno) + ": duplicate field " + key);
    out.emplace(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

inline const std::string& field(const Fields& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) throw ParseError(ParseErrorCode::bad_syntax, "missing field " + key);
  return it->second;
}

inline int integer(const Fields& f, const std::string& key) {
  const std::string& v = field(f, key);
  std::size_t used = 0;
  int out = 0;
  try {
    out = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ParseError(ParseErrorCode::bad_syntax, "field " + key + " is not an integer");
  return out;
}

inline CanonicalForm braid(const Fields& f, const std::string& key, int n) {
  CanonicalForm x = deserialize(from_hex(field(f, key)));
  if (x.strands() != n) throw ParseError(ParseErrorCode::bad_strand_count, "field " + key + " has the wrong n");
  return x;
}

inline std::string hex(const CanonicalForm& x) { return to_hex(serialize(x)); }

}  // namespace keyfile

inline void write_public_key(std::ostream& out, const PublicKey& key) {
  if (const auto* k = std::get_if<SchemeIPublic>(&key)) {
    out << "scheme = 1\n"
        << "n = " << k->n << "\n"
        << "r = " << k->r << "\n"
        << "s = " << k->s << "\n"
        << "X = " << keyfile::hex(k->public_braid) << "\n";
  } else {
    const auto& k2 = std::get<SchemeIIPublic>(key);
    out << "scheme = 2\n"
        << "n = " << k2.n << "\n"
        << "e = " << k2.e << "\n"
        << "f = " << k2.f << "\n"
        << "base = " << keyfile::hex(k2.base) << "\n"
        << "X = " << keyfile::hex(k2.public_braid) << "\n";
  }
}

inline void write_secret_key(std::ostream& out, const KeyPair& keys) {
  if (const auto* k = std::get_if<SchemeIKeys>(&keys)) {
    out << "scheme = 1\n"
        << "n = " << k->pub.n << "\n"
        << "a = " << keyfile::hex(k->secret.lower) << "\n"
        << "b = " << keyfile::hex(k->secret.upper) << "\n";
  } else {
    const auto& k2 = std::get<SchemeIIKeys>(keys);
    out << "scheme = 2\n"
        << "n = " << k2.pub.n << "\n"
        << "a = " << keyfile::hex(k2.secret.lower) << "\n";
  }
}

inline PublicKey read_public_key(std::istream& in) {
  const auto f = keyfile::read_fields(in);
  const int scheme = keyfile::integer(f, "scheme");
  const int n = keyfile::integer(f, "n");
  if (n < 4 || n % 2 != 0 || n > kMaxStrands) throw ParseError(ParseErrorCode::bad_strand_count, "n must be even");
  if (scheme == 1) {
    SchemeIPublic k;
    k.n = n;
    k.r = keyfile::integer(f, "r");
    k.s = keyfile::integer(f, "s");
    SessionConfig::check_exponents(1, k.r, k.s);
    k.public_braid = keyfile::braid(f, "X", n);
    return k;
  }
  if (scheme == 2) {
    SchemeIIPublic k;
    k.n = n;
    k.e = keyfile::integer(f, "e");
    k.f = keyfile::integer(f, "f");
    SessionConfig::check_exponents(2, k.e, k.f);
    k.base = keyfile::braid(f, "base", n);
    k.public_braid = keyfile::braid(f, "X", n);
    return k;
  }
  throw ParseError(ParseErrorCode::bad_syntax, "scheme must be 1 or 2");
}

// Pairs a secret file with its public key. A secret from another key pair
// loads fine and simply fails verification; see secret_matches.
inline KeyPair read_key_pair(const PublicKey& pub, std::istream& secret_in) {
  const auto f = keyfile::read_fields(secret_in);
  const int scheme = keyfile::integer(f, "scheme");
  if (scheme != scheme_of(pub)) throw ParseError(ParseErrorCode::bad_syntax, "secret and public key schemes differ");
  if (const auto* k = std::get_if<SchemeIPublic>(&pub)) {
    if (keyfile::integer(f, "n") != k->n) throw ParseError(ParseErrorCode::bad_strand_count, "n differs");
    SchemeIKeys keys{*k, {keyfile::braid(f, "a", k->n), keyfile::braid(f, "b", k->n)}};
    return keys;
  }
  const auto& k2 = std::get<SchemeIIPublic>(pub);
  if (keyfile::integer(f, "n") != k2.n) throw ParseError(ParseErrorCode::bad_strand_count, "n differs");
  SchemeIIKeys keys{k2, {keyfile::braid(f, "a", k2.n)}};
  return keys;
}

// Recomputes the public braid from the secret.
inline bool secret_matches(const KeyPair& keys) {
  if (const auto* k = std::get_if<SchemeIKeys>(&keys))
    return multiply(power(k->secret.lower, k->pub.r), power(k->secret.upper, k->pub.s)) == k->pub.public_braid;
  const auto& k2 = std::get<SchemeIIKeys>(keys);
  return multiply(multiply(power(k2.secret.lower, k2.pub.e), k2.pub.base), power(k2.secret.lower, k2.pub.f)) ==
         k2.pub.public_braid;
}

}  // namespace braidauth
