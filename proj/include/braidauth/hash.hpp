#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/sha.h>

#include "braidauth/braid.hpp"
#include "braidauth/error.hpp"

namespace braidauth {

using Bytes = std::vector<std::uint8_t>;

struct Digest {
  static constexpr std::size_t kSize = 32;
  std::array<std::uint8_t, kSize> bytes{};

  friend bool operator==(const Digest&, const Digest&) = default;
};

inline Digest sha256(std::span<const std::uint8_t> data) {
  Digest d;
  SHA256(data.data(), data.size(), d.bytes.data());
  return d;
}

inline std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out += kDigits[b >> 4];
    out += kDigits[b & 0xf];
  }
  return out;
}

inline std::string to_hex(const Digest& d) { return to_hex(d.bytes); }

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw ParseError(ParseErrorCode::bad_syntax, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ParseError(ParseErrorCode::bad_syntax, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

inline Digest digest_from_hex(std::string_view hex) {
  const Bytes raw = from_hex(hex);
  if (raw.size() != Digest::kSize) throw ParseError(ParseErrorCode::bad_syntax, "digest must be 32 bytes");
  Digest d;
  std::copy(raw.begin(), raw.end(), d.bytes.begin());
  return d;
}

namespace detail {

inline void put_be(Bytes& out, std::uint64_t v, int width) {
  for (int k = width - 1; k >= 0; --k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

inline std::uint64_t get_be(std::span<const std::uint8_t> in, std::size_t at, int width) {
  std::uint64_t v = 0;
  for (int k = 0; k < width; ++k) v = v << 8 | in[at + static_cast<std::size_t>(k)];
  return v;
}

}  // namespace detail

inline constexpr std::array<std::uint8_t, 4> kCanonicalMagic{'B', 'C', 'F', '1'};

// "BCF1" | n:u16 | inf:i32 | l:u32 | l tables of n u16 entries, all big-endian.
inline Bytes serialize(const CanonicalForm& x) {
  if (x.inf() >= (std::int64_t{1} << 31) || x.inf() <= -(std::int64_t{1} << 31))
    throw OverflowError("Delta exponent does not fit the 32-bit serialization field");
  if (x.factors().size() > std::numeric_limits<std::uint32_t>::max())
    throw OverflowError("too many factors to serialize");
  const auto n = static_cast<std::size_t>(x.strands());
  Bytes out(kCanonicalMagic.begin(), kCanonicalMagic.end());
  out.reserve(14 + x.factors().size() * n * 2);
  detail::put_be(out, n, 2);
  detail::put_be(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(x.inf())), 4);
  detail::put_be(out, x.factors().size(), 4);
  for (const auto& f : x.factors())
    for (auto v : f.table()) detail::put_be(out, v, 2);
  return out;
}

// Reads one serialized canonical form starting at `offset` and advances it.
// Every canonical-form invariant is re-validated.
inline CanonicalForm deserialize_prefix(std::span<const std::uint8_t> in, std::size_t& offset) {
  auto need = [&](std::size_t count) {
    if (in.size() < offset || in.size() - offset < count)
      throw ParseError(ParseErrorCode::truncated, "need " + std::to_string(count) + " more bytes");
  };
  need(14);
  if (!std::equal(kCanonicalMagic.begin(), kCanonicalMagic.end(), in.begin() + static_cast<std::ptrdiff_t>(offset)))
    throw ParseError(ParseErrorCode::bad_magic, "expected BCF1");
  const auto n = static_cast<int>(detail::get_be(in, offset + 4, 2));
  const auto inf = static_cast<std::int32_t>(static_cast<std::uint32_t>(detail::get_be(in, offset + 6, 4)));
  const auto count = detail::get_be(in, offset + 10, 4);
  offset += 14;
  if (n < 2 || n > kMaxStrands) throw ParseError(ParseErrorCode::bad_strand_count, "n=" + std::to_string(n));

  const std::size_t table_bytes = static_cast<std::size_t>(n) * 2;
  if (count > (in.size() - offset) / table_bytes)
    throw ParseError(ParseErrorCode::truncated, "factor tables cut short");
  std::vector<Permutation> factors;
  factors.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    std::vector<Permutation::value_type> table(static_cast<std::size_t>(n));
    for (auto& v : table) {
      v = static_cast<Permutation::value_type>(detail::get_be(in, offset, 2));
      offset += 2;
    }
    if (!Permutation::is_bijection(table))
      throw ParseError(ParseErrorCode::non_bijective, "factor " + std::to_string(k) + " is not a permutation");
    factors.push_back(PermutationAccess::adopt(std::move(table)));
  }
  if (auto why = canonical_violation(n, factors)) throw ParseError(ParseErrorCode::not_canonical, *why);
  return CanonicalForm::from_parts(n, inf, std::move(factors));
}

inline CanonicalForm deserialize(std::span<const std::uint8_t> in) {
  std::size_t offset = 0;
  CanonicalForm x = deserialize_prefix(in, offset);
  if (offset != in.size()) throw ParseError(ParseErrorCode::trailing_bytes, "bytes after canonical form");
  return x;
}

// H on group elements: SHA-256 of the serialized left canonical form.
inline Digest hash_braid(const CanonicalForm& x) { return sha256(serialize(x)); }

}  // namespace braidauth
