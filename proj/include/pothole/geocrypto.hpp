#pragma once

// Location-bound report envelope.
//
//   wire = nonce(16) | location_tag(32) | payload_len(4, big endian)
//          | ciphertext(payload_len) | integrity_tag(32)
//
// keystream block i = HMAC-SHA256(key, "KS" | nonce | location | be64(i))
// location_tag      = HMAC-SHA256(key, "LOC" | location)
// integrity_tag     = HMAC-SHA256(key, "MAC" | nonce | location_tag | len | ciphertext)
//
// This is a simulation construction. It is not reviewed for production use
// and makes no side-channel or key-management claims.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "pothole/detection.hpp"
#include "pothole/registry.hpp"

namespace pothole {

using SharedKey = std::array<std::uint8_t, 32>;
using Nonce = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;
using Bytes = std::vector<std::uint8_t>;

/// Detection payload as produced by a vehicle before sealing.
struct PlainReport {
    DepthMap depth;
    IntensityImage intensity;
    Location location;
    std::string vehicle;
    TimeMs t_ms = 0;

    friend bool operator==(const PlainReport&, const PlainReport&) = default;
};

struct ReportEnvelope {
    Nonce nonce{};
    Digest location_tag{};
    Bytes ciphertext;
    Digest integrity_tag{};

    static constexpr std::size_t kOverhead = 16 + 32 + 4 + 32;

    Bytes to_bytes() const;
    static ReportEnvelope from_bytes(std::span<const std::uint8_t> wire);

    friend bool operator==(const ReportEnvelope&, const ReportEnvelope&) = default;
};

class DecryptError : public std::runtime_error {
public:
    enum class Kind { truncated, integrity, location_mismatch, malformed_payload };

    DecryptError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

namespace detail {

class ByteWriter {
public:
    void u32(std::uint32_t v)
    {
        for (int s = 24; s >= 0; s -= 8) {
            out.push_back(static_cast<std::uint8_t>(v >> s));
        }
    }
    void u64(std::uint64_t v)
    {
        for (int s = 56; s >= 0; s -= 8) {
            out.push_back(static_cast<std::uint8_t>(v >> s));
        }
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s)
    {
        u32(static_cast<std::uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    void raw(std::span<const std::uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }

    Bytes out;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v = (v << 8) | in_[pos_++];
        }
        return v;
    }
    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v = (v << 8) | in_[pos_++];
        }
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str()
    {
        auto n = u32();
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::span<const std::uint8_t> raw(std::size_t n)
    {
        need(n);
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n) {
            throw DecryptError(DecryptError::Kind::truncated, "unexpected end of data");
        }
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

inline Digest hmac(const SharedKey& key, std::span<const std::uint8_t> msg)
{
    Digest out{};
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), out.data(), &len) ==
            nullptr ||
        len != out.size()) {
        throw std::runtime_error("HMAC-SHA256 failed");
    }
    return out;
}

inline Bytes location_bytes(const Location& loc)
{
    ByteWriter w;
    w.str(loc.arc);
    w.f64(loc.offset_m);
    return w.out;
}

inline Digest location_tag(const SharedKey& key, const Location& loc)
{
    ByteWriter w;
    w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("LOC"), 3));
    w.raw(location_bytes(loc));
    return hmac(key, w.out);
}

inline void apply_keystream(const SharedKey& key, const Nonce& nonce, const Location& loc, Bytes& data)
{
    ByteWriter prefix;
    prefix.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("KS"), 2));
    prefix.raw(nonce);
    prefix.raw(location_bytes(loc));
    std::uint64_t block = 0;
    for (std::size_t off = 0; off < data.size(); off += 32, ++block) {
        ByteWriter msg;
        msg.raw(prefix.out);
        msg.u64(block);
        auto ks = hmac(key, msg.out);
        for (std::size_t i = 0; i < 32 && off + i < data.size(); ++i) {
            data[off + i] ^= ks[i];
        }
    }
}

inline Digest integrity_tag(const SharedKey& key, const Nonce& nonce, const Digest& loc_tag, const Bytes& ct)
{
    ByteWriter w;
    w.raw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>("MAC"), 3));
    w.raw(nonce);
    w.raw(loc_tag);
    w.u32(static_cast<std::uint32_t>(ct.size()));
    w.raw(ct);
    return hmac(key, w.out);
}

inline Bytes serialize_plain(const PlainReport& r)
{
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(r.depth.rows));
    w.u32(static_cast<std::uint32_t>(r.depth.cols));
    w.f64(r.depth.cell_m);
    w.f64(r.depth.extent_m);
    w.u32(static_cast<std::uint32_t>(r.depth.depth_mm.size()));
    for (double d : r.depth.depth_mm) {
        w.f64(d);
    }
    w.u32(static_cast<std::uint32_t>(r.intensity.rows));
    w.u32(static_cast<std::uint32_t>(r.intensity.cols));
    w.u32(static_cast<std::uint32_t>(r.intensity.values.size()));
    for (double v : r.intensity.values) {
        w.f64(v);
    }
    w.raw(location_bytes(r.location));
    w.str(r.vehicle);
    w.u64(static_cast<std::uint64_t>(r.t_ms));
    return w.out;
}

inline PlainReport deserialize_plain(std::span<const std::uint8_t> bytes)
{
    try {
        ByteReader rd(bytes);
        PlainReport r;
        r.depth.rows = rd.u32();
        r.depth.cols = rd.u32();
        r.depth.cell_m = rd.f64();
        r.depth.extent_m = rd.f64();
        auto n = rd.u32();
        if (n > rd.remaining() / 8) {
            throw DecryptError(DecryptError::Kind::truncated, "depth grid longer than payload");
        }
        r.depth.depth_mm.resize(n);
        for (auto& d : r.depth.depth_mm) {
            d = rd.f64();
        }
        r.intensity.rows = rd.u32();
        r.intensity.cols = rd.u32();
        n = rd.u32();
        if (n > rd.remaining() / 8) {
            throw DecryptError(DecryptError::Kind::truncated, "intensity grid longer than payload");
        }
        r.intensity.values.resize(n);
        for (auto& v : r.intensity.values) {
            v = rd.f64();
        }
        r.location.arc = rd.str();
        r.location.offset_m = rd.f64();
        r.vehicle = rd.str();
        r.t_ms = static_cast<TimeMs>(rd.u64());
        if (!rd.done()) {
            throw DecryptError(DecryptError::Kind::malformed_payload, "trailing bytes in payload");
        }
        return r;
    } catch (const DecryptError& e) {
        throw DecryptError(DecryptError::Kind::malformed_payload, std::string("payload: ") + e.what());
    }
}

} // namespace detail

inline Bytes ReportEnvelope::to_bytes() const
{
    detail::ByteWriter w;
    w.raw(nonce);
    w.raw(location_tag);
    w.u32(static_cast<std::uint32_t>(ciphertext.size()));
    w.raw(ciphertext);
    w.raw(integrity_tag);
    return w.out;
}

inline ReportEnvelope ReportEnvelope::from_bytes(std::span<const std::uint8_t> wire)
{
    detail::ByteReader rd(wire);
    ReportEnvelope env;
    auto n = rd.raw(16);
    std::copy(n.begin(), n.end(), env.nonce.begin());
    auto t = rd.raw(32);
    std::copy(t.begin(), t.end(), env.location_tag.begin());
    auto len = rd.u32();
    auto ct = rd.raw(len);
    env.ciphertext.assign(ct.begin(), ct.end());
    auto mac = rd.raw(32);
    std::copy(mac.begin(), mac.end(), env.integrity_tag.begin());
    if (!rd.done()) {
        throw DecryptError(DecryptError::Kind::truncated, "envelope length does not match payload length field");
    }
    return env;
}

/// Seals a report under `key`, bound to the report's location, with a fresh
/// 128-bit nonce drawn from `rng`.
template <typename Rng>
ReportEnvelope encrypt(const PlainReport& report, const SharedKey& key, Rng& rng)
{
    static_assert(std::uniform_random_bit_generator<Rng>);
    std::uniform_int_distribution<unsigned> byte(0, 255);
    ReportEnvelope env;
    for (auto& b : env.nonce) {
        b = static_cast<std::uint8_t>(byte(rng));
    }
    env.location_tag = detail::location_tag(key, report.location);
    env.ciphertext = detail::serialize_plain(report);
    detail::apply_keystream(key, env.nonce, report.location, env.ciphertext);
    env.integrity_tag = detail::integrity_tag(key, env.nonce, env.location_tag, env.ciphertext);
    return env;
}

/// Authenticates, checks the location binding against `claimed`, and
/// returns the report. The nonce is consumed here and not returned.
inline PlainReport decrypt(const ReportEnvelope& env, const SharedKey& key, const Location& claimed)
{
    auto mac = detail::integrity_tag(key, env.nonce, env.location_tag, env.ciphertext);
    if (CRYPTO_memcmp(mac.data(), env.integrity_tag.data(), mac.size()) != 0) {
        throw DecryptError(DecryptError::Kind::integrity, "integrity check failed");
    }
    auto tag = detail::location_tag(key, claimed);
    if (CRYPTO_memcmp(tag.data(), env.location_tag.data(), tag.size()) != 0) {
        throw DecryptError(DecryptError::Kind::location_mismatch, "envelope is not bound to the claimed location");
    }
    Bytes plain = env.ciphertext;
    detail::apply_keystream(key, env.nonce, claimed, plain);
    return detail::deserialize_plain(plain);
}

inline PlainReport decrypt(std::span<const std::uint8_t> wire, const SharedKey& key, const Location& claimed)
{
    return decrypt(ReportEnvelope::from_bytes(wire), key, claimed);
}

} // namespace pothole
