#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pothole/detection.hpp"
#include "pothole/geocrypto.hpp"
#include "pothole/registry.hpp"
#include "pothole/routing.hpp"
#include "pothole/weighting.hpp"

namespace pothole {

struct ServerConfig {
    double threshold_mm = 10.0;
    RegistryConfig registry;
};

struct ServerStats {
    std::size_t accepted = 0;         // envelopes that produced an UpdateEvent
    std::size_t dropped_crypto = 0;   // failed authentication or location binding
    std::size_t dropped_payload = 0;  // decrypted but not exactly one detection
    std::size_t queries = 0;
    std::size_t query_errors = 0;
};

struct RouteRequest {
    NodeId source;
    NodeId dest;
};

struct ConditionRequest {
    ArcId arc;
};

using Request = std::variant<RouteRequest, ConditionRequest>;

struct ConditionResponse {
    ArcId arc;
    double weight = 0.0;
    std::vector<PotholeRecord> potholes;
};

struct ErrorResponse {
    enum class Code { malformed, unknown_id, unreachable };
    Code code = Code::malformed;
    std::string message;
};

struct Response {
    std::uint64_t snapshot = 0;
    std::variant<Route, ConditionResponse, ErrorResponse> body;

    bool ok() const { return !std::holds_alternative<ErrorResponse>(body); }
};

/// Parses the one-line text protocol: `ROUTE <source> <dest>` or
/// `CONDITION <arc>`. Returns nullopt for anything else.
inline std::optional<Request> parse_request(std::string_view line)
{
    std::vector<std::string> words;
    for (auto w : text::split(line, ' ')) {
        if (!w.empty()) {
            words.emplace_back(w);
        }
    }
    if (words.size() == 3 && words[0] == "ROUTE") {
        return RouteRequest{words[1], words[2]};
    }
    if (words.size() == 2 && words[0] == "CONDITION") {
        return ConditionRequest{words[1]};
    }
    return std::nullopt;
}

/// Central pothole server: decrypts uplinked envelopes, ingests them into the
/// registry, keeps the weighted network in step and answers queries. All
/// calls are serialized by the caller; every response reflects the single
/// snapshot numbered in it.
class Server {
public:
    Server(std::shared_ptr<const StreetNetwork> net, SharedKey key, ServerConfig config = {})
        : key_(key), config_(config), registry_(net, config.registry),
          weighted_(WeightedNetwork::preprocess(net, registry_))
    {
    }

    /// Starts from an existing registry (e.g. restored from CSV).
    Server(PotholeRegistry registry, SharedKey key, ServerConfig config = {})
        : key_(key), config_(config), registry_(std::move(registry)),
          weighted_(WeightedNetwork::preprocess(registry_.network_ptr(), registry_))
    {
    }

    /// Decrypt, extract the single embedded detection, ingest, re-weight the
    /// affected arc. Crypto and payload failures drop the envelope and return
    /// nullopt; registry validation errors propagate.
    std::optional<IngestOutcome> receive_envelope(const ReportEnvelope& env, const Location& claimed, TimeMs now)
    {
        PlainReport plain;
        try {
            plain = decrypt(env, key_, claimed);
        } catch (const DecryptError& e) {
            if (e.kind() == DecryptError::Kind::malformed_payload) {
                ++stats_.dropped_payload;
            } else {
                ++stats_.dropped_crypto;
            }
            return std::nullopt;
        }
        std::vector<DetectionReport> found;
        try {
            found = extract_potholes(plain.depth, plain.intensity, config_.threshold_mm, plain.location);
        } catch (const std::invalid_argument&) {
            ++stats_.dropped_payload;
            return std::nullopt;
        }
        if (found.size() != 1) {
            ++stats_.dropped_payload;
            return std::nullopt;
        }
        auto outcome = registry_.ingest_report(found.front(), now, plain.vehicle);
        weighted_.apply_update(found.front().location.arc, registry_);
        ++stats_.accepted;
        ++snapshot_;
        return outcome;
    }

    Response query(const Request& request)
    {
        ++stats_.queries;
        Response resp{snapshot_, ErrorResponse{}};
        try {
            if (const auto* r = std::get_if<RouteRequest>(&request)) {
                if (r->source.empty() || r->dest.empty()) {
                    return fail(ErrorResponse::Code::malformed, "route request needs source and dest");
                }
                resp.body = route(weighted_, r->source, r->dest);
            } else {
                const auto& c = std::get<ConditionRequest>(request);
                if (c.arc.empty()) {
                    return fail(ErrorResponse::Code::malformed, "condition request needs an arc");
                }
                resp.body = ConditionResponse{c.arc, weighted_.weight(c.arc), registry_.potholes_on_arc(c.arc)};
            }
        } catch (const NotFound& e) {
            return fail(ErrorResponse::Code::unknown_id, e.what());
        } catch (const Unreachable& e) {
            return fail(ErrorResponse::Code::unreachable, e.what());
        }
        return resp;
    }

    Response query(std::string_view line)
    {
        auto req = parse_request(line);
        if (!req) {
            ++stats_.queries;
            return fail(ErrorResponse::Code::malformed, "malformed request '" + std::string(line) + "'");
        }
        return query(*req);
    }

    const PotholeRegistry& registry() const { return registry_; }
    const WeightedNetwork& weighted() const { return weighted_; }
    const StreetNetwork& network() const { return weighted_.network(); }
    const ServerStats& stats() const { return stats_; }
    const ServerConfig& config() const { return config_; }
    std::uint64_t snapshot() const { return snapshot_; }

private:
    Response fail(ErrorResponse::Code code, std::string message)
    {
        ++stats_.query_errors;
        return {snapshot_, ErrorResponse{code, std::move(message)}};
    }

    SharedKey key_;
    ServerConfig config_;
    PotholeRegistry registry_;
    WeightedNetwork weighted_;
    ServerStats stats_;
    std::uint64_t snapshot_ = 0;
};

} // namespace pothole
