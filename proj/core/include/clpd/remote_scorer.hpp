#pragma once

// Client side of the newline-delimited JSON scoring protocol.
//
//   request:  {"id": int, "a": str, "la": str, "b": str, "lb": str}
//   response: {"id": int, "score": float}   or   {"id": int, "error": str}
//
// One TCP connection per batch; responses may arrive in any order and are
// matched back to requests by id. Unknown response fields are ignored.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "clpd/analysis.hpp"

namespace clpd {

class RemoteScorer final : public Scorer {
public:
    struct Options {
        std::string host = "127.0.0.1";
        std::uint16_t port = 0;
        std::chrono::milliseconds timeout{30000};
        std::size_t batch_size = 64;
        std::size_t max_in_flight = 1;
    };

    explicit RemoteScorer(Options opts);

    /// "host:port" or ":port".
    static Options parse_address(std::string_view address);

    std::vector<double> score_batch(std::span<const PairText> pairs) const override;
    std::string id() const override;

    const Options& options() const noexcept { return opts_; }

private:
    std::vector<double> run_batch(std::span<const PairText> pairs, long long first_id) const;

    Options opts_;
    mutable std::atomic<long long> next_id_{0};
};

nlohmann::json make_score_request(long long id, const PairText& pair);

}  // namespace clpd
