#include "clpd/remote_scorer.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <future>
#include <map>

#include "clpd/error.hpp"

namespace clpd {

namespace {

class Socket {
public:
    explicit Socket(int fd) : fd_(fd) {}
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() {
        if (fd_ >= 0) ::close(fd_);
    }
    int get() const noexcept { return fd_; }

private:
    int fd_;
};

std::vector<long long> id_range(long long first, std::size_t n) {
    std::vector<long long> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = first + static_cast<long long>(i);
    return ids;
}

}  // namespace

nlohmann::json make_score_request(long long id, const PairText& pair) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["a"] = pair.a;
    j["la"] = pair.la;
    j["b"] = pair.b;
    j["lb"] = pair.lb;
    return nlohmann::json(j);
}

RemoteScorer::RemoteScorer(Options opts) : opts_(std::move(opts)) {
    if (opts_.batch_size == 0) opts_.batch_size = 1;
    if (opts_.max_in_flight == 0) opts_.max_in_flight = 1;
}

RemoteScorer::Options RemoteScorer::parse_address(std::string_view address) {
    Options o;
    auto colon = address.rfind(':');
    if (colon == std::string_view::npos) throw DataError("remote scorer address must be host:port");
    if (colon > 0) o.host = std::string(address.substr(0, colon));
    auto port = address.substr(colon + 1);
    unsigned value = 0;
    auto [p, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || p != port.data() + port.size() || value == 0 || value > 65535) {
        throw DataError("bad port in remote scorer address '" + std::string(address) + "'");
    }
    o.port = static_cast<std::uint16_t>(value);
    return o;
}

std::string RemoteScorer::id() const { return "remote:" + opts_.host + ":" + std::to_string(opts_.port); }

std::vector<double> RemoteScorer::score_batch(std::span<const PairText> pairs) const {
    std::vector<double> out(pairs.size());
    const std::size_t bs = opts_.batch_size;
    std::size_t offset = 0;
    while (offset < pairs.size()) {
        std::vector<std::pair<std::size_t, std::future<std::vector<double>>>> wave;
        for (std::size_t k = 0; k < opts_.max_in_flight && offset < pairs.size(); ++k) {
            const std::size_t n = std::min(bs, pairs.size() - offset);
            const long long first = next_id_.fetch_add(static_cast<long long>(n));
            auto sub = pairs.subspan(offset, n);
            if (opts_.max_in_flight == 1) {
                std::promise<std::vector<double>> done;
                done.set_value(run_batch(sub, first));
                wave.emplace_back(offset, done.get_future());
            } else {
                wave.emplace_back(offset, std::async(std::launch::async, [this, sub, first] { return run_batch(sub, first); }));
            }
            offset += n;
        }
        for (auto& [start, fut] : wave) {
            auto scores = fut.get();
            std::copy(scores.begin(), scores.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
        }
    }
    return out;
}

std::vector<double> RemoteScorer::run_batch(std::span<const PairText> pairs, long long first_id) const {
    const auto ids = id_range(first_id, pairs.size());
    auto fail = [&](const std::string& why) -> TransportError {
        return TransportError("remote scorer " + opts_.host + ":" + std::to_string(opts_.port) + ": " + why, ids);
    };

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(opts_.port);
    if (int rc = ::getaddrinfo(opts_.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw fail(std::string("address lookup failed: ") + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);

    timeval tv{};
    tv.tv_sec = static_cast<time_t>(opts_.timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((opts_.timeout.count() % 1000) * 1000);

    int fd = -1;
    std::string last_error = "no address";
    for (auto* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
        ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        last_error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    if (fd < 0) throw fail("connect failed: " + last_error);
    Socket sock(fd);

    std::string payload;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        payload += make_score_request(ids[i], pairs[i]).dump();
        payload.push_back('\n');
    }
    std::size_t sent = 0;
    while (sent < payload.size()) {
        ssize_t n = ::send(sock.get(), payload.data() + sent, payload.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) throw fail(std::string("send failed: ") + std::strerror(errno));
        sent += static_cast<std::size_t>(n);
    }

    std::map<long long, double> got;
    std::string buf;
    char chunk[8192];
    while (got.size() < pairs.size()) {
        ssize_t n = ::recv(sock.get(), chunk, sizeof chunk, 0);
        if (n == 0) throw fail("connection closed after " + std::to_string(got.size()) + " responses");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw fail(errno == EAGAIN || errno == EWOULDBLOCK ? std::string("timed out")
                                                               : std::string("recv failed: ") + std::strerror(errno));
        }
        buf.append(chunk, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = buf.find('\n')) != std::string::npos) {
            std::string line = buf.substr(0, nl);
            buf.erase(0, nl + 1);
            if (line.empty() || line == "\r") continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception&) {
                throw fail("malformed response line");
            }
            if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) throw fail("response without id");
            const long long id = j["id"].get<long long>();
            if (id < first_id || id >= first_id + static_cast<long long>(pairs.size())) {
                throw fail("unexpected response id " + std::to_string(id));
            }
            if (j.contains("error")) throw fail("server error for id " + std::to_string(id) + ": " + j["error"].dump());
            if (!j.contains("score") || !j["score"].is_number()) throw fail("response without score");
            const double s = j["score"].get<double>();
            if (!(s >= 0.0 && s <= 1.0)) throw fail("score outside [0, 1]");
            got[id] = s;
        }
    }

    std::vector<double> out(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = got.at(ids[i]);
    return out;
}

}  // namespace clpd
