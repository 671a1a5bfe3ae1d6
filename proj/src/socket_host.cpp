#include "agentnet/socket_host.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>

namespace agentnet {

namespace {

struct Endpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0;
};

Endpoint parse_endpoint(const std::string& host_port) {
    Endpoint ep;
    if (host_port.empty()) {
        return ep;
    }
    auto colon = host_port.rfind(':');
    if (colon == std::string::npos) {
        raise(Errc::ScenarioInvalid, "host_port '" + host_port + "' needs host:port");
    }
    ep.host = host_port.substr(0, colon);
    ep.port = std::uint16_t(std::stoi(host_port.substr(colon + 1)));
    return ep;
}

bool read_exact(int fd, void* buf, std::size_t n) {
    auto* p = static_cast<char*>(buf);
    while (n > 0) {
        ssize_t got = ::recv(fd, p, n, 0);
        if (got <= 0) {
            return false;
        }
        p += got;
        n -= std::size_t(got);
    }
    return true;
}

bool write_all(int fd, const std::string& bytes) {
    const char* p = bytes.data();
    std::size_t n = bytes.size();
    while (n > 0) {
        ssize_t sent = ::send(fd, p, n, 0);
        if (sent <= 0) {
            return false;
        }
        p += sent;
        n -= std::size_t(sent);
    }
    return true;
}

// Reads one full frame off the socket (header, payload, tag).
bool read_frame_bytes(int fd, std::string& out) {
    std::uint8_t header[kFrameHeaderLen];
    if (!read_exact(fd, header, sizeof(header))) {
        return false;
    }
    std::uint32_t len = (std::uint32_t(header[4]) << 24) | (std::uint32_t(header[5]) << 16) |
                        (std::uint32_t(header[6]) << 8) | std::uint32_t(header[7]);
    if (len > kMaxPayloadLen) {
        return false;
    }
    out.assign(reinterpret_cast<const char*>(header), sizeof(header));
    out.resize(kFrameHeaderLen + len + kFrameTagLen);
    return read_exact(fd, out.data() + kFrameHeaderLen, len + kFrameTagLen);
}

int connect_to(const Endpoint& ep, int timeout_ms) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) {
        return -1;
    }
    timeval tv{timeout_ms / 1000, (timeout_ms % 1000) * 1000};
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(ep.port);
    if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        return -1;
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        return -1;
    }
    return fd;
}

} // namespace

struct SocketHost::Listener {
    FirmId firm;
    Endpoint endpoint;
    std::atomic<int> fd{-1};
};

struct SocketHost::Waiter {
    bool done = false;
    std::optional<AgentCapsule> capsule;
    std::string error;
};

SocketHost::SocketHost(ScenarioData scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)), rng_(seed) {
    for (const auto& [id, cfg] : scenario_.configs) {
        platforms_.emplace(id, PlatformNode(cfg, scenario_.stores.at(id)));
        platform_mutex_.emplace(id, std::make_unique<std::mutex>());
    }
}

SocketHost::~SocketHost() {
    stop();
}

Millis SocketHost::uptime_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - started_)
        .count();
}

void SocketHost::count_bytes(const FirmId& from, const FirmId& to, std::size_t n) {
    std::lock_guard<std::mutex> lock(traffic_mutex_);
    sent_[{from, to}] += n;
}

void SocketHost::start() {
    started_ = std::chrono::steady_clock::now();
    running_ = true;
    for (const auto& [id, cfg] : scenario_.configs) {
        auto listener = std::make_unique<Listener>();
        listener->firm = id;
        listener->endpoint = parse_endpoint(cfg.host_port);
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) {
            raise(Errc::Undeliverable, "cannot create socket for " + id);
        }
        int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(listener->endpoint.port);
        if (::inet_pton(AF_INET, listener->endpoint.host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            raise(Errc::Undeliverable, id + ": bad listen address " + listener->endpoint.host);
        }
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(fd, 16) != 0) {
            ::close(fd);
            raise(Errc::Undeliverable, id + ": cannot bind " + cfg.host_port);
        }
        socklen_t len = sizeof(addr);
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
        listener->endpoint.port = ntohs(addr.sin_port);
        listener->fd = fd;
        listeners_.push_back(std::move(listener));
    }
    for (auto& listener : listeners_) {
        listener_threads_.emplace_back([this, &listener = *listener] { serve(listener); });
    }
}

void SocketHost::stop() {
    if (!running_.exchange(false)) {
        return;
    }
    for (auto& listener : listeners_) {
        int fd = listener->fd.exchange(-1);
        if (fd >= 0) {
            ::shutdown(fd, SHUT_RDWR);
            ::close(fd);
        }
    }
    for (auto& t : listener_threads_) {
        if (t.joinable()) {
            t.join();
        }
    }
    listener_threads_.clear();
    // Workers may still be spawning more workers; drain until quiet.
    while (true) {
        std::vector<std::thread> batch;
        {
            std::lock_guard<std::mutex> lock(workers_mutex_);
            if (workers_.empty()) {
                break;
            }
            batch.swap(workers_);
        }
        for (auto& t : batch) {
            if (t.joinable()) {
                t.join();
            }
        }
    }
}

std::map<FirmId, std::string> SocketHost::endpoints() const {
    std::map<FirmId, std::string> out;
    for (const auto& listener : listeners_) {
        out[listener->firm] =
            listener->endpoint.host + ":" + std::to_string(listener->endpoint.port);
    }
    return out;
}

void SocketHost::serve(Listener& listener) {
    while (running_) {
        int listen_fd = listener.fd.load();
        if (listen_fd < 0) {
            break;
        }
        pollfd pfd{listen_fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, 100);
        if (!running_) {
            break;
        }
        if (ready <= 0) {
            continue;
        }
        int fd = ::accept(listen_fd, nullptr, nullptr);
        if (fd < 0) {
            continue;
        }
        timeval tv{2, 0};
        ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        std::lock_guard<std::mutex> lock(workers_mutex_);
        workers_.emplace_back([this, fd, firm = listener.firm] { session(fd, firm); });
    }
}

void SocketHost::session(int fd, const FirmId& self) {
    FirmId sender;
    const PlatformConfig& cfg = scenario_.configs.at(self);
    std::string bytes;
    while (running_ && read_frame_bytes(fd, bytes)) {
        if (sender.empty()) {
            // Session handshake: HELLO names the sender, tag checked after.
            Frame hello;
            try {
                hello = peek_frame(bytes);
            } catch (const Error&) {
                break;
            }
            auto doc = parse_doc(hello.payload);
            if (hello.msg_type != MsgType::Hello || !doc || !doc->is_object() ||
                !doc->contains("sender") || !(*doc)["sender"].is_string()) {
                break;
            }
            FirmId claimed = (*doc)["sender"].get<std::string>();
            auto key = cfg.keys.find(claimed);
            if (key == cfg.keys.end()) {
                break;
            }
            try {
                decode_frame(bytes, key->second);
            } catch (const Error&) {
                break;
            }
            sender = claimed;
            std::string ack = encode_frame(MsgType::Ack, "{}", key->second);
            count_bytes(self, sender, ack.size());
            if (!write_all(fd, ack)) {
                break;
            }
            continue;
        }

        const Key32& key = cfg.keys.at(sender);
        Frame frame;
        try {
            frame = decode_frame(bytes, key);
        } catch (const Error&) {
            break;
        }
        Reaction reaction;
        {
            std::lock_guard<std::mutex> lock(*platform_mutex_.at(self));
            reaction = platforms_.at(self).on_frame(frame.msg_type, frame.payload, sender,
                                                    uptime_ms());
        }
        if (reaction.reply) {
            std::string reply = encode_frame(reaction.reply->first, reaction.reply->second, key);
            count_bytes(self, sender, reply.size());
            if (!write_all(fd, reply)) {
                break;
            }
        }
        handle_reaction(self, std::move(reaction));
    }
    ::close(fd);
}

void SocketHost::handle_reaction(const FirmId& firm, Reaction reaction) {
    if (reaction.outbound) {
        OutboundTransfer out = std::move(*reaction.outbound);
        std::lock_guard<std::mutex> lock(workers_mutex_);
        workers_.emplace_back([this, firm, out = std::move(out)] { dispatch_leg(firm, out); });
    }
    if (reaction.delivered_home) {
        std::lock_guard<std::mutex> lock(waiters_mutex_);
        auto it = waiters_.find(reaction.delivered_home->agent_id_hex());
        if (it != waiters_.end()) {
            it->second->capsule = std::move(reaction.delivered_home);
            it->second->done = true;
        }
    }
    if (reaction.error_notice) {
        std::lock_guard<std::mutex> lock(waiters_mutex_);
        auto it = waiters_.find(reaction.error_notice->agent_id_hex);
        if (it != waiters_.end()) {
            it->second->error = reaction.error_notice->message;
            it->second->done = true;
        }
    }
}

void SocketHost::dispatch_leg(const FirmId& from, OutboundTransfer out) {
    const PlatformConfig& cfg = scenario_.configs.at(from);
    auto key = cfg.keys.find(out.dest);
    if (key == cfg.keys.end()) {
        std::lock_guard<std::mutex> lock(waiters_mutex_);
        auto it = waiters_.find(out.agent_id_hex);
        if (it != waiters_.end()) {
            it->second->error = "no key toward " + out.dest;
            it->second->done = true;
        }
        return;
    }
    Endpoint dest_ep;
    for (const auto& listener : listeners_) {
        if (listener->firm == out.dest) {
            dest_ep = listener->endpoint;
        }
    }
    std::string hello;
    {
        Doc d = Doc::object();
        d["sender"] = from;
        hello = encode_frame(MsgType::Hello, canonical_encode(d), key->second);
    }
    std::string frame = encode_frame(out.type, out.payload, key->second);

    for (std::size_t attempt = 0; attempt < 16 && running_; ++attempt) {
        int fd = connect_to(dest_ep, 2000);
        if (fd < 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_at(attempt)));
            continue;
        }
        std::string reply_bytes;
        bool ok = false;
        count_bytes(from, out.dest, hello.size());
        if (write_all(fd, hello) && read_frame_bytes(fd, reply_bytes)) {
            count_bytes(from, out.dest, frame.size());
            if (write_all(fd, frame) && read_frame_bytes(fd, reply_bytes)) {
                ok = true;
            }
        }
        ::close(fd);
        if (!ok) {
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_at(attempt)));
            continue;
        }
        Frame reply;
        try {
            reply = decode_frame(reply_bytes, key->second);
        } catch (const Error&) {
            continue;
        }
        std::lock_guard<std::mutex> lock(*platform_mutex_.at(from));
        if (reply.msg_type == MsgType::Ack) {
            platforms_.at(from).on_outbound_settled(out.agent_id_hex);
            return;
        }
        auto doc = parse_doc(reply.payload);
        std::string code = doc && doc->is_object() && doc->contains("code")
                               ? (*doc)["code"].get<std::string>()
                               : "";
        if (code == "Replay") {
            platforms_.at(from).on_outbound_settled(out.agent_id_hex);
            return;
        }
        platforms_.at(from).on_outbound_failed(out.agent_id_hex);
        std::lock_guard<std::mutex> wlock(waiters_mutex_);
        auto it = waiters_.find(out.agent_id_hex);
        if (it != waiters_.end()) {
            it->second->error = "rejected at " + out.dest + ": " + code;
            it->second->done = true;
        }
        return;
    }
    std::lock_guard<std::mutex> lock(waiters_mutex_);
    auto it = waiters_.find(out.agent_id_hex);
    if (it != waiters_.end()) {
        it->second->error = "undeliverable toward " + out.dest;
        it->second->done = true;
    }
}

bool SocketHost::hello_mesh() {
    bool all_ok = true;
    for (const auto& [id, cfg] : scenario_.configs) {
        for (const auto& [peer, key] : cfg.keys) {
            Endpoint ep;
            for (const auto& listener : listeners_) {
                if (listener->firm == peer) {
                    ep = listener->endpoint;
                }
            }
            int fd = connect_to(ep, 2000);
            if (fd < 0) {
                all_ok = false;
                continue;
            }
            Doc d = Doc::object();
            d["sender"] = id;
            std::string hello = encode_frame(MsgType::Hello, canonical_encode(d), key);
            std::string reply;
            count_bytes(id, peer, hello.size());
            bool ok = write_all(fd, hello) && read_frame_bytes(fd, reply);
            if (ok) {
                try {
                    ok = decode_frame(reply, key).msg_type == MsgType::Ack;
                } catch (const Error&) {
                    ok = false;
                }
            }
            ::close(fd);
            all_ok = all_ok && ok;
        }
    }
    return all_ok;
}

Report SocketHost::run_query(const QueryRequest& request, Millis timeout_ms) {
    AgentId agent_id{};
    {
        std::lock_guard<std::mutex> lock(waiters_mutex_);
        for (int half = 0; half < 2; ++half) {
            std::uint64_t word = rng_();
            for (int i = 0; i < 8; ++i) {
                agent_id[half * 8 + i] = std::uint8_t(word >> (8 * i));
            }
        }
    }
    AgentCapsule capsule = build_query_capsule(scenario_, request, agent_id);
    const std::string agent_hex = capsule.agent_id_hex();
    auto waiter = std::make_shared<Waiter>();
    {
        std::lock_guard<std::mutex> lock(waiters_mutex_);
        waiters_[agent_hex] = waiter;
    }

    Reaction reaction;
    {
        std::lock_guard<std::mutex> lock(*platform_mutex_.at(request.home));
        reaction = platforms_.at(request.home).launch(std::move(capsule), uptime_ms());
    }
    handle_reaction(request.home, std::move(reaction));

    // Bounded poll: completion flips done under the waiters mutex.
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    bool finished = false;
    Waiter outcome;
    while (std::chrono::steady_clock::now() < deadline) {
        {
            std::lock_guard<std::mutex> lock(waiters_mutex_);
            if (waiter->done) {
                finished = true;
                outcome = *waiter;
                break;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    {
        std::lock_guard<std::mutex> lock(waiters_mutex_);
        waiters_.erase(agent_hex);
    }

    std::vector<LinkTraffic> traffic;
    {
        std::lock_guard<std::mutex> tlock(traffic_mutex_);
        std::map<std::pair<FirmId, FirmId>, LinkTraffic> rows;
        for (const auto& [pair, bytes] : sent_) {
            auto norm = std::minmax(pair.first, pair.second);
            LinkTraffic& row = rows[{norm.first, norm.second}];
            row.a = norm.first;
            row.b = norm.second;
            if (pair.first == norm.first) {
                row.a_to_b += bytes;
            } else {
                row.b_to_a += bytes;
            }
        }
        for (const auto& [pair, row] : rows) {
            (void)pair;
            traffic.push_back(row);
        }
    }

    if (!finished) {
        return failure_report(request.to_doc(), request.home, agent_hex, "timeout");
    }
    if (outcome.capsule) {
        return aggregate(*outcome.capsule, request.to_doc(), false, std::move(traffic));
    }
    return failure_report(request.to_doc(), request.home, agent_hex, outcome.error);
}

std::vector<RegistryEntry> SocketHost::registry(const FirmId& firm) {
    std::lock_guard<std::mutex> lock(*platform_mutex_.at(firm));
    return platforms_.at(firm).registry_snapshot();
}

} // namespace agentnet
