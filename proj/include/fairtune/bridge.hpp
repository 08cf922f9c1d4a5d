#ifndef FAIRTUNE_BRIDGE_HPP
#define FAIRTUNE_BRIDGE_HPP

// Client side of the evaluator wire protocol. The bridge is either a child
// process speaking over stdin/stdout ("exec:<shell command>") or a TCP
// server ("tcp://host:port"); both use newline-delimited JSON.

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <string>

#include "fairtune/evaluation.hpp"
#include "fairtune/protocol.hpp"

namespace fairtune {

/// Owns a file descriptor.
class UniqueFd {
public:
    UniqueFd() = default;
    explicit UniqueFd(int fd) : fd_(fd) {}
    UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    UniqueFd& operator=(UniqueFd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = std::exchange(o.fd_, -1);
        }
        return *this;
    }
    UniqueFd(UniqueFd const&) = delete;
    UniqueFd& operator=(UniqueFd const&) = delete;
    ~UniqueFd() { reset(); }

    int get() const { return fd_; }
    explicit operator bool() const { return fd_ >= 0; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

/// Newline-framed reads/writes over a pair of descriptors, with a timeout.
class LineChannel {
public:
    LineChannel() = default;
    LineChannel(UniqueFd read_fd, UniqueFd write_fd) : in_(std::move(read_fd)), out_(std::move(write_fd)) {}

    void write_line(std::string const& line) {
        std::string buf = line + "\n";
        std::size_t off = 0;
        while (off < buf.size()) {
            auto n = ::write(out_.get(), buf.data() + off, buf.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw EvaluatorUnavailable(std::string("bridge write failed: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(std::chrono::milliseconds timeout) {
        auto const deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (auto pos = buffer_.find('\n'); pos != std::string::npos) {
                std::string line = buffer_.substr(0, pos);
                buffer_.erase(0, pos + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                return line;
            }
            auto const left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) throw Timeout("bridge did not answer within " + std::to_string(timeout.count()) + " ms");
            pollfd p{in_.get(), POLLIN, 0};
            int rc = ::poll(&p, 1, static_cast<int>(left.count()));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw EvaluatorUnavailable(std::string("poll failed: ") + std::strerror(errno));
            }
            if (rc == 0) continue;
            char chunk[4096];
            auto n = ::read(in_.get(), chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw EvaluatorUnavailable(std::string("bridge read failed: ") + std::strerror(errno));
            }
            if (n == 0) throw EvaluatorUnavailable("bridge closed the connection");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void close_write() { out_.reset(); }

private:
    UniqueFd in_;
    UniqueFd out_;
    std::string buffer_;
};

struct BridgeOptions {
    std::chrono::milliseconds handshake_timeout{10'000};
    std::chrono::milliseconds request_timeout{30 * 60 * 1000};
};

/// Protocol client shared by both transports.
class BridgeEvaluator : public Evaluator {
public:
    BridgeEvaluator(LineChannel channel, std::string description, BridgeOptions options)
        : channel_(std::move(channel)), description_(std::move(description)), options_(options) {
        hello_ = protocol::decode_hello(channel_.read_line(options_.handshake_timeout));
        if (hello_.protocol != kProtocolVersion)
            throw ProtocolError("bridge speaks protocol " + std::to_string(hello_.protocol));
    }

    /// Requests keep their own ids; a fresh id is assigned when the caller left it at 0.
    EvaluationResponse evaluate(EvaluationRequest const& request) override {
        EvaluationRequest req = request;
        if (req.request_id == 0) req.request_id = ++next_id_;
        auto resp = send_raw(protocol::encode(req));
        if (resp.request_id != req.request_id)
            throw ProtocolError("response id " + std::to_string(resp.request_id) + " for request " +
                                std::to_string(req.request_id));
        resp.request_id = request.request_id;
        return resp;
    }

    /// Sends an arbitrary line and decodes the reply (used by conformance checks).
    EvaluationResponse send_raw(std::string const& line) {
        channel_.write_line(line);
        return protocol::decode_response(channel_.read_line(options_.request_timeout));
    }

    Hello const& hello() const { return hello_; }
    std::string describe() const override { return description_ + " [" + hello_.mode + "]"; }

protected:
    LineChannel channel_;

private:
    std::string description_;
    BridgeOptions options_;
    Hello hello_;
    std::int64_t next_id_ = 0;
};

/// Bridge running as a child process; stdout carries protocol, stderr passes through.
class ProcessBridge final : public BridgeEvaluator {
public:
    static std::unique_ptr<ProcessBridge> spawn(std::string const& command, BridgeOptions options = {}) {
        // Close-on-exec so bridges spawned by parallel workers do not inherit
        // each other's pipes (a leaked write end would hide EOF).
        int to_child[2], from_child[2];
        if (::pipe2(to_child, O_CLOEXEC) != 0) throw EvaluatorUnavailable("pipe failed");
        if (::pipe2(from_child, O_CLOEXEC) != 0) {
            ::close(to_child[0]);
            ::close(to_child[1]);
            throw EvaluatorUnavailable("pipe failed");
        }
        ::signal(SIGPIPE, SIG_IGN);
        pid_t pid = ::fork();
        if (pid < 0) {
            for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
            throw EvaluatorUnavailable("fork failed");
        }
        if (pid == 0) {
            ::setpgid(0, 0);  // own group, so the shell and whatever it starts can be signalled together
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::setpgid(pid, pid);  // also from the parent, closing the race with the child's own call
        ::close(to_child[0]);
        ::close(from_child[1]);
        LineChannel ch{UniqueFd(from_child[0]), UniqueFd(to_child[1])};
        try {
            return std::unique_ptr<ProcessBridge>(new ProcessBridge(std::move(ch), command, options, pid));
        } catch (...) {
            ::kill(-pid, SIGTERM);
            ::waitpid(pid, nullptr, 0);
            throw;
        }
    }

    ~ProcessBridge() override {
        channel_.close_write();
        // Give the bridge a moment to exit on EOF before forcing it.
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
            ::usleep(10'000);
        }
        ::kill(-pid_, SIGTERM);
        ::waitpid(pid_, nullptr, 0);
    }

private:
    ProcessBridge(LineChannel ch, std::string const& cmd, BridgeOptions options, pid_t pid)
        : BridgeEvaluator(std::move(ch), "exec:" + cmd, options), pid_(pid) {}

    pid_t pid_;
};

class TcpBridge final : public BridgeEvaluator {
public:
    static std::unique_ptr<TcpBridge> connect(std::string const& host, std::string const& port,
                                              BridgeOptions options = {}) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* res = nullptr;
        if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
            throw EvaluatorUnavailable("cannot resolve " + host + ": " + ::gai_strerror(rc));
        std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
        for (auto* ai = res; ai; ai = ai->ai_next) {
            UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
            if (!fd) continue;
            if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) != 0) continue;
            ::signal(SIGPIPE, SIG_IGN);
            UniqueFd dup(::fcntl(fd.get(), F_DUPFD_CLOEXEC, 0));
            if (!dup) throw EvaluatorUnavailable("dup failed");
            LineChannel ch{std::move(fd), std::move(dup)};
            return std::unique_ptr<TcpBridge>(new TcpBridge(std::move(ch), "tcp://" + host + ":" + port, options));
        }
        throw EvaluatorUnavailable("cannot connect to " + host + ":" + port);
    }

private:
    TcpBridge(LineChannel ch, std::string desc, BridgeOptions options)
        : BridgeEvaluator(std::move(ch), std::move(desc), options) {}
};

/// "tcp://host:port" or "exec:<command>"; a bare string is treated as a command.
inline std::unique_ptr<BridgeEvaluator> connect_bridge(std::string const& endpoint, BridgeOptions options = {}) {
    constexpr std::string_view tcp = "tcp://";
    constexpr std::string_view exec = "exec:";
    if (endpoint.rfind(tcp, 0) == 0) {
        auto rest = endpoint.substr(tcp.size());
        auto colon = rest.rfind(':');
        if (colon == std::string::npos) throw ConfigError("tcp endpoint needs host:port: " + endpoint);
        return TcpBridge::connect(rest.substr(0, colon), rest.substr(colon + 1), options);
    }
    std::string cmd = endpoint.rfind(exec, 0) == 0 ? endpoint.substr(exec.size()) : endpoint;
    if (cmd.empty()) throw ConfigError("empty bridge command");
    return ProcessBridge::spawn(cmd, options);
}

}  // namespace fairtune

#endif
