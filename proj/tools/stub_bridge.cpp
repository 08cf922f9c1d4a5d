// Protocol-conformant evaluator bridge backed by the synthetic landscape.
// Serves newline-delimited JSON on stdin/stdout, or on one TCP connection
// with --tcp. Diagnostics go to stderr only.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairtune/synthetic.hpp"

namespace {

using namespace fairtune;

std::string handle(SyntheticLandscape const& land, std::string const& line) {
    EvaluationResponse resp;
    resp.request_id = -1;
    try {
        auto j = nlohmann::json::parse(line);
        if (j.is_object() && j.contains("id") && j["id"].is_number_integer()) resp.request_id = j["id"].get<std::int64_t>();
    } catch (nlohmann::json::exception const&) {
    }
    try {
        auto req = protocol::decode_request(line);
        resp = synthetic_evaluate(land, req);
    } catch (ProtocolError const& e) {
        resp.records.clear();
        resp.error = e.what();
    }
    return protocol::encode(resp);
}

// Returns false when the peer is gone.
bool write_all(int fd, std::string const& s) {
    std::size_t off = 0;
    while (off < s.size()) {
        auto n = ::write(fd, s.data() + off, s.size() - off);
        if (n <= 0) return false;
        off += static_cast<std::size_t>(n);
    }
    return true;
}

int serve(SyntheticLandscape const& land, int in_fd, int out_fd, long fail_after) {
    if (!write_all(out_fd, protocol::encode(Hello{kProtocolVersion, "stub"}) + "\n")) return 1;
    std::string buf;
    char chunk[4096];
    long served = 0;
    for (;;) {
        auto pos = buf.find('\n');
        if (pos == std::string::npos) {
            auto n = ::read(in_fd, chunk, sizeof chunk);
            if (n <= 0) return 0;  // input closed: clean shutdown
            buf.append(chunk, static_cast<std::size_t>(n));
            continue;
        }
        std::string line = buf.substr(0, pos);
        buf.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (fail_after >= 0 && served >= fail_after) {
            std::cerr << "stub bridge: simulated failure after " << served << " requests\n";
            return 1;
        }
        if (!write_all(out_fd, handle(land, line) + "\n")) return 1;
        ++served;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetic evaluator bridge"};
    std::uint64_t seed = 0;
    std::string landscape_path;
    int tcp_port = -1;
    long fail_after = -1;
    app.add_option("--seed", seed, "Landscape seed");
    app.add_option("--landscape", landscape_path, "JSON file with landscape parameters")->check(CLI::ExistingFile);
    app.add_option("--tcp", tcp_port, "Serve one TCP connection on this port (0: any free port, printed on stdout)");
    app.add_option("--fail-after", fail_after, "Exit abruptly after this many requests (fault injection)");
    CLI11_PARSE(app, argc, argv);

    SyntheticLandscape land;
    if (!landscape_path.empty()) {
        std::ifstream in(landscape_path);
        try {
            land = landscape_from_json(nlohmann::json::parse(in));
        } catch (std::exception const& e) {
            std::cerr << "stub bridge: bad landscape file: " << e.what() << '\n';
            return 2;
        }
    }
    if (app.count("--seed")) land.seed = seed;

    if (tcp_port < 0) return serve(land, STDIN_FILENO, STDOUT_FILENO, fail_after);

    int srv = ::socket(AF_INET, SOCK_STREAM, 0);
    int one = 1;
    ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(tcp_port));
    if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(srv, 1) != 0) {
        std::perror("stub bridge");
        return 1;
    }
    socklen_t len = sizeof addr;
    ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &len);
    std::cout << ntohs(addr.sin_port) << std::endl;
    int conn = ::accept(srv, nullptr, nullptr);
    ::close(srv);
    if (conn < 0) return 1;
    int rc = serve(land, conn, conn, fail_after);
    ::close(conn);
    return rc;
}
