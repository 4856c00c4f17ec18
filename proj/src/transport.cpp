#include "qzk/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>

namespace qzk {

std::pair<std::unique_ptr<InProcTransport>, std::unique_ptr<InProcTransport>>
InProcTransport::make_pair() {
    auto a = std::unique_ptr<InProcTransport>(new InProcTransport());
    auto b = std::unique_ptr<InProcTransport>(new InProcTransport());
    auto q1 = std::make_shared<Queue>();
    auto q2 = std::make_shared<Queue>();
    a->out_ = q1;
    a->in_ = q2;
    b->out_ = q2;
    b->in_ = q1;
    return {std::move(a), std::move(b)};
}

void InProcTransport::send(const ProtocolMsg& msg) {
    auto frame = encode_msg(msg);
    std::lock_guard<std::mutex> lock(out_->mu);
    out_->frames.push_back(std::move(frame));
    out_->cv.notify_one();
}

ProtocolMsg InProcTransport::recv() {
    std::unique_lock<std::mutex> lock(in_->mu);
    in_->cv.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
    if (in_->frames.empty()) throw SessionAborted("transport closed");
    auto frame = std::move(in_->frames.front());
    in_->frames.pop_front();
    return decode_msg(frame);
}

namespace {

std::pair<std::string, uint16_t> split_addr(const std::string& addr) {
    auto pos = addr.rfind(':');
    if (pos == std::string::npos) throw ConfigError("address must be host:port");
    const std::string host = addr.substr(0, pos);
    const int port = std::stoi(addr.substr(pos + 1));
    if (port <= 0 || port > 65535) throw ConfigError("bad port");
    return {host.empty() ? "0.0.0.0" : host, static_cast<uint16_t>(port)};
}

sockaddr_in resolve(const std::string& host, uint16_t port) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) != 1) {
        hostent* he = gethostbyname(host.c_str());
        if (!he || he->h_addrtype != AF_INET) throw SessionAborted("cannot resolve " + host);
        std::memcpy(&sa.sin_addr, he->h_addr, sizeof(sa.sin_addr));
    }
    return sa;
}

void write_all(int fd, const uint8_t* data, size_t len) {
    while (len > 0) {
        ssize_t n = ::write(fd, data, len);
        if (n <= 0) throw SessionAborted("socket write failed");
        data += n;
        len -= static_cast<size_t>(n);
    }
}

void read_all(int fd, uint8_t* data, size_t len) {
    while (len > 0) {
        ssize_t n = ::read(fd, data, len);
        if (n <= 0) throw SessionAborted("socket closed mid-frame");
        data += n;
        len -= static_cast<size_t>(n);
    }
}

}  // namespace

std::unique_ptr<TcpTransport> TcpTransport::listen_one(const std::string& addr) {
    auto [host, port] = split_addr(addr);
    int server = ::socket(AF_INET, SOCK_STREAM, 0);
    if (server < 0) throw SessionAborted("socket() failed");
    int one = 1;
    ::setsockopt(server, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa = resolve(host, port);
    if (::bind(server, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) != 0) {
        ::close(server);
        throw SessionAborted("bind failed on " + addr);
    }
    if (::listen(server, 1) != 0) {
        ::close(server);
        throw SessionAborted("listen failed");
    }
    int fd = ::accept(server, nullptr, nullptr);
    ::close(server);
    if (fd < 0) throw SessionAborted("accept failed");
    return std::unique_ptr<TcpTransport>(new TcpTransport(fd));
}

std::unique_ptr<TcpTransport> TcpTransport::connect(const std::string& addr) {
    auto [host, port] = split_addr(addr);
    sockaddr_in sa = resolve(host, port);
    // The listener may come up a moment later; retry with a fresh socket,
    // since a socket that failed to connect cannot be reused.
    for (int attempt = 0; attempt < 50; ++attempt) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) throw SessionAborted("socket() failed");
        if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0)
            return std::unique_ptr<TcpTransport>(new TcpTransport(fd));
        ::close(fd);
        ::usleep(100 * 1000);
    }
    throw SessionAborted("connect failed to " + addr);
}

TcpTransport::~TcpTransport() {
    if (fd_ >= 0) ::close(fd_);
}

void TcpTransport::send(const ProtocolMsg& msg) {
    auto frame = encode_msg(msg);
    write_all(fd_, frame.data(), frame.size());
}

ProtocolMsg TcpTransport::recv() {
    uint8_t header[4];
    read_all(fd_, header, 4);
    uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len = (len << 8) | header[i];
    if (len > (1u << 26)) throw FrameError("oversized frame");
    std::vector<uint8_t> frame(header, header + 4);
    frame.resize(4 + len);
    read_all(fd_, frame.data() + 4, len);
    return decode_msg(frame);
}

// Drivers live here so protocol.cpp does not depend on sockets.

Verdict drive_prover(ProverSession prover, Transport& t) {
    while (true) {
        ProtocolMsg msg = t.recv();
        StepResult res = prover.on_message(msg);
        if (res.reply) t.send(*res.reply);
        if (res.verdict) return *res.verdict;
    }
}

Verdict drive_verifier(VerifierSession verifier, Transport& t) {
    t.send(verifier.start());
    while (true) {
        ProtocolMsg msg = t.recv();
        StepResult res = verifier.on_message(msg);
        if (res.reply) t.send(*res.reply);
        if (res.verdict) return *res.verdict;
    }
}

}  // namespace qzk
